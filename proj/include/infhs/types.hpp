#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace infhs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy. The CLI maps these to exit codes: 2 for flag/parse
// problems, 3 for numerical failures, 4 for file I/O.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define INFHS_DEFINE_ERROR(NAME) \
  struct NAME : Error {          \
    using Error::Error;          \
  }

INFHS_DEFINE_ERROR(DimensionMismatch);
INFHS_DEFINE_ERROR(MissingIntercept);
INFHS_DEFINE_ERROR(InvalidHyper);
INFHS_DEFINE_ERROR(InvalidBinaryResponse);
INFHS_DEFINE_ERROR(NoPositiveRoot);
INFHS_DEFINE_ERROR(QuadratureFailure);
INFHS_DEFINE_ERROR(AcceptanceStall);
INFHS_DEFINE_ERROR(SingularSystem);
INFHS_DEFINE_ERROR(NumericalOverflow);
INFHS_DEFINE_ERROR(ElboDecrease);
INFHS_DEFINE_ERROR(NonConvergence);
INFHS_DEFINE_ERROR(DegenerateLabels);
INFHS_DEFINE_ERROR(UnsupportedCombination);
INFHS_DEFINE_ERROR(IoError);
INFHS_DEFINE_ERROR(BadFlag);
INFHS_DEFINE_ERROR(ParseError);

#undef INFHS_DEFINE_ERROR

enum class Task { linear, probit };

// Response, design matrix (column 0 is the all-ones intercept column), and
// the user-supplied co-data sources. Co-data matrices carry NO intercept
// column; the fitting engines prepend one internally, so an empty Z list
// means "intercept-only co-data".
struct Dataset {
  Vec y;               // length n
  Mat X;               // n x (p+1), column 0 all ones
  std::vector<Mat> Z;  // user sources, each p x m_d

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()) - 1; }
  int n_sources() const { return static_cast<int>(Z.size()); }
};

// Prior settings: sigma^2 ~ InvGamma(v, q); kappa_d^2 ~ InvGamma(a_d, b_d)
// per internal co-data block; s0_sq is the squared Cauchy scale of the local
// shrinkage prior. Empty a/b vectors mean "use the default (1, 10) for every
// block".
struct Hyperparameters {
  double v = 1.0;
  double q = 10.0;
  Vec a;  // length = number of internal co-data blocks, or empty
  Vec b;
  double s0_sq = 1.0;
};

// Internal stacked co-data: Z = [1_p | Z_1 | ... | Z_D]. The prepended ones
// column belongs to the first block, so with no user sources there is a
// single block of size 1, and with sources the first block has size
// 1 + m_1. kappa^2 is one scalar per block.
struct StackedCodata {
  Mat Z;                         // p x M, column 0 all ones
  std::vector<int> block_sizes;  // sums to M
  int M() const { return static_cast<int>(Z.cols()); }
  int n_blocks() const { return static_cast<int>(block_sizes.size()); }
};

StackedCodata stack_codata(const Dataset& data);

// Returns a copy of hyper with a/b filled to one entry per internal block
// (defaults 1 and 10). Throws InvalidHyper on bad sizes or non-positive
// entries.
Hyperparameters resolve_hyper(const Hyperparameters& hyper, int n_blocks);

void validate(const Dataset& data, const Hyperparameters& hyper, Task task);

// Optional preprocessing (off by default everywhere): centers and scales the
// non-intercept columns of X and every non-binary co-data column to unit
// sample standard deviation. Constant columns are centered only.
Dataset standardize(const Dataset& data);

}  // namespace infhs
