#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "infhs/simulate.hpp"
#include "infhs/types.hpp"

using namespace infhs;

namespace {

int support_count(const Vec& beta) {
  int k = 0;
  for (int j = 1; j < beta.size(); ++j)
    if (beta(j) != 0.0) ++k;
  return k;
}

std::set<int> ones_of(const Mat& z) {
  std::set<int> s;
  for (int j = 0; j < z.rows(); ++j)
    if (z(j, 0) == 1.0) s.insert(j);
  return s;
}

}  // namespace

TEST_CASE("generated instances have the promised shape and sparsity") {
  sim::SimSpec spec;
  spec.n = 100;
  spec.p = 500;
  spec.p0 = 30;
  spec.seed = 7;
  rng::Engine eng(spec.seed);
  auto [data, beta] = sim::gen_data(spec, eng);

  CHECK(data.X.rows() == 100);
  CHECK(data.X.cols() == 501);
  CHECK(data.y.size() == 100);
  CHECK(beta.size() == 501);
  CHECK((data.X.col(0).array() == 1.0).all());
  CHECK(support_count(beta) == 30);
  CHECK(beta(0) > 0.0);
  for (int j = 31; j <= 500; ++j) CHECK(beta(j) == 0.0);

  Hyperparameters hyper;
  validate(data, resolve_hyper(hyper, 1), Task::linear);
}

TEST_CASE("every nonzero effect clears the deterministic magnitude floor") {
  sim::SimSpec spec;
  spec.n = 60;
  spec.p = 40;
  spec.p0 = 25;
  spec.seed = 3;
  rng::Engine eng(spec.seed);
  auto [data, beta] = sim::gen_data(spec, eng);
  (void)data;
  const double floor = spec.v_sq * std::log(60.0) / std::sqrt(60.0);
  for (int j = 1; j <= 25; ++j) CHECK(std::abs(beta(j)) >= floor);
}

TEST_CASE("sign flips follow the configured Bernoulli rate") {
  // One large draw gives 10^4 independent signs in a single instance.
  sim::SimSpec spec;
  spec.n = 50;
  spec.p = 10000;
  spec.p0 = 10000;
  spec.seed = 11;
  rng::Engine eng(spec.seed);
  auto [data, beta] = sim::gen_data(spec, eng);
  (void)data;
  int negatives = 0;
  for (int j = 1; j <= spec.p0; ++j)
    if (beta(j) < 0.0) ++negatives;
  const double freq = static_cast<double>(negatives) / spec.p0;
  const double se = std::sqrt(0.4 * 0.6 / spec.p0);
  CHECK(std::abs(freq - 0.4) <= 3.0 * se);
}

TEST_CASE("instances are reproducible from the seed") {
  sim::SimSpec spec;
  spec.n = 40;
  spec.p = 30;
  spec.p0 = 5;
  spec.seed = 99;
  auto [a_data, a_beta] = sim::simulate_instance(spec, sim::scenario_preset("main_G4"));
  auto [b_data, b_beta] = sim::simulate_instance(spec, sim::scenario_preset("main_G4"));
  CHECK(a_data.X == b_data.X);
  CHECK(a_data.y == b_data.y);
  CHECK(a_beta == b_beta);
  REQUIRE(a_data.Z.size() == 1);
  CHECK(a_data.Z[0] == b_data.Z[0]);

  spec.seed = 100;
  auto [c_data, c_beta] = sim::simulate_instance(spec, sim::scenario_preset("main_G4"));
  CHECK(a_data.y != c_data.y);
  CHECK(a_beta != c_beta);
}

TEST_CASE("probit instances are balanced and share the linear draw stream") {
  sim::SimSpec spec;
  spec.n = 101;
  spec.p = 20;
  spec.p0 = 4;
  spec.seed = 21;

  rng::Engine eng_lin(spec.seed);
  auto [lin, beta_lin] = sim::gen_data(spec, eng_lin);

  spec.task = Task::probit;
  rng::Engine eng_pro(spec.seed);
  auto [pro, beta_pro] = sim::gen_data(spec, eng_pro);

  CHECK(beta_lin == beta_pro);
  CHECK(lin.X == pro.X);
  int ones = 0;
  for (int i = 0; i < 101; ++i) {
    CHECK((pro.y(i) == 0.0 || pro.y(i) == 1.0));
    ones += pro.y(i) == 1.0;
  }
  // Median threshold: strictly more than half of 101 latents lie above the
  // middle order statistic, i.e. exactly 50.
  CHECK(ones == 50);

  sim::SimSpec even = spec;
  even.n = 100;
  rng::Engine eng_even(even.seed);
  auto [pro_even, beta_even] = sim::gen_data(even, eng_even);
  (void)beta_even;
  CHECK(pro_even.y.sum() == doctest::Approx(50.0));
}

TEST_CASE("scenario columns mark the requested covariates") {
  sim::SimSpec spec;
  spec.n = 50;
  spec.p = 500;
  spec.p0 = 30;
  spec.seed = 13;
  rng::Engine eng(spec.seed);
  auto [data, beta] = sim::gen_data(spec, eng);
  (void)data;

  std::set<int> support;
  for (int j = 1; j <= 500; ++j)
    if (beta(j) != 0.0) support.insert(j - 1);

  SUBCASE("perfect co-data is the support indicator") {
    Mat z = sim::gen_codata(sim::scenario_preset("main_G4"), beta, eng);
    REQUIRE(z.cols() == 1);
    CHECK(ones_of(z) == support);
    CHECK(z.col(0).sum() == doctest::Approx(30.0));
  }
  SUBCASE("stratified binary picks are disjoint and correctly sized") {
    Mat z = sim::gen_codata(sim::scenario_preset("main_G2"), beta, eng);
    auto marked = ones_of(z);
    CHECK(marked.size() == 100);
    int on = 0, off = 0;
    for (int j : marked) (support.count(j) ? on : off) += 1;
    CHECK(on == 20);
    CHECK(off == 80);
  }
  SUBCASE("unstratified binary picks the requested total") {
    Mat z = sim::gen_codata(sim::scenario_preset("appendix_G1"), beta, eng);
    CHECK(ones_of(z).size() == 30);
    Mat z2 = sim::gen_codata(sim::scenario_preset("main_G1"), beta, eng);
    CHECK(ones_of(z2).size() == 100);
  }
  SUBCASE("intercept-only scenarios emit no source column") {
    Mat z = sim::gen_codata(sim::scenario_preset("main_G0"), beta, eng);
    CHECK(z.cols() == 0);
    CHECK(z.rows() == 500);
  }
}

TEST_CASE("stacked co-data shapes match the scenario family") {
  sim::SimSpec spec;
  spec.n = 30;
  spec.p = 60;
  spec.p0 = 25;
  spec.seed = 5;

  auto [with_src, beta1] = sim::simulate_instance(spec, sim::scenario_preset("main_G3"));
  (void)beta1;
  StackedCodata sc = stack_codata(with_src);
  CHECK(sc.M() == 2);
  REQUIRE(sc.n_blocks() == 1);
  CHECK(sc.block_sizes[0] == 2);
  CHECK((sc.Z.col(0).array() == 1.0).all());

  auto [no_src, beta2] = sim::simulate_instance(spec, sim::scenario_preset("appendix_G0"));
  (void)beta2;
  StackedCodata sc0 = stack_codata(no_src);
  CHECK(sc0.M() == 1);
  CHECK(sc0.block_sizes[0] == 1);
}

TEST_CASE("inconsistent requests are rejected") {
  sim::SimSpec bad;
  bad.n = 50;
  bad.p = 500;
  bad.p0 = 600;
  rng::Engine eng(1);
  CHECK_THROWS_AS((void)sim::gen_data(bad, eng), InvalidHyper);

  sim::SimSpec spec;
  spec.n = 30;
  spec.p = 40;
  spec.p0 = 10;
  rng::Engine eng2(2);
  auto [data, beta] = sim::gen_data(spec, eng2);
  (void)data;

  sim::CodataScenario wide;
  wide.kind = sim::CodataScenario::Kind::binary;
  wide.k_true = 11;  // only 10 true signals exist
  CHECK_THROWS_AS((void)sim::gen_codata(wide, beta, eng2), InvalidHyper);
  wide.k_true = 5;
  wide.k_false = 31;  // only 30 nulls exist
  CHECK_THROWS_AS((void)sim::gen_codata(wide, beta, eng2), InvalidHyper);

  CHECK_THROWS_AS((void)sim::scenario_preset("main_G9"), BadFlag);
}
