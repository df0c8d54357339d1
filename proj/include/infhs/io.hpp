#pragma once

#include <string>

#include "infhs/types.hpp"

namespace infhs::io {

// Headerless numeric CSV: comma delimiter, '.' decimal, one matrix row per
// line. Readers throw IoError when the file cannot be opened and ParseError
// on malformed content (non-numeric fields, ragged rows, empty files).
Mat read_csv_matrix(const std::string& path);
Vec read_csv_vector(const std::string& path);  // single column

// Writers format every value with "%.17g" so doubles round-trip exactly and
// reruns are byte-identical. Throw IoError on failure.
void write_csv_matrix(const std::string& path, const Mat& m);
void write_csv_vector(const std::string& path, const Vec& v);

std::string format_double(double x);

}  // namespace infhs::io
