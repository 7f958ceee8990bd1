#pragma once

#include <iosfwd>
#include <string>

#include "lrota/matrix.hpp"
#include "lrota/tensor.hpp"

// Text formats.
//
// Tensor file: first line "k n_1 ... n_k", then the entries in row-major
// order separated by whitespace (the writer emits one last-mode fiber per
// line). Matrix file: first line "MATRIX n m", then n rows of m entries.
// Values are printed in the shortest form that parses back to the same
// double, so write followed by read is exact.

namespace lrota {

// Shortest decimal representation that round-trips the value.
std::string format_double(double v);

void write_tensor(std::ostream& os, const DenseTensor& a);
void write_tensor_file(const std::string& path, const DenseTensor& a);
DenseTensor read_tensor(std::istream& is);
DenseTensor read_tensor_file(const std::string& path);

void write_matrix(std::ostream& os, const Matrix& m);
void write_matrix_file(const std::string& path, const Matrix& m);
Matrix read_matrix(std::istream& is);
Matrix read_matrix_file(const std::string& path);

}  // namespace lrota
