#pragma once

#include <cstddef>
#include <vector>

#include "lrota/matrix.hpp"

// Dense real tensors of order k, stored flat in row-major order (last index
// fastest). Modes are numbered 1..k throughout, matching the usual
// multilinear-algebra convention; the flat offset of (i_1, ..., i_k) is
// ((i_1 * n_2 + i_2) * n_3 + ...) + i_k with zero-based indices.

namespace lrota {

class DenseTensor {
 public:
  DenseTensor() = default;
  DenseTensor(std::vector<std::size_t> dims, double fill = 0.0);
  DenseTensor(std::vector<std::size_t> dims, std::vector<double> data);

  [[nodiscard]] std::size_t order() const { return dims_.size(); }
  [[nodiscard]] const std::vector<std::size_t>& dims() const { return dims_; }
  [[nodiscard]] std::size_t dim(std::size_t mode) const { return dims_[mode - 1]; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  [[nodiscard]] const double* data() const { return data_.data(); }
  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  // Flat offset of a zero-based multi-index.
  [[nodiscard]] std::size_t offset(const std::vector<std::size_t>& idx) const;
  double at(const std::vector<std::size_t>& idx) const { return data_[offset(idx)]; }
  double& at(const std::vector<std::size_t>& idx) { return data_[offset(idx)]; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

// One vector per mode; part i has length n_i unless documented otherwise.
struct BlockVector {
  std::vector<std::vector<double>> parts;

  BlockVector() = default;
  explicit BlockVector(std::vector<std::vector<double>> p) : parts(std::move(p)) {}
  [[nodiscard]] std::size_t order() const { return parts.size(); }
};

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator*(double s, const DenseTensor& a);

// <A, B> over matching shapes.
double inner(const DenseTensor& a, const DenseTensor& b);

// Frobenius norm.
double norm(const DenseTensor& a);

// Full contraction: sum over all entries of A times the rank-one tensor
// built from the block vector's parts.
double contract_full(const DenseTensor& a, const BlockVector& x);

// Contraction over every mode except `mode` (1-based); part `mode` of x is
// ignored and may be empty. Returns a vector of length n_mode.
std::vector<double> contract_mode(const DenseTensor& a, const BlockVector& x, std::size_t mode);

// Multilinear matrix product: mode i of A is transformed by bs[i-1], an
// m_i-by-n_i matrix. Result dims are (m_1, ..., m_k).
DenseTensor multilinear_multiply(const std::vector<Matrix>& bs, const DenseTensor& a);

// Order-k diagonal tensor with entries lambda on the superdiagonal.
DenseTensor diag_tensor(const std::vector<double>& lambda, std::size_t k);

// Superdiagonal of A, length min_i n_i.
std::vector<double> extract_diag(const DenseTensor& a);

// Sum of rank-one terms lambda_j * u1_j x ... x uk_j, computed as the
// multilinear product of the factor matrices with diag_tensor(lambda, k).
DenseTensor assemble(const std::vector<Matrix>& factors, const std::vector<double>& lambda);

}  // namespace lrota
