#pragma once

#include <cstddef>
#include <vector>

// Small dense row-major matrices. Sizes in this project are desk scale
// (tens of rows at most), so the emphasis is clarity and exactness, not
// blocking; the inner loops still go through the dispatched kernels.

namespace lrota {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  double* data() { return a_.data(); }
  [[nodiscard]] const double* data() const { return a_.data(); }
  double* row(std::size_t i) { return a_.data() + i * cols_; }
  [[nodiscard]] const double* row(std::size_t i) const { return a_.data() + i * cols_; }

  [[nodiscard]] Matrix transpose() const;
  [[nodiscard]] std::vector<double> col(std::size_t j) const;
  void set_col(std::size_t j, const std::vector<double>& v);
  void scale_col(std::size_t j, double alpha);

  // Columns listed in keep, in order.
  [[nodiscard]] Matrix select_cols(const std::vector<std::size_t>& keep) const;

  [[nodiscard]] double frobenius_norm() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// <A, B> = sum_ij A_ij B_ij
double frobenius_inner(const Matrix& a, const Matrix& b);

// ||A - B||_F
double frobenius_distance(const Matrix& a, const Matrix& b);

// Matrix with orthonormal columns, validated on construction:
// ||U^T U - I||_F must not exceed tol (default 1e-10), else DimensionError
// for shape problems or NumericalError for orthonormality defects.
class OrthonormalMatrix {
 public:
  explicit OrthonormalMatrix(Matrix m, double tol = 1e-10);

  [[nodiscard]] const Matrix& matrix() const { return m_; }
  operator const Matrix&() const { return m_; }  // NOLINT: deliberate implicit view
  [[nodiscard]] std::size_t rows() const { return m_.rows(); }
  [[nodiscard]] std::size_t cols() const { return m_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  // ||U^T U - I||_F of the stored matrix.
  [[nodiscard]] double orthonormality_defect() const;

 private:
  Matrix m_;
};

}  // namespace lrota
