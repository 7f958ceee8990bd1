#include "lrota/matrix.hpp"

#include <cmath>
#include <string>

#include "lrota/errors.hpp"
#include "lrota/kernels.hpp"

namespace lrota {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

std::vector<double> Matrix::col(std::size_t j) const {
  std::vector<double> v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_col(std::size_t j, const std::vector<double>& v) {
  if (v.size() != rows_) throw DimensionError("set_col: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

void Matrix::scale_col(std::size_t j, double alpha) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) *= alpha;
}

Matrix Matrix::select_cols(const std::vector<std::size_t>& keep) const {
  Matrix out(rows_, keep.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < keep.size(); ++j) {
      if (keep[j] >= cols_) throw DimensionError("select_cols: index out of range");
      out(i, j) = (*this)(i, keep[j]);
    }
  return out;
}

double Matrix::frobenius_norm() const {
  return std::sqrt(kernels::dot(a_.data(), a_.data(), a_.size()));
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_)
    throw DimensionError("matmul: " + std::to_string(a.rows_) + "x" + std::to_string(a.cols_) +
                         " times " + std::to_string(b.rows_) + "x" + std::to_string(b.cols_));
  Matrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k)
      kernels::axpy(a(i, k), b.row(k), c.row(i), b.cols_);
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionError("matrix add: shape mismatch");
  Matrix c = a;
  kernels::axpy(1.0, b.data(), c.data(), c.a_.size());
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionError("matrix sub: shape mismatch");
  Matrix c = a;
  kernels::axpy(-1.0, b.data(), c.data(), c.a_.size());
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  kernels::scal(s, c.data(), c.a_.size());
  return c;
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("frobenius_inner: shape mismatch");
  return kernels::dot(a.data(), b.data(), a.rows() * a.cols());
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  return (a - b).frobenius_norm();
}

OrthonormalMatrix::OrthonormalMatrix(Matrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() < m_.cols())
    throw DimensionError("orthonormal matrix: more columns than rows");
  const double defect = orthonormality_defect();
  if (!(defect <= tol))
    throw NumericalError("orthonormal matrix: U^T U deviates from identity by " +
                         std::to_string(defect));
}

double OrthonormalMatrix::orthonormality_defect() const {
  const std::size_t r = m_.cols();
  double acc = 0.0;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      double g = 0.0;
      for (std::size_t t = 0; t < m_.rows(); ++t) g += m_(t, i) * m_(t, j);
      const double d = g - (i == j ? 1.0 : 0.0);
      acc += d * d;
    }
  return std::sqrt(acc);
}

}  // namespace lrota
