#include "lrota/tensor.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lrota/errors.hpp"
#include "lrota/kernels.hpp"

namespace lrota {

namespace {

std::size_t checked_volume(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw DimensionError("tensor dims must be positive");
    if (d > std::numeric_limits<std::size_t>::max() / n)
      throw DimensionError("tensor volume overflows size_t");
    n *= d;
  }
  return n;
}

void check_parts(const DenseTensor& a, const BlockVector& x, std::size_t skip_mode) {
  if (x.order() != a.order())
    throw DimensionError("block vector has " + std::to_string(x.order()) + " parts, tensor order " +
                         std::to_string(a.order()));
  for (std::size_t s = 1; s <= a.order(); ++s) {
    if (s == skip_mode) continue;
    if (x.parts[s - 1].size() != a.dim(s))
      throw DimensionError("block vector part " + std::to_string(s) + " has length " +
                           std::to_string(x.parts[s - 1].size()) + ", expected " +
                           std::to_string(a.dim(s)));
  }
}

// Reduce trailing modes k, k-1, ..., down_to+1 by dotting with the matching
// parts of x. Returns the partially contracted array of size n_1*...*n_down_to.
std::vector<double> reduce_trailing(const DenseTensor& a, const BlockVector& x,
                                    std::size_t down_to) {
  std::vector<double> cur(a.data(), a.data() + a.size());
  for (std::size_t s = a.order(); s > down_to; --s) {
    const std::size_t n = a.dim(s);
    const std::size_t rows = cur.size() / n;
    const double* xs = x.parts[s - 1].data();
    std::vector<double> next(rows);
    for (std::size_t r = 0; r < rows; ++r)
      next[r] = kernels::dot(cur.data() + r * n, xs, n);
    cur.swap(next);
  }
  return cur;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> dims, double fill)
    : dims_(std::move(dims)), data_(checked_volume(dims_), fill) {}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (checked_volume(dims_) != data_.size())
    throw DimensionError("tensor data length does not match dims");
}

std::size_t DenseTensor::offset(const std::vector<std::size_t>& idx) const {
  if (idx.size() != dims_.size()) throw DimensionError("index order mismatch");
  std::size_t off = 0;
  for (std::size_t s = 0; s < dims_.size(); ++s) {
    if (idx[s] >= dims_[s]) throw DimensionError("index out of range in mode " + std::to_string(s + 1));
    off = off * dims_[s] + idx[s];
  }
  return off;
}

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw DimensionError("tensor add: shape mismatch");
  DenseTensor c = a;
  kernels::axpy(1.0, b.data(), c.data(), c.size());
  return c;
}

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw DimensionError("tensor sub: shape mismatch");
  DenseTensor c = a;
  kernels::axpy(-1.0, b.data(), c.data(), c.size());
  return c;
}

DenseTensor operator*(double s, const DenseTensor& a) {
  DenseTensor c = a;
  kernels::scal(s, c.data(), c.size());
  return c;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw DimensionError("inner: tensor shapes differ");
  return kernels::dot(a.data(), b.data(), a.size());
}

double norm(const DenseTensor& a) {
  return std::sqrt(kernels::dot(a.data(), a.data(), a.size()));
}

double contract_full(const DenseTensor& a, const BlockVector& x) {
  if (a.order() == 0) throw DimensionError("contract_full: order-0 tensor");
  check_parts(a, x, 0);
  std::vector<double> cur = reduce_trailing(a, x, 1);
  return kernels::dot(cur.data(), x.parts[0].data(), a.dim(1));
}

std::vector<double> contract_mode(const DenseTensor& a, const BlockVector& x, std::size_t mode) {
  if (mode < 1 || mode > a.order()) throw DimensionError("contract_mode: mode out of range");
  check_parts(a, x, mode);
  std::vector<double> cur = reduce_trailing(a, x, mode);
  // Reduce leading modes 1..mode-1 by accumulating weighted slabs.
  for (std::size_t s = 1; s < mode; ++s) {
    const std::size_t n = x.parts[s - 1].size();
    const std::size_t rest = cur.size() / n;
    std::vector<double> next(rest, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      kernels::axpy(x.parts[s - 1][j], cur.data() + j * rest, next.data(), rest);
    cur.swap(next);
  }
  return cur;
}

DenseTensor multilinear_multiply(const std::vector<Matrix>& bs, const DenseTensor& a) {
  const std::size_t k = a.order();
  if (bs.size() != k) throw DimensionError("multilinear_multiply: need one matrix per mode");
  for (std::size_t s = 1; s <= k; ++s)
    if (bs[s - 1].cols() != a.dim(s))
      throw DimensionError("multilinear_multiply: matrix for mode " + std::to_string(s) +
                           " has " + std::to_string(bs[s - 1].cols()) + " columns, expected " +
                           std::to_string(a.dim(s)));

  std::vector<double> cur(a.data(), a.data() + a.size());
  std::vector<std::size_t> cur_dims(a.dims());
  for (std::size_t s = 1; s <= k; ++s) {
    const Matrix& b = bs[s - 1];
    const std::size_t n = cur_dims[s - 1];
    const std::size_t m = b.rows();
    std::size_t outer = 1, inner_sz = 1;
    for (std::size_t t = 0; t < s - 1; ++t) outer *= cur_dims[t];
    for (std::size_t t = s; t < k; ++t) inner_sz *= cur_dims[t];
    std::vector<double> next(outer * m * inner_sz, 0.0);
    if (inner_sz == 1) {
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t r = 0; r < m; ++r)
          next[o * m + r] = kernels::dot(b.row(r), cur.data() + o * n, n);
    } else {
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t j = 0; j < n; ++j) {
          const double* src = cur.data() + (o * n + j) * inner_sz;
          for (std::size_t r = 0; r < m; ++r)
            kernels::axpy(b(r, j), src, next.data() + (o * m + r) * inner_sz, inner_sz);
        }
    }
    cur.swap(next);
    cur_dims[s - 1] = m;
  }
  return DenseTensor(std::move(cur_dims), std::move(cur));
}

DenseTensor diag_tensor(const std::vector<double>& lambda, std::size_t k) {
  if (k == 0) throw DimensionError("diag_tensor: order must be positive");
  if (lambda.empty()) throw DimensionError("diag_tensor: empty diagonal");
  const std::size_t r = lambda.size();
  DenseTensor t(std::vector<std::size_t>(k, r));
  std::size_t stride = 0, pw = 1;
  for (std::size_t s = 0; s < k; ++s) {
    stride += pw;
    pw *= r;
  }
  for (std::size_t j = 0; j < r; ++j) t[j * stride] = lambda[j];
  return t;
}

std::vector<double> extract_diag(const DenseTensor& a) {
  if (a.order() == 0) throw DimensionError("extract_diag: order-0 tensor");
  std::size_t m = a.dim(1);
  for (std::size_t s = 2; s <= a.order(); ++s) m = std::min(m, a.dim(s));
  std::size_t stride = 0;  // sum over modes of the suffix volumes
  for (std::size_t s = 1; s <= a.order(); ++s) stride = stride * a.dim(s) + 1;
  std::vector<double> d(m);
  for (std::size_t j = 0; j < m; ++j) d[j] = a[j * stride];
  return d;
}

DenseTensor assemble(const std::vector<Matrix>& factors, const std::vector<double>& lambda) {
  if (factors.empty()) throw DimensionError("assemble: no factors");
  for (const Matrix& f : factors)
    if (f.cols() != lambda.size())
      throw DimensionError("assemble: factor column count does not match lambda length");
  return multilinear_multiply(factors, diag_tensor(lambda, factors.size()));
}

}  // namespace lrota
