#include "lrota/matrix_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lrota/errors.hpp"
#include "lrota/kernels.hpp"

namespace lrota {

namespace {

constexpr int kMaxJacobiSweeps = 60;
constexpr double kJacobiTol = 1e-14;

// Append to `cols` a deterministic orthonormal extension up to `want` total
// columns: greedily pick the coordinate direction with the largest residual
// after projecting out what is already there.
void extend_orthonormal(std::vector<std::vector<double>>& cols, std::size_t n, std::size_t want) {
  while (cols.size() < want) {
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < n; ++e) {
      std::vector<double> v(n, 0.0);
      v[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : cols)
          kernels::axpy(-kernels::dot(q.data(), v.data(), n), q.data(), v.data(), n);
      const double nv = std::sqrt(kernels::dot(v.data(), v.data(), n));
      if (nv > best_norm) {
        best_norm = nv;
        best = std::move(v);
      }
    }
    if (best_norm < 1e-8)
      throw NumericalError("orthonormal completion: no independent coordinate direction left");
    kernels::scal(1.0 / best_norm, best.data(), n);
    cols.push_back(std::move(best));
  }
}

Matrix cols_to_matrix(const std::vector<std::vector<double>>& cols, std::size_t n) {
  Matrix m(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) m(i, j) = cols[j][i];
  return m;
}

}  // namespace

std::size_t SvdResult::numerical_rank() const {
  if (sigma.empty() || sigma[0] == 0.0) return 0;
  std::size_t r = 0;
  while (r < sigma.size() && sigma[r] > kRankTolerance * sigma[0]) ++r;
  return r;
}

SvdResult svd(const Matrix& m) {
  const std::size_t nr = m.rows(), nc = m.cols();
  if (nr == 0 || nc == 0) throw DimensionError("svd: empty matrix");
  if (nr < nc) {
    SvdResult t = svd(m.transpose());
    return SvdResult{std::move(t.h), std::move(t.sigma), std::move(t.g)};
  }

  // One-sided Jacobi: rotate column pairs of A until mutually orthogonal,
  // accumulating the rotations into H.
  std::vector<std::vector<double>> a(nc);
  for (std::size_t j = 0; j < nc; ++j) a[j] = m.col(j);
  std::vector<std::vector<double>> h(nc, std::vector<double>(nc, 0.0));
  for (std::size_t j = 0; j < nc; ++j) h[j][j] = 1.0;

  // Absolute floor keeps numerically null columns (rank-deficient input)
  // from being rotated forever against each other.
  const double frob = m.frobenius_norm();
  const double gram_floor = (1e-13 * frob) * (1e-13 * frob);

  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < nc; ++p) {
      for (std::size_t q = p + 1; q < nc; ++q) {
        const double app = kernels::dot(a[p].data(), a[p].data(), nr);
        const double aqq = kernels::dot(a[q].data(), a[q].data(), nr);
        const double apq = kernels::dot(a[p].data(), a[q].data(), nr);
        if (app == 0.0 || aqq == 0.0) continue;
        if (std::abs(apq) <= kJacobiTol * std::sqrt(app * aqq) || std::abs(apq) <= gram_floor)
          continue;
        converged = false;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < nr; ++i) {
          const double xp = a[p][i], xq = a[q][i];
          a[p][i] = c * xp - s * xq;
          a[q][i] = s * xp + c * xq;
        }
        for (std::size_t i = 0; i < nc; ++i) {
          const double xp = h[p][i], xq = h[q][i];
          h[p][i] = c * xp - s * xq;
          h[q][i] = s * xp + c * xq;
        }
      }
    }
  }
  if (!converged)
    throw NumericalError("svd: jacobi rotations did not converge within " +
                         std::to_string(kMaxJacobiSweeps) + " sweeps");

  std::vector<double> sig(nc);
  for (std::size_t j = 0; j < nc; ++j)
    sig[j] = std::sqrt(kernels::dot(a[j].data(), a[j].data(), nr));
  std::vector<std::size_t> order(nc);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  SvdResult out;
  out.sigma.resize(nc);
  const double smax = sig[order[0]];
  std::vector<std::vector<double>> gcols;
  gcols.reserve(nc);
  Matrix hm(nc, nc);
  for (std::size_t j = 0; j < nc; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = sig[src];
    for (std::size_t i = 0; i < nc; ++i) hm(i, j) = h[src][i];
    if (sig[src] > kRankTolerance * smax && sig[src] > 0.0) {
      std::vector<double> g = a[src];
      kernels::scal(1.0 / sig[src], g.data(), nr);
      gcols.push_back(std::move(g));
    }
  }
  extend_orthonormal(gcols, nr, nc);  // fill null directions deterministically
  out.g = cols_to_matrix(gcols, nr);
  out.h = std::move(hm);
  return out;
}

PolarResult polar(const Matrix& m) {
  if (m.rows() < m.cols()) throw DimensionError("polar: matrix must have rows >= cols");
  SvdResult s = svd(m);
  Matrix u = s.g * s.h.transpose();
  Matrix hs(m.cols(), m.cols());
  for (std::size_t i = 0; i < m.cols(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < m.cols(); ++t) acc += s.h(i, t) * s.sigma[t] * s.h(j, t);
      hs(i, j) = acc;
    }
  return PolarResult{OrthonormalMatrix(std::move(u)), std::move(hs)};
}

SymEigResult sym_eig(const Matrix& s_in) {
  if (s_in.rows() != s_in.cols()) throw DimensionError("sym_eig: matrix not square");
  const std::size_t n = s_in.rows();
  const double nrm = s_in.frobenius_norm();
  Matrix s = 0.5 * (s_in + s_in.transpose());
  if (nrm > 0.0 && frobenius_distance(s, s_in) > 1e-6 * nrm)
    throw NumericalError("sym_eig: input is not symmetric");

  Matrix q = Matrix::identity(n);
  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apq = s(p, r);
        if (std::abs(apq) <= kJacobiTol * nrm) continue;
        converged = false;
        const double zeta = (s(r, r) - s(p, p)) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double xp = s(i, p), xq = s(i, r);
          s(i, p) = c * xp - sn * xq;
          s(i, r) = sn * xp + c * xq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double xp = s(p, i), xq = s(r, i);
          s(p, i) = c * xp - sn * xq;
          s(r, i) = sn * xp + c * xq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double xp = q(i, p), xq = q(i, r);
          q(i, p) = c * xp - sn * xq;
          q(i, r) = sn * xp + c * xq;
        }
      }
    }
  }
  if (!converged)
    throw NumericalError("sym_eig: jacobi rotations did not converge within " +
                         std::to_string(kMaxJacobiSweeps) + " sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return s(x, x) > s(y, y); });
  SymEigResult out;
  out.values.resize(n);
  out.q = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = s(order[j], order[j]);
    // Sign convention: make the largest-magnitude entry positive.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(q(i, order[j])) > std::abs(q(arg, order[j]))) arg = i;
    const double sgn = q(arg, order[j]) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.q(i, j) = sgn * q(i, order[j]);
  }
  return out;
}

Matrix psd_sqrt(const Matrix& h) {
  SymEigResult e = sym_eig(h);
  const double lmax = e.values.empty() ? 0.0 : std::max(0.0, e.values.front());
  const double floor_tol = -1e-10 * std::max(1.0, lmax);
  const std::size_t n = h.rows();
  for (double lam : e.values)
    if (lam < floor_tol)
      throw NumericalError("psd_sqrt: eigenvalue " + std::to_string(lam) + " is negative");
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t)
        acc += e.q(i, t) * std::sqrt(std::max(e.values[t], 0.0)) * e.q(j, t);
      out(i, j) = acc;
    }
  return out;
}

Matrix tangent_project(const OrthonormalMatrix& a, const Matrix& b) {
  const Matrix& am = a.matrix();
  if (am.rows() != b.rows() || am.cols() != b.cols())
    throw DimensionError("tangent_project: shape mismatch");
  Matrix c = b - am * (b.transpose() * am);
  return c - 0.5 * (am * (am.transpose() * c));
}

Matrix normal_project(const OrthonormalMatrix& a, const Matrix& b) {
  const Matrix& am = a.matrix();
  if (am.rows() != b.rows() || am.cols() != b.cols())
    throw DimensionError("normal_project: shape mismatch");
  Matrix atb = am.transpose() * b;
  return am * (0.5 * (atb + atb.transpose()));
}

std::vector<double> principal_angles(const OrthonormalMatrix& u, const OrthonormalMatrix& v) {
  if (u.rows() != v.rows()) throw DimensionError("principal_angles: ambient dims differ");
  if (u.cols() == 0 || v.cols() == 0) return {};
  SvdResult s = svd(u.matrix().transpose() * v.matrix());
  std::vector<double> theta(s.sigma.size());
  for (std::size_t i = 0; i < s.sigma.size(); ++i)
    theta[i] = std::acos(std::clamp(s.sigma[i], 0.0, 1.0));
  return theta;  // sigma nonincreasing, so theta nondecreasing
}

OrthonormalMatrix complete_orthonormal(const OrthonormalMatrix& u) {
  const std::size_t n = u.rows(), r = u.cols();
  std::vector<std::vector<double>> cols;
  cols.reserve(n);
  for (std::size_t j = 0; j < r; ++j) cols.push_back(u.matrix().col(j));
  extend_orthonormal(cols, n, n);
  std::vector<std::vector<double>> tail(cols.begin() + static_cast<long>(r), cols.end());
  return OrthonormalMatrix(cols_to_matrix(tail, n));
}

OrthonormalMatrix complete_orthonormal_aligned(const OrthonormalMatrix& u, const Matrix& v2) {
  const std::size_t n = u.rows(), r = u.cols();
  if (v2.rows() != n || v2.cols() > n - r)
    throw DimensionError("complete_orthonormal_aligned: reference complement has wrong shape");
  OrthonormalMatrix u2 = complete_orthonormal(u);
  if (v2.cols() == 0) return OrthonormalMatrix(Matrix(n, 0));
  PolarResult p = polar(u2.matrix().transpose() * v2);
  return OrthonormalMatrix(u2.matrix() * p.u.matrix());
}

OrthonormalMatrix random_orthonormal(std::size_t n, std::size_t r, Rng& rng) {
  if (r > n) throw DimensionError("random_orthonormal: more columns than rows");
  Matrix q(n, r);
  for (std::size_t j = 0; j < r; ++j) {
    std::vector<double> v(n);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) v[i] = rng.next_gaussian();
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t t = 0; t < j; ++t) {
          std::vector<double> qt = q.col(t);
          kernels::axpy(-kernels::dot(qt.data(), v.data(), n), qt.data(), v.data(), n);
        }
      const double nv = std::sqrt(kernels::dot(v.data(), v.data(), n));
      if (nv > 1e-8) {
        kernels::scal(1.0 / nv, v.data(), n);
        break;
      }
    }
    // Positive-diagonal convention for determinism across sign ambiguity.
    if (v[std::min(j, n - 1)] < 0.0) kernels::scal(-1.0, v.data(), n);
    q.set_col(j, v);
  }
  return OrthonormalMatrix(std::move(q));
}

PolarGap polar_error_gap(const Matrix& b, const Matrix& c, const OrthonormalMatrix& q) {
  if (b.cols() != c.cols()) throw DimensionError("polar_error_gap: B and C need equal column counts");
  if (b.rows() < c.rows()) throw DimensionError("polar_error_gap: need rows(B) >= rows(C)");
  if (q.rows() != b.rows() || q.cols() != c.rows())
    throw DimensionError("polar_error_gap: Q has the wrong shape");
  const Matrix a = b * c.transpose();
  PolarResult pr = polar(a);
  const Matrix& w = pr.u.matrix();
  const Matrix diff = w - q.matrix();
  const double eb = frobenius_distance(b, q.matrix() * c);
  const double ew = frobenius_distance(b, w * c);
  PolarGap out{};
  out.gap = eb * eb - ew * ew;
  const Matrix rooted = diff * psd_sqrt(pr.h);
  out.identity = frobenius_inner(rooted, rooted);
  SymEigResult he = sym_eig(pr.h);  // eigenvalues of H are the singular values of A
  out.sigma_min = std::max(he.values.back(), 0.0);
  out.lower_bound = out.sigma_min * frobenius_inner(diff, diff);
  return out;
}

}  // namespace lrota
