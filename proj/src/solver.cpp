#include "lrota/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lrota/errors.hpp"
#include "lrota/kernels.hpp"
#include "lrota/rng.hpp"

namespace lrota {

namespace {

BlockVector column_block(const std::vector<Matrix>& factors, std::size_t j) {
  BlockVector x;
  x.parts.reserve(factors.size());
  for (const Matrix& f : factors) x.parts.push_back(f.col(j));
  return x;
}

Matrix scale_cols(const Matrix& v, const std::vector<double>& d) {
  Matrix m = v;
  for (std::size_t j = 0; j < d.size(); ++j) m.scale_col(j, d[j]);
  return m;
}

double square_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

std::vector<Matrix> FactorSet::matrices() const {
  std::vector<Matrix> out;
  out.reserve(factors.size());
  for (const auto& f : factors) out.push_back(f.matrix());
  return out;
}

std::vector<double> lambda_of(const DenseTensor& a, const std::vector<Matrix>& factors) {
  if (factors.size() != a.order()) throw DimensionError("lambda_of: one factor per mode required");
  const std::size_t r = factors.empty() ? 0 : factors[0].cols();
  for (std::size_t s = 1; s <= a.order(); ++s) {
    if (factors[s - 1].rows() != a.dim(s) || factors[s - 1].cols() != r)
      throw DimensionError("lambda_of: factor " + std::to_string(s) + " has the wrong shape");
  }
  std::vector<double> lam(r);
  for (std::size_t j = 0; j < r; ++j) lam[j] = contract_full(a, column_block(factors, j));
  return lam;
}

double objective_f(const DenseTensor& a, const std::vector<Matrix>& factors) {
  return square_sum(lambda_of(a, factors));
}

ModeMatrices mode_matrices(const DenseTensor& a, const std::vector<Matrix>& state,
                           std::size_t mode) {
  if (state.size() != a.order()) throw DimensionError("mode_matrices: one matrix per mode required");
  if (mode < 1 || mode > a.order()) throw DimensionError("mode_matrices: mode out of range");
  const std::size_t r = state[0].cols();
  ModeMatrices out;
  out.v = Matrix(a.dim(mode), r);
  out.lambda.resize(r);
  for (std::size_t j = 0; j < r; ++j) {
    BlockVector x = column_block(state, j);
    std::vector<double> vj = contract_mode(a, x, mode);
    out.lambda[j] = kernels::dot(vj.data(), x.parts[mode - 1].data(), vj.size());
    out.v.set_col(j, vj);
  }
  return out;
}

PolarStep polar_step_plain(const Matrix& m) {
  SvdResult s = svd(m);
  Matrix u = s.g * s.h.transpose();
  return PolarStep{OrthonormalMatrix(std::move(u)), kCorrectionNone, s.sigma.back()};
}

PolarStep polar_step_classic(const Matrix& m, const Matrix& u_prev, double epsilon) {
  SvdResult s = svd(m);
  const double sigma_min = s.sigma.back();
  if (sigma_min >= epsilon) {
    Matrix u = s.g * s.h.transpose();
    return PolarStep{OrthonormalMatrix(std::move(u)), kCorrectionNone, sigma_min};
  }
  PolarResult shifted = polar(m + epsilon * u_prev);
  return PolarStep{std::move(shifted.u), kCorrectionShifted, sigma_min};
}

PolarStep polar_step_revised(const Matrix& m, const Matrix& u_prev, double epsilon, double tau) {
  SvdResult s = svd(m);
  const std::size_t r = m.cols();
  const double sigma_min = s.sigma.back();
  if (sigma_min >= epsilon) {
    Matrix u = s.g * s.h.transpose();
    return PolarStep{OrthonormalMatrix(std::move(u)), kCorrectionNone, sigma_min};
  }
  const bool square = (m.rows() == r);
  const bool second_ok = (r < 2) || (s.sigma[r - 2] >= tau);
  if (square && second_ok) {
    // Only the last singular value collapsed and the factor is a full
    // rotation: align the sign of the last left vector with the previous
    // iterate instead of shifting, keeping the step inside O(n).
    Matrix w = u_prev * s.h;
    double align = 0.0;
    for (std::size_t i = 0; i < r; ++i) align += s.g(i, r - 1) * w(i, r - 1);
    Matrix ghat = s.g;
    if (align < 0.0) ghat.scale_col(r - 1, -1.0);
    Matrix u = ghat * s.h.transpose();
    return PolarStep{OrthonormalMatrix(std::move(u)), kCorrectionSignFlip, sigma_min};
  }
  PolarResult shifted = polar(m + epsilon * u_prev);
  return PolarStep{std::move(shifted.u), kCorrectionShifted, sigma_min};
}

namespace {

// Gram matrix of the mode-i flattening, n_i x n_i.
Matrix mode_gram(const DenseTensor& a, std::size_t mode) {
  const std::size_t n = a.dim(mode);
  std::size_t outer = 1, inner_sz = 1;
  for (std::size_t s = 1; s < mode; ++s) outer *= a.dim(s);
  for (std::size_t s = mode + 1; s <= a.order(); ++s) inner_sz *= a.dim(s);
  Matrix g(n, n);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t x = 0; x < n; ++x) {
      const double* rx = a.data() + (o * n + x) * inner_sz;
      for (std::size_t y = 0; y <= x; ++y) {
        const double* ry = a.data() + (o * n + y) * inner_sz;
        const double acc = kernels::dot(rx, ry, inner_sz);
        g(x, y) += acc;
        if (x != y) g(y, x) += acc;
      }
    }
  return g;
}

FactorSet hosvd_init(const DenseTensor& a, std::size_t r) {
  FactorSet fs;
  for (std::size_t i = 1; i <= a.order(); ++i) {
    SymEigResult e = sym_eig(mode_gram(a, i));
    Matrix u(a.dim(i), r);
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t t = 0; t < a.dim(i); ++t) u(t, j) = e.q(t, j);
    fs.factors.emplace_back(std::move(u));
  }
  return fs;
}

FactorSet random_init(const DenseTensor& a, std::size_t r, std::uint64_t seed,
                      std::uint64_t attempt) {
  FactorSet fs;
  for (std::size_t i = 1; i <= a.order(); ++i) {
    Rng rng(derive_seed(seed, attempt, i));
    fs.factors.push_back(random_orthonormal(a.dim(i), r, rng));
  }
  return fs;
}

}  // namespace

FactorSet init_factors(const DenseTensor& a, std::size_t r, InitStrategy strategy,
                       std::uint64_t seed) {
  if (norm(a) == 0.0) throw NumericalError("init_factors: zero tensor has no valid initialization");
  for (std::size_t s = 1; s <= a.order(); ++s)
    if (r > a.dim(s)) throw DimensionError("init_factors: rank exceeds mode " + std::to_string(s));
  if (strategy == InitStrategy::hosvd) {
    FactorSet fs = hosvd_init(a, r);
    if (objective_f(a, fs.matrices()) > 0.0) return fs;
    // Degenerate diagonal at the spectral initializer; fall through to
    // seeded random draws, which succeed almost surely.
  }
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    FactorSet fs = random_init(a, r, seed, attempt);
    if (objective_f(a, fs.matrices()) > 0.0) return fs;
  }
  throw NumericalError("init_factors: failed to find a starting point with positive objective");
}

double stationarity_residual(const DenseTensor& a, const std::vector<Matrix>& factors) {
  double acc = 0.0;
  for (std::size_t i = 1; i <= a.order(); ++i) {
    ModeMatrices mm = mode_matrices(a, factors, i);
    const Matrix x = scale_cols(mm.v, mm.lambda);
    const Matrix rho = x - factors[i - 1] * (x.transpose() * factors[i - 1]);
    acc += frobenius_inner(rho, rho);
  }
  return std::sqrt(acc);
}

Solution solve(const DenseTensor& a, std::size_t r, const SolverConfig& cfg) {
  const std::size_t k = a.order();
  if (k < 3) throw DimensionError("solve: tensor order must be at least 3");
  if (r < 1) throw ConfigError("solve: rank must be positive");
  for (std::size_t s = 1; s <= k; ++s)
    if (r > a.dim(s))
      throw ConfigError("solve: rank " + std::to_string(r) + " exceeds mode " + std::to_string(s) +
                        " dimension " + std::to_string(a.dim(s)));
  const double a_norm = norm(a);
  if (a_norm == 0.0) throw NumericalError("solve: zero tensor");
  if (cfg.max_sweeps < 1) throw ConfigError("solve: max_sweeps must be positive");
  if (cfg.step_tol < 0.0 || cfg.kkt_tol < 0.0) throw ConfigError("solve: negative tolerance");

  ResolvedConfig rc;
  rc.proximal = cfg.proximal;
  rc.epsilon = cfg.epsilon > 0.0 ? cfg.epsilon : 1e-4 * std::max(1.0, a_norm * a_norm);
  if (cfg.proximal == ProximalMode::revised) {
    rc.tau = cfg.tau > 0.0 ? cfg.tau : 10.0 * rc.epsilon;
    if (rc.tau <= rc.epsilon)
      throw ConfigError("solve: revised mode requires tau > epsilon");
  }

  FactorSet init = init_factors(a, r, cfg.init, cfg.seed);
  std::vector<Matrix> prev = init.matrices();
  std::vector<double> lam0 = lambda_of(a, prev);
  const double f0 = square_sum(lam0);
  if (cfg.truncation) {
    const double kappa_sup = std::sqrt(f0 / static_cast<double>(r));
    rc.kappa = cfg.kappa >= 0.0 ? cfg.kappa : 0.5 * kappa_sup;
    if (rc.kappa >= kappa_sup)
      throw ConfigError("solve: kappa must stay below sqrt(f(U_0)/r) = " +
                        std::to_string(kappa_sup));
  } else {
    rc.kappa = 0.0;
  }

  Solution sol;
  sol.trace.initial_f = f0;
  sol.trace.initial_lambda = lam0;
  sol.trace.resolved = rc;
  if (cfg.record_snapshots) sol.trace.initial_factors = prev;

  std::vector<double> lam_begin = lam0;
  double f_prev = f0;
  std::size_t r_cur = r;
  sol.termination = Termination::max_sweeps;

  for (int p = 1; p <= cfg.max_sweeps; ++p) {
    std::vector<Matrix> cur = prev;
    SweepRecord rec;
    rec.sweep = p;
    rec.lambda_path.push_back(lam_begin);
    rec.sigma_min.resize(k);
    rec.corrections.resize(k);

    for (std::size_t i = 1; i <= k; ++i) {
      ModeMatrices mm = mode_matrices(a, cur, i);
      const Matrix m = scale_cols(mm.v, mm.lambda);
      PolarStep step = [&] {
        switch (cfg.proximal) {
          case ProximalMode::classic:
            return polar_step_classic(m, prev[i - 1], rc.epsilon);
          case ProximalMode::revised:
            return polar_step_revised(m, prev[i - 1], rc.epsilon, rc.tau);
          default:
            return polar_step_plain(m);
        }
      }();
      rec.sigma_min[i - 1] = step.sigma_min;
      rec.corrections[i - 1] = step.correction;
      cur[i - 1] = step.u.matrix();
      // Diagonal values after this substep: lambda_j = <v_j, new column j>.
      std::vector<double> lam_i(r_cur);
      for (std::size_t j = 0; j < r_cur; ++j) {
        std::vector<double> vj = mm.v.col(j);
        std::vector<double> uj = cur[i - 1].col(j);
        lam_i[j] = kernels::dot(vj.data(), uj.data(), vj.size());
      }
      rec.lambda_path.push_back(std::move(lam_i));
    }

    std::vector<double> lam_end = rec.lambda_path.back();
    double f_cur = square_sum(lam_end);

    rec.mode_step_norms.resize(k);
    double step_sq = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double d = frobenius_distance(cur[i], prev[i]);
      rec.mode_step_norms[i] = d;
      step_sq += d * d;
    }
    rec.step_norm = std::sqrt(step_sq);

    if (cfg.truncation) {
      std::vector<std::size_t> drop;
      for (std::size_t j = 0; j < r_cur; ++j)
        if (std::abs(lam_end[j]) < rc.kappa) drop.push_back(j);
      if (drop.size() == r_cur && !drop.empty()) {
        // Theory keeps at least one column above kappa; guard regardless.
        std::size_t best = 0;
        for (std::size_t j = 1; j < r_cur; ++j)
          if (std::abs(lam_end[j]) > std::abs(lam_end[best])) best = j;
        drop.erase(std::find(drop.begin(), drop.end(), best));
      }
      if (!drop.empty()) {
        std::vector<std::size_t> keep;
        for (std::size_t j = 0; j < r_cur; ++j)
          if (std::find(drop.begin(), drop.end(), j) == drop.end()) keep.push_back(j);
        for (std::size_t i = 0; i < k; ++i) cur[i] = cur[i].select_cols(keep);
        std::vector<double> kept;
        kept.reserve(keep.size());
        for (std::size_t j : keep) kept.push_back(lam_end[j]);
        const double f_post = square_sum(kept);
        rec.truncated = drop;
        rec.truncation_loss = f_cur - f_post;
        lam_end = std::move(kept);
        f_cur = f_post;
        r_cur = keep.size();
      }
    }

    rec.lambda = lam_end;
    rec.f = f_cur;
    rec.delta_f = f_cur - f_prev;
    rec.kkt_residual = stationarity_residual(a, cur);
    if (cfg.record_snapshots) rec.factors_after = cur;

    const bool stop = rec.truncated.empty() && rec.step_norm <= cfg.step_tol &&
                      rec.kkt_residual <= cfg.kkt_tol;
    sol.trace.sweeps.push_back(std::move(rec));
    prev = std::move(cur);
    lam_begin = lam_end;
    f_prev = f_cur;
    sol.sweeps = p;
    if (stop) {
      sol.termination = Termination::tolerance;
      break;
    }
  }

  // Normal form: nonnegative diagonal (signs absorbed into mode 1) sorted
  // nonincreasing, the same permutation applied to every factor.
  std::vector<double> lam = lam_begin;
  for (std::size_t j = 0; j < lam.size(); ++j)
    if (lam[j] < 0.0) {
      prev[0].scale_col(j, -1.0);
      lam[j] = -lam[j];
    }
  std::vector<std::size_t> order(lam.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return lam[x] > lam[y]; });
  std::vector<double> lam_sorted;
  lam_sorted.reserve(lam.size());
  for (std::size_t j : order) lam_sorted.push_back(lam[j]);
  for (std::size_t i = 0; i < k; ++i) prev[i] = prev[i].select_cols(order);

  for (auto& f : prev) sol.factors.factors.emplace_back(std::move(f));
  sol.lambda = std::move(lam_sorted);
  sol.f = square_sum(sol.lambda);
  sol.residual = norm(a - assemble(sol.factors.matrices(), sol.lambda));
  return sol;
}

}  // namespace lrota
