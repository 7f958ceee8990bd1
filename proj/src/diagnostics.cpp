#include "lrota/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrota/errors.hpp"
#include "lrota/kernels.hpp"
#include "lrota/matrix_kernels.hpp"

namespace lrota {

namespace {

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

double decrease_constant(const ResolvedConfig& rc) {
  switch (rc.proximal) {
    case ProximalMode::classic:
      return 0.5 * rc.epsilon;
    case ProximalMode::revised:
      return 0.5 * std::min(rc.epsilon, rc.tau - rc.epsilon);
    default:
      return 0.0;
  }
}

void finalize(AuditReport& rep) {
  rep.min_slack = rep.entries.empty() ? 0.0 : rep.entries.front().slack;
  for (const AuditEntry& e : rep.entries) rep.min_slack = std::min(rep.min_slack, e.slack);
}

}  // namespace

KktReport kkt_residual(const DenseTensor& a, const std::vector<Matrix>& factors) {
  KktReport rep;
  rep.lambda = lambda_of(a, factors);
  const std::size_t k = a.order();
  rep.mode_residual.resize(k);
  rep.sym_defect.resize(k);
  rep.sigma_min.resize(k);
  double acc = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    ModeMatrices mm = mode_matrices(a, factors, i);
    const Matrix x = scale_cols(mm.v, rep.lambda);
    const Matrix& u = factors[i - 1];
    const Matrix p = u.transpose() * x;
    const Matrix rho = x - u * (x.transpose() * u);
    rep.mode_residual[i - 1] = rho.frobenius_norm();
    rep.sym_defect[i - 1] = frobenius_distance(p, p.transpose());
    rep.sigma_min[i - 1] = svd(x).sigma.back();
    acc += rep.mode_residual[i - 1] * rep.mode_residual[i - 1];
  }
  rep.total = std::sqrt(acc);
  rep.max_sym_defect = *std::max_element(rep.sym_defect.begin(), rep.sym_defect.end());
  rep.min_abs_lambda = rep.lambda.empty() ? 0.0 : std::abs(rep.lambda[0]);
  for (double l : rep.lambda) rep.min_abs_lambda = std::min(rep.min_abs_lambda, std::abs(l));
  return rep;
}

GradG riemannian_grad_g(const DenseTensor& a, const std::vector<Matrix>& factors,
                        const std::vector<double>& x) {
  const std::size_t r = factors.empty() ? 0 : factors[0].cols();
  if (x.size() != r) throw DimensionError("riemannian_grad_g: x length must equal the rank");
  GradG out;
  double acc = 0.0;
  for (std::size_t i = 1; i <= a.order(); ++i) {
    ModeMatrices mm = mode_matrices(a, factors, i);
    const Matrix b = scale_cols(mm.v, x);  // V Gamma
    const Matrix& u = factors[i - 1];
    Matrix c = b - u * (b.transpose() * u);
    Matrix part = -1.0 * (c - 0.5 * (u * (u.transpose() * c)));
    acc += frobenius_inner(part, part);
    out.mode_parts.push_back(std::move(part));
  }
  std::vector<double> lam = lambda_of(a, factors);
  out.x_part.resize(r);
  for (std::size_t j = 0; j < r; ++j) out.x_part[j] = x[j] - lam[j];
  acc += square_sum(out.x_part);
  out.norm = std::sqrt(acc);
  return out;
}

AuditReport sufficient_decrease_audit(const SolveTrace& trace, double tol) {
  const double c = decrease_constant(trace.resolved);
  AuditReport rep;
  double f_prev = trace.initial_f;
  for (const SweepRecord& rec : trace.sweeps) {
    // Pre-truncation objective: what the sweep itself achieved.
    const double f_pre = square_sum(rec.lambda_path.back());
    AuditEntry sweep_entry{rec.sweep, 0, f_pre - f_prev, c * rec.step_norm * rec.step_norm, 0.0};
    sweep_entry.slack = sweep_entry.lhs - sweep_entry.rhs;
    rep.entries.push_back(sweep_entry);
    if (sweep_entry.slack < -tol) rep.violations.push_back(sweep_entry);

    // Per-substep gains against per-mode steps.
    const std::size_t k = rec.mode_step_norms.size();
    if (rec.lambda_path.size() == k + 1) {
      for (std::size_t i = 1; i <= k; ++i) {
        const double gain =
            square_sum(rec.lambda_path[i]) - square_sum(rec.lambda_path[i - 1]);
        const double d = rec.mode_step_norms[i - 1];
        AuditEntry e{rec.sweep, static_cast<int>(i), gain, c * d * d, 0.0};
        e.slack = e.lhs - e.rhs;
        rep.entries.push_back(e);
        if (e.slack < -tol) rep.violations.push_back(e);
      }
    }
    f_prev = rec.f;  // post-truncation, the next sweep's starting objective
  }
  finalize(rep);
  return rep;
}

AuditReport subdiff_bound_audit(const DenseTensor& a, const SolveTrace& trace, double tol) {
  if (trace.initial_factors.empty())
    throw ConfigError("subdiff_bound_audit: trace was recorded without factor snapshots");
  const std::size_t k = a.order();
  const double a_sq = norm(a) * norm(a);
  const double eps = trace.resolved.epsilon;
  AuditReport rep;
  const std::vector<Matrix>* u_prev = &trace.initial_factors;
  for (const SweepRecord& rec : trace.sweeps) {
    if (rec.factors_after.empty())
      throw ConfigError("subdiff_bound_audit: sweep " + std::to_string(rec.sweep) +
                        " lacks a snapshot");
    const std::vector<Matrix>& u_next = rec.factors_after;
    if (!rec.truncated.empty() || u_next[0].cols() != (*u_prev)[0].cols()) {
      u_prev = &u_next;  // rank changed; the bound is stated between equal shapes
      continue;
    }
    const double r = static_cast<double>(u_next[0].cols());
    // Replay the sweep's mixed states to rebuild each mode's scaled matrix.
    std::vector<Matrix> state = *u_prev;
    double wsq = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
      ModeMatrices mid = mode_matrices(a, state, i);
      state[i - 1] = u_next[i - 1];
      ModeMatrices fin = mode_matrices(a, u_next, i);
      const Matrix m_mid = scale_cols(mid.v, mid.lambda);
      const Matrix x_fin = scale_cols(fin.v, fin.lambda);
      const double alpha = rec.corrections[i - 1] == kCorrectionShifted ? eps : 0.0;
      Matrix w = 2.0 * (x_fin - m_mid) - (2.0 * alpha) * ((*u_prev)[i - 1] - u_next[i - 1]);
      wsq += frobenius_inner(w, w);
    }
    AuditEntry e{rec.sweep, 0, std::sqrt(wsq),
                 std::sqrt(static_cast<double>(k)) * (2.0 * r * std::sqrt(r) * a_sq + eps) *
                     rec.step_norm,
                 0.0};
    e.slack = e.rhs - e.lhs;  // upper bound
    rep.entries.push_back(e);
    if (e.slack < -tol * std::max(1.0, e.rhs)) rep.violations.push_back(e);
    u_prev = &u_next;
  }
  finalize(rep);
  return rep;
}

AuditReport truncation_audit(const SolveTrace& trace, std::size_t initial_rank, double tol) {
  const double kap = trace.resolved.kappa;
  AuditReport rep;
  double total_loss = 0.0;
  for (const SweepRecord& rec : trace.sweeps) {
    if (rec.truncated.empty()) continue;
    AuditEntry e{rec.sweep, 0, rec.truncation_loss,
                 static_cast<double>(rec.truncated.size()) * kap * kap, 0.0};
    e.slack = e.rhs - e.lhs;
    rep.entries.push_back(e);
    if (e.slack < -tol) rep.violations.push_back(e);
    total_loss += rec.truncation_loss;
  }
  // Cumulative bound: r * kappa^2, itself below the initial objective.
  AuditEntry cum{0, 0, total_loss, static_cast<double>(initial_rank) * kap * kap, 0.0};
  cum.slack = cum.rhs - cum.lhs;
  rep.entries.push_back(cum);
  if (cum.slack < -tol) rep.violations.push_back(cum);
  if (kap > 0.0 && !(static_cast<double>(initial_rank) * kap * kap < trace.initial_f)) {
    AuditEntry guard{0, 0, static_cast<double>(initial_rank) * kap * kap, trace.initial_f, 0.0};
    guard.slack = guard.rhs - guard.lhs;
    rep.violations.push_back(guard);
    rep.entries.push_back(guard);
  }
  finalize(rep);
  return rep;
}

RateReport fit_linear_rate(const std::vector<double>& f_values) {
  const std::size_t n = f_values.size();
  if (n < 4) throw NumericalError("fit_linear_rate: need at least 4 objective values");
  // Limit estimate from the last three increments.
  const double d3 = f_values[n - 1] - f_values[n - 2];
  const double d2 = f_values[n - 2] - f_values[n - 3];
  const double d1 = f_values[n - 3] - f_values[n - 4];
  double rho_hat = 0.0;
  int terms = 0;
  if (d2 > 0.0 && d3 > 0.0) { rho_hat += d3 / d2; ++terms; }
  if (d1 > 0.0 && d2 > 0.0) { rho_hat += d2 / d1; ++terms; }
  rho_hat = terms > 0 ? rho_hat / terms : 0.0;
  rho_hat = std::clamp(rho_hat, 0.0, 1.0 - 1e-9);
  RateReport rep;
  rep.f_star = f_values[n - 1] + std::max(0.0, d3) * rho_hat / (1.0 - rho_hat);

  const double floor = 1e-14 * std::max(1.0, std::abs(rep.f_star));
  std::vector<std::pair<double, double>> pts;  // (sweep index, log gap)
  bool underflowed = false;
  for (std::size_t p = 0; p < n; ++p) {
    const double gap = rep.f_star - f_values[p];
    if (gap <= floor) {
      underflowed = true;
      continue;
    }
    pts.emplace_back(static_cast<double>(p), std::log(gap));
  }
  const std::size_t want = std::max<std::size_t>(10, (pts.size() * 3 + 9) / 10);
  if (pts.size() < 10) {
    if (underflowed) {
      rep.superlinear = true;
      rep.rho = 0.0;
      rep.points = pts.size();
      return rep;
    }
    throw NumericalError("fit_linear_rate: only " + std::to_string(pts.size()) +
                         " usable tail points, need 10");
  }
  if (pts.size() > want) pts.erase(pts.begin(), pts.end() - static_cast<long>(want));

  // Least squares line through (p, log gap).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(pts.size());
  const double denom = m * sxx - sx * sx;
  if (denom <= 0.0) throw NumericalError("fit_linear_rate: degenerate abscissa");
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  double rss = 0.0;
  for (auto& [x, y] : pts) {
    const double e = y - (slope * x + intercept);
    rss += e * e;
  }
  rep.rho = std::exp(slope);
  rep.fit_residual = std::sqrt(rss / m);
  rep.points = pts.size();
  return rep;
}

RateReport fit_linear_rate(const SolveTrace& trace) {
  std::size_t start = 0;
  for (std::size_t t = 0; t < trace.sweeps.size(); ++t)
    if (!trace.sweeps[t].truncated.empty()) start = t + 1;
  std::vector<double> f;
  if (start == 0) f.push_back(trace.initial_f);
  for (std::size_t t = start; t < trace.sweeps.size(); ++t) f.push_back(trace.sweeps[t].f);
  return fit_linear_rate(f);
}

LojaBound lojasiewicz_exponent(const std::vector<std::size_t>& dims, std::size_t r) {
  if (dims.size() < 2) throw DimensionError("lojasiewicz_exponent: need order >= 2");
  if (r < 1) throw ConfigError("lojasiewicz_exponent: rank must be positive");
  const long long k = static_cast<long long>(dims.size());
  long long n_vars = 0;
  for (std::size_t d : dims)
    n_vars += static_cast<long long>(r) * static_cast<long long>(d);
  n_vars += k * static_cast<long long>(r * (r + 1) / 2);
  LojaBound out;
  out.variable_count = n_vars;
  out.degree = 2 * k;
  out.base = 6 * k - 3;
  out.exponent = n_vars - 1;
  const double log_denom = std::log(static_cast<double>(out.degree)) +
                           static_cast<double>(out.exponent) * std::log(static_cast<double>(out.base));
  out.tau = log_denom > 700.0 ? 1.0 : 1.0 - std::exp(-log_denom);
  return out;
}

long long manifold_dim(const std::vector<std::size_t>& dims, std::size_t r) {
  if (dims.empty()) throw DimensionError("manifold_dim: empty dims");
  const long long k = static_cast<long long>(dims.size());
  const long long rr = static_cast<long long>(r);
  long long sum = 0;
  for (std::size_t d : dims) {
    if (r > d) throw ConfigError("manifold_dim: rank exceeds a mode dimension");
    sum += static_cast<long long>(d);
  }
  // r (r + 1) is even, so the division is exact.
  return rr * (sum + 1) - k * (rr * (rr + 1) / 2);
}

bool truncation_safe(const std::vector<std::size_t>& dims, std::size_t r) {
  if (dims.empty()) throw DimensionError("truncation_safe: empty dims");
  if (r < 1) throw ConfigError("truncation_safe: rank must be positive");
  const long long k = static_cast<long long>(dims.size());
  const long long rr = static_cast<long long>(r);
  long long sum = 0;
  long long prod = 1;
  for (std::size_t d : dims) {
    if (r > d) throw ConfigError("truncation_safe: rank exceeds a mode dimension");
    sum += static_cast<long long>(d);
    prod *= static_cast<long long>(d) - rr + 1;
  }
  const long long lhs = (rr - 1) * (sum + 1) - k * (rr * (rr - 1) / 2);
  return lhs < prod;
}

RecoveryError recovery_error(const std::vector<Matrix>& got, const std::vector<double>& got_lambda,
                             const std::vector<Matrix>& truth,
                             const std::vector<double>& truth_lambda) {
  if (got.size() != truth.size())
    throw DimensionError("recovery_error: factor set orders differ");
  const std::size_t k = got.size();
  RecoveryError out;
  out.match.assign(got_lambda.size(), static_cast<std::size_t>(-1));

  auto correlation = [&](std::size_t jg, std::size_t jt) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> cg = got[i].col(jg);
      std::vector<double> ct = truth[i].col(jt);
      acc += std::abs(kernels::dot(cg.data(), ct.data(), cg.size()));
    }
    return acc;
  };

  std::vector<std::size_t> order(got_lambda.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(got_lambda[x]) > std::abs(got_lambda[y]);
  });

  std::vector<bool> used(truth_lambda.size(), false);
  double lam_err = 0.0, sub_err = 0.0;
  for (std::size_t jg : order) {
    double best_gap = 0.0, best_corr = -1.0;
    std::size_t best = static_cast<std::size_t>(-1);
    for (std::size_t jt = 0; jt < truth_lambda.size(); ++jt) {
      if (used[jt]) continue;
      const double gap = std::abs(std::abs(got_lambda[jg]) - std::abs(truth_lambda[jt]));
      if (best == static_cast<std::size_t>(-1) || gap < best_gap - 1e-12 ||
          (gap <= best_gap + 1e-12 && correlation(jg, jt) > best_corr)) {
        best = jt;
        best_gap = gap;
        best_corr = correlation(jg, jt);
      }
    }
    if (best == static_cast<std::size_t>(-1)) break;  // more columns than truth
    used[best] = true;
    out.match[jg] = best;
    lam_err = std::max(lam_err, best_gap);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> cg = got[i].col(jg);
      std::vector<double> ct = truth[i].col(best);
      // sin of the angle as the residual of projecting onto the truth
      // column; exact near zero, unlike sqrt(1 - cos^2).
      const double c = kernels::dot(cg.data(), ct.data(), cg.size());
      kernels::axpy(-c, ct.data(), cg.data(), cg.size());
      const double s = std::sqrt(kernels::dot(cg.data(), cg.data(), cg.size()));
      sub_err = std::max(sub_err, s);
    }
  }
  for (std::size_t jt = 0; jt < truth_lambda.size(); ++jt)
    if (!used[jt]) lam_err = std::max(lam_err, std::abs(truth_lambda[jt]));
  out.lambda_error = lam_err;
  out.subspace_error = sub_err;
  return out;
}

}  // namespace lrota
