#include "lrota/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "lrota/diagnostics.hpp"
#include "lrota/errors.hpp"
#include "lrota/generators.hpp"
#include "lrota/matrix.hpp"
#include "lrota/matrix_kernels.hpp"
#include "lrota/rng.hpp"
#include "lrota/solver.hpp"
#include "lrota/tensor.hpp"

namespace lrota {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v;
  return os.str();
}

// Collects failures but keeps only the first few messages readable.
struct Tally {
  int failures = 0;
  std::ostringstream note;

  void fail(const std::string& what) {
    if (failures < 4) note << (failures ? "; " : "") << what;
    ++failures;
  }
  [[nodiscard]] std::string text() const {
    std::string s = note.str();
    if (failures > 4) s += "; +" + std::to_string(failures - 4) + " more";
    return s;
  }
};

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  return m;
}

std::vector<std::size_t> pick_dims(int i) {
  if (i % 2 == 0) return {4, 4, 4};
  return {5, 4, 3};
}

// Recovery of exactly decomposable inputs: residual and both recovery
// errors small on 50 instances across two shapes and ranks 2..3, under a
// wall-clock budget. kappa is pinned at 0.2, safely below every generated
// diagonal value, so the default truncation stays armed but silent.
CheckResult check_exact_recovery(std::uint64_t seed) {
  CheckResult res{"exact-recovery", false, "", 0.0};
  Tally tally;
  double worst_res = 0.0, worst_lam = 0.0, worst_sub = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 50; ++i) {
    GeneratorSpec g;
    g.kind = TensorKind::odeco_exact;
    g.dims = pick_dims(i);
    g.rank = 2 + (i / 2) % 2;
    g.seed = derive_seed(seed, 10, static_cast<std::uint64_t>(i));
    GeneratedTensor inst = generate_tensor(g);

    SolverConfig cfg;
    cfg.kappa = 0.2;
    cfg.step_tol = 1e-12;
    cfg.kkt_tol = 1e-9;
    cfg.record_snapshots = false;
    cfg.seed = derive_seed(seed, 11, static_cast<std::uint64_t>(i));
    Solution sol = solve(inst.tensor, g.rank, cfg);
    RecoveryError re = recovery_error(sol.factors.matrices(), sol.lambda, inst.truth_factors,
                                      inst.truth_lambda);
    worst_res = std::max(worst_res, sol.residual);
    worst_lam = std::max(worst_lam, re.lambda_error);
    worst_sub = std::max(worst_sub, re.subspace_error);
    if (sol.residual > 1e-8 || re.lambda_error > 1e-8 || re.subspace_error > 1e-7)
      tally.fail("run " + std::to_string(i) + " residual " + fmt(sol.residual) + " lambda " +
                 fmt(re.lambda_error) + " subspace " + fmt(re.subspace_error));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (secs >= 10.0) tally.fail("runtime " + fmt(secs) + "s exceeds 10s");
  res.pass = tally.failures == 0;
  res.details = res.pass ? "50 runs; max residual " + fmt(worst_res) + ", lambda " +
                               fmt(worst_lam) + ", subspace " + fmt(worst_sub) + ", " +
                               fmt(secs) + "s"
                         : tally.text();
  return res;
}

// Guaranteed objective gain per sweep and per substep, audited over 100
// runs mixing random dense and noisy decomposable inputs under both
// stabilization rules. Slack floor -1e-9.
CheckResult check_sufficient_decrease(std::uint64_t seed, bool inject) {
  CheckResult res{"sufficient-decrease", false, "", 0.0};
  Tally tally;
  double min_slack = 0.0;
  for (int i = 0; i < 100; ++i) {
    GeneratorSpec g;
    g.kind = i % 2 == 0 ? TensorKind::gaussian : TensorKind::odeco_noisy;
    if (g.kind == TensorKind::odeco_noisy) g.sigma = 0.1;
    g.dims = {4, 4, 4};
    g.rank = 2 + (i / 4) % 2;
    g.seed = derive_seed(seed, 20, static_cast<std::uint64_t>(i));
    GeneratedTensor inst = generate_tensor(g);

    SolverConfig cfg;
    cfg.proximal = (i / 2) % 2 == 0 ? ProximalMode::classic : ProximalMode::revised;
    cfg.max_sweeps = 120;
    cfg.record_snapshots = false;
    cfg.seed = derive_seed(seed, 21, static_cast<std::uint64_t>(i));
    Solution sol = solve(inst.tensor, g.rank, cfg);

    SolveTrace trace = sol.trace;
    if (inject && i == 0 && !trace.sweeps.empty()) {
      // Inflate the largest recorded step so the bound must trip.
      auto& worst = *std::max_element(
          trace.sweeps.begin(), trace.sweeps.end(),
          [](const SweepRecord& x, const SweepRecord& y) { return x.step_norm < y.step_norm; });
      worst.step_norm *= 1e6;
    }
    AuditReport rep = sufficient_decrease_audit(trace);
    min_slack = std::min(min_slack, rep.min_slack);
    if (!rep.pass())
      tally.fail("run " + std::to_string(i) + ": " + std::to_string(rep.violations.size()) +
                 " violations, worst slack " + fmt(rep.min_slack));
  }
  res.pass = tally.failures == 0;
  res.details = res.pass ? "100 runs, all sweep and substep gains bounded; min slack " +
                               fmt(min_slack)
                         : tally.text();
  return res;
}

// Deficient-rank inputs: truncation must fire on every instance, drop the
// working rank to the true one, cost at most r * kappa^2 in objective, and
// leave the post-truncation objective nondecreasing.
CheckResult check_monotone_truncation(std::uint64_t seed) {
  CheckResult res{"monotone-truncation", false, "", 0.0};
  Tally tally;
  int fired = 0;
  for (int i = 0; i < 20; ++i) {
    GeneratorSpec g;
    g.kind = TensorKind::defective_rank;
    g.dims = pick_dims(i);
    g.rank = 2 + i % 2;
    g.seed = derive_seed(seed, 30, static_cast<std::uint64_t>(i));
    GeneratedTensor inst = generate_tensor(g);

    SolverConfig cfg;
    cfg.kappa = 0.2;
    cfg.max_sweeps = 300;
    cfg.record_snapshots = false;
    cfg.seed = derive_seed(seed, 31, static_cast<std::uint64_t>(i));
    Solution sol = solve(inst.tensor, g.rank, cfg);

    AuditReport rep = truncation_audit(sol.trace, g.rank);
    if (!rep.pass()) tally.fail("run " + std::to_string(i) + " loss budget violated");

    int last_trunc = 0;
    double total_loss = 0.0;
    for (const SweepRecord& rec : sol.trace.sweeps) {
      if (!rec.truncated.empty()) last_trunc = rec.sweep;
      total_loss += rec.truncation_loss;
    }
    if (last_trunc > 0) ++fired;
    else tally.fail("run " + std::to_string(i) + " never truncated");
    const double kap = sol.trace.resolved.kappa;
    if (total_loss > static_cast<double>(g.rank) * kap * kap + 1e-12)
      tally.fail("run " + std::to_string(i) + " total loss " + fmt(total_loss));
    for (const SweepRecord& rec : sol.trace.sweeps) {
      if (rec.sweep > last_trunc && rec.delta_f < -1e-12 * std::max(1.0, std::abs(rec.f)))
        tally.fail("run " + std::to_string(i) + " sweep " + std::to_string(rec.sweep) +
                   " objective fell by " + fmt(-rec.delta_f));
    }
    if (sol.factors.rank() != g.rank - 1)
      tally.fail("run " + std::to_string(i) + " final rank " +
                 std::to_string(sol.factors.rank()) + " != " + std::to_string(g.rank - 1));
  }
  res.pass = tally.failures == 0;
  res.details = res.pass ? "20 deficient runs, truncation fired on " + std::to_string(fired) +
                               "/20, budgets held, rank recovered"
                         : tally.text();
  return res;
}

// Subgradient norm against sqrt(k) (2 r sqrt(r) ||A||^2 + eps) * step on
// every audited sweep of 20 runs, absolute headroom 1e-9.
CheckResult check_subdiff_bound(std::uint64_t seed) {
  CheckResult res{"subdiff-bound", false, "", 0.0};
  Tally tally;
  double min_slack = std::numeric_limits<double>::infinity();
  int audited = 0;
  for (int i = 0; i < 20; ++i) {
    GeneratorSpec g;
    g.kind = i % 2 == 0 ? TensorKind::gaussian : TensorKind::odeco_noisy;
    if (g.kind == TensorKind::odeco_noisy) g.sigma = 0.1;
    g.dims = {4, 4, 4};
    g.rank = 2;
    g.seed = derive_seed(seed, 40, static_cast<std::uint64_t>(i));
    GeneratedTensor inst = generate_tensor(g);

    SolverConfig cfg;
    cfg.proximal = i < 10 ? ProximalMode::classic : ProximalMode::revised;
    cfg.max_sweeps = 60;
    cfg.record_snapshots = true;
    cfg.seed = derive_seed(seed, 41, static_cast<std::uint64_t>(i));
    Solution sol = solve(inst.tensor, g.rank, cfg);

    AuditReport rep = subdiff_bound_audit(inst.tensor, sol.trace);
    for (const AuditEntry& e : rep.entries) {
      ++audited;
      min_slack = std::min(min_slack, e.rhs + 1e-9 - e.lhs);
      if (e.lhs > e.rhs + 1e-9)
        tally.fail("run " + std::to_string(i) + " sweep " + std::to_string(e.sweep) + " lhs " +
                   fmt(e.lhs) + " > rhs " + fmt(e.rhs));
    }
  }
  res.pass = tally.failures == 0;
  res.details = res.pass ? std::to_string(audited) + " audited sweeps across 20 runs; min slack " +
                               fmt(min_slack)
                         : tally.text();
  return res;
}

// First-order conditions at every tolerance-terminated limit, recomputed
// independently of the solver's own stopping test.
CheckResult check_kkt_at_limit(std::uint64_t seed) {
  CheckResult res{"kkt-at-limit", false, "", 0.0};
  Tally tally;
  double worst_total = 0.0, worst_sym = 0.0;
  for (int i = 0; i < 20; ++i) {
    GeneratorSpec g;
    if (i < 10) {
      g.kind = TensorKind::odeco_exact;
      g.rank = 2 + i % 2;
    } else {
      g.kind = TensorKind::gaussian;
      g.rank = 2;
    }
    g.dims = {4, 4, 4};
    g.seed = derive_seed(seed, 50, static_cast<std::uint64_t>(i));
    GeneratedTensor inst = generate_tensor(g);

    SolverConfig cfg;
    if (g.kind == TensorKind::odeco_exact) cfg.kappa = 0.2;
    cfg.kkt_tol = 5e-9;  // stop strictly inside the certified region
    cfg.max_sweeps = 6000;
    cfg.record_snapshots = false;
    cfg.seed = derive_seed(seed, 51, static_cast<std::uint64_t>(i));
    Solution sol = solve(inst.tensor, g.rank, cfg);
    if (sol.termination != Termination::tolerance) {
      tally.fail("run " + std::to_string(i) + " hit the sweep cap");
      continue;
    }
    KktReport kr = kkt_residual(inst.tensor, sol.factors.matrices());
    worst_total = std::max(worst_total, kr.total);
    worst_sym = std::max(worst_sym, kr.max_sym_defect);
    if (kr.total > 1e-8 || kr.max_sym_defect > 1e-8)
      tally.fail("run " + std::to_string(i) + " total " + fmt(kr.total) + " sym " +
                 fmt(kr.max_sym_defect));
  }
  res.pass = tally.failures == 0;
  res.details = res.pass ? "20 tolerance-terminated runs; max total " + fmt(worst_total) +
                               ", max sym defect " + fmt(worst_sym)
                         : tally.text();
  return res;
}

// Geometric convergence of the objective gap: fitted on 20 random dense
// runs, plus exact-series calibration of the fitting procedure itself.
CheckResult check_linear_rate(std::uint64_t seed) {
  CheckResult res{"linear-rate", false, "", 0.0};
  Tally tally;
  double worst_rho = 0.0, worst_fit = 0.0;
  for (int i = 0; i < 20; ++i) {
    GeneratorSpec g;
    g.kind = TensorKind::gaussian;
    g.dims = {5, 5, 5};
    g.rank = 2;
    g.seed = derive_seed(seed, 60, static_cast<std::uint64_t>(i));
    GeneratedTensor inst = generate_tensor(g);

    SolverConfig cfg;
    cfg.max_sweeps = 6000;
    cfg.record_snapshots = false;
    cfg.seed = derive_seed(seed, 61, static_cast<std::uint64_t>(i));
    Solution sol = solve(inst.tensor, g.rank, cfg);
    if (sol.termination != Termination::tolerance) {
      tally.fail("run " + std::to_string(i) + " hit the sweep cap");
      continue;
    }
    RateReport rr = fit_linear_rate(sol.trace);
    if (rr.superlinear) continue;  // faster than geometric: fine
    worst_rho = std::max(worst_rho, rr.rho);
    worst_fit = std::max(worst_fit, rr.fit_residual);
    if (!(rr.rho < 1.0) || !(rr.fit_residual < 0.1))
      tally.fail("run " + std::to_string(i) + " rho " + fmt(rr.rho) + " fit " +
                 fmt(rr.fit_residual));
  }
  for (double rho : {0.5, 0.9}) {
    std::vector<double> f;
    const int n = rho < 0.7 ? 60 : 100;
    for (int p = 0; p < n; ++p) f.push_back(10.0 - 5.0 * std::pow(rho, p));
    RateReport rr = fit_linear_rate(f);
    if (std::abs(rr.rho - rho) > 1e-6)
      tally.fail("calibration rho " + fmt(rho) + " estimated " + fmt(rr.rho));
  }
  res.pass = tally.failures == 0;
  std::ostringstream rho_txt;
  rho_txt << std::setprecision(6) << worst_rho;
  res.details = res.pass ? "20 runs; max rho " + rho_txt.str() + ", max fit residual " +
                               fmt(worst_fit) + "; calibration to 1e-6"
                         : tally.text();
  return res;
}

// Exact excess-misfit identity for the orthonormal Procrustes problem and
// its singular-value lower bound, without the classical 1/4 factor.
CheckResult check_polar_error_bound(std::uint64_t seed) {
  CheckResult res{"polar-error-bound", false, "", 0.0};
  Tally tally;
  double worst_eq = 0.0;
  double worst_bound = std::numeric_limits<double>::infinity();
  Rng rng(derive_seed(seed, 70));
  for (int i = 0; i < 500; ++i) {
    Rng inst = rng.child(static_cast<std::uint64_t>(i));
    const std::size_t m = 3 + inst.next_u64() % 4;       // rows
    const std::size_t n = 1 + inst.next_u64() % m;       // cols, m >= n
    const std::size_t p = std::max<std::size_t>(1, n - 1 + inst.next_u64() % 4);
    Matrix b = gaussian_matrix(m, p, inst);
    Matrix c = gaussian_matrix(n, p, inst);
    OrthonormalMatrix q = random_orthonormal(m, n, inst);
    PolarGap pg = polar_error_gap(b, c, q);
    const double eq_err = std::abs(pg.gap - pg.identity);
    const double bound_slack = pg.gap - pg.lower_bound;
    worst_eq = std::max(worst_eq, eq_err / (1.0 + std::abs(pg.gap)));
    worst_bound = std::min(worst_bound, bound_slack);
    if (eq_err > 1e-8 * (1.0 + std::abs(pg.gap)))
      tally.fail("instance " + std::to_string(i) + " identity off by " + fmt(eq_err));
    if (bound_slack < -1e-10)
      tally.fail("instance " + std::to_string(i) + " bound violated by " + fmt(-bound_slack));
  }
  res.pass = tally.failures == 0;
  res.details = res.pass ? "500 instances; worst relative identity error " + fmt(worst_eq) +
                               ", worst bound slack " + fmt(worst_bound)
                         : tally.text();
  return res;
}

// Angle machinery: cosine law against the Gram norm, rotation invariance,
// the trace and distance inequalities, and the aligned completion bound.
CheckResult check_principal_angles(std::uint64_t seed) {
  CheckResult res{"principal-angles", false, "", 0.0};
  Tally tally;
  Rng rng(derive_seed(seed, 80));

  for (int i = 0; i < 200; ++i) {  // cosine law + invariance + inequalities
    Rng inst = rng.child(static_cast<std::uint64_t>(i));
    const std::size_t n = 4 + inst.next_u64() % 4;
    const std::size_t r = 1 + inst.next_u64() % 4;
    OrthonormalMatrix u = random_orthonormal(n, r, inst);
    OrthonormalMatrix v = [&]() {
      if (i % 8 == 0) return u;  // zero angles
      if (i % 8 == 4 && n >= 2 * r) {
        OrthonormalMatrix comp = complete_orthonormal(u);  // right angles
        std::vector<std::size_t> keep(r);
        for (std::size_t j = 0; j < r; ++j) keep[j] = j;
        return OrthonormalMatrix(comp.matrix().select_cols(keep));
      }
      return random_orthonormal(n, r, inst);
    }();

    std::vector<double> theta = principal_angles(u, v);
    Matrix gram = u.matrix().transpose() * v.matrix();
    double cos_sq = 0.0;
    for (double t : theta) cos_sq += std::cos(t) * std::cos(t);
    const double gram_sq = gram.frobenius_norm() * gram.frobenius_norm();
    if (std::abs(cos_sq - gram_sq) > 1e-8)
      tally.fail("cosine law off by " + fmt(std::abs(cos_sq - gram_sq)));
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (theta[j] < -1e-12 || theta[j] > std::acos(-1.0) / 2 + 1e-12 ||
          (j > 0 && theta[j] < theta[j - 1] - 1e-12))
        tally.fail("angle ordering broken at instance " + std::to_string(i));
    }
    // Rotation invariance, compared on cosines: the angles themselves lose
    // half the precision through arccos near zero.
    OrthonormalMatrix q1 = random_orthonormal(r, r, inst);
    OrthonormalMatrix q2 = random_orthonormal(r, r, inst);
    std::vector<double> theta_rot =
        principal_angles(OrthonormalMatrix(u.matrix() * q1.matrix()),
                         OrthonormalMatrix(v.matrix() * q2.matrix()));
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double dc = std::abs(std::cos(theta_rot[j]) - std::cos(theta[j]));
      if (dc > 1e-8) tally.fail("rotation invariance off by " + fmt(dc));
    }

    // Trace inequality <U, V> <= sum sigma_j(U^T V).
    double sigma_sum = 0.0;
    for (double s : svd(gram).sigma) sigma_sum += s;
    if (frobenius_inner(u, v) > sigma_sum + 1e-8)
      tally.fail("trace inequality violated at instance " + std::to_string(i));

    // Distance inequality ||U^T V - I||^2 <= ||U - V||^2.
    const double gram_dist = frobenius_distance(gram, Matrix::identity(r));
    const double point_dist = frobenius_distance(u, v);
    if (gram_dist * gram_dist > point_dist * point_dist + 1e-8)
      tally.fail("gram distance inequality violated at instance " + std::to_string(i));
  }

  for (int i = 0; i < 200; ++i) {  // aligned completion bound
    Rng inst = rng.child(1000 + static_cast<std::uint64_t>(i));
    const std::size_t n = 5 + inst.next_u64() % 3;
    const std::size_t r = 2 + inst.next_u64() % 3;
    const std::size_t r1 = 1 + inst.next_u64() % (r - 1 == 0 ? 1 : r - 1);
    OrthonormalMatrix v = random_orthonormal(n, r, inst);
    std::vector<std::size_t> head(r1), tail(r - r1);
    for (std::size_t j = 0; j < r1; ++j) head[j] = j;
    for (std::size_t j = r1; j < r; ++j) tail[j - r1] = j;
    Matrix v1 = v.matrix().select_cols(head);
    Matrix v2 = v.matrix().select_cols(tail);

    OrthonormalMatrix u = i % 2 == 0
                              ? random_orthonormal(n, r1, inst)
                              : polar(v1 + 0.25 * gaussian_matrix(n, r1, inst)).u;
    OrthonormalMatrix w = complete_orthonormal_aligned(u, v2);
    Matrix p(n, r);
    for (std::size_t jj = 0; jj < r1; ++jj)
      for (std::size_t ii = 0; ii < n; ++ii) p(ii, jj) = u(ii, jj);
    for (std::size_t jj = 0; jj < r - r1; ++jj)
      for (std::size_t ii = 0; ii < n; ++ii) p(ii, r1 + jj) = w(ii, jj);
    OrthonormalMatrix check_p(p);  // throws if the completion is not orthonormal

    const double lhs = frobenius_distance(p, v);
    const double rhs = frobenius_distance(u, v1);
    if (lhs * lhs > 2.0 * rhs * rhs + 1e-8)
      tally.fail("completion bound violated: " + fmt(lhs * lhs) + " > 2 * " + fmt(rhs * rhs));
  }

  res.pass = tally.failures == 0;
  res.details = res.pass ? "200 instances per family, 4 families, all inequalities hold"
                         : tally.text();
  return res;
}

// Projected gradient against central finite differences along retracted
// curves, 20 points x 20 directions.
CheckResult check_gradient(std::uint64_t seed) {
  CheckResult res{"gradient-check", false, "", 0.0};
  Tally tally;
  double worst = 0.0;
  const double h = 1e-5;
  Rng rng(derive_seed(seed, 90));
  for (int pt = 0; pt < 20; ++pt) {
    Rng inst = rng.child(static_cast<std::uint64_t>(pt));
    std::vector<std::size_t> dims;
    switch (pt % 3) {
      case 0: dims = {4, 4, 4}; break;
      case 1: dims = {3, 4, 5}; break;
      default: dims = {2, 3, 4}; break;
    }
    const std::size_t r = 1 + pt % 2;
    GeneratorSpec g;
    g.kind = TensorKind::gaussian;
    g.dims = dims;
    g.seed = derive_seed(seed, 91, static_cast<std::uint64_t>(pt));
    DenseTensor a = generate_tensor(g).tensor;

    std::vector<OrthonormalMatrix> u;
    std::vector<Matrix> u_mats;
    for (std::size_t mode = 0; mode < dims.size(); ++mode) {
      u.push_back(random_orthonormal(dims[mode], r, inst));
      u_mats.push_back(u.back().matrix());
    }
    std::vector<double> x(r);
    for (double& v : x) v = inst.uniform(-2.0, 2.0);

    GradG grad = riemannian_grad_g(a, u_mats, x);
    const auto g_of = [&](const std::vector<Matrix>& mats, const std::vector<double>& xv) {
      DenseTensor diff = a - assemble(mats, xv);
      const double nn = norm(diff);
      return 0.5 * nn * nn;
    };

    for (int d = 0; d < 20; ++d) {
      std::vector<Matrix> dir;
      double analytic = 0.0;
      for (std::size_t mode = 0; mode < dims.size(); ++mode) {
        Matrix t = tangent_project(u[mode], gaussian_matrix(dims[mode], r, inst));
        analytic += frobenius_inner(grad.mode_parts[mode], t);
        dir.push_back(t);
      }
      std::vector<double> dx(r);
      for (std::size_t j = 0; j < r; ++j) {
        dx[j] = inst.next_gaussian();
        analytic += grad.x_part[j] * dx[j];
      }
      const auto eval = [&](double t) {
        std::vector<Matrix> mats;
        std::vector<double> xv(r);
        for (std::size_t mode = 0; mode < dims.size(); ++mode)
          mats.push_back(polar(u_mats[mode] + t * dir[mode]).u.matrix());
        for (std::size_t j = 0; j < r; ++j) xv[j] = x[j] + t * dx[j];
        return g_of(mats, xv);
      };
      const double numeric = (eval(h) - eval(-h)) / (2.0 * h);
      const double err = std::abs(numeric - analytic) / std::max(1.0, std::abs(analytic));
      worst = std::max(worst, err);
      if (err > 1e-5)
        tally.fail("point " + std::to_string(pt) + " direction " + std::to_string(d) +
                   " error " + fmt(err));
    }
  }
  res.pass = tally.failures == 0;
  res.details = res.pass ? "20 points x 20 directions; worst relative error " + fmt(worst)
                         : tally.text();
  return res;
}

// On exactly decomposable inputs the stabilized iteration must coincide
// with the plain one eventually: no corrections in the final half of the
// sweeps for at least 95% of runs.
CheckResult check_stabilization_decay(std::uint64_t seed) {
  CheckResult res{"stabilization-decay", false, "", 0.0};
  int clean = 0;
  for (int i = 0; i < 40; ++i) {
    GeneratorSpec g;
    g.kind = TensorKind::odeco_exact;
    g.dims = pick_dims(i);
    g.rank = 2 + (i / 2) % 2;
    g.seed = derive_seed(seed, 95, static_cast<std::uint64_t>(i));
    GeneratedTensor inst = generate_tensor(g);

    SolverConfig cfg;
    cfg.kappa = 0.2;
    cfg.record_snapshots = false;
    cfg.seed = derive_seed(seed, 96, static_cast<std::uint64_t>(i));
    Solution sol = solve(inst.tensor, g.rank, cfg);

    const int total = static_cast<int>(sol.trace.sweeps.size());
    bool tail_clean = true;
    for (const SweepRecord& rec : sol.trace.sweeps) {
      if (rec.sweep <= total / 2) continue;
      for (std::uint8_t c : rec.corrections)
        if (c != kCorrectionNone) tail_clean = false;
    }
    if (tail_clean) ++clean;
  }
  res.pass = clean >= 38;
  res.details = std::to_string(clean) + "/40 runs correction-free in the final half" +
                (res.pass ? "" : " (need 38)");
  return res;
}

// Counting formulas against hand evaluations.
CheckResult check_formula_utilities() {
  CheckResult res{"formula-utilities", false, "", 0.0};
  Tally tally;
  if (manifold_dim({2, 2, 2}, 1) != 4) tally.fail("manifold_dim((2,2,2),1) != 4");
  if (!truncation_safe({4, 4, 4}, 2)) tally.fail("truncation_safe((4,4,4),2) is false");
  LojaBound lb = lojasiewicz_exponent({2, 2, 2}, 1);
  if (lb.variable_count != 9) tally.fail("variable count != 9");
  const double expected_tau = 1.0 - 1.0 / (6.0 * std::pow(15.0, 8));
  if (std::abs(lb.tau - expected_tau) > 1e-12) tally.fail("tau mismatch");
  res.pass = tally.failures == 0;
  res.details = res.pass ? "dimension 4, truncation-safe true, exponent bound N=9 with 1-tau " +
                               fmt(1.0 - lb.tau)
                         : tally.text();
  return res;
}

}  // namespace

const std::vector<std::string>& battery_names() {
  static const std::vector<std::string> names = {
      "exact-recovery",     "sufficient-decrease", "monotone-truncation", "subdiff-bound",
      "kkt-at-limit",       "linear-rate",         "polar-error-bound",   "principal-angles",
      "gradient-check",     "stabilization-decay", "formula-utilities"};
  return names;
}

std::vector<CheckResult> run_battery(const BatteryOptions& opts) {
  const std::vector<std::string>& names = battery_names();
  for (const std::string& name : opts.only) {
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw ConfigError("unknown check: " + name);
  }
  const auto wanted = [&](const std::string& name) {
    return opts.only.empty() ||
           std::find(opts.only.begin(), opts.only.end(), name) != opts.only.end();
  };

  std::vector<CheckResult> out;
  const auto run = [&](const std::string& name, const std::function<CheckResult()>& fn) {
    if (!wanted(name)) return;
    const auto t0 = Clock::now();
    CheckResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {  // an escaped error is a failed check
      r.name = name;
      r.pass = false;
      r.details = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    out.push_back(std::move(r));
  };

  const std::uint64_t s = opts.seed;
  run("exact-recovery", [&] { return check_exact_recovery(s); });
  run("sufficient-decrease", [&] { return check_sufficient_decrease(s, opts.inject_violation); });
  run("monotone-truncation", [&] { return check_monotone_truncation(s); });
  run("subdiff-bound", [&] { return check_subdiff_bound(s); });
  run("kkt-at-limit", [&] { return check_kkt_at_limit(s); });
  run("linear-rate", [&] { return check_linear_rate(s); });
  run("polar-error-bound", [&] { return check_polar_error_bound(s); });
  run("principal-angles", [&] { return check_principal_angles(s); });
  run("gradient-check", [&] { return check_gradient(s); });
  run("stabilization-decay", [&] { return check_stabilization_decay(s); });
  run("formula-utilities", [&] { return check_formula_utilities(); });
  return out;
}

}  // namespace lrota
