#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lrota/diagnostics.hpp"
#include "lrota/errors.hpp"
#include "lrota/generators.hpp"
#include "lrota/matrix_kernels.hpp"
#include "lrota/rng.hpp"
#include "lrota/solver.hpp"
#include "lrota/tensor.hpp"

using namespace lrota;

namespace {

GeneratedTensor odeco_instance(std::vector<std::size_t> dims, std::size_t rank,
                               std::uint64_t seed) {
  GeneratorSpec g;
  g.kind = TensorKind::odeco_exact;
  g.dims = std::move(dims);
  g.rank = rank;
  g.seed = seed;
  return generate_tensor(g);
}

Solution reference_solve(const DenseTensor& a, std::size_t r, bool snapshots,
                         ProximalMode mode = ProximalMode::classic) {
  SolverConfig cfg;
  cfg.proximal = mode;
  cfg.record_snapshots = snapshots;
  cfg.max_sweeps = 200;
  return solve(a, r, cfg);
}

}  // namespace

TEST_CASE("stationarity certificate vanishes at an exact decomposition") {
  GeneratedTensor inst = odeco_instance({4, 4, 4}, 3, 401);
  KktReport rep = kkt_residual(inst.tensor, inst.truth_factors);
  CHECK(rep.total <= 1e-10);
  CHECK(rep.max_sym_defect <= 1e-10);
  REQUIRE(rep.lambda.size() == 3);
  // Reported diagonal matches the construction up to matching order.
  std::vector<double> got = rep.lambda;
  std::vector<double> want = inst.truth_lambda;
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(std::abs(got[j]) == doctest::Approx(want[j]).epsilon(1e-10));
}

TEST_CASE("stationary points may carry zero diagonal values") {
  // Rank-1 tensor, rank-2 factor set whose extra column is orthogonal to the
  // signal: the extra mode-matrix column vanishes, so the point is
  // stationary with a zero diagonal entry.
  GeneratedTensor inst = odeco_instance({3, 3, 3}, 1, 402);
  std::vector<Matrix> wide;
  for (const Matrix& u1 : inst.truth_factors) {
    OrthonormalMatrix comp = complete_orthonormal(OrthonormalMatrix(u1));
    Matrix u2(u1.rows(), 2);
    u2.set_col(0, u1.col(0));
    u2.set_col(1, comp.matrix().col(0));
    wide.push_back(u2);
  }
  KktReport rep = kkt_residual(inst.tensor, wide);
  CHECK(rep.total <= 1e-12);
  CHECK(rep.min_abs_lambda <= 1e-12);
  CHECK(std::abs(rep.lambda[0]) == doctest::Approx(inst.truth_lambda[0]).epsilon(1e-10));
}

TEST_CASE("gradient vanishes at the optimum and matches finite differences") {
  GeneratedTensor inst = odeco_instance({4, 4, 4}, 2, 403);
  std::vector<double> lam = lambda_of(inst.tensor, inst.truth_factors);
  GradG at_opt = riemannian_grad_g(inst.tensor, inst.truth_factors, lam);
  CHECK(at_opt.norm <= 1e-10);

  // Directional derivative along a tangent direction at a random point.
  Rng rng(404);
  std::vector<Matrix> u;
  for (std::size_t s = 0; s < 3; ++s) u.push_back(random_orthonormal(4, 2, rng).matrix());
  std::vector<double> x{1.3, -0.4};
  GradG grad = riemannian_grad_g(inst.tensor, u, x);

  Matrix d(4, 2);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j) d(i, j) = rng.next_gaussian();
  d = tangent_project(OrthonormalMatrix(u[0]), d);
  const double dx0 = 0.7;

  auto eval = [&](double t) {
    std::vector<Matrix> ut = u;
    ut[0] = polar(u[0] + t * d).u.matrix();
    std::vector<double> xt = x;
    xt[0] += t * dx0;
    DenseTensor model = assemble(ut, xt);
    DenseTensor diff = inst.tensor - model;
    return 0.5 * norm(diff) * norm(diff);
  };
  const double h = 1e-5;
  const double numeric = (eval(h) - eval(-h)) / (2.0 * h);
  const double analytic = frobenius_inner(grad.mode_parts[0], d) + grad.x_part[0] * dx0;
  CHECK(std::abs(numeric - analytic) <= 1e-5 * std::max(1.0, std::abs(analytic)));
}

TEST_CASE("audits pass on a recorded run") {
  GeneratorSpec g;
  g.kind = TensorKind::odeco_noisy;
  g.dims = {4, 4, 4};
  g.rank = 2;
  g.sigma = 0.1;
  g.seed = 405;
  DenseTensor a = generate_tensor(g).tensor;
  Solution sol = reference_solve(a, 2, true);

  AuditReport dec = sufficient_decrease_audit(sol.trace);
  CHECK(dec.pass());
  CHECK(!dec.entries.empty());
  CHECK(dec.min_slack >= -1e-9);

  AuditReport sub = subdiff_bound_audit(a, sol.trace);
  CHECK(sub.pass());
  CHECK(!sub.entries.empty());

  AuditReport trunc = truncation_audit(sol.trace, 2);
  CHECK(trunc.pass());
}

TEST_CASE("audits reject corrupted traces") {
  GeneratorSpec g;
  g.kind = TensorKind::gaussian;
  g.dims = {4, 4, 4};
  g.seed = 406;
  DenseTensor a = generate_tensor(g).tensor;
  Solution sol = reference_solve(a, 2, true);
  REQUIRE(sol.trace.sweeps.size() >= 2);

  // Claiming a huge step makes the guaranteed gain unachievable.
  std::size_t target = 0;
  for (std::size_t i = 0; i < sol.trace.sweeps.size(); ++i)
    if (sol.trace.sweeps[i].step_norm > sol.trace.sweeps[target].step_norm) target = i;
  SolveTrace inflated = sol.trace;
  inflated.sweeps[target].step_norm *= 1e6;
  CHECK(!sufficient_decrease_audit(inflated).pass());

  // Claiming a tiny step breaks the subgradient bound the other way.
  SolveTrace shrunk = sol.trace;
  for (SweepRecord& rec : shrunk.sweeps) rec.step_norm *= 1e-6;
  CHECK(!subdiff_bound_audit(a, shrunk).pass());
}

TEST_CASE("truncation accounting rejects an overstated loss") {
  GeneratorSpec g;
  g.kind = TensorKind::defective_rank;
  g.dims = {4, 4, 4};
  g.rank = 3;
  g.seed = 407;
  DenseTensor a = generate_tensor(g).tensor;
  SolverConfig cfg;
  cfg.kappa = 0.2;
  cfg.max_sweeps = 300;
  Solution sol = solve(a, 3, cfg);

  AuditReport clean = truncation_audit(sol.trace, 3);
  CHECK(clean.pass());
  bool fired = false;
  SolveTrace bad = sol.trace;
  for (SweepRecord& rec : bad.sweeps) {
    if (rec.truncated.empty()) continue;
    fired = true;
    rec.truncation_loss = 1e3;
  }
  REQUIRE(fired);
  CHECK(!truncation_audit(bad, 3).pass());
}

TEST_CASE("subgradient audit requires snapshots") {
  GeneratedTensor inst = odeco_instance({4, 4, 4}, 2, 408);
  Solution sol = reference_solve(inst.tensor, 2, false);
  CHECK_THROWS_AS(subdiff_bound_audit(inst.tensor, sol.trace), ConfigError);
}

TEST_CASE("linear rate fit recovers an exact geometric series") {
  std::vector<double> f;
  for (int p = 0; p < 60; ++p) f.push_back(1.0 - std::pow(2.0, -double(p)));
  RateReport rep = fit_linear_rate(f);
  CHECK(!rep.superlinear);
  CHECK(rep.rho == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.fit_residual <= 1e-9);
  CHECK(rep.f_star == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.points >= 10);
}

TEST_CASE("linear rate fit flags superlinear decay") {
  std::vector<double> f;
  for (int p = 0; p < 40; ++p) f.push_back(10.0 - std::pow(1e-3, double(p)));
  RateReport rep = fit_linear_rate(f);
  CHECK(rep.superlinear);
}

TEST_CASE("linear rate fit refuses degenerate input") {
  const std::vector<double> too_short{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fit_linear_rate(too_short), NumericalError);
}

TEST_CASE("trace rate fit starts after the last truncation") {
  SolveTrace trace;
  trace.initial_f = 0.0;
  // Garbage before the truncation event, clean geometric decay after.
  for (int p = 0; p < 5; ++p) {
    SweepRecord rec;
    rec.sweep = p + 1;
    rec.f = (p % 2 == 0) ? 3.0 : 1.0;  // non-monotone on purpose
    trace.sweeps.push_back(rec);
  }
  {
    SweepRecord rec;
    rec.sweep = 6;
    rec.truncated = {1};
    rec.truncation_loss = 0.5;
    rec.f = 1.0;  // equals 2 - 0.5^0, so the tail is geometric either way
    trace.sweeps.push_back(rec);
  }
  for (int p = 1; p <= 40; ++p) {
    SweepRecord rec;
    rec.sweep = 6 + p;
    rec.f = 2.0 - std::pow(0.5, double(p));
    trace.sweeps.push_back(rec);
  }
  RateReport rep = fit_linear_rate(trace);
  CHECK(!rep.superlinear);
  CHECK(rep.rho == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(rep.f_star == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("descent-exponent certificate reports the advertised constants") {
  LojaBound lb = lojasiewicz_exponent({2, 2, 2}, 1);
  CHECK(lb.variable_count == 9);
  CHECK(lb.degree == 6);
  CHECK(lb.base == 15);
  CHECK(lb.exponent == 8);
  const double want = 1.0 - 1.0 / (6.0 * std::pow(15.0, 8.0));
  CHECK(std::abs(lb.tau - want) <= 1e-12);
  CHECK(lb.tau < 1.0);
  CHECK(lb.tau > 0.5);
}

TEST_CASE("variety dimension counts") {
  CHECK(manifold_dim({2, 2, 2}, 1) == 4);
  CHECK(manifold_dim({3, 3, 3}, 2) == 11);
  CHECK(manifold_dim({4, 4, 4}, 2) == 17);
}

TEST_CASE("dimension-count truncation test") {
  CHECK(truncation_safe({4, 4, 4}, 2));
  CHECK(!truncation_safe({2, 2, 2}, 2));
}

TEST_CASE("recovery error is invariant to order and sign") {
  GeneratedTensor inst = odeco_instance({4, 4, 4}, 3, 409);
  RecoveryError exact = recovery_error(inst.truth_factors, inst.truth_lambda,
                                       inst.truth_factors, inst.truth_lambda);
  CHECK(exact.lambda_error <= 1e-14);
  CHECK(exact.subspace_error <= 1e-14);

  // Permute the columns and flip some signs.
  const std::vector<std::size_t> perm{2, 0, 1};
  std::vector<Matrix> shuffled;
  for (const Matrix& u : inst.truth_factors) shuffled.push_back(u.select_cols(perm));
  for (Matrix& u : shuffled) u.scale_col(1, -1.0);
  std::vector<double> lam_shuffled;
  for (std::size_t j : perm) lam_shuffled.push_back(inst.truth_lambda[j]);

  RecoveryError rep = recovery_error(shuffled, lam_shuffled, inst.truth_factors,
                                     inst.truth_lambda);
  CHECK(rep.lambda_error <= 1e-12);
  CHECK(rep.subspace_error <= 1e-12);
  REQUIRE(rep.match.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(rep.match[j] == perm[j]);

  // A genuinely different decomposition is not matched as exact.
  GeneratedTensor other = odeco_instance({4, 4, 4}, 3, 410);
  RecoveryError off = recovery_error(other.truth_factors, other.truth_lambda,
                                     inst.truth_factors, inst.truth_lambda);
  CHECK(off.subspace_error > 1e-3);
}
