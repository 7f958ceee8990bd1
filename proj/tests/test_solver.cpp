#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lrota/errors.hpp"
#include "lrota/generators.hpp"
#include "lrota/matrix_kernels.hpp"
#include "lrota/rng.hpp"
#include "lrota/solver.hpp"
#include "lrota/tensor.hpp"
#include "oracles.hpp"

using namespace lrota;

namespace {

// Exactly decomposable instance with known diagonal values.
GeneratedTensor odeco_instance(std::vector<std::size_t> dims, std::size_t rank,
                               std::uint64_t seed) {
  GeneratorSpec g;
  g.kind = TensorKind::odeco_exact;
  g.dims = std::move(dims);
  g.rank = rank;
  g.seed = seed;
  return generate_tensor(g);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  return m;
}

}  // namespace

TEST_CASE("diagonal values pick out the assembled coefficients") {
  Rng rng(201);
  std::vector<Matrix> factors;
  for (std::size_t n : {4ul, 4ul, 4ul})
    factors.push_back(random_orthonormal(n, 3, rng).matrix());
  const std::vector<double> lambda{3.0, 2.0, 1.0};
  DenseTensor a = assemble(factors, lambda);
  std::vector<double> got = lambda_of(a, factors);
  REQUIRE(got.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(got[j] == doctest::Approx(lambda[j]).epsilon(1e-12));
  CHECK(objective_f(a, factors) == doctest::Approx(14.0).epsilon(1e-12));
}

TEST_CASE("objective of a two-column diagonal model") {
  Rng rng(202);
  std::vector<Matrix> factors;
  for (std::size_t n : {3ul, 3ul, 3ul})
    factors.push_back(random_orthonormal(n, 2, rng).matrix());
  DenseTensor a = assemble(factors, {2.0, 1.0});
  CHECK(objective_f(a, factors) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("mode matrices match the naive contraction oracle") {
  Rng rng(203);
  GeneratorSpec g;
  g.kind = TensorKind::gaussian;
  g.dims = {3, 4, 2};
  g.seed = 7;
  DenseTensor a = generate_tensor(g).tensor;
  std::vector<Matrix> state;
  for (std::size_t n : {3ul, 4ul, 2ul})
    state.push_back(random_orthonormal(n, 2, rng).matrix());

  for (std::size_t mode = 1; mode <= 3; ++mode) {
    ModeMatrices mm = mode_matrices(a, state, mode);
    REQUIRE(mm.v.rows() == a.dim(mode));
    REQUIRE(mm.v.cols() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
      BlockVector x;
      for (std::size_t s = 0; s < 3; ++s) x.parts.push_back(state[s].col(j));
      std::vector<double> want = oracle::contract_mode_naive(a, x, mode);
      for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(mm.v(i, j) == doctest::Approx(want[i]).epsilon(1e-12));
      // The diagonal value is the column's inner product with the state.
      double lam = 0.0;
      for (std::size_t i = 0; i < want.size(); ++i) lam += want[i] * state[mode - 1](i, j);
      CHECK(mm.lambda[j] == doctest::Approx(lam).epsilon(1e-12));
    }
  }
}

TEST_CASE("plain polar step reproduces the polar factor") {
  Rng rng(204);
  Matrix m = random_matrix(5, 3, rng);
  PolarStep step = polar_step_plain(m);
  CHECK(step.correction == kCorrectionNone);
  CHECK(frobenius_distance(step.u.matrix(), oracle::polar_factor(m)) <= 1e-9);
  std::vector<double> sv = oracle::singular_values(m);
  CHECK(step.sigma_min == doctest::Approx(sv.back()).epsilon(1e-10));
}

TEST_CASE("classic step shifts toward the previous iterate when near-singular") {
  Rng rng(205);
  OrthonormalMatrix u_prev = random_orthonormal(4, 2, rng);
  // Well-conditioned input: no correction.
  Matrix healthy = random_matrix(4, 2, rng);
  SvdResult hs = svd(healthy);
  const double eps_below = hs.sigma.back() * 0.5;
  PolarStep plain = polar_step_classic(healthy, u_prev.matrix(), eps_below);
  CHECK(plain.correction == kCorrectionNone);

  // Force sigma_min below epsilon: correction becomes the shifted polar.
  const double eps_above = hs.sigma.back() * 2.0;
  PolarStep shifted = polar_step_classic(healthy, u_prev.matrix(), eps_above);
  CHECK(shifted.correction == kCorrectionShifted);
  Matrix target = healthy + eps_above * u_prev.matrix();
  CHECK(frobenius_distance(shifted.u.matrix(), oracle::polar_factor(target)) <= 1e-9);
  CHECK(shifted.sigma_min == doctest::Approx(hs.sigma.back()).epsilon(1e-10));
}

TEST_CASE("revised step distinguishes a collapsed rotation from a flat spectrum") {
  Rng rng(206);
  // Square frame with sigma = (1, delta): only the last value collapsed.
  OrthonormalMatrix g1 = random_orthonormal(2, 2, rng);
  OrthonormalMatrix h1 = random_orthonormal(2, 2, rng);
  const double delta = 1e-9;
  Matrix sig(2, 2);
  sig(0, 0) = 1.0;
  sig(1, 1) = delta;
  Matrix m = g1.matrix() * sig * h1.matrix().transpose();

  const double epsilon = 1e-4;
  const double tau = 0.5;  // second singular value 1 >= tau: case (i)
  OrthonormalMatrix u_prev = random_orthonormal(2, 2, rng);
  PolarStep step = polar_step_revised(m, u_prev.matrix(), epsilon, tau);
  CHECK(step.correction == kCorrectionSignFlip);
  CHECK(step.u.orthonormality_defect() <= 1e-10);
  // The rescued last left vector is aligned with the previous iterate's image
  // of the corresponding right vector.
  SvdResult s = svd(m);
  Matrix w = u_prev.matrix() * s.h;
  Matrix ghat = step.u.matrix() * s.h;  // u = ghat h^T  =>  ghat = u h
  double align = 0.0;
  for (std::size_t i = 0; i < 2; ++i) align += ghat(i, 1) * w(i, 1);
  CHECK(align >= 0.0);

  // Same spectrum but tau above the second value: falls back to the shift.
  PolarStep fallback = polar_step_revised(m, u_prev.matrix(), epsilon, 1.5);
  CHECK(fallback.correction == kCorrectionShifted);

  // Wide frame can never be a rotation: also the shift.
  Matrix wide = random_matrix(4, 2, rng);
  SvdResult ws = svd(wide);
  PolarStep tall_case = polar_step_revised(wide, random_orthonormal(4, 2, rng).matrix(),
                                           ws.sigma.back() * 2.0, ws.sigma.back() * 4.0);
  CHECK(tall_case.correction == kCorrectionShifted);

  // Healthy spectrum: no correction at all.
  PolarStep healthy = polar_step_revised(m, u_prev.matrix(), delta * 0.5, delta * 0.75);
  CHECK(healthy.correction == kCorrectionNone);
}

TEST_CASE("sign-flip step is deterministic") {
  Rng rng(207);
  OrthonormalMatrix u_prev = random_orthonormal(3, 3, rng);
  Matrix g = random_orthonormal(3, 3, rng).matrix();
  Matrix h = random_orthonormal(3, 3, rng).matrix();
  Matrix sig(3, 3);
  sig(0, 0) = 2.0;
  sig(1, 1) = 1.0;
  sig(2, 2) = 1e-10;
  Matrix m = g * sig * h.transpose();
  PolarStep a = polar_step_revised(m, u_prev.matrix(), 1e-4, 0.5);
  PolarStep b = polar_step_revised(m, u_prev.matrix(), 1e-4, 0.5);
  CHECK(a.correction == kCorrectionSignFlip);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(a.u(i, j) == b.u(i, j));
}

TEST_CASE("initialization strategies produce a positive objective") {
  GeneratedTensor inst = odeco_instance({4, 4, 4}, 2, 301);
  FactorSet hosvd = init_factors(inst.tensor, 2, InitStrategy::hosvd, 0);
  const double f0 = objective_f(inst.tensor, hosvd.matrices());
  // Leading Gram eigenvectors of an exactly decomposable tensor recover
  // the full objective ||lambda||^2.
  double lam_sq = 0.0;
  for (double l : inst.truth_lambda) lam_sq += l * l;
  CHECK(f0 == doctest::Approx(lam_sq).epsilon(1e-8));

  FactorSet rnd_a = init_factors(inst.tensor, 2, InitStrategy::random, 5);
  FactorSet rnd_b = init_factors(inst.tensor, 2, InitStrategy::random, 5);
  CHECK(objective_f(inst.tensor, rnd_a.matrices()) > 0.0);
  for (std::size_t s = 0; s < 3; ++s)
    CHECK(frobenius_distance(rnd_a.matrices()[s], rnd_b.matrices()[s]) == 0.0);

  DenseTensor zero({3, 3, 3});
  CHECK_THROWS_AS(init_factors(zero, 1, InitStrategy::hosvd, 0), NumericalError);
}

TEST_CASE("solve validates its inputs") {
  GeneratedTensor inst = odeco_instance({4, 4, 4}, 2, 302);
  SolverConfig cfg;
  DenseTensor order2({4, 4}, 1.0);
  CHECK_THROWS_AS(solve(order2, 1, cfg), DimensionError);
  CHECK_THROWS_AS(solve(inst.tensor, 0, cfg), ConfigError);
  CHECK_THROWS_AS(solve(inst.tensor, 5, cfg), ConfigError);
  DenseTensor zero({3, 3, 3});
  CHECK_THROWS_AS(solve(zero, 1, cfg), NumericalError);

  SolverConfig bad_tau;
  bad_tau.proximal = ProximalMode::revised;
  bad_tau.epsilon = 1e-2;
  bad_tau.tau = 1e-3;  // must exceed epsilon
  CHECK_THROWS_AS(solve(inst.tensor, 2, bad_tau), ConfigError);

  SolverConfig bad_kappa;
  bad_kappa.kappa = 1e9;  // cannot reach sqrt(f0 / r)
  CHECK_THROWS_AS(solve(inst.tensor, 2, bad_kappa), ConfigError);

  SolverConfig bad_sweeps;
  bad_sweeps.max_sweeps = 0;
  CHECK_THROWS_AS(solve(inst.tensor, 2, bad_sweeps), ConfigError);
}

TEST_CASE("solve recovers an exactly decomposable tensor") {
  GeneratedTensor inst = odeco_instance({4, 4, 4}, 3, 303);
  SolverConfig cfg;
  cfg.kappa = 0.2;
  cfg.step_tol = 1e-12;
  cfg.kkt_tol = 1e-9;
  Solution sol = solve(inst.tensor, 3, cfg);
  CHECK(sol.termination == Termination::tolerance);
  CHECK(sol.residual <= 1e-8);
  CHECK(sol.factors.rank() == 3);
  // Normal form: nonnegative, nonincreasing diagonal.
  for (std::size_t j = 0; j < sol.lambda.size(); ++j) {
    CHECK(sol.lambda[j] >= 0.0);
    if (j > 0) CHECK(sol.lambda[j - 1] >= sol.lambda[j]);
  }
  // The reported objective and residual are mutually consistent.
  const double a_sq = norm(inst.tensor) * norm(inst.tensor);
  CHECK(sol.residual * sol.residual == doctest::Approx(a_sq - sol.f).epsilon(1e-6));
}

TEST_CASE("solve truncates a deficient target rank down to the truth") {
  GeneratorSpec g;
  g.kind = TensorKind::defective_rank;
  g.dims = {4, 4, 4};
  g.rank = 3;  // truth built at rank 2
  g.seed = 304;
  GeneratedTensor inst = generate_tensor(g);
  SolverConfig cfg;
  cfg.kappa = 0.2;
  Solution sol = solve(inst.tensor, 3, cfg);
  CHECK(sol.factors.rank() == 2);
  bool truncated = false;
  double loss = 0.0;
  for (const SweepRecord& rec : sol.trace.sweeps) {
    if (!rec.truncated.empty()) truncated = true;
    loss += rec.truncation_loss;
  }
  CHECK(truncated);
  CHECK(loss <= 3.0 * 0.2 * 0.2 + 1e-12);
}

TEST_CASE("trace bookkeeping is coherent") {
  GeneratedTensor inst = odeco_instance({4, 4, 4}, 2, 305);
  SolverConfig cfg;
  cfg.kappa = 0.2;
  cfg.record_snapshots = true;
  Solution sol = solve(inst.tensor, 2, cfg);
  REQUIRE(!sol.trace.sweeps.empty());
  CHECK(sol.trace.initial_f > 0.0);
  CHECK(sol.trace.initial_factors.size() == 3);
  double f_prev = sol.trace.initial_f;
  for (const SweepRecord& rec : sol.trace.sweeps) {
    CHECK(rec.lambda_path.size() == 4);  // start plus one per mode
    CHECK(rec.mode_step_norms.size() == 3);
    CHECK(rec.sigma_min.size() == 3);
    CHECK(rec.corrections.size() == 3);
    CHECK(rec.delta_f == doctest::Approx(rec.f - f_prev).epsilon(1e-12));
    CHECK(!rec.factors_after.empty());
    f_prev = rec.f;
  }
  CHECK(sol.f == doctest::Approx(sol.trace.sweeps.back().f).epsilon(1e-12));
  // The last recorded snapshot matches the returned factors up to the
  // normal-form permutation and signs: objectives agree.
  CHECK(objective_f(inst.tensor, sol.factors.matrices()) ==
        doctest::Approx(sol.f).epsilon(1e-9));
}

TEST_CASE("solver runs are deterministic") {
  GeneratorSpec g;
  g.kind = TensorKind::gaussian;
  g.dims = {4, 4, 4};
  g.seed = 306;
  DenseTensor a = generate_tensor(g).tensor;
  SolverConfig cfg;
  cfg.max_sweeps = 40;
  Solution x = solve(a, 2, cfg);
  Solution y = solve(a, 2, cfg);
  REQUIRE(x.lambda.size() == y.lambda.size());
  for (std::size_t j = 0; j < x.lambda.size(); ++j) CHECK(x.lambda[j] == y.lambda[j]);
  CHECK(x.sweeps == y.sweeps);
  CHECK(x.f == y.f);
}

TEST_CASE("rank-one approximation of a random tensor") {
  GeneratorSpec g;
  g.kind = TensorKind::gaussian;
  g.dims = {3, 3, 3};
  g.seed = 307;
  DenseTensor a = generate_tensor(g).tensor;
  SolverConfig cfg;
  cfg.max_sweeps = 4000;
  Solution sol = solve(a, 1, cfg);
  CHECK(sol.termination == Termination::tolerance);
  REQUIRE(sol.lambda.size() == 1);
  CHECK(sol.lambda[0] > 0.0);
  // Residual identity ||A - model||^2 = ||A||^2 - lambda^2 at a KKT point.
  const double a_sq = norm(a) * norm(a);
  CHECK(sol.residual * sol.residual ==
        doctest::Approx(a_sq - sol.lambda[0] * sol.lambda[0]).epsilon(1e-8));
}

TEST_CASE("stationarity residual is near zero at an exact decomposition") {
  GeneratedTensor inst = odeco_instance({4, 4, 4}, 2, 308);
  CHECK(stationarity_residual(inst.tensor, inst.truth_factors) <= 1e-10);
}
