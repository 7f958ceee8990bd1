#pragma once

#include <cstdint>
#include <vector>

#include "lrota/matrix.hpp"
#include "lrota/matrix_kernels.hpp"
#include "lrota/tensor.hpp"

// Low-rank approximation of an order-k tensor by an orthogonally
// decomposable model: factor matrices with orthonormal columns per mode and
// a diagonal core. The solver maximizes f(U) = sum_j lambda_j(U)^2 by
// alternating polar updates over the modes. Each mode solves an orthogonal
// Procrustes subproblem; when the scaled mode matrix is close to rank
// deficient (smallest singular value below epsilon) a stabilized update is
// substituted, either the classic shifted polar step or a sign-flip rescue
// that avoids the shift when only the last singular value has collapsed.
// Columns whose diagonal value stays below kappa are dropped at sweep ends.

namespace lrota {

enum class ProximalMode { classic, revised, none };
enum class InitStrategy { hosvd, random };
enum class Termination { tolerance, max_sweeps };

struct FactorSet {
  std::vector<OrthonormalMatrix> factors;

  [[nodiscard]] std::size_t order() const { return factors.size(); }
  [[nodiscard]] std::size_t rank() const { return factors.empty() ? 0 : factors[0].cols(); }
  [[nodiscard]] std::vector<Matrix> matrices() const;
};

struct SolverConfig {
  double epsilon = 0.0;  // <= 0: defaults to 1e-4 * max(1, ||A||_F^2)
  double kappa = -1.0;   // < 0: defaults to 0.5 * sqrt(f(U_0) / r)
  double tau = 0.0;      // <= 0: defaults to 10 * epsilon (revised mode only)
  ProximalMode proximal = ProximalMode::classic;
  bool truncation = true;
  int max_sweeps = 2000;
  double step_tol = 1e-10;
  double kkt_tol = 1e-8;
  InitStrategy init = InitStrategy::hosvd;
  std::uint64_t seed = 0;
  bool record_snapshots = true;  // keep per-sweep factor copies in the trace
};

// Tolerances actually used after defaulting, plus the update rule they
// applied to; enough for an audit to replay the run.
struct ResolvedConfig {
  double epsilon = 0.0;
  double kappa = 0.0;
  double tau = 0.0;
  ProximalMode proximal = ProximalMode::classic;
};

// Per-mode stabilization outcome, recorded in traces.
enum : std::uint8_t {
  kCorrectionNone = 0,      // plain polar step
  kCorrectionShifted = 1,   // polar of M + epsilon * U_prev
  kCorrectionSignFlip = 2,  // last-singular-vector sign rescue
};

struct SweepRecord {
  int sweep = 0;  // 1-based
  double f = 0.0;
  double delta_f = 0.0;
  std::vector<double> lambda;  // end-of-sweep diagonal values (post-truncation)
  // Diagonal values after each substep: index 0 holds the sweep-start
  // values, index i the values after updating mode i (pre-truncation).
  std::vector<std::vector<double>> lambda_path;
  double step_norm = 0.0;
  std::vector<double> mode_step_norms;
  std::vector<double> sigma_min;            // per mode, of the scaled mode matrix
  std::vector<std::uint8_t> corrections;    // per mode, kCorrection* values
  std::vector<std::size_t> truncated;       // dropped column indices (pre-truncation numbering)
  double truncation_loss = 0.0;             // f drop caused by the dropped columns
  double kkt_residual = 0.0;
  std::vector<Matrix> factors_after;        // post-truncation, when snapshots are kept
};

struct SolveTrace {
  double initial_f = 0.0;
  std::vector<double> initial_lambda;
  std::vector<Matrix> initial_factors;
  ResolvedConfig resolved;
  std::vector<SweepRecord> sweeps;
};

struct Solution {
  FactorSet factors;
  std::vector<double> lambda;  // nonnegative, nonincreasing
  double residual = 0.0;       // ||A - assemble(factors, lambda)||_F, computed directly
  double f = 0.0;              // sum of lambda^2
  Termination termination = Termination::max_sweeps;
  int sweeps = 0;
  SolveTrace trace;
};

// Diagonal values of the model at the given factors: lambda_j is the full
// contraction of A with the j-th columns across modes.
std::vector<double> lambda_of(const DenseTensor& a, const std::vector<Matrix>& factors);

// f(U) = sum_j lambda_j(U)^2.
double objective_f(const DenseTensor& a, const std::vector<Matrix>& factors);

struct ModeMatrices {
  Matrix v;                    // n_mode x r, column j = contraction over the other modes
  std::vector<double> lambda;  // diagonal values with respect to this state
};

// Mode matrix and diagonal values for one mode against a (possibly mixed)
// per-mode state, as used inside a sweep.
ModeMatrices mode_matrices(const DenseTensor& a, const std::vector<Matrix>& state,
                           std::size_t mode);

struct PolarStep {
  OrthonormalMatrix u;
  std::uint8_t correction = kCorrectionNone;
  double sigma_min = 0.0;
};

// One mode update at the matrix level: m is the scaled mode matrix V Lambda,
// u_prev the previous factor. Exposed for direct testing of the branches.
PolarStep polar_step_plain(const Matrix& m);
PolarStep polar_step_classic(const Matrix& m, const Matrix& u_prev, double epsilon);
PolarStep polar_step_revised(const Matrix& m, const Matrix& u_prev, double epsilon, double tau);

// Initial factors with f > 0 guaranteed: leading Gram eigenvectors per mode
// (hosvd) or seeded random orthonormal draws with rejection. Zero tensors
// are rejected with NumericalError.
FactorSet init_factors(const DenseTensor& a, std::size_t r, InitStrategy strategy,
                       std::uint64_t seed);

// Total first-order stationarity residual sqrt(sum_i ||X_i - U_i X_i^T U_i||_F^2)
// with X_i the scaled mode matrix of the coherent state.
double stationarity_residual(const DenseTensor& a, const std::vector<Matrix>& factors);

// Full run. Validates order >= 3, 1 <= r <= min dims, nonzero input, and
// tolerance consistency (tau > epsilon in revised mode, kappa below
// sqrt(f(U_0)/r) when truncation is enabled).
Solution solve(const DenseTensor& a, std::size_t r, const SolverConfig& cfg);

}  // namespace lrota
