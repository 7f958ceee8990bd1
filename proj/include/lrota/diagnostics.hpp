#pragma once

#include <cstddef>
#include <vector>

#include "lrota/solver.hpp"
#include "lrota/tensor.hpp"

// Certificates and audits for solver output. Everything here recomputes its
// inputs from first principles (contractions of A against factor columns,
// replay of recorded sweeps) so that it can vouch for a run independently
// of the code path that produced it.

namespace lrota {

struct KktReport {
  std::vector<double> lambda;         // diagonal values at the point
  std::vector<double> mode_residual;  // ||X_i - U_i X_i^T U_i||_F per mode
  std::vector<double> sym_defect;     // ||P_i - P_i^T||_F with P_i = U_i^T X_i
  std::vector<double> sigma_min;      // smallest singular value of X_i per mode
  double total = 0.0;                 // sqrt(sum of squared mode residuals)
  double max_sym_defect = 0.0;
  double min_abs_lambda = 0.0;
};

// First-order stationarity certificate at a coherent factor set. A point is
// stationary iff every X_i = V_i Lambda lies in the span of U_i with a
// symmetric coefficient matrix; both defects are reported without forming
// multipliers explicitly.
KktReport kkt_residual(const DenseTensor& a, const std::vector<Matrix>& factors);

struct GradG {
  std::vector<Matrix> mode_parts;  // tangent vectors, one per mode
  std::vector<double> x_part;      // x - lambda(U)
  double norm = 0.0;
};

// Riemannian gradient of g(U, x) = 0.5 * ||A - assemble(U, x)||^2: the
// mode-i part is the tangent projection of the ambient partial derivative,
// -(I - U U^T / 2)(V Gamma - U (V Gamma)^T U) with Gamma = diag(x); the
// x part is x - lambda(U).
GradG riemannian_grad_g(const DenseTensor& a, const std::vector<Matrix>& factors,
                        const std::vector<double>& x);

struct AuditEntry {
  int sweep = 0;
  int mode = 0;  // 0 for a whole-sweep check, otherwise the mode index
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // lhs - rhs for lower bounds, rhs - lhs for upper bounds
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  std::vector<AuditEntry> violations;
  double min_slack = 0.0;
  [[nodiscard]] bool pass() const { return violations.empty(); }
};

// Replays a trace against the guaranteed per-sweep and per-substep
// objective increase: each gain must be at least c * step^2 with c =
// epsilon/2 for the classic stabilization, min(epsilon, tau - epsilon)/2
// for the revised one, and 0 (plain monotonicity) without stabilization.
// Truncation sweeps are checked against their pre-truncation objective.
AuditReport sufficient_decrease_audit(const SolveTrace& trace, double tol = 1e-9);

// Replays consecutive factor snapshots and bounds a subgradient of the
// constrained objective at each iterate: the replayed residual norm must
// not exceed sqrt(k) * (2 r sqrt(r) ||A||^2 + epsilon) times the step norm.
// Requires snapshots in the trace; truncation sweeps are skipped.
AuditReport subdiff_bound_audit(const DenseTensor& a, const SolveTrace& trace, double tol = 1e-9);

// Accounting for dropped columns: each event loses at most (columns
// dropped) * kappa^2 of objective, cumulatively at most r * kappa^2, and
// the cumulative loss must stay below the initial objective.
AuditReport truncation_audit(const SolveTrace& trace, std::size_t initial_rank,
                             double tol = 1e-12);

struct RateReport {
  double rho = 0.0;           // estimated linear factor, exp(slope of log gaps)
  double fit_residual = 0.0;  // rms residual of the log-linear fit
  double f_star = 0.0;        // extrapolated limit of the objective
  bool superlinear = false;   // gap hit the numerical floor before 10 tail points
  std::size_t points = 0;     // tail points used in the fit
};

// Linear convergence factor of a nondecreasing objective series. The limit
// is extrapolated from the last three increments, gaps below
// 1e-14 * max(1, |f_star|) are discarded, and the fit uses the last 30% of
// the remaining sweeps (at least 10). Fewer than 10 usable points mean
// either superlinear convergence (gap underflowed) or NumericalError.
RateReport fit_linear_rate(const std::vector<double>& f_values);

// Same, applied to the objective series of a trace after its last
// truncation event (the initial objective is included when untruncated).
RateReport fit_linear_rate(const SolveTrace& trace);

struct LojaBound {
  long long variable_count = 0;  // N, ambient variables of the polynomial model
  long long degree = 0;          // 2k
  long long base = 0;            // 6k - 3
  long long exponent = 0;        // N - 1
  double tau = 0.0;              // 1 - 1 / (degree * base^exponent)
};

// Worst-case Lojasiewicz exponent certificate for the objective over the
// product of orthonormal-column manifolds with rank r.
LojaBound lojasiewicz_exponent(const std::vector<std::size_t>& dims, std::size_t r);

// Dimension of the rank-r orthogonally-decomposable variety:
// r * (sum_i n_i - k (r + 1) / 2 + 1), evaluated exactly.
long long manifold_dim(const std::vector<std::size_t>& dims, std::size_t r);

// Dimension-count test that rank deficiency can be detected by truncation:
// true iff the rank-(r-1) variety dimension (r-1)(sum n_i - k r / 2 + 1)
// is strictly below prod_i (n_i - r + 1).
bool truncation_safe(const std::vector<std::size_t>& dims, std::size_t r);

struct RecoveryError {
  double lambda_error = 0.0;    // max absolute mismatch of matched |lambda|
  double subspace_error = 0.0;  // max sin(angle) over matched columns and modes
  std::vector<std::size_t> match;  // truth index matched to each solution column
};

// Sign- and order-invariant distance from a computed decomposition to a
// ground truth: columns are matched greedily on |lambda| descending with
// ties broken by column correlation.
RecoveryError recovery_error(const std::vector<Matrix>& got, const std::vector<double>& got_lambda,
                             const std::vector<Matrix>& truth,
                             const std::vector<double>& truth_lambda);

}  // namespace lrota
