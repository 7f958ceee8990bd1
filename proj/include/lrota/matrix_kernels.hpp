#pragma once

#include <vector>

#include "lrota/matrix.hpp"
#include "lrota/rng.hpp"

// Self-contained orthogonal factorizations. Everything here is built on
// cyclic Jacobi rotations: a one-sided Hestenes sweep over column pairs for
// the SVD and a classical two-sided sweep for symmetric eigenproblems. The
// matrices in this project are tiny, so the quadratic-per-sweep cost is
// irrelevant and the payoff is singular values accurate to machine
// precision independent of conditioning.

namespace lrota {

// Singular values below sigma_1 * kRankTolerance count as zero.
inline constexpr double kRankTolerance = 1e-12;

struct SvdResult {
  Matrix g;                   // left vectors, n x min(n,m), orthonormal columns
  std::vector<double> sigma;  // nonincreasing, length min(n,m)
  Matrix h;                   // right vectors, m x min(n,m), orthonormal columns

  [[nodiscard]] std::size_t numerical_rank() const;
};

// Thin SVD of an n-by-m matrix. Deterministic; ties keep the order in which
// the rotated columns settled. Throws NumericalError if the sweeps do not
// converge (60 cycles).
SvdResult svd(const Matrix& m);

struct PolarResult {
  OrthonormalMatrix u;  // closest matrix with orthonormal columns
  Matrix h;             // symmetric psd factor, m = u^T input
};

// Polar decomposition input = U H of an n-by-m matrix with n >= m. For
// rank-deficient input the null directions of U are completed
// deterministically, so U is always a valid maximizer of <Q, input>.
PolarResult polar(const Matrix& m);

struct SymEigResult {
  Matrix q;                    // orthogonal eigenvectors, columns
  std::vector<double> values;  // nonincreasing
};

// Eigendecomposition of a symmetric matrix (symmetrized internally; inputs
// with relative asymmetry above 1e-6 are rejected).
SymEigResult sym_eig(const Matrix& s);

// Symmetric psd square root. Eigenvalues in [-1e-10 * max(1, lambda_max), 0)
// are clamped to zero; anything more negative is a NumericalError.
Matrix psd_sqrt(const Matrix& h);

// Projection of B onto the tangent space of the orthonormal-column manifold
// at A, computed as (I - A A^T / 2)(B - A B^T A).
Matrix tangent_project(const OrthonormalMatrix& a, const Matrix& b);

// Projection onto the normal space at A: A (A^T B + B^T A) / 2.
Matrix normal_project(const OrthonormalMatrix& a, const Matrix& b);

// Principal angles between the column spans, nondecreasing in [0, pi/2],
// computed as arccos of the singular values of U^T V.
std::vector<double> principal_angles(const OrthonormalMatrix& u, const OrthonormalMatrix& v);

// Orthonormal basis W of the orthogonal complement of span(U), n x (n - r).
// Deterministic: coordinate directions are orthogonalized greedily by
// largest residual.
OrthonormalMatrix complete_orthonormal(const OrthonormalMatrix& u);

// Complement basis rotated to track a reference: given v2 with orthonormal
// columns spanning a reference complement, returns W = U2 Q where U2 is the
// plain completion and Q the orthogonal polar factor of U2^T v2. This is
// the choice that makes [U W] close to [V1 v2] whenever U is close to V1.
OrthonormalMatrix complete_orthonormal_aligned(const OrthonormalMatrix& u, const Matrix& v2);

// Haar-ish random point with orthonormal columns: gaussian fill, then
// twice-iterated Gram-Schmidt with a positive-diagonal convention.
OrthonormalMatrix random_orthonormal(std::size_t n, std::size_t r, Rng& rng);

struct PolarGap {
  double gap;          // ||B - QC||_F^2 - ||B - WC||_F^2
  double identity;     // ||(W - Q) sqrt(H)||_F^2, equals gap exactly
  double lower_bound;  // sigma_min(B C^T) * ||W - Q||_F^2
  double sigma_min;    // smallest singular value of B C^T
};

// Excess misfit of an orthonormal Q over the polar factor W of A = B C^T,
// with the exact identity and the singular-value lower bound it satisfies.
// Shapes: B is m-by-p, C is n-by-p with m >= n, Q is m-by-n orthonormal.
PolarGap polar_error_gap(const Matrix& b, const Matrix& c, const OrthonormalMatrix& q);

}  // namespace lrota
