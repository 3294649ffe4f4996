#pragma once

#include <functional>
#include <optional>

#include "hodgekit/operators.hpp"

namespace hodgekit {

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    double wall_time = 0.0;  // seconds
};

struct NullSpaceResult {
    Matrix basis;              // columns, B-orthonormal
    std::vector<double> eigenvalues;
    double threshold_used = 0.0;
};

using ApplyFn = std::function<Vector(const Vector&)>;

// Conjugate gradients for a consistent symmetric positive semidefinite system.
// Deterministic: zero initial guess, no preconditioning.
std::pair<Vector, SolveReport> cg_semidefinite(const ApplyFn& A, const Vector& b,
                                               double tol = 1e-12, int max_iter = -1);
std::pair<Vector, SolveReport> cg_semidefinite(const SparseMatrix& A, const Vector& b,
                                               double tol = 1e-12, int max_iter = -1);

// Near-null eigenvectors of the pencil (A, B): columns x with A x = lambda B x
// and |lambda| <= zero_tol_rel * |lambda|_max, B-orthonormal. Dense path only;
// A may be symmetric indefinite, B must be SPD (or absent => identity).
NullSpaceResult null_space_generalized(const Matrix& A, const std::optional<Matrix>& B,
                                       double zero_tol_rel = 1e-8, int dense_limit = 4000);
NullSpaceResult null_space_generalized(const SparseMatrix& A,
                                       const std::optional<SparseMatrix>& B,
                                       double zero_tol_rel = 1e-8, int dense_limit = 4000);

// Small dense solve A X = B with a condition estimate; throws SolverError when
// singular to working precision.
Matrix dense_solve(const Matrix& A, const Matrix& B);

// Rank by singular-value thresholding relative to the largest singular value.
int svd_rank(const Matrix& A, double rel_tol = 1e-10);

// Orthonormal basis of the (right) null space of A by SVD.
Matrix svd_null_space(const Matrix& A, double rel_tol = 1e-10);

}  // namespace hodgekit
