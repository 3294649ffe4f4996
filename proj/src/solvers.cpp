#include "hodgekit/solvers.hpp"

#include <chrono>
#include <cmath>

namespace hodgekit {

std::pair<Vector, SolveReport> cg_semidefinite(const ApplyFn& A, const Vector& b,
                                               double tol, int max_iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = static_cast<int>(b.size());
    if (max_iter < 0) max_iter = 10 * n + 100;
    SolveReport report;
    Vector x = Vector::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        report.converged = true;
        return {x, report};
    }
    Vector r = b;  // x0 = 0
    Vector p = r;
    double rr = r.squaredNorm();
    int it = 0;
    while (it < max_iter) {
        Vector Ap = A(p);
        const double curv = p.dot(Ap);
        if (curv <= 0.0) {
            // Zero (or negative) curvature with residual above tolerance:
            // inconsistent right-hand side or non-PSD operator.
            break;
        }
        const double alpha = rr / curv;
        x += alpha * p;
        r -= alpha * Ap;
        ++it;
        const double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= tol * bnorm) {
            rr = rr_new;
            break;
        }
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    report.iterations = it;
    report.relative_residual = std::sqrt(rr) / bnorm;
    report.converged = report.relative_residual <= tol;
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {x, report};
}

std::pair<Vector, SolveReport> cg_semidefinite(const SparseMatrix& A, const Vector& b,
                                               double tol, int max_iter) {
    return cg_semidefinite([&A](const Vector& v) { return Vector(A * v); }, b, tol, max_iter);
}

NullSpaceResult null_space_generalized(const Matrix& A, const std::optional<Matrix>& B,
                                       double zero_tol_rel, int dense_limit) {
    if (A.rows() != A.cols()) throw InvalidInputError("null space: A must be square");
    if (A.rows() > dense_limit)
        throw SolverError("problem size " + std::to_string(A.rows()) +
                          " exceeds dense eigensolver limit " + std::to_string(dense_limit));
    Eigen::VectorXd evals;
    Matrix evecs;
    if (B) {
        if (B->rows() != A.rows() || B->cols() != A.cols())
            throw InvalidInputError("null space: B size mismatch");
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(A, *B);
        if (es.info() != Eigen::Success)
            throw SolverError("generalized eigensolver failed (B not positive definite?)");
        evals = es.eigenvalues();
        evecs = es.eigenvectors();  // B-orthonormal
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(A);
        if (es.info() != Eigen::Success) throw SolverError("eigensolver failed");
        evals = es.eigenvalues();
        evecs = es.eigenvectors();
    }
    const double lmax = evals.cwiseAbs().maxCoeff();
    const double thresh = zero_tol_rel * lmax;
    NullSpaceResult res;
    res.threshold_used = thresh;
    std::vector<int> keep;
    for (int i = 0; i < evals.size(); ++i)
        if (std::abs(evals(i)) <= thresh) keep.push_back(i);
    res.basis.resize(A.rows(), static_cast<int>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) {
        res.basis.col(static_cast<int>(k)) = evecs.col(keep[k]);
        res.eigenvalues.push_back(evals(keep[k]));
    }
    return res;
}

NullSpaceResult null_space_generalized(const SparseMatrix& A,
                                       const std::optional<SparseMatrix>& B,
                                       double zero_tol_rel, int dense_limit) {
    std::optional<Matrix> Bd;
    if (B) Bd = Matrix(*B);
    return null_space_generalized(Matrix(A), Bd, zero_tol_rel, dense_limit);
}

Matrix dense_solve(const Matrix& A, const Matrix& B) {
    if (A.rows() != A.cols()) throw InvalidInputError("dense_solve: A must be square");
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    const auto& R = qr.matrixR();
    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < A.rows(); ++i) {
        const double d = std::abs(R(i, i));
        rmax = std::max(rmax, d);
        rmin = std::min(rmin, d);
    }
    if (rmin <= 1e-14 * rmax)
        throw SolverError("dense_solve: matrix singular to working precision "
                          "(condition estimate " +
                          std::to_string(rmax / std::max(rmin, 1e-300)) + ")");
    return qr.solve(B);
}

int svd_rank(const Matrix& A, double rel_tol) {
    if (A.rows() == 0 || A.cols() == 0) return 0;
    Eigen::BDCSVD<Matrix> svd(A);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

Matrix svd_null_space(const Matrix& A, double rel_tol) {
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const int r = svd_rank(A, rel_tol);
    return svd.matrixV().rightCols(A.cols() - r);
}

}  // namespace hodgekit
