#include "hodgekit/harmonic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>

namespace hodgekit {

namespace {

// Per-call memoization of coboundaries and stars.
struct Ops {
    const SimplicialComplex& c;
    StarKindSpec kind;
    std::map<int, SparseMatrix> stars_;
    std::map<int, SparseMatrix> ds_;

    const SparseMatrix& star(int p) {
        auto it = stars_.find(p);
        if (it == stars_.end()) it = stars_.emplace(p, hodge_star(c, p, kind)).first;
        return it->second;
    }
    const SparseMatrix& d(int p) {
        auto it = ds_.find(p);
        if (it == ds_.end()) it = ds_.emplace(p, coboundary(c, p)).first;
        return it->second;
    }
};

double star_norm(Ops& ops, int p, const Vector& v) {
    return std::sqrt(std::max(0.0, v.dot(ops.star(p) * v)));
}

Diagnostics compute_diagnostics(Ops& ops, const Cochain& h) {
    Diagnostics diag;
    const SimplicialComplex& c = ops.c;
    const int p = h.p;
    if (p < c.top_dim()) diag.d_norm = (ops.d(p) * h.values).lpNorm<Eigen::Infinity>();
    if (p > 0) {
        Cochain dh = codifferential_apply(c, p, ops.kind, h);
        diag.delta_norm = star_norm(ops, p - 1, dh.values);
    }
    diag.laplacian_residual = harmonic_residual(c, ops.kind, h);
    if (p > 0) {
        const double hn = star_norm(ops, p, h.values);
        std::mt19937 rng(12345);
        std::normal_distribution<double> dist;
        double worst = 0.0;
        for (int trial = 0; trial < 3; ++trial) {
            Vector tau(c.count(p - 1));
            for (int i = 0; i < tau.size(); ++i) tau(i) = dist(rng);
            Vector dtau = ops.d(p - 1) * tau;
            const double dn = star_norm(ops, p, dtau);
            if (dn == 0.0 || hn == 0.0) continue;
            const double ip = h.values.dot(ops.star(p) * dtau);
            worst = std::max(worst, std::abs(ip) / (hn * dn));
        }
        diag.gradient_orthogonality = worst;
    }
    return diag;
}

bool all_integer(const Vector& v) {
    for (int i = 0; i < v.size(); ++i)
        if (v(i) != std::round(v(i))) return false;
    return true;
}

// Orientation sign of facet (given by its sorted tuple) inside top simplex t:
// (-1)^k for the omitted position k.
int incidence_sign(const VertexTuple& t, const VertexTuple& face) {
    for (size_t k = 0; k < t.size(); ++k) {
        bool omitted = std::find(face.begin(), face.end(), t[k]) == face.end();
        if (omitted) return (k % 2 == 0) ? 1 : -1;
    }
    throw InvalidInputError("facet not contained in simplex");
}

VertexTuple shared_facet(const VertexTuple& a, const VertexTuple& b) {
    VertexTuple out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    if (out.size() != a.size() - 1) return {};
    return out;
}

// Star-orthonormalize the columns of M (assumed independent).
Matrix star_orthonormalize(Ops& ops, int p, const Matrix& M) {
    if (M.cols() == 0) return M;
    Matrix G = M.transpose() * (ops.star(p) * M);
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success)
        throw SolverError("degenerate basis in star-orthonormalization");
    // M L^{-T} has star-Gram identity.
    return llt.matrixL().solve(M.transpose()).transpose();
}

void betti_cross_check(const SimplicialComplex& c, int p, int found,
                       const SolverOptions& opts) {
    if (!opts.check_betti) return;
    ComplexSummary s = summary(c);
    if (!s.betti) return;  // too large for the dense rank path; skip
    if ((*s.betti)[p] != found)
        throw ConsistencyError("harmonic basis dimension " + std::to_string(found) +
                               " does not match Betti number " +
                               std::to_string((*s.betti)[p]) + " at dimension " +
                               std::to_string(p));
}

std::vector<double> basis_residuals(const SimplicialComplex& c, StarKindSpec star, int p,
                                    const Matrix& H) {
    std::vector<double> out;
    for (int j = 0; j < H.cols(); ++j)
        out.push_back(harmonic_residual(c, star, Cochain(p, H.col(j))));
    return out;
}

long long dense_nnz(const Matrix& A) {
    long long n = 0;
    for (int j = 0; j < A.cols(); ++j)
        for (int i = 0; i < A.rows(); ++i)
            if (A(i, j) != 0.0) ++n;
    return n;
}

}  // namespace

double harmonic_residual(const SimplicialComplex& c, StarKindSpec star, const Cochain& h) {
    LaplacianApply L(c, h.p, star);
    Vector Lh = L(h.values);
    SparseMatrix S = hodge_star(c, h.p, star);
    const double hn = std::sqrt(std::max(0.0, h.values.dot(S * h.values)));
    const double rn = std::sqrt(std::max(0.0, Lh.dot(S * Lh)));
    return hn == 0.0 ? rn : rn / hn;
}

CocycleCheck is_cocycle(const SimplicialComplex& c, const Cochain& omega, double tol) {
    CocycleCheck res;
    if (omega.values.size() != c.count(omega.p))
        throw InvalidInputError("cochain length mismatch");
    if (omega.p >= c.top_dim()) {  // top cochains are closed vacuously
        res.closed = true;
        return res;
    }
    if (tol < 0.0) tol = all_integer(omega.values) ? 0.0 : 1e-12;
    Vector d_omega = coboundary(c, omega.p) * omega.values;
    res.d_norm = d_omega.size() == 0 ? 0.0 : d_omega.lpNorm<Eigen::Infinity>();
    res.closed = res.d_norm <= tol;
    return res;
}

Cochain cocycle_from_dual_chain(const SimplicialComplex& c,
                                const std::vector<int>& dual_path, bool closed) {
    const int n = c.top_dim();
    Cochain omega = Cochain::zero(c, n - 1);
    if (dual_path.empty()) throw InvalidInputError("dual path is empty");
    const int m = static_cast<int>(dual_path.size());

    // Ordered crossed facets: face[i] is crossed entering dual_path[i]; the
    // exit facet of step i is face[i+1] (wrapping when closed). Open paths
    // enter and leave through boundary facets.
    std::vector<int> face(m + (closed ? 0 : 1), -1);
    auto shared_index = [&](int a, int b) {
        VertexTuple f = shared_facet(c.simplex(n, dual_path[a]), c.simplex(n, dual_path[b]));
        if (f.empty())
            throw InvalidInputError("dual path entries " + std::to_string(a) + " and " +
                                    std::to_string(b) + " are not adjacent");
        return c.index_of(n - 1, f);
    };
    for (int i = 0; i + 1 < m; ++i) face[i + 1] = shared_index(i, i + 1);
    if (closed) {
        face[0] = shared_index(m - 1, 0);
    } else {
        auto boundary_face_of = [&](int path_pos, int avoid) {
            const auto& t = c.simplex(n, dual_path[path_pos]);
            VertexTuple f(t.size() - 1);
            for (size_t k = 0; k < t.size(); ++k) {
                int w = 0;
                for (size_t mm = 0; mm < t.size(); ++mm)
                    if (mm != k) f[w++] = t[mm];
                const int idx = c.index_of(n - 1, f);
                if (idx != avoid && c.facet_on_boundary(idx)) return idx;
            }
            throw InvalidInputError("open dual path endpoint has no boundary facet");
        };
        face[0] = boundary_face_of(0, m > 1 ? face[1] : -1);
        face[m] = boundary_face_of(m - 1, face[m - 1]);
        if (m == 1 && face[m] == face[0]) face[m] = boundary_face_of(0, face[0]);
    }

    // Initial crossing sign: +1 on the left of the directed path for planar
    // surface complexes, +1 otherwise.
    double first = 1.0;
    if (n == 2 && c.embedding_dim() == 2) {
        const Point to = c.barycenter(n, dual_path[0]);
        const Point from = c.barycenter(n - 1, face[0]);
        const Point travel = to - from;
        const auto& e = c.simplex(n - 1, face[0]);
        const Point ev = c.vertex(e[1]) - c.vertex(e[0]);
        const double cross = travel(0) * ev(1) - travel(1) * ev(0);
        first = (cross >= 0.0) ? 1.0 : -1.0;
    }

    // Propagate values so the coboundary cancels within every path simplex.
    std::vector<bool> set(c.count(n - 1), false);
    auto assign = [&](int f, double v) {
        if (set[f]) {
            if (omega.values(f) != v)
                throw InvalidInputError("dual path crosses a facet twice inconsistently");
            return;
        }
        omega.values(f) = v;
        set[f] = true;
    };
    assign(face[0], first);
    double val = first;
    for (int i = 0; i < m; ++i) {
        const int out_pos = (i + 1 < static_cast<int>(face.size())) ? i + 1 : 0;
        const auto& t = c.simplex(n, dual_path[i]);
        const int s_in = incidence_sign(t, c.simplex(n - 1, face[i]));
        const int s_out = incidence_sign(t, c.simplex(n - 1, face[out_pos]));
        const double next = -static_cast<double>(s_in * s_out) * val;
        assign(face[out_pos], next);
        val = next;
    }

    CocycleCheck check = is_cocycle(c, omega, 0.0);
    if (!check.closed)
        throw InvalidInputError("dual path does not produce a cocycle (non-simple path?)");
    return omega;
}

HarmonicResult harmonic_ls(const SimplicialComplex& c, const Cochain& omega,
                           StarKindSpec star, const SolverOptions& opts) {
    const int p = omega.p;
    if (p < 1) throw InvalidInputError("harmonic_ls requires p >= 1");
    CocycleCheck check = is_cocycle(c, omega);
    if (!check.closed)
        throw InvalidInputError("input is not a cocycle: |d omega|_inf = " +
                                std::to_string(check.d_norm));
    Ops ops{c, star};
    const SparseMatrix& d = ops.d(p - 1);
    SparseMatrix system = SparseMatrix(d.transpose() * ops.star(p) * d);
    Vector rhs = -(d.transpose() * (ops.star(p) * omega.values));

    if (opts.pin_vertex >= 0) {
        if (p != 1) throw InvalidInputError("pin_vertex applies to p = 1 only");
        if (opts.pin_vertex >= c.count(0)) throw InvalidInputError("pin_vertex out of range");
        // Fix alpha at one vertex: clear its row and column, unit diagonal.
        const int v = opts.pin_vertex;
        system.prune([v](int i, int j, double) { return i != v && j != v; });
        system.coeffRef(v, v) = 1.0;
        rhs(v) = 0.0;
    }

    auto [alpha, report] = cg_semidefinite(system, rhs, opts.tol, opts.max_iter);

    HarmonicResult res;
    res.method = "ls";
    res.omega = omega;
    res.star = star;
    res.alpha = Cochain(p - 1, alpha);
    res.h = Cochain(p, omega.values + d * alpha);
    res.report = report;
    res.system_nnz = system.nonZeros();
    res.diagnostics = compute_diagnostics(ops, res.h);
    return res;
}

HarmonicBasis harmonic_basis_direct(const SimplicialComplex& c, int p, StarKindSpec star,
                                    const SolverOptions& opts) {
    SparseMatrix L = laplacian(c, p, star);
    SparseMatrix S = hodge_star(c, p, star);
    NullSpaceResult ns = null_space_generalized(L, std::optional<SparseMatrix>(S),
                                                opts.zero_tol_rel, opts.dense_limit);
    betti_cross_check(c, p, static_cast<int>(ns.basis.cols()), opts);
    HarmonicBasis basis;
    basis.p = p;
    basis.star = star;
    basis.H = ns.basis;
    basis.residual_norms = basis_residuals(c, star, p, basis.H);
    return basis;
}

HarmonicBasis harmonic_basis_mixed(const SimplicialComplex& c, int p, StarKindSpec star,
                                   const SolverOptions& opts) {
    if (p < 1) throw InvalidInputError("mixed method requires p >= 1");
    Ops ops{c, star};
    const int n_down = c.count(p - 1);
    const int n_p = c.count(p);
    const int total = n_down + n_p;
    if (total > opts.dense_limit)
        throw SolverError("mixed system size " + std::to_string(total) +
                          " exceeds dense limit (the mixed method is dense-only)");

    Matrix K = Matrix::Zero(total, total);
    Matrix star_down = Matrix(ops.star(p - 1));
    Matrix coupling = Matrix(ops.d(p - 1).transpose() * ops.star(p));
    K.topLeftCorner(n_down, n_down) = -star_down;
    K.topRightCorner(n_down, n_p) = coupling;
    K.bottomLeftCorner(n_p, n_down) = coupling.transpose();
    if (p < c.top_dim()) {
        const SparseMatrix& dp = ops.d(p);
        K.bottomRightCorner(n_p, n_p) = Matrix(dp.transpose() * ops.star(p + 1) * dp);
    }

    NullSpaceResult ns =
        null_space_generalized(K, std::optional<Matrix>(), opts.zero_tol_rel, opts.dense_limit);
    Matrix U(n_p, ns.basis.cols());
    for (int j = 0; j < ns.basis.cols(); ++j) {
        Vector sigma = ns.basis.col(j).head(n_down);
        Vector u = ns.basis.col(j).tail(n_p);
        if (sigma.norm() > 1e-10 * u.norm())
            throw ConsistencyError("mixed-system null vector has non-negligible sigma "
                                   "component (norm ratio " +
                                   std::to_string(sigma.norm() / u.norm()) + ")");
        U.col(j) = u;
    }
    betti_cross_check(c, p, static_cast<int>(U.cols()), opts);
    HarmonicBasis basis;
    basis.p = p;
    basis.star = star;
    basis.H = star_orthonormalize(ops, p, U);
    basis.residual_norms = basis_residuals(c, star, p, basis.H);
    return basis;
}

HarmonicResult project_to_harmonics(const SimplicialComplex& c, const HarmonicBasis& H,
                                    const Cochain& omega) {
    if (H.H.cols() == 0) throw InvalidInputError("empty harmonic basis");
    if (omega.p != H.p) throw InvalidInputError("cochain dimension does not match basis");
    CocycleCheck check = is_cocycle(c, omega);
    if (!check.closed)
        throw InvalidInputError("input is not a cocycle: |d omega|_inf = " +
                                std::to_string(check.d_norm));
    Ops ops{c, H.star};
    Matrix G = H.H.transpose() * (ops.star(H.p) * H.H);
    Vector rhs = H.H.transpose() * (ops.star(H.p) * omega.values);
    Vector a;
    if ((G - Matrix::Identity(G.rows(), G.cols())).lpNorm<Eigen::Infinity>() <= 1e-12)
        a = rhs;  // star-orthonormal basis: no solve needed
    else
        a = dense_solve(G, rhs);

    HarmonicResult res;
    res.method = "projection";
    res.omega = omega;
    res.star = H.star;
    res.h = Cochain(H.p, H.H * a);
    res.report.converged = true;
    res.diagnostics = compute_diagnostics(ops, res.h);
    return res;
}

Matrix pair_homology(const SimplicialComplex& c, const HarmonicBasis& H,
                     const HomologyBasis& B) {
    if (H.H.cols() != B.B.cols())
        throw InvalidInputError("harmonic basis and homology basis column counts differ");
    if (H.p != B.p) throw InvalidInputError("dimension mismatch between bases");
    // Cycles must be genuine: boundary of each column vanishes.
    if (B.p >= 1) {
        Matrix bnd = Matrix(coboundary(c, B.p - 1)).transpose() * B.B;
        if (bnd.lpNorm<Eigen::Infinity>() != 0.0)
            throw InvalidInputError("homology basis columns are not cycles");
    }
    Matrix pairing = B.B.transpose() * H.H;
    Matrix inv;
    try {
        inv = dense_solve(pairing, Matrix::Identity(pairing.rows(), pairing.cols()));
    } catch (const SolverError&) {
        throw SolverError("cycle/harmonic pairing matrix is singular (dependent cycles?)");
    }
    return H.H * inv;
}

HarmonicResult gu_yau(const SimplicialComplex& c, const Cochain& omega, StarKindSpec star,
                      const SolverOptions& opts) {
    const int p = omega.p;
    if (p < 1) throw InvalidInputError("gu_yau requires p >= 1");
    CocycleCheck check = is_cocycle(c, omega);
    if (!check.closed)
        throw InvalidInputError("input is not a cocycle: |d omega|_inf = " +
                                std::to_string(check.d_norm));
    Ops ops{c, star};
    const SparseMatrix& d = ops.d(p - 1);
    SparseMatrix dT_star = SparseMatrix(d.transpose() * ops.star(p));

    HarmonicResult res;
    res.method = "gu-yau";
    res.omega = omega;
    res.star = star;
    const auto t0 = std::chrono::steady_clock::now();
    Vector alpha;
    if (star.kind == StarKindSpec::dec) {
        // Diagonal star inverts sparsely; the system stays rectangular and is
        // solved in the least-squares sense.
        SparseMatrix star_down_inv = ops.star(p - 1);
        for (int k = 0; k < star_down_inv.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(star_down_inv, k); it; ++it)
                it.valueRef() = 1.0 / it.value();
        SparseMatrix front = SparseMatrix(d * star_down_inv * dT_star);
        SparseMatrix K = SparseMatrix(front * d);
        Vector rhs = -(front * omega.values);
        Eigen::LeastSquaresConjugateGradient<SparseMatrix> lscg(K);
        lscg.setTolerance(opts.tol);
        if (opts.max_iter > 0) lscg.setMaxIterations(opts.max_iter);
        alpha = lscg.solve(rhs);
        res.system_nnz = K.nonZeros();
        res.report.iterations = static_cast<int>(lscg.iterations());
        const double rn = (K * alpha - rhs).norm();
        res.report.relative_residual = rhs.norm() == 0.0 ? rn : rn / rhs.norm();
        res.report.converged = res.report.relative_residual <= std::max(opts.tol, 1e-10);
    } else {
        if (c.count(p - 1) > opts.dense_limit || c.count(p) > opts.dense_limit)
            throw SolverError("Whitney Gu-Yau system needs a dense star inverse and "
                              "exceeds the dense limit");
        Matrix star_down = Matrix(ops.star(p - 1));
        Matrix front = Matrix(d) * star_down.llt().solve(Matrix(dT_star));
        Matrix K = front * Matrix(d);
        Vector rhs = -(front * omega.values);
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
        alpha = cod.solve(rhs);
        res.system_nnz = dense_nnz(K);
        const double rn = (K * alpha - rhs).norm();
        res.report.relative_residual = rhs.norm() == 0.0 ? rn : rn / rhs.norm();
        res.report.converged = res.report.relative_residual <= 1e-8;
    }
    res.report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.alpha = Cochain(p - 1, alpha);
    res.h = Cochain(p, omega.values + d * alpha);
    res.diagnostics = compute_diagnostics(ops, res.h);
    return res;
}

HarmonicResult desbrun(const SimplicialComplex& c, const Cochain& omega, StarKindSpec star,
                       const SolverOptions& opts) {
    const int p = omega.p;
    if (p < 1) throw InvalidInputError("desbrun requires p >= 1");
    CocycleCheck check = is_cocycle(c, omega);
    if (!check.closed)
        throw InvalidInputError("input is not a cocycle: |d omega|_inf = " +
                                std::to_string(check.d_norm));
    Ops ops{c, star};
    const SparseMatrix& d = ops.d(p - 1);

    HarmonicResult res;
    res.method = "desbrun";
    res.omega = omega;
    res.star = star;
    const auto t0 = std::chrono::steady_clock::now();

    SparseMatrix up = SparseMatrix(d.transpose() * ops.star(p) * d);
    Vector rhs = -(d.transpose() * (ops.star(p) * omega.values));
    Vector alpha;
    SolveReport report;

    if (p >= 2) {
        // Extra d-delta term acting at dimension p-1; it vanishes on the
        // solution but fills the system matrix.
        const SparseMatrix& d_low = ops.d(p - 2);
        SparseMatrix A_low = SparseMatrix(d_low.transpose() * ops.star(p - 1));
        if (star.kind == StarKindSpec::dec) {
            SparseMatrix star_inv = ops.star(p - 2);
            for (int k = 0; k < star_inv.outerSize(); ++k)
                for (SparseMatrix::InnerIterator it(star_inv, k); it; ++it)
                    it.valueRef() = 1.0 / it.value();
            SparseMatrix extra = SparseMatrix(A_low.transpose() * star_inv * A_low);
            SparseMatrix system = up + extra;
            res.system_nnz = system.nonZeros();
            std::tie(alpha, report) = cg_semidefinite(system, rhs, opts.tol, opts.max_iter);
        } else {
            if (c.count(p - 1) > opts.dense_limit || c.count(p - 2) > opts.dense_limit)
                throw SolverError("Whitney Desbrun system needs a dense star inverse and "
                                  "exceeds the dense limit");
            Matrix star_low = Matrix(ops.star(p - 2));
            Matrix X = star_low.llt().solve(Matrix(A_low));
            Matrix system = Matrix(up) + Matrix(A_low).transpose() * X;
            res.system_nnz = dense_nnz(system);
            std::tie(alpha, report) = cg_semidefinite(
                [&system](const Vector& v) { return Vector(system * v); }, rhs, opts.tol,
                opts.max_iter);
        }
    } else {
        // p = 1: the d-delta term is absent and the system coincides with the
        // least-squares one.
        res.system_nnz = up.nonZeros();
        std::tie(alpha, report) = cg_semidefinite(up, rhs, opts.tol, opts.max_iter);
    }
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.report = report;
    res.alpha = Cochain(p - 1, alpha);
    res.h = Cochain(p, omega.values + d * alpha);
    res.diagnostics = compute_diagnostics(ops, res.h);
    return res;
}

ComparisonReport compare_methods(const SimplicialComplex& c, const Cochain& omega, int p,
                                 const std::vector<std::string>& methods,
                                 const std::vector<StarKindSpec>& stars,
                                 const SolverOptions& opts) {
    if (methods.empty()) throw InvalidInputError("no methods requested");
    ComparisonReport rep;
    rep.p = p;
    struct Run {
        std::string key;
        StarKindSpec star;
        Cochain h;
    };
    std::vector<Run> runs;
    for (const auto& star : stars) {
        for (const auto& method : methods) {
            ComparisonRow row;
            row.method = method;
            row.star = star_name(star);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                HarmonicResult r;
                if (method == "ls")
                    r = harmonic_ls(c, omega, star, opts);
                else if (method == "gu-yau")
                    r = gu_yau(c, omega, star, opts);
                else if (method == "desbrun")
                    r = desbrun(c, omega, star, opts);
                else
                    throw InvalidInputError("unknown method '" + method + "'");
                row.ok = r.report.converged;
                if (!row.ok) row.error = "solver did not converge";
                row.nnz = r.system_nnz;
                row.laplacian_residual = r.diagnostics.laplacian_residual;
                runs.push_back({method + "+" + row.star, star, r.h});
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
            row.wall_time =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rep.rows.push_back(row);
        }
    }
    for (size_t i = 0; i < runs.size(); ++i) {
        for (size_t j = i + 1; j < runs.size(); ++j) {
            Cochain diff(p, runs[i].h.values - runs[j].h.values);
            rep.pairwise_differences[runs[i].key + "|" + runs[j].key] =
                cochain_norm(c, runs[i].star, diff);
        }
    }
    return rep;
}

}  // namespace hodgekit
