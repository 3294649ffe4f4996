#include "hodgekit/operators.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <vector>

namespace hodgekit {

namespace {

// All ascending (k+1)-subsets of {0..m-1}.
std::vector<std::vector<int>> local_faces(int m, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(k + 1);
    for (int i = 0; i <= k; ++i) idx[i] = i;
    while (true) {
        out.push_back(idx);
        int i = k;
        while (i >= 0 && idx[i] == m - 1 - (k - i)) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j <= k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

SparseMatrix coboundary(const SimplicialComplex& c, int p) {
    const int n = c.top_dim();
    if (p < 0 || p >= n) throw InvalidInputError("coboundary dimension out of range");
    SparseMatrix d(c.count(p + 1), c.count(p));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(c.count(p + 1)) * (p + 2));
    for (int j = 0; j < c.count(p + 1); ++j) {
        const auto& t = c.simplex(p + 1, j);
        VertexTuple face(t.size() - 1);
        for (int k = 0; k < static_cast<int>(t.size()); ++k) {
            int w = 0;
            for (int m = 0; m < static_cast<int>(t.size()); ++m)
                if (m != k) face[w++] = t[m];
            const int i = c.index_of(p, face);
            trips.emplace_back(j, i, (k % 2 == 0) ? 1.0 : -1.0);
        }
    }
    d.setFromTriplets(trips.begin(), trips.end());
    return d;
}

namespace {

// Whitney p-form mass matrix contribution of one top simplex. Uses the exact
// barycentric integral  int lam_a lam_b = V (1 + delta_ab) / ((n+1)(n+2))
// and the Gram matrix of barycentric gradients.
void whitney_element(const SimplicialComplex& c, int top_index, int p,
                     std::vector<Eigen::Triplet<double>>& trips) {
    const int n = c.top_dim();
    const auto& t = c.simplex(n, top_index);
    const int m = c.embedding_dim();

    Eigen::MatrixXd D(m, n);
    for (int k = 1; k <= n; ++k) D.col(k - 1) = c.vertex(t[k]) - c.vertex(t[0]);
    Eigen::MatrixXd gram_edges = D.transpose() * D;
    Eigen::MatrixXd grads(m, n + 1);  // columns: grad lam_0 .. grad lam_n
    grads.rightCols(n) = D * gram_edges.inverse();
    grads.col(0) = -grads.rightCols(n).rowwise().sum();
    Eigen::MatrixXd G = grads.transpose() * grads;

    const double V = c.simplex_volume(n, top_index);
    const double c_int = V / ((n + 1.0) * (n + 2.0));
    const double scale = factorial(p) * factorial(p);

    const auto faces = local_faces(n + 1, p);
    std::vector<int> gidx(faces.size());
    for (size_t f = 0; f < faces.size(); ++f) {
        VertexTuple tuple(p + 1);
        for (int a = 0; a <= p; ++a) tuple[a] = t[faces[f][a]];
        gidx[f] = c.index_of(p, tuple);
    }

    Eigen::MatrixXd minor(p, p);
    for (size_t fs = 0; fs < faces.size(); ++fs) {
        for (size_t ft = 0; ft < faces.size(); ++ft) {
            const auto& sig = faces[fs];
            const auto& tau = faces[ft];
            double val = 0.0;
            for (int k = 0; k <= p; ++k) {
                for (int l = 0; l <= p; ++l) {
                    double det = 1.0;
                    if (p > 0) {
                        int r = 0;
                        for (int a = 0; a <= p; ++a) {
                            if (a == k) continue;
                            int cc = 0;
                            for (int b = 0; b <= p; ++b) {
                                if (b == l) continue;
                                minor(r, cc) = G(sig[a], tau[b]);
                                ++cc;
                            }
                            ++r;
                        }
                        det = minor.determinant();
                    }
                    const int ik = t[sig[k]], jl = t[tau[l]];
                    const double lam_int = c_int * (ik == jl ? 2.0 : 1.0);
                    const double sign = ((k + l) % 2 == 0) ? 1.0 : -1.0;
                    val += sign * lam_int * det;
                }
            }
            trips.emplace_back(gidx[fs], gidx[ft], scale * val);
        }
    }
}

// Signed circumcentric dual volumes of all faces of one top simplex,
// accumulated into diag (indexed by global simplex index per dimension).
void dec_element(const SimplicialComplex& c, int top_index,
                 std::vector<std::vector<double>>& dual_vol) {
    const int n = c.top_dim();
    const auto& t = c.simplex(n, top_index);
    const int nbits = n + 1;
    const int full = (1 << nbits) - 1;

    // Circumcenter per nonempty subset, computed from vertex positions.
    std::vector<Point> center(1 << nbits);
    for (int mask = 1; mask <= full; ++mask) {
        std::vector<int> vs;
        for (int b = 0; b < nbits; ++b)
            if (mask & (1 << b)) vs.push_back(t[b]);
        const int k = static_cast<int>(vs.size()) - 1;
        if (k == 0) {
            center[mask] = c.vertex(vs[0]);
            continue;
        }
        Eigen::MatrixXd D(c.embedding_dim(), k);
        Eigen::VectorXd rhs(k);
        for (int a = 1; a <= k; ++a) {
            D.col(a - 1) = c.vertex(vs[a]) - c.vertex(vs[0]);
            rhs(a - 1) = 0.5 * D.col(a - 1).squaredNorm();
        }
        Eigen::MatrixXd A = D.transpose() * D;
        if (std::abs(A.determinant()) == 0.0)
            throw InvalidInputError("degenerate simplex in circumcentric dual computation");
        center[mask] = c.vertex(vs[0]) + D * A.ldlt().solve(rhs);
    }

    // dv[mask] = signed (n-k)-volume of the dual cell piece of the face in
    // this top simplex; built top-down as orthogonal cones over circumcenters.
    std::vector<double> dv(1 << nbits, 0.0);
    dv[full] = 1.0;
    for (int k = n - 1; k >= 0; --k) {
        for (int mask = 1; mask <= full; ++mask) {
            if (__builtin_popcount(mask) != k + 1) continue;
            double acc = 0.0;
            for (int b = 0; b < nbits; ++b) {
                if (mask & (1 << b)) continue;
                const int sup = mask | (1 << b);
                const Point diff = center[sup] - center[mask];
                const double dist = diff.norm();
                const double side = diff.dot(c.vertex(t[b]) - center[mask]);
                const double sign = (side >= 0.0) ? 1.0 : -1.0;
                acc += sign * dist * dv[sup] / static_cast<double>(n - k);
            }
            dv[mask] = acc;
        }
    }

    for (int mask = 1; mask <= full; ++mask) {
        const int p = __builtin_popcount(mask) - 1;
        VertexTuple tuple;
        for (int b = 0; b < nbits; ++b)
            if (mask & (1 << b)) tuple.push_back(t[b]);
        dual_vol[p][c.index_of(p, tuple)] += dv[mask];
    }
}

}  // namespace

SparseMatrix hodge_star(const SimplicialComplex& c, int p, StarKindSpec kind) {
    const int n = c.top_dim();
    if (p < 0 || p > n) throw InvalidInputError("hodge_star dimension out of range");
    const int np = c.count(p);
    SparseMatrix star(np, np);

    if (kind.kind == StarKindSpec::whitney) {
        std::vector<Eigen::Triplet<double>> trips;
        for (int j = 0; j < c.count(n); ++j) {
            if (c.simplex_degenerate(n, j))
                throw InvalidInputError("degenerate top simplex " + std::to_string(j));
            whitney_element(c, j, p, trips);
        }
        star.setFromTriplets(trips.begin(), trips.end());
        SparseMatrix starT = SparseMatrix(star.transpose());
        star = 0.5 * (star + starT);  // exact entrywise symmetry
        return star;
    }

    // DEC star: diagonal |dual sigma| / |sigma| with signed circumcentric
    // dual volumes.
    std::vector<std::vector<double>> dual_vol(n + 1);
    for (int q = 0; q <= n; ++q) dual_vol[q].assign(c.count(q), 0.0);
    for (int j = 0; j < c.count(n); ++j) {
        if (c.simplex_degenerate(n, j))
            throw InvalidInputError("degenerate top simplex " + std::to_string(j));
        dec_element(c, j, dual_vol);
    }
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < np; ++i) {
        const double vol = c.simplex_volume(p, i);
        if (vol == 0.0) throw InvalidInputError("degenerate simplex in DEC star");
        const double entry = dual_vol[p][i] / vol;
        if (entry <= 0.0) {
            if (!kind.allow_indefinite)
                throw InvalidInputError("DEC star has nonpositive entry at dimension " +
                                        std::to_string(p) + ", index " + std::to_string(i) +
                                        " (ill-centered mesh)");
            std::cerr << "warning: DEC star entry " << i << " at dimension " << p
                      << " is nonpositive (" << entry << ")\n";
        }
        trips.emplace_back(i, i, entry);
    }
    star.setFromTriplets(trips.begin(), trips.end());
    return star;
}

Cochain codifferential_apply(const SimplicialComplex& c, int p, StarKindSpec kind,
                             const Cochain& b) {
    const int n = c.top_dim();
    if (p < 1 || p > n) throw InvalidInputError("codifferential dimension out of range");
    if (b.values.size() != c.count(p)) throw InvalidInputError("cochain length mismatch");
    SparseMatrix star_p = hodge_star(c, p, kind);
    SparseMatrix star_down = hodge_star(c, p - 1, kind);
    SparseMatrix d = coboundary(c, p - 1);
    Vector y = d.transpose() * (star_p * b.values);
    Eigen::SimplicialLLT<SparseMatrix> llt(star_down);
    if (llt.info() != Eigen::Success)
        throw SolverError("star at dimension " + std::to_string(p - 1) +
                          " is singular or indefinite");
    Vector x = llt.solve(y);
    return Cochain(p - 1, static_cast<double>(codifferential_sign(p)) * x);
}

SparseMatrix laplacian(const SimplicialComplex& c, int p, StarKindSpec kind,
                       int max_unknowns) {
    const int n = c.top_dim();
    if (p < 0 || p > n) throw InvalidInputError("laplacian dimension out of range");
    const int np = c.count(p);
    SparseMatrix L(np, np);
    if (p < n) {
        SparseMatrix d = coboundary(c, p);
        SparseMatrix star_up = hodge_star(c, p + 1, kind);
        L = SparseMatrix(d.transpose() * star_up * d);
    }
    if (p > 0) {
        // Codifferential term star_p d star_down^{-1} d^T star_p. The inverse
        // is dense for the Whitney star, so assembly is size-gated.
        if (kind.kind == StarKindSpec::whitney && np > max_unknowns)
            throw SolverError("Whitney Laplacian assembly exceeds size threshold; "
                              "use LaplacianApply");
        SparseMatrix d = coboundary(c, p - 1);
        SparseMatrix star_p = hodge_star(c, p, kind);
        SparseMatrix star_down = hodge_star(c, p - 1, kind);
        SparseMatrix A = SparseMatrix(d.transpose() * star_p);  // (p-1) x p map
        Eigen::SimplicialLLT<SparseMatrix> llt(star_down);
        if (llt.info() != Eigen::Success)
            throw SolverError("star at dimension " + std::to_string(p - 1) +
                              " is singular or indefinite");
        Matrix X = llt.solve(Matrix(A));
        Matrix down = Matrix(A.transpose()) * X;
        SparseMatrix down_s(np, np);
        std::vector<Eigen::Triplet<double>> trips;
        for (int j = 0; j < np; ++j)
            for (int i = 0; i < np; ++i)
                if (down(i, j) != 0.0) trips.emplace_back(i, j, down(i, j));
        down_s.setFromTriplets(trips.begin(), trips.end());
        L = L + down_s;
    }
    SparseMatrix LT = SparseMatrix(L.transpose());
    return 0.5 * (L + LT);
}

LaplacianApply::LaplacianApply(const SimplicialComplex& c, int p, StarKindSpec kind)
    : p_(p), size_(c.count(p)) {
    const int n = c.top_dim();
    if (p < n) {
        SparseMatrix d = coboundary(c, p);
        up_ = SparseMatrix(d.transpose() * hodge_star(c, p + 1, kind) * d);
    } else {
        up_.resize(size_, size_);
    }
    if (p > 0) {
        star_p_ = hodge_star(c, p, kind);
        d_down_ = coboundary(c, p - 1);
        star_down_ = hodge_star(c, p - 1, kind);
        star_down_llt_.compute(star_down_);
        if (star_down_llt_.info() != Eigen::Success)
            throw SolverError("star below Laplacian dimension is singular or indefinite");
        has_down_ = true;
    }
}

Vector LaplacianApply::operator()(const Vector& x) const {
    Vector y = up_ * x;
    if (has_down_) {
        Vector w = d_down_.transpose() * (star_p_ * x);
        Vector z = star_down_llt_.solve(w);
        y += star_p_ * (d_down_ * z);
    }
    return y;
}

double inner_product(const SimplicialComplex& c, StarKindSpec kind, const Cochain& a,
                     const Cochain& b) {
    if (a.p != b.p || a.values.size() != b.values.size())
        throw InvalidInputError("cochain dimension mismatch in inner product");
    SparseMatrix star = hodge_star(c, a.p, kind);
    return a.values.dot(star * b.values);
}

double cochain_norm(const SimplicialComplex& c, StarKindSpec kind, const Cochain& a) {
    return std::sqrt(std::max(0.0, inner_product(c, kind, a, a)));
}

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    out.precision(17);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace hodgekit
