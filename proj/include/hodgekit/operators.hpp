#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>

#include "hodgekit/complex.hpp"

namespace hodgekit {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Cochain {
    int p = 0;
    Vector values;

    Cochain() = default;
    Cochain(int p_, Vector v) : p(p_), values(std::move(v)) {}
    static Cochain zero(const SimplicialComplex& c, int p) {
        return Cochain(p, Vector::Zero(c.count(p)));
    }
};

struct StarKindSpec {
    enum Kind { whitney, dec } kind = whitney;
    bool allow_indefinite = false;  // dec only

    StarKindSpec() = default;
    StarKindSpec(Kind k, bool allow = false) : kind(k), allow_indefinite(allow) {}
    bool operator==(const StarKindSpec& o) const { return kind == o.kind; }
};
inline StarKindSpec whitney_star() { return {StarKindSpec::whitney}; }
inline StarKindSpec dec_star(bool allow_indefinite = false) {
    return {StarKindSpec::dec, allow_indefinite};
}
inline std::string star_name(StarKindSpec k) {
    return k.kind == StarKindSpec::whitney ? "whitney" : "dec";
}

// Coboundary d_p : C^p -> C^{p+1}. Entries in {-1, 0, +1} under the
// ascending-tuple orientation convention.
SparseMatrix coboundary(const SimplicialComplex& c, int p);

// Hodge star at dimension p. Whitney flavor is the SPD mass matrix of Whitney
// p-forms assembled per top simplex; DEC flavor is the diagonal ratio of
// signed circumcentric dual volume to primal volume.
SparseMatrix hodge_star(const SimplicialComplex& c, int p, StarKindSpec kind);

// Codifferential applied to a p-cochain; sign fixed by the adjointness
// identity <d a, b> = (-1)^{1-p^2} <a, delta b>.
Cochain codifferential_apply(const SimplicialComplex& c, int p, StarKindSpec kind,
                             const Cochain& b);
inline int codifferential_sign(int p) { return (p % 2 == 0) ? 1 : -1; }

// Assembled Laplace-deRham operator at dimension p. The codifferential term
// carries a star inverse, which for the Whitney star makes the result dense;
// assembly is refused above max_unknowns.
SparseMatrix laplacian(const SimplicialComplex& c, int p, StarKindSpec kind,
                       int max_unknowns = 20000);

// Matrix-free application of the Laplacian (inner star solve per call).
// Usable above the dense-assembly threshold.
class LaplacianApply {
  public:
    LaplacianApply(const SimplicialComplex& c, int p, StarKindSpec kind);
    Vector operator()(const Vector& x) const;
    int size() const { return size_; }

  private:
    int p_;
    int size_;
    SparseMatrix up_;                                   // d_p^T star_{p+1} d_p
    SparseMatrix star_p_, d_down_, star_down_;          // for the down term
    Eigen::SimplicialLLT<SparseMatrix> star_down_llt_;
    bool has_down_ = false;
};

double inner_product(const SimplicialComplex& c, StarKindSpec kind, const Cochain& a,
                     const Cochain& b);
double cochain_norm(const SimplicialComplex& c, StarKindSpec kind, const Cochain& a);

void write_matrix_market(const SparseMatrix& m, const std::string& path);

}  // namespace hodgekit
