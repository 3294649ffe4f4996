#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hodgekit/operators.hpp"
#include "hodgekit/solvers.hpp"

namespace hodgekit {

struct HarmonicBasis {
    int p = 0;
    StarKindSpec star;
    Matrix H;                            // columns: star-orthonormal harmonic p-cochains
    std::vector<double> residual_norms;  // per column, |L h|_star / |h|_star
};

struct HomologyBasis {
    int p = 0;
    Matrix B;  // columns: p-cycles in chain coordinates (integer entries)
};

struct Diagnostics {
    double d_norm = 0.0;           // |d h|_inf
    double delta_norm = 0.0;       // |delta h|_star
    double laplacian_residual = 0.0;  // |L h|_star / |h|_star
    double gradient_orthogonality = 0.0;  // max |<h, d tau>| over spot checks, normalized
};

struct HarmonicResult {
    Cochain omega;
    std::optional<Cochain> alpha;  // potential, dim p-1 (absent for projection)
    Cochain h;
    StarKindSpec star;
    SolveReport report;
    Diagnostics diagnostics;
    long long system_nnz = 0;      // nonzeros of the assembled solve matrix
    std::string method;
};

struct CocycleCheck {
    bool closed = false;
    double d_norm = 0.0;  // |d omega|_inf
};

struct SolverOptions {
    double tol = 1e-12;
    int max_iter = -1;
    double zero_tol_rel = 1e-8;
    int dense_limit = 4000;
    double harmonic_tol = 1e-8;
    int pin_vertex = -1;  // >= 0: fix alpha at this vertex (p = 1 only)
    bool check_betti = true;
};

CocycleCheck is_cocycle(const SimplicialComplex& c, const Cochain& omega, double tol = -1.0);

// Picket-fence cocycle dual to an ordered path (or cycle) of top simplices.
// Consecutive entries must share an (n-1)-face; open paths must start and end
// at top simplices with a boundary face. Returns an (n-1)-cochain with values
// +-1 on the crossed faces, exactly closed.
Cochain cocycle_from_dual_chain(const SimplicialComplex& c,
                                const std::vector<int>& dual_path, bool closed);

// Weighted least squares method: solve d^T star d alpha = -d^T star omega by
// CG and return h = omega + d alpha.
HarmonicResult harmonic_ls(const SimplicialComplex& c, const Cochain& omega,
                           StarKindSpec star, const SolverOptions& opts = {});

// Harmonic basis as the near-null eigenvectors of the generalized problem
// L u = lambda star u.
HarmonicBasis harmonic_basis_direct(const SimplicialComplex& c, int p, StarKindSpec star,
                                    const SolverOptions& opts = {});

// Harmonic basis from the symmetric indefinite block system in (sigma, u);
// null vectors must have negligible sigma component.
HarmonicBasis harmonic_basis_mixed(const SimplicialComplex& c, int p, StarKindSpec star,
                                   const SolverOptions& opts = {});

// Orthogonal projection of a cocycle onto the span of a harmonic basis.
HarmonicResult project_to_harmonics(const SimplicialComplex& c, const HarmonicBasis& H,
                                    const Cochain& omega);

// Columns of H (B^T H)^{-1}: harmonic cochains that evaluate to 1 on their own
// cycle and 0 on the others.
Matrix pair_homology(const SimplicialComplex& c, const HarmonicBasis& H,
                     const HomologyBasis& B);

// Comparison systems.
HarmonicResult gu_yau(const SimplicialComplex& c, const Cochain& omega, StarKindSpec star,
                      const SolverOptions& opts = {});
HarmonicResult desbrun(const SimplicialComplex& c, const Cochain& omega, StarKindSpec star,
                       const SolverOptions& opts = {});

struct ComparisonRow {
    std::string method;
    std::string star;
    bool ok = false;
    std::string error;
    long long nnz = 0;
    double wall_time = 0.0;
    double laplacian_residual = 0.0;
};

struct ComparisonReport {
    int p = 0;
    std::vector<ComparisonRow> rows;
    // star-norm of h_i - h_j keyed by "method1+star1|method2+star2", computed
    // per star kind (cross-star differences use the first star's norm).
    std::map<std::string, double> pairwise_differences;
};

ComparisonReport compare_methods(const SimplicialComplex& c, const Cochain& omega, int p,
                                 const std::vector<std::string>& methods,
                                 const std::vector<StarKindSpec>& stars,
                                 const SolverOptions& opts = {});

// Laplacian residual |L h|_star / |h|_star via matrix-free application.
double harmonic_residual(const SimplicialComplex& c, StarKindSpec star, const Cochain& h);

}  // namespace hodgekit
