#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hodgekit {

using Point = Eigen::VectorXd;

// Error taxonomy mirrored by the CLI exit codes.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MeshFormat { off, triangle_nodes_ele, tetgen_nodes_ele, native_json };

using VertexTuple = std::vector<int>;  // strictly ascending vertex indices

/// Closed simplicial complex with all skeleta stored in canonical
/// (lexicographic) order. Immutable after construction.
class SimplicialComplex {
  public:
    // Builds the closed complex from top-dimensional simplices. Vertex tuples
    // need not be sorted; storage is always ascending. Lower skeleta are
    // generated from the top simplices.
    SimplicialComplex(int embedding_dim, std::vector<Point> vertices,
                      std::vector<VertexTuple> top_simplices,
                      bool require_manifold = false);

    int embedding_dim() const { return embedding_dim_; }
    int top_dim() const { return n_; }
    int count(int p) const { return static_cast<int>(simplices_[p].size()); }
    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<VertexTuple>& simplices(int p) const { return simplices_.at(p); }
    const VertexTuple& simplex(int p, int i) const { return simplices_.at(p).at(i); }

    // Canonical index of a simplex given its sorted vertex tuple; -1 if absent.
    int index_of(int p, const VertexTuple& sorted_tuple) const;

    // Indices of the (n-1)-simplices with exactly one top coface.
    const std::vector<int>& boundary_facets() const { return boundary_facets_; }
    bool facet_on_boundary(int facet_index) const;

    // Top-simplex indices incident to a given (n-1)-simplex (1 or 2 entries
    // on a manifold complex).
    const std::vector<int>& facet_cofaces(int facet_index) const {
        return facet_cofaces_.at(facet_index);
    }

    // Unsigned p-volume via the Gram determinant. Degenerate simplices give 0.
    double simplex_volume(int p, int i) const;
    bool simplex_degenerate(int p, int i, double rel_tol = 1e-12) const;

    // Circumcenter within the simplex's affine hull.
    Point circumcenter(int p, int i) const;

    Point vertex(int i) const { return vertices_.at(i); }
    Point barycenter(int p, int i) const;

    int euler_characteristic() const;

  private:
    int embedding_dim_ = 0;
    int n_ = 0;
    std::vector<Point> vertices_;
    std::vector<std::vector<VertexTuple>> simplices_;        // [p] -> tuples, lexicographic
    std::vector<std::map<VertexTuple, int>> index_;          // [p] -> tuple -> index
    std::vector<int> boundary_facets_;
    std::vector<std::vector<int>> facet_cofaces_;            // per (n-1)-simplex
};

struct ComplexSummary {
    std::vector<int> counts;                   // simplex counts per dimension
    int euler_characteristic = 0;
    std::optional<std::vector<int>> betti;     // absent when too large for the dense path
    std::vector<int> boundary_simplex_counts;  // boundary simplices per dimension 0..n-1
    std::string notice;                        // set when Betti was skipped
};

SimplicialComplex load_complex(const std::string& path, MeshFormat format,
                               bool require_manifold = false);

// Serialize to the native JSON mesh format (top simplices only; lower skeleta
// are regenerated on load).
void save_complex_json(const SimplicialComplex& c, const std::string& path);

// Topology summary. Betti numbers come from dense SVD ranks of the coboundary
// matrices with a relative singular-value threshold, gated by a per-dimension
// size limit.
ComplexSummary summary(const SimplicialComplex& c, double rank_tol = 1e-10,
                       int dense_limit = 5000);

// Lower bound on dim ker d_1 for a 3-complex: N_0 - chi.
int kernel_dim_bound(const SimplicialComplex& c);

}  // namespace hodgekit
