#include "hodgekit/complex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hodgekit/operators.hpp"
#include "hodgekit/solvers.hpp"

namespace hodgekit {

namespace {

void subsets_of_size(const VertexTuple& tuple, int k, std::set<VertexTuple>& out) {
    const int m = static_cast<int>(tuple.size());
    std::vector<int> pick(k);
    // iterative combination enumeration
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        for (int i = 0; i < k; ++i) pick[i] = tuple[idx[i]];
        out.insert(pick);
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

SimplicialComplex::SimplicialComplex(int embedding_dim, std::vector<Point> vertices,
                                     std::vector<VertexTuple> top_simplices,
                                     bool require_manifold)
    : embedding_dim_(embedding_dim), vertices_(std::move(vertices)) {
    if (top_simplices.empty()) throw InvalidInputError("complex has no top simplices");
    n_ = static_cast<int>(top_simplices.front().size()) - 1;
    const int nv = static_cast<int>(vertices_.size());
    for (auto& t : top_simplices) {
        if (static_cast<int>(t.size()) != n_ + 1)
            throw InvalidInputError("mixed top-simplex dimensions");
        std::sort(t.begin(), t.end());
        if (std::adjacent_find(t.begin(), t.end()) != t.end())
            throw InvalidInputError("top simplex repeats a vertex");
        for (int v : t)
            if (v < 0 || v >= nv)
                throw InvalidInputError("dangling vertex index " + std::to_string(v));
    }
    for (const auto& v : vertices_)
        if (v.size() != embedding_dim_)
            throw InvalidInputError("vertex coordinate length != embedding_dim");

    // Generate all skeleta, canonical lexicographic order per dimension.
    simplices_.resize(n_ + 1);
    index_.resize(n_ + 1);
    for (int p = 0; p <= n_; ++p) {
        std::set<VertexTuple> tuples;
        for (const auto& t : top_simplices) subsets_of_size(t, p + 1, tuples);
        simplices_[p].assign(tuples.begin(), tuples.end());
        int i = 0;
        for (const auto& t : simplices_[p]) index_[p][t] = i++;
    }

    // Facet cofaces and boundary detection.
    if (n_ >= 1) {
        facet_cofaces_.resize(count(n_ - 1));
        for (int j = 0; j < count(n_); ++j) {
            const auto& t = simplices_[n_][j];
            VertexTuple face(t.size() - 1);
            for (size_t k = 0; k < t.size(); ++k) {
                int w = 0;
                for (size_t m = 0; m < t.size(); ++m)
                    if (m != k) face[w++] = t[m];
                facet_cofaces_[index_[n_ - 1].at(face)].push_back(j);
            }
        }
        for (int i = 0; i < count(n_ - 1); ++i) {
            const size_t deg = facet_cofaces_[i].size();
            if (deg == 1) boundary_facets_.push_back(i);
            if (require_manifold && deg > 2)
                throw InvalidInputError("non-manifold: facet " + std::to_string(i) +
                                        " has " + std::to_string(deg) + " cofaces");
        }
    }
}

int SimplicialComplex::index_of(int p, const VertexTuple& sorted_tuple) const {
    auto it = index_.at(p).find(sorted_tuple);
    return it == index_.at(p).end() ? -1 : it->second;
}

bool SimplicialComplex::facet_on_boundary(int facet_index) const {
    return facet_cofaces_.at(facet_index).size() == 1;
}

double SimplicialComplex::simplex_volume(int p, int i) const {
    if (p == 0) return 1.0;
    const auto& t = simplices_.at(p).at(i);
    Eigen::MatrixXd D(embedding_dim_, p);
    for (int k = 1; k <= p; ++k) D.col(k - 1) = vertices_[t[k]] - vertices_[t[0]];
    const double g = (D.transpose() * D).determinant();
    if (g <= 0.0) return 0.0;
    double fact = 1.0;
    for (int k = 2; k <= p; ++k) fact *= k;
    return std::sqrt(g) / fact;
}

bool SimplicialComplex::simplex_degenerate(int p, int i, double rel_tol) const {
    if (p == 0) return false;
    const auto& t = simplices_.at(p).at(i);
    double scale = 0.0;
    for (int a = 0; a <= p; ++a)
        for (int b = a + 1; b <= p; ++b)
            scale = std::max(scale, (vertices_[t[a]] - vertices_[t[b]]).norm());
    const double vol = simplex_volume(p, i);
    double fact = 1.0;
    for (int k = 2; k <= p; ++k) fact *= k;
    return vol <= rel_tol * std::pow(scale, p) / fact;
}

Point SimplicialComplex::circumcenter(int p, int i) const {
    const auto& t = simplices_.at(p).at(i);
    if (p == 0) return vertices_[t[0]];
    if (simplex_degenerate(p, i))
        throw InvalidInputError("degenerate simplex has no circumcenter");
    Eigen::MatrixXd D(embedding_dim_, p);
    Eigen::VectorXd rhs(p);
    for (int k = 1; k <= p; ++k) {
        D.col(k - 1) = vertices_[t[k]] - vertices_[t[0]];
        rhs(k - 1) = 0.5 * D.col(k - 1).squaredNorm();
    }
    // Equidistance within the affine hull: 2 D^T D u = |v_k - v_0|^2.
    Eigen::VectorXd u = (D.transpose() * D).ldlt().solve(rhs);
    return vertices_[t[0]] + D * u;
}

Point SimplicialComplex::barycenter(int p, int i) const {
    const auto& t = simplices_.at(p).at(i);
    Point b = Point::Zero(embedding_dim_);
    for (int v : t) b += vertices_[v];
    return b / static_cast<double>(t.size());
}

int SimplicialComplex::euler_characteristic() const {
    int chi = 0;
    for (int p = 0; p <= n_; ++p) chi += (p % 2 == 0 ? 1 : -1) * count(p);
    return chi;
}

// --- loaders ---------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

std::string next_content_line(std::istream& in, int& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto pos = line.find_first_not_of(" \t\r\n");
        if (pos == std::string::npos) continue;
        if (line[pos] == '#') continue;
        return line;
    }
    return {};
}

SimplicialComplex load_off(const std::string& path, bool require_manifold) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    int line_no = 0;
    std::string line = next_content_line(in, line_no);
    if (line.substr(0, 3) != "OFF") parse_fail(path, line_no, "missing OFF header");
    int nv = 0, nf = 0, ne = 0;
    {
        std::istringstream ss(next_content_line(in, line_no));
        if (!(ss >> nv >> nf >> ne)) parse_fail(path, line_no, "bad counts line");
    }
    std::vector<Point> verts(nv);
    for (int i = 0; i < nv; ++i) {
        std::istringstream ss(next_content_line(in, line_no));
        Point v(3);
        if (!(ss >> v(0) >> v(1) >> v(2))) parse_fail(path, line_no, "bad vertex line");
        verts[i] = v;
    }
    std::vector<VertexTuple> faces(nf);
    for (int i = 0; i < nf; ++i) {
        std::istringstream ss(next_content_line(in, line_no));
        int k = 0;
        if (!(ss >> k) || k != 3) parse_fail(path, line_no, "expected triangle face");
        VertexTuple f(3);
        if (!(ss >> f[0] >> f[1] >> f[2])) parse_fail(path, line_no, "bad face line");
        faces[i] = f;
    }
    return SimplicialComplex(3, std::move(verts), std::move(faces), require_manifold);
}

std::string strip_known_ext(const std::string& path) {
    for (const char* ext : {".node", ".ele"}) {
        const std::string e = ext;
        if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0)
            return path.substr(0, path.size() - e.size());
    }
    return path;
}

SimplicialComplex load_nodes_ele(const std::string& path, int verts_per_ele,
                                 bool require_manifold) {
    const std::string base = strip_known_ext(path);
    const std::string node_path = base + ".node";
    const std::string ele_path = base + ".ele";

    std::ifstream nin(node_path);
    if (!nin) throw ParseError(node_path + ": cannot open");
    int line_no = 0;
    int nv = 0, dim = 0, nattr = 0, nmark = 0;
    {
        std::istringstream ss(next_content_line(nin, line_no));
        if (!(ss >> nv >> dim)) parse_fail(node_path, line_no, "bad node header");
        ss >> nattr >> nmark;
    }
    std::vector<Point> verts(nv);
    std::vector<long> node_ids(nv);
    for (int i = 0; i < nv; ++i) {
        std::istringstream ss(next_content_line(nin, line_no));
        if (!(ss >> node_ids[i])) parse_fail(node_path, line_no, "bad node line");
        Point v(dim);
        for (int d = 0; d < dim; ++d)
            if (!(ss >> v(d))) parse_fail(node_path, line_no, "bad node coordinates");
        verts[i] = v;  // attributes and markers ignored
    }
    const long base_id = *std::min_element(node_ids.begin(), node_ids.end());

    std::ifstream ein(ele_path);
    if (!ein) throw ParseError(ele_path + ": cannot open");
    line_no = 0;
    int ne = 0, npe = 0;
    {
        std::istringstream ss(next_content_line(ein, line_no));
        if (!(ss >> ne >> npe)) parse_fail(ele_path, line_no, "bad ele header");
        if (npe != verts_per_ele)
            parse_fail(ele_path, line_no,
                       "expected " + std::to_string(verts_per_ele) + " vertices per element");
    }
    std::vector<VertexTuple> eles(ne);
    for (int i = 0; i < ne; ++i) {
        std::istringstream ss(next_content_line(ein, line_no));
        long id;
        if (!(ss >> id)) parse_fail(ele_path, line_no, "bad element line");
        VertexTuple t(npe);
        for (int k = 0; k < npe; ++k) {
            long v;
            if (!(ss >> v)) parse_fail(ele_path, line_no, "bad element vertex");
            t[k] = static_cast<int>(v - base_id);
        }
        eles[i] = t;
    }
    return SimplicialComplex(dim, std::move(verts), std::move(eles), require_manifold);
}

SimplicialComplex load_json(const std::string& path, bool require_manifold) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!j.contains("embedding_dim") || !j.contains("vertices") || !j.contains("top_simplices"))
        throw ParseError(path + ": missing embedding_dim/vertices/top_simplices");
    const int dim = j["embedding_dim"].get<int>();
    std::vector<Point> verts;
    for (const auto& row : j["vertices"]) {
        Point v(dim);
        if (static_cast<int>(row.size()) != dim)
            throw ParseError(path + ": vertex coordinate length mismatch");
        for (int d = 0; d < dim; ++d) v(d) = row[d].get<double>();
        verts.push_back(v);
    }
    std::vector<VertexTuple> tops;
    for (const auto& row : j["top_simplices"]) tops.push_back(row.get<VertexTuple>());
    return SimplicialComplex(dim, std::move(verts), std::move(tops), require_manifold);
}

}  // namespace

SimplicialComplex load_complex(const std::string& path, MeshFormat format,
                               bool require_manifold) {
    switch (format) {
        case MeshFormat::off: return load_off(path, require_manifold);
        case MeshFormat::triangle_nodes_ele: return load_nodes_ele(path, 3, require_manifold);
        case MeshFormat::tetgen_nodes_ele: return load_nodes_ele(path, 4, require_manifold);
        case MeshFormat::native_json: return load_json(path, require_manifold);
    }
    throw InvalidInputError("unknown mesh format");
}

void save_complex_json(const SimplicialComplex& c, const std::string& path) {
    nlohmann::json j;
    j["embedding_dim"] = c.embedding_dim();
    auto verts = nlohmann::json::array();
    for (const auto& v : c.vertices()) {
        auto row = nlohmann::json::array();
        for (int d = 0; d < v.size(); ++d) row.push_back(v(d));
        verts.push_back(row);
    }
    j["vertices"] = verts;
    j["top_simplices"] = c.simplices(c.top_dim());
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << j.dump(1) << "\n";
}

ComplexSummary summary(const SimplicialComplex& c, double rank_tol, int dense_limit) {
    ComplexSummary s;
    const int n = c.top_dim();
    for (int p = 0; p <= n; ++p) s.counts.push_back(c.count(p));
    s.euler_characteristic = c.euler_characteristic();

    // Boundary simplex counts: boundary facets plus all of their faces.
    if (n >= 1) {
        std::vector<std::set<VertexTuple>> bnd(n);
        for (int f : c.boundary_facets()) {
            const auto& t = c.simplex(n - 1, f);
            for (int p = 0; p < n; ++p) subsets_of_size(t, p + 1, bnd[p]);
        }
        for (int p = 0; p < n; ++p)
            s.boundary_simplex_counts.push_back(static_cast<int>(bnd[p].size()));
    }

    bool too_large = false;
    for (int p = 0; p <= n; ++p)
        if (c.count(p) > dense_limit) too_large = true;
    if (too_large) {
        s.notice = "complex too large for dense Betti computation; Betti omitted";
        return s;
    }

    // betti[p] = dim ker d_p - rank d_{p-1}, ranks by SVD thresholding.
    std::vector<int> rank(n + 1, 0);  // rank[p] = rank of d_p, rank[n] = 0
    for (int p = 0; p < n; ++p) {
        Eigen::MatrixXd d = Eigen::MatrixXd(coboundary(c, p));
        rank[p] = svd_rank(d, rank_tol);
    }
    std::vector<int> betti(n + 1, 0);
    for (int p = 0; p <= n; ++p) {
        const int ker = c.count(p) - (p < n ? rank[p] : 0);
        betti[p] = ker - (p > 0 ? rank[p - 1] : 0);
    }
    int chi_betti = 0;
    for (int p = 0; p <= n; ++p) chi_betti += (p % 2 == 0 ? 1 : -1) * betti[p];
    if (chi_betti != s.euler_characteristic)
        throw ConsistencyError("Euler characteristic mismatch: counts give " +
                               std::to_string(s.euler_characteristic) + ", Betti give " +
                               std::to_string(chi_betti));
    s.betti = betti;
    return s;
}

int kernel_dim_bound(const SimplicialComplex& c) {
    if (c.top_dim() != 3)
        throw InvalidInputError("kernel_dim_bound requires a 3-dimensional complex");
    return c.count(0) - c.euler_characteristic();
}

}  // namespace hodgekit
