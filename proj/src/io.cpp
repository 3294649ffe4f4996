#include "hodgekit/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hodgekit {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_cochain(const Cochain& a, const std::string& path,
                   const std::string& header_word) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << header_word << " " << a.p << " " << a.values.size() << "\n";
    for (int i = 0; i < a.values.size(); ++i) out << fmt17(a.values(i)) << "\n";
}

Cochain read_cochain(const std::string& path, std::string* header_word) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::string word;
    if (!(in >> word)) throw ParseError(path + ": empty file");
    if (header_word) *header_word = word;
    Cochain a;
    if (word == "cochain" || word == "chain") {
        long n = 0;
        if (!(in >> a.p >> n)) throw ParseError(path + ":1: bad header");
        a.values.resize(n);
        for (long i = 0; i < n; ++i)
            if (!(in >> a.values(i)))
                throw ParseError(path + ":" + std::to_string(i + 2) + ": bad value");
    } else if (word == "sparse-cochain" || word == "sparse-chain") {
        long n = 0, k = 0;
        if (!(in >> a.p >> n >> k)) throw ParseError(path + ":1: bad header");
        a.values = Vector::Zero(n);
        for (long i = 0; i < k; ++i) {
            long idx;
            double v;
            if (!(in >> idx >> v))
                throw ParseError(path + ":" + std::to_string(i + 2) + ": bad entry");
            if (idx < 0 || idx >= n)
                throw ParseError(path + ":" + std::to_string(i + 2) + ": index out of range");
            a.values(idx) = v;
        }
    } else {
        throw ParseError(path + ":1: unknown header '" + word + "'");
    }
    return a;
}

Vector whitney_vector_at_barycenter(const SimplicialComplex& c, const Cochain& h, int i) {
    if (h.p != 1) throw InvalidInputError("proxy vectors are defined for 1-cochains");
    const int n = c.top_dim();
    const int m = c.embedding_dim();
    const auto& t = c.simplex(n, i);
    Eigen::MatrixXd D(m, n);
    for (int k = 1; k <= n; ++k) D.col(k - 1) = c.vertex(t[k]) - c.vertex(t[0]);
    Eigen::MatrixXd grads(m, n + 1);
    grads.rightCols(n) = D * (D.transpose() * D).inverse();
    grads.col(0) = -grads.rightCols(n).rowwise().sum();
    // At the barycenter every lambda equals 1/(n+1), so the edge form
    // lam_a grad lam_b - lam_b grad lam_a reduces to (grad_b - grad_a)/(n+1).
    Vector v = Vector::Zero(m);
    for (int a = 0; a <= n; ++a) {
        for (int b = a + 1; b <= n; ++b) {
            const int e = c.index_of(1, {t[a], t[b]});
            v += h.values(e) * (grads.col(b) - grads.col(a)) / (n + 1.0);
        }
    }
    return v;
}

void write_vtk(const SimplicialComplex& c, const Cochain& h, const std::string& path) {
    const int n = c.top_dim();
    if (h.p != 1 || (n != 2 && n != 3))
        throw InvalidInputError("VTK output supports 1-cochains on 2- or 3-complexes");
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write");

    const int n_top = c.count(n);
    const int n_edge = c.count(1);
    out << "# vtk DataFile Version 3.0\n";
    out << "harmonic cochain proxy field\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << c.count(0) << " double\n";
    for (const auto& v : c.vertices()) {
        for (int d = 0; d < 3; ++d) out << (d < v.size() ? fmt17(v(d)) : "0") << (d < 2 ? " " : "\n");
    }
    const int ncells = n_top + n_edge;
    int list_len = n_top * (n + 2) + n_edge * 3;
    out << "CELLS " << ncells << " " << list_len << "\n";
    for (int i = 0; i < n_top; ++i) {
        const auto& t = c.simplex(n, i);
        out << t.size();
        for (int v : t) out << " " << v;
        out << "\n";
    }
    for (int i = 0; i < n_edge; ++i) {
        const auto& t = c.simplex(1, i);
        out << "2 " << t[0] << " " << t[1] << "\n";
    }
    out << "CELL_TYPES " << ncells << "\n";
    const int top_type = (n == 2) ? 5 : 10;  // triangle / tetra
    for (int i = 0; i < n_top; ++i) out << top_type << "\n";
    for (int i = 0; i < n_edge; ++i) out << 3 << "\n";  // line

    out << "CELL_DATA " << ncells << "\n";
    out << "VECTORS proxy_field double\n";
    for (int i = 0; i < n_top; ++i) {
        Vector v = whitney_vector_at_barycenter(c, h, i);
        for (int d = 0; d < 3; ++d)
            out << (d < v.size() ? fmt17(v(d)) : "0") << (d < 2 ? " " : "\n");
    }
    for (int i = 0; i < n_edge; ++i) out << "0 0 0\n";
    out << "SCALARS cochain_value double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int i = 0; i < n_top; ++i) out << "0\n";
    for (int i = 0; i < n_edge; ++i) out << fmt17(h.values(i)) << "\n";
}

Json to_json(const SolveReport& r) {
    return Json{{"iterations", r.iterations},
                {"relative_residual", r.relative_residual},
                {"converged", r.converged},
                {"wall_time", r.wall_time}};
}

Json to_json(const Diagnostics& d) {
    return Json{{"d_norm", d.d_norm},
                {"delta_norm", d.delta_norm},
                {"laplacian_residual", d.laplacian_residual},
                {"gradient_orthogonality", d.gradient_orthogonality}};
}

Json to_json(const HarmonicResult& r) {
    return Json{{"method", r.method},
                {"star", star_name(r.star)},
                {"p", r.h.p},
                {"system_nnz", r.system_nnz},
                {"report", to_json(r.report)},
                {"diagnostics", to_json(r.diagnostics)}};
}

Json to_json(const ComparisonReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        rows.push_back(Json{{"method", row.method},
                            {"star", row.star},
                            {"ok", row.ok},
                            {"error", row.error},
                            {"nnz", row.nnz},
                            {"wall_time", row.wall_time},
                            {"laplacian_residual", row.laplacian_residual}});
    }
    Json diffs = Json::object();
    for (const auto& [k, v] : r.pairwise_differences) diffs[k] = v;
    return Json{{"p", r.p}, {"rows", rows}, {"pairwise_differences", diffs}};
}

Json to_json(const ComplexSummary& s) {
    Json j{{"counts", s.counts},
           {"chi", s.euler_characteristic},
           {"boundary_simplex_counts", s.boundary_simplex_counts}};
    if (s.betti) j["betti"] = *s.betti;
    if (!s.notice.empty()) j["notice"] = s.notice;
    return j;
}

namespace {

bool type_matches(const Json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "number") return v.is_number();
    if (type == "integer") return v.is_number_integer();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    return false;
}

bool validate_at(const Json& v, const Json& schema, const std::string& where,
                 std::string* error) {
    auto fail = [&](const std::string& msg) {
        if (error) *error = where + ": " + msg;
        return false;
    };
    if (schema.contains("type") && !type_matches(v, schema["type"].get<std::string>()))
        return fail("expected type " + schema["type"].get<std::string>());
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& e : schema["enum"])
            if (e == v) found = true;
        if (!found) return fail("value not in enum");
    }
    if (schema.contains("required")) {
        for (const auto& key : schema["required"])
            if (!v.contains(key.get<std::string>()))
                return fail("missing required key '" + key.get<std::string>() + "'");
    }
    if (schema.contains("properties") && v.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items())
            if (v.contains(key) && !validate_at(v[key], sub, where + "/" + key, error))
                return false;
    }
    if (schema.contains("items") && v.is_array()) {
        int i = 0;
        for (const auto& item : v) {
            if (!validate_at(item, schema["items"], where + "/" + std::to_string(i), error))
                return false;
            ++i;
        }
    }
    return true;
}

}  // namespace

bool validate_schema(const Json& value, const Json& schema, std::string* error) {
    return validate_at(value, schema, "$", error);
}

}  // namespace hodgekit
