// hodgekit: harmonic cochains on simplicial complexes.
//
// Exit codes: 0 success, 2 parse/usage error, 3 invalid input cochain or
// complex, 4 solver failure, 5 internal consistency failure.

#include <Eigen/Core>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hodgekit/io.hpp"

using namespace hodgekit;

namespace {

MeshFormat parse_format(const std::string& format, const std::string& mesh_path) {
    if (format == "off") return MeshFormat::off;
    if (format == "triangle") return MeshFormat::triangle_nodes_ele;
    if (format == "tetgen") return MeshFormat::tetgen_nodes_ele;
    if (format == "json") return MeshFormat::native_json;
    if (!format.empty()) throw ParseError("unknown mesh format: " + format);
    // infer from the extension
    auto ends_with = [&](const std::string& suffix) {
        return mesh_path.size() >= suffix.size() &&
               mesh_path.compare(mesh_path.size() - suffix.size(), suffix.size(),
                                 suffix) == 0;
    };
    if (ends_with(".off")) return MeshFormat::off;
    if (ends_with(".json")) return MeshFormat::native_json;
    if (ends_with(".ele") || ends_with(".node")) {
        // sniff vertices-per-element from the .ele header
        std::string base = mesh_path.substr(0, mesh_path.rfind('.'));
        std::ifstream f(base + ".ele");
        long count = 0;
        int per_ele = 0;
        if (f >> count >> per_ele && per_ele == 4) return MeshFormat::tetgen_nodes_ele;
        return MeshFormat::triangle_nodes_ele;
    }
    throw ParseError("cannot infer mesh format from: " + mesh_path +
                     " (use --format)");
}

StarKindSpec parse_star(const std::string& star, bool allow_indefinite) {
    if (star == "whitney") return whitney_star();
    if (star == "dec") return dec_star(allow_indefinite);
    throw ParseError("unknown star kind: " + star);
}

void write_json(const Json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open output file: " + path);
    f << j.dump(2) << "\n";
}

Cochain read_checked_cocycle(const SimplicialComplex& c, const std::string& path,
                             int expect_p) {
    Cochain om = read_cochain(path);
    if (expect_p >= 0 && om.p != expect_p)
        throw InvalidInputError("cochain degree " + std::to_string(om.p) +
                                " does not match --p " + std::to_string(expect_p));
    if (om.p < 0 || om.p > c.top_dim() || om.values.size() != c.count(om.p))
        throw InvalidInputError("cochain size does not match the complex");
    return om;
}

struct CommonArgs {
    std::string mesh, format, star = "whitney";
    bool allow_indefinite = false;
    bool require_manifold = false;
};

void add_mesh_options(CLI::App* cmd, CommonArgs& args, bool with_star = true) {
    cmd->add_option("--mesh", args.mesh, "mesh file")->required();
    cmd->add_option("--format", args.format,
                    "mesh format: off | triangle | tetgen | json (default: inferred)");
    cmd->add_flag("--require-manifold", args.require_manifold,
                  "reject non-manifold facet incidences at load time");
    if (with_star) {
        cmd->add_option("--star", args.star, "inner product: whitney | dec")
            ->check(CLI::IsMember({"whitney", "dec"}));
        cmd->add_flag("--allow-indefinite-star", args.allow_indefinite,
                      "tolerate nonpositive circumcentric dual volumes (dec only)");
    }
}

void write_result(const HarmonicResult& r, const SimplicialComplex& c,
                  const std::string& out_prefix, const std::string& vtk_path) {
    if (!out_prefix.empty()) {
        write_cochain(r.h, out_prefix + ".h.cochain");
        if (r.alpha) write_cochain(*r.alpha, out_prefix + ".alpha.cochain");
        write_json(to_json(r), out_prefix + ".report.json");
    } else {
        write_json(to_json(r), "");
    }
    if (!vtk_path.empty()) {
        if (r.h.p != 1)
            throw InvalidInputError("--vtk requires a 1-cochain result");
        write_vtk(c, r.h, vtk_path);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"harmonic cochains on simplicial manifold complexes"};
    app.require_subcommand(1);

    // threading cap for assembly/backend parallelism
    if (const char* threads = std::getenv("HODGEKIT_THREADS"))
        Eigen::setNbThreads(std::max(1, std::atoi(threads)));

    SolverOptions opts;

    // --- info ---
    CommonArgs info_args;
    std::string info_out;
    auto* info = app.add_subcommand("info", "topology summary of a mesh");
    add_mesh_options(info, info_args, false);
    info->add_option("--out", info_out, "output JSON path (default stdout)");
    int info_dense_limit = 5000;
    info->add_option("--dense-limit", info_dense_limit,
                     "skip Betti numbers above this many simplices");

    // --- harmonic ---
    CommonArgs h_args;
    std::string h_cocycle, h_method = "ls", h_prefix, h_vtk;
    auto* harmonic = app.add_subcommand(
        "harmonic", "harmonic representative of a cocycle's cohomology class");
    add_mesh_options(harmonic, h_args);
    harmonic->add_option("--cocycle", h_cocycle, "input cocycle file")->required();
    harmonic->add_option("--method", h_method, "ls | gu-yau | desbrun")
        ->check(CLI::IsMember({"ls", "gu-yau", "desbrun"}));
    harmonic->add_option("--tol", opts.tol, "iterative solver tolerance");
    harmonic->add_option("--max-iter", opts.max_iter, "iteration cap (-1: automatic)");
    harmonic->add_option("--pin-vertex", opts.pin_vertex,
                         "gauge-fix the potential at this vertex (p = 1)");
    harmonic->add_option("--dense-limit", opts.dense_limit,
                         "refuse dense fallbacks above this size");
    harmonic->add_option("--out-prefix", h_prefix, "write <prefix>.h.cochain etc.");
    harmonic->add_option("--vtk", h_vtk, "also write a VTK proxy field (p = 1)");

    // --- basis ---
    CommonArgs b_args;
    int b_p = 1;
    std::string b_method = "direct", b_prefix;
    auto* basis = app.add_subcommand("basis", "harmonic basis via an eigenvector method");
    add_mesh_options(basis, b_args);
    basis->add_option("--p", b_p, "cochain degree");
    basis->add_option("--method", b_method, "direct | mixed")
        ->check(CLI::IsMember({"direct", "mixed"}));
    basis->add_option("--zero-tol", opts.zero_tol_rel, "relative eigenvalue threshold");
    basis->add_option("--dense-limit", opts.dense_limit, "dense eigensolver size cap");
    basis->add_option("--out-prefix", b_prefix, "write <prefix>.h<k>.cochain + report");

    // --- project ---
    CommonArgs p_args;
    std::string p_cocycle, p_prefix, p_vtk;
    auto* project = app.add_subcommand(
        "project", "project a cocycle onto the harmonic subspace");
    add_mesh_options(project, p_args);
    project->add_option("--cocycle", p_cocycle, "input cocycle file")->required();
    project->add_option("--dense-limit", opts.dense_limit, "dense eigensolver size cap");
    project->add_option("--out-prefix", p_prefix, "write <prefix>.h.cochain + report");
    project->add_option("--vtk", p_vtk, "also write a VTK proxy field (p = 1)");

    // --- pair ---
    CommonArgs pr_args;
    std::vector<std::string> pr_cycles;
    std::string pr_prefix;
    auto* pair = app.add_subcommand(
        "pair", "normalize a harmonic basis against homology cycles");
    add_mesh_options(pair, pr_args);
    pair->add_option("--cycles", pr_cycles, "chain files, one per independent cycle")
        ->required();
    pair->add_option("--dense-limit", opts.dense_limit, "dense eigensolver size cap");
    pair->add_option("--out-prefix", pr_prefix, "write <prefix>.h<k>.cochain + report");

    // --- compare ---
    CommonArgs cmp_args;
    std::string cmp_cocycle, cmp_out;
    std::vector<std::string> cmp_methods{"ls", "gu-yau", "desbrun"};
    std::vector<std::string> cmp_stars{"whitney", "dec"};
    auto* compare = app.add_subcommand("compare", "run and compare solution methods");
    add_mesh_options(compare, cmp_args, false);
    compare->add_option("--cocycle", cmp_cocycle, "input cocycle file")->required();
    compare->add_option("--methods", cmp_methods, "subset of: ls gu-yau desbrun");
    compare->add_option("--stars", cmp_stars, "subset of: whitney dec");
    bool cmp_allow_indefinite = false;
    compare->add_flag("--allow-indefinite-star", cmp_allow_indefinite,
                      "tolerate nonpositive circumcentric dual volumes (dec only)");
    compare->add_option("--dense-limit", opts.dense_limit, "dense fallback size cap");
    compare->add_option("--out", cmp_out, "output JSON path (default stdout)");

    // --- cocycle-from-dual-path ---
    CommonArgs cd_args;
    std::string cd_path_file, cd_out;
    bool cd_closed = false;
    auto* cocycle = app.add_subcommand(
        "cocycle-from-dual-path",
        "picket-fence cocycle dual to a path of top simplices");
    add_mesh_options(cocycle, cd_args, false);
    cocycle->add_option("--dual-path", cd_path_file,
                        "file of whitespace-separated top-simplex indices")
        ->required();
    cocycle->add_flag("--closed", cd_closed, "treat the path as a closed dual cycle");
    cocycle->add_option("--out", cd_out, "output cochain file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // normalize all usage errors to exit 2
    }

    if (*info) {
        SimplicialComplex c = load_complex(info_args.mesh,
                                           parse_format(info_args.format, info_args.mesh),
                                           info_args.require_manifold);
        write_json(to_json(summary(c, 1e-10, info_dense_limit)), info_out);
    } else if (*harmonic) {
        SimplicialComplex c = load_complex(h_args.mesh,
                                           parse_format(h_args.format, h_args.mesh),
                                           h_args.require_manifold);
        Cochain om = read_checked_cocycle(c, h_cocycle, -1);
        StarKindSpec star = parse_star(h_args.star, h_args.allow_indefinite);
        HarmonicResult r = h_method == "ls"      ? harmonic_ls(c, om, star, opts)
                           : h_method == "gu-yau" ? gu_yau(c, om, star, opts)
                                                  : desbrun(c, om, star, opts);
        write_result(r, c, h_prefix, h_vtk);
    } else if (*basis) {
        SimplicialComplex c = load_complex(b_args.mesh,
                                           parse_format(b_args.format, b_args.mesh),
                                           b_args.require_manifold);
        StarKindSpec star = parse_star(b_args.star, b_args.allow_indefinite);
        HarmonicBasis hb = b_method == "direct"
                               ? harmonic_basis_direct(c, b_p, star, opts)
                               : harmonic_basis_mixed(c, b_p, star, opts);
        Json report{{"p", hb.p},
                    {"star", star_name(hb.star)},
                    {"method", b_method},
                    {"dimension", int(hb.H.cols())},
                    {"residual_norms", hb.residual_norms}};
        if (b_prefix.empty()) {
            write_json(report, "");
        } else {
            for (int k = 0; k < hb.H.cols(); ++k)
                write_cochain(Cochain(hb.p, hb.H.col(k)),
                              b_prefix + ".h" + std::to_string(k) + ".cochain");
            write_json(report, b_prefix + ".basis.json");
        }
    } else if (*project) {
        SimplicialComplex c = load_complex(p_args.mesh,
                                           parse_format(p_args.format, p_args.mesh),
                                           p_args.require_manifold);
        Cochain om = read_checked_cocycle(c, p_cocycle, -1);
        StarKindSpec star = parse_star(p_args.star, p_args.allow_indefinite);
        HarmonicBasis hb = harmonic_basis_direct(c, om.p, star, opts);
        write_result(project_to_harmonics(c, hb, om), c, p_prefix, p_vtk);
    } else if (*pair) {
        SimplicialComplex c = load_complex(pr_args.mesh,
                                           parse_format(pr_args.format, pr_args.mesh),
                                           pr_args.require_manifold);
        StarKindSpec star = parse_star(pr_args.star, pr_args.allow_indefinite);
        HomologyBasis B;
        B.p = -1;
        for (const auto& f : pr_cycles) {
            Cochain z = read_cochain(f);
            if (B.p < 0) {
                B.p = z.p;
                B.B = Matrix::Zero(c.count(z.p), 0);
            }
            if (z.p != B.p || z.values.size() != c.count(B.p))
                throw InvalidInputError("cycle file " + f + " does not match");
            B.B.conservativeResize(Eigen::NoChange, B.B.cols() + 1);
            B.B.col(B.B.cols() - 1) = z.values;
        }
        HarmonicBasis hb = harmonic_basis_direct(c, B.p, star, opts);
        Matrix normalized = pair_homology(c, hb, B);
        Matrix check = B.B.transpose() * normalized;
        Json report{{"p", B.p},
                    {"star", star_name(star)},
                    {"pairing_deviation",
                     (check - Matrix::Identity(check.rows(), check.cols()))
                         .cwiseAbs()
                         .maxCoeff()}};
        if (pr_prefix.empty()) {
            write_json(report, "");
        } else {
            for (int k = 0; k < normalized.cols(); ++k)
                write_cochain(Cochain(B.p, normalized.col(k)),
                              pr_prefix + ".h" + std::to_string(k) + ".cochain");
            write_json(report, pr_prefix + ".pair.json");
        }
    } else if (*compare) {
        SimplicialComplex c = load_complex(cmp_args.mesh,
                                           parse_format(cmp_args.format, cmp_args.mesh),
                                           cmp_args.require_manifold);
        Cochain om = read_checked_cocycle(c, cmp_cocycle, -1);
        std::vector<StarKindSpec> stars;
        for (const auto& s : cmp_stars) stars.push_back(parse_star(s, cmp_allow_indefinite));
        auto report = compare_methods(c, om, om.p, cmp_methods, stars, opts);
        write_json(to_json(report), cmp_out);
    } else if (*cocycle) {
        SimplicialComplex c = load_complex(cd_args.mesh,
                                           parse_format(cd_args.format, cd_args.mesh),
                                           cd_args.require_manifold);
        std::ifstream f(cd_path_file);
        if (!f) throw ParseError("cannot open dual path file: " + cd_path_file);
        std::vector<int> path;
        int idx;
        while (f >> idx) path.push_back(idx);
        Cochain om = cocycle_from_dual_chain(c, path, cd_closed);
        write_cochain(om, cd_out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidInputError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 4;
    } catch (const ConsistencyError& e) {
        std::cerr << "consistency failure: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
}
