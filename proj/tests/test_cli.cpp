#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hodgekit/io.hpp"
#include "meshgen.hpp"

using namespace hodgekit;
using namespace hodgekit::testmesh;

namespace {

std::string bin() {
    const char* b = std::getenv("HODGEKIT_BIN");
    REQUIRE(b != nullptr);
    return b;
}

int run(const std::string& args, std::string* output = nullptr) {
    std::string cmd = bin() + " " + args + " 2>/dev/null";
    if (output) {
        FILE* pipe = popen(cmd.c_str(), "r");
        REQUIRE(pipe != nullptr);
        char buf[4096];
        std::string out;
        size_t got;
        while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
        int status = pclose(pipe);
        *output = out;
        return WEXITSTATUS(status);
    }
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

struct Workspace {
    std::string dir;
    Workspace() {
        char tmpl[] = "/tmp/hodgekit_cli_XXXXXX";
        REQUIRE(mkdtemp(tmpl) != nullptr);
        dir = tmpl;
    }
    ~Workspace() { std::system(("rm -rf " + dir).c_str()); }
    std::string path(const std::string& name) const { return dir + "/" + name; }
};

Json slurp_json(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    Json j;
    f >> j;
    return j;
}

// annulus mesh + a hole-to-rim cocycle, saved to files
struct AnnulusFixture {
    Workspace ws;
    std::string mesh, cocycle;
    SimplicialComplex c;
    AnnulusFixture() : c(coarse_annulus().c) {
        auto ann = coarse_annulus();
        mesh = ws.path("annulus.json");
        save_complex_json(ann.c, mesh);
        int start = boundary_top_near(ann.c, ann.hole_centers.front());
        auto path = find_dual_path(ann.c, start, [&](int t) {
            return has_far_boundary_facet(ann.c, t, ann.hole_centers.front(), 4.0);
        });
        Cochain om = cocycle_from_dual_chain(ann.c, path, false);
        cocycle = ws.path("omega.cochain");
        write_cochain(om, cocycle);
    }
};

}  // namespace

TEST_CASE("info reports counts, chi and Betti numbers") {
    Workspace ws;
    std::string mesh = ws.path("oct.json");
    save_complex_json(octahedron_surface(), mesh);
    std::string out;
    int code = run("info --mesh " + mesh, &out);
    CHECK(code == 0);
    Json j = Json::parse(out);
    CHECK(j["counts"] == Json::array({6, 12, 8}));
    CHECK(j["chi"] == 2);
    CHECK(j["betti"] == Json::array({1, 0, 1}));
}

TEST_CASE("harmonic writes cochain, potential, report and VTK output") {
    AnnulusFixture fx;
    std::string prefix = fx.ws.path("result");
    std::string vtk = fx.ws.path("field.vtk");
    int code = run("harmonic --mesh " + fx.mesh + " --cocycle " + fx.cocycle +
                   " --star whitney --out-prefix " + prefix + " --vtk " + vtk);
    CHECK(code == 0);
    Cochain h = read_cochain(prefix + ".h.cochain");
    CHECK(h.p == 1);
    CHECK(h.values.size() == fx.c.count(1));
    CHECK(is_cocycle(fx.c, h).closed);
    Cochain alpha = read_cochain(prefix + ".alpha.cochain");
    CHECK(alpha.p == 0);
    Json report = slurp_json(prefix + ".report.json");
    CHECK(report["method"] == "ls");
    CHECK(report["report"]["converged"] == true);
    CHECK(report["diagnostics"]["laplacian_residual"].get<double>() <= 1e-8);
    std::ifstream f(vtk);
    CHECK(f.good());
}

TEST_CASE("harmonic method and star selection") {
    AnnulusFixture fx;
    for (std::string method : {"gu-yau", "desbrun"})
        for (std::string star : {"whitney", "dec"}) {
            std::string prefix = fx.ws.path(method + "_" + star);
            int code = run("harmonic --mesh " + fx.mesh + " --cocycle " + fx.cocycle +
                           " --method " + method + " --star " + star +
                           " --out-prefix " + prefix);
            CHECK(code == 0);
            Json report = slurp_json(prefix + ".report.json");
            CHECK(report["method"] == method);
            CHECK(report["star"] == star);
        }
}

TEST_CASE("basis and project subcommands") {
    AnnulusFixture fx;
    std::string prefix = fx.ws.path("basis");
    int code = run("basis --mesh " + fx.mesh + " --p 1 --method mixed --out-prefix " +
                   prefix);
    CHECK(code == 0);
    Json report = slurp_json(prefix + ".basis.json");
    CHECK(report["dimension"] == 1);
    Cochain h0 = read_cochain(prefix + ".h0.cochain");
    CHECK(h0.values.size() == fx.c.count(1));

    std::string pprefix = fx.ws.path("proj");
    code = run("project --mesh " + fx.mesh + " --cocycle " + fx.cocycle +
               " --out-prefix " + pprefix);
    CHECK(code == 0);
    Cochain hp = read_cochain(pprefix + ".h.cochain");
    // projection and least squares agree up to solver tolerance
    std::string lprefix = fx.ws.path("ls");
    run("harmonic --mesh " + fx.mesh + " --cocycle " + fx.cocycle + " --out-prefix " +
        lprefix);
    Cochain hl = read_cochain(lprefix + ".h.cochain");
    CHECK((hp.values - hl.values).norm() <= 1e-8 * hl.values.norm());
}

TEST_CASE("pair subcommand normalizes against a cycle") {
    AnnulusFixture fx;
    // boundary cycle of the hole: shortest nontrivial cycle around it; use the
    // harmonic evaluation instead: any 1-cycle with nonzero pairing works, and
    // the hole rim is one. Build it from boundary edges near the hole center.
    auto ann = coarse_annulus();
    Point hole = ann.hole_centers.front();
    // collect boundary edges within the hole's radius neighborhood
    Cochain z = Cochain::zero(ann.c, 1);
    std::map<int, std::vector<std::pair<int, int>>> incident;  // vertex -> (edge, mate)
    for (int f : ann.c.boundary_facets())
        if ((ann.c.barycenter(1, f) - hole).norm() < 2.5) {
            const auto& e = ann.c.simplex(1, f);
            incident[e[0]].push_back({f, e[1]});
            incident[e[1]].push_back({f, e[0]});
        }
    // walk the rim loop
    int start = incident.begin()->first, prev_edge = -1, at = start;
    do {
        REQUIRE(incident[at].size() == 2);
        auto [edge, next] =
            incident[at][incident[at][0].first == prev_edge ? 1 : 0];
        const auto& tup = ann.c.simplex(1, edge);
        z.values(edge) += (at == tup[0]) ? 1.0 : -1.0;
        prev_edge = edge;
        at = next;
    } while (at != start);
    std::string cyc = fx.ws.path("rim.chain");
    write_cochain(z, cyc, "chain");

    std::string prefix = fx.ws.path("paired");
    std::string out;
    int code = run("pair --mesh " + fx.mesh + " --cycles " + cyc + " --out-prefix " +
                       prefix,
                   &out);
    CHECK(code == 0);
    Json report = slurp_json(prefix + ".pair.json");
    CHECK(report["pairing_deviation"].get<double>() <= 1e-12);
    Cochain h0 = read_cochain(prefix + ".h0.cochain");
    CHECK(std::abs(h0.values.dot(z.values) - 1.0) <= 1e-12);
}

TEST_CASE("compare emits a full report") {
    AnnulusFixture fx;
    std::string out;
    int code = run("compare --mesh " + fx.mesh + " --cocycle " + fx.cocycle +
                       " --methods ls desbrun --stars whitney",
                   &out);
    CHECK(code == 0);
    Json j = Json::parse(out);
    CHECK(j["rows"].size() == 2);
    for (const auto& row : j["rows"]) CHECK(row["ok"] == true);
}

TEST_CASE("cocycle-from-dual-path subcommand") {
    AnnulusFixture fx;
    auto ann = coarse_annulus();
    int start = boundary_top_near(ann.c, ann.hole_centers.front());
    auto path = find_dual_path(ann.c, start, [&](int t) {
        return has_far_boundary_facet(ann.c, t, ann.hole_centers.front(), 4.0);
    });
    std::string path_file = fx.ws.path("path.txt");
    {
        std::ofstream f(path_file);
        for (int t : path) f << t << "\n";
    }
    std::string out_file = fx.ws.path("out.cochain");
    int code = run("cocycle-from-dual-path --mesh " + fx.mesh + " --dual-path " +
                   path_file + " --out " + out_file);
    CHECK(code == 0);
    Cochain om = read_cochain(out_file);
    CHECK(is_cocycle(ann.c, om).d_norm == 0.0);
    // matches the in-process construction
    Cochain ref = cocycle_from_dual_chain(ann.c, path, false);
    CHECK((om.values - ref.values).norm() == 0.0);
}

TEST_CASE("exit code 2 on unparseable input") {
    Workspace ws;
    CHECK(run("info --mesh /nonexistent.off") == 2);
    CHECK(run("bogus-subcommand") == 2);
    CHECK(run("info") == 2);  // missing required --mesh
    std::string bad = ws.path("bad.off");
    {
        std::ofstream f(bad);
        f << "not an off file\n";
    }
    CHECK(run("info --mesh " + bad) == 2);
}

TEST_CASE("exit code 3 on an invalid input cochain") {
    AnnulusFixture fx;
    // non-closed cochain: a single edge indicator
    Cochain junk = Cochain::zero(fx.c, 1);
    junk.values(0) = 1.0;
    std::string path = fx.ws.path("junk.cochain");
    write_cochain(junk, path);
    CHECK(run("harmonic --mesh " + fx.mesh + " --cocycle " + path) == 3);
    // size mismatch
    Cochain wrong(1, Vector::Zero(3));
    std::string path2 = fx.ws.path("wrong.cochain");
    write_cochain(wrong, path2);
    CHECK(run("harmonic --mesh " + fx.mesh + " --cocycle " + path2) == 3);
}

TEST_CASE("OFF meshes load through the CLI") {
    Workspace ws;
    std::string mesh = ws.path("square.off");
    {
        std::ofstream f(mesh);
        f << "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n";
    }
    std::string out;
    int code = run("info --mesh " + mesh, &out);
    CHECK(code == 0);
    CHECK(Json::parse(out)["counts"] == Json::array({4, 5, 2}));
}
