#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "hodgekit/harmonic.hpp"
#include "meshgen.hpp"
#include "oracles.hpp"

using namespace hodgekit;
using namespace hodgekit::testmesh;

namespace {

Vector random_vector(int n, std::mt19937& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = N(rng);
    return v;
}

// dual path across a planar holed mesh: from the hole boundary to the far
// outer boundary
std::vector<int> hole_to_rim_path(const PlanarMesh& m) {
    const Point& hole = m.hole_centers.front();
    int start = boundary_top_near(m.c, hole);
    auto goal = [&](int t) { return has_far_boundary_facet(m.c, t, hole, 4.0); };
    return find_dual_path(m.c, start, goal);
}

}  // namespace

TEST_CASE("cocycle check distinguishes closed from non-closed") {
    auto torus = make_torus(8, 8);
    Cochain om = cocycle_from_dual_chain(torus.c, torus.dual_cycle_u(2), true);
    auto chk = is_cocycle(torus.c, om);
    CHECK(chk.closed);
    CHECK(chk.d_norm == 0.0);  // integer cochain: exactness required

    Cochain noisy = om;
    noisy.values(0) += 0.5;
    CHECK(!is_cocycle(torus.c, noisy).closed);

    // an exact cochain is a cocycle
    std::mt19937 rng(3);
    Vector f = random_vector(torus.c.count(0), rng);
    Cochain df(1, coboundary(torus.c, 0) * f);
    CHECK(is_cocycle(torus.c, df).closed);

    // top-dimension cochains are vacuously closed
    Cochain top(2, random_vector(torus.c.count(2), rng));
    CHECK(is_cocycle(torus.c, top).closed);
}

TEST_CASE("picket-fence cocycle on the torus") {
    auto torus = make_torus(8, 8);
    auto path = torus.dual_cycle_u(3);
    Cochain om = cocycle_from_dual_chain(torus.c, path, true);
    // one crossed edge per path step, values exactly +-1
    int support = 0;
    for (int i = 0; i < om.values.size(); ++i)
        if (om.values(i) != 0.0) {
            ++support;
            CHECK(std::abs(om.values(i)) == 1.0);
        }
    CHECK(support == int(path.size()));
    CHECK(is_cocycle(torus.c, om).d_norm == 0.0);
    // it is not exact: it evaluates +-1 on the transversal cycle
    CHECK(std::abs(om.values.dot(torus.cycle_v(2).values)) == 1.0);
    CHECK(om.values.dot(torus.cycle_u(6).values) == 0.0);
}

TEST_CASE("picket fence across a holed disc, open path") {
    auto disc = coarse_annulus();
    auto path = hole_to_rim_path(disc);
    Cochain om = cocycle_from_dual_chain(disc.c, path, false);
    CHECK(is_cocycle(disc.c, om).d_norm == 0.0);
    // support: one interior edge per step plus a boundary edge at each end
    CHECK((om.values.array() != 0).count() == long(path.size()) + 1);
}

TEST_CASE("dual path validation") {
    auto torus = make_torus(8, 8);
    auto path = torus.dual_cycle_u(1);
    std::swap(path[1], path[4]);  // break adjacency
    CHECK_THROWS_AS(cocycle_from_dual_chain(torus.c, path, true), InvalidInputError);
    // open path on a closed surface has no boundary faces to end on
    auto open_path = torus.dual_cycle_u(1);
    CHECK_THROWS_AS(cocycle_from_dual_chain(torus.c, open_path, false),
                    InvalidInputError);
    CHECK_THROWS_AS(cocycle_from_dual_chain(torus.c, {}, true), InvalidInputError);
}

TEST_CASE("planar orientation convention on the first crossing") {
    SimplicialComplex c = two_triangles_shared_edge();
    int diag = c.index_of(1, {0, 2});
    // travel from the lower-right triangle to the upper-left one: the diagonal
    // oriented 0->2 points to the right of the travel direction, value -1
    Cochain om = cocycle_from_dual_chain(c, {0, 1}, false);
    CHECK(om.values(diag) == -1.0);
    // reversed travel flips the crossing sign
    Cochain rev = cocycle_from_dual_chain(c, {1, 0}, false);
    CHECK(rev.values(diag) == 1.0);
}

TEST_CASE("least-squares harmonic on the torus satisfies the defining equations") {
    auto torus = make_torus(8, 8);
    Cochain om = cocycle_from_dual_chain(torus.c, torus.dual_cycle_u(3), true);
    for (auto star : {whitney_star(), dec_star()}) {
        auto r = harmonic_ls(torus.c, om, star);
        CHECK(r.report.converged);
        CHECK(r.diagnostics.d_norm <= 1e-12);
        CHECK(r.diagnostics.delta_norm <= 1e-9);
        CHECK(r.diagnostics.laplacian_residual <= 1e-9);
        REQUIRE(r.alpha.has_value());
        // h = omega + d alpha exactly as assembled
        Vector rebuilt = om.values + coboundary(torus.c, 0) * r.alpha->values;
        CHECK((rebuilt - r.h.values).cwiseAbs().maxCoeff() <= 1e-14);
        // cohomologous: same evaluation on cycles
        CHECK(r.h.values.dot(torus.cycle_v(2).values) ==
              doctest::Approx(om.values.dot(torus.cycle_v(2).values)));
    }
}

TEST_CASE("least-squares result matches the dense pseudoinverse oracle") {
    auto ann = coarse_annulus();
    Cochain om = cocycle_from_dual_chain(ann.c, hole_to_rim_path(ann), false);
    for (auto star : {whitney_star(), dec_star()}) {
        auto r = harmonic_ls(ann.c, om, star);
        Cochain ref = oracle::ls_oracle(ann.c, om, star);
        Cochain diff(1, r.h.values - ref.values);
        CHECK(cochain_norm(ann.c, star, diff) <=
              1e-10 * cochain_norm(ann.c, star, ref));
    }
}

TEST_CASE("representative independence of the harmonic part") {
    auto ann = coarse_annulus();
    Cochain om = cocycle_from_dual_chain(ann.c, hole_to_rim_path(ann), false);
    std::mt19937 rng(17);
    for (auto star : {whitney_star(), dec_star()}) {
        auto r0 = harmonic_ls(ann.c, om, star);
        double href = cochain_norm(ann.c, star, r0.h);
        for (int trial = 0; trial < 5; ++trial) {
            Vector beta = random_vector(ann.c.count(0), rng);
            Cochain om2(1, om.values + coboundary(ann.c, 0) * beta);
            auto r2 = harmonic_ls(ann.c, om2, star);
            Cochain diff(1, r2.h.values - r0.h.values);
            CHECK(cochain_norm(ann.c, star, diff) <= 1e-10 * href);
        }
    }
}

TEST_CASE("pinning a vertex yields the same harmonic part") {
    auto ann = coarse_annulus();
    Cochain om = cocycle_from_dual_chain(ann.c, hole_to_rim_path(ann), false);
    SolverOptions opts;
    opts.pin_vertex = 5;
    auto pinned = harmonic_ls(ann.c, om, whitney_star(), opts);
    auto free = harmonic_ls(ann.c, om, whitney_star());
    Cochain diff(1, pinned.h.values - free.h.values);
    CHECK(cochain_norm(ann.c, whitney_star(), diff) <=
          1e-10 * cochain_norm(ann.c, whitney_star(), free.h));
    CHECK(std::abs(pinned.alpha->values(5)) <= 1e-14);
}

TEST_CASE("harmonic minimizes the norm within its cohomology class") {
    auto ann = coarse_annulus();
    Cochain om = cocycle_from_dual_chain(ann.c, hole_to_rim_path(ann), false);
    std::mt19937 rng(19);
    for (auto star : {whitney_star(), dec_star()}) {
        auto r = harmonic_ls(ann.c, om, star);
        double hn = cochain_norm(ann.c, star, r.h);
        SparseMatrix d0 = coboundary(ann.c, 0);
        for (int trial = 0; trial < 10; ++trial) {
            Vector beta = random_vector(ann.c.count(0), rng);
            Cochain other(1, r.h.values + d0 * beta);
            CHECK(cochain_norm(ann.c, star, other) >= hn * (1.0 - 1e-12));
        }
        // star-orthogonal to the image of d
        for (int trial = 0; trial < 10; ++trial) {
            Vector beta = random_vector(ann.c.count(0), rng);
            Cochain db(1, d0 * beta);
            double ip = inner_product(ann.c, star, r.h, db);
            CHECK(std::abs(ip) <= 1e-10 * hn * cochain_norm(ann.c, star, db));
        }
    }
}

TEST_CASE("eigen bases match each other and the dense SVD oracle") {
    auto complexes = std::vector<SimplicialComplex>{coarse_annulus().c,
                                                    equilateral_triangle_boundary(),
                                                    make_torus(6, 6).c};
    std::vector<int> expected_dim{1, 1, 2};
    for (size_t ci = 0; ci < complexes.size(); ++ci) {
        const auto& c = complexes[ci];
        int p = 1;
        for (auto star : {whitney_star(), dec_star()}) {
            auto direct = harmonic_basis_direct(c, p, star);
            auto mixed = harmonic_basis_mixed(c, p, star);
            REQUIRE(direct.H.cols() == expected_dim[ci]);
            REQUIRE(mixed.H.cols() == expected_dim[ci]);
            Matrix oracle_basis = oracle::dense_harmonic_basis(c, p, star);
            REQUIRE(oracle_basis.cols() == expected_dim[ci]);
            Matrix M = Matrix(hodge_star(c, p, star));
            auto s1 = oracle::principal_angle_sines(direct.H, mixed.H, M);
            auto s2 = oracle::principal_angle_sines(direct.H, oracle_basis, M);
            auto s3 = oracle::principal_angle_sines(mixed.H, oracle_basis, M);
            CHECK(s1.front() <= 1e-8);
            CHECK(s2.front() <= 1e-8);
            CHECK(s3.front() <= 1e-8);
            for (double rn : direct.residual_norms) CHECK(rn <= 1e-8);
        }
    }
}

TEST_CASE("eigen bases are star-orthonormal") {
    auto ann = coarse_annulus();
    auto torus = make_torus(6, 6);
    for (auto star : {whitney_star(), dec_star()}) {
        auto B = harmonic_basis_direct(torus.c, 1, star);
        Matrix M = Matrix(hodge_star(torus.c, 1, star));
        Matrix gram = B.H.transpose() * M * B.H;
        CHECK((gram - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
        auto Bm = harmonic_basis_mixed(ann.c, 1, star);
        Matrix Ma = Matrix(hodge_star(ann.c, 1, star));
        Matrix gm = Bm.H.transpose() * Ma * Bm.H;
        CHECK((gm - Matrix::Identity(1, 1)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("projection agrees with the least-squares solve") {
    auto torus = make_torus(8, 8);
    Cochain om = cocycle_from_dual_chain(torus.c, torus.dual_cycle_u(2), true);
    for (auto star : {whitney_star(), dec_star()}) {
        auto basis = harmonic_basis_direct(torus.c, 1, star);
        auto proj = project_to_harmonics(torus.c, basis, om);
        auto ls = harmonic_ls(torus.c, om, star);
        Cochain diff(1, proj.h.values - ls.h.values);
        CHECK(cochain_norm(torus.c, star, diff) <=
              1e-9 * cochain_norm(torus.c, star, ls.h));
        CHECK(proj.method == "projection");
        CHECK(!proj.alpha.has_value());
    }
}

TEST_CASE("homology pairing normalizes evaluations on cycles") {
    auto torus = make_torus(8, 8);
    HomologyBasis B;
    B.p = 1;
    B.B = Matrix::Zero(torus.c.count(1), 2);
    B.B.col(0) = torus.cycle_u(2).values;
    B.B.col(1) = torus.cycle_v(3).values;
    for (auto star : {whitney_star(), dec_star()}) {
        auto H = harmonic_basis_direct(torus.c, 1, star);
        Matrix normalized = pair_homology(torus.c, H, B);
        Matrix evals = B.B.transpose() * normalized;
        CHECK((evals - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("homology pairing rejects non-cycles") {
    auto torus = make_torus(8, 8);
    auto H = harmonic_basis_direct(torus.c, 1, whitney_star());
    HomologyBasis bad;
    bad.p = 1;
    bad.B = Matrix::Zero(torus.c.count(1), 1);
    bad.B(0, 0) = 1.0;  // a single edge is not a cycle
    CHECK_THROWS_AS(pair_homology(torus.c, H, bad), InvalidInputError);
}

TEST_CASE("comparison methods agree on the annulus") {
    auto ann = coarse_annulus();
    Cochain om = cocycle_from_dual_chain(ann.c, hole_to_rim_path(ann), false);
    for (auto star : {whitney_star(), dec_star()}) {
        auto ls = harmonic_ls(ann.c, om, star);
        auto gy = gu_yau(ann.c, om, star);
        auto db = desbrun(ann.c, om, star);
        double hn = cochain_norm(ann.c, star, ls.h);
        Cochain d1(1, gy.h.values - ls.h.values), d2(1, db.h.values - ls.h.values);
        CHECK(cochain_norm(ann.c, star, d1) <= 1e-8 * hn);
        CHECK(cochain_norm(ann.c, star, d2) <= 1e-8 * hn);
        CHECK(gy.method == "gu-yau");
        CHECK(db.method == "desbrun");
    }
}

TEST_CASE("comparison methods at top dimension on the solid shell") {
    SimplicialComplex shell = solid_annulus(3, 1);
    Point center = Point::Zero(3);
    center.array() = 1.5;
    int start = boundary_top_near(shell, center);
    auto goal = [&](int t) { return has_far_boundary_facet(shell, t, center, 1.2); };
    auto path = find_dual_path(shell, start, goal);
    Cochain om = cocycle_from_dual_chain(shell, path, false);
    CHECK(is_cocycle(shell, om).d_norm == 0.0);
    for (auto star : {whitney_star(), dec_star()}) {
        auto ls = harmonic_ls(shell, om, star);
        auto db = desbrun(shell, om, star);
        auto gy = gu_yau(shell, om, star);
        double hn = cochain_norm(shell, star, ls.h);
        CHECK(hn > 0.0);
        Cochain d1(2, db.h.values - ls.h.values);
        Cochain d2(2, gy.h.values - ls.h.values);
        CHECK(cochain_norm(shell, star, d1) <= 1e-8 * hn);
        CHECK(cochain_norm(shell, star, d2) <= 1e-8 * hn);
        // the extra block makes the full-Laplacian system strictly denser
        CHECK(db.system_nnz > ls.system_nnz);
    }
}

TEST_CASE("compare_methods reports all requested combinations") {
    auto ann = coarse_annulus();
    Cochain om = cocycle_from_dual_chain(ann.c, hole_to_rim_path(ann), false);
    auto report = compare_methods(ann.c, om, 1, {"ls", "gu-yau", "desbrun"},
                                  {whitney_star(), dec_star()});
    CHECK(report.rows.size() == 6);
    for (const auto& row : report.rows) {
        CHECK(row.ok);
        CHECK(row.nnz > 0);
        CHECK(row.wall_time >= 0.0);
    }
    for (const auto& [key, diff] : report.pairwise_differences) CHECK(diff <= 1e-8);
    CHECK(!report.pairwise_differences.empty());
}

TEST_CASE("harmonic solve rejects a non-cocycle input") {
    auto torus = make_torus(6, 6);
    std::mt19937 rng(23);
    Cochain junk(1, random_vector(torus.c.count(1), rng));
    CHECK_THROWS_AS(harmonic_ls(torus.c, junk, whitney_star()), InvalidInputError);
}

TEST_CASE("trivial cohomology yields a zero harmonic part") {
    // a disc without holes: every cocycle is exact
    SimplicialComplex grid = square_grid(4, 4);
    std::mt19937 rng(29);
    Vector f = random_vector(grid.count(0), rng);
    Cochain om(1, coboundary(grid, 0) * f);
    auto r = harmonic_ls(grid, om, whitney_star());
    CHECK(cochain_norm(grid, whitney_star(), r.h) <=
          1e-10 * cochain_norm(grid, whitney_star(), om));
    auto basis = harmonic_basis_direct(grid, 1, whitney_star());
    CHECK(basis.H.cols() == 0);
}
