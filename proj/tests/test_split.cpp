#include <doctest.h>

#include "qtet/qracah.hpp"
#include "qtet/split_decomp.hpp"

using namespace qtet;

namespace {

struct Setup {
    Graph g;
    Eigen::MatrixXi dist;
    IntersectionData inter;
    SpectralData spectral;
    QPolyOrdering ord;
    DualData dual;
    TDecomposition dec;
    QRacahParams params;
};

Setup setup_cycle(int n) {
    Setup s;
    s.g = make_cycle(n);
    s.dist = distances(s.g);
    s.inter = check_distance_regular(s.g, s.dist);
    s.spectral = build_spectral_data(s.g, s.dist, s.inter, Tolerances{});
    auto orderings = find_qpoly_orderings(s.spectral, Tolerances{});
    REQUIRE(!orderings.empty());
    s.ord = orderings[0];
    s.dual = dual_data(s.g, s.dist, s.spectral, s.ord, 0, Tolerances{});
    s.dec = decompose(s.spectral.A[1], s.dual.Astar, s.spectral, s.dual, s.ord, 42, Tolerances{});
    s.params = fit_qracah(s.ord.theta_seq, s.dual.theta_star, Tolerances{});
    return s;
}

} // namespace

TEST_CASE("split subspace boundary cases") {
    Setup s = setup_cycle(8);
    SplitSubspaces split(s.spectral, s.dual, s.ord, SplitKind::DownDown);
    CHECK(split.basis(-1, 2).cols() == 0);
    CHECK(split.basis(2, -1).cols() == 0);
    CHECK(split.basis(4, 4).cols() == 8); // the whole space
    CHECK(split.basis(0, 4).cols() == 1); // E*_0 V is one-dimensional
    CHECK_THROWS_AS(split.basis(5, 0), std::out_of_range);
}

TEST_CASE("split subspaces are nested in both indices") {
    Setup s = setup_cycle(9);
    SplitSubspaces split(s.spectral, s.dual, s.ord, SplitKind::DownDown);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            MatC small = split.basis(i, j);
            MatC bigger = split.basis(i + 1, j);
            if (small.cols() == 0) continue;
            // small subset of bigger: projection preserves norms
            MatC proj = bigger * (bigger.adjoint() * small);
            CHECK((proj - small).norm() < 1e-8);
        }
}

TEST_CASE("tilde spaces sum to the whole space, both kinds") {
    for (int n : {8, 9}) {
        Setup s = setup_cycle(n);
        for (SplitKind kind : {SplitKind::DownDown, SplitKind::DownUp}) {
            SplitSubspaces split(s.spectral, s.dual, s.ord, kind);
            SplitFamily fam = tilde_spaces(split, kind);
            int total = 0;
            for (int i = 0; i <= 4; ++i)
                for (int j = 0; j <= 4; ++j) total += fam.dim(i, j);
            CHECK(total == n);
        }
    }
}

TEST_CASE("cycle:9 DownDown tilde support sits on two diagonals") {
    Setup s = setup_cycle(9);
    SplitSubspaces split(s.spectral, s.dual, s.ord, SplitKind::DownDown);
    SplitFamily fam = tilde_spaces(split, SplitKind::DownDown);
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j) {
            int delta = i + j - 4;
            if (fam.dim(i, j) > 0) CHECK((delta == 0 || delta == 1));
        }
}

TEST_CASE("displacement coincidence on cycle:8") {
    Setup s = setup_cycle(8);
    SplitSubspaces sdd(s.spectral, s.dual, s.ord, SplitKind::DownDown);
    SplitSubspaces sdu(s.spectral, s.dual, s.ord, SplitKind::DownUp);
    SplitFamily dd = tilde_spaces(sdd, SplitKind::DownDown);
    SplitFamily du = tilde_spaces(sdu, SplitKind::DownUp);
    auto first = verify_displacement_coincidence(dd, s.dec);
    auto second = verify_displacement_coincidence(du, s.dec);
    for (const auto& c : first) {
        CHECK(c.dim_modules == c.dim_tilde);
        CHECK(c.residual < 1e-8);
        if (c.delta == 0) CHECK(c.dim_modules == 8); // both modules have displacement 0
        else CHECK(c.dim_modules == 0);
    }
    for (const auto& c : second)
        CHECK((c.delta == 0 ? c.dim_modules == 8 : c.dim_modules == 0));
}

TEST_CASE("displacement coincidence on cycle:9") {
    Setup s = setup_cycle(9);
    SplitSubspaces sdd(s.spectral, s.dual, s.ord, SplitKind::DownDown);
    SplitFamily dd = tilde_spaces(sdd, SplitKind::DownDown);
    auto first = verify_displacement_coincidence(dd, s.dec);
    for (const auto& c : first) {
        CHECK(c.residual < 1e-8);
        if (c.delta == 0) CHECK(c.dim_modules == 5);
        else if (c.delta == 1) CHECK(c.dim_modules == 4);
        else CHECK(c.dim_modules == 0);
    }
}

TEST_CASE("Phi and Psi on cycle:8 are both the identity") {
    Setup s = setup_cycle(8);
    SplitSubspaces sdd(s.spectral, s.dual, s.ord, SplitKind::DownDown);
    SplitSubspaces sdu(s.spectral, s.dual, s.ord, SplitKind::DownUp);
    SplitFamily dd = tilde_spaces(sdd, SplitKind::DownDown);
    SplitFamily du = tilde_spaces(sdu, SplitKind::DownUp);
    PhiPsi pp = build_phi_psi(dd, du, s.dec, s.params.q);
    CHECK((pp.Phi - MatC::Identity(8, 8)).norm() < 1e-9);
    CHECK((pp.Psi - MatC::Identity(8, 8)).norm() < 1e-9);
}

TEST_CASE("Phi on cycle:9 acts as 1 and q on the two modules; Psi is identity") {
    Setup s = setup_cycle(9);
    SplitSubspaces sdd(s.spectral, s.dual, s.ord, SplitKind::DownDown);
    SplitSubspaces sdu(s.spectral, s.dual, s.ord, SplitKind::DownUp);
    SplitFamily dd = tilde_spaces(sdd, SplitKind::DownDown);
    SplitFamily du = tilde_spaces(sdu, SplitKind::DownUp);
    PhiPsi pp = build_phi_psi(dd, du, s.dec, s.params.q);
    CHECK(pp.construction_agreement_phi < 1e-9);
    CHECK(pp.construction_agreement_psi < 1e-9);
    CHECK((pp.Psi - MatC::Identity(9, 9)).norm() < 1e-9);
    for (const auto& m : s.dec.modules) {
        cplx scalar = m.disp1 == 0 ? cplx(1.0) : s.params.q;
        CHECK((pp.Phi * m.basis - scalar * m.basis).norm() < 1e-8);
    }
    // Phi and Psi commute with A and A*
    MatC A = s.spectral.A[1].cast<cplx>();
    MatC As = s.dual.Astar.cast<cplx>();
    CHECK((pp.Phi * A - A * pp.Phi).norm() < 1e-8);
    CHECK((pp.Phi * As - As * pp.Phi).norm() < 1e-8);
    CHECK((pp.Psi * A - A * pp.Psi).norm() < 1e-8);
    CHECK((pp.Psi * As - As * pp.Psi).norm() < 1e-8);
}

TEST_CASE("subspace helpers behave on simple data") {
    // intersection of two planes in C^3 sharing one line
    MatC P = MatC::Zero(3, 3), Q = MatC::Zero(3, 3);
    P(0, 0) = P(1, 1) = 1.0; // span(e0, e1)
    Q(1, 1) = Q(2, 2) = 1.0; // span(e1, e2)
    MatC inter = detail::subspace_intersection(P, Q);
    REQUIRE(inter.cols() == 1);
    CHECK(std::abs(std::abs(inter(1, 0)) - 1.0) < 1e-10);
    // complement of span(e0) within span(e0, e1) is span(e1)
    MatC U = MatC::Zero(3, 1), W = MatC::Zero(3, 2);
    U(0, 0) = 1.0;
    W(0, 0) = 1.0;
    W(1, 1) = 1.0;
    MatC comp = detail::complement_within(U, W);
    REQUIRE(comp.cols() == 1);
    CHECK(std::abs(std::abs(comp(1, 0)) - 1.0) < 1e-10);
}
