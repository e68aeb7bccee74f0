#include <doctest.h>

#include <cmath>

#include "qtet/bose_mesner.hpp"

using namespace qtet;

namespace {

SpectralData spectral_for(const Graph& g, IntersectionData* inter_out = nullptr) {
    auto dist = distances(g);
    IntersectionData inter = check_distance_regular(g, dist);
    if (inter_out) *inter_out = inter;
    return build_spectral_data(g, dist, inter, Tolerances{});
}

} // namespace

TEST_CASE("distance matrices partition the all-ones matrix") {
    Graph g = make_cycle(8);
    auto dist = distances(g);
    auto A = distance_matrices(g, dist, 4);
    CHECK((A[0] - MatR::Identity(8, 8)).norm() == 0.0);
    MatR sum = MatR::Zero(8, 8);
    for (const auto& Ai : A) sum += Ai;
    CHECK((sum - MatR::Ones(8, 8)).norm() == 0.0);
    // antipodal class of the 8-cycle is a perfect matching
    CHECK(A[4].rowwise().sum().isApproxToConstant(1.0));
}

TEST_CASE("cycle:9 product identity A1*A1 = 2 A0 + A2") {
    Graph g = make_cycle(9);
    auto dist = distances(g);
    auto A = distance_matrices(g, dist, 4);
    CHECK((A[1] * A[1] - 2.0 * A[0] - A[2]).norm() < 1e-12);
}

TEST_CASE("cycle:8 eigenvalues and multiplicities") {
    SpectralData s = spectral_for(make_cycle(8));
    // 2 cos(2 pi j / 8): {2, sqrt2, 0, -sqrt2, -2}
    REQUIRE(s.theta.size() == 5);
    CHECK(s.theta[0] == doctest::Approx(2.0));
    CHECK(s.theta[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(s.theta[2] == doctest::Approx(0.0));
    CHECK(s.theta[3] == doctest::Approx(-std::sqrt(2.0)));
    CHECK(s.theta[4] == doctest::Approx(-2.0));
    CHECK(s.mult == std::vector<int>{1, 2, 2, 2, 1});
}

TEST_CASE("idempotent axioms hold independently") {
    SpectralData s = spectral_for(make_cycle(8));
    const int n = 8;
    MatR sum = MatR::Zero(n, n);
    for (std::size_t i = 0; i < s.E.size(); ++i) {
        CHECK((s.E[i] * s.E[i] - s.E[i]).norm() < 1e-10);
        CHECK((s.E[i] - s.E[i].transpose()).norm() < 1e-10);
        sum += s.E[i];
        // E_i reproduces the eigenvalue: A E_i = theta_i E_i
        CHECK((s.A[1] * s.E[i] - s.theta[i] * s.E[i]).norm() < 1e-9);
    }
    CHECK((sum - MatR::Identity(n, n)).norm() < 1e-10);
    CHECK((s.E[0] - MatR::Constant(n, n, 1.0 / n)).norm() < 1e-10);
}

TEST_CASE("Krein parameters re-expand the Schur product") {
    // independent oracle: E_i o E_j must equal (1/|X|) sum_h q^h_{ij} E_h
    SpectralData s = spectral_for(make_cycle(9));
    const int D = 4;
    const double n = 9.0;
    for (int i = 0; i <= D; ++i)
        for (int j = 0; j <= D; ++j) {
            MatR lhs = s.E[i].cwiseProduct(s.E[j]);
            MatR rhs = MatR::Zero(9, 9);
            for (int h = 0; h <= D; ++h) rhs += s.krein[h][i][j] * s.E[h];
            CHECK((lhs - rhs / n).norm() < 1e-10);
        }
}

TEST_CASE("Krein parameters are nonnegative") {
    for (int n : {8, 9, 12}) {
        SpectralData s = spectral_for(make_cycle(n));
        for (const auto& plane : s.krein)
            for (const auto& row : plane)
                for (double v : row) CHECK(v > -1e-8);
    }
}

TEST_CASE("cycle:8 Q-polynomial orderings") {
    SpectralData s = spectral_for(make_cycle(8));
    auto orderings = find_qpoly_orderings(s, Tolerances{});
    REQUIRE(!orderings.empty());
    for (const auto& ord : orderings) {
        CHECK(ord.perm[0] == 0);
        CHECK(ord.perm.size() == 5);
        // a Q-polynomial ordering visits each idempotent once
        std::vector<bool> seen(5, false);
        for (int p : ord.perm) {
            CHECK(!seen[p]);
            seen[p] = true;
        }
    }
    // the known ordering for even cycles alternates around the spectrum:
    // theta*_i = 2 cos(2 pi i / n) ordering corresponds to perm {0,1,2,3,4}
    bool found_natural = false;
    for (const auto& ord : orderings)
        if (ord.perm == std::vector<int>{0, 1, 2, 3, 4}) found_natural = true;
    CHECK(found_natural);
}

TEST_CASE("cycle:9 Q-polynomial ordering theta sequence decreases by angle") {
    SpectralData s = spectral_for(make_cycle(9));
    auto orderings = find_qpoly_orderings(s, Tolerances{});
    REQUIRE(!orderings.empty());
    const auto& ord = orderings[0];
    // natural ordering: theta_i = 2 cos(2 pi i / 9)
    for (int i = 0; i <= 4; ++i)
        CHECK(ord.theta_seq[i] == doctest::Approx(2.0 * std::cos(2.0 * M_PI * i / 9.0)));
}

TEST_CASE("triangle rule rejects a shuffled ordering") {
    SpectralData s = spectral_for(make_cycle(8));
    double qmax = 0.0;
    for (const auto& plane : s.krein)
        for (const auto& row : plane)
            for (double v : row) qmax = std::max(qmax, std::abs(v));
    // swap two middle entries of the natural ordering: breaks the rule
    std::vector<int> bad{0, 2, 1, 3, 4};
    CHECK(!detail::triangle_rule_holds(s.krein, bad, 1e-8 * qmax));
    std::vector<int> good{0, 1, 2, 3, 4};
    CHECK(detail::triangle_rule_holds(s.krein, good, 1e-8 * qmax));
}
