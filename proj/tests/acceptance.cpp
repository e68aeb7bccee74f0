// Acceptance gate: one test case per criterion, each printing a single
// pass/fail line. Tolerances are pinned here and must not be loosened.

#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "qtet/pipeline.hpp"

using namespace qtet;

namespace {

struct Gate {
    int number;
    std::vector<std::string> failures;

    explicit Gate(int n) : number(n) {}
    void expect(bool cond, const std::string& what) {
        if (!cond) failures.push_back(what);
    }
    ~Gate() {
        std::printf("[acceptance] criterion %d: %s", number, failures.empty() ? "PASS" : "FAIL");
        if (!failures.empty()) std::printf(" (%zu checks failed; first: %s)", failures.size(), failures[0].c_str());
        std::printf("\n");
        std::fflush(stdout);
    }
};

cplx random_q(std::mt19937_64& rng, int d) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (;;) {
        cplx q = std::polar(0.8 + 0.45 * uni(rng), 2.0 * M_PI * uni(rng));
        bool ok = std::abs(std::abs(q) - 1.0) > 1e-3;
        for (int i = 1; i <= std::max(2 * d, 3) && ok; ++i)
            if (std::abs(std::pow(q, 2 * i) - cplx(1.0)) < 1e-2) ok = false;
        if (ok) return q;
    }
}

cplx random_r(std::mt19937_64& rng, cplx q, int d) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (;;) {
        cplx r = std::polar(0.3 + 1.5 * uni(rng), 2.0 * M_PI * uni(rng));
        if (!detail::r_excluded(q, d, r, 1e-2)) return r;
    }
}

} // namespace

TEST_CASE("criterion_1 cycle family end to end") {
    Gate gate(1);
    for (int n = 7; n <= 16; ++n) {
        auto start = std::chrono::steady_clock::now();
        try {
            PipelineResult r = analyze(make_cycle(n), PipelineOptions{});
            gate.expect(r.global_relations.residuals.size() == 20,
                        "cycle:" + std::to_string(n) + " does not report 20 relations");
            gate.expect(r.global_relations.max_residual < 1e-7,
                        "cycle:" + std::to_string(n) + " relation residual " +
                            std::to_string(r.global_relations.max_residual));
            gate.expect(r.main_theorem.residual_A < 1e-8 && r.main_theorem.residual_Astar < 1e-8,
                        "cycle:" + std::to_string(n) + " reconstruction residuals " +
                            std::to_string(r.main_theorem.residual_A) + ", " +
                            std::to_string(r.main_theorem.residual_Astar));
        } catch (const std::exception& e) {
            gate.expect(false, "cycle:" + std::to_string(n) + " threw: " + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        gate.expect(secs < 10.0, "cycle:" + std::to_string(n) + " took " + std::to_string(secs) + " s");
    }
    CHECK_MESSAGE(gate.failures.empty(), gate.failures.empty() ? "" : gate.failures[0]);
}

TEST_CASE("criterion_2 negative controls") {
    Gate gate(2);
    // hypercube:4: the eigenvalue sequence is arithmetic, which forces q^2 = 1
    try {
        analyze(make_hypercube(4), PipelineOptions{});
        gate.expect(false, "hypercube:4 was not rejected");
    } catch (const NotQRacahTypeError& e) {
        gate.expect(std::string(e.what()).find("beta = 2") != std::string::npos,
                    std::string("hypercube:4 rejection does not name the obstruction: ") + e.what());
    } catch (const std::exception& e) {
        gate.expect(false, std::string("hypercube:4 rejected with the wrong error: ") + e.what());
    }
    for (int n : {5, 6}) {
        try {
            analyze(make_cycle(n), PipelineOptions{});
            gate.expect(false, "cycle:" + std::to_string(n) + " was not rejected for small diameter");
        } catch (const NotDistanceRegularError&) {
            // expected: diameter below the supported range
        } catch (const std::exception& e) {
            gate.expect(false, "cycle:" + std::to_string(n) + " rejected with the wrong error: " + e.what());
        }
    }
    // a path is connected but not distance-regular; the witness names a pair
    try {
        Graph g = load_edge_list("0 1\n1 2\n2 3\n3 4\n4 5\n");
        analyze(g, PipelineOptions{});
        gate.expect(false, "path graph was not rejected");
    } catch (const NotDistanceRegularError& e) {
        gate.expect(std::string(e.what()).find("pairs") != std::string::npos,
                    std::string("witness pair missing from: ") + e.what());
    } catch (const std::exception& e) {
        gate.expect(false, std::string("path rejected with the wrong error: ") + e.what());
    }
    CHECK_MESSAGE(gate.failures.empty(), gate.failures.empty() ? "" : gate.failures[0]);
}

TEST_CASE("criterion_3 two-construction agreement for Phi and Psi") {
    Gate gate(3);
    for (int n = 7; n <= 16; ++n) {
        PipelineResult r = analyze(make_cycle(n), PipelineOptions{});
        gate.expect(r.phi_psi.construction_agreement_phi < 1e-9 &&
                        r.phi_psi.construction_agreement_psi < 1e-9,
                    "cycle:" + std::to_string(n) + " construction gap " +
                        std::to_string(std::max(r.phi_psi.construction_agreement_phi,
                                                r.phi_psi.construction_agreement_psi)));
        // centrality residuals are already normalized by the operator norms
        for (double c : r.centrality)
            gate.expect(c < 1e-8,
                        "cycle:" + std::to_string(n) + " centrality residual " + std::to_string(c));
    }
    CHECK_MESSAGE(gate.failures.empty(), gate.failures.empty() ? "" : gate.failures[0]);
}

TEST_CASE("criterion_4 split-decomposition completeness and displacement coincidence") {
    Gate gate(4);
    for (int n = 7; n <= 16; ++n) {
        PipelineResult r = analyze(make_cycle(n), PipelineOptions{});
        for (const SplitFamily* fam : {&r.family_dd, &r.family_du}) {
            int total = 0;
            for (int i = 0; i <= fam->D; ++i)
                for (int j = 0; j <= fam->D; ++j) total += fam->dim(i, j);
            gate.expect(total == n, "cycle:" + std::to_string(n) + " tilde dims sum to " +
                                        std::to_string(total));
        }
        for (const auto* checks : {&r.disp_first, &r.disp_second})
            for (const auto& c : *checks)
                gate.expect(c.residual < 1e-8, "cycle:" + std::to_string(n) +
                                                   " displacement residual " + std::to_string(c.residual) +
                                                   " at delta " + std::to_string(c.delta));
    }
    CHECK_MESSAGE(gate.failures.empty(), gate.failures.empty() ? "" : gate.failures[0]);
}

TEST_CASE("criterion_5 standalone representation lab") {
    Gate gate(5);
    std::mt19937_64 rng(20240823);
    for (int trial = 0; trial < 100; ++trial) {
        int d = static_cast<int>(rng() % 6);
        cplx q = random_q(rng, d);
        cplx r = random_r(rng, q, d);
        std::string tag = "trial " + std::to_string(trial) + " (d=" + std::to_string(d) + ")";
        BoxImages box = local_generators(d, r, q);
        RelationReport rep = verify_relations(box);
        gate.expect(rep.residuals.size() == 20 && rep.max_residual < 1e-9,
                    tag + " relation residual " + std::to_string(rep.max_residual));
        BoxImages rho = rho_twist(box);
        BoxImages rho4 = rho_twist(rho_twist(rho_twist(rho)));
        double rho4_gap = 0.0;
        for (const auto& [key, mat] : box.x) rho4_gap = std::max(rho4_gap, (mat - rho4.x.at(key)).norm());
        gate.expect(rho4_gap == 0.0, tag + " rho^4 gap " + std::to_string(rho4_gap));
        gate.expect(verify_relations(rho).max_residual < 1e-9, tag + " rho twist residual");
        gate.expect(verify_relations(flip_twist(box)).max_residual < 1e-9, tag + " flip twist residual");
    }
    CHECK_MESSAGE(gate.failures.empty(), gate.failures.empty() ? "" : gate.failures[0]);
}

TEST_CASE("criterion_6 quantum affine certification") {
    Gate gate(6);
    for (int n = 7; n <= 16; ++n) {
        PipelineResult r = analyze(make_cycle(n), PipelineOptions{});
        gate.expect(r.uq_max_residuals.size() == 4, "cycle:" + std::to_string(n) + " missing embeddings");
        for (double v : r.uq_max_residuals)
            gate.expect(v < 1e-7, "cycle:" + std::to_string(n) + " embedding residual " + std::to_string(v));
        gate.expect(r.uq_roundtrip_gap < 1e-12,
                    "cycle:" + std::to_string(n) + " roundtrip gap " + std::to_string(r.uq_roundtrip_gap));
    }
    CHECK_MESSAGE(gate.failures.empty(), gate.failures.empty() ? "" : gate.failures[0]);
}

TEST_CASE("criterion_7 round-trip parameter recovery") {
    Gate gate(7);
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng() % 4); // r is identifiable from d >= 2 split data
        std::string tag = "trial " + std::to_string(trial) + " (d=" + std::to_string(d) + ")";
        QRacahParams p;
        p.D = d;
        p.q = random_q(rng, d);
        auto coeff = [&] { return std::polar(0.5 + uni(rng), 2.0 * M_PI * uni(rng)); };
        p.eta = coeff();
        p.u = coeff();
        p.v = coeff();
        p.eta_star = coeff();
        p.u_star = coeff();
        p.v_star = coeff();
        cplx r = random_r(rng, p.q, d);
        // plant the module straight from the u-basis recurrences and scramble
        const int m = d + 1;
        MatC A_loc = MatC::Zero(m, m), As_loc = MatC::Zero(m, m);
        std::vector<cplx> theta_sub, theta_star_sub, phi2;
        for (int i = 0; i <= d; ++i) {
            A_loc(i, i) = p.theta(d - i);
            As_loc(i, i) = p.theta_star(i);
            theta_sub.push_back(p.theta(i));
            theta_star_sub.push_back(p.theta_star(i));
        }
        bool degenerate = false;
        for (int i = 1; i <= d && !degenerate; ++i) {
            cplx gamma = (std::pow(p.q, i) - std::pow(p.q, -i)) *
                         (p.u * r * std::pow(p.q, 1 - i) - p.v * std::pow(p.q, i - d));
            cplx phi = detail::phi_second_formula(p, 0, 0, d, r, i);
            if (std::abs(gamma) < 1e-6 || std::abs(phi) < 1e-6) degenerate = true;
            A_loc(i, i - 1) = gamma;
            As_loc(i - 1, i) = phi / gamma;
            phi2.push_back(phi);
        }
        if (degenerate) { // reroll deterministically by skipping: counted as pass-neutral
            --trial;
            continue;
        }
        MatC noise(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) noise(i, j) = cplx(gauss(rng), gauss(rng));
        Eigen::HouseholderQR<MatC> qr(noise);
        MatC Q = qr.householderQ() * MatC::Identity(m, m);
        try {
            LocalModuleData local = split_basis(Q * A_loc * Q.adjoint(), Q * As_loc * Q.adjoint(),
                                                theta_sub, theta_star_sub, 0, 0, 1e-6);
            recover_r(local, p, 1e-6);
            gate.expect(std::abs(local.r - r) < 1e-10 * std::max(1.0, std::abs(r)),
                        tag + " recovered r off by " + std::to_string(std::abs(local.r - r)));
        } catch (const std::exception& e) {
            gate.expect(false, tag + " threw: " + e.what());
        }
    }
    CHECK_MESSAGE(gate.failures.empty(), gate.failures.empty() ? "" : gate.failures[0]);
}

TEST_CASE("criterion_8 byte-identical reports") {
    Gate gate(8);
    namespace fs = std::filesystem;
    const std::string cli = QTET_CLI_PATH;
    fs::path out1 = fs::temp_directory_path() / "qtet_acceptance_det1.json";
    fs::path out2 = fs::temp_directory_path() / "qtet_acceptance_det2.json";
    auto run_once = [&](const fs::path& out) {
        std::string cmd = cli + " analyze --graph cycle:9 --seed 12345 --base-vertex 2 --out " +
                          out.string() + " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    gate.expect(run_once(out1) == 0, "first run failed");
    gate.expect(run_once(out2) == 0, "second run failed");
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    std::string r1 = slurp(out1), r2 = slurp(out2);
    gate.expect(!r1.empty(), "first report is empty");
    gate.expect(r1 == r2, "reports differ between runs");
    fs::remove(out1);
    fs::remove(out2);
    CHECK_MESSAGE(gate.failures.empty(), gate.failures.empty() ? "" : gate.failures[0]);
}
