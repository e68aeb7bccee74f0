#ifndef QTET_PIPELINE_HPP
#define QTET_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtet/bose_mesner.hpp"
#include "qtet/graph.hpp"
#include "qtet/qracah.hpp"
#include "qtet/qtet_rep.hpp"
#include "qtet/split_decomp.hpp"
#include "qtet/subconstituent.hpp"
#include "qtet/uq_bridge.hpp"

namespace qtet {

using json = nlohmann::ordered_json;

inline json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

struct PipelineOptions {
    int base_vertex = 0;
    int ordering_index = 0;
    std::uint64_t seed = 42;
    Tolerances tol;
    bool allow_nonthin = false;
};

/// Everything the pipeline certifies, kept around for tests and the CLI.
struct PipelineResult {
    Graph graph;
    Eigen::MatrixXi dist;
    IntersectionData inter;
    SpectralData spectral;
    std::vector<QPolyOrdering> orderings;
    QPolyOrdering ordering;
    DualData dual;
    QRacahParams params;
    TDecomposition decomposition;
    std::vector<LocalModuleData> locals;       // per module, class-shared r
    std::vector<int> class_of_module;          // module index -> iso class
    std::vector<BoxImages> local_images;       // per module
    SplitFamily family_dd, family_du;
    std::vector<DisplacementCheck> disp_first, disp_second;
    PhiPsi phi_psi;
    BoxImages global;
    RelationReport global_relations;
    MainTheoremReport main_theorem;
    std::vector<double> uq_max_residuals;      // four embeddings
    double uq_roundtrip_gap = 0.0;
    double centrality[4] = {0, 0, 0, 0};       // [Phi,A], [Phi,A*], [Psi,A], [Psi,A*]
    json report;
};

namespace detail {

inline json build_report(const PipelineResult& r, const PipelineOptions& opt) {
    json report;
    report["graph"] = {{"n", r.graph.n},
                       {"D", r.inter.D},
                       {"intersection_array", r.inter.intersection_array()}};
    report["qpoly"] = {{"ordering", r.ordering.perm},
                       {"theta", r.ordering.theta_seq},
                       {"theta_star", r.dual.theta_star}};
    report["qracah"] = {{"q", complex_json(r.params.q)},
                        {"eta", complex_json(r.params.eta)},
                        {"u", complex_json(r.params.u)},
                        {"v", complex_json(r.params.v)},
                        {"eta_star", complex_json(r.params.eta_star)},
                        {"u_star", complex_json(r.params.u_star)},
                        {"v_star", complex_json(r.params.v_star)},
                        {"fit_residual", r.params.fit_residual}};
    json modules = json::array();
    std::vector<int> class_size(r.locals.size(), 0);
    for (int c : r.class_of_module) ++class_size[c];
    for (std::size_t k = 0; k < r.decomposition.modules.size(); ++k) {
        const auto& m = r.decomposition.modules[k];
        modules.push_back({{"rho", m.rho},
                           {"tau", m.tau},
                           {"d", m.d},
                           {"dim", m.dim()},
                           {"mult", class_size[r.class_of_module[k]]},
                           {"thin", m.thin},
                           {"r", complex_json(r.locals[k].r)},
                           {"r_ambiguous", r.locals[k].r_ambiguous},
                           {"disp1", m.disp1},
                           {"disp2", m.disp2}}});
    }
    report["modules"] = modules;
    report["phi_psi"] = {
        {"construction_agreement",
         std::max(r.phi_psi.construction_agreement_phi, r.phi_psi.construction_agreement_psi)},
        {"centrality_residuals", {r.centrality[0], r.centrality[1], r.centrality[2], r.centrality[3]}}};
    json per_relation = json::object();
    for (const auto& rel : r.global_relations.residuals) per_relation[rel.name] = rel.residual;
    report["boxtimes"] = {{"max_relation_residual", r.global_relations.max_residual},
                          {"per_relation", per_relation}};
    report["main_theorem"] = {{"residual_A", r.main_theorem.residual_A},
                              {"residual_Astar", r.main_theorem.residual_Astar}};
    report["uq"] = {{"embedding_max_residuals", r.uq_max_residuals},
                    {"roundtrip_gap", r.uq_roundtrip_gap}};
    report["config"] = {{"tolerances",
                         {{"tol_group", opt.tol.tol_group},
                          {"tol_zero", opt.tol.tol_zero},
                          {"tol_rel", opt.tol.tol_rel},
                          {"tol_fit", opt.tol.tol_fit}}},
                        {"seed", opt.seed},
                        {"base_vertex", opt.base_vertex},
                        {"ordering_index", opt.ordering_index},
                        {"version", "qtet 1.0.0"}};
    return report;
}

} // namespace detail

/// Run the full certification pipeline on a graph. Throws the stage-specific
/// error types on failure; on success every residual in the result is below
/// its tolerance.
inline PipelineResult analyze(const Graph& g, const PipelineOptions& opt) {
    PipelineResult r;
    r.graph = g;
    r.dist = distances(g);
    int D = diameter(r.dist);
    if (D < 3)
        throw NotDistanceRegularError("diameter D = " + std::to_string(D) +
                                      " < 3; the pipeline requires D >= 3");
    r.inter = check_distance_regular(g, r.dist);
    r.spectral = build_spectral_data(g, r.dist, r.inter, opt.tol);

    r.orderings = find_qpoly_orderings(r.spectral, opt.tol);
    if (r.orderings.empty())
        throw NotQPolynomialError("no Q-polynomial ordering of the primitive idempotents exists");
    if (opt.ordering_index < 0 || opt.ordering_index >= static_cast<int>(r.orderings.size()))
        throw ParseError("ordering index " + std::to_string(opt.ordering_index) + " out of range; " +
                         std::to_string(r.orderings.size()) + " orderings found");
    r.ordering = r.orderings[opt.ordering_index];

    r.dual = dual_data(g, r.dist, r.spectral, r.ordering, opt.base_vertex, opt.tol);
    auto triples = triple_product_checks(r.spectral, r.dual, r.inter, r.ordering, opt.tol);
    for (const auto& t : triples)
        if (!t.pass)
            throw CertificationError("triple-product vanishing check failed at (h,i,j)=(" +
                                     std::to_string(t.h) + "," + std::to_string(t.i) + "," +
                                     std::to_string(t.j) + (t.dual ? ") [dual]" : ") [primal]"));

    r.params = fit_qracah(r.ordering.theta_seq, r.dual.theta_star, opt.tol);

    const MatR& A = r.spectral.A[1];
    const MatR& Astar = r.dual.Astar;
    r.decomposition = decompose(A, Astar, r.spectral, r.dual, r.ordering, opt.seed, opt.tol,
                                opt.allow_nonthin);
    if (opt.allow_nonthin)
        for (const auto& m : r.decomposition.modules)
            if (!m.thin)
                throw ThinnessViolationError(
                    "non-thin irreducible T-module (rho,tau,d,dim)=(" + std::to_string(m.rho) + "," +
                    std::to_string(m.tau) + "," + std::to_string(m.d) + "," + std::to_string(m.dim()) +
                    "); the construction requires thin modules");

    // split bases and class-shared module scalars
    const auto& modules = r.decomposition.modules;
    r.locals.resize(modules.size());
    r.class_of_module.assign(modules.size(), -1);
    for (std::size_t k = 0; k < modules.size(); ++k) {
        const auto& mod = modules[k];
        MatC A_op = mod.basis.adjoint() * A.cast<cplx>() * mod.basis;
        MatC As_op = mod.basis.adjoint() * Astar.cast<cplx>() * mod.basis;
        std::vector<cplx> theta_sub, theta_star_sub;
        for (int i = 0; i <= mod.d; ++i) {
            theta_sub.push_back(r.ordering.theta_seq[mod.tau + i]);
            theta_star_sub.push_back(r.dual.theta_star[mod.rho + i]);
        }
        r.locals[k] = split_basis(A_op, As_op, theta_sub, theta_star_sub, mod.rho, mod.tau);
        // iso class: same (rho, tau, d) and matching split sequence
        for (std::size_t j = 0; j < k; ++j) {
            const auto& other = r.locals[j];
            if (other.rho != mod.rho || other.tau != mod.tau || other.d != mod.d) continue;
            bool match = true;
            for (int i = 0; i < mod.d; ++i)
                if (std::abs(other.phi2[i] - r.locals[k].phi2[i]) >
                    1e-7 * std::max(1.0, std::abs(other.phi2[i])))
                    match = false;
            if (match) {
                r.class_of_module[k] = r.class_of_module[j];
                break;
            }
        }
        if (r.class_of_module[k] < 0) r.class_of_module[k] = static_cast<int>(k);
        if (r.class_of_module[k] == static_cast<int>(k)) {
            recover_r(r.locals[k], r.params);
        } else {
            // share the class representative's scalar
            const auto& rep = r.locals[r.class_of_module[k]];
            r.locals[k].r = rep.r;
            r.locals[k].r_ambiguous = rep.r_ambiguous;
            r.locals[k].phi1 = rep.phi1;
        }
        gamma_and_u_basis(r.locals[k], r.params, A_op, As_op, theta_sub, theta_star_sub);
    }
    r.decomposition.iso_classes.assign(modules.size(), {});
    for (std::size_t k = 0; k < modules.size(); ++k)
        r.decomposition.iso_classes[r.class_of_module[k]].push_back(static_cast<int>(k));
    std::erase_if(r.decomposition.iso_classes, [](const auto& v) { return v.empty(); });

    // split decompositions, Phi and Psi
    SplitSubspaces split_dd(r.spectral, r.dual, r.ordering, SplitKind::DownDown);
    SplitSubspaces split_du(r.spectral, r.dual, r.ordering, SplitKind::DownUp);
    r.family_dd = tilde_spaces(split_dd, SplitKind::DownDown);
    r.family_du = tilde_spaces(split_du, SplitKind::DownUp);
    r.disp_first = verify_displacement_coincidence(r.family_dd, r.decomposition);
    r.disp_second = verify_displacement_coincidence(r.family_du, r.decomposition);
    r.phi_psi = build_phi_psi(r.family_dd, r.family_du, r.decomposition, r.params.q);
    r.centrality[0] = (r.phi_psi.Phi * A - A * r.phi_psi.Phi).norm() / std::max(1.0, A.norm());
    r.centrality[1] = (r.phi_psi.Phi * Astar - Astar * r.phi_psi.Phi).norm() / std::max(1.0, Astar.norm());
    r.centrality[2] = (r.phi_psi.Psi * A - A * r.phi_psi.Psi).norm() / std::max(1.0, A.norm());
    r.centrality[3] = (r.phi_psi.Psi * Astar - Astar * r.phi_psi.Psi).norm() / std::max(1.0, Astar.norm());
    for (double c : r.centrality)
        if (c > 1e-8)
            throw CertificationError("Phi/Psi centrality residual " + std::to_string(c) +
                                     " exceeds tolerance");
    if (!t_membership(r.phi_psi.Phi, r.decomposition.commutant) ||
        !t_membership(r.phi_psi.Psi, r.decomposition.commutant))
        throw CertificationError("Phi or Psi fails the double-commutant membership test");

    // local generator images, shared per iso class
    std::vector<MatC> u_bases;
    for (std::size_t k = 0; k < modules.size(); ++k) {
        int rep = r.class_of_module[k];
        r.local_images.push_back(local_generators(r.locals[rep].d, r.locals[rep].r, r.params.q));
        auto local_rel = verify_relations(r.local_images.back());
        if (!local_rel.pass(opt.tol.tol_rel))
            throw CertificationError("local generator relations failed on module " + std::to_string(k) +
                                     " (max residual " + std::to_string(local_rel.max_residual) + ")");
        u_bases.push_back(modules[k].basis * r.locals[k].u_basis);
    }

    r.global = assemble_theta(u_bases, r.local_images, r.params.q);
    r.global_relations = verify_relations(r.global);
    if (!r.global_relations.pass(opt.tol.tol_rel))
        throw CertificationError("global relation residual " +
                                 std::to_string(r.global_relations.max_residual) + " exceeds tolerance");
    for (const auto& [key, mat] : r.global.x)
        if (!t_membership(mat, r.decomposition.commutant))
            throw CertificationError("global generator x" + std::to_string(key.first) +
                                     std::to_string(key.second) + " fails T-membership");

    r.main_theorem = verify_main_theorem(A, Astar, r.phi_psi.Phi, r.phi_psi.Psi, r.global, r.params,
                                         r.locals, r.local_images);
    if (r.main_theorem.residual_A > 1e-8 || r.main_theorem.residual_Astar > 1e-8)
        throw CertificationError("main reconstruction residuals " +
                                 std::to_string(r.main_theorem.residual_A) + ", " +
                                 std::to_string(r.main_theorem.residual_Astar) + " exceed tolerance");

    // the four quantum affine embeddings, certified in both presentations
    for (int i = 0; i < 4; ++i) {
        UqEquitable eq = embed_uq(i, r.global);
        auto rep_eq = verify_uq_equitable(eq);
        UqChevalley ch = equitable_to_chevalley(eq);
        auto rep_ch = verify_uq_chevalley(ch);
        UqEquitable back = chevalley_to_equitable(ch);
        double gap = 0.0;
        for (auto [a, b] : {std::pair{&eq.x0, &back.x0}, {&eq.x1, &back.x1}, {&eq.y0, &back.y0},
                            {&eq.y1, &back.y1}, {&eq.z0, &back.z0}, {&eq.z1, &back.z1}})
            gap = std::max(gap, (*a - *b).norm());
        r.uq_roundtrip_gap = std::max(r.uq_roundtrip_gap, gap);
        double max_res = std::max(rep_eq.max_residual, rep_ch.max_residual);
        r.uq_max_residuals.push_back(max_res);
        if (max_res > opt.tol.tol_rel)
            throw CertificationError("quantum affine relation residual " + std::to_string(max_res) +
                                     " exceeds tolerance at embedding i = " + std::to_string(i));
    }

    r.report = detail::build_report(r, opt);
    return r;
}

} // namespace qtet

#endif
