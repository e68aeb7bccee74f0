// Certification CLI: analyze a distance-regular graph end to end, or run the
// standalone evaluation-module lab on explicit (d, q, r).

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qtet/pipeline.hpp"

namespace {

using namespace qtet;

// exit codes
constexpr int kExitParse = 1;
constexpr int kExitNotDrg = 2;
constexpr int kExitNotQPoly = 3;
constexpr int kExitNotQRacah = 4;
constexpr int kExitNonThin = 5;
constexpr int kExitCertification = 6;
constexpr int kExitExcludedLocus = 7;

/// Parse "a+bi", "a-bi", "a", "bi" or "polar:modulus,argument".
cplx parse_complex(const std::string& text) {
    if (text.rfind("polar:", 0) == 0) {
        std::string rest = text.substr(6);
        auto comma = rest.find(',');
        if (comma == std::string::npos) throw ParseError("polar form needs modulus,argument");
        double mod = std::stod(rest.substr(0, comma));
        double arg = std::stod(rest.substr(comma + 1));
        return std::polar(mod, arg);
    }
    std::string s = text;
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    if (s.empty()) throw ParseError("empty complex literal");
    bool has_i = s.back() == 'i' || s.back() == 'I';
    if (!has_i) return cplx(std::stod(s), 0.0);
    s.pop_back();
    // split at the last +/- that is not an exponent sign or leading sign
    std::size_t split = std::string::npos;
    for (std::size_t p = s.size(); p-- > 1;) {
        if ((s[p] == '+' || s[p] == '-') && s[p - 1] != 'e' && s[p - 1] != 'E') {
            split = p;
            break;
        }
    }
    if (split == std::string::npos) {
        if (s.empty() || s == "+" || s == "-") s += "1";
        return cplx(0.0, std::stod(s));
    }
    std::string im = s.substr(split);
    if (im == "+" || im == "-") im += "1";
    return cplx(std::stod(s.substr(0, split)), std::stod(im));
}

struct CommonFlags {
    std::string graph_spec;
    std::string edges_path;
    PipelineOptions opt;
    std::string out_path;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_graph) {
    if (needs_graph) {
        cmd->add_option("--graph", flags.graph_spec, "generator spec, e.g. cycle:9 or hypercube:4");
        cmd->add_option("--edges", flags.edges_path, "path to an edge-list file");
    }
    cmd->add_option("--base-vertex", flags.opt.base_vertex, "base vertex for the dual algebra");
    cmd->add_option("--ordering", flags.opt.ordering_index, "index of the Q-polynomial ordering to use");
    cmd->add_option("--seed", flags.opt.seed, "RNG seed for the commutant sampling");
    cmd->add_option("--tol-group", flags.opt.tol.tol_group, "eigenvalue grouping tolerance");
    cmd->add_option("--tol-zero", flags.opt.tol.tol_zero, "zero-pattern tolerance");
    cmd->add_option("--tol-rel", flags.opt.tol.tol_rel, "relation residual tolerance");
    cmd->add_option("--tol-fit", flags.opt.tol.tol_fit, "parameter fit tolerance");
    cmd->add_flag("--allow-nonthin", flags.opt.allow_nonthin,
                  "report non-thin modules instead of failing early");
    cmd->add_option("--out", flags.out_path, "write the report to this file");
    cmd->add_option("--format", flags.format, "json or text")->check(CLI::IsMember({"json", "text"}));
}

Graph load_from_flags(const CommonFlags& flags) {
    if (!flags.graph_spec.empty()) return load_graph_spec(flags.graph_spec);
    if (!flags.edges_path.empty()) {
        std::ifstream in(flags.edges_path);
        if (!in) throw ParseError("cannot open edge list file: " + flags.edges_path);
        std::ostringstream text;
        text << in.rdbuf();
        return load_edge_list(text.str());
    }
    throw ParseError("one of --graph or --edges is required");
}

void emit(const json& report, const CommonFlags& flags, const std::string& text_summary) {
    std::string payload = flags.format == "json" ? report.dump(2) + "\n" : text_summary;
    if (!flags.out_path.empty()) {
        std::ofstream out(flags.out_path, std::ios::binary);
        out << payload;
    } else {
        std::cout << payload;
    }
}

std::string text_summary_analyze(const PipelineResult& r) {
    std::ostringstream os;
    os << "graph: n=" << r.graph.n << " D=" << r.inter.D << " " << r.inter.intersection_array() << "\n";
    os << "q = " << r.params.q << ", eta = " << r.params.eta << ", u = " << r.params.u
       << ", v = " << r.params.v << "\n";
    os << "modules:\n";
    for (std::size_t k = 0; k < r.decomposition.modules.size(); ++k) {
        const auto& m = r.decomposition.modules[k];
        os << "  (rho,tau,d)=(" << m.rho << "," << m.tau << "," << m.d << ") dim " << m.dim()
           << " r = " << r.locals[k].r << "\n";
    }
    os << "max boxtimes relation residual: " << r.global_relations.max_residual << "\n";
    os << "main theorem residuals: A " << r.main_theorem.residual_A << ", A* "
       << r.main_theorem.residual_Astar << "\n";
    os << "all certifications passed\n";
    return os.str();
}

int run_analyze(const CommonFlags& flags, bool stop_after_decompose, bool stop_after_fit) {
    Graph g = load_from_flags(flags);
    if (stop_after_fit || stop_after_decompose) {
        // partial pipelines share the front end with analyze
        PipelineResult r;
        r.graph = g;
        r.dist = distances(g);
        if (diameter(r.dist) < 3)
            throw NotDistanceRegularError("diameter D = " + std::to_string(diameter(r.dist)) +
                                          " < 3; the pipeline requires D >= 3");
        r.inter = check_distance_regular(g, r.dist);
        r.spectral = build_spectral_data(g, r.dist, r.inter, flags.opt.tol);
        r.orderings = find_qpoly_orderings(r.spectral, flags.opt.tol);
        if (r.orderings.empty()) throw NotQPolynomialError("no Q-polynomial ordering exists");
        r.ordering = r.orderings.at(flags.opt.ordering_index);
        r.dual = dual_data(g, r.dist, r.spectral, r.ordering, flags.opt.base_vertex, flags.opt.tol);
        r.params = fit_qracah(r.ordering.theta_seq, r.dual.theta_star, flags.opt.tol);
        json report;
        report["graph"] = {{"n", g.n}, {"D", r.inter.D}, {"intersection_array", r.inter.intersection_array()}};
        report["qracah"] = {{"q", complex_json(r.params.q)},       {"eta", complex_json(r.params.eta)},
                            {"u", complex_json(r.params.u)},       {"v", complex_json(r.params.v)},
                            {"eta_star", complex_json(r.params.eta_star)},
                            {"u_star", complex_json(r.params.u_star)},
                            {"v_star", complex_json(r.params.v_star)},
                            {"fit_residual", r.params.fit_residual}};
        std::ostringstream text;
        text << "q = " << r.params.q << " eta = " << r.params.eta << " u = " << r.params.u
             << " v = " << r.params.v << "\n";
        if (stop_after_decompose) {
            r.decomposition = decompose(r.spectral.A[1], r.dual.Astar, r.spectral, r.dual, r.ordering,
                                        flags.opt.seed, flags.opt.tol, flags.opt.allow_nonthin);
            json modules = json::array();
            for (const auto& m : r.decomposition.modules) {
                modules.push_back({{"rho", m.rho}, {"tau", m.tau}, {"d", m.d}, {"dim", m.dim()},
                                   {"thin", m.thin}, {"disp1", m.disp1}, {"disp2", m.disp2}});
                text << "(rho,tau,d)=(" << m.rho << "," << m.tau << "," << m.d << ") dim " << m.dim()
                     << (m.thin ? " thin" : " NON-THIN") << "\n";
            }
            report["modules"] = modules;
        }
        emit(report, flags, text.str());
        return 0;
    }
    PipelineResult r = analyze(g, flags.opt);
    emit(r.report, flags, text_summary_analyze(r));
    return 0;
}

int run_relations(const CommonFlags& flags, int d, const std::string& q_text, const std::string& r_text) {
    cplx q = parse_complex(q_text);
    cplx rr = parse_complex(r_text);
    BoxImages box = local_generators(d, rr, q);
    RelationReport base = verify_relations(box);
    BoxImages rho = rho_twist(box);
    BoxImages flip = flip_twist(box);
    RelationReport rho_rep = verify_relations(rho);
    RelationReport flip_rep = verify_relations(flip);
    // rho^4 must return the images exactly
    BoxImages rho4 = rho_twist(rho_twist(rho_twist(rho)));
    double rho4_gap = 0.0;
    for (const auto& [key, mat] : box.x) rho4_gap = std::max(rho4_gap, (mat - rho4.x.at(key)).norm());

    json report;
    json per = json::object();
    for (const auto& rel : base.residuals) per[rel.name] = rel.residual;
    report["params"] = {{"d", d}, {"q", complex_json(q)}, {"r", complex_json(rr)}};
    report["relations"] = {{"max_residual", base.max_residual}, {"per_relation", per}};
    report["twists"] = {{"rho_max_residual", rho_rep.max_residual},
                        {"flip_max_residual", flip_rep.max_residual},
                        {"rho4_identity_gap", rho4_gap}};
    std::vector<double> uq_res;
    for (int i = 0; i < 4; ++i) {
        UqEquitable eq = embed_uq(i, box);
        auto rep_eq = verify_uq_equitable(eq);
        auto rep_ch = verify_uq_chevalley(equitable_to_chevalley(eq));
        uq_res.push_back(std::max(rep_eq.max_residual, rep_ch.max_residual));
    }
    report["uq"] = {{"embedding_max_residuals", uq_res}};

    std::ostringstream text;
    text << "d=" << d << " q=" << q << " r=" << rr << "\n";
    for (const auto& rel : base.residuals) text << "  " << rel.name << ": " << rel.residual << "\n";
    text << "max residual: " << base.max_residual << "\n";
    emit(report, flags, text.str());

    double worst = std::max({base.max_residual, rho_rep.max_residual, flip_rep.max_residual, rho4_gap});
    for (double v : uq_res) worst = std::max(worst, v);
    return worst < flags.opt.tol.tol_rel ? 0 : kExitCertification;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"q-tetrahedron certification toolkit for distance-regular graphs of q-Racah type"};
    app.require_subcommand(1);

    CommonFlags analyze_flags, decompose_flags, fit_flags, rel_flags;
    auto* analyze_cmd = app.add_subcommand("analyze", "run the full certification pipeline");
    add_common(analyze_cmd, analyze_flags, true);
    auto* decompose_cmd = app.add_subcommand("decompose", "stop after the T-module decomposition");
    add_common(decompose_cmd, decompose_flags, true);
    auto* fit_cmd = app.add_subcommand("fit", "stop after the q-Racah parameter fit");
    add_common(fit_cmd, fit_flags, true);

    auto* rel_cmd = app.add_subcommand("relations", "standalone evaluation-module lab");
    int rel_d = 0;
    std::string rel_q = "1.1", rel_r = "2.0";
    rel_cmd->add_option("--d", rel_d, "module diameter")->required();
    rel_cmd->add_option("--q", rel_q, "q, as a+bi or polar:m,a")->required();
    rel_cmd->add_option("--r", rel_r, "r, as a+bi or polar:m,a")->required();
    add_common(rel_cmd, rel_flags, false);

    try {
        app.parse(argc, argv);
        if (analyze_cmd->parsed()) return run_analyze(analyze_flags, false, false);
        if (decompose_cmd->parsed()) return run_analyze(decompose_flags, true, false);
        if (fit_cmd->parsed()) return run_analyze(fit_flags, false, true);
        if (rel_cmd->parsed()) return run_relations(rel_flags, rel_d, rel_q, rel_r);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const qtet::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const qtet::NotDistanceRegularError& e) {
        std::cerr << "NotDistanceRegular: " << e.what() << "\n";
        return kExitNotDrg;
    } catch (const qtet::NotQPolynomialError& e) {
        std::cerr << "NotQPolynomial: " << e.what() << "\n";
        return kExitNotQPoly;
    } catch (const qtet::NotQRacahTypeError& e) {
        std::cerr << "NotQRacahType: " << e.what() << "\n";
        return kExitNotQRacah;
    } catch (const qtet::ThinnessViolationError& e) {
        std::cerr << "ThinnessViolation: " << e.what() << "\n";
        return kExitNonThin;
    } catch (const qtet::ExcludedLocusError& e) {
        std::cerr << "ExcludedLocus: " << e.what() << "\n";
        return kExitExcludedLocus;
    } catch (const qtet::CertificationError& e) {
        std::cerr << "CertificationFailure: " << e.what() << "\n";
        return kExitCertification;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return 0;
}
