#ifndef QTET_QTET_REP_HPP
#define QTET_QTET_REP_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qtet/qracah.hpp"
#include "qtet/subconstituent.hpp"
#include "qtet/types.hpp"

namespace qtet {

/// Images of the eight standard generators x_{ij} (i,j in Z_4, j-i in {1,2}).
struct BoxImages {
    cplx q;
    std::map<std::pair<int, int>, MatC> x;

    const MatC& get(int i, int j) const { return x.at({((i % 4) + 4) % 4, ((j % 4) + 4) % 4}); }
    MatC& at(int i, int j) { return x[{((i % 4) + 4) % 4, ((j % 4) + 4) % 4}]; }
    int size() const { return static_cast<int>(x.begin()->second.rows()); }
};

struct RelationResidual {
    std::string name;
    double residual;
};

struct RelationReport {
    std::vector<RelationResidual> residuals; // always 20 entries
    double max_residual = 0.0;

    bool pass(double tol) const { return max_residual < tol; }
};

inline cplx q_bracket(cplx q, int n) { return (std::pow(q, n) - std::pow(q, -n)) / (q - 1.0 / q); }

namespace detail {

/// Check the excluded locus for the evaluation parameters: q^{2i} != 1 for
/// the relevant range and r not among q^{d-1}, q^{d-3}, ..., q^{1-d}.
inline void check_local_params(int d, cplx q, cplx r) {
    if (std::abs(q) < 1e-12) throw ExcludedLocusError("q must be nonzero");
    for (int i = 1; i <= std::max(d, 1); ++i)
        if (std::abs(std::pow(q, 2 * i) - cplx(1.0)) < 1e-9)
            throw ExcludedLocusError("q^{2i} = 1 at i = " + std::to_string(i) + "; excluded");
    if (std::abs(r) < 1e-12) throw ExcludedLocusError("r must be nonzero");
    if (r_excluded(q, d, r))
        throw ExcludedLocusError("r lies on the excluded locus q^{d-1}, q^{d-3}, ..., q^{1-d}");
}

} // namespace detail

/// The eight generator matrices on a (d+1)-dimensional evaluation module,
/// written on the u-basis. Products over the running index are accumulated
/// in index order.
inline BoxImages local_generators(int d, cplx r, cplx q) {
    detail::check_local_params(d, q, r);
    const int m = d + 1;
    BoxImages box;
    box.q = q;
    auto qp = [&](int e) { return std::pow(q, e); };

    MatC x01 = MatC::Zero(m, m), x12 = MatC::Zero(m, m), x23 = MatC::Zero(m, m),
         x30 = MatC::Zero(m, m), x13 = MatC::Zero(m, m), x31 = MatC::Zero(m, m),
         x02 = MatC::Zero(m, m), x20 = MatC::Zero(m, m);

    for (int i = 0; i <= d; ++i) {
        x13(i, i) = qp(2 * i - d);
        x31(i, i) = qp(d - 2 * i);
        if (i < d) {
            x01(i, i) = qp(d - 2 * i);
            x01(i + 1, i) = (qp(d) - qp(d - 2 * i - 2)) * qp(1 - d) * r;
            x12(i, i) = qp(2 * i - d);
            x12(i + 1, i) = qp(-d) - qp(2 * i + 2 - d);
        }
        if (i > 0) {
            x23(i, i) = qp(2 * i - d);
            x23(i - 1, i) = qp(d) - qp(2 * i - 2 - d);
            x30(i, i) = qp(d - 2 * i);
            x30(i - 1, i) = (qp(-d) - qp(d - 2 * i + 2)) * qp(d - 1) / r;
        }
    }
    x01(d, d) = qp(-d);
    x12(d, d) = qp(d);
    x23(0, 0) = qp(-d);
    x30(0, 0) = qp(d);

    // x02 on u_i, 0 <= i <= d-1
    for (int i = 0; i < d; ++i) {
        {
            cplx num = qp(d - 2 * i);
            for (int t = 1; t <= i; ++t) num *= 1.0 - qp(2 * d - 2 * i + 2 * t);
            cplx den = 1.0;
            for (int t = 0; t <= i; ++t) den *= 1.0 - r * qp(d - 1 - 2 * i + 2 * t);
            x02(0, i) = (1.0 - r * qp(-d - 1)) * num / den;
        }
        for (int h = 1; h <= i; ++h) {
            cplx num = qp(d - 2 * i);
            for (int t = 1; t <= i - h; ++t) num *= 1.0 - qp(2 * d - 2 * i + 2 * t);
            cplx den = 1.0;
            for (int t = 0; t <= i - h + 1; ++t) den *= 1.0 - r * qp(d - 1 - 2 * i + 2 * t);
            x02(h, i) = (1.0 - r * qp(d + 1)) * (1.0 - r * qp(-d - 1)) * num / den;
        }
        x02(i + 1, i) = (qp(2 * i + 2) - 1.0) * r / (qp(2 * i + 1) * (1.0 - r * qp(d - 1 - 2 * i)));
    }
    // x02 on u_d
    {
        cplx num = qp(-d);
        for (int t = 1; t <= d; ++t) num *= 1.0 - qp(2 * t);
        cplx den = 1.0;
        for (int t = 0; t <= d - 1; ++t) den *= 1.0 - r * qp(1 - d + 2 * t);
        x02(0, d) = num / den;
        for (int h = 1; h <= d; ++h) {
            cplx numh = qp(-d);
            for (int t = 1; t <= d - h; ++t) numh *= 1.0 - qp(2 * t);
            cplx denh = 1.0;
            for (int t = 0; t <= d - h; ++t) denh *= 1.0 - r * qp(1 - d + 2 * t);
            x02(h, d) = (1.0 - r * qp(d + 1)) * numh / denh;
        }
    }
    // x20 on u_0
    {
        for (int h = 0; h < d; ++h) {
            cplx num = std::pow(r, h) * qp(h - d * h - d);
            for (int t = 1; t <= h; ++t) num *= 1.0 - qp(2 * t);
            cplx den = 1.0;
            for (int t = 0; t <= h; ++t) den *= 1.0 - r * qp(1 - d + 2 * t);
            x20(h, 0) = (1.0 - r * qp(d + 1)) * num / den;
        }
        cplx num = std::pow(r, d) * qp(-d * d);
        for (int t = 1; t <= d; ++t) num *= 1.0 - qp(2 * t);
        cplx den = 1.0;
        for (int t = 0; t <= d - 1; ++t) den *= 1.0 - r * qp(1 - d + 2 * t);
        x20(d, 0) = num / den;
    }
    // x20 on u_i, 1 <= i <= d
    for (int i = 1; i <= d; ++i) {
        x20(i - 1, i) = (qp(d) - qp(2 * i - 2 - d)) / (1.0 - r * qp(2 * i - d - 1));
        for (int h = i; h < d; ++h) {
            cplx num = std::pow(r, h - i) * qp((d + 1) * i - (d - 1) * h - d);
            for (int t = 1; t <= h - i; ++t) num *= 1.0 - qp(2 * i + 2 * t);
            cplx den = 1.0;
            for (int t = 0; t <= h - i + 1; ++t) den *= 1.0 - r * qp(2 * i - d - 1 + 2 * t);
            x20(h, i) += (1.0 - r * qp(d + 1)) * (1.0 - r * qp(-d - 1)) * num / den;
        }
        cplx num = std::pow(r, d - i) * qp(d * i + i - d * d);
        for (int t = 1; t <= d - i; ++t) num *= 1.0 - qp(2 * i + 2 * t);
        cplx den = 1.0;
        for (int t = 0; t <= d - i; ++t) den *= 1.0 - r * qp(2 * i - d - 1 + 2 * t);
        x20(d, i) += (1.0 - r * qp(-d - 1)) * num / den;
    }

    box.at(0, 1) = std::move(x01);
    box.at(1, 2) = std::move(x12);
    box.at(2, 3) = std::move(x23);
    box.at(3, 0) = std::move(x30);
    box.at(0, 2) = std::move(x02);
    box.at(2, 0) = std::move(x20);
    box.at(1, 3) = std::move(x13);
    box.at(3, 1) = std::move(x31);
    return box;
}

/// All twenty defining relations: 4 inverse pairs, 12 q-Weyl relations, and
/// 4 cubic q-Serre relations.
inline RelationReport verify_relations(const BoxImages& box) {
    const cplx q = box.q;
    const int m = box.size();
    const MatC I = MatC::Identity(m, m);
    RelationReport report;

    auto record = [&](const std::string& name, const MatC& lhs, const MatC& rhs) {
        double res = rel_residual(lhs, rhs);
        report.residuals.push_back({name, res});
        report.max_residual = std::max(report.max_residual, res);
    };
    auto label = [](int i, int j) { return "x" + std::to_string(i) + std::to_string(j); };

    for (auto [i, j] : {std::pair{0, 2}, {2, 0}, {1, 3}, {3, 1}})
        record(label(i, j) + "*" + label(j, i) + "=1", box.get(i, j) * box.get(j, i), I);

    auto weyl = [&](int h, int i, int j) {
        const MatC& Xhi = box.get(h, i);
        const MatC& Xij = box.get(i, j);
        record("weyl(" + label(h, i) + "," + label(i, j) + ")",
               (q * Xhi * Xij - (1.0 / q) * Xij * Xhi) / (q - 1.0 / q), I);
    };
    for (int h = 0; h < 4; ++h) {
        weyl(h, h + 1, h + 2); // pattern (1,1)
        weyl(h, h + 1, h + 3); // pattern (1,2)
        weyl(h, h + 2, h + 3); // pattern (2,1)
    }

    const cplx br3 = q_bracket(q, 3);
    for (int h = 0; h < 4; ++h) {
        const MatC& a = box.get(h, h + 1);
        const MatC& b = box.get(h + 2, h + 3);
        record("serre(" + label(h, h + 1) + "," + label(h + 2, h + 3) + ")",
               a * a * a * b - br3 * (a * a * b * a) + br3 * (a * b * a * a), b * a * a * a);
    }
    return report;
}

/// The automorphism sending x_{ij} to x_{i+1,j+1}.
inline BoxImages rho_twist(const BoxImages& box) {
    BoxImages out;
    out.q = box.q;
    for (const auto& [key, mat] : box.x) out.at(key.first + 1, key.second + 1) = mat;
    return out;
}

/// The automorphism sending each x_{ij} to -x_{ij}.
inline BoxImages flip_twist(const BoxImages& box) {
    BoxImages out;
    out.q = box.q;
    for (const auto& [key, mat] : box.x) out.x[key] = -mat;
    return out;
}

/// Combine per-module images into matrices on V: each global generator acts
/// blockwise through the modules' u-bases. U holds all u-basis columns; the
/// global image is U blockdiag(local) U^{-1}.
inline BoxImages assemble_theta(const std::vector<MatC>& u_bases, const std::vector<BoxImages>& locals,
                                cplx q) {
    if (u_bases.size() != locals.size() || u_bases.empty())
        throw CertificationError("assemble_theta: module/image count mismatch");
    int n = static_cast<int>(u_bases[0].rows());
    int total = 0;
    for (const auto& U : u_bases) total += static_cast<int>(U.cols());
    if (total != n) throw CertificationError("assemble_theta: u-bases do not span V");

    MatC U(n, n);
    int col = 0;
    for (const auto& Ub : u_bases) {
        U.middleCols(col, Ub.cols()) = Ub;
        col += static_cast<int>(Ub.cols());
    }
    Eigen::PartialPivLU<MatC> lu(U);

    BoxImages global;
    global.q = q;
    for (const auto& [key, unused] : locals[0].x) {
        MatC block = MatC::Zero(n, n);
        int offset = 0;
        for (const auto& loc : locals) {
            int m = loc.x.at(key).rows();
            block.block(offset, offset, m, m) = loc.x.at(key);
            offset += m;
        }
        global.x[key] = U * block * lu.solve(MatC::Identity(n, n));
    }
    return global;
}

struct MainTheoremReport {
    double residual_A = 0.0;
    double residual_Astar = 0.0;
    std::vector<std::pair<double, double>> local_residuals; // per module (A, A*)
};

/// Certify A = eta I + u Phi Psi^{-1} X01 + v Psi Phi^{-1} X12 and the A*
/// analogue with Phi Psi and Psi^{-1} Phi^{-1}; also the per-module local
/// form with explicit scalars q^{2 tau + d - D} etc.
inline MainTheoremReport verify_main_theorem(const MatR& A, const MatR& Astar, const MatC& Phi,
                                             const MatC& Psi, const BoxImages& global,
                                             const QRacahParams& p,
                                             const std::vector<LocalModuleData>& locals,
                                             const std::vector<BoxImages>& local_images) {
    const int n = static_cast<int>(A.rows());
    MatC PhiInv = Phi.inverse();
    MatC PsiInv = Psi.inverse();
    MainTheoremReport report;
    MatC recon_A = p.eta * MatC::Identity(n, n) + p.u * Phi * PsiInv * global.get(0, 1) +
                   p.v * Psi * PhiInv * global.get(1, 2);
    MatC recon_As = p.eta_star * MatC::Identity(n, n) + p.u_star * Phi * Psi * global.get(2, 3) +
                    p.v_star * PsiInv * PhiInv * global.get(3, 0);
    report.residual_A = (recon_A - A.cast<cplx>()).norm() / std::max(1.0, A.norm());
    report.residual_Astar = (recon_As - Astar.cast<cplx>()).norm() / std::max(1.0, Astar.norm());

    for (std::size_t k = 0; k < locals.size(); ++k) {
        const auto& loc = locals[k];
        const auto& img = local_images[k];
        const int m = loc.d + 1;
        // compressed operators on the u-basis follow the recurrences, so the
        // local identity is checked directly on the local matrices
        MatC A_loc = MatC::Zero(m, m);
        MatC As_loc = MatC::Zero(m, m);
        for (int i = 0; i <= loc.d; ++i) {
            A_loc(i, i) = p.theta(loc.tau + loc.d - i);
            if (i < loc.d) A_loc(i + 1, i) = loc.gamma[i];
            As_loc(i, i) = p.theta_star(loc.rho + i);
            if (i > 0) As_loc(i - 1, i) = loc.phi2[i - 1] / loc.gamma[i - 1];
        }
        MatC lhs = p.eta * MatC::Identity(m, m) +
                   p.u * std::pow(p.q, 2 * loc.tau + loc.d - p.D) * img.get(0, 1) +
                   p.v * std::pow(p.q, p.D - loc.d - 2 * loc.tau) * img.get(1, 2);
        MatC lhs2 = p.eta_star * MatC::Identity(m, m) +
                    p.u_star * std::pow(p.q, 2 * loc.rho + loc.d - p.D) * img.get(2, 3) +
                    p.v_star * std::pow(p.q, p.D - loc.d - 2 * loc.rho) * img.get(3, 0);
        report.local_residuals.push_back({rel_residual(lhs, A_loc), rel_residual(lhs2, As_loc)});
    }
    return report;
}

} // namespace qtet

#endif
