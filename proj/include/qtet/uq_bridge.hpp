#ifndef QTET_UQ_BRIDGE_HPP
#define QTET_UQ_BRIDGE_HPP

#include <string>
#include <vector>

#include "qtet/qtet_rep.hpp"
#include "qtet/types.hpp"

namespace qtet {

/// Equitable-presentation images of U_q(sl2-hat): x_i^{+-1}, y_i, z_i.
struct UqEquitable {
    cplx q;
    MatC x0, x0_inv, x1, x1_inv, y0, y1, z0, z1;
};

/// Chevalley-presentation images: K_i^{+-1}, e_i^{+-}.
struct UqChevalley {
    cplx q;
    MatC K0, K0_inv, K1, K1_inv, e0p, e0m, e1p, e1m;
};

/// The embedding of the equitable generators through the standard generators
/// of the q-tetrahedron algebra, for each i in Z_4.
inline UqEquitable embed_uq(int i, const BoxImages& box) {
    UqEquitable eq;
    eq.q = box.q;
    eq.x1 = box.get(i, i + 2);
    eq.x1_inv = box.get(i + 2, i);
    eq.y1 = box.get(i + 2, i + 3);
    eq.z1 = box.get(i + 3, i);
    eq.x0 = box.get(i + 2, i);
    eq.x0_inv = box.get(i, i + 2);
    eq.y0 = box.get(i, i + 1);
    eq.z0 = box.get(i + 1, i + 2);
    return eq;
}

inline UqChevalley equitable_to_chevalley(const UqEquitable& eq) {
    const cplx q = eq.q;
    const int m = static_cast<int>(eq.x0.rows());
    const MatC I = MatC::Identity(m, m);
    const cplx factor = 1.0 / (q * (q - 1.0 / q) * (q - 1.0 / q));
    UqChevalley ch;
    ch.q = q;
    ch.K0 = eq.x0;
    ch.K0_inv = eq.x0_inv;
    ch.K1 = eq.x1;
    ch.K1_inv = eq.x1_inv;
    ch.e0m = eq.y0 - eq.x0_inv;
    ch.e1m = eq.y1 - eq.x1_inv;
    ch.e0p = (I - eq.x0 * eq.z0) * factor;
    ch.e1p = (I - eq.x1 * eq.z1) * factor;
    return ch;
}

inline UqEquitable chevalley_to_equitable(const UqChevalley& ch) {
    const cplx q = ch.q;
    const cplx factor = q * (q - 1.0 / q) * (q - 1.0 / q);
    UqEquitable eq;
    eq.q = q;
    eq.x0 = ch.K0;
    eq.x0_inv = ch.K0_inv;
    eq.x1 = ch.K1;
    eq.x1_inv = ch.K1_inv;
    eq.y0 = ch.K0_inv + ch.e0m;
    eq.y1 = ch.K1_inv + ch.e1m;
    eq.z0 = ch.K0_inv - ch.K0_inv * ch.e0p * factor;
    eq.z1 = ch.K1_inv - ch.K1_inv * ch.e1p * factor;
    return eq;
}

struct UqRelationReport {
    std::vector<RelationResidual> residuals;
    double max_residual = 0.0;
};

namespace detail {

inline void uq_record(UqRelationReport& report, const std::string& name, const MatC& lhs,
                      const MatC& rhs) {
    double res = rel_residual(lhs, rhs);
    report.residuals.push_back({name, res});
    report.max_residual = std::max(report.max_residual, res);
}

inline MatC serre_lhs(cplx q, const MatC& a, const MatC& b) {
    cplx br3 = q_bracket(q, 3);
    return a * a * a * b - br3 * (a * a * b * a) + br3 * (a * b * a * a) - b * a * a * a;
}

} // namespace detail

/// Every relation of the equitable presentation, as normalized residuals.
inline UqRelationReport verify_uq_equitable(const UqEquitable& eq) {
    const cplx q = eq.q;
    const int m = static_cast<int>(eq.x0.rows());
    const MatC I = MatC::Identity(m, m);
    const MatC Z = MatC::Zero(m, m);
    UqRelationReport rep;
    auto weyl = [&](const MatC& a, const MatC& b) { return MatC((q * a * b - (1.0 / q) * b * a) / (q - 1.0 / q)); };

    detail::uq_record(rep, "x0*x0inv=1", eq.x0 * eq.x0_inv, I);
    detail::uq_record(rep, "x1*x1inv=1", eq.x1 * eq.x1_inv, I);
    MatC central = eq.x0 * eq.x1;
    for (auto [name, g] : {std::pair{"y0", &eq.y0}, {"y1", &eq.y1}, {"z0", &eq.z0}, {"z1", &eq.z1},
                           {"x0", &eq.x0}, {"x1", &eq.x1}})
        detail::uq_record(rep, std::string("[x0x1,") + name + "]=0", central * (*g) - (*g) * central, Z);
    detail::uq_record(rep, "weyl(x0,y0)", weyl(eq.x0, eq.y0), I);
    detail::uq_record(rep, "weyl(x1,y1)", weyl(eq.x1, eq.y1), I);
    detail::uq_record(rep, "weyl(y0,z0)", weyl(eq.y0, eq.z0), I);
    detail::uq_record(rep, "weyl(y1,z1)", weyl(eq.y1, eq.z1), I);
    detail::uq_record(rep, "weyl(z0,x0)", weyl(eq.z0, eq.x0), I);
    detail::uq_record(rep, "weyl(z1,x1)", weyl(eq.z1, eq.x1), I);
    MatC inv_central = eq.x0_inv * eq.x1_inv;
    detail::uq_record(rep, "weyl(z0,y1)", weyl(eq.z0, eq.y1), inv_central);
    detail::uq_record(rep, "weyl(z1,y0)", weyl(eq.z1, eq.y0), inv_central);
    detail::uq_record(rep, "serre(y0,y1)", detail::serre_lhs(q, eq.y0, eq.y1), Z);
    detail::uq_record(rep, "serre(y1,y0)", detail::serre_lhs(q, eq.y1, eq.y0), Z);
    detail::uq_record(rep, "serre(z0,z1)", detail::serre_lhs(q, eq.z0, eq.z1), Z);
    detail::uq_record(rep, "serre(z1,z0)", detail::serre_lhs(q, eq.z1, eq.z0), Z);
    return rep;
}

/// Every relation of the Chevalley presentation, as normalized residuals.
inline UqRelationReport verify_uq_chevalley(const UqChevalley& ch) {
    const cplx q = ch.q;
    const int m = static_cast<int>(ch.K0.rows());
    const MatC I = MatC::Identity(m, m);
    const MatC Z = MatC::Zero(m, m);
    UqRelationReport rep;
    const cplx q2 = q * q;

    detail::uq_record(rep, "K0*K0inv=1", ch.K0 * ch.K0_inv, I);
    detail::uq_record(rep, "K1*K1inv=1", ch.K1 * ch.K1_inv, I);
    detail::uq_record(rep, "[K0,K1]=0", ch.K0 * ch.K1 - ch.K1 * ch.K0, Z);
    struct Gen { const MatC* e; int i; int sign; };
    std::vector<Gen> gens = {{&ch.e0p, 0, +1}, {&ch.e0m, 0, -1}, {&ch.e1p, 1, +1}, {&ch.e1m, 1, -1}};
    for (const auto& [Ki, Ki_inv, ki] :
         {std::tuple{&ch.K0, &ch.K0_inv, 0}, {&ch.K1, &ch.K1_inv, 1}})
        for (const auto& g : gens) {
            // K_i e_j^pm K_i^-1 = q^{+-2} e_j^pm (same i), q^{-+2} (i != j)
            cplx scale = (ki == g.i) ? (g.sign > 0 ? q2 : 1.0 / q2) : (g.sign > 0 ? 1.0 / q2 : q2);
            std::string name = "K" + std::to_string(ki) + " conj e" + std::to_string(g.i) +
                               (g.sign > 0 ? "+" : "-");
            detail::uq_record(rep, name, (*Ki) * (*g.e) * (*Ki_inv), scale * (*g.e));
        }
    detail::uq_record(rep, "[e0+,e0-]", ch.e0p * ch.e0m - ch.e0m * ch.e0p,
                      (ch.K0 - ch.K0_inv) / (q - 1.0 / q));
    detail::uq_record(rep, "[e1+,e1-]", ch.e1p * ch.e1m - ch.e1m * ch.e1p,
                      (ch.K1 - ch.K1_inv) / (q - 1.0 / q));
    detail::uq_record(rep, "[e0+,e1-]=0", ch.e0p * ch.e1m - ch.e1m * ch.e0p, Z);
    detail::uq_record(rep, "[e0-,e1+]=0", ch.e0m * ch.e1p - ch.e1p * ch.e0m, Z);
    detail::uq_record(rep, "serre(e0+,e1+)", detail::serre_lhs(q, ch.e0p, ch.e1p), Z);
    detail::uq_record(rep, "serre(e1+,e0+)", detail::serre_lhs(q, ch.e1p, ch.e0p), Z);
    detail::uq_record(rep, "serre(e0-,e1-)", detail::serre_lhs(q, ch.e0m, ch.e1m), Z);
    detail::uq_record(rep, "serre(e1-,e0-)", detail::serre_lhs(q, ch.e1m, ch.e0m), Z);
    return rep;
}

} // namespace qtet

#endif
