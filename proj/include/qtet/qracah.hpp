#ifndef QTET_QRACAH_HPP
#define QTET_QRACAH_HPP

#include <cmath>
#include <vector>

#include "qtet/types.hpp"

namespace qtet {

/// Parameters of the q-Racah eigenvalue forms
/// theta_i = eta + u q^{2i-D} + v q^{D-2i} (and starred analogue).
struct QRacahParams {
    cplx q, eta, u, v, eta_star, u_star, v_star;
    int D = 0;
    double fit_residual = 0.0;

    cplx theta(int i) const { return eta + u * std::pow(q, 2 * i - D) + v * std::pow(q, D - 2 * i); }
    cplx theta_star(int i) const {
        return eta_star + u_star * std::pow(q, 2 * i - D) + v_star * std::pow(q, D - 2 * i);
    }
};

/// Split-basis data of one thin irreducible module: the v- and u-bases, the
/// measured second split sequence, the first split sequence from the
/// parameter formulas, the gamma scaling factors and the module scalar r.
struct LocalModuleData {
    int rho = 0, tau = 0, d = 0;
    MatC v_basis;             // columns v_0..v_d
    MatC u_basis;             // columns u_0..u_d
    std::vector<cplx> phi2;   // measured second split sequence, phi2[i-1] = phi_i
    std::vector<cplx> phi1;   // first split sequence from the formula
    std::vector<cplx> gamma;  // gamma[i-1] = gamma_i
    cplx r = 1.0;
    bool r_ambiguous = false;
};

namespace detail {

/// beta from the invariant ratio (theta_{i-2}-theta_{i+1})/(theta_{i-1}-theta_i) = beta+1,
/// checked constant across all admissible i.
inline double beta_from_sequence(const std::vector<double>& theta, double tol) {
    const int D = static_cast<int>(theta.size()) - 1;
    double beta = 0.0;
    bool have = false;
    for (int i = 2; i + 1 <= D; ++i) {
        double denom = theta[i - 1] - theta[i];
        if (std::abs(denom) < 1e-12)
            throw NotQRacahTypeError("eigenvalue sequence has equal consecutive entries");
        double ratio = (theta[i - 2] - theta[i + 1]) / denom - 1.0;
        if (!have) {
            beta = ratio;
            have = true;
        } else if (std::abs(ratio - beta) > tol * std::max(1.0, std::abs(beta))) {
            throw NotQRacahTypeError("eigenvalue ratio (th_{i-2}-th_{i+1})/(th_{i-1}-th_i) is not constant: beta candidates " +
                                     std::to_string(beta) + " and " + std::to_string(ratio));
        }
    }
    if (!have) throw NotQRacahTypeError("sequence too short to determine beta");
    return beta;
}

/// Canonical root of q^4 - beta q^2 + 1 = 0: among the four roots, keep those
/// with argument in (0, pi], then take the smallest argument, preferring
/// modulus >= 1 on ties.
inline cplx canonical_q(double beta) {
    cplx disc = std::sqrt(cplx(beta * beta - 4.0, 0.0));
    cplx q2a = (cplx(beta, 0.0) + disc) / 2.0;
    cplx q2b = (cplx(beta, 0.0) - disc) / 2.0;
    std::vector<cplx> candidates;
    for (cplx q2 : {q2a, q2b}) {
        cplx root = std::sqrt(q2);
        candidates.push_back(root);
        candidates.push_back(-root);
    }
    const double eps = 1e-12;
    cplx best = 0.0;
    bool found = false;
    for (cplx c : candidates) {
        double arg = std::arg(c);
        if (!(arg > eps && arg <= M_PI + eps)) continue;
        if (!found) {
            best = c;
            found = true;
            continue;
        }
        double barg = std::arg(best);
        if (arg < barg - eps || (std::abs(arg - barg) <= eps && std::abs(c) > std::abs(best)))
            best = c;
    }
    if (!found)
        throw NotQRacahTypeError("no canonical branch for q (beta = " + std::to_string(beta) + ")");
    return best;
}

/// Least-squares fit of eta, u, v over the basis {1, q^{2i-D}, q^{D-2i}}.
inline std::tuple<cplx, cplx, cplx, double> fit_eta_uv(cplx q, const std::vector<double>& theta) {
    const int D = static_cast<int>(theta.size()) - 1;
    MatC mat(D + 1, 3);
    VecC rhs(D + 1);
    for (int i = 0; i <= D; ++i) {
        mat(i, 0) = 1.0;
        mat(i, 1) = std::pow(q, 2 * i - D);
        mat(i, 2) = std::pow(q, D - 2 * i);
        rhs(i) = theta[i];
    }
    VecC sol = mat.colPivHouseholderQr().solve(rhs);
    double residual = (mat * sol - rhs).norm() / std::max(1.0, rhs.norm());
    return {sol(0), sol(1), sol(2), residual};
}

} // namespace detail

/// Fit the q-Racah parametrization to the eigenvalue and dual eigenvalue
/// sequences, enforcing a single shared q. Throws NotQRacahTypeError with the
/// failing constraint named.
inline QRacahParams fit_qracah(const std::vector<double>& theta, const std::vector<double>& theta_star,
                               const Tolerances& tol) {
    const int D = static_cast<int>(theta.size()) - 1;
    if (D < 3) throw NotQRacahTypeError("q-Racah fit requires D >= 3, got D = " + std::to_string(D));
    if (theta_star.size() != theta.size())
        throw NotQRacahTypeError("eigenvalue and dual eigenvalue sequences differ in length");

    double beta = detail::beta_from_sequence(theta, tol.tol_fit);
    double beta_star = detail::beta_from_sequence(theta_star, tol.tol_fit);
    if (std::abs(beta - beta_star) > tol.tol_fit * std::max(1.0, std::abs(beta)))
        throw NotQRacahTypeError("primal and dual sequences demand incompatible beta: " +
                                 std::to_string(beta) + " vs " + std::to_string(beta_star));

    if (std::abs(beta - 2.0) < 1e-9)
        throw NotQRacahTypeError("beta = 2 gives q^2 = 1, excluded by the q-Racah constraints");

    QRacahParams params;
    params.D = D;
    params.q = detail::canonical_q(beta);
    for (int i = 1; i <= D; ++i)
        if (std::abs(std::pow(params.q, 2 * i) - cplx(1.0)) < 1e-9)
            throw NotQRacahTypeError("q^{2i} = 1 at i = " + std::to_string(i) +
                                     " (q from beta = " + std::to_string(beta) + ")");

    double scale = 0.0;
    for (double t : theta) scale = std::max(scale, std::abs(t));
    for (double t : theta_star) scale = std::max(scale, std::abs(t));

    auto [eta, u, v, res1] = detail::fit_eta_uv(params.q, theta);
    auto [eta_s, u_s, v_s, res2] = detail::fit_eta_uv(params.q, theta_star);
    params.eta = eta;
    params.u = u;
    params.v = v;
    params.eta_star = eta_s;
    params.u_star = u_s;
    params.v_star = v_s;
    params.fit_residual = std::max(res1, res2);
    if (params.fit_residual > tol.tol_fit)
        throw NotQRacahTypeError("q-Racah reproduction residual " + std::to_string(params.fit_residual) +
                                 " exceeds tolerance");
    for (auto [name, val] : {std::pair{"u", u}, {"v", v}, {"u*", u_s}, {"v*", v_s}})
        if (std::abs(val) < 1e-8 * std::max(1.0, scale))
            throw NotQRacahTypeError(std::string("coefficient ") + name + " vanishes in the q-Racah fit");
    return params;
}

namespace detail {

inline MatC orthonormal_span(const MatC& cols) {
    if (cols.cols() == 0) return cols;
    Eigen::JacobiSVD<MatC> svd(cols, Eigen::ComputeThinU);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-9 * std::max(1.0, svd.singularValues()(0))) ++rank;
    return svd.matrixU().leftCols(rank);
}

inline MatC span_intersection(const MatC& U, const MatC& W) {
    MatC P = U * U.adjoint();
    MatC Q = W * W.adjoint();
    MatC PQP = P * Q * P;
    Eigen::SelfAdjointEigenSolver<MatC> solver(0.5 * (PQP + PQP.adjoint()));
    std::vector<int> keep;
    for (int i = 0; i < solver.eigenvalues().size(); ++i)
        if (solver.eigenvalues()(i) >= 1.0 - 1e-8) keep.push_back(i);
    MatC basis(U.rows(), static_cast<int>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) basis.col(static_cast<int>(c)) = solver.eigenvectors().col(keep[c]);
    return basis;
}

/// Eigenvector of M for the eigenvalue closest to lambda.
inline VecC eigvec_for(const MatC& M, cplx lambda) {
    Eigen::ComplexEigenSolver<MatC> solver(M);
    int best = 0;
    double best_gap = std::abs(solver.eigenvalues()(0) - lambda);
    for (int i = 1; i < solver.eigenvalues().size(); ++i) {
        double gap = std::abs(solver.eigenvalues()(i) - lambda);
        if (gap < best_gap) {
            best = i;
            best_gap = gap;
        }
    }
    return solver.eigenvectors().col(best);
}

inline void fix_phase(VecC& v) {
    v.normalize();
    for (int i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > 1e-8) {
            v *= std::conj(v(i)) / std::abs(v(i));
            break;
        }
}

} // namespace qtet::detail

/// Construct the split basis of a thin module from the operators A, A*
/// compressed onto it. theta_sub[i] (resp. theta_star_sub[i]) is the
/// eigenvalue associated with index tau+i (resp. rho+i), 0 <= i <= d.
/// Fills v_basis and the measured second split sequence phi2.
inline LocalModuleData split_basis(const MatC& A_op, const MatC& Astar_op,
                                   const std::vector<cplx>& theta_sub,
                                   const std::vector<cplx>& theta_star_sub, int rho, int tau,
                                   double tol = 1e-8) {
    const int m = static_cast<int>(A_op.rows());
    const int d = m - 1;
    if (static_cast<int>(theta_sub.size()) != m || static_cast<int>(theta_star_sub.size()) != m)
        throw CertificationError("split_basis: eigenvalue sequence length mismatch");
    LocalModuleData local;
    local.rho = rho;
    local.tau = tau;
    local.d = d;

    // eigenvectors of both operators; each eigenspace is 1-dimensional (thin)
    std::vector<VecC> dual_vecs(m), primal_vecs(m);
    for (int i = 0; i <= d; ++i) {
        dual_vecs[i] = detail::eigvec_for(Astar_op, theta_star_sub[i]);
        primal_vecs[i] = detail::eigvec_for(A_op, theta_sub[i]);
    }

    // flag spaces F_i = (dual eigvecs 0..i) cap (primal eigvecs i..d)
    std::vector<MatC> flags(m);
    for (int i = 0; i <= d; ++i) {
        MatC U(m, i + 1), W(m, d - i + 1);
        for (int h = 0; h <= i; ++h) U.col(h) = dual_vecs[h];
        for (int h = i; h <= d; ++h) W.col(h - i) = primal_vecs[h];
        flags[i] = detail::span_intersection(detail::orthonormal_span(U), detail::orthonormal_span(W));
        if (flags[i].cols() != 1)
            throw ThinnessViolationError("flag space F_" + std::to_string(i) + " has dimension " +
                                         std::to_string(flags[i].cols()) + ", expected 1");
    }

    local.v_basis = MatC(m, m);
    VecC v0 = flags[0].col(0);
    detail::fix_phase(v0);
    local.v_basis.col(0) = v0;
    for (int i = 0; i < d; ++i) {
        VecC next = (A_op - theta_sub[d - i] * MatC::Identity(m, m)) * local.v_basis.col(i);
        double drift = (next - flags[i + 1] * (flags[i + 1].adjoint() * next)).norm();
        if (drift > tol * std::max(1.0, next.norm()))
            throw CertificationError("split basis left the flag at step " + std::to_string(i + 1));
        local.v_basis.col(i + 1) = next;
    }
    VecC tail = (A_op - theta_sub[0] * MatC::Identity(m, m)) * local.v_basis.col(d);
    if (tail.norm() > tol * std::max(1.0, local.v_basis.col(d).norm()))
        throw CertificationError("split basis recurrence does not terminate: (A - theta_tau) v_d != 0");

    // read phi_i from A* v_i = theta*_{rho+i} v_i + phi_i v_{i-1}
    for (int i = 1; i <= d; ++i) {
        VecC w = Astar_op * local.v_basis.col(i) - theta_star_sub[i] * local.v_basis.col(i);
        const VecC& prev = local.v_basis.col(i - 1);
        cplx phi = (prev.adjoint() * w)(0) / prev.squaredNorm();
        if ((w - phi * prev).norm() > tol * std::max(1.0, w.norm()))
            throw CertificationError("A* action on the split basis is not bidiagonal at i = " +
                                     std::to_string(i));
        local.phi2.push_back(phi);
    }
    return local;
}

namespace detail {

inline cplx phi_first_formula(const QRacahParams& p, int rho, int tau, int d, cplx r, int i) {
    cplx q = p.q;
    return (std::pow(q, i) - std::pow(q, -i)) * (std::pow(q, d - i + 1) - std::pow(q, i - d - 1)) *
           (std::pow(q, d - i) - std::pow(q, i - 1) / r) *
           (p.u * p.u_star * r * std::pow(q, 2 * tau + 2 * rho + d + i - 2 * p.D) -
            p.v * p.v_star * std::pow(q, 2 * p.D - 2 * d - 2 * tau - 2 * rho + 1 - i));
}

inline cplx phi_second_formula(const QRacahParams& p, int rho, int tau, int d, cplx r, int i) {
    cplx q = p.q;
    return (std::pow(q, i) - std::pow(q, -i)) * (std::pow(q, d - i + 1) - std::pow(q, i - d - 1)) *
           (p.u * r * std::pow(q, 2 * tau + d - p.D + 1 - i) - p.v * std::pow(q, p.D - 2 * d - 2 * tau + i)) *
           (p.u_star * std::pow(q, 2 * rho + d - p.D + i - 1) - p.v_star * std::pow(q, p.D - 2 * rho - i) / r);
}

inline bool r_excluded(cplx q, int d, cplx r, double tol = 1e-8) {
    for (int i = 0; i < d; ++i) {
        cplx bad = std::pow(q, d - 1 - 2 * i);
        if (std::abs(r - bad) < tol * std::max(1.0, std::abs(bad))) return true;
    }
    return false;
}

} // namespace detail

/// Recover the module scalar r from the measured second split sequence: the
/// phi_1 formula is quadratic in r; the accepted root must reproduce every
/// phi_i, keep every first-split phi nonzero, and avoid the excluded locus
/// q^{d-1}, q^{d-3}, ..., q^{1-d}.
inline void recover_r(LocalModuleData& local, const QRacahParams& p, double tol = 1e-9) {
    const int d = local.d;
    if (d == 0) {
        local.r = 1.0; // unconstrained by convention
        return;
    }
    cplx q = p.q;
    cplx c = (q - 1.0 / q) * (std::pow(q, d) - std::pow(q, -d));
    cplx a1 = p.u * std::pow(q, 2 * local.tau + d - p.D);
    cplx b1 = p.v * std::pow(q, p.D - 2 * d - 2 * local.tau + 1);
    cplx a2 = p.u_star * std::pow(q, 2 * local.rho + d - p.D);
    cplx b2 = p.v_star * std::pow(q, p.D - 2 * local.rho - 1);
    // phi_1 = c (a1 a2 r - a1 b2 - a2 b1 + b1 b2 / r)
    cplx alpha = c * a1 * a2;
    cplx beta0 = -c * (a1 * b2 + a2 * b1);
    cplx gamma = c * b1 * b2;
    cplx disc = std::sqrt((beta0 - local.phi2[0]) * (beta0 - local.phi2[0]) - 4.0 * alpha * gamma);
    std::vector<cplx> roots = {(local.phi2[0] - beta0 + disc) / (2.0 * alpha),
                               (local.phi2[0] - beta0 - disc) / (2.0 * alpha)};

    auto validates = [&](cplx r) {
        if (std::abs(r) < 1e-12 || detail::r_excluded(q, d, r)) return false;
        for (int i = 1; i <= d; ++i) {
            cplx predicted = detail::phi_second_formula(p, local.rho, local.tau, d, r, i);
            if (std::abs(predicted - local.phi2[i - 1]) > tol * std::max(1.0, std::abs(local.phi2[i - 1])))
                return false;
            if (std::abs(detail::phi_first_formula(p, local.rho, local.tau, d, r, i)) < 1e-12)
                return false;
        }
        return true;
    };

    bool ok0 = validates(roots[0]);
    bool ok1 = validates(roots[1]) && std::abs(roots[1] - roots[0]) > 1e-12;
    if (!ok0 && !ok1)
        throw CertificationError("neither root of the phi_1 quadratic reproduces the split sequence");
    if (ok0 && ok1) {
        local.r_ambiguous = true;
        // canonical pick by principal argument, then modulus
        cplx r0 = roots[0], r1 = roots[1];
        auto key = [](cplx r) { return std::pair(std::arg(r), -std::abs(r)); };
        local.r = key(r0) <= key(r1) ? r0 : r1;
    } else {
        local.r = ok0 ? roots[0] : roots[1];
    }
    for (int i = 1; i <= d; ++i)
        local.phi1.push_back(detail::phi_first_formula(p, local.rho, local.tau, d, local.r, i));
}

/// gamma_i = (q^i - q^{-i})(u r q^{2 tau + d - D + 1 - i} - v q^{D - 2d - 2 tau + i});
/// u_i = (gamma_1 ... gamma_i)^{-1} v_i. Verifies the A and A* recurrences on
/// the u-basis.
inline void gamma_and_u_basis(LocalModuleData& local, const QRacahParams& p, const MatC& A_op,
                              const MatC& Astar_op, const std::vector<cplx>& theta_sub,
                              const std::vector<cplx>& theta_star_sub, double tol = 1e-9) {
    const int d = local.d;
    cplx q = p.q;
    local.gamma.clear();
    for (int i = 1; i <= d; ++i) {
        cplx g = (std::pow(q, i) - std::pow(q, -i)) *
                 (p.u * local.r * std::pow(q, 2 * local.tau + d - p.D + 1 - i) -
                  p.v * std::pow(q, p.D - 2 * d - 2 * local.tau + i));
        if (std::abs(g) < 1e-12)
            throw CertificationError("gamma_" + std::to_string(i) + " vanishes (inconsistent r)");
        local.gamma.push_back(g);
    }
    local.u_basis = local.v_basis;
    cplx prod = 1.0;
    for (int i = 1; i <= d; ++i) {
        prod *= local.gamma[i - 1];
        local.u_basis.col(i) /= prod;
    }
    // recurrence verification
    const int m = d + 1;
    for (int i = 0; i <= d; ++i) {
        VecC lhs = A_op * local.u_basis.col(i);
        VecC rhs = theta_sub[d - i] * local.u_basis.col(i);
        if (i < d) rhs += local.gamma[i] * local.u_basis.col(i + 1);
        if ((lhs - rhs).norm() > tol * std::max(1.0, lhs.norm()))
            throw CertificationError("A recurrence on the u-basis failed at i = " + std::to_string(i));
        VecC lhs2 = Astar_op * local.u_basis.col(i);
        VecC rhs2 = theta_star_sub[i] * local.u_basis.col(i);
        if (i > 0) rhs2 += local.phi2[i - 1] / local.gamma[i - 1] * local.u_basis.col(i - 1);
        if ((lhs2 - rhs2).norm() > tol * std::max(1.0, lhs2.norm()))
            throw CertificationError("A* recurrence on the u-basis failed at i = " + std::to_string(i));
    }
    (void)m;
}

} // namespace qtet

#endif
