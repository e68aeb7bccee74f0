#ifndef QTET_SUBCONSTITUENT_HPP
#define QTET_SUBCONSTITUENT_HPP

#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "qtet/bose_mesner.hpp"
#include "qtet/types.hpp"

namespace qtet {

/// Dual Bose-Mesner algebra at a base vertex, relative to a fixed
/// Q-polynomial ordering of the primitive idempotents.
struct DualData {
    int x = 0;                     // base vertex
    std::vector<MatR> Estar;       // dual idempotents E*_0..E*_D (diagonal 0/1)
    std::vector<MatR> Astar_i;     // dual distance matrices A*_0..A*_D (diagonal)
    MatR Astar;                    // A* = A*_1
    std::vector<double> theta_star; // dual eigenvalue sequence
};

/// One irreducible T-module: orthonormal basis of the subspace, endpoint,
/// dual endpoint, diameter, thinness and both displacements.
struct TModule {
    MatC basis;  // n x dim, orthonormal columns
    int rho = 0; // endpoint
    int tau = 0; // dual endpoint
    int d = 0;   // diameter
    bool thin = false;
    int disp1 = 0; // rho + tau + d - D
    int disp2 = 0; // rho - tau
    int iso_class = -1;

    int dim() const { return static_cast<int>(basis.cols()); }
};

struct TDecomposition {
    std::vector<TModule> modules;
    std::vector<MatC> commutant;               // trace-orthonormal basis of {A, A*}'
    std::vector<std::vector<int>> iso_classes; // module indices grouped by type
};

/// Dual idempotents and dual distance matrices at base vertex x for the
/// ordering ord. The dual eigenvalues are read off A* = A*_1 and checked
/// constant on each subconstituent and mutually distinct.
inline DualData dual_data(const Graph& g, const Eigen::MatrixXi& dist, const SpectralData& spectral,
                          const QPolyOrdering& ord, int x, const Tolerances& tol) {
    const int n = g.n;
    const int D = static_cast<int>(ord.perm.size()) - 1;
    if (x < 0 || x >= n) throw ParseError("base vertex out of range");
    DualData dual;
    dual.x = x;
    dual.Estar.assign(D + 1, MatR::Zero(n, n));
    for (int y = 0; y < n; ++y) dual.Estar[dist(x, y)](y, y) = 1.0;

    dual.Astar_i.reserve(D + 1);
    for (int i = 0; i <= D; ++i) {
        MatR Ai = MatR::Zero(n, n);
        for (int y = 0; y < n; ++y) Ai(y, y) = n * spectral.E[ord.perm[i]](x, y);
        dual.Astar_i.push_back(std::move(Ai));
    }
    dual.Astar = dual.Astar_i[1];

    // theta*_i = diagonal value of A* on the i-th subconstituent
    dual.theta_star.assign(D + 1, 0.0);
    std::vector<bool> seen(D + 1, false);
    for (int y = 0; y < n; ++y) {
        int i = dist(x, y);
        double val = dual.Astar(y, y);
        if (!seen[i]) {
            dual.theta_star[i] = val;
            seen[i] = true;
        } else if (std::abs(val - dual.theta_star[i]) > 1e-8 * std::max(1.0, std::abs(val))) {
            throw CertificationError("A* not constant on subconstituent " + std::to_string(i));
        }
    }
    for (int i = 0; i <= D; ++i)
        for (int j = i + 1; j <= D; ++j)
            if (std::abs(dual.theta_star[i] - dual.theta_star[j]) < 1e-8)
                throw CertificationError("dual eigenvalues not mutually distinct");

    // A*_i A*_j = sum_h q^h_{ij} A*_h in the chosen ordering
    for (int i = 0; i <= D; ++i)
        for (int j = 0; j <= D; ++j) {
            MatR rhs = MatR::Zero(n, n);
            for (int h = 0; h <= D; ++h)
                rhs += spectral.krein[ord.perm[h]][ord.perm[i]][ord.perm[j]] * dual.Astar_i[h];
            MatR lhs = dual.Astar_i[i] * dual.Astar_i[j];
            if ((lhs - rhs).norm() > tol.tol_rel * std::max(1.0, lhs.norm()))
                throw CertificationError("dual distance-matrix product identity failed");
        }
    return dual;
}

struct TripleCheck {
    int h, i, j;
    bool dual;       // false: E*_h A_i E*_j vs p^h_{ij}; true: E_h A*_i E_j vs q^h_{ij}
    double norm;     // matrix norm of the triple product
    bool param_zero; // whether the matching parameter vanishes
    bool pass;
};

/// The vanishing conditions E*_h A_i E*_j = 0 iff p^h_{ij} = 0 and
/// E_h A*_i E_j = 0 iff q^h_{ij} = 0, evaluated for every triple.
inline std::vector<TripleCheck> triple_product_checks(const SpectralData& spectral, const DualData& dual,
                                                      const IntersectionData& inter,
                                                      const QPolyOrdering& ord, const Tolerances& tol) {
    const int D = inter.D;
    std::vector<TripleCheck> out;
    double qmax = 0.0;
    for (const auto& plane : spectral.krein)
        for (const auto& row : plane)
            for (double v : row) qmax = std::max(qmax, std::abs(v));
    for (int h = 0; h <= D; ++h)
        for (int i = 0; i <= D; ++i)
            for (int j = 0; j <= D; ++j) {
                {
                    double norm = (dual.Estar[h] * spectral.A[i] * dual.Estar[j]).norm();
                    bool pzero = inter.p[h][i][j] == 0;
                    out.push_back({h, i, j, false, norm, pzero, (norm <= tol.tol_zero) == pzero});
                }
                {
                    const MatR& Eh = spectral.E[ord.perm[h]];
                    const MatR& Ej = spectral.E[ord.perm[j]];
                    double norm = (Eh * dual.Astar_i[i] * Ej).norm();
                    bool qzero = std::abs(spectral.krein[ord.perm[h]][ord.perm[i]][ord.perm[j]]) <=
                                 tol.tol_zero * std::max(qmax, 1.0);
                    out.push_back({h, i, j, true, norm, qzero, (norm <= tol.tol_zero * qmax) == qzero});
                }
            }
    return out;
}

namespace detail {

/// Real nullspace basis of the stacked commutator system [Y,A]=0, [Y,A*]=0,
/// as matrices. A and A* are real, so real solutions span the complex
/// commutant.
inline std::vector<MatR> commutant_nullspace(const MatR& A, const MatR& Astar) {
    const int n = static_cast<int>(A.rows());
    MatR system(2 * n * n, n * n);
    // vec(YA - AY) = (A^t (x) I - I (x) A) vec(Y), column-major vec
    for (int col = 0; col < n * n; ++col) {
        int cj = col / n, ci = col % n; // Y entry (ci, cj)
        VecR e = VecR::Zero(n * n);
        MatR Y = MatR::Zero(n, n);
        Y(ci, cj) = 1.0;
        MatR C1 = Y * A - A * Y;
        MatR C2 = Y * Astar - Astar * Y;
        system.block(0, col, n * n, 1) = Eigen::Map<VecR>(C1.data(), n * n);
        system.block(n * n, col, n * n, 1) = Eigen::Map<VecR>(C2.data(), n * n);
    }
    Eigen::BDCSVD<MatR> svd(system, Eigen::ComputeThinV);
    double thresh = 1e-10 * std::max(1.0, svd.singularValues()(0));
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > thresh) ++rank;
    std::vector<MatR> basis;
    for (int i = rank; i < static_cast<int>(svd.matrixV().cols()); ++i) {
        VecR v = svd.matrixV().col(i);
        basis.push_back(Eigen::Map<MatR>(v.data(), n, n));
    }
    return basis;
}

} // namespace detail

/// Trace-orthonormal basis of the commutant {Y : [Y,A] = [Y,A*] = 0},
/// closed under conjugate-transpose (split into symmetric/antisymmetric
/// real parts, then re-orthonormalized).
inline std::vector<MatC> commutant_basis(const MatR& A, const MatR& Astar) {
    auto raw = detail::commutant_nullspace(A, Astar);
    const int n = static_cast<int>(A.rows());
    // transpose-closure: symmetric and antisymmetric parts also commute
    std::vector<MatR> parts;
    for (const auto& Y : raw) {
        parts.push_back(0.5 * (Y + Y.transpose()));
        parts.push_back(0.5 * (Y - Y.transpose()));
    }
    // Gram-Schmidt in the trace inner product
    std::vector<MatC> basis;
    for (auto& P : parts) {
        MatC M = P.cast<cplx>();
        for (const auto& B : basis) M -= (B.adjoint() * M).trace() * B;
        double norm = M.norm();
        if (norm > 1e-9) basis.push_back(M / norm);
    }
    return basis;
}

/// Double-commutant membership test: Y is in T iff Y commutes with every
/// element of the commutant of T.
inline bool t_membership(const MatC& Y, const std::vector<MatC>& commutant, double tol = 1e-8) {
    for (const auto& C : commutant) {
        double scale = std::max(1.0, Y.norm() * C.norm());
        if ((Y * C - C * Y).norm() > tol * scale) return false;
    }
    return true;
}

namespace detail {

/// dim of E W detected by the numerical rank of E * basis.
inline int support_dim(const MatR& E, const MatC& basis, double tol_zero) {
    MatC prod = E.cast<cplx>() * basis;
    Eigen::JacobiSVD<MatC> svd(prod);
    int dim = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol_zero) ++dim;
    return dim;
}

inline void fill_profile(TModule& mod, const SpectralData& spectral, const DualData& dual,
                         const QPolyOrdering& ord, int D, const Tolerances& tol) {
    std::vector<int> dual_dims(D + 1), primal_dims(D + 1);
    for (int i = 0; i <= D; ++i) {
        dual_dims[i] = support_dim(dual.Estar[i], mod.basis, tol.tol_zero);
        primal_dims[i] = support_dim(spectral.E[ord.perm[i]], mod.basis, tol.tol_zero);
    }
    auto interval = [](const std::vector<int>& dims, const char* what) {
        int lo = -1, hi = -1;
        for (int i = 0; i < static_cast<int>(dims.size()); ++i)
            if (dims[i] > 0) {
                if (lo < 0) lo = i;
                hi = i;
            }
        for (int i = lo; i <= hi; ++i)
            if (dims[i] == 0)
                throw CertificationError(std::string("T-module ") + what + " support not contiguous");
        return std::pair{lo, hi};
    };
    auto [rho, rho_hi] = interval(dual_dims, "dual");
    auto [tau, tau_hi] = interval(primal_dims, "primal");
    if (rho_hi - rho != tau_hi - tau)
        throw CertificationError("T-module diameter differs from dual diameter");
    mod.rho = rho;
    mod.tau = tau;
    mod.d = rho_hi - rho;
    mod.thin = true;
    for (int i = 0; i <= D; ++i)
        if (dual_dims[i] > 1 || primal_dims[i] > 1) mod.thin = false;
    mod.disp1 = mod.rho + mod.tau + mod.d - D;
    mod.disp2 = mod.rho - mod.tau;
}

} // namespace detail

/// Decompose the standard module into irreducible T-modules: eigenspaces of
/// a random Hermitian commutant element, each accepted iff the commutant
/// compresses to scalars on it. Seeded for reproducible reports.
inline TDecomposition decompose(const MatR& A, const MatR& Astar, const SpectralData& spectral,
                                const DualData& dual, const QPolyOrdering& ord, std::uint64_t seed,
                                const Tolerances& tol, bool allow_nonthin = false) {
    const int n = static_cast<int>(A.rows());
    const int D = static_cast<int>(ord.perm.size()) - 1;
    TDecomposition dec;
    dec.commutant = commutant_basis(A, Astar);

    // Hermitian basis of the commutant
    std::vector<MatC> herm;
    for (const auto& B : dec.commutant) {
        MatC H1 = 0.5 * (B + B.adjoint());
        MatC H2 = cplx(0, 0.5) * (B - B.adjoint());
        if (H1.norm() > 1e-9) herm.push_back(H1 / H1.norm());
        if (H2.norm() > 1e-9) herm.push_back(H2 / H2.norm());
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int max_retries = 8;
    for (int attempt = 0;; ++attempt) {
        if (attempt >= max_retries)
            throw CertificationError("commutant sampling failed to produce irreducible eigenspaces");
        MatC H = MatC::Zero(n, n);
        for (const auto& Hb : herm) H += gauss(rng) * Hb;
        Eigen::SelfAdjointEigenSolver<MatC> solver(H);
        VecR ev = solver.eigenvalues();
        double gap = 1e-7 * std::max(1.0, std::abs(ev(0)) + std::abs(ev(n - 1)));

        std::vector<TModule> modules;
        bool ok = true;
        int i = 0;
        while (i < n && ok) {
            int j = i;
            while (j < n && ev(j) - ev(i) <= gap * (j - i + 1)) ++j;
            TModule mod;
            mod.basis = solver.eigenvectors().middleCols(i, j - i);
            // irreducible iff the compressed commutant is scalar
            MatC stacked(static_cast<int>(dec.commutant.size()), mod.dim() * mod.dim());
            for (std::size_t b = 0; b < dec.commutant.size(); ++b) {
                MatC comp = mod.basis.adjoint() * dec.commutant[b] * mod.basis;
                stacked.row(static_cast<int>(b)) = Eigen::Map<VecC>(comp.data(), comp.size()).transpose();
            }
            Eigen::JacobiSVD<MatC> svd(stacked);
            int rank = 0;
            for (int s = 0; s < svd.singularValues().size(); ++s)
                if (svd.singularValues()(s) > 1e-8 * std::max(1.0, svd.singularValues()(0))) ++rank;
            if (rank != 1) { ok = false; break; }
            modules.push_back(std::move(mod));
            i = j;
        }
        if (!ok) continue;

        int total = 0;
        for (const auto& m : modules) total += m.dim();
        if (total != n) continue;

        for (auto& mod : modules) {
            // invariance residuals
            MatC AW = A.cast<cplx>() * mod.basis;
            MatC AsW = Astar.cast<cplx>() * mod.basis;
            MatC P = mod.basis * mod.basis.adjoint();
            if ((AW - P * AW).norm() > 1e-7 * std::max(1.0, AW.norm()) ||
                (AsW - P * AsW).norm() > 1e-7 * std::max(1.0, AsW.norm()))
                throw CertificationError("T-module candidate not invariant under A, A*");
            detail::fill_profile(mod, spectral, dual, ord, D, tol);
        }
        if (!allow_nonthin)
            for (const auto& mod : modules)
                if (!mod.thin) {
                    std::ostringstream os;
                    os << "non-thin irreducible T-module found: (rho,tau,d,dim)=(" << mod.rho << ","
                       << mod.tau << "," << mod.d << "," << mod.dim() << ")";
                    throw ThinnessViolationError(os.str());
                }

        // deterministic ordering of modules: by (rho, tau, d, dim), then by
        // leading eigenvalue block position for stability
        std::stable_sort(modules.begin(), modules.end(), [](const TModule& a, const TModule& b) {
            return std::tuple(a.rho, a.tau, a.d, a.dim()) < std::tuple(b.rho, b.tau, b.d, b.dim());
        });
        dec.modules = std::move(modules);
        break;
    }
    return dec;
}

} // namespace qtet

#endif
