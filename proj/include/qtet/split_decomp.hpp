#ifndef QTET_SPLIT_DECOMP_HPP
#define QTET_SPLIT_DECOMP_HPP

#include <map>
#include <vector>

#include "qtet/subconstituent.hpp"
#include "qtet/types.hpp"

namespace qtet {

enum class SplitKind { DownDown, DownUp };

/// One family of tilde spaces: the summands of a split decomposition of V.
struct SplitFamily {
    SplitKind kind;
    int D = 0;
    std::vector<std::vector<MatC>> tilde; // tilde[i][j]: orthonormal basis (n x dim, possibly 0 cols)

    int dim(int i, int j) const { return static_cast<int>(tilde[i][j].cols()); }
};

struct PhiPsi {
    MatC Phi, Psi;
    double construction_agreement_phi = 0.0; // entrywise gap between the two constructions
    double construction_agreement_psi = 0.0;
};

namespace detail {

/// Orthonormal basis of the intersection of two subspaces given their
/// orthogonal projectors, via the eigenvalue-1 cluster of P Q P.
inline MatC subspace_intersection(const MatC& P, const MatC& Q, double thresh = 1.0 - 1e-8) {
    Eigen::SelfAdjointEigenSolver<MatC> solver(0.5 * (P * Q * P + (P * Q * P).adjoint()));
    std::vector<int> keep;
    for (int i = 0; i < solver.eigenvalues().size(); ++i)
        if (solver.eigenvalues()(i) >= thresh) keep.push_back(i);
    MatC basis(P.rows(), static_cast<int>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) basis.col(static_cast<int>(c)) = solver.eigenvectors().col(keep[c]);
    return basis;
}

/// Orthonormal basis of the orthogonal complement of span(U) inside span(W),
/// both given by orthonormal columns.
inline MatC complement_within(const MatC& U, const MatC& W, double rank_tol = 1e-8) {
    if (W.cols() == 0) return W;
    MatC proj = W - U * (U.adjoint() * W);
    Eigen::JacobiSVD<MatC> svd(proj, Eigen::ComputeThinU);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > rank_tol) ++rank;
    return svd.matrixU().leftCols(rank);
}

} // namespace detail

/// The split subspaces V_{i,j} of the chosen kind. Primal filtration is
/// E*_0 V + ... + E*_i V; the second factor is E_0 V + ... + E_j V for
/// DownDown and E_D V + ... + E_{D-j} V for DownUp. Index -1 gives the zero
/// space.
class SplitSubspaces {
public:
    SplitSubspaces(const SpectralData& spectral, const DualData& dual, const QPolyOrdering& ord,
                   SplitKind kind)
        : kind_(kind), D_(static_cast<int>(ord.perm.size()) - 1), n_(static_cast<int>(dual.Astar.rows())) {
        // cumulative projectors for both filtrations
        dual_proj_.assign(D_ + 1, MatC());
        primal_proj_.assign(D_ + 1, MatC());
        MatC acc = MatC::Zero(n_, n_);
        for (int i = 0; i <= D_; ++i) {
            acc += dual.Estar[i].cast<cplx>();
            dual_proj_[i] = acc;
        }
        acc = MatC::Zero(n_, n_);
        for (int j = 0; j <= D_; ++j) {
            int idx = (kind == SplitKind::DownDown) ? j : D_ - j;
            acc += spectral.E[ord.perm[idx]].cast<cplx>();
            primal_proj_[j] = acc;
        }
    }

    int D() const { return D_; }

    /// Orthonormal basis of V_{i,j}; -1 <= i,j <= D.
    MatC basis(int i, int j) const {
        if (i < -1 || j < -1 || i > D_ || j > D_) throw std::out_of_range("split subspace index");
        if (i == -1 || j == -1) return MatC(n_, 0);
        if (i == D_ && j == D_) return MatC::Identity(n_, n_);
        return detail::subspace_intersection(dual_proj_[i], primal_proj_[j]);
    }

private:
    SplitKind kind_;
    int D_, n_;
    std::vector<MatC> dual_proj_, primal_proj_;
};

/// Tilde spaces of Lemma-style refinement:
/// tilde V_{i,j} = (V_{i-1,j} + V_{i,j-1})^perp  intersect  V_{i,j}.
/// Verifies that the dims sum to |X| and the concatenated bases are full rank.
inline SplitFamily tilde_spaces(const SplitSubspaces& split, SplitKind kind) {
    const int D = split.D();
    SplitFamily family;
    family.kind = kind;
    family.D = D;
    family.tilde.assign(D + 1, std::vector<MatC>(D + 1));

    // cache row of V_{i-1,.} to avoid recomputation
    std::vector<MatC> prev_row(D + 1);
    for (int j = 0; j <= D; ++j) prev_row[j] = split.basis(-1, j);
    int n = 0, total = 0;
    for (int i = 0; i <= D; ++i) {
        std::vector<MatC> row(D + 1);
        MatC left = split.basis(i, -1);
        for (int j = 0; j <= D; ++j) {
            row[j] = split.basis(i, j);
            n = static_cast<int>(row[j].rows());
            // orthonormalize the union of the two lower subspaces
            MatC stacked(row[j].rows(), prev_row[j].cols() + left.cols());
            stacked << prev_row[j], left;
            Eigen::JacobiSVD<MatC> svd(stacked, Eigen::ComputeThinU);
            int rank = 0;
            for (int s = 0; s < svd.singularValues().size(); ++s)
                if (svd.singularValues()(s) > 1e-8) ++rank;
            MatC lower = svd.matrixU().leftCols(rank);
            family.tilde[i][j] = detail::complement_within(lower, row[j]);
            total += family.dim(i, j);
            left = row[j];
        }
        prev_row = std::move(row);
    }
    if (total != n)
        throw CertificationError("tilde-space dimensions sum to " + std::to_string(total) +
                                 ", expected |X| = " + std::to_string(n));
    // direct-sum rank check on the concatenated bases
    MatC all(n, n);
    int col = 0;
    for (int i = 0; i <= D; ++i)
        for (int j = 0; j <= D; ++j)
            for (int c = 0; c < family.dim(i, j); ++c) all.col(col++) = family.tilde[i][j].col(c);
    Eigen::JacobiSVD<MatC> svd(all);
    if (svd.singularValues()(n - 1) < 1e-8)
        throw CertificationError("tilde spaces are not a direct sum (rank deficiency)");
    return family;
}

struct DisplacementCheck {
    int delta;
    int dim_modules;
    int dim_tilde;
    double residual; // projector gap
};

/// For each displacement value, the span of the modules with that
/// displacement must equal the matching diagonal sum of tilde spaces.
/// First kind pairs with DownDown, second kind with DownUp.
inline std::vector<DisplacementCheck> verify_displacement_coincidence(const SplitFamily& family,
                                                                      const TDecomposition& dec,
                                                                      double tol = 1e-8) {
    const int D = family.D;
    const int n = static_cast<int>(family.tilde[0][0].rows());
    const bool first_kind = family.kind == SplitKind::DownDown;
    std::vector<DisplacementCheck> out;
    for (int delta = -D; delta <= D; ++delta) {
        MatC proj_mod = MatC::Zero(n, n);
        int dim_mod = 0;
        for (const auto& mod : dec.modules) {
            int disp = first_kind ? mod.disp1 : mod.disp2;
            if (disp != delta) continue;
            proj_mod += mod.basis * mod.basis.adjoint();
            dim_mod += mod.dim();
        }
        // tilde side: orthogonal projector onto the (generally oblique) sum;
        // the coincidence makes the subspaces equal, so compare orthogonal
        // projectors onto each span
        std::vector<MatC> blocks;
        int dim_tilde = 0;
        for (int i = 0; i <= D; ++i)
            for (int j = 0; j <= D; ++j)
                if (i + j == delta + D && family.dim(i, j) > 0) {
                    blocks.push_back(family.tilde[i][j]);
                    dim_tilde += family.dim(i, j);
                }
        MatC proj_tilde = MatC::Zero(n, n);
        if (dim_tilde > 0) {
            MatC stacked(n, dim_tilde);
            int col = 0;
            for (const auto& b : blocks)
                for (int c = 0; c < b.cols(); ++c) stacked.col(col++) = b.col(c);
            Eigen::JacobiSVD<MatC> svd(stacked, Eigen::ComputeThinU);
            MatC U = svd.matrixU().leftCols(dim_tilde);
            proj_tilde = U * U.adjoint();
        }
        double residual = (proj_mod - proj_tilde).norm();
        out.push_back({delta, dim_mod, dim_tilde, residual});
        if (residual > tol * std::max(1.0, proj_mod.norm()))
            throw CertificationError("displacement coincidence failed at delta = " + std::to_string(delta) +
                                     " (residual " + std::to_string(residual) + ")");
        if (dim_mod != dim_tilde)
            throw CertificationError("displacement dimension mismatch at delta = " + std::to_string(delta));
    }
    return out;
}

/// Phi acts as q^{i+j-D} on tilde V^{dd}_{i,j}; Psi likewise on the DownUp
/// family. Built from the oblique projectors of the direct sum, then
/// cross-checked against the per-module scalar construction
/// (q^{rho+tau+d-D} resp. q^{rho-tau} on each irreducible module).
inline PhiPsi build_phi_psi(const SplitFamily& dd, const SplitFamily& du, const TDecomposition& dec,
                            cplx q, double agree_tol = 1e-9) {
    const int D = dd.D;
    const int n = static_cast<int>(dd.tilde[0][0].rows());
    auto from_family = [&](const SplitFamily& fam) {
        MatC S(n, n);
        VecC scalars(n);
        int col = 0;
        for (int i = 0; i <= D; ++i)
            for (int j = 0; j <= D; ++j)
                for (int c = 0; c < fam.dim(i, j); ++c) {
                    S.col(col) = fam.tilde[i][j].col(c);
                    scalars(col) = std::pow(q, i + j - D);
                    ++col;
                }
        // M = S diag(scalars) S^{-1}: acts as the scalar on each summand
        return MatC(S * scalars.asDiagonal() * S.inverse());
    };
    auto from_modules = [&](bool first_kind) {
        MatC M = MatC::Zero(n, n);
        for (const auto& mod : dec.modules) {
            int disp = first_kind ? mod.disp1 : mod.disp2;
            M += std::pow(q, disp) * (mod.basis * mod.basis.adjoint());
        }
        return M;
    };
    PhiPsi out;
    out.Phi = from_family(dd);
    out.Psi = from_family(du);
    MatC Phi2 = from_modules(true);
    MatC Psi2 = from_modules(false);
    out.construction_agreement_phi = (out.Phi - Phi2).cwiseAbs().maxCoeff();
    out.construction_agreement_psi = (out.Psi - Psi2).cwiseAbs().maxCoeff();
    if (out.construction_agreement_phi > agree_tol || out.construction_agreement_psi > agree_tol)
        throw CertificationError("Phi/Psi two-construction disagreement: " +
                                 std::to_string(out.construction_agreement_phi) + ", " +
                                 std::to_string(out.construction_agreement_psi));
    return out;
}

} // namespace qtet

#endif
