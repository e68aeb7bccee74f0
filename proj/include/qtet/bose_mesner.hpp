#ifndef QTET_BOSE_MESNER_HPP
#define QTET_BOSE_MESNER_HPP

#include <numeric>
#include <vector>

#include "qtet/graph.hpp"
#include "qtet/types.hpp"

namespace qtet {

/// The Bose-Mesner algebra of a distance-regular graph: distance-matrix
/// basis, primitive idempotents, eigenvalues, multiplicities and Krein
/// parameters. Idempotents are listed with E_0 = J/|X| first and the
/// remaining eigenvalues in decreasing order (the "natural" order);
/// Q-polynomial orderings are permutations on top of this.
struct SpectralData {
    std::vector<MatR> A;           // distance matrices A_0..A_D
    std::vector<MatR> E;           // primitive idempotents, natural order
    std::vector<double> theta;     // eigenvalues, natural order (theta[0] = k)
    std::vector<int> mult;         // ranks of the idempotents
    std::vector<std::vector<std::vector<double>>> krein; // q[h][i][j], natural order
};

/// A Q-polynomial ordering of the idempotents: perm[i] is the natural index
/// of the idempotent playing the role of E_i; perm[0] = 0 always.
struct QPolyOrdering {
    std::vector<int> perm;
    std::vector<double> theta_seq;
};

inline std::vector<MatR> distance_matrices(const Graph& g, const Eigen::MatrixXi& dist, int D) {
    std::vector<MatR> A(D + 1, MatR::Zero(g.n, g.n));
    for (int x = 0; x < g.n; ++x)
        for (int y = 0; y < g.n; ++y) A[dist(x, y)](x, y) = 1.0;
    return A;
}

/// Distinct eigenvalues of a real symmetric matrix, grouped by gap and sorted
/// in decreasing order.
inline std::vector<double> distinct_eigenvalues(const MatR& A, double tol_group) {
    Eigen::SelfAdjointEigenSolver<MatR> solver(A);
    VecR ev = solver.eigenvalues(); // ascending
    double radius = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    double gap = tol_group * std::max(radius, 1.0);
    std::vector<double> out;
    int i = 0;
    while (i < ev.size()) {
        int j = i;
        double sum = 0.0;
        while (j < ev.size() && ev(j) - ev(i) <= gap * (j - i + 1)) sum += ev(j++);
        out.push_back(sum / (j - i));
        i = j;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

/// E_i = prod_{j != i} (A - theta_j I)/(theta_i - theta_j); Lagrange
/// interpolation in A, which generates the Bose-Mesner algebra.
inline std::vector<MatR> primitive_idempotents(const MatR& A, const std::vector<double>& theta) {
    const int n = static_cast<int>(A.rows());
    std::vector<MatR> E;
    E.reserve(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        MatR P = MatR::Identity(n, n);
        for (std::size_t j = 0; j < theta.size(); ++j) {
            if (j == i) continue;
            P = (P * (A - theta[j] * MatR::Identity(n, n))) / (theta[i] - theta[j]);
        }
        E.push_back(std::move(P));
    }
    return E;
}

/// Krein parameters via trace inner products:
/// q^h_{ij} = |X| tr(E_h (E_i o E_j)) / rank(E_h).
inline std::vector<std::vector<std::vector<double>>>
krein_parameters(const std::vector<MatR>& E, const std::vector<int>& mult, const Tolerances& tol) {
    const int D = static_cast<int>(E.size()) - 1;
    const double n = static_cast<double>(E[0].rows());
    std::vector q(D + 1, std::vector(D + 1, std::vector<double>(D + 1, 0.0)));
    double qmax = 0.0;
    for (int i = 0; i <= D; ++i)
        for (int j = i; j <= D; ++j) {
            MatR hadamard = E[i].cwiseProduct(E[j]);
            for (int h = 0; h <= D; ++h) {
                double val = n * (E[h].cwiseProduct(hadamard)).sum() / mult[h];
                q[h][i][j] = q[h][j][i] = val;
                qmax = std::max(qmax, std::abs(val));
            }
        }
    for (int h = 0; h <= D; ++h)
        for (int i = 0; i <= D; ++i)
            for (int j = 0; j <= D; ++j)
                if (q[h][i][j] < -tol.tol_zero * std::max(qmax, 1.0))
                    throw CertificationError("negative Krein parameter q^" + std::to_string(h) +
                                             "_{" + std::to_string(i) + "," + std::to_string(j) +
                                             "} = " + std::to_string(q[h][i][j]));
    return q;
}

namespace detail {

/// Triangle rule on a parameter tensor: zero when one index exceeds the sum
/// of the other two, nonzero when one equals the sum of the other two.
template <typename Tensor>
inline bool triangle_rule_holds(const Tensor& q, const std::vector<int>& perm, double zero_thresh) {
    const int D = static_cast<int>(perm.size()) - 1;
    for (int h = 0; h <= D; ++h)
        for (int i = 0; i <= D; ++i)
            for (int j = 0; j <= D; ++j) {
                double val = std::abs(q[perm[h]][perm[i]][perm[j]]);
                bool exceeds = h > i + j || i > j + h || j > h + i;
                bool attains = h == i + j || i == j + h || j == h + i;
                if (exceeds && val > zero_thresh) return false;
                if (attains && val <= zero_thresh) return false;
            }
    return true;
}

} // namespace detail

/// All Q-polynomial orderings of the idempotents: for each candidate E_m,
/// follow the nonzero chain of q^._{m,.} and keep the ordering iff the full
/// triangle rule holds. Natural ordering of candidates makes the result
/// deterministic.
inline std::vector<QPolyOrdering> find_qpoly_orderings(const SpectralData& spectral, const Tolerances& tol) {
    const auto& q = spectral.krein;
    const int D = static_cast<int>(q.size()) - 1;
    double qmax = 0.0;
    for (const auto& plane : q)
        for (const auto& row : plane)
            for (double v : row) qmax = std::max(qmax, std::abs(v));
    const double zero_thresh = tol.tol_zero * std::max(qmax, 1.0);

    std::vector<QPolyOrdering> orderings;
    for (int m = 1; m <= D; ++m) {
        std::vector<int> perm{0, m};
        std::vector<bool> used(D + 1, false);
        used[0] = used[m] = true;
        bool ok = true;
        while (static_cast<int>(perm.size()) <= D) {
            int last = perm.back();
            int next = -1;
            for (int h = 0; h <= D; ++h) {
                if (used[h] || std::abs(q[h][m][last]) <= zero_thresh) continue;
                if (next >= 0) { ok = false; break; } // chain not tridiagonal
                next = h;
            }
            if (!ok || next < 0) { ok = false; break; }
            perm.push_back(next);
            used[next] = true;
        }
        if (!ok || !detail::triangle_rule_holds(q, perm, zero_thresh)) continue;
        QPolyOrdering ord;
        ord.perm = perm;
        for (int i : perm) ord.theta_seq.push_back(spectral.theta[i]);
        orderings.push_back(std::move(ord));
    }
    return orderings;
}

/// Build the full spectral data of a certified distance-regular graph,
/// cross-checking the distance-matrix product identities, the idempotent
/// axioms, and the Lagrange idempotents against eigensolver projectors.
inline SpectralData build_spectral_data(const Graph& g, const Eigen::MatrixXi& dist,
                                        const IntersectionData& inter, const Tolerances& tol) {
    const int n = g.n;
    const int D = inter.D;
    SpectralData s;
    s.A = distance_matrices(g, dist, D);

    // product identity A_i A_j = sum_h p^h_{ij} A_h
    for (int i = 0; i <= D; ++i)
        for (int j = 0; j <= D; ++j) {
            MatR lhs = s.A[i] * s.A[j];
            MatR rhs = MatR::Zero(n, n);
            for (int h = 0; h <= D; ++h) rhs += static_cast<double>(inter.p[h][i][j]) * s.A[h];
            if ((lhs - rhs).norm() > tol.tol_rel * std::max(1.0, lhs.norm()))
                throw CertificationError("distance-matrix product identity failed at (i,j)=(" +
                                         std::to_string(i) + "," + std::to_string(j) + ")");
        }

    s.theta = distinct_eigenvalues(s.A[1], tol.tol_group);
    if (static_cast<int>(s.theta.size()) != D + 1)
        throw CertificationError("adjacency matrix has " + std::to_string(s.theta.size()) +
                                 " distinct eigenvalues, expected D+1 = " + std::to_string(D + 1));

    s.E = primitive_idempotents(s.A[1], s.theta);

    // put E_0 = J/n first; with theta sorted decreasing, theta[0] = k already
    // corresponds to it, but verify rather than assume
    MatR Jn = MatR::Constant(n, n, 1.0 / n);
    if ((s.E[0] - Jn).norm() > 1e-8)
        throw CertificationError("leading idempotent is not J/|X|; eigenvalue ordering broken");

    // idempotent axioms and two-method cross-check against spectral projectors
    Eigen::SelfAdjointEigenSolver<MatR> solver(s.A[1]);
    MatR sum = MatR::Zero(n, n);
    for (int i = 0; i <= D; ++i) {
        sum += s.E[i];
        for (int j = 0; j <= D; ++j) {
            MatR expect = (i == j) ? s.E[i] : MatR::Zero(n, n);
            if ((s.E[i] * s.E[j] - expect).norm() > tol.tol_rel)
                throw CertificationError("idempotent product axiom failed");
        }
        MatR proj = MatR::Zero(n, n);
        for (int c = 0; c < n; ++c)
            if (std::abs(solver.eigenvalues()(c) - s.theta[i]) < 1e-6 * std::max(1.0, std::abs(s.theta[i])))
                proj += solver.eigenvectors().col(c) * solver.eigenvectors().col(c).transpose();
        if ((proj - s.E[i]).norm() > 1e-9 * n)
            throw CertificationError("Lagrange idempotent disagrees with spectral projector at index " +
                                     std::to_string(i));
        s.mult.push_back(static_cast<int>(std::lround(s.E[i].trace())));
    }
    if ((sum - MatR::Identity(n, n)).norm() > tol.tol_rel)
        throw CertificationError("idempotents do not sum to identity");

    s.krein = krein_parameters(s.E, s.mult, tol);
    return s;
}

} // namespace qtet

#endif
