#ifndef QTET_TYPES_HPP
#define QTET_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qtet {

using cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;

/// Tolerance knobs shared across the pipeline. All overridable from the CLI.
struct Tolerances {
    double tol_group = 1e-9; // eigenvalue gap grouping, relative to spectral radius
    double tol_zero  = 1e-8; // zero tests (Krein pattern, support detection), relative
    double tol_rel   = 1e-7; // relation residual pass threshold
    double tol_fit   = 1e-8; // parameter fit reproduction, relative
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotDistanceRegularError : std::runtime_error {
    explicit NotDistanceRegularError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotQPolynomialError : std::runtime_error {
    explicit NotQPolynomialError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotQRacahTypeError : std::runtime_error {
    explicit NotQRacahTypeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ThinnessViolationError : std::runtime_error {
    explicit ThinnessViolationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CertificationError : std::runtime_error {
    explicit CertificationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExcludedLocusError : std::runtime_error {
    explicit ExcludedLocusError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Residual of LHS = RHS, normalized so values are comparable across scales.
inline double rel_residual(const MatC& lhs, const MatC& rhs) {
    double scale = std::max({1.0, lhs.norm(), rhs.norm()});
    return (lhs - rhs).norm() / scale;
}

} // namespace qtet

#endif
