// core.hpp — Shared numeric types, unit conversions, and the error hierarchy.
//
// Internal units: time in ns, angular frequency in rad/ns. Configuration and
// CSV output use ordinary frequency (MHz/GHz); conversions live here and only
// here.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace geophase {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace units {

// Ordinary frequency → angular frequency in rad/ns.
constexpr double from_mhz(double f_mhz) noexcept { return kTwoPi * f_mhz * 1e-3; }
constexpr double from_ghz(double f_ghz) noexcept { return kTwoPi * f_ghz; }
constexpr double to_mhz(double w) noexcept { return w / kTwoPi * 1e3; }
constexpr double to_ghz(double w) noexcept { return w / kTwoPi; }

constexpr double us_to_ns(double t_us) noexcept { return t_us * 1e3; }
constexpr double ps_to_ns(double t_ps) noexcept { return t_ps * 1e-3; }

}  // namespace units

// Invalid or inconsistent configuration. The CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Any failure of a numerical contract (degeneracy, convergence, tolerance
// violations). The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class DegeneracyError : public NumericalError {
public:
    explicit DegeneracyError(const std::string& what) : NumericalError(what) {}
};

class ConvergenceError : public NumericalError {
public:
    explicit ConvergenceError(const std::string& what) : NumericalError(what) {}
};

// Perturbation theory evaluated too close to its pole.
class ValidityDomainError : public NumericalError {
public:
    explicit ValidityDomainError(const std::string& what) : NumericalError(what) {}
};

class InvalidStateError : public NumericalError {
public:
    explicit InvalidStateError(const std::string& what) : NumericalError(what) {}
};

// Largest deviation of a matrix from Hermiticity, relative to its norm.
inline double hermiticity_defect(const Matrix& m) {
    const double scale = std::max(m.norm(), 1.0);
    return (m - m.adjoint()).norm() / scale;
}

}  // namespace geophase
