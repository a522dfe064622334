// model.hpp — Driven multi-level transmon Hamiltonian, its two-level
// effective-field reduction, and the transmon level structure.
//
// All frequencies are angular (rad/ns), all times in ns. The Hamiltonian is
// returned as H/ħ.

#pragma once

#include "geophase/core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace geophase {

// Leading-order transmon scaling α_j = α₂·j(j−1)/2.
inline std::vector<double> default_anharmonicities(int n_levels, double alpha2) {
    std::vector<double> out(static_cast<std::size_t>(std::max(n_levels, 0)), 0.0);
    for (int j = 2; j < n_levels; ++j) {
        out[static_cast<std::size_t>(j)] = alpha2 * j * (j - 1) / 2.0;
    }
    return out;
}

struct DeviceParams {
    double e_j_ghz{13.96};
    double e_c_ghz{0.36};
    int n_levels{4};
    std::vector<double> anharmonicities;  // α_j, rad/ns, α₀ = α₁ = 0
    std::optional<double> t1_ns;
    std::optional<double> t2_star_ns;

    static DeviceParams with_alpha2(int n_levels, double alpha2) {
        DeviceParams p;
        p.n_levels = n_levels;
        p.anharmonicities = default_anharmonicities(n_levels, alpha2);
        return p;
    }

    double alpha2() const { return n_levels > 2 ? anharmonicities[2] : 0.0; }

    bool has_decoherence() const { return t1_ns.has_value() && t2_star_ns.has_value(); }

    void validate() const {
        if (n_levels < 2) {
            throw ConfigError("DeviceParams: n_levels must be >= 2, got " + std::to_string(n_levels));
        }
        if (anharmonicities.size() != static_cast<std::size_t>(n_levels)) {
            throw ConfigError("DeviceParams: " + std::to_string(anharmonicities.size()) +
                              " anharmonicities for " + std::to_string(n_levels) + " levels");
        }
        if (anharmonicities[0] != 0.0 || anharmonicities[1] != 0.0) {
            throw ConfigError("DeviceParams: alpha_0 and alpha_1 must be exactly zero");
        }
        if (t1_ns && *t1_ns <= 0.0) throw ConfigError("DeviceParams: t1 must be positive");
        if (t2_star_ns && *t2_star_ns <= 0.0) throw ConfigError("DeviceParams: t2* must be positive");
        if (t1_ns && t2_star_ns && *t2_star_ns > 2.0 * *t1_ns) {
            throw ConfigError("DeviceParams: t2* exceeds 2*t1");
        }
    }
};

struct DriveConfig {
    double omega{0.0};  // Ω, rad/ns
    double phi{0.0};    // φ, rad
    double delta{0.0};  // Δ = ω₀₁ − ω_d, rad/ns
};

struct EffectiveField {
    Eigen::Vector3d b;  // (Ω_x, Ω_y, Δ)
    double theta{0.0};  // ∈ [0, π/2], measured from the z axis with |Δ|
    double a_solid{0.0};
};

// Hermitian matrix wrapper; construction checks Hermiticity.
class HermitianOperator {
public:
    HermitianOperator() = default;
    explicit HermitianOperator(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw ConfigError("HermitianOperator: matrix must be square");
        if (hermiticity_defect(m_) > 1e-12) {
            throw InvalidStateError("HermitianOperator: matrix is not Hermitian");
        }
    }

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

private:
    Matrix m_;
};

// N = diag(0, 1, …, n−1)
inline Matrix number_operator(int n) {
    Matrix N = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) N(j, j) = static_cast<double>(j);
    return N;
}

// Ladder-coupled drive Hamiltonian with complex quadrature envelope
// Ω_x − iΩ_y on the |j+1⟩⟨j| elements. Shared by the static model and the
// time-domain propagators.
inline Matrix drive_hamiltonian(const std::vector<double>& anharmonicities, double delta_diag,
                                double omega_x, double omega_y) {
    const auto n = static_cast<Eigen::Index>(anharmonicities.size());
    Matrix h = Matrix::Zero(n, n);
    const cplx lower_coupling{0.5 * omega_x, -0.5 * omega_y};
    for (Eigen::Index j = 0; j < n; ++j) {
        h(j, j) = static_cast<double>(j) * delta_diag + anharmonicities[static_cast<std::size_t>(j)];
    }
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const cplx c = lower_coupling * std::sqrt(static_cast<double>(j + 1));
        h(j + 1, j) = c;
        h(j, j + 1) = std::conj(c);
    }
    return h;
}

inline HermitianOperator build_hamiltonian(const DeviceParams& params, const DriveConfig& drive) {
    params.validate();
    if (drive.omega < 0.0) throw ConfigError("build_hamiltonian: drive strength must be >= 0");
    return HermitianOperator(drive_hamiltonian(params.anharmonicities, drive.delta,
                                               drive.omega * std::cos(drive.phi),
                                               drive.omega * std::sin(drive.phi)));
}

inline EffectiveField effective_field(const DriveConfig& drive) {
    if (drive.omega == 0.0 && drive.delta == 0.0) {
        throw DegeneracyError("effective_field: Omega = Delta = 0 leaves the field direction undefined");
    }
    EffectiveField f;
    f.b = {drive.omega * std::cos(drive.phi), drive.omega * std::sin(drive.phi), drive.delta};
    f.theta = std::atan2(drive.omega, std::abs(drive.delta));
    // 1 − cos ϑ = 2 sin²(ϑ/2) keeps precision for small angles
    const double s = std::sin(0.5 * f.theta);
    f.a_solid = kTwoPi * 2.0 * s * s;
    return f;
}

inline double omega_for_solid_angle(double a_solid, double delta) {
    if (!(a_solid >= 0.0)) throw ConfigError("omega_for_solid_angle: solid angle must be >= 0");
    if (a_solid >= kTwoPi) {
        throw ConfigError("omega_for_solid_angle: A >= 2*pi requires an infinite drive");
    }
    if (delta == 0.0) throw ConfigError("omega_for_solid_angle: detuning must be non-zero");
    const double s = a_solid / kTwoPi;  // 1 − cos ϑ
    return std::abs(delta) * std::sqrt(s * (2.0 - s)) / (1.0 - s);
}

// H(0) = H₀ + V: H₀ keeps the diagonal and the |0⟩↔|1⟩ coupling, V the rest.
inline std::pair<HermitianOperator, HermitianOperator> split_h0_v(const DeviceParams& params,
                                                                  const DriveConfig& drive) {
    if (drive.phi != 0.0) throw ConfigError("split_h0_v: defined at phi = 0 only");
    const Matrix h = build_hamiltonian(params, drive).matrix();
    Matrix h0 = h;
    Matrix v = Matrix::Zero(h.rows(), h.cols());
    for (Eigen::Index j = 1; j + 1 < h.rows(); ++j) {
        v(j + 1, j) = h(j + 1, j);
        v(j, j + 1) = h(j, j + 1);
        h0(j + 1, j) = 0.0;
        h0(j, j + 1) = 0.0;
    }
    return {HermitianOperator(std::move(h0)), HermitianOperator(std::move(v))};
}

struct TransmonSpectrum {
    double omega01{0.0};                // rad/ns
    std::vector<double> anharmonicities;  // α_j, rad/ns
    int charge_cutoff{0};
};

namespace detail {

// Lowest n_levels eigenvalues (GHz·h) of 4E_C n̂² − E_J cos φ̂ on |−N..N⟩.
inline RealVector cooper_pair_box_levels(double e_j, double e_c, int n_levels, int cutoff) {
    const int dim = 2 * cutoff + 1;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const double charge = static_cast<double>(i - cutoff);
        h(i, i) = 4.0 * e_c * charge * charge;
        if (i + 1 < dim) {
            h(i, i + 1) = -0.5 * e_j;
            h(i + 1, i) = -0.5 * e_j;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("transmon_spectrum: diagonalization failed");
    return solver.eigenvalues().head(n_levels);
}

inline TransmonSpectrum spectrum_from_levels(const RealVector& e, int cutoff) {
    TransmonSpectrum out;
    out.charge_cutoff = cutoff;
    const double w01 = e(1) - e(0);
    out.omega01 = units::from_ghz(w01);
    out.anharmonicities.resize(static_cast<std::size_t>(e.size()));
    for (Eigen::Index j = 0; j < e.size(); ++j) {
        const double alpha = (e(j) - e(0)) - static_cast<double>(j) * w01;
        out.anharmonicities[static_cast<std::size_t>(j)] = j < 2 ? 0.0 : units::from_ghz(alpha);
    }
    return out;
}

}  // namespace detail

// Diagonalizes the charge-basis Cooper-pair box at zero offset charge. Energies
// in GHz·h; returns angular frequencies. Fails if doubling the cutoff moves any
// result by more than 1e-9 relative.
inline TransmonSpectrum transmon_spectrum(double e_j_ghz, double e_c_ghz, int n_levels,
                                          int charge_cutoff = 30) {
    if (!(e_j_ghz > 0.0) || !(e_c_ghz > 0.0)) throw ConfigError("transmon_spectrum: E_J and E_C must be positive");
    if (n_levels < 2) throw ConfigError("transmon_spectrum: n_levels must be >= 2");
    if (2 * charge_cutoff + 1 < n_levels) throw ConfigError("transmon_spectrum: charge cutoff too small");

    const auto coarse = detail::spectrum_from_levels(
        detail::cooper_pair_box_levels(e_j_ghz, e_c_ghz, n_levels, charge_cutoff), charge_cutoff);
    const auto fine = detail::spectrum_from_levels(
        detail::cooper_pair_box_levels(e_j_ghz, e_c_ghz, n_levels, 2 * charge_cutoff), 2 * charge_cutoff);

    const double floor = 1e-3 * std::abs(coarse.omega01);
    auto check = [&](double a, double b, const char* what) {
        if (std::abs(a - b) > 1e-9 * std::max({std::abs(a), std::abs(b), floor})) {
            throw ConvergenceError(std::string("transmon_spectrum: ") + what + " not converged at charge cutoff " +
                                   std::to_string(charge_cutoff));
        }
    };
    check(coarse.omega01, fine.omega01, "omega01");
    for (std::size_t j = 2; j < coarse.anharmonicities.size(); ++j) {
        check(coarse.anharmonicities[j], fine.anharmonicities[j], "anharmonicity");
    }
    return coarse;
}

}  // namespace geophase
