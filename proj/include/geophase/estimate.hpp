// estimate.hpp — Simulated readout and tomography, phase extraction,
// maximum-likelihood qubit reconstruction and Uhlmann fidelity.

#pragma once

#include "geophase/core.hpp"
#include "geophase/propagate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace geophase {

// Excited-state probability P_z = (1 − s_z)/2 after each tomography setting,
// normalized within {|0⟩, |1⟩}; leakage is the population outside it.
struct ReadoutProbabilities {
    double p_z_none{0.5};
    double p_z_x{0.5};
    double p_z_y{0.5};
    double leakage{0.0};
};

// Readout of a subspace state after an instantaneous, ideal tomography rotation.
inline ReadoutProbabilities ideal_readout(const Matrix& rho) {
    const BlochVector b = bloch_vector(rho);
    ReadoutProbabilities r;
    r.p_z_none = 0.5 * (1.0 - b.z);
    r.p_z_x = 0.5 * (1.0 - b.x);
    r.p_z_y = 0.5 * (1.0 - b.y);
    r.leakage = 1.0 - b.subspace_population;
    return r;
}

// Excited-state probability of a state already rotated by a tomography pulse.
inline double excited_probability(const Matrix& rho) {
    const double p = rho(0, 0).real() + rho(1, 1).real();
    return p > 0.0 ? rho(1, 1).real() / p : 0.5;
}

struct TomographyRecord {
    double sx{0.0};
    double sy{0.0};
    double sz{0.0};
    double leakage{0.0};
    std::int64_t shots{0};  // 0: exact expectations
    std::uint64_t seed{0};
    std::vector<std::string> warnings;

    double bloch_length() const { return std::sqrt(sx * sx + sy * sy + sz * sz); }
};

struct ExactReadout {};
struct SampledReadout {
    std::int64_t shots{10000};
    std::uint64_t seed{1};
};

inline TomographyRecord tomography(const ReadoutProbabilities& readout, ExactReadout = {}) {
    TomographyRecord rec;
    rec.sx = 1.0 - 2.0 * readout.p_z_x;
    rec.sy = 1.0 - 2.0 * readout.p_z_y;
    rec.sz = 1.0 - 2.0 * readout.p_z_none;
    rec.leakage = readout.leakage;
    return rec;
}

// Bernoulli shots per setting from P_z, inverted to expectations. The
// generator is seeded explicitly; the same seed gives identical records.
inline TomographyRecord tomography(const ReadoutProbabilities& readout, const SampledReadout& mode) {
    if (mode.shots <= 0) throw ConfigError("tomography: shots must be positive in sampled mode");
    TomographyRecord rec;
    rec.shots = mode.shots;
    rec.seed = mode.seed;
    rec.leakage = readout.leakage;
    if (mode.shots < 100) rec.warnings.push_back("tomography: fewer than 100 shots per setting");
    std::mt19937_64 rng(mode.seed);
    auto estimate = [&](double p) {
        std::bernoulli_distribution shot(std::clamp(p, 0.0, 1.0));
        std::int64_t excited = 0;
        for (std::int64_t i = 0; i < mode.shots; ++i) excited += shot(rng) ? 1 : 0;
        return 1.0 - 2.0 * static_cast<double>(excited) / static_cast<double>(mode.shots);
    };
    rec.sx = estimate(readout.p_z_x);
    rec.sy = estimate(readout.p_z_y);
    rec.sz = estimate(readout.p_z_none);
    return rec;
}

// γ = atan2(⟨σ_y⟩, ⟨σ_x⟩); unchanged by uniform shrinkage of the in-plane vector.
inline double extract_phase(const TomographyRecord& rec) {
    if (rec.sx * rec.sx + rec.sy * rec.sy <= 1e-6) {
        throw NumericalError("extract_phase: in-plane Bloch vector too short, phase undefined");
    }
    return std::atan2(rec.sy, rec.sx);
}

// Branch of `phase` (mod 2π) nearest to `reference`.
inline double nearest_branch(double phase, double reference) {
    return reference + std::remainder(phase - reference, kTwoPi);
}

// Nearest-branch continuation along a sweep; the first value is placed on the
// branch nearest `anchor`. Adjacent true phases must differ by less than π.
inline std::vector<double> unwrap_phases(std::span<const double> phases, double anchor = 0.0) {
    std::vector<double> out;
    out.reserve(phases.size());
    double ref = anchor;
    for (double p : phases) {
        if (!std::isfinite(p)) {
            out.push_back(p);
            continue;
        }
        const double u = nearest_branch(p, ref);
        out.push_back(u);
        ref = u;
    }
    return out;
}

// Qubit density operator with Bloch vector r in the readout frame.
inline DensityOperator qubit_state(double x, double y, double z) {
    Matrix rho(2, 2);
    rho(0, 0) = 0.5 * (1.0 + z);
    rho(1, 1) = 0.5 * (1.0 - z);
    rho(0, 1) = cplx{0.5 * x, 0.5 * y};
    rho(1, 0) = std::conj(rho(0, 1));
    return {rho};
}

// Maximum-likelihood state under isotropic Gaussian noise on the expectations:
// the raw vector if it lies in the Bloch ball, else its radial projection.
inline DensityOperator ml_reconstruct(const TomographyRecord& rec) {
    double x = rec.sx, y = rec.sy, z = rec.sz;
    const double len = std::sqrt(x * x + y * y + z * z);
    if (len > 1.0) {
        x /= len;
        y /= len;
        z /= len;
    }
    return qubit_state(x, y, z);
}

namespace detail {

// Eigenvalues at the round-off floor are set to zero before the square root,
// which would otherwise lift them to ~1e-8.
inline Matrix psd_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.adjoint()));
    const double floor = 16.0 * std::numeric_limits<double>::epsilon() *
                         std::max(solver.eigenvalues().cwiseAbs().maxCoeff(), 1.0) * static_cast<double>(m.rows());
    RealVector ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) > floor ? std::sqrt(ev(i)) : 0.0;
    return solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().adjoint();
}

inline void require_physical(const Matrix& m, const char* name) {
    if (m.rows() != m.cols()) throw InvalidStateError(std::string("fidelity: ") + name + " is not square");
    DensityOperator{m}.check(1e-9, 1e-9, 1e-9);
}

}  // namespace detail

// Uhlmann fidelity F = tr√(√ρ σ √ρ), evaluated as the trace norm ‖√ρ √σ‖₁
// (sum of singular values), which avoids square roots of tiny eigenvalues.
inline double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.dim() != sigma.dim()) throw ConfigError("fidelity: dimension mismatch");
    detail::require_physical(rho.matrix, "rho");
    detail::require_physical(sigma.matrix, "sigma");
    const Matrix product = detail::psd_sqrt(rho.matrix) * detail::psd_sqrt(sigma.matrix);
    Eigen::JacobiSVD<Matrix> svd(product);
    return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

// Two-level closed form F = √(tr ρσ + 2√(det ρ det σ)).
inline double qubit_fidelity_closed_form(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.dim() != 2 || sigma.dim() != 2) throw ConfigError("qubit_fidelity_closed_form: qubit states only");
    const double overlap = (rho.matrix * sigma.matrix).trace().real();
    const double det = std::max(rho.matrix.determinant().real(), 0.0) * std::max(sigma.matrix.determinant().real(), 0.0);
    return std::clamp(std::sqrt(std::max(overlap + 2.0 * std::sqrt(det), 0.0)), 0.0, 1.0);
}

// Ideal adiabatic gate output: equatorial pure state at phase γ.
inline DensityOperator adiabatic_target(double gamma) {
    return qubit_state(std::cos(gamma), std::sin(gamma), 0.0);
}

}  // namespace geophase
