// adiabatic.hpp — Adiabatic geometric phases of the driven transmon.
//
// Three routes to the Berry phase of a dressed state on the circular path
// φ: 0 → 2π at fixed Ω, Δ:
//   * spectral:   γ = 2π⟨Φ(0)|N|Φ(0)⟩, from the rotation identity
//                 H(φ) = e^{−iφN} H(0) e^{iφN};
//   * line integral: gauge-invariant discrete product of overlaps around the loop;
//   * two-level closed form π(1 ± cos ϑ) plus the second-order correction from
//     the second excited state.

#pragma once

#include "geophase/core.hpp"
#include "geophase/model.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace geophase {

enum class LoopDirection { forward = 1, reverse = -1 };

inline double sign_of(LoopDirection d) { return d == LoopDirection::forward ? 1.0 : -1.0; }

struct DressedBasis {
    RealVector eigenvalues;         // ascending, rad/ns
    Matrix eigenvectors;            // columns, same order as eigenvalues
    std::vector<int> branch_map;    // bare level j → column index

    Vector state_for_level(int level) const {
        if (level < 0 || level >= static_cast<int>(branch_map.size())) {
            throw ConfigError("DressedBasis: level " + std::to_string(level) + " out of range");
        }
        return eigenvectors.col(branch_map[static_cast<std::size_t>(level)]);
    }
    double energy_for_level(int level) const {
        return eigenvalues(branch_map.at(static_cast<std::size_t>(level)));
    }
};

namespace detail {

// Rotates a vector so its largest-magnitude component is real and positive.
inline void fix_phase(Eigen::Ref<Vector> v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const cplx c = v(imax);
    if (std::abs(c) > 0.0) v *= std::conj(c) / std::abs(c);
}

inline constexpr double kOverlapAmbiguity = 1e-6;

// Index of the column of `candidates` with maximal overlap to `reference`.
// Throws if the two best overlaps are within kOverlapAmbiguity.
inline Eigen::Index best_overlap(const Vector& reference, const Matrix& candidates,
                                 const std::string& where) {
    const RealVector ov = (candidates.adjoint() * reference).cwiseAbs();
    Eigen::Index best = 0;
    ov.maxCoeff(&best);
    for (Eigen::Index k = 0; k < ov.size(); ++k) {
        if (k != best && ov(best) - ov(k) < kOverlapAmbiguity) {
            throw DegeneracyError("ambiguous eigenvector overlap at " + where);
        }
    }
    return best;
}

inline std::vector<int> track_branches(const DeviceParams& params, double omega, double delta,
                                       int ramp_steps, Matrix* final_vectors, RealVector* final_values) {
    const int n = params.n_levels;
    Matrix tracked = Matrix::Identity(n, n);
    std::vector<int> map(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) map[static_cast<std::size_t>(j)] = j;
    Matrix vecs = tracked;
    RealVector vals = RealVector::Zero(n);
    for (int s = 1; s <= ramp_steps; ++s) {
        const double om = omega * static_cast<double>(s) / ramp_steps;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(
            drive_hamiltonian(params.anharmonicities, delta, om, 0.0));
        if (solver.info() != Eigen::Success) throw NumericalError("dressed_basis: diagonalization failed");
        vecs = solver.eigenvectors();
        vals = solver.eigenvalues();
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        for (int j = 0; j < n; ++j) {
            const auto k = best_overlap(tracked.col(j), vecs, "ramp step " + std::to_string(s) + " of " +
                                                                   std::to_string(ramp_steps));
            if (used[static_cast<std::size_t>(k)]) {
                throw DegeneracyError("dressed_basis: two branches collapse onto one eigenvector at ramp step " +
                                      std::to_string(s));
            }
            used[static_cast<std::size_t>(k)] = true;
            map[static_cast<std::size_t>(j)] = static_cast<int>(k);
        }
        for (int j = 0; j < n; ++j) tracked.col(j) = vecs.col(map[static_cast<std::size_t>(j)]);
    }
    if (final_vectors) *final_vectors = vecs;
    if (final_values) *final_values = vals;
    return map;
}

}  // namespace detail

// Eigen-decomposition of H(0) with dressed states labelled by the bare level they
// connect to when Ω is ramped up from zero. The map must be stable under doubling
// the ramp resolution.
inline DressedBasis dressed_basis(const DeviceParams& params, const DriveConfig& drive, int ramp_steps = 64) {
    params.validate();
    if (drive.phi != 0.0) throw ConfigError("dressed_basis: drive phase must be zero");
    if (drive.omega < 0.0) throw ConfigError("dressed_basis: drive strength must be >= 0");
    if (ramp_steps < 64) throw ConfigError("dressed_basis: at least 64 ramp steps required");

    DressedBasis out;
    const int n = params.n_levels;
    if (drive.omega == 0.0) {
        out.eigenvectors = Matrix::Identity(n, n);
        out.eigenvalues = RealVector(n);
        out.branch_map.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            out.eigenvalues(j) = j * drive.delta + params.anharmonicities[static_cast<std::size_t>(j)];
            out.branch_map[static_cast<std::size_t>(j)] = j;
        }
        return out;
    }
    out.branch_map = detail::track_branches(params, drive.omega, drive.delta, ramp_steps,
                                            &out.eigenvectors, &out.eigenvalues);
    const auto refined = detail::track_branches(params, drive.omega, drive.delta, 2 * ramp_steps, nullptr, nullptr);
    if (refined != out.branch_map) {
        throw DegeneracyError("dressed_basis: branch map changes when the ramp resolution is doubled");
    }
    for (int k = 0; k < n; ++k) detail::fix_phase(out.eigenvectors.col(k));
    return out;
}

// γ = 2π⟨Φ|N|Φ⟩ for the dressed state connected to `level`; negated for the
// reversed loop.
inline double berry_phase_spectral(const DressedBasis& basis, int level,
                                   LoopDirection direction = LoopDirection::forward) {
    const Vector v = basis.state_for_level(level);
    double expect_n = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) expect_n += static_cast<double>(j) * std::norm(v(j));
    return sign_of(direction) * kTwoPi * expect_n;
}

// Wraps an angle into [0, 2π).
inline double wrap_two_pi(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

// Wraps an angle into (−π, π].
inline double wrap_pi(double x) {
    double r = wrap_two_pi(x);
    if (r > kPi) r -= kTwoPi;
    return r;
}

// Discrete line integral around the loop. With |Φ_i⟩ the tracked eigenvector
// at φ_i (n_steps points, closed on the starting vector), the overlap product
// gives γ_h = −Im ln Π⟨Φ_i|Φ_{i+1}⟩ with O(h²) error. The same vectors taken
// two at a time give γ_2h, and the result is the Richardson combination
// γ_h + (γ_h − γ_2h)/3 (O(h⁴)). Both products are gauge invariant, so the
// result does not depend on `gauge` (optional per-point phases, length
// n_steps). Defined mod 2π; returned in [0, 2π). n_steps must be even.
inline double berry_phase_line_integral(const DeviceParams& params, const DriveConfig& drive, int level,
                                        int n_steps, LoopDirection direction = LoopDirection::forward,
                                        const std::vector<double>* gauge = nullptr) {
    if (n_steps < 16) throw ConfigError("berry_phase_line_integral: n_steps must be >= 16");
    if (n_steps % 2 != 0) throw ConfigError("berry_phase_line_integral: n_steps must be even");
    if (gauge && gauge->size() != static_cast<std::size_t>(n_steps)) {
        throw ConfigError("berry_phase_line_integral: gauge length must equal n_steps");
    }
    DriveConfig at_zero = drive;
    at_zero.phi = 0.0;
    const DressedBasis basis = dressed_basis(params, at_zero);

    const double dir = sign_of(direction);
    std::vector<Vector> loop;
    loop.reserve(static_cast<std::size_t>(n_steps));
    loop.push_back(basis.state_for_level(level));
    for (int i = 1; i < n_steps; ++i) {
        const double phi = drive.phi + dir * kTwoPi * static_cast<double>(i) / n_steps;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(
            drive_hamiltonian(params.anharmonicities, drive.delta, drive.omega * std::cos(phi),
                              drive.omega * std::sin(phi)));
        if (solver.info() != Eigen::Success) throw NumericalError("berry_phase_line_integral: diagonalization failed");
        const auto k = detail::best_overlap(loop.back(), solver.eigenvectors(), "loop point " + std::to_string(i));
        loop.push_back(solver.eigenvectors().col(k));
    }
    if (std::abs(loop.back().dot(loop.front())) < 0.5) {
        throw DegeneracyError("berry_phase_line_integral: branch does not close on itself");
    }
    if (gauge) {
        for (int i = 0; i < n_steps; ++i) loop[static_cast<std::size_t>(i)] *= std::polar(1.0, (*gauge)[static_cast<std::size_t>(i)]);
    }

    auto loop_phase = [&](int stride) {
        cplx product{1.0, 0.0};
        for (int i = 0; i < n_steps; i += stride) {
            const cplx ov = loop[static_cast<std::size_t>(i)].dot(loop[static_cast<std::size_t>((i + stride) % n_steps)]);
            // only the argument matters; renormalize to keep the product well scaled
            product *= ov / std::abs(ov);
        }
        return -std::arg(product);
    };
    const double fine = loop_phase(1);
    const double coarse = loop_phase(2);
    return wrap_two_pi(fine + wrap_pi(fine - coarse) / 3.0);
}

enum class Branch { plus, minus };

// Closed form γ± = π(1 ± cos ϑ) of a spin-½ in a tilted field.
inline double berry_phase_two_level(double theta, Branch branch) {
    const double s = branch == Branch::plus ? 1.0 : -1.0;
    return kPi * (1.0 + s * std::cos(theta));
}

struct PerturbativeCorrection {
    double plus{0.0};
    double minus{0.0};
    double total{0.0};  // 2(Δγ₋ − Δγ₊)
};

inline constexpr double kPoleGuard = 1e-3;

// Second-order contribution of the second excited state, k = Δ/α₂.
inline PerturbativeCorrection berry_correction_perturbative(double theta, double k) {
    if (!(theta >= 0.0) || !(theta < 0.5 * kPi)) {
        throw ConfigError("berry_correction_perturbative: theta must lie in [0, pi/2)");
    }
    const double c = std::cos(theta);
    const double s2 = std::sin(theta) * std::sin(theta);
    auto branch = [&](double sgn) {
        const double denom = k - sgn * (3.0 * k + 2.0) * c;
        if (std::abs(denom) < kPoleGuard) {
            throw ValidityDomainError("berry_correction_perturbative: too close to the level crossing (|k -+ (3k+2)cos| = " +
                                      std::to_string(std::abs(denom)) + ")");
        }
        const double numer = 2.0 * k * (1.0 + sgn * c) + (2.0 * k - sgn * (3.0 * k + 2.0) * c) * s2;
        return kPi * k * s2 * numer / (denom * denom);
    };
    PerturbativeCorrection out;
    out.plus = branch(+1.0);
    out.minus = branch(-1.0);
    out.total = 2.0 * (out.minus - out.plus);
    return out;
}

enum class PredictionOrder { two_level, perturbative, exact_n };

struct PhaseResult {
    double gamma_plus{0.0};
    double gamma_minus{0.0};
    double delta_gamma_plus{0.0};
    double delta_gamma_minus{0.0};
    double delta_gamma{0.0};
    double gamma_pred{0.0};  // interferometer phase, unwrapped
    double a_solid{0.0};
    double k{0.0};           // Δ/α₂; zero without a second excited state
};

// k = Δ/α₂, or 0 for a two-level device (no second excited state).
inline double anharmonicity_ratio(const DeviceParams& params, double delta) {
    if (params.n_levels < 3) return 0.0;
    if (params.alpha2() == 0.0) throw ConfigError("anharmonicity_ratio: alpha_2 must be non-zero");
    return delta / params.alpha2();
}

// Phase read out by the C^{−+} interferometer, 4γ_g. The dressed state from |0⟩
// carries γ₋ and the one from |1⟩ carries γ₊; the echo sequence measures
// 2(γ₋ − γ₊) + 4π, which is 2A for a two-level system and varies continuously
// with A from 0.
inline PhaseResult predicted_interferometer_phase(const DeviceParams& params, double a_solid, double delta,
                                                  PredictionOrder order) {
    params.validate();
    if (!(a_solid >= 0.0) || !(a_solid < kTwoPi)) {
        throw ConfigError("predicted_interferometer_phase: solid angle must lie in [0, 2*pi)");
    }
    PhaseResult r;
    r.a_solid = a_solid;
    r.k = anharmonicity_ratio(params, delta);
    const double omega = omega_for_solid_angle(a_solid, delta);
    const double theta = effective_field({omega, 0.0, delta}).theta;
    const double g_plus0 = berry_phase_two_level(theta, Branch::plus);
    const double g_minus0 = berry_phase_two_level(theta, Branch::minus);

    switch (order) {
        case PredictionOrder::two_level:
            r.gamma_plus = g_plus0;
            r.gamma_minus = g_minus0;
            break;
        case PredictionOrder::perturbative: {
            const auto corr = berry_correction_perturbative(theta, r.k);
            r.delta_gamma_plus = corr.plus;
            r.delta_gamma_minus = corr.minus;
            r.gamma_plus = g_plus0 + corr.plus;
            r.gamma_minus = g_minus0 + corr.minus;
            break;
        }
        case PredictionOrder::exact_n: {
            const DressedBasis basis = dressed_basis(params, {omega, 0.0, delta});
            r.gamma_plus = berry_phase_spectral(basis, 1);
            r.gamma_minus = berry_phase_spectral(basis, 0);
            r.delta_gamma_plus = r.gamma_plus - g_plus0;
            r.delta_gamma_minus = r.gamma_minus - g_minus0;
            break;
        }
    }
    r.delta_gamma = 2.0 * (r.delta_gamma_minus - r.delta_gamma_plus);
    r.gamma_pred = order == PredictionOrder::exact_n ? 2.0 * (r.gamma_minus - r.gamma_plus) + 2.0 * kTwoPi
                                                     : 2.0 * a_solid + r.delta_gamma;
    return r;
}

}  // namespace geophase
