// propagate.hpp — Schrödinger and Lindblad integration through sampled controls,
// plus the observables recorded along a trajectory.
//
// Both integrators are fixed-step RK4 in the interaction picture of the static
// diagonal D = diag(α_j). With α₀ = α₁ = 0 the qubit block is the same in both
// pictures; states are mapped back to the simulation frame on return. A step of
// length dt uses the control samples at t, t + dt/2 and t + dt, so the control
// track must be sampled at dt/2.

#pragma once

#include "geophase/core.hpp"
#include "geophase/model.hpp"
#include "geophase/sequence.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace geophase {

struct QuantumState {
    Vector amplitudes;

    static QuantumState basis(int n, int level) {
        QuantumState s{Vector::Zero(n)};
        s.amplitudes(level) = 1.0;
        return s;
    }
    Eigen::Index dim() const { return amplitudes.size(); }
    double norm() const { return amplitudes.norm(); }
};

struct DensityOperator {
    Matrix matrix;

    static DensityOperator pure(const Vector& psi) { return {psi * psi.adjoint()}; }
    static DensityOperator maximally_mixed(int n) { return {Matrix::Identity(n, n) / static_cast<double>(n)}; }

    Eigen::Index dim() const { return matrix.rows(); }
    double trace() const { return matrix.trace().real(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (matrix + matrix.adjoint()), Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }

    // Hermitian within herm_tol, unit trace within trace_tol, eigenvalues ≥ −psd_tol.
    void check(double herm_tol = 1e-10, double trace_tol = 1e-9, double psd_tol = 1e-9) const {
        if (matrix.rows() != matrix.cols()) throw InvalidStateError("DensityOperator: not square");
        if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > herm_tol) {
            throw InvalidStateError("DensityOperator: not Hermitian");
        }
        if (std::abs(trace() - 1.0) > trace_tol) {
            throw InvalidStateError("DensityOperator: trace " + std::to_string(trace()) + " != 1");
        }
        if (min_eigenvalue() < -psd_tol) throw InvalidStateError("DensityOperator: negative eigenvalue");
    }
};

// Qubit-subspace Bloch vector in the readout frame: s_x + i s_y = 2ρ₀₁/p,
// s_z = (ρ₀₀ − ρ₁₁)/p with p the subspace population. In this frame the
// drive quadratures Ω_x, Ω_y rotate about +x and +y, and P_z = (1 − s_z)/2 is
// the |1⟩ population.
struct BlochVector {
    double x{0.0};
    double y{0.0};
    double z{0.0};
    double subspace_population{0.0};

    double length() const { return std::sqrt(x * x + y * y + z * z); }
};

inline BlochVector bloch_vector(const Matrix& rho) {
    BlochVector b;
    const double p = rho(0, 0).real() + rho(1, 1).real();
    b.subspace_population = p;
    if (p <= 0.0) return b;
    b.x = 2.0 * rho(0, 1).real() / p;
    b.y = 2.0 * rho(0, 1).imag() / p;
    b.z = (rho(0, 0).real() - rho(1, 1).real()) / p;
    return b;
}
inline BlochVector bloch_vector(const Vector& psi) {
    const cplx c01 = psi(0) * std::conj(psi(1));
    Matrix rho(2, 2);
    rho << std::norm(psi(0)), c01, std::conj(c01), std::norm(psi(1));
    return bloch_vector(rho);
}

// Population outside {|0⟩, |1⟩}.
inline double leakage_population(const QuantumState& s) {
    if (s.dim() < 3) throw ConfigError("leakage_population: needs at least three levels");
    return s.amplitudes.tail(s.dim() - 2).squaredNorm();
}
inline double leakage_population(const DensityOperator& r) {
    if (r.dim() < 3) throw ConfigError("leakage_population: needs at least three levels");
    double p = 0.0;
    for (Eigen::Index j = 2; j < r.dim(); ++j) p += r.matrix(j, j).real();
    return p;
}

enum class PhaseReference { second_excited, ground };

struct ThreeLevelCoords {
    double beta1{0.0};
    double beta2{0.0};
    double chi1{0.0};
    double chi2{0.0};
    // ground: ⟨2|ψ⟩ vanished and the phases are taken relative to ⟨0|ψ⟩ instead
    PhaseReference reference{PhaseReference::second_excited};
};

// ψ ≅ e^{iχ₁} sinβ₁ cosβ₂|0⟩ + e^{iχ₂} sinβ₁ sinβ₂|1⟩ + cosβ₁|2⟩
inline ThreeLevelCoords three_level_coords(const QuantumState& s) {
    if (s.dim() != 3) throw ConfigError("three_level_coords: state must have three levels");
    const Vector v = s.amplitudes / s.amplitudes.norm();
    ThreeLevelCoords c;
    c.beta1 = std::acos(std::min(1.0, std::abs(v(2))));
    c.beta2 = std::atan2(std::abs(v(1)), std::abs(v(0)));
    auto rel = [](cplx a, cplx ref) {
        if (std::abs(a) == 0.0) return 0.0;
        double x = std::fmod(std::arg(a) - std::arg(ref), kTwoPi);
        return x < 0.0 ? x + kTwoPi : x;
    };
    if (std::abs(v(2)) > 1e-12) {
        c.chi1 = rel(v(0), v(2));
        c.chi2 = rel(v(1), v(2));
    } else {
        c.reference = PhaseReference::ground;
        const cplx ref = std::abs(v(0)) > 0.0 ? v(0) : v(1);
        c.chi1 = rel(v(0), ref);
        c.chi2 = rel(v(1), ref);
    }
    return c;
}

inline QuantumState from_three_level_coords(const ThreeLevelCoords& c) {
    Vector v(3);
    v(0) = std::polar(std::sin(c.beta1) * std::cos(c.beta2), c.chi1);
    v(1) = std::polar(std::sin(c.beta1) * std::sin(c.beta2), c.chi2);
    v(2) = std::cos(c.beta1);
    return {v};
}

// Instantaneous drive-frame field for the adiabaticity parameter.
struct FieldPoint {
    double omega{0.0};
    double omega_rate{0.0};
    double phi_rate{0.0};
    double delta{0.0};
};

// a = |d B̂/dt| / |B| = √(φ̇² sin²ϑ + ϑ̇²)/|B|; for a phase sweep this is
// φ̇ sin ϑ/|B|, for a ramp |ϑ̇|/|B|.
inline double adiabaticity_parameter(const FieldPoint& f) {
    const double b2 = f.omega * f.omega + f.delta * f.delta;
    if (!(b2 > 0.0)) throw DegeneracyError("adiabaticity_parameter: |B| = 0");
    const double b = std::sqrt(b2);
    const double sin_theta = f.omega / b;
    const double theta_rate = std::abs(f.delta) * f.omega_rate / b2;
    return std::sqrt(f.phi_rate * f.phi_rate * sin_theta * sin_theta + theta_rate * theta_rate) / b;
}

inline double adiabaticity_parameter(const ControlSample& c) {
    if (!c.off_resonant) return 0.0;
    return adiabaticity_parameter(FieldPoint{c.field_omega, c.field_omega_rate, c.field_phi_rate, c.field_delta});
}

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> sigma_x;
    std::vector<double> sigma_y;
    std::vector<double> sigma_z;
    std::vector<double> p2;
    std::vector<double> a_param;
    std::vector<ThreeLevelCoords> coords;  // filled for three-level runs when requested

    double max_p2() const {
        double m = 0.0;
        for (double v : p2) m = std::max(m, v);
        return m;
    }

    void write_csv(std::ostream& os) const {
        os << "t_ns,sx,sy,sz,p2,a_param\n";
        char buf[256];
        for (std::size_t i = 0; i < times.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.6f,%.10g,%.10g,%.10g,%.10g,%.10g\n", times[i], sigma_x[i], sigma_y[i],
                          sigma_z[i], p2[i], a_param[i]);
            os << buf;
        }
    }
};

struct PropagationOptions {
    int record_stride{100};      // record every n-th integration step (and the last)
    bool record_coords{false};   // three-level coordinates, n = 3 only
};

namespace detail {

inline void check_track(const ControlTrack& controls, double dt, int n) {
    if (!(dt > 0.0) || dt > 0.020 + 1e-12) throw ConfigError("propagate: dt must lie in (0, 20] ps");
    if (std::abs(controls.dt - 0.5 * dt) > 1e-9 * dt) {
        throw ConfigError("propagate: controls must be sampled at dt/2");
    }
    if (controls.samples.size() < 3 || controls.samples.size() % 2 == 0) {
        throw ConfigError("propagate: control track must hold an even number of half steps");
    }
    if (n < 2) throw ConfigError("propagate: need at least two levels");
}

// Interaction-picture drive Hamiltonian H_I(t) = e^{iDt}(H(t) − D)e^{−iDt}.
inline void interaction_hamiltonian(const std::vector<double>& alpha, const ControlSample& c, Matrix& h) {
    const auto n = static_cast<Eigen::Index>(alpha.size());
    h.setZero(n, n);
    const cplx lower{0.5 * c.omega_x, -0.5 * c.omega_y};
    for (Eigen::Index j = 0; j < n; ++j) h(j, j) = static_cast<double>(j) * c.delta_diag;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const double w = alpha[static_cast<std::size_t>(j + 1)] - alpha[static_cast<std::size_t>(j)];
        const cplx e = lower * std::sqrt(static_cast<double>(j + 1)) * std::polar(1.0, w * c.t);
        h(j + 1, j) = e;
        h(j, j + 1) = std::conj(e);
    }
}

inline Vector to_simulation_frame(const Vector& psi_i, const std::vector<double>& alpha, double t) {
    Vector out = psi_i;
    for (Eigen::Index j = 0; j < out.size(); ++j) out(j) *= std::polar(1.0, -alpha[static_cast<std::size_t>(j)] * t);
    return out;
}
inline Vector to_interaction_frame(const Vector& psi, const std::vector<double>& alpha, double t) {
    Vector out = psi;
    for (Eigen::Index j = 0; j < out.size(); ++j) out(j) *= std::polar(1.0, alpha[static_cast<std::size_t>(j)] * t);
    return out;
}
inline Matrix rho_frame(const Matrix& rho, const std::vector<double>& alpha, double t, double sign) {
    Matrix out = rho;
    for (Eigen::Index a = 0; a < rho.rows(); ++a) {
        for (Eigen::Index b = 0; b < rho.cols(); ++b) {
            const double w = alpha[static_cast<std::size_t>(a)] - alpha[static_cast<std::size_t>(b)];
            out(a, b) *= std::polar(1.0, sign * w * t);
        }
    }
    return out;
}

inline void record_point(TrajectoryRecord& rec, const Matrix& rho_sim, const ControlSample& c, bool leak) {
    const auto b = bloch_vector(rho_sim);
    rec.times.push_back(c.t);
    rec.sigma_x.push_back(b.x);
    rec.sigma_y.push_back(b.y);
    rec.sigma_z.push_back(b.z);
    double p2 = 0.0;
    if (leak) {
        for (Eigen::Index j = 2; j < rho_sim.rows(); ++j) p2 += rho_sim(j, j).real();
    }
    rec.p2.push_back(p2);
    rec.a_param.push_back(adiabaticity_parameter(c));
}

}  // namespace detail

struct SchrodingerResult {
    QuantumState state;
    TrajectoryRecord record;
    double norm_drift{0.0};
};

// Integrates iψ̇ = H(t)ψ. Throws if the norm drifts by more than 1e-8.
inline SchrodingerResult schrodinger_propagate(const ControlTrack& controls, const DeviceParams& params,
                                               const QuantumState& psi0, double dt,
                                               const PropagationOptions& opt = {}) {
    params.validate();
    const int n = params.n_levels;
    detail::check_track(controls, dt, n);
    if (psi0.dim() != n) throw ConfigError("schrodinger_propagate: state dimension mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-9) throw InvalidStateError("schrodinger_propagate: initial state not normalized");

    const auto& alpha = params.anharmonicities;
    const auto& s = controls.samples;
    const std::size_t steps = (s.size() - 1) / 2;
    const double t0 = s.front().t;
    Vector psi = detail::to_interaction_frame(psi0.amplitudes, alpha, t0);

    Matrix h0(n, n), h1(n, n), h2(n, n);
    SchrodingerResult out;
    const bool leak = n > 2;
    auto record = [&](std::size_t k) {
        const Vector sim = detail::to_simulation_frame(psi, alpha, s[k].t);
        detail::record_point(out.record, sim * sim.adjoint(), s[k], leak);
        if (opt.record_coords && n == 3) out.record.coords.push_back(three_level_coords({sim}));
    };
    record(0);

    const cplx minus_i{0.0, -1.0};
    detail::interaction_hamiltonian(alpha, s[0], h0);
    for (std::size_t i = 0; i < steps; ++i) {
        detail::interaction_hamiltonian(alpha, s[2 * i + 1], h1);
        detail::interaction_hamiltonian(alpha, s[2 * i + 2], h2);
        const Vector k1 = minus_i * (h0 * psi);
        const Vector k2 = minus_i * (h1 * (psi + 0.5 * dt * k1));
        const Vector k3 = minus_i * (h1 * (psi + 0.5 * dt * k2));
        const Vector k4 = minus_i * (h2 * (psi + dt * k3));
        psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        std::swap(h0, h2);
        if ((i + 1) % static_cast<std::size_t>(opt.record_stride) == 0 || i + 1 == steps) record(2 * i + 2);
    }

    out.norm_drift = std::abs(psi.norm() - psi0.norm());
    if (out.norm_drift > 1e-8) {
        throw NumericalError("schrodinger_propagate: norm drift " + std::to_string(out.norm_drift) +
                             " exceeds 1e-8; reduce dt");
    }
    out.state.amplitudes = detail::to_simulation_frame(psi, alpha, s.back().t);
    return out;
}

struct LindbladResult {
    DensityOperator state;
    TrajectoryRecord record;
};

// Relaxation and dephasing rates (1/ns) of the Lindblad model: L₁ = √(1/T₁)·a,
// L₂ = √(2Γ_φ)·N with Γ_φ = 1/T₂* − 1/(2T₁), so that the 0–1 coherence decays
// at 1/T₂*.
struct DecayRates {
    double relaxation{0.0};
    double dephasing{0.0};

    static DecayRates from(const DeviceParams& p) {
        if (!p.has_decoherence()) throw ConfigError("lindblad_propagate: T1 and T2* are required");
        DecayRates r;
        r.relaxation = 1.0 / *p.t1_ns;
        r.dephasing = 1.0 / *p.t2_star_ns - 0.5 * r.relaxation;
        if (r.dephasing < 0.0) {
            throw ConfigError("lindblad_propagate: unphysical coherence times (T2* > 2 T1 gives negative pure dephasing)");
        }
        return r;
    }
};

// Integrates ρ̇ = −i[H, ρ] + Σ D[L_m]ρ. Trace, Hermiticity and positivity are
// checked at every recorded step (1e-8).
inline LindbladResult lindblad_propagate(const ControlTrack& controls, const DeviceParams& params,
                                         const DensityOperator& rho0, double dt, const PropagationOptions& opt = {}) {
    params.validate();
    const DecayRates rates = DecayRates::from(params);
    const int n = params.n_levels;
    detail::check_track(controls, dt, n);
    if (rho0.dim() != n) throw ConfigError("lindblad_propagate: density operator dimension mismatch");
    rho0.check();

    const auto& alpha = params.anharmonicities;
    const auto& s = controls.samples;
    const std::size_t steps = (s.size() - 1) / 2;

    RealVector number(n);
    for (int j = 0; j < n; ++j) number(j) = j;
    // anticommutator weights: ½(γ₁ j + 2Γ_φ j²) on the diagonal of L†L sums
    RealVector damp(n);
    for (int j = 0; j < n; ++j) damp(j) = 0.5 * (rates.relaxation * j + 2.0 * rates.dephasing * j * j);

    Matrix h(n, n);
    Matrix lower_i(n, n);
    auto rhs = [&](const ControlSample& c, const Matrix& r) -> Matrix {
        detail::interaction_hamiltonian(alpha, c, h);
        Matrix out = cplx{0.0, -1.0} * (h * r - r * h);
        lower_i.setZero();
        for (int j = 1; j < n; ++j) {
            const double w = alpha[static_cast<std::size_t>(j - 1)] - alpha[static_cast<std::size_t>(j)];
            lower_i(j - 1, j) = std::sqrt(rates.relaxation * j) * std::polar(1.0, w * c.t);
        }
        out += lower_i * r * lower_i.adjoint();
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                out(a, b) += 2.0 * rates.dephasing * number(a) * number(b) * r(a, b) - (damp(a) + damp(b)) * r(a, b);
            }
        }
        return out;
    };

    Matrix rho = detail::rho_frame(rho0.matrix, alpha, s.front().t, +1.0);
    LindbladResult out;
    const bool leak = n > 2;
    auto record = [&](std::size_t k) {
        const DensityOperator sim{detail::rho_frame(rho, alpha, s[k].t, -1.0)};
        sim.check(1e-10, 1e-8, 1e-8);
        detail::record_point(out.record, sim.matrix, s[k], leak);
    };
    record(0);

    for (std::size_t i = 0; i < steps; ++i) {
        const auto& c0 = s[2 * i];
        const auto& c1 = s[2 * i + 1];
        const auto& c2 = s[2 * i + 2];
        const Matrix k1 = rhs(c0, rho);
        const Matrix k2 = rhs(c1, rho + 0.5 * dt * k1);
        const Matrix k3 = rhs(c1, rho + 0.5 * dt * k2);
        const Matrix k4 = rhs(c2, rho + dt * k3);
        rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if ((i + 1) % static_cast<std::size_t>(opt.record_stride) == 0 || i + 1 == steps) record(2 * i + 2);
    }
    out.state.matrix = detail::rho_frame(rho, alpha, s.back().t, -1.0);
    out.state.matrix = 0.5 * (out.state.matrix + out.state.matrix.adjoint());
    return out;
}

// Controls sampled for an integration step of dt.
inline ControlTrack integration_controls(const PulseSequence& seq, double dt) { return sample_controls(seq, 0.5 * dt); }

}  // namespace geophase
