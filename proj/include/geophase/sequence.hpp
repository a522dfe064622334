// sequence.hpp — Interferometric pulse program: Ramsey π/2 pulses, spin-echo π
// pulse, DRAG-shaped resonant rotations, adiabatic ramps and phase-swept loops.
//
// Controls are expressed in a single frame rotating at ω₀₁. The complex drive
// envelope Ω_x − iΩ_y multiplies √(j+1)|j+1⟩⟨j|, so an off-resonant tone at
// ω₀₁ − Δ with commanded phase φ appears with phase φ − Δ·t.

#pragma once

#include "geophase/core.hpp"
#include "geophase/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geophase {

enum class SegmentKind { ramp_up, phase_sweep, ramp_down, resonant_pulse, idle };

// Rotations in the readout Bloch frame (see estimate.hpp): y_half_pi takes |0⟩
// to +x, tomography_x takes +x to |0⟩, tomography_y takes +y to |0⟩.
enum class Rotation { x_half_pi, y_half_pi, x_pi, tomography_x, tomography_y };

enum class Contour { minus_plus, plus_minus, plus_plus, minus_minus };

inline std::string_view to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::ramp_up: return "ramp_up";
        case SegmentKind::phase_sweep: return "phase_sweep";
        case SegmentKind::ramp_down: return "ramp_down";
        case SegmentKind::resonant_pulse: return "resonant_pulse";
        case SegmentKind::idle: return "idle";
    }
    return "?";
}

inline std::string_view to_string(Rotation r) {
    switch (r) {
        case Rotation::x_half_pi: return "x_half_pi";
        case Rotation::y_half_pi: return "y_half_pi";
        case Rotation::x_pi: return "x_pi";
        case Rotation::tomography_x: return "tomography_x";
        case Rotation::tomography_y: return "tomography_y";
    }
    return "?";
}

inline std::string_view to_string(Contour c) {
    switch (c) {
        case Contour::minus_plus: return "-+";
        case Contour::plus_minus: return "+-";
        case Contour::plus_plus: return "++";
        case Contour::minus_minus: return "--";
    }
    return "?";
}

inline Contour parse_contour(std::string_view s) {
    if (s == "-+") return Contour::minus_plus;
    if (s == "+-") return Contour::plus_minus;
    if (s == "++") return Contour::plus_plus;
    if (s == "--") return Contour::minus_minus;
    throw ConfigError("unknown contour '" + std::string(s) + "' (expected -+, +-, ++ or --)");
}

// Sweep directions of the first and second loop.
inline std::pair<int, int> contour_directions(Contour c) {
    switch (c) {
        case Contour::minus_plus: return {-1, +1};
        case Contour::plus_minus: return {+1, -1};
        case Contour::plus_plus: return {+1, +1};
        case Contour::minus_minus: return {-1, -1};
    }
    return {0, 0};
}

// Drive-quadrature phase and nominal rotation angle of a resonant pulse.
struct RotationSpec {
    double axis_phase;
    double angle;
};

inline RotationSpec rotation_spec(Rotation r) {
    switch (r) {
        case Rotation::x_half_pi: return {0.0, 0.5 * kPi};
        case Rotation::y_half_pi: return {-0.5 * kPi, 0.5 * kPi};
        case Rotation::x_pi: return {0.0, kPi};
        case Rotation::tomography_x: return {0.5 * kPi, 0.5 * kPi};
        case Rotation::tomography_y: return {kPi, 0.5 * kPi};
    }
    return {0.0, 0.0};
}

struct Segment {
    SegmentKind kind{SegmentKind::idle};
    double duration{0.0};       // ns
    double omega_target{0.0};   // rad/ns, ramps and sweeps
    int sweep_direction{0};     // ±1, phase_sweep only
    Rotation rotation{Rotation::x_pi};
    double drag_coefficient{0.0};
    double sweep_edge{0.0};     // phase_sweep: fraction of τ over which φ̇ rises (and falls)
};

struct PulseSequence {
    std::vector<Segment> segments;
    Contour contour{Contour::minus_plus};
    double delta{0.0};        // rad/ns
    double alpha2{0.0};       // rad/ns, used by DRAG shaping
    double tau_sweep{0.0};    // ns
    double total_duration{0.0};
    double t_origin{0.0};     // global time of the first segment, ns
    std::vector<std::string> warnings;

    double start_of(std::size_t index) const {
        double t = 0.0;
        for (std::size_t i = 0; i < index; ++i) t += segments[i].duration;
        return t;
    }
};

struct SequenceOptions {
    double ramp_ns{40.0};
    double pi2_ns{12.0};            // every resonant pulse, π pulses included
    double budget_ns{700.0};        // idle padding fills up to this duration
    bool drag{true};
    double drag_coefficient{0.5};
    double alpha2{units::from_mhz(-423.0)};
    // φ̇ rises and falls with cosine edges over this fraction of τ at each end,
    // so the field in the co-rotating frame tilts smoothly; 0 is a uniform sweep.
    double sweep_edge{0.2};
    // Largest tolerated a = |ϑ̇|/|B| during the ramps; exceeding it adds a warning.
    double ramp_adiabaticity_bound{0.1};
};

// Peak a = |Δ|·|Ω̇|/|B|³ over a cosine ramp of the given duration to Ω.
inline double ramp_adiabaticity_peak(double omega, double delta, double ramp_ns) {
    double peak = 0.0;
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
        const double x = kPi * i / n;
        const double om = 0.5 * omega * (1.0 - std::cos(x));
        const double rate = 0.5 * kPi / ramp_ns * omega * std::sin(x);
        const double b = std::hypot(om, delta);
        if (b > 0.0) peak = std::max(peak, std::abs(delta) * rate / (b * b * b));
    }
    return peak;
}

// [π/2]–[idle][ramp↑][sweep d₁][ramp↓][idle]–[π]–[idle][ramp↑][sweep d₂][ramp↓][idle]–[tomography]
// The four idle blocks are equal, keeping the echo midway between the loops and
// the total at the budget. A sequence longer than the budget gets no padding
// and a warning.
inline PulseSequence build_interferometer_sequence(Contour contour, double a_solid, double delta, double tau_sweep,
                                                   const SequenceOptions& opt = {}) {
    if (!(a_solid > 0.0) || !(a_solid < kTwoPi)) {
        throw ConfigError("build_interferometer_sequence: solid angle must lie in (0, 2*pi)");
    }
    if (!(tau_sweep > 0.0)) throw ConfigError("build_interferometer_sequence: tau must be positive");
    if (!(opt.ramp_ns > 0.0) || !(opt.pi2_ns > 0.0)) {
        throw ConfigError("build_interferometer_sequence: segment durations must be positive");
    }
    if (opt.drag && opt.alpha2 == 0.0) throw ConfigError("build_interferometer_sequence: DRAG needs alpha2 != 0");
    if (!(opt.sweep_edge >= 0.0) || !(opt.sweep_edge <= 0.5)) {
        throw ConfigError("build_interferometer_sequence: sweep_edge must lie in [0, 0.5]");
    }

    PulseSequence seq;
    seq.contour = contour;
    seq.delta = delta;
    seq.alpha2 = opt.alpha2;
    seq.tau_sweep = tau_sweep;
    const double omega = omega_for_solid_angle(a_solid, delta);
    const double drag = opt.drag ? opt.drag_coefficient : 0.0;

    const double ramp_a = ramp_adiabaticity_peak(omega, delta, opt.ramp_ns);
    if (ramp_a > opt.ramp_adiabaticity_bound) {
        std::ostringstream msg;
        msg << "ramp adiabaticity " << ramp_a << " exceeds the bound " << opt.ramp_adiabaticity_bound;
        seq.warnings.push_back(msg.str());
    }

    const double core = 3.0 * opt.pi2_ns + 2.0 * (2.0 * opt.ramp_ns + tau_sweep);
    double pad = 0.0;
    if (core > opt.budget_ns) {
        std::ostringstream msg;
        msg << "sequence duration " << core << " ns exceeds the " << opt.budget_ns << " ns budget";
        seq.warnings.push_back(msg.str());
    } else {
        pad = (opt.budget_ns - core) / 4.0;
    }

    auto pulse = [&](Rotation r) {
        Segment s;
        s.kind = SegmentKind::resonant_pulse;
        s.duration = opt.pi2_ns;
        s.rotation = r;
        s.drag_coefficient = drag;
        return s;
    };
    auto idle = [&] {
        Segment s;
        s.kind = SegmentKind::idle;
        s.duration = pad;
        return s;
    };
    auto add_loop = [&](int direction) {
        Segment up{SegmentKind::ramp_up, opt.ramp_ns, omega, 0, Rotation::x_pi, 0.0};
        Segment sweep{SegmentKind::phase_sweep, tau_sweep, omega, direction, Rotation::x_pi, 0.0, opt.sweep_edge};
        Segment down{SegmentKind::ramp_down, opt.ramp_ns, omega, 0, Rotation::x_pi, 0.0};
        if (pad > 0.0) seq.segments.push_back(idle());
        seq.segments.push_back(up);
        seq.segments.push_back(sweep);
        seq.segments.push_back(down);
        if (pad > 0.0) seq.segments.push_back(idle());
    };

    const auto [d1, d2] = contour_directions(contour);
    seq.segments.push_back(pulse(Rotation::y_half_pi));
    add_loop(d1);
    seq.segments.push_back(pulse(Rotation::x_pi));
    add_loop(d2);
    seq.segments.push_back(pulse(Rotation::tomography_x));

    for (const auto& s : seq.segments) seq.total_duration += s.duration;
    return seq;
}

enum class TomographySetting { none, x, y };

// Same sequence with the trailing tomography pulse set for the requested
// expectation value; `none` replaces it by an idle of equal length.
inline PulseSequence with_tomography(PulseSequence seq, TomographySetting setting) {
    if (seq.segments.empty() || seq.segments.back().kind != SegmentKind::resonant_pulse) {
        throw ConfigError("with_tomography: sequence does not end in a tomography pulse");
    }
    Segment& last = seq.segments.back();
    switch (setting) {
        case TomographySetting::x: last.rotation = Rotation::tomography_x; break;
        case TomographySetting::y: last.rotation = Rotation::tomography_y; break;
        case TomographySetting::none: last.kind = SegmentKind::idle; break;
    }
    return seq;
}

// Splits off the trailing segment; the tail keeps global time through t_origin.
inline std::pair<PulseSequence, PulseSequence> split_last(const PulseSequence& seq) {
    if (seq.segments.size() < 2) throw ConfigError("split_last: need at least two segments");
    PulseSequence head = seq;
    PulseSequence tail = seq;
    head.segments.pop_back();
    head.total_duration = seq.total_duration - seq.segments.back().duration;
    tail.segments = {seq.segments.back()};
    tail.total_duration = seq.segments.back().duration;
    tail.t_origin = seq.t_origin + head.total_duration;
    return {std::move(head), std::move(tail)};
}

// Human-readable form, one segment per line.
inline std::string to_text(const PulseSequence& seq) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6);
    os << "# contour=" << to_string(seq.contour) << " delta_mhz=" << units::to_mhz(seq.delta)
       << " tau_ns=" << seq.tau_sweep << " total_ns=" << seq.total_duration << '\n';
    for (const auto& s : seq.segments) {
        os << to_string(s.kind) << ' ' << s.duration;
        switch (s.kind) {
            case SegmentKind::ramp_up:
            case SegmentKind::ramp_down:
                os << " omega_mhz=" << units::to_mhz(s.omega_target);
                break;
            case SegmentKind::phase_sweep:
                os << " omega_mhz=" << units::to_mhz(s.omega_target) << " direction=" << std::showpos
                   << s.sweep_direction << std::noshowpos << " edge=" << s.sweep_edge;
                break;
            case SegmentKind::resonant_pulse:
                os << " rotation=" << to_string(s.rotation) << " drag=" << s.drag_coefficient;
                break;
            case SegmentKind::idle: break;
        }
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Envelopes

// Truncated Gaussian (σ = T/4) lifted to zero at both edges, scaled to `area`.
struct GaussianPulse {
    double duration;
    double area;

    double sigma() const { return duration / 4.0; }
    double edge() const { return std::exp(-0.5 * std::pow(0.5 * duration / sigma(), 2)); }
    double norm() const {
        const double s = sigma();
        return s * std::sqrt(kTwoPi) * std::erf(0.5 * duration / (std::sqrt(2.0) * s)) - duration * edge();
    }
    double value(double t) const {
        const double x = (t - 0.5 * duration) / sigma();
        return area * (std::exp(-0.5 * x * x) - edge()) / norm();
    }
    double derivative(double t) const {
        const double s = sigma();
        const double x = (t - 0.5 * duration) / s;
        return area * (-x / s) * std::exp(-0.5 * x * x) / norm();
    }
};

// ½(1 − cos) ramp profile of a magnitude going 0 → target (or back).
inline double ramp_profile(double t, double duration, bool up) {
    const double c = std::cos(kPi * t / duration);
    return up ? 0.5 * (1.0 - c) : 0.5 * (1.0 + c);
}
inline double ramp_profile_rate(double t, double duration, bool up) {
    const double s = 0.5 * kPi / duration * std::sin(kPi * t / duration);
    return up ? s : -s;
}

// Fraction of the 2π winding completed at u = t/τ. The rate is flat between
// raised-cosine edges of width f·τ; f = 0 is uniform, f = 0.5 a full Hann window.
inline double sweep_winding(double u, double f) {
    u = std::clamp(u, 0.0, 1.0);
    if (f <= 0.0) return u;
    auto rise = [f](double x) { return 0.5 * (x - f / kPi * std::sin(kPi * x / f)); };
    double w;
    if (u < f) {
        w = rise(u);
    } else if (u <= 1.0 - f) {
        w = 0.5 * f + (u - f);
    } else {
        w = (1.0 - f) - rise(1.0 - u);
    }
    return w / (1.0 - f);
}
inline double sweep_winding_rate(double u, double f) {
    u = std::clamp(u, 0.0, 1.0);
    if (f <= 0.0) return 1.0;
    double r = 1.0;
    if (u < f) r = 0.5 * (1.0 - std::cos(kPi * u / f));
    else if (u > 1.0 - f) r = 0.5 * (1.0 - std::cos(kPi * (1.0 - u) / f));
    return r / (1.0 - f);
}

struct Quadratures {
    std::vector<double> in_phase;
    std::vector<double> quadrature;
};

// First-order DRAG on sampled envelope data: the orthogonal channel carries
// Ω̇/α₂ (central differences inside, one-sided at the ends). With the e^{−iφ}
// ladder convention this is the sign that cancels the |1⟩→|2⟩ transition.
inline Quadratures drag_envelope(std::span<const double> base, double dt, double alpha2, double coefficient = 1.0) {
    if (alpha2 == 0.0) throw ConfigError("drag_envelope: alpha2 must be non-zero");
    if (!(dt > 0.0)) throw ConfigError("drag_envelope: dt must be positive");
    Quadratures q;
    q.in_phase.assign(base.begin(), base.end());
    q.quadrature.assign(base.size(), 0.0);
    const std::size_t n = base.size();
    if (n < 3) return q;
    for (std::size_t i = 0; i < n; ++i) {
        double d;
        if (i == 0) {
            d = (-3.0 * base[0] + 4.0 * base[1] - base[2]) / (2.0 * dt);
        } else if (i + 1 == n) {
            d = (3.0 * base[n - 1] - 4.0 * base[n - 2] + base[n - 3]) / (2.0 * dt);
        } else {
            d = (base[i + 1] - base[i - 1]) / (2.0 * dt);
        }
        q.quadrature[i] = coefficient * d / alpha2;
    }
    return q;
}

// ---------------------------------------------------------------------------
// Sampling

struct ControlSample {
    double t{0.0};
    double omega_x{0.0};
    double omega_y{0.0};
    double delta_diag{0.0};
    // Off-resonant field in the drive frame (zero outside ramps and sweeps);
    // feeds the adiabaticity parameter.
    double field_omega{0.0};
    double field_omega_rate{0.0};
    double field_phi_rate{0.0};
    double field_delta{0.0};
    bool off_resonant{false};
};

struct ControlTrack {
    double dt{0.0};
    std::vector<ControlSample> samples;
};

namespace detail {

// Commanded drive phase at local time t within an off-resonant segment.
inline double commanded_phase(const Segment& s, double t_local) {
    if (s.kind == SegmentKind::phase_sweep) {
        return s.sweep_direction * kTwoPi * sweep_winding(t_local / s.duration, s.sweep_edge);
    }
    return 0.0;
}

inline double offres_magnitude(const Segment& s, double t_local) {
    switch (s.kind) {
        case SegmentKind::ramp_up: return s.omega_target * ramp_profile(t_local, s.duration, true);
        case SegmentKind::ramp_down: return s.omega_target * ramp_profile(t_local, s.duration, false);
        case SegmentKind::phase_sweep: return s.omega_target;
        default: return 0.0;
    }
}

inline bool is_offres(const Segment& s) {
    return s.kind == SegmentKind::ramp_up || s.kind == SegmentKind::phase_sweep || s.kind == SegmentKind::ramp_down;
}

inline ControlSample evaluate(const PulseSequence& seq, std::size_t index, double t_start, double t) {
    const Segment& s = seq.segments[index];
    const double tl = t - t_start;
    ControlSample c;
    c.t = seq.t_origin + t;
    if (s.kind == SegmentKind::resonant_pulse) {
        const auto spec = rotation_spec(s.rotation);
        const GaussianPulse g{s.duration, spec.angle};
        const cplx env{g.value(tl), s.drag_coefficient * g.derivative(tl) / seq.alpha2};
        const cplx e = env * std::polar(1.0, spec.axis_phase);
        c.omega_x = e.real();
        c.omega_y = e.imag();
    } else if (is_offres(s)) {
        const double mag = offres_magnitude(s, tl);
        // single ω₀₁ frame: the tone at ω₀₁ − Δ advances as −Δ·t
        const double phase = commanded_phase(s, tl) - seq.delta * c.t;
        c.omega_x = mag * std::cos(phase);
        c.omega_y = mag * std::sin(phase);
        c.off_resonant = true;
        c.field_omega = mag;
        c.field_delta = seq.delta;
        if (s.kind == SegmentKind::phase_sweep) {
            c.field_phi_rate = s.sweep_direction * kTwoPi / s.duration * sweep_winding_rate(tl / s.duration, s.sweep_edge);
        } else {
            c.field_omega_rate = s.omega_target * ramp_profile_rate(tl, s.duration, s.kind == SegmentKind::ramp_up);
        }
    }
    return c;
}

}  // namespace detail

// Samples the sequence on t_k = t_origin + k·dt, k = 0 … total/dt. dt must divide every
// segment duration to within 0.1%. Samples on a boundary belong to the segment
// that starts there (the last sample to the last segment).
inline ControlTrack sample_controls(const PulseSequence& seq, double dt) {
    if (!(dt > 0.0)) throw ConfigError("sample_controls: dt must be positive");
    if (seq.segments.empty()) throw ConfigError("sample_controls: empty sequence");
    std::vector<double> starts;
    double t = 0.0;
    for (const auto& s : seq.segments) {
        if (!(s.duration > 0.0)) throw ConfigError("sample_controls: segment durations must be positive");
        const double steps = s.duration / dt;
        if (std::abs(steps - std::round(steps)) * dt > 1e-3 * s.duration) {
            throw ConfigError("sample_controls: dt does not divide a " + std::string(to_string(s.kind)) +
                              " segment of " + std::to_string(s.duration) + " ns");
        }
        starts.push_back(t);
        t += s.duration;
    }

    // phase continuity between adjacent off-resonant segments
    for (std::size_t i = 0; i + 1 < seq.segments.size(); ++i) {
        const auto& a = seq.segments[i];
        const auto& b = seq.segments[i + 1];
        if (!detail::is_offres(a) || !detail::is_offres(b)) continue;
        const double tb = seq.t_origin + starts[i + 1];
        const double left = detail::commanded_phase(a, a.duration) - seq.delta * tb;
        const double right = detail::commanded_phase(b, 0.0) - seq.delta * tb;
        double jump = std::fmod(left - right, kTwoPi);
        if (jump > kPi) jump -= kTwoPi;
        if (jump < -kPi) jump += kTwoPi;
        if (std::abs(jump) > 1e-9) {
            throw NumericalError("sample_controls: drive phase jumps by " + std::to_string(jump) +
                                 " rad at t = " + std::to_string(tb) + " ns");
        }
    }

    ControlTrack track;
    track.dt = dt;
    const auto count = static_cast<std::size_t>(std::llround(t / dt));
    track.samples.reserve(count + 1);
    std::size_t seg = 0;
    for (std::size_t k = 0; k <= count; ++k) {
        const double tk = static_cast<double>(k) * dt;
        while (seg + 1 < seq.segments.size() && tk >= starts[seg + 1] - 1e-9 * dt) ++seg;
        track.samples.push_back(detail::evaluate(seq, seg, starts[seg], tk));
    }
    return track;
}

// Area of a sampled envelope by composite Simpson (trapezoid for the last
// interval when the count is even).
inline double sampled_area(std::span<const double> y, double dt) {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    double sum = 0.0;
    std::size_t last = n - 1;
    if (last % 2 == 1) {
        sum += 0.5 * dt * (y[last - 1] + y[last]);
        --last;
    }
    for (std::size_t i = 0; i + 2 <= last; i += 2) sum += dt / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
    return sum;
}

}  // namespace geophase
