// Acceptance report: one PASS/FAIL line per criterion with the measured value
// and the tolerance it is held to. Lines tagged EXAMPLE are worked examples
// reported for reference; they do not affect the exit status.

#include "geophase/adiabatic.hpp"
#include "geophase/campaigns.hpp"
#include "geophase/estimate.hpp"
#include "geophase/experiment.hpp"
#include "geophase/model.hpp"
#include "geophase/propagate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

using namespace geophase;

namespace {

const double kAlpha2 = units::from_mhz(-423.0);
int failures = 0;

void report(const char* tag, bool pass, const std::string& title, const std::string& detail, bool gating = true) {
    std::printf("%s %-8s %s: %s\n", pass ? "PASS" : "FAIL", tag, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (gating && !pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

DeviceParams device(int n) {
    auto p = DeviceParams::with_alpha2(n, kAlpha2);
    p.t1_ns = 840.0;
    p.t2_star_ns = 1030.0;
    return p;
}

ExperimentSettings settings(bool decoherence, double dt = 0.010) {
    ExperimentSettings s;
    s.device = device(4);
    s.decoherence = decoherence;
    s.dt = dt;
    return s;
}

double exact_phase(double a, double delta) {
    return predicted_interferometer_phase(device(4), a, delta, PredictionOrder::exact_n).gamma_pred;
}

// Detuning × solid-angle grid shared by the prediction checks.
struct GridPoint {
    double delta;
    double a;
};
std::vector<GridPoint> prediction_grid() {
    std::vector<GridPoint> g;
    for (int i = 0; i < 8; ++i) {
        const double d = units::from_mhz(-60.0 + 35.0 * i / 7.0);
        for (int j = 1; j <= 8; ++j) g.push_back({d, 1.5 * kPi * j / 8.0});
    }
    return g;
}

void criterion_1() {
    double worst = 0.0;
    int errors = 0;
    std::string where;
    for (const auto& p : prediction_grid()) {
        try {
            const double ex = exact_phase(p.a, p.delta);
            const double pert = predicted_interferometer_phase(device(4), p.a, p.delta, PredictionOrder::perturbative).gamma_pred;
            const double rel = std::abs(pert - ex) / ex;
            if (rel > worst) {
                worst = rel;
                where = fmt("Delta/2pi=%.1f MHz, A=%.3fpi", units::to_mhz(p.delta), p.a / kPi);
            }
        } catch (const NumericalError&) {
            ++errors;
        }
    }
    report("C1", worst <= 0.02 && errors == 0, "perturbative vs exact (n=4) phase, 64-point grid",
           fmt("max |pert-exact|/exact = %.4f at %s; %d evaluation errors (tol 0.02)", worst, where.c_str(), errors));
}

void criterion_2() {
    const auto p = DeviceParams::with_alpha2(2, kAlpha2);
    const double delta = units::from_mhz(-35.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double theta = (0.5 * kPi - 0.01) * i / 99.0;
        const auto b = dressed_basis(p, {std::abs(delta) * std::tan(theta), 0.0, delta});
        worst = std::max(worst, std::abs(berry_phase_spectral(b, 0) - berry_phase_two_level(theta, Branch::minus)));
        worst = std::max(worst, std::abs(berry_phase_spectral(b, 1) - berry_phase_two_level(theta, Branch::plus)));
    }
    report("C2", worst <= 1e-9, "two-level spectral phase vs pi(1 +- cos theta), 100 angles",
           fmt("max deviation = %.2e rad (tol 1e-9)", worst));
}

void criterion_3() {
    double worst = 0.0;
    for (const auto& g : prediction_grid()) {
        const DriveConfig d{omega_for_solid_angle(g.a, g.delta), 0.0, g.delta};
        const auto basis = dressed_basis(device(4), d);
        for (int level : {0, 1}) {
            const double line = berry_phase_line_integral(device(4), d, level, 2000);
            worst = std::max(worst, std::abs(wrap_pi(line - berry_phase_spectral(basis, level))));
        }
    }
    report("C3", worst <= 1e-6, "line integral (2000 steps) vs spectral phase, levels 0 and 1",
           fmt("max deviation = %.2e rad mod 2pi (tol 1e-6)", worst));
}

void criterion_4() {
    const double delta = units::from_mhz(-35.0);
    auto excess = [&](double a) {
        return predicted_interferometer_phase(device(4), a, delta, PredictionOrder::perturbative).gamma_pred / (2.0 * a) - 1.0;
    };
    bool positive = true, monotone = true;
    double previous = -1.0;
    double first_positive = kNaN;
    for (int i = 1; i <= 60; ++i) {
        const double e = excess(1.5 * kPi * i / 60.0);
        positive = positive && e > 0.0;
        if (std::isnan(first_positive) && e > 0.0) first_positive = 1.5 * i / 60.0;
        monotone = monotone && e > previous;
        previous = e;
    }
    const double at_54 = excess(1.25 * kPi), at_32 = excess(1.5 * kPi);
    const bool ok = positive && monotone && std::abs(at_54 - 0.10) <= 0.015 && at_32 >= 0.13 && at_32 <= 0.16;
    report("C4", ok, "deviation (gamma_pert - 2A)/2A at Delta/2pi=-35 MHz",
           fmt("positive=%s (from A=%.3fpi) monotone=%s; %.4f at 5pi/4 (target 0.10 +- 0.015); %.4f at 3pi/2 (band [0.13, 0.16])",
               positive ? "yes" : "no", first_positive, monotone ? "yes" : "no", at_54, at_32));
}

void criterion_5() {
    const double k = 1e-3;
    std::string detail;
    bool ok = true;
    for (double theta : {kPi / 6, kPi / 4, kPi / 3}) {
        const double s = std::sin(theta);
        const double dev = std::abs(berry_correction_perturbative(theta, k).total - kTwoPi * k * s * s * s * s / std::cos(theta));
        ok = ok && dev <= 10.0 * k * k;
        detail += fmt("%s|dev|/k^2 = %.2f at theta=pi/%d", detail.empty() ? "" : "; ", dev / (k * k),
                      static_cast<int>(std::lround(kPi / theta)));
    }
    report("C5", ok, "small-k limit of the second-order correction, k=1e-3", detail + " (tol 10)");
}

void criterion_6() {
    // strongest drive: induced Rabi frequency Ω/2π = 110 MHz, solid angle set by Δ
    const double omega = units::from_mhz(110.0);
    double worst = 0.0, at = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double delta = units::from_mhz(-60.0 + 35.0 * i / 7.0);
        const double a = kTwoPi * (1.0 - std::abs(delta) / std::hypot(omega, delta));
        const auto r = run_interferometer(settings(false), Contour::minus_plus, a, delta, 100.0, 1);
        if (r.max_p2 > worst) {
            worst = r.max_p2;
            at = units::to_mhz(delta);
        }
    }
    report("C6", worst >= 0.08 && worst <= 0.16, "leakage at Omega/2pi = 110 MHz (unitary, n=4, tau=100 ns)",
           fmt("max sum_{j>=2} P_j = %.4f at Delta/2pi=%.1f MHz (band [0.08, 0.16])", worst, at));
}

void criterion_7() {
    const double delta = units::from_mhz(-45.0);
    double worst_same = 0.0, worst_sum = 0.0;
    for (double a : {0.25 * kPi, 0.75 * kPi}) {
        const auto s = settings(false);
        const double mp = run_interferometer(s, Contour::minus_plus, a, delta, 100.0, 1).gamma;
        const double pm = run_interferometer(s, Contour::plus_minus, a, delta, 100.0, 1).gamma;
        const double pp = run_interferometer(s, Contour::plus_plus, a, delta, 100.0, 1).gamma;
        const double mm = run_interferometer(s, Contour::minus_minus, a, delta, 100.0, 1).gamma;
        worst_same = std::max({worst_same, std::abs(pp), std::abs(mm)});
        worst_sum = std::max(worst_sum, std::abs(wrap_pi(mp + pm)));
    }
    report("C7", worst_same <= 0.05 && worst_sum <= 1e-3, "contour identities at A = pi/4, 3pi/4 (unitary)",
           fmt("max |gamma(++)|,|gamma(--)| = %.2e rad (tol 0.05); max |gamma(+-) + gamma(-+)| = %.2e rad (tol 1e-3)",
               worst_same, worst_sum));
}

struct TauRow {
    double tau;
    double a_param;
    double gamma;
    double f_open;
    double f_closed;
    double bloch_open;
};

std::vector<TauRow> tau_rows() {
    const double a = 0.25 * kPi, delta = units::from_mhz(-45.0);
    const double target = exact_phase(a, delta);
    const double omega = omega_for_solid_angle(a, delta);
    SweepGrid grid{30, 10.0, 250.0, GridSpacing::log, false, 0.1};
    std::vector<TauRow> rows;
    for (double tau : grid.values()) {
        TauRow r{tau, nominal_adiabaticity(omega, delta, tau), kNaN, kNaN, kNaN, kNaN};
        const auto closed = simulate_point(settings(false), Contour::minus_plus, a, delta, tau, 1, target);
        r.gamma = nearest_branch(closed.gamma_sim, target);
        r.f_closed = closed.fidelity;
        if (tau >= 50.0 && tau <= 200.0) {
            const auto open = simulate_point(settings(true), Contour::minus_plus, a, delta, tau, 1, target);
            r.f_open = open.fidelity;
            r.bloch_open = open.bloch_length;
        }
        rows.push_back(r);
    }
    return rows;
}

void criterion_8(const std::vector<TauRow>& rows) {
    const double target = exact_phase(0.25 * kPi, units::from_mhz(-45.0));
    double lo = 1e9, hi = -1e9, sum = 0.0;
    int n = 0;
    double excursion = 0.0, excursion_tau = 0.0;
    int fast = 0;
    for (const auto& r : rows) {
        if (r.tau >= 50.0 && r.tau <= 200.0) {
            lo = std::min(lo, r.gamma);
            hi = std::max(hi, r.gamma);
            sum += r.gamma;
            ++n;
        }
        if (r.a_param > 0.3) {
            ++fast;
            const double e = std::abs(r.gamma - target) / target;
            if (e > excursion) {
                excursion = e;
                excursion_tau = r.tau;
            }
        }
    }
    const double spread = (hi - lo) / (sum / n);
    report("C8", spread <= 0.05 && fast > 0 && excursion > 0.5, "time independence at A=pi/4, Delta/2pi=-45 MHz",
           fmt("spread (max-min)/mean over tau in [50,200] ns = %.4f over %d points (tol 0.05); "
               "max excursion for a>0.3 = %.3f at tau=%.1f ns over %d points (need > 0.5)",
               spread, n, excursion, excursion_tau, fast));
}

void criterion_9() {
    const double delta = units::from_mhz(-45.0);
    std::string detail;
    bool ok = true;
    for (double a : {0.25 * kPi, 0.75 * kPi, 1.25 * kPi}) {
        const auto u = run_interferometer(settings(false), Contour::minus_plus, a, delta, 100.0, 1);
        const auto d = run_interferometer(settings(true), Contour::minus_plus, a, delta, 100.0, 1);
        const double length = d.record.bloch_length();
        const double ref = nearest_branch(u.gamma, exact_phase(a, delta));
        const double rel = std::abs(wrap_pi(d.gamma - u.gamma)) / std::abs(ref);
        ok = ok && length >= 0.37 && length <= 0.57 && rel <= 0.02;
        detail += fmt("%sA=%.2fpi: |r|=%.3f, rel shift=%.4f", detail.empty() ? "" : "; ", a / kPi, length, rel);
    }
    report("C9", ok, "decoherence leaves the phase unchanged (T1=0.84 us, T2*=1.03 us, tau=100 ns)",
           detail + " (|r| in [0.37, 0.57], shift tol 0.02)");
}

void criterion_10(const std::vector<TauRow>& rows) {
    double open = 0.0, closed = 0.0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.tau < 50.0 || r.tau > 200.0) continue;
        open += r.f_open;
        closed += r.f_closed;
        ++n;
    }
    open /= n;
    closed /= n;
    const double gain = closed - open;
    report("C10", open >= 0.87 && open <= 0.93 && gain >= 0.06 && gain <= 0.10,
           "gate fidelity over the adiabatic band tau in [50, 200] ns",
           fmt("mean F = %.4f with decoherence (band [0.87, 0.93]); %.4f without; gain %.4f (band [0.06, 0.10]); %d points",
               open, closed, gain, n));
}

void criterion_11() {
    const auto s = transmon_spectrum(13.96, 0.36, 4);
    const double f01 = units::to_ghz(s.omega01);
    const double asym = std::sqrt(8.0 * 13.96 * 0.36) - 0.36;
    const double rel_paper = std::abs(f01 / 5.95 - 1.0), rel_asym = std::abs(f01 / asym - 1.0);
    const double a2 = units::to_mhz(s.anharmonicities[2]);
    report("C11", rel_paper <= 0.02 && a2 < 0.0 && rel_asym <= 0.005, "charge-basis spectrum of the device",
           fmt("omega01/2pi = %.4f GHz (%.2f%% from 5.95, tol 2%%); alpha2/2pi = %.1f MHz; %.2f%% from asymptotic %.4f GHz "
               "(tol 0.5%%); E_J/E_C = %.2f",
               f01, 100 * rel_paper, a2, 100 * rel_asym, asym, 13.96 / 0.36));
}

void criterion_12() {
    std::vector<std::string> failed;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    const double delta = units::from_mhz(-45.0);

    // Hermiticity and the frame-rotation identity
    double herm = 0.0, frame = 0.0;
    for (int n : {2, 3, 4}) {
        const auto p = DeviceParams::with_alpha2(n, kAlpha2);
        const Matrix h0 = build_hamiltonian(p, {units::from_mhz(80.0), 0.0, delta}).matrix();
        for (int t = 0; t < 20; ++t) {
            const double phi = u(rng);
            const Matrix h = build_hamiltonian(p, {units::from_mhz(80.0), phi, delta}).matrix();
            herm = std::max(herm, hermiticity_defect(h));
            Vector ph(n);
            for (int j = 0; j < n; ++j) ph(j) = std::polar(1.0, -phi * j);
            frame = std::max(frame, (h - ph.asDiagonal() * h0 * ph.conjugate().asDiagonal()).cwiseAbs().maxCoeff());
        }
    }
    if (herm > 0.0) failed.push_back("hermiticity");
    if (frame > 1e-12) failed.push_back("frame rotation");

    // unitarity and physical density operators on full sequences
    const auto seq = build_interferometer_sequence(Contour::minus_plus, 1.25 * kPi, delta, 100.0);
    const auto track = integration_controls(seq, 0.01);
    const auto unitary = schrodinger_propagate(track, device(4), QuantumState::basis(4, 0), 0.01);
    if (unitary.norm_drift > 1e-8) failed.push_back("unitarity");
    const auto open = lindblad_propagate(track, device(4), DensityOperator::pure(QuantumState::basis(4, 0).amplitudes), 0.01);
    try {
        open.state.check(1e-10, 1e-8, 1e-8);
    } catch (const InvalidStateError&) {
        failed.push_back("trace/positivity");
    }

    // gauge invariance of both Berry-phase evaluations
    const DriveConfig d{omega_for_solid_angle(0.75 * kPi, delta), 0.0, delta};
    auto basis = dressed_basis(device(4), d);
    const double spectral = berry_phase_spectral(basis, 0);
    for (int k = 0; k < 4; ++k) basis.eigenvectors.col(k) *= std::polar(1.0, u(rng));
    std::vector<double> gauge(1000);
    for (auto& g : gauge) g = u(rng);
    const double line = berry_phase_line_integral(device(4), d, 0, 1000);
    const double line_gauged = berry_phase_line_integral(device(4), d, 0, 1000, LoopDirection::forward, &gauge);
    const double gauge_dev = std::max(std::abs(berry_phase_spectral(basis, 0) - spectral), std::abs(wrap_pi(line - line_gauged)));
    if (gauge_dev > 1e-12) failed.push_back("gauge invariance");

    // step-size convergence of the extracted phase
    const double g1 = run_interferometer(settings(false, 0.020), Contour::minus_plus, 0.75 * kPi, delta, 100.0, 1).gamma;
    const double g2 = run_interferometer(settings(false, 0.010), Contour::minus_plus, 0.75 * kPi, delta, 100.0, 1).gamma;
    const double dt_dev = std::abs(wrap_pi(g1 - g2));
    if (dt_dev > 1e-4) failed.push_back("dt halving");

    // seeded readout is reproducible bit for bit
    auto sampled = settings(false, 0.020);
    sampled.shots = 1000;
    const auto r1 = run_interferometer(sampled, Contour::minus_plus, 0.25 * kPi, delta, 100.0, 7);
    const auto r2 = run_interferometer(sampled, Contour::minus_plus, 0.25 * kPi, delta, 100.0, 7);
    const bool same = r1.record.sx == r2.record.sx && r1.record.sy == r2.record.sy && r1.record.sz == r2.record.sz;
    if (!same) failed.push_back("seeded sampling");

    std::string which;
    for (const auto& f : failed) which += (which.empty() ? "" : ", ") + f;
    report("C12", failed.empty(), "property suite",
           fmt("hermiticity %.1e, frame identity %.1e, norm drift %.1e, gauge %.1e, dt-halving %.2e rad (tol 1e-4), "
               "seeded sampling %s%s%s",
               herm, frame, unitary.norm_drift, gauge_dev, dt_dev, same ? "identical" : "differs",
               which.empty() ? "" : "; failed: ", which.c_str()));
}

void examples() {
    const double delta = units::from_mhz(-45.0);
    const double target = exact_phase(0.25 * kPi, delta);
    for (double tau : {100.0, 200.0}) {
        const auto r = run_interferometer(settings(false), Contour::minus_plus, 0.25 * kPi, delta, tau, 1);
        const double rel = std::abs(nearest_branch(r.gamma, target) / target - 1.0);
        report("EXAMPLE", rel <= 0.03, fmt("C(-+), A=pi/4, Delta/2pi=-45 MHz, tau=%.0f ns vs exact prediction", tau),
               fmt("gamma = %.4f rad vs %.4f rad, relative %.4f (tol 0.03)", nearest_branch(r.gamma, target), target, rel),
               false);
    }
    const double a = 1.25 * kPi;
    const auto r = run_interferometer(settings(false), Contour::minus_plus, a, delta, 100.0, 1);
    const double pert = predicted_interferometer_phase(device(4), a, delta, PredictionOrder::perturbative).gamma_pred;
    const double g = nearest_branch(r.gamma, pert);
    const double excess = g / (2.0 * a) - 1.0, rel = std::abs(pert - g) / g;
    report("EXAMPLE", std::abs(excess - 0.10) <= 0.015 && rel <= 0.02, "C(-+), A=5pi/4, Delta/2pi=-45 MHz, tau=100 ns",
           fmt("(gamma-2A)/2A = %.4f (target 0.10); |gamma_pert-gamma|/gamma = %.4f (tol 0.02)", excess, rel), false);
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    const auto rows = tau_rows();
    criterion_8(rows);
    criterion_9();
    criterion_10(rows);
    criterion_11();
    criterion_12();
    examples();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d of 12 criteria failed (%.1f s)\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
