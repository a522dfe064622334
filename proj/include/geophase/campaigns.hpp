// campaigns.hpp — Parameter sweeps over solid angle, detuning and sweep time,
// the spectrum report and single-run trajectory dumps, each rendered as a CSV
// table whose header records the fully resolved configuration.
//
// Sweep points run concurrently on independent state; rows are assembled in
// axis order and sampled readout is seeded per cell, so the output does not
// depend on the number of workers.

#pragma once

#include "geophase/adiabatic.hpp"
#include "geophase/config.hpp"
#include "geophase/csv.hpp"
#include "geophase/estimate.hpp"
#include "geophase/experiment.hpp"
#include "geophase/model.hpp"
#include "geophase/propagate.hpp"
#include "geophase/sequence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace geophase {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr const char* kVersion = "0.1.0";

// Runs fn(0 … count−1) on up to `threads` workers (0: hardware concurrency).
// Exceptions are collected per index and the lowest-index one is rethrown.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// Sign of the interferometer phase relative to the C^{−+} prediction.
inline int contour_sign(Contour c) {
    switch (c) {
        case Contour::minus_plus: return +1;
        case Contour::plus_minus: return -1;
        default: return 0;
    }
}

// Adiabaticity for a uniform 2π sweep over τ: 2π sinϑ / (τ|B|).
inline double nominal_adiabaticity(double omega, double delta, double tau) {
    return adiabaticity_parameter(FieldPoint{omega, 0.0, kTwoPi / tau, delta});
}

struct Predictions {
    double exact{kNaN};
    double perturbative{kNaN};
    double two_level{kNaN};
    std::string note;
};

inline Predictions predictions(const DeviceParams& device, double a_solid, double delta) {
    Predictions p;
    auto attempt = [&](PredictionOrder order, double& out, const char* name) {
        try {
            out = predicted_interferometer_phase(device, a_solid, delta, order).gamma_pred;
        } catch (const NumericalError& e) {
            if (!p.note.empty()) p.note += "; ";
            p.note += std::string(name) + ": " + e.what();
        }
    };
    attempt(PredictionOrder::exact_n, p.exact, "exact");
    attempt(PredictionOrder::perturbative, p.perturbative, "perturbative");
    attempt(PredictionOrder::two_level, p.two_level, "two_level");
    return p;
}

// One simulated interferometer point with its predictions and figures of merit.
struct PointResult {
    double gamma_sim{kNaN};
    double bloch_length{kNaN};
    double p2_max{kNaN};
    double leakage{kNaN};
    double fidelity{kNaN};
    std::string reason;
};

inline void append_reason(std::string& r, const std::string& msg) {
    if (msg.empty()) return;
    if (!r.empty()) r += "; ";
    r += msg;
}

inline PointResult simulate_point(const ExperimentSettings& s, Contour contour, double a_solid, double delta,
                                  double tau, std::uint64_t seed, double target_gamma) {
    PointResult out;
    try {
        const auto r = run_interferometer(s, contour, a_solid, delta, tau, seed);
        for (const auto& w : r.warnings) append_reason(out.reason, w);
        out.gamma_sim = r.gamma;
        out.bloch_length = r.record.bloch_length();
        out.p2_max = r.max_p2;
        out.leakage = r.record.leakage;
        if (std::isfinite(target_gamma)) out.fidelity = fidelity(ml_reconstruct(r.record), adiabatic_target(target_gamma));
    } catch (const NumericalError& e) {
        append_reason(out.reason, e.what());
    }
    return out;
}

inline void add_config_meta(CsvTable& t, const RunConfig& c, const std::string& command) {
    t.add_meta("generator", std::string("geophase ") + kVersion);
    t.add_meta("command", command);
    for (const auto& [k, v] : c.resolved()) t.add_meta(k, v);
}

inline void add_sequence_meta(CsvTable& t, const ExperimentSettings& s) {
    t.add_meta("resolved.alpha2_mhz", format_number(units::to_mhz(s.device.alpha2())));
    if (s.device.n_levels > 3) t.add_meta("resolved.alpha3_mhz", format_number(units::to_mhz(s.device.anharmonicities[3])));
    t.add_meta("resolved.dt_ns", format_number(s.dt));
    t.add_meta("resolved.sequence",
               "[pi/2 y]-[idle][ramp up][sweep][ramp down][idle]-[pi x]-[idle][ramp up][sweep][ramp down][idle]-[tomography]");
}

// Rows (A, contour) over the angle grid at drive.detuning_mhz.
inline CsvTable sweep_angle(const RunConfig& c) {
    const ExperimentSettings s = c.settings();
    const std::vector<double> grid = c.grid(SweepAxis::angle).values();
    std::vector<Contour> contours;
    for (const auto& name : c.sweep_contours) contours.push_back(parse_contour(name));
    const double delta = units::from_mhz(c.detuning_mhz);

    std::vector<Predictions> pred(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) pred[i] = predictions(s.device, grid[i] * kPi, delta);

    const std::size_t nc = contours.size();
    std::vector<PointResult> cells(grid.size() * nc);
    parallel_for(cells.size(), c.threads, [&](std::size_t k) {
        const std::size_t i = k / nc, j = k % nc;
        const double target = contour_sign(contours[j]) * pred[i].exact;
        cells[k] = simulate_point(s, contours[j], grid[i] * kPi, delta, c.tau_ns, cell_seed(c.seed, i, contours[j]), target);
    });

    // continuity along A for each contour, anchored at the first prediction
    for (std::size_t j = 0; j < nc; ++j) {
        std::vector<double> series(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) series[i] = cells[i * nc + j].gamma_sim;
        const double anchor = contour_sign(contours[j]) * (std::isfinite(pred[0].exact) ? pred[0].exact : 0.0);
        const auto unwrapped = unwrap_phases(series, anchor);
        for (std::size_t i = 0; i < grid.size(); ++i) cells[i * nc + j].gamma_sim = unwrapped[i];
    }

    CsvTable t({"solid_angle_rad", "contour", "gamma_sim_rad", "gamma_exact_rad", "gamma_pert_rad", "gamma_twolevel_rad",
                "bloch_length", "p2_max", "leakage", "a_param", "fidelity", "reason"});
    add_config_meta(t, c, "sweep-angle");
    add_sequence_meta(t, s);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = grid[i] * kPi;
        const double a_param = nominal_adiabaticity(omega_for_solid_angle(a, delta), delta, c.tau_ns);
        for (std::size_t j = 0; j < nc; ++j) {
            const auto& cell = cells[i * nc + j];
            const double sign = contour_sign(contours[j]);
            std::string reason = pred[i].note;
            append_reason(reason, cell.reason);
            t.add_row({a, std::string(to_string(contours[j])), cell.gamma_sim, sign * pred[i].exact,
                       sign * pred[i].perturbative, sign * pred[i].two_level, cell.bloch_length, cell.p2_max,
                       cell.leakage, a_param, cell.fidelity, reason});
        }
    }
    return t;
}

// Rows (Δ, A) for C^{−+} over the detuning grid; Ω is re-solved per point.
inline CsvTable sweep_detuning(const RunConfig& c) {
    const ExperimentSettings s = c.settings();
    const std::vector<double> grid = c.grid(SweepAxis::detuning).values();
    const auto& angles = c.sweep_solid_angles_pi;
    const std::size_t na = angles.size();

    std::vector<Predictions> pred(grid.size() * na);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < na; ++j) pred[i * na + j] = predictions(s.device, angles[j] * kPi, units::from_mhz(grid[i]));
    }
    std::vector<PointResult> cells(pred.size());
    parallel_for(cells.size(), c.threads, [&](std::size_t k) {
        const std::size_t i = k / na, j = k % na;
        cells[k] = simulate_point(s, Contour::minus_plus, angles[j] * kPi, units::from_mhz(grid[i]), c.tau_ns,
                                  cell_seed(c.seed, k, Contour::minus_plus), pred[k].exact);
    });
    for (std::size_t j = 0; j < na; ++j) {
        std::vector<double> series(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) series[i] = cells[i * na + j].gamma_sim;
        const double anchor = std::isfinite(pred[j].exact) ? pred[j].exact : 2.0 * angles[j] * kPi;
        const auto unwrapped = unwrap_phases(series, anchor);
        for (std::size_t i = 0; i < grid.size(); ++i) cells[i * na + j].gamma_sim = unwrapped[i];
    }

    CsvTable t({"detuning_mhz", "solid_angle_rad", "gamma_sim_rad", "gamma_exact_rad", "gamma_pert_rad",
                "gamma_twolevel_rad", "bloch_length", "p2_max", "leakage", "a_param", "fidelity", "reason"});
    add_config_meta(t, c, "sweep-detuning");
    add_sequence_meta(t, s);
    t.add_meta("contour", "-+");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double delta = units::from_mhz(grid[i]);
        for (std::size_t j = 0; j < na; ++j) {
            const std::size_t k = i * na + j;
            const double a = angles[j] * kPi;
            std::string reason = pred[k].note;
            append_reason(reason, cells[k].reason);
            t.add_row({grid[i], a, cells[k].gamma_sim, pred[k].exact, pred[k].perturbative, pred[k].two_level,
                       cells[k].bloch_length, cells[k].p2_max, cells[k].leakage,
                       nominal_adiabaticity(omega_for_solid_angle(a, delta), delta, c.tau_ns), cells[k].fidelity, reason});
        }
    }
    return t;
}

// Rows τ for C^{−+} at drive.solid_angle_pi, drive.detuning_mhz. γ always comes
// from the unitary run; fidelity and Bloch length from the Lindblad run when
// decoherence is on.
inline CsvTable sweep_tau(const RunConfig& c) {
    const ExperimentSettings s = c.settings();
    ExperimentSettings unitary = s;
    unitary.decoherence = false;
    const std::vector<double> grid = c.grid(SweepAxis::tau).values();
    const double a = c.solid_angle_pi * kPi;
    const double delta = units::from_mhz(c.detuning_mhz);
    const Predictions pred = predictions(s.device, a, delta);

    const std::size_t per_point = s.decoherence ? 2 : 1;
    std::vector<PointResult> cells(grid.size() * per_point);
    parallel_for(cells.size(), c.threads, [&](std::size_t k) {
        const std::size_t i = k / per_point;
        const bool open = (k % per_point) == 1;
        cells[k] = simulate_point(open ? s : unitary, Contour::minus_plus, a, delta, grid[i],
                                  cell_seed(c.seed, i, Contour::minus_plus), pred.exact);
    });

    // continuity from the most adiabatic (longest) τ downwards
    std::vector<double> series;
    for (std::size_t i = grid.size(); i-- > 0;) series.push_back(cells[i * per_point].gamma_sim);
    const auto unwrapped = unwrap_phases(series, std::isfinite(pred.exact) ? pred.exact : 2.0 * a);

    CsvTable t({"tau_ns", "gamma_sim_rad", "gamma_exact_rad", "gamma_pert_rad", "gamma_twolevel_rad", "bloch_length",
                "p2_max", "leakage", "a_param", "fidelity", "reason"});
    add_config_meta(t, c, "sweep-tau");
    add_sequence_meta(t, s);
    t.add_meta("contour", "-+");
    t.add_meta("gamma_sim_rad", "unitary propagation");
    t.add_meta("fidelity", s.decoherence ? "Lindblad propagation, maximum-likelihood state vs adiabatic target"
                                         : "unitary propagation, maximum-likelihood state vs adiabatic target");
    const double omega = omega_for_solid_angle(a, delta);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& u = cells[i * per_point];
        const auto& f = cells[i * per_point + per_point - 1];
        std::string reason = pred.note;
        append_reason(reason, u.reason);
        if (per_point == 2) append_reason(reason, f.reason);
        t.add_row({grid[i], unwrapped[grid.size() - 1 - i], pred.exact, pred.perturbative, pred.two_level,
                   f.bloch_length, f.p2_max, f.leakage, nominal_adiabaticity(omega, delta, grid[i]), f.fidelity, reason});
    }
    return t;
}

// Charge-basis spectrum and the anharmonicity ratio k = Δ/α₂ at the configured
// detuning and across the detuning grid.
inline CsvTable spectrum_report(const RunConfig& c) {
    const TransmonSpectrum sp = transmon_spectrum(c.ej_ghz, c.ec_ghz, std::max(c.n_levels, 4), c.charge_cutoff);
    const DeviceParams device = c.device();
    CsvTable t({"detuning_mhz", "omega01_ghz", "alpha2_mhz", "alpha3_mhz", "ej_over_ec", "omega01_asymptotic_ghz",
                "model_alpha2_mhz", "k"});
    add_config_meta(t, c, "spectrum");
    t.add_meta("charge_cutoff_used", std::to_string(sp.charge_cutoff));
    std::vector<double> detunings{c.detuning_mhz};
    for (double d : c.grid(SweepAxis::detuning).values()) detunings.push_back(d);
    const double asym = std::sqrt(8.0 * c.ej_ghz * c.ec_ghz) - c.ec_ghz;
    for (double d : detunings) {
        const double model_a2 = device.alpha2();
        t.add_row({d, units::to_ghz(sp.omega01), units::to_mhz(sp.anharmonicities[2]), units::to_mhz(sp.anharmonicities[3]),
                   c.ej_ghz / c.ec_ghz, asym, units::to_mhz(model_a2),
                   model_a2 != 0.0 ? units::from_mhz(d) / model_a2 : kNaN});
    }
    return t;
}

// Full trajectory of one run up to the tomography pulse, with the readout summary
// in the header block.
inline CsvTable simulate_trajectory(const RunConfig& c) {
    const ExperimentSettings s = c.settings();
    const Contour contour = parse_contour(c.contour);
    const double a = c.solid_angle_pi * kPi;
    const double delta = units::from_mhz(c.detuning_mhz);
    const Predictions pred = predictions(s.device, a, delta);
    const auto r = run_interferometer(s, contour, a, delta, c.tau_ns, cell_seed(c.seed, 0, contour));

    CsvTable t({"t_ns", "sx", "sy", "sz", "p2", "a_param"});
    add_config_meta(t, c, "simulate");
    add_sequence_meta(t, s);
    t.add_meta("total_duration_ns", format_number(r.sequence.total_duration));
    for (const auto& w : r.warnings) t.add_meta("warning", w);
    t.add_meta("readout.sx", format_number(r.record.sx));
    t.add_meta("readout.sy", format_number(r.record.sy));
    t.add_meta("readout.sz", format_number(r.record.sz));
    t.add_meta("readout.leakage", format_number(r.record.leakage));
    t.add_meta("bloch_length", format_number(r.record.bloch_length()));
    const double sign = contour_sign(contour);
    const double target = sign * pred.exact;
    t.add_meta("gamma_sim_rad", format_number(nearest_branch(r.gamma, std::isfinite(target) ? target : 0.0)));
    t.add_meta("gamma_exact_rad", format_number(target));
    t.add_meta("gamma_pert_rad", format_number(sign * pred.perturbative));
    t.add_meta("gamma_twolevel_rad", format_number(sign * pred.two_level));
    t.add_meta("a_param", format_number(nominal_adiabaticity(omega_for_solid_angle(a, delta), delta, c.tau_ns)));
    if (std::isfinite(target)) {
        t.add_meta("fidelity", format_number(fidelity(ml_reconstruct(r.record), adiabatic_target(target))));
    }
    const auto& rec = r.trajectory;
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        t.add_row({rec.times[i], rec.sigma_x[i], rec.sigma_y[i], rec.sigma_z[i], rec.p2[i], rec.a_param[i]});
    }
    return t;
}

}  // namespace geophase
