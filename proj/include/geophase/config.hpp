// config.hpp — Run configuration: a flat text file of `section.key = value`
// lines ('#' starts a comment). Every key has a default; unknown keys, duplicate
// keys and malformed values are configuration errors.

#pragma once

#include "geophase/core.hpp"
#include "geophase/experiment.hpp"
#include "geophase/model.hpp"
#include "geophase/sequence.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geophase {

enum class SweepAxis { angle, detuning, tau };
enum class GridSpacing { linear, log };

inline std::string_view to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::angle: return "angle";
        case SweepAxis::detuning: return "detuning";
        case SweepAxis::tau: return "tau";
    }
    return "?";
}

struct SweepGrid {
    int points{0};
    double min{0.0};
    double max{0.0};
    GridSpacing spacing{GridSpacing::linear};
    bool exclude_min{false};   // (min, max] instead of [min, max]
    double round_to{0.0};      // snap grid values to this step (0: off)

    std::vector<double> values() const {
        if (points < 1) throw ConfigError("sweep grid needs at least one point");
        std::vector<double> v;
        v.reserve(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) {
            double u;
            if (exclude_min) {
                u = static_cast<double>(i + 1) / points;
            } else {
                u = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
            }
            double x = spacing == GridSpacing::log ? min * std::pow(max / min, u) : min + (max - min) * u;
            if (round_to > 0.0) x = std::round(x / round_to) * round_to;
            v.push_back(x);
        }
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (!(v[i] > v[i - 1])) throw ConfigError("sweep grid is not strictly increasing after rounding");
        }
        return v;
    }
};

struct RunConfig {
    // device
    double ej_ghz{13.96};
    double ec_ghz{0.36};
    int n_levels{4};
    std::optional<double> alpha2_mhz{-423.0};  // empty: charge-basis spectrum
    std::optional<double> alpha3_mhz{};        // empty: 3·α₂ (or spectrum when α₂ is)
    // coherence
    double t1_us{0.84};
    double t2star_us{1.03};
    std::optional<double> t2echo_us{};         // informational only
    // drive
    double detuning_mhz{-45.0};
    double ramp_ns{40.0};
    double pi2_ns{12.0};
    double tau_ns{100.0};
    double budget_ns{700.0};
    bool drag{true};
    double drag_coefficient{0.5};
    double sweep_edge{0.2};
    double ramp_adiabaticity_bound{0.1};
    double solid_angle_pi{0.25};
    std::string contour{"-+"};
    // numerics
    double dt_ps{10.0};
    int charge_cutoff{30};
    bool decoherence{true};
    int threads{0};                            // 0: hardware concurrency
    int record_stride{100};
    // readout
    std::int64_t shots{0};                     // 0: exact expectations
    std::uint64_t seed{1};
    // sweep (unset entries take per-axis defaults)
    std::optional<SweepAxis> sweep_axis{};
    std::optional<int> sweep_points{};
    std::optional<double> sweep_min{};
    std::optional<double> sweep_max{};
    std::optional<GridSpacing> sweep_spacing{};
    std::vector<double> sweep_solid_angles_pi{0.25, 0.75, 1.25};
    std::vector<std::string> sweep_contours{"-+", "+-", "--"};

    void validate() const;
    DeviceParams device() const;
    SequenceOptions sequence_options(double alpha2) const;
    ExperimentSettings settings() const;
    SweepGrid grid(SweepAxis axis) const;
    // Resolved `key = value` pairs in file order, defaults included.
    std::vector<std::pair<std::string, std::string>> resolved() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc{} || p != end || !std::isfinite(x)) {
        throw ConfigError("config: " + key + " expects a finite number, got '" + v + "'");
    }
    return x;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
    Int x{};
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc{} || p != end) throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
    return x;
}

inline bool parse_flag(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: " + key + " expects on/off, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

inline std::string fmt_list(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
}

}  // namespace detail

// Applies one `key = value` assignment.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    using namespace detail;
    auto num = [&] { return parse_double(key, value); };
    auto optional_num = [&](std::string_view none_word) -> std::optional<double> {
        if (value == none_word) return std::nullopt;
        return parse_double(key, value);
    };
    if (key == "device.ej_ghz") c.ej_ghz = num();
    else if (key == "device.ec_ghz") c.ec_ghz = num();
    else if (key == "device.n_levels") c.n_levels = parse_int<int>(key, value);
    else if (key == "device.alpha2_mhz") c.alpha2_mhz = optional_num("spectrum");
    else if (key == "device.alpha3_mhz") c.alpha3_mhz = optional_num("auto");
    else if (key == "coherence.t1_us") c.t1_us = num();
    else if (key == "coherence.t2star_us") c.t2star_us = num();
    else if (key == "coherence.t2echo_us") c.t2echo_us = optional_num("none");
    else if (key == "drive.detuning_mhz") c.detuning_mhz = num();
    else if (key == "drive.ramp_ns") c.ramp_ns = num();
    else if (key == "drive.pi2_ns") c.pi2_ns = num();
    else if (key == "drive.tau_ns") c.tau_ns = num();
    else if (key == "drive.budget_ns") c.budget_ns = num();
    else if (key == "drive.drag") c.drag = parse_flag(key, value);
    else if (key == "drive.drag_coefficient") c.drag_coefficient = num();
    else if (key == "drive.sweep_edge") c.sweep_edge = num();
    else if (key == "drive.ramp_adiabaticity_bound") c.ramp_adiabaticity_bound = num();
    else if (key == "drive.solid_angle_pi") c.solid_angle_pi = num();
    else if (key == "drive.contour") c.contour = value;
    else if (key == "numerics.dt_ps") c.dt_ps = num();
    else if (key == "numerics.charge_cutoff") c.charge_cutoff = parse_int<int>(key, value);
    else if (key == "numerics.decoherence") c.decoherence = parse_flag(key, value);
    else if (key == "numerics.threads") c.threads = parse_int<int>(key, value);
    else if (key == "numerics.record_stride") c.record_stride = parse_int<int>(key, value);
    else if (key == "readout.shots") c.shots = parse_int<std::int64_t>(key, value);
    else if (key == "readout.seed") c.seed = parse_int<std::uint64_t>(key, value);
    else if (key == "sweep.axis") {
        if (value == "angle") c.sweep_axis = SweepAxis::angle;
        else if (value == "detuning") c.sweep_axis = SweepAxis::detuning;
        else if (value == "tau") c.sweep_axis = SweepAxis::tau;
        else throw ConfigError("config: sweep.axis expects angle, detuning or tau, got '" + value + "'");
    } else if (key == "sweep.points") c.sweep_points = parse_int<int>(key, value);
    else if (key == "sweep.min") c.sweep_min = num();
    else if (key == "sweep.max") c.sweep_max = num();
    else if (key == "sweep.spacing") {
        if (value == "linear") c.sweep_spacing = GridSpacing::linear;
        else if (value == "log") c.sweep_spacing = GridSpacing::log;
        else throw ConfigError("config: sweep.spacing expects linear or log, got '" + value + "'");
    } else if (key == "sweep.solid_angles_pi") {
        c.sweep_solid_angles_pi.clear();
        for (const auto& item : split_list(value)) c.sweep_solid_angles_pi.push_back(parse_double(key, item));
    } else if (key == "sweep.contours") {
        c.sweep_contours = split_list(value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

inline RunConfig parse_config(std::string_view text, const std::string& origin = "config") {
    RunConfig c;
    std::map<std::string, int> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(t).substr(0, eq));
        const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError(where + ": empty key or value");
        if (auto [it, fresh] = seen.emplace(key, lineno); !fresh) {
            throw ConfigError(where + ": duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
        }
        try {
            apply_setting(c, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

inline void RunConfig::validate() const {
    auto positive = [](double x, const char* name) {
        if (!(x > 0.0)) throw ConfigError(std::string("config: ") + name + " must be positive");
    };
    positive(ej_ghz, "device.ej_ghz");
    positive(ec_ghz, "device.ec_ghz");
    if (n_levels < 2 || n_levels > 8) throw ConfigError("config: device.n_levels must lie in [2, 8]");
    positive(t1_us, "coherence.t1_us");
    positive(t2star_us, "coherence.t2star_us");
    if (t2star_us > 2.0 * t1_us) throw ConfigError("config: coherence.t2star_us exceeds 2 * t1_us");
    if (t2echo_us) positive(*t2echo_us, "coherence.t2echo_us");
    if (detuning_mhz == 0.0) throw ConfigError("config: drive.detuning_mhz must be nonzero");
    positive(ramp_ns, "drive.ramp_ns");
    positive(pi2_ns, "drive.pi2_ns");
    positive(tau_ns, "drive.tau_ns");
    positive(budget_ns, "drive.budget_ns");
    if (drag_coefficient < 0.0) throw ConfigError("config: drive.drag_coefficient must be non-negative");
    if (!(sweep_edge >= 0.0 && sweep_edge <= 0.5)) throw ConfigError("config: drive.sweep_edge must lie in [0, 0.5]");
    if (!(ramp_adiabaticity_bound > 0.0)) throw ConfigError("config: drive.ramp_adiabaticity_bound must be positive");
    if (!(solid_angle_pi > 0.0 && solid_angle_pi < 2.0)) throw ConfigError("config: drive.solid_angle_pi must lie in (0, 2)");
    parse_contour(contour);
    positive(dt_ps, "numerics.dt_ps");
    if (dt_ps > 20.0) throw ConfigError("config: numerics.dt_ps must not exceed 20");
    if (charge_cutoff < 5) throw ConfigError("config: numerics.charge_cutoff must be at least 5");
    if (threads < 0) throw ConfigError("config: numerics.threads must be non-negative");
    if (record_stride < 1) throw ConfigError("config: numerics.record_stride must be at least 1");
    if (shots < 0) throw ConfigError("config: readout.shots must be non-negative");
    if (sweep_points && *sweep_points < 1) throw ConfigError("config: sweep.points must be at least 1");
    if (sweep_min && sweep_max && !(*sweep_max > *sweep_min)) throw ConfigError("config: sweep.max must exceed sweep.min");
    if (sweep_solid_angles_pi.empty()) throw ConfigError("config: sweep.solid_angles_pi is empty");
    for (double a : sweep_solid_angles_pi) {
        if (!(a > 0.0 && a < 2.0)) throw ConfigError("config: sweep.solid_angles_pi entries must lie in (0, 2)");
    }
    if (sweep_contours.empty()) throw ConfigError("config: sweep.contours is empty");
    for (const auto& s : sweep_contours) parse_contour(s);
}

inline DeviceParams RunConfig::device() const {
    DeviceParams p;
    p.e_j_ghz = ej_ghz;
    p.e_c_ghz = ec_ghz;
    p.n_levels = n_levels;
    if (alpha2_mhz) {
        p.anharmonicities = default_anharmonicities(n_levels, units::from_mhz(*alpha2_mhz));
    } else {
        p.anharmonicities = transmon_spectrum(ej_ghz, ec_ghz, n_levels, charge_cutoff).anharmonicities;
    }
    if (alpha3_mhz && n_levels > 3) p.anharmonicities[3] = units::from_mhz(*alpha3_mhz);
    p.t1_ns = units::us_to_ns(t1_us);
    p.t2_star_ns = units::us_to_ns(t2star_us);
    p.validate();
    return p;
}

inline SequenceOptions RunConfig::sequence_options(double alpha2) const {
    SequenceOptions o;
    o.ramp_ns = ramp_ns;
    o.pi2_ns = pi2_ns;
    o.budget_ns = budget_ns;
    o.drag = drag;
    o.drag_coefficient = drag_coefficient;
    o.alpha2 = alpha2;
    o.sweep_edge = sweep_edge;
    o.ramp_adiabaticity_bound = ramp_adiabaticity_bound;
    return o;
}

inline ExperimentSettings RunConfig::settings() const {
    ExperimentSettings s;
    s.device = device();
    // DRAG shaping uses the device α₂ even when the model keeps only two levels
    const double alpha2 = alpha2_mhz ? units::from_mhz(*alpha2_mhz)
                                     : transmon_spectrum(ej_ghz, ec_ghz, 3, charge_cutoff).anharmonicities[2];
    s.sequence = sequence_options(alpha2);
    s.dt = units::ps_to_ns(dt_ps);
    s.decoherence = decoherence;
    s.shots = shots;
    s.seed = seed;
    s.record_stride = record_stride;
    return s;
}

// Per-axis grid: angle in units of π over (min, max]; detuning in MHz over
// [min, max]; tau in ns over [min, max], log-spaced and snapped to 0.1 ns.
inline SweepGrid RunConfig::grid(SweepAxis axis) const {
    if (sweep_axis && *sweep_axis != axis) {
        throw ConfigError("config: sweep.axis = " + std::string(to_string(*sweep_axis)) + " does not match the " +
                          std::string(to_string(axis)) + " sweep");
    }
    SweepGrid g;
    switch (axis) {
        case SweepAxis::angle: g = {24, 0.0, 1.5, GridSpacing::linear, true, 0.0}; break;
        case SweepAxis::detuning: g = {8, -60.0, -25.0, GridSpacing::linear, false, 0.0}; break;
        case SweepAxis::tau: g = {30, 10.0, 250.0, GridSpacing::log, false, 0.1}; break;
    }
    if (sweep_points) g.points = *sweep_points;
    if (sweep_min) g.min = *sweep_min;
    if (sweep_max) g.max = *sweep_max;
    if (sweep_spacing) g.spacing = *sweep_spacing;
    if (!(g.max > g.min)) throw ConfigError("config: sweep.max must exceed sweep.min");
    if (g.spacing == GridSpacing::log && !(g.min > 0.0)) throw ConfigError("config: log spacing needs sweep.min > 0");
    if (axis == SweepAxis::angle && !(g.min >= 0.0 && g.max < 2.0)) {
        throw ConfigError("config: angle grid must lie in (0, 2) units of pi");
    }
    if (axis == SweepAxis::detuning && g.min <= 0.0 && g.max >= 0.0) {
        throw ConfigError("config: detuning grid must not contain zero");
    }
    if (axis == SweepAxis::tau && !(g.min > 0.0)) throw ConfigError("config: tau grid must be positive");
    return g;
}

inline std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
    using detail::fmt;
    auto onoff = [](bool b) { return std::string(b ? "on" : "off"); };
    std::vector<std::pair<std::string, std::string>> r{
        {"device.ej_ghz", fmt(ej_ghz)},
        {"device.ec_ghz", fmt(ec_ghz)},
        {"device.n_levels", std::to_string(n_levels)},
        {"device.alpha2_mhz", alpha2_mhz ? fmt(*alpha2_mhz) : "spectrum"},
        {"device.alpha3_mhz", alpha3_mhz ? fmt(*alpha3_mhz) : "auto"},
        {"coherence.t1_us", fmt(t1_us)},
        {"coherence.t2star_us", fmt(t2star_us)},
        {"coherence.t2echo_us", t2echo_us ? fmt(*t2echo_us) : "none"},
        {"drive.detuning_mhz", fmt(detuning_mhz)},
        {"drive.ramp_ns", fmt(ramp_ns)},
        {"drive.pi2_ns", fmt(pi2_ns)},
        {"drive.tau_ns", fmt(tau_ns)},
        {"drive.budget_ns", fmt(budget_ns)},
        {"drive.drag", onoff(drag)},
        {"drive.drag_coefficient", fmt(drag_coefficient)},
        {"drive.sweep_edge", fmt(sweep_edge)},
        {"drive.ramp_adiabaticity_bound", fmt(ramp_adiabaticity_bound)},
        {"drive.solid_angle_pi", fmt(solid_angle_pi)},
        {"drive.contour", contour},
        {"numerics.dt_ps", fmt(dt_ps)},
        {"numerics.charge_cutoff", std::to_string(charge_cutoff)},
        {"numerics.decoherence", onoff(decoherence)},
        {"numerics.record_stride", std::to_string(record_stride)},
        {"readout.shots", std::to_string(shots)},
        {"readout.seed", std::to_string(seed)},
        {"sweep.solid_angles_pi", detail::fmt_list(sweep_solid_angles_pi)},
        {"sweep.contours", detail::fmt_list(sweep_contours)},
    };
    return r;
}

}  // namespace geophase
