// geophase — command-line front end for the interferometer sweeps.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical error.

#include "geophase/campaigns.hpp"
#include "geophase/config.hpp"
#include "geophase/core.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::string config_path;
    std::string output_path;
    std::string decoherence;
    std::optional<std::int64_t> shots;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt_ps;
    std::optional<int> threads;
};

geophase::RunConfig resolve(const Overrides& o) {
    geophase::RunConfig c = o.config_path.empty() ? geophase::RunConfig{} : geophase::load_config(o.config_path);
    if (!o.decoherence.empty()) geophase::apply_setting(c, "numerics.decoherence", o.decoherence);
    if (o.shots) c.shots = *o.shots;
    if (o.seed) c.seed = *o.seed;
    if (o.dt_ps) c.dt_ps = *o.dt_ps;
    if (o.threads) c.threads = *o.threads;
    c.validate();
    return c;
}

void emit(const geophase::CsvTable& table, const std::string& path) {
    if (path.empty() || path == "-") {
        table.write(std::cout);
        return;
    }
    std::ofstream f(path);
    if (!f) throw geophase::ConfigError("cannot open output file '" + path + "'");
    table.write(f);
    if (!f) throw geophase::ConfigError("failed writing output file '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Berry-phase interferometry on a driven multi-level transmon"};
    app.require_subcommand(1);
    Overrides o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "Configuration file of 'section.key = value' lines")
            ->check(CLI::ExistingFile);
        sub->add_option("--output", o.output_path, "CSV output path ('-' or omitted: stdout)");
        sub->add_option("--decoherence", o.decoherence, "Lindblad decay and dephasing")
            ->check(CLI::IsMember({"on", "off"}));
        sub->add_option("--shots", o.shots, "Shots per tomography setting (0: exact expectations)");
        sub->add_option("--seed", o.seed, "Seed of the shot sampler");
        sub->add_option("--dt-ps", o.dt_ps, "Integrator step in ps (at most 20)");
        sub->add_option("--threads", o.threads, "Worker threads (0: all cores)");
    };

    auto* spectrum = app.add_subcommand("spectrum", "Charge-basis transmon spectrum and k = Delta/alpha2");
    auto* angle = app.add_subcommand("sweep-angle", "Phase vs solid angle for the configured contours");
    auto* detuning = app.add_subcommand("sweep-detuning", "Phase vs detuning at fixed solid angles");
    auto* tau = app.add_subcommand("sweep-tau", "Phase, adiabaticity and fidelity vs sweep time");
    auto* simulate = app.add_subcommand("simulate", "Single contour with full trajectory dump");
    for (auto* sub : {spectrum, angle, detuning, tau, simulate}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const geophase::RunConfig c = resolve(o);
        if (spectrum->parsed()) emit(geophase::spectrum_report(c), o.output_path);
        else if (angle->parsed()) emit(geophase::sweep_angle(c), o.output_path);
        else if (detuning->parsed()) emit(geophase::sweep_detuning(c), o.output_path);
        else if (tau->parsed()) emit(geophase::sweep_tau(c), o.output_path);
        else if (simulate->parsed()) emit(geophase::simulate_trajectory(c), o.output_path);
    } catch (const geophase::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const geophase::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
