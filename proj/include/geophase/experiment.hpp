// experiment.hpp — One interferometer shot-equivalent: build the pulse program,
// propagate through everything but the tomography pulse, then branch into the
// three readout settings and reconstruct the qubit state.

#pragma once

#include "geophase/adiabatic.hpp"
#include "geophase/core.hpp"
#include "geophase/estimate.hpp"
#include "geophase/model.hpp"
#include "geophase/propagate.hpp"
#include "geophase/sequence.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace geophase {

struct ExperimentSettings {
    DeviceParams device;
    SequenceOptions sequence;
    double dt{0.010};           // ns
    bool decoherence{true};     // Lindblad with T₁, T₂* when true, Schrödinger otherwise
    std::int64_t shots{0};      // 0: exact expectations
    std::uint64_t seed{1};
    int record_stride{100};
};

struct InterferometerResult {
    PulseSequence sequence;
    TomographyRecord record;
    double gamma{0.0};          // atan2(s_y, s_x), (−π, π]
    BlochVector pre_tomography;
    double max_p2{0.0};         // leakage maximum over the recorded trajectory
    TrajectoryRecord trajectory;
    std::vector<std::string> warnings;
};

namespace detail {

struct EvolvedState {
    Matrix rho;
    TrajectoryRecord record;
};

inline EvolvedState evolve(const PulseSequence& seq, const ExperimentSettings& s, const Matrix& rho0) {
    const ControlTrack track = integration_controls(seq, s.dt);
    PropagationOptions opt;
    opt.record_stride = s.record_stride;
    if (s.decoherence) {
        auto r = lindblad_propagate(track, s.device, DensityOperator{rho0}, s.dt, opt);
        return {std::move(r.state.matrix), std::move(r.record)};
    }
    // rho0 is pure on this branch
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho0);
    Eigen::Index top = 0;
    solver.eigenvalues().maxCoeff(&top);
    auto r = schrodinger_propagate(track, s.device, QuantumState{solver.eigenvectors().col(top)}, s.dt, opt);
    return {r.state.amplitudes * r.state.amplitudes.adjoint(), std::move(r.record)};
}

}  // namespace detail

// Seed for one (row, contour) cell; independent of evaluation order.
inline std::uint64_t cell_seed(std::uint64_t base, std::size_t row, Contour contour) {
    std::uint64_t x = base ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(row) + 1));
    x ^= static_cast<std::uint64_t>(contour) * 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 31;
    return x;
}

inline InterferometerResult run_interferometer(const ExperimentSettings& s, Contour contour, double a_solid,
                                               double delta, double tau, std::uint64_t seed) {
    InterferometerResult out;
    out.sequence = build_interferometer_sequence(contour, a_solid, delta, tau, s.sequence);
    out.warnings = out.sequence.warnings;
    const auto [head, tail] = split_last(out.sequence);

    const int n = s.device.n_levels;
    Matrix rho0 = Matrix::Zero(n, n);
    rho0(0, 0) = 1.0;
    auto evolved = detail::evolve(head, s, rho0);
    out.pre_tomography = bloch_vector(evolved.rho);
    out.max_p2 = evolved.record.max_p2();
    out.trajectory = std::move(evolved.record);

    ReadoutProbabilities readout;
    auto readout_after = [&](TomographySetting setting, double* leakage) {
        const auto e = detail::evolve(with_tomography(tail, setting), s, evolved.rho);
        if (leakage) *leakage = 1.0 - (e.rho(0, 0).real() + e.rho(1, 1).real());
        return excited_probability(e.rho);
    };
    readout.p_z_none = readout_after(TomographySetting::none, &readout.leakage);
    readout.p_z_x = readout_after(TomographySetting::x, nullptr);
    readout.p_z_y = readout_after(TomographySetting::y, nullptr);

    out.record = s.shots > 0 ? tomography(readout, SampledReadout{s.shots, seed}) : tomography(readout);
    for (const auto& w : out.record.warnings) out.warnings.push_back(w);
    out.gamma = extract_phase(out.record);
    return out;
}

}  // namespace geophase
