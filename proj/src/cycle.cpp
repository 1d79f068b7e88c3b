#include "qmem/cycle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qmem/errors.hpp"
#include "qmem/numerics.hpp"

namespace qmem {

namespace {

constexpr double kDecoupledTol = 1e-6;  // cos(theta) regarded as "drive off"

void require_decoupled(double cos_value, const char* where) {
    if (!(cos_value < kDecoupledTol))
        throw std::invalid_argument(std::string(where) +
                                    ": schedule must be decoupled (cos(theta) = 0), got " +
                                    std::to_string(cos_value));
}

}  // namespace

CyclePlan CyclePlan::time_reversed(const SystemParams& params,
                                   const ControlSchedule& load_schedule,
                                   double hold_duration) {
    if (!(hold_duration >= 0.0))
        throw std::invalid_argument("CyclePlan: hold duration must be >= 0");
    const double t0 = load_schedule.grid().t_end();
    // Mirroring about t0 + hold/2 starts the release exactly at t0 + hold.
    ControlSchedule release = load_schedule.reversed_about(t0 + hold_duration / 2.0);
    return CyclePlan{params, load_schedule, hold_duration, std::move(release)};
}

ReleaseEnvelope release_envelope(const SystemParams& params, cplx dark_at_release,
                                 const ControlSchedule& release_schedule) {
    require_decoupled(release_schedule.cos_theta().front(), "release_envelope");
    const TimeGrid& grid = release_schedule.grid();
    const int n = grid.size();
    const double gamma = params.gamma();
    const double sqrt_gamma = std::sqrt(gamma);

    std::vector<double> cos_sq(n);
    for (int i = 0; i < n; ++i) {
        const double c = release_schedule.cos_theta()[i];
        cos_sq[i] = c * c;
    }
    const auto cum = num::cumulative_integral<double>(cos_sq, grid.dt());

    ReleaseEnvelope env{grid, std::vector<cplx>(n), 0.0, 0.0};
    std::vector<double> out_sq(n);
    for (int i = 0; i < n; ++i) {
        env.values[i] = -sqrt_gamma * dark_at_release * release_schedule.cos_theta()[i] *
                        std::exp(-0.5 * gamma * cum[i]);
        out_sq[i] = std::norm(env.values[i]);
    }
    env.photon_number = num::integral<double>(out_sq, grid.dt());
    env.residual_stored = std::norm(dark_at_release) * std::exp(-gamma * cum[n - 1]);
    return env;
}

CycleResult run_cycle(const CyclePlan& plan, const PulseEnvelope& pulse, cplx input_amplitude) {
    const SystemParams& params = plan.params;
    if (!plan.load_schedule.feasible())
        throw InfeasibleError("run_cycle: loading schedule infeasible: " +
                              plan.load_schedule.diagnostic());
    if (!plan.release_schedule.feasible())
        throw InfeasibleError("run_cycle: release schedule infeasible: " +
                              plan.release_schedule.diagnostic());
    require_decoupled(plan.load_schedule.cos_theta().back(), "run_cycle (end of loading)");
    require_decoupled(plan.release_schedule.cos_theta().front(), "run_cycle (start of release)");

    const double t0 = plan.load_schedule.grid().t_end();
    const double t1 = plan.release_schedule.grid().t_start();
    if (std::abs(t1 - (t0 + plan.hold_duration)) > 1e-9 * plan.release_schedule.grid().span())
        throw std::invalid_argument("run_cycle: release must start at load end + hold");

    // Loading (unit amplitude; everything downstream scales linearly).
    const ReducedTrajectory load = loading_output(params, pulse, plan.load_schedule);
    const cplx dark0 = load.dark.back();

    // Hold: the decoupled dark state is pure spin and decays at the
    // single-atom coherence rate.
    const cplx dark1 = dark0 * std::exp(-0.5 * params.gamma_c() * plan.hold_duration);

    // Release.
    const ReleaseEnvelope release = release_envelope(params, dark1, plan.release_schedule);

    const double amp_sq = std::norm(input_amplitude);
    CycleResult res;
    res.dark_at_release = input_amplitude * dark1;
    res.stored_initial = amp_sq * std::norm(dark0);
    res.release_start = t1;
    res.warnings = load.warnings;

    const double reflected_unit = reflected_energy(load);
    // Probability lost from the spin coherence while loading (zero when
    // gamma_c = 0 up to quadrature error) plus the hold decay.
    const double load_deficit = 1.0 - reflected_unit - std::norm(dark0);
    res.ledger.reflected = amp_sq * reflected_unit;
    res.ledger.decayed = amp_sq * (load_deficit + std::norm(dark0) - std::norm(dark1));
    res.ledger.released = amp_sq * release.photon_number;
    res.ledger.stored = amp_sq * release.residual_stored;
    res.ledger.closure_error = std::abs(res.ledger.reflected + res.ledger.decayed +
                                        res.ledger.released + res.ledger.stored - amp_sq);

    // Combined time axis at the loading resolution.
    const TimeGrid& lg = plan.load_schedule.grid();
    const TimeGrid& rg = plan.release_schedule.grid();
    const double dt = lg.dt();
    const int n = static_cast<int>(std::lround((rg.t_end() - lg.t_start()) / dt)) + 1;
    res.grid = TimeGrid(lg.t_start(), rg.t_end(), n);

    // Cumulative release damping for D(t) between grid points.
    std::vector<double> rel_cos_sq(rg.size());
    for (int i = 0; i < rg.size(); ++i) {
        const double c = plan.release_schedule.cos_theta()[i];
        rel_cos_sq[i] = c * c;
    }
    const auto rel_cum = num::cumulative_integral<double>(rel_cos_sq, rg.dt());

    res.phi_in.resize(n);
    res.phi_out.resize(n);
    res.population.resize(n);
    const double sqrt_gamma = std::sqrt(params.gamma());
    double peak_abs = -1.0;
    for (int i = 0; i < n; ++i) {
        const double t = res.grid.time(i);
        res.phi_in[i] = input_amplitude * pulse.value_at(t);
        cplx dark;
        cplx out;
        if (t <= t0) {
            dark = num::interp_cubic<cplx>(load.dark, lg.position(t));
            out = res.phi_in[i] -
                  sqrt_gamma * plan.load_schedule.cos_theta_at(t) * input_amplitude * dark;
        } else if (t < t1) {
            dark = dark0 * std::exp(-0.5 * params.gamma_c() * (t - t0));
            out = cplx(0.0, 0.0);
        } else {
            const double cum = num::interp_cubic<double>(rel_cum, rg.position(t));
            const double c = plan.release_schedule.cos_theta_at(t);
            dark = dark1 * std::exp(-0.5 * params.gamma() * cum);
            out = -sqrt_gamma * input_amplitude * dark * c;
            if (std::abs(out) > peak_abs) {
                peak_abs = std::abs(out);
                res.release_peak_time = t;
            }
        }
        res.population[i] = amp_sq * std::norm(dark);
        res.phi_out[i] = out;
    }
    return res;
}

void PolarizationState::validate() const {
    const double total = std::norm(alpha) + std::norm(beta);
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("PolarizationState: |alpha|^2 + |beta|^2 must be 1, got " +
                                    std::to_string(total));
}

PolarizationCycleResult run_polarization_cycle(const CyclePlan& plan,
                                               const PulseEnvelope& pulse,
                                               const PolarizationState& qubit) {
    qubit.validate();

    PolarizationCycleResult res;
    res.plus_cycle = run_cycle(plan, pulse, qubit.alpha);
    res.minus_cycle = run_cycle(plan, pulse, qubit.beta);

    // At the hold point the dark state is pure collective spin; the rotation
    // maps D onto the spin amplitude with a fixed -i factor.
    const cplx minus_i(0.0, -1.0);
    res.stored_plus = minus_i * res.plus_cycle.dark_at_release;
    res.stored_minus = minus_i * res.minus_cycle.dark_at_release;

    // Project each released packet on the unit release mode.
    const ReleaseEnvelope unit = release_envelope(plan.params, cplx(1.0, 0.0),
                                                  plan.release_schedule);
    const double unit_norm = std::sqrt(unit.photon_number);
    auto project = [&](const CycleResult& cycle) {
        const TimeGrid& rg = unit.grid;
        std::vector<cplx> prod(rg.size());
        for (int i = 0; i < rg.size(); ++i) {
            const double t = rg.time(i);
            const cplx out = num::interp_cubic<cplx>(cycle.phi_out,
                                                     cycle.grid.position(t));
            prod[i] = std::conj(unit.values[i] / unit_norm) * out;
        }
        return num::integral<cplx>(prod, rg.dt());
    };
    const cplx r_plus = project(res.plus_cycle);
    const cplx r_minus = project(res.minus_cycle);
    const double out_norm = std::sqrt(std::norm(r_plus) + std::norm(r_minus));
    if (out_norm > 0.0) {
        res.released.alpha = r_plus / out_norm;
        res.released.beta = r_minus / out_norm;
    }

    const cplx overlap = std::conj(qubit.alpha) * res.released.alpha +
                         std::conj(qubit.beta) * res.released.beta;
    res.fidelity = std::norm(overlap);
    if (std::abs(qubit.beta) > 0.0 && std::abs(res.stored_minus) > 0.0) {
        const cplx ratio_stored = res.stored_plus / res.stored_minus;
        const cplx ratio_in = qubit.alpha / qubit.beta;
        res.relative_phase_error = std::abs(std::arg(ratio_stored / ratio_in));
    }
    return res;
}

ControlSchedule composite_cycle_schedule(const CyclePlan& plan, int n_points) {
    const ControlSchedule load = plan.load_schedule;
    const ControlSchedule release = plan.release_schedule;
    const TimeGrid grid(load.grid().t_start(), release.grid().t_end(), n_points);
    auto eval = [load, release](double t) {
        return std::max(load.cos_theta_at(t), release.cos_theta_at(t));
    };
    std::vector<double> samples(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        samples[i] = std::min(1.0, std::max(0.0, eval(grid.time(i))));
    return ControlSchedule::from_cos_theta(plan.params, grid, std::move(samples), eval);
}

FullPolarizationResult run_polarization_cycle_full(const CyclePlan& plan,
                                                   const PulseEnvelope& pulse,
                                                   const PolarizationState& qubit,
                                                   const ModeBank& bank, int n_points) {
    qubit.validate();
    const ControlSchedule schedule = composite_cycle_schedule(plan, n_points);
    const std::vector<cplx> xi_unit =
        encode_input_modes(pulse, bank, pulse.grid().t_start());

    // Read the stored spin amplitude in the middle of the hold window.
    const double t_mid =
        plan.load_schedule.grid().t_end() + 0.5 * std::max(plan.hold_duration, 0.0);
    const int idx = schedule.grid().index_near(t_mid);

    auto run_channel = [&](cplx amp) {
        std::vector<cplx> xi(xi_unit.size());
        for (size_t k = 0; k < xi.size(); ++k) xi[k] = amp * xi_unit[k];
        FullModelOptions opts;
        opts.step_check = false;
        const FullTrajectory traj = integrate_full(plan.params, bank, xi, schedule, opts);
        return traj.c[idx];
    };

    FullPolarizationResult res;
    res.stored_plus = run_channel(qubit.alpha);
    res.stored_minus = run_channel(qubit.beta);
    if (std::abs(qubit.beta) > 0.0 && std::abs(res.stored_minus) > 0.0) {
        const cplx ratio_stored = res.stored_plus / res.stored_minus;
        const cplx ratio_in = qubit.alpha / qubit.beta;
        res.relative_phase_error = std::abs(std::arg(ratio_stored / ratio_in));
    }
    return res;
}

}  // namespace qmem
