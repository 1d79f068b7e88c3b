#include "qmem/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qmem/numerics.hpp"

namespace qmem {

namespace {

void check_shared_grid(const PulseEnvelope& pulse, const ControlSchedule& schedule) {
    if (!pulse.grid().same_as(schedule.grid()))
        throw std::invalid_argument("reduced dynamics: pulse and schedule grids differ");
}

void warn_initial_tail(const PulseEnvelope& pulse, ReducedTrajectory& traj) {
    const double edge = std::abs(pulse.values().front());
    if (edge >= 1e-6 * pulse.max_abs()) {
        const double scale = pulse.t_pulse() > 0.0 ? pulse.t_pulse() : pulse.grid().dt();
        traj.warnings.push_back("initial tail not negligible: |phi(t_start)| = " +
                                std::to_string(edge) + ", mass scale " +
                                std::to_string(edge * edge * scale));
    }
}

void finish_trajectory(const SystemParams& params, const PulseEnvelope& pulse,
                       const ControlSchedule& schedule, ReducedTrajectory& traj) {
    const int n = traj.grid.size();
    const double sqrt_gamma = std::sqrt(params.gamma());
    traj.phi_out.resize(n);
    traj.population.resize(n);
    std::vector<double> out_sq(n), in_sq(n);
    for (int i = 0; i < n; ++i) {
        traj.population[i] = std::norm(traj.dark[i]);
        traj.phi_out[i] =
            pulse.values()[i] - sqrt_gamma * schedule.cos_theta()[i] * traj.dark[i];
        out_sq[i] = std::norm(traj.phi_out[i]);
        in_sq[i] = std::norm(pulse.values()[i]);
    }
    const auto cum_out = num::cumulative_integral<double>(out_sq, traj.grid.dt());
    const auto cum_in = num::cumulative_integral<double>(in_sq, traj.grid.dt());
    double max_residual = 0.0;
    for (int i = 0; i < n; ++i) {
        const double residual = traj.population[i] + cum_out[i] - cum_in[i];
        max_residual = std::max(max_residual, std::abs(residual));
    }
    traj.ledger_max_residual = max_residual;
}

}  // namespace

double ReducedTrajectory::final_dark_abs() const { return std::abs(dark.back()); }

ReducedTrajectory integrate_dark_state(const SystemParams& params, const PulseEnvelope& pulse,
                                       const ControlSchedule& schedule,
                                       const ReducedOptions& opts) {
    check_shared_grid(pulse, schedule);
    if (opts.substeps < 1)
        throw std::invalid_argument("integrate_dark_state: substeps must be >= 1");

    const TimeGrid& grid = pulse.grid();
    ReducedTrajectory traj{grid, {}, {}, {}, {}, 0.0};
    warn_initial_tail(pulse, traj);

    const double gamma = params.gamma();
    const double gamma_c = params.gamma_c();
    const double sqrt_gamma = std::sqrt(gamma);
    auto rhs = [&](double t, cplx d) {
        const double c = schedule.cos_theta_at(t);
        const double c2 = c * c;
        const double damping = 0.5 * gamma * c2 + 0.5 * gamma_c * (1.0 - c2);
        return sqrt_gamma * c * pulse.value_at(t) - damping * d;
    };

    traj.dark.resize(grid.size());
    cplx d(0.0, 0.0);
    traj.dark[0] = d;
    const double h = grid.dt() / opts.substeps;
    for (int i = 0; i + 1 < grid.size(); ++i) {
        double t = grid.time(i);
        for (int k = 0; k < opts.substeps; ++k) {
            d = num::rk4_step(rhs, t, d, h);
            t += h;
        }
        traj.dark[i + 1] = d;
    }

    finish_trajectory(params, pulse, schedule, traj);
    return traj;
}

ReducedTrajectory quadrature_solution(const SystemParams& params, const PulseEnvelope& pulse,
                                      const ControlSchedule& schedule) {
    check_shared_grid(pulse, schedule);
    const TimeGrid& grid = pulse.grid();
    const int n = grid.size();
    ReducedTrajectory traj{grid, {}, {}, {}, {}, 0.0};
    warn_initial_tail(pulse, traj);

    const double gamma = params.gamma();
    const double gamma_c = params.gamma_c();
    const double sqrt_gamma = std::sqrt(gamma);
    const double h = grid.dt();

    // Damping rate q(t) and source f(t) sampled on the grid.
    std::vector<double> q(n);
    std::vector<cplx> f(n);
    for (int i = 0; i < n; ++i) {
        const double c = schedule.cos_theta()[i];
        const double c2 = c * c;
        q[i] = 0.5 * gamma * c2 + 0.5 * gamma_c * (1.0 - c2);
        f[i] = sqrt_gamma * c * pulse.values()[i];
    }
    const auto cum_q = num::cumulative_integral<double>(q, h);

    // D(t_{i+1}) = e^{-dQ} D(t_i) + int_{t_i}^{t_{i+1}} f(tau) e^{-(Q_{i+1}-Q(tau))} dtau.
    // The one-interval integral uses two-point Gauss nodes with f and Q
    // interpolated cubically from the grid samples; every exponent stays
    // O(q h), so the evaluation cannot overflow regardless of span.
    constexpr double kGaussOffset = 0.28867513459481287;  // 1/(2 sqrt(3))
    const double nodes[2] = {0.5 - kGaussOffset, 0.5 + kGaussOffset};

    traj.dark.assign(n, cplx(0.0, 0.0));
    cplx d(0.0, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
        const double dq_full = cum_q[i + 1] - cum_q[i];
        int s = std::clamp(i - 1, 0, n - 4);
        cplx j(0.0, 0.0);
        for (double node : nodes) {
            const double x = (i - s) + node;
            const cplx f_node = num::lagrange4(f.data() + s, x);
            const double q_node = num::lagrange4(cum_q.data() + s, x);
            j += f_node * std::exp(-(cum_q[i + 1] - q_node));
        }
        d = d * std::exp(-dq_full) + (h / 2.0) * j;
        traj.dark[i + 1] = d;
    }

    finish_trajectory(params, pulse, schedule, traj);
    return traj;
}

ReducedTrajectory loading_output(const SystemParams& params, const PulseEnvelope& pulse,
                                 const ControlSchedule& schedule) {
    return quadrature_solution(params, pulse, schedule);
}

std::vector<double> timing_sensitivity(const SystemParams& params, const PulseEnvelope& pulse,
                                       const ControlSchedule& schedule,
                                       const std::vector<double>& deltas) {
    std::vector<double> out;
    out.reserve(deltas.size());
    for (double delta : deltas) {
        const PulseEnvelope shifted = pulse.shift(delta);
        out.push_back(integrate_dark_state(params, shifted, schedule).final_dark_abs());
    }
    return out;
}

double reflected_energy(const ReducedTrajectory& traj) {
    std::vector<double> sq(traj.phi_out.size());
    for (size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(traj.phi_out[i]);
    return num::integral<double>(sq, traj.grid.dt());
}

}  // namespace qmem
