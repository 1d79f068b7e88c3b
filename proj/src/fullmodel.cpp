#include "qmem/fullmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qmem/errors.hpp"
#include "qmem/numerics.hpp"

namespace qmem {

namespace {

constexpr double kMaxRatePerStep = 0.12;  // target max |rate| * h for RK4 substeps
constexpr int kMaxSubsteps = 4096;

// Phase vector p_k = e^{-i Delta_k tau} for a uniform symmetric comb,
// built by a geometric recurrence (two sincos calls per vector).
void fill_phases(const ModeBank& bank, double tau, std::vector<cplx>& p) {
    const cplx base = std::polar(1.0, bank.delta_max * tau);
    const cplx step = std::polar(1.0, -bank.d_delta * tau);
    cplx cur = base;
    for (int k = 0; k < bank.size(); ++k) {
        p[k] = cur;
        cur *= step;
    }
}

}  // namespace

double ModeBank::recurrence_time() const { return 2.0 * std::numbers::pi / d_delta; }

ModeBank ModeBank::make(double gamma, double delta_max, int n_modes, double t_pulse_hint) {
    if (!(gamma > 0.0)) throw std::invalid_argument("ModeBank: gamma must be > 0");
    if (n_modes < 2) throw std::invalid_argument("ModeBank: need at least 2 modes");
    if (!(delta_max > 0.0)) throw std::invalid_argument("ModeBank: delta_max must be > 0");
    if (delta_max < 10.0 * gamma)
        throw std::invalid_argument("ModeBank: delta_max must cover the cavity line (>= 10 gamma)");
    if (t_pulse_hint > 0.0 && delta_max < 20.0 / t_pulse_hint)
        throw std::invalid_argument("ModeBank: delta_max must cover the pulse bandwidth (>= 20/T)");

    ModeBank bank;
    bank.delta_max = delta_max;
    bank.d_delta = 2.0 * delta_max / (n_modes - 1);
    bank.kappa_eff = std::sqrt(gamma * bank.d_delta / (2.0 * std::numbers::pi));
    bank.detunings.resize(n_modes);
    for (int k = 0; k < n_modes; ++k) bank.detunings[k] = -delta_max + k * bank.d_delta;
    return bank;
}

ModeBank ModeBank::standard(const SystemParams& params) {
    const double T = params.t_pulse();
    const double delta_max = std::max({40.0 / T, 10.0 * params.gamma(), 20.0 / T});
    return make(params.gamma(), delta_max, 1024, T);
}

std::vector<cplx> encode_input_modes(const PulseEnvelope& pulse, const ModeBank& bank,
                                     double t_ref) {
    if (pulse.t_pulse() > 0.0 && 1.0 / pulse.t_pulse() >= bank.delta_max / 4.0)
        throw std::invalid_argument(
            "encode_input_modes: pulse bandwidth 1/T exceeds delta_max/4");

    const TimeGrid& grid = pulse.grid();
    const double dt = grid.dt();
    const double weight = std::sqrt(bank.d_delta / (2.0 * std::numbers::pi)) * dt;
    const auto& phi = pulse.values();

    std::vector<cplx> xi(bank.size());
    for (int k = 0; k < bank.size(); ++k) {
        const double delta = bank.detunings[k];
        // incremental rotor over the time samples
        cplx rot = std::polar(1.0, delta * (grid.t_start() - t_ref));
        const cplx step = std::polar(1.0, delta * dt);
        cplx acc(0.0, 0.0);
        for (int j = 0; j < grid.size(); ++j) {
            acc += phi[j] * rot;
            rot *= step;
        }
        xi[k] = weight * acc;
    }

    const double norm = mode_norm(xi);
    if (std::abs(norm - 1.0) > 1e-4)
        throw std::invalid_argument("encode_input_modes: spectral leakage too large, sum|xi|^2 = " +
                                    std::to_string(norm) + " (bank does not cover the spectrum)");
    return xi;
}

std::vector<cplx> decode_modes(const std::vector<cplx>& xi, const ModeBank& bank, double t_ref,
                               const TimeGrid& grid) {
    if (static_cast<int>(xi.size()) != bank.size())
        throw std::invalid_argument("decode_modes: amplitude count does not match bank");
    std::vector<cplx> phi(grid.size(), cplx(0.0, 0.0));
    const double weight = std::sqrt(bank.d_delta / (2.0 * std::numbers::pi));
    for (int k = 0; k < bank.size(); ++k) {
        const double delta = bank.detunings[k];
        cplx rot = std::polar(1.0, -delta * (grid.t_start() - t_ref));
        const cplx step = std::polar(1.0, -delta * grid.dt());
        const cplx amp = weight * xi[k];
        for (int j = 0; j < grid.size(); ++j) {
            phi[j] += amp * rot;
            rot *= step;
        }
    }
    return phi;
}

double mode_norm(const std::vector<cplx>& xi) {
    double s = 0.0;
    for (const auto& v : xi) s += std::norm(v);
    return s;
}

double FullTrajectory::final_dark_population() const { return std::norm(dark.back()); }

namespace {

struct FullState {
    cplx a, b, c;
    std::vector<cplx> eta;  // rotating-frame mode amplitudes
};

struct Derivative {
    cplx a, b, c;
    std::vector<cplx> eta;
};

// One full-system RHS evaluation at absolute time t with phases p.
void full_rhs(const SystemParams& params, const ModeBank& bank, double omega,
              const FullState& s, const std::vector<cplx>& p, Derivative& d) {
    const cplx i_unit(0.0, 1.0);
    const double gn = params.collective_coupling();
    const double kappa = bank.kappa_eff;

    cplx mode_sum(0.0, 0.0);
    const int n = bank.size();
    for (int k = 0; k < n; ++k) mode_sum += s.eta[k] * p[k];

    d.a = -0.5 * params.gamma_a() * s.a - i_unit * gn * s.b - i_unit * omega * s.c;
    d.b = -i_unit * gn * s.a - i_unit * kappa * mode_sum;
    d.c = -0.5 * params.gamma_c() * s.c - i_unit * omega * s.a;
    const cplx coef = -i_unit * kappa * s.b;
    for (int k = 0; k < n; ++k) d.eta[k] = coef * std::conj(p[k]);
}

int choose_substeps(const ModeBank& bank, const ControlSchedule& schedule,
                    const SystemParams& params, double dt, int requested) {
    if (requested > 0) return requested;
    double rate = bank.delta_max;
    const double gn = params.collective_coupling();
    for (double w : schedule.omega()) rate = std::max(rate, std::hypot(w, gn));
    rate = std::max({rate, params.gamma(), params.gamma_a(), params.gamma_c()});
    const int m = static_cast<int>(std::ceil(rate * dt / kMaxRatePerStep));
    if (m > kMaxSubsteps)
        throw ConvergenceError(
            "integrate_full: required substeps " + std::to_string(m) +
            " exceed the limit; the drive cap or grid make explicit stepping impractical");
    return std::max(1, m);
}

FullTrajectory run_full(const SystemParams& params, const ModeBank& bank,
                        const std::vector<cplx>& xi_initial, const ControlSchedule& schedule,
                        int substeps, int snapshot_stride) {
    const TimeGrid& grid = schedule.grid();
    const int n_modes = bank.size();
    const int n = grid.size();
    const double t0 = grid.t_start();

    FullTrajectory traj;
    traj.grid = grid;
    traj.a.resize(n);
    traj.b.resize(n);
    traj.c.resize(n);
    traj.dark.resize(n);
    traj.bright.resize(n);
    traj.norm.resize(n);

    FullState state{cplx(0, 0), cplx(0, 0), cplx(0, 0), xi_initial};
    FullState stage{cplx(0, 0), cplx(0, 0), cplx(0, 0), std::vector<cplx>(n_modes)};
    Derivative k1{{}, {}, {}, std::vector<cplx>(n_modes)};
    Derivative k2 = k1, k3 = k1, k4 = k1;
    std::vector<cplx> phase(n_modes);

    const double h = grid.dt() / substeps;
    double drive_ratio_min = std::numeric_limits<double>::infinity();

    auto record = [&](int i) {
        traj.a[i] = state.a;
        traj.b[i] = state.b;
        traj.c[i] = state.c;
        const double t = grid.time(i);
        const double omega = schedule.omega_at(t);
        const MixingAngle angle = mixing_angle_from_omega(params, omega);
        const DarkBright rotated =
            dark_bright_rotate(AmplitudeState{state.a, state.b, state.c, {}}, angle);
        traj.dark[i] = rotated.dark;
        traj.bright[i] = rotated.bright;
        double mode_sq = 0.0;
        for (const auto& v : state.eta) mode_sq += std::norm(v);
        traj.norm[i] =
            std::norm(state.a) + std::norm(state.b) + std::norm(state.c) + mode_sq;
        const double b_abs = std::abs(state.b);
        if (b_abs > 1e-10)
            drive_ratio_min =
                std::min(drive_ratio_min, omega / (params.collective_coupling() * b_abs));
        if (snapshot_stride > 0 && (i % snapshot_stride == 0 || i == n - 1)) {
            std::vector<cplx> xi(n_modes);
            const double tau = t - t0;
            fill_phases(bank, tau, phase);
            for (int k = 0; k < n_modes; ++k) xi[k] = state.eta[k] * phase[k];
            traj.xi_snapshots.push_back(std::move(xi));
            traj.snapshot_indices.push_back(i);
        }
    };

    record(0);
    for (int i = 0; i + 1 < n; ++i) {
        double t = grid.time(i);
        for (int s = 0; s < substeps; ++s) {
            // RK4 with the mode phases evaluated exactly at the stage times.
            const double tau0 = t - t0;
            fill_phases(bank, tau0, phase);
            full_rhs(params, bank, schedule.omega_at(t), state, phase, k1);

            auto advance = [&](const Derivative& d, double factor) {
                stage.a = state.a + factor * d.a;
                stage.b = state.b + factor * d.b;
                stage.c = state.c + factor * d.c;
                for (int k = 0; k < n_modes; ++k)
                    stage.eta[k] = state.eta[k] + factor * d.eta[k];
            };

            fill_phases(bank, tau0 + 0.5 * h, phase);
            const double omega_mid = schedule.omega_at(t + 0.5 * h);
            advance(k1, 0.5 * h);
            full_rhs(params, bank, omega_mid, stage, phase, k2);
            advance(k2, 0.5 * h);
            full_rhs(params, bank, omega_mid, stage, phase, k3);

            fill_phases(bank, tau0 + h, phase);
            advance(k3, h);
            full_rhs(params, bank, schedule.omega_at(t + h), stage, phase, k4);

            const double w = h / 6.0;
            state.a += w * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
            state.b += w * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
            state.c += w * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
            for (int k = 0; k < n_modes; ++k)
                state.eta[k] +=
                    w * (k1.eta[k] + 2.0 * k2.eta[k] + 2.0 * k3.eta[k] + k4.eta[k]);
            t += h;
        }
        record(i + 1);
    }

    // lab-frame modes at the final time
    traj.xi_final.resize(n_modes);
    fill_phases(bank, grid.t_end() - t0, phase);
    for (int k = 0; k < n_modes; ++k) traj.xi_final[k] = state.eta[k] * phase[k];
    traj.drive_ratio_min = drive_ratio_min;
    return traj;
}

}  // namespace

FullTrajectory integrate_full(const SystemParams& params, const ModeBank& bank,
                              const std::vector<cplx>& xi_initial,
                              const ControlSchedule& schedule, const FullModelOptions& opts) {
    if (static_cast<int>(xi_initial.size()) != bank.size())
        throw std::invalid_argument("integrate_full: initial amplitudes do not match bank");
    if (schedule.grid().span() >= bank.recurrence_time())
        throw std::invalid_argument(
            "integrate_full: grid span reaches the mode-comb recurrence time; refine d_delta");

    const int substeps =
        choose_substeps(bank, schedule, params, schedule.grid().dt(), opts.substeps);
    FullTrajectory traj =
        run_full(params, bank, xi_initial, schedule, substeps, opts.snapshot_stride);

    if (opts.step_check) {
        const FullTrajectory fine =
            run_full(params, bank, xi_initial, schedule, 2 * substeps, 0);
        double max_diff = 0.0;
        for (int i = 0; i < traj.grid.size(); ++i)
            max_diff = std::max(max_diff,
                                std::abs(std::norm(traj.dark[i]) - std::norm(fine.dark[i])));
        traj.step_check_error = max_diff;
        if (max_diff > 1e-6)
            throw ConvergenceError("integrate_full: step-halving instability " +
                                   std::to_string(max_diff) + " exceeds 1e-6");
    }
    return traj;
}

BareCavityTrajectory integrate_bare_cavity(double gamma, const ModeBank& bank, cplx b_initial,
                                           const std::vector<cplx>& xi_initial,
                                           const TimeGrid& grid, int substeps) {
    if (!xi_initial.empty() && static_cast<int>(xi_initial.size()) != bank.size())
        throw std::invalid_argument("integrate_bare_cavity: initial amplitudes do not match bank");
    if (grid.span() >= bank.recurrence_time())
        throw std::invalid_argument(
            "integrate_bare_cavity: grid span reaches the mode-comb recurrence time");
    if (substeps <= 0) {
        const double rate = std::max(bank.delta_max, gamma);
        substeps = std::max(1, static_cast<int>(std::ceil(rate * grid.dt() / kMaxRatePerStep)));
        if (substeps > kMaxSubsteps)
            throw ConvergenceError("integrate_bare_cavity: substep count impractical");
    }

    const int n_modes = bank.size();
    const int n = grid.size();
    const double t0 = grid.t_start();
    const double kappa = bank.kappa_eff;
    const cplx i_unit(0.0, 1.0);

    BareCavityTrajectory traj;
    traj.grid = grid;
    traj.b.resize(n);
    traj.norm.resize(n);

    cplx b = b_initial;
    std::vector<cplx> eta = xi_initial.empty() ? std::vector<cplx>(n_modes, cplx(0, 0))
                                               : xi_initial;
    std::vector<cplx> phase(n_modes), stage_eta(n_modes);
    std::vector<cplx> k1e(n_modes), k2e(n_modes), k3e(n_modes), k4e(n_modes);

    auto rhs = [&](const cplx& bb, const std::vector<cplx>& ee, const std::vector<cplx>& p,
                   cplx& db, std::vector<cplx>& de) {
        cplx mode_sum(0.0, 0.0);
        for (int k = 0; k < n_modes; ++k) mode_sum += ee[k] * p[k];
        db = -i_unit * kappa * mode_sum;
        const cplx coef = -i_unit * kappa * bb;
        for (int k = 0; k < n_modes; ++k) de[k] = coef * std::conj(p[k]);
    };

    auto record = [&](int i) {
        traj.b[i] = b;
        double s = std::norm(b);
        for (const auto& v : eta) s += std::norm(v);
        traj.norm[i] = s;
    };

    const double h = grid.dt() / substeps;
    record(0);
    cplx k1b, k2b, k3b, k4b;
    for (int i = 0; i + 1 < n; ++i) {
        double t = grid.time(i);
        for (int s = 0; s < substeps; ++s) {
            const double tau0 = t - t0;
            fill_phases(bank, tau0, phase);
            rhs(b, eta, phase, k1b, k1e);

            fill_phases(bank, tau0 + 0.5 * h, phase);
            cplx bs = b + 0.5 * h * k1b;
            for (int k = 0; k < n_modes; ++k) stage_eta[k] = eta[k] + 0.5 * h * k1e[k];
            rhs(bs, stage_eta, phase, k2b, k2e);

            bs = b + 0.5 * h * k2b;
            for (int k = 0; k < n_modes; ++k) stage_eta[k] = eta[k] + 0.5 * h * k2e[k];
            rhs(bs, stage_eta, phase, k3b, k3e);

            fill_phases(bank, tau0 + h, phase);
            bs = b + h * k3b;
            for (int k = 0; k < n_modes; ++k) stage_eta[k] = eta[k] + h * k3e[k];
            rhs(bs, stage_eta, phase, k4b, k4e);

            const double w = h / 6.0;
            b += w * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
            for (int k = 0; k < n_modes; ++k)
                eta[k] += w * (k1e[k] + 2.0 * k2e[k] + 2.0 * k3e[k] + k4e[k]);
            t += h;
        }
        record(i + 1);
    }

    traj.xi_final.resize(n_modes);
    fill_phases(bank, grid.t_end() - t0, phase);
    for (int k = 0; k < n_modes; ++k) traj.xi_final[k] = eta[k] * phase[k];
    return traj;
}

double fitted_cavity_decay(const TimeGrid& grid, const std::vector<cplx>& b,
                           double t_fit_start, double t_fit_end) {
    std::vector<double> ts, ln_abs;
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.time(i);
        if (t < t_fit_start || t > t_fit_end) continue;
        const double mag = std::abs(b[i]);
        if (mag <= 0.0) continue;
        ts.push_back(t);
        ln_abs.push_back(std::log(mag));
    }
    if (ts.size() < 4)
        throw std::invalid_argument("fitted_cavity_decay: fit window too narrow");
    return -2.0 * num::fit_line(ts, ln_abs).slope;
}

}  // namespace qmem
