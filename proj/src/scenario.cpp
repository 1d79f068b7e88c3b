#include "qmem/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qmem/csv.hpp"
#include "qmem/numerics.hpp"

namespace qmem {

SystemParams params_from_config(const ScenarioConfig& cfg) {
    if (cfg.n_atoms < 1) throw std::invalid_argument("config: n_atoms must be >= 1");
    if (!(cfg.gn_T > 0.0)) throw std::invalid_argument("config: gn_T must be > 0");
    const double T = 1.0;  // internal time unit
    const double g = cfg.gn_T / std::sqrt(static_cast<double>(cfg.n_atoms));
    return SystemParams(g, cfg.n_atoms, cfg.gamma_T, cfg.gamma_a_T, cfg.gamma_c_T, T);
}

TimeGrid grid_from_config(const ScenarioConfig& cfg) {
    return TimeGrid(cfg.grid_t0_T, cfg.grid_t1_T, cfg.grid_points);
}

PulseEnvelope pulse_from_config(const ScenarioConfig& cfg, const TimeGrid& grid) {
    if (cfg.pulse == "sech") return PulseEnvelope::make_sech(grid, 1.0, cfg.delay_T);
    if (cfg.pulse == "gaussian") return PulseEnvelope::make_gaussian(grid, 1.0, cfg.delay_T);
    if (cfg.pulse == "hyper_gaussian")
        return PulseEnvelope::make_hyper_gaussian(grid, 1.0, cfg.delay_T);
    if (cfg.pulse.rfind("csv:", 0) == 0)
        return PulseEnvelope::from_csv(cfg.pulse.substr(4), 1.0);
    throw std::invalid_argument("config: unknown pulse '" + cfg.pulse + "'");
}

ControlSchedule schedule_from_config(const ScenarioConfig& cfg, const SystemParams& params,
                                     const PulseEnvelope& pulse) {
    ControlSchedule schedule = [&]() {
        if (cfg.schedule == "analytic")
            return sech_matched_cos_theta(params, pulse.grid(), cfg.delay_T);
        if (cfg.schedule == "solved")
            return solve_impedance_matching(params, pulse, default_matching_start(params));
        if (cfg.schedule.rfind("constant:", 0) == 0) {
            const double value = std::stod(cfg.schedule.substr(9));
            return ControlSchedule::constant(params, pulse.grid(), value);
        }
        if (cfg.schedule.rfind("file:", 0) == 0)
            return ControlSchedule::from_csv(params, cfg.schedule.substr(5));
        throw std::invalid_argument("config: unknown schedule '" + cfg.schedule + "'");
    }();
    if (cfg.omega_cap_over_gn > 0.0)
        schedule = schedule.with_omega_cap(cfg.omega_cap_over_gn *
                                           params.collective_coupling());
    return schedule;
}

ModeBank bank_from_config(const ScenarioConfig& cfg, const SystemParams& params) {
    const double T = params.t_pulse();
    const double delta_max = cfg.bank_delta_max_T > 0.0
                                 ? cfg.bank_delta_max_T / T
                                 : std::max({40.0 / T, 10.0 * params.gamma(), 20.0 / T});
    return ModeBank::make(params.gamma(), delta_max, cfg.n_modes, T);
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("expected a comma-separated number list");
    return out;
}

double reflected_overlap(const PulseEnvelope& pulse, const ReducedTrajectory& traj) {
    const int n = traj.grid.size();
    std::vector<cplx> prod(n);
    for (int i = 0; i < n; ++i) prod[i] = std::conj(pulse.values()[i]) * traj.phi_out[i];
    return num::integral<cplx>(prod, traj.grid.dt()).real();
}

double output_tail_duration(const ReducedTrajectory& traj, double t_after) {
    const int n = traj.grid.size();
    std::vector<double> sq(n, 0.0);
    for (int i = 0; i < n; ++i)
        if (traj.grid.time(i) >= t_after) sq[i] = std::norm(traj.phi_out[i]);
    const auto cum = num::cumulative_integral<double>(sq, traj.grid.dt());
    const double total = cum.back();
    if (!(total > 0.0)) return 0.0;
    const double target = (1.0 - std::exp(-1.0)) * total;
    for (int i = 1; i < n; ++i) {
        if (cum[i] >= target) {
            const double frac = (target - cum[i - 1]) / (cum[i] - cum[i - 1]);
            return traj.grid.time(i - 1) + frac * traj.grid.dt() - t_after;
        }
    }
    return traj.grid.t_end() - t_after;
}

double sech_fit_residual(const TimeGrid& grid, const std::vector<cplx>& phi, double t_pulse,
                         double t_center) {
    const int n = grid.size();
    std::vector<double> mag(n), model(n);
    double num_acc = 0.0, den_acc = 0.0, energy = 0.0;
    for (int i = 0; i < n; ++i) {
        mag[i] = std::abs(phi[i]);
        model[i] = 1.0 / std::cosh(2.0 * (grid.time(i) - t_center) / t_pulse);
        num_acc += mag[i] * model[i];
        den_acc += model[i] * model[i];
        energy += mag[i] * mag[i];
    }
    if (!(den_acc > 0.0) || !(energy > 0.0)) return 1.0;
    const double amp = num_acc / den_acc;
    double resid = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = mag[i] - amp * model[i];
        resid += d * d;
    }
    return std::sqrt(resid / energy);
}

void write_summary(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_summary: cannot open " + path);
    for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
    if (!out) throw std::runtime_error("write_summary: write failed for " + path);
}

std::string format_double(double v) { return csv::format_value(v); }

}  // namespace qmem
