#include "qmem/classical.hpp"

#include <cmath>
#include <stdexcept>

#include "qmem/numerics.hpp"

namespace qmem {

MirrorCavity MirrorCavity::make(double reflectivity, double zeta, double tau_c, double tau_0) {
    if (!(reflectivity > 0.0) || reflectivity >= 1.0)
        throw std::invalid_argument("MirrorCavity: reflectivity must lie in (0, 1)");
    if (!(zeta > 0.0) || zeta > 1.0)
        throw std::invalid_argument("MirrorCavity: zeta must lie in (0, 1]");
    if (!(tau_0 > 0.0) || tau_c < tau_0)
        throw std::invalid_argument("MirrorCavity: need tau_c >= tau_0 > 0");
    MirrorCavity cav;
    cav.reflectivity = reflectivity;
    cav.transmission = cplx(0.0, std::sqrt((1.0 - reflectivity) * (1.0 + reflectivity)));
    cav.zeta = zeta;
    cav.tau_c = tau_c;
    cav.tau_0 = tau_0;
    return cav;
}

RoundTripResult roundtrip_simulate(const MirrorCavity& cavity, const TimeGrid& grid,
                                   const std::vector<cplx>& e_in, cplx e_c_preload) {
    if (static_cast<int>(e_in.size()) != grid.size())
        throw std::invalid_argument("roundtrip_simulate: field does not match grid");

    RoundTripResult res{grid, e_in, {}, {}, {}, {}, {}, false, 0};

    // The recursion needs tau_c to be a whole number of samples.
    double ratio = cavity.tau_c / grid.dt();
    int m = static_cast<int>(std::lround(ratio));
    if (m < 1 || std::abs(ratio - m) > 1e-9 * ratio) {
        m = std::max(1, static_cast<int>(std::ceil(ratio)));
        const double new_dt = cavity.tau_c / m;
        const int n_new = static_cast<int>(std::floor(grid.span() / new_dt)) + 1;
        TimeGrid regrid(grid.t_start(), grid.t_start() + new_dt * (n_new - 1), n_new);
        std::vector<cplx> resampled(n_new);
        for (int i = 0; i < n_new; ++i)
            resampled[i] = num::interp_cubic<cplx>(e_in, grid.position(regrid.time(i)));
        res.grid = regrid;
        res.e_in = std::move(resampled);
        res.resampled = true;
    }
    res.samples_per_roundtrip = m;

    const int n = res.grid.size();
    const cplx T = cavity.transmission;
    const double R = cavity.reflectivity;
    const double zeta = cavity.zeta;
    const double dt = res.grid.dt();

    res.e_c.resize(n);
    res.e_out.resize(n);
    res.stored.resize(n);
    double window_energy = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx delayed = i >= m ? res.e_c[i - m] : e_c_preload;
        res.e_c[i] = T * res.e_in[i] + R * zeta * delayed;
        res.e_out[i] = T * zeta * delayed + R * res.e_in[i];
        window_energy += std::norm(res.e_c[i]) * dt;
        if (i >= m) window_energy -= std::norm(res.e_c[i - m]) * dt;
        res.stored[i] = window_energy;
    }

    // First-order limit: E_c' = -eta E_c + (T / (R zeta tau_c)) E_in.
    const double eta = (1.0 - R * zeta) / (R * zeta * cavity.tau_c);
    const cplx drive_coef = T / (R * zeta * cavity.tau_c);
    res.e_c_ode.resize(n);
    res.e_out_ode.resize(n);
    cplx ec = e_c_preload;
    auto e_in_at = [&](double t) {
        return num::interp_cubic<cplx>(res.e_in, res.grid.position(t));
    };
    auto rhs = [&](double t, cplx y) { return -eta * y + drive_coef * e_in_at(t); };
    res.e_c_ode[0] = ec;
    res.e_out_ode[0] = (1.0 / R) * res.e_in[0] + (T / R) * ec;
    for (int i = 0; i + 1 < n; ++i) {
        ec = num::rk4_step(rhs, res.grid.time(i), ec, dt);
        res.e_c_ode[i + 1] = ec;
        res.e_out_ode[i + 1] = (1.0 / R) * res.e_in[i + 1] + (T / R) * ec;
    }
    return res;
}

std::vector<double> generalized_matching_residual(const MirrorCavity& cavity,
                                                  const TimeGrid& grid,
                                                  const std::vector<double>& e_in) {
    if (static_cast<int>(e_in.size()) != grid.size())
        throw std::invalid_argument("generalized_matching_residual: field does not match grid");
    for (int i = 0; i < grid.size(); ++i)
        if (!(e_in[i] > 0.0))
            throw std::invalid_argument(
                "generalized_matching_residual: E_in must be positive; zero crossing at t = " +
                std::to_string(grid.time(i)));

    std::vector<double> ln_e(grid.size());
    for (int i = 0; i < grid.size(); ++i) ln_e[i] = std::log(e_in[i]);

    const double target = 0.5 * cavity.gamma() * cavity.tau_0 / cavity.tau_c;
    const double half_int = 0.5 * cavity.gamma_int();
    std::vector<double> residual(grid.size());
    auto ln_at = [&](double t) { return num::interp_cubic<double>(ln_e, grid.position(t)); };
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.time(i);
        const double h = grid.dt() / 2.0;
        const double dln = num::derivative(ln_at, t, h);
        residual[i] = half_int + dln - target;
    }
    return residual;
}

ScheduleResidual matching_residual_from_schedule(const SystemParams& params,
                                                 const PulseEnvelope& pulse,
                                                 const ControlSchedule& schedule, double t_lo,
                                                 double t_hi, double cos_floor) {
    ScheduleResidual out;
    const TimeGrid& grid = schedule.grid();
    const double gamma = params.gamma();
    auto ln_cos = [&](double t) {
        const double c = schedule.cos_theta_at(t);
        return std::log(std::max(c, 1e-300));
    };
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.time(i);
        if (t < t_lo || t > t_hi) continue;
        const double c = schedule.cos_theta_at(t);
        if (c <= cos_floor) continue;
        const double h = grid.dt() / 2.0;
        const double d_ln_cos = num::derivative(ln_cos, t, h);
        const double residual =
            -d_ln_cos + pulse.log_derivative_at(t) - 0.5 * gamma * c * c;
        out.times.push_back(t);
        out.residual.push_back(residual);
    }
    return out;
}

double group_velocity_ratio(const MixingAngle& angle) {
    return angle.cos_theta * angle.cos_theta;
}

ScheduleResidual photon_probability_loss_rate(const ControlSchedule& schedule,
                                              double cos_floor) {
    ScheduleResidual out;
    const TimeGrid& grid = schedule.grid();
    auto ln_cos = [&](double t) {
        const double c = schedule.cos_theta_at(t);
        return std::log(std::max(c, 1e-300));
    };
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.time(i);
        if (schedule.cos_theta_at(t) <= cos_floor) continue;
        const double h = grid.dt() / 2.0;
        out.times.push_back(t);
        out.residual.push_back(-2.0 * num::derivative(ln_cos, t, h));
    }
    return out;
}

}  // namespace qmem
