#include "qmem/params.hpp"

#include <cmath>
#include <stdexcept>

#include "qmem/errors.hpp"

namespace qmem {

SystemParams::SystemParams(double g, int n_atoms, double gamma, double gamma_a,
                           double gamma_c, double t_pulse)
    : g_(g), n_atoms_(n_atoms), gamma_(gamma), gamma_a_(gamma_a), gamma_c_(gamma_c),
      t_pulse_(t_pulse) {
    if (!(g > 0.0)) throw std::invalid_argument("SystemParams: g must be > 0");
    if (n_atoms < 1) throw std::invalid_argument("SystemParams: n_atoms must be >= 1");
    if (!(gamma >= 0.0) || !(gamma_a >= 0.0) || !(gamma_c >= 0.0))
        throw std::invalid_argument("SystemParams: decay rates must be >= 0");
    if (!(t_pulse > 0.0)) throw std::invalid_argument("SystemParams: t_pulse must be > 0");
    collective_ = g * std::sqrt(static_cast<double>(n_atoms));
    if (!std::isfinite(collective_) || !(collective_ > 0.0))
        throw std::invalid_argument("SystemParams: collective coupling must be finite and > 0");
}

MixingAngle mixing_angle_from_omega(const SystemParams& params, double omega) {
    if (!(omega >= 0.0))
        throw std::invalid_argument("mixing_angle_from_omega: omega must be >= 0");
    const double gn = params.collective_coupling();
    MixingAngle angle;
    angle.omega = omega;
    angle.omega0 = std::hypot(omega, gn);
    angle.cos_theta = omega / angle.omega0;
    angle.sin_theta = gn / angle.omega0;
    return angle;
}

double omega_from_cos_theta(const SystemParams& params, double cos_theta) {
    if (!(cos_theta >= 0.0) || cos_theta > 1.0)
        throw std::invalid_argument("omega_from_cos_theta: cos_theta must lie in [0, 1)");
    if (cos_theta == 1.0)
        throw InfeasibleError("omega_from_cos_theta: cos_theta = 1 requires infinite drive");
    const double sin_sq = (1.0 - cos_theta) * (1.0 + cos_theta);
    return params.collective_coupling() * cos_theta / std::sqrt(sin_sq);
}

double omega_from_cos_theta(const SystemParams& params, const MixingAngle& angle) {
    if (!(angle.sin_theta > 0.0))
        throw InfeasibleError("omega_from_cos_theta: sin_theta = 0 requires infinite drive");
    return params.collective_coupling() * angle.cos_theta / angle.sin_theta;
}

DarkBright dark_bright_rotate(const AmplitudeState& state, const MixingAngle& angle) {
    const cplx i(0.0, 1.0);
    DarkBright out;
    out.dark = i * (-angle.cos_theta * state.b + angle.sin_theta * state.c);
    out.bright = angle.sin_theta * state.b + angle.cos_theta * state.c;
    return out;
}

double dark_state_decay_rate(const SystemParams& params, const MixingAngle& angle) {
    return 0.5 * params.gamma() * angle.cos_theta * angle.cos_theta;
}

}  // namespace qmem
