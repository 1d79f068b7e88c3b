#pragma once

#include <vector>

#include "qmem/control.hpp"
#include "qmem/grid.hpp"
#include "qmem/params.hpp"
#include "qmem/pulses.hpp"

namespace qmem {

// Single-sided Fabry-Perot cavity with a lossless input mirror (R real,
// T = i|T|, |R|^2 + |T|^2 = 1) and round-trip amplitude loss zeta.
struct MirrorCavity {
    double reflectivity = 0.0;
    cplx transmission{};
    double zeta = 1.0;
    double tau_c = 0.0;  // round-trip time (group-delayed)
    double tau_0 = 0.0;  // empty-cavity round-trip time

    static MirrorCavity make(double reflectivity, double zeta, double tau_c, double tau_0);

    // Rates of the first-order expansion: R ~ 1 - gamma tau_0/2,
    // zeta ~ 1 - gamma_int tau_c/2.
    double gamma() const { return 2.0 * (1.0 - reflectivity) / tau_0; }
    double gamma_int() const { return 2.0 * (1.0 - zeta) / tau_c; }
};

struct RoundTripResult {
    TimeGrid grid;
    std::vector<cplx> e_in;
    std::vector<cplx> e_c;        // circulating field, exact delay recursion
    std::vector<cplx> e_out;
    std::vector<cplx> e_c_ode;    // continuum-limit first-order expansion
    std::vector<cplx> e_out_ode;
    std::vector<double> stored;   // energy in the delay line (flux units)
    bool resampled = false;
    int samples_per_roundtrip = 0;
};

// Iterates the exact delay recursion E_c(t) = T E_in(t) + R zeta E_c(t - tau_c)
// and, alongside it, the first-order ODE limit.  The grid is resampled when
// tau_c is not a whole number of samples.  e_c_preload seeds the delay line.
RoundTripResult roundtrip_simulate(const MirrorCavity& cavity, const TimeGrid& grid,
                                   const std::vector<cplx>& e_in, cplx e_c_preload = cplx(0, 0));

// Residual of the generalized impedance matching condition
//   gamma_int/2 + d/dt ln E_in - (gamma/2)(tau_0/tau_c)
// for a sampled positive field.  Zero means perfect destructive interference
// of the direct reflection and the leaking circulating field.
std::vector<double> generalized_matching_residual(const MirrorCavity& cavity,
                                                  const TimeGrid& grid,
                                                  const std::vector<double>& e_in);

// The same residual with the cavity-EIT substitutions tau_0/tau_c = cos^2,
// gamma_int = -2 d/dt ln cos(theta), evaluated where cos(theta) > cos_floor.
struct ScheduleResidual {
    std::vector<double> times;
    std::vector<double> residual;
};
ScheduleResidual matching_residual_from_schedule(const SystemParams& params,
                                                 const PulseEnvelope& pulse,
                                                 const ControlSchedule& schedule, double t_lo,
                                                 double t_hi, double cos_floor = 1e-8);

// tau_0 / tau_c for the EIT medium: the group-velocity reduction cos^2(theta).
double group_velocity_ratio(const MixingAngle& angle);

// Effective internal loss rate gamma_int(t) = -2 d/dt ln cos(theta), defined
// where cos(theta) stays above cos_floor (the window truncates elsewhere).
ScheduleResidual photon_probability_loss_rate(const ControlSchedule& schedule,
                                              double cos_floor = 1e-10);

}  // namespace qmem
