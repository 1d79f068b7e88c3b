#pragma once

#include <complex>
#include <vector>

namespace qmem {

using cplx = std::complex<double>;

// Physical parameters of the driven atom-cavity system.  All rates share one
// time unit; the CLI builds these from quantities scaled by the pulse
// duration T.  Immutable after construction.
class SystemParams {
public:
    SystemParams(double g, int n_atoms, double gamma, double gamma_a, double gamma_c,
                 double t_pulse);

    double g() const { return g_; }
    int n_atoms() const { return n_atoms_; }
    double gamma() const { return gamma_; }
    double gamma_a() const { return gamma_a_; }
    double gamma_c() const { return gamma_c_; }
    double t_pulse() const { return t_pulse_; }

    // g*sqrt(N): the coupling of the symmetric collective excitation.
    double collective_coupling() const { return collective_; }

private:
    double g_;
    int n_atoms_;
    double gamma_;
    double gamma_a_;
    double gamma_c_;
    double t_pulse_;
    double collective_;
};

// Consistent (cos(theta), Omega, Omega_0) triple for one instant of the
// control field.  tan(theta) = g sqrt(N) / Omega.
struct MixingAngle {
    double cos_theta = 0.0;
    double sin_theta = 1.0;
    double omega = 0.0;
    double omega0 = 0.0;
};

MixingAngle mixing_angle_from_omega(const SystemParams& params, double omega);

// Inverse map; cos_theta must lie in [0, 1).  cos_theta = 1 would require an
// infinite drive and is reported as infeasible.
double omega_from_cos_theta(const SystemParams& params, double cos_theta);

// Inverse through a full angle.  A bare cos(theta) rounds away the drive
// strength once cos(theta) ~ 1 - 1e-12; the stored sin(theta) keeps the
// inversion exact over the whole feasible drive range.
double omega_from_cos_theta(const SystemParams& params, const MixingAngle& angle);

// State amplitudes in the bare basis: collective excited state |a>, cavity
// photon |b,1>, collective spin |c>, plus optional free-field modes.
struct AmplitudeState {
    cplx a{};
    cplx b{};
    cplx c{};
    std::vector<cplx> xi{};
};

struct DarkBright {
    cplx dark{};
    cplx bright{};
};

// Rotation of the (photon, spin) pair into the dark/bright basis:
//   D = i(-cos(theta) b + sin(theta) c),  B = sin(theta) b + cos(theta) c.
// The i factor fixes the internal phase convention of the dark state; only
// moduli and relative phases are meaningful downstream.
DarkBright dark_bright_rotate(const AmplitudeState& state, const MixingAngle& angle);

// Effective amplitude decay rate gamma_D / 2 = (gamma/2) cos^2(theta) of the
// dark state through the cavity mirror.
double dark_state_decay_rate(const SystemParams& params, const MixingAngle& angle);

}  // namespace qmem
