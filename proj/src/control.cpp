#include "qmem/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qmem/csv.hpp"
#include "qmem/errors.hpp"
#include "qmem/numerics.hpp"

namespace qmem {

namespace {

constexpr double kCosFloor = 1e-12;  // clamp floor inside the matching solver
constexpr double kCapFactor = 1e6;   // default omega cap in units of g sqrt(N)

// 1 - tanh(u) and 1 + tanh(u) without cancellation at large |u|.
double one_minus_tanh(double u) { return 2.0 / (1.0 + std::exp(2.0 * u)); }
double one_plus_tanh(double u) { return 2.0 / (1.0 + std::exp(-2.0 * u)); }

}  // namespace

ControlSchedule::ControlSchedule(const SystemParams& params, const TimeGrid& grid)
    : grid_(grid), gsqrt_n_(params.collective_coupling()), t_pulse_(params.t_pulse()),
      gamma_(params.gamma()), gamma_a_(params.gamma_a()),
      omega_cap_(kCapFactor * params.collective_coupling()) {}

void ControlSchedule::fill_omega_from_cos_theta() {
    omega_.resize(cos_theta_.size());
    // cos(theta) above this value maps to a drive beyond the cap.
    const double cos_cap = omega_cap_ / std::hypot(omega_cap_, gsqrt_n_);
    cap_events_ = 0;
    for (size_t i = 0; i < cos_theta_.size(); ++i) {
        const double c = cos_theta_[i];
        if (c >= cos_cap) {
            omega_[i] = omega_cap_;
            ++cap_events_;
        } else {
            omega_[i] = gsqrt_n_ * c / std::sqrt((1.0 - c) * (1.0 + c));
        }
    }
}

void ControlSchedule::attach_margins(const SystemParams& params) {
    margin_report_ = check_adiabaticity(params, *this);
}

ControlSchedule ControlSchedule::from_cos_theta(const SystemParams& params, const TimeGrid& grid,
                                                std::vector<double> cos_theta, Eval eval) {
    if (static_cast<int>(cos_theta.size()) != grid.size())
        throw std::invalid_argument("ControlSchedule: sample count does not match grid");
    for (double c : cos_theta)
        if (!(c >= 0.0) || c > 1.0)
            throw std::invalid_argument("ControlSchedule: cos_theta values must lie in [0, 1]");
    ControlSchedule s(params, grid);
    s.cos_theta_ = std::move(cos_theta);
    s.eval_ = std::move(eval);
    s.fill_omega_from_cos_theta();
    s.attach_margins(params);
    return s;
}

ControlSchedule ControlSchedule::constant(const SystemParams& params, const TimeGrid& grid,
                                          double cos_value) {
    std::vector<double> v(grid.size(), cos_value);
    return from_cos_theta(params, grid, std::move(v),
                          [cos_value](double) { return cos_value; });
}

ControlSchedule ControlSchedule::from_csv(const SystemParams& params, const std::string& path) {
    const auto table = csv::read(path);
    const int it = table.column_index("t");
    const int ic = table.column_index("cos_theta");
    if (it < 0 || ic < 0)
        throw std::invalid_argument("schedule csv: need columns t and cos_theta");
    const auto& t = table.columns[it];
    if (t.size() < 4) throw std::invalid_argument("schedule csv: too few rows");
    const double dt = (t.back() - t.front()) / (t.size() - 1);
    if (!(dt > 0.0)) throw std::invalid_argument("schedule csv: time column must increase");
    // tolerance covers the 12-digit print quantization of large |t|
    const double tol = 1e-6 * dt + 1e-11 * std::max(std::abs(t.front()), std::abs(t.back()));
    for (size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - dt) > tol)
            throw std::invalid_argument("schedule csv: time column must be uniform");
    return from_cos_theta(params,
                          TimeGrid(t.front(), t.back(), static_cast<int>(t.size())),
                          table.columns[ic]);
}

double ControlSchedule::cos_theta_at(double t) const {
    if (eval_) return eval_(t);
    const double c = num::interp_cubic<double>(cos_theta_, grid_.position(t));
    return std::clamp(c, 0.0, 1.0);
}

double ControlSchedule::omega_at(double t) const {
    const double c = cos_theta_at(t);
    const double cos_cap = omega_cap_ / std::hypot(omega_cap_, gsqrt_n_);
    if (c >= cos_cap) return omega_cap_;
    return gsqrt_n_ * c / std::sqrt((1.0 - c) * (1.0 + c));
}

ControlSchedule ControlSchedule::reversed_about(double t_mirror) const {
    ControlSchedule out(*this);
    out.grid_ = TimeGrid(2.0 * t_mirror - grid_.t_end(), 2.0 * t_mirror - grid_.t_start(),
                         grid_.size());
    out.cos_theta_.assign(cos_theta_.rbegin(), cos_theta_.rend());
    out.omega_.assign(omega_.rbegin(), omega_.rend());
    if (eval_) {
        auto base = eval_;
        out.eval_ = [base, t_mirror](double t) { return base(2.0 * t_mirror - t); };
    }
    return out;
}

ControlSchedule ControlSchedule::with_omega_cap(double cap) const {
    if (!(cap > 0.0)) throw std::invalid_argument("with_omega_cap: cap must be > 0");
    ControlSchedule out(*this);
    out.omega_cap_ = cap;
    out.fill_omega_from_cos_theta();
    return out;
}

void ControlSchedule::to_csv(const std::string& path) const {
    csv::write(path, {{"t", grid_.times()}, {"cos_theta", cos_theta_}, {"omega", omega_}});
}

ControlSchedule sech_matched_cos_theta(const SystemParams& params, const TimeGrid& grid,
                                       double center) {
    const double T = params.t_pulse();
    const double gT = params.gamma() * T;
    ControlSchedule s(params, grid);
    auto law = [gT, T, center](double t) {
        const double u = 2.0 * (t - center) / T;
        const double c2 = (2.0 / gT) * one_minus_tanh(u);
        return std::min(1.0, std::sqrt(c2));
    };
    s.cos_theta_.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) s.cos_theta_[i] = law(grid.time(i));
    s.eval_ = law;
    if (gT < 4.0) {
        s.feasible_ = false;
        s.diagnostic_ = "impedance matching for the sech packet needs gamma*T >= 4, got " +
                        std::to_string(gT) + "; cos(theta) would exceed 1 at early times";
    }
    s.fill_omega_from_cos_theta();
    s.attach_margins(params);
    return s;
}

ControlSchedule sech_matched_omega(const SystemParams& params, const TimeGrid& grid,
                                   double center) {
    const double T = params.t_pulse();
    const double gT = params.gamma() * T;
    const double gn = params.collective_coupling();
    ControlSchedule s(params, grid);
    const double cap = s.omega_cap();

    // Drive law; the denominator root crosses zero inside the grid when
    // gamma T < 4, which no finite drive can realize.
    auto drive = [gT, T, gn, center, cap](double t) {
        const double u = 2.0 * (t - center) / T;
        const double denom = (gT / 2.0 - 2.0) + one_plus_tanh(u);
        if (denom <= 0.0) return cap;
        const double w = gn * std::sqrt(one_minus_tanh(u) / denom);
        return std::min(w, cap);
    };

    if (gT < 4.0) {
        s.feasible_ = false;
        const double t_cross = center + 0.5 * T * std::atanh(1.0 - gT / 2.0);
        s.diagnostic_ = "drive denominator vanishes at t = " + std::to_string(t_cross) +
                        " (gamma*T = " + std::to_string(gT) + " < 4)";
    }

    s.omega_.resize(grid.size());
    s.cos_theta_.resize(grid.size());
    s.cap_events_ = 0;
    for (int i = 0; i < grid.size(); ++i) {
        const double w = drive(grid.time(i));
        if (w >= cap) ++s.cap_events_;
        s.omega_[i] = w;
        s.cos_theta_[i] = mixing_angle_from_omega(params, w).cos_theta;
    }
    s.eval_ = [params, drive](double t) {
        return mixing_angle_from_omega(params, drive(t)).cos_theta;
    };
    s.attach_margins(params);
    return s;
}

double default_matching_start(const SystemParams& params) {
    return std::min(1.0, 2.0 / std::sqrt(params.gamma() * params.t_pulse()));
}

ControlSchedule solve_impedance_matching(const SystemParams& params, const PulseEnvelope& pulse,
                                         double cos_theta_start) {
    if (!(cos_theta_start > 0.0) || cos_theta_start > 1.0)
        throw std::invalid_argument("solve_impedance_matching: start value must be in (0, 1]");
    if (pulse.family() == PulseFamily::custom) {
        if (!pulse.is_real_positive()) {
            for (int i = 0; i < pulse.grid().size(); ++i)
                if (!(pulse.values()[i].real() > 0.0))
                    throw std::invalid_argument(
                        "solve_impedance_matching: envelope crosses zero at t = " +
                        std::to_string(pulse.grid().time(i)) +
                        "; logarithmic derivative is singular");
            throw std::invalid_argument(
                "solve_impedance_matching: envelope must be real and positive");
        }
    }

    const TimeGrid& grid = pulse.grid();
    const double gamma = params.gamma();
    auto rhs = [&](double t, double x) {
        return x * pulse.log_derivative_at(t) - 0.5 * gamma * x * x * x;
    };

    ControlSchedule s(params, grid);
    int clamp_events = 0;
    auto integrate = [&](int substeps, std::vector<double>& out, bool count_clamps) {
        out.assign(grid.size(), 0.0);
        double x = cos_theta_start;
        out[0] = x;
        const double h = grid.dt() / substeps;
        for (int i = 0; i + 1 < grid.size(); ++i) {
            double t = grid.time(i);
            for (int k = 0; k < substeps; ++k) {
                x = num::rk4_step(rhs, t, x, h);
                t += h;
                if (x < kCosFloor) {
                    x = kCosFloor;
                    if (count_clamps) ++clamp_events;
                } else if (x > 1.0) {
                    x = 1.0;
                    if (count_clamps) ++clamp_events;
                }
            }
            out[i + 1] = x;
        }
    };

    // Fixed-step integration with step-halving refinement until the sampled
    // trajectory is stable to 1e-8.
    std::vector<double> coarse, fine;
    int substeps = 1;
    integrate(substeps, coarse, false);
    for (;;) {
        integrate(2 * substeps, fine, false);
        double max_diff = 0.0;
        for (size_t i = 0; i < coarse.size(); ++i)
            max_diff = std::max(max_diff, std::abs(coarse[i] - fine[i]));
        if (max_diff < 1e-8) break;
        substeps *= 2;
        coarse = fine;
        if (substeps > 64)
            throw ConvergenceError(
                "solve_impedance_matching: step halving did not stabilize below 1e-8");
    }
    integrate(2 * substeps, fine, true);

    s.cos_theta_ = std::move(fine);
    s.clamp_events_ = clamp_events;
    s.fill_omega_from_cos_theta();
    s.attach_margins(params);
    return s;
}

AdiabaticityReport check_adiabaticity(const SystemParams& params,
                                      const ControlSchedule& schedule, double margin) {
    if (!(margin > 1.0))
        throw std::invalid_argument("check_adiabaticity: margin must be > 1");
    const double inf = std::numeric_limits<double>::infinity();
    const double gn2 = params.collective_coupling() * params.collective_coupling();

    double min_omega0_sq = inf;
    for (double w : schedule.omega())
        min_omega0_sq = std::min(min_omega0_sq, gn2 + w * w);

    const double gamma = params.gamma();
    const double gamma_a = params.gamma_a();
    const double T = params.t_pulse();

    AdiabaticityReport report;
    report.margin = margin;
    report.cavity_ratio = gamma_a * gamma > 0.0 ? min_omega0_sq / (gamma * gamma_a) : inf;
    report.pulse_ratio = gamma_a > 0.0 ? min_omega0_sq * T / gamma_a : inf;
    report.mixed_ratio =
        gamma_a > 0.0 && gamma > 0.0 ? min_omega0_sq / (std::sqrt(gamma / T) * gamma_a) : inf;
    report.collective_ratio = gamma_a * gamma > 0.0 ? gn2 / (gamma * gamma_a) : inf;
    report.pass = report.cavity_ratio >= margin && report.pulse_ratio >= margin &&
                  report.mixed_ratio >= margin && report.collective_ratio >= margin;
    return report;
}

}  // namespace qmem
