#include <doctest.h>

#include <cmath>

#include "qmem/classical.hpp"
#include "qmem/control.hpp"
#include "qmem/numerics.hpp"

using namespace qmem;

namespace {

SystemParams matched_params(double gamma_T, double gn_T = 40.0) {
    const int n_atoms = 100;
    return SystemParams(gn_T / std::sqrt(n_atoms), n_atoms, gamma_T, 0.0, 0.0, 1.0);
}

}  // namespace

TEST_CASE("mirror scattering matrix is unitary by construction") {
    const auto cav = MirrorCavity::make(0.99, 1.0, 0.01, 0.01);
    CHECK(cav.reflectivity * cav.reflectivity + std::norm(cav.transmission) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cav.transmission.real() == 0.0);
    CHECK(cav.transmission.imag() > 0.0);

    CHECK_THROWS_AS(MirrorCavity::make(1.0, 1.0, 0.01, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(MirrorCavity::make(0.9, 0.0, 0.01, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(MirrorCavity::make(0.9, 1.0, 0.01, 0.02), std::invalid_argument);
}

TEST_CASE("constant drive reaches the geometric steady state") {
    const auto cav = MirrorCavity::make(0.98, 1.0, 0.01, 0.01);
    const TimeGrid grid(0.0, 20.0, 2001);  // dt = tau_c exactly
    const std::vector<cplx> e_in(grid.size(), cplx(1.0, 0.0));
    const auto res = roundtrip_simulate(cav, grid, e_in);
    CHECK_FALSE(res.resampled);
    CHECK(res.samples_per_roundtrip == 1);

    const cplx steady = cav.transmission / (1.0 - cav.reflectivity * cav.zeta);
    CHECK(std::abs(res.e_c.back() - steady) < 1e-6 * std::abs(steady));
}

TEST_CASE("undriven circulating field decays geometrically") {
    const auto cav = MirrorCavity::make(0.9, 0.95, 0.01, 0.01);
    const TimeGrid grid(0.0, 0.2, 21);  // dt = tau_c
    const std::vector<cplx> e_in(grid.size(), cplx(0.0, 0.0));
    const auto res = roundtrip_simulate(cav, grid, e_in, cplx(1.0, 0.0));
    // the preload is the field one round trip back, so sample k has made
    // k + 1 trips
    const double per_trip = cav.reflectivity * cav.zeta;
    for (int k = 1; k < grid.size(); ++k)
        CHECK(std::abs(res.e_c[k]) ==
              doctest::Approx(std::pow(per_trip, k + 1)).epsilon(1e-12));
}

TEST_CASE("impedance-matched cavity cancels the output") {
    // zeta = R makes the direct reflection and the leaking field interfere
    // destructively exactly
    const auto cav = MirrorCavity::make(0.99, 0.99, 0.01, 0.01);
    const TimeGrid grid(0.0, 50.0, 5001);
    const std::vector<cplx> e_in(grid.size(), cplx(1.0, 0.0));
    const auto res = roundtrip_simulate(cav, grid, e_in);
    CHECK(std::abs(res.e_out.back()) < 1e-3);
    CHECK(std::abs(res.e_out.back()) < 1e-9);  // essentially exact
}

TEST_CASE("lossless recursion conserves energy") {
    const auto cav = MirrorCavity::make(0.95, 1.0, 0.05, 0.05);
    const TimeGrid grid(-5.0, 15.0, 4001);  // dt = 0.005, tau_c = 10 samples
    std::vector<cplx> e_in(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.time(i);
        e_in[i] = std::exp(-t * t) * std::polar(1.0, 0.3 * t);
    }
    const auto res = roundtrip_simulate(cav, grid, e_in);

    double in_acc = 0.0, out_acc = 0.0, max_err = 0.0;
    const double dt = res.grid.dt();
    for (int i = 0; i < res.grid.size(); ++i) {
        in_acc += std::norm(res.e_in[i]) * dt;
        out_acc += std::norm(res.e_out[i]) * dt;
        const double err = std::abs(in_acc - out_acc - res.stored[i]);
        max_err = std::max(max_err, err);
    }
    CHECK(max_err < 1e-10);
}

TEST_CASE("delay recursion agrees with the first-order expansion for short round trips") {
    const auto cav = MirrorCavity::make(0.995, 1.0, 0.005, 0.005);  // tau_c = T/200
    const TimeGrid grid(-5.0, 10.0, 3001);
    std::vector<cplx> e_in(grid.size());
    for (int i = 0; i < grid.size(); ++i) e_in[i] = std::exp(-std::pow(grid.time(i), 2));
    const auto res = roundtrip_simulate(cav, grid, e_in);

    double scale = 0.0, max_dev = 0.0;
    for (int i = 0; i < res.grid.size(); ++i) scale = std::max(scale, std::abs(res.e_c[i]));
    for (int i = 0; i < res.grid.size(); ++i)
        max_dev = std::max(max_dev, std::abs(res.e_c[i] - res.e_c_ode[i]));
    CHECK(max_dev / scale < 0.01);
}

TEST_CASE("non-commensurate round trip triggers resampling") {
    const auto cav = MirrorCavity::make(0.95, 1.0, 0.0123, 0.0123);
    const TimeGrid grid(0.0, 5.0, 1001);
    std::vector<cplx> e_in(grid.size(), cplx(1.0, 0.0));
    const auto res = roundtrip_simulate(cav, grid, e_in);
    CHECK(res.resampled);
    CHECK(res.samples_per_roundtrip >= 1);
    CHECK(std::abs(res.grid.dt() * res.samples_per_roundtrip - cav.tau_c) < 1e-12);
}

TEST_CASE("generalized matching residual") {
    SUBCASE("constant field with gamma_int = gamma tau_0/tau_c matches exactly") {
        // zeta = R gives gamma_int tau_c = gamma tau_0
        const auto cav = MirrorCavity::make(0.99, 0.99, 0.02, 0.01);
        const TimeGrid grid(0.0, 5.0, 501);
        const std::vector<double> e_in(grid.size(), 2.5);
        const auto residual = generalized_matching_residual(cav, grid, e_in);
        for (double r : residual) CHECK(std::abs(r) < 1e-12);
    }
    SUBCASE("zero crossing is rejected with the crossing time") {
        const auto cav = MirrorCavity::make(0.99, 0.99, 0.02, 0.01);
        const TimeGrid grid(0.0, 5.0, 501);
        std::vector<double> e_in(grid.size(), 1.0);
        e_in[250] = 0.0;
        CHECK_THROWS_AS(generalized_matching_residual(cav, grid, e_in),
                        std::invalid_argument);
    }
}

TEST_CASE("matched schedules satisfy the cavity-EIT matching condition") {
    const auto p = matched_params(4.0);
    const TimeGrid grid(-10, 10, 8192);
    const auto pulse = PulseEnvelope::make_sech(grid, 1.0, 0.0);

    SUBCASE("analytic sech law") {
        const auto schedule = sech_matched_cos_theta(p, grid);
        const auto res = matching_residual_from_schedule(p, pulse, schedule, -5.0, 5.0);
        REQUIRE(!res.residual.empty());
        double max_abs = 0.0;
        for (double r : res.residual) max_abs = std::max(max_abs, std::abs(r));
        CHECK(max_abs < 1e-6);
    }
    SUBCASE("numerically solved gaussian schedule, after the clamp releases") {
        const auto gauss = PulseEnvelope::make_gaussian(grid, 1.0, 0.0);
        const auto solved = solve_impedance_matching(p, gauss, default_matching_start(p));
        int i_clamp = -1;
        for (int i = 0; i < grid.size(); ++i)
            if (solved.cos_theta()[i] >= 1.0 - 1e-12) i_clamp = i;
        REQUIRE(i_clamp >= 0);
        const double t_lo = grid.time(i_clamp) + 0.5;
        const auto res = matching_residual_from_schedule(p, gauss, solved, t_lo, 5.0);
        REQUIRE(!res.residual.empty());
        double max_abs = 0.0;
        for (double r : res.residual) max_abs = std::max(max_abs, std::abs(r));
        CHECK(max_abs < 1e-6);
    }
    SUBCASE("a detuned schedule leaves a sign-definite residual") {
        const auto schedule = sech_matched_cos_theta(p, grid);
        std::vector<double> scaled(schedule.cos_theta());
        for (auto& c : scaled) c = std::min(1.0, 1.01 * c);
        auto eval = [&p, grid](double t) {
            return std::min(1.0, 1.01 * sech_matched_cos_theta(p, grid).cos_theta_at(t));
        };
        const auto detuned = ControlSchedule::from_cos_theta(p, grid, scaled, eval);
        const auto res = matching_residual_from_schedule(p, pulse, detuned, -3.0, 3.0);
        REQUIRE(!res.residual.empty());
        for (double r : res.residual) CHECK(r < 0.0);
    }
}

TEST_CASE("group-velocity ratio") {
    const auto p = matched_params(4.0);
    CHECK(group_velocity_ratio(mixing_angle_from_omega(p, 0.0)) == 0.0);
    CHECK(group_velocity_ratio(mixing_angle_from_omega(p, 1e9)) ==
          doctest::Approx(1.0).epsilon(1e-10));
    const SystemParams unit(1.0, 1, 4.0, 0.0, 0.0, 1.0);
    CHECK(group_velocity_ratio(mixing_angle_from_omega(unit, 1.0)) ==
          doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("photon-probability loss rate") {
    const auto p = matched_params(4.0);
    const TimeGrid grid(-5, 5, 2049);  // odd count puts a grid point at t = 0

    SUBCASE("constant coupling loses nothing internally") {
        const auto s = ControlSchedule::constant(p, grid, 0.7);
        const auto rate = photon_probability_loss_rate(s);
        for (double r : rate.residual) CHECK(std::abs(r) < 1e-10);
    }
    SUBCASE("exponential rotation gives gamma_int = 2/tau") {
        const double tau = 1.7;
        std::vector<double> samples(grid.size());
        for (int i = 0; i < grid.size(); ++i)
            samples[i] = 0.5 * std::exp(-(grid.time(i) - grid.t_start()) / tau);
        auto eval = [tau, t0 = grid.t_start()](double t) {
            return 0.5 * std::exp(-(t - t0) / tau);
        };
        const auto s = ControlSchedule::from_cos_theta(p, grid, samples, eval);
        const auto rate = photon_probability_loss_rate(s);
        REQUIRE(!rate.residual.empty());
        for (size_t i = 0; i < rate.residual.size(); i += 101)
            CHECK(rate.residual[i] == doctest::Approx(2.0 / tau).epsilon(1e-6));
    }
    SUBCASE("matched sech law at the packet center") {
        // closed form: gamma_int(0) = 2 (1 + tanh 0)/T = 2/T
        const auto s = sech_matched_cos_theta(p, grid);
        const auto rate = photon_probability_loss_rate(s);
        const auto& ts = rate.times;
        size_t at = 0;
        for (size_t i = 0; i < ts.size(); ++i)
            if (std::abs(ts[i]) < std::abs(ts[at])) at = i;
        CHECK(rate.residual[at] == doctest::Approx(2.0).epsilon(1e-6));
    }
}
