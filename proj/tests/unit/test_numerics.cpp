#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qmem/numerics.hpp"

using namespace qmem;

TEST_CASE("cumulative integral is 4th order on smooth data") {
    const int n = 2001;
    const double h = std::numbers::pi / (n - 1);
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = std::sin(i * h);
    const auto cum = num::cumulative_integral<double>(f, h);
    double max_err = 0.0;
    for (int i = 0; i < n; ++i)
        max_err = std::max(max_err, std::abs(cum[i] - (1.0 - std::cos(i * h))));
    CHECK(max_err < 1e-11);
}

TEST_CASE("cumulative integral is exact for cubics") {
    const int n = 11;
    const double h = 0.37;
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) {
        const double x = i * h;
        f[i] = 2.0 * x * x * x - x * x + 5.0 * x - 3.0;
    }
    const auto cum = num::cumulative_integral<double>(f, h);
    auto exact = [](double x) {
        return 0.5 * x * x * x * x - x * x * x / 3.0 + 2.5 * x * x - 3.0 * x;
    };
    for (int i = 0; i < n; ++i) CHECK(cum[i] == doctest::Approx(exact(i * h)).epsilon(1e-13));
}

TEST_CASE("complex cumulative integral handles phase factors") {
    const int n = 4001;
    const double h = 1.0 / (n - 1);
    std::vector<num::cplx> f(n);
    const num::cplx i_unit(0.0, 1.0);
    for (int i = 0; i < n; ++i) f[i] = std::exp(i_unit * (5.0 * i * h));
    const num::cplx total = num::integral<num::cplx>(f, h);
    const num::cplx exact = (std::exp(i_unit * 5.0) - 1.0) / (i_unit * 5.0);
    CHECK(std::abs(total - exact) < 1e-12);
}

TEST_CASE("cubic interpolation reproduces cubics exactly") {
    const int n = 9;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i);
        y[i] = x * x * x - 4.0 * x + 1.0;
    }
    for (double u : {0.25, 1.5, 3.9, 6.3, 7.75}) {
        const double exact = u * u * u - 4.0 * u + 1.0;
        CHECK(num::interp_cubic<double>(y, u) == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("line fit and power-law exponent") {
    std::vector<double> x, y;
    for (int i = 1; i <= 20; ++i) {
        x.push_back(0.1 * i);
        y.push_back(3.0 * std::pow(0.1 * i, 2.5));
    }
    CHECK(num::power_law_exponent(x, y) == doctest::Approx(2.5).epsilon(1e-10));

    std::vector<double> ly(x.size());
    for (size_t i = 0; i < x.size(); ++i) ly[i] = 2.0 * x[i] - 0.7;
    const auto fit = num::fit_line(x, ly);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(-0.7).epsilon(1e-10));
}

TEST_CASE("Richardson derivative") {
    auto f = [](double x) { return std::exp(2.0 * x); };
    CHECK(num::derivative(f, 0.3, 1e-3) ==
          doctest::Approx(2.0 * std::exp(0.6)).epsilon(1e-11));
}

TEST_CASE("scalar RK4 integrates a linear complex equation") {
    const num::cplx lambda(-0.4, 2.0);
    auto rhs = [&](double, num::cplx y) { return lambda * y; };
    num::cplx y(1.0, 0.0);
    const int steps = 2000;
    const double h = 1.0 / steps;
    for (int i = 0; i < steps; ++i) y = num::rk4_step(rhs, i * h, y, h);
    CHECK(std::abs(y - std::exp(lambda)) < 1e-11);
}
