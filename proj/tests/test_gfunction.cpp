#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gsav/g_function.hpp"

using namespace gsav;

namespace {

std::vector<GFunction> all_variants() {
    return {GFunction::sqrt_shift(4.0), GFunction::power(3.0), GFunction::power(1.0 / 3.0),
            GFunction::tanh_scaled(1e4), GFunction::exp_scaled(1e4)};
}

/// 200 log-spaced magnitudes covering [1e-3, 1e3], both signs where the
/// domain allows.
std::vector<double> domain_samples(const GFunction& g) {
    std::vector<double> xs;
    for (int i = 0; i < 100; ++i) {
        const double mag = std::pow(10.0, -3.0 + 6.0 * i / 99.0);
        if (g.kind() == GFunction::Kind::SqrtShift) {
            xs.push_back(-g.constant() + mag);
            xs.push_back(-g.constant() + mag * 10.0);
        } else {
            xs.push_back(mag);
            xs.push_back(-mag);
        }
    }
    return xs;
}

}  // namespace

TEST_CASE("pinned forward values") {
    CHECK(GFunction::tanh_scaled(1e4).forward(0.0) == 0.0);
    CHECK(GFunction::power(1.0 / 3.0).forward(8.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(GFunction::sqrt_shift(4.0).forward(0.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("pinned inverse values") {
    CHECK(GFunction::exp_scaled(1.0).inverse(1.0) == 0.0);
    CHECK(GFunction::power(3.0).inverse(-8.0) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(GFunction::sqrt_shift(4.0).inverse(3.0) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("pinned inverse derivatives") {
    CHECK(GFunction::sqrt_shift(4.0).inverse_derivative(3.0) == doctest::Approx(6.0));
    CHECK(GFunction::exp_scaled(2.0).inverse_derivative(1.0) == doctest::Approx(2.0));
    CHECK(GFunction::tanh_scaled(1.0).inverse_derivative(0.0) == doctest::Approx(1.0));
}

TEST_CASE("domain and range guards") {
    CHECK_THROWS_AS(GFunction::sqrt_shift(4.0).forward(-4.0), DomainError);
    CHECK_THROWS_AS(GFunction::sqrt_shift(4.0).inverse(-0.1), RangeError);
    CHECK_THROWS_AS(GFunction::tanh_scaled(10.0).inverse(1.0 - 1e-13), RangeError);
    CHECK_THROWS_AS(GFunction::tanh_scaled(10.0).inverse_derivative(-1.0), RangeError);
    CHECK_THROWS_AS(GFunction::exp_scaled(10.0).inverse(0.0), RangeError);
    CHECK_THROWS_AS(GFunction::power(3.0).inverse_derivative(0.0), SingularDerivative);
    CHECK(GFunction::power(1.0 / 3.0).inverse_derivative(0.0) == 0.0);
}

TEST_CASE("round trip on log-spaced domain points") {
    for (const auto& g : all_variants()) {
        CAPTURE(g.to_string());
        for (double x : domain_samples(g)) {
            const double back = g.inverse(g.forward(x));
            CHECK(std::abs(back - x) <= 1e-9 * (1.0 + std::abs(x)));
        }
    }
}

TEST_CASE("forward is strictly increasing") {
    for (const auto& g : all_variants()) {
        CAPTURE(g.to_string());
        auto xs = domain_samples(g);
        std::sort(xs.begin(), xs.end());
        for (size_t i = 1; i < xs.size(); ++i)
            CHECK(g.forward(xs[i]) > g.forward(xs[i - 1]));
    }
}

TEST_CASE("inverse derivative matches centered differences") {
    for (const auto& g : all_variants()) {
        CAPTURE(g.to_string());
        for (double x : domain_samples(g)) {
            const double r = g.forward(x);
            if (g.kind() == GFunction::Kind::Power && std::abs(r) < 1e-3) continue;
            const double h = 1e-6 * (1.0 + std::abs(r));
            double lo = r - h, hi = r + h;
            if (g.kind() == GFunction::Kind::SqrtShift && lo < 0) continue;
            if (g.kind() == GFunction::Kind::ExpScaled && lo <= 0) continue;
            if (g.kind() == GFunction::Kind::TanhScaled && std::abs(hi) >= 1 - 1e-9) continue;
            const double fd = (g.inverse(hi) - g.inverse(lo)) / (hi - lo);
            const double an = g.inverse_derivative(r);
            CHECK(std::abs(fd - an) <= 2e-6 * (1.0 + std::abs(an)));
        }
    }
}

TEST_CASE("modified-energy scalar tracks r^2 for the sqrt variant") {
    const GFunction gs = GFunction::sqrt_shift(4.0);
    CHECK(gs.modified_scalar(3.0) == doctest::Approx(9.0));
    const GFunction gt = GFunction::tanh_scaled(2.0);
    CHECK(gt.modified_scalar(0.5) == doctest::Approx(gt.inverse(0.5)));
}

TEST_CASE("config-string parsing") {
    CHECK(GFunction::parse("sqrt:10").kind() == GFunction::Kind::SqrtShift);
    CHECK(GFunction::parse("sqrt:10").constant() == 10.0);
    CHECK(GFunction::parse("pow:3").constant() == 3.0);
    CHECK(GFunction::parse("pow:1/3").constant() == doctest::Approx(1.0 / 3.0));
    CHECK(GFunction::parse("tanh:1e4").constant() == 1e4);
    CHECK(GFunction::parse("exp:1e4").kind() == GFunction::Kind::ExpScaled);
    CHECK(GFunction::parse("tanh:1e4").to_string() == "tanh:10000");
    CHECK_THROWS_AS(GFunction::parse("tanh"), ConfigError);
    CHECK_THROWS_AS(GFunction::parse("pow:5"), ConfigError);
    CHECK_THROWS_AS(GFunction::parse("spline:2"), ConfigError);
    CHECK_THROWS_AS(GFunction::parse("tanh:-1"), ConfigError);
}
