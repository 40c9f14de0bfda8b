#include <catch_amalgamated.hpp>

#include <functional>

#include <tempus/widths.hpp>

#include "support.hpp"

using namespace tempus;
using namespace tempus::test;
using Catch::Approx;

namespace {

TemporalAmplitude exponential_decay(double gamma, double e0, double hbar = 1.0, double dt = 0.005,
                                    std::size_t n = 1 << 16) {
    const Axis t = Axis::centered(AxisKind::time, 0.0, dt, n);
    return fourier_pair(t, sampled(t, [&](double v) {
        return std::exp(-std::abs(v) * gamma / (2 * hbar) - cplx(0.0, v * e0 / hbar));
    }), hbar, e0);
}

}  // namespace

TEST_CASE("equivalent width: closed forms", "[widths]") {
    const Axis x = Axis::centered(AxisKind::position, 0.0, 0.01, 4096);
    const double s = 1.4;
    const auto g = sample(x, [&](double v) { return std::exp(-v * v / (2 * s * s)); });
    CHECK(equivalent_width(x, g, 0.0) == Approx(s * std::sqrt(2 * pi)).epsilon(1e-12));

    const double L = 3.0;
    const Axis y = Axis::make(AxisKind::position, -2.0 + 0.0025, 0.005, 2000);
    const auto box = sample(y, [&](double v) { return (v > 0.0 && v < L) ? 1.0 : 0.0; });
    CHECK(equivalent_width(y, box, L / 2) == Approx(L).epsilon(1e-12));

    CHECK_THROWS_AS(equivalent_width(y, box, -1.0), Error);
}

TEST_CASE("equivalent width identity on analytic functions", "[widths]") {
    const Axis t = Axis::centered(AxisKind::time, 0.0, 0.01, 1 << 14);
    const std::vector<std::function<cplx(double)>> corpus = {
        [](double v) { return std::exp(-v * v / 2); },
        [](double v) { return std::exp(-v * v / 8) * std::exp(cplx(0, 0.3 * v)); },
        [](double v) { return std::exp(-(v - 0.5) * (v - 0.5)); },
        [](double v) { return std::exp(-std::abs(v)); },
        [](double v) { return 1.0 / std::cosh(v); },
        [](double v) { return 1.0 / std::cosh(2 * v) * cplx(1.0, 0.2 * v); },
        [](double v) { return std::exp(-v * v) + 0.5 * std::exp(-(v - 2) * (v - 2)); },
        [](double v) { return (1.0 + v * v) * std::exp(-v * v); },
        [](double v) { return std::exp(-std::abs(v) / 3) * std::exp(cplx(0, -0.7 * v)); },
        [](double v) { return std::exp(-v * v / 2) * std::cos(0.5 * v); },
    };
    for (double hbar : {1.0, 0.3}) {
        for (const auto& fn : corpus) {
            const auto r = check_equivalent_width_identity(t, sampled(t, fn), hbar);
            CHECK(r.pass);
            CHECK(r.lhs == Approx(2 * pi * hbar).epsilon(1e-4));
        }
    }
}

TEST_CASE("decay equivalent-width relation", "[widths]") {
    SECTION("exponential decay attains equality") {
        const auto f = exponential_decay(1.0, 2.0, 1.0, 0.01, 1 << 16);
        const auto r = check_decay_equivalent_width(f, 2.0);
        CHECK(r.lhs == Approx(2 * pi).epsilon(1e-3));
        CHECK(r.pass);
    }
    SECTION("corpus of decaying amplitudes") {
        const Axis t = Axis::centered(AxisKind::time, 0.0, 0.01, 1 << 16);
        const std::vector<std::function<cplx(double)>> corpus = {
            [](double v) { return std::exp(-std::abs(v) / 2); },
            [](double v) { return std::exp(-std::abs(v) * 0.3 - cplx(0, 1.5 * v)); },
            [](double v) { return std::exp(-v * v / 2); },
            [](double v) { return std::exp(-v * v / 18 - cplx(0, v)); },
            [](double v) { return 0.5 * std::exp(-std::abs(v) / 2) * (1.0 + std::exp(cplx(0, -2 * v))); },
            [](double v) { return 0.7 * std::exp(-std::abs(v) / 2) + 0.3 * std::exp(-std::abs(v) * 2); },
            [](double v) { return std::exp(-std::abs(v) / 4) * std::exp(-v * v / 50); },
            [](double v) { return 1.0 / std::cosh(v / 2); },
            [](double v) { return std::exp(-v * v / 4) * (0.6 + 0.4 * std::exp(cplx(0, -3 * v))); },
            [](double v) { return 1.0 / (1.0 + v * v / 4) * std::exp(cplx(0, -0.5 * v)); },
        };
        for (const auto& fn : corpus) {
            const auto f = fourier_pair(t, sampled(t, fn), 1.0);
            const auto dens = modulus_squared(detail::as_span(f.f_tilde));
            const auto peak = static_cast<std::size_t>(std::max_element(dens.begin(), dens.end()) - dens.begin());
            const auto r = check_decay_equivalent_width(f, f.energy_axis[peak]);
            CHECK(r.pass);
        }
    }
}

TEST_CASE("overall width", "[widths]") {
    SECTION("uniform density") {
        const Axis x = Axis::make(AxisKind::time, -1.0 + 0.0005, 0.001, 3000);
        const auto u = sample(x, [](double v) { return (v > 0.0 && v < 1.0) ? 1.0 : 0.0; });
        CHECK(overall_width(x, u, 0.9) == Approx(0.9).margin(1e-9));
        CHECK(overall_width(x, u, 1.0) == Approx(1.0).margin(1e-9));
    }
    SECTION("Gaussian one-sigma interval") {
        const double s = 0.8;
        const Axis x = Axis::centered(AxisKind::time, 0.0, 0.01, 2000);
        const auto g = sample(x, [&](double v) { return std::exp(-v * v / (2 * s * s)); });
        CHECK(std::abs(overall_width(x, g, std::erf(1.0 / std::sqrt(2.0))) - 2 * s) <= x.step);
        CHECK(overall_width(x, g, 1.0) == std::numeric_limits<double>::infinity());
    }
    SECTION("monotone in alpha") {
        const Axis x = Axis::centered(AxisKind::time, 0.0, 0.01, 2000);
        const auto g = sample(x, [](double v) { return std::exp(-std::abs(v)) * (1.2 + std::sin(3 * v)); });
        double prev = 0.0;
        for (double a = 0.05; a < 1.0; a += 0.05) {
            const double w = overall_width(x, g, a);
            CHECK(w >= prev);
            prev = w;
        }
    }
    SECTION("parameter errors") {
        const std::vector<double> d{1.0, 1.0, 1.0};
        CHECK_THROWS_AS(overall_width(d, 1.0, 0.0), Error);
        CHECK_THROWS_AS(overall_width(d, 1.0, 1.5), Error);
    }
}

TEST_CASE("translation width", "[widths]") {
    const Axis t = Axis::centered(AxisKind::time, 0.0, 0.001, 1 << 15);
    SECTION("pure phase never decays") {
        const auto f = sampled(t, [](double v) { return std::exp(cplx(0, -2.0 * v)); });
        try {
            translation_width(t, detail::as_span(f), 0.1);
            FAIL("expected not-attained");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::not_attained);
        }
    }
    SECTION("exponential decay") {
        const double gamma = 2.0;
        const auto f = sampled(t, [&](double v) { return std::exp(-std::abs(v) * gamma / 2 - cplx(0, v)); });
        double prev = 0.0;
        for (double rho : {0.1, 0.3, 0.5, 0.9}) {
            const double w = translation_width(t, detail::as_span(f), rho);
            CHECK(w == Approx(-(2.0 / gamma) * std::log(1 - rho)).epsilon(1e-5));
            CHECK(w >= prev);
            prev = w;
        }
    }
    SECTION("two-level survival amplitude") {
        const double dh = 1.3;
        const auto f = sampled(t, [&](double v) { return std::cos(dh * v) * std::exp(cplx(0, -0.4 * v)); });
        for (double rho : {0.2, 0.6, 0.95}) {
            const double w = translation_width(t, detail::as_span(f), rho);
            CHECK(w == Approx(std::acos(1 - rho) / dh).margin(1e-6));
        }
    }
    SECTION("global phase invariance") {
        const auto f = sampled(t, [](double v) { return std::exp(-v * v); });
        const VectorXcd g = f * std::exp(cplx(0, 0.9));
        CHECK(translation_width(t, detail::as_span(f), 0.4) == translation_width(t, detail::as_span(g), 0.4));
    }
}

TEST_CASE("Hilgevoord-Uffink translation-width relation", "[widths]") {
    SECTION("boundary of the validity domain is trivial") {
        const auto f = exponential_decay(1.0, 0.0, 1.0, 0.005, 1 << 15);
        const auto r = check_hu_relation(f, 0.8, 0.4);
        // arccos near 1 turns rounding in the argument into ~sqrt(eps)
        CHECK(r.rhs == Approx(0.0).margin(1e-7));
        CHECK(r.pass);
    }
    SECTION("validity domain is enforced") {
        const auto f = exponential_decay(1.0, 0.0, 1.0, 0.005, 1 << 15);
        CHECK_THROWS_AS(check_hu_relation(f, 0.8, 0.3), Error);
        CHECK_THROWS_AS(check_hu_relation(f, 0.5, 1.0), Error);
    }
    SECTION("exponential decay, half-time convention") {
        for (double gamma : {0.5, 1.0, 4.0}) {
            const auto f = exponential_decay(gamma, 1.0, 1.0, 0.005 / gamma, 1 << 17);
            const auto r = check_hu_lifetime(f);
            CHECK(r.pass);
            CHECK(r.lhs >= 0.9);
            CHECK(r.rhs == Approx(0.9).margin(0.05));
            // T_1/2 = ln 2 / Gamma, W(Lorentzian, 0.9) = Gamma tan(0.45 pi)
            CHECK(r.lhs == Approx(std::log(2.0) * std::tan(0.45 * pi)).epsilon(2e-3));
        }
    }
    SECTION("Gaussian autocorrelation amplitude passes with positive slack") {
        const Axis t = Axis::centered(AxisKind::time, 0.0, 0.005, 1 << 15);
        const auto f = fourier_pair(t, sampled(t, [](double v) { return std::exp(-v * v / 2 - cplx(0, 3 * v)); }), 1.0, 3.0);
        for (double alpha : {0.7, 0.9, 0.99}) {
            const auto r = check_hu_relation(f, alpha, 1.0 - 0.5 * (1.0 - alpha));
            CHECK(r.pass);
            CHECK(r.slack > 0.0);
        }
    }
}

TEST_CASE("overall-width relation against the calibrated constant", "[widths]") {
    const Axis t = Axis::centered(AxisKind::time, 0.0, 0.02, 1 << 15);
    const auto chi = sampled(t, [](double v) { return std::exp(-v * v / 2); });
    const auto r = check_overall_width_relation(t, chi, 0.9);
    CHECK(r.pass);
    CHECK(std::isfinite(r.lhs));

    SECTION("time shift leaves the product unchanged") {
        const auto shifted = sampled(t, [](double v) { return std::exp(-(v - 3.0) * (v - 3.0) / 2); });
        CHECK(check_overall_width_relation(t, shifted, 0.9).lhs == Approx(r.lhs).epsilon(1e-6));
    }
    SECTION("time scaling leaves the product unchanged") {
        const auto wide = sampled(t, [](double v) { return std::exp(-v * v / 8); });
        CHECK(check_overall_width_relation(t, wide, 0.9).lhs == Approx(r.lhs).epsilon(5e-3));
    }
    SECTION("alpha at or below one half is rejected") {
        CHECK_THROWS_AS(check_overall_width_relation(t, chi, 0.5), Error);
    }
    SECTION("table is a lower envelope of the calibration family") {
        const auto p = calibrate_overall_width_constant(0.8);
        CHECK(overall_width_constant(0.8) <= p.value + 1e-9);
        CHECK(overall_width_constant(0.83) == overall_width_constant(0.8));
    }
}
