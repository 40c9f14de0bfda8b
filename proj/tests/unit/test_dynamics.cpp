#include <catch_amalgamated.hpp>

#include <tempus/dynamics.hpp>

#include "support.hpp"

using namespace tempus;
using namespace tempus::test;
using Catch::Approx;

namespace {

struct TwoLevel {
    double dh;
    double hbar;
    HermitianOperator h() const { return HermitianOperator::diagonal(two_level(), VectorXd{{dh, -dh}}); }
    GridState psi() const {
        return GridState(two_level(), VectorXcd{{cplx(1.0 / std::sqrt(2.0)), cplx(0.0, -1.0 / std::sqrt(2.0))}}, hbar);
    }
    HermitianOperator sigma_x() const {
        return HermitianOperator::dense(two_level(), MatrixXcd{{0.0, 1.0}, {1.0, 0.0}});
    }
    HermitianOperator projector() const {
        const VectorXcd v = psi().amplitudes();
        return HermitianOperator::dense(two_level(), v * v.adjoint());
    }
};

}  // namespace

TEST_CASE("characteristic time", "[dynamics]") {
    SECTION("energy eigenstate is stationary") {
        const TwoLevel q{0.7, 1.0};
        try {
            characteristic_time(q.sigma_x(), ket({1.0, 0.0}), q.h());
            FAIL("expected stationary error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::stationary);
        }
    }
    SECTION("two-level state saturates the bound") {
        for (double hbar : {1.0, 0.5}) {
            const TwoLevel q{0.8, hbar};
            const auto c = characteristic_time(q.sigma_x(), q.psi(), q.h());
            CHECK(c.rate_commutator == Approx(2 * q.dh / hbar).epsilon(1e-12));
            CHECK(c.tau == Approx(hbar / (2 * q.dh)).epsilon(1e-12));
            const auto r = mandelstam_tamm_check(q.sigma_x(), q.psi(), q.h());
            CHECK(r.pass);
            CHECK(std::abs(r.slack) < 1e-8);
        }
    }
    SECTION("free Gaussian packet: position moves at the group velocity") {
        const double p0 = 5.0, m = 2.0;
        const Axis x = Axis::centered(AxisKind::position, 0.0, 0.05, 2048);
        const GridState psi = GridState::from_function(x, [&](double v) {
            return std::exp(-v * v / 2) * std::exp(cplx(0, p0 * v));
        }).normalized();
        const auto kin = HermitianOperator::multiplication(conjugate_axis(x), [&](double k) { return k * k / (2 * m); });
        const auto q = HermitianOperator::multiplication(x, [](double v) { return v; });
        const auto c = characteristic_time(q, psi, kin);
        CHECK(c.tau == Approx(std::sqrt(0.5) / (p0 / m)).epsilon(1e-6));
        const auto r = mandelstam_tamm_check(q, psi, kin);
        CHECK(r.pass);
        CHECK(r.slack > 0.0);
    }
    SECTION("random six-level systems") {
        std::mt19937_64 rng(20240601);
        for (int draw = 0; draw < 100; ++draw) {
            const auto h = HermitianOperator::dense(Axis::fock(6), random_hermitian(rng, 6));
            const auto a = HermitianOperator::dense(Axis::fock(6), random_hermitian(rng, 6));
            const GridState psi = random_state(rng, 6);
            const auto c = characteristic_time(a, psi, h);
            CHECK(std::abs(c.rate_difference - c.rate_commutator) <= 1e-5 * std::abs(c.rate_commutator));
            CHECK(mandelstam_tamm_check(a, psi, h).pass);
        }
    }
}

TEST_CASE("survival curves and the cosine bound", "[dynamics]") {
    SECTION("eigenstate never leaves") {
        const TwoLevel q{1.0, 1.0};
        const auto e1 = ket({1.0, 0.0});
        const auto P = HermitianOperator::dense(two_level(), MatrixXcd{{1.0, 0.0}, {0.0, 0.0}});
        const auto c = survival_curve(e1, P, q.h(), Axis::make(AxisKind::time, 0.0, 0.1, 50));
        for (double v : c.p) CHECK(v == Approx(1.0).margin(1e-14));
    }
    SECTION("two-level superposition attains equality") {
        const TwoLevel q{0.9, 1.0};
        const Axis t = Axis::make(AxisKind::time, 0.0, 0.01, 300);
        const auto c = survival_curve(q.psi(), q.projector(), q.h(), t);
        REQUIRE(c.delta_h);
        CHECK(*c.delta_h == Approx(q.dh).epsilon(1e-12));
        for (std::size_t i = 0; i < t.count; ++i) {
            const double cs = std::cos(q.dh * t[i]);
            CHECK(c.p[i] == Approx(cs * cs).margin(1e-12));
        }
        CHECK(c.cosine_bound.pass);
        CHECK(std::abs(c.cosine_bound.slack) < 1e-12);
    }
    SECTION("truncated oscillator coherent-like state") {
        const std::size_t n = 30;
        const Axis fock = Axis::fock(n);
        VectorXcd v(static_cast<Eigen::Index>(n));
        double c = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) c *= 2.0 / std::sqrt(static_cast<double>(k));
            v[static_cast<Eigen::Index>(k)] = c;
        }
        const GridState psi = GridState(fock, v).normalized();
        const auto h = HermitianOperator::multiplication(fock, [](double k) { return k + 0.5; });
        const VectorXcd a = psi.amplitudes();
        const auto P = HermitianOperator::dense(fock, a * a.adjoint());
        const auto curve = survival_curve(psi, P, h, Axis::make(AxisKind::time, 0.0, 0.005, 400));
        CHECK(curve.cosine_bound.pass);
        const double w = 0.5 * pi / *curve.delta_h;
        for (std::size_t i = 1; i < curve.time_axis.count && curve.time_axis[i] < w; ++i) {
            const double cs = std::cos(curve.time_axis[i] * *curve.delta_h);
            CHECK(curve.p[i] > cs * cs);
        }
    }
    SECTION("preconditions") {
        const TwoLevel q{1.0, 1.0};
        const auto notproj = HermitianOperator::dense(two_level(), MatrixXcd{{0.5, 0.0}, {0.0, 0.0}});
        CHECK_THROWS_AS(survival_curve(q.psi(), notproj, q.h(), Axis::fock(3)), Error);
        const auto P = HermitianOperator::dense(two_level(), MatrixXcd{{1.0, 0.0}, {0.0, 0.0}});
        try {
            survival_curve(q.psi(), P, q.h(), Axis::make(AxisKind::time, 0.0, 0.1, 4));
            FAIL("expected precondition error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::precondition);
        }
    }
}

TEST_CASE("property lifetime", "[dynamics]") {
    SECTION("two-level equality chain") {
        const TwoLevel q{0.6, 1.0};
        const auto c = survival_curve(q.psi(), q.projector(), q.h(), Axis::make(AxisKind::time, 0.0, 1e-4, 30001));
        const auto l = property_lifetime(c);
        CHECK(std::abs(l.value - pi / (4 * q.dh)) < 1e-8);
        CHECK(l.report.pass);
        CHECK(std::abs(l.report.slack) < 1e-8);
    }
    SECTION("exponential decay") {
        const double gamma = 0.7;
        const Axis t = Axis::make(AxisKind::time, 0.0, 1e-3, 5000);
        std::vector<double> p(t.count);
        for (std::size_t i = 0; i < t.count; ++i) p[i] = std::exp(-gamma * t[i]);
        const auto l = property_lifetime(SurvivalCurve::from_values(t, p, 1.0));
        CHECK(l.value == Approx(std::log(2.0) / gamma).epsilon(1e-6));
        CHECK_FALSE(l.report.asserted);
    }
    SECTION("no crossing") {
        const Axis t = Axis::make(AxisKind::time, 0.0, 0.1, 10);
        try {
            property_lifetime(SurvivalCurve::from_values(t, std::vector<double>(10, 1.0), 1.0));
            FAIL("expected not-attained");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::not_attained);
        }
    }
}

TEST_CASE("Grabowski lifetime", "[dynamics]") {
    SECTION("exponential decay integrates to hbar / Gamma") {
        for (double hbar : {1.0, 0.3}) {
            const double gamma = 1.0;
            const Axis t = Axis::make(AxisKind::time, 0.0, 1e-3 * hbar, 20001);
            std::vector<double> p(t.count);
            for (std::size_t i = 0; i < t.count; ++i) p[i] = std::exp(-gamma * t[i] / hbar);
            const auto l = grabowski_lifetime(SurvivalCurve::from_values(t, p, hbar));
            CHECK(l.value == Approx(hbar / gamma).epsilon(1e-6));
            CHECK(l.tail_corrected);
        }
    }
    SECTION("constant survival diverges") {
        const Axis t = Axis::make(AxisKind::time, 0.0, 0.1, 100);
        try {
            grabowski_lifetime(SurvivalCurve::from_values(t, std::vector<double>(100, 1.0), 1.0));
            FAIL("expected divergent");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::divergent);
        }
    }
    SECTION("oscillating survival diverges") {
        const TwoLevel q{1.0, 1.0};
        const auto c = survival_curve(q.psi(), q.projector(), q.h(), Axis::make(AxisKind::time, 0.0, 0.01, 2000));
        CHECK_THROWS_AS(grabowski_lifetime(c), Error);
    }
    SECTION("Gaussian energy spectrum") {
        const double s = 1.5;
        const Axis e = Axis::centered(AxisKind::energy, 0.0, 0.04 * s, 401);
        const GridState psi = GridState::from_function(e, [&](double v) { return std::exp(-v * v / (4 * s * s)); }).normalized();
        const auto h = HermitianOperator::multiplication(e, [](double v) { return v; });
        const VectorXcd a = psi.amplitudes();
        const auto P = HermitianOperator::dense(e, a * a.adjoint() * e.step);
        const auto c = survival_curve(psi, P, h, Axis::make(AxisKind::time, 0.0, 0.01 / s, 1001));
        const auto l = grabowski_lifetime(c);
        CHECK(l.value == Approx(std::sqrt(pi) / (2 * s)).epsilon(1e-6));
        CHECK(l.report.pass);
        CHECK(l.report.lhs == Approx(std::sqrt(pi) / 2).epsilon(1e-5));
    }
}

TEST_CASE("Wigner temporal moments", "[dynamics]") {
    SECTION("exponential decay") {
        const DecayModel m{1.0, 50.0, 1.0};
        const auto ref = decay_reference(m, 1e-3, std::size_t{1} << 17);
        const auto w = wigner_moments(ref.amplitude);
        // Lorentzian^2 moments on the integration range [0, E_top], offsets x = E - E0
        const double a = m.gamma / 2;
        auto f0 = [&](double x) { return x / (2 * a * a * (x * x + a * a)) + std::atan(x / a) / (2 * a * a * a); };
        auto f1 = [&](double x) { return -1.0 / (2 * (x * x + a * a)); };
        auto f2 = [&](double x) { return -x / (2 * (x * x + a * a)) + std::atan(x / a) / (2 * a); };
        const double lo = -m.e0, hi = ref.amplitude.energy_axis.back() - m.e0;
        const double m0 = f0(hi) - f0(lo), mean = (f1(hi) - f1(lo)) / m0;
        const double de = std::sqrt((f2(hi) - f2(lo)) / m0 - mean * mean);
        CHECK(de == Approx(m.gamma / 2).epsilon(1e-2));
        CHECK_FALSE(w.infinite_variance);
        // sampled kink at t = 0: the periodic spectrum has slightly heavier tails than the Lorentzian
        CHECK(w.delta_e == Approx(de).epsilon(5e-4));
        CHECK(w.delta_t == Approx(m.hbar / m.gamma).epsilon(1e-4));
        CHECK(w.delta_t_full_line == Approx(std::sqrt(2.0) * m.hbar / m.gamma).epsilon(1e-4));
        // |g| = (1 + x) e^{-x}, x = Gamma t / (2 hbar): std of x under (1+x)^2 e^{-2x} on x > 0 is sqrt(0.59)
        CHECK(w.delta_t_autocorrelation == Approx(2 * std::sqrt(0.59) * m.hbar / m.gamma).epsilon(1e-3));
        // the half-line exponential sits on the minimum; the grid cut is covered by the tail estimate
        CHECK(w.report.pass);
        CHECK(w.report.lhs == Approx(0.5 * de / (m.gamma / 2)).epsilon(5e-4));
        CHECK(w.report.tolerance > std::abs(w.report.slack));
    }
    SECTION("Gaussian pair is a minimum") {
        const Axis t = Axis::centered(AxisKind::time, 0.0, 0.01, 1 << 14);
        const double t0 = 10.0, e0 = 10.0;
        const auto f = fourier_pair(t, sampled(t, [&](double v) {
            return std::exp(-(v - t0) * (v - t0) / 4.0 - cplx(0, e0 * v));
        }), 1.0, e0);
        const auto w = wigner_moments(f);
        CHECK(w.delta_t == Approx(1.0).epsilon(1e-8));
        CHECK(w.delta_e == Approx(0.5).epsilon(1e-8));
        CHECK(w.report.pass);
        CHECK(w.report.lhs == Approx(0.5).epsilon(1e-8));
    }
    SECTION("slow algebraic tail is flagged") {
        const Axis t = Axis::centered(AxisKind::time, 0.0, 0.01, 1 << 14);
        const auto f = fourier_pair(t, sampled(t, [](double v) { return std::exp(cplx(0, -5 * v)) / std::sqrt(1 + v * v); }), 1.0, 5.0);
        const auto w = wigner_moments(f);
        CHECK(w.infinite_variance);
        CHECK_FALSE(w.report.asserted);
    }
}

TEST_CASE("exponential decay reference", "[dynamics]") {
    SECTION("unit linewidth") {
        const auto r = decay_reference(DecayModel{1.0, 0.0, 1.0});
        CHECK(r.tau == 1.0);
        CHECK(r.linewidth.pass);
        CHECK(r.transform.pass);
        // half width at half maximum of the sampled transform
        const auto& e = r.amplitude.energy_axis;
        const double half = 0.5 * r.amplitude.f_tilde[static_cast<Eigen::Index>(e.count / 2)].real();
        std::size_t i = e.count / 2;
        while (r.amplitude.f_tilde[static_cast<Eigen::Index>(i)].real() > half) ++i;
        const double a = r.amplitude.f_tilde[static_cast<Eigen::Index>(i - 1)].real();
        const double b = r.amplitude.f_tilde[static_cast<Eigen::Index>(i)].real();
        const double hwhm = e[i - 1] + (a - half) / (a - b) * e.step;
        CHECK(hwhm == Approx(0.5).epsilon(1e-3));
    }
    SECTION("Moessbauer line parameters") {
        const double hbar_ev_s = 6.582119569e-16;
        const auto m = DecayModel::from_lifetime(141e-9, 14.4e3, hbar_ev_s);
        CHECK(m.gamma == Approx(4.7e-9).epsilon(0.01));
        const auto r = decay_reference(m, 0.01, std::size_t{1} << 16, true);
        CHECK(r.energy_offset == 14.4e3);
        CHECK(r.linewidth.pass);
        CHECK(r.transform.pass);
    }
    SECTION("invalid model") {
        CHECK_THROWS_AS(decay_reference(DecayModel{-1.0, 0.0, 1.0}), Error);
    }
}
