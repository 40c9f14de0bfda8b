#include <catch_amalgamated.hpp>

#include <tempus/abm.hpp>

#include "support.hpp"

using namespace tempus;
using namespace tempus::test;
using Catch::Approx;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

GaussianAbmSpec base_spec() {
    GaussianAbmSpec s;
    s.m = 1.0;
    s.M = 2.0;
    s.g0 = 4.0;
    s.dt = 0.5;
    s.p0 = 3.0;
    s.sigma_x = 0.5;
    s.sigma_y = 1.0;
    return s;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    return (std::log(y.back()) - std::log(y.front())) / (std::log(x.back()) - std::log(x.front()));
}

}  // namespace

TEST_CASE("confidence function", "[abm]") {
    const auto c = gaussian_abm(base_spec());
    const auto f = confidence_function(c);
    const double g = c.coupling();
    CHECK(riemann(std::span<const double>(f.values), f.axis.step) == Approx(1.0).margin(1e-12));
    CHECK(std::sqrt(f.variance) == Approx(1.0 / g).epsilon(1e-10));
    CHECK(f.symmetric);
    for (std::size_t l = 0; l < f.axis.count; l += 37) {
        const double q = f.axis[l], s = 1.0 / g;
        CHECK(f.values[l] == Approx(std::exp(-q * q / (2 * s * s)) / (s * std::sqrt(2 * pi))).epsilon(1e-10));
    }

    auto doubled = base_spec();
    doubled.g0 *= 2;
    CHECK(std::sqrt(confidence_function(gaussian_abm(doubled)).variance) == Approx(0.5 * std::sqrt(f.variance)).epsilon(1e-10));

    SECTION("variance scales as (g0 dt)^-2 over three decades") {
        std::vector<double> gs, vs;
        for (double g0 : {1.0, 10.0, 100.0, 1000.0}) {
            auto s = base_spec();
            s.g0 = g0;
            s.dt = 1.0;
            s.sigma_x = 1e-3;
            gs.push_back(g0);
            vs.push_back(confidence_function(gaussian_abm(s)).variance);
        }
        CHECK(slope(gs, vs) == Approx(-2.0).margin(0.01));
    }
    SECTION("coarse probe grid is rejected") {
        const Axis y = Axis::centered(AxisKind::momentum, 0.0, 0.5, 21);
        const auto probe = GridState::from_function(y, [](double p) { return std::exp(-p * p / 4); }).normalized();
        const Axis x = Axis::centered(AxisKind::momentum, 0.0, 0.5 / c.coupling(), 41);
        const auto object = GridState::from_function(x, [](double p) { return std::exp(-p * p); }).normalized();
        try {
            confidence_function(AbmConfig{1, 1, c.g0, c.dt, probe, object, 1.0});
            FAIL("expected resolution error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::resolution);
        }
    }
    SECTION("incommensurate grids are rejected") {
        AbmConfig bad = c;
        bad.g0 *= 1.01;
        CHECK_THROWS_AS(confidence_function(bad), Error);
    }
}

TEST_CASE("unsharp momentum POVM", "[abm]") {
    auto spec = base_spec();
    spec.samples_per_sigma_y = 200;
    const auto c = gaussian_abm(spec);
    const auto f = confidence_function(c);
    const double h = c.object.axis().step;

    SECTION("whole line is the identity") {
        const auto P = momentum_povm(c, {Interval{}});
        CHECK(P.normalization_defect() < 1e-12);
    }
    SECTION("axioms on a fine partition") {
        const auto P = momentum_povm(c, momentum_outcome_bins(c, 7));
        CHECK(P.min_entry() >= -1e-12);
        CHECK(P.normalization_defect() < 1e-8);
        // additivity: merging two neighbours
        const auto& b = P.bins;
        const auto merged = momentum_povm(c, {Interval{b[10].lo, b[11].hi}});
        CHECK((merged.elements[0] - P.elements[10] - P.elements[11]).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("half line gives the Gaussian CDF") {
        const double edge = 2.5 * h;  // a cell boundary
        const auto P = momentum_povm(c, {Interval{edge, std::numeric_limits<double>::infinity()}});
        const double s = std::sqrt(f.variance);
        const Axis& x = c.object.axis();
        for (std::size_t j = 0; j < x.count; j += 11) {
            CHECK(P.elements[0][static_cast<Eigen::Index>(j)] == Approx(normal_cdf((x[j] - edge) / s)).margin(1e-6));
            double brute = 0.0;
            for (std::size_t l = 0; l < f.axis.count; ++l)
                if (x[j] - f.axis[l] >= edge) brute += f.values[l] * f.axis.step;
            CHECK(P.elements[0][static_cast<Eigen::Index>(j)] == Approx(brute).margin(1e-12));
        }
    }
    SECTION("strong coupling approaches the sharp projection") {
        auto sharp = base_spec();
        sharp.g0 = 400.0;
        sharp.sigma_x = 0.05;
        const auto cs = gaussian_abm(sharp);
        const double sf = std::sqrt(confidence_function(cs).variance);
        const double hs = cs.object.axis().step;
        const Interval r{3.0 + 0.5 * hs, 3.05 + 0.5 * hs};
        const auto P = momentum_povm(cs, {r});
        const Axis& x = cs.object.axis();
        std::size_t checked = 0;
        for (std::size_t j = 0; j < x.count; ++j) {
            const double d = std::min(std::abs(x[j] - r.lo), std::abs(x[j] - r.hi));
            if (d < 9 * sf) continue;
            CHECK(P.elements[0][static_cast<Eigen::Index>(j)] == Approx(r.contains(x[j]) ? 1.0 : 0.0).margin(1e-12));
            ++checked;
        }
        CHECK(checked > 100);
    }
    SECTION("overlapping bins are rejected") {
        try {
            momentum_povm(c, {Interval{0.0, 1.0}, Interval{0.5, 2.0}});
            FAIL("expected partition error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::partition);
        }
    }
}

TEST_CASE("smeared kinetic-energy POVM", "[abm]") {
    auto spec = base_spec();
    spec.samples_per_sigma_y = 200;
    spec.p0 = 0.0;
    spec.sigma_x = 1.0;
    const auto c = gaussian_abm(spec);

    SECTION("positive half line is the identity") {
        const auto P = energy_povm(c, {Interval{0.0, std::numeric_limits<double>::infinity()}});
        CHECK(P.normalization_defect() < 1e-12);
    }
    SECTION("axioms and parity") {
        const auto P = energy_povm(c, energy_outcome_bins(c, 50));
        CHECK(P.min_entry() >= -1e-12);
        CHECK(P.normalization_defect() < 1e-8);
        CHECK(P.parity_defect() < 1e-10);
    }
    auto narrow = spec;
    narrow.sigma_x = 0.2;
    SECTION("preimage and kernel quadrature agree") {
        const auto c = gaussian_abm(narrow);
        const auto bins = energy_outcome_bins(c, 200);
        for (std::size_t b : {std::size_t{0}, std::size_t{3}, std::size_t{7}}) {
            const auto lattice = energy_povm(c, {bins[b]}).elements[0];
            const auto kernel = energy_kernel_element(c, bins[b], KernelForm::exact);
            CHECK((lattice - kernel).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SECTION("printed single-branch kernel holds only far from p = 0") {
        auto wide = narrow;
        wide.p0 = 2.0;
        wide.sigma_x = 1.0;
        wide.samples_per_sigma_y = 50;
        const auto c = gaussian_abm(wide);
        const auto bins = energy_outcome_bins(c, 200);
        const double sf = std::sqrt(confidence_function(c).variance);
        const Axis& x = c.object.axis();
        double near = 0.0, far = 0.0, inside = 0.0;
        for (std::size_t b : {std::size_t{0}, std::size_t{3}}) {
            const auto exact = energy_kernel_element(c, bins[b], KernelForm::exact);
            const auto printed = energy_kernel_element(c, bins[b], KernelForm::printed);
            for (std::size_t j = 0; j < x.count; ++j) {
                const auto i = static_cast<Eigen::Index>(j);
                const double d = std::abs(exact[i] - printed[i]);
                if (std::abs(x[j]) < sf) near = std::max(near, d);
                if (std::abs(x[j]) > 10 * sf) far = std::max(far, d);
                if (b == 3) inside = std::max(inside, printed[i]);
            }
        }
        CHECK(inside == Approx(std::erf(std::sqrt(2.0))).epsilon(1e-4));  // |r| < 2 std(f)
        CHECK(near > 1e-3);
        CHECK(far < 1e-10);
    }
    SECTION("sharp limit gives spectral projections of H0") {
        auto sharp = spec;
        sharp.g0 = 400.0;
        sharp.samples_per_sigma_y = 16;
        const auto cs = gaussian_abm(sharp);
        const double sf = std::sqrt(confidence_function(cs).variance);
        const Interval z{0.5, 2.0};
        const auto P = energy_povm(cs, {z});
        const Axis& x = cs.object.axis();
        for (std::size_t j = 0; j < x.count; j += 13) {
            const double p = std::abs(x[j]);
            if (std::abs(p - 1.0) < 9 * sf || std::abs(p - 2.0) < 9 * sf) continue;
            CHECK(P.elements[0][static_cast<Eigen::Index>(j)] == Approx(z.contains(p * p / 2) ? 1.0 : 0.0).margin(1e-12));
        }
    }
    SECTION("asymmetric confidence function is rejected") {
        const double g = c.coupling();
        const Axis& y = c.probe.axis();
        const auto skew = GridState::from_function(y, [](double p) {
            return std::exp(-(p - 0.3) * (p - 0.3) / 4);
        }).normalized();
        const AbmConfig bad{c.m, c.M, c.g0, c.dt, skew, c.object, 1.0};
        CHECK(g > 0);
        try {
            energy_povm(bad, {Interval{0.0, 1.0}});
            FAIL("expected precondition error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::precondition);
        }
    }
}

TEST_CASE("energy statistics", "[abm]") {
    SECTION("closed forms match outcome moments") {
        const auto s = energy_statistics(gaussian_abm(base_spec()));
        CHECK(s.mean_report.pass);
        CHECK(s.variance_report.pass);
        CHECK(s.distortion > 0.0);
    }
    SECTION("doubling g0 quarters the distortion") {
        auto a = base_spec(), b = base_spec();
        b.g0 *= 2;
        const auto sa = energy_statistics(gaussian_abm(a));
        const auto sb = energy_statistics(gaussian_abm(b));
        CHECK(sb.distortion == Approx(sa.distortion / 4).epsilon(1e-10));
    }
    SECTION("narrow object: variance dominated by the inaccuracy terms") {
        auto n = base_spec();
        n.sigma_x = 0.01;
        n.g0 = 1.0;
        const auto s = energy_statistics(gaussian_abm(n));
        CHECK(s.variance_report.pass);
        CHECK(s.object_variance < 1e-2 * s.inaccuracy());
    }
    SECTION("scaling with g0 dt over three decades") {
        std::vector<double> gs, total, quartic, distortion;
        for (double g0 : {1.0, 10.0, 100.0, 1000.0}) {
            GaussianAbmSpec s;
            s.p0 = 20.0;
            s.sigma_x = 0.5;
            s.sigma_y = 1.0;
            s.g0 = g0;
            s.dt = 1.0;
            const auto st = energy_statistics(gaussian_abm(s));
            CHECK(st.mean_report.pass);
            CHECK(st.variance_report.pass);
            gs.push_back(g0);
            total.push_back(st.variance_direct - st.object_variance);
            quartic.push_back(st.quartic_term);
            distortion.push_back(st.mean_direct - (st.mean - st.distortion));
        }
        CHECK(slope(gs, total) == Approx(-2.0).margin(0.01));
        CHECK(slope(gs, quartic) == Approx(-4.0).margin(0.01));
        CHECK(slope(gs, distortion) == Approx(-2.0).margin(0.01));
        // large coupling: mean reading approaches <H0>
        CHECK(distortion.back() < 1e-6);
    }
}

TEST_CASE("post-measurement states", "[abm]") {
    auto spec = base_spec();
    spec.samples_per_sigma_y = 20;  // per object spread, which sets the step here
    spec.sigma_x = 0.1 / (spec.g0 * spec.dt);  // std(f) / 10
    const auto c = gaussian_abm(spec);
    const double sf = std::sqrt(confidence_function(c).variance);
    const double h = c.object.axis().step;
    REQUIRE(is_near_eigenstate(c));

    SECTION("Kraus completeness") {
        VectorXd sum = VectorXd::Zero(static_cast<Eigen::Index>(c.object.axis().count));
        const auto L = detail::abm_lattice(c);
        for (long K = L.k_lo(); K <= L.k_hi(); ++K) sum += kraus_multiplier(c, K).cwiseAbs2() * h;
        CHECK((sum.array() - 1.0).abs().maxCoeff() < 1e-8);
    }
    SECTION("near-eigenstate is reproduced") {
        const Interval r{spec.p0 - sf + 0.5 * h, spec.p0 + sf + 0.5 * h};
        const auto s = conditional_state(c, r);
        CHECK(s.diagonal_deviation < 1e-8);
        CHECK(s.reproducibility >= 0.99);
        CHECK(s.probability == Approx(std::erf(1 / std::sqrt(2.0))).epsilon(2e-2));
    }
    SECTION("unconditioned state keeps the momentum distribution") {
        const auto s = conditional_state(c, Interval{});
        CHECK(s.probability == Approx(1.0).margin(1e-10));
        const auto d = c.object.density();
        for (std::size_t j = 0; j < d.size(); ++j) CHECK(s.momentum[j] == Approx(d[j]).margin(1e-10));
    }
    SECTION("weights add over disjoint outcome sets") {
        const double mid = spec.p0 + 0.5 * h;
        const auto a = conditional_state(c, Interval{mid - sf, mid});
        const auto b = conditional_state(c, Interval{mid, mid + sf});
        const auto ab = conditional_state(c, Interval{mid - sf, mid + sf});
        CHECK(ab.rho.members.size() == a.rho.members.size() + b.rho.members.size());
        CHECK(ab.rho.total_weight() == Approx(a.rho.total_weight() + b.rho.total_weight()).epsilon(1e-12));
        CHECK(ab.probability == Approx(a.probability + b.probability).epsilon(1e-12));
    }
    SECTION("empty outcome set") {
        try {
            conditional_state(c, Interval{1e6, 2e6});
            FAIL("expected conditioning error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::conditioning);
        }
    }
}

TEST_CASE("fast and accurate: inaccuracy vanishes while near-eigenstates survive", "[abm]") {
    double prev = std::numeric_limits<double>::infinity();
    for (double g0 : {1.0, 10.0, 100.0}) {
        GaussianAbmSpec s;
        s.p0 = 3.0;
        s.dt = 0.5;
        s.g0 = g0;
        s.sigma_y = 1.0;
        s.sigma_x = 0.1 / (g0 * s.dt);
        s.samples_per_sigma_y = 20;
        const auto c = gaussian_abm(s);
        const double sf = std::sqrt(confidence_function(c).variance);
        const double h = c.object.axis().step;
        const auto st = energy_statistics(c);
        CHECK(st.inaccuracy() < prev);
        prev = st.inaccuracy();
        const auto cs = conditional_state(c, Interval{s.p0 - sf + 0.5 * h, s.p0 + sf + 0.5 * h});
        CHECK(cs.reproducibility >= 0.99);
    }
}

TEST_CASE("joint evolution phase matches a dense probe propagation", "[abm]") {
    // probe alone at fixed object momentum px: H = Py^2/2M + g0 px Y, with Y = i hbar d/dpy
    const double M = 1.5, g0 = 0.8, dt = 1.2, px = 1.1, hbar = 1.0;
    const Axis py = Axis::centered(AxisKind::momentum, 0.0, 24.0 / 256, 256);
    auto phi = [](double p) { return std::exp(-p * p / 4) / std::pow(2 * pi, 0.25); };
    const GridState probe = GridState::from_function(py, phi, hbar);

    // Y matrix column by column; the conjugate grid coordinate of a momentum state is -y
    const auto minus_y = HermitianOperator::multiplication(conjugate_axis(py, hbar), [](double v) { return v; });
    MatrixXcd Y(256, 256);
    for (int k = 0; k < 256; ++k) {
        VectorXcd e = VectorXcd::Zero(256);
        e[k] = 1.0;
        Y.col(k) = -apply(minus_y, GridState(py, e, hbar)).amplitudes();
    }
    MatrixXcd H = g0 * px * Y;
    for (int k = 0; k < 256; ++k) H(k, k) += py[static_cast<std::size_t>(k)] * py[static_cast<std::size_t>(k)] / (2 * M);
    const auto out = evolve(probe, HermitianOperator::dense(py, 0.5 * (H + H.adjoint()), 1e-10), dt);

    // sanity: a packet displaced to y0 has <Y> = y0
    const GridState shifted = GridState::from_function(py, [&](double p) { return phi(p) * std::exp(cplx(0, -p * 0.7)); }, hbar);
    CHECK(std::real(inner(shifted, GridState(py, Y * shifted.amplitudes(), hbar))) == Approx(0.7).epsilon(1e-8));

    const AbmConfig cfg{1.0, M, g0, dt, probe, probe, hbar};
    double err = 0.0, err_literal = 0.0;
    for (std::size_t k = 0; k < py.count; ++k) {
        const double p = py[k];
        if (std::abs(p) > 8.0) continue;
        const cplx expect = std::exp(cplx(0, -abm_gamma(cfg, px, p) / hbar)) * phi(p + px * g0 * dt);
        const double literal = px * px * g0 * dt * dt * dt / (6 * M) + px * p * g0 * dt * dt / (2 * M) + p * p * dt / (2 * M);
        const cplx expect_literal = std::exp(cplx(0, -literal / hbar)) * phi(p + px * g0 * dt);
        err = std::max(err, std::abs(out[k] - expect));
        err_literal = std::max(err_literal, std::abs(out[k] - expect_literal));
    }
    CHECK(err < 1e-6);
    CHECK(err_literal > 1e-2);
}
