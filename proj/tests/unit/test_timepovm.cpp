#include <catch_amalgamated.hpp>

#include <random>

#include <tempus/timepovm.hpp>

#include "support.hpp"

using namespace tempus;
using namespace tempus::test;
using Catch::Approx;

namespace {

GridState gaussian_momentum(const Axis& p, double p0, double sp, double x0 = 0.0, double hbar = 1.0) {
    return GridState::from_function(p, [&](double v) {
        return std::exp(-(v - p0) * (v - p0) / (4 * sp * sp)) * std::exp(cplx(0.0, -v * x0 / hbar));
    }, hbar).normalized();
}

/// Position operator on a momentum grid, column by column; the conjugate coordinate is -x.
MatrixXcd position_matrix(const Axis& p, double hbar) {
    const auto minus_x = HermitianOperator::multiplication(conjugate_axis(p, hbar), [](double v) { return v; });
    const auto n = static_cast<Eigen::Index>(p.count);
    MatrixXcd q(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        VectorXcd e = VectorXcd::Zero(n);
        e[k] = 1.0;
        q.col(k) = -apply(minus_x, GridState(p, e, hbar)).amplitudes();
    }
    return q;
}

}  // namespace

TEST_CASE("generic time POVM: uniform density", "[timepovm]") {
    const Axis basis = Axis::fock(3);
    const std::size_t bins = 40;
    const Axis out = Axis::make(AxisKind::time, 0.125, 0.25, bins);
    Povm u{out, {0.0, 10.0}, basis, {}, true, false, false};
    for (std::size_t i = 0; i < bins; ++i)
        u.elements.push_back(HermitianOperator::multiplication(basis, [&](double) { return 1.0 / bins; }));
    u.validate();
    const GridState s = GridState::from_function(basis, [](double n) { return cplx(1.0, n); }).normalized();
    const auto st = time_statistics(u, s, 0.3);
    CHECK(st.mean == Approx(5.0).epsilon(1e-12));
    CHECK(st.variance == Approx(100.0 / 12).epsilon(1e-12));
    CHECK_FALSE(st.report.asserted);

    // F(Z) proportional to I commutes with every unitary
    const auto h = HermitianOperator::multiplication(basis, [](double n) { return 0.7 * n; });
    const std::vector<double> shifts{0.25, 0.75, 0.3};
    const auto cov = check_covariance(u, h, shifts);
    CHECK(cov.max_defect < 1e-12);
    CHECK(cov.interpolated);

    SECTION("zero detection probability") {
        Povm z = u;
        for (auto& e : z.elements) e = HermitianOperator::multiplication(basis, [](double) { return 0.0; });
        try {
            time_statistics(z, s);
            FAIL("expected conditioning error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::conditioning);
        }
    }
}

TEST_CASE("falling particle", "[timepovm]") {
    const double m = 1.3, g = 0.8, hbar = 1.0;
    const Axis p = Axis::centered(AxisKind::momentum, 0.0, 0.1, 128);
    const auto model = falling_particle(m, g, p, hbar);
    const auto& fp = model.model;

    SECTION("default Weyl check") { CHECK(model.weyl_defect <= 1e-6); }

    SECTION("evolution agrees with dense propagation") {
        MatrixXcd h = -m * g * position_matrix(p, hbar);
        for (std::size_t i = 0; i < p.count; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            h(k, k) += p[i] * p[i] / (2 * m);
        }
        const GridState s = gaussian_momentum(p, -0.5, 0.6, 1.0, hbar);
        // sanity: the position matrix measures the displacement
        CHECK(std::real(inner(s, GridState(p, position_matrix(p, hbar) * s.amplitudes(), hbar))) ==
              Approx(1.0).epsilon(1e-8));
        const auto dense = HermitianOperator::dense(p, 0.5 * (h + h.adjoint()), 1e-9);
        for (double t : {0.4, 1.1, -0.7}) {
            const GridState a = fp.evolve(s, t);
            const GridState b = evolve(s, dense, t);
            CHECK((a.amplitudes() - b.amplitudes()).norm() * std::sqrt(p.step) < 1e-8);
        }
    }
    SECTION("momentum grows as P + m g t and T falls with unit slope") {
        const GridState s = gaussian_momentum(p, 0.3, 0.5);
        const auto P = HermitianOperator::multiplication(p, [](double v) { return v; });
        const auto T = fp.time_operator();
        const double t = 0.9;
        const GridState st = fp.evolve(s, t);
        CHECK(moments(P, st).mean - moments(P, s).mean == Approx(m * g * t).epsilon(1e-9));
        const double slope = (moments(T, st).mean - moments(T, s).mean) / t;
        CHECK(std::abs(slope) == Approx(1.0).epsilon(1e-9));
        CHECK(slope < 0.0);
    }
    SECTION("energy shift generated by T") {
        const GridState s = gaussian_momentum(p, 0.2, 0.5, -0.5);
        const double h = 0.35;
        const double e0 = fp.energy_moments(s).mean;
        const double e1 = fp.energy_moments(fp.time_shift_generator(s, -h)).mean;
        CHECK(e1 - e0 == Approx(h).epsilon(1e-8));
    }
    SECTION("Weyl relation: trivial corners and small lattice") {
        const GridState s = gaussian_momentum(p, 0.0, 0.5);
        const std::vector<double> zero{0.0}, ts{-0.5, 0.25, 0.5}, hs{-1.0, 0.5, 2.0};
        CHECK(weyl_defect(fp, std::span<const GridState>(&s, 1), zero, hs) == 0.0);
        CHECK(weyl_defect(fp, std::span<const GridState>(&s, 1), ts, zero) == 0.0);
        CHECK(weyl_defect(fp, std::span<const GridState>(&s, 1), ts, hs) <= 1e-6);
    }
    SECTION("edge-heavy test state is rejected") {
        const GridState s = gaussian_momentum(p, p.back() - 0.2, 0.3);
        const std::vector<double> ts{0.1}, hs{0.1};
        try {
            weyl_defect(fp, std::span<const GridState>(&s, 1), ts, hs);
            FAIL("expected boundary error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::boundary);
        }
    }
    SECTION("POVM is the spectral measure of T and is covariant") {
        const Povm& f = model.povm;
        f.validate();
        CHECK(f.normalization_defect() == 0.0);
        const GridState s = gaussian_momentum(p, 0.4, 0.7);
        const auto pr = outcome_probabilities(f, s);
        const auto d = s.density();
        for (std::size_t i = 0; i < pr.size(); ++i) CHECK(pr[i] == Approx(d[p.count - 1 - i] * p.step).margin(1e-15));
        const std::vector<double> shifts{f.width(), 3 * f.width(), -2 * f.width()};
        const auto cov = check_covariance(f, [&](double t) { return fp.unitary(t); }, shifts);
        CHECK_FALSE(cov.interpolated);
        CHECK(cov.compared > 300);
        CHECK(cov.max_defect <= 1e-8);
    }
    SECTION("time statistics and the full-line uncertainty relation") {
        const GridState s = gaussian_momentum(p, 0.4, 0.7, 0.5);
        const auto e = fp.energy_moments(s);
        const auto st = time_statistics(model.povm, s, e.stddev());
        const auto mp = moments(HermitianOperator::multiplication(p, [](double v) { return v; }), s);
        CHECK(st.mean == Approx(-mp.mean / (m * g)).epsilon(1e-12));
        const double w = model.povm.width();
        CHECK(st.variance == Approx(mp.variance / (m * g * m * g) + w * w / 12).epsilon(1e-10));
        CHECK(st.report.asserted);
        CHECK(st.report.pass);
        CHECK(st.report.slack > 0.0);
    }
}

TEST_CASE("oscillator phase POVM", "[timepovm]") {
    const auto osc = oscillator_phase(16, 32);

    SECTION("normalization, positivity, full interval") {
        osc.povm.validate();
        CHECK(osc.povm.normalization_defect() <= 1e-8);
        CHECK(osc.povm.min_eigenvalue() >= -1e-10);
        const MatrixXcd full = osc.element({0.0, 2 * pi});
        CHECK((full - MatrixXcd::Identity(17, 17)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("number states have uniform phase") {
        for (std::size_t n : {0u, 3u, 16u}) {
            VectorXcd v = VectorXcd::Zero(17);
            v[static_cast<Eigen::Index>(n)] = 1.0;
            const auto pr = outcome_probabilities(osc.povm, GridState(osc.basis, v));
            for (double x : pr) CHECK(x == Approx(1.0 / 32).margin(1e-14));
        }
    }
    SECTION("covariance modulo 2 pi") {
        const double w = osc.povm.width();
        const std::vector<double> shifts{w, 5 * w, 24 * w, -3 * w};
        const auto cov = check_covariance(osc.povm, osc.hamiltonian(), shifts);
        CHECK(cov.max_defect <= 1e-8);
        CHECK(cov.compared == 4 * 32);
    }
    SECTION("time shifts of T0") {
        for (double t : {0.0, 0.3, 1.0, 2 * pi - 0.1})
            CHECK((osc.shifted(t) - osc.conjugated(t)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("commutator entries and the finite-dimensional floor") {
        const MatrixXcd h = osc.hamiltonian().to_dense();
        const MatrixXcd c = h * osc.t0 - osc.t0 * h;
        for (Eigen::Index a = 0; a < 17; ++a)
            for (Eigen::Index b = 0; b < 17; ++b)
                CHECK(std::abs(c(a, b) - (a == b ? cplx(0.0) : cplx(0.0, -1.0))) < 1e-12);
        const auto fl = commutator_floor(h, osc.t0);
        CHECK(fl.trace < 1e-10);
        CHECK(fl.defect >= fl.floor);
    }
    SECTION("defect on phase-localized interior vectors shrinks with truncation") {
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t nmax : {16u, 32u, 64u}) {
            const auto o = oscillator_phase(nmax, 8);
            const GridState psi = phase_window_state(nmax, 2.0);
            const double d = o.commutator_defect(psi);
            // ([H,T0] - i) psi = -i (sum psi) (1, ..., 1)
            CHECK(d == Approx(std::abs(psi.amplitudes().sum()) * std::sqrt(nmax + 1.0)).epsilon(1e-9));
            CHECK(d < prev);
            prev = d;
        }
        VectorXcd top = VectorXcd::Zero(17);
        top[16] = 1.0;
        CHECK_THROWS_AS(osc.commutator_defect(GridState(osc.basis, top)), Error);
    }
    SECTION("uncertainty product on a finite interval is informational") {
        const GridState psi = phase_window_state(16, 2.0);
        const auto st = time_statistics(osc.povm, psi, moments(osc.hamiltonian(), psi).stddev());
        CHECK_FALSE(st.report.asserted);
    }
    CHECK_THROWS_AS(oscillator_phase(4), Error);
}

TEST_CASE("free-particle arrival POVM", "[timepovm]") {
    const double m = 1.0, p0 = 10.0, sp = 0.5, x0 = -20.0;
    const Axis p = Axis::centered(AxisKind::momentum, p0, 0.05, 256);
    const GridState phi = gaussian_momentum(p, p0, sp, x0);
    const Axis bins = Axis::make(AxisKind::time, -2.0 + 0.025, 0.05, 160);
    const auto dist = free_arrival_distribution(phi, bins, m);

    CHECK(dist.total == Approx(1.0).margin(1e-3));
    CHECK(dist.mean == Approx(-x0 * m / p0).epsilon(0.02));
    CHECK(dist.warnings.empty());
    CHECK(free_arrival_probability(phi, {1.0, 3.0}, m) ==
          Approx(std::accumulate(dist.probabilities.begin() + 60, dist.probabilities.begin() + 100, 0.0)).epsilon(1e-10));

    SECTION("time-shift covariance") {
        const double s = 0.5;  // ten bins
        const auto moved = free_arrival_distribution(free_evolve(phi, s, m), bins, m);
        double d = 0.0;
        for (std::size_t i = 0; i + 10 < bins.count; ++i) d = std::max(d, std::abs(moved.probabilities[i] - dist.probabilities[i + 10]));
        CHECK(d <= 1e-4);
    }
    SECTION("only positive momenta: the negative branch is silent") {
        const Axis both = Axis::centered(AxisKind::momentum, 0.0, 0.1, 512);
        const GridState right = gaussian_momentum(both, p0, sp, x0);
        const GridState mirrored = GridState::from_function(both, [&](double v) {
            return v > 0 ? right[both.nearest(v)] : cplx(0.0);
        }).normalized();
        CHECK(free_arrival_probability(mirrored, {1.5, 2.5}, m) ==
              Approx(free_arrival_probability(right, {1.5, 2.5}, m)).epsilon(1e-8));
    }
    SECTION("slow packet warning") {
        const Axis slow = Axis::centered(AxisKind::momentum, 0.0, 0.01, 256);
        const auto d2 = free_arrival_distribution(gaussian_momentum(slow, 0.05, 0.3, -1.0), bins, m);
        CHECK_FALSE(d2.warnings.empty());
    }
    SECTION("kernel exp(+i t p^2 / m hbar) as displayed: half the weight, arrivals at x0 m / 2 p0") {
        // direct quadrature of the displayed form
        double total = 0.0, first = 0.0;
        const double dt = 0.002;
        for (double t = -6.0; t < 4.0; t += dt) {
            cplx acc = 0.0;
            for (std::size_t i = 0; i < p.count; ++i)
                acc += std::sqrt(p[i] / m) * std::exp(cplx(0.0, t * p[i] * p[i] / m)) * phi[i] * p.step;
            const double dens = std::norm(acc) / (2 * pi);
            total += dens * dt;
            first += t * dens * dt;
        }
        CHECK(total == Approx(0.5).margin(1e-3));
        CHECK(first / total == Approx(x0 * m / (2 * p0)).epsilon(0.02));
    }
}

TEST_CASE("bounded-spectrum covariant POVM", "[timepovm]") {
    const auto b = bounded_spectrum(64);
    const auto h = b.hamiltonian();
    const auto povm = b.povm(256);

    SECTION("axioms over one period") {
        povm.validate();
        CHECK(povm.normalized);
        CHECK(povm.normalization_defect() <= 1e-8);
        CHECK(povm.min_eigenvalue() >= -1e-10);
        const double w = povm.width();
        const std::vector<double> shifts{w, 17 * w, -40 * w};
        CHECK(check_covariance(povm, h, shifts).max_defect <= 1e-8);
    }
    SECTION("short window is rejected") {
        try {
            b.povm(64, Interval{-8.0, 8.0});
            FAIL("expected window error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::window);
        }
    }
    SECTION("uniform-energy state has zero mean time") {
        const GridState phi0 = GridState::from_function(b.energy, [](double) { return 1.0 / std::sqrt(2 * pi); });
        CHECK(time_statistics(povm, phi0).mean == Approx(0.0).margin(1e-10));
    }
    SECTION("eigenvector of T^(1) for m = 3 concentrates at t = 3") {
        const GridState v = GridState::from_function(b.energy, [](double x) {
            return std::exp(cplx(0.0, 3 * x)) / std::sqrt(2 * pi);
        });
        double best = 0.0;
        int arg = 0;
        for (int k = -10; k <= 10; ++k) {
            const MatrixXcd e = b.element({k - 0.5, k + 0.5});
            const double pk = std::real(v.amplitudes().dot(e * v.amplitudes())) * b.dh();
            if (pk > best) best = pk, arg = k;
        }
        CHECK(arg == 3);
        CHECK(best > 0.7);
    }
    SECTION("spectrum of T^(c) is the shifted integers to second order") {
        for (cplx c : {cplx(1.0), std::exp(cplx(0.0, pi / 3)), std::exp(cplx(0.0, -2.0))}) {
            const auto coarse = check_time_operator_spectrum(bounded_spectrum(64, c));
            const auto fine = check_time_operator_spectrum(bounded_spectrum(128, c));
            CHECK(coarse.report.pass);
            CHECK(fine.report.pass);
            CHECK(coarse.max_deviation / fine.max_deviation == Approx(4.0).epsilon(0.05));
            const double kappa = 4 + std::arg(c) / (2 * pi);
            const auto bc = bounded_spectrum(64, c);
            CHECK(coarse.eigenvector_residual >= std::abs(bc.discrete_eigenvalue(kappa) - kappa) - 1e-12);
        }
    }
    SECTION("covariance holds for the Dirichlet operator, not for T^(c)") {
        const double tau = 0.25;
        const GridState bump = GridState::from_function(b.energy, [](double x) { return std::pow(std::sin(x / 2), 4); });
        const GridState twisted = GridState::from_function(b.energy, [](double x) { return std::exp(cplx(0.0, 2 * x)); });
        const double d_dir = covariance_defect(b, b.dirichlet_operator(), bump, tau);
        const double d_c = covariance_defect(b, b.time_operator(), twisted, tau);
        const auto b2 = bounded_spectrum(128);
        const GridState bump2 = GridState::from_function(b2.energy, [](double x) { return std::pow(std::sin(x / 2), 4); });
        CHECK(d_dir / covariance_defect(b2, b2.dirichlet_operator(), bump2, tau) == Approx(4.0).epsilon(0.1));
        CHECK(d_c > 100 * d_dir);
    }
    SECTION("effect construction reproduces P(J)") {
        const Interval j{-1.3, 2.1};
        const auto bj = bf_povm_from_effect(ground_effect(b), h, j);
        CHECK((bj.b - b.element(j)).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK(bj.min_eigenvalue >= -1e-12);
        const auto id = HermitianOperator::multiplication(b.energy, [](double) { return 1.0; });
        const auto bid = bf_povm_from_effect(id, h, j);
        CHECK((bid.b - j.length() * MatrixXcd::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(bf_povm_from_effect(ground_effect(b), h, {0.7, 0.7}).b.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("absolute variance bound over random states") {
        std::mt19937_64 rng(20240611);
        std::normal_distribution<double> n01;
        std::vector<GridState> states;
        double smallest = std::numeric_limits<double>::infinity();
        for (int r = 0; r < 200; ++r) {
            VectorXcd v(64);
            if (r % 2 == 0) {
                for (auto& z : v) z = cplx(n01(rng), n01(rng));
            } else {  // smooth bumps of random centre and width
                const double c = 1.0 + 4.0 * std::uniform_real_distribution<double>(0, 1)(rng);
                const double s = 0.2 + std::uniform_real_distribution<double>(0, 1)(rng);
                for (std::size_t j = 0; j < 64; ++j) v[static_cast<Eigen::Index>(j)] = std::exp(-std::pow(b.energy[j] - c, 2) / (4 * s * s));
            }
            states.emplace_back(GridState(b.energy, v).normalized());
            smallest = std::min(smallest, std::sqrt(time_statistics(povm, states.back()).variance));
        }
        CHECK(smallest >= 1.0 / (4 * pi) - povm.width());
        CHECK(std::isfinite(bf_constant_scan(povm, h, states)));
        CHECK(bf_constant_scan(povm, h, states) > 0.0);
    }
    SECTION("trace obstruction for T^(c)") {
        const auto fl = commutator_floor(h.to_dense(), b.time_operator());
        CHECK(fl.trace < 1e-9);
        CHECK(fl.defect >= fl.floor);
    }
    CHECK_THROWS_AS(bounded_spectrum(64, cplx(1.1, 0.0)), Error);
}
