#pragma once

#include <random>

#include <tempus/abm.hpp>
#include <tempus/timepovm.hpp>

#include "suite_dynamics.hpp"

namespace tempus::cli {

// ---------------------------------------------------------------- unsharp momentum and energy

inline GaussianAbmSpec abm_spec(const Params& p) {
    GaussianAbmSpec s;
    s.m = p["m"];
    s.M = p["M"];
    s.g0 = p["g0"];
    s.dt = p["dt"];
    s.p0 = p["p0"];
    s.sigma_x = p["sigma_x"];
    s.sigma_y = p["sigma_y"];
    s.samples_per_sigma_y = p.integer("samples");
    return s;
}

inline const std::vector<std::string>& abm_columns() {
    static const std::vector<std::string> c{"g0", "dt", "g0dt", "confidence_variance", "inaccuracy", "quartic_term",
                                            "cross_term", "distortion", "variance_excess", "mean_shift",
                                            "reproducibility"};
    return c;
}

inline Result run_abm(const Params& p) {
    Result out;
    const auto spec = abm_spec(p);
    const auto c = gaussian_abm(spec);
    const double g = c.coupling();

    const auto f = confidence_function(c);
    double shape = 0.0;
    const double sf = spec.sigma_y / g;
    for (std::size_t l = 0; l < f.axis.count; ++l) {
        const double q = f.axis[l];
        const double expect = std::exp(-q * q / (2 * sf * sf)) / (sf * std::sqrt(2 * pi));
        shape = std::max(shape, std::abs(f.values[l] - expect) / expect);
    }
    out.reports.push_back(BoundReport::equality("p-confid", shape, 0.0, 1e-9, "f(p) = g0 dt |phi(g0 dt p)|^2, max relative deviation"));
    out.reports.push_back(BoundReport::equality("p-confid", riemann(std::span<const double>(f.values), f.axis.step), 1.0,
                                                1e-12, "normalization"));
    out.reports.push_back(BoundReport::equality("p-inacc", f.variance, spec.sigma_y * spec.sigma_y / (g * g),
                                                1e-10 * f.variance, "Var f = Var(P_y) / (g0 dt)^2"));

    // bins widen with the lattice so that strong coupling keeps about 64 elements
    auto width = [](std::size_t cells, long least) { return std::max(least, static_cast<long>(cells / 64)); };
    const auto P = momentum_povm(c, momentum_outcome_bins(c, width(momentum_outcome_bins(c).size(), 7)));
    out.reports.push_back(BoundReport::equality("p-pov", P.normalization_defect(), 0.0, 1e-8, "sum of elements = I"));
    out.reports.push_back(BoundReport::make("p-pov", P.min_entry(), 0.0, 1e-12, "positivity"));
    const auto E = energy_povm(c, energy_outcome_bins(c, width(energy_outcome_bins(c).size(), 50)));
    out.reports.push_back(BoundReport::equality("H-pov", E.normalization_defect(), 0.0, 1e-8, "sum of elements = I"));
    out.reports.push_back(BoundReport::make("H-pov", E.min_entry(), 0.0, 1e-12, "positivity"));
    out.reports.push_back(BoundReport::equality("H-pov", E.parity_defect(), 0.0, 1e-10, "E(p) = E(-p)"));

    const auto st = energy_statistics(c);
    out.reports.push_back(st.mean_report);
    out.reports.push_back(st.variance_report);

    // near-eigenstate of the same coupling: object spread a tenth of the confidence width,
    // twenty samples per object spread
    auto near = spec;
    near.sigma_x = 0.1 * sf;
    near.samples_per_sigma_y = std::max(near.samples_per_sigma_y, 20);
    const auto cn = gaussian_abm(near);
    const double sn = std::sqrt(confidence_function(cn).variance);
    const double h = cn.object.axis().step;
    const auto cs = conditional_state(cn, Interval{spec.p0 - sn + 0.5 * h, spec.p0 + sn + 0.5 * h});
    out.reports.push_back(BoundReport::make("p-reprod", cs.reproducibility, 0.99, 0.0,
                                            "outcome within one confidence width of p0"));
    out.reports.push_back(BoundReport::equality("p-reprod", cs.diagonal_deviation, 0.0, 1e-8,
                                                "conditional momentum density = E(R)(p) |varphi(p)|^2"));

    auto& t = out.table("abm", abm_columns());
    t.add({spec.g0, spec.dt, g, f.variance, st.inaccuracy(), st.quartic_term, st.cross_term, st.distortion,
           st.variance_direct - st.object_variance, st.mean_direct - (st.mean - st.distortion), cs.reproducibility});
    return out;
}

/// Log-log slopes over a coupling sweep.
inline void abm_sweep_summary(Result& out) {
    const Table* t = nullptr;
    for (const auto& x : out.tables)
        if (x.name == "abm") t = &x;
    if (!t || t->rows.size() < 2) return;
    auto column = [&](const std::string& name) {
        const auto k = static_cast<std::size_t>(std::find(t->columns.begin(), t->columns.end(), name) - t->columns.begin());
        std::vector<double> v;
        for (const auto& r : t->rows) v.push_back(std::get<double>(r[k]));
        return v;
    };
    const auto g = column("g0dt");
    if (g.front() == g.back()) return;
    const double s_var = end_slope(g, column("confidence_variance"));
    const double s_cross = end_slope(g, column("cross_term"));
    const double s_quartic = end_slope(g, column("quartic_term"));
    const double s_total = end_slope(g, column("variance_excess"));
    const double s_dist = end_slope(g, column("mean_shift"));
    out.reports.push_back(BoundReport::equality("p-inacc", s_var, -2.0, 0.01, "log-log slope of Var f"));
    out.reports.push_back(BoundReport::equality("H-var", s_cross, -2.0, 0.01, "log-log slope of the cross term"));
    out.reports.push_back(BoundReport::equality("H-var", s_quartic, -4.0, 0.02, "log-log slope of the quartic term"));
    // -2 only where the cross term dominates, i.e. large p0 / sigma_x and g0 dt >~ 1
    out.reports.push_back(BoundReport::info("H-var", s_total, -2.0, "log-log slope of the measured variance excess"));
    out.reports.push_back(BoundReport::equality("H-val", s_dist, -2.0, 0.01, "log-log slope of the mean distortion"));
    auto& st = out.table("slopes", {"quantity", "slope"});
    st.add({std::string("confidence_variance"), s_var});
    st.add({std::string("cross_term"), s_cross});
    st.add({std::string("quartic_term"), s_quartic});
    st.add({std::string("variance_excess"), s_total});
    st.add({std::string("mean_shift"), s_dist});
}

// ---------------------------------------------------------------- falling particle

namespace detail {

inline GridState gaussian_momentum(const Axis& p, double p0, double sp, double x0 = 0.0, double hbar = 1.0) {
    return GridState::from_function(p, [&](double v) {
        return std::exp(-(v - p0) * (v - p0) / (4 * sp * sp)) * std::exp(cplx(0.0, -v * x0 / hbar));
    }, hbar).normalized();
}

/// Position operator on a momentum grid, column by column; the conjugate coordinate is -x.
inline MatrixXcd position_matrix(const Axis& p, double hbar) {
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

}  // namespace detail

inline Result run_falling(const Params& p) {
    Result out;
    const double m = p["m"], g = p["g"], hbar = p["hbar"];
    const Axis axis = Axis::centered(AxisKind::momentum, 0.0, p["dp"], p.count("n"));
    const auto model = falling_particle(m, g, axis, hbar);
    const auto& fp = model.model;
    const GridState s = detail::gaussian_momentum(axis, p["p0"], p["sp"], p["x0"], hbar);
    require(fp.boundary_weight(s) <= 1e-10, ErrorCode::boundary, "packet reaches the grid edge");

    // H = P^2/2m - m g Q as a dense matrix against the spectral propagator
    MatrixXcd h = -m * g * detail::position_matrix(axis, hbar);
    for (std::size_t i = 0; i < axis.count; ++i) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += axis[i] * axis[i] / (2 * m);
    const auto dense = HermitianOperator::dense(axis, 0.5 * (h + h.adjoint()), 1e-9);
    double dev = 0.0;
    for (double t : {0.4, 1.1, -0.7})
        dev = std::max(dev, (fp.evolve(s, t).amplitudes() - evolve(s, dense, t).amplitudes()).norm() * std::sqrt(axis.step));
    out.reports.push_back(BoundReport::equality("H-g", dev, 0.0, 1e-8, "propagator vs dense P^2/2m - m g Q"));

    const auto P = HermitianOperator::multiplication(axis, [](double v) { return v; });
    const double t1 = 0.9;
    const GridState s1 = fp.evolve(s, t1);
    out.reports.push_back(BoundReport::equality("H-g", moments(P, s1).mean - moments(P, s).mean, m * g * t1, 1e-9 * m * g * t1,
                                                "<P> grows as m g t"));
    const auto T = fp.time_operator();
    out.reports.push_back(BoundReport::equality("T-g", moments(T, s).mean, -moments(P, s).mean / (m * g),
                                                1e-12 * (1.0 + std::abs(moments(T, s).mean)), "T = -P / m g"));
    out.reports.push_back(BoundReport::equality("T-cov", moments(T, s1).mean - moments(T, s).mean, -t1, 1e-9 * t1,
                                                "<T> moves back one unit per unit time"));
    const double dh = 0.35;
    out.reports.push_back(BoundReport::equality("H-cov2", fp.energy_moments(fp.time_shift_generator(s, -dh)).mean -
                                                              fp.energy_moments(s).mean,
                                                dh, 1e-8 * dh, "e^{ihT} H e^{-ihT} = H + h"));
    out.reports.push_back(BoundReport::equality("Weyl", model.weyl_defect, 0.0, 1e-6, "default (t, h) lattice"));

    const Povm& f = model.povm;
    f.validate();
    const std::vector<double> shifts{f.width(), 3 * f.width(), -2 * f.width()};
    const auto cov = check_covariance(f, [&](double t) { return fp.unitary(t); }, shifts);
    out.reports.push_back(BoundReport::equality("time-cov", cov.max_defect, 0.0, 1e-8, "U_t F(Z) U_t^-1 = F(Z - t)"));

    const auto e = fp.energy_moments(s);
    const auto st = time_statistics(f, s, e.stddev());
    const auto mp = moments(P, s);
    const double w = f.width();
    const double var = mp.variance / (m * g * m * g) + w * w / 12;
    out.reports.push_back(BoundReport::equality("time-var", st.variance, var, 1e-10 * var, "Var P / (m g)^2 + w^2 / 12"));
    out.reports.push_back(st.report);

    auto& t = out.table("time_distribution", {"t", "probability"});
    for (std::size_t i = 0; i < st.distribution.size(); ++i) t.add({f.outcome_axis[i], st.distribution[i]});
    return out;
}

// ---------------------------------------------------------------- oscillator phase

inline Result run_oscillator(const Params& p) {
    Result out;
    const std::size_t nmax = p.count("nmax"), bins = p.count("bins");
    const auto osc = oscillator_phase(nmax, bins);
    osc.povm.validate();
    out.reports.push_back(BoundReport::equality("osc-phase", osc.povm.normalization_defect(), 0.0, 1e-8, "sum of elements = I"));
    out.reports.push_back(BoundReport::make("osc-phase", osc.povm.min_eigenvalue(), 0.0, 1e-10, "positivity"));
    const double w = osc.povm.width();
    const std::vector<double> shifts{w, 5 * w, 0.75 * static_cast<double>(bins) * w, -3 * w};
    out.reports.push_back(BoundReport::equality("osc-phase", check_covariance(osc.povm, osc.hamiltonian(), shifts).max_defect,
                                                0.0, 1e-8, "covariance modulo 2 pi"));
    double shift_dev = 0.0;
    for (double t : {0.0, 0.3, 1.0, 2 * pi - 0.1})
        shift_dev = std::max(shift_dev, (osc.shifted(t) - osc.conjugated(t)).cwiseAbs().maxCoeff());
    out.reports.push_back(BoundReport::equality("garrison-wong", shift_dev, 0.0, 1e-12,
                                                "e^{itH} T0 e^{-itH} = T0 - t + 2 pi F([0, t])"));

    const MatrixXcd hd = osc.hamiltonian().to_dense();
    const MatrixXcd comm = hd * osc.t0 - osc.t0 * hd;
    double entry = 0.0;
    for (Eigen::Index a = 0; a < comm.rows(); ++a)
        for (Eigen::Index b = 0; b < comm.cols(); ++b)
            entry = std::max(entry, std::abs(comm(a, b) - (a == b ? cplx(0.0) : cplx(0.0, -1.0))));
    out.reports.push_back(BoundReport::equality("garrison-wong", entry, 0.0, 1e-12, "[H, T0] entries: -i off the diagonal"));

    auto& td = out.table("commutator_defect", {"nmax", "defect"});
    std::vector<std::size_t> sizes{16, 32, 64};
    if (std::find(sizes.begin(), sizes.end(), nmax) == sizes.end()) sizes.push_back(nmax);
    std::sort(sizes.begin(), sizes.end());
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : sizes) {
        const double d = oscillator_phase(n, 8).commutator_defect(phase_window_state(n, p["theta"]));
        td.add({static_cast<long long>(n), d});
        if (std::isfinite(prev))
            out.reports.push_back(BoundReport::make("garrison-wong", prev, d, 0.0,
                                                    "defect on an interior vector decreases with truncation"));
        prev = d;
    }

    const GridState psi = phase_window_state(nmax, p["theta"]);
    const auto st = time_statistics(osc.povm, psi, moments(osc.hamiltonian(), psi).stddev());
    out.reports.push_back(st.report);
    auto& tp = out.table("phase_distribution", {"phase", "probability"});
    for (std::size_t i = 0; i < st.distribution.size(); ++i) tp.add({osc.povm.outcome_axis[i], st.distribution[i]});
    return out;
}

// ---------------------------------------------------------------- free arrival

inline Result run_arrival(const Params& p) {
    Result out;
    const double m = p["m"], p0 = p["p0"], sp = p["sp"], x0 = p["x0"], bin = p["bin"];
    require(x0 < 0.0 && p0 > 0.0, ErrorCode::parameter, "packet must start left of the origin moving right");
    const Axis axis = Axis::centered(AxisKind::momentum, p0, 0.05 * sp / 0.5, 256);
    const GridState phi = detail::gaussian_momentum(axis, p0, sp, x0);
    const Axis bins = Axis::make(AxisKind::time, p["tmin"] + 0.5 * bin, bin, p.count("bins"));
    const auto dist = free_arrival_distribution(phi, bins, m);
    out.reports.push_back(BoundReport::equality("F-free", dist.total, 1.0, 1e-3, "total arrival probability"));
    const double mean = -x0 * m / p0;
    out.reports.push_back(BoundReport::equality("F-free", dist.mean, mean, 0.02 * mean, "mean arrival -x0 m / p0"));

    const auto shift = static_cast<std::size_t>(std::lround(p["shift"] / bin));
    const auto moved = free_arrival_distribution(free_evolve(phi, static_cast<double>(shift) * bin, m), bins, m);
    double d = 0.0;
    for (std::size_t i = 0; i + shift < bins.count; ++i)
        d = std::max(d, std::abs(moved.probabilities[i] - dist.probabilities[i + shift]));
    out.reports.push_back(BoundReport::equality("F-free", d, 0.0, 1e-4, "time-shift covariance, max bin difference"));
    for (const auto& warn : dist.warnings) out.reports.push_back(BoundReport::info("F-free", 0.0, 0.0, warn));

    auto& t = out.table("arrival", {"t", "probability"});
    for (std::size_t i = 0; i < bins.count; ++i) t.add({bins[i], dist.probabilities[i]});
    return out;
}

// ---------------------------------------------------------------- bounded spectrum

inline Result run_bounded(const Params& p) {
    Result out;
    const std::size_t n = p.count("n");
    const cplx c = std::exp(cplx(0.0, p["phase"]));
    const auto b = bounded_spectrum(n, c);
    const auto h = b.hamiltonian();
    const auto povm = b.povm(p.count("bins"));
    povm.validate();
    out.reports.push_back(BoundReport::equality("time-povm", povm.normalization_defect(), 0.0, 1e-8, "sum over one period = I"));
    out.reports.push_back(BoundReport::make("time-povm", povm.min_eigenvalue(), 0.0, 1e-10, "positivity"));
    const double w = povm.width();
    const std::vector<double> shifts{w, 17 * w, -40 * w};
    out.reports.push_back(BoundReport::equality("time-cov", check_covariance(povm, h, shifts).max_defect, 0.0, 1e-8,
                                                "bounded spectrum, shifts by whole bins"));

    const auto coarse = check_time_operator_spectrum(b);
    const auto fine = check_time_operator_spectrum(bounded_spectrum(2 * n, c));
    out.reports.push_back(coarse.report);
    out.reports.push_back(BoundReport::equality("T-c-spec", coarse.max_deviation / fine.max_deviation, 4.0, 0.2,
                                                "second-order convergence"));

    const Interval j{-1.3, 2.1};
    const auto bj = bf_povm_from_effect(ground_effect(b), h, j);
    out.reports.push_back(BoundReport::equality("BF-effect", (bj.b - b.element(j)).cwiseAbs().maxCoeff(), 0.0, 1e-6,
                                                "B(J) = P(J) for the effect |phi0><phi0|"));

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<GridState> states;
    double smallest = std::numeric_limits<double>::infinity();
    const auto count = p.count("states");
    for (std::size_t r = 0; r < count; ++r) {
        VectorXcd v(static_cast<Eigen::Index>(n));
        if (r % 2 == 0) {
            for (auto& z : v) z = cplx(n01(rng), n01(rng));
        } else {
            const double mid = 1.0 + 4.0 * u01(rng), s = 0.2 + u01(rng);
            for (std::size_t k = 0; k < n; ++k) v[static_cast<Eigen::Index>(k)] = std::exp(-std::pow(b.energy[k] - mid, 2) / (4 * s * s));
        }
        states.emplace_back(GridState(b.energy, v).normalized());
        smallest = std::min(smallest, std::sqrt(time_statistics(povm, states.back()).variance));
    }
    out.reports.push_back(BoundReport::make("lambda-var", smallest, 1.0 / (4 * pi) - w, 0.0,
                                            "min Delta T over sampled states vs hbar / 2 lambda(H), less one bin"));
    const double d = bf_constant_scan(povm, h, states);
    out.reports.push_back(BoundReport::make("BF-bound", d, 0.0, 0.0, "min Delta T <H> over sampled states is positive"));

    auto& t = out.table("time_spectrum", {"m", "expected", "deviation_bound"});
    for (int k = -4; k <= 4; ++k) t.add({static_cast<long long>(k), k + b.twist(), coarse.bound});
    return out;
}

}  // namespace tempus::cli
