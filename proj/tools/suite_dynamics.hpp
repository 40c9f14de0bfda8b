#pragma once

#include <functional>
#include <random>

#include <boost/math/tools/roots.hpp>

#include <tempus/clock.hpp>
#include <tempus/dynamics.hpp>
#include <tempus/widths.hpp>

#include "params.hpp"

namespace tempus::cli {

namespace detail {

inline MatrixXcd random_hermitian(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
    return 0.5 * (m + m.adjoint());
}

inline GridState random_state(std::mt19937_64& rng, int n, double hbar = 1.0) {
    std::normal_distribution<double> g;
    VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
    return GridState(Axis::fock(static_cast<std::size_t>(n)), v, hbar).normalized();
}

inline VectorXcd sampled(const Axis& a, const std::function<cplx(double)>& fn) {
    VectorXcd v(static_cast<Eigen::Index>(a.count));
    for (std::size_t i = 0; i < a.count; ++i) v[static_cast<Eigen::Index>(i)] = fn(a[i]);
    return v;
}

/// sigma_z-type pair with Delta H = dh and |psi> = (|0> - i|1>)/sqrt 2.
struct TwoLevel {
    double dh = 1.0;
    double hbar = 1.0;
    [[nodiscard]] HermitianOperator h() const { return HermitianOperator::diagonal(Axis::fock(2), VectorXd{{dh, -dh}}); }
    [[nodiscard]] GridState psi() const {
        return GridState(Axis::fock(2), VectorXcd{{cplx(1.0 / std::sqrt(2.0)), cplx(0.0, -1.0 / std::sqrt(2.0))}}, hbar);
    }
    [[nodiscard]] HermitianOperator sigma_x() const {
        return HermitianOperator::dense(Axis::fock(2), MatrixXcd{{0.0, 1.0}, {1.0, 0.0}});
    }
    [[nodiscard]] HermitianOperator projector() const {
        const VectorXcd v = psi().amplitudes();
        return HermitianOperator::dense(Axis::fock(2), v * v.adjoint());
    }
};

inline HermitianOperator projector_on(const GridState& psi) {
    const VectorXcd v = psi.amplitudes();
    return HermitianOperator::dense(psi.axis(), v * v.adjoint() * psi.axis().step / psi.norm2());
}

}  // namespace detail

// ---------------------------------------------------------------- characteristic time

inline Result run_mt(const Params& p) {
    Result out;
    const double hbar = p["hbar"];
    std::mt19937_64 rng(p.seed);
    std::uniform_int_distribution<int> dims(2, p.integer("max_dim"));
    auto& t = out.table("systems", {"draw", "dim", "tau", "delta_h", "product", "bound", "rate_commutator",
                                    "rate_difference"});
    for (long long draw = 0; draw < static_cast<long long>(p.count("count")); ++draw) {
        const int n = dims(rng);
        const auto h = HermitianOperator::dense(Axis::fock(static_cast<std::size_t>(n)), detail::random_hermitian(rng, n));
        const auto a = HermitianOperator::dense(Axis::fock(static_cast<std::size_t>(n)), detail::random_hermitian(rng, n));
        const GridState psi = detail::random_state(rng, n, hbar);
        const auto c = characteristic_time(a, psi, h);
        t.add({draw, static_cast<long long>(n), c.tau, c.delta_h, c.tau * c.delta_h, 0.5 * hbar, c.rate_commutator,
               c.rate_difference});
        out.reports.push_back(BoundReport::make("MT-ur", c.tau * c.delta_h, 0.5 * hbar, 1e-8));
        out.reports.push_back(BoundReport::equality("MS-tau", c.rate_difference, c.rate_commutator,
                                                    1e-5 * std::abs(c.rate_commutator),
                                                    "d<A>/dt: finite difference vs commutator"));
    }

    const detail::TwoLevel q{0.8, hbar};
    const auto c2 = characteristic_time(q.sigma_x(), q.psi(), q.h());
    out.reports.push_back(BoundReport::equality("MT-ur", c2.tau * c2.delta_h, 0.5 * hbar, 1e-8, "two-level saturation"));
    out.reports.push_back(BoundReport::equality("MS-tau", c2.tau, hbar / (2 * q.dh), 1e-12, "two-level tau"));

    // free Gaussian packet: tau = Delta Q / |<V>|
    const double p0 = 5.0, m = 2.0;
    const Axis x = Axis::centered(AxisKind::position, 0.0, 0.05, 2048);
    const GridState packet = GridState::from_function(x, [&](double v) {
        return std::exp(-v * v / 2) * std::exp(cplx(0, p0 * v / hbar));
    }, hbar).normalized();
    const auto kin = HermitianOperator::multiplication(conjugate_axis(x, hbar), [&](double k) { return k * k / (2 * m); });
    const auto pos = HermitianOperator::multiplication(x, [](double v) { return v; });
    const auto cf = characteristic_time(pos, packet, kin);
    out.reports.push_back(BoundReport::equality("MT-tau-pos", cf.tau, cf.delta_a / (p0 / m), 1e-6 * cf.tau,
                                                "tau = Delta Q / |<P>/m|"));
    out.reports.push_back(BoundReport::make("MT-ur", cf.tau * cf.delta_h, 0.5 * hbar, 1e-8, "free packet"));
    return out;
}

// ---------------------------------------------------------------- survival and lifetimes

inline Result run_survival(const Params& p) {
    Result out;
    const double hbar = p["hbar"];
    const std::size_t points = p.count("points");
    std::mt19937_64 rng(p.seed);
    std::uniform_int_distribution<int> dims(2, p.integer("max_dim"));

    // two-level closed form
    const detail::TwoLevel q{p["dh"], hbar};
    const double horizon = 0.5 * pi * hbar / q.dh;
    const Axis t2 = Axis::make(AxisKind::time, 0.0, 2 * horizon / static_cast<double>(points - 1), points);
    const auto curve = survival_curve(q.psi(), q.projector(), q.h(), t2);
    auto& tc = out.table("curve", {"t", "p", "cos2"});
    double dev = 0.0;
    for (std::size_t i = 0; i < t2.count; ++i) {
        const double c = std::cos(q.dh * t2[i] / hbar);
        tc.add({t2[i], curve.p[i], c * c});
        dev = std::max(dev, std::abs(curve.p[i] - c * c));
    }
    out.reports.push_back(BoundReport::equality("pt", dev, 0.0, 1e-8, "two-level p(t) vs cos^2, max deviation"));
    out.reports.push_back(curve.cosine_bound);
    const auto fine = survival_curve(q.psi(), q.projector(), q.h(), Axis::make(AxisKind::time, 0.0, horizon / 15000, 30001));
    const auto l2 = property_lifetime(fine);
    out.reports.push_back(BoundReport::equality("MT-lifetime", l2.report.lhs, l2.report.rhs, 1e-8, "two-level equality"));

    // random states with P the initial projector
    auto& tr = out.table("random", {"draw", "dim", "delta_h", "min_p_minus_cos2"});
    for (long long draw = 0; draw < static_cast<long long>(p.count("count")); ++draw) {
        const int n = dims(rng);
        const Axis b = Axis::fock(static_cast<std::size_t>(n));
        const auto h = HermitianOperator::dense(b, detail::random_hermitian(rng, n));
        const GridState psi = detail::random_state(rng, n, hbar);
        const double dh = moments(h, psi).stddev();
        const Axis ts = Axis::make(AxisKind::time, 0.0, 0.5 * pi * hbar / dh / static_cast<double>(points - 1), points);
        const auto c = survival_curve(psi, detail::projector_on(psi), h, ts);
        tr.add({draw, static_cast<long long>(n), dh, c.cosine_bound.lhs});
        out.reports.push_back(c.cosine_bound);
    }

    // finite-Delta H spectrum: Gaussian energy profile
    const double s = 1.5;
    const Axis e = Axis::centered(AxisKind::energy, 0.0, 0.04 * s, 401);
    const GridState g = GridState::from_function(e, [&](double v) { return std::exp(-v * v / (4 * s * s)); }, hbar).normalized();
    const auto hg = HermitianOperator::multiplication(e, [](double v) { return v; });
    const auto cg = survival_curve(g, detail::projector_on(g), hg, Axis::make(AxisKind::time, 0.0, 0.01 * hbar / s, 1001));
    out.reports.push_back(cg.cosine_bound);
    out.reports.push_back(property_lifetime(cg).report);
    const auto gl = grabowski_lifetime(cg);
    out.reports.push_back(gl.report);
    out.reports.push_back(BoundReport::equality("Grabo-tau", gl.value, std::sqrt(pi) * hbar / (2 * s),
                                                1e-6 * gl.value, "Gaussian spectrum: int p dt = sqrt(pi) hbar / 2 sigma"));

    // exponential decay law: int p dt = hbar / Gamma
    const double gamma = 1.0;
    const Axis te = Axis::make(AxisKind::time, 0.0, 1e-3 * hbar, 20001);
    std::vector<double> pe(te.count);
    for (std::size_t i = 0; i < te.count; ++i) pe[i] = std::exp(-gamma * te[i] / hbar);
    const auto ge = grabowski_lifetime(SurvivalCurve::from_values(te, pe, hbar));
    out.reports.push_back(BoundReport::equality("Grabo-tau", ge.value, hbar / gamma, 1e-6 * hbar / gamma,
                                                "exponential decay: int p dt = hbar / Gamma"));
    return out;
}

// ---------------------------------------------------------------- exponential decay and Wigner moments

namespace detail {

/// Moments of the Lorentzian-squared density (half width a) on offsets [lo, hi].
inline double truncated_lorentzian2_std(double a, double lo, double hi) {
    auto f0 = [&](double x) { return x / (2 * a * a * (x * x + a * a)) + std::atan(x / a) / (2 * a * a * a); };
    auto f1 = [&](double x) { return -1.0 / (2 * (x * x + a * a)); };
    auto f2 = [&](double x) { return -x / (2 * (x * x + a * a)) + std::atan(x / a) / (2 * a); };
    const double m0 = f0(hi) - f0(lo), mean = (f1(hi) - f1(lo)) / m0;
    return std::sqrt((f2(hi) - f2(lo)) / m0 - mean * mean);
}

}  // namespace detail

inline Result run_decay(const Params& p) {
    Result out;
    const DecayModel m{p["gamma"], p["e0"], p["hbar"]};
    const auto ref = decay_reference(m, 1e-3, std::size_t{1} << 17);
    const auto& f = ref.amplitude;
    out.reports.push_back(ref.linewidth);
    out.reports.push_back(ref.transform);

    // half width at half maximum of the transform, by root finding on direct quadrature
    const double peak = fourier_direct(f.time_axis, f.f, m.e0, m.hbar).real();
    auto excess = [&](double d) { return fourier_direct(f.time_axis, f.f, m.e0 + d, m.hbar).real() - 0.5 * peak; };
    boost::uintmax_t iters = 100;
    const auto root = boost::math::tools::bisect(excess, 0.25 * m.gamma, m.gamma,
                                                 boost::math::tools::eps_tolerance<double>(40), iters);
    const double hwhm = 0.5 * (root.first + root.second);
    out.reports.push_back(BoundReport::equality("f-til-E-Lor", hwhm, 0.5 * m.gamma, 1e-4 * 0.5 * m.gamma,
                                                "half width at half maximum"));
    out.reports.push_back(BoundReport::equality("f-til-E-Lor", peak, m.lorentzian(m.e0), 1e-4 * m.lorentzian(m.e0),
                                                "peak height"));

    // Plancherel and FFT vs direct quadrature
    double nt = 0.0, ne = 0.0;
    for (Eigen::Index i = 0; i < f.f.size(); ++i) nt += std::norm(f.f[i]);
    for (Eigen::Index i = 0; i < f.f_tilde.size(); ++i) ne += std::norm(f.f_tilde[i]);
    nt *= f.time_axis.step;
    ne *= 2 * pi * m.hbar * f.energy_axis.step;
    out.reports.push_back(BoundReport::equality("Wig-ft", ne, nt, 1e-6 * nt, "sum |f|^2 dt = 2 pi hbar sum |f~|^2 dE"));
    double fft_dev = 0.0;
    for (double d : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
        const std::size_t i = f.energy_axis.nearest(m.e0 + d * m.gamma);
        fft_dev = std::max(fft_dev, std::abs(f.f_tilde[static_cast<Eigen::Index>(i)] -
                                             fourier_direct(f.time_axis, f.f, f.energy_axis[i], m.hbar)));
    }
    out.reports.push_back(BoundReport::equality("Wig-ft", fft_dev, 0.0, 1e-8 * peak, "FFT vs direct quadrature"));

    // moments
    const auto w = wigner_moments(f);
    out.reports.push_back(w.report);
    const double a = 0.5 * m.gamma;
    const double de_ref = detail::truncated_lorentzian2_std(a, -m.e0, f.energy_axis.back() - m.e0);
    out.reports.push_back(BoundReport::equality("Wig-moments", w.delta_t, m.hbar / m.gamma, 1e-4 * m.hbar / m.gamma,
                                                "Delta t on t >= 0"));
    out.reports.push_back(BoundReport::equality("Wig-lifetime", w.delta_t, m.hbar / m.gamma, 1e-4 * m.hbar / m.gamma,
                                                "Delta t = hbar / Gamma"));
    out.reports.push_back(BoundReport::equality("Wig-lifetime", w.delta_e, de_ref, 5e-4 * de_ref,
                                                "Delta E vs Lorentzian^2 on the sampled range (-> Gamma / 2)"));
    out.reports.push_back(BoundReport::equality("Wig-life-ur", w.delta_t_full_line * a, std::sqrt(0.5) * m.hbar,
                                                1e-4 * m.hbar, "full-line Delta t times Gamma / 2"));

    // Gaussian pair: minimum product
    const Axis tg = Axis::centered(AxisKind::time, 0.0, 0.01, 1 << 14);
    const auto fg = fourier_pair(tg, detail::sampled(tg, [&](double v) {
        return std::exp(-(v - 10.0) * (v - 10.0) / 4.0 - cplx(0, 10.0 * v / m.hbar));
    }), m.hbar, 10.0);
    const auto wg = wigner_moments(fg);
    out.reports.push_back(BoundReport::equality("Wig-moments", wg.delta_t, 1.0, 1e-8, "Gaussian Delta t"));
    out.reports.push_back(BoundReport::equality("Wig-moments", wg.delta_e, 0.5 * m.hbar, 1e-8, "Gaussian Delta E"));
    out.reports.push_back(wg.report);

    // widths of the same pair
    const auto dw = check_decay_equivalent_width(f, m.e0);
    out.reports.push_back(dw);
    out.reports.push_back(BoundReport::equality("decay-equiv-width-ur", dw.lhs, dw.rhs, 1e-3 * dw.rhs, "equality case"));
    const auto hu = check_hu_lifetime(f);
    out.reports.push_back(hu);
    out.reports.push_back(BoundReport::equality("HU-lifetime-ur", hu.rhs, 0.9 * m.hbar, 0.05 * m.hbar,
                                                "bound value at the half-time convention"));

    auto& ts = out.table("spectrum", {"energy", "f_tilde", "lorentzian"});
    const std::size_t c = f.energy_axis.nearest(m.e0);
    const auto span = static_cast<std::size_t>(std::ceil(10.0 * m.gamma / f.energy_axis.step));
    for (std::size_t i = c > span ? c - span : 0; i <= std::min(c + span, f.energy_axis.count - 1); ++i)
        ts.add({f.energy_axis[i], f.f_tilde[static_cast<Eigen::Index>(i)].real(), m.lorentzian(f.energy_axis[i])});
    auto& tm = out.table("moments", {"delta_t", "delta_t_full_line", "delta_t_autocorrelation", "delta_e", "product"});
    tm.add({w.delta_t, w.delta_t_full_line, w.delta_t_autocorrelation, w.delta_e, w.delta_t * w.delta_e});
    return out;
}

// ---------------------------------------------------------------- widths

inline std::vector<std::function<cplx(double)>> width_corpus() {
    return {
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
}

inline Result run_widths(const Params& p) {
    Result out;
    const double hbar = p["hbar"], alpha = p["alpha"];

    const Axis x = Axis::centered(AxisKind::position, 0.0, 0.01, 4096);
    const double s = 1.4;
    const auto g = sample(x, [&](double v) { return std::exp(-v * v / (2 * s * s)); });
    out.reports.push_back(BoundReport::equality("BM-equiv-width", equivalent_width(x, g, 0.0), s * std::sqrt(2 * pi),
                                                1e-12 * s, "Gaussian: int phi / phi(0)"));
    const Axis y = Axis::make(AxisKind::position, -2.0 + 0.0025, 0.005, 2000);
    const auto box = sample(y, [](double v) { return (v > 0.0 && v < 3.0) ? 1.0 : 0.0; });
    out.reports.push_back(BoundReport::equality("BM-equiv-width", equivalent_width(y, box, 1.5), 3.0, 1e-12,
                                                "box of length 3"));

    const Axis t = Axis::centered(AxisKind::time, 0.0, 0.01, 1 << 14);
    auto& tc = out.table("equivalent_width", {"function", "product", "target"});
    long long k = 0;
    for (const auto& fn : width_corpus()) {
        const auto r = check_equivalent_width_identity(t, detail::sampled(t, fn), hbar, 1e-4);
        tc.add({k++, r.lhs, r.rhs});
        out.reports.push_back(r);
    }

    const Axis tw = Axis::centered(AxisKind::time, 0.0, 0.02, 1 << 15);
    out.reports.push_back(check_overall_width_relation(tw, detail::sampled(tw, [](double v) { return std::exp(-v * v / 2); }),
                                                       alpha, hbar));
    out.reports.push_back(check_overall_width_relation(tw, detail::sampled(tw, [](double v) {
        return std::exp(-std::abs(v) / 2) * std::exp(cplx(0, -v));
    }), alpha, hbar));

    const Axis ta = Axis::centered(AxisKind::time, 0.0, 0.005, 1 << 15);
    const auto f = fourier_pair(ta, detail::sampled(ta, [&](double v) { return std::exp(-v * v / 2 - cplx(0, 3 * v / hbar)); }),
                                hbar, 3.0);
    auto& th = out.table("translation_width", {"alpha", "rho", "lhs", "rhs"});
    for (double a : {0.7, alpha, 0.99}) {
        const auto r = check_hu_relation(f, a, 1.0 - 0.5 * (1.0 - a));
        th.add({a, 1.0 - 0.5 * (1.0 - a), r.lhs, r.rhs});
        out.reports.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------- clocks

namespace detail {

inline HermitianOperator levels(std::vector<double> e) {
    const Axis b = Axis::fock(e.size());
    return HermitianOperator::diagonal(b, Eigen::Map<VectorXd>(e.data(), static_cast<Eigen::Index>(e.size())));
}

inline GridState fock_state(std::vector<cplx> c, double hbar = 1.0) {
    VectorXcd v(static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) v[static_cast<Eigen::Index>(i)] = c[i];
    return GridState(Axis::fock(c.size()), v, hbar).normalized();
}

}  // namespace detail

inline void add_clock(Result& out, Table& t, const std::string& label, const ClockReport& r) {
    t.add({label, r.delta_t, r.mt_bound, r.hu_bound ? r.hu_bound->bound : std::nan(""),
           r.hu_bound ? r.hu_bound->alpha0 : std::nan(""), r.delta_h});
    out.reports.push_back(r.mt);
    if (r.hu) out.reports.push_back(*r.hu);
}

inline Result run_clock(const Params& p) {
    Result out;
    const double w = p["omega"], hbar = p["hbar"];
    auto& t = out.table("clocks", {"state", "delta_t", "mt_bound", "hu_bound", "alpha0", "delta_h"});

    // ladder (|1> + ... + |n>) of an oscillator with period T = 2 pi / omega
    std::vector<std::size_t> ladder{4, 8, 16};
    const auto extra = p.count("n");
    if (std::find(ladder.begin(), ladder.end(), extra) == ladder.end()) ladder.push_back(extra);
    for (std::size_t n : ladder) {
        std::vector<double> e(n + 1);
        for (std::size_t k = 0; k <= n; ++k) e[k] = w * (static_cast<double>(k) + 0.5);
        std::vector<cplx> c(n + 1, 1.0);
        c[0] = 0.0;
        const auto psi = detail::fock_state(c, hbar);
        const auto h = detail::levels(e);
        const auto r = clock_check(psi, h, 0.0);
        add_clock(out, t, "ladder-" + std::to_string(n), r);
        const double period = 2 * pi * hbar / w;
        const double step = 2.5e-4 * hbar / r.delta_h;  // orthogonality scan step at eps = 0
        out.reports.push_back(BoundReport::equality("MT-clock-ur", r.delta_t, period / static_cast<double>(n), step,
                                                    "ladder ticks at T / " + std::to_string(n)));
    }

    // two-level saturation
    const auto psi2 = detail::fock_state({1.0, 1.0}, hbar);
    const auto r2 = clock_check(psi2, detail::levels({0.0, 2.0}), 0.0);
    add_clock(out, t, "two-level", r2);
    out.reports.push_back(BoundReport::equality("MT-clock-ur", r2.delta_t, r2.mt_bound, 1e-8, "two-level saturation"));

    // random ten-level states at overlap tolerance eps
    std::mt19937_64 rng(p.seed);
    long long attained = 0;
    const auto draws = static_cast<long long>(p.count("count"));
    for (long long k = 0; k < draws; ++k) {
        const int n = 10;
        const auto h = HermitianOperator::dense(Axis::fock(10), detail::random_hermitian(rng, n));
        const GridState psi = detail::random_state(rng, n, hbar);
        try {
            add_clock(out, t, "random-" + std::to_string(k), clock_check(psi, h, p["eps"]));
            ++attained;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::not_attained) throw;
        }
    }
    out.reports.push_back(BoundReport::info("MT-clock-ur", static_cast<double>(attained), static_cast<double>(draws),
                                            "random states reaching the overlap tolerance"));

    // C(alpha) optimum against a fine scan on a Gaussian energy density
    const Axis e = Axis::centered(AxisKind::energy, 0.0, 0.02, 1024);
    std::vector<double> dens(e.count);
    for (std::size_t i = 0; i < e.count; ++i) dens[i] = std::exp(-e[i] * e[i] / 2);
    const auto b = hu_clock_bound(e, dens, hbar);
    double fine = 0.0;
    for (int i = 0; i <= 4000; ++i) fine = std::max(fine, clock_c(e, dens, 0.5 + i / 8000.0));
    out.reports.push_back(BoundReport::make("C-alpha", b.c, fine, 1e-3 * fine, "optimizer vs fine alpha scan"));
    // unbounded support: W(1) diverges
    out.reports.push_back(BoundReport::equality("HU-clock-ur", clock_c(e, dens, 0.5), 0.0, 0.0, "C(1/2) = 0"));
    out.reports.push_back(BoundReport::equality("HU-clock-ur", clock_c(e, dens, 1.0), 0.0, 0.0, "C(1) = 0"));
    auto& tcurve = out.table("c_curve", {"alpha", "C"});
    for (int i = 0; i <= 50; ++i) tcurve.add({0.5 + i / 100.0, clock_c(e, dens, 0.5 + i / 100.0)});
    return out;
}

// ---------------------------------------------------------------- two-slit amplitude

inline Result run_twoslit(const Params& p) {
    Result out;
    const double A = p["A"], a = p["a"];
    require(A > a, ErrorCode::parameter, "slit separation must exceed the half width");
    const double dx = a / 1000.0;
    const double reach = A + a + 6.0;
    const Axis x = Axis::make(AxisKind::position, -reach + dx / 2, dx, static_cast<std::size_t>(2 * reach / dx));
    const auto pair = fourier_pair_of(x, [&](double v) {
        const double r = std::abs(v);
        return (r >= A - a && r <= A + a) ? 1.0 / std::sqrt(4 * a) : 0.0;
    });
    auto& t = out.table("amplitude", {"p", "numeric", "closed_form"});
    double dev = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double q = (i - 100) / 10.0;
        const double exact = q == 0.0 ? 2.0 * std::sqrt(a) : 2.0 * std::sqrt(a) * std::cos(A * q) * std::sin(a * q) / (a * q);
        const cplx got = 2.0 * pi * fourier_direct(x, pair.f, q);
        t.add({q, got.real(), exact});
        dev = std::max(dev, std::abs(got - exact));
    }
    out.reports.push_back(BoundReport::equality("two-slit", dev, 0.0, 1e-6, "2 sqrt(a) cos(Ap) sin(ap)/(ap), max deviation"));
    return out;
}

}  // namespace tempus::cli
