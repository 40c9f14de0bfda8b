#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <tempus/interference.hpp>

#include "params.hpp"

namespace tempus::cli {

// ---------------------------------------------------------------- chopped decay

inline constexpr double seconds_to_ns = 1e9;

/// Chopper from the parameter set; with the hauser preset times are given in seconds.
/// tchop = 0 keeps the preset period, topen = 0 means a third of the period.
inline ChopperConfig chopper_config(const Params& p) {
    const bool hauser = p.str("preset") == "hauser";
    ChopperConfig c = hauser ? hauser_preset() : ChopperConfig{};
    const double unit = hauser ? seconds_to_ns : 1.0;
    if (!hauser && p["tau"] > 0.0) c.tau = p["tau"];
    if (p["tchop"] > 0.0) c.t_chop = p["tchop"] * unit;
    c.t_open = p["topen"] > 0.0 ? p["topen"] * unit : c.t_chop / 3.0;
    c.n_windows = p.integer("windows");
    c.validate();
    return c;
}

namespace detail {

/// int |F_w(x)|^2 dx over the detuning line: adaptive quadrature inside |x| < X, oscillatory tail outside.
inline double window_spectral_norm(const ChopperConfig& c, const Window& w) {
    namespace q = boost::math::quadrature;
    const double g = 0.5 / c.tau;
    const double x_max = 400.0 * g;
    auto f2 = [&](double x) { return std::norm(window_transform_detuned(c, w, x)); };
    double inner = 0.0;
    const int pieces = 64;
    for (int k = 0; k < pieces; ++k) {
        const double a = -x_max + 2 * x_max * k / pieces, b = a + 2 * x_max / pieces;
        inner += q::gauss_kronrod<double, 61>::integrate(f2, a, b, 12, 1e-13);
    }
    // |F|^2 = e^{-2 g lo} (1 + e^{-2 g L} - 2 e^{-g L} cos(x L)) / (g^2 + x^2), even in x
    const double decay = std::exp(-2 * g * w.lo);
    const double flat_tail = (0.5 * pi - std::atan(x_max / g)) / g;
    if (std::isinf(w.hi)) return inner + 2 * decay * flat_tail;
    const double len = w.hi - w.lo;
    q::ooura_fourier_cos<double> cos_int;
    q::ooura_fourier_sin<double> sin_int;
    auto shifted = [&](double u) { return 1.0 / (g * g + (u + x_max) * (u + x_max)); };
    const double ic = cos_int.integrate(shifted, len).first, is = sin_int.integrate(shifted, len).first;
    const double osc = std::cos(len * x_max) * ic - std::sin(len * x_max) * is;
    return inner + 2 * decay * ((1 + std::exp(-2 * g * len)) * flat_tail - 2 * std::exp(-g * len) * osc);
}

}  // namespace detail

inline Result run_chopper(const Params& p) {
    Result out;
    const ChopperConfig c = chopper_config(p);
    const Axis w = default_omega_axis(c, p.integer("harmonics"));
    const auto pair = spectra(c, w, p.integer("samples"));
    const auto f = analyze(pair, c.t_chop);

    out.reports.push_back(BoundReport::equality("chopper-t0-avg", pair.richardson_change, 0.0, 1e-4,
                                                "relative change when the t0 sampling is doubled"));
    const double spacing = 2 * pi / c.t_chop;
    auto& sp = out.table("side_peaks", {"order", "expected", "found", "coherent", "objective"});
    for (const auto& s : f.side_peaks) {
        sp.add({static_cast<long long>(s.order), s.expected, s.found ? *s.found : std::nan(""), s.coherent, s.objective});
        const double dev = s.found ? std::abs(*s.found - s.expected) : spacing;
        out.reports.push_back(BoundReport::equality("chopper-J", dev, 0.0, w.step,
                                                    "side peak " + std::to_string(s.order) + " at 2 pi j / t_chop"));
        out.reports.push_back(BoundReport::make("chopper-J", f.center_coherent, s.coherent, 0.0, "central peak dominates"));
    }
    const auto n = f.side_peaks.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double a = f.side_peaks[i].coherent, b = f.side_peaks[n - 1 - i].coherent;
        out.reports.push_back(BoundReport::equality("chopper-J", a / b, 1.0, 1e-3, "symmetric side-peak pair"));
    }
    out.reports.push_back(BoundReport::equality("chopper-Job", f.objective_unimodal ? 1.0 : 0.0, 1.0, 0.0,
                                                "objective spectrum unimodal"));
    out.reports.push_back(BoundReport::make("chopper-Job", f.center_coherent, f.center_objective, 0.0,
                                            "coherent exceeds objective at the carrier"));

    // always-open limit against the Lorentzian 1 / (g^2 + x^2)
    ChopperConfig open = c;
    open.t_open = open.t_chop;
    const auto op = spectra(open, w, 16, false);
    const double g = 0.5 / c.tau;
    double lor = 0.0;
    for (const auto* s : {&op.coherent, &op.objective})
        for (std::size_t i = 0; i < w.count; ++i)
            lor = std::max(lor, std::abs(s->intensity[i] - 1.0 / (g * g + w[i] * w[i])) * g * g);
    out.reports.push_back(BoundReport::equality("chopper-open", lor, 0.0, 1e-6, "always open: Lorentzian, relative to peak"));

    double planch = 0.0;
    for (const auto& win : windows(c)) {
        const double time_norm = c.tau * (std::exp(-win.lo / c.tau) - std::exp(-win.hi / c.tau));
        planch = std::max(planch, std::abs(detail::window_spectral_norm(c, win) / (2 * pi * time_norm) - 1.0));
    }
    out.reports.push_back(BoundReport::equality("chopper-plancherel", planch, 0.0, 1e-6,
                                                "int |F_k|^2 d omega = 2 pi int_Z_k |f0|^2 dt, worst window"));
    out.reports.push_back(hu_consistency(c));

    auto& t = out.table("spectrum", {"detuning", "coherent", "objective"});
    for (std::size_t i = 0; i < w.count; ++i) t.add({w[i], pair.coherent.intensity[i], pair.objective.intensity[i]});
    return out;
}

// ---------------------------------------------------------------- preparation time

inline Result run_moshinsky(const Params& p) {
    Result out;
    const double e0 = p["e0"], hbar = p["hbar"];
    auto& ts = out.table("widths", {"t_prep", "width", "product"});
    double prev = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double tp = p["tprep"] * std::ldexp(1.0, k - 2);
        const double lobe = 2 * pi * hbar / tp;
        const double step = lobe / 200;
        const Axis grid = Axis::make(AxisKind::energy, step, step, static_cast<std::size_t>(std::ceil(3 * e0 / step)));
        const auto m = moshinsky_distribution(e0, tp, grid, hbar);
        out.reports.push_back(m.report);
        ts.add({tp, m.width, tp * m.width});
        if (prev > 0.0)
            out.reports.push_back(BoundReport::equality("moshinsky-halving", m.width / prev, 0.5, 0.025,
                                                        "width ratio under doubling of T"));
        prev = m.width;

        std::vector<double> neg(m.density.size());
        std::transform(m.density.begin(), m.density.end(), neg.begin(), std::negate<>{});
        const auto minima = local_maxima(neg);
        double dev = 0.0;
        for (int j = 1; j <= 3; ++j)
            for (int sgn : {-1, 1}) {
                const double z = e0 + sgn * j * lobe;
                if (z <= grid.start) continue;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t i : minima) best = std::min(best, std::abs(grid[i] - z));
                dev = std::max(dev, best);
            }
        out.reports.push_back(BoundReport::equality("moshinsky-zero", dev, 0.0, step,
                                                    "zeros at E0 +- 2 pi j hbar / T, j = 1..3"));
        if (k == 2) {
            auto& d = out.table("density", {"energy", "density"});
            for (std::size_t i = 0; i < grid.count; ++i)
                if (std::abs(grid[i] - e0) <= 8 * lobe) d.add({grid[i], m.density[i]});
        }
    }
    return out;
}

}  // namespace tempus::cli
