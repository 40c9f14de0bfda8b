#pragma once

#include <optional>

#include <tempus/core.hpp>
#include <tempus/widths.hpp>

namespace tempus {

// ---------------------------------------------------------------- exponential decay model

struct DecayModel {
    double gamma = 1.0;  // linewidth
    double e0 = 0.0;
    double hbar = 1.0;

    static DecayModel from_lifetime(double tau, double e0, double hbar) {
        require(tau > 0.0 && std::isfinite(tau), ErrorCode::parameter, "lifetime must be positive");
        return DecayModel{hbar / tau, e0, hbar}.validated();
    }
    [[nodiscard]] DecayModel validated() const {
        require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::parameter, "gamma must be positive");
        require(hbar > 0.0 && std::isfinite(hbar), ErrorCode::parameter, "hbar must be positive");
        require(std::isfinite(e0), ErrorCode::parameter, "e0 must be finite");
        return *this;
    }
    [[nodiscard]] double lifetime() const { return hbar / gamma; }
    [[nodiscard]] cplx amplitude(double t) const {
        return std::exp(cplx(-std::abs(t) * gamma / (2.0 * hbar), -t * e0 / hbar));
    }
    /// Transform of `amplitude` under the (2 pi)^{-1} int dt e^{itE/hbar} convention; integrates to hbar.
    [[nodiscard]] double lorentzian(double e) const {
        const double half = 0.5 * gamma;
        return hbar / pi * half / ((e - e0) * (e - e0) + half * half);
    }
    [[nodiscard]] double survival(double t) const { return std::exp(-std::abs(t) * gamma / hbar); }
};

struct DecayReference {
    DecayModel model;
    TemporalAmplitude amplitude;
    VectorXcd closed_form;  // lorentzian on amplitude.energy_axis
    double energy_offset = 0.0;  // add to energy_axis values for absolute energies
    double tau = 0.0;
    BoundReport linewidth;  // tau * Gamma = hbar
    BoundReport transform;  // sampled transform vs closed form, relative to the peak
};

/// With `detuning`, sampling is done with E0 moved to zero and the offset recorded instead.
/// Needed when E0 / Gamma is large enough that absolute energies lose the line shape to rounding.
inline DecayReference decay_reference(const DecayModel& model, double dt_over_tau = 0.01,
                                      std::size_t count = std::size_t{1} << 16, bool detuning = false) {
    DecayModel m = model.validated();
    const double offset = detuning ? m.e0 : 0.0;
    m.e0 -= offset;
    require(dt_over_tau > 0.0 && count >= 16, ErrorCode::parameter, "bad time grid for decay reference");
    const double tau = m.lifetime();
    const Axis t = Axis::centered(AxisKind::time, 0.0, dt_over_tau * tau, count);
    TemporalAmplitude a = fourier_pair_of(t, [&](double v) { return m.amplitude(v); }, m.hbar, m.e0);

    VectorXcd closed(static_cast<Eigen::Index>(a.energy_axis.count));
    double err = 0.0;
    const double peak = m.lorentzian(m.e0);
    for (std::size_t i = 0; i < a.energy_axis.count; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double e = a.energy_axis[i];
        closed[k] = m.lorentzian(e);
        if (std::abs(e - m.e0) <= 3.0 * m.gamma) err = std::max(err, std::abs(a.f_tilde[k] - closed[k]) / peak);
    }
    m.e0 += offset;
    DecayReference r{m, std::move(a), std::move(closed), offset, tau, {}, {}};
    r.linewidth = BoundReport::equality("life-line-ur", tau * m.gamma, m.hbar, 1e-12 * m.hbar);
    r.transform = BoundReport::equality("ft-expon", err, 0.0, 1e-4, "max deviation on E0 +/- 3 Gamma");
    return r;
}

// ---------------------------------------------------------------- Mandelstam-Tamm

struct CharacteristicTime {
    double tau = 0.0;
    double delta_a = 0.0;
    double delta_h = 0.0;
    double rate_commutator = 0.0;  // (i/hbar) <[H, A]>
    double rate_difference = 0.0;  // finite difference of <A>(t)
};

inline CharacteristicTime characteristic_time(const HermitianOperator& A, const GridState& psi,
                                              const HermitianOperator& H, double floor = 1e-9) {
    const double hb = psi.hbar();
    const double norm = psi.norm2();
    require(norm > 0.0, ErrorCode::validation, "zero state");
    const Moments ma = moments(A, psi);
    const Moments mh = moments(H, psi);
    const cplx z = inner(apply(H, psi), apply(A, psi)) / norm;
    const double rate = -2.0 * z.imag() / hb;

    const double scale = (std::abs(ma.mean) + ma.stddev() + 1.0) * (std::abs(mh.mean) + mh.stddev() + 1.0) / hb;
    if (std::abs(rate) <= floor * scale || mh.stddev() == 0.0)
        throw Error(ErrorCode::stationary, "d<A>/dt vanishes at t = 0; characteristic time is infinite");

    // fourth-order central difference on a step well inside hbar / Delta H
    const Propagator U(H);
    const double h = 1e-2 * hb / mh.stddev();
    auto mean_at = [&](double t) { return moments(A, U(psi, t)).mean; };
    const double fd = (8.0 * (mean_at(h) - mean_at(-h)) - (mean_at(2 * h) - mean_at(-2 * h))) / (12.0 * h);

    if (std::abs(fd - rate) > 1e-5 * std::abs(rate))
        throw Error(ErrorCode::conditioning, "commutator and finite-difference rates disagree: " +
                                                 std::to_string(rate) + " vs " + std::to_string(fd));
    return {ma.stddev() / std::abs(rate), ma.stddev(), mh.stddev(), rate, fd};
}

inline BoundReport mandelstam_tamm_check(const HermitianOperator& A, const GridState& psi, const HermitianOperator& H,
                                         double tol = 1e-9) {
    const auto c = characteristic_time(A, psi, H);
    const double rhs = 0.5 * psi.hbar();
    return BoundReport::make("MT-ur", c.tau * c.delta_h, rhs, tol * rhs);
}

// ---------------------------------------------------------------- survival of a property

struct SurvivalCurve {
    Axis time_axis;
    std::vector<double> p;
    std::optional<double> delta_h;  // energy spread of the initial state, when known
    double hbar = 1.0;
    BoundReport cosine_bound;       // p(t) >= cos^2(t Delta H / hbar) on [0, pi hbar / (2 Delta H)]

    /// Curve from given samples, e.g. a model decay law.
    static SurvivalCurve from_values(const Axis& t, std::vector<double> p, double hbar,
                                     std::optional<double> delta_h = std::nullopt) {
        require(p.size() == t.count, ErrorCode::validation, "sample count does not match time axis");
        for (double v : p) require(v >= -1e-12 && v <= 1.0 + 1e-12, ErrorCode::validation, "p outside [0, 1]");
        SurvivalCurve c{t, std::move(p), delta_h, hbar, {}};
        c.cosine_bound = c.cosine_check(1e-9);
        return c;
    }

    [[nodiscard]] BoundReport cosine_check(double tol) const {
        if (!delta_h) return BoundReport::info("MT-p", 0.0, 0.0, "energy spread unknown");
        const double horizon = *delta_h > 0.0 ? 0.5 * pi * hbar / *delta_h : std::numeric_limits<double>::infinity();
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < time_axis.count; ++i) {
            const double t = std::abs(time_axis[i]);
            if (t > horizon) continue;
            const double c = std::cos(t * *delta_h / hbar);
            worst = std::min(worst, p[i] - c * c);
        }
        if (!std::isfinite(worst)) return BoundReport::info("MT-p", 0.0, 0.0, "no samples inside the window");
        return BoundReport::make("MT-p", worst, 0.0, tol, "min over samples of p - cos^2");
    }
};

inline bool is_projection(const HermitianOperator& P, double tol = 1e-10) {
    if (P.is_diagonal()) {
        for (double d : P.diag())
            if (std::abs(d * d - d) > tol) return false;
        return true;
    }
    const MatrixXcd& m = P.matrix();
    return (m * m - m).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

inline SurvivalCurve survival_curve(const GridState& psi0, const HermitianOperator& P, const HermitianOperator& H,
                                    const Axis& time_axis, double tol = 1e-9) {
    require(is_projection(P), ErrorCode::validation, "P is not a projection");
    const double norm = psi0.norm2();
    require(norm > 0.0, ErrorCode::validation, "zero state");
    const double p0 = std::real(inner(psi0, apply(P, psi0))) / norm;
    require(std::abs(p0 - 1.0) <= 1e-6, ErrorCode::precondition,
            "property is not actual at t = 0 (<psi0|P psi0> = " + std::to_string(p0) + ")");

    const Propagator U(H);
    std::vector<double> p(time_axis.count);
    parallel_for(time_axis.count, [&](std::size_t i) {
        const GridState s = U(psi0, time_axis[i]);
        p[i] = std::real(inner(s, apply(P, s))) / norm;
    });
    SurvivalCurve c{time_axis, std::move(p), moments(H, psi0).stddev(), psi0.hbar(), {}};
    c.cosine_bound = c.cosine_check(tol);
    return c;
}

inline void write_csv(std::ostream& os, const SurvivalCurve& c) {
    os << "t,p\n";
    os.precision(17);
    for (std::size_t i = 0; i < c.time_axis.count; ++i) os << c.time_axis[i] << ',' << c.p[i] << '\n';
}

struct Lifetime {
    double value = 0.0;
    BoundReport report;
    bool tail_corrected = false;
    double tail = 0.0;  // analytic tail contribution beyond the horizon
};

namespace detail {

inline std::size_t first_nonnegative(const Axis& t) {
    for (std::size_t i = 0; i < t.count; ++i)
        if (t[i] >= -1e-12 * t.step) return i;
    throw Error(ErrorCode::precondition, "time axis has no samples at t >= 0");
}

}  // namespace detail

/// First time the survival probability falls to one half.
inline Lifetime property_lifetime(const SurvivalCurve& c, double tol = 1e-8) {
    const std::size_t i0 = detail::first_nonnegative(c.time_axis);
    double tau = -1.0;
    for (std::size_t i = i0; i < c.time_axis.count; ++i) {
        if (c.p[i] > 0.5) continue;
        if (i == i0) {
            tau = c.time_axis[i];
        } else {
            const double a = c.p[i - 1], b = c.p[i];
            tau = c.time_axis[i - 1] + (a - 0.5) / (a - b) * c.time_axis.step;
        }
        break;
    }
    if (tau < 0.0)
        throw Error(ErrorCode::not_attained,
                    "survival stays above 1/2 up to t = " + std::to_string(c.time_axis.back()));
    const double rhs = 0.25 * pi * c.hbar;
    if (!c.delta_h || !std::isfinite(*c.delta_h))
        return {tau, BoundReport::info("MT-lifetime", tau, rhs, "energy spread unknown; lifetime only")};
    return {tau, BoundReport::make("MT-lifetime", tau * *c.delta_h, rhs, tol * rhs)};
}

/// Integral of p over [0, inf): trapezoid on the grid, plus an exponential tail fitted on the last tenth.
inline Lifetime grabowski_lifetime(const SurvivalCurve& c, double tail_tol = 1e-10, double tol = 1e-8) {
    const std::size_t i0 = detail::first_nonnegative(c.time_axis);
    require(std::abs(c.time_axis[i0]) <= 1e-9 * c.time_axis.step, ErrorCode::precondition,
            "time axis must contain t = 0");
    const std::size_t n = c.time_axis.count - i0;
    require(n >= 20, ErrorCode::precondition, "too few samples on t >= 0");
    const std::span<const double> p(c.p.data() + i0, n);
    const double dt = c.time_axis.step;

    double integral = 0.5 * (p.front() + p.back());
    for (std::size_t i = 1; i + 1 < n; ++i) integral += p[i];
    integral *= dt;

    Lifetime out;
    if (p.back() > tail_tol) {
        const std::size_t m = std::max<std::size_t>(3, n / 10);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = n - m; i < n; ++i) {
            require(p[i] > 0.0, ErrorCode::divergent, "survival probability touches zero in the tail");
            const double x = static_cast<double>(i) * dt, y = std::log(p[i]);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        const double md = static_cast<double>(m);
        const double slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
        const double icept = (sy - slope * sx) / md;
        double rms = 0.0;
        for (std::size_t i = n - m; i < n; ++i) {
            const double r = std::log(p[i]) - (icept + slope * static_cast<double>(i) * dt);
            rms += r * r;
        }
        rms = std::sqrt(rms / md);
        if (!(slope < 0.0) || rms > 0.05)
            throw Error(ErrorCode::divergent, "survival probability does not decay; the lifetime integral diverges");
        out.tail = p.back() / -slope;
        out.tail_corrected = true;
        integral += out.tail;
    }
    out.value = integral;
    const double rhs = 0.5 * c.hbar;
    const std::string note = out.tail_corrected ? "exponential tail fitted beyond the horizon" : "";
    out.report = (c.delta_h && std::isfinite(*c.delta_h))
                     ? BoundReport::make("Grabo-lifetime", integral * *c.delta_h, rhs, tol * rhs, note)
                     : BoundReport::info("Grabo-lifetime", integral, rhs, "energy spread unknown; lifetime only");
    return out;
}

// ---------------------------------------------------------------- Wigner temporal moments

struct WignerMoments {
    double delta_t = 0.0;                  // |f|^2 on t >= 0
    double delta_e = 0.0;                  // |f~|^2 on E >= 0
    double delta_t_full_line = 0.0;        // |f|^2 on the whole time grid
    double delta_t_autocorrelation = 0.0;  // |g|^2 on t >= 0, g the inverse transform of |f~|^2
    bool infinite_variance = false;
    BoundReport report;
};

namespace detail {

struct HalfLine {
    Moments m;
    bool tail_dominated = false;
    double tail_variance = 0.0;  // variance beyond the grid ends if the density falls off as |x|^-4
};

/// Self-normalized trapezoid moments of `density` over samples with x >= lo.
inline HalfLine density_moments(const Axis& a, std::span<const double> density, double lo) {
    std::size_t i0 = 0;
    while (i0 < a.count && a[i0] < lo - 1e-12 * a.step) ++i0;
    require(a.count - i0 >= 3, ErrorCode::moment, "too few samples for moments");
    auto accumulate = [&](double center, double radius) {
        double m0 = 0, m1 = 0, m2 = 0;
        for (std::size_t i = i0; i < a.count; ++i) {
            const double x = a[i];
            if (std::abs(x - center) > radius) continue;
            const double w = (i == i0 || i + 1 == a.count) ? 0.5 : 1.0;
            m0 += w * density[i];
            m1 += w * density[i] * x;
            m2 += w * density[i] * x * x;
        }
        require(m0 > 0.0, ErrorCode::moment, "distribution has no mass on the half line");
        const double mean = m1 / m0;
        return Moments{mean, std::max(0.0, m2 / m0 - mean * mean)};
    };
    const double inf = std::numeric_limits<double>::infinity();
    const Moments full = accumulate(0.0, inf);
    const double reach = std::max(full.mean - a[i0], a.back() - full.mean);
    const Moments inner = accumulate(full.mean, 0.75 * reach);
    double m0 = 0.0;
    for (std::size_t i = i0; i < a.count; ++i) m0 += density[i];
    const double lo_gap = std::abs(a[i0] - full.mean), hi_gap = std::abs(a.back() - full.mean);
    const double tail = (density[i0] * std::pow(lo_gap, 3) + density[a.count - 1] * std::pow(hi_gap, 3)) / (m0 * a.step);
    return {full, std::abs(full.variance - inner.variance) > 0.02 * full.variance, tail};
}

}  // namespace detail

inline WignerMoments wigner_moments(const TemporalAmplitude& f, double tol = 1e-6) {
    const auto ft = modulus_squared(detail::as_span(f.f));
    const auto fe = modulus_squared(detail::as_span(f.f_tilde));
    const auto t = detail::density_moments(f.time_axis, ft, 0.0);
    const auto e = detail::density_moments(f.energy_axis, fe, 0.0);
    const auto full = detail::density_moments(f.time_axis, ft, -std::numeric_limits<double>::infinity());

    TemporalAmplitude spectral = f;
    for (Eigen::Index i = 0; i < spectral.f_tilde.size(); ++i) spectral.f_tilde[i] = std::norm(f.f_tilde[i]);
    const VectorXcd g = inverse_fourier(spectral);
    const auto auto_t = detail::density_moments(f.time_axis, modulus_squared(detail::as_span(g)), 0.0);

    WignerMoments w;
    w.delta_t = t.m.stddev();
    w.delta_e = e.m.stddev();
    w.delta_t_full_line = full.m.stddev();
    w.delta_t_autocorrelation = auto_t.m.stddev();
    w.infinite_variance = t.tail_dominated || e.tail_dominated;
    const double rhs = 0.5 * f.hbar;
    // first-order effect of the truncated variances on the product
    const double slop = w.delta_e > 0.0 && w.delta_t > 0.0
                            ? 0.5 * (w.delta_t * e.tail_variance / w.delta_e + w.delta_e * t.tail_variance / w.delta_t)
                            : 0.0;
    w.report = w.infinite_variance
                   ? BoundReport::info("Wig-ur", w.delta_t * w.delta_e, rhs, "second moment diverges; relation vacuous")
                   : BoundReport::make("Wig-ur", w.delta_t * w.delta_e, rhs, tol * rhs + slop,
                                       "tolerance includes an |x|^-4 tail estimate beyond the grid");
    return w;
}

}  // namespace tempus
