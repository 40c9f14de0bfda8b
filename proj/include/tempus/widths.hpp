#pragma once

#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "core.hpp"
#include "detail/overall_width_table.hpp"

namespace tempus {

enum class WidthMeasure { variance, fwhm, equivalent, overall, translation };

struct WidthReport {
    WidthMeasure measure = WidthMeasure::variance;
    double value = 0.0;  // may be +inf
    std::vector<double> parameters;
};

/// One checked inequality lhs >= rhs. `asserted == false` marks informational rows.
struct BoundReport {
    std::string tag;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool asserted = true;
    std::string note;

    static BoundReport make(std::string tag, double lhs, double rhs, double tol, std::string note = {}) {
        BoundReport r{std::move(tag), lhs, rhs, lhs - rhs, tol, false, true, std::move(note)};
        r.pass = std::isfinite(r.slack) ? r.slack >= -tol : (lhs == std::numeric_limits<double>::infinity());
        return r;
    }
    /// Equality check |lhs - rhs| <= tol, reported in the same shape.
    static BoundReport equality(std::string tag, double lhs, double rhs, double tol, std::string note = {}) {
        BoundReport r = make(std::move(tag), lhs, rhs, tol, std::move(note));
        r.pass = std::abs(r.slack) <= tol;
        return r;
    }
    static BoundReport info(std::string tag, double lhs, double rhs, std::string note = {}) {
        BoundReport r = make(std::move(tag), lhs, rhs, 0.0, std::move(note));
        r.asserted = false;
        return r;
    }
};

inline double linear_at(const Axis& a, std::span<const double> v, double x) {
    const double u = (x - a.start) / a.step;
    if (u <= 0.0) return v.front();
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= v.size()) return v.back();
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * v[i] + w * v[i + 1];
}

inline cplx linear_at(const Axis& a, std::span<const cplx> v, double x) {
    const double u = (x - a.start) / a.step;
    if (u <= 0.0) return v.front();
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= v.size()) return v.back();
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * v[i] + w * v[i + 1];
}

// ---------------------------------------------------------------- equivalent width

/// W(phi) = phi(x0)^{-1} int phi dx (complex).
inline cplx equivalent_width(const Axis& a, std::span<const cplx> phi, double x0, double floor = 1e-12) {
    require(phi.size() == a.count, ErrorCode::validation, "sample count does not match axis");
    require(x0 >= a.start && x0 <= a.back(), ErrorCode::domain, "reference point outside grid");
    const cplx ref = linear_at(a, phi, x0);
    double peak = 0.0;
    for (const auto& z : phi) peak = std::max(peak, std::abs(z));
    require(std::abs(ref) > floor * std::max(peak, 1e-300), ErrorCode::singular_reference,
            "reference value below floor");
    return riemann(phi, a.step) / ref;
}

inline double equivalent_width(const Axis& a, std::span<const double> phi, double x0, double floor = 1e-12) {
    std::vector<cplx> c(phi.begin(), phi.end());
    return equivalent_width(a, c, x0, floor).real();
}

/// (g-bar x g)(tau) = (2 pi hbar)^{-1} int conj(g(t')) g(t' + tau) dt' on a lag grid centred at 0.
inline std::vector<cplx> autocorrelation(const Axis& a, std::span<const cplx> g, double hbar = 1.0) {
    const std::size_t n = a.count;
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    std::vector<cplx> pad(m, 0.0), spec(m), back(m);
    std::copy(g.begin(), g.end(), pad.begin());
    Eigen::FFT<double> fft;
    fft.fwd(spec, pad);
    for (auto& z : spec) z = std::norm(z);
    fft.inv(back, spec);  // back[k] = sum_j conj(g_j) g_{j+k}, circular on m >= 2n
    std::vector<cplx> out(n);
    const double scale = a.step / (2.0 * pi * hbar);
    for (std::size_t i = 0; i < n; ++i) {
        const long lag = static_cast<long>(i) - static_cast<long>(n / 2);
        const std::size_t idx = lag >= 0 ? static_cast<std::size_t>(lag) : m - static_cast<std::size_t>(-lag);
        out[i] = back[idx] * scale;
    }
    return out;
}

inline Axis lag_axis(const Axis& a) { return Axis::centered(a.kind, 0.0, a.step, a.count); }

// ---------------------------------------------------------------- overall width

/// Length of the shortest interval carrying a fraction alpha of the mass of a sampled density.
/// Samples are cell midpoints; inside a cell the density is taken constant. alpha = 1 returns
/// +inf when the density is positive at the grid edge (support not contained in the grid).
inline double overall_width(std::span<const double> dist, double step, double alpha) {
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::parameter, "overall width needs alpha in (0,1]");
    const std::size_t n = dist.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        require(dist[i] >= 0.0 && std::isfinite(dist[i]), ErrorCode::validation, "density must be nonnegative");
        prefix[i + 1] = prefix[i] + dist[i];
    }
    const double total = prefix[n];
    require(total > 0.0, ErrorCode::validation, "density has no mass");
    if (alpha == 1.0) {
        if (dist.front() > 0.0 || dist.back() > 0.0) return std::numeric_limits<double>::infinity();
        std::size_t lo = 0, hi = n - 1;
        while (dist[lo] == 0.0) ++lo;
        while (dist[hi] == 0.0) --hi;
        return static_cast<double>(hi - lo + 1) * step;
    }
    const double target = alpha * total;
    const double eps = 1e-13 * total;
    // smallest number of whole cells k holding the target mass
    std::size_t best_k = n + 1;
    for (std::size_t i = 0, j = 0; i < n; ++i) {
        if (j < i) j = i;
        while (j < n && prefix[j + 1] - prefix[i] < target - eps) ++j;
        if (j == n) break;
        best_k = std::min(best_k, j - i + 1);
    }
    require(best_k <= n, ErrorCode::coverage, "grid does not hold the requested mass");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + best_k <= n; ++i) {
        const std::size_t j = i + best_k - 1;
        const double mass = prefix[j + 1] - prefix[i];
        if (mass < target - eps) continue;
        const double excess = std::max(0.0, mass - target);
        const double end = std::min(dist[i], dist[j]);
        const double trim = end > 0.0 ? std::min(1.0, excess / end) : 0.0;
        best = std::min(best, (static_cast<double>(best_k) - trim) * step);
    }
    return best;
}

inline double overall_width(const Axis& a, std::span<const double> dist, double alpha) {
    require(dist.size() == a.count, ErrorCode::validation, "sample count does not match axis");
    return overall_width(dist, a.step, alpha);
}

inline std::vector<double> modulus(std::span<const cplx> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
    return out;
}

inline std::vector<double> modulus_squared(std::span<const cplx> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::norm(v[i]);
    return out;
}

// ---------------------------------------------------------------- translation width

/// Smallest t >= 0 with |f(t)| <= 1 - rho, linearly interpolated between bracketing samples.
inline double translation_width(const Axis& t, std::span<const cplx> f, double rho) {
    require(rho > 0.0 && rho <= 1.0, ErrorCode::parameter, "translation width needs rho in (0,1]");
    require(f.size() == t.count, ErrorCode::validation, "sample count does not match axis");
    const std::size_t i0 = t.nearest(0.0);
    require(std::abs(t[i0]) <= 1e-9 * t.step, ErrorCode::domain, "time grid has no sample at t = 0");
    require(std::abs(std::abs(f[i0]) - 1.0) <= 1e-6, ErrorCode::precondition, "|f(0)| must be 1");
    const double level = 1.0 - rho;
    double prev = std::abs(f[i0]);
    for (std::size_t i = i0 + 1; i < t.count; ++i) {
        const double cur = std::abs(f[i]);
        if (cur <= level) {
            const double w = prev > cur ? (prev - level) / (prev - cur) : 1.0;
            return t[i - 1] + w * t.step;
        }
        prev = cur;
    }
    throw Error(ErrorCode::not_attained,
                "|f| stays above 1 - rho up to the grid horizon t = " + std::to_string(t.back()));
}

inline double translation_width(const TemporalAmplitude& f, double rho) {
    return translation_width(f.time_axis, detail::as_span(f.f), rho);
}

/// Half-time convention: survival probability 1/2, i.e. |f| = sqrt(1/2), i.e. rho = 1 - sqrt(1/2).
inline constexpr double half_time_rho = 1.0 - 0.70710678118654752440;

inline double half_time(const TemporalAmplitude& f) { return translation_width(f, half_time_rho); }

// ---------------------------------------------------------------- HU relations

inline double hu_translation_rhs(double alpha, double rho, double hbar) {
    return 2.0 * hbar * std::acos(std::clamp((2.0 - alpha - rho) / alpha, -1.0, 1.0));
}

/// w(f, rho) * W(f~, alpha) >= 2 hbar arccos((2 - alpha - rho)/alpha), with f~ the energy density |f~|.
inline BoundReport check_hu_relation(const TemporalAmplitude& f, double alpha, double rho, double tol = 1e-9) {
    require(alpha > 0.5 && alpha <= 1.0, ErrorCode::parameter, "alpha must lie in (1/2, 1]");
    require(rho > 0.0 && rho <= 1.0, ErrorCode::parameter, "rho must lie in (0, 1]");
    require(rho >= 2.0 * (1.0 - alpha) - 1e-12, ErrorCode::parameter, "validity domain requires rho >= 2(1 - alpha)");
    const double w = translation_width(f, rho);
    const auto dens = modulus(detail::as_span(f.f_tilde));
    const double big_w = overall_width(f.energy_axis, dens, alpha);
    return BoundReport::make("HU-trans-width-ur", w * big_w, hu_translation_rhs(alpha, rho, f.hbar), tol);
}

/// Half-time form with alpha = 0.9.
inline BoundReport check_hu_lifetime(const TemporalAmplitude& f, double tol = 1e-9) {
    BoundReport r = check_hu_relation(f, 0.9, half_time_rho, tol);
    r.tag = "HU-lifetime-ur";
    r.note = "T_1/2 at |f| = sqrt(1/2)";
    return r;
}

/// Calibrated lower envelope C(alpha) in units of hbar (step function from below between nodes).
inline double overall_width_constant(double alpha) {
    require(alpha > 0.5 && alpha <= 1.0, ErrorCode::parameter, "alpha must exceed 1/2");
    double c = 0.0;
    for (const auto& [a, v] : detail::overall_width_table)
        if (a <= alpha + 1e-12) c = v;
    return c;
}

/// W(|chi|^2, alpha) * W(|chi~|^2, alpha) against the calibrated C(alpha).
inline BoundReport check_overall_width_relation(const Axis& t, const VectorXcd& chi, double alpha, double hbar = 1.0,
                                                double tol = 1e-9) {
    require(alpha > 0.5, ErrorCode::parameter, "alpha must exceed 1/2");
    const auto pair = fourier_pair(t, chi, hbar);
    const double wt = overall_width(t, modulus_squared(detail::as_span(chi)), alpha);
    const double we = overall_width(pair.energy_axis, modulus_squared(detail::as_span(pair.f_tilde)), alpha);
    return BoundReport::make("HU-ove-width-ur", wt * we, hbar * overall_width_constant(alpha), tol,
                             "C(alpha) is a numerical calibration");
}

// ---------------------------------------------------------------- equivalent-width relations

/// W(phi) W(phi~) with reference points 0 and 0; equals 2 pi hbar.
inline BoundReport check_equivalent_width_identity(const Axis& t, const VectorXcd& phi, double hbar = 1.0,
                                                   double rel_tol = 1e-4) {
    const auto pair = fourier_pair(t, phi, hbar);
    const cplx w1 = equivalent_width(t, detail::as_span(phi), 0.0);
    const cplx w2 = equivalent_width(pair.energy_axis, detail::as_span(pair.f_tilde), 0.0);
    const double target = 2.0 * pi * hbar;
    return BoundReport::equality("equiv-width-ur", std::abs(w1 * w2), target, rel_tol * target);
}

/// W(|f| x |f|) W(|f~|^2) >= 2 pi hbar with references t = 0 and E = e_ref.
inline BoundReport check_decay_equivalent_width(const TemporalAmplitude& f, double e_ref, double rel_tol = 1e-6) {
    const auto absf = modulus(detail::as_span(f.f));
    const std::vector<cplx> absc(absf.begin(), absf.end());
    const auto ac = autocorrelation(f.time_axis, absc, f.hbar);
    const double w1 = std::abs(equivalent_width(lag_axis(f.time_axis), ac, 0.0));
    const auto s2 = modulus_squared(detail::as_span(f.f_tilde));
    const double w2 = equivalent_width(f.energy_axis, s2, e_ref);
    const double target = 2.0 * pi * f.hbar;
    return BoundReport::make("decay-equiv-width-ur", w1 * w2, target, rel_tol * target);
}

}  // namespace tempus

namespace tempus {

/// Minimum of W(|chi|^2, alpha) W(|chi~|^2, alpha) / hbar over the calibration family:
/// chirped Gaussians exp(-t^2 (1 - i c) / 2) and two-lobe signals g(t - d) + r e^{i theta} g(t + d).
struct CalibrationPoint {
    double alpha = 0.0;
    double value = 0.0;
    std::string argmin;
};

inline CalibrationPoint calibrate_overall_width_constant(double alpha) {
    const Axis t = Axis::centered(AxisKind::time, 0.0, 0.02, 1 << 15);
    CalibrationPoint best{alpha, std::numeric_limits<double>::infinity(), {}};
    auto consider = [&](const VectorXcd& chi, const std::string& label) {
        const auto pair = fourier_pair(t, chi, 1.0);
        const double wt = overall_width(t, modulus_squared(detail::as_span(chi)), alpha);
        const double we = overall_width(pair.energy_axis, modulus_squared(detail::as_span(pair.f_tilde)), alpha);
        if (wt * we < best.value) best = {alpha, wt * we, label};
    };
    for (double c : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
        VectorXcd chi(static_cast<Eigen::Index>(t.count));
        for (std::size_t i = 0; i < t.count; ++i)
            chi[static_cast<Eigen::Index>(i)] = std::exp(-t[i] * t[i] * cplx(1.0, -c) / 2.0);
        consider(chi, "chirp c=" + std::to_string(c));
    }
    for (double d : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0})
        for (double r : {0.1, 0.2, 0.35, 0.5, 0.7, 0.85, 1.0})
            for (double th : {0.0, pi / 2.0, pi}) {
                VectorXcd chi(static_cast<Eigen::Index>(t.count));
                for (std::size_t i = 0; i < t.count; ++i) {
                    const double a = t[i] - d, b = t[i] + d;
                    chi[static_cast<Eigen::Index>(i)] =
                        std::exp(-a * a / 2.0) + r * std::exp(cplx(0.0, th)) * std::exp(-b * b / 2.0);
                }
                consider(chi, "two-lobe d=" + std::to_string(d) + " r=" + std::to_string(r) +
                                  " theta=" + std::to_string(th));
            }
    return best;
}

}  // namespace tempus
