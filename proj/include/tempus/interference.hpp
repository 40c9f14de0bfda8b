#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"
#include "widths.hpp"

namespace tempus {

// ---------------------------------------------------------------- chopper

/// Decaying amplitude e^{-t/2 tau} e^{-i omega0 t} (t >= 0) behind a periodic chopper.
/// Windows are [t0 + k t_chop, t0 + k t_chop + t_open) for k = -1 .. n_windows - 1, clipped to t >= 0.
struct ChopperConfig {
    double tau = 1.0;
    double omega0 = 0.0;
    double t_open = 0.5;
    double t_chop = 1.0;
    int n_windows = 16;
    double t0 = 0.0;

    void validate() const {
        require(tau > 0.0 && std::isfinite(tau), ErrorCode::parameter, "lifetime must be positive");
        require(std::isfinite(omega0), ErrorCode::parameter, "carrier frequency must be finite");
        require(t_open > 0.0 && t_chop > 0.0, ErrorCode::parameter, "chopper times must be positive");
        require(t_open <= t_chop, ErrorCode::parameter, "open time cannot exceed the chopping period");
        require(n_windows >= 1, ErrorCode::parameter, "need at least one window");
        require(t0 >= 0.0 && t0 < t_chop, ErrorCode::parameter, "t0 must lie in [0, t_chop)");
    }
    /// Chopper never closes: the windows merge into [0, inf).
    [[nodiscard]] bool always_open() const { return t_open >= t_chop * (1.0 - 1e-12); }
    [[nodiscard]] ChopperConfig at(double t0_) const {
        ChopperConfig c = *this;
        c.t0 = t0_;
        return c;
    }
};

/// Preset in ns and rad/ns: 57Fe 14.4 keV line, tau = 141 ns. The chopper timing is not an
/// experimental value; t_chop = tau and t_open = t_chop / 3 only place it in the tau-scale regime.
inline ChopperConfig hauser_preset() {
    constexpr double hbar_ev_ns = 6.582119569e-7;  // eV ns
    ChopperConfig c;
    c.tau = 141.0;
    c.omega0 = 14.4e3 / hbar_ev_ns;
    c.t_chop = 141.0;
    c.t_open = c.t_chop / 3.0;
    c.n_windows = 16;
    c.t0 = 0.0;
    return c;
}

struct Window {
    double lo = 0.0;
    double hi = 0.0;  // may be +inf
};

inline std::vector<Window> windows(const ChopperConfig& c) {
    c.validate();
    if (c.always_open()) return {{0.0, std::numeric_limits<double>::infinity()}};
    std::vector<Window> out;
    for (int k = -1; k < c.n_windows; ++k) {
        const double a = c.t0 + k * c.t_chop;
        const double lo = std::max(0.0, a), hi = a + c.t_open;
        if (hi > lo) out.push_back({lo, hi});
    }
    return out;
}

/// int_lo^hi e^{z t} dt with Re z < 0; hi may be +inf.
inline cplx exp_integral(cplx z, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    const cplx ea = std::exp(z * lo);
    if (std::isinf(hi)) return -ea / z;
    const cplx w = z * (hi - lo);
    if (std::abs(w) < 1e-3)
        return ea * (hi - lo) * (1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0 + w * w * w * w / 120.0);
    return ea * (std::exp(w) - 1.0) / z;
}

inline cplx detuned_exponent(const ChopperConfig& c, double detuning) {
    return cplx(-0.5 / c.tau, detuning);
}

/// Window amplitude at detuning omega - omega0.
inline cplx window_transform_detuned(const ChopperConfig& c, const Window& w, double detuning) {
    return exp_integral(detuned_exponent(c, detuning), w.lo, w.hi);
}

/// int_{Z_k} f0(t) e^{i omega t} dt at absolute frequency omega; 0 when the clipped window is empty.
inline cplx window_transform(const ChopperConfig& c, int k, double omega) {
    c.validate();
    require(k >= -1 && k < c.n_windows, ErrorCode::parameter, "window index out of range");
    if (c.always_open()) return k == 0 ? window_transform_detuned(c, {0.0, std::numeric_limits<double>::infinity()}, omega - c.omega0) : 0.0;
    const double a = c.t0 + k * c.t_chop;
    return window_transform_detuned(c, {std::max(0.0, a), a + c.t_open}, omega - c.omega0);
}

/// Transmitted norm sum_k int_{Z_k} |f0|^2 dt.
inline double transmitted_norm(const ChopperConfig& c) {
    double s = 0.0;
    for (const auto& w : windows(c))
        s += c.tau * (std::exp(-w.lo / c.tau) - (std::isinf(w.hi) ? 0.0 : std::exp(-w.hi / c.tau)));
    return s;
}

enum class SpectrumKind { coherent, objective, coherent_averaged, objective_averaged };

inline const char* spectrum_kind_name(SpectrumKind k) {
    switch (k) {
        case SpectrumKind::coherent: return "coherent";
        case SpectrumKind::objective: return "objective";
        case SpectrumKind::coherent_averaged: return "coherent_averaged";
        case SpectrumKind::objective_averaged: return "objective_averaged";
    }
    return "?";
}

/// Intensity on an axis of detunings omega - omega0, up to normalization.
struct Spectrum {
    Axis omega_axis;
    std::vector<double> intensity;
    SpectrumKind kind = SpectrumKind::coherent;
    std::optional<double> t0;
};

/// Axis of detunings spanning `harmonics` chopping harmonics each side.
inline Axis default_omega_axis(const ChopperConfig& c, int harmonics = 6, int per_harmonic = 200) {
    const double h = 2 * pi / c.t_chop;
    const auto n = static_cast<std::size_t>(2 * harmonics * per_harmonic + 1);
    return Axis::centered(AxisKind::energy, 0.0, h / per_harmonic, n);
}

namespace detail {

inline void require_horizon(const ChopperConfig& c) {
    require(c.always_open() || c.n_windows * c.t_chop >= 8.0 * c.tau, ErrorCode::truncation,
            "windows cover fewer than 8 lifetimes");
}

inline void accumulate(const ChopperConfig& c, const Axis& w, std::vector<double>& coh, std::vector<double>& obj,
                       double weight) {
    const auto ws = windows(c);
    for (std::size_t i = 0; i < w.count; ++i) {
        cplx sum = 0.0;
        double inc = 0.0;
        for (const auto& win : ws) {
            const cplx f = window_transform_detuned(c, win, w[i]);
            sum += f;
            inc += std::norm(f);
        }
        coh[i] += weight * std::norm(sum);
        obj[i] += weight * inc;
    }
}

}  // namespace detail

struct SpectrumPair {
    Spectrum coherent;
    Spectrum objective;
    double richardson_change = 0.0;  // max relative move when the t0 sampling is doubled; 0 if not run
};

/// Spectra at the configured t0.
inline SpectrumPair spectra_at(const ChopperConfig& c, const Axis& w) {
    detail::require_horizon(c);
    std::vector<double> coh(w.count, 0.0), obj(w.count, 0.0);
    detail::accumulate(c, w, coh, obj, 1.0);
    return {{w, std::move(coh), SpectrumKind::coherent, c.t0}, {w, std::move(obj), SpectrumKind::objective, c.t0}, 0.0};
}

namespace detail {

inline SpectrumPair averaged(const ChopperConfig& c, const Axis& w, int samples) {
    std::vector<double> coh(w.count, 0.0), obj(w.count, 0.0);
    // each frequency point sums its t0 samples in order: deterministic under any thread count
    const std::size_t chunk = 64;
    const std::size_t blocks = (w.count + chunk - 1) / chunk;
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = b * chunk, n = std::min(chunk, w.count - lo);
        const Axis sub = Axis::make(w.kind, w[lo], w.step, n);
        std::vector<double> c1(n, 0.0), o1(n, 0.0);
        for (int j = 0; j < samples; ++j)
            accumulate(c.at((j + 0.5) * c.t_chop / samples), sub, c1, o1, 1.0 / samples);
        std::copy(c1.begin(), c1.end(), coh.begin() + static_cast<std::ptrdiff_t>(lo));
        std::copy(o1.begin(), o1.end(), obj.begin() + static_cast<std::ptrdiff_t>(lo));
    });
    return {{w, std::move(coh), SpectrumKind::coherent_averaged, {}}, {w, std::move(obj), SpectrumKind::objective_averaged, {}}, 0.0};
}

inline double max_relative_change(const std::vector<double>& a, const std::vector<double>& b) {
    const double scale = *std::max_element(a.begin(), a.end());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return scale > 0.0 ? d / scale : d;
}

}  // namespace detail

/// t0-averaged coherent and objective spectra, midpoint rule over one chopping period.
inline SpectrumPair spectra(const ChopperConfig& c, const Axis& w, int t0_samples = 64, bool richardson = true) {
    c.validate();
    detail::require_horizon(c);
    require(t0_samples >= 16, ErrorCode::parameter, "need at least 16 t0 samples");
    SpectrumPair p = detail::averaged(c, w, t0_samples);
    if (richardson) {
        const SpectrumPair q = detail::averaged(c, w, 2 * t0_samples);
        p.richardson_change = std::max(detail::max_relative_change(p.coherent.intensity, q.coherent.intensity),
                                       detail::max_relative_change(p.objective.intensity, q.objective.intensity));
    }
    return p;
}

// ---------------------------------------------------------------- spectral features

inline std::vector<std::size_t> local_maxima(std::span<const double> v) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
        if (v[i] > v[i - 1] && v[i] >= v[i + 1]) out.push_back(i);
    return out;
}

/// Moving outward from the global maximum, no rise above the running minimum by more than rel_tol * peak.
inline bool unimodal(std::span<const double> v, double rel_tol) {
    const auto top = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    const double allow = rel_tol * v[top];
    double run = v[top];
    for (std::size_t i = top + 1; i < v.size(); ++i) {
        run = std::min(run, v[i]);
        if (v[i] - run > allow) return false;
    }
    run = v[top];
    for (std::size_t i = top; i-- > 0;) {
        run = std::min(run, v[i]);
        if (v[i] - run > allow) return false;
    }
    return true;
}

struct SidePeak {
    int order = 0;
    double expected = 0.0;
    std::optional<double> found;  // detuning of the nearest local maximum within a quarter spacing
    double coherent = 0.0;
    double objective = 0.0;
};

struct SpectrumFeatures {
    std::vector<SidePeak> side_peaks;
    bool side_peaks_resolved = false;  // every peak found within one grid step and above the objective value
    bool objective_unimodal = false;
    double center_coherent = 0.0;
    double center_objective = 0.0;
};

inline constexpr double default_unimodal_tol = 0.05;

inline SpectrumFeatures analyze(const SpectrumPair& p, double t_chop, int orders = 2,
                                double unimodal_tol = default_unimodal_tol) {
    const Axis& w = p.coherent.omega_axis;
    const auto& ic = p.coherent.intensity;
    const auto& io = p.objective.intensity;
    SpectrumFeatures f;
    const auto peaks = local_maxima(ic);
    const double spacing = 2 * pi / t_chop;
    f.side_peaks_resolved = true;
    for (int j = -orders; j <= orders; ++j) {
        if (j == 0) continue;
        SidePeak s{j, j * spacing, {}, 0.0, 0.0};
        double best = 0.25 * spacing;
        for (std::size_t i : peaks)
            if (std::abs(w[i] - s.expected) < best) best = std::abs(w[i] - s.expected), s.found = w[i];
        if (s.found) {
            const std::size_t i = w.nearest(*s.found);
            s.coherent = ic[i];
            s.objective = io[i];
        }
        f.side_peaks_resolved = f.side_peaks_resolved && s.found && std::abs(*s.found - s.expected) <= w.step + 1e-12 &&
                                s.coherent > s.objective;
        f.side_peaks.push_back(s);
    }
    f.objective_unimodal = unimodal(io, unimodal_tol);
    const std::size_t c0 = w.nearest(0.0);
    f.center_coherent = ic[c0];
    f.center_objective = io[c0];
    return f;
}

inline void write_csv(std::ostream& os, const Spectrum& s) {
    for (std::size_t i = 0; i < s.omega_axis.count; ++i)
        os << s.omega_axis[i] << ',' << s.intensity[i] << ',' << spectrum_kind_name(s.kind) << '\n';
}

// ---------------------------------------------------------------- HU consistency

inline constexpr double chopper_hu_alpha = 0.9;

/// Chopped amplitude at cfg.t0 (carrier removed) paired with its spectral intensity through the
/// autocorrelation: the normalized autocorrelation plays the survival amplitude, |f~|^2 the energy density.
inline TemporalAmplitude chopped_autocorrelation_pair(const ChopperConfig& c, double dt = 0.0) {
    c.validate();
    const double span = c.always_open() ? 24.0 * c.tau : c.t0 + c.n_windows * c.t_chop;
    const double step = dt > 0.0 ? dt : std::min(c.t_open, c.tau) / 64.0;
    std::size_t n = 1;
    while (static_cast<double>(n) * step < 2.0 * span) n <<= 1;
    const Axis t = Axis::make(AxisKind::time, 0.0, step, n);
    const auto ws = windows(c);
    std::vector<cplx> f(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = t[i];
        const bool open = std::any_of(ws.begin(), ws.end(), [&](const Window& w) { return ti >= w.lo && ti < w.hi; });
        if (open && ti <= span) f[i] = std::exp(-ti / (2 * c.tau));
    }
    auto ac = autocorrelation(t, f, 1.0);
    const cplx a0 = ac[n / 2];
    VectorXcd g(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) g[static_cast<Eigen::Index>(i)] = ac[i] / a0;
    return fourier_pair(lag_axis(t), g, 1.0, 0.0, 1.0);
}

/// Translation width of the autocorrelation at the half-time level against the overall spectral
/// width W(I, 0.9).
inline BoundReport hu_consistency(const ChopperConfig& c, double tol = 1e-9) {
    const auto pair = chopped_autocorrelation_pair(c);
    BoundReport r = check_hu_relation(pair, chopper_hu_alpha, half_time_rho, tol);
    r.tag = "HU-chopper";
    r.note = "alpha = 0.9, rho = 1 - 1/sqrt(2), t0 = " + std::to_string(c.t0);
    return r;
}

/// Overall width W(I, alpha) of the coherent spectrum at cfg.t0.
inline double spectral_overall_width(const ChopperConfig& c, double alpha = chopper_hu_alpha) {
    const auto pair = chopped_autocorrelation_pair(c);
    return overall_width(pair.energy_axis, modulus(detail::as_span(pair.f_tilde)), alpha);
}

// ---------------------------------------------------------------- preparation time

/// Unnormalized sqrt(E) sin^2((E - E0) T / 2 hbar) / (E - E0)^2, continuous at E = E0.
inline double moshinsky_density(double e, double e0, double t_prep, double hbar = 1.0) {
    const double k = t_prep / (2 * hbar);
    const double u = (e - e0) * k;
    const double sinc = std::abs(u) < 1e-4 ? 1.0 - u * u / 6.0 : std::sin(u) / u;
    return std::sqrt(e) * k * k * sinc * sinc;
}

struct MoshinskyResult {
    Axis energy;
    std::vector<double> density;  // sums to 1 with the grid step
    double width = 0.0;           // W(density, 1/2)
    BoundReport report;
};

inline MoshinskyResult moshinsky_distribution(double e0, double t_prep, const Axis& grid, double hbar = 1.0) {
    require(e0 > 0.0, ErrorCode::parameter, "E0 must be positive");
    require(t_prep > 0.0, ErrorCode::parameter, "preparation time must be positive");
    require(grid.start > 0.0, ErrorCode::domain, "energy grid must lie in (0, inf)");
    const double lobe = 2 * pi * hbar / t_prep;
    require(grid.start <= std::max(e0 - lobe, 0.0) + grid.step && grid.back() >= e0 + lobe, ErrorCode::coverage,
            "grid does not contain the main lobe");
    MoshinskyResult r{grid, std::vector<double>(grid.count), 0.0, {}};
    double total = 0.0;
    for (std::size_t i = 0; i < grid.count; ++i) total += r.density[i] = moshinsky_density(grid[i], e0, t_prep, hbar);
    for (double& d : r.density) d /= total * grid.step;
    r.width = overall_width(grid, r.density, 0.5);
    r.report = BoundReport::make("prep-ur", t_prep * r.width, hbar, 0.0, "Delta E = W(p, 1/2)");
    return r;
}

}  // namespace tempus
