#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <ostream>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "core.hpp"
#include "widths.hpp"

namespace tempus {

/// Default overlap tolerance for "nearly orthogonal".
inline constexpr double default_orthogonality_eps = 1e-3;

/// Energy distribution of a state as point masses on sorted, distinct energies.
struct EnergyDistribution {
    std::vector<double> energy;
    std::vector<double> mass;  // sums to 1

    [[nodiscard]] double mean() const {
        return std::inner_product(energy.begin(), energy.end(), mass.begin(), 0.0);
    }
    [[nodiscard]] double stddev() const {
        const double m = mean();
        double v = 0.0;
        for (std::size_t i = 0; i < energy.size(); ++i) v += mass[i] * (energy[i] - m) * (energy[i] - m);
        return std::sqrt(v);
    }
};

namespace detail {

struct Spectral {
    std::vector<double> energy;  // eigenvalues, unsorted duplicates allowed
    std::vector<double> weight;
};

inline Spectral spectral_weights(const GridState& psi, const HermitianOperator& h) {
    require(h.basis().same_grid(psi.axis()), ErrorCode::domain, "state and Hamiltonian live on different grids");
    const double n2 = psi.norm2();
    require(n2 > 0.0, ErrorCode::validation, "zero state");
    const auto es = eigensystem(h);
    const VectorXcd c = es.vectors.adjoint() * psi.amplitudes();
    Spectral s;
    s.energy.assign(es.values.begin(), es.values.end());
    s.weight.resize(s.energy.size());
    for (std::size_t k = 0; k < s.energy.size(); ++k)
        s.weight[k] = std::norm(c[static_cast<Eigen::Index>(k)]) * psi.axis().step / n2;
    return s;
}

}  // namespace detail

/// Merges eigenvalues closer than `merge_tol` (relative to the spread) and drops masses below `drop`.
inline EnergyDistribution energy_distribution(std::span<const double> energy, std::span<const double> weight,
                                              double merge_tol = 1e-10, double drop = 1e-14) {
    require(energy.size() == weight.size() && !energy.empty(), ErrorCode::validation, "energy/weight size mismatch");
    std::vector<std::size_t> idx(energy.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return energy[a] < energy[b]; });
    const double spread = std::max(1.0, energy[idx.back()] - energy[idx.front()]);
    double total = 0.0;
    for (double w : weight) {
        require(w >= 0.0 && std::isfinite(w), ErrorCode::validation, "weights must be nonnegative");
        total += w;
    }
    require(total > 0.0, ErrorCode::validation, "distribution has no mass");
    EnergyDistribution d;
    for (std::size_t i : idx) {
        if (!d.energy.empty() && energy[i] - d.energy.back() <= merge_tol * spread)
            d.mass.back() += weight[i] / total;
        else {
            d.energy.push_back(energy[i]);
            d.mass.push_back(weight[i] / total);
        }
    }
    EnergyDistribution out;
    for (std::size_t i = 0; i < d.energy.size(); ++i)
        if (d.mass[i] > drop) out.energy.push_back(d.energy[i]), out.mass.push_back(d.mass[i]);
    const double kept = std::accumulate(out.mass.begin(), out.mass.end(), 0.0);
    for (double& m : out.mass) m /= kept;
    return out;
}

inline EnergyDistribution energy_distribution(const GridState& psi, const HermitianOperator& h) {
    const auto s = detail::spectral_weights(psi, h);
    return energy_distribution(s.energy, s.weight);
}

// ---------------------------------------------------------------- orthogonalization

/// Smallest t > 0 with |<psi|psi_t>|^2 <= eps. With eps = 0 the first exact zero is located by
/// minimizing |<psi|psi_t>| around each sampled dip (accepted below 1e-16).
inline double orthogonalization_time(const GridState& psi, const HermitianOperator& h,
                                     double eps = default_orthogonality_eps, std::optional<double> horizon = {}) {
    require(eps >= 0.0 && eps <= 0.05, ErrorCode::parameter, "overlap tolerance must lie in [0, 0.05]");
    const auto s = detail::spectral_weights(psi, h);
    const double hbar = psi.hbar();
    double mean = 0.0;
    for (std::size_t k = 0; k < s.energy.size(); ++k) mean += s.weight[k] * s.energy[k];
    double var = 0.0;
    for (std::size_t k = 0; k < s.energy.size(); ++k) var += s.weight[k] * (s.energy[k] - mean) * (s.energy[k] - mean);
    const double rate = std::sqrt(var) / hbar;  // bound on |d/dt <psi|psi_t>|
    const double scale = std::max(1.0, std::abs(mean)) / hbar;
    if (!(rate > 1e-12 * scale))
        throw Error(ErrorCode::not_attained, "stationary state never becomes orthogonal to itself");

    std::vector<double> omega(s.energy.size());
    for (std::size_t k = 0; k < omega.size(); ++k) omega[k] = (s.energy[k] - mean) / hbar;
    auto amp = [&](double t) {
        cplx a = 0.0;
        for (std::size_t k = 0; k < omega.size(); ++k) a += s.weight[k] * std::exp(cplx(0.0, -omega[k] * t));
        return std::abs(a);
    };
    const double target = eps > 0.0 ? eps : 1e-16;
    const double root = std::sqrt(target);
    const double dt = std::min(1.0 / 64, 0.25 * std::max(std::sqrt(eps), 1e-3)) / rate;
    const double tmax = horizon.value_or(200.0 * (pi / 2) / rate);
    require(tmax > 0.0, ErrorCode::parameter, "horizon must be positive");

    auto crossing = [&](double lo, double hi) {
        if (eps == 0.0) return hi;
        boost::math::tools::eps_tolerance<double> tol(50);
        const auto [a, b] = boost::math::tools::bisect([&](double t) { return amp(t) * amp(t) - eps; }, lo, hi, tol);
        return 0.5 * (a + b);
    };
    double t2 = 0.0, v2 = 1.0, t1 = dt, v1 = amp(dt);
    if (v1 * v1 <= target) return crossing(0.0, dt);
    for (double t = 2 * dt; t <= tmax + dt; t += dt) {
        const double v = amp(t);
        if (v * v <= target && eps > 0.0) return crossing(t1, t);
        if (v1 <= v2 && v1 <= v && v1 <= root + rate * dt) {
            // golden section: |a| has a kink at an exact zero, where parabolic steps stall
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            double lo = t2, hi = t, x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
            double f1 = amp(x1), f2 = amp(x2);
            while (hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi) {
                if (f1 <= f2) hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = amp(x1);
                else lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = amp(x2);
            }
            const double tm = f1 <= f2 ? x1 : x2, vm = std::min(f1, f2);
            if (vm * vm <= target) return crossing(t2, tm);
        }
        t2 = t1, v2 = v1, t1 = t, v1 = v;
    }
    throw Error(ErrorCode::not_attained, "overlap stays above tolerance up to the horizon t = " + std::to_string(tmax));
}

// ---------------------------------------------------------------- overall-width constant C(alpha)

/// Shortest energy interval carrying mass >= alpha; 0 when a single level carries it.
inline double overall_width(const EnergyDistribution& d, double alpha) {
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::parameter, "alpha must lie in (0, 1]");
    const double want = alpha - 1e-13;
    double best = std::numeric_limits<double>::infinity();
    double mass = 0.0;
    for (std::size_t i = 0, j = 0; i < d.energy.size(); ++i) {
        while (j < d.energy.size() && mass < want) mass += d.mass[j++];
        if (mass < want) break;
        best = std::min(best, d.energy[j - 1] - d.energy[i]);
        mass -= d.mass[i];
    }
    return best;
}

inline double clock_c_value(double alpha, double width) {
    if (alpha <= 0.5 || !std::isfinite(width)) return 0.0;
    return 2.0 * std::acos(std::clamp((1.0 - alpha) / alpha, -1.0, 1.0)) / width;
}

inline double clock_c(const EnergyDistribution& d, double alpha) {
    require(alpha >= 0.5 && alpha <= 1.0, ErrorCode::parameter, "alpha must lie in [1/2, 1]");
    if (alpha == 0.5) return 0.0;
    const double w = overall_width(d, alpha);
    if (w == 0.0) return std::numeric_limits<double>::infinity();
    return clock_c_value(alpha, w);
}

inline double clock_c(const Axis& e, std::span<const double> density, double alpha) {
    require(alpha >= 0.5 && alpha <= 1.0, ErrorCode::parameter, "alpha must lie in [1/2, 1]");
    if (alpha == 0.5) return 0.0;
    return clock_c_value(alpha, overall_width(e, density, alpha));
}

struct HuClockBound {
    double alpha0 = 0.0;
    double c = 0.0;      // C(alpha0), inverse energy units
    double bound = 0.0;  // hbar C(alpha0)
    double width = 0.0;  // W(alpha0)
    bool scanned = false;  // dense scan used instead of golden-section
};

/// Discrete distribution: C is piecewise increasing between jumps of W, so the maximum sits at
/// the mass of some interval of levels; all intervals with mass above 1/2 are enumerated.
inline HuClockBound hu_clock_bound(const EnergyDistribution& d, double hbar = 1.0) {
    require(!d.energy.empty(), ErrorCode::validation, "empty distribution");
    HuClockBound out;
    const std::size_t n = d.energy.size();
    for (std::size_t i = 0; i < n; ++i) {
        double mass = 0.0;
        for (std::size_t j = i; j < n; ++j) {
            mass += d.mass[j];
            if (mass <= 0.5) continue;
            const double w = d.energy[j] - d.energy[i];
            if (w == 0.0)
                throw Error(ErrorCode::degenerate, "one level carries more than half the weight: no orthogonalization");
            const double a = std::min(mass, 1.0);
            const double c = clock_c_value(a, w);
            if (c > out.c) out = {a, c, hbar * c, w, false};
        }
    }
    if (!(out.c > 0.0)) throw Error(ErrorCode::degenerate, "C(alpha) vanishes on (1/2, 1]");
    return out;
}

inline HuClockBound hu_clock_bound(const GridState& psi, const HermitianOperator& h) {
    return hu_clock_bound(energy_distribution(psi, h), psi.hbar());
}

/// Sampled density on an energy axis: golden-section on alpha (tolerance 1e-6) after a coarse
/// scan; if the coarse scan is not unimodal, a dense scan replaces it.
inline HuClockBound hu_clock_bound(const Axis& e, std::span<const double> density, double hbar = 1.0,
                                   std::size_t coarse = 65, std::size_t dense = 4097) {
    auto c_of = [&](double a) { return clock_c(e, density, a); };
    std::vector<double> cs(coarse);
    const double da = 0.5 / static_cast<double>(coarse - 1);
    parallel_for(coarse, [&](std::size_t i) { cs[i] = c_of(0.5 + da * static_cast<double>(i)); });
    int turns = 0;
    for (std::size_t i = 2; i < coarse; ++i)
        if ((cs[i] - cs[i - 1]) * (cs[i - 1] - cs[i - 2]) < 0.0) ++turns;
    const auto top = static_cast<std::size_t>(std::max_element(cs.begin(), cs.end()) - cs.begin());
    if (!(cs[top] > 0.0)) throw Error(ErrorCode::degenerate, "overall width unbounded for every alpha < 1");
    HuClockBound out;
    if (turns <= 1) {
        double lo = 0.5 + da * static_cast<double>(top == 0 ? 0 : top - 1);
        double hi = std::min(1.0, 0.5 + da * static_cast<double>(top + 1));
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = c_of(x1), f2 = c_of(x2);
        while (hi - lo > 1e-6) {
            if (f1 >= f2) hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = c_of(x1);
            else lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = c_of(x2);
        }
        out.alpha0 = f1 >= f2 ? x1 : x2;
        out.c = std::max(f1, f2);
        if (cs[top] > out.c) out.alpha0 = 0.5 + da * static_cast<double>(top), out.c = cs[top];
    } else {
        std::vector<double> ds(dense);
        const double step = 0.5 / static_cast<double>(dense - 1);
        parallel_for(dense, [&](std::size_t i) { ds[i] = c_of(0.5 + step * static_cast<double>(i)); });
        const auto k = static_cast<std::size_t>(std::max_element(ds.begin(), ds.end()) - ds.begin());
        out.alpha0 = 0.5 + step * static_cast<double>(k);
        out.c = ds[k];
        out.scanned = true;
    }
    out.bound = hbar * out.c;
    out.width = overall_width(e, density, out.alpha0);
    return out;
}

// ---------------------------------------------------------------- reports

struct ClockReport {
    double delta_t = 0.0;
    double mt_bound = 0.0;  // pi hbar / (2 dH)
    double delta_h = 0.0;
    double eps = 0.0;
    BoundReport mt;
    std::optional<HuClockBound> hu_bound;
    std::optional<BoundReport> hu;

    [[nodiscard]] bool pass() const { return mt.pass && (!hu || hu->pass); }
};

/// Slack allowed by an overlap tolerance eps > 0: the Mandelstam-Tamm bound at overlap eps is
/// hbar arccos(sqrt eps)/dH, and the translation form with rho = 1 - sqrt(eps) replaces (1 - alpha).
inline ClockReport mt_clock_check(const GridState& psi, const HermitianOperator& h,
                                  double eps = default_orthogonality_eps) {
    ClockReport r;
    r.eps = eps;
    r.delta_t = orthogonalization_time(psi, h, eps);
    r.delta_h = energy_distribution(psi, h).stddev();
    const double hb = psi.hbar();
    r.mt_bound = pi * hb / (2 * r.delta_h);
    const double relaxed = hb * std::acos(std::sqrt(eps)) / r.delta_h;
    r.mt = BoundReport::make("MT-clock-ur", r.delta_t, r.mt_bound, r.mt_bound - relaxed + 1e-9 * r.mt_bound,
                             "orthogonalization at overlap " + std::to_string(eps));
    return r;
}

inline ClockReport clock_check(const GridState& psi, const HermitianOperator& h,
                               double eps = default_orthogonality_eps) {
    ClockReport r = mt_clock_check(psi, h, eps);
    try {
        const auto b = hu_clock_bound(psi, h);
        const double a = b.alpha0;
        const double relaxed =
            2.0 * psi.hbar() * std::acos(std::clamp((1.0 - a + std::sqrt(eps)) / a, -1.0, 1.0)) / b.width;
        r.hu_bound = b;
        r.hu = BoundReport::make("HU-clock-ur", r.delta_t, b.bound, b.bound - relaxed + 1e-9 * b.bound,
                                 "alpha0 = " + std::to_string(a));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate) throw;
    }
    return r;
}

inline void write_csv_header(std::ostream& os) {
    os << "delta_t,delta_h,mt_bound,mt_pass,alpha0,hu_bound,hu_pass\n";
}

inline void write_csv(std::ostream& os, const ClockReport& r) {
    os << r.delta_t << ',' << r.delta_h << ',' << r.mt_bound << ',' << r.mt.pass << ',';
    if (r.hu) os << r.hu_bound->alpha0 << ',' << r.hu_bound->bound << ',' << r.hu->pass << '\n';
    else os << ",,\n";
}

/// C(alpha) on a uniform alpha grid over [1/2, 1].
inline void write_c_curve(std::ostream& os, const EnergyDistribution& d, std::size_t points = 101) {
    os << "alpha,C\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double a = 0.5 + 0.5 * static_cast<double>(i) / static_cast<double>(points - 1);
        os << a << ',' << clock_c(d, a) << '\n';
    }
}

}  // namespace tempus
