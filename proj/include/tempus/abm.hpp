#pragma once

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <tempus/core.hpp>
#include <tempus/widths.hpp>

// Impulsive momentum-coupling measurement of kinetic energy, solved in the momentum
// representation. Object and probe live on commensurate lattices: the object step is the
// probe step divided by g0*dt, so the confidence function sits on the object lattice and every
// convolution below is a finite lattice sum.

namespace tempus {

struct AbmConfig {
    double m = 1.0;   // object mass
    double M = 1.0;   // probe mass
    double g0 = 1.0;  // coupling strength
    double dt = 1.0;  // interaction duration
    GridState probe;  // phi(p_y)
    GridState object; // varphi(p_x)
    double hbar = 1.0;

    [[nodiscard]] double coupling() const noexcept { return g0 * dt; }
};

struct GaussianAbmSpec {
    double m = 1.0, M = 1.0, g0 = 1.0, dt = 1.0;
    double p0 = 0.0;       // object mean momentum
    double sigma_x = 1.0;  // object momentum std
    double sigma_y = 1.0;  // probe momentum std
    double hbar = 1.0;
    int samples_per_sigma_y = 16;  // per sigma_y, or per g0 dt sigma_x when that is narrower
    double extent = 8.0;   // grid half-width in units of the std
};

namespace detail {

inline long lattice_offset(const Axis& a, const char* what) {
    const double k = a.start / a.step;
    require(std::abs(k - std::round(k)) <= 1e-6, ErrorCode::resolution,
            std::string(what) + " grid is not aligned with p = 0");
    return std::lround(k);
}

struct AbmLattice {
    double h = 0.0;           // object momentum step
    long x0 = 0;              // object sample j sits at (x0 + j) h
    long q0 = 0;              // confidence sample l sits at (q0 + l) h
    std::vector<double> w;    // |varphi_j|^2 h, sums to 1
    std::vector<double> f;    // f_l h, sums to 1
    std::vector<double> cum;  // cum[l] = f_0 + ... + f_{l-1}

    [[nodiscard]] double p(std::size_t j) const { return static_cast<double>(x0 + static_cast<long>(j)) * h; }
    [[nodiscard]] double q(std::size_t l) const { return static_cast<double>(q0 + static_cast<long>(l)) * h; }
    [[nodiscard]] long k_lo() const { return x0 - q0 - static_cast<long>(f.size()) + 1; }
    [[nodiscard]] long k_hi() const { return x0 + static_cast<long>(w.size()) - 1 - q0; }

    /// Sum of f_l over l with outcome index K = x0 + j - q0 - l in [kmin, kmax].
    [[nodiscard]] double window(std::size_t j, long kmin, long kmax) const {
        if (kmin > kmax) return 0.0;
        const long base = x0 + static_cast<long>(j) - q0;
        const long lo = std::max<long>(0, base - kmax);
        const long hi = std::min<long>(static_cast<long>(f.size()) - 1, base - kmin);
        if (lo > hi) return 0.0;
        return cum[static_cast<std::size_t>(hi + 1)] - cum[static_cast<std::size_t>(lo)];
    }
};

/// Lattice indices K with K h in [lo, hi), clamped to [clamp_lo, clamp_hi].
inline std::pair<long, long> index_range(const Interval& r, double h, long clamp_lo, long clamp_hi) {
    constexpr double snap = 1e-9;
    const long kmin = std::isfinite(r.lo) ? static_cast<long>(std::ceil(r.lo / h - snap)) : clamp_lo;
    const long kmax = std::isfinite(r.hi) ? static_cast<long>(std::ceil(r.hi / h - snap)) - 1 : clamp_hi;
    return {std::max(kmin, clamp_lo), std::min(kmax, clamp_hi)};
}

inline AbmLattice abm_lattice(const AbmConfig& c) {
    require(c.m > 0 && c.M > 0 && c.g0 > 0 && c.dt > 0 && c.hbar > 0, ErrorCode::parameter,
            "masses, coupling, duration and hbar must be positive");
    require(std::isfinite(c.m * c.M * c.g0 * c.dt * c.hbar), ErrorCode::parameter, "non-finite parameter");
    require(c.probe.axis().kind == AxisKind::momentum && c.object.axis().kind == AxisKind::momentum,
            ErrorCode::domain, "probe and object must be momentum-space states");
    require(c.probe.is_normalized(1e-8) && c.object.is_normalized(1e-8), ErrorCode::validation,
            "probe and object must be normalized");
    const double hy = c.probe.axis().step, h = c.object.axis().step;
    require(std::abs(h * c.coupling() - hy) <= 1e-9 * hy, ErrorCode::resolution,
            "object grid step must equal probe step / (g0 dt)");

    AbmLattice L;
    L.h = h;
    L.x0 = lattice_offset(c.object.axis(), "object");
    L.q0 = lattice_offset(c.probe.axis(), "probe");
    const auto dx = c.object.density();
    const auto dy = c.probe.density();
    const double nx = c.object.norm2(), ny = c.probe.norm2();
    L.w.resize(dx.size());
    for (std::size_t j = 0; j < dx.size(); ++j) L.w[j] = dx[j] * h / nx;
    L.f.resize(dy.size());
    L.cum.assign(dy.size() + 1, 0.0);
    for (std::size_t l = 0; l < dy.size(); ++l) {
        L.f[l] = dy[l] * hy / ny;
        L.cum[l + 1] = L.cum[l] + L.f[l];
    }
    return L;
}

}  // namespace detail

inline AbmConfig gaussian_abm(const GaussianAbmSpec& s) {
    require(s.sigma_x > 0 && s.sigma_y > 0 && s.samples_per_sigma_y >= 8 && s.extent >= 4, ErrorCode::parameter,
            "bad Gaussian ABM grid specification");
    const double g = s.g0 * s.dt;
    require(g > 0 && std::isfinite(g), ErrorCode::parameter, "g0 dt must be positive");
    // shared lattice: the object step is hy / g, so hy must resolve both packets
    const double hy = std::min(s.sigma_y, g * s.sigma_x) / s.samples_per_sigma_y;
    const long ny = static_cast<long>(std::ceil(s.extent * s.sigma_y / hy - 1e-9));
    const Axis y = Axis::make(AxisKind::momentum, -static_cast<double>(ny) * hy, hy, static_cast<std::size_t>(2 * ny + 1));
    const double h = hy / g;
    const long klo = static_cast<long>(std::floor((s.p0 - s.extent * s.sigma_x) / h));
    const long khi = static_cast<long>(std::ceil((s.p0 + s.extent * s.sigma_x) / h));
    require(khi - klo < 20'000'000, ErrorCode::resolution, "object lattice too large for this coupling");
    const Axis x = Axis::make(AxisKind::momentum, static_cast<double>(klo) * h, h, static_cast<std::size_t>(khi - klo + 1));
    auto probe = GridState::from_function(y, [&](double p) { return std::exp(-p * p / (4 * s.sigma_y * s.sigma_y)); }, s.hbar);
    auto object = GridState::from_function(x, [&](double p) {
        return std::exp(-(p - s.p0) * (p - s.p0) / (4 * s.sigma_x * s.sigma_x));
    }, s.hbar);
    return AbmConfig{s.m, s.M, s.g0, s.dt, probe.normalized(), object.normalized(), s.hbar};
}

// ---------------------------------------------------------------- confidence function

struct ConfidenceFunction {
    Axis axis;
    std::vector<double> values;
    double mean = 0.0;
    double variance = 0.0;  // Var(P_y) / (g0 dt)^2
    bool symmetric = false;
};

inline ConfidenceFunction confidence_function(const AbmConfig& c) {
    const auto L = detail::abm_lattice(c);
    const double g = c.coupling();
    const Axis& y = c.probe.axis();

    const auto dy = c.probe.density();
    Moments my;
    {
        double m0 = 0, m1 = 0, m2 = 0;
        for (std::size_t l = 0; l < dy.size(); ++l) {
            m0 += dy[l];
            m1 += dy[l] * y[l];
            m2 += dy[l] * y[l] * y[l];
        }
        my.mean = m1 / m0;
        my.variance = m2 / m0 - my.mean * my.mean;
    }
    std::size_t covered = 0;
    for (std::size_t l = 0; l < dy.size(); ++l)
        if (std::abs(y[l] - my.mean) <= 4.0 * my.stddev()) ++covered;
    require(covered >= 32, ErrorCode::resolution, "probe grid resolves +/-4 std with fewer than 32 samples");

    ConfidenceFunction cf{Axis::make(AxisKind::momentum, static_cast<double>(L.q0) * L.h, L.h, L.f.size()), {}, 0, 0, false};
    cf.values.resize(L.f.size());
    double m1 = 0, m2 = 0, peak = 0;
    for (std::size_t l = 0; l < L.f.size(); ++l) {
        cf.values[l] = L.f[l] / L.h;
        m1 += L.f[l] * L.q(l);
        m2 += L.f[l] * L.q(l) * L.q(l);
        peak = std::max(peak, cf.values[l]);
    }
    cf.mean = m1;
    cf.variance = my.variance / (g * g);
    const double direct = m2 - m1 * m1;
    require(std::abs(direct - cf.variance) <= 1e-8 * cf.variance, ErrorCode::conditioning,
            "confidence variance disagrees with the probe variance");

    double asym = 0.0;
    for (std::size_t l = 0; l < L.f.size(); ++l) {
        const long mirror = -2 * L.q0 - static_cast<long>(l);
        const double other = (mirror >= 0 && mirror < static_cast<long>(L.f.size()))
                                 ? cf.values[static_cast<std::size_t>(mirror)] : 0.0;
        asym = std::max(asym, std::abs(cf.values[l] - other));
    }
    cf.symmetric = asym <= 1e-10 * peak;
    return cf;
}

// ---------------------------------------------------------------- POVMs

/// POVM whose elements are diagonal in the object momentum basis.
struct DiagonalPovm {
    Axis basis;
    std::vector<Interval> bins;
    std::vector<VectorXd> elements;

    [[nodiscard]] double min_entry() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& e : elements) m = std::min(m, e.minCoeff());
        return m;
    }
    [[nodiscard]] VectorXd total() const {
        VectorXd s = VectorXd::Zero(static_cast<Eigen::Index>(basis.count));
        for (const auto& e : elements) s += e;
        return s;
    }
    [[nodiscard]] double normalization_defect() const { return (total().array() - 1.0).abs().maxCoeff(); }

    /// Largest |E(p) - E(-p)| over mirrored grid points.
    [[nodiscard]] double parity_defect() const {
        const long x0 = detail::lattice_offset(basis, "basis");
        double d = 0.0;
        for (const auto& e : elements)
            for (std::size_t j = 0; j < basis.count; ++j) {
                const long mirror = -2 * x0 - static_cast<long>(j);
                if (mirror < 0 || mirror >= static_cast<long>(basis.count)) continue;
                d = std::max(d, std::abs(e[static_cast<Eigen::Index>(j)] - e[mirror]));
            }
        return d;
    }
};

/// Unsharp momentum observable: element(R)(p) = sum over q of f(q) [p - q in R].
inline DiagonalPovm momentum_povm(const AbmConfig& c, std::vector<Interval> bins) {
    require_partition(bins);
    const auto L = detail::abm_lattice(c);
    DiagonalPovm out{c.object.axis(), std::move(bins), {}};
    out.elements.resize(out.bins.size());
    parallel_for(out.bins.size(), [&](std::size_t b) {
        const auto [kmin, kmax] = detail::index_range(out.bins[b], L.h, L.k_lo(), L.k_hi());
        VectorXd e(static_cast<Eigen::Index>(L.w.size()));
        for (std::size_t j = 0; j < L.w.size(); ++j) e[static_cast<Eigen::Index>(j)] = L.window(j, kmin, kmax);
        out.elements[b] = std::move(e);
    });
    return out;
}

/// Bins of width `width` (in lattice cells) with edges on cell boundaries, covering every reachable outcome.
inline std::vector<Interval> momentum_outcome_bins(const AbmConfig& c, long width = 1) {
    require(width >= 1, ErrorCode::parameter, "bin width must be at least one cell");
    const auto L = detail::abm_lattice(c);
    std::vector<Interval> bins;
    for (long k = L.k_lo(); k <= L.k_hi(); k += width)
        bins.push_back({(static_cast<double>(k) - 0.5) * L.h, (static_cast<double>(k + width) - 0.5) * L.h});
    return bins;
}

/// Smeared kinetic energy: element(Z) = element of the momentum POVM on the preimage of Z under p^2/2m.
inline DiagonalPovm energy_povm(const AbmConfig& c, std::vector<Interval> bins) {
    require_partition(bins);
    require(bins.front().lo >= 0.0, ErrorCode::partition, "energy bins must lie in [0, inf)");
    require(confidence_function(c).symmetric, ErrorCode::precondition,
            "energy POVM needs an inversion-symmetric confidence function");
    const auto L = detail::abm_lattice(c);
    DiagonalPovm out{c.object.axis(), std::move(bins), {}};
    out.elements.resize(out.bins.size());
    const long reach = std::max(std::abs(L.k_lo()), std::abs(L.k_hi()));
    parallel_for(out.bins.size(), [&](std::size_t b) {
        const Interval& z = out.bins[b];
        const Interval u{std::sqrt(2 * c.m * z.lo), std::sqrt(2 * c.m * z.hi)};
        const auto [kmin, kmax] = detail::index_range(u, L.h, 0, reach);
        VectorXd e(static_cast<Eigen::Index>(L.w.size()));
        for (std::size_t j = 0; j < L.w.size(); ++j) {
            double v = L.window(j, kmin, kmax) + L.window(j, -kmax, -kmin);
            if (kmin == 0 && kmax >= 0) v -= L.window(j, 0, 0);
            e[static_cast<Eigen::Index>(j)] = v;
        }
        out.elements[b] = std::move(e);
    });
    return out;
}

/// Energy bins whose edges map to lattice cell boundaries in |p|, covering all reachable outcomes.
inline std::vector<Interval> energy_outcome_bins(const AbmConfig& c, long width = 1) {
    require(width >= 1, ErrorCode::parameter, "bin width must be at least one cell");
    const auto L = detail::abm_lattice(c);
    const long reach = std::max(std::abs(L.k_lo()), std::abs(L.k_hi()));
    std::vector<Interval> bins;
    auto edge = [&](long k) {
        if (k <= 0) return 0.0;
        const double u = (static_cast<double>(k) - 0.5) * L.h;
        return u * u / (2 * c.m);
    };
    for (long k = 0; k <= reach; k += width) bins.push_back({edge(k), edge(k + width)});
    return bins;
}

enum class KernelForm {
    exact,    // both branches p -/+ sqrt(2 m e)
    printed,  // the single branch f(sqrt(2 m H0) - sqrt(2 m e))
};

/// Element of Z evaluated from the energy-density kernel by quadrature, one value per object sample.
inline VectorXd energy_kernel_element(const AbmConfig& c, const Interval& z, KernelForm form) {
    require(z.lo >= 0.0 && z.lo < z.hi, ErrorCode::partition, "energy bin must lie in [0, inf)");
    const auto L = detail::abm_lattice(c);
    const auto cf = confidence_function(c);
    const boost::math::interpolators::cardinal_cubic_b_spline<double> spline(
        cf.values.begin(), cf.values.end(), cf.axis.start, cf.axis.step);
    const double qlo = cf.axis.start, qhi = cf.axis.back();
    auto f = [&](double q) { return (q < qlo || q > qhi) ? 0.0 : std::max(0.0, spline(q)); };

    VectorXd out(static_cast<Eigen::Index>(L.w.size()));
    parallel_for(L.w.size(), [&](std::size_t j) {
        const double p = std::abs(L.p(j));
        auto integrand = [&](double e) {
            if (e <= 0.0) return 0.0;
            const double u = std::sqrt(2 * c.m * e);
            const double k = std::sqrt(c.m / (2 * e));
            return form == KernelForm::exact ? k * (f(p - u) + f(p + u)) : k * f(p - u);
        };
        // segment at the support edges and the peak of the first branch
        const double qmax = std::max(std::abs(qlo), std::abs(qhi));
        std::vector<double> cuts{z.lo};
        for (double u : {p - qmax, p, p + qmax, qmax - p}) {
            if (u <= 0.0) continue;
            const double e = u * u / (2 * c.m);
            if (e > z.lo && e < z.hi) cuts.push_back(e);
        }
        const double last = (p + qmax) * (p + qmax) / (2 * c.m);
        cuts.push_back(std::min(z.hi, last));
        std::sort(cuts.begin(), cuts.end());
        double acc = 0.0;
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            const double a = cuts[s], b = cuts[s + 1];
            if (!(b > a)) continue;
            if (a == 0.0) {
                thread_local boost::math::quadrature::tanh_sinh<double> ts;
                acc += ts.integrate(integrand, a, b);
            } else {
                acc += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, b, 10, 1e-11);
            }
        }
        out[static_cast<Eigen::Index>(j)] = acc;
    });
    return out;
}

// ---------------------------------------------------------------- statistics

struct EnergyStatistics {
    double mean = 0.0;             // closed form
    double variance = 0.0;         // closed form, three terms
    double mean_direct = 0.0;      // moments of the outcome distribution
    double variance_direct = 0.0;
    double object_variance = 0.0;  // Var(H0) in the object state
    double distortion = 0.0;       // <P_y^2/2m> / (g0 dt)^2
    double quartic_term = 0.0;     // Var(P_y^2/2m) / (g0 dt)^4
    double cross_term = 0.0;       // 4 <H0> <P_y^2/2m> / (g0 dt)^2
    BoundReport mean_report;
    BoundReport variance_report;

    [[nodiscard]] double inaccuracy() const { return quartic_term + cross_term; }
};

inline EnergyStatistics energy_statistics(const AbmConfig& c, double rel_tol = 1e-6) {
    const auto L = detail::abm_lattice(c);
    require(confidence_function(c).symmetric, ErrorCode::precondition,
            "closed-form statistics need an inversion-symmetric confidence function");
    const double g = c.coupling();
    const double two_m = 2 * c.m;

    double h0 = 0, h0sq = 0;
    for (std::size_t j = 0; j < L.w.size(); ++j) {
        const double e = L.p(j) * L.p(j) / two_m;
        h0 += L.w[j] * e;
        h0sq += L.w[j] * e * e;
    }
    const double var_h0 = h0sq - h0 * h0;

    const Axis& y = c.probe.axis();
    const auto dy = c.probe.density();
    const double ny = c.probe.norm2();
    double a = 0, a2 = 0;
    for (std::size_t l = 0; l < dy.size(); ++l) {
        const double e = y[l] * y[l] / two_m, wt = dy[l] * y.step / ny;
        a += wt * e;
        a2 += wt * e * e;
    }
    const double var_a = a2 - a * a;
    require(std::isfinite(a2), ErrorCode::moment, "probe second moment diverges");

    EnergyStatistics s;
    s.object_variance = var_h0;
    s.distortion = a / (g * g);
    s.quartic_term = var_a / std::pow(g, 4);
    s.cross_term = 4.0 * h0 * a / (g * g);
    s.mean = h0 + s.distortion;
    s.variance = var_h0 + s.quartic_term + s.cross_term;

    // outcome r = p - q; per-row partial sums keep the reduction order fixed
    std::vector<double> row(L.w.size());
    parallel_for(L.w.size(), [&](std::size_t j) {
        double acc = 0;
        for (std::size_t l = 0; l < L.f.size(); ++l) {
            const double r = L.p(j) - L.q(l);
            acc += L.f[l] * r * r / two_m;
        }
        row[j] = L.w[j] * acc;
    });
    double mean = 0;
    for (double v : row) mean += v;
    parallel_for(L.w.size(), [&](std::size_t j) {
        double acc = 0;
        for (std::size_t l = 0; l < L.f.size(); ++l) {
            const double r = L.p(j) - L.q(l);
            const double d = r * r / two_m - mean;
            acc += L.f[l] * d * d;
        }
        row[j] = L.w[j] * acc;
    });
    double var = 0;
    for (double v : row) var += v;
    s.mean_direct = mean;
    s.variance_direct = var;
    s.mean_report = BoundReport::equality("H-val", mean, s.mean, rel_tol * std::abs(s.mean));
    s.variance_report = BoundReport::equality("H-var", var, s.variance, rel_tol * s.variance);
    return s;
}

// ---------------------------------------------------------------- post-measurement states

/// gamma(p_x, p_y, dt) from integrating the probe phase along p_y(s) = p_y + g0 p_x (dt - s).
inline double abm_gamma(const AbmConfig& c, double px, double py) {
    const double g0 = c.g0, t = c.dt;
    return g0 * g0 * px * px * t * t * t / (6 * c.M) + px * py * g0 * t * t / (2 * c.M) + py * py * t / (2 * c.M);
}

/// Diagonal (in p_x) of the Kraus operator A_r for outcome r = K h.
inline VectorXcd kraus_multiplier(const AbmConfig& c, long K) {
    const auto L = detail::abm_lattice(c);
    const double g = c.coupling(), hb = c.hbar;
    const double r = static_cast<double>(K) * L.h;
    VectorXcd a = VectorXcd::Zero(static_cast<Eigen::Index>(L.w.size()));
    for (std::size_t j = 0; j < L.w.size(); ++j) {
        const long l = L.x0 + static_cast<long>(j) - K - L.q0;
        if (l < 0 || l >= static_cast<long>(L.f.size())) continue;
        const double p = L.p(j);
        const double phase = -p * p * c.dt / (2 * c.m * hb) - abm_gamma(c, p, -r * g) / hb;
        a[static_cast<Eigen::Index>(j)] = std::sqrt(g) * std::exp(cplx(0.0, phase)) * c.probe[static_cast<std::size_t>(l)];
    }
    return a;
}

struct ConditionalState {
    Ensemble rho;                      // unnormalized members A_r varphi, weight = lattice step
    std::vector<double> momentum;      // <p|rho_R|p>
    double probability = 0.0;          // tr rho_R
    double diagonal_deviation = 0.0;   // vs element(R)(p) |varphi(p)|^2
    double reproducibility = 0.0;      // fidelity of normalized momentum distributions
};

inline ConditionalState conditional_state(const AbmConfig& c, const Interval& R) {
    const auto L = detail::abm_lattice(c);
    const auto [kmin, kmax] = detail::index_range(R, L.h, L.k_lo(), L.k_hi());
    require(kmax >= kmin, ErrorCode::conditioning, "outcome interval contains no reachable outcome");
    require(static_cast<double>(kmax - kmin + 1) * static_cast<double>(L.w.size()) <= 5e7, ErrorCode::resolution,
            "conditional ensemble too large");

    ConditionalState out;
    const std::size_t n = L.w.size();
    out.momentum.assign(n, 0.0);
    const VectorXcd& phi = c.object.amplitudes();
    for (long K = kmin; K <= kmax; ++K) {
        VectorXcd v = kraus_multiplier(c, K).cwiseProduct(phi);
        if (v.squaredNorm() == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) out.momentum[j] += L.h * std::norm(v[static_cast<Eigen::Index>(j)]);
        out.rho.members.emplace_back(L.h, GridState(c.object.axis(), std::move(v), c.hbar));
    }
    for (std::size_t j = 0; j < n; ++j) out.probability += out.momentum[j] * L.h;
    require(out.probability > 1e-300, ErrorCode::conditioning, "outcome interval has zero probability");

    for (std::size_t j = 0; j < n; ++j) {
        const double expect = L.window(j, kmin, kmax) * std::norm(phi[static_cast<Eigen::Index>(j)]);
        out.diagonal_deviation = std::max(out.diagonal_deviation, std::abs(out.momentum[j] - expect));
    }
    double bc = 0.0;
    for (std::size_t j = 0; j < n; ++j) bc += std::sqrt(out.momentum[j] / out.probability * L.w[j] / L.h) * L.h;
    out.reproducibility = bc * bc;
    return out;
}

/// Object momentum spread small against the confidence width: std(varphi) <= std(f) / 10.
inline bool is_near_eigenstate(const AbmConfig& c) {
    const auto L = detail::abm_lattice(c);
    double m1 = 0, m2 = 0;
    for (std::size_t j = 0; j < L.w.size(); ++j) {
        m1 += L.w[j] * L.p(j);
        m2 += L.w[j] * L.p(j) * L.p(j);
    }
    return std::sqrt(std::max(0.0, m2 - m1 * m1)) <= std::sqrt(confidence_function(c).variance) / 10.0;
}

}  // namespace tempus
