#pragma once

#include <functional>
#include <optional>

#include <boost/math/quadrature/gauss.hpp>

#include <tempus/core.hpp>
#include <tempus/widths.hpp>

namespace tempus {

// ---------------------------------------------------------------- generic time POVM

/// Time POVM on uniform outcome bins. Bin i is [c_i - w/2, c_i + w/2) with c_i = outcome_axis[i].
struct Povm {
    Axis outcome_axis;
    Interval domain;
    Axis basis;
    std::vector<HermitianOperator> elements;
    bool normalized = false;
    bool periodic = false;   // domain is a circle; translations wrap
    bool full_line = false;  // stands in for Z0 = R (grid-limited)

    [[nodiscard]] std::size_t size() const noexcept { return elements.size(); }
    [[nodiscard]] double width() const noexcept { return outcome_axis.step; }
    [[nodiscard]] Interval bin(std::size_t i) const {
        return {outcome_axis[i] - 0.5 * width(), outcome_axis[i] + 0.5 * width()};
    }
    [[nodiscard]] MatrixXcd total() const {
        const auto n = static_cast<Eigen::Index>(basis.count);
        MatrixXcd s = MatrixXcd::Zero(n, n);
        for (const auto& e : elements) s += e.to_dense();
        return s;
    }
    [[nodiscard]] double min_eigenvalue() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& e : elements) m = std::min(m, eigensystem(e).values.minCoeff());
        return m;
    }
    /// Largest |eigenvalue| of sum(F) - I.
    [[nodiscard]] double normalization_defect() const {
        MatrixXcd d = total();
        d.diagonal().array() -= 1.0;
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    /// Positivity at -1e-10, sum <= I + 1e-8, equality when flagged normalized.
    void validate() const {
        require(!elements.empty() && elements.size() == outcome_axis.count, ErrorCode::validation,
                "one element per outcome bin");
        require(min_eigenvalue() >= -1e-10, ErrorCode::validation, "POVM element is not positive");
        MatrixXcd d = total();
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
        require(es.eigenvalues().maxCoeff() <= 1.0 + 1e-8, ErrorCode::validation, "POVM sum exceeds identity");
        if (normalized) require(normalization_defect() <= 1e-8, ErrorCode::validation, "POVM is not normalized");
    }
};

namespace detail {

inline double frobenius(const MatrixXcd& m) { return m.norm(); }

inline MatrixXcd conjugated(const MatrixXcd& u, const HermitianOperator& f) {
    if (!f.is_diagonal()) return u * f.matrix() * u.adjoint();
    MatrixXcd r = MatrixXcd::Zero(u.rows(), u.rows());
    for (Eigen::Index j = 0; j < f.diag().size(); ++j)
        if (f.diag()[j] != 0.0) r.noalias() += f.diag()[j] * u.col(j) * u.col(j).adjoint();
    return r;
}

}  // namespace detail

struct CovarianceCheck {
    double max_defect = 0.0;   // Frobenius norm of U_t F(Z) U_t^-1 - F(Z - t)
    bool interpolated = false; // some shift was not a whole number of bins
    std::size_t compared = 0;
};

/// U_t F(Z) U_t^-1 against F(Z - t) for every bin and shift; `unitary(t)` returns U_t = exp(-itH/hbar).
inline CovarianceCheck check_covariance(const Povm& povm, const std::function<MatrixXcd(double)>& unitary,
                                        std::span<const double> shifts) {
    CovarianceCheck out;
    const auto n = static_cast<long>(povm.size());
    for (double s : shifts) {
        require(std::isfinite(s), ErrorCode::parameter, "shift must be finite");
        const double k = s / povm.width();
        const double k0 = std::floor(k + 1e-9);
        const double frac = std::max(0.0, k - k0);
        const bool whole = frac <= 1e-9;
        out.interpolated |= !whole;
        const MatrixXcd u = unitary(s);
        auto index = [&](long i) -> std::optional<long> {
            if (povm.periodic) return ((i % n) + n) % n;
            if (i < 0 || i >= n) return std::nullopt;
            return i;
        };
        for (long i = 0; i < n; ++i) {
            const auto a = index(i - static_cast<long>(k0));
            const auto b = whole ? a : index(i - static_cast<long>(k0) - 1);
            if (!a || !b) continue;
            MatrixXcd target = povm.elements[static_cast<std::size_t>(*a)].to_dense();
            if (!whole)
                target = (1.0 - frac) * target + frac * povm.elements[static_cast<std::size_t>(*b)].to_dense();
            const double d = detail::frobenius(detail::conjugated(u, povm.elements[static_cast<std::size_t>(i)]) - target);
            out.max_defect = std::max(out.max_defect, d);
            ++out.compared;
        }
    }
    return out;
}

inline CovarianceCheck check_covariance(const Povm& povm, const HermitianOperator& h, std::span<const double> shifts,
                                        double hbar = 1.0) {
    require(h.basis().same_grid(povm.basis), ErrorCode::domain, "POVM and Hamiltonian on different bases");
    const Propagator prop(h);
    return check_covariance(povm, [&](double t) { return prop.unitary(t, hbar); }, shifts);
}

/// Outcome probabilities tr[rho F(Z_i)] for a pure state.
inline std::vector<double> outcome_probabilities(const Povm& povm, const GridState& s) {
    require(s.axis().same_grid(povm.basis), ErrorCode::domain, "state and POVM on different bases");
    std::vector<double> p(povm.size());
    for (std::size_t i = 0; i < povm.size(); ++i)
        p[i] = std::real(s.amplitudes().dot(povm.elements[i].apply(s.amplitudes()))) * s.axis().step;
    return p;
}

struct TimeStatistics {
    HermitianOperator first_moment;  // sum of c_i F(Z_i)
    std::vector<double> distribution;
    double detection = 0.0;          // tr[rho F(Z0)]
    double mean = 0.0;
    double variance = 0.0;
    BoundReport report;              // pov-ur; informational unless the POVM is full-line
};

/// Mean and variance with the probability taken uniform inside each bin.
inline TimeStatistics time_statistics(const Povm& povm, const GridState& s, std::optional<double> delta_h = std::nullopt,
                                      double floor = 1e-12, double tol = 1e-9) {
    auto p = outcome_probabilities(povm, s);
    double total = 0.0;
    for (double v : p) total += v;
    require(total > floor, ErrorCode::conditioning, "detection probability below floor");
    double m1 = 0.0, m2 = 0.0;
    const double w = povm.width();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double c = povm.outcome_axis[i];
        m1 += p[i] * c;
        m2 += p[i] * (c * c + w * w / 12.0);
    }
    m1 /= total;
    m2 /= total;

    bool diagonal = true;
    for (const auto& e : povm.elements) diagonal &= e.is_diagonal();
    std::optional<HermitianOperator> t;
    if (diagonal) {
        VectorXd d = VectorXd::Zero(static_cast<Eigen::Index>(povm.basis.count));
        for (std::size_t i = 0; i < povm.size(); ++i) d += povm.outcome_axis[i] * povm.elements[i].diag();
        t = HermitianOperator::diagonal(povm.basis, std::move(d));
    } else {
        const auto n = static_cast<Eigen::Index>(povm.basis.count);
        MatrixXcd d = MatrixXcd::Zero(n, n);
        for (std::size_t i = 0; i < povm.size(); ++i) d += povm.outcome_axis[i] * povm.elements[i].to_dense();
        t = HermitianOperator::dense(povm.basis, std::move(d), 1e-9);
    }

    TimeStatistics out{*t, std::move(p), total, m1, std::max(0.0, m2 - m1 * m1), {}};
    const double dt = std::sqrt(out.variance);
    const double half = 0.5 * s.hbar();
    if (!delta_h) {
        out.report = BoundReport::info("pov-ur", dt, half, "energy spread not supplied");
    } else if (povm.full_line) {
        out.report = BoundReport::make("pov-ur", dt * *delta_h, half, tol);
    } else {
        out.report = BoundReport::info("pov-ur", dt * *delta_h, half, "finite observation interval: not asserted");
    }
    return out;
}

/// ||[H, T] - i hbar I||_F on the full space, and |tr [H, T]| (zero for any finite pair).
struct CommutatorFloor {
    double defect = 0.0;
    double floor = 0.0;  // hbar sqrt(dim): trace argument
    double trace = 0.0;
};

inline CommutatorFloor commutator_floor(const MatrixXcd& h, const MatrixXcd& t, double hbar = 1.0) {
    require(h.rows() == t.rows() && h.cols() == t.cols() && h.rows() == h.cols(), ErrorCode::domain,
            "operators must be square and of equal size");
    MatrixXcd c = h * t - t * h;
    const double tr = std::abs(c.trace());
    c.diagonal().array() -= cplx(0.0, hbar);
    return {c.norm(), hbar * std::sqrt(static_cast<double>(h.rows())), tr};
}

// ---------------------------------------------------------------- falling particle

/// H = P^2/2m - m g Q in the momentum representation, with Q = i hbar d/dp applied spectrally.
struct FallingParticle {
    double m = 1.0;
    double g = 1.0;
    double hbar = 1.0;
    Axis momentum;

    [[nodiscard]] HermitianOperator time_operator() const {
        return HermitianOperator::multiplication(momentum, [&](double p) { return -p / (m * g); });
    }

    /// Spectral measure of T: bin i collects the momentum cell mapped to [c_i - w/2, c_i + w/2).
    [[nodiscard]] Povm povm() const {
        const std::size_t n = momentum.count;
        const double w = momentum.step / (m * g);
        const Axis out = Axis::make(AxisKind::time, -momentum.back() / (m * g), w, n);
        Povm p{out, {out.start - 0.5 * w, out.back() + 0.5 * w}, momentum, {}, true, false, true};
        p.elements.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            VectorXd d = VectorXd::Zero(static_cast<Eigen::Index>(n));
            d[static_cast<Eigen::Index>(n - 1 - i)] = 1.0;
            p.elements.push_back(HermitianOperator::diagonal(momentum, std::move(d)));
        }
        return p;
    }

    /// exp(-itH/hbar): psi(p, t) = psi(p - mgt, 0) exp(-i [p^3 - (p - mgt)^3] / (6 m^2 g hbar)).
    [[nodiscard]] GridState evolve(const GridState& s, double t) const {
        require(s.axis().same_grid(momentum), ErrorCode::domain, "state is not on the model momentum grid");
        if (t == 0.0) return s;
        const double a = m * g * t;
        GridState k = to_conjugate(s);
        VectorXcd v = k.amplitudes();
        for (std::size_t i = 0; i < k.size(); ++i)
            v[static_cast<Eigen::Index>(i)] *= std::exp(cplx(0.0, -a * k.axis()[i] / hbar));
        GridState shifted = from_conjugate(GridState(k.axis(), std::move(v), hbar), momentum);
        VectorXcd out = shifted.amplitudes();
        for (std::size_t i = 0; i < momentum.count; ++i) {
            const double p = momentum[i], q = p - a;
            out[static_cast<Eigen::Index>(i)] *= std::exp(cplx(0.0, -(p * p * p - q * q * q) / (6 * m * m * g * hbar)));
        }
        return GridState(momentum, std::move(out), hbar);
    }

    /// exp(i h T / hbar).
    [[nodiscard]] GridState time_shift_generator(const GridState& s, double h) const {
        VectorXcd v = s.amplitudes();
        for (std::size_t i = 0; i < momentum.count; ++i)
            v[static_cast<Eigen::Index>(i)] *= std::exp(cplx(0.0, -h * momentum[i] / (m * g * hbar)));
        return GridState(momentum, std::move(v), hbar);
    }

    [[nodiscard]] VectorXcd apply_hamiltonian(const GridState& s) const {
        GridState k = to_conjugate(s);
        VectorXcd v = k.amplitudes();
        for (std::size_t i = 0; i < k.size(); ++i) v[static_cast<Eigen::Index>(i)] *= -k.axis()[i];  // position = -k
        const VectorXcd q = from_conjugate(GridState(k.axis(), std::move(v), hbar), momentum).amplitudes();
        VectorXcd out(q.size());
        for (std::size_t i = 0; i < momentum.count; ++i) {
            const auto j = static_cast<Eigen::Index>(i);
            out[j] = momentum[i] * momentum[i] / (2 * m) * s.amplitudes()[j] - m * g * q[j];
        }
        return out;
    }

    [[nodiscard]] Moments energy_moments(const GridState& s) const {
        const VectorXcd hs = apply_hamiltonian(s);
        const double n = s.norm2();
        const double mean = std::real(s.amplitudes().dot(hs)) * momentum.step / n;
        const double second = hs.squaredNorm() * momentum.step / n;
        return {mean, std::max(0.0, second - mean * mean)};
    }

    /// Weight in the outer 5% of the momentum grid and of its conjugate position grid.
    [[nodiscard]] double boundary_weight(const GridState& s) const {
        auto edge = [](const GridState& st) {
            const std::size_t n = st.size(), cut = std::max<std::size_t>(1, n / 20);
            double w = 0.0;
            for (std::size_t i = 0; i < cut; ++i) w += std::norm(st[i]) + std::norm(st[n - 1 - i]);
            return w * st.axis().step / st.norm2();
        };
        return std::max(edge(s), edge(to_conjugate(s)));
    }

    /// Dense exp(-itH/hbar), one evolved basis vector per column.
    [[nodiscard]] MatrixXcd unitary(double t) const {
        const auto n = static_cast<Eigen::Index>(momentum.count);
        MatrixXcd u(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            VectorXcd e = VectorXcd::Zero(n);
            e[j] = 1.0;
            u.col(j) = evolve(GridState(momentum, std::move(e), hbar), t).amplitudes();
        }
        return u;
    }
};

/// max over states and the (t, h) lattice of ||e^{itH} e^{ihT} psi - e^{-ith} e^{ihT} e^{itH} psi||.
inline double weyl_defect(const FallingParticle& fp, std::span<const GridState> states, std::span<const double> ts,
                          std::span<const double> hs, double boundary_tol = 1e-10) {
    double d = 0.0;
    for (const auto& s : states) {
        require(fp.boundary_weight(s) <= boundary_tol, ErrorCode::boundary, "test state has weight at the grid edge");
        for (double t : ts)
            for (double h : hs) {
                const GridState lhs = fp.evolve(fp.time_shift_generator(s, h), -t);
                const GridState rhs = fp.time_shift_generator(fp.evolve(s, -t), h);
                const VectorXcd diff = lhs.amplitudes() - std::exp(cplx(0.0, -t * h / fp.hbar)) * rhs.amplitudes();
                d = std::max(d, std::sqrt(diff.squaredNorm() * fp.momentum.step / s.norm2()));
            }
    }
    return d;
}

struct FallingParticleModel {
    FallingParticle model;
    HermitianOperator time_operator;
    Povm povm;
    double weyl_defect = 0.0;
};

/// Default Weyl check: a Gaussian centred on the grid (std = grid length / 20) over a 5 x 5 (t, h) lattice.
inline FallingParticleModel falling_particle(double m, double g, const Axis& momentum, double hbar = 1.0) {
    require(m > 0 && g > 0 && hbar > 0, ErrorCode::parameter, "m, g and hbar must be positive");
    require(momentum.kind == AxisKind::momentum, ErrorCode::domain, "falling particle needs a momentum grid");
    const FallingParticle fp{m, g, hbar, momentum};
    const double centre = momentum[momentum.count / 2];
    const double sp = momentum.length() / 20.0;
    const GridState s = GridState::from_function(momentum, [&](double p) {
        return std::exp(-(p - centre) * (p - centre) / (4 * sp * sp));
    }, hbar).normalized();
    const double xlen = 2 * pi * hbar / momentum.step;
    std::vector<double> ts, hs;
    for (int k = -2; k <= 2; ++k) {
        ts.push_back(k * momentum.length() / (40.0 * m * g));
        hs.push_back(k * m * g * xlen / 40.0);
    }
    const double defect = weyl_defect(fp, std::span<const GridState>(&s, 1), ts, hs);
    return {fp, fp.time_operator(), fp.povm(), defect};
}

// ---------------------------------------------------------------- oscillator phase

/// Truncated covariant phase POVM for H = N + 1/2 (hbar = 1) on levels 0..nmax.
struct OscillatorPhase {
    std::size_t nmax = 0;
    Axis basis;
    Povm povm;
    MatrixXcd t0;

    /// (2 pi)^-1 int_Z e^{i(n - m)t} dt.
    [[nodiscard]] MatrixXcd element(const Interval& z) const {
        require(std::isfinite(z.lo) && std::isfinite(z.hi) && z.hi >= z.lo, ErrorCode::parameter,
                "phase interval must be finite");
        const auto n = static_cast<Eigen::Index>(nmax + 1);
        MatrixXcd f(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b) {
                const double k = static_cast<double>(a - b);
                f(a, b) = k == 0.0 ? cplx(z.length() / (2 * pi))
                                   : (std::exp(cplx(0.0, k * z.hi)) - std::exp(cplx(0.0, k * z.lo))) / (cplx(0.0, 2 * pi * k));
            }
        return f;
    }
    [[nodiscard]] HermitianOperator hamiltonian() const {
        return HermitianOperator::multiplication(basis, [](double n) { return n + 0.5; });
    }
    /// T0 - t I + 2 pi F([0, t]).
    [[nodiscard]] MatrixXcd shifted(double t) const {
        require(t >= 0.0 && t <= 2 * pi, ErrorCode::parameter, "shift must lie in [0, 2 pi]");
        MatrixXcd r = t0 + 2 * pi * element({0.0, t});
        r.diagonal().array() -= t;
        return r;
    }
    /// e^{itH} T0 e^{-itH}.
    [[nodiscard]] MatrixXcd conjugated(double t) const {
        const auto n = static_cast<Eigen::Index>(nmax + 1);
        MatrixXcd r(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b) r(a, b) = std::exp(cplx(0.0, t * static_cast<double>(a - b))) * t0(a, b);
        return r;
    }
    /// ||([H, T0] - i) psi|| / ||psi||.
    [[nodiscard]] double commutator_defect(const GridState& psi) const {
        require(psi.axis().same_grid(basis), ErrorCode::domain, "state is not on the Fock basis");
        const auto top = static_cast<Eigen::Index>(nmax);
        require(std::abs(psi.amplitudes()[top]) <= 1e-12 * psi.amplitudes().norm(), ErrorCode::boundary,
                "test vector touches the truncation edge");
        MatrixXcd h = hamiltonian().to_dense();
        MatrixXcd c = h * t0 - t0 * h;
        c.diagonal().array() -= cplx(0.0, 1.0);
        return (c * psi.amplitudes()).norm() / psi.amplitudes().norm();
    }
};

inline OscillatorPhase oscillator_phase(std::size_t nmax, std::size_t bins = 64) {
    require(nmax >= 8, ErrorCode::parameter, "nmax must be at least 8");
    require(bins >= 2, ErrorCode::parameter, "need at least two phase bins");
    OscillatorPhase o;
    o.nmax = nmax;
    o.basis = Axis::fock(nmax + 1);
    const double w = 2 * pi / static_cast<double>(bins);
    const Axis out = Axis::make(AxisKind::time, 0.5 * w, w, bins);
    o.povm = Povm{out, {0.0, 2 * pi}, o.basis, {}, true, true, false};
    o.povm.elements.assign(bins, HermitianOperator::diagonal(o.basis, VectorXd::Zero(static_cast<Eigen::Index>(nmax + 1))));
    parallel_for(bins, [&](std::size_t i) {
        o.povm.elements[i] = HermitianOperator::dense(o.basis, o.element(o.povm.bin(i)), 1e-12);
    });
    const auto n = static_cast<Eigen::Index>(nmax + 1);
    o.t0 = MatrixXcd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            o.t0(a, b) = a == b ? cplx(pi) : 1.0 / cplx(0.0, static_cast<double>(a - b));
    return o;
}

/// Hann-windowed vector on levels 2..nmax/2 with phase e^{i n theta}: localized near phase theta.
inline GridState phase_window_state(std::size_t nmax, double theta) {
    require(nmax >= 8, ErrorCode::parameter, "nmax must be at least 8");
    const std::size_t lo = 2, hi = nmax / 2;
    const double len = static_cast<double>(hi - lo + 2);
    return GridState::from_function(Axis::fock(nmax + 1), [&](double n) {
        if (n < static_cast<double>(lo) || n > static_cast<double>(hi)) return cplx(0.0);
        const double s = std::sin(pi * (n - static_cast<double>(lo) + 1.0) / len);
        return s * s * std::exp(cplx(0.0, n * theta));
    }).normalized();
}

// ---------------------------------------------------------------- free-particle arrival

struct ArrivalDistribution {
    Axis outcome_axis;          // bin centres
    std::vector<double> probabilities;
    double total = 0.0;
    double mean = 0.0;
    double slow_weight = 0.0;   // momentum weight with |p| < 5% of rms |p|
    std::vector<std::string> warnings;
};

namespace detail {

struct ArrivalKernel {
    std::vector<double> p, amp_weight;  // sqrt(|p|/m) dp / sqrt(2 pi hbar)
    std::vector<cplx> phi;
    double m = 1.0, hbar = 1.0;

    [[nodiscard]] double density(double t) const {
        cplx pos = 0.0, neg = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] == 0.0) continue;
            const cplx v = amp_weight[i] * std::exp(cplx(0.0, -t * p[i] * p[i] / (2 * m * hbar))) * phi[i];
            (p[i] > 0 ? pos : neg) += v;
        }
        return std::norm(pos) + std::norm(neg);
    }
    [[nodiscard]] double panel() const {
        double pmax = 0.0;
        for (double v : p) pmax = std::max(pmax, std::abs(v));
        return pi * hbar / std::max(pmax * pmax / (2 * m), 1e-300);
    }
    [[nodiscard]] double integrate(double a, double b) const {
        if (!(b > a)) return 0.0;
        const double len = panel();
        const auto panels = static_cast<std::size_t>(std::ceil((b - a) / len));
        const double step = (b - a) / static_cast<double>(panels);
        double acc = 0.0;
        for (std::size_t k = 0; k < panels; ++k) {
            const double lo = a + static_cast<double>(k) * step;
            acc += boost::math::quadrature::gauss<double, 8>::integrate([&](double t) { return density(t); }, lo, lo + step);
        }
        return acc;
    }
};

inline ArrivalKernel arrival_kernel(const GridState& phi, double m) {
    require(phi.axis().kind == AxisKind::momentum, ErrorCode::domain, "arrival needs a momentum-space state");
    require(m > 0, ErrorCode::parameter, "mass must be positive");
    require(phi.is_normalized(1e-8), ErrorCode::validation, "state must be normalized");
    ArrivalKernel k;
    k.m = m;
    k.hbar = phi.hbar();
    const Axis& a = phi.axis();
    for (std::size_t i = 0; i < a.count; ++i) {
        k.p.push_back(a[i]);
        k.amp_weight.push_back(std::sqrt(std::abs(a[i]) / m) * a.step / std::sqrt(2 * pi * k.hbar));
        k.phi.push_back(phi[i]);
    }
    return k;
}

}  // namespace detail

/// Probability of arrival at x = 0 during Z for a free particle with momentum amplitude phi.
inline double free_arrival_probability(const GridState& phi, const Interval& z, double m) {
    require(std::isfinite(z.lo) && std::isfinite(z.hi) && z.hi >= z.lo, ErrorCode::parameter,
            "arrival interval must be finite");
    return detail::arrival_kernel(phi, m).integrate(z.lo, z.hi);
}

/// Arrival distribution on uniform bins centred on `bins`.
inline ArrivalDistribution free_arrival_distribution(const GridState& phi, const Axis& bins, double m) {
    require(bins.kind == AxisKind::time, ErrorCode::domain, "outcome bins must be a time axis");
    const auto k = detail::arrival_kernel(phi, m);
    ArrivalDistribution out{bins, std::vector<double>(bins.count), 0, 0, 0, {}};
    parallel_for(bins.count, [&](std::size_t i) {
        out.probabilities[i] = k.integrate(bins[i] - 0.5 * bins.step, bins[i] + 0.5 * bins.step);
    });
    for (std::size_t i = 0; i < bins.count; ++i) {
        out.total += out.probabilities[i];
        out.mean += out.probabilities[i] * bins[i];
    }
    if (out.total > 0) out.mean /= out.total;

    const auto d = phi.density();
    const Axis& a = phi.axis();
    double m2 = 0.0;
    for (std::size_t i = 0; i < a.count; ++i) m2 += d[i] * a[i] * a[i] * a.step;
    const double cut = 0.05 * std::sqrt(m2);
    for (std::size_t i = 0; i < a.count; ++i)
        if (std::abs(a[i]) < cut) out.slow_weight += d[i] * a.step;
    if (out.slow_weight > 1e-6)
        out.warnings.push_back("slow packet: momentum weight near p = 0 is " + std::to_string(out.slow_weight) +
                               "; widen the time window");
    return out;
}

/// Free evolution U_s = exp(-i s P^2 / 2 m hbar) in the momentum representation.
inline GridState free_evolve(const GridState& phi, double s, double m) {
    VectorXcd v = phi.amplitudes();
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double p = phi.axis()[i];
        v[static_cast<Eigen::Index>(i)] *= std::exp(cplx(0.0, -s * p * p / (2 * m * phi.hbar())));
    }
    return GridState(phi.axis(), std::move(v), phi.hbar());
}

// ---------------------------------------------------------------- bounded spectrum

/// H = multiplication by h on L^2(0, 2 pi) (hbar = 1), sampled at cell midpoints.
struct BoundedSpectrum {
    Axis energy;
    cplx c{1.0, 0.0};

    [[nodiscard]] double dh() const { return energy.step; }
    /// Time window of one discrete period: the sampled phi_t are periodic in t with period 2 pi / dh.
    [[nodiscard]] Interval window() const { return {-pi / dh(), pi / dh()}; }

    [[nodiscard]] HermitianOperator hamiltonian() const {
        return HermitianOperator::multiplication(energy, [](double h) { return h; });
    }
    /// P(X)_{jk} = (dh / 2 pi) int_X e^{i(h_j - h_k)t} dt.
    [[nodiscard]] MatrixXcd element(const Interval& x) const {
        require(std::isfinite(x.lo) && std::isfinite(x.hi) && x.hi >= x.lo, ErrorCode::parameter,
                "time interval must be finite");
        const auto n = static_cast<Eigen::Index>(energy.count);
        MatrixXcd p(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b) {
                const double w = energy[static_cast<std::size_t>(a)] - energy[static_cast<std::size_t>(b)];
                p(a, b) = a == b ? cplx(x.length())
                                 : (std::exp(cplx(0.0, w * x.hi)) - std::exp(cplx(0.0, w * x.lo))) / cplx(0.0, w);
            }
        return p * (dh() / (2 * pi));
    }
    /// Bins over `win` (default: one full period). Periodic only when `win` is a full period.
    [[nodiscard]] Povm povm(std::size_t bins, std::optional<Interval> win = std::nullopt) const {
        require(bins >= 2, ErrorCode::parameter, "need at least two time bins");
        const Interval z = win.value_or(window());
        require(std::isfinite(z.lo) && std::isfinite(z.hi) && z.hi > z.lo, ErrorCode::parameter, "bad time window");
        const double w = z.length() / static_cast<double>(bins);
        const Axis out = Axis::make(AxisKind::time, z.lo + 0.5 * w, w, bins);
        const bool full = std::abs(z.length() - window().length()) <= 1e-12 * window().length();
        Povm p{out, z, energy, {}, false, full, false};
        p.elements.assign(bins, HermitianOperator::diagonal(energy, VectorXd::Zero(static_cast<Eigen::Index>(energy.count))));
        parallel_for(bins, [&](std::size_t i) {
            p.elements[i] = HermitianOperator::dense(energy, element(p.bin(i)), 1e-10);
        });
        const double defect = p.normalization_defect();
        require(defect <= 1e-3, ErrorCode::window, "time window too short for normalization");
        p.normalized = defect <= 1e-8;
        return p;
    }
    /// -i d/dh by central differences with psi(h + 2 pi) = c psi(h).
    [[nodiscard]] MatrixXcd time_operator() const {
        const auto n = static_cast<Eigen::Index>(energy.count);
        MatrixXcd t = MatrixXcd::Zero(n, n);
        const cplx k(0.0, -1.0 / (2 * dh()));
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            t(j, j + 1) = k;
            t(j + 1, j) = -k;
        }
        t(n - 1, 0) = k * c;
        t(0, n - 1) = -k * std::conj(c);
        return t;
    }
    /// Same stencil with psi = 0 outside the interval.
    [[nodiscard]] MatrixXcd dirichlet_operator() const {
        MatrixXcd t = time_operator();
        const auto n = t.rows();
        t(n - 1, 0) = 0.0;
        t(0, n - 1) = 0.0;
        return t;
    }
    /// Eigenvalue of the discrete operator on e^{i kappa h}, kappa = m + arg(c)/2 pi.
    [[nodiscard]] double discrete_eigenvalue(double kappa) const { return std::sin(kappa * dh()) / dh(); }
    [[nodiscard]] double twist() const { return std::arg(c) / (2 * pi); }
};

inline BoundedSpectrum bounded_spectrum(std::size_t n, cplx c = 1.0) {
    require(n >= 8, ErrorCode::parameter, "energy grid needs at least 8 samples");
    require(std::abs(std::abs(c) - 1.0) <= 1e-12, ErrorCode::parameter, "boundary phase must have modulus 1");
    const double dh = 2 * pi / static_cast<double>(n);
    return {Axis::make(AxisKind::energy, 0.5 * dh, dh, n), c};
}

struct SpectrumCheck {
    double max_deviation = 0.0;     // |lambda - (m + twist)| over |m| <= mmax
    double bound = 0.0;             // sum of kappa^3 dh^2 / 6 envelope
    double eigenvector_residual = 0.0;
    BoundReport report;
};

/// Spectrum of T^(c) against the shifted integers.
inline SpectrumCheck check_time_operator_spectrum(const BoundedSpectrum& b, int mmax = 4) {
    const MatrixXcd t = b.time_operator();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(t, Eigen::EigenvaluesOnly);
    const VectorXd ev = es.eigenvalues();
    SpectrumCheck out;
    for (int m = -mmax; m <= mmax; ++m) {
        const double kappa = m + b.twist();
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < ev.size(); ++i) best = std::min(best, std::abs(ev[i] - kappa));
        out.max_deviation = std::max(out.max_deviation, best);
        out.bound = std::max(out.bound, std::abs(kappa * kappa * kappa) * b.dh() * b.dh() / 6.0 + 1e-10);
        VectorXcd v(t.rows());
        for (std::size_t j = 0; j < b.energy.count; ++j)
            v[static_cast<Eigen::Index>(j)] = std::exp(cplx(0.0, kappa * b.energy[j]));
        out.eigenvector_residual = std::max(out.eigenvector_residual, (t * v - kappa * v).norm() / v.norm());
    }
    out.report = BoundReport::make("T-c-spec", out.bound, out.max_deviation, 0.0);
    return out;
}

/// ||(e^{i tau H} T e^{-i tau H} - (T - tau)) psi|| / ||psi||.
inline double covariance_defect(const BoundedSpectrum& b, const MatrixXcd& t, const GridState& psi, double tau) {
    const auto n = static_cast<Eigen::Index>(b.energy.count);
    VectorXcd d(n);
    for (Eigen::Index j = 0; j < n; ++j) d[j] = std::exp(cplx(0.0, tau * b.energy[static_cast<std::size_t>(j)]));
    const MatrixXcd lhs = d.asDiagonal() * t * d.conjugate().asDiagonal();
    MatrixXcd rhs = t;
    rhs.diagonal().array() -= tau;
    return ((lhs - rhs) * psi.amplitudes()).norm() / psi.amplitudes().norm();
}

struct EffectMeasure {
    MatrixXcd b;
    double min_eigenvalue = 0.0;
    double effect_norm = 0.0;  // largest eigenvalue of A
};

/// B(J) = int_J e^{itH} A e^{-itH} dt by composite 8-point Gauss-Legendre in the eigenbasis of H.
inline EffectMeasure bf_povm_from_effect(const HermitianOperator& a, const HermitianOperator& h, const Interval& j,
                                         double hbar = 1.0) {
    require(a.basis().same_grid(h.basis()), ErrorCode::domain, "effect and Hamiltonian on different bases");
    require(std::isfinite(j.lo) && std::isfinite(j.hi) && j.hi >= j.lo, ErrorCode::parameter, "J must be finite");
    const auto ea = eigensystem(a);
    require(ea.values.minCoeff() >= -1e-12 * std::max(1.0, ea.values.cwiseAbs().maxCoeff()), ErrorCode::validation,
            "effect must be positive");
    const auto n = static_cast<Eigen::Index>(h.dim());
    EffectMeasure out{MatrixXcd::Zero(n, n), 0.0, ea.values.maxCoeff()};
    if (j.length() == 0.0) return out;

    const auto eh = eigensystem(h);
    const MatrixXcd at = eh.vectors.adjoint() * a.to_dense() * eh.vectors;
    const double spread = eh.values.maxCoeff() - eh.values.minCoeff();
    const double panel = spread > 0 ? pi * hbar / spread : j.length();
    const auto panels = static_cast<std::size_t>(std::ceil(j.length() / panel));
    const double step = j.length() / static_cast<double>(panels);
    MatrixXcd bt = MatrixXcd::Zero(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t r) {
        const auto k = static_cast<Eigen::Index>(r);
        for (Eigen::Index l = 0; l < n; ++l) {
            const double w = (eh.values[k] - eh.values[l]) / hbar;
            double re = 0.0, im = 0.0;
            for (std::size_t p = 0; p < panels; ++p) {
                const double lo = j.lo + static_cast<double>(p) * step;
                re += boost::math::quadrature::gauss<double, 8>::integrate([&](double t) { return std::cos(w * t); }, lo, lo + step);
                im += boost::math::quadrature::gauss<double, 8>::integrate([&](double t) { return std::sin(w * t); }, lo, lo + step);
            }
            bt(k, l) = at(k, l) * cplx(re, im);
        }
    });
    out.b = eh.vectors * bt * eh.vectors.adjoint();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (out.b + out.b.adjoint()), Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    require(out.min_eigenvalue >= -1e-9 * std::max(1.0, out.effect_norm * j.length()), ErrorCode::validation,
            "B(J) is not positive");
    return out;
}

/// |phi_0><phi_0| with phi_0 = 1/sqrt(2 pi), as a matrix on the sample basis.
inline HermitianOperator ground_effect(const BoundedSpectrum& b) {
    const auto n = static_cast<Eigen::Index>(b.energy.count);
    return HermitianOperator::dense(b.energy, MatrixXcd::Constant(n, n, cplx(b.dh() / (2 * pi))));
}

/// Largest d with Delta T >= d / <H> over the sample: min of Delta T <H>.
inline double bf_constant_scan(const Povm& povm, const HermitianOperator& h, std::span<const GridState> states) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : states) {
        const auto st = time_statistics(povm, s);
        d = std::min(d, std::sqrt(st.variance) * moments(h, s).mean);
    }
    return d;
}

}  // namespace tempus
