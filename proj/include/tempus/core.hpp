#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace tempus {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// ---------------------------------------------------------------- errors

enum class ErrorCode {
    domain,
    validation,
    parameter,
    precondition,
    schema,
    not_attained,
    divergent,
    stationary,
    singular_reference,
    conditioning,
    boundary,
    resolution,
    partition,
    coverage,
    window,
    degenerate,
    moment,
    truncation,
};

inline const char* error_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::domain: return "domain";
        case ErrorCode::validation: return "validation";
        case ErrorCode::parameter: return "parameter";
        case ErrorCode::precondition: return "precondition";
        case ErrorCode::schema: return "schema";
        case ErrorCode::not_attained: return "not-attained";
        case ErrorCode::divergent: return "divergent-integral";
        case ErrorCode::stationary: return "stationary";
        case ErrorCode::singular_reference: return "singular-reference-point";
        case ErrorCode::conditioning: return "conditioning";
        case ErrorCode::boundary: return "boundary";
        case ErrorCode::resolution: return "resolution";
        case ErrorCode::partition: return "partition";
        case ErrorCode::coverage: return "coverage";
        case ErrorCode::window: return "window";
        case ErrorCode::degenerate: return "degenerate";
        case ErrorCode::moment: return "moment";
        case ErrorCode::truncation: return "truncation";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

    // Usage-type failures map to exit status 2 in the CLI; the rest are numerical.
    [[nodiscard]] bool is_usage() const noexcept {
        return code_ == ErrorCode::parameter || code_ == ErrorCode::schema;
    }

private:
    ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) throw Error(code, what);
}

// ---------------------------------------------------------------- axis

enum class AxisKind { position, momentum, energy, time, fock };

inline const char* axis_name(AxisKind k) {
    switch (k) {
        case AxisKind::position: return "x";
        case AxisKind::momentum: return "p";
        case AxisKind::energy: return "E";
        case AxisKind::time: return "t";
        case AxisKind::fock: return "n";
    }
    return "?";
}

/// Uniform sampling grid: value(i) = start + i * step.
struct Axis {
    AxisKind kind = AxisKind::fock;
    double start = 0.0;
    double step = 1.0;
    std::size_t count = 2;

    static Axis make(AxisKind kind, double start, double step, std::size_t count) {
        require(std::isfinite(start) && std::isfinite(step), ErrorCode::validation,
                "axis start/step must be finite");
        require(step > 0.0, ErrorCode::validation, "axis step must be positive");
        require(count >= 2, ErrorCode::validation, "axis needs at least two samples");
        if (kind == AxisKind::fock)
            require(start == 0.0 && step == 1.0, ErrorCode::validation,
                    "fock axis has start 0 and step 1");
        return Axis{kind, start, step, count};
    }
    /// count samples of spacing step, symmetric about center (FFT ordering: index count/2 sits on center).
    static Axis centered(AxisKind kind, double center, double step, std::size_t count) {
        return make(kind, center - static_cast<double>(count / 2) * step, step, count);
    }
    /// count samples covering [lo, hi] inclusive.
    static Axis span(AxisKind kind, double lo, double hi, std::size_t count) {
        require(count >= 2 && hi > lo, ErrorCode::validation, "bad axis span");
        return make(kind, lo, (hi - lo) / static_cast<double>(count - 1), count);
    }
    static Axis fock(std::size_t dim) { return make(AxisKind::fock, 0.0, 1.0, dim); }

    [[nodiscard]] double operator[](std::size_t i) const { return start + static_cast<double>(i) * step; }
    [[nodiscard]] double back() const { return (*this)[count - 1]; }
    [[nodiscard]] double length() const { return static_cast<double>(count) * step; }
    [[nodiscard]] std::vector<double> values() const {
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i) v[i] = (*this)[i];
        return v;
    }
    /// Index of the sample nearest to x (clamped).
    [[nodiscard]] std::size_t nearest(double x) const {
        const double r = std::round((x - start) / step);
        if (r <= 0) return 0;
        if (r >= static_cast<double>(count - 1)) return count - 1;
        return static_cast<std::size_t>(r);
    }
    [[nodiscard]] bool same_grid(const Axis& o) const {
        const double tol = 1e-12 * std::max({1.0, std::abs(start), std::abs(o.start)});
        return kind == o.kind && count == o.count && std::abs(start - o.start) <= tol &&
               std::abs(step - o.step) <= 1e-12 * step;
    }
};

/// Half-open interval [lo, hi); either end may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x < hi; }
    [[nodiscard]] double length() const noexcept { return hi - lo; }
};

/// Requires sorted, non-overlapping, non-empty intervals.
inline void require_partition(std::span<const Interval> bins) {
    require(!bins.empty(), ErrorCode::partition, "empty partition");
    for (std::size_t i = 0; i < bins.size(); ++i) {
        require(bins[i].lo < bins[i].hi, ErrorCode::partition, "empty or reversed interval in partition");
        if (i + 1 < bins.size())
            require(bins[i].hi <= bins[i + 1].lo, ErrorCode::partition, "overlapping or unsorted intervals");
    }
}

inline AxisKind conjugate_kind(AxisKind k) {
    switch (k) {
        case AxisKind::position: return AxisKind::momentum;
        case AxisKind::momentum: return AxisKind::position;
        case AxisKind::time: return AxisKind::energy;
        case AxisKind::energy: return AxisKind::time;
        case AxisKind::fock: break;
    }
    throw Error(ErrorCode::domain, "fock axis has no conjugate grid");
}

/// Reciprocal grid with step 2*pi*hbar/(count*step), centred on `center`.
inline Axis conjugate_axis(const Axis& a, double hbar = 1.0, double center = 0.0) {
    const double dk = 2.0 * pi * hbar / (static_cast<double>(a.count) * a.step);
    return Axis::centered(conjugate_kind(a.kind), center, dk, a.count);
}

// ---------------------------------------------------------------- quadrature helpers

/// Riemann sum with the sample spacing as weight.
inline double riemann(std::span<const double> v, double step) {
    double s = 0.0;
    for (double x : v) s += x;
    return s * step;
}

inline cplx riemann(std::span<const cplx> v, double step) {
    cplx s = 0.0;
    for (const cplx& x : v) s += x;
    return s * step;
}

template <class F>
std::vector<double> sample(const Axis& a, F&& fn) {
    std::vector<double> v(a.count);
    for (std::size_t i = 0; i < a.count; ++i) v[i] = fn(a[i]);
    return v;
}

// ---------------------------------------------------------------- states

class GridState {
public:
    GridState(Axis axis, VectorXcd amplitudes, double hbar = 1.0)
        : axis_(axis), amp_(std::move(amplitudes)), hbar_(hbar) {
        require(static_cast<std::size_t>(amp_.size()) == axis_.count, ErrorCode::validation,
                "amplitude length does not match axis");
        require(hbar_ > 0.0 && std::isfinite(hbar_), ErrorCode::validation, "hbar must be positive");
        require(amp_.allFinite(), ErrorCode::validation, "non-finite amplitude");
    }

    template <class F>
    static GridState from_function(const Axis& axis, F&& fn, double hbar = 1.0) {
        VectorXcd v(static_cast<Eigen::Index>(axis.count));
        for (std::size_t i = 0; i < axis.count; ++i) v[static_cast<Eigen::Index>(i)] = cplx(fn(axis[i]));
        return GridState(axis, std::move(v), hbar);
    }

    [[nodiscard]] const Axis& axis() const noexcept { return axis_; }
    [[nodiscard]] const VectorXcd& amplitudes() const noexcept { return amp_; }
    [[nodiscard]] double hbar() const noexcept { return hbar_; }
    [[nodiscard]] std::size_t size() const noexcept { return axis_.count; }
    [[nodiscard]] cplx operator[](std::size_t i) const { return amp_[static_cast<Eigen::Index>(i)]; }

    [[nodiscard]] double norm2() const { return amp_.squaredNorm() * axis_.step; }
    [[nodiscard]] GridState normalized() const {
        const double n = norm2();
        require(n > 0.0, ErrorCode::validation, "cannot normalize the zero state");
        return GridState(axis_, amp_ / std::sqrt(n), hbar_);
    }
    [[nodiscard]] bool is_normalized(double tol = 1e-9) const { return std::abs(norm2() - 1.0) <= tol; }
    [[nodiscard]] std::vector<double> density() const {
        std::vector<double> d(size());
        for (std::size_t i = 0; i < size(); ++i) d[i] = std::norm((*this)[i]);
        return d;
    }

private:
    Axis axis_;
    VectorXcd amp_;
    double hbar_;
};

inline cplx inner(const GridState& a, const GridState& b) {
    require(a.axis().same_grid(b.axis()), ErrorCode::domain, "inner product across different grids");
    return a.amplitudes().dot(b.amplitudes()) * a.axis().step;
}

/// Mixed state as a weighted list of pure states.
struct Ensemble {
    std::vector<std::pair<double, GridState>> members;

    [[nodiscard]] double total_weight() const {
        double w = 0.0;
        for (const auto& m : members) w += m.first;
        return w;
    }
};

// ---------------------------------------------------------------- discrete Fourier plumbing

namespace detail {

/// out_k = sum_j v_j exp(sign * i * (x0 + j dx)(k0 + k dk) / hbar), requires dx*dk*N = 2*pi*hbar.
inline std::vector<cplx> shifted_dft(std::span<const cplx> v, double x0, double dx, double k0, double dk,
                                     double hbar, int sign) {
    const std::size_t n = v.size();
    std::vector<cplx> in(n), out(n);
    for (std::size_t j = 0; j < n; ++j)
        in[j] = v[j] * std::exp(cplx(0.0, sign * static_cast<double>(j) * dx * k0 / hbar));
    Eigen::FFT<double> fft;
    if (sign < 0) {
        fft.fwd(out, in);
    } else {
        fft.SetFlag(Eigen::FFT<double>::Unscaled);
        fft.inv(out, in);
    }
    for (std::size_t k = 0; k < n; ++k)
        out[k] *= std::exp(cplx(0.0, sign * x0 * (k0 + static_cast<double>(k) * dk) / hbar));
    return out;
}

inline std::span<const cplx> as_span(const VectorXcd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

inline VectorXcd to_vector(const std::vector<cplx>& v) {
    return Eigen::Map<const VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

/// Unitary change of representation position <-> momentum (or time <-> energy as wavefunctions):
/// psi~(p) = (2 pi hbar)^{-1/2} sum_x psi(x) e^{-ipx/hbar} dx.
inline GridState to_conjugate(const GridState& s, double center = 0.0) {
    const Axis k = conjugate_axis(s.axis(), s.hbar(), center);
    auto out = detail::shifted_dft(detail::as_span(s.amplitudes()), s.axis().start, s.axis().step, k.start,
                                   k.step, s.hbar(), -1);
    const double scale = s.axis().step / std::sqrt(2.0 * pi * s.hbar());
    for (auto& z : out) z *= scale;
    return GridState(k, detail::to_vector(out), s.hbar());
}

/// Inverse of to_conjugate onto a prescribed target grid (must be the reciprocal of s.axis()).
inline GridState from_conjugate(const GridState& s, const Axis& target) {
    const double dk = 2.0 * pi * s.hbar() / (static_cast<double>(target.count) * target.step);
    require(std::abs(dk - s.axis().step) <= 1e-10 * dk && target.count == s.axis().count, ErrorCode::domain,
            "target grid is not reciprocal to the state grid");
    auto out = detail::shifted_dft(detail::as_span(s.amplitudes()), s.axis().start, s.axis().step, target.start,
                                   target.step, s.hbar(), +1);
    const double scale = s.axis().step / std::sqrt(2.0 * pi * s.hbar());
    for (auto& z : out) z *= scale;
    return GridState(target, detail::to_vector(out), s.hbar());
}

// ---------------------------------------------------------------- operators

class HermitianOperator {
public:
    static HermitianOperator diagonal(const Axis& basis, VectorXd d) {
        require(static_cast<std::size_t>(d.size()) == basis.count, ErrorCode::validation,
                "diagonal length does not match basis");
        require(d.allFinite(), ErrorCode::validation, "non-finite operator entry");
        return HermitianOperator(basis, std::move(d));
    }
    static HermitianOperator dense(const Axis& basis, MatrixXcd m, double tol = 1e-12) {
        require(static_cast<std::size_t>(m.rows()) == basis.count && m.rows() == m.cols(), ErrorCode::validation,
                "matrix shape does not match basis");
        require(m.allFinite(), ErrorCode::validation, "non-finite operator entry");
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        require((m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale, ErrorCode::validation,
                "operator is not hermitian");
        MatrixXcd h = 0.5 * (m + m.adjoint());
        return HermitianOperator(basis, std::move(h));
    }
    template <class F>
    static HermitianOperator multiplication(const Axis& basis, F&& fn) {
        VectorXd d(static_cast<Eigen::Index>(basis.count));
        for (std::size_t i = 0; i < basis.count; ++i) d[static_cast<Eigen::Index>(i)] = fn(basis[i]);
        return diagonal(basis, std::move(d));
    }

    [[nodiscard]] const Axis& basis() const noexcept { return basis_; }
    [[nodiscard]] std::size_t dim() const noexcept { return basis_.count; }
    [[nodiscard]] bool is_diagonal() const noexcept { return std::holds_alternative<VectorXd>(rep_); }
    [[nodiscard]] const VectorXd& diag() const { return std::get<VectorXd>(rep_); }
    [[nodiscard]] const MatrixXcd& matrix() const { return std::get<MatrixXcd>(rep_); }
    [[nodiscard]] MatrixXcd to_dense() const {
        if (is_diagonal()) return diag().cast<cplx>().asDiagonal();
        return matrix();
    }
    [[nodiscard]] VectorXcd apply(const VectorXcd& v) const {
        if (is_diagonal()) return diag().cast<cplx>().cwiseProduct(v);
        return matrix() * v;
    }
    [[nodiscard]] HermitianOperator shifted(double c) const {
        if (is_diagonal()) return diagonal(basis_, diag().array() + c);
        MatrixXcd m = matrix();
        m.diagonal().array() += c;
        return HermitianOperator(basis_, std::move(m));
    }

private:
    HermitianOperator(const Axis& b, VectorXd d) : basis_(b), rep_(std::move(d)) {}
    HermitianOperator(const Axis& b, MatrixXcd m) : basis_(b), rep_(std::move(m)) {}

    Axis basis_;
    std::variant<VectorXd, MatrixXcd> rep_;
};

struct EigenSystem {
    VectorXd values;
    MatrixXcd vectors;  // columns
};

inline EigenSystem eigensystem(const HermitianOperator& h) {
    if (h.is_diagonal()) {
        const auto n = static_cast<Eigen::Index>(h.dim());
        return {h.diag(), MatrixXcd::Identity(n, n)};
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h.matrix());
    return {es.eigenvalues(), es.eigenvectors()};
}

namespace detail {

enum class Placement { same, conjugate };

inline Placement placement(const HermitianOperator& op, const GridState& s) {
    if (op.basis().same_grid(s.axis())) return Placement::same;
    if (s.axis().kind != AxisKind::fock && op.is_diagonal() && op.basis().kind == conjugate_kind(s.axis().kind)) {
        const Axis k = conjugate_axis(s.axis(), s.hbar(), 0.0);
        const double center = op.basis()[op.basis().count / 2];
        if (op.basis().same_grid(conjugate_axis(s.axis(), s.hbar(), center)) || op.basis().same_grid(k))
            return Placement::conjugate;
    }
    throw Error(ErrorCode::domain, "operator basis does not match the state grid");
}

}  // namespace detail

/// op |state>, allowing a diagonal operator declared on the reciprocal grid.
inline GridState apply(const HermitianOperator& op, const GridState& s) {
    if (detail::placement(op, s) == detail::Placement::same)
        return GridState(s.axis(), op.apply(s.amplitudes()), s.hbar());
    const double center = op.basis()[op.basis().count / 2];
    GridState k = to_conjugate(s, center);
    GridState hk(k.axis(), op.apply(k.amplitudes()), s.hbar());
    return from_conjugate(hk, s.axis());
}

/// exp(-i t H / hbar) with the spectral decomposition of H computed once.
class Propagator {
public:
    explicit Propagator(HermitianOperator h) : h_(std::move(h)), es_(eigensystem(h_)) {}

    [[nodiscard]] const HermitianOperator& hamiltonian() const noexcept { return h_; }
    [[nodiscard]] const EigenSystem& spectrum() const noexcept { return es_; }

    [[nodiscard]] GridState operator()(const GridState& s, double t) const {
        require(std::isfinite(t), ErrorCode::validation, "time must be finite");
        const auto place = detail::placement(h_, s);
        const double hb = s.hbar();
        if (place == detail::Placement::conjugate) {
            const double center = h_.basis()[h_.basis().count / 2];
            GridState k = to_conjugate(s, center);
            VectorXcd v = k.amplitudes();
            for (Eigen::Index i = 0; i < v.size(); ++i) v[i] *= std::exp(cplx(0.0, -t * h_.diag()[i] / hb));
            return from_conjugate(GridState(k.axis(), std::move(v), hb), s.axis());
        }
        if (h_.is_diagonal()) {
            VectorXcd v = s.amplitudes();
            for (Eigen::Index i = 0; i < v.size(); ++i) v[i] *= std::exp(cplx(0.0, -t * h_.diag()[i] / hb));
            return GridState(s.axis(), std::move(v), hb);
        }
        VectorXcd c = es_.vectors.adjoint() * s.amplitudes();
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::exp(cplx(0.0, -t * es_.values[i] / hb));
        return GridState(s.axis(), es_.vectors * c, hb);
    }

    /// Dense unitary matrix exp(-i t H / hbar) in the operator's own basis.
    [[nodiscard]] MatrixXcd unitary(double t, double hbar = 1.0) const {
        VectorXcd ph(es_.values.size());
        for (Eigen::Index i = 0; i < ph.size(); ++i) ph[i] = std::exp(cplx(0.0, -t * es_.values[i] / hbar));
        return es_.vectors * ph.asDiagonal() * es_.vectors.adjoint();
    }

private:
    HermitianOperator h_;
    EigenSystem es_;
};

inline GridState evolve(const GridState& s, const HermitianOperator& h, double t) {
    return Propagator(h)(s, t);
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    [[nodiscard]] double stddev() const { return std::sqrt(variance); }
};

inline Moments moments(const HermitianOperator& op, const GridState& s) {
    const GridState a = apply(op, s);
    const double norm = s.norm2();
    require(norm > 0.0, ErrorCode::validation, "zero state");
    const double mean = std::real(inner(s, a)) / norm;
    const double second = a.norm2() / norm;
    return {mean, std::max(0.0, second - mean * mean)};
}

inline Moments moments(const HermitianOperator& op, const Ensemble& rho) {
    double w = 0.0, m1 = 0.0, m2 = 0.0;
    for (const auto& [weight, psi] : rho.members) {
        const GridState a = apply(op, psi);
        const double norm = psi.norm2();
        m1 += weight * std::real(inner(psi, a)) / norm;
        m2 += weight * a.norm2() / norm;
        w += weight;
    }
    require(w > 0.0, ErrorCode::validation, "ensemble has no weight");
    m1 /= w;
    m2 /= w;
    return {m1, std::max(0.0, m2 - m1 * m1)};
}

// ---------------------------------------------------------------- temporal amplitudes

/// f(t) and f~(E) = (2 pi)^{-1} int f(t) e^{itE/hbar} dt on reciprocal grids.
struct TemporalAmplitude {
    Axis time_axis;
    VectorXcd f;
    Axis energy_axis;
    VectorXcd f_tilde;
    double hbar = 1.0;
    bool truncated = false;  // |f| at the time-grid edges exceeded the tail tolerance
};

inline TemporalAmplitude fourier_pair(const Axis& time_axis, const VectorXcd& f, double hbar = 1.0,
                                      double energy_center = 0.0, double tail_tol = 1e-8) {
    require(static_cast<std::size_t>(f.size()) == time_axis.count, ErrorCode::validation,
            "sample count does not match time axis");
    require(f.allFinite(), ErrorCode::validation, "non-finite samples");
    const Axis e = conjugate_axis(time_axis, hbar, energy_center);
    auto out = detail::shifted_dft(detail::as_span(f), time_axis.start, time_axis.step, e.start, e.step, hbar, +1);
    const double scale = time_axis.step / (2.0 * pi);
    for (auto& z : out) z *= scale;
    const double peak = f.cwiseAbs().maxCoeff();
    const double edge = std::max(std::abs(f[0]), std::abs(f[f.size() - 1]));
    return {time_axis, f, e, detail::to_vector(out), hbar, edge > tail_tol * peak};
}

template <class F>
TemporalAmplitude fourier_pair_of(const Axis& time_axis, F&& fn, double hbar = 1.0, double energy_center = 0.0) {
    VectorXcd v(static_cast<Eigen::Index>(time_axis.count));
    for (std::size_t i = 0; i < time_axis.count; ++i) v[static_cast<Eigen::Index>(i)] = cplx(fn(time_axis[i]));
    return fourier_pair(time_axis, v, hbar, energy_center);
}

/// Direct quadrature of the same transform at one energy.
inline cplx fourier_direct(const Axis& time_axis, const VectorXcd& f, double E, double hbar = 1.0) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < time_axis.count; ++j)
        s += f[static_cast<Eigen::Index>(j)] * std::exp(cplx(0.0, time_axis[j] * E / hbar));
    return s * time_axis.step / (2.0 * pi);
}

/// Exact inverse of fourier_pair: f(t) = hbar^{-1} int f~(E) e^{-itE/hbar} dE.
inline VectorXcd inverse_fourier(const TemporalAmplitude& a) {
    auto out = detail::shifted_dft(detail::as_span(a.f_tilde), a.energy_axis.start, a.energy_axis.step,
                                   a.time_axis.start, a.time_axis.step, a.hbar, -1);
    for (auto& z : out) z *= a.energy_axis.step / a.hbar;
    return detail::to_vector(out);
}

// ---------------------------------------------------------------- parallelism

/// Worker cap: TEMPUS_THREADS if set to a positive integer, else hardware concurrency.
inline unsigned thread_cap() {
    if (const char* env = std::getenv("TEMPUS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n) over contiguous chunks. fn must write only to slot i,
/// so results do not depend on the chunking.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    const std::size_t workers = std::min<std::size_t>(thread_cap(), n / 64 + 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&fn, &err = errors[w], lo, hi] {
                try {
                    for (std::size_t i = lo; i < hi; ++i) fn(i);
                } catch (...) {
                    err = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------- CSV

inline void write_csv(std::ostream& os, const Axis& axis, const VectorXcd& v) {
    os << axis_name(axis.kind) << ",re,im\n";
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < axis.count; ++i) {
        const cplx z = v[static_cast<Eigen::Index>(i)];
        os << axis[i] << ',' << z.real() << ',' << z.imag() << '\n';
    }
    os.precision(old);
}

inline void write_csv(std::ostream& os, const GridState& s) { write_csv(os, s.axis(), s.amplitudes()); }

}  // namespace tempus
