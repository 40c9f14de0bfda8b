#pragma once

#include <functional>
#include <initializer_list>
#include <random>

#include <tempus/core.hpp>

namespace tempus::test {

inline Axis two_level() { return Axis::fock(2); }

inline GridState ket(std::initializer_list<cplx> c) {
    VectorXcd v(static_cast<Eigen::Index>(c.size()));
    Eigen::Index i = 0;
    for (auto z : c) v[i++] = z;
    return GridState(Axis::fock(c.size()), v);
}

inline MatrixXcd random_hermitian(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
    return 0.5 * (m + m.adjoint());
}

inline GridState random_state(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
    return GridState(Axis::fock(static_cast<std::size_t>(n)), v).normalized();
}

inline double max_diff(const GridState& a, const GridState& b) {
    return (a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff();
}

inline VectorXcd sampled(const Axis& a, const std::function<cplx(double)>& fn) {
    VectorXcd v(static_cast<Eigen::Index>(a.count));
    for (std::size_t i = 0; i < a.count; ++i) v[static_cast<Eigen::Index>(i)] = fn(a[i]);
    return v;
}

}  // namespace tempus::test
