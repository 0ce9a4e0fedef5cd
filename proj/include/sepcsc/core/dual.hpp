#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace sepcsc::ad {

/**
 * @brief Forward-mode dual number carrying N directional derivatives.
 *
 * Used to differentiate the smoothed Hamiltonian with respect to the seven
 * states in a single pass. Only the functions the dynamics need are provided.
 */
template <std::size_t N> struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value) {} // NOLINT: implicit by design of AD scalars

    static Dual variable(double value, std::size_t index) {
        Dual out(value);
        out.d[index] = 1.0;
        return out;
    }

    Dual &operator+=(const Dual &o) {
        v += o.v;
        for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual &operator-=(const Dual &o) {
        v -= o.v;
        for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual &operator*=(const Dual &o) {
        for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual &operator/=(const Dual &o) {
        const double inv = 1.0 / o.v;
        for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
        v *= inv;
        return *this;
    }
};

// Chain rule helper: value f, derivative df/dx.
template <std::size_t N> Dual<N> apply(const Dual<N> &x, double f, double df) {
    Dual<N> out(f);
    for (std::size_t i = 0; i < N; ++i) out.d[i] = df * x.d[i];
    return out;
}

template <std::size_t N> Dual<N> operator-(const Dual<N> &a) {
    Dual<N> out(-a.v);
    for (std::size_t i = 0; i < N; ++i) out.d[i] = -a.d[i];
    return out;
}
template <std::size_t N> Dual<N> operator+(Dual<N> a, const Dual<N> &b) { return a += b; }
template <std::size_t N> Dual<N> operator-(Dual<N> a, const Dual<N> &b) { return a -= b; }
template <std::size_t N> Dual<N> operator*(Dual<N> a, const Dual<N> &b) { return a *= b; }
template <std::size_t N> Dual<N> operator/(Dual<N> a, const Dual<N> &b) { return a /= b; }

template <std::size_t N> Dual<N> operator+(Dual<N> a, double b) {
    a.v += b;
    return a;
}
template <std::size_t N> Dual<N> operator+(double a, Dual<N> b) {
    b.v += a;
    return b;
}
template <std::size_t N> Dual<N> operator-(Dual<N> a, double b) {
    a.v -= b;
    return a;
}
template <std::size_t N> Dual<N> operator-(double a, const Dual<N> &b) {
    Dual<N> out = -b;
    out.v += a;
    return out;
}
template <std::size_t N> Dual<N> operator*(Dual<N> a, double b) {
    a.v *= b;
    for (auto &x : a.d) x *= b;
    return a;
}
template <std::size_t N> Dual<N> operator*(double a, Dual<N> b) { return b * a; }
template <std::size_t N> Dual<N> operator/(Dual<N> a, double b) { return a * (1.0 / b); }
template <std::size_t N> Dual<N> operator/(double a, const Dual<N> &b) {
    const double inv = 1.0 / b.v;
    return apply(b, a * inv, -a * inv * inv);
}

template <std::size_t N> bool operator<(const Dual<N> &a, const Dual<N> &b) { return a.v < b.v; }
template <std::size_t N> bool operator>(const Dual<N> &a, const Dual<N> &b) { return a.v > b.v; }
template <std::size_t N> bool operator<(const Dual<N> &a, double b) { return a.v < b; }
template <std::size_t N> bool operator>(const Dual<N> &a, double b) { return a.v > b; }
template <std::size_t N> bool operator<=(const Dual<N> &a, double b) { return a.v <= b; }
template <std::size_t N> bool operator>=(const Dual<N> &a, double b) { return a.v >= b; }

template <std::size_t N> Dual<N> sqrt(const Dual<N> &x) {
    const double s = std::sqrt(x.v);
    return apply(x, s, 0.5 / s);
}
template <std::size_t N> Dual<N> sin(const Dual<N> &x) { return apply(x, std::sin(x.v), std::cos(x.v)); }
template <std::size_t N> Dual<N> cos(const Dual<N> &x) { return apply(x, std::cos(x.v), -std::sin(x.v)); }
template <std::size_t N> Dual<N> exp(const Dual<N> &x) {
    const double e = std::exp(x.v);
    return apply(x, e, e);
}
template <std::size_t N> Dual<N> log(const Dual<N> &x) { return apply(x, std::log(x.v), 1.0 / x.v); }
template <std::size_t N> Dual<N> log1p(const Dual<N> &x) {
    return apply(x, std::log1p(x.v), 1.0 / (1.0 + x.v));
}
template <std::size_t N> Dual<N> tanh(const Dual<N> &x) {
    const double t = std::tanh(x.v);
    return apply(x, t, 1.0 - t * t);
}
template <std::size_t N> Dual<N> abs(const Dual<N> &x) { return x.v < 0.0 ? -x : x; }
template <std::size_t N> Dual<N> pow(const Dual<N> &x, double p) {
    const double f = std::pow(x.v, p);
    return apply(x, f, p * std::pow(x.v, p - 1.0));
}

template <std::size_t N> bool isfinite(const Dual<N> &x) {
    if (!std::isfinite(x.v)) return false;
    for (double g : x.d)
        if (!std::isfinite(g)) return false;
    return true;
}

/// Value part of a scalar (identity for double).
inline double value(double x) { return x; }
template <std::size_t N> double value(const Dual<N> &x) { return x.v; }

} // namespace sepcsc::ad
