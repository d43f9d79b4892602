#pragma once

// Forward-mode dual numbers carrying a gradient with respect to up to six
// canonical variables (the ambient chart has three coordinates plus three
// momenta). Every catalog formula is a template over the scalar type so the
// same source yields values (double) and exact first derivatives (Dual).

#include <array>
#include <cmath>
#include <cstddef>

namespace kmech {

inline constexpr std::size_t kMaxVars = 6;

struct Dual {
    double v = 0.0;
    std::array<double, kMaxVars> d{};

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value) {}  // NOLINT: constants promote implicitly

    static Dual variable(double value, std::size_t index) {
        Dual x(value);
        x.d[index] = 1.0;
        return x;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (std::size_t i = 0; i < kMaxVars; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (std::size_t i = 0; i < kMaxVars; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (std::size_t i = 0; i < kMaxVars; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const double inv = 1.0 / o.v;
        const double q = v * inv;
        for (std::size_t i = 0; i < kMaxVars; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
        v = q;
        return *this;
    }
    Dual& operator*=(double s) {
        v *= s;
        for (auto& x : d) x *= s;
        return *this;
    }
};

/// Applies the chain rule: result has value f and derivative df * x'.
inline Dual chain(const Dual& x, double f, double df) {
    Dual r(f);
    for (std::size_t i = 0; i < kMaxVars; ++i) r.d[i] = df * x.d[i];
    return r;
}

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator+(Dual a, double b) { a.v += b; return a; }
inline Dual operator+(double a, Dual b) { b.v += a; return b; }
inline Dual operator-(Dual a, double b) { a.v -= b; return a; }
inline Dual operator-(double a, const Dual& b) {
    Dual r = chain(b, a - b.v, -1.0);
    return r;
}
inline Dual operator*(Dual a, double s) { return a *= s; }
inline Dual operator*(double s, Dual a) { return a *= s; }
inline Dual operator/(Dual a, double s) { return a *= (1.0 / s); }
inline Dual operator/(double a, const Dual& b) { return chain(b, a / b.v, -a / (b.v * b.v)); }
inline Dual operator-(const Dual& a) { return chain(a, -a.v, -1.0); }
inline Dual operator+(const Dual& a) { return a; }

inline Dual sqrt(const Dual& x) {
    const double s = std::sqrt(x.v);
    return chain(x, s, 0.5 / s);
}
inline Dual sin(const Dual& x) { return chain(x, std::sin(x.v), std::cos(x.v)); }
inline Dual cos(const Dual& x) { return chain(x, std::cos(x.v), -std::sin(x.v)); }
inline Dual sinh(const Dual& x) { return chain(x, std::sinh(x.v), std::cosh(x.v)); }
inline Dual cosh(const Dual& x) { return chain(x, std::cosh(x.v), std::sinh(x.v)); }
inline Dual exp(const Dual& x) {
    const double e = std::exp(x.v);
    return chain(x, e, e);
}
inline Dual log(const Dual& x) { return chain(x, std::log(x.v), 1.0 / x.v); }
inline Dual asinh(const Dual& x) {
    return chain(x, std::asinh(x.v), 1.0 / std::sqrt(1.0 + x.v * x.v));
}
inline Dual atan2(const Dual& y, const Dual& x) {
    const double r2 = x.v * x.v + y.v * y.v;
    Dual r(std::atan2(y.v, x.v));
    for (std::size_t i = 0; i < kMaxVars; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) / r2;
    return r;
}

inline double value(double x) { return x; }
inline double value(const Dual& x) { return x.v; }

template <class T>
T square(const T& x) {
    return x * x;
}

/// Integer power by repeated multiplication.
template <class T>
T ipow(const T& x, int k) {
    T r(1.0);
    for (int i = 0; i < k; ++i) r = r * x;
    return r;
}

}  // namespace kmech
