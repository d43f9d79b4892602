#pragma once

// Minimal complex arithmetic over an arbitrary real scalar. std::complex is
// only specified for floating-point types, and the ladder/shift functions
// have to carry dual-number gradients.

#include <complex>

namespace kmech {

template <class T>
struct Complex {
    T re{};
    T im{};

    Complex() = default;
    Complex(T r, T i) : re(std::move(r)), im(std::move(i)) {}

    Complex conj() const { return {re, T(0.0) - im}; }
};

template <class T>
Complex<T> operator+(const Complex<T>& a, const Complex<T>& b) {
    return {a.re + b.re, a.im + b.im};
}
template <class T>
Complex<T> operator-(const Complex<T>& a, const Complex<T>& b) {
    return {a.re - b.re, a.im - b.im};
}
template <class T>
Complex<T> operator*(const Complex<T>& a, const Complex<T>& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T>
Complex<T> operator*(const Complex<T>& a, double s) {
    return {a.re * s, a.im * s};
}

template <class T>
Complex<T> cpow(const Complex<T>& z, int k) {
    Complex<T> r{T(1.0), T(0.0)};
    for (int i = 0; i < k; ++i) r = r * z;
    return r;
}

inline std::complex<double> to_std(const Complex<double>& z) { return {z.re, z.im}; }

}  // namespace kmech
