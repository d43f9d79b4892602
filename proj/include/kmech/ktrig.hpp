#pragma once

// Curvature-dependent trigonometry. Ck/Sk/Tk interpolate between circular
// (kappa > 0), parabolic (kappa = 0) and hyperbolic (kappa < 0) functions.
// All functions are templates so that they propagate dual-number gradients.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "kmech/dual.hpp"
#include "kmech/errors.hpp"

namespace kmech {

enum class SpaceKind { sphere, euclidean, hyperbolic };

/// Gaussian curvature of the configuration space.
class Curvature {
public:
    constexpr explicit Curvature(double kappa = 0.0) : kappa_(kappa) {}

    constexpr double value() const { return kappa_; }

    constexpr SpaceKind kind() const {
        if (kappa_ > 0.0) return SpaceKind::sphere;
        if (kappa_ < 0.0) return SpaceKind::hyperbolic;
        return SpaceKind::euclidean;
    }

    /// R with kappa = +-1/R^2; empty on the Euclidean plane.
    std::optional<double> radius() const {
        if (kappa_ == 0.0) return std::nullopt;
        return 1.0 / std::sqrt(std::abs(kappa_));
    }

private:
    double kappa_;
};

std::string to_string(SpaceKind kind);

namespace ktrig_detail {
// Series branch is used when |kappa x^2| is below this value.
inline constexpr double kSeriesThreshold = 1e-4;
inline constexpr int kSeriesTerms = 10;
}  // namespace ktrig_detail

/// Tolerance below which |Ck| counts as a pole of Tk.
inline constexpr double kPoleTolerance = 1e-12;

template <class T>
T ck(double kappa, const T& x) {
    using std::cos;
    using std::cosh;
    if (kappa == 0.0) return T(1.0);
    const double xv = value(x);
    if (std::abs(kappa * xv * xv) < ktrig_detail::kSeriesThreshold) {
        // sum_l (-kappa x^2)^l / (2l)!, evaluated by Horner from the tail
        const T u = -kappa * (x * x);
        T acc(1.0);
        for (int l = ktrig_detail::kSeriesTerms - 1; l >= 1; --l) {
            const double denom = static_cast<double>((2 * l) * (2 * l - 1));
            acc = 1.0 + u * acc / denom;
        }
        return acc;
    }
    if (kappa > 0.0) return cos(std::sqrt(kappa) * x);
    return cosh(std::sqrt(-kappa) * x);
}

template <class T>
T sk(double kappa, const T& x) {
    using std::sin;
    using std::sinh;
    if (kappa == 0.0) return x;
    const double xv = value(x);
    if (std::abs(kappa * xv * xv) < ktrig_detail::kSeriesThreshold) {
        // x * sum_l (-kappa x^2)^l / (2l+1)!
        const T u = -kappa * (x * x);
        T acc(1.0);
        for (int l = ktrig_detail::kSeriesTerms - 1; l >= 1; --l) {
            const double denom = static_cast<double>((2 * l + 1) * (2 * l));
            acc = 1.0 + u * acc / denom;
        }
        return x * acc;
    }
    if (kappa > 0.0) {
        const double s = std::sqrt(kappa);
        return sin(s * x) / s;
    }
    const double s = std::sqrt(-kappa);
    return sinh(s * x) / s;
}

template <class T>
T tk(double kappa, const T& x) {
    const T c = ck(kappa, x);
    if (std::abs(value(c)) < kPoleTolerance) {
        throw PoleError("Tk pole: Ck(kappa=" + std::to_string(kappa) + ", x=" +
                        std::to_string(value(x)) + ") vanishes");
    }
    return sk(kappa, x) / c;
}

template <class T>
T dck(double kappa, const T& x) {
    return -kappa * sk(kappa, x);
}

template <class T>
T dsk(double kappa, const T& x) {
    return ck(kappa, x);
}

template <class T>
T dtk(double kappa, const T& x) {
    const T c = ck(kappa, x);
    if (std::abs(value(c)) < kPoleTolerance) {
        throw PoleError("dTk pole: Ck(kappa=" + std::to_string(kappa) + ", x=" +
                        std::to_string(value(x)) + ") vanishes");
    }
    return 1.0 / (c * c);
}

/// Inverse of (Ck, Sk): the u with Ck(u) = c, Sk(u) = s, assuming
/// c^2 + kappa s^2 = 1. On the sphere the result lies in (-pi/sqrt k, pi/sqrt k];
/// on the hyperbolic plane c > 0 is required.
template <class T>
T karc(double kappa, const T& c, const T& s) {
    using std::asinh;
    using std::atan2;
    if (kappa == 0.0) return s;
    if (kappa > 0.0) {
        const double r = std::sqrt(kappa);
        return atan2(r * s, c) / r;
    }
    const double r = std::sqrt(-kappa);
    return asinh(r * s) / r;
}

/// pi / sqrt(kappa) for kappa > 0 (the sphere's half circumference); +inf otherwise.
inline double half_period(double kappa) {
    if (kappa > 0.0) return std::numbers::pi / std::sqrt(kappa);
    return std::numeric_limits<double>::infinity();
}

}  // namespace kmech
