#pragma once

// Hamiltonian catalog: kinetic energy per chart plus every potential family.
// Formulas are templates over the scalar so values and gradients share code.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kmech/charts.hpp"

namespace kmech {

enum class Family {
    free,
    aniso_oscillator,
    aniso_oscillator_rosochatius,
    higgs,
    curved_21_typeII,
    rdg_flat,
    rdg_curved,
    rdg_superposed,
    henon_heiles_kdv_flat,
    henon_heiles_kdv_curved,
    henon_heiles_sk_flat,
    henon_heiles_kk_flat,
    kepler_coulomb,
};

inline constexpr Family kAllFamilies[] = {
    Family::free,
    Family::aniso_oscillator,
    Family::aniso_oscillator_rosochatius,
    Family::higgs,
    Family::curved_21_typeII,
    Family::rdg_flat,
    Family::rdg_curved,
    Family::rdg_superposed,
    Family::henon_heiles_kdv_flat,
    Family::henon_heiles_kdv_curved,
    Family::henon_heiles_sk_flat,
    Family::henon_heiles_kk_flat,
    Family::kepler_coulomb,
};

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

/// Positive rational m/n in lowest terms.
struct Rational {
    std::int64_t m = 1;
    std::int64_t n = 1;

    double value() const { return static_cast<double>(m) / static_cast<double>(n); }
    std::string str() const;
    bool operator==(const Rational&) const = default;
};

Rational make_rational(std::int64_t m, std::int64_t n);

/// "m/n", "m" or a decimal. Decimals come back with `exact == false`.
struct GammaValue {
    Rational ratio;
    double value = 1.0;
    bool exact = true;
};
GammaValue parse_gamma(std::string_view text);

struct SystemSpec {
    Family family = Family::free;
    double kappa = 0.0;
    double omega = 1.0;
    GammaValue gamma;
    double Omega = 1.0;
    std::optional<double> Omega2;  // flat KdV only; 4 Omega when absent
    double alpha = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::vector<double> coefficients;  // alpha_1..alpha_M for rdg_superposed
    std::optional<double> delta;       // Higgs strength; omega^2 / 2 when absent
    double k_coulomb = 1.0;
    int rdg_order = 1;        // n for rdg_flat / rdg_curved
    double rdg_alpha = 1.0;   // alpha_n for rdg_flat / rdg_curved

    double gamma_value() const { return gamma.value; }
    double higgs_delta() const { return delta.value_or(0.5 * omega * omega); }
    double kdv_omega2() const { return Omega2.value_or(4.0 * Omega); }
};

/// Chart in which the family's formulas are written.
Chart native_chart(Family f);

/// Parameter names a family reads from {"params": {...}}.
std::vector<std::string> relevant_params(Family f);

/// Families whose formulas only exist on the Euclidean plane.
bool is_flat_only(Family f);

/// Throws SpecError for inconsistent parameters.
void validate(const SystemSpec& spec);

nlohmann::json to_json(const SystemSpec& spec);
SystemSpec system_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// RDG building blocks.

double binomial(int n, int k);

/// Flat V_n(q1, q2); V_0 = 1.
template <class T>
T rdg_flat_potential(int n, const T& q1, const T& q2) {
    if (n < 0) throw SpecError("RDG order must be >= 0");
    if (n == 0) return T(1.0);
    T sum(0.0);
    for (int i = 0; i <= n / 2; ++i) {
        const double c = std::ldexp(binomial(n - i, i), n - 2 * i);
        sum = sum + c * ipow(q1, 2 * i) * ipow(q2, n - 2 * i);
    }
    return sum;
}

/// Curved V_{kappa,n} in Beltrami coordinates.
template <class T>
T rdg_curved_beltrami(int n, double kappa, const T& q1, const T& q2) {
    using std::sqrt;
    if (n < 0) throw SpecError("RDG order must be >= 0");
    const T w = 1.0 + kappa * (q1 * q1 + q2 * q2);
    const T d = 1.0 - kappa * q2 * q2;
    if (std::abs(value(d)) < kPoleTolerance) throw PoleError("curved RDG pole: 1 - kappa q2^2 = 0");
    if (n == 0) return (1.0 + kappa * q2 * q2) * w / (d * d);
    const T pref = (w / d) * (w / d);
    const T a = q1 * q1 / w;  // (q1 / sqrt(w))^2
    const T b = q2 / w;
    T sum(0.0);
    for (int i = 0; i <= n / 2; ++i) {
        const double c = std::ldexp(binomial(n - i, i), n - 2 * i);
        const double ratio = static_cast<double>(i) / static_cast<double>(n - i);
        sum = sum + c * ipow(a, i) * (1.0 - ratio * kappa * a) * ipow(b, n - 2 * i);
    }
    return pref * sum;
}

/// Curved V_{kappa,n} in ambient coordinates (valid on the whole surface).
template <class T>
T rdg_curved_ambient(int n, double kappa, const std::array<T, 3>& x) {
    if (n < 0) throw SpecError("RDG order must be >= 0");
    const T d = x[0] * x[0] - kappa * x[2] * x[2];
    if (std::abs(value(d)) < kPoleTolerance) throw PoleError("curved RDG pole: x0^2 - kappa x2^2 = 0");
    const T den = d * d;
    if (n == 0) return (1.0 - kappa * x[1] * x[1]) / den;
    const T x1s = x[1] * x[1];
    const T x02 = x[0] * x[2];
    T sum(0.0);
    for (int i = 0; i <= n / 2; ++i) {
        const double c = std::ldexp(binomial(n - i, i), n - 2 * i);
        const double ratio = static_cast<double>(i) / static_cast<double>(n - i);
        sum = sum + c * ipow(x1s, i) * (1.0 - ratio * kappa * x1s) * ipow(x02, n - 2 * i);
    }
    return sum / den;
}

/// V_{kappa,n} on any chart: the Beltrami form on Beltrami states, the ambient
/// form (at the normalized point) everywhere else.
template <class T>
T rdg_curved_potential(int n, double kappa, const StateT<T>& s) {
    if (auto* b = std::get_if<BeltramiState<T>>(&s)) return rdg_curved_beltrami(n, kappa, b->q1, b->q2);
    return rdg_curved_ambient(n, kappa, normalized(to_ambient(s)).x);
}

/// q1^2 / (1 + kappa q^2), which equals x1^2 on the surface.
template <class T>
T rdg_weight(const StateT<T>& s) {
    if (auto* b = std::get_if<BeltramiState<T>>(&s)) {
        return b->q1 * b->q1 / (1.0 + b->kappa * (b->q1 * b->q1 + b->q2 * b->q2));
    }
    const AmbientState<T> a = normalized(to_ambient(s));
    return a.x[1] * a.x[1];
}

// ---------------------------------------------------------------------------
// Kinetic energy.

template <class T>
T kinetic_energy(const AmbientState<T>& a) {
    // Casimir form; equals (kappa pi0^2 + pi1^2 + pi2^2)/2 on the constraint surface
    const Generators<T> g = lie_generators(a);
    return 0.5 * (g.j01 * g.j01 + g.j02 * g.j02 + a.kappa * g.j12 * g.j12);
}

template <class T>
T kinetic_energy(const ParallelState<T>& p) {
    const T cy = ck(p.kappa, p.y);
    if (std::abs(value(cy)) < kPoleTolerance) throw PoleError("parallel kinetic energy: Ck(y) = 0");
    return 0.5 * (p.px * p.px / (cy * cy) + p.py * p.py);
}

template <class T>
T kinetic_energy(const PolarState<T>& p) {
    const T sr = sk(p.kappa, p.r);
    if (std::abs(value(sr)) < kPoleTolerance) throw PoleError("polar kinetic energy: Sk(r) = 0");
    return 0.5 * (p.pr * p.pr + p.pphi * p.pphi / (sr * sr));
}

template <class T>
T kinetic_energy(const BeltramiState<T>& b) {
    const double k = b.kappa;
    const T q2 = b.q1 * b.q1 + b.q2 * b.q2;
    const T qp = b.q1 * b.p1 + b.q2 * b.p2;
    return 0.5 * (1.0 + k * q2) * (b.p1 * b.p1 + b.p2 * b.p2 + k * qp * qp);
}

template <class T>
T kinetic_energy(const StateT<T>& s) {
    return std::visit([](const auto& v) { return kinetic_energy(v); }, s);
}

// ---------------------------------------------------------------------------
// Potentials.

namespace systems_detail {

template <class T>
T inverse_square(const T& v, const char* what) {
    if (std::abs(value(v)) < kPoleTolerance) throw PoleError(std::string("pole: ") + what + " = 0");
    return 1.0 / (v * v);
}

/// Parallel-chart point used by the oscillator formulas. Ambient input is
/// normalized first; the type II system reads the chart with x1, x2 swapped.
template <class T>
ParallelState<T> oscillator_point(const StateT<T>& s, bool swapped) {
    if (!swapped) {
        if (auto* p = std::get_if<ParallelState<T>>(&s)) return *p;
    }
    AmbientState<T> a = to_ambient(s);
    if (std::holds_alternative<AmbientState<T>>(s)) a = normalized(a);
    if (swapped) a = swap_axes(a);
    return ambient_to_parallel(a);
}

/// Ambient positions on the surface, for decorators written as lambda_i / x_i^2.
template <class T>
std::array<T, 3> surface_point(const StateT<T>& s) {
    AmbientState<T> a = to_ambient(s);
    if (std::holds_alternative<AmbientState<T>>(s)) a = normalized(a);
    return a.x;
}

/// (omega^2/2)(Tk^2(gamma x)/Ck^2(y) + Tk^2(y)).
template <class T>
T oscillator_potential(double omega, double gamma, const ParallelState<T>& p) {
    const double k = p.kappa;
    const T tx = tk(k, T(gamma * p.x));
    const T ty = tk(k, p.y);
    const T inv_cy2 = inverse_square(ck(k, p.y), "Ck(y)");
    return 0.5 * omega * omega * (tx * tx * inv_cy2 + ty * ty);
}

template <class T>
T higgs_shape(const StateT<T>& s) {
    // Tk^2(r): q^2 in Beltrami, rho^2 / x0^2 in ambient
    if (auto* b = std::get_if<BeltramiState<T>>(&s)) return b->q1 * b->q1 + b->q2 * b->q2;
    if (auto* p = std::get_if<PolarState<T>>(&s)) {
        const T t = tk(p->kappa, p->r);
        return t * t;
    }
    if (auto* p = std::get_if<ParallelState<T>>(&s)) {
        const T tx = tk(p->kappa, p->x), ty = tk(p->kappa, p->y);
        return tx * tx * inverse_square(ck(p->kappa, p->y), "Ck(y)") + ty * ty;
    }
    const auto x = surface_point(s);
    return (x[1] * x[1] + x[2] * x[2]) * inverse_square(x[0], "x0");
}

template <class T>
T flat_q(const StateT<T>& s, int i) {
    // On the Euclidean plane Beltrami and Cartesian coordinates coincide.
    if (auto* b = std::get_if<BeltramiState<T>>(&s)) return i == 1 ? b->q1 : b->q2;
    const auto x = surface_point(s);
    return i == 1 ? x[1] / x[0] : x[2] / x[0];
}

}  // namespace systems_detail

template <class T>
T potential(const SystemSpec& spec, const StateT<T>& s) {
    using namespace systems_detail;
    const double k = kappa_of(s);
    switch (spec.family) {
        case Family::free:
            return T(0.0);
        case Family::aniso_oscillator:
            return oscillator_potential(spec.omega, spec.gamma_value(), oscillator_point(s, false));
        case Family::aniso_oscillator_rosochatius: {
            const ParallelState<T> p = oscillator_point(s, false);
            T u = oscillator_potential(spec.omega, spec.gamma_value(), p);
            if (spec.lambda1 != 0.0) {
                u = u + spec.lambda1 * inverse_square(T(sk(k, p.x) * ck(k, p.y)), "Sk(x)Ck(y)");
            }
            if (spec.lambda2 != 0.0) u = u + spec.lambda2 * inverse_square(sk(k, p.y), "Sk(y)");
            return u;
        }
        case Family::higgs: {
            T u = spec.higgs_delta() * higgs_shape(s);
            if (spec.lambda1 != 0.0 || spec.lambda2 != 0.0) {
                const auto x = surface_point(s);
                if (spec.lambda1 != 0.0) u = u + spec.lambda1 * inverse_square(x[1], "x1");
                if (spec.lambda2 != 0.0) u = u + spec.lambda2 * inverse_square(x[2], "x2");
            }
            return u;
        }
        case Family::curved_21_typeII:
            return oscillator_potential(spec.omega, 2.0, oscillator_point(s, true));
        case Family::rdg_flat:
            return spec.rdg_alpha * rdg_flat_potential(spec.rdg_order, flat_q(s, 1), flat_q(s, 2));
        case Family::rdg_curved:
            return spec.rdg_alpha * rdg_curved_potential(spec.rdg_order, k, s);
        case Family::rdg_superposed: {
            T u(0.0);
            for (std::size_t n = 1; n <= spec.coefficients.size(); ++n) {
                const double a = spec.coefficients[n - 1];
                if (a != 0.0) u = u + a * rdg_curved_potential(static_cast<int>(n), k, s);
            }
            return u;
        }
        case Family::henon_heiles_kdv_flat: {
            const T q1 = flat_q(s, 1), q2 = flat_q(s, 2);
            return spec.Omega * q1 * q1 + spec.kdv_omega2() * q2 * q2 +
                   spec.alpha * (q1 * q1 * q2 + 2.0 * q2 * q2 * q2);
        }
        case Family::henon_heiles_kdv_curved:
            return spec.Omega * rdg_curved_potential(2, k, s) +
                   0.25 * spec.alpha * rdg_curved_potential(3, k, s);
        case Family::henon_heiles_sk_flat: {
            const T q1 = flat_q(s, 1), q2 = flat_q(s, 2);
            return spec.Omega * (q1 * q1 + q2 * q2) + spec.alpha * (q1 * q1 * q2 + q2 * q2 * q2 / 3.0);
        }
        case Family::henon_heiles_kk_flat: {
            const T q1 = flat_q(s, 1), q2 = flat_q(s, 2);
            return spec.Omega * (q1 * q1 + 16.0 * q2 * q2) +
                   spec.alpha * (q1 * q1 * q2 + 16.0 / 3.0 * q2 * q2 * q2);
        }
        case Family::kepler_coulomb: {
            using std::sqrt;
            const T q2 = higgs_shape(s);
            if (value(q2) < kPoleTolerance) throw PoleError("Kepler-Coulomb pole at the origin");
            return spec.k_coulomb / sqrt(q2);
        }
    }
    throw SpecError("unknown family");
}

template <class T>
T hamiltonian(const SystemSpec& spec, const StateT<T>& s) {
    return kinetic_energy(s) + potential(spec, s);
}

/// Value and gradient of a dual evaluation in canonical order.
struct Gradient {
    double value = 0.0;
    PhaseVector grad;
};

/// (dH/dcoords, dH/dmomenta) by forward-mode differentiation.
Gradient hamiltonian_gradient(const SystemSpec& spec, const State& s);

double kinetic_energy(const State& s);
double potential(const SystemSpec& spec, const State& s);
double hamiltonian(const SystemSpec& spec, const State& s);

}  // namespace kmech
