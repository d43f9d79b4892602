#pragma once

// Constants of motion: 1D sub-Hamiltonians, ladder and shift functions, the
// complex integrals X+-, their real parts, angular momentum and the quadratic
// integrals of the RDG / KdV Henon-Heiles families.

#include <complex>
#include <string_view>
#include <vector>

#include "kmech/complex.hpp"
#include "kmech/systems.hpp"

namespace kmech {

enum class IntegralName {
    H_xi,
    E_kappa,
    B_plus,
    B_minus,
    A_plus,
    A_minus,
    X_complex,
    X_real,
    Y_real,
    J_angular,
    L_rdg,
    L_superposed,
    I_hh_kdv,
};

std::string_view to_string(IntegralName n);
IntegralName integral_from_string(std::string_view name);

/// B+-, A+- and X+- are complex valued.
bool is_complex(IntegralName n);

struct IntegralSpec {
    IntegralName name = IntegralName::H_xi;
    SystemSpec system;
    int sign = +1;  // X_complex only

    std::string label() const;
};

/// Throws SpecError when the integral is not defined for the system.
void check_compatible(const IntegralSpec& spec);

/// Real-valued integrals that the catalog declares for a system.
std::vector<IntegralName> declared_integrals(const SystemSpec& spec);

nlohmann::json to_json(const IntegralSpec& spec);
IntegralSpec integral_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Oscillator data shared by every anisotropic-oscillator integral.

struct OscillatorParams {
    double omega = 1.0;
    double gamma = 1.0;
    Rational ratio;      // gamma = m/n
    bool exact = true;   // false for decimal gamma
    double lambda1 = 0.0;
    bool swapped = false;  // type II chart: x1 <-> x2
};

/// Throws SpecError for non-oscillator families.
OscillatorParams oscillator_params(const SystemSpec& spec);

/// xi = gamma x and its momentum p_xi = p_x / gamma, plus (y, p_y).
template <class T>
struct SplitVars {
    T xi, pxi, x, y, py;
    double kappa;
};

template <class T>
SplitVars<T> split_vars(const OscillatorParams& o, const StateT<T>& s) {
    const ParallelState<T> p = systems_detail::oscillator_point(s, o.swapped);
    return {T(o.gamma * p.x), p.px / o.gamma, p.x, p.y, p.py, p.kappa};
}

/// H^xi with the divergent constant omega^2 / (2 kappa gamma^2) removed; equal to
/// the flat H^xi when kappa = 0.
template <class T>
T h_xi_regular(const OscillatorParams& o, const SplitVars<T>& v) {
    const double g2 = o.gamma * o.gamma;
    const T t = tk(v.kappa, v.xi);
    T h = 0.5 * v.pxi * v.pxi + o.omega * o.omega * t * t / (2.0 * g2);
    if (o.lambda1 != 0.0) h = h + o.lambda1 * systems_detail::inverse_square(sk(v.kappa, v.x), "Sk(x)") / g2;
    return h;
}

template <class T>
T h_xi(const SystemSpec& spec, const StateT<T>& s) {
    const OscillatorParams o = oscillator_params(spec);
    const SplitVars<T> v = split_vars(o, s);
    T h = h_xi_regular(o, v);
    // curved form: 1/(2 kappa gamma^2 Ck^2) = 1/(2 kappa gamma^2) + Tk^2/(2 gamma^2)
    if (v.kappa != 0.0) {
        const T c = ck(v.kappa, v.xi);
        if (std::abs(value(c)) < kPoleTolerance) throw PoleError("H_xi pole: Ck(xi) = 0");
        h = h + o.omega * o.omega / (2.0 * v.kappa * o.gamma * o.gamma);
    }
    return h;
}

/// sqrt(2 kappa H^xi) = sqrt(omega^2/gamma^2 + 2 kappa H~^xi); omega/gamma at kappa = 0.
template <class T>
T e_kappa_of(const OscillatorParams& o, const SplitVars<T>& v) {
    using std::sqrt;
    const T rad = o.omega * o.omega / (o.gamma * o.gamma) + 2.0 * v.kappa * h_xi_regular(o, v);
    if (value(rad) < 0.0) {
        throw NegativeRadicandError("E_kappa: 2 kappa H_xi = " + std::to_string(value(rad)) + " < 0");
    }
    return sqrt(rad);
}

template <class T>
T e_kappa(const SystemSpec& spec, const StateT<T>& s) {
    const OscillatorParams o = oscillator_params(spec);
    return e_kappa_of(o, split_vars(o, s));
}

/// B+- = -+(i/sqrt2) Ck(xi) p_xi + (E/sqrt2) Sk(xi).
template <class T>
Complex<T> ladder(const SystemSpec& spec, const StateT<T>& s, int sign) {
    const OscillatorParams o = oscillator_params(spec);
    const SplitVars<T> v = split_vars(o, s);
    const T e = e_kappa_of(o, v);
    const double r = std::numbers::sqrt2 / 2.0;
    return {e * sk(v.kappa, v.xi) * r, -static_cast<double>(sign) * r * ck(v.kappa, v.xi) * v.pxi};
}

/// A+- = -+(i/sqrt2) p_y - (gamma E/sqrt2) Tk(y).
template <class T>
Complex<T> shift(const SystemSpec& spec, const StateT<T>& s, int sign) {
    const OscillatorParams o = oscillator_params(spec);
    const SplitVars<T> v = split_vars(o, s);
    const T e = e_kappa_of(o, v);
    const double r = std::numbers::sqrt2 / 2.0;
    return {T(0.0) - o.gamma * r * e * tk(v.kappa, v.y), -static_cast<double>(sign) * r * v.py};
}

inline constexpr std::int64_t kMaxLadderPower = 12;

/// X+- = (B+-)^n (A+-)^m for gamma = m/n.
template <class T>
Complex<T> x_complex(const SystemSpec& spec, const StateT<T>& s, int sign) {
    const OscillatorParams o = oscillator_params(spec);
    if (!o.exact) throw SpecError("X+- needs a rational gamma = m/n (decimal gamma given)");
    if (o.ratio.m > kMaxLadderPower || o.ratio.n > kMaxLadderPower) {
        throw SpecError("X+-: m and n are limited to " + std::to_string(kMaxLadderPower));
    }
    const Complex<T> b = ladder(spec, s, sign);
    const Complex<T> a = shift(spec, s, sign);
    return cpow(b, static_cast<int>(o.ratio.n)) * cpow(a, static_cast<int>(o.ratio.m));
}

template <class T>
struct RealPair {
    T x, y;
};

/// Real integrals (X, Y) extracted from X+.
template <class T>
RealPair<T> real_integrals(const SystemSpec& spec, const StateT<T>& s) {
    const OscillatorParams o = oscillator_params(spec);
    const Complex<T> xp = x_complex(spec, s, +1);
    if (kappa_of(s) == 0.0) return {xp.re, xp.im};
    const T e = e_kappa_of(o, split_vars(o, s));
    if (std::abs(value(e)) < 1e-12) throw ZeroEnergyError("E_kappa vanishes; X/Y extraction is singular");
    if ((o.ratio.m + o.ratio.n) % 2 == 0) return {xp.re, xp.im / e};
    return {xp.re / e, xp.im};
}

template <class T>
T angular_momentum(const StateT<T>& s) {
    return lie_generators(s).j12;
}

/// J01 J12 + weight * potential, the common shape of every RDG-type integral.
template <class T>
T rdg_like(const StateT<T>& s, const T& tail) {
    const Generators<T> g = lie_generators(s);
    return g.j01 * g.j12 + rdg_weight(s) * tail;
}

template <class T>
T rdg_integral(const SystemSpec& spec, const StateT<T>& s) {
    const double k = kappa_of(s);
    switch (spec.family) {
        case Family::rdg_flat:
        case Family::rdg_curved:
            return rdg_like(s, T(spec.rdg_alpha * rdg_curved_potential(spec.rdg_order - 1, k, s)));
        case Family::curved_21_typeII:
            return rdg_like(s, T(0.5 * spec.omega * spec.omega * rdg_curved_potential(1, k, s)));
        case Family::rdg_superposed: {
            T tail(0.0);
            for (std::size_t n = 1; n <= spec.coefficients.size(); ++n) {
                const double a = spec.coefficients[n - 1];
                if (a != 0.0) tail = tail + a * rdg_curved_potential(static_cast<int>(n) - 1, k, s);
            }
            return rdg_like(s, tail);
        }
        case Family::henon_heiles_kdv_flat:
        case Family::henon_heiles_kdv_curved:
            return rdg_like(s, T(spec.Omega * rdg_curved_potential(1, k, s) +
                                 0.25 * spec.alpha * rdg_curved_potential(2, k, s)));
        default:
            throw SpecError(std::string("no RDG-type integral for family ") +
                            std::string(to_string(spec.family)));
    }
}

/// Value of a real-valued integral.
template <class T>
T evaluate(const IntegralSpec& spec, const StateT<T>& s) {
    switch (spec.name) {
        case IntegralName::H_xi: return h_xi(spec.system, s);
        case IntegralName::E_kappa: return e_kappa(spec.system, s);
        case IntegralName::X_real: return real_integrals(spec.system, s).x;
        case IntegralName::Y_real: return real_integrals(spec.system, s).y;
        case IntegralName::J_angular: return angular_momentum(s);
        case IntegralName::L_rdg:
        case IntegralName::L_superposed:
        case IntegralName::I_hh_kdv: return rdg_integral(spec.system, s);
        default:
            throw SpecError(std::string(to_string(spec.name)) +
                            " is complex valued; use evaluate_complex or X_real/Y_real");
    }
}

template <class T>
Complex<T> evaluate_complex(const IntegralSpec& spec, const StateT<T>& s) {
    switch (spec.name) {
        case IntegralName::B_plus: return ladder(spec.system, s, +1);
        case IntegralName::B_minus: return ladder(spec.system, s, -1);
        case IntegralName::A_plus: return shift(spec.system, s, +1);
        case IntegralName::A_minus: return shift(spec.system, s, -1);
        case IntegralName::X_complex: return x_complex(spec.system, s, spec.sign);
        default: return {evaluate(spec, s), T(0.0)};
    }
}

double evaluate(const IntegralSpec& spec, const State& s);
std::complex<double> evaluate_complex(const IntegralSpec& spec, const State& s);

}  // namespace kmech
