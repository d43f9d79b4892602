#pragma once

// Phase-space states in the four charts of the constant-curvature plane and
// the exact maps between them. Every conversion routes through the ambient
// (Weierstrass) chart: x0^2 + kappa (x1^2 + x2^2) = 1, x . pi = 0.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "kmech/dual.hpp"
#include "kmech/errors.hpp"
#include "kmech/ktrig.hpp"

namespace kmech {

enum class Chart { ambient, parallel, polar, beltrami };

std::string_view to_string(Chart chart);
Chart chart_from_string(std::string_view name);

/// Number of configuration coordinates of a chart (3 for ambient, 2 otherwise).
constexpr std::size_t dimension(Chart chart) { return chart == Chart::ambient ? 3 : 2; }

template <class T = double>
struct AmbientState {
    std::array<T, 3> x{};
    std::array<T, 3> pi{};
    double kappa = 0.0;
};

template <class T = double>
struct ParallelState {
    T x{}, y{}, px{}, py{};
    double kappa = 0.0;
};

template <class T = double>
struct PolarState {
    T r{}, phi{}, pr{}, pphi{};
    double kappa = 0.0;
};

template <class T = double>
struct BeltramiState {
    T q1{}, q2{}, p1{}, p2{};
    double kappa = 0.0;
};

template <class T>
using StateT = std::variant<AmbientState<T>, ParallelState<T>, PolarState<T>, BeltramiState<T>>;
using State = StateT<double>;

template <class T>
Chart chart_of(const StateT<T>& s) {
    return static_cast<Chart>(s.index());
}

template <class T>
double kappa_of(const StateT<T>& s) {
    return std::visit([](const auto& v) { return v.kappa; }, s);
}

// ---------------------------------------------------------------------------
// Flat canonical vectors: coordinates first, then momenta.

struct PhaseVector {
    std::array<double, kMaxVars> v{};
    std::size_t dim = 2;  // configuration dimension

    std::size_t size() const { return 2 * dim; }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
};

PhaseVector to_canonical(const State& s);
State from_canonical(Chart chart, double kappa, const PhaseVector& v);

/// Promotes a state to dual numbers whose derivatives are the unit vectors of
/// its canonical variables (coordinate i -> slot i, momentum i -> slot dim+i).
StateT<Dual> seed(const State& s);

// ---------------------------------------------------------------------------
// Domain checks and constructors.

/// Throws DomainError when a state lies outside its chart domain.
void validate(const State& s);

/// Builds an ambient state, re-projecting constraint violations up to 1e-8
/// onto the kappa-sphere; larger violations throw DomainError.
AmbientState<double> make_ambient(const std::array<double, 3>& x, const std::array<double, 3>& pi,
                                  double kappa);

/// Wraps periodic coordinates (polar angle, parallel x on the sphere) back
/// into their canonical ranges.
void wrap_periodic(State& s);

// ---------------------------------------------------------------------------
// Chart maps.

template <class T>
AmbientState<T> to_ambient(const AmbientState<T>& s) {
    return s;
}

template <class T>
AmbientState<T> to_ambient(const ParallelState<T>& s) {
    const double k = s.kappa;
    const T cx = ck(k, s.x), sx = sk(k, s.x);
    const T cy = ck(k, s.y), sy = sk(k, s.y);
    if (std::abs(value(cy)) < kPoleTolerance) {
        throw PoleError("parallel chart: Ck(y) vanishes");
    }
    AmbientState<T> a;
    a.kappa = k;
    a.x = {cx * cy, sx * cy, sy};
    a.pi = {T(0.0) - sx / cy * s.px - cx * sy * s.py, cx / cy * s.px - k * sx * sy * s.py,
            cy * s.py};
    return a;
}

template <class T>
AmbientState<T> to_ambient(const PolarState<T>& s) {
    using std::cos;
    using std::sin;
    const double k = s.kappa;
    const T cr = ck(k, s.r), sr = sk(k, s.r);
    if (std::abs(value(sr)) < kPoleTolerance) {
        throw PoleError("polar chart: Sk(r) vanishes");
    }
    const T c = cos(s.phi), sn = sin(s.phi);
    AmbientState<T> a;
    a.kappa = k;
    a.x = {cr, sr * c, sr * sn};
    a.pi = {T(0.0) - sr * s.pr, cr * c * s.pr - sn / sr * s.pphi, cr * sn * s.pr + c / sr * s.pphi};
    return a;
}

template <class T>
AmbientState<T> to_ambient(const BeltramiState<T>& s) {
    using std::sqrt;
    const double k = s.kappa;
    const T w = 1.0 + k * (s.q1 * s.q1 + s.q2 * s.q2);
    if (value(w) <= 0.0) throw DomainError("Beltrami chart: 1 + kappa q^2 <= 0");
    const T root = sqrt(w);
    const T x0 = 1.0 / root;
    AmbientState<T> a;
    a.kappa = k;
    a.x = {x0, s.q1 * x0, s.q2 * x0};
    a.pi = {T(0.0) - root * (s.q1 * s.p1 + s.q2 * s.p2), root * s.p1, root * s.p2};
    return a;
}

template <class T>
AmbientState<T> to_ambient(const StateT<T>& s) {
    return std::visit([](const auto& v) { return to_ambient(v); }, s);
}

template <class T>
BeltramiState<T> ambient_to_beltrami(const AmbientState<T>& a) {
    if (value(a.x[0]) <= 1e-14) {
        throw CoverageError("Beltrami chart covers only x0 > 0 (x0 = " +
                            std::to_string(value(a.x[0])) + ")");
    }
    BeltramiState<T> b;
    b.kappa = a.kappa;
    b.q1 = a.x[1] / a.x[0];
    b.q2 = a.x[2] / a.x[0];
    b.p1 = a.x[0] * a.pi[1];
    b.p2 = a.x[0] * a.pi[2];
    return b;
}

template <class T>
ParallelState<T> ambient_to_parallel(const AmbientState<T>& a) {
    using std::sqrt;
    const double k = a.kappa;
    const T cy2 = a.x[0] * a.x[0] + k * a.x[1] * a.x[1];
    if (value(cy2) <= 1e-28) {
        throw CoverageError("geodesic parallel chart does not cover the poles of l2");
    }
    const T cy = sqrt(cy2);
    ParallelState<T> p;
    p.kappa = k;
    p.y = karc(k, cy, a.x[2]);
    p.x = karc(k, T(a.x[0] / cy), T(a.x[1] / cy));
    p.px = a.x[0] * a.pi[1] - k * a.x[1] * a.pi[0];
    p.py = a.pi[2] / cy;
    return p;
}

template <class T>
PolarState<T> ambient_to_polar(const AmbientState<T>& a) {
    using std::atan2;
    using std::sqrt;
    const double k = a.kappa;
    const T rho = sqrt(a.x[1] * a.x[1] + a.x[2] * a.x[2]);
    if (value(rho) < 1e-14) {
        throw CoverageError("geodesic polar chart excludes the origin (r = 0) and its antipode");
    }
    PolarState<T> p;
    p.kappa = k;
    p.r = karc(k, a.x[0], rho);
    p.phi = atan2(a.x[2], a.x[1]);
    if (value(p.phi) < 0.0) p.phi = p.phi + 2.0 * std::numbers::pi;
    const T j01 = a.x[0] * a.pi[1] - k * a.x[1] * a.pi[0];
    const T j02 = a.x[0] * a.pi[2] - k * a.x[2] * a.pi[0];
    p.pr = (a.x[1] * j01 + a.x[2] * j02) / rho;
    p.pphi = a.x[1] * a.pi[2] - a.x[2] * a.pi[1];
    return p;
}

template <class T>
StateT<T> from_ambient(const AmbientState<T>& a, Chart target) {
    switch (target) {
        case Chart::ambient: return a;
        case Chart::parallel: return ambient_to_parallel(a);
        case Chart::polar: return ambient_to_polar(a);
        case Chart::beltrami: return ambient_to_beltrami(a);
    }
    throw SpecError("unknown chart");
}

template <class T>
StateT<T> convert(const StateT<T>& s, Chart target) {
    if (chart_of(s) == target) return s;
    return from_ambient(to_ambient(s), target);
}

template <class T>
BeltramiState<T> as_beltrami(const StateT<T>& s) {
    if (auto* b = std::get_if<BeltramiState<T>>(&s)) return *b;
    return ambient_to_beltrami(to_ambient(s));
}

template <class T>
ParallelState<T> as_parallel(const StateT<T>& s) {
    if (auto* p = std::get_if<ParallelState<T>>(&s)) return *p;
    return ambient_to_parallel(to_ambient(s));
}

template <class T>
PolarState<T> as_polar(const StateT<T>& s) {
    if (auto* p = std::get_if<PolarState<T>>(&s)) return *p;
    return ambient_to_polar(to_ambient(s));
}

/// Ambient state with x rescaled onto the kappa-sphere. Formulas that hold on
/// the surface become homogeneous of degree zero in x after this rescaling,
/// which keeps the unconstrained ambient flow tangent to the constraint.
template <class T>
AmbientState<T> normalized(const AmbientState<T>& a) {
    using std::sqrt;
    const T s = a.x[0] * a.x[0] + a.kappa * (a.x[1] * a.x[1] + a.x[2] * a.x[2]);
    if (value(s) <= 0.0) throw DomainError("ambient point is off the kappa-sphere");
    const T inv = 1.0 / sqrt(s);
    AmbientState<T> out = a;
    for (auto& c : out.x) c = c * inv;
    return out;
}

/// Swaps the roles of x1 and x2 (and pi1, pi2): the relabeling that maps the
/// standard geodesic parallel chart onto the type II one.
template <class T>
AmbientState<T> swap_axes(const AmbientState<T>& a) {
    AmbientState<T> out = a;
    std::swap(out.x[1], out.x[2]);
    std::swap(out.pi[1], out.pi[2]);
    return out;
}

// ---------------------------------------------------------------------------
// so_kappa(3) realization.

template <class T>
struct Generators {
    T j01{}, j02{}, j12{};
};

template <class T>
Generators<T> lie_generators(const AmbientState<T>& a) {
    const double k = a.kappa;
    return {a.x[0] * a.pi[1] - k * a.x[1] * a.pi[0], a.x[0] * a.pi[2] - k * a.x[2] * a.pi[0],
            a.x[1] * a.pi[2] - a.x[2] * a.pi[1]};
}

template <class T>
Generators<T> lie_generators(const BeltramiState<T>& b) {
    const double k = b.kappa;
    const T qp = b.q1 * b.p1 + b.q2 * b.p2;
    return {b.p1 + k * qp * b.q1, b.p2 + k * qp * b.q2, b.q1 * b.p2 - b.q2 * b.p1};
}

template <class T>
Generators<T> lie_generators(const ParallelState<T>& p) {
    const double k = p.kappa;
    const T cx = ck(k, p.x), sx = sk(k, p.x), ty = tk(k, p.y);
    return {p.px, cx * p.py + k * sx * ty * p.px, sx * p.py - cx * ty * p.px};
}

template <class T>
Generators<T> lie_generators(const PolarState<T>& p) {
    using std::cos;
    using std::sin;
    const double k = p.kappa;
    const T sr = sk(k, p.r);
    if (std::abs(value(sr)) < kPoleTolerance) throw PoleError("polar chart: Sk(r) vanishes");
    const T cot = ck(k, p.r) / sr;  // 1 / Tk(r)
    const T c = cos(p.phi), s = sin(p.phi);
    return {c * p.pr - s * cot * p.pphi, s * p.pr + c * cot * p.pphi, p.pphi};
}

template <class T>
Generators<T> lie_generators(const StateT<T>& s) {
    return std::visit([](const auto& v) { return lie_generators(v); }, s);
}

/// J01^2 + J02^2 + kappa J12^2.
template <class T>
T casimir(const StateT<T>& s) {
    const Generators<T> g = lie_generators(s);
    return g.j01 * g.j01 + g.j02 * g.j02 + kappa_of(s) * g.j12 * g.j12;
}

enum class Generator { J01, J02, J12 };

std::string_view to_string(Generator g);

/// Vector representation rho(J) of a generator.
Eigen::Matrix3d generator_matrix(Generator g, double kappa);

/// One-parameter subgroup exp(angle rho(J)) in closed form.
Eigen::Matrix3d subgroup_matrix(Generator g, double angle, double kappa);

/// diag(1, kappa, kappa), the bilinear form preserved by the group.
Eigen::Matrix3d invariant_form(double kappa);

// ---------------------------------------------------------------------------
// Serialization: {chart, kappa, coords: [...], momenta: [...]}.

nlohmann::json to_json(const State& s);
State state_from_json(const nlohmann::json& j);

}  // namespace kmech
