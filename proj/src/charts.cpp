#include "kmech/charts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kmech {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool finite_all(std::initializer_list<double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string_view to_string(Chart chart) {
    switch (chart) {
        case Chart::ambient: return "ambient";
        case Chart::parallel: return "parallel";
        case Chart::polar: return "polar";
        case Chart::beltrami: return "beltrami";
    }
    return "unknown";
}

Chart chart_from_string(std::string_view name) {
    if (name == "ambient") return Chart::ambient;
    if (name == "parallel") return Chart::parallel;
    if (name == "polar") return Chart::polar;
    if (name == "beltrami") return Chart::beltrami;
    throw SpecError("unknown chart '" + std::string(name) +
                    "' (expected ambient, parallel, polar or beltrami)");
}

std::string_view to_string(Generator g) {
    switch (g) {
        case Generator::J01: return "J01";
        case Generator::J02: return "J02";
        case Generator::J12: return "J12";
    }
    return "unknown";
}

PhaseVector to_canonical(const State& s) {
    PhaseVector v;
    std::visit(
        [&v](const auto& st) {
            using S = std::decay_t<decltype(st)>;
            if constexpr (std::is_same_v<S, AmbientState<double>>) {
                v.dim = 3;
                for (std::size_t i = 0; i < 3; ++i) {
                    v[i] = st.x[i];
                    v[3 + i] = st.pi[i];
                }
            } else if constexpr (std::is_same_v<S, ParallelState<double>>) {
                v.v = {st.x, st.y, st.px, st.py, 0.0, 0.0};
            } else if constexpr (std::is_same_v<S, PolarState<double>>) {
                v.v = {st.r, st.phi, st.pr, st.pphi, 0.0, 0.0};
            } else {
                v.v = {st.q1, st.q2, st.p1, st.p2, 0.0, 0.0};
            }
        },
        s);
    return v;
}

State from_canonical(Chart chart, double kappa, const PhaseVector& v) {
    switch (chart) {
        case Chart::ambient: {
            AmbientState<double> a;
            a.kappa = kappa;
            a.x = {v[0], v[1], v[2]};
            a.pi = {v[3], v[4], v[5]};
            return a;
        }
        case Chart::parallel: return ParallelState<double>{v[0], v[1], v[2], v[3], kappa};
        case Chart::polar: return PolarState<double>{v[0], v[1], v[2], v[3], kappa};
        case Chart::beltrami: return BeltramiState<double>{v[0], v[1], v[2], v[3], kappa};
    }
    throw SpecError("unknown chart");
}

StateT<Dual> seed(const State& s) {
    const PhaseVector v = to_canonical(s);
    const std::size_t d = v.dim;
    const double k = kappa_of(s);
    auto var = [&v](std::size_t i) { return Dual::variable(v[i], i); };
    switch (chart_of(s)) {
        case Chart::ambient: {
            AmbientState<Dual> a;
            a.kappa = k;
            for (std::size_t i = 0; i < 3; ++i) {
                a.x[i] = var(i);
                a.pi[i] = var(d + i);
            }
            return a;
        }
        case Chart::parallel: return ParallelState<Dual>{var(0), var(1), var(2), var(3), k};
        case Chart::polar: return PolarState<Dual>{var(0), var(1), var(2), var(3), k};
        case Chart::beltrami: return BeltramiState<Dual>{var(0), var(1), var(2), var(3), k};
    }
    throw SpecError("unknown chart");
}

void validate(const State& s) {
    const double k = kappa_of(s);
    if (!std::isfinite(k)) throw DomainError("kappa is not finite");
    std::visit(
        [k](const auto& st) {
            using S = std::decay_t<decltype(st)>;
            if constexpr (std::is_same_v<S, AmbientState<double>>) {
                const auto& x = st.x;
                const auto& p = st.pi;
                if (!finite_all({x[0], x[1], x[2], p[0], p[1], p[2]})) {
                    throw DomainError("ambient state has non-finite components");
                }
                const double rho2 = x[1] * x[1] + x[2] * x[2];
                const double scale = std::max(1.0, x[0] * x[0] + std::abs(k) * rho2);
                const double c1 = x[0] * x[0] + k * rho2 - 1.0;
                if (std::abs(c1) > 1e-10 * scale) {
                    throw DomainError("ambient constraint x0^2 + kappa(x1^2 + x2^2) = 1 violated by " +
                                      fmt_num(c1));
                }
                const double xn = std::sqrt(x[0] * x[0] + rho2);
                const double pn = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
                const double c2 = x[0] * p[0] + x[1] * p[1] + x[2] * p[2];
                if (std::abs(c2) > 1e-10 * std::max(1.0, xn * pn)) {
                    throw DomainError("ambient constraint x . pi = 0 violated by " + fmt_num(c2));
                }
                if (k < 0.0 && x[0] < 1.0 - 1e-10) {
                    throw DomainError("hyperbolic ambient point needs x0 >= 1 (x0 = " + fmt_num(x[0]) + ")");
                }
                if (k == 0.0 && std::abs(x[0] - 1.0) > 1e-10) {
                    throw DomainError("Euclidean ambient point needs x0 = 1 (x0 = " + fmt_num(x[0]) + ")");
                }
            } else if constexpr (std::is_same_v<S, ParallelState<double>>) {
                if (!finite_all({st.x, st.y, st.px, st.py})) {
                    throw DomainError("parallel state has non-finite components");
                }
                if (k > 0.0) {
                    const double half = half_period(k);
                    if (!(st.x > -half && st.x <= half)) {
                        throw DomainError("parallel x = " + fmt_num(st.x) + " outside (-pi/sqrt(kappa), pi/sqrt(kappa)]");
                    }
                    if (!(std::abs(st.y) < 0.5 * half)) {
                        throw DomainError("parallel y = " + fmt_num(st.y) + " outside |y| < pi/(2 sqrt(kappa))");
                    }
                }
            } else if constexpr (std::is_same_v<S, PolarState<double>>) {
                if (!finite_all({st.r, st.phi, st.pr, st.pphi})) {
                    throw DomainError("polar state has non-finite components");
                }
                if (!(st.r > 0.0)) throw DomainError("polar r = " + fmt_num(st.r) + " must be > 0");
                if (k > 0.0 && !(st.r < half_period(k))) {
                    throw DomainError("polar r = " + fmt_num(st.r) + " must be < pi/sqrt(kappa)");
                }
                if (!(st.phi >= 0.0 && st.phi < kTwoPi)) {
                    throw DomainError("polar phi = " + fmt_num(st.phi) + " outside [0, 2 pi)");
                }
            } else {
                if (!finite_all({st.q1, st.q2, st.p1, st.p2})) {
                    throw DomainError("Beltrami state has non-finite components");
                }
                const double q2 = st.q1 * st.q1 + st.q2 * st.q2;
                if (k < 0.0 && !(q2 < 1.0 / -k)) {
                    throw DomainError("Beltrami q^2 = " + fmt_num(q2) + " outside the disk q^2 < 1/|kappa|");
                }
            }
        },
        s);
}

AmbientState<double> make_ambient(const std::array<double, 3>& x, const std::array<double, 3>& pi,
                                  double kappa) {
    constexpr double kReproject = 1e-8;
    AmbientState<double> a{x, pi, kappa};
    if (!finite_all({x[0], x[1], x[2], pi[0], pi[1], pi[2]})) {
        throw DomainError("ambient state has non-finite components");
    }
    const double rho2 = x[1] * x[1] + x[2] * x[2];
    const double c1 = x[0] * x[0] + kappa * rho2 - 1.0;
    const double xn2 = x[0] * x[0] + rho2;
    const double c2 = x[0] * pi[0] + x[1] * pi[1] + x[2] * pi[2];
    const double pn = std::sqrt(pi[0] * pi[0] + pi[1] * pi[1] + pi[2] * pi[2]);
    if (std::abs(c1) > kReproject * std::max(1.0, xn2)) {
        throw DomainError("ambient point is " + fmt_num(c1) + " off the kappa-sphere");
    }
    // at kappa = 0 pi0 is a dependent slot and is always rebuilt
    if (kappa != 0.0 && std::abs(c2) > kReproject * std::max(1.0, std::sqrt(xn2) * pn)) {
        throw DomainError("ambient momentum has normal component " + fmt_num(c2));
    }
    if (kappa == 0.0) {
        a.x[0] = 1.0;
    } else {
        const double s = x[0] * x[0] + kappa * rho2;
        if (s <= 0.0) throw DomainError("ambient point is off the kappa-sphere");
        const double inv = 1.0 / std::sqrt(s);
        for (auto& c : a.x) c *= inv;
    }
    if (kappa < 0.0 && a.x[0] < 0.0) throw DomainError("hyperbolic ambient point on the x0 < 0 sheet");
    if (kappa == 0.0) {
        a.pi[0] = -(a.x[1] * a.pi[1] + a.x[2] * a.pi[2]);
    } else {
        const double dot = a.x[0] * a.pi[0] + a.x[1] * a.pi[1] + a.x[2] * a.pi[2];
        const double nrm = a.x[0] * a.x[0] + a.x[1] * a.x[1] + a.x[2] * a.x[2];
        for (std::size_t i = 0; i < 3; ++i) a.pi[i] -= dot / nrm * a.x[i];
    }
    return a;
}

void wrap_periodic(State& s) {
    if (auto* p = std::get_if<PolarState<double>>(&s)) {
        p->phi = std::fmod(p->phi, kTwoPi);
        if (p->phi < 0.0) p->phi += kTwoPi;
        if (p->phi >= kTwoPi) p->phi = 0.0;
    } else if (auto* p = std::get_if<ParallelState<double>>(&s)) {
        if (p->kappa > 0.0) {
            const double half = half_period(p->kappa);
            const double period = 2.0 * half;
            // into (-half, half]
            double x = std::fmod(p->x + half, period);
            if (x <= 0.0) x += period;
            p->x = x - half;
        }
    }
}

Eigen::Matrix3d generator_matrix(Generator g, double kappa) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    switch (g) {
        case Generator::J01:
            m(0, 1) = -kappa;
            m(1, 0) = 1.0;
            break;
        case Generator::J02:
            m(0, 2) = -kappa;
            m(2, 0) = 1.0;
            break;
        case Generator::J12:
            m(1, 2) = -1.0;
            m(2, 1) = 1.0;
            break;
    }
    return m;
}

Eigen::Matrix3d subgroup_matrix(Generator g, double angle, double kappa) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    const double c = ck(kappa, angle), s = sk(kappa, angle);
    switch (g) {
        case Generator::J01:
            m(0, 0) = c;
            m(0, 1) = -kappa * s;
            m(1, 0) = s;
            m(1, 1) = c;
            break;
        case Generator::J02:
            m(0, 0) = c;
            m(0, 2) = -kappa * s;
            m(2, 0) = s;
            m(2, 2) = c;
            break;
        case Generator::J12:
            m(1, 1) = std::cos(angle);
            m(1, 2) = -std::sin(angle);
            m(2, 1) = std::sin(angle);
            m(2, 2) = std::cos(angle);
            break;
    }
    return m;
}

Eigen::Matrix3d invariant_form(double kappa) {
    return Eigen::Vector3d(1.0, kappa, kappa).asDiagonal();
}

nlohmann::json to_json(const State& s) {
    const PhaseVector v = to_canonical(s);
    nlohmann::json coords = nlohmann::json::array();
    nlohmann::json momenta = nlohmann::json::array();
    for (std::size_t i = 0; i < v.dim; ++i) {
        coords.push_back(v[i]);
        momenta.push_back(v[v.dim + i]);
    }
    return {{"chart", std::string(to_string(chart_of(s)))},
            {"kappa", kappa_of(s)},
            {"coords", coords},
            {"momenta", momenta}};
}

State state_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SpecError("state must be a JSON object");
    for (const char* key : {"chart", "kappa", "coords", "momenta"}) {
        if (!j.contains(key)) throw SpecError(std::string("state is missing '") + key + "'");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "chart" && k != "kappa" && k != "coords" && k != "momenta") {
            throw SpecError("unknown state field '" + k + "'");
        }
    }
    const Chart chart = chart_from_string(j.at("chart").get<std::string>());
    const double kappa = j.at("kappa").get<double>();
    const auto coords = j.at("coords").get<std::vector<double>>();
    const auto momenta = j.at("momenta").get<std::vector<double>>();
    const std::size_t d = dimension(chart);
    if (coords.size() != d || momenta.size() != d) {
        throw SpecError("chart " + std::string(to_string(chart)) + " needs " + std::to_string(d) +
                        " coords and " + std::to_string(d) + " momenta");
    }
    PhaseVector v;
    v.dim = d;
    for (std::size_t i = 0; i < d; ++i) {
        v[i] = coords[i];
        v[d + i] = momenta[i];
    }
    State s = from_canonical(chart, kappa, v);
    if (chart == Chart::ambient) {
        s = make_ambient({v[0], v[1], v[2]}, {v[3], v[4], v[5]}, kappa);
    }
    validate(s);
    return s;
}

}  // namespace kmech
