#include "kmech/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include <spdlog/spdlog.h>

namespace kmech {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Dormand-Prince 5(4) tableau (autonomous, so the c_i are not needed)
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

using Vec = PhaseVector;

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
    Vec out = y;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double acc = 0.0;
        for (const auto& [c, k] : terms) acc += c * (*k)[i];
        out[i] = y[i] + h * acc;
    }
    return out;
}

/// Periods of the chart's angular coordinates (0 when not periodic).
std::array<double, 3> coordinate_periods(Chart chart, double kappa) {
    if (chart == Chart::polar) return {0.0, kTwoPi, 0.0};
    if (chart == Chart::parallel && kappa > 0.0) return {2.0 * half_period(kappa), 0.0, 0.0};
    return {0.0, 0.0, 0.0};
}

double wrap_difference(double d, double period) {
    if (period <= 0.0) return d;
    d = std::fmod(d, period);
    if (d > 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    return d;
}

class Stepper {
public:
    Stepper(const SystemSpec& spec, Chart chart, double kappa) : spec_(spec), chart_(chart), kappa_(kappa) {}

    Vec rhs(const Vec& y) const { return hamilton_rhs(spec_, from_canonical(chart_, kappa_, y)); }

    /// One DP5 step; returns the weighted error norm.
    double dp5(const Vec& y, const Vec& k1, double h, const IntegratorConfig& cfg, Vec& out) const {
        const Vec k2 = rhs(axpy(y, h, {{a21, &k1}}));
        const Vec k3 = rhs(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
        const Vec k4 = rhs(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const Vec k5 = rhs(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const Vec k6 = rhs(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        out = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const Vec k7 = rhs(out);
        double err = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(out[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        return err;
    }

    /// Two-stage Gauss-Legendre step solved by fixed-point iteration; false when
    /// the iteration does not converge.
    bool gauss4(const Vec& y, const Vec& f0, double h, Vec& out) const {
        static const double s3 = std::sqrt(3.0);
        const double a11 = 0.25, a12 = 0.25 - s3 / 6.0, a21g = 0.25 + s3 / 6.0, a22 = 0.25;
        Vec k1 = f0, k2 = f0;
        double ynorm = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) ynorm = std::max(ynorm, std::abs(y[i]));
        for (int it = 0; it < 50; ++it) {
            const Vec n1 = rhs(axpy(y, h, {{a11, &k1}, {a12, &k2}}));
            const Vec n2 = rhs(axpy(y, h, {{a21g, &k1}, {a22, &k2}}));
            double delta = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                delta = std::max({delta, std::abs(n1[i] - k1[i]), std::abs(n2[i] - k2[i])});
            }
            k1 = n1;
            k2 = n2;
            if (h * delta <= 1e-13 * (1.0 + ynorm)) {
                out = axpy(y, h, {{0.5, &k1}, {0.5, &k2}});
                return true;
            }
        }
        return false;
    }

    Chart chart() const { return chart_; }
    void set_chart(Chart c) { chart_ = c; }

private:
    const SystemSpec& spec_;
    Chart chart_;
    double kappa_;
};

/// Wraps, re-projects and validates a candidate state; throws on domain violations.
State settle(Chart chart, double kappa, const Vec& y) {
    State s = from_canonical(chart, kappa, y);
    if (chart == Chart::ambient) {
        s = make_ambient({y[0], y[1], y[2]}, {y[3], y[4], y[5]}, kappa);
    }
    wrap_periodic(s);
    validate(s);
    return s;
}

std::vector<double> log_row(const SystemSpec& spec, const std::vector<IntegralSpec>& integrals, const State& s) {
    std::vector<double> row;
    row.reserve(integrals.size() + 1);
    auto safe = [](auto&& fn) {
        try {
            return fn();
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    row.push_back(safe([&] { return hamiltonian(spec, s); }));
    for (const auto& in : integrals) row.push_back(safe([&] { return evaluate(in, s); }));
    return row;
}

}  // namespace

std::string_view to_string(Method m) {
    return m == Method::rk45_adaptive ? "rk45_adaptive" : "gauss4_implicit";
}

Method method_from_string(std::string_view name) {
    if (name == "rk45_adaptive") return Method::rk45_adaptive;
    if (name == "gauss4_implicit") return Method::gauss4_implicit;
    throw SpecError("unknown integrator method '" + std::string(name) + "'");
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::boundary: return "boundary";
        case RunStatus::step_limit: return "step_limit";
    }
    return "unknown";
}

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw SpecError("integrator tolerances must be > 0");
    if (!(max_step > 0.0)) throw SpecError("max_step must be > 0");
    if (max_steps == 0) throw SpecError("max_steps must be >= 1");
}

nlohmann::json to_json(const IntegratorConfig& c) {
    return {{"method", std::string(to_string(c.method))},
            {"rel_tol", c.rel_tol},
            {"abs_tol", c.abs_tol},
            {"max_step", c.max_step},
            {"max_steps", c.max_steps}};
}

IntegratorConfig integrator_from_json(const nlohmann::json& j) {
    IntegratorConfig c;
    if (!j.is_object()) throw SpecError("integrator must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "method" && k != "rel_tol" && k != "abs_tol" && k != "max_step" && k != "max_steps") {
            throw SpecError("unknown integrator field '" + k + "'");
        }
    }
    if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
    c.rel_tol = j.value("rel_tol", c.rel_tol);
    c.abs_tol = j.value("abs_tol", c.abs_tol);
    c.max_step = j.value("max_step", c.max_step);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.validate();
    return c;
}

PhaseVector hamilton_rhs(const SystemSpec& spec, const State& s) {
    const Gradient g = hamiltonian_gradient(spec, s);
    const std::size_t d = g.grad.dim;
    PhaseVector out;
    out.dim = d;
    for (std::size_t i = 0; i < d; ++i) {
        out[i] = g.grad[d + i];
        out[d + i] = -g.grad[i];
    }
    return out;
}

State with_kappa(const State& s, double kappa) {
    if (auto* a = std::get_if<AmbientState<double>>(&s)) {
        AmbientState<double> out = *a;
        out.kappa = kappa;
        const double rho2 = a->x[1] * a->x[1] + a->x[2] * a->x[2];
        const double x02 = 1.0 - kappa * rho2;
        if (x02 <= 0.0) throw DomainError("point does not fit on the kappa-sphere");
        out.x[0] = std::sqrt(x02);
        out.pi[0] = -(out.x[1] * out.pi[1] + out.x[2] * out.pi[2]) / out.x[0];
        return out;
    }
    State out = s;
    std::visit([kappa](auto& st) { st.kappa = kappa; }, out);
    return out;
}

Trajectory integrate(const SystemSpec& spec, const State& state0, double t_end, const IntegratorConfig& config,
                     const std::vector<IntegralSpec>& integrals, std::uint64_t seed) {
    validate(spec);
    config.validate();
    if (!(t_end > 0.0)) throw SpecError("t_end must be > 0");
    if (kappa_of(state0) != spec.kappa) {
        throw SpecError("state kappa differs from system kappa");
    }
    validate(state0);
    for (const auto& in : integrals) {
        check_compatible(in);
        if (is_complex(in.name)) throw SpecError(in.label() + " is complex valued and cannot be logged");
    }

    Trajectory tr;
    tr.system = spec;
    tr.chart = chart_of(state0);
    tr.config = config;
    tr.seed = seed;
    tr.log_names.push_back("H");
    for (const auto& in : integrals) tr.log_names.push_back(in.label());

    const double kappa = spec.kappa;
    Stepper stepper(spec, tr.chart, kappa);
    State cur = state0;
    Vec y = to_canonical(cur);
    Vec f = hamilton_rhs(spec, cur);

    auto log = [&](double t, const State& s, const Vec& rate) {
        tr.times.push_back(t);
        tr.states.push_back(s);
        tr.rates.push_back(rate);
        tr.conserved_log.push_back(log_row(spec, integrals, s));
    };
    log(0.0, cur, f);

    const double h_min = config.max_step * 1e-6;
    double h = std::min(config.max_step, config.method == Method::rk45_adaptive ? 1e-2 : config.max_step);
    double t = 0.0;
    std::size_t attempts = 0;
    std::string last_error;

    while (t < t_end) {
        if (attempts++ >= config.max_steps) {
            tr.status = RunStatus::step_limit;
            tr.event = "step limit " + std::to_string(config.max_steps) + " reached at t = " + std::to_string(t);
            break;
        }
        const double step = std::min(h, t_end - t);
        Vec ynew;
        State snew;
        Vec fnew;
        bool domain_fail = false;
        double err = 0.0;
        try {
            if (config.method == Method::rk45_adaptive) {
                err = stepper.dp5(y, f, step, config, ynew);
                if (!std::isfinite(err)) throw DomainError("non-finite step");
            } else if (!stepper.gauss4(y, f, step, ynew)) {
                throw DomainError("Gauss fixed-point iteration did not converge");
            }
            if (err <= 1.0) {
                snew = settle(stepper.chart(), kappa, ynew);
                fnew = hamilton_rhs(spec, snew);
            }
        } catch (const Error& e) {
            domain_fail = true;
            last_error = e.what();
        }
        if (domain_fail) {
            h = 0.5 * step;
            if (h < h_min) {
                tr.status = RunStatus::boundary;
                tr.event = "chart boundary near t = " + std::to_string(t) + " at " + to_json(cur).dump() + ": " + last_error;
                spdlog::info("integration stopped: {}", tr.event);
                break;
            }
            continue;
        }
        if (config.method == Method::rk45_adaptive) {
            const double factor = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
            if (err > 1.0) {
                h = step * factor;
                // error control collapsing the step signals a singular border just as a thrown step does
                if (h < h_min) {
                    tr.status = RunStatus::boundary;
                    tr.event = "step size below " + std::to_string(h_min) + " near t = " + std::to_string(t) + " at " +
                               to_json(cur).dump();
                    spdlog::info("integration stopped: {}", tr.event);
                    break;
                }
                continue;
            }
            h = std::min(config.max_step, step * factor);
        } else {
            h = std::min(config.max_step, 2.0 * step);
        }
        t = (t_end - t <= step) ? t_end : t + step;
        cur = snew;
        y = to_canonical(cur);
        f = fnew;

        if (stepper.chart() == Chart::beltrami) {
            const auto a = to_ambient(cur);
            if (std::abs(a.x[0]) < kBeltramiSwitch) {
                cur = a;
                stepper.set_chart(Chart::ambient);
                y = to_canonical(cur);
                f = hamilton_rhs(spec, cur);
                tr.chart_switch = tr.times.size();
                spdlog::debug("t = {}: |x0| < {}, continuing in the ambient chart", t, kBeltramiSwitch);
            }
        }
        log(t, cur, f);
    }
    spdlog::debug("integrated {} steps to t = {}", tr.times.size() - 1, t);
    return tr;
}

State Trajectory::state_at(double t) const {
    if (times.empty()) throw SpecError("empty trajectory");
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const std::size_t i = j - 1;
    const Chart chart = chart_of(states[j]);
    const double kappa = kappa_of(states[j]);
    State left = states[i];
    Vec fl = rates[i];
    if (chart_of(left) != chart) {
        // switch step: fall back to linear interpolation in the new chart
        left = convert(left, chart);
        const Vec yl = to_canonical(left), yr = to_canonical(states[j]);
        const double th = (t - times[i]) / (times[j] - times[i]);
        Vec y = yl;
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = (1.0 - th) * yl[k] + th * yr[k];
        return from_canonical(chart, kappa, y);
    }
    const Vec yl = to_canonical(left);
    Vec yr = to_canonical(states[j]);
    const Vec& fr = rates[j];
    const auto periods = coordinate_periods(chart, kappa);
    for (std::size_t k = 0; k < yl.dim; ++k) {
        if (periods[k] > 0.0) yr[k] = yl[k] + wrap_difference(yr[k] - yl[k], periods[k]);
    }
    const double h = times[j] - times[i];
    const double th = (t - times[i]) / h;
    const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
    const double h10 = th * (1 - th) * (1 - th);
    const double h01 = th * th * (3 - 2 * th);
    const double h11 = th * th * (th - 1);
    Vec y = yl;
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] = h00 * yl[k] + h10 * h * fl[k] + h01 * yr[k] + h11 * h * fr[k];
    }
    State s = from_canonical(chart, kappa, y);
    wrap_periodic(s);
    return s;
}

double Trajectory::drift(std::size_t k) const {
    if (conserved_log.empty()) return 0.0;
    const double v0 = conserved_log.front().at(k);
    double worst = 0.0;
    for (const auto& row : conserved_log) {
        const double v = row.at(k);
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, std::abs(v - v0) / (1.0 + std::abs(v0)));
    }
    return worst;
}

double phase_distance(const State& a, const State& b) {
    State bb;
    try {
        bb = convert(b, chart_of(a));
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
    const Vec ya = to_canonical(a), yb = to_canonical(bb);
    const auto periods = coordinate_periods(chart_of(a), kappa_of(a));
    double acc = 0.0;
    for (std::size_t k = 0; k < ya.size(); ++k) {
        double d = yb[k] - ya[k];
        if (k < ya.dim) d = wrap_difference(d, periods[k]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

nlohmann::json ClosureReport::to_json() const {
    return {{"closed", closed},
            {"period", closed ? nlohmann::json(period) : nlohmann::json(nullptr)},
            {"distance", distance},
            {"best_time", best_time},
            {"candidates", candidates}};
}

ClosureReport closure_detect(const Trajectory& traj, double tol) {
    if (traj.size() < 3) throw HorizonError("trajectory too short for closure detection");
    const double t_end = traj.times.back();
    const double window = 0.01 * t_end;
    const State& s0 = traj.states.front();
    std::vector<double> d(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) d[i] = phase_distance(s0, traj.states[i]);

    auto dist_at = [&](double t) { return phase_distance(s0, traj.state_at(t)); };

    ClosureReport rep;
    rep.distance = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> minima;
    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
        if (traj.times[i] < window) continue;
        if (d[i] <= d[i - 1] && d[i] <= d[i + 1]) minima.push_back(i);
    }
    // a return at the very end of the run counts as a candidate as well
    const std::size_t last = traj.size() - 1;
    if (traj.times[last] >= window && d[last] <= d[last - 1]) minima.push_back(last);
    rep.candidates = minima.size();
    if (minima.size() < 2) {
        throw HorizonError("only " + std::to_string(minima.size()) +
                           " candidate returns; extend t_end past two expected periods");
    }
    constexpr double kInvPhi = 0.6180339887498949;
    for (std::size_t i : minima) {
        double lo = traj.times[i - 1];
        double hi = i + 1 < traj.size() ? traj.times[i + 1] : traj.times[i];
        lo = std::max(lo, window);
        double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
        double f1 = dist_at(x1), f2 = dist_at(x2);
        for (int it = 0; it < 100 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - kInvPhi * (hi - lo);
                f1 = dist_at(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + kInvPhi * (hi - lo);
                f2 = dist_at(x2);
            }
        }
        double tstar = 0.5 * (lo + hi);
        double dstar = dist_at(tstar);
        if (d[i] < dstar) {
            tstar = traj.times[i];
            dstar = d[i];
        }
        if (dstar < rep.distance) {
            rep.distance = dstar;
            rep.best_time = tstar;
        }
        if (dstar < tol) {
            rep.closed = true;
            rep.period = tstar;
            rep.distance = dstar;
            return rep;
        }
    }
    return rep;
}

std::vector<double> SweepResult::ratios() const {
    std::vector<double> r;
    for (std::size_t i = 0; i + 1 < deviations.size(); ++i) {
        r.push_back(deviations[i + 1] != 0.0 ? deviations[i] / deviations[i + 1]
                                             : std::numeric_limits<double>::infinity());
    }
    return r;
}

nlohmann::json SweepResult::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    const auto r = ratios();
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        nlohmann::json row = {{"kappa", kappas[i]},
                              {"deviation", deviations[i]},
                              {"status", std::string(to_string(runs[i].status))}};
        if (i < r.size()) row["ratio_to_next"] = r[i];
        rows.push_back(row);
    }
    return {{"reference_status", std::string(to_string(reference.status))}, {"rows", rows}};
}

SweepResult flat_limit_sweep(const SystemSpec& templ, const State& state0, const std::vector<double>& kappas,
                             double t_end, const IntegratorConfig& config, std::size_t grid) {
    if (grid < 2) throw SpecError("sweep grid needs >= 2 points");
    auto run = [&](double kappa) {
        SystemSpec spec = templ;
        spec.kappa = kappa;
        return integrate(spec, with_kappa(state0, kappa), t_end, config);
    };
    auto ref_future = std::async(std::launch::async, run, 0.0);
    std::vector<std::future<Trajectory>> futures;
    futures.reserve(kappas.size());
    for (double k : kappas) futures.push_back(std::async(std::launch::async, run, k));

    SweepResult res;
    res.kappas = kappas;
    res.reference = ref_future.get();
    for (auto& fu : futures) res.runs.push_back(fu.get());
    for (const auto& tr : res.runs) {
        const double t_common = std::min(tr.times.back(), res.reference.times.back());
        double worst = 0.0;
        for (std::size_t g = 0; g < grid; ++g) {
            const double t = t_common * static_cast<double>(g) / static_cast<double>(grid - 1);
            const State a = res.reference.state_at(t);
            const State b = tr.state_at(t);
            // compare raw coordinates; charts agree unless a run switched to ambient
            const Vec ya = to_canonical(a);
            Vec yb = to_canonical(chart_of(b) == chart_of(a) ? b : convert(b, chart_of(a)));
            double acc = 0.0;
            for (std::size_t k = 0; k < ya.size(); ++k) acc += (ya[k] - yb[k]) * (ya[k] - yb[k]);
            worst = std::max(worst, std::sqrt(acc));
        }
        res.deviations.push_back(worst);
    }
    return res;
}

}  // namespace kmech
