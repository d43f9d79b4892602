#pragma once

// Hamilton's equations, adaptive integration with conservation logs, closed
// orbit detection and flat-limit sweeps.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kmech/integrals.hpp"

namespace kmech {

enum class Method { rk45_adaptive, gauss4_implicit };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

struct IntegratorConfig {
    Method method = Method::rk45_adaptive;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.1;  // also the fixed step of gauss4_implicit
    std::size_t max_steps = 2'000'000;

    void validate() const;
};

nlohmann::json to_json(const IntegratorConfig& c);
IntegratorConfig integrator_from_json(const nlohmann::json& j);

/// (dq/dt, dp/dt) = (dH/dp, -dH/dq) in the state's own chart.
PhaseVector hamilton_rhs(const SystemSpec& spec, const State& s);

enum class RunStatus { completed, boundary, step_limit };
std::string_view to_string(RunStatus s);

/// Beltrami runs move to the ambient chart once |x0| drops below this.
inline constexpr double kBeltramiSwitch = 0.05;

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<PhaseVector> rates;  // hamilton_rhs at each logged state
    std::vector<std::string> log_names;  // "H" then the attached integrals
    std::vector<std::vector<double>> conserved_log;  // [step][quantity]
    SystemSpec system;
    Chart chart = Chart::beltrami;  // chart of the initial state
    IntegratorConfig config;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::completed;
    std::string event;  // boundary / step-limit description
    std::optional<std::size_t> chart_switch;  // first index logged in the ambient chart

    std::size_t size() const { return times.size(); }

    /// Cubic Hermite interpolation from the stored rates, in the chart of the
    /// enclosing step's right endpoint.
    State state_at(double t) const;

    /// max_t |I(t) - I(0)| / (1 + |I(0)|) for column k of the log.
    double drift(std::size_t k) const;
};

/// Integrates to t_end; stops early (status boundary / step_limit) instead of
/// throwing once the run has started. Initial-state problems throw.
Trajectory integrate(const SystemSpec& spec, const State& state0, double t_end,
                     const IntegratorConfig& config, const std::vector<IntegralSpec>& integrals = {},
                     std::uint64_t seed = 0);

/// Euclidean distance in (coords, momenta) with periodic coordinates wrapped.
/// Both states are compared in the chart of `a`.
double phase_distance(const State& a, const State& b);

struct ClosureReport {
    bool closed = false;
    double period = 0.0;         // first return time (valid when closed)
    double distance = 0.0;       // phase distance at that return (or best seen)
    double best_time = 0.0;      // time of the smallest distance seen
    std::size_t candidates = 0;  // local minima inspected

    nlohmann::json to_json() const;
};

/// Closure detection after an exclusion window of 0.01 t_end. Throws
/// HorizonError when fewer than two candidate returns exist.
ClosureReport closure_detect(const Trajectory& traj, double tol);

struct SweepResult {
    std::vector<double> kappas;
    std::vector<double> deviations;  // sup-norm against the kappa = 0 run
    std::vector<Trajectory> runs;
    Trajectory reference;

    /// deviations[i] / deviations[i+1]
    std::vector<double> ratios() const;
    nlohmann::json to_json() const;
};

/// Runs the template at each kappa and at kappa = 0 (in parallel, results
/// keyed by input order) and compares on a uniform grid of `grid` points.
SweepResult flat_limit_sweep(const SystemSpec& templ, const State& state0,
                             const std::vector<double>& kappas, double t_end,
                             const IntegratorConfig& config, std::size_t grid = 2001);

/// Copy of a state with its kappa replaced (coordinates kept verbatim).
State with_kappa(const State& s, double kappa);

}  // namespace kmech
