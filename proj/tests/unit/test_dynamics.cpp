#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kmech/dynamics.hpp"
#include "oracles.hpp"

using namespace kmech;
using std::numbers::pi;

namespace {

SystemSpec oscillator(double kappa, const char* gamma, double omega = 1.0) {
    SystemSpec s;
    s.family = Family::aniso_oscillator;
    s.kappa = kappa;
    s.gamma = parse_gamma(gamma);
    s.omega = omega;
    return s;
}

SystemSpec kdv_curved(double kappa) {
    SystemSpec s;
    s.family = Family::henon_heiles_kdv_curved;
    s.kappa = kappa;
    s.Omega = 0.5;
    s.alpha = 0.8;
    return s;
}

SystemSpec free_system(double kappa) {
    SystemSpec s;
    s.kappa = kappa;
    return s;
}

State parallel(double kappa, double x, double y, double px, double py) {
    ParallelState<double> p;
    p.x = x;
    p.y = y;
    p.px = px;
    p.py = py;
    p.kappa = kappa;
    return p;
}

State beltrami(double kappa, double q1, double q2, double p1, double p2) {
    BeltramiState<double> b;
    b.q1 = q1;
    b.q2 = q2;
    b.p1 = p1;
    b.p2 = p2;
    b.kappa = kappa;
    return b;
}

IntegratorConfig tight() {
    IntegratorConfig c;
    c.rel_tol = 1e-12;
    c.abs_tol = 1e-14;
    return c;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("rhs at the Beltrami origin of the free system") {
    const PhaseVector r = hamilton_rhs(free_system(0.7), beltrami(0.7, 0, 0, 0.3, -1.1));
    CHECK(r.v[0] == doctest::Approx(0.3));
    CHECK(r.v[1] == doctest::Approx(-1.1));
    CHECK(r.v[2] == 0.0);
    CHECK(r.v[3] == 0.0);
}

TEST_CASE("free Beltrami velocity formula") {
    oracle::Rng rng(81);
    for (int i = 0; i < 100; ++i) {
        const double k = rng.uniform(-1, 1);
        const State s = oracle::random_state(rng, Chart::beltrami, k);
        const auto& b = std::get<BeltramiState<double>>(s);
        const double q2 = b.q1 * b.q1 + b.q2 * b.q2, qp = b.q1 * b.p1 + b.q2 * b.p2;
        const PhaseVector r = hamilton_rhs(free_system(k), s);
        CHECK(std::abs(r.v[0] - (1 + k * q2) * (b.p1 + k * qp * b.q1)) < 1e-10);
        CHECK(std::abs(r.v[1] - (1 + k * q2) * (b.p2 + k * qp * b.q2)) < 1e-10);
    }
}

TEST_CASE("flat isotropic oscillator force") {
    const double w = 1.7;
    const PhaseVector r = hamilton_rhs(oscillator(0.0, "1", w), parallel(0.0, 0.4, -0.2, 0.1, 0.5));
    CHECK(r.v[0] == doctest::Approx(0.1));
    CHECK(r.v[1] == doctest::Approx(0.5));
    CHECK(r.v[2] == doctest::Approx(-w * w * 0.4));
    CHECK(r.v[3] == doctest::Approx(w * w * 0.2));
}

TEST_CASE("great circle on the unit sphere") {
    PolarState<double> p;
    p.r = pi / 2;
    p.pphi = 1.0;
    p.kappa = 1.0;
    const Trajectory t = integrate(free_system(1.0), p, 2 * pi, tight());
    REQUIRE(t.status == RunStatus::completed);
    CHECK(t.times.back() == doctest::Approx(2 * pi));
    CHECK(phase_distance(t.states.front(), t.states.back()) < 1e-6);
}

TEST_CASE("flat harmonic period") {
    oracle::Rng rng(82);
    for (double w : {0.7, 1.0, 2.3}) {
        const State s0 = parallel(0.0, rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        const Trajectory t = integrate(oscillator(0.0, "1", w), s0, 2 * pi / w, tight());
        REQUIRE(t.status == RunStatus::completed);
        CHECK(phase_distance(s0, t.states.back()) < 1e-6);
    }
}

TEST_CASE("trajectory invariants") {
    const SystemSpec s = kdv_curved(0.5);
    const Trajectory t = integrate(s, beltrami(0.5, 0.2, 0.1, 0.3, -0.2), 10.0, IntegratorConfig{}, {{IntegralName::I_hh_kdv, s, 1}}, 11);
    REQUIRE(t.size() > 10);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.times[i] > t.times[i - 1]);
    for (const auto& st : t.states) CHECK_NOTHROW(validate(st));
    CHECK(t.log_names == std::vector<std::string>{"H", "I_hh_kdv"});
    CHECK(t.conserved_log.size() == t.size());
    CHECK(t.seed == 11);
    // dense output reproduces the logged nodes
    const std::size_t mid = t.size() / 2;
    CHECK(phase_distance(t.states[mid], t.state_at(t.times[mid])) < 1e-12);
}

TEST_CASE("energy and integral drift of curved KdV") {
    for (double k : {-0.5, 0.5}) {
        const SystemSpec s = kdv_curved(k);
        const Trajectory t = integrate(s, beltrami(k, 0.2, 0.1, 0.3, -0.2), 100.0, IntegratorConfig{}, {{IntegralName::I_hh_kdv, s, 1}});
        REQUIRE(t.status == RunStatus::completed);
        CHECK(t.drift(0) <= 1e-7);
        CHECK(t.drift(1) <= 1e-6);
    }
}

TEST_CASE("closure of commensurate flat oscillators") {
    const double w = 1.0;
    for (const auto& [g, period] : {std::pair{"1", 2 * pi}, std::pair{"2", 2 * pi}, std::pair{"1/2", 4 * pi}, std::pair{"3/2", 4 * pi}}) {
        const Trajectory t = integrate(oscillator(0.0, g, w), parallel(0.0, 0.3, 0.2, 0.1, -0.25), 3.5 * period, tight());
        const ClosureReport r = closure_detect(t, 1e-4);
        INFO("gamma=", g);
        CHECK(r.closed);
        CHECK(std::abs(r.period - period) < 1e-4);
    }
}

TEST_CASE("closure of curved gamma = 2 at small amplitude") {
    for (double k : {-0.5, 0.5}) {
        const Trajectory t = integrate(oscillator(k, "2"), parallel(k, 0.1, 0.05, 0.02, -0.04), 40.0, tight());
        const ClosureReport r = closure_detect(t, 1e-4);
        CHECK(r.closed);
        CHECK(r.period > 1.0);
    }
}

TEST_CASE("incommensurate control does not close") {
    const SystemSpec s = oscillator(0.0, "1.41421356237", 1.0);
    CHECK_FALSE(s.gamma.exact);
    const Trajectory t = integrate(s, parallel(0.0, 0.3, 0.2, 0.1, -0.25), 200.0, IntegratorConfig{});
    const ClosureReport r = closure_detect(t, 1e-4);
    CHECK_FALSE(r.closed);
    CHECK(r.distance > 1e-4);
}

TEST_CASE("short horizons are rejected") {
    const Trajectory t = integrate(oscillator(0.0, "1"), parallel(0.0, 0.3, 0.2, 0.1, -0.25), 1.0, IntegratorConfig{});
    CHECK_THROWS_AS(closure_detect(t, 1e-4), HorizonError);
}

TEST_CASE("flat-limit sweep of the isotropic oscillator") {
    const SweepResult r = flat_limit_sweep(oscillator(0.0, "1"), parallel(0.0, 0.4, 0.3, 0.2, -0.3), {1e-2, 1e-3, 1e-4}, 10.0,
                                           tight(), 501);
    REQUIRE(r.deviations.size() == 3);
    for (double ratio : r.ratios()) {
        CHECK(ratio >= 8.0);
        CHECK(ratio <= 12.0);
    }
    const SweepResult z = flat_limit_sweep(oscillator(0.0, "1"), parallel(0.0, 0.4, 0.3, 0.2, -0.3), {0.0}, 5.0, tight(), 101);
    CHECK(z.deviations[0] == 0.0);
}

TEST_CASE("flat-limit sweep of curved KdV is monotone") {
    const SweepResult r =
        flat_limit_sweep(kdv_curved(0.0), beltrami(0.0, 0.2, 0.1, 0.3, -0.2), {1e-2, 1e-3, 1e-4}, 10.0, tight(), 501);
    CHECK(r.deviations[0] > r.deviations[1]);
    CHECK(r.deviations[1] > r.deviations[2]);
    CHECK(r.to_json()["rows"][0]["ratio_to_next"] == doctest::Approx(r.ratios()[0]));
}

TEST_CASE("Beltrami and parallel runs describe the same motion") {
    const SystemSpec s = kdv_curved(0.4);
    const State b0 = beltrami(0.4, 0.25, -0.1, 0.2, 0.3);
    const State p0 = convert(b0, Chart::parallel);
    const Trajectory tb = integrate(s, b0, 10.0, tight()), tp = integrate(s, p0, 10.0, tight());
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double t = 10.0 * i / 200;
        worst = std::max(worst, phase_distance(tp.state_at(t), convert(tb.state_at(t), Chart::parallel)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("ambient runs stay on the constraint surface") {
    for (double k : {-0.5, 0.5}) {
        const SystemSpec s = oscillator(k, "2");
        const State a0 = convert(parallel(k, 0.3, 0.2, 0.1, -0.25), Chart::ambient);
        const Trajectory t = integrate(s, a0, 30.0, IntegratorConfig{});
        REQUIRE(t.status == RunStatus::completed);
        for (const auto& st : t.states) {
            const auto& a = std::get<AmbientState<double>>(st);
            const double c1 = a.x[0] * a.x[0] + k * (a.x[1] * a.x[1] + a.x[2] * a.x[2]) - 1.0;
            const double c2 = a.x[0] * a.pi[0] + a.x[1] * a.pi[1] + a.x[2] * a.pi[2];
            CHECK(std::abs(c1) < 1e-8);
            CHECK(std::abs(c2) < 1e-8);
        }
        CHECK(t.drift(0) < 1e-6);
    }
}

TEST_CASE("time reversal") {
    const SystemSpec s = kdv_curved(-0.5);
    const State s0 = beltrami(-0.5, 0.2, 0.1, 0.3, -0.2);
    const Trajectory fwd = integrate(s, s0, 7.0, tight());
    auto back0 = std::get<BeltramiState<double>>(fwd.states.back());
    back0.p1 = -back0.p1;
    back0.p2 = -back0.p2;
    const Trajectory bwd = integrate(s, back0, 7.0, tight());
    auto end = std::get<BeltramiState<double>>(bwd.states.back());
    end.p1 = -end.p1;
    end.p2 = -end.p2;
    CHECK(phase_distance(s0, end) < 1e-6);
}

TEST_CASE("falling into the Coulomb centre aborts cleanly") {
    SystemSpec s;
    s.family = Family::kepler_coulomb;
    s.kappa = -1.0;
    s.k_coulomb = -1.0;
    const Trajectory t = integrate(s, beltrami(-1.0, 0.5, 0.0, 0.0, 0.0), 50.0, IntegratorConfig{});
    CHECK(t.status == RunStatus::boundary);
    CHECK_FALSE(t.event.empty());
    CHECK(t.times.back() < 50.0);
    for (const auto& st : t.states) CHECK_NOTHROW(validate(st));
}

TEST_CASE("step limit") {
    IntegratorConfig c;
    c.max_steps = 10;
    const Trajectory t = integrate(oscillator(0.0, "1"), parallel(0.0, 0.3, 0.2, 0.1, -0.25), 100.0, c);
    CHECK(t.status == RunStatus::step_limit);
}

TEST_CASE("Gauss-Legendre integrator conserves energy") {
    IntegratorConfig c;
    c.method = Method::gauss4_implicit;
    c.max_step = 0.01;
    const SystemSpec s = kdv_curved(0.5);
    const Trajectory t = integrate(s, beltrami(0.5, 0.2, 0.1, 0.3, -0.2), 100.0, c);
    REQUIRE(t.status == RunStatus::completed);
    CHECK(t.drift(0) < 1e-7);
    const Trajectory r = integrate(s, beltrami(0.5, 0.2, 0.1, 0.3, -0.2), 100.0, tight());
    CHECK(phase_distance(t.states.back(), r.states.back()) < 1e-6);
}

TEST_CASE("Beltrami runs cross the sphere equator in the ambient chart") {
    const Trajectory t = integrate(free_system(1.0), beltrami(1.0, 0.0, 0.0, 1.0, 0.0), 2 * pi, tight());
    REQUIRE(t.status == RunStatus::completed);
    REQUIRE(t.chart_switch.has_value());
    CHECK(chart_of(t.states.back()) == Chart::ambient);
    CHECK(chart_of(t.states[*t.chart_switch - 1]) == Chart::beltrami);
    CHECK(phase_distance(convert(t.states.back(), Chart::beltrami), t.states.front()) < 1e-6);
}

TEST_CASE("config validation and JSON") {
    IntegratorConfig c;
    c.rel_tol = 0.0;
    CHECK_THROWS_AS(c.validate(), SpecError);
    IntegratorConfig d;
    d.method = Method::gauss4_implicit;
    d.max_step = 0.02;
    const IntegratorConfig e = integrator_from_json(to_json(d));
    CHECK(e.method == Method::gauss4_implicit);
    CHECK(e.max_step == 0.02);
    CHECK_THROWS_AS(integrate(oscillator(0.0, "1"), parallel(0.0, 0, 0, 0, 0), -1.0, IntegratorConfig{}), SpecError);
    CHECK_THROWS_AS(method_from_string("euler"), SpecError);
}

}  // TEST_SUITE
