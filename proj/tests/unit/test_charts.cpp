#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "kmech/charts.hpp"
#include "kmech/systems.hpp"
#include "oracles.hpp"

using namespace kmech;
using std::numbers::pi;

namespace {

constexpr double kKappas[] = {-1.0, -0.3, 0.0, 0.5, 1.0};
constexpr Chart kCharts[] = {Chart::ambient, Chart::parallel, Chart::polar, Chart::beltrami};

void check_ambient_constraints(const AmbientState<double>& a) {
    const double c1 = a.x[0] * a.x[0] + a.kappa * (a.x[1] * a.x[1] + a.x[2] * a.x[2]) - 1.0;
    const double c2 = a.x[0] * a.pi[0] + a.x[1] * a.pi[1] + a.x[2] * a.pi[2];
    CHECK(std::abs(c1) < 1e-10);
    CHECK(std::abs(c2) < 1e-10);
}

}  // namespace

TEST_SUITE("charts") {

TEST_CASE("to_ambient reference points") {
    for (double k : kKappas) {
        const auto a = to_ambient(BeltramiState<double>{0, 0, 0.3, -0.7, k});
        CHECK(a.x == std::array<double, 3>{1, 0, 0});
        CHECK(a.pi[0] == 0.0);
        CHECK(a.pi[1] == 0.3);
        CHECK(a.pi[2] == -0.7);
    }
    const auto o = to_ambient(ParallelState<double>{0, 0, 0, 0, 1.0});
    CHECK(o.x == std::array<double, 3>{1, 0, 0});
    const double r = 0.8;
    const auto p = to_ambient(PolarState<double>{r, 0.0, 0, 0, 1.0});
    CHECK(p.x[0] == doctest::Approx(std::cos(r)));
    CHECK(p.x[1] == doctest::Approx(std::sin(r)));
    CHECK(p.x[2] == doctest::Approx(0.0));
}

TEST_CASE("from_ambient at the origin and off the Beltrami hemisphere") {
    const State b = from_ambient(make_ambient({1, 0, 0}, {0, 0.4, -1.1}, 0.7), Chart::beltrami);
    const auto& bs = std::get<BeltramiState<double>>(b);
    CHECK(bs.q1 == 0.0);
    CHECK(bs.q2 == 0.0);
    CHECK(bs.p1 == 0.4);
    CHECK(bs.p2 == -1.1);
    const auto eq = make_ambient({0, 1, 0}, {0, 0, 1}, 1.0);
    CHECK_THROWS_AS(from_ambient(eq, Chart::beltrami), CoverageError);
}

TEST_CASE("convert reference cases") {
    CHECK_THROWS_AS(convert(State(ParallelState<double>{0, 0, 0.1, 0.2, 1.0}), Chart::polar), CoverageError);
    for (double t : {0.3, 1.0, 4.0}) {
        const State p = convert(State(BeltramiState<double>{t, 0, 0, 0, 1.0}), Chart::polar);
        const auto& ps = std::get<PolarState<double>>(p);
        CHECK(ps.r == doctest::Approx(std::atan(t)).epsilon(1e-14));
        CHECK(ps.phi == 0.0);
        CHECK(std::abs(ps.pr) < 1e-15);
        CHECK(std::abs(ps.pphi) < 1e-15);
    }
    const State s = BeltramiState<double>{0.1, 0.2, 0.3, 0.4, -0.5};
    const State same = convert(s, Chart::beltrami);
    CHECK(oracle::max_abs_diff(to_canonical(s), to_canonical(same)) == 0.0);
}

TEST_CASE("round trips through the ambient chart") {
    oracle::Rng rng(21);
    double worst = 0.0;
    for (double k : kKappas) {
        for (Chart c : kCharts) {
            for (int i = 0; i < 100; ++i) {
                const State s = oracle::random_state(rng, c, k);
                const State back = from_ambient(to_ambient(s), c);
                worst = std::max(worst, oracle::max_abs_diff(to_canonical(s), to_canonical(back)));
                check_ambient_constraints(to_ambient(s));
            }
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("generators and kinetic energy are chart invariant") {
    oracle::Rng rng(22);
    for (double k : kKappas) {
        for (int i = 0; i < 100; ++i) {
            const State s = oracle::random_state(rng, Chart::beltrami, k);
            const auto g0 = lie_generators(s);
            const double t0 = kinetic_energy(s);
            for (Chart c : kCharts) {
                const State t = convert(s, c);
                const auto g = lie_generators(t);
                CHECK(std::abs(g.j01 - g0.j01) < 1e-10);
                CHECK(std::abs(g.j02 - g0.j02) < 1e-10);
                CHECK(std::abs(g.j12 - g0.j12) < 1e-10);
                CHECK(std::abs(kinetic_energy(t) - t0) < 1e-10);
                CHECK(std::abs(casimir(t) - 2.0 * kinetic_energy(t)) < 1e-10);
            }
        }
    }
}

TEST_CASE("generator reference values") {
    const auto g = lie_generators(State(BeltramiState<double>{0, 0, 0.7, -0.2, 0.9}));
    CHECK(g.j01 == 0.7);
    CHECK(g.j02 == -0.2);
    CHECK(g.j12 == 0.0);
    CHECK(casimir(State(BeltramiState<double>{0, 0, 0.7, -0.2, 0.9})) == doctest::Approx(0.53));
    CHECK(lie_generators(State(PolarState<double>{0.4, 2.0, 0.3, -1.7, 1.0})).j12 == -1.7);
    CHECK(casimir(State(ParallelState<double>{0.3, -0.2, 0, 0, 0.5})) == 0.0);
}

TEST_CASE("subgroup matrices are isometries") {
    oracle::Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        const double k = rng.uniform(-2, 2), a = rng.uniform(-1, 1);
        const Eigen::Matrix3d I = invariant_form(k);
        for (Generator g : {Generator::J01, Generator::J02, Generator::J12}) {
            const Eigen::Matrix3d M = subgroup_matrix(g, a, k);
            CHECK((M.transpose() * I * M - I).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("subgroup matrix reference forms") {
    const double a = 0.37;
    const Eigen::Matrix3d R = subgroup_matrix(Generator::J12, a, -0.8);
    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    rot(1, 1) = std::cos(a);
    rot(1, 2) = -std::sin(a);
    rot(2, 1) = std::sin(a);
    rot(2, 2) = std::cos(a);
    CHECK((R - rot).cwiseAbs().maxCoeff() < 1e-15);

    const Eigen::Matrix3d S = subgroup_matrix(Generator::J01, a, 0.0);
    Eigen::Matrix3d shear = Eigen::Matrix3d::Identity();
    shear(1, 0) = a;
    CHECK((S - shear).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("subgroup orbit of the origin gives parallel coordinates") {
    oracle::Rng rng(24);
    const Eigen::Vector3d O(1, 0, 0);
    for (int i = 0; i < 100; ++i) {
        const double k = rng.uniform(-1.5, 1.5);
        const double x = rng.uniform(-1, 1), y = rng.uniform(-0.9, 0.9);
        const Eigen::Vector3d v = subgroup_matrix(Generator::J01, x, k) * subgroup_matrix(Generator::J02, y, k) * O;
        const auto a = to_ambient(ParallelState<double>{x, y, 0, 0, k});
        // independent evaluation of the position map
        const Eigen::Vector3d ref(std::cos(0.0) * ck(k, x) * ck(k, y), sk(k, x) * ck(k, y), sk(k, y));
        CHECK((v - ref).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(a.x[0] - ref[0]) + std::abs(a.x[1] - ref[1]) + std::abs(a.x[2] - ref[2]) < 1e-12);
    }
}

TEST_CASE("matrix commutators carry the structure constants") {
    for (double k : {-1.0, 0.0, 0.6}) {
        const auto r01 = generator_matrix(Generator::J01, k);
        const auto r02 = generator_matrix(Generator::J02, k);
        const auto r12 = generator_matrix(Generator::J12, k);
        CHECK(((r12 * r01 - r01 * r12) - r02).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(((r12 * r02 - r02 * r12) + r01).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(((r01 * r02 - r02 * r01) - k * r12).cwiseAbs().maxCoeff() < 1e-15);

        // group commutator M(t) N(t) M(-t) N(-t) = I + t^2 [A, B] + O(t^3)
        double prev = 1e300;
        for (double t : {1e-1, 1e-2, 1e-3}) {
            const Eigen::Matrix3d C = subgroup_matrix(Generator::J01, t, k) * subgroup_matrix(Generator::J02, t, k) *
                                      subgroup_matrix(Generator::J01, -t, k) * subgroup_matrix(Generator::J02, -t, k);
            const double err = ((C - Eigen::Matrix3d::Identity()) / (t * t) - k * r12).cwiseAbs().maxCoeff();
            CHECK(err <= 2.0 * t + 1e-9);
            CHECK(err <= prev);
            prev = err;
        }
    }
}

TEST_CASE("make_ambient re-projects small violations only") {
    const double k = 0.8;
    const double r = 0.6;
    const std::array<double, 3> x{std::cos(std::sqrt(k) * r), std::sin(std::sqrt(k) * r) / std::sqrt(k), 0.0};
    auto a = make_ambient({x[0] * (1 + 3e-9), x[1], x[2]}, {0.0, 0.0, 1.0}, k);
    check_ambient_constraints(a);
    CHECK_THROWS_AS(make_ambient({x[0] * 1.01, x[1], x[2]}, {0, 0, 1}, k), DomainError);
    CHECK_THROWS_AS(make_ambient({-1.0, 0, 0}, {0, 0, 1}, -1.0), DomainError);
    const auto f = make_ambient({1.0 + 1e-9, 0.3, 0.2}, {0.0, 1.0, 0.5}, 0.0);
    CHECK(f.x[0] == 1.0);
    CHECK(f.pi[0] == doctest::Approx(-0.4));
}

TEST_CASE("domain validation") {
    CHECK_THROWS_AS(validate(State(ParallelState<double>{0.1, pi / 2, 0, 0, 1.0})), DomainError);
    CHECK_NOTHROW(validate(State(ParallelState<double>{0.1, 1.5, 0, 0, 1.0})));
    CHECK_THROWS_AS(validate(State(ParallelState<double>{-pi, 0.0, 0, 0, 1.0})), DomainError);
    CHECK_THROWS_AS(validate(State(BeltramiState<double>{0.8, 0.8, 0, 0, -1.0})), DomainError);
    CHECK_NOTHROW(validate(State(BeltramiState<double>{5.0, 5.0, 0, 0, 1.0})));
    CHECK_THROWS_AS(validate(State(PolarState<double>{0.0, 0.0, 0, 0, 1.0})), DomainError);
    CHECK_THROWS_AS(validate(State(PolarState<double>{4.0, 0.0, 0, 0, 1.0})), DomainError);
    CHECK_THROWS_AS(validate(State(PolarState<double>{0.5, 7.0, 0, 0, 1.0})), DomainError);
    CHECK_THROWS_AS(validate(State(AmbientState<double>{{1.0, 0.5, 0.0}, {0, 0, 0}, 1.0})), DomainError);
}

TEST_CASE("periodic wrapping") {
    State p = PolarState<double>{0.5, -0.25, 0, 0, 1.0};
    wrap_periodic(p);
    CHECK(std::get<PolarState<double>>(p).phi == doctest::Approx(2 * pi - 0.25));
    State q = ParallelState<double>{pi + 0.5, 0.1, 0, 0, 1.0};
    wrap_periodic(q);
    CHECK(std::get<ParallelState<double>>(q).x == doctest::Approx(0.5 - pi));
    State e = ParallelState<double>{10.0, 0.1, 0, 0, 0.0};
    wrap_periodic(e);
    CHECK(std::get<ParallelState<double>>(e).x == 10.0);
}

TEST_CASE("state JSON round trip and field checks") {
    oracle::Rng rng(25);
    for (Chart c : kCharts) {
        const State s = oracle::random_state(rng, c, 0.5);
        const State back = state_from_json(to_json(s));
        CHECK(chart_of(back) == c);
        CHECK(oracle::max_abs_diff(to_canonical(s), to_canonical(back)) < 1e-15);
    }
    nlohmann::json j = to_json(State(BeltramiState<double>{0.1, 0.2, 0.3, 0.4, 1.0}));
    j["velocity"] = 1;
    CHECK_THROWS_AS(state_from_json(j), SpecError);
    CHECK_THROWS_AS(state_from_json({{"chart", "beltrami"}, {"kappa", 1.0}, {"coords", {0.1}}, {"momenta", {0, 0}}}),
                    SpecError);
    CHECK_THROWS_AS(chart_from_string("poincare"), SpecError);
}

}  // TEST_SUITE
