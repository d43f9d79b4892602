#pragma once

// Canonical Poisson brackets by forward-mode differentiation, sampled
// commutation checks, so_kappa(3) structure constants and independence rank.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kmech/integrals.hpp"

namespace kmech {

/// Scalar function of a chart state, evaluated on dual numbers so that one
/// call yields the value and the full canonical gradient.
struct PhaseFunction {
    std::string name;
    std::function<Dual(const StateT<Dual>&)> eval;
};

PhaseFunction hamiltonian_function(const SystemSpec& spec);
PhaseFunction integral_function(const IntegralSpec& spec);  // real-valued names only
/// i-th canonical variable (coordinates first, then momenta).
PhaseFunction canonical_function(std::size_t index);
PhaseFunction generator_function(Generator g);
PhaseFunction casimir_function();
PhaseFunction product(const PhaseFunction& f, const PhaseFunction& g);

/// Value and gradient of f at s.
Gradient gradient(const PhaseFunction& f, const State& s);

struct BracketValue {
    double value = 0.0;
    double grad_norm_f = 0.0;
    double grad_norm_g = 0.0;

    /// |{f,g}| / (1 + |grad f| |grad g|)
    double scaled() const { return std::abs(value) / (1.0 + grad_norm_f * grad_norm_g); }
};

BracketValue bracket_value(const PhaseFunction& f, const PhaseFunction& g, const State& s);
double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g, const State& s);

inline constexpr double kBracketRelTol = 1e-8;

struct BracketReport {
    std::string label;
    double max_abs = 0.0;
    double mean_abs = 0.0;
    double max_scaled = 0.0;  // the quantity compared against the tolerance
    std::size_t sample_count = 0;
    double tolerance = kBracketRelTol;
    std::vector<State> failures;

    bool passed() const { return failures.empty(); }
    /// Merges another report over the same pair (associative, order-stable).
    void merge(const BracketReport& other);
    nlohmann::json to_json(std::size_t max_failures = 5) const;
};

// ---------------------------------------------------------------------------
// Sampling.

/// Smallest distance-like quantity to a singular denominator of the system's
/// formulas at s; used to reject near-pole samples.
double pole_margin(const SystemSpec& spec, const State& s);

struct SamplerBox {
    double coord = 2.0;     // half-width for Beltrami / flat coordinates
    double momentum = 2.0;  // half-width for momenta
};

/// Uniform sampler over a chart-dependent safe box. Each draw index has its
/// own generator seeded from (seed, index), so samples do not depend on the
/// order in which they are requested.
class StateSampler {
public:
    StateSampler(SystemSpec spec, Chart chart, std::uint64_t seed, SamplerBox box = {});

    /// One candidate; empty when it falls outside the domain or too close to a pole.
    std::optional<State> draw(std::uint64_t index) const;

    /// n admissible states from at most 100 n draws; throws SamplerExhaustedError.
    std::vector<State> sample(std::size_t n) const;

    const SystemSpec& system() const { return spec_; }
    Chart chart() const { return chart_; }

    static constexpr double kPoleMargin = 1e-3;

private:
    State raw_candidate(std::uint64_t index) const;

    SystemSpec spec_;
    Chart chart_;
    std::uint64_t seed_;
    SamplerBox box_;
};

/// Deterministic per-index stream: (seed, index) -> mt19937_64 seed.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

/// Uniform in [0, 1) from the top 53 bits (reproducible across standard libraries).
double uniform01(std::uint64_t bits);

BracketReport verify_commutation(const PhaseFunction& h, const PhaseFunction& i,
                                 const StateSampler& sampler, std::size_t n,
                                 double rel_tol = kBracketRelTol);

/// Same, over an explicit state list.
BracketReport verify_commutation(const PhaseFunction& h, const PhaseFunction& i,
                                 const std::vector<State>& states, double rel_tol = kBracketRelTol);

/// {J12,J01} = J02, {J12,J02} = -J01, {J01,J02} = kappa J12 in each requested
/// chart (all four by default); one report per (chart, relation).
std::vector<BracketReport> structure_constants_check(double kappa, std::uint64_t seed, std::size_t n,
                                                     std::optional<Chart> only = std::nullopt,
                                                     double rel_tol = 1e-10);

/// Singular values of the row-normalized gradient matrix, descending.
std::vector<double> gradient_singular_values(const std::vector<PhaseFunction>& fs, const State& s);

int independence_rank(const std::vector<PhaseFunction>& fs, const State& s, double threshold = 1e-8);

// ---------------------------------------------------------------------------
// Flat limits of closed-form expressions.

struct FlatLimitRow {
    std::string label;
    std::vector<double> kappas;
    std::vector<double> deviations;  // sup over the state set of |f_kappa - f_0|

    std::vector<double> ratios() const;  // deviations[i] / deviations[i+1]
    /// Every ratio in [lo, hi] and every deviation finite and nonzero.
    bool passed(double lo = 8.0, double hi = 12.0) const;
    nlohmann::json to_json() const;
};

using ScalarFormula = std::function<double(const SystemSpec&, const State&)>;

/// The same coordinates are reused at every kappa; states come from a kappa = 0
/// sampler so the set does not move with kappa.
FlatLimitRow formula_flat_limit(std::string label, const SystemSpec& templ, Chart chart, const ScalarFormula& f,
                                const std::vector<double>& kappas, std::uint64_t seed, std::size_t n,
                                SamplerBox box = {0.5, 1.0});

/// H, Re/Im B+, Re A+ and the parity-scaled X, Y per oscillator ratio; V_n for n = 1..5; the
/// KdV Henon-Heiles integral.
std::vector<FlatLimitRow> flat_limit_catalog(const std::vector<double>& kappas, std::uint64_t seed, std::size_t n);

}  // namespace kmech
