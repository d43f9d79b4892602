#include "kmech/bracket.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SVD>

namespace kmech {

namespace {

Dual canonical_component(const StateT<Dual>& s, std::size_t index) {
    return std::visit(
        [index](const auto& st) -> Dual {
            using S = std::decay_t<decltype(st)>;
            if constexpr (std::is_same_v<S, AmbientState<Dual>>) {
                if (index >= 6) throw SpecError("canonical index out of range");
                return index < 3 ? st.x[index] : st.pi[index - 3];
            } else if constexpr (std::is_same_v<S, ParallelState<Dual>>) {
                const Dual v[] = {st.x, st.y, st.px, st.py};
                if (index >= 4) throw SpecError("canonical index out of range");
                return v[index];
            } else if constexpr (std::is_same_v<S, PolarState<Dual>>) {
                const Dual v[] = {st.r, st.phi, st.pr, st.pphi};
                if (index >= 4) throw SpecError("canonical index out of range");
                return v[index];
            } else {
                const Dual v[] = {st.q1, st.q2, st.p1, st.p2};
                if (index >= 4) throw SpecError("canonical index out of range");
                return v[index];
            }
        },
        s);
}

double grad_norm(const Dual& f, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += f.d[i] * f.d[i];
    return std::sqrt(acc);
}

BracketValue bracket_of(const Dual& f, const Dual& g, std::size_t dim) {
    BracketValue b;
    for (std::size_t i = 0; i < dim; ++i) b.value += f.d[i] * g.d[dim + i] - f.d[dim + i] * g.d[i];
    b.grad_norm_f = grad_norm(f, 2 * dim);
    b.grad_norm_g = grad_norm(g, 2 * dim);
    return b;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double trig_margin(double v) { return std::abs(v); }

}  // namespace

PhaseFunction hamiltonian_function(const SystemSpec& spec) {
    return {"H", [spec](const StateT<Dual>& s) { return hamiltonian<Dual>(spec, s); }};
}

PhaseFunction integral_function(const IntegralSpec& spec) {
    check_compatible(spec);
    if (is_complex(spec.name)) {
        throw SpecError(spec.label() + " is complex valued; brackets use X_real / Y_real");
    }
    return {spec.label(), [spec](const StateT<Dual>& s) { return evaluate<Dual>(spec, s); }};
}

PhaseFunction canonical_function(std::size_t index) {
    return {"z" + std::to_string(index),
            [index](const StateT<Dual>& s) { return canonical_component(s, index); }};
}

PhaseFunction generator_function(Generator g) {
    return {std::string(to_string(g)), [g](const StateT<Dual>& s) {
                const Generators<Dual> j = lie_generators(s);
                switch (g) {
                    case Generator::J01: return j.j01;
                    case Generator::J02: return j.j02;
                    case Generator::J12: return j.j12;
                }
                return Dual(0.0);
            }};
}

PhaseFunction casimir_function() {
    return {"C", [](const StateT<Dual>& s) { return casimir(s); }};
}

PhaseFunction product(const PhaseFunction& f, const PhaseFunction& g) {
    return {f.name + "*" + g.name, [f, g](const StateT<Dual>& s) { return f.eval(s) * g.eval(s); }};
}

Gradient gradient(const PhaseFunction& f, const State& s) {
    const Dual v = f.eval(seed(s));
    Gradient g;
    g.value = v.v;
    g.grad.dim = dimension(chart_of(s));
    for (std::size_t i = 0; i < kMaxVars; ++i) g.grad[i] = v.d[i];
    return g;
}

BracketValue bracket_value(const PhaseFunction& f, const PhaseFunction& g, const State& s) {
    const StateT<Dual> ds = seed(s);
    return bracket_of(f.eval(ds), g.eval(ds), dimension(chart_of(s)));
}

double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g, const State& s) {
    return bracket_value(f, g, s).value;
}

void BracketReport::merge(const BracketReport& other) {
    const std::size_t total = sample_count + other.sample_count;
    if (total > 0) {
        mean_abs = (mean_abs * static_cast<double>(sample_count) +
                    other.mean_abs * static_cast<double>(other.sample_count)) /
                   static_cast<double>(total);
    }
    sample_count = total;
    max_abs = std::max(max_abs, other.max_abs);
    max_scaled = std::max(max_scaled, other.max_scaled);
    failures.insert(failures.end(), other.failures.begin(), other.failures.end());
}

nlohmann::json BracketReport::to_json(std::size_t max_failures) const {
    nlohmann::json fails = nlohmann::json::array();
    for (std::size_t i = 0; i < failures.size() && i < max_failures; ++i) fails.push_back(kmech::to_json(failures[i]));
    return {{"pair", label},
            {"n", sample_count},
            {"max_abs", max_abs},
            {"mean_abs", mean_abs},
            {"max_scaled", max_scaled},
            {"tolerance", tolerance},
            {"failure_count", failures.size()},
            {"failures", fails},
            {"verdict", passed() ? "pass" : "fail"}};
}

// ---------------------------------------------------------------------------

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL));
}

double uniform01(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double pole_margin(const SystemSpec& spec, const State& s) {
    double m = std::numeric_limits<double>::infinity();
    const double k = kappa_of(s);
    try {
        if (auto* p = std::get_if<ParallelState<double>>(&s)) m = std::min(m, trig_margin(ck(k, p->y)));
        if (auto* p = std::get_if<PolarState<double>>(&s)) m = std::min(m, trig_margin(sk(k, p->r)));
        if (auto* b = std::get_if<BeltramiState<double>>(&s)) {
            m = std::min(m, 1.0 + k * (b->q1 * b->q1 + b->q2 * b->q2));
        }
        const auto x = normalized(to_ambient(s)).x;
        switch (spec.family) {
            case Family::aniso_oscillator:
            case Family::aniso_oscillator_rosochatius:
            case Family::higgs:
            case Family::curved_21_typeII: {
                const OscillatorParams o = oscillator_params(spec);
                const ParallelState<double> p = systems_detail::oscillator_point(s, o.swapped);
                m = std::min({m, trig_margin(ck(k, o.gamma * p.x)), trig_margin(ck(k, p.y))});
                if (spec.family == Family::aniso_oscillator_rosochatius || spec.family == Family::higgs) {
                    if (spec.lambda1 != 0.0) m = std::min(m, std::abs(x[1]));
                    if (spec.lambda2 != 0.0) m = std::min(m, std::abs(x[2]));
                }
                if (spec.family == Family::higgs) m = std::min(m, std::abs(x[0]));
                if (spec.family == Family::curved_21_typeII) m = std::min(m, std::abs(x[0] * x[0] - k * x[2] * x[2]));
                const auto names = declared_integrals(spec);
                if (k != 0.0 && std::find(names.begin(), names.end(), IntegralName::X_real) != names.end()) {
                    // E_kappa divides the curved real integrals
                    const SplitVars<double> v = split_vars(o, s);
                    const double rad = o.omega * o.omega / (o.gamma * o.gamma) + 2.0 * k * h_xi_regular(o, v);
                    m = std::min(m, rad > 0.0 ? std::sqrt(rad) : 0.0);
                }
                break;
            }
            case Family::rdg_curved:
            case Family::rdg_superposed:
            case Family::henon_heiles_kdv_curved:
                m = std::min(m, std::abs(x[0] * x[0] - k * x[2] * x[2]));
                break;
            case Family::kepler_coulomb:
                m = std::min(m, std::sqrt(x[1] * x[1] + x[2] * x[2]));
                break;
            default:
                break;
        }
    } catch (const Error&) {
        return 0.0;
    }
    return m;
}

StateSampler::StateSampler(SystemSpec spec, Chart chart, std::uint64_t seed, SamplerBox box)
    : spec_(std::move(spec)), chart_(chart), seed_(seed), box_(box) {}

State StateSampler::raw_candidate(std::uint64_t index) const {
    std::mt19937_64 rng(split_seed(seed_, index));
    auto uni = [&rng](double lo, double hi) { return lo + (hi - lo) * uniform01(rng()); };
    const double k = spec_.kappa;
    const double pm = box_.momentum;
    const double half = half_period(k);
    switch (chart_) {
        case Chart::beltrami: {
            const double w = k < 0.0 ? std::min(box_.coord, 0.8 / std::sqrt(-k)) : box_.coord;
            const double q1 = uni(-w, w), q2 = uni(-w, w);
            return BeltramiState<double>{q1, q2, uni(-pm, pm), uni(-pm, pm), k};
        }
        case Chart::polar: {
            const double rmax = std::min(box_.coord, half);
            const double r = uni(0.0, rmax), phi = uni(0.0, 2.0 * std::numbers::pi);
            return PolarState<double>{r, phi, uni(-pm, pm), uni(-pm, pm), k};
        }
        case Chart::parallel:
        case Chart::ambient: {
            const double wx = std::min(box_.coord, half);
            const double wy = std::min(box_.coord, 0.5 * half);
            const double x = uni(-wx, wx), y = uni(-wy, wy);
            const ParallelState<double> p{x, y, uni(-pm, pm), uni(-pm, pm), k};
            if (chart_ == Chart::parallel) return p;
            return to_ambient(p);
        }
    }
    throw SpecError("unknown chart");
}

std::optional<State> StateSampler::draw(std::uint64_t index) const {
    try {
        State s = raw_candidate(index);
        validate(s);
        if (!(pole_margin(spec_, s) >= kPoleMargin)) return std::nullopt;
        const double h = hamiltonian(spec_, s);
        if (!std::isfinite(h)) return std::nullopt;
        return s;
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::vector<State> StateSampler::sample(std::size_t n) const {
    std::vector<State> out;
    out.reserve(n);
    const std::uint64_t budget = 100 * static_cast<std::uint64_t>(n);
    for (std::uint64_t i = 0; i < budget && out.size() < n; ++i) {
        if (auto s = draw(i)) out.push_back(*s);
    }
    if (out.size() < n) {
        throw SamplerExhaustedError("only " + std::to_string(out.size()) + " of " + std::to_string(n) +
                                    " admissible states in " + std::to_string(budget) + " draws");
    }
    return out;
}

namespace {

void accumulate(BracketReport& r, const BracketValue& b, const State& s) {
    const double a = std::abs(b.value);
    r.max_abs = std::max(r.max_abs, a);
    r.mean_abs += a;
    r.max_scaled = std::max(r.max_scaled, b.scaled());
    ++r.sample_count;
    if (!(b.scaled() <= r.tolerance)) r.failures.push_back(s);
}

void finish(BracketReport& r) {
    if (r.sample_count > 0) r.mean_abs /= static_cast<double>(r.sample_count);
}

}  // namespace

BracketReport verify_commutation(const PhaseFunction& h, const PhaseFunction& i, const StateSampler& sampler,
                                 std::size_t n, double rel_tol) {
    if (n == 0) throw SpecError("verify_commutation needs n >= 1");
    BracketReport r;
    r.label = "{" + h.name + "," + i.name + "}";
    r.tolerance = rel_tol;
    const std::uint64_t budget = 100 * static_cast<std::uint64_t>(n);
    for (std::uint64_t idx = 0; idx < budget && r.sample_count < n; ++idx) {
        const auto s = sampler.draw(idx);
        if (!s) continue;
        BracketValue b;
        try {
            b = bracket_value(h, i, *s);
        } catch (const Error&) {
            continue;
        }
        if (!std::isfinite(b.value)) continue;
        accumulate(r, b, *s);
    }
    if (r.sample_count < n) {
        throw SamplerExhaustedError(r.label + ": only " + std::to_string(r.sample_count) + " of " +
                                    std::to_string(n) + " admissible states in " + std::to_string(budget) +
                                    " draws");
    }
    finish(r);
    return r;
}

BracketReport verify_commutation(const PhaseFunction& h, const PhaseFunction& i, const std::vector<State>& states,
                                 double rel_tol) {
    BracketReport r;
    r.label = "{" + h.name + "," + i.name + "}";
    r.tolerance = rel_tol;
    for (const auto& s : states) accumulate(r, bracket_value(h, i, s), s);
    finish(r);
    return r;
}

std::vector<BracketReport> structure_constants_check(double kappa, std::uint64_t seed, std::size_t n,
                                                     std::optional<Chart> only, double rel_tol) {
    SystemSpec free_spec;
    free_spec.kappa = kappa;
    const PhaseFunction j01 = generator_function(Generator::J01);
    const PhaseFunction j02 = generator_function(Generator::J02);
    const PhaseFunction j12 = generator_function(Generator::J12);
    struct Relation {
        const PhaseFunction* a;
        const PhaseFunction* b;
        std::string text;
        std::function<double(const Generators<double>&)> rhs;
    };
    const Relation relations[] = {
        {&j12, &j01, "{J12,J01}=J02", [](const Generators<double>& g) { return g.j02; }},
        {&j12, &j02, "{J12,J02}=-J01", [](const Generators<double>& g) { return -g.j01; }},
        {&j01, &j02, "{J01,J02}=kappa*J12", [kappa](const Generators<double>& g) { return kappa * g.j12; }},
    };
    std::vector<BracketReport> out;
    for (Chart chart : {Chart::ambient, Chart::parallel, Chart::polar, Chart::beltrami}) {
        if (only && *only != chart) continue;
        const StateSampler sampler(free_spec, chart, seed + static_cast<std::uint64_t>(chart));
        const std::vector<State> states = sampler.sample(n);
        for (const auto& rel : relations) {
            BracketReport r;
            r.label = std::string(to_string(chart)) + " " + rel.text;
            r.tolerance = rel_tol;
            for (const auto& s : states) {
                BracketValue b = bracket_value(*rel.a, *rel.b, s);
                b.value -= rel.rhs(lie_generators(s));
                accumulate(r, b, s);
            }
            finish(r);
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<double> gradient_singular_values(const std::vector<PhaseFunction>& fs, const State& s) {
    const std::size_t cols = 2 * dimension(chart_of(s));
    const StateT<Dual> ds = seed(s);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(fs.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < fs.size(); ++r) {
        const Dual v = fs[r].eval(ds);
        const double nrm = grad_norm(v, cols);
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = nrm > 0.0 ? v.d[c] / nrm : 0.0;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto sv = svd.singularValues();
    return {sv.data(), sv.data() + sv.size()};
}

int independence_rank(const std::vector<PhaseFunction>& fs, const State& s, double threshold) {
    const auto sv = gradient_singular_values(fs, s);
    return static_cast<int>(std::count_if(sv.begin(), sv.end(), [threshold](double v) { return v > threshold; }));
}

// ---------------------------------------------------------------------------

std::vector<double> FlatLimitRow::ratios() const {
    std::vector<double> r;
    for (std::size_t i = 0; i + 1 < deviations.size(); ++i) {
        r.push_back(deviations[i + 1] > 0.0 ? deviations[i] / deviations[i + 1]
                                            : std::numeric_limits<double>::infinity());
    }
    return r;
}

bool FlatLimitRow::passed(double lo, double hi) const {
    for (double d : deviations) {
        if (!std::isfinite(d) || d <= 0.0) return false;
    }
    const auto r = ratios();
    return std::all_of(r.begin(), r.end(), [lo, hi](double x) { return x >= lo && x <= hi; });
}

nlohmann::json FlatLimitRow::to_json() const {
    return {{"quantity", label},
            {"kappas", kappas},
            {"deviations", deviations},
            {"ratios", ratios()},
            {"verdict", passed() ? "pass" : "fail"}};
}

FlatLimitRow formula_flat_limit(std::string label, const SystemSpec& templ, Chart chart, const ScalarFormula& f,
                                const std::vector<double>& kappas, std::uint64_t seed, std::size_t n,
                                SamplerBox box) {
    if (chart == Chart::ambient) throw SpecError("flat-limit state sets use intrinsic charts");
    SystemSpec flat = templ;
    flat.kappa = 0.0;
    const std::vector<State> states = StateSampler(flat, chart, seed, box).sample(n);
    std::vector<double> reference;
    reference.reserve(states.size());
    for (const auto& s : states) reference.push_back(f(flat, s));

    FlatLimitRow row;
    row.label = std::move(label);
    row.kappas = kappas;
    for (double k : kappas) {
        SystemSpec curved = templ;
        curved.kappa = k;
        double worst = 0.0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            State s = states[i];
            std::visit([k](auto& st) { st.kappa = k; }, s);
            double v;
            try {
                v = f(curved, s);
            } catch (const Error&) {
                v = std::numeric_limits<double>::quiet_NaN();
            }
            const double d = std::abs(v - reference[i]);
            worst = std::isnan(d) ? d : std::max(worst, d);
            if (std::isnan(worst)) break;
        }
        row.deviations.push_back(worst);
    }
    return row;
}

std::vector<FlatLimitRow> flat_limit_catalog(const std::vector<double>& kappas, std::uint64_t seed, std::size_t n) {
    std::vector<FlatLimitRow> rows;
    auto at = [](const SystemSpec& sp, const State& s) { return hamiltonian(sp, s); };
    for (const char* g : {"1", "2", "1/2", "3/2", "3"}) {
        SystemSpec osc;
        osc.family = Family::aniso_oscillator;
        osc.omega = 1.0;
        osc.gamma = parse_gamma(g);
        const std::string tag = std::string(" gamma=") + g;
        auto part = [](auto fn, bool im) {
            return [fn, im](const SystemSpec& sp, const State& s) {
                const auto z = fn(sp, s);
                return im ? z.im : z.re;
            };
        };
        auto b = [](const SystemSpec& sp, const State& s) { return ladder(sp, s, +1); };
        auto a = [](const SystemSpec& sp, const State& s) { return shift(sp, s, +1); };
        rows.push_back(formula_flat_limit("H" + tag, osc, Chart::parallel, at, kappas, seed, n));
        rows.push_back(formula_flat_limit("Re B+" + tag, osc, Chart::parallel, part(b, false), kappas, seed, n));
        rows.push_back(formula_flat_limit("Im B+" + tag, osc, Chart::parallel, part(b, true), kappas, seed, n));
        rows.push_back(formula_flat_limit("Re A+" + tag, osc, Chart::parallel, part(a, false), kappas, seed, n));
        // Im A+ = -p_y / sqrt 2 carries no kappa
        // the curved pair reduces as (X, E Y) for even m + n and (E X, Y) for odd
        const bool even = (osc.gamma.ratio.m + osc.gamma.ratio.n) % 2 == 0;
        auto scaled = [even](bool want_y) {
            return [even, want_y](const SystemSpec& sp, const State& s) {
                const auto xy = real_integrals(sp, s);
                const double v = want_y ? xy.y : xy.x;
                if (sp.kappa == 0.0 || even != want_y) return v;
                return e_kappa(sp, s) * v;
            };
        };
        rows.push_back(formula_flat_limit(even ? "X" + tag : "E*X" + tag, osc, Chart::parallel, scaled(false), kappas,
                                          seed, n));
        rows.push_back(formula_flat_limit(even ? "E*Y" + tag : "Y" + tag, osc, Chart::parallel, scaled(true), kappas,
                                          seed, n));
    }
    for (int order = 1; order <= 5; ++order) {
        SystemSpec rdg;
        rdg.family = Family::rdg_curved;
        rdg.rdg_order = order;
        rdg.rdg_alpha = 1.0;
        // V_{kappa,n} against V_n; the curved family reduces to rdg_flat at kappa = 0
        rows.push_back(formula_flat_limit(
            "V_" + std::to_string(order), rdg, Chart::beltrami,
            [](const SystemSpec& sp, const State& s) { return potential(sp, s); }, kappas, seed, n));
    }
    SystemSpec kdv;
    kdv.family = Family::henon_heiles_kdv_curved;
    kdv.Omega = 0.5;
    kdv.alpha = 0.8;
    rows.push_back(formula_flat_limit(
        "I_hh_kdv", kdv, Chart::beltrami,
        [](const SystemSpec& sp, const State& s) { return evaluate(IntegralSpec{IntegralName::I_hh_kdv, sp, 1}, s); },
        kappas, seed, n));
    return rows;
}

}  // namespace kmech
