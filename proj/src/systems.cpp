#include "kmech/systems.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

namespace kmech {

namespace {

struct FamilyName {
    Family family;
    std::string_view name;
};

constexpr FamilyName kFamilyNames[] = {
    {Family::free, "free"},
    {Family::aniso_oscillator, "aniso_oscillator"},
    {Family::aniso_oscillator_rosochatius, "aniso_oscillator_rosochatius"},
    {Family::higgs, "higgs"},
    {Family::curved_21_typeII, "curved_21_typeII"},
    {Family::rdg_flat, "rdg_flat"},
    {Family::rdg_curved, "rdg_curved"},
    {Family::rdg_superposed, "rdg_superposed"},
    {Family::henon_heiles_kdv_flat, "henon_heiles_kdv_flat"},
    {Family::henon_heiles_kdv_curved, "henon_heiles_kdv_curved"},
    {Family::henon_heiles_sk_flat, "henon_heiles_sk_flat"},
    {Family::henon_heiles_kk_flat, "henon_heiles_kk_flat"},
    {Family::kepler_coulomb, "kepler_coulomb"},
};

const std::set<std::string>& known_params() {
    static const std::set<std::string> names = {"omega",   "gamma",        "Omega", "Omega2",
                                                "alpha",   "lambda1",      "lambda2", "coefficients",
                                                "delta",   "k_coulomb",    "n",     "alpha_n"};
    return names;
}

std::int64_t parse_int(std::string_view text) {
    std::int64_t v = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw SpecError("bad integer '" + std::string(text) + "' in gamma");
    return v;
}

}  // namespace

std::string_view to_string(Family f) {
    for (const auto& e : kFamilyNames) {
        if (e.family == f) return e.name;
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    for (const auto& e : kFamilyNames) {
        if (e.name == name) return e.family;
    }
    throw SpecError("unknown family '" + std::string(name) + "'");
}

std::string Rational::str() const {
    if (n == 1) return std::to_string(m);
    return std::to_string(m) + "/" + std::to_string(n);
}

Rational make_rational(std::int64_t m, std::int64_t n) {
    if (m < 1 || n < 1) throw SpecError("gamma = m/n needs m, n >= 1");
    const std::int64_t g = std::gcd(m, n);
    return {m / g, n / g};
}

GammaValue parse_gamma(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text.empty()) throw SpecError("empty gamma");
    GammaValue g;
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        g.ratio = make_rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
        g.value = g.ratio.value();
        return g;
    }
    if (text.find_first_of(".eE") == std::string_view::npos) {
        g.ratio = make_rational(parse_int(text), 1);
        g.value = g.ratio.value();
        return g;
    }
    double v = 0.0;
    try {
        std::size_t used = 0;
        v = std::stod(std::string(text), &used);
        if (used != text.size()) throw SpecError("bad gamma '" + std::string(text) + "'");
    } catch (const std::logic_error&) {
        throw SpecError("bad gamma '" + std::string(text) + "'");
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw SpecError("gamma must be positive");
    g.value = v;
    g.exact = false;
    return g;
}

Chart native_chart(Family f) {
    switch (f) {
        case Family::aniso_oscillator:
        case Family::aniso_oscillator_rosochatius:
        case Family::curved_21_typeII:
            return Chart::parallel;
        default:
            return Chart::beltrami;
    }
}

bool is_flat_only(Family f) {
    switch (f) {
        case Family::rdg_flat:
        case Family::henon_heiles_kdv_flat:
        case Family::henon_heiles_sk_flat:
        case Family::henon_heiles_kk_flat:
            return true;
        default:
            return false;
    }
}

void validate(const SystemSpec& spec) {
    const std::string fam(to_string(spec.family));
    if (!std::isfinite(spec.kappa)) throw SpecError("kappa must be finite");
    if (is_flat_only(spec.family) && spec.kappa != 0.0) {
        throw SpecError(fam + " is a Euclidean family and needs kappa = 0");
    }
    if (!(spec.omega >= 0.0)) throw SpecError("omega must be >= 0");
    if (!(spec.gamma.value > 0.0)) throw SpecError("gamma must be positive");
    if ((spec.family == Family::rdg_flat || spec.family == Family::rdg_curved) && spec.rdg_order < 0) {
        throw SpecError("RDG order n must be >= 0");
    }
    if (spec.family == Family::rdg_superposed && spec.coefficients.empty()) {
        throw SpecError("rdg_superposed needs a non-empty coefficient list alpha_1..alpha_M");
    }
    if (spec.family == Family::henon_heiles_kdv_curved && spec.Omega2 && *spec.Omega2 != 4.0 * spec.Omega) {
        throw SpecError("henon_heiles_kdv_curved is only constructed for Omega2 = 4 Omega");
    }
}

std::vector<std::string> relevant_params(Family f) {
    switch (f) {
        case Family::free: return {};
        case Family::aniso_oscillator: return {"omega", "gamma"};
        case Family::aniso_oscillator_rosochatius: return {"omega", "gamma", "lambda1", "lambda2"};
        case Family::higgs: return {"omega", "delta", "lambda1", "lambda2"};
        case Family::curved_21_typeII: return {"omega"};
        case Family::rdg_flat:
        case Family::rdg_curved: return {"n", "alpha_n"};
        case Family::rdg_superposed: return {"coefficients"};
        case Family::henon_heiles_kdv_flat: return {"Omega", "Omega2", "alpha"};
        case Family::henon_heiles_kdv_curved:
        case Family::henon_heiles_sk_flat:
        case Family::henon_heiles_kk_flat: return {"Omega", "alpha"};
        case Family::kepler_coulomb: return {"k_coulomb"};
    }
    return {};
}

nlohmann::json to_json(const SystemSpec& spec) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& p : relevant_params(spec.family)) {
        if (p == "omega") params[p] = spec.omega;
        if (p == "gamma") {
            if (spec.gamma.exact) {
                params[p] = spec.gamma.ratio.str();
            } else {
                params[p] = spec.gamma.value;
            }
        }
        if (p == "lambda1") params[p] = spec.lambda1;
        if (p == "lambda2") params[p] = spec.lambda2;
        if (p == "delta") params[p] = spec.higgs_delta();
        if (p == "n") params[p] = spec.rdg_order;
        if (p == "alpha_n") params[p] = spec.rdg_alpha;
        if (p == "coefficients") params[p] = spec.coefficients;
        if (p == "Omega") params[p] = spec.Omega;
        if (p == "Omega2") params[p] = spec.kdv_omega2();
        if (p == "alpha") params[p] = spec.alpha;
        if (p == "k_coulomb") params[p] = spec.k_coulomb;
    }
    return {{"family", std::string(to_string(spec.family))}, {"kappa", spec.kappa}, {"params", params}};
}

SystemSpec system_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SpecError("system must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "family" && it.key() != "kappa" && it.key() != "params") {
            throw SpecError("unknown system field '" + it.key() + "'");
        }
    }
    if (!j.contains("family")) throw SpecError("system is missing 'family'");
    SystemSpec spec;
    spec.family = family_from_string(j.at("family").get<std::string>());
    spec.kappa = j.value("kappa", 0.0);
    if (j.contains("params")) {
        const auto& p = j.at("params");
        if (!p.is_object()) throw SpecError("params must be a JSON object");
        for (auto it = p.begin(); it != p.end(); ++it) {
            if (!known_params().count(it.key())) throw SpecError("unknown parameter '" + it.key() + "'");
        }
        auto num = [&p](const char* key, double fallback) {
            if (!p.contains(key)) return fallback;
            if (!p.at(key).is_number()) throw SpecError(std::string("parameter '") + key + "' must be a number");
            return p.at(key).get<double>();
        };
        spec.omega = num("omega", spec.omega);
        spec.Omega = num("Omega", spec.Omega);
        spec.alpha = num("alpha", spec.alpha);
        spec.lambda1 = num("lambda1", spec.lambda1);
        spec.lambda2 = num("lambda2", spec.lambda2);
        spec.k_coulomb = num("k_coulomb", spec.k_coulomb);
        spec.rdg_alpha = num("alpha_n", spec.rdg_alpha);
        if (p.contains("Omega2")) spec.Omega2 = num("Omega2", 0.0);
        if (p.contains("delta")) spec.delta = num("delta", 0.0);
        if (p.contains("n")) {
            if (!p.at("n").is_number_integer()) throw SpecError("parameter 'n' must be an integer");
            spec.rdg_order = p.at("n").get<int>();
        }
        if (p.contains("coefficients")) {
            if (!p.at("coefficients").is_array()) throw SpecError("'coefficients' must be an array");
            spec.coefficients = p.at("coefficients").get<std::vector<double>>();
        }
        if (p.contains("gamma")) {
            const auto& g = p.at("gamma");
            if (g.is_string()) {
                spec.gamma = parse_gamma(g.get<std::string>());
            } else if (g.is_number_integer()) {
                spec.gamma.ratio = make_rational(g.get<std::int64_t>(), 1);
                spec.gamma.value = spec.gamma.ratio.value();
            } else if (g.is_number()) {
                const double v = g.get<double>();
                if (v > 0.0 && v == std::floor(v) && v < 1e9) {
                    spec.gamma.ratio = make_rational(static_cast<std::int64_t>(v), 1);
                    spec.gamma.value = v;
                } else {
                    spec.gamma = parse_gamma(g.dump());
                }
            } else {
                throw SpecError("gamma must be \"m/n\" text or a number");
            }
        }
    }
    validate(spec);
    return spec;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

Gradient hamiltonian_gradient(const SystemSpec& spec, const State& s) {
    const Dual h = hamiltonian<Dual>(spec, seed(s));
    Gradient g;
    g.value = h.v;
    g.grad.dim = dimension(chart_of(s));
    for (std::size_t i = 0; i < kMaxVars; ++i) g.grad[i] = h.d[i];
    return g;
}

double kinetic_energy(const State& s) { return kinetic_energy<double>(s); }
double potential(const SystemSpec& spec, const State& s) { return potential<double>(spec, s); }
double hamiltonian(const SystemSpec& spec, const State& s) { return hamiltonian<double>(spec, s); }

}  // namespace kmech
