#include "kmech/integrals.hpp"

namespace kmech {

namespace {

struct IntegralNameEntry {
    IntegralName name;
    std::string_view text;
};

constexpr IntegralNameEntry kIntegralNames[] = {
    {IntegralName::H_xi, "H_xi"},         {IntegralName::E_kappa, "E_kappa"},
    {IntegralName::B_plus, "B_plus"},     {IntegralName::B_minus, "B_minus"},
    {IntegralName::A_plus, "A_plus"},     {IntegralName::A_minus, "A_minus"},
    {IntegralName::X_complex, "X_complex"}, {IntegralName::X_real, "X_real"},
    {IntegralName::Y_real, "Y_real"},     {IntegralName::J_angular, "J_angular"},
    {IntegralName::L_rdg, "L_rdg"},       {IntegralName::L_superposed, "L_superposed"},
    {IntegralName::I_hh_kdv, "I_hh_kdv"},
};

bool is_oscillator(Family f) {
    return f == Family::aniso_oscillator || f == Family::aniso_oscillator_rosochatius ||
           f == Family::higgs || f == Family::curved_21_typeII;
}

bool no_lambda(const SystemSpec& s) { return s.lambda1 == 0.0 && s.lambda2 == 0.0; }

bool has_second_integral(const SystemSpec& s) {
    switch (s.family) {
        case Family::aniso_oscillator: return s.gamma.exact;
        case Family::aniso_oscillator_rosochatius: return s.gamma.exact && no_lambda(s);
        case Family::higgs: return no_lambda(s);
        case Family::curved_21_typeII: return true;
        default: return false;
    }
}

bool has_angular(const SystemSpec& s) {
    switch (s.family) {
        case Family::free:
        case Family::kepler_coulomb: return true;
        case Family::higgs: return no_lambda(s);
        case Family::aniso_oscillator:
            return s.gamma.exact && s.gamma.ratio == Rational{1, 1};
        case Family::aniso_oscillator_rosochatius:
            return s.gamma.exact && s.gamma.ratio == Rational{1, 1} && no_lambda(s);
        default: return false;
    }
}

bool kdv_flat_integrable(const SystemSpec& s) { return s.kdv_omega2() == 4.0 * s.Omega; }

}  // namespace

std::string_view to_string(IntegralName n) {
    for (const auto& e : kIntegralNames) {
        if (e.name == n) return e.text;
    }
    return "unknown";
}

IntegralName integral_from_string(std::string_view name) {
    for (const auto& e : kIntegralNames) {
        if (e.text == name) return e.name;
    }
    throw SpecError("unknown integral '" + std::string(name) + "'");
}

bool is_complex(IntegralName n) {
    switch (n) {
        case IntegralName::B_plus:
        case IntegralName::B_minus:
        case IntegralName::A_plus:
        case IntegralName::A_minus:
        case IntegralName::X_complex:
            return true;
        default:
            return false;
    }
}

std::string IntegralSpec::label() const {
    std::string s(to_string(name));
    if (name == IntegralName::X_complex) s += sign > 0 ? "+" : "-";
    return s;
}

OscillatorParams oscillator_params(const SystemSpec& spec) {
    OscillatorParams o;
    switch (spec.family) {
        case Family::aniso_oscillator:
        case Family::aniso_oscillator_rosochatius:
            o.omega = spec.omega;
            o.gamma = spec.gamma.value;
            o.ratio = spec.gamma.ratio;
            o.exact = spec.gamma.exact;
            if (spec.family == Family::aniso_oscillator_rosochatius) o.lambda1 = spec.lambda1;
            return o;
        case Family::higgs: {
            const double d = spec.higgs_delta();
            if (d < 0.0) throw SpecError("oscillator integrals of higgs need delta >= 0");
            o.omega = std::sqrt(2.0 * d);
            o.lambda1 = spec.lambda1;
            return o;
        }
        case Family::curved_21_typeII:
            o.omega = spec.omega;
            o.gamma = 2.0;
            o.ratio = {2, 1};
            o.swapped = true;
            return o;
        default:
            throw SpecError(std::string("family ") + std::string(to_string(spec.family)) +
                            " has no oscillator integrals");
    }
}

void check_compatible(const IntegralSpec& spec) {
    const SystemSpec& s = spec.system;
    const std::string what = std::string(to_string(spec.name)) + " is not defined for " +
                             std::string(to_string(s.family));
    switch (spec.name) {
        case IntegralName::H_xi:
        case IntegralName::E_kappa:
        case IntegralName::B_plus:
        case IntegralName::B_minus:
        case IntegralName::A_plus:
        case IntegralName::A_minus:
            if (!is_oscillator(s.family)) throw SpecError(what);
            oscillator_params(s);
            return;
        case IntegralName::X_complex:
        case IntegralName::X_real:
        case IntegralName::Y_real:
            if (!has_second_integral(s)) {
                throw SpecError(what + " (needs an oscillator with rational gamma and no lambda terms)");
            }
            if (spec.name == IntegralName::X_complex && spec.sign != 1 && spec.sign != -1) {
                throw SpecError("X_complex sign must be +1 or -1");
            }
            return;
        case IntegralName::J_angular:
            if (!has_angular(s)) throw SpecError(what + " (rotation symmetry required)");
            return;
        case IntegralName::L_rdg:
            if (s.family == Family::curved_21_typeII) return;
            if ((s.family == Family::rdg_flat || s.family == Family::rdg_curved) && s.rdg_order >= 1) return;
            throw SpecError(what + " (needs rdg_flat / rdg_curved with n >= 1, or curved_21_typeII)");
        case IntegralName::L_superposed:
            if (s.family == Family::rdg_superposed) return;
            throw SpecError(what);
        case IntegralName::I_hh_kdv:
            if (s.family == Family::henon_heiles_kdv_curved) return;
            if (s.family == Family::henon_heiles_kdv_flat && kdv_flat_integrable(s)) return;
            throw SpecError(what + " (needs the KdV case Omega2 = 4 Omega)");
    }
}

std::vector<IntegralName> declared_integrals(const SystemSpec& s) {
    std::vector<IntegralName> out;
    if (is_oscillator(s.family)) out.push_back(IntegralName::H_xi);
    if (has_second_integral(s)) {
        out.push_back(IntegralName::X_real);
        out.push_back(IntegralName::Y_real);
    }
    if (has_angular(s)) out.push_back(IntegralName::J_angular);
    switch (s.family) {
        case Family::curved_21_typeII: out.push_back(IntegralName::L_rdg); break;
        case Family::rdg_flat:
        case Family::rdg_curved:
            if (s.rdg_order >= 1) out.push_back(IntegralName::L_rdg);
            break;
        case Family::rdg_superposed: out.push_back(IntegralName::L_superposed); break;
        case Family::henon_heiles_kdv_curved: out.push_back(IntegralName::I_hh_kdv); break;
        case Family::henon_heiles_kdv_flat:
            if (kdv_flat_integrable(s)) out.push_back(IntegralName::I_hh_kdv);
            break;
        default: break;
    }
    return out;
}

nlohmann::json to_json(const IntegralSpec& spec) {
    nlohmann::json j = {{"name", std::string(to_string(spec.name))}, {"system", to_json(spec.system)}};
    if (spec.name == IntegralName::X_complex) j["sign"] = spec.sign;
    return j;
}

IntegralSpec integral_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SpecError("integral must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "name" && it.key() != "system" && it.key() != "sign") {
            throw SpecError("unknown integral field '" + it.key() + "'");
        }
    }
    if (!j.contains("name") || !j.contains("system")) throw SpecError("integral needs 'name' and 'system'");
    IntegralSpec spec;
    spec.name = integral_from_string(j.at("name").get<std::string>());
    spec.system = system_from_json(j.at("system"));
    spec.sign = j.value("sign", 1);
    check_compatible(spec);
    return spec;
}

double evaluate(const IntegralSpec& spec, const State& s) { return evaluate<double>(spec, s); }

std::complex<double> evaluate_complex(const IntegralSpec& spec, const State& s) {
    return to_std(evaluate_complex<double>(spec, s));
}

}  // namespace kmech
