#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "kmech/bracket.hpp"
#include "kmech/cli.hpp"

namespace kmech::cli {

namespace {

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> coordinate_names(Chart c) {
    switch (c) {
        case Chart::ambient: return {"x0", "x1", "x2", "pi0", "pi1", "pi2"};
        case Chart::parallel: return {"x", "y", "px", "py"};
        case Chart::polar: return {"r", "phi", "pr", "pphi"};
        case Chart::beltrami: return {"q1", "q2", "p1", "p2"};
    }
    return {};
}

// A run that switched charts is exported entirely in the ambient chart.
Chart export_chart(const Trajectory& t) { return t.chart_switch ? Chart::ambient : t.chart; }

std::vector<std::string> columns(const Trajectory& t) {
    std::vector<std::string> c{"t"};
    for (auto& n : coordinate_names(export_chart(t))) c.push_back(n);
    for (auto& n : t.log_names) c.push_back(n);
    return c;
}

std::vector<double> row(const Trajectory& t, std::size_t i) {
    std::vector<double> r{t.times[i]};
    const State s = convert(t.states[i], export_chart(t));
    const PhaseVector v = to_canonical(s);
    for (std::size_t k = 0; k < v.size(); ++k) r.push_back(v[k]);
    for (double q : t.conserved_log[i]) r.push_back(q);
    return r;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

SystemSpec oscillator_template(double kappa, const std::string& gamma, double omega = 1.0) {
    SystemSpec s;
    s.family = Family::aniso_oscillator;
    s.kappa = kappa;
    s.omega = omega;
    s.gamma = parse_gamma(gamma);
    return s;
}

std::string gamma_text(const SystemSpec& s) {
    return s.gamma.exact ? s.gamma.ratio.str() : num17(s.gamma.value);
}

// Default parameter sets used by the catalog-wide suites.
std::vector<SystemSpec> catalog_systems(double kappa, std::uint64_t seed, const std::vector<std::string>& gammas) {
    std::vector<SystemSpec> out;
    auto add = [&](SystemSpec s) {
        if (is_flat_only(s.family) && kappa != 0.0) return;
        s.kappa = kappa;
        out.push_back(std::move(s));
    };
    {
        SystemSpec s;
        add(s);
    }
    for (const auto& g : gammas) add(oscillator_template(kappa, g, 1.1));
    {
        SystemSpec s;
        s.family = Family::aniso_oscillator_rosochatius;
        s.gamma = parse_gamma("2");
        s.lambda1 = 0.3;
        s.lambda2 = 0.45;
        add(s);
    }
    {
        SystemSpec s;
        s.family = Family::higgs;
        s.delta = 0.8;
        add(s);
    }
    {
        SystemSpec s;
        s.family = Family::curved_21_typeII;
        s.omega = 1.2;
        add(s);
    }
    for (int n = 1; n <= 5; ++n) {
        SystemSpec s;
        s.family = kappa == 0.0 ? Family::rdg_flat : Family::rdg_curved;
        s.rdg_order = n;
        s.rdg_alpha = 0.3 + 0.1 * n;
        add(s);
    }
    std::mt19937_64 rng(split_seed(seed, 0x5eed));
    for (std::size_t m = 1; m <= 5; ++m) {
        SystemSpec s;
        s.family = Family::rdg_superposed;
        for (std::size_t i = 0; i < m; ++i) s.coefficients.push_back(2.0 * uniform01(rng()) - 1.0);
        add(s);
    }
    {
        SystemSpec s;
        s.family = Family::henon_heiles_kdv_flat;
        s.Omega = 0.5;
        s.alpha = 0.8;
        add(s);
    }
    {
        SystemSpec s;
        s.family = Family::henon_heiles_kdv_curved;
        s.Omega = 0.5;
        s.alpha = 0.8;
        add(s);
    }
    for (Family f : {Family::henon_heiles_sk_flat, Family::henon_heiles_kk_flat}) {
        SystemSpec s;
        s.family = f;
        s.Omega = 0.5;
        s.alpha = 0.8;
        add(s);
    }
    {
        SystemSpec s;
        s.family = Family::kepler_coulomb;
        s.k_coulomb = -1.0;
        add(s);
    }
    return out;
}

const std::vector<std::string> kDefaultGammas{"1", "2", "1/2", "3/2", "3"};

nlohmann::json verdict_of(bool ok) { return ok ? "pass" : "fail"; }

nlohmann::json suite_brackets(const VerifyOptions& o) {
    const std::vector<double> kappas = o.kappas.empty() ? std::vector<double>{0.0, -0.5, 0.5} : o.kappas;
    const auto& gammas = o.gammas.empty() ? kDefaultGammas : o.gammas;
    nlohmann::json rows = nlohmann::json::array(), controls = nlohmann::json::array();
    bool ok = true;
    std::uint64_t stream = 0;
    for (double k : kappas) {
        for (const SystemSpec& s : catalog_systems(k, o.seed, gammas)) {
            const StateSampler sampler(s, native_chart(s.family), split_seed(o.seed, ++stream));
            try {
            const PhaseFunction H = hamiltonian_function(s);
            for (IntegralName n : declared_integrals(s)) {
                BracketReport r = verify_commutation(H, integral_function({n, s, 1}), sampler, o.n);
                r.label = "{H," + std::string(to_string(n)) + "}";
                nlohmann::json j = r.to_json(2);
                j["system"] = to_json(s);
                rows.push_back(j);
                ok = ok && r.passed();
            }
            if (s.family != Family::free) {
                // negative control: {H, q1} must not pass
                BracketReport r = verify_commutation(H, canonical_function(0), sampler, o.n);
                r.label = "{H,q1}";
                const bool caught = !r.passed();
                nlohmann::json j = r.to_json(0);
                j["system"] = to_json(s);
                j["expect"] = "fail";
                j["verdict"] = verdict_of(caught);
                controls.push_back(j);
                ok = ok && caught;
            }
            } catch (const Error& e) {
                rows.push_back({{"system", to_json(s)}, {"error", e.what()}, {"verdict", "fail"}});
                ok = false;
            }
        }
    }
    return {{"pairs", rows}, {"negative_controls", controls}, {"verdict", verdict_of(ok)}};
}

nlohmann::json suite_structure(const VerifyOptions& o) {
    const std::vector<double> kappas = o.kappas.empty() ? std::vector<double>{-1.0, -0.3, 0.0, 0.5, 1.0} : o.kappas;
    nlohmann::json rows = nlohmann::json::array();
    bool ok = true;
    for (double k : kappas) {
        for (const auto& r : structure_constants_check(k, o.seed, o.n)) {
            nlohmann::json j = r.to_json(2);
            j["kappa"] = k;
            std::string rel = r.label.substr(r.label.find(' ') + 1);
            if (k == 0.0 && rel == "{J01,J02}=kappa*J12") rel = "{J01,J02}=0";
            j["chart"] = r.label.substr(0, r.label.find(' '));
            j["relation"] = rel;
            rows.push_back(j);
            ok = ok && r.passed();
        }
    }
    return {{"rows", rows}, {"verdict", verdict_of(ok)}};
}

nlohmann::json suite_independence(const VerifyOptions& o) {
    const std::vector<double> kappas = o.kappas.empty() ? std::vector<double>{0.0, -0.5, 0.5} : o.kappas;
    const auto& gammas = o.gammas.empty() ? kDefaultGammas : o.gammas;
    const std::size_t n = std::min<std::size_t>(o.n, 100);
    nlohmann::json rows = nlohmann::json::array();
    bool ok = true;
    std::uint64_t stream = 1000;
    for (const auto& g : gammas) {
        for (double k : kappas) {
            const SystemSpec s = oscillator_template(k, g, 1.0);
            if (!s.gamma.exact) throw ConfigError("independence needs rational gamma, got " + g);
            const PhaseFunction H = hamiltonian_function(s), Hx = integral_function({IntegralName::H_xi, s, 1}),
                                X = integral_function({IntegralName::X_real, s, 1}),
                                Y = integral_function({IntegralName::Y_real, s, 1});
            const auto states = StateSampler(s, Chart::parallel, split_seed(o.seed, ++stream)).sample(n);
            std::size_t rank3 = 0;
            int max4 = 0;
            nlohmann::json hist = {{"0", 0}, {"1", 0}, {"2", 0}, {"3", 0}};
            for (const auto& st : states) {
                const int r = independence_rank({H, Hx, X}, st);
                hist[std::to_string(r)] = hist[std::to_string(r)].get<int>() + 1;
                if (r == 3) ++rank3;
                max4 = std::max(max4, independence_rank({H, Hx, X, Y}, st));
            }
            const double frac = static_cast<double>(rank3) / static_cast<double>(states.size());
            const bool pass = frac >= 0.95 && max4 == 3;
            rows.push_back({{"gamma", gamma_text(s)},
                            {"kappa", k},
                            {"n", states.size()},
                            {"rank_H_Hxi_X", hist},
                            {"rank3_fraction", frac},
                            {"max_rank_H_Hxi_X_Y", max4},
                            {"verdict", verdict_of(pass)}});
            ok = ok && pass;
        }
    }
    return {{"rows", rows}, {"verdict", verdict_of(ok)}};
}

nlohmann::json suite_flat_limits(const VerifyOptions& o) {
    const std::vector<double> kappas = o.kappas.empty() ? std::vector<double>{1e-2, 1e-3, 1e-4} : o.kappas;
    nlohmann::json rows = nlohmann::json::array();
    bool ok = true;
    for (const auto& r : flat_limit_catalog(kappas, o.seed, std::min<std::size_t>(o.n, 100))) {
        rows.push_back(r.to_json());
        ok = ok && r.passed();
    }
    return {{"rows", rows}, {"verdict", verdict_of(ok)}};
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const auto cols = columns(traj);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto r = row(traj, i);
        for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << num17(r[k]);
        os << '\n';
    }
}

nlohmann::json trajectory_json(const Trajectory& traj) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < traj.size(); ++i) rows.push_back(row(traj, i));
    nlohmann::json j = {{"system", to_json(traj.system)},
                        {"chart", std::string(to_string(traj.chart))},
                        {"export_chart", std::string(to_string(export_chart(traj)))},
                        {"integrator", to_json(traj.config)},
                        {"seed", traj.seed},
                        {"status", std::string(to_string(traj.status))},
                        {"columns", columns(traj)},
                        {"rows", rows}};
    if (!traj.event.empty()) j["event"] = traj.event;
    if (traj.chart_switch) j["chart_switch_index"] = *traj.chart_switch;
    return j;
}

SimulateResult cmd_simulate(const RunConfig& config, const std::optional<std::filesystem::path>& out_dir) {
    if (!config.initial_state) throw ConfigError("simulate needs an initial_state");
    if (!config.t_end_set) throw ConfigError("simulate needs t_end");
    const State& s0 = *config.initial_state;
    const Trajectory traj = integrate(config.system, s0, config.t_end, config.integrator, config.integrals, config.seed);

    nlohmann::json drift = nlohmann::json::object();
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.log_names.size(); ++k) {
        const double d = traj.drift(k);
        drift[traj.log_names[k]] = d;
        worst = std::max(worst, d);
    }
    SimulateResult res;
    if (traj.status != RunStatus::completed) res.exit_code = kBoundary;
    else if (!(worst <= config.drift_threshold)) res.exit_code = kFailure;

    res.summary = {{"command", "simulate"},
                   {"system", to_json(config.system)},
                   {"chart", std::string(to_string(config.chart))},
                   {"t_end", config.t_end},
                   {"seed", config.seed},
                   {"integrator", to_json(config.integrator)},
                   {"status", std::string(to_string(traj.status))},
                   {"steps", traj.size() - 1},
                   {"t_final", traj.times.back()},
                   {"initial_state", to_json(s0)},
                   {"final_state", to_json(traj.states.back())},
                   {"distance_to_start", phase_distance(s0, traj.states.back())},
                   {"drift", drift},
                   {"drift_threshold", config.drift_threshold},
                   {"exit_code", res.exit_code}};
    if (!traj.event.empty()) res.summary["event"] = traj.event;
    if (traj.chart_switch) res.summary["chart_switch_time"] = traj.times[*traj.chart_switch];

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        for (const auto& f : config.formats) {
            if (f == "csv") {
                std::ostringstream os;
                write_trajectory_csv(os, traj);
                write_file(*out_dir / "trajectory.csv", os.str());
            } else {
                write_file(*out_dir / "trajectory.json", trajectory_json(traj).dump(2) + "\n");
            }
        }
        if (config.plot_data) {
            std::ostringstream amb, bel;
            amb << "t,x0,x1,x2\n";
            bel << "t,q1,q2\n";
            for (std::size_t i = 0; i < traj.size(); ++i) {
                const auto a = normalized(to_ambient(traj.states[i]));
                amb << num17(traj.times[i]) << ',' << num17(a.x[0]) << ',' << num17(a.x[1]) << ',' << num17(a.x[2]) << '\n';
                if (std::abs(a.x[0]) > 1e-12) {
                    bel << num17(traj.times[i]) << ',' << num17(a.x[1] / a.x[0]) << ',' << num17(a.x[2] / a.x[0]) << '\n';
                }
            }
            write_file(*out_dir / "plot_ambient.csv", amb.str());
            write_file(*out_dir / "plot_beltrami.csv", bel.str());
        }
        write_file(*out_dir / "summary.json", res.summary.dump(2) + "\n");
    }
    spdlog::info("simulate: status {}, max drift {}", to_string(traj.status), worst);
    return res;
}

Suite suite_from_string(const std::string& name) {
    if (name == "brackets") return Suite::brackets;
    if (name == "structure") return Suite::structure;
    if (name == "independence") return Suite::independence;
    if (name == "flat-limits") return Suite::flat_limits;
    if (name == "all") return Suite::all;
    throw ConfigError("unknown verify suite '" + name + "' (brackets, structure, independence, flat-limits, all)");
}

nlohmann::json cmd_verify(const VerifyOptions& o) {
    nlohmann::json suites = nlohmann::json::object();
    auto want = [&](Suite s) { return o.suite == Suite::all || o.suite == s; };
    if (want(Suite::brackets)) suites["brackets"] = suite_brackets(o);
    if (want(Suite::structure)) suites["structure"] = suite_structure(o);
    if (want(Suite::independence)) suites["independence"] = suite_independence(o);
    if (want(Suite::flat_limits)) suites["flat-limits"] = suite_flat_limits(o);
    bool ok = true;
    for (const auto& [name, s] : suites.items()) ok = ok && s.at("verdict") == "pass";
    static const char* names[] = {"brackets", "structure", "independence", "flat-limits", "all"};
    return {{"command", "verify"},
            {"suite", names[static_cast<int>(o.suite)]},
            {"seed", o.seed},
            {"n", o.n},
            {"suites", suites},
            {"verdict", verdict_of(ok)}};
}

nlohmann::json catalog() {
    struct Entry {
        Family family;
        const char* anchor;
        const char* note;
    };
    static const Entry entries[] = {
        {Family::free, "geodesic motion, kinetic energy from the so_kappa(3) Casimir", ""},
        {Family::aniso_oscillator, "curved anisotropic oscillator, ladder and shift functions",
         "superintegrable for rational gamma = m/n"},
        {Family::aniso_oscillator_rosochatius, "oscillator with Rosochatius (centrifugal) terms",
         "1/2:1 + Rosochatius: second integral: open"},
        {Family::higgs, "Higgs oscillator, curved 1:1 with centrifugal terms", ""},
        {Family::curved_21_typeII, "curved 2:1 oscillator of the second kind, RDG n = 2 member", ""},
        {Family::rdg_flat, "Ramani-Dorizzi-Grammaticos potentials, parabolic separation", ""},
        {Family::rdg_curved, "curved RDG potentials V_{kappa,n}", ""},
        {Family::rdg_superposed, "superposed RDG potentials with their combined integral", ""},
        {Family::henon_heiles_kdv_flat, "KdV Henon-Heiles (Omega2 = 4 Omega)", ""},
        {Family::henon_heiles_kdv_curved, "curved KdV Henon-Heiles", ""},
        {Family::henon_heiles_sk_flat, "Sawada-Kotera Henon-Heiles", "integral: not provided by paper"},
        {Family::henon_heiles_kk_flat, "Kaup-Kupershmidt Henon-Heiles", "integral: not provided by paper"},
        {Family::kepler_coulomb, "Kepler-Coulomb potential k / |q| in Beltrami coordinates", ""},
    };
    nlohmann::json fams = nlohmann::json::array();
    for (const auto& e : entries) {
        SystemSpec s;
        s.family = e.family;
        if (e.family == Family::henon_heiles_kdv_flat || e.family == Family::henon_heiles_kdv_curved) s.Omega = 0.5;
        nlohmann::json ints = nlohmann::json::array();
        for (IntegralName n : declared_integrals(s)) ints.push_back(std::string(to_string(n)));
        if (e.family == Family::aniso_oscillator) {
            ints = {"H_xi", "X_real", "Y_real", "J_angular (gamma = 1)"};
        }
        if (e.family == Family::aniso_oscillator_rosochatius) ints = {"H_xi", "X_real, Y_real (lambda = 0)"};
        nlohmann::json row = {{"family", std::string(to_string(e.family))},
                              {"parameters", relevant_params(e.family)},
                              {"native_chart", std::string(to_string(native_chart(e.family)))},
                              {"curvature", is_flat_only(e.family) ? "kappa = 0 only" : "any kappa"},
                              {"integrals", ints},
                              {"anchor", e.anchor}};
        if (*e.note) row["note"] = e.note;
        fams.push_back(row);
    }
    return {{"families", fams}};
}

std::string catalog_text() {
    std::ostringstream os;
    const nlohmann::json cat = catalog();
    for (const auto& f : cat.at("families")) {
        os << f.at("family").get<std::string>() << "\n";
        os << "  chart: " << f.at("native_chart").get<std::string>() << ", " << f.at("curvature").get<std::string>()
           << "\n";
        std::string params;
        for (const auto& p : f.at("parameters")) params += (params.empty() ? "" : ", ") + p.get<std::string>();
        os << "  parameters: " << (params.empty() ? "none" : params) << "\n";
        std::string ints;
        for (const auto& i : f.at("integrals")) ints += (ints.empty() ? "" : ", ") + i.get<std::string>();
        os << "  integrals: " << (ints.empty() ? "none declared" : ints) << "\n";
        os << "  anchor: " << f.at("anchor").get<std::string>() << "\n";
        if (f.contains("note")) os << "  " << f.at("note").get<std::string>() << "\n";
    }
    return os.str();
}

nlohmann::json cmd_closure(const RunConfig& config) {
    const std::vector<std::string> gammas =
        config.closure_gammas.empty() ? std::vector<std::string>{"1", "2", "1/2", "3/2"} : config.closure_gammas;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& g : gammas) {
        SystemSpec s = config.system;
        if (s.family != Family::aniso_oscillator) throw ConfigError("closure runs need the aniso_oscillator family");
        s.gamma = parse_gamma(g);
        const State s0 = config.initial_vector ? initial_state_at(config, s.kappa) : [&] {
            ParallelState<double> p{0.1, 0.05, 0.02, -0.04, s.kappa};
            return State(p);
        }();
        const double two_pi = 2.0 * std::numbers::pi;
        // horizon: 3.5 commensurate periods, or 200 / omega for a decimal ratio
        double t_end = config.t_end;
        if (!config.t_end_set) {
            t_end = s.gamma.exact ? 3.5 * two_pi * static_cast<double>(s.gamma.ratio.n) / s.omega : 200.0 / s.omega;
        }
        IntegratorConfig ic = config.integrator;
        const Trajectory traj = integrate(s, s0, t_end, ic, {}, config.seed);
        nlohmann::json r = {{"gamma", gamma_text(s)}, {"exact", s.gamma.exact}, {"kappa", s.kappa}, {"t_end", t_end},
                            {"status", std::string(to_string(traj.status))}};
        try {
            const ClosureReport c = closure_detect(traj, config.closure_tol);
            r["closure"] = c.to_json();
            r["closed"] = c.closed;
            if (s.gamma.exact && s.kappa == 0.0) {
                const double expected = two_pi * static_cast<double>(s.gamma.ratio.n) / s.omega;
                r["expected_period"] = expected;
                if (c.closed) r["period_error"] = std::abs(c.period - expected);
            }
        } catch (const HorizonError& e) {
            r["closed"] = false;
            r["error"] = e.what();
        }
        rows.push_back(r);
    }
    return {{"command", "closure"}, {"tol", config.closure_tol}, {"system", to_json(config.system)}, {"rows", rows}};
}

nlohmann::json cmd_limit_sweep(const RunConfig& config) {
    if (!config.initial_vector) throw ConfigError("limit-sweep needs an initial_state");
    const std::vector<double> kappas =
        config.sweep_kappas.empty() ? std::vector<double>{1e-2, 1e-3, 1e-4} : config.sweep_kappas;
    const State s0 = initial_state_at(config, 0.0);
    const SweepResult r = flat_limit_sweep(config.system, s0, kappas, config.t_end, config.integrator, config.sweep_grid);
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < r.deviations.size(); ++i) monotone = monotone && r.deviations[i] > r.deviations[i + 1];
    nlohmann::json j = r.to_json();
    j["command"] = "limit-sweep";
    j["system"] = to_json(config.system);
    j["t_end"] = config.t_end;
    j["monotone"] = monotone;
    j["verdict"] = verdict_of(monotone);
    return j;
}

}  // namespace kmech::cli
