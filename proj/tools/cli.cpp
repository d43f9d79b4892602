#include <cstdlib>
#include <fstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "kmech/cli.hpp"

namespace kmech::cli {

namespace {

void setup_logging() {
    auto logger = std::make_shared<spdlog::logger>("kmech", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    const char* env = std::getenv("KAPPA_MECH_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug") logger->set_level(spdlog::level::debug);
    else if (level == "info") logger->set_level(spdlog::level::info);
    else logger->set_level(spdlog::level::err);
    spdlog::set_default_logger(logger);
    if (level != "error" && level != "info" && level != "debug") {
        spdlog::error("KAPPA_MECH_LOG={} not recognized; using error", level);
    }
}

void emit(std::ostream& out, const nlohmann::json& report, const std::optional<std::filesystem::path>& dir,
          const std::string& file) {
    const std::string text = report.dump(2) + "\n";
    out << text;
    if (dir) {
        std::filesystem::create_directories(*dir);
        std::ofstream f(*dir / file, std::ios::binary);
        if (!f) throw Error("cannot write " + (*dir / file).string());
        f << text;
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    setup_logging();

    CLI::App app{"Integrable Hamiltonian systems on spaces of constant curvature"};
    app.require_subcommand(1);
    std::string config_path, out_dir, format, suite = "all";
    std::uint64_t seed = 0;
    std::size_t n = 200;
    std::vector<double> kappas;
    std::vector<std::string> gammas;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--out", out_dir, "output directory");
    };
    auto* sim = app.add_subcommand("simulate", "integrate a run config");
    sim->add_option("--config", config_path, "run config (JSON)")->required();
    sim->add_option("--format", format, "trajectory format")->check(CLI::IsMember({"csv", "json"}));
    add_common(sim);

    auto* ver = app.add_subcommand("verify", "property suites over the catalog");
    ver->add_option("suite", suite, "brackets | structure | independence | flat-limits | all")
        ->check(CLI::IsMember({"brackets", "structure", "independence", "flat-limits", "all"}));
    ver->add_option("--n", n, "states per check")->check(CLI::PositiveNumber);
    ver->add_option("--kappa", kappas, "curvature (repeatable)")->allow_extra_args(false);
    ver->add_option("--gamma", gammas, "frequency ratio m/n (repeatable)")->allow_extra_args(false);
    add_common(ver);

    auto* cat = app.add_subcommand("catalog", "list the system families");
    cat->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    auto* clo = app.add_subcommand("closure", "closed-orbit table for oscillator ratios");
    clo->add_option("--config", config_path, "run config (JSON)");
    clo->add_option("--gamma", gammas, "frequency ratio (repeatable)")->allow_extra_args(false);
    clo->add_option("--kappa", kappas, "curvature")->allow_extra_args(false);
    add_common(clo);

    auto* swp = app.add_subcommand("limit-sweep", "trajectory deviation from the kappa = 0 run");
    swp->add_option("--config", config_path, "run config (JSON)")->required();
    swp->add_option("--kappa", kappas, "curvature (repeatable)")->allow_extra_args(false);
    add_common(swp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    const std::optional<std::filesystem::path> dir =
        out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir);
    auto seed_given = [&](CLI::App* sub) { return sub->count("--seed") > 0; };

    try {
        if (*sim) {
            RunConfig c = run_config_from(load_config_file(config_path));
            if (seed_given(sim)) c.seed = seed;
            if (!format.empty()) c.formats = {format};
            const SimulateResult r = cmd_simulate(c, dir);
            out << r.summary.dump(2) << "\n";
            return r.exit_code;
        }
        if (*ver) {
            VerifyOptions o;
            o.suite = suite_from_string(suite);
            o.seed = seed_given(ver) ? seed : 7;
            o.n = n;
            o.kappas = kappas;
            o.gammas = gammas;
            for (const auto& g : gammas) (void)parse_gamma(g);
            const nlohmann::json report = cmd_verify(o);
            emit(out, report, dir, "verify_" + suite + ".json");
            return report.at("verdict") == "pass" ? kOk : kFailure;
        }
        if (*cat) {
            if (format == "json") out << catalog().dump(2) << "\n";
            else out << catalog_text();
            return kOk;
        }
        if (*clo) {
            RunConfig c;
            if (!config_path.empty()) {
                c = run_config_from(load_config_file(config_path));
            } else {
                c.system.family = Family::aniso_oscillator;
                c.chart = Chart::parallel;
            }
            if (kappas.size() > 1) throw ConfigError("closure takes a single --kappa");
            if (!kappas.empty()) c.system.kappa = kappas.front();
            if (!gammas.empty()) c.closure_gammas = gammas;
            for (const auto& g : c.closure_gammas) (void)parse_gamma(g);
            if (seed_given(clo)) c.seed = seed;
            emit(out, cmd_closure(c), dir, "closure.json");
            return kOk;
        }
        if (*swp) {
            RunConfig c = run_config_from(load_config_file(config_path));
            if (!kappas.empty()) c.sweep_kappas = kappas;
            if (seed_given(swp)) c.seed = seed;
            const nlohmann::json report = cmd_limit_sweep(c);
            emit(out, report, dir, "limit_sweep.json");
            return report.at("verdict") == "pass" ? kOk : kFailure;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const SpecError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kConfigError;
}

}  // namespace kmech::cli
