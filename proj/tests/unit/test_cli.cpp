#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kmech/cli.hpp"

using namespace kmech;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "kmech");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kmech_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kFlat11 = R"({
  "system": {"family": "aniso_oscillator", "kappa": 0, "params": {"omega": 1.0, "gamma": "1"}},
  "chart": "parallel",
  "initial_state": {"coords": [0.3, 0.2], "momenta": [0.1, -0.25]},
  "t_end": 6.283185307179586,
  "integrator": {"rel_tol": 1e-12, "abs_tol": 1e-14},
  "integrals": ["H_xi", "X_real", "Y_real", "J_angular"],
  "outputs": {"formats": ["csv", "json"], "plot_data": true},
  "seed": 3
}
)";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("catalog listing") {
    const Result r = run_cli({"catalog"});
    CHECK(r.code == 0);
    CHECK(r.out.find("henon_heiles_kdv_curved") != std::string::npos);
    const nlohmann::json j = nlohmann::json::parse(run_cli({"catalog", "--format", "json"}).out);
    int not_provided = 0;
    bool kdv = false, open = false;
    for (const auto& f : j.at("families")) {
        const std::string name = f.at("family");
        if (name == "henon_heiles_kdv_curved") {
            kdv = std::find(f.at("integrals").begin(), f.at("integrals").end(), "I_hh_kdv") != f.at("integrals").end();
        }
        if (f.value("note", "") == "integral: not provided by paper") {
            ++not_provided;
            CHECK((name == "henon_heiles_sk_flat" || name == "henon_heiles_kk_flat"));
        }
        if (f.value("note", "").find("second integral: open") != std::string::npos) {
            open = name == "aniso_oscillator_rosochatius";
        }
        CHECK(f.contains("native_chart"));
        CHECK(f.contains("anchor"));
    }
    CHECK(kdv);
    CHECK(open);
    CHECK(not_provided == 2);
}

TEST_CASE("simulate the flat isotropic oscillator over one period") {
    const fs::path dir = scratch("sim");
    const fs::path cfg = write(dir, "flat11.json", kFlat11);
    const Result r = run_cli({"simulate", "--config", cfg.string(), "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto summary = nlohmann::json::parse(r.out);
    CHECK(summary.at("distance_to_start").get<double>() < 1e-6);
    CHECK(summary.at("status") == "completed");
    for (const char* f : {"trajectory.csv", "trajectory.json", "summary.json", "plot_ambient.csv", "plot_beltrami.csv"}) {
        CHECK(fs::exists(dir / "out" / f));
    }
    std::ifstream csv(dir / "out" / "trajectory.csv");
    std::string header, first;
    std::getline(csv, header);
    std::getline(csv, first);
    CHECK(header == "t,x,y,px,py,H,H_xi,X_real,Y_real,J_angular");
    CHECK(first.find("0.29999999999999999") != std::string::npos);
    CHECK(nlohmann::json::parse(slurp(dir / "out" / "summary.json")) == summary);

    // same config and seed: byte-identical outputs
    REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out", (dir / "again").string()}).code == 0);
    for (const char* f : {"trajectory.csv", "trajectory.json", "summary.json"}) {
        CHECK(slurp(dir / "out" / f) == slurp(dir / "again" / f));
    }
}

TEST_CASE("simulate --format selects the trajectory format") {
    const fs::path dir = scratch("fmt");
    const fs::path cfg = write(dir, "flat11.json", kFlat11);
    REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out", (dir / "o").string(), "--format", "json"}).code == 0);
    CHECK(fs::exists(dir / "o" / "trajectory.json"));
    CHECK_FALSE(fs::exists(dir / "o" / "trajectory.csv"));
    const auto j = nlohmann::json::parse(slurp(dir / "o" / "trajectory.json"));
    CHECK(j.at("columns").size() == 10);
    CHECK(j.at("rows").front().size() == 10);
}

TEST_CASE("initial state on the geodesic-parallel pole is rejected") {
    const fs::path dir = scratch("pole");
    const double y = std::numbers::pi / (2 * std::sqrt(0.5));
    std::ostringstream cfg;
    cfg.precision(17);
    cfg << "{\n  \"system\": {\"family\": \"aniso_oscillator\", \"kappa\": 0.5, \"params\": {\"gamma\": \"1\"}},\n"
        << "  \"chart\": \"parallel\",\n"
        << "  \"initial_state\": {\"coords\": [0.1, " << y << "], \"momenta\": [0, 0]},\n"
        << "  \"t_end\": 5\n}\n";
    const Result r = run_cli({"simulate", "--config", write(dir, "pole.json", cfg.str()).string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("pole.json:4") != std::string::npos);
}

TEST_CASE("unknown fields are named with their line") {
    const fs::path dir = scratch("gama");
    const fs::path cfg = write(dir, "gama.json", R"({
  "system": {
    "family": "aniso_oscillator",
    "kappa": 0.5,
    "params": {"omega": 1.0, "gama": "2"}
  },
  "t_end": 5
}
)");
    const Result r = run_cli({"simulate", "--config", cfg.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("\"gama\"") != std::string::npos);
    CHECK(r.err.find("gama.json:5:") != std::string::npos);
    CHECK(r.out.empty());
}

TEST_CASE("schema and syntax errors carry positions") {
    const fs::path dir = scratch("schema");
    struct Case {
        const char* text;
        const char* expect;
    };
    const Case cases[] = {
        {"{\n  \"system\": {\"family\": \"free\"},\n  \"t_end\": -1\n}\n", "c.json:3:"},
        {"{\n  \"system\": {\"kappa\": 1}\n}\n", "missing required field \"family\""},
        {"{\n  \"system\": {\"family\": \"free\",}\n}\n", "c.json:2:"},
        {"{\n  \"system\": {\"family\": \"poincare\"}\n}\n", "must be one of"},
        {"{\n  \"system\": {\"family\": \"free\"},\n  \"seed\": -4\n}\n", "/seed"},
        {"{\n  \"system\": {\"family\": \"free\"},\n  \"integrals\": [\"I_hh_kdv\"],\n  \"t_end\": 1\n}\n", "c.json:3"},
        {"{\n  \"system\": {\"family\": \"rdg_flat\", \"kappa\": 0.5},\n  \"t_end\": 1\n}\n", "c.json:2"},
    };
    for (const auto& c : cases) {
        const Result r = run_cli({"simulate", "--config", write(dir, "c.json", c.text).string()});
        INFO(c.text, " -> ", r.err);
        CHECK(r.code == 1);
        CHECK(r.err.find(c.expect) != std::string::npos);
    }
    CHECK(run_cli({"simulate", "--config", (dir / "missing.json").string()}).code == 1);
}

TEST_CASE("config line map") {
    const cli::ParsedConfig p = cli::parse_config_text(kFlat11, "x.json");
    CHECK(p.where("/initial_state") == "x.json:4");
    CHECK(p.where("/system/params/gamma") == "x.json:2");
    CHECK(p.where("/integrals/2") == "x.json:7");
    CHECK(p.where("/nowhere") == "x.json:1");
    const cli::RunConfig c = cli::run_config_from(p);
    CHECK(c.integrals.size() == 4);
    CHECK(c.seed == 3);
    CHECK(c.plot_data);
}

TEST_CASE("boundary abort exits 2 and drift failure exits 3") {
    const fs::path dir = scratch("codes");
    const fs::path fall = write(dir, "fall.json", R"({
  "system": {"family": "kepler_coulomb", "kappa": -1, "params": {"k_coulomb": -1}},
  "chart": "beltrami",
  "initial_state": {"coords": [0.5, 0.0], "momenta": [0.0, 0.0]},
  "t_end": 50
}
)");
    const Result b = run_cli({"simulate", "--config", fall.string()});
    CHECK(b.code == 2);
    CHECK(nlohmann::json::parse(b.out).at("status") == "boundary");

    std::string strict = kFlat11;
    strict.replace(strict.find("\"seed\""), 0, "\"drift_threshold\": 1e-18,\n  ");
    const Result d = run_cli({"simulate", "--config", write(dir, "strict.json", strict).string()});
    CHECK(d.code == 3);
}

TEST_CASE("verify suites") {
    const Result b = run_cli({"verify", "brackets", "--n", "200", "--seed", "7"});
    CHECK(b.code == 0);
    const auto jb = nlohmann::json::parse(b.out);
    CHECK(jb.at("suites").at("brackets").at("negative_controls").size() > 10);

    const Result ind = run_cli({"verify", "independence", "--gamma", "2", "--kappa", "0"});
    CHECK(ind.code == 0);
    const auto rows = nlohmann::json::parse(ind.out).at("suites").at("independence").at("rows");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].at("rank_H_Hxi_X").at("3").get<int>() == rows[0].at("n").get<int>());
    CHECK(rows[0].at("max_rank_H_Hxi_X_Y") == 3);

    const Result st = run_cli({"verify", "structure", "--kappa", "0", "--n", "50"});
    CHECK(st.code == 0);
    int zero_rows = 0;
    const auto st_json = nlohmann::json::parse(st.out);
    for (const auto& r : st_json.at("suites").at("structure").at("rows")) {
        if (r.at("relation").get<std::string>() == "{J01,J02}=0") ++zero_rows;
    }
    CHECK(zero_rows == 4);

    CHECK(run_cli({"verify", "flat-limits", "--n", "30"}).code == 0);
    CHECK(run_cli({"verify", "bogus"}).code == 1);
    CHECK(run_cli({"verify", "independence", "--gamma", "abc"}).code == 1);
}

TEST_CASE("verify all is byte-stable for a fixed seed") {
    const fs::path dir = scratch("det");
    const Result a = run_cli({"verify", "all", "--seed", "7", "--out", (dir / "a").string()});
    const Result b = run_cli({"verify", "all", "--seed", "7", "--out", (dir / "b").string()});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(slurp(dir / "a" / "verify_all.json") == slurp(dir / "b" / "verify_all.json"));
    const Result c = run_cli({"verify", "all", "--seed", "8"});
    CHECK(c.out != a.out);
}

TEST_CASE("closure tables") {
    const auto flat = nlohmann::json::parse(run_cli({"closure"}).out).at("rows");
    REQUIRE(flat.size() == 4);
    for (const auto& r : flat) {
        CHECK(r.at("closed") == true);
        CHECK(r.at("period_error").get<double>() < 1e-4);
    }
    const auto curved = nlohmann::json::parse(run_cli({"closure", "--gamma", "2", "--kappa", "0.5"}).out).at("rows");
    CHECK(curved[0].at("closed") == true);
    const auto irr = nlohmann::json::parse(run_cli({"closure", "--gamma", "1.41421356237"}).out).at("rows");
    CHECK(irr[0].at("closed") == false);
    CHECK(irr[0].at("exact") == false);
    CHECK(run_cli({"closure", "--kappa", "0.1", "--kappa", "0.2"}).code == 1);
}

TEST_CASE("limit sweep") {
    const fs::path dir = scratch("sweep");
    const fs::path cfg = write(dir, "sweep.json", R"({
  "system": {"family": "aniso_oscillator", "params": {"omega": 1.0, "gamma": "1"}},
  "chart": "parallel",
  "initial_state": {"coords": [0.4, 0.3], "momenta": [0.2, -0.3]},
  "t_end": 10,
  "integrator": {"rel_tol": 1e-12, "abs_tol": 1e-14},
  "sweep": {"kappas": [1e-2, 1e-3, 1e-4], "grid": 501}
}
)");
    const Result r = run_cli({"limit-sweep", "--config", cfg.string()});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("monotone") == true);
    for (const auto& row : j.at("rows")) {
        if (row.contains("ratio_to_next")) {
            CHECK(row.at("ratio_to_next").get<double>() > 8.0);
            CHECK(row.at("ratio_to_next").get<double>() < 12.0);
        }
    }
}

TEST_CASE("usage errors") {
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"teleport"}).code == 1);
    CHECK(run_cli({"simulate"}).code == 1);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("installed binary: exit codes and clean stdout") {
    const char* bin = std::getenv("KMECH_BIN");
    if (!bin) {
        MESSAGE("KMECH_BIN not set; skipping subprocess checks");
        return;
    }
    const fs::path dir = scratch("bin");
    const fs::path cfg = write(dir, "flat11.json", kFlat11);
    const std::string cmd = std::string("KAPPA_MECH_LOG=debug '") + bin + "' simulate --config '" + cfg.string() +
                            "' > '" + (dir / "stdout.json").string() + "' 2> '" + (dir / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(nlohmann::json::accept(slurp(dir / "stdout.json")));
    CHECK(slurp(dir / "stderr.txt").find("simulate") != std::string::npos);

    const fs::path bad = write(dir, "bad.json", "{\n  \"system\": {\"family\": \"free\", \"gama\": 1}\n}\n");
    const int s2 = std::system((std::string("'") + bin + "' simulate --config '" + bad.string() + "' 2>/dev/null").c_str());
    CHECK(WEXITSTATUS(s2) == 1);
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("shipped example configs") {
    const fs::path dir = fs::path(KMECH_SOURCE_DIR) / "docs" / "examples";
    const fs::path out = scratch("examples");
    int seen = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".json") continue;
        ++seen;
        INFO(e.path().string());
        CHECK_NOTHROW((void)cli::run_config_from(cli::load_config_file(e.path())));
        const Result r = run_cli({"simulate", "--config", e.path().string(), "--out", (out / e.path().stem()).string()});
        CHECK(r.code == (e.path().stem() == "hyperbolic_collapse" ? 2 : 0));
    }
    CHECK(seen == 5);
}

}  // TEST_SUITE
