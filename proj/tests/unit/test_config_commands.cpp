#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "simlmc/commands.hpp"
#include "simlmc/config.hpp"
#include "simlmc/error.hpp"
#include "simlmc/validation.hpp"

using namespace simlmc;
using namespace simlmc::config;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("simlmc_cmd_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Small, fast experiment with deterministic work-based costs.
fs::path write_small_config(const fs::path& dir, const std::string& extra = "") {
    const auto path = dir / "small.ini";
    std::ofstream out(path);
    out << "[geometry]\nlevels = 2\n"
        << "[material]\nkle_modes = 10\n"
        << "[mlmc]\ntargets = 0.05, 0.02\nn_screen = 8\nseed = 3\ncost_model = work\n"
        << extra;
    return path;
}

std::map<std::string, double> read_rates(const fs::path& p) {
    std::ifstream in(p);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    std::istringstream hs(header), rs(row);
    std::map<std::string, double> out;
    std::string k, v;
    while (std::getline(hs, k, ',') && std::getline(rs, v, ',')) {
        try {
            out[k] = std::stod(v);
        } catch (const std::exception&) {
        }
    }
    return out;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
    std::istringstream empty("");
    const auto d = parse_config(empty);
    CHECK(d.geometry.levels == 3);
    CHECK(d.material.delta_C == 0.1);
    CHECK(d.mlmc.targets.size() == 3);
    CHECK_NOTHROW(validate(d));

    std::istringstream in(
        "# comment\n[geometry]\nwidth = 5 ; cm\nlevels = 2  # finest\n[material]\ndelta_C = 0.05\n"
        "matrix = 2 0 0, 0 2 0, 0 0 1\n[mlmc]\ntargets = 1e-3, 5e-3\nmode = mean\nnormalization = magnitude\n"
        "cost_model = work\n[output]\ndir = res\n");
    const auto c = parse_config(in);
    CHECK(c.geometry.width == 5.0);
    CHECK(c.geometry.levels == 2);
    REQUIRE(c.material.matrix);
    CHECK((*c.material.matrix)(2, 2) == 1.0);
    CHECK(c.mlmc.mode == mlmc::Mode::mean);
    CHECK(c.mlmc.normalization == mlmc::Normalization::magnitude);
    CHECK(c.output_dir == "res");
    const auto t = c.targets();
    REQUIRE(t.size() == 2);
    CHECK(t[0].mean == 5e-3);
    CHECK(t[1].mean == 1e-3);
}

TEST_CASE("config errors name the key") {
    auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            validate(parse_config(in));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[material]\ndelta_C = 1.5\n").find("material.delta_C") != std::string::npos);
    CHECK(message("[material]\ncorr_len_x = 0\n").find("material.corr_len_x") != std::string::npos);
    CHECK(message("[material]\nfoo = 1\n").find("foo") != std::string::npos);
    CHECK(message("[bogus]\na = 1\n").find("bogus") != std::string::npos);
    CHECK(message("[mlmc]\nn_screen = two\n").find("n_screen") != std::string::npos);
    CHECK(message("[mlmc]\nmode = median\n").find("mode") != std::string::npos);
    CHECK(message("[material]\nmatrix = 1 2 3\n").find("matrix") != std::string::npos);
    CHECK(message("[material]\nmatrix = 1 0 0 0 -1 0 0 0 1\n").find("material.matrix") != std::string::npos);
    CHECK(message("[mlmc]\nn_screen = 2\n").find("n_screen") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/simlmc.ini"), ConfigError);
}

TEST_CASE("validate command passes on the defaults") {
    const auto dir = scratch("validate");
    commands::CommandOptions o;
    o.config_path = write_small_config(dir).string();
    std::ostringstream log;
    CHECK(commands::cmd_validate(o, log) == commands::exit_code::ok);
    CHECK(log.str().find("FAIL") == std::string::npos);
    for (const auto& r : validation::run_checks(resolve_config(o))) CHECK_MESSAGE(r.passed, r.name << ": " << r.detail);
    fs::remove_all(dir);
}

TEST_CASE("synthetic screening recovers the injected rates") {
    const auto dir = scratch("synthetic");
    {
        std::ofstream j(dir / "rates.json");
        j << R"({"alpha": 2.0594, "beta": 1.4238, "gamma": 1.5989, "alpha_v": 1.6911, "beta_v": 1.4741,
                 "c2": 2e-7, "c3": 0.4, "c6": 1.1374e-11, "c8": 0.0058, "c9": 3e-9})";
    }
    commands::CommandOptions o;
    o.out = (dir / "out").string();
    o.synthetic = (dir / "rates.json").string();
    std::ostringstream log;
    REQUIRE(commands::cmd_screen(o, log) == commands::exit_code::ok);
    const auto r = read_rates(dir / "out" / "rates.csv");
    CHECK(std::abs(r.at("alpha") - 2.0594) <= 1e-10);
    CHECK(std::abs(r.at("beta") - 1.4238) <= 1e-10);
    CHECK(std::abs(r.at("gamma") - 1.5989) <= 1e-10);
    CHECK(std::abs(r.at("alpha_v") - 1.6911) <= 1e-10);
    CHECK(std::abs(r.at("beta_v") - 1.4741) <= 1e-10);
    CHECK(slurp(dir / "out" / "rates.csv").find("third,third") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("runs with work costs write byte-identical files") {
    const auto dir = scratch("repro");
    commands::CommandOptions o;
    o.config_path = write_small_config(dir).string();
    std::ostringstream log;
    o.out = (dir / "a").string();
    REQUIRE(commands::cmd_run(o, log) == commands::exit_code::ok);
    o.out = (dir / "b").string();
    o.threads = 2;
    REQUIRE(commands::cmd_run(o, log) == commands::exit_code::ok);
    for (const char* f : {"screening.csv", "rates.csv", "allocation.csv", "errors.csv", "cost.csv", "estimates.csv",
                          "estimates_mc.csv"}) {
        REQUIRE(fs::exists(dir / "a" / f));
        CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
    }
    CHECK(slurp(dir / "a" / "errors.csv").rfind("target,estimand,specified,achieved_normalized,achieved_absolute", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("command failures map to exit codes") {
    const auto dir = scratch("fail");
    commands::CommandOptions o;
    std::ostringstream log;
    o.config_path = write_small_config(dir, "[geometry]\n").string();
    {
        std::ofstream out(o.config_path);
        out << "[geometry]\nmesh_dir = " << (dir / "nomesh").string() << "\n";
    }
    o.out = (dir / "out").string();
    CHECK(commands::cmd_run(o, log) == commands::exit_code::input);
    CHECK(log.str().find("mesh_l0.txt") != std::string::npos);

    o.config_path = (dir / "missing.ini").string();
    CHECK(commands::cmd_screen(o, log) == commands::exit_code::input);

    o.config_path = write_small_config(dir, "max_iterations = 1\n").string();
    {
        std::ofstream out(o.config_path);
        out << "[geometry]\nlevels = 1\n[material]\nkle_modes = 10\n"
            << "[mlmc]\ntargets = 1e-6\nn_screen = 4\nmax_iterations = 1\ncost_model = work\n";
    }
    CHECK(commands::cmd_run(o, log) == commands::exit_code::no_convergence);
    CHECK(fs::exists(dir / "out" / "diagnostics.txt"));
    fs::remove_all(dir);
}
