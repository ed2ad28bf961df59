#include "simlmc/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <ostream>

#include "simlmc/csv.hpp"
#include "simlmc/error.hpp"
#include "simlmc/estimator.hpp"
#include "simlmc/hstats.hpp"
#include "simlmc/kle.hpp"
#include "simlmc/problem.hpp"
#include "simlmc/rates.hpp"
#include "simlmc/validation.hpp"

namespace simlmc::commands {

namespace fs = std::filesystem;
using io::CsvWriter;

config::ExperimentConfig resolve_config(const CommandOptions& options) {
    auto c = options.config_path.empty() ? config::ExperimentConfig{} : config::load_config(options.config_path);
    if (options.seed) c.mlmc.seed = *options.seed;
    if (options.out) c.output_dir = *options.out;
    if (options.threads) c.mlmc.threads = *options.threads;
    config::validate(c);
    return c;
}

namespace {

fs::path output_dir(const config::ExperimentConfig& c) {
    fs::path dir(c.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::unique_ptr<mlmc::ElasticityProblem> make_problem(const config::ExperimentConfig& c, std::ostream& log) {
    auto hierarchy = config::build_hierarchy(c);
    std::shared_ptr<const field::KleBasis> basis;
    const auto& cache = c.material.kle_cache;
    if (!cache.empty() && fs::exists(cache)) {
        auto loaded = field::load_kle_cache(cache, hierarchy.finest());
        if (loaded.modes() != c.material.kle_modes) {
            throw ConfigError("material.kle_cache: " + cache + " holds " + std::to_string(loaded.modes()) +
                              " modes, config asks for " + std::to_string(c.material.kle_modes));
        }
        basis = std::make_shared<const field::KleBasis>(std::move(loaded));
    } else {
        basis = std::make_shared<const field::KleBasis>(
            field::build_kle(c.kernel(), hierarchy.finest(), c.material.kle_modes));
        if (!cache.empty()) field::save_kle_cache(cache, *basis);
    }
    log << "KLE: " << basis->modes() << " modes on " << basis->node_count() << " nodes, captured fraction "
        << basis->captured_fraction() << '\n';
    return std::make_unique<mlmc::ElasticityProblem>(std::move(hierarchy), c.model(), c.mlmc.seed, basis);
}

void write_screening(const fs::path& path, const std::vector<mlmc::LevelSummary>& levels) {
    CsvWriter w(path, {"level", "h_l", "mean_Y", "V_l", "Z_l", "V_l2", "C_l", "n", "mean_u", "h2_u"});
    for (const auto& s : levels) {
        w.row({std::int64_t{s.level}, s.h, s.mean_Y, s.V, s.Z, s.V2, s.C, s.n, s.mean_u, s.h2_u});
    }
}

void write_rates(const fs::path& path, const mlmc::RatesFit& r) {
    CsvWriter w(path, {"alpha", "beta", "gamma", "alpha_v", "beta_v", "c2", "c3", "c6", "c8", "c9", "mean_condition",
                       "variance_condition", "mean_regime", "variance_regime"});
    w.row({r.alpha, r.beta, r.gamma, r.alpha_v, r.beta_v, r.c2, r.c3, r.c6, r.c8, r.c9, r.mean_condition,
           r.variance_condition, mlmc::to_string(r.mean_regime), mlmc::to_string(r.variance_regime)});
}

void write_estimates(const fs::path& path, const fem::Mesh2D& coarse, const mlmc::Estimates& e) {
    CsvWriter w(path, {"node", "x", "y", "mean", "variance"});
    for (std::size_t i = 0; i < e.mean.size(); ++i) {
        w.row({std::uint64_t{i}, coarse.nodes[i].x, coarse.nodes[i].y, e.mean[i], e.variance[i]});
    }
}

void write_errors(const fs::path& path, const mlmc::RunReport& report) {
    CsvWriter w(path, {"target", "estimand", "specified", "achieved_normalized", "achieved_absolute"});
    for (const auto& r : report.results) {
        w.row({r.target.mean, std::string("mean"), r.target.mean, r.e_s, r.abs_mean});
        w.row({r.target.variance, std::string("variance"), r.target.variance, r.e_vs, r.abs_variance});
    }
}

void write_allocation(const fs::path& path, const mlmc::RunReport& report, int first_level) {
    CsvWriter w(path, {"target", "level", "N_l", "N_mean", "N_variance"});
    for (const auto& r : report.results) {
        for (std::size_t l = 0; l < r.N.size(); ++l) {
            w.row({r.target.mean, std::int64_t{first_level + static_cast<int>(l)}, r.N[l], r.N_mean[l],
                   r.N_variance[l]});
        }
    }
}

void add_cost_rows(CsvWriter& w, const std::string& method, const mlmc::RunReport& report) {
    for (const auto& r : report.results) {
        w.row({method, std::string("mean"), r.target.mean, r.plan_cost_mean});
        w.row({method, std::string("variance"), r.target.variance, r.plan_cost_variance});
        w.row({method, std::string("both"), r.target.mean, r.cost_total});
    }
}

void write_diagnostics(const fs::path& path, const std::string& method, const mlmc::RunReport& report) {
    std::ofstream out(path, std::ios::app);
    out << method << ": " << report.diagnostics;
    for (const auto& h : report.history) {
        out << "  target " << h.target_index << " iteration " << h.iteration << " kappa " << h.kappa << " kappa_v "
            << h.kappa_v << " e_s " << h.e_s << " e_vs " << h.e_vs << " N";
        for (auto n : h.N) out << ' ' << n;
        out << '\n';
    }
}

void print_summary(std::ostream& log, const std::string& method, const mlmc::RunReport& report) {
    for (const auto& r : report.results) {
        log << method << " target " << r.target.mean << ": e_s " << r.e_s << ", e_vs " << r.e_vs << ", N =";
        for (auto n : r.N) log << ' ' << n;
        log << ", cost " << r.cost_total << (r.converged ? "" : " (not converged)") << '\n';
    }
}

int guarded(std::ostream& log, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return exit_code::input;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return exit_code::input;
    } catch (const nlohmann::json::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_code::input;
    }
}

mlmc::RatesFit read_synthetic_rates(const std::string& path, std::vector<double>& h) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synthetic rates file " + path);
    const auto j = nlohmann::json::parse(in);
    mlmc::RatesFit r;
    r.alpha = j.at("alpha").get<double>();
    r.beta = j.at("beta").get<double>();
    r.gamma = j.at("gamma").get<double>();
    r.alpha_v = j.at("alpha_v").get<double>();
    r.beta_v = j.at("beta_v").get<double>();
    r.c2 = j.at("c2").get<double>();
    r.c3 = j.at("c3").get<double>();
    r.c6 = j.at("c6").get<double>();
    r.c8 = j.at("c8").get<double>();
    r.c9 = j.at("c9").get<double>();
    if (j.contains("h")) h = j.at("h").get<std::vector<double>>();
    return r;
}

}  // namespace

int cmd_screen(const CommandOptions& options, std::ostream& log) {
    return guarded(log, [&] {
        const auto c = resolve_config(options);
        const auto dir = output_dir(c);
        std::vector<mlmc::LevelSummary> levels;
        if (!options.synthetic.empty()) {
            std::vector<double> h;
            const auto injected = read_synthetic_rates(options.synthetic, h);
            if (h.empty()) {
                const auto hierarchy = config::build_hierarchy(c);
                for (const auto& m : hierarchy.meshes) h.push_back(fem::mesh_size(m));
            }
            levels = mlmc::synthetic_levels(injected, h);
            log << "synthetic screening data on " << h.size() << " levels\n";
        } else {
            const auto problem = make_problem(c, log);
            mlmc::MultilevelSampler sampler(*problem, c.sampler_options());
            levels = mlmc::screening(sampler, c.mlmc.n_screen);
            log << "screening: " << sampler.evaluations() << " solves\n";
        }
        write_screening(dir / "screening.csv", levels);
        try {
            const auto rates = mlmc::fit_rates(levels);
            write_rates(dir / "rates.csv", rates);
            log << "alpha " << rates.alpha << ", beta " << rates.beta << ", gamma " << rates.gamma << ", alpha_v "
                << rates.alpha_v << ", beta_v " << rates.beta_v << "; mean regime " << to_string(rates.mean_regime)
                << ", variance regime " << to_string(rates.variance_regime) << '\n';
        } catch (const FitError& e) {
            log << "warning: rates not fitted: " << e.what() << '\n';
        }
        return exit_code::ok;
    });
}

int cmd_run(const CommandOptions& options, std::ostream& log) {
    return guarded(log, [&] {
        const auto c = resolve_config(options);
        const auto dir = output_dir(c);
        const auto problem = make_problem(c, log);
        const auto targets = c.targets();
        const auto ml = mlmc::run_mlmc(*problem, targets, c.run_options(), c.sampler_options());
        print_summary(log, "MLMC", ml);
        const auto mc = mlmc::run_mc(*problem, targets, c.run_options(), c.sampler_options());
        print_summary(log, "MC", mc);

        write_screening(dir / "screening.csv", ml.screening);
        try {
            write_rates(dir / "rates.csv", mlmc::fit_rates(ml.screening));
        } catch (const FitError& e) {
            log << "warning: rates not fitted: " << e.what() << '\n';
        }
        write_allocation(dir / "allocation.csv", ml, 0);
        write_errors(dir / "errors.csv", ml);
        {
            CsvWriter w(dir / "cost.csv", {"method", "estimand", "target", "cost_seconds"});
            add_cost_rows(w, "MC", mc);
            add_cost_rows(w, "MLMC", ml);
        }
        const auto& coarse = problem->hierarchy().coarsest();
        if (!ml.results.empty()) write_estimates(dir / "estimates.csv", coarse, ml.results.back().estimates);
        if (!mc.results.empty()) write_estimates(dir / "estimates_mc.csv", coarse, mc.results.back().estimates);

        const auto diag = dir / "diagnostics.txt";
        std::error_code ec;
        fs::remove(diag, ec);
        if (!ml.converged || !mc.converged) {
            if (!ml.converged) write_diagnostics(diag, "MLMC", ml);
            if (!mc.converged) write_diagnostics(diag, "MC", mc);
            log << "error: no convergence, see " << diag.string() << '\n';
            return exit_code::no_convergence;
        }
        return exit_code::ok;
    });
}

int cmd_mc(const CommandOptions& options, std::ostream& log) {
    return guarded(log, [&] {
        const auto c = resolve_config(options);
        const auto dir = output_dir(c);
        const auto problem = make_problem(c, log);
        const auto mc = mlmc::run_mc(*problem, c.targets(), c.run_options(), c.sampler_options());
        print_summary(log, "MC", mc);
        write_allocation(dir / "allocation.csv", mc, problem->max_level());
        write_errors(dir / "errors.csv", mc);
        {
            CsvWriter w(dir / "cost.csv", {"method", "estimand", "target", "cost_seconds"});
            add_cost_rows(w, "MC", mc);
        }
        if (!mc.results.empty()) {
            write_estimates(dir / "estimates.csv", problem->hierarchy().coarsest(), mc.results.back().estimates);
        }
        const auto diag = dir / "diagnostics.txt";
        std::error_code ec;
        fs::remove(diag, ec);
        if (!mc.converged) {
            write_diagnostics(diag, "MC", mc);
            log << "error: no convergence, see " << diag.string() << '\n';
            return exit_code::no_convergence;
        }
        return exit_code::ok;
    });
}

int cmd_validate(const CommandOptions& options, std::ostream& log) {
    config::ExperimentConfig c;
    try {
        c = resolve_config(options);
    } catch (const Error& e) {
        log << "FAIL config: " << e.what() << '\n';
        return exit_code::input;
    }
    bool all = true;
    for (const auto& r : validation::run_checks(c)) {
        log << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        all = all && r.passed;
    }
    return all ? exit_code::ok : exit_code::check_failed;
}

}  // namespace simlmc::commands
