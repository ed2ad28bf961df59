#include "simlmc/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "simlmc/error.hpp"
#include "simlmc/mesh_io.hpp"

namespace simlmc::config {

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"geometry", {"width", "height", "nx0", "ny0", "levels", "mesh_dir"}},
    {"load", {"resultant"}},
    {"material", {"E1", "E2", "nu21", "G12", "matrix", "delta_C", "corr_len_x", "corr_len_y", "kle_modes", "kle_cache"}},
    {"mlmc", {"targets", "n_screen", "seed", "max_iterations", "cost_model", "mode", "normalization", "threads"}},
    {"output", {"dir"}},
};

std::string trimmed(const std::string& s) { return boost::algorithm::trim_copy(s); }

double parse_double(const std::string& key, const std::string& raw) {
    const auto s = trimmed(raw);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError(key + ": '" + raw + "' is not a number");
    }
    return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& raw) {
    const auto s = trimmed(raw);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError(key + ": '" + raw + "' is not a valid integer");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, raw, boost::algorithm::is_any_of(", \t"), boost::algorithm::token_compress_on);
    std::vector<double> out;
    for (const auto& p : parts) {
        if (!trimmed(p).empty()) out.push_back(parse_double(key, p));
    }
    return out;
}

template <class Enum>
Enum parse_choice(const std::string& key, const std::string& raw, const std::map<std::string, Enum>& choices) {
    const auto s = trimmed(raw);
    const auto it = choices.find(s);
    if (it != choices.end()) return it->second;
    std::string names;
    for (const auto& [name, value] : choices) names += (names.empty() ? "" : "|") + name;
    throw ConfigError(key + ": '" + raw + "' is not one of " + names);
}

}  // namespace

material::Matrix3 ExperimentConfig::mean_matrix() const {
    return material.matrix ? *material.matrix : material::plane_stress_orthotropic(material.orthotropic);
}

field::CovarianceKernel ExperimentConfig::kernel() const {
    return {material.corr_len_x, material.corr_len_y, 1.0};
}

mlmc::ElasticityModel ExperimentConfig::model() const {
    mlmc::ElasticityModel m;
    m.mean = mean_matrix();
    m.delta_C = material.delta_C;
    m.kernel = kernel();
    m.kle_modes = material.kle_modes;
    m.load_resultant = load_resultant;
    return m;
}

std::vector<mlmc::Targets> ExperimentConfig::targets() const {
    std::vector<double> t = mlmc.targets;
    std::sort(t.begin(), t.end(), std::greater<>());
    std::vector<mlmc::Targets> out;
    for (double v : t) out.push_back({v, v});
    return out;
}

mlmc::RunOptions ExperimentConfig::run_options() const {
    mlmc::RunOptions o;
    o.mode = mlmc.mode;
    o.normalization = mlmc.normalization;
    o.max_iterations = mlmc.max_iterations;
    o.n_screen = mlmc.n_screen;
    return o;
}

mlmc::SamplerOptions ExperimentConfig::sampler_options() const {
    mlmc::SamplerOptions o;
    o.threads = mlmc.threads;
    o.cost_model = mlmc.cost_model;
    return o;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
    ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    ExperimentConfig c;
    for (const auto& [section, body] : tree) {
        const auto known = kKnownKeys.find(section);
        if (known == kKnownKeys.end()) {
            if (!body.empty() || body.data().empty()) throw ConfigError(source + ": unknown section [" + section + "]");
            throw ConfigError(source + ": key '" + section + "' outside any section");
        }
        for (const auto& [name, node] : body) {
            const std::string key = section + "." + name;
            if (!known->second.count(name)) throw ConfigError(source + ": unknown key " + key);
            // read_ini only drops whole-line comments; strip trailing ones too
            const std::string v = node.data().substr(0, node.data().find_first_of(";#"));
            if (section == "geometry") {
                if (name == "width") c.geometry.width = parse_double(key, v);
                else if (name == "height") c.geometry.height = parse_double(key, v);
                else if (name == "nx0") c.geometry.nx0 = parse_int<int>(key, v);
                else if (name == "ny0") c.geometry.ny0 = parse_int<int>(key, v);
                else if (name == "levels") c.geometry.levels = parse_int<int>(key, v);
                else if (name == "mesh_dir") c.geometry.mesh_dir = trimmed(v);
            } else if (section == "load") {
                c.load_resultant = parse_double(key, v);
            } else if (section == "material") {
                auto& m = c.material;
                if (name == "E1") m.orthotropic.E1 = parse_double(key, v);
                else if (name == "E2") m.orthotropic.E2 = parse_double(key, v);
                else if (name == "nu21") m.orthotropic.nu21 = parse_double(key, v);
                else if (name == "G12") m.orthotropic.G12 = parse_double(key, v);
                else if (name == "matrix") {
                    const auto vals = parse_list(key, v);
                    if (vals.size() != 9) throw ConfigError(key + ": expected 9 values, got " + std::to_string(vals.size()));
                    material::Matrix3 mat;
                    for (int i = 0; i < 9; ++i) mat(i / 3, i % 3) = vals[static_cast<std::size_t>(i)];
                    m.matrix = mat;
                } else if (name == "delta_C") m.delta_C = parse_double(key, v);
                else if (name == "corr_len_x") m.corr_len_x = parse_double(key, v);
                else if (name == "corr_len_y") m.corr_len_y = parse_double(key, v);
                else if (name == "kle_modes") m.kle_modes = parse_int<std::size_t>(key, v);
                else if (name == "kle_cache") m.kle_cache = trimmed(v);
            } else if (section == "mlmc") {
                auto& m = c.mlmc;
                if (name == "targets") m.targets = parse_list(key, v);
                else if (name == "n_screen") m.n_screen = parse_int<std::uint64_t>(key, v);
                else if (name == "seed") m.seed = parse_int<std::uint64_t>(key, v);
                else if (name == "max_iterations") m.max_iterations = parse_int<int>(key, v);
                else if (name == "threads") m.threads = parse_int<unsigned>(key, v);
                else if (name == "cost_model") {
                    m.cost_model = parse_choice<mlmc::CostModel>(
                        key, v, {{"wallclock", mlmc::CostModel::wallclock}, {"work", mlmc::CostModel::work}});
                } else if (name == "mode") {
                    m.mode = parse_choice<mlmc::Mode>(
                        key, v, {{"mean", mlmc::Mode::mean}, {"variance", mlmc::Mode::variance}, {"both", mlmc::Mode::both}});
                } else if (name == "normalization") {
                    m.normalization = parse_choice<mlmc::Normalization>(
                        key, v, {{"spread", mlmc::Normalization::spread}, {"magnitude", mlmc::Normalization::magnitude}});
                }
            } else if (section == "output") {
                c.output_dir = trimmed(v);
            }
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, path.string());
}

namespace {

void require_positive(const std::string& key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key + " must be positive and finite");
}

}  // namespace

void validate(const ExperimentConfig& c) {
    if (c.geometry.mesh_dir.empty()) {
        require_positive("geometry.width", c.geometry.width);
        require_positive("geometry.height", c.geometry.height);
        if (c.geometry.nx0 < 1) throw ConfigError("geometry.nx0 must be at least 1");
        if (c.geometry.ny0 < 1) throw ConfigError("geometry.ny0 must be at least 1");
        if (c.geometry.levels < 0) throw ConfigError("geometry.levels must be non-negative");
        if (c.geometry.levels > 8) throw ConfigError("geometry.levels above 8 is beyond desk scale");
    }
    require_positive("load.resultant", c.load_resultant);

    const auto& m = c.material;
    if (!(m.delta_C >= 0.0 && m.delta_C < 1.0)) {
        throw ConfigError("material.delta_C = " + std::to_string(m.delta_C) + " must lie in [0, 1)");
    }
    try {
        const auto mean = material::MeanElasticity(c.mean_matrix());
        if (m.delta_C > 0.0) material::FluctuationSampler(material::delta_T_from_delta_C(m.delta_C, mean.matrix()));
    } catch (const CalibrationError& e) {
        throw ConfigError(std::string("material.delta_C: ") + e.what());
    } catch (const ModelDomainError& e) {
        throw ConfigError(std::string("material.delta_C: ") + e.what());
    } catch (const MaterialError& e) {
        throw ConfigError(std::string(m.matrix ? "material.matrix: " : "material (E1, E2, nu21, G12): ") + e.what());
    }
    try {
        c.kernel().validate();
    } catch (const KleError& e) {
        const std::string key = !(m.corr_len_x > 0.0) || !std::isfinite(m.corr_len_x) ? "material.corr_len_x"
                                                                                        : "material.corr_len_y";
        throw ConfigError(key + ": covariance kernel invalid: " + e.what());
    }
    if (m.kle_modes < 1) throw ConfigError("material.kle_modes must be at least 1");

    const auto& r = c.mlmc;
    if (r.targets.empty()) throw ConfigError("mlmc.targets must list at least one value");
    for (double t : r.targets) require_positive("mlmc.targets", t);
    if (r.n_screen < 4) throw ConfigError("mlmc.n_screen must be at least 4");
    if (r.max_iterations < 1) throw ConfigError("mlmc.max_iterations must be at least 1");
    if (r.threads < 1) throw ConfigError("mlmc.threads must be at least 1");
    if (c.output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

fem::MeshHierarchy build_hierarchy(const ExperimentConfig& c) {
    if (!c.geometry.mesh_dir.empty()) return fem::load_mesh_hierarchy(c.geometry.mesh_dir);
    return fem::build_plate_hierarchy(c.geometry.width, c.geometry.height, c.geometry.nx0, c.geometry.ny0,
                                      c.geometry.levels);
}

}  // namespace simlmc::config
