#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "simlmc/estimator.hpp"
#include "simlmc/material.hpp"
#include "simlmc/mesh.hpp"
#include "simlmc/problem.hpp"

namespace simlmc::config {

struct GeometryConfig {
    double width = 7.0;    // cm
    double height = 21.7;  // cm
    int nx0 = 2;
    int ny0 = 6;
    int levels = 3;          // finest level L
    std::string mesh_dir;    // when set, meshes are read from mesh_l{l}.txt instead
};

struct MaterialConfig {
    material::OrthotropicParams orthotropic{};
    std::optional<material::Matrix3> matrix;  // overrides the orthotropic constants
    double delta_C = 0.1;
    double corr_len_x = 3.5;  // cm
    double corr_len_y = 3.5;  // cm
    std::size_t kle_modes = 100;
    std::string kle_cache;    // optional basis cache file, created when missing
};

struct MlmcConfig {
    std::vector<double> targets{0.6e-3, 0.4e-3, 0.2e-3};
    std::uint64_t n_screen = 50;
    std::uint64_t seed = 20240607;
    int max_iterations = 20;
    mlmc::CostModel cost_model = mlmc::CostModel::wallclock;
    mlmc::Mode mode = mlmc::Mode::both;
    mlmc::Normalization normalization = mlmc::Normalization::spread;
    unsigned threads = 1;
};

/// Experiment description read from an INI-style file:
///
///   [geometry] width height nx0 ny0 levels mesh_dir
///   [load]     resultant
///   [material] E1 E2 nu21 G12 | matrix (9 values, row-major); delta_C
///              corr_len_x corr_len_y kle_modes kle_cache
///   [mlmc]     targets (comma separated) n_screen seed max_iterations
///              cost_model (wallclock|work) mode (mean|variance|both)
///              normalization (spread|magnitude) threads
///   [output]   dir
///
/// Every key is optional; unknown sections and keys are rejected.
struct ExperimentConfig {
    GeometryConfig geometry;
    double load_resultant = 1500.0;  // N
    MaterialConfig material;
    MlmcConfig mlmc;
    std::string output_dir = "out";

    material::Matrix3 mean_matrix() const;
    field::CovarianceKernel kernel() const;
    mlmc::ElasticityModel model() const;
    std::vector<mlmc::Targets> targets() const;  // loosest first
    mlmc::RunOptions run_options() const;
    mlmc::SamplerOptions sampler_options() const;
};

// Both throw ConfigError naming the offending key.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError naming the first invalid key.
void validate(const ExperimentConfig& config);

// Mesh hierarchy described by the geometry block (generated plate or mesh files).
fem::MeshHierarchy build_hierarchy(const ExperimentConfig& config);

}  // namespace simlmc::config
