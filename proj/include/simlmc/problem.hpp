#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "simlmc/elasticity.hpp"
#include "simlmc/kle.hpp"
#include "simlmc/material.hpp"
#include "simlmc/mesh.hpp"

namespace simlmc::mlmc {

/// A hierarchy of discretizations of one random QoI. evaluate() must be a pure
/// function of (level, sample_id) and safe to call concurrently; a coupled
/// sample on level l evaluates levels l and l - 1 with the same sample_id.
class SamplingProblem {
public:
    virtual ~SamplingProblem() = default;

    virtual int max_level() const = 0;
    virtual std::size_t qoi_size() const = 0;
    virtual std::vector<double> evaluate(int level, std::uint64_t sample_id) const = 0;
    // Mesh parameter h_l.
    virtual double mesh_size(int level) const = 0;
    // Deterministic cost proxy of one evaluation on `level`.
    virtual double work(int level) const = 0;
};

// Sample ids: level in bits 56..63, stream in bits 40..55, index in bits 0..39.
inline constexpr std::uint64_t kMaxSampleIndex = (std::uint64_t{1} << 40) - 1;
std::uint64_t sample_id(int level, std::uint32_t stream, std::uint64_t index);

inline constexpr std::uint32_t kStreamMlmc = 0;
inline constexpr std::uint32_t kStreamMc = 1;

/// Random material description. delta_C = 0 gives the deterministic mean material.
struct ElasticityModel {
    material::Matrix3 mean = material::plane_stress_orthotropic({});
    double delta_C = 0.1;
    field::CovarianceKernel kernel{};
    std::size_t kle_modes = 100;
    double load_resultant = 1500.0;  // N
};

/// Plane-stress elasticity with a random SPD material field. The KLE basis
/// lives on the finest mesh and every level evaluates it at its own Gauss
/// points, so one draw gives the same material realization on all levels.
/// QoI: total displacement at the level-0 common nodes.
class ElasticityProblem : public SamplingProblem {
public:
    ElasticityProblem(fem::MeshHierarchy hierarchy, const ElasticityModel& model, std::uint64_t master_seed,
                      std::shared_ptr<const field::KleBasis> basis = nullptr);
    ~ElasticityProblem() override;

    int max_level() const override { return static_cast<int>(hierarchy_.max_level()); }
    std::size_t qoi_size() const override { return hierarchy_.coarsest().node_count(); }
    std::vector<double> evaluate(int level, std::uint64_t sample_id) const override;
    double mesh_size(int level) const override;
    double work(int level) const override;

    // Material at the Gauss points of `level` for one sample.
    std::vector<material::Matrix3> material_sample(int level, std::uint64_t sample_id) const;
    fem::DisplacementField solve(int level, std::uint64_t sample_id) const;

    const fem::MeshHierarchy& hierarchy() const noexcept { return hierarchy_; }
    const field::KleBasis& basis() const noexcept { return *basis_; }
    std::shared_ptr<const field::KleBasis> shared_basis() const noexcept { return basis_; }
    bool deterministic() const noexcept { return !sampler_; }
    double delta_T() const;
    std::uint64_t master_seed() const noexcept { return seed_; }

private:
    struct Level;
    const Level& at(int level) const;

    fem::MeshHierarchy hierarchy_;
    material::MeanElasticity mean_;
    std::unique_ptr<material::FluctuationSampler> sampler_;
    std::shared_ptr<const field::KleBasis> basis_;
    double load_resultant_;
    std::uint64_t seed_;
    std::vector<std::unique_ptr<Level>> levels_;
};

/// Multiplies every QoI sample of another problem by a constant.
class ScaledProblem : public SamplingProblem {
public:
    ScaledProblem(const SamplingProblem& inner, double scale) : inner_(inner), scale_(scale) {}

    int max_level() const override { return inner_.max_level(); }
    std::size_t qoi_size() const override { return inner_.qoi_size(); }
    std::vector<double> evaluate(int level, std::uint64_t sample_id) const override;
    double mesh_size(int level) const override { return inner_.mesh_size(level); }
    double work(int level) const override { return inner_.work(level); }

private:
    const SamplingProblem& inner_;
    double scale_;
};

}  // namespace simlmc::mlmc
