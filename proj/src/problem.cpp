#include "simlmc/problem.hpp"

#include <string>

#include "simlmc/error.hpp"
#include "simlmc/gaussian_draw.hpp"

namespace simlmc::mlmc {

std::uint64_t sample_id(int level, std::uint32_t stream, std::uint64_t index) {
    if (level < 0 || level > 255) throw Error("level " + std::to_string(level) + " outside the sample id range");
    if (stream > 0xffffu) throw Error("stream " + std::to_string(stream) + " outside the sample id range");
    if (index > kMaxSampleIndex) throw Error("sample index exceeds 2^40 - 1");
    return (static_cast<std::uint64_t>(level) << 56) | (static_cast<std::uint64_t>(stream) << 40) | index;
}

struct ElasticityProblem::Level {
    Level(const fem::Mesh2D& mesh, const field::KleBasis& basis, double load)
        : solver(mesh), force(fem::traction_load(mesh, load)), h(fem::mesh_size(mesh)) {
        const auto pts = fem::gauss_points(mesh);
        gauss_count = pts.size();
        evaluator = std::make_unique<field::FieldEvaluator>(basis, pts);
    }

    fem::ElasticitySolver solver;
    Eigen::VectorXd force;
    double h;
    std::size_t gauss_count = 0;
    std::unique_ptr<field::FieldEvaluator> evaluator;
};

ElasticityProblem::ElasticityProblem(fem::MeshHierarchy hierarchy, const ElasticityModel& model,
                                     std::uint64_t master_seed, std::shared_ptr<const field::KleBasis> basis)
    : hierarchy_(std::move(hierarchy)),
      mean_(model.mean),
      basis_(std::move(basis)),
      load_resultant_(model.load_resultant),
      seed_(master_seed) {
    if (hierarchy_.meshes.empty()) throw Error("empty mesh hierarchy");
    if (!(model.delta_C >= 0.0)) throw CalibrationError("delta_C must be non-negative");
    if (model.delta_C > 0.0) {
        sampler_ = std::make_unique<material::FluctuationSampler>(
            material::delta_T_from_delta_C(model.delta_C, mean_.matrix()));
    }
    if (!basis_) basis_ = std::make_shared<const field::KleBasis>(field::build_kle(model.kernel, hierarchy_.finest(), model.kle_modes));
    if (basis_->node_count() != hierarchy_.finest().node_count()) {
        throw KleError("KLE basis does not belong to the finest mesh");
    }
    for (const auto& mesh : hierarchy_.meshes) levels_.push_back(std::make_unique<Level>(mesh, *basis_, load_resultant_));
}

ElasticityProblem::~ElasticityProblem() = default;

const ElasticityProblem::Level& ElasticityProblem::at(int level) const {
    if (level < 0 || level > max_level()) throw Error("level " + std::to_string(level) + " not in hierarchy");
    return *levels_[static_cast<std::size_t>(level)];
}

double ElasticityProblem::delta_T() const { return sampler_ ? sampler_->delta_T() : 0.0; }

double ElasticityProblem::mesh_size(int level) const { return at(level).h; }

double ElasticityProblem::work(int level) const { return static_cast<double>(at(level).solver.free_dof_count()); }

std::vector<material::Matrix3> ElasticityProblem::material_sample(int level, std::uint64_t id) const {
    const auto& lv = at(level);
    std::vector<material::Matrix3> c;
    if (!sampler_) {
        c.assign(lv.gauss_count, mean_.matrix());
        return c;
    }
    const auto d = field::draw(seed_, id, basis_->modes());
    material::sample_C_field(mean_, *sampler_, *lv.evaluator, d, c);
    return c;
}

fem::DisplacementField ElasticityProblem::solve(int level, std::uint64_t id) const {
    const auto c = material_sample(level, id);
    auto field = at(level).solver.solve(c, at(level).force);
    field.level = level;
    return field;
}

std::vector<double> ElasticityProblem::evaluate(int level, std::uint64_t id) const {
    try {
        return fem::extract_qoi(solve(level, id), hierarchy_);
    } catch (const Error& e) {
        throw Error("sample " + std::to_string(id & kMaxSampleIndex) + " on level " + std::to_string(level) + ": " +
                    e.what());
    }
}

std::vector<double> ScaledProblem::evaluate(int level, std::uint64_t id) const {
    auto q = inner_.evaluate(level, id);
    for (double& v : q) v *= scale_;
    return q;
}

}  // namespace simlmc::mlmc
