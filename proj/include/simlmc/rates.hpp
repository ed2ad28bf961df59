#pragma once

#include <span>
#include <string>
#include <vector>

namespace simlmc::mlmc {

/// y ~ constant * h^rate by least squares on (log h, log y).
struct PowerFit {
    double rate = 0.0;
    double constant = 0.0;
    std::size_t points = 0;
};

/// Points with non-positive or non-finite y (or h) are skipped. Throws
/// FitError when fewer than two usable points remain.
PowerFit fit_power_law(std::span<const double> h, std::span<const double> y);

// Cost complexity regimes of the MLMC theorem: decay rate above, equal to or below gamma.
enum class Regime { first, second, third };
std::string to_string(Regime r);
Regime classify(double decay_rate, double gamma, double tolerance = 1e-12);

/// Per-level screening quantities (maxima over the common nodes) used for rate fits.
struct LevelSummary {
    int level = 0;
    double h = 0.0;
    std::uint64_t n = 0;
    double mean_u = 0.0;  // max |mean(u_l)|
    double h2_u = 0.0;    // max h2(u_l)
    double mean_Y = 0.0;  // max |mean(Y_l)|
    double V = 0.0;       // max V_l
    double Z = 0.0;       // max |Z_l|
    double V2 = 0.0;      // max V_l2
    double C = 0.0;       // mean cost of one (coupled) sample
};

/// |mean_Y| ~ c8 h^alpha, V ~ c2 h^beta, C ~ c3 h^-gamma, |Z| ~ c9 h^alpha_v, V2 ~ c6 h^beta_v.
struct RatesFit {
    double alpha = 0.0, beta = 0.0, gamma = 0.0, alpha_v = 0.0, beta_v = 0.0;
    double c2 = 0.0, c3 = 0.0, c6 = 0.0, c8 = 0.0, c9 = 0.0;
    bool mean_condition = false;      // alpha >= min(beta, gamma) / 2
    bool variance_condition = false;  // alpha_v >= min(beta_v, gamma) / 2
    Regime mean_regime = Regime::first;
    Regime variance_regime = Regime::first;
};

/// Fits over levels l >= 1; level 0 has no coarser partner and is excluded.
RatesFit fit_rates(std::span<const LevelSummary> levels);

/// Level data generated exactly from given rates, e.g. to check the fit.
std::vector<LevelSummary> synthetic_levels(const RatesFit& rates, std::span<const double> h);

}  // namespace simlmc::mlmc
