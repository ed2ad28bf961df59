#include "simlmc/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "simlmc/error.hpp"

namespace simlmc::mlmc {

PowerFit fit_power_law(std::span<const double> h, std::span<const double> y) {
    if (h.size() != y.size()) throw FitError("fit inputs differ in length");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] > 0.0 && y[i] > 0.0 && std::isfinite(h[i]) && std::isfinite(y[i])) {
            lx.push_back(std::log(h[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < 2) throw FitError("power-law fit needs two positive points, got " + std::to_string(lx.size()));
    const auto m = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("power-law fit needs two distinct mesh sizes");
    const double slope = sxy / sxx;
    return {slope, std::exp(my - slope * mx), lx.size()};
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::first: return "first";
        case Regime::second: return "second";
        case Regime::third: return "third";
    }
    return "unknown";
}

Regime classify(double decay_rate, double gamma, double tolerance) {
    if (std::abs(decay_rate - gamma) <= tolerance * std::max(std::abs(decay_rate), std::abs(gamma))) {
        return Regime::second;
    }
    return decay_rate > gamma ? Regime::first : Regime::third;
}

RatesFit fit_rates(std::span<const LevelSummary> levels) {
    std::vector<double> h, mean_Y, V, C, Z, V2;
    for (const auto& s : levels) {
        if (s.level < 1) continue;
        h.push_back(s.h);
        mean_Y.push_back(std::abs(s.mean_Y));
        V.push_back(s.V);
        C.push_back(s.C);
        Z.push_back(std::abs(s.Z));
        V2.push_back(s.V2);
    }
    if (h.size() < 2) throw FitError("rate fits need at least two levels l >= 1");
    RatesFit r;
    const auto m = fit_power_law(h, mean_Y);
    const auto v = fit_power_law(h, V);
    const auto c = fit_power_law(h, C);
    const auto z = fit_power_law(h, Z);
    const auto v2 = fit_power_law(h, V2);
    r.alpha = m.rate;
    r.c8 = m.constant;
    r.beta = v.rate;
    r.c2 = v.constant;
    r.gamma = -c.rate;
    r.c3 = c.constant;
    r.alpha_v = z.rate;
    r.c9 = z.constant;
    r.beta_v = v2.rate;
    r.c6 = v2.constant;
    r.mean_condition = r.alpha >= 0.5 * std::min(r.beta, r.gamma);
    r.variance_condition = r.alpha_v >= 0.5 * std::min(r.beta_v, r.gamma);
    r.mean_regime = classify(r.beta, r.gamma);
    r.variance_regime = classify(r.beta_v, r.gamma);
    return r;
}

std::vector<LevelSummary> synthetic_levels(const RatesFit& rates, std::span<const double> h) {
    std::vector<LevelSummary> out;
    for (std::size_t l = 0; l < h.size(); ++l) {
        LevelSummary s;
        s.level = static_cast<int>(l);
        s.h = h[l];
        s.mean_Y = rates.c8 * std::pow(h[l], rates.alpha);
        s.V = rates.c2 * std::pow(h[l], rates.beta);
        s.C = rates.c3 * std::pow(h[l], -rates.gamma);
        s.Z = rates.c9 * std::pow(h[l], rates.alpha_v);
        s.V2 = rates.c6 * std::pow(h[l], rates.beta_v);
        out.push_back(s);
    }
    return out;
}

}  // namespace simlmc::mlmc
