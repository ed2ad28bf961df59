#include "simlmc/accumulator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "simlmc/error.hpp"

namespace simlmc::stats {

LevelAccumulator::LevelAccumulator(int level, bool coupled, std::vector<double> shift)
    : level_(level), coupled_(coupled), shift_(std::move(shift)) {
    if (level < 0) throw Error("accumulator level must be non-negative");
    sums_.resize(shift_.size() * sums_per_node());
}

void LevelAccumulator::accumulate(std::span<const double> fine, std::span<const double> coarse, double cost) {
    if (fine.size() != shift_.size()) {
        throw Error("level " + std::to_string(level_) + ": QoI has " + std::to_string(fine.size()) +
                    " entries, expected " + std::to_string(shift_.size()));
    }
    if (coupled_ && coarse.size() != fine.size()) {
        throw Error("level " + std::to_string(level_) + ": coarse QoI length " + std::to_string(coarse.size()) +
                    " does not match fine length " + std::to_string(fine.size()));
    }
    if (!coupled_ && !coarse.empty()) throw Error("uncoupled accumulator given a coarse sample");

    const std::size_t k = sums_per_node();
    for (std::size_t i = 0; i < shift_.size(); ++i) {
        ExactSum* s = sums_.data() + i * k;
        if (!coupled_) {
            const double x = fine[i] - shift_[i];
            const double x2 = x * x;
            s[0].add(x);
            s[1].add(x2);
            s[2].add(x2 * x);
            s[3].add(x2 * x2);
            continue;
        }
        const double d = fine[i] - coarse[i];
        const double t = (fine[i] - shift_[i]) + (coarse[i] - shift_[i]);
        const double d2 = d * d, t2 = t * t;
        s[0].add(d);
        s[1].add(d2);
        s[2].add(d2 * d);
        s[3].add(d2 * d2);
        s[4].add(t);
        s[5].add(t2);
        s[6].add(t2 * t);
        s[7].add(t2 * t2);
        s[8].add(d * t);
        s[9].add(d2 * t);
        s[10].add(d * t2);
        s[11].add(d2 * t2);
    }
    cost_.add(cost);
    ++n_;
}

void LevelAccumulator::merge(const LevelAccumulator& other) {
    if (other.level_ != level_ || other.coupled_ != coupled_) throw Error("cannot merge accumulators of different levels");
    if (other.shift_ != shift_) throw Error("cannot merge accumulators with different shifts");
    for (std::size_t j = 0; j < sums_.size(); ++j) sums_[j] += other.sums_[j];
    cost_ += other.cost_;
    n_ += other.n_;
}

double LevelAccumulator::mean_cost() const {
    if (n_ == 0) throw InsufficientSamplesError("no samples on level " + std::to_string(level_));
    return cost_.value() / static_cast<double>(n_);
}

UnivariateSums LevelAccumulator::fine_sums(std::size_t node) const {
    const std::size_t k = sums_per_node();
    const ExactSum* s = sums_.data() + node * k;
    if (!coupled_) return {n_, s[0].value(), s[1].value(), s[2].value(), s[3].value()};
    // u - shift = (S + D) / 2; only the first two sums are needed by callers.
    UnivariateSums u;
    u.n = n_;
    ExactSum a = s[4];
    a += s[0];
    u.s1 = 0.5 * a.value();
    ExactSum b = s[5];
    b += s[1];
    b += s[8];
    b += s[8];
    u.s2 = 0.25 * b.value();
    u.s3 = u.s4 = std::numeric_limits<double>::quiet_NaN();
    return u;
}

BivariateSums LevelAccumulator::difference_sums(std::size_t node) const {
    if (!coupled_) throw Error("level " + std::to_string(level_) + " accumulator is not coupled");
    const ExactSum* s = sums_.data() + node * kSums;
    BivariateSums b;
    b.n = n_;
    double* fields[] = {&b.x1, &b.x2, &b.x3, &b.x4, &b.y1, &b.y2, &b.y3, &b.y4, &b.xy, &b.x2y, &b.xy2, &b.x2y2};
    for (std::size_t j = 0; j < kSums; ++j) *fields[j] = s[j].value();
    return b;
}

NodeStats LevelAccumulator::node_stats(std::size_t node) const {
    if (node >= shift_.size()) throw Error("node index out of range");
    if (n_ < 2) {
        throw InsufficientSamplesError("level " + std::to_string(level_) + " has " + std::to_string(n_) +
                                       " samples, at least 2 are needed");
    }
    const double nd = static_cast<double>(n_);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    NodeStats st;
    if (!coupled_) {
        const auto u = fine_sums(node);
        st.mean_fine = u.s1 / nd + shift_[node];
        st.mean_Y = st.mean_fine;
        st.V = std::max(h2(u), 0.0);
        st.Z = st.V;
        st.h2_fine = st.V;
        st.V2 = n_ >= 4 ? nd * var_of_h2(u) : nan;
        return st;
    }
    const auto b = difference_sums(node);
    const auto u = fine_sums(node);
    st.mean_fine = u.s1 / nd + shift_[node];
    st.mean_Y = b.x1 / nd;
    st.V = std::max(h2(b.x()), 0.0);
    st.Z = k11(b);
    st.h2_fine = std::max(h2(u), 0.0);
    st.V2 = n_ >= 4 ? nd * var_of_k11(b) : nan;
    return st;
}

std::vector<NodeStats> LevelAccumulator::stats() const {
    std::vector<NodeStats> out(shift_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = node_stats(i);
    return out;
}

bool LevelAccumulator::operator==(const LevelAccumulator& other) const {
    return level_ == other.level_ && coupled_ == other.coupled_ && n_ == other.n_ && shift_ == other.shift_ &&
           sums_ == other.sums_ && cost_ == other.cost_;
}

}  // namespace simlmc::stats
