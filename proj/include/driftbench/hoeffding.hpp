/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "driftbench/model.hpp"
#include "driftbench/stats.hpp"

namespace driftbench {

struct HtParams {
    int grace_period = 200;
    double split_confidence = 1e-6;
    double tie_threshold = 0.05;
};

inline HtParams ht_params_from(const HyperParams& hp) {
    HtParams p;
    p.grace_period = hp_get_int(hp, "grace_period", p.grace_period);
    p.split_confidence = hp_get(hp, "split_confidence", p.split_confidence);
    p.tie_threshold = hp_get(hp, "tie_threshold", p.tie_threshold);
    if (p.grace_period < 1) throw Error("grace_period must be >= 1");
    if (!(p.split_confidence > 0.0 && p.split_confidence < 1.0)) {
        throw Error("split_confidence must lie in (0, 1)");
    }
    return p;
}

/// Hoeffding bound for a statistic with range 1 observed n times.
inline double hoeffding_epsilon(double n, double delta) {
    return std::sqrt(std::log(1.0 / delta) / (2.0 * n));
}

/// Incrementally grown decision tree. Numeric features are summarized per
/// leaf with per-class Gaussian statistics; candidate thresholds are probed
/// on an even grid between the observed bounds. A leaf splits only once the
/// Hoeffding bound separates the best and second-best feature, or the bound
/// has shrunk below the tie threshold.
class HoeffdingTree final : public OnlineModel {
  public:
    HoeffdingTree(std::size_t n_features, HtParams params)
        : params_(params), n_features_(n_features) {
        nodes_.emplace_back();
        nodes_[0].leaf = std::make_unique<LeafStats>(n_features);
    }

    void learn_one(std::span<const double> features, int label) override {
        if (features.size() != n_features_) {
            throw FeatureCountMismatch(n_features_, features.size());
        }
        if (label != 0 && label != 1) throw Error("label must be 0 or 1");
        int at = route(features);
        auto& leaf = *nodes_[static_cast<std::size_t>(at)].leaf;
        leaf.class_counts[static_cast<std::size_t>(label)] += 1.0;
        for (std::size_t f = 0; f < n_features_; ++f) {
            leaf.feats[f][static_cast<std::size_t>(label)].add(features[f]);
        }
        leaf.seen_since_eval += 1.0;
        if (leaf.seen_since_eval >= static_cast<double>(params_.grace_period)) {
            leaf.seen_since_eval = 0.0;
            try_split(at);
        }
    }

    using OnlineModel::learn_one;

    double score(std::span<const double> features) const override {
        if (features.size() != n_features_) {
            throw FeatureCountMismatch(n_features_, features.size());
        }
        const auto& leaf = *nodes_[static_cast<std::size_t>(route(features))].leaf;
        const double n = leaf.class_counts[0] + leaf.class_counts[1];
        return (leaf.class_counts[1] + 1.0) / (n + 2.0);  // Laplace smoothed
    }

    std::size_t feature_count() const override { return n_features_; }

    std::size_t leaf_count() const {
        std::size_t c = 0;
        for (const auto& nd : nodes_) c += (nd.leaf != nullptr);
        return c;
    }

  private:
    struct GaussStat {
        double n = 0.0;
        double mean = 0.0;
        double m2 = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();

        void add(double x) {
            n += 1.0;
            const double d = x - mean;
            mean += d / n;
            m2 += d * (x - mean);
            if (x < lo) lo = x;
            if (x > hi) hi = x;
        }

        /// Estimated fraction of observed values below t.
        double fraction_below(double t) const {
            if (n == 0.0) return 0.0;
            const double sd = std::sqrt(m2 / n);
            if (sd < 1e-12) {
                if (t < mean) return 0.0;
                if (t > mean) return 1.0;
                return 0.5;
            }
            return normal_cdf((t - mean) / sd);
        }
    };

    struct LeafStats {
        explicit LeafStats(std::size_t n_features) : feats(n_features) {}
        std::array<double, 2> class_counts{0.0, 0.0};
        std::vector<std::array<GaussStat, 2>> feats;
        double seen_since_eval = 0.0;
    };

    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        std::unique_ptr<LeafStats> leaf;
    };

    static double entropy_bits(double pos, double n) {
        if (n <= 0.0 || pos <= 0.0 || pos >= n) return 0.0;
        const double p = pos / n;
        return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
    }

    int route(std::span<const double> features) const {
        int at = 0;
        while (nodes_[static_cast<std::size_t>(at)].leaf == nullptr) {
            const auto& nd = nodes_[static_cast<std::size_t>(at)];
            at = features[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                                : nd.right;
        }
        return at;
    }

    struct FeatureGain {
        double gain = 0.0;
        double threshold = 0.0;
    };

    FeatureGain best_gain_for_feature(const LeafStats& leaf, std::size_t f) const {
        const auto& per_class = leaf.feats[f];
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& g : per_class) {
            if (g.n > 0.0) {
                lo = std::min(lo, g.lo);
                hi = std::max(hi, g.hi);
            }
        }
        FeatureGain out;
        if (!(hi > lo)) return out;
        const double n = leaf.class_counts[0] + leaf.class_counts[1];
        const double parent = entropy_bits(leaf.class_counts[1], n);
        constexpr int kGrid = 10;
        for (int j = 1; j <= kGrid; ++j) {
            const double t = lo + (hi - lo) * static_cast<double>(j) / (kGrid + 1);
            double below_pos = per_class[1].n * per_class[1].fraction_below(t);
            double below_neg = per_class[0].n * per_class[0].fraction_below(t);
            const double nb = below_pos + below_neg;
            const double na = n - nb;
            if (nb < 1e-6 || na < 1e-6) continue;
            const double above_pos = per_class[1].n - below_pos;
            const double child = (nb * entropy_bits(below_pos, nb) +
                                  na * entropy_bits(above_pos, na)) /
                                 n;
            const double gain = parent - child;
            if (gain > out.gain) {
                out.gain = gain;
                out.threshold = t;
            }
        }
        return out;
    }

    void try_split(int at) {
        auto& node = nodes_[static_cast<std::size_t>(at)];
        const auto& leaf = *node.leaf;
        const double n = leaf.class_counts[0] + leaf.class_counts[1];
        if (n < 2.0) return;
        if (leaf.class_counts[0] == 0.0 || leaf.class_counts[1] == 0.0) return;

        double g1 = 0.0, g2 = 0.0, threshold = 0.0;
        int feature = -1;
        for (std::size_t f = 0; f < n_features_; ++f) {
            const auto fg = best_gain_for_feature(leaf, f);
            if (fg.gain > g1) {
                g2 = g1;
                g1 = fg.gain;
                threshold = fg.threshold;
                feature = static_cast<int>(f);
            } else if (fg.gain > g2) {
                g2 = fg.gain;
            }
        }
        if (feature < 0 || g1 <= 0.0) return;
        const double eps = hoeffding_epsilon(n, params_.split_confidence);
        if (!(g1 - g2 > eps || eps < params_.tie_threshold)) return;

        const int left = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_.back().leaf = std::make_unique<LeafStats>(n_features_);
        const int right = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_.back().leaf = std::make_unique<LeafStats>(n_features_);
        auto& nd = nodes_[static_cast<std::size_t>(at)];  // re-take after reallocation
        nd.feature = feature;
        nd.threshold = threshold;
        nd.left = left;
        nd.right = right;
        nd.leaf.reset();
    }

    std::vector<Node> nodes_;
    HtParams params_;
    std::size_t n_features_;
};

/// Routes one labeled sample into the tree and updates leaf statistics.
inline void ht_learn_one(HoeffdingTree& model, const Sample& sample) { model.learn_one(sample); }

/// Batch adapter: builds a tree with one pass over the samples.
inline ModelPtr fit_hoeffding(std::span<const Sample> samples, const HyperParams& hp,
                              std::uint64_t /*seed*/ = 0) {
    if (samples.empty()) throw Error("fit_hoeffding: no samples");
    auto tree = std::make_shared<HoeffdingTree>(samples.front().features.size(),
                                                ht_params_from(hp));
    for (const auto& s : samples) tree->learn_one(s);
    return tree;
}

}  // namespace driftbench
