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

#include <algorithm>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "driftbench/model.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

namespace detail {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double leaf_score = 0.0;
    int left = -1;
    int right = -1;
};

struct TreeGrowParams {
    int max_depth = 8;
    int min_samples_split = 10;
    int mtry = 0;  // features considered per split; 0 = all
};

class DecisionTree final : public Model {
  public:
    std::vector<TreeNode> nodes;
    std::size_t n_features = 0;

    double score(std::span<const double> features) const override {
        if (features.size() != n_features) {
            throw FeatureCountMismatch(n_features, features.size());
        }
        int at = 0;
        while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(at)];
            at = features[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                                : nd.right;
        }
        return nodes[static_cast<std::size_t>(at)].leaf_score;
    }

    std::size_t feature_count() const override { return n_features; }
};

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

inline double gini(double pos, double n) {
    if (n <= 0.0) return 0.0;
    const double p = pos / n;
    return 2.0 * p * (1.0 - p);
}

/// Best axis-aligned Gini split over the candidate features; `fallback`
/// receives the first valid split seen, used for impure nodes where every
/// split has zero gain (the XOR situation).
inline SplitChoice best_split(std::span<const Sample> samples, const std::vector<int>& idx,
                              const std::vector<int>& features, SplitChoice& fallback) {
    SplitChoice best;
    const double n = static_cast<double>(idx.size());
    double pos_total = 0.0;
    for (int i : idx) pos_total += samples[static_cast<std::size_t>(i)].label;
    const double parent = gini(pos_total, n);

    std::vector<std::pair<double, int>> vals;
    vals.reserve(idx.size());
    for (int f : features) {
        vals.clear();
        for (int i : idx) {
            const auto& s = samples[static_cast<std::size_t>(i)];
            vals.emplace_back(s.features[static_cast<std::size_t>(f)], s.label);
        }
        std::sort(vals.begin(), vals.end());
        double pos_left = 0.0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            pos_left += vals[i].second;
            if (vals[i].first == vals[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = n - nl;
            const double threshold = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
            if (!fallback.found) {
                fallback = {true, f, threshold, 0.0};
            }
            const double child =
                (nl * gini(pos_left, nl) + nr * gini(pos_total - pos_left, nr)) / n;
            const double gain = parent - child;
            if (!best.found || gain > best.gain + 1e-15) {
                best = {true, f, threshold, gain};
            }
        }
    }
    return best;
}

inline int grow_tree(DecisionTree& tree, std::span<const Sample> samples, std::vector<int>& idx,
                     int depth, const TreeGrowParams& params, Rng& rng) {
    const auto node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    double pos = 0.0;
    for (int i : idx) pos += samples[static_cast<std::size_t>(i)].label;
    const double n = static_cast<double>(idx.size());
    tree.nodes[static_cast<std::size_t>(node_id)].leaf_score = pos / n;

    const bool pure = (pos == 0.0 || pos == n);
    if (depth >= params.max_depth || idx.size() < static_cast<std::size_t>(params.min_samples_split) ||
        pure) {
        return node_id;
    }

    const int d = static_cast<int>(tree.n_features);
    std::vector<int> features(static_cast<std::size_t>(d));
    std::iota(features.begin(), features.end(), 0);
    if (params.mtry > 0 && params.mtry < d) {
        for (int k = 0; k < params.mtry; ++k) {
            const auto j = static_cast<std::size_t>(
                k + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - k))));
            std::swap(features[static_cast<std::size_t>(k)], features[j]);
        }
        features.resize(static_cast<std::size_t>(params.mtry));
        std::sort(features.begin(), features.end());
    }

    SplitChoice fallback;
    SplitChoice chosen = best_split(samples, idx, features, fallback);
    if (!chosen.found || chosen.gain <= 1e-12) {
        // impure node with no informative split: take any valid split and let
        // the children sort it out
        if (!fallback.found) return node_id;
        chosen = fallback;
    }

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        (s.features[static_cast<std::size_t>(chosen.feature)] <= chosen.threshold ? left_idx
                                                                                  : right_idx)
            .push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) return node_id;

    idx.clear();
    idx.shrink_to_fit();
    const int left = grow_tree(tree, samples, left_idx, depth + 1, params, rng);
    const int right = grow_tree(tree, samples, right_idx, depth + 1, params, rng);
    auto& nd = tree.nodes[static_cast<std::size_t>(node_id)];
    nd.feature = chosen.feature;
    nd.threshold = chosen.threshold;
    nd.left = left;
    nd.right = right;
    return node_id;
}

inline std::shared_ptr<DecisionTree> grow_cart(std::span<const Sample> samples,
                                               const TreeGrowParams& params, Rng& rng) {
    auto tree = std::make_shared<DecisionTree>();
    tree->n_features = samples.front().features.size();
    for (const auto& s : samples) {
        if (s.features.size() != tree->n_features) {
            throw FeatureCountMismatch(tree->n_features, s.features.size());
        }
    }
    std::vector<int> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    grow_tree(*tree, samples, idx, 0, params, rng);
    return tree;
}

}  // namespace detail

/// Greedy binary classification tree on Gini impurity with axis-aligned
/// midpoint thresholds. Leaf score is the positive fraction at the leaf.
/// Deterministic; the seed parameter exists for contract uniformity.
inline ModelPtr fit_cart(std::span<const Sample> samples, const HyperParams& hp,
                         std::uint64_t seed = 0) {
    if (samples.empty()) throw Error("fit_cart: no samples");
    detail::TreeGrowParams params;
    params.max_depth = hp_get_int(hp, "max_depth", 8);
    params.min_samples_split = hp_get_int(hp, "min_samples_split", 10);
    params.mtry = 0;
    Rng rng(seed);
    return detail::grow_cart(samples, params, rng);
}

}  // namespace driftbench
