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

#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "driftbench/cart.hpp"

namespace driftbench {

namespace detail {

class ForestModel final : public Model {
  public:
    std::vector<std::shared_ptr<DecisionTree>> trees;
    std::size_t n_features = 0;

    double score(std::span<const double> features) const override {
        double sum = 0.0;
        for (const auto& t : trees) sum += t->score(features);
        return sum / static_cast<double>(trees.size());
    }

    std::size_t feature_count() const override { return n_features; }
};

}  // namespace detail

/// Random forest of Gini trees: each tree fits a bootstrap resample with
/// per-split feature subsampling and scores are averaged. With n_trees=1,
/// bootstrap=0 and feature_subsample=1 this reduces exactly to fit_cart.
inline ModelPtr fit_random_forest(std::span<const Sample> samples, const HyperParams& hp,
                                  std::uint64_t seed = 0) {
    if (samples.empty()) throw Error("fit_random_forest: no samples");
    const int n_trees = hp_get_int(hp, "n_trees", 30);
    if (n_trees < 1) throw Error("fit_random_forest: n_trees must be >= 1");
    const bool bootstrap = hp_get_int(hp, "bootstrap", 1) != 0;
    const std::size_t d = samples.front().features.size();

    detail::TreeGrowParams params;
    params.max_depth = hp_get_int(hp, "max_depth", 8);
    params.min_samples_split = hp_get_int(hp, "min_samples_split", 10);
    const double subsample = hp_get(hp, "feature_subsample", 0.0);  // 0 = sqrt rule
    if (subsample > 0.0) {
        params.mtry = std::max(1, static_cast<int>(std::llround(subsample * static_cast<double>(d))));
    } else {
        params.mtry = std::max(1, static_cast<int>(std::llround(std::sqrt(static_cast<double>(d)))));
    }
    if (params.mtry >= static_cast<int>(d)) params.mtry = 0;  // consider all features

    auto forest = std::make_shared<detail::ForestModel>();
    forest->n_features = d;
    forest->trees.reserve(static_cast<std::size_t>(n_trees));

    std::vector<Sample> boot;
    for (int t = 0; t < n_trees; ++t) {
        Rng rng(mix_seed(seed, "forest-tree", static_cast<std::uint64_t>(t)));
        if (bootstrap) {
            boot.clear();
            boot.reserve(samples.size());
            for (std::size_t i = 0; i < samples.size(); ++i) {
                boot.push_back(samples[rng.below(samples.size())]);
            }
            forest->trees.push_back(detail::grow_cart(boot, params, rng));
        } else {
            forest->trees.push_back(detail::grow_cart(samples, params, rng));
        }
    }
    return forest;
}

}  // namespace driftbench
