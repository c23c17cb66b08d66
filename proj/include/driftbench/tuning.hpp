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
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "driftbench/cart.hpp"
#include "driftbench/forest.hpp"
#include "driftbench/hoeffding.hpp"
#include "driftbench/logistic.hpp"
#include "driftbench/model.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/stats.hpp"

namespace driftbench {

inline ModelPtr fit_model(LearnerFamily family, std::span<const Sample> samples,
                          const HyperParams& hp, std::uint64_t seed) {
    switch (family) {
        case LearnerFamily::Logistic: return fit_logistic(samples, hp, seed);
        case LearnerFamily::Cart: return fit_cart(samples, hp, seed);
        case LearnerFamily::RandomForest: return fit_random_forest(samples, hp, seed);
        case LearnerFamily::HoeffdingTree: return fit_hoeffding(samples, hp, seed);
    }
    throw Error("unknown learner family");
}

inline HyperParams default_hyperparams(LearnerFamily family) {
    switch (family) {
        case LearnerFamily::Logistic:
            return {{"learning_rate", 0.3}, {"l2", 1e-4}, {"epochs", 200}};
        case LearnerFamily::Cart:
            return {{"max_depth", 8}, {"min_samples_split", 10}};
        case LearnerFamily::RandomForest:
            return {{"n_trees", 30}, {"max_depth", 8}, {"min_samples_split", 10}};
        case LearnerFamily::HoeffdingTree:
            return {{"grace_period", 200}, {"split_confidence", 1e-6}, {"tie_threshold", 0.05}};
    }
    throw Error("unknown learner family");
}

struct ParamRange {
    enum class Kind { Uniform, LogUniform, IntRange } kind = Kind::Uniform;
    double lo = 0.0;
    double hi = 0.0;
};

using SearchSpace = std::map<std::string, ParamRange>;

inline SearchSpace default_search_space(LearnerFamily family) {
    using K = ParamRange::Kind;
    switch (family) {
        case LearnerFamily::Logistic:
            return {{"learning_rate", {K::LogUniform, 1e-3, 1.0}},
                    {"l2", {K::LogUniform, 1e-6, 1.0}},
                    {"epochs", {K::IntRange, 50, 500}}};
        case LearnerFamily::Cart:
            return {{"max_depth", {K::IntRange, 2, 20}},
                    {"min_samples_split", {K::IntRange, 2, 50}}};
        case LearnerFamily::RandomForest:
            return {{"n_trees", {K::IntRange, 10, 100}},
                    {"max_depth", {K::IntRange, 2, 20}}};
        case LearnerFamily::HoeffdingTree:
            return {{"grace_period", {K::IntRange, 50, 500}},
                    {"split_confidence", {K::LogUniform, 1e-8, 1e-4}},
                    {"tie_threshold", {K::Uniform, 0.01, 0.1}}};
    }
    throw Error("unknown learner family");
}

struct TuningDraw {
    HyperParams hp;
    double validation_auc = -std::numeric_limits<double>::infinity();
};

struct TuningResult {
    HyperParams best;
    std::vector<TuningDraw> draws;
};

/// Uniform random search: draws `budget` configurations, fits each on the
/// training samples and keeps the one with the highest validation AUC.
/// Ties go to the earliest draw; learner failures score -inf.
inline TuningResult tune_random_search(LearnerFamily family, const SearchSpace& space, int budget,
                                       std::span<const Sample> train,
                                       std::span<const Sample> valid, std::uint64_t seed) {
    if (budget < 1) throw Error("tune_random_search: budget must be >= 1");
    if (space.empty()) throw Error("tune_random_search: empty search space");

    std::vector<double> valid_scores(valid.size());
    std::vector<int> valid_labels(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i) valid_labels[i] = valid[i].label;

    TuningResult result;
    Rng draw_rng(mix_seed(seed, "tune-draws"));
    double best_auc = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < budget; ++b) {
        TuningDraw draw;
        for (const auto& [name, range] : space) {
            double v = 0.0;
            switch (range.kind) {
                case ParamRange::Kind::Uniform: v = draw_rng.uniform(range.lo, range.hi); break;
                case ParamRange::Kind::LogUniform:
                    v = std::exp(draw_rng.uniform(std::log(range.lo), std::log(range.hi)));
                    break;
                case ParamRange::Kind::IntRange:
                    v = static_cast<double>(draw_rng.uniform_int(
                        static_cast<long long>(range.lo), static_cast<long long>(range.hi)));
                    break;
            }
            draw.hp[name] = v;
        }
        try {
            const auto model =
                fit_model(family, train, draw.hp, mix_seed(seed, "tune-fit", static_cast<std::uint64_t>(b)));
            for (std::size_t i = 0; i < valid.size(); ++i) valid_scores[i] = model->score(valid[i]);
            draw.validation_auc = auc(valid_scores, valid_labels);
        } catch (const Error&) {
            // leave at -inf
        }
        if (draw.validation_auc > best_auc) {
            best_auc = draw.validation_auc;
            result.best = draw.hp;
        }
        result.draws.push_back(std::move(draw));
    }
    if (result.best.empty()) {
        // every draw failed; fall back to the first draw so callers still get
        // a configuration from the space
        result.best = result.draws.front().hp;
    }
    return result;
}

}  // namespace driftbench
