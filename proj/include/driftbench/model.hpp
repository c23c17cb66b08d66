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

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "driftbench/common.hpp"

namespace driftbench {

class SingleClassData : public Error {
  public:
    SingleClassData() : Error("training data contains a single class") {}
};

class FeatureCountMismatch : public Error {
  public:
    FeatureCountMismatch(std::size_t expected, std::size_t got)
        : Error("feature count mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

/// A fitted binary scorer. Scores are probabilities in [0, 1]; scoring is
/// deterministic and side-effect-free.
class Model {
  public:
    virtual ~Model() = default;
    virtual double score(std::span<const double> features) const = 0;
    virtual std::size_t feature_count() const = 0;

    double score(const Sample& s) const { return score(std::span<const double>(s.features)); }
};

/// A model that can additionally ingest one labeled sample at a time.
class OnlineModel : public Model {
  public:
    virtual void learn_one(std::span<const double> features, int label) = 0;

    void learn_one(const Sample& s) { learn_one(std::span<const double>(s.features), s.label); }
};

using ModelPtr = std::shared_ptr<const Model>;

/// Learner-specific name -> value map. Integer-valued parameters are stored
/// as doubles and rounded on use.
using HyperParams = std::map<std::string, double>;

inline double hp_get(const HyperParams& hp, const std::string& name, double fallback) {
    auto it = hp.find(name);
    return it == hp.end() ? fallback : it->second;
}

inline int hp_get_int(const HyperParams& hp, const std::string& name, int fallback) {
    auto it = hp.find(name);
    return it == hp.end() ? fallback : static_cast<int>(std::llround(it->second));
}

enum class LearnerFamily { Logistic, Cart, RandomForest, HoeffdingTree };

inline const char* to_string(LearnerFamily f) {
    switch (f) {
        case LearnerFamily::Logistic: return "logistic";
        case LearnerFamily::Cart: return "cart";
        case LearnerFamily::RandomForest: return "random_forest";
        case LearnerFamily::HoeffdingTree: return "hoeffding_tree";
    }
    return "?";
}

/// Fits a model from raw training samples. Implementations may rebalance the
/// data internally; the seed drives every random choice.
using FitFn = std::function<ModelPtr(std::span<const Sample>, std::uint64_t)>;

inline double mean_squared_error(const Model& model, std::span<const Sample> samples) {
    if (samples.empty()) throw Error("mean_squared_error: no samples");
    double sum = 0.0;
    for (const auto& s : samples) {
        const double r = static_cast<double>(s.label) - model.score(s);
        sum += r * r;
    }
    return sum / static_cast<double>(samples.size());
}

/// Misclassification count at a threshold (predict positive when score > t).
inline std::size_t error_count(const Model& model, std::span<const Sample> samples,
                               double threshold = 0.5) {
    std::size_t errors = 0;
    for (const auto& s : samples) {
        const int pred = model.score(s) > threshold ? 1 : 0;
        errors += (pred != s.label);
    }
    return errors;
}

}  // namespace driftbench
