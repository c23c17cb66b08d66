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
#include <span>
#include <vector>

#include "driftbench/model.hpp"

namespace driftbench {

namespace detail {

class LogisticModel final : public Model {
  public:
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> mean;
    std::vector<double> scale;  // 0 marks an ignored constant feature

    double score(std::span<const double> features) const override {
        if (features.size() != weights.size()) {
            throw FeatureCountMismatch(weights.size(), features.size());
        }
        double z = bias;
        for (std::size_t f = 0; f < weights.size(); ++f) {
            if (scale[f] == 0.0) continue;
            z += weights[f] * (features[f] - mean[f]) / scale[f];
        }
        return 1.0 / (1.0 + std::exp(-z));
    }

    std::size_t feature_count() const override { return weights.size(); }
};

}  // namespace detail

/// Logistic regression fit by full-batch gradient descent on L2-penalized
/// log-loss over standardized features. Constant features are ignored.
/// Deterministic; the seed parameter exists for contract uniformity.
inline ModelPtr fit_logistic(std::span<const Sample> samples, const HyperParams& hp,
                             std::uint64_t /*seed*/ = 0) {
    if (samples.empty()) throw Error("fit_logistic: no samples");
    if (!has_both_classes(samples)) throw SingleClassData();
    const std::size_t n = samples.size();
    const std::size_t d = samples.front().features.size();
    const double lr = hp_get(hp, "learning_rate", 0.3);
    const double l2 = hp_get(hp, "l2", 1e-4);
    const int epochs = hp_get_int(hp, "epochs", 200);

    auto model = std::make_shared<detail::LogisticModel>();
    model->mean.assign(d, 0.0);
    model->scale.assign(d, 0.0);
    model->weights.assign(d, 0.0);

    for (const auto& s : samples) {
        if (s.features.size() != d) throw FeatureCountMismatch(d, s.features.size());
        for (std::size_t f = 0; f < d; ++f) model->mean[f] += s.features[f];
    }
    for (auto& m : model->mean) m /= static_cast<double>(n);
    for (const auto& s : samples) {
        for (std::size_t f = 0; f < d; ++f) {
            const double c = s.features[f] - model->mean[f];
            model->scale[f] += c * c;
        }
    }
    for (auto& sc : model->scale) {
        sc = std::sqrt(sc / static_cast<double>(n));
        if (sc < 1e-12) sc = 0.0;
    }

    // standardized copies once, then plain gradient descent
    std::vector<double> z(n * d, 0.0);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = samples[i].label;
        for (std::size_t f = 0; f < d; ++f) {
            if (model->scale[f] != 0.0) {
                z[i * d + f] = (samples[i].features[f] - model->mean[f]) / model->scale[f];
            }
        }
    }

    std::vector<double> grad(d, 0.0);
    for (int e = 0; e < epochs; ++e) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double lin = model->bias;
            for (std::size_t f = 0; f < d; ++f) lin += model->weights[f] * z[i * d + f];
            const double p = 1.0 / (1.0 + std::exp(-lin));
            const double delta = p - static_cast<double>(y[i]);
            grad_b += delta;
            for (std::size_t f = 0; f < d; ++f) grad[f] += delta * z[i * d + f];
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        model->bias -= lr * grad_b * inv_n;
        for (std::size_t f = 0; f < d; ++f) {
            model->weights[f] -= lr * (grad[f] * inv_n + l2 * model->weights[f]);
        }
    }
    return model;
}

}  // namespace driftbench
