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
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "driftbench/hoeffding.hpp"
#include "driftbench/model.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

class EmptyEnsemble : public Error {
  public:
    EmptyEnsemble() : Error("ensemble has no members") {}
};

class ZeroTotalWeight : public Error {
  public:
    ZeroTotalWeight() : Error("ensemble member weights sum to zero") {}
};

/// Mean squared error of a classifier that guesses 0.5 for everything;
/// members at or above it carry no information and are dropped.
inline constexpr double kRandomGuessMse = 0.25;

enum class EnsembleKind { Sea, Awe, Aue };

inline const char* to_string(EnsembleKind k) {
    switch (k) {
        case EnsembleKind::Sea: return "sea";
        case EnsembleKind::Awe: return "awe";
        case EnsembleKind::Aue: return "aue";
    }
    return "?";
}

struct EnsembleMember {
    ModelPtr model;
    std::shared_ptr<HoeffdingTree> online;  // set for incrementally updated members
    double weight = 0.0;                    // AWE/AUE
    double quality = 0.0;                   // SEA
    int origin = 0;                         // insertion counter, keeps order stable
};

struct EnsembleState {
    EnsembleKind kind = EnsembleKind::Sea;
    std::size_t capacity = 0;
    std::vector<EnsembleMember> members;
    ModelPtr pending_candidate;  // SEA holds last period's classifier here
    int next_origin = 1;
};

inline EnsembleState make_ensemble(EnsembleKind kind, std::size_t capacity) {
    if (capacity < 1) throw Error("ensemble capacity must be >= 1");
    EnsembleState s;
    s.kind = kind;
    s.capacity = capacity;
    return s;
}

using QualityFn = std::function<double(const Model&, std::span<const Sample>)>;

/// Default SEA quality: accuracy at the 0.5 threshold.
inline double accuracy_quality(const Model& model, std::span<const Sample> samples) {
    if (samples.empty()) throw Error("accuracy_quality: no samples");
    const std::size_t errors = error_count(model, samples);
    return 1.0 - static_cast<double>(errors) / static_cast<double>(samples.size());
}

namespace detail {

inline double weighted_vote(std::span<const EnsembleMember> members,
                            std::span<const double> features) {
    if (members.empty()) throw EmptyEnsemble();
    double total = 0.0, acc = 0.0;
    for (const auto& m : members) {
        total += m.weight;
        acc += m.weight * m.model->score(features);
    }
    if (total <= 0.0) throw ZeroTotalWeight();
    return acc / total;
}

/// Keeps positively weighted members, at most `capacity` of them (highest
/// weights win), in their original insertion order.
inline void prune_by_weight(std::vector<EnsembleMember>& members, std::size_t capacity) {
    std::erase_if(members, [](const EnsembleMember& m) { return !(m.weight > 0.0); });
    if (members.size() > capacity) {
        std::stable_sort(members.begin(), members.end(),
                         [](const auto& a, const auto& b) { return a.weight > b.weight; });
        members.resize(capacity);
    }
    std::sort(members.begin(), members.end(),
              [](const auto& a, const auto& b) { return a.origin < b.origin; });
}

/// Stratified k-fold MSE estimate for a classifier fit by `fit`. Folds whose
/// training side cannot be fit fall back to a constant predictor at the
/// period's positive rate.
inline double cross_validated_mse(std::span<const Sample> period, const FitFn& fit,
                                  std::uint64_t seed, int folds = 10) {
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < period.size(); ++i) {
        (period[i].label == 1 ? pos_idx : neg_idx).push_back(i);
    }
    Rng rng(mix_seed(seed, "cv-folds"));
    rng.shuffle(pos_idx);
    rng.shuffle(neg_idx);
    std::vector<int> fold_of(period.size(), 0);
    for (std::size_t i = 0; i < pos_idx.size(); ++i) fold_of[pos_idx[i]] = static_cast<int>(i % folds);
    for (std::size_t i = 0; i < neg_idx.size(); ++i) fold_of[neg_idx[i]] = static_cast<int>(i % folds);

    const double prior = static_cast<double>(pos_idx.size()) / static_cast<double>(period.size());
    double total_se = 0.0;
    std::size_t total_n = 0;
    std::vector<Sample> train;
    std::vector<Sample> test;
    for (int f = 0; f < folds; ++f) {
        train.clear();
        test.clear();
        for (std::size_t i = 0; i < period.size(); ++i) {
            (fold_of[i] == f ? test : train).push_back(period[i]);
        }
        if (test.empty()) continue;
        ModelPtr model;
        if (has_both_classes(train)) {
            try {
                model = fit(train, mix_seed(seed, "cv-fit", static_cast<std::uint64_t>(f)));
            } catch (const Error&) {
                model = nullptr;
            }
        }
        for (const auto& s : test) {
            const double score = model ? model->score(s) : prior;
            const double r = static_cast<double>(s.label) - score;
            total_se += r * r;
        }
        total_n += test.size();
    }
    if (total_n == 0) throw Error("cross_validated_mse: no test samples");
    return total_se / static_cast<double>(total_n);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SEA: majority vote, quality-based replacement, one-period candidate delay.

/// Evaluates last period's pending classifier against the current members on
/// the new samples, inserts or replaces accordingly, then fits this period's
/// classifier as the next pending candidate.
inline EnsembleState sea_on_new_period(EnsembleState state, std::span<const Sample> new_period,
                                       const FitFn& fit_base, std::uint64_t seed,
                                       const QualityFn& quality = accuracy_quality) {
    if (new_period.empty()) throw Error("sea_on_new_period: empty period");

    if (state.pending_candidate) {
        const double candidate_quality = quality(*state.pending_candidate, new_period);
        for (auto& m : state.members) m.quality = quality(*m.model, new_period);

        EnsembleMember incoming;
        incoming.model = state.pending_candidate;
        incoming.quality = candidate_quality;
        incoming.origin = state.next_origin++;
        if (state.members.size() < state.capacity) {
            state.members.push_back(std::move(incoming));
        } else {
            auto weakest = std::min_element(
                state.members.begin(), state.members.end(),
                [](const auto& a, const auto& b) { return a.quality < b.quality; });
            if (candidate_quality > weakest->quality) {
                *weakest = std::move(incoming);
            }
        }
        state.pending_candidate = nullptr;
    }

    try {
        state.pending_candidate = fit_base(new_period, mix_seed(seed, "sea-candidate"));
    } catch (const Error&) {
        state.pending_candidate = nullptr;
    }
    return state;
}

/// Fraction of members voting positive at the 0.5 threshold.
inline double sea_predict(const EnsembleState& state, std::span<const double> features) {
    if (state.members.empty()) throw EmptyEnsemble();
    double votes = 0.0;
    for (const auto& m : state.members) {
        votes += m.model->score(features) > 0.5 ? 1.0 : 0.0;
    }
    return votes / static_cast<double>(state.members.size());
}

// ---------------------------------------------------------------------------
// AWE: weight = kRandomGuessMse - MSE on the newest period; this period's
// classifier is weighted by cross-validation, existing members directly.

inline EnsembleState awe_on_new_period(EnsembleState state, std::span<const Sample> new_period,
                                       const FitFn& fit_base, std::uint64_t seed,
                                       bool* updated = nullptr) {
    if (new_period.empty()) throw Error("awe_on_new_period: empty period");
    if (!has_both_classes(new_period)) {
        if (updated) *updated = false;
        return state;  // cannot weight or fit against a one-class period
    }
    if (updated) *updated = true;

    for (auto& m : state.members) {
        m.weight = kRandomGuessMse - mean_squared_error(*m.model, new_period);
    }

    try {
        auto candidate = fit_base(new_period, mix_seed(seed, "awe-candidate"));
        const double mse =
            detail::cross_validated_mse(new_period, fit_base, mix_seed(seed, "awe-cv-mse"));
        EnsembleMember m;
        m.model = std::move(candidate);
        m.weight = kRandomGuessMse - mse;
        m.origin = state.next_origin++;
        state.members.push_back(std::move(m));
    } catch (const Error&) {
        // candidate skipped; existing members are still re-weighted
    }

    detail::prune_by_weight(state.members, state.capacity);
    return state;
}

/// Weight-normalized average of member scores.
inline double awe_predict(const EnsembleState& state, std::span<const double> features) {
    return detail::weighted_vote(state.members, features);
}

// ---------------------------------------------------------------------------
// AUE: AWE's weighting over online members; retained members keep learning
// from each new period.

inline EnsembleState aue_on_new_period(EnsembleState state, std::span<const Sample> new_period,
                                       const HtParams& ht_params, std::uint64_t /*seed*/ = 0,
                                       bool* updated = nullptr) {
    if (new_period.empty()) throw Error("aue_on_new_period: empty period");
    if (updated) *updated = true;

    for (auto& m : state.members) {
        m.weight = kRandomGuessMse - mean_squared_error(*m.model, new_period);
    }

    auto fresh = std::make_shared<HoeffdingTree>(new_period.front().features.size(), ht_params);
    for (const auto& s : new_period) fresh->learn_one(s);
    EnsembleMember incoming;
    incoming.model = fresh;
    incoming.online = fresh;
    incoming.weight = kRandomGuessMse - mean_squared_error(*fresh, new_period);
    incoming.origin = state.next_origin++;
    state.members.push_back(std::move(incoming));

    detail::prune_by_weight(state.members, state.capacity);

    for (auto& m : state.members) {
        if (m.online && m.online != fresh) {
            for (const auto& s : new_period) m.online->learn_one(s);
        }
    }
    return state;
}

inline double aue_predict(const EnsembleState& state, std::span<const double> features) {
    return detail::weighted_vote(state.members, features);
}

}  // namespace driftbench
