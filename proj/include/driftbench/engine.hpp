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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftbench/drift.hpp"
#include "driftbench/ensemble.hpp"
#include "driftbench/resample.hpp"
#include "driftbench/stats.hpp"
#include "driftbench/tuning.hpp"

namespace driftbench {

class InsufficientPeriods : public Error {
  public:
    InsufficientPeriods() : Error("experiment needs at least 4 periods") {}
};

class SingleClassWindow : public Error {
  public:
    SingleClassWindow() : Error("initial training window contains a single class") {}
};

enum class PolicyKind { Stationary, PeriodicRetrain, DriftGuided, Ensemble, OracleOptimal };
enum class DetectorKind { Ddm, Perm, Stepd };

inline const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Stationary: return "stationary";
        case PolicyKind::PeriodicRetrain: return "periodic";
        case PolicyKind::DriftGuided: return "drift";
        case PolicyKind::Ensemble: return "ensemble";
        case PolicyKind::OracleOptimal: return "oracle";
    }
    return "?";
}

inline const char* to_string(DetectorKind d) {
    switch (d) {
        case DetectorKind::Ddm: return "ddm";
        case DetectorKind::Perm: return "perm";
        case DetectorKind::Stepd: return "stepd";
    }
    return "?";
}

/// Training window length used when a policy does not override it.
inline std::size_t default_window(std::size_t n_periods) { return n_periods / 2; }

inline constexpr int kDefaultOracleRepetitions = 100;
inline constexpr double kDefaultOracleAlpha = 0.05;

struct PolicyConfig {
    std::string name;
    PolicyKind kind = PolicyKind::Stationary;
    DetectorKind detector = DetectorKind::Ddm;    // DriftGuided only
    EnsembleKind ensemble = EnsembleKind::Sea;    // Ensemble only
    LearnerFamily learner = LearnerFamily::Cart;
    HyperParams hyperparams;                      // empty = defaults (or tuned)
    std::size_t window_k = 0;                     // 0 = half the period count
    int tune_budget = 0;                          // 0 = no tuning
    int undersample_ratio = kDefaultUndersampleRatio;
    int oracle_repetitions = kDefaultOracleRepetitions;
    double oracle_alpha = kDefaultOracleAlpha;
    PermParams perm;
    std::uint64_t seed = 0;
};

struct PeriodRecord {
    int period_index = 0;
    double auc = std::numeric_limits<double>::quiet_NaN();
    double f1 = 0.0;
    double mcc = 0.0;
    bool retrained = false;
    std::optional<Verdict> drift_verdict;
    double train_time_s = 0.0;
    double test_time_s = 0.0;
};

struct RunResult {
    std::string policy_name;
    std::uint64_t seed = 0;
    std::vector<PeriodRecord> records;  // evaluation periods N/2+2 .. N
    double overall_auc = std::numeric_limits<double>::quiet_NaN();
    double overall_f1 = 0.0;
    double overall_mcc = 0.0;
    double total_train_time_s = 0.0;
    double total_test_time_s = 0.0;

    std::size_t retrain_count() const {
        std::size_t c = 0;
        for (const auto& r : records) c += r.retrained;
        return c;
    }
};

enum class OracleDecision { KeepIncumbent, AdoptCandidate };

namespace detail {

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

class StopWatch {
  public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Peeks at the next period to decide whether retraining on the candidate
/// window would significantly improve AUC: fits `repetitions` models per side
/// with distinct seeds and compares the two AUC samples with a Mann-Whitney
/// U test. Adopts only on a significant improvement.
inline OracleDecision oracle_step(std::span<const Sample> incumbent_window,
                                  std::span<const Sample> candidate_window,
                                  std::span<const Sample> next_period, const FitFn& fit,
                                  int repetitions, double alpha, std::uint64_t seed) {
    if (repetitions < 2) throw Error("oracle_step: repetitions must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("oracle_step: alpha must lie in (0, 1)");
    if (!has_both_classes(next_period)) return OracleDecision::KeepIncumbent;

    std::vector<int> labels(next_period.size());
    for (std::size_t i = 0; i < next_period.size(); ++i) labels[i] = next_period[i].label;

    auto side_aucs = [&](std::span<const Sample> window, const char* tag) {
        std::vector<double> out;
        std::vector<double> scores(next_period.size());
        for (int r = 0; r < repetitions; ++r) {
            try {
                const auto model = fit(window, mix_seed(seed, tag, static_cast<std::uint64_t>(r)));
                for (std::size_t i = 0; i < next_period.size(); ++i) {
                    scores[i] = model->score(next_period[i]);
                }
                out.push_back(auc(scores, labels));
            } catch (const Error&) {
                // failed fit shrinks this side's sample
            }
        }
        return out;
    };

    const auto incumbent_aucs = side_aucs(incumbent_window, "oracle-incumbent");
    const auto candidate_aucs = side_aucs(candidate_window, "oracle-candidate");
    if (incumbent_aucs.size() < 2 || candidate_aucs.size() < 2) {
        return OracleDecision::KeepIncumbent;
    }
    const auto test = mann_whitney_u(candidate_aucs, incumbent_aucs);
    if (test.p_value <= alpha &&
        detail::median_of(candidate_aucs) > detail::median_of(incumbent_aucs)) {
        return OracleDecision::AdoptCandidate;
    }
    return OracleDecision::KeepIncumbent;
}

/// Replays the period sequence under one maintenance policy: the model is
/// built on the first half of the periods, then periods N/2+1 .. N-1 each
/// trigger the policy's update step followed by an evaluation on the next
/// period. All randomness derives from the policy seed.
inline RunResult run_policy(const PeriodizedDataset& data, const PolicyConfig& policy) {
    const std::size_t n = data.periods.size();
    if (n < 4) throw InsufficientPeriods();
    for (std::size_t i = 0; i < n; ++i) {
        if (data.periods[i].index != static_cast<int>(i + 1)) {
            throw DataError("period indices must be contiguous from 1");
        }
    }
    const std::size_t half = default_window(n);
    const std::size_t window_k = policy.window_k == 0 ? half : policy.window_k;
    if (window_k < 1 || window_k > half) {
        throw Error("window_k must lie in [1, N/2]");
    }

    RunResult result;
    result.policy_name = policy.name;
    result.seed = policy.seed;

    const auto initial_window = pool_samples(data, 1, static_cast<int>(half));
    if (!has_both_classes(initial_window)) throw SingleClassWindow();

    detail::StopWatch initial_timer;

    HyperParams hp =
        policy.hyperparams.empty() ? default_hyperparams(policy.learner) : policy.hyperparams;
    if (policy.tune_budget >= 1 && half >= 2) {
        const auto tune_train = pool_samples(data, 1, static_cast<int>(half - 1));
        const auto& tune_valid = data.periods[half - 1].samples;
        if (has_both_classes(tune_train) && has_both_classes(tune_valid)) {
            std::vector<Sample> balanced;
            try {
                balanced = undersample(tune_train, policy.undersample_ratio,
                                       mix_seed(policy.seed, "tune-balance"));
            } catch (const NoPositives&) {
                balanced.assign(tune_train.begin(), tune_train.end());
            }
            const auto tuned = tune_random_search(
                policy.learner, default_search_space(policy.learner), policy.tune_budget,
                balanced, tune_valid, mix_seed(policy.seed, "tune"));
            hp = tuned.best;
        }
    }

    const FitFn fit_pipeline = [&policy, hp](std::span<const Sample> samples,
                                             std::uint64_t seed) -> ModelPtr {
        std::vector<Sample> balanced;
        try {
            balanced = undersample(samples, policy.undersample_ratio, mix_seed(seed, "balance"));
        } catch (const NoPositives&) {
            balanced.assign(samples.begin(), samples.end());
        }
        return fit_model(policy.learner, balanced, hp, mix_seed(seed, "fit"));
    };
    // detection fits stay unbalanced: permutation risks compare like with like
    const FitFn plain_fit = [&policy, hp](std::span<const Sample> samples,
                                          std::uint64_t seed) -> ModelPtr {
        return fit_model(policy.learner, samples, hp, mix_seed(seed, "fit"));
    };

    ModelPtr model;
    EnsembleState ens;
    DdmState ddm;
    StepdState stepd;
    std::vector<Sample> incumbent_window;

    auto ensemble_update = [&](std::span<const Sample> period_samples,
                               std::uint64_t seed) -> bool {
        if (period_samples.empty()) return false;
        bool updated = true;
        switch (policy.ensemble) {
            case EnsembleKind::Sea:
                ens = sea_on_new_period(ens, period_samples, fit_pipeline, seed);
                break;
            case EnsembleKind::Awe:
                ens = awe_on_new_period(ens, period_samples, fit_pipeline, seed, &updated);
                break;
            case EnsembleKind::Aue:
                ens = aue_on_new_period(ens, period_samples, ht_params_from(hp), seed, &updated);
                break;
        }
        return updated;
    };

    if (policy.kind == PolicyKind::Ensemble) {
        ens = make_ensemble(policy.ensemble, window_k);
        for (std::size_t p = 1; p <= half; ++p) {
            ensemble_update(data.periods[p - 1].samples,
                            mix_seed(policy.seed, "ensemble-init", p));
        }
    } else {
        model = fit_pipeline(initial_window, mix_seed(policy.seed, "initial-fit"));
        incumbent_window = initial_window;
    }

    if (policy.kind == PolicyKind::DriftGuided && policy.detector != DetectorKind::Perm) {
        // baseline the detector on the incumbent's behavior over the last
        // training period, so the first post-training jump is visible
        const auto& prime = data.periods[half - 1].samples;
        if (!prime.empty()) {
            const std::size_t errors = error_count(*model, prime);
            if (policy.detector == DetectorKind::Ddm) {
                const double rate = static_cast<double>(errors) / static_cast<double>(prime.size());
                std::tie(ddm, std::ignore) = ddm_observe(ddm, rate, static_cast<int>(prime.size()));
            } else {
                std::tie(stepd, std::ignore) = stepd_observe(stepd, errors, prime.size());
            }
        }
    }
    result.total_train_time_s += initial_timer.seconds();

    auto try_retrain = [&](std::span<const Sample> window, std::uint64_t seed,
                           std::optional<Verdict>& verdict_slot) -> bool {
        if (!has_both_classes(window)) {
            if (!verdict_slot) verdict_slot.emplace();
            verdict_slot->diagnostics["retrain_skipped_single_class_window"] = 1.0;
            return false;
        }
        model = fit_pipeline(window, seed);
        return true;
    };

    std::vector<double> pooled_scores;
    std::vector<int> pooled_labels;

    for (std::size_t i = half + 1; i <= n - 1; ++i) {
        detail::StopWatch train_timer;
        PeriodRecord record;
        record.period_index = static_cast<int>(i + 1);

        const auto& current = data.periods[i - 1];
        const int window_first = static_cast<int>(i - window_k + 1);
        const auto window = pool_samples(data, window_first, static_cast<int>(i));

        switch (policy.kind) {
            case PolicyKind::Stationary:
                break;
            case PolicyKind::PeriodicRetrain:
                record.retrained =
                    try_retrain(window, mix_seed(policy.seed, "retrain", i), record.drift_verdict);
                break;
            case PolicyKind::DriftGuided: {
                Verdict verdict;
                if (policy.detector == DetectorKind::Perm) {
                    PermParams pp = policy.perm;
                    pp.seed = mix_seed(policy.seed, "perm-period", i);
                    verdict = perm_detect(data.periods[i - 2].samples, current.samples, plain_fit,
                                          pp);
                } else if (current.samples.empty()) {
                    verdict.diagnostics["skipped_empty_period"] = 1.0;
                } else {
                    const std::size_t errors = error_count(*model, current.samples);
                    if (policy.detector == DetectorKind::Ddm) {
                        const double rate =
                            static_cast<double>(errors) / static_cast<double>(current.samples.size());
                        std::tie(ddm, verdict) =
                            ddm_observe(ddm, rate, static_cast<int>(current.samples.size()));
                    } else {
                        std::tie(stepd, verdict) =
                            stepd_observe(stepd, errors, current.samples.size());
                    }
                }
                record.drift_verdict = verdict;
                if (verdict.drift()) {
                    record.retrained = try_retrain(window, mix_seed(policy.seed, "retrain", i),
                                                   record.drift_verdict);
                }
                break;
            }
            case PolicyKind::Ensemble:
                record.retrained =
                    ensemble_update(current.samples, mix_seed(policy.seed, "ensemble-update", i));
                break;
            case PolicyKind::OracleOptimal: {
                const auto decision = oracle_step(
                    incumbent_window, window, data.periods[i].samples, fit_pipeline,
                    policy.oracle_repetitions, policy.oracle_alpha,
                    mix_seed(policy.seed, "oracle", i));
                if (decision == OracleDecision::AdoptCandidate) {
                    record.retrained = try_retrain(window, mix_seed(policy.seed, "retrain", i),
                                                   record.drift_verdict);
                    if (record.retrained) incumbent_window = window;
                }
                break;
            }
        }
        record.train_time_s = train_timer.seconds();

        detail::StopWatch test_timer;
        const auto& eval = data.periods[i].samples;  // period i+1, 1-based
        std::vector<double> scores(eval.size());
        std::vector<int> labels(eval.size());
        for (std::size_t s = 0; s < eval.size(); ++s) {
            double score = 0.5;
            if (policy.kind == PolicyKind::Ensemble) {
                try {
                    score = policy.ensemble == EnsembleKind::Sea
                                ? sea_predict(ens, eval[s].features)
                                : awe_predict(ens, eval[s].features);
                } catch (const Error&) {
                    score = 0.5;  // empty or zero-weight ensemble scores as uninformed
                }
            } else {
                score = model->score(eval[s]);
            }
            scores[s] = score;
            labels[s] = eval[s].label;
        }
        if (!eval.empty()) {
            if (has_both_classes(eval)) record.auc = auc(scores, labels);
            std::tie(record.f1, record.mcc) = f1_mcc(scores, labels);
            pooled_scores.insert(pooled_scores.end(), scores.begin(), scores.end());
            pooled_labels.insert(pooled_labels.end(), labels.begin(), labels.end());
        }
        record.test_time_s = test_timer.seconds();

        result.total_train_time_s += record.train_time_s;
        result.total_test_time_s += record.test_time_s;
        result.records.push_back(std::move(record));
    }

    if (!pooled_labels.empty()) {
        bool both = false;
        for (std::size_t s = 1; s < pooled_labels.size(); ++s) {
            if (pooled_labels[s] != pooled_labels[0]) {
                both = true;
                break;
            }
        }
        if (both) result.overall_auc = auc(pooled_scores, pooled_labels);
        std::tie(result.overall_f1, result.overall_mcc) = f1_mcc(pooled_scores, pooled_labels);
    }
    return result;
}

}  // namespace driftbench
