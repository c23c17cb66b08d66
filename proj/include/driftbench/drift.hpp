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
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driftbench/model.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/stats.hpp"

namespace driftbench {

class InvalidErrorRate : public Error {
  public:
    InvalidErrorRate() : Error("error rate must lie in [0, 1]") {}
};

enum class Signal { NoDrift, Drift };

inline const char* to_string(Signal s) { return s == Signal::Drift ? "drift" : "no_drift"; }

struct Verdict {
    Signal signal = Signal::NoDrift;
    std::map<std::string, double> diagnostics;

    bool drift() const { return signal == Signal::Drift; }
};

// ---------------------------------------------------------------------------
// DDM: fires when the per-period error rate rises three standard deviations
// above the best (p, s) pair seen since the last reset.

struct DdmState {
    double p_min = 0.0;
    double s_min = 0.0;
    bool initialized = false;
};

inline std::pair<DdmState, Verdict> ddm_observe(DdmState state, double error_rate, int n) {
    if (!(error_rate >= 0.0 && error_rate <= 1.0)) throw InvalidErrorRate();
    if (n < 1) throw Error("ddm_observe: n must be >= 1");
    const double s = std::sqrt(error_rate * (1.0 - error_rate) / static_cast<double>(n));

    Verdict verdict;
    verdict.diagnostics["p"] = error_rate;
    verdict.diagnostics["s"] = s;

    if (!state.initialized) {
        state.p_min = error_rate;
        state.s_min = s;
        state.initialized = true;
        verdict.diagnostics["initialized"] = 1.0;
        return {state, verdict};
    }

    verdict.diagnostics["p_min"] = state.p_min;
    verdict.diagnostics["s_min"] = state.s_min;
    verdict.diagnostics["threshold"] = state.p_min + 3.0 * state.s_min;

    if (error_rate + s >= state.p_min + 3.0 * state.s_min) {
        verdict.signal = Signal::Drift;
        return {DdmState{}, verdict};  // fresh baseline after retraining
    }
    if (error_rate + s < state.p_min + state.s_min) {
        state.p_min = error_rate;
        state.s_min = s;
    }
    return {state, verdict};
}

// ---------------------------------------------------------------------------
// STEPD: two-proportion test of the newest period's error rate against the
// accumulated error rate of all prior periods. Fires only on a significant
// accuracy decrease.

struct StepdState {
    std::size_t n1 = 0;  // cumulative prior sample count
    std::size_t e1 = 0;  // cumulative prior error count
};

inline constexpr double kStepdAlpha = 0.05;

inline std::pair<StepdState, Verdict> stepd_observe(StepdState state, std::size_t errors_new,
                                                    std::size_t n_new) {
    if (n_new < 1 || errors_new > n_new) throw Error("stepd_observe: bad counts");

    Verdict verdict;
    if (state.n1 == 0) {
        state.n1 = n_new;
        state.e1 = errors_new;
        verdict.diagnostics["seeded"] = 1.0;
        return {state, verdict};
    }

    const auto test = two_proportion_z(state.e1, state.n1, errors_new, n_new);
    const double p1 = static_cast<double>(state.e1) / static_cast<double>(state.n1);
    const double p2 = static_cast<double>(errors_new) / static_cast<double>(n_new);
    verdict.diagnostics["z"] = test.statistic;
    verdict.diagnostics["p_value"] = test.p_value;
    verdict.diagnostics["error_rate_prior"] = p1;
    verdict.diagnostics["error_rate_new"] = p2;

    const double pooled = static_cast<double>(state.e1 + errors_new) /
                          static_cast<double>(state.n1 + n_new);
    if (pooled <= 0.0 || pooled >= 1.0) {
        verdict.diagnostics["degenerate"] = 1.0;
        state.n1 += n_new;
        state.e1 += errors_new;
        return {state, verdict};
    }

    if (test.p_value < kStepdAlpha && p2 > p1) {
        verdict.signal = Signal::Drift;
        return {StepdState{n_new, errors_new}, verdict};
    }
    state.n1 += n_new;
    state.e1 += errors_new;
    return {state, verdict};
}

// ---------------------------------------------------------------------------
// PERM: compares the train-on-old/test-on-new risk of the ordered split
// against seeded random splits of the pooled samples.

struct PermParams {
    int n_permutations = 100;
    double significance = 0.01;
    double rate_of_change = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

/// The permutation-test decision given the ordered risk and the permuted
/// risks. Kept separate so the decision rule can be probed directly.
inline Verdict perm_verdict_from_risks(double ordered_risk, std::span<const double> permuted,
                                       const PermParams& params) {
    std::size_t not_worse = 0;
    for (double r : permuted) {
        if (ordered_risk - r <= params.rate_of_change) ++not_worse;
    }
    const double ratio = static_cast<double>(1 + not_worse) /
                         static_cast<double>(permuted.size() + 1);
    Verdict verdict;
    verdict.signal = ratio <= params.significance ? Signal::Drift : Signal::NoDrift;
    verdict.diagnostics["ratio"] = ratio;
    verdict.diagnostics["ordered_risk"] = ordered_risk;
    verdict.diagnostics["permutations"] = static_cast<double>(permuted.size());
    return verdict;
}

}  // namespace detail

inline Verdict perm_detect(std::span<const Sample> prev_period,
                           std::span<const Sample> new_period, const FitFn& fit,
                           const PermParams& params) {
    if (params.n_permutations < 1) throw Error("perm_detect: need at least one permutation");
    if (!(params.significance > 0.0 && params.significance < 1.0)) {
        throw Error("perm_detect: significance must lie in (0, 1)");
    }
    Verdict verdict;
    if (prev_period.empty() || new_period.empty() || !has_both_classes(prev_period) ||
        !has_both_classes(new_period)) {
        verdict.diagnostics["skipped_degenerate_periods"] = 1.0;
        return verdict;
    }

    try {
        const auto ordered_model = fit(prev_period, mix_seed(params.seed, "perm-ordered"));
        const double ordered_risk = mean_squared_error(*ordered_model, new_period);

        std::vector<Sample> pooled;
        pooled.reserve(prev_period.size() + new_period.size());
        pooled.insert(pooled.end(), prev_period.begin(), prev_period.end());
        pooled.insert(pooled.end(), new_period.begin(), new_period.end());

        std::vector<double> risks;
        risks.reserve(static_cast<std::size_t>(params.n_permutations));
        std::vector<Sample> shuffled = pooled;
        for (int i = 0; i < params.n_permutations; ++i) {
            Rng rng(mix_seed(params.seed, "perm-shuffle", static_cast<std::uint64_t>(i)));
            shuffled = pooled;
            rng.shuffle(shuffled);
            const std::span<const Sample> train(shuffled.data(), prev_period.size());
            const std::span<const Sample> test(shuffled.data() + prev_period.size(),
                                               new_period.size());
            const auto model = fit(train, mix_seed(params.seed, "perm-fit", static_cast<std::uint64_t>(i)));
            risks.push_back(mean_squared_error(*model, test));
        }
        return detail::perm_verdict_from_risks(ordered_risk, risks, params);
    } catch (const Error& e) {
        verdict.diagnostics["fit_error"] = 1.0;
        (void)e;
        return verdict;
    }
}

}  // namespace driftbench
