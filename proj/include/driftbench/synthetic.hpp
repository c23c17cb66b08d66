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
#include <utility>
#include <vector>

#include "driftbench/common.hpp"
#include "driftbench/partition.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/stats.hpp"

namespace driftbench {

class InvalidSpec : public DataError {
  public:
    using DataError::DataError;
};

/// Describes a synthetic drifting stream: one linear-threshold concept per
/// schedule entry, standard-normal features, label noise by random flips.
struct SyntheticStreamSpec {
    int n_periods = 0;
    int samples_per_period = 0;
    int n_features = 0;
    std::vector<std::pair<int, int>> concept_schedule;  // (period_index, concept_id)
    double noise_rate = 0.0;
    double positive_rate_target = 0.5;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_periods < 1 || samples_per_period < 1 || n_features < 1) {
            throw InvalidSpec("synthetic spec requires positive period/sample/feature counts");
        }
        if (!(noise_rate >= 0.0 && noise_rate < 0.5)) {
            throw InvalidSpec("noise_rate must lie in [0, 0.5)");
        }
        if (!(positive_rate_target > 0.0 && positive_rate_target < 1.0)) {
            throw InvalidSpec("positive_rate_target must lie in (0, 1)");
        }
        if (concept_schedule.empty() || concept_schedule.front().first != 1) {
            throw InvalidSpec("concept_schedule must start at period 1");
        }
        int prev = 0;
        for (const auto& [period, concept_id] : concept_schedule) {
            (void)concept_id;
            if (period <= prev) throw InvalidSpec("concept_schedule indices must strictly increase");
            if (period > n_periods) throw InvalidSpec("concept_schedule index exceeds n_periods");
            prev = period;
        }
    }
};

namespace detail {

/// Concept k labels a sample positive when the feature on axis (k-1) mod d
/// exceeds the quantile threshold; distinct adjacent concept ids therefore
/// use orthogonal decision directions.
inline int concept_axis(int concept_id, int n_features) {
    int a = (concept_id - 1) % n_features;
    if (a < 0) a += n_features;
    return a;
}

}  // namespace detail

/// Generates a periodized drifting stream, one calendar day per period.
/// Deterministic: the same spec yields byte-identical datasets.
inline PeriodizedDataset generate_synthetic(const SyntheticStreamSpec& spec) {
    spec.validate();
    const double threshold = normal_quantile(1.0 - spec.positive_rate_target);
    const std::int64_t base = timeutil::civil_to_epoch(2020, 1, 1);

    PeriodizedDataset out;
    out.granularity = Granularity::Day;
    out.periods.resize(static_cast<std::size_t>(spec.n_periods));

    std::size_t schedule_pos = 0;
    int active_concept = spec.concept_schedule.front().second;
    for (int p = 1; p <= spec.n_periods; ++p) {
        while (schedule_pos < spec.concept_schedule.size() &&
               spec.concept_schedule[schedule_pos].first <= p) {
            active_concept = spec.concept_schedule[schedule_pos].second;
            ++schedule_pos;
        }
        const int axis = detail::concept_axis(active_concept, spec.n_features);

        auto& period = out.periods[static_cast<std::size_t>(p - 1)];
        period.index = p;
        period.start = base + static_cast<std::int64_t>(p - 1) * timeutil::kSecondsPerDay;
        period.end = period.start + timeutil::kSecondsPerDay;
        period.samples.reserve(static_cast<std::size_t>(spec.samples_per_period));

        Rng rng(mix_seed(spec.seed, "synthetic-period", static_cast<std::uint64_t>(p)));
        for (int i = 0; i < spec.samples_per_period; ++i) {
            Sample s;
            s.features.resize(static_cast<std::size_t>(spec.n_features));
            for (auto& f : s.features) f = rng.normal();
            int label = s.features[static_cast<std::size_t>(axis)] > threshold ? 1 : 0;
            if (spec.noise_rate > 0.0 && rng.next_double() < spec.noise_rate) label = 1 - label;
            s.label = label;
            s.timestamp = period.start + static_cast<std::int64_t>(i) *
                                             timeutil::kSecondsPerDay /
                                             spec.samples_per_period;
            period.samples.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace driftbench
