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
#include <span>
#include <vector>

#include "driftbench/common.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

class NoPositives : public DataError {
  public:
    NoPositives() : DataError("no positive samples; skipping under-sampling") {}
};

inline constexpr int kDefaultUndersampleRatio = 10;  // negatives kept per positive

/// Rebalances training data by keeping every positive sample and at most
/// ratio * (#positives) negatives, chosen uniformly without replacement.
/// The output order is itself shuffled, deterministically from the seed.
inline std::vector<Sample> undersample(std::span<const Sample> samples, int ratio_neg_per_pos,
                                       std::uint64_t seed) {
    if (ratio_neg_per_pos < 1) throw DataError("under-sampling ratio must be >= 1");
    std::vector<Sample> positives;
    std::vector<Sample> negatives;
    for (const auto& s : samples) {
        (s.label == 1 ? positives : negatives).push_back(s);
    }
    if (positives.empty()) throw NoPositives();

    Rng rng(mix_seed(seed, "undersample"));
    const std::size_t cap = positives.size() * static_cast<std::size_t>(ratio_neg_per_pos);
    if (negatives.size() > cap) {
        rng.shuffle(negatives);
        negatives.resize(cap);
    }
    std::vector<Sample> out = std::move(positives);
    out.insert(out.end(), negatives.begin(), negatives.end());
    rng.shuffle(out);
    return out;
}

}  // namespace driftbench
