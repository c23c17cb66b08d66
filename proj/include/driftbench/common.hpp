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
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace driftbench {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Errors caused by malformed or unusable input data.
class DataError : public Error {
  public:
    using Error::Error;
};

/// One labeled observation: feature vector, binary label, epoch-seconds timestamp.
struct Sample {
    std::vector<double> features;
    int label = 0;  // 0 = negative/normal, 1 = positive/failure
    std::int64_t timestamp = 0;
};

enum class TimestampFormat { EpochSeconds, Iso8601 };

/// Maps CSV columns onto samples.
struct DatasetSchema {
    std::vector<std::string> feature_columns;
    std::string label_column;
    std::string label_positive_value;
    std::string timestamp_column;
    TimestampFormat timestamp_format = TimestampFormat::EpochSeconds;

    void validate() const {
        std::vector<std::string> all = feature_columns;
        all.push_back(label_column);
        all.push_back(timestamp_column);
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
            throw DataError("schema column names must be distinct");
        }
        if (feature_columns.empty()) {
            throw DataError("schema declares no feature columns");
        }
    }
};

enum class Granularity { Day, Week, Month, FixedCount };

inline const char* to_string(Granularity g) {
    switch (g) {
        case Granularity::Day: return "day";
        case Granularity::Week: return "week";
        case Granularity::Month: return "month";
        case Granularity::FixedCount: return "fixed_count";
    }
    return "?";
}

/// One contiguous time bucket. Bounds are [start, end) in epoch seconds.
struct Period {
    int index = 0;  // 1-based, contiguous
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::vector<Sample> samples;
};

struct PeriodizedDataset {
    Granularity granularity = Granularity::Day;
    std::vector<Period> periods;
};

/// Concatenates samples of periods [first, last] (1-based, inclusive).
inline std::vector<Sample> pool_samples(const PeriodizedDataset& data, int first, int last) {
    std::vector<Sample> out;
    for (int p = first; p <= last; ++p) {
        const auto& src = data.periods.at(static_cast<std::size_t>(p - 1)).samples;
        out.insert(out.end(), src.begin(), src.end());
    }
    return out;
}

inline std::pair<std::size_t, std::size_t> count_classes(std::span<const Sample> samples) {
    std::size_t pos = 0;
    for (const auto& s : samples) pos += (s.label == 1);
    return {samples.size() - pos, pos};
}

inline bool has_both_classes(std::span<const Sample> samples) {
    auto [neg, pos] = count_classes(samples);
    return neg > 0 && pos > 0;
}

}  // namespace driftbench
