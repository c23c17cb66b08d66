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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "driftbench/common.hpp"

namespace driftbench {

class EmptyDataset : public DataError {
  public:
    EmptyDataset() : DataError("dataset contains no samples") {}
};

class ZeroSpan : public DataError {
  public:
    ZeroSpan() : DataError("all timestamps identical; cannot split into fixed-count periods") {}
};

namespace timeutil {

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Floor division, correct for negative timestamps.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline std::int64_t day_index(std::int64_t ts) { return floor_div(ts, kSecondsPerDay); }

/// Index of the Monday-start UTC week containing the timestamp.
/// Day 0 (1970-01-01) was a Thursday, so Monday weeks align at day -3.
inline std::int64_t week_index(std::int64_t ts) { return floor_div(day_index(ts) + 3, 7); }

/// Months since 1970-01 of the UTC month containing the timestamp.
inline std::int64_t month_index(std::int64_t ts) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{day_index(ts)}}};
    return (static_cast<std::int64_t>(static_cast<int>(ymd.year())) - 1970) * 12 +
           static_cast<std::int64_t>(static_cast<unsigned>(ymd.month())) - 1;
}

inline std::int64_t day_start(std::int64_t index) { return index * kSecondsPerDay; }

inline std::int64_t week_start(std::int64_t index) { return (index * 7 - 3) * kSecondsPerDay; }

inline std::int64_t month_start(std::int64_t index) {
    using namespace std::chrono;
    const int y = static_cast<int>(1970 + floor_div(index, 12));
    const unsigned m = static_cast<unsigned>(index - floor_div(index, 12) * 12) + 1;
    const sys_days sd{year{y} / month{m} / day{1}};
    return static_cast<std::int64_t>(sd.time_since_epoch().count()) * kSecondsPerDay;
}

/// Epoch seconds for a UTC civil datetime.
inline std::int64_t civil_to_epoch(int y, unsigned mo, unsigned d, int h = 0, int mi = 0,
                                   int s = 0) {
    using namespace std::chrono;
    const sys_days sd{year{y} / month{mo} / day{d}};
    return static_cast<std::int64_t>(sd.time_since_epoch().count()) * kSecondsPerDay +
           h * 3600 + mi * 60 + s;
}

}  // namespace timeutil

/// Splits samples into ordered, contiguous time periods. Calendar
/// granularities use UTC day / Monday-start week / month boundaries and keep
/// empty periods so indices stay contiguous. FixedCount splits the inclusive
/// timestamp span into equal-width intervals.
inline PeriodizedDataset partition_periods(std::span<const Sample> samples,
                                           Granularity granularity,
                                           std::optional<int> n_periods_hint = std::nullopt) {
    if (samples.empty()) throw EmptyDataset();

    std::int64_t ts_min = samples.front().timestamp;
    std::int64_t ts_max = ts_min;
    for (const auto& s : samples) {
        ts_min = std::min(ts_min, s.timestamp);
        ts_max = std::max(ts_max, s.timestamp);
    }

    PeriodizedDataset out;
    out.granularity = granularity;

    if (granularity == Granularity::FixedCount) {
        if (!n_periods_hint || *n_periods_hint < 1) {
            throw DataError("fixed_count partitioning requires a positive period count");
        }
        if (ts_min == ts_max) throw ZeroSpan();
        const std::int64_t n = *n_periods_hint;
        const std::int64_t span = ts_max - ts_min + 1;  // inclusive width in seconds
        if (span < n) {
            throw DataError("timestamp span shorter than requested period count");
        }
        out.periods.resize(static_cast<std::size_t>(n));
        for (std::int64_t j = 0; j < n; ++j) {
            auto& p = out.periods[static_cast<std::size_t>(j)];
            p.index = static_cast<int>(j + 1);
            // smallest/largest timestamps mapping to bucket j
            p.start = ts_min + (j * span + n - 1) / n;
            p.end = ts_min + ((j + 1) * span + n - 1) / n;
        }
        for (const auto& s : samples) {
            const std::int64_t off = s.timestamp - ts_min;
            auto bucket = static_cast<std::size_t>(std::min<std::int64_t>(off * n / span, n - 1));
            out.periods[bucket].samples.push_back(s);
        }
        return out;
    }

    auto index_of = [granularity](std::int64_t ts) {
        switch (granularity) {
            case Granularity::Day: return timeutil::day_index(ts);
            case Granularity::Week: return timeutil::week_index(ts);
            default: return timeutil::month_index(ts);
        }
    };
    auto start_of = [granularity](std::int64_t idx) {
        switch (granularity) {
            case Granularity::Day: return timeutil::day_start(idx);
            case Granularity::Week: return timeutil::week_start(idx);
            default: return timeutil::month_start(idx);
        }
    };

    const std::int64_t first = index_of(ts_min);
    const std::int64_t last = index_of(ts_max);
    out.periods.resize(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t idx = first; idx <= last; ++idx) {
        auto& p = out.periods[static_cast<std::size_t>(idx - first)];
        p.index = static_cast<int>(idx - first + 1);
        p.start = start_of(idx);
        p.end = start_of(idx + 1);
    }
    for (const auto& s : samples) {
        out.periods[static_cast<std::size_t>(index_of(s.timestamp) - first)].samples.push_back(s);
    }
    return out;
}

}  // namespace driftbench
