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
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "driftbench/csv.hpp"
#include "driftbench/stats.hpp"
#include "driftbench/svg.hpp"

namespace driftbench {

struct PeriodStats {
    int index = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::size_t count = 0;
    std::size_t positives = 0;
    double positive_rate = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<PeriodStats> compute_period_stats(const PeriodizedDataset& data) {
    std::vector<PeriodStats> out;
    out.reserve(data.periods.size());
    for (const auto& p : data.periods) {
        PeriodStats st;
        st.index = p.index;
        st.start = p.start;
        st.end = p.end;
        st.count = p.samples.size();
        auto [neg, pos] = count_classes(p.samples);
        (void)neg;
        st.positives = pos;
        if (!p.samples.empty()) {
            st.positive_rate = static_cast<double>(pos) / static_cast<double>(p.samples.size());
        }
        out.push_back(st);
    }
    return out;
}

/// Pairwise comparison of the positive rate between every two periods:
/// two-proportion Z-test p-values and the derived effect sizes.
struct RateComparison {
    std::vector<std::vector<double>> p_values;   // NaN on the diagonal / empty periods
    std::vector<std::vector<double>> deltas;
    std::vector<std::vector<std::string>> magnitudes;
};

inline RateComparison compare_period_rates(const std::vector<PeriodStats>& stats) {
    const std::size_t n = stats.size();
    RateComparison cmp;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    cmp.p_values.assign(n, std::vector<double>(n, nan));
    cmp.deltas.assign(n, std::vector<double>(n, nan));
    cmp.magnitudes.assign(n, std::vector<std::string>(n, ""));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || stats[i].count == 0 || stats[j].count == 0) continue;
            const auto test = two_proportion_z(stats[i].positives, stats[i].count,
                                               stats[j].positives, stats[j].count);
            const auto effect = cliffs_delta_from_rates(stats[i].positives, stats[i].count,
                                                        stats[j].positives, stats[j].count);
            cmp.p_values[i][j] = test.p_value;
            cmp.deltas[i][j] = effect.delta;
            cmp.magnitudes[i][j] = to_string(effect.magnitude);
        }
    }
    return cmp;
}

struct FeatureShift {
    std::string feature;
    std::size_t significant_pairs = 0;
    std::size_t tested_pairs = 0;
};

/// Counts, per feature, how many period pairs differ significantly in that
/// feature's value distribution (Mann-Whitney, p < 0.05).
inline std::vector<FeatureShift> feature_shift_counts(const PeriodizedDataset& data,
                                                      const std::vector<std::string>& names) {
    const std::size_t n = data.periods.size();
    const std::size_t d =
        data.periods.empty() || data.periods.front().samples.empty()
            ? names.size()
            : data.periods.front().samples.front().features.size();
    std::vector<FeatureShift> out(d);
    for (std::size_t f = 0; f < d; ++f) {
        out[f].feature = f < names.size() ? names[f] : "f" + std::to_string(f + 1);
    }

    std::vector<std::vector<std::vector<double>>> columns(n);
    for (std::size_t p = 0; p < n; ++p) {
        columns[p].assign(d, {});
        for (const auto& s : data.periods[p].samples) {
            for (std::size_t f = 0; f < d; ++f) columns[p][f].push_back(s.features[f]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (columns[i].empty() || columns[j].empty()) continue;
            for (std::size_t f = 0; f < d; ++f) {
                if (columns[i][f].empty() || columns[j][f].empty()) continue;
                const auto test = mann_whitney_u(columns[i][f], columns[j][f]);
                ++out[f].tested_pairs;
                if (test.p_value < 0.05) ++out[f].significant_pairs;
            }
        }
    }
    return out;
}

struct AnalyzeOptions {
    bool svg = false;
    int max_lag = 0;  // 0 = choose from the period count
    std::vector<std::string> feature_names;
};

namespace detail {

inline void write_matrix_csv(const std::string& path, const std::string& cell_name,
                             const std::vector<std::vector<double>>& m) {
    CsvWriter w(path);
    w.cell(std::string("period"));
    for (std::size_t j = 0; j < m.size(); ++j) w.cell(static_cast<std::int64_t>(j + 1));
    w.end_row();
    (void)cell_name;
    for (std::size_t i = 0; i < m.size(); ++i) {
        w.cell(static_cast<std::int64_t>(i + 1));
        for (std::size_t j = 0; j < m[i].size(); ++j) w.cell(m[i][j]);
        w.end_row();
    }
}

}  // namespace detail

/// Emits the dataset evolution report: per-period volume and positive rate,
/// pairwise rate tests and effect sizes, per-feature distribution-shift
/// counts, autocorrelation of the volume and rate series, optional charts.
inline void cmd_analyze(const PeriodizedDataset& data, const std::string& out_dir,
                        const AnalyzeOptions& options = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    const auto stats = compute_period_stats(data);
    {
        CsvWriter w(path("period_stats.csv"));
        w.cell(std::string("period")).cell(std::string("start")).cell(std::string("end"));
        w.cell(std::string("samples")).cell(std::string("positives")).cell(std::string("positive_rate"));
        w.end_row();
        for (const auto& st : stats) {
            w.cell(st.index).cell(st.start).cell(st.end);
            w.cell(st.count).cell(st.positives).cell(st.positive_rate);
            w.end_row();
        }
    }

    const auto cmp = compare_period_rates(stats);
    detail::write_matrix_csv(path("rate_test_pvalues.csv"), "p", cmp.p_values);
    detail::write_matrix_csv(path("rate_effect_delta.csv"), "delta", cmp.deltas);
    {
        CsvWriter w(path("rate_effect_magnitude.csv"));
        w.cell(std::string("period"));
        for (std::size_t j = 0; j < cmp.magnitudes.size(); ++j) w.cell(static_cast<std::int64_t>(j + 1));
        w.end_row();
        for (std::size_t i = 0; i < cmp.magnitudes.size(); ++i) {
            w.cell(static_cast<std::int64_t>(i + 1));
            for (const auto& m : cmp.magnitudes[i]) w.cell(m);
            w.end_row();
        }
    }

    {
        const auto shifts = feature_shift_counts(data, options.feature_names);
        CsvWriter w(path("feature_shift_counts.csv"));
        w.cell(std::string("feature")).cell(std::string("significant_pairs")).cell(std::string("tested_pairs"));
        w.end_row();
        for (const auto& s : shifts) {
            w.cell(s.feature).cell(s.significant_pairs).cell(s.tested_pairs);
            w.end_row();
        }
    }

    {
        CsvWriter w(path("autocorrelation.csv"));
        w.cell(std::string("series")).cell(std::string("lag")).cell(std::string("coefficient")).cell(std::string("ci_bound"));
        w.end_row();
        const int n = static_cast<int>(stats.size());
        const int max_lag = options.max_lag > 0 ? options.max_lag : std::min(n - 2, 20);
        std::vector<double> counts, rates;
        for (const auto& st : stats) {
            counts.push_back(static_cast<double>(st.count));
            rates.push_back(std::isnan(st.positive_rate) ? 0.0 : st.positive_rate);
        }
        auto emit = [&](const char* name, const std::vector<double>& series) {
            if (max_lag < 1 || static_cast<int>(series.size()) <= max_lag + 1) return;
            try {
                for (const auto& pt : autocorrelation(series, max_lag)) {
                    w.cell(std::string(name)).cell(pt.lag).cell(pt.coefficient).cell(pt.ci_bound);
                    w.end_row();
                }
            } catch (const ZeroVariance&) {
                // constant series carries no lag structure; leave it out
            }
            if (options.svg) {
                std::vector<SvgSeries> sv{{name, {}}};
                std::vector<double> guides;
                try {
                    const auto pts = autocorrelation(series, max_lag);
                    for (const auto& pt : pts) sv[0].values.push_back(pt.coefficient);
                    guides = {pts[0].ci_bound, -pts[0].ci_bound, 0.0};
                    write_line_chart((fs::path(out_dir) / (std::string("autocorrelation_") + name + ".svg")).string(),
                                     std::string("autocorrelation: ") + name, sv, guides);
                } catch (const ZeroVariance&) {
                }
            }
        };
        emit("sample_count", counts);
        emit("positive_rate", rates);
    }

    if (options.svg) {
        std::vector<double> counts, rates;
        for (const auto& st : stats) {
            counts.push_back(static_cast<double>(st.count));
            rates.push_back(st.positive_rate);
        }
        write_line_chart(path("sample_count.svg"), "samples per period", {{"samples", counts}});
        write_line_chart(path("positive_rate.svg"), "positive rate per period",
                         {{"positive rate", rates}});
        write_heatmap(path("rate_pvalue_heatmap.svg"), "rate difference significance (1 - p)",
                      [&] {
                          auto m = cmp.p_values;
                          for (auto& row : m) {
                              for (auto& v : row) {
                                  if (!std::isnan(v)) v = 1.0 - v;
                              }
                          }
                          return m;
                      }(),
                      0.0, 1.0);
    }
}

}  // namespace driftbench
