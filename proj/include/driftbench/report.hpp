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
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "driftbench/archive.hpp"
#include "driftbench/csv.hpp"
#include "driftbench/stats.hpp"

namespace driftbench {

class MissingBaseline : public Error {
  public:
    explicit MissingBaseline(const std::string& name)
        : Error("baseline policy not found in archive: " + name) {}
};

class InsufficientRepetitions : public Error {
  public:
    explicit InsufficientRepetitions(const std::string& policy)
        : Error("policy '" + policy + "' has fewer than 2 usable repetitions") {}
};

enum class RankMetric { Auc, F1, Mcc, Cv, Ec };

inline RankMetric parse_metric(const std::string& s) {
    if (s == "auc") return RankMetric::Auc;
    if (s == "f1") return RankMetric::F1;
    if (s == "mcc") return RankMetric::Mcc;
    if (s == "cv") return RankMetric::Cv;
    if (s == "ec") return RankMetric::Ec;
    throw DataError("unknown metric: " + s + " (expected auc|f1|mcc|cv|ec)");
}

namespace detail {

inline double nan_mean(const std::vector<double>& v) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double x : v) {
        if (!std::isnan(x)) {
            sum += x;
            ++n;
        }
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

/// Per-repetition coefficient of variation of the per-period AUC.
inline double run_cv(const RunResult& run) {
    std::vector<double> aucs;
    for (const auto& r : run.records) {
        if (!std::isnan(r.auc)) aucs.push_back(r.auc);
    }
    if (aucs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    try {
        return cv(aucs);
    } catch (const ZeroMean&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace detail

struct PolicySummary {
    std::string name;
    std::size_t runs = 0;     // successful repetitions
    std::size_t failed = 0;
    double mean_overall_auc = std::numeric_limits<double>::quiet_NaN();
    double mean_overall_f1 = std::numeric_limits<double>::quiet_NaN();
    double mean_overall_mcc = std::numeric_limits<double>::quiet_NaN();
    double mean_retrains = 0.0;
    std::size_t opportunities = 0;  // update opportunities per repetition
    double improvement_pct = std::numeric_limits<double>::quiet_NaN();
    double ec = std::numeric_limits<double>::quiet_NaN();
    bool ec_flagged = false;
    double mean_cv = std::numeric_limits<double>::quiet_NaN();
    double mean_train_s = 0.0;
    double mean_test_s = 0.0;
    double train_cost_usd = 0.0;
    double test_cost_usd = 0.0;
};

/// Aggregates an archive into one row per policy. All derived columns are
/// recomputed from the per-run records; improvement and EC appear only when
/// `baseline_name` names a policy in the archive.
inline std::vector<PolicySummary> summarize_archive(const ResultArchive& archive,
                                                    const std::string& baseline_name = "") {
    double baseline_auc = std::numeric_limits<double>::quiet_NaN();
    if (!baseline_name.empty()) {
        bool found = false;
        for (const auto& pr : archive.results) {
            if (pr.policy_name != baseline_name) continue;
            found = true;
            std::vector<double> aucs;
            for (const auto& run : pr.runs) {
                if (!run.failed) aucs.push_back(run.result.overall_auc);
            }
            baseline_auc = detail::nan_mean(aucs);
        }
        if (!found) throw MissingBaseline(baseline_name);
    }

    std::vector<PolicySummary> out;
    for (const auto& pr : archive.results) {
        PolicySummary s;
        s.name = pr.policy_name;
        std::vector<double> aucs, f1s, mccs, cvs;
        double retrains = 0.0, train_s = 0.0, test_s = 0.0;
        for (const auto& run : pr.runs) {
            if (run.failed) {
                ++s.failed;
                continue;
            }
            ++s.runs;
            aucs.push_back(run.result.overall_auc);
            f1s.push_back(run.result.overall_f1);
            mccs.push_back(run.result.overall_mcc);
            cvs.push_back(detail::run_cv(run.result));
            retrains += static_cast<double>(run.result.retrain_count());
            train_s += run.result.total_train_time_s;
            test_s += run.result.total_test_time_s;
            s.opportunities = run.result.records.size();
        }
        if (s.runs > 0) {
            const double n = static_cast<double>(s.runs);
            s.mean_overall_auc = detail::nan_mean(aucs);
            s.mean_overall_f1 = detail::nan_mean(f1s);
            s.mean_overall_mcc = detail::nan_mean(mccs);
            s.mean_cv = detail::nan_mean(cvs);
            s.mean_retrains = retrains / n;
            s.mean_train_s = train_s / n;
            s.mean_test_s = test_s / n;
            s.train_cost_usd = dollar_cost(s.mean_train_s, archive.config.hourly_rate);
            s.test_cost_usd = dollar_cost(s.mean_test_s, archive.config.hourly_rate);
            if (!baseline_name.empty() && !std::isnan(baseline_auc) && baseline_auc > 0.0 &&
                s.opportunities > 0) {
                s.improvement_pct = 100.0 * (s.mean_overall_auc - baseline_auc) / baseline_auc;
                const auto mean_retrains_rounded =
                    static_cast<std::size_t>(std::llround(s.mean_retrains));
                const auto ec = ec_ratio(s.mean_overall_auc, baseline_auc, mean_retrains_rounded,
                                         s.opportunities);
                s.ec = ec.value;
                s.ec_flagged = ec.zero_retrains;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline void write_summary_csv(const std::string& path, const std::vector<PolicySummary>& rows) {
    CsvWriter w(path);
    w.cell(std::string("policy")).cell(std::string("runs")).cell(std::string("failed"));
    w.cell(std::string("overall_auc")).cell(std::string("overall_f1")).cell(std::string("overall_mcc"));
    w.cell(std::string("improvement_pct")).cell(std::string("retrains")).cell(std::string("opportunities"));
    w.cell(std::string("ec")).cell(std::string("ec_flagged")).cell(std::string("cv"));
    w.cell(std::string("train_s")).cell(std::string("test_s"));
    w.cell(std::string("train_cost_usd")).cell(std::string("test_cost_usd"));
    w.end_row();
    for (const auto& r : rows) {
        w.cell(r.name).cell(r.runs).cell(r.failed);
        w.cell(r.mean_overall_auc).cell(r.mean_overall_f1).cell(r.mean_overall_mcc);
        w.cell(r.improvement_pct).cell(r.mean_retrains).cell(r.opportunities);
        w.cell(r.ec).cell(std::string(r.ec_flagged ? "yes" : "no")).cell(r.mean_cv);
        w.cell(r.mean_train_s).cell(r.mean_test_s);
        w.cell(r.train_cost_usd).cell(r.test_cost_usd);
        w.end_row();
    }
}

inline void print_summary_table(std::ostream& os, const std::vector<PolicySummary>& rows) {
    os << std::left << std::setw(24) << "policy" << std::right << std::setw(8) << "runs"
       << std::setw(10) << "auc" << std::setw(10) << "f1" << std::setw(12) << "improve%"
       << std::setw(10) << "retrains" << std::setw(10) << "ec" << std::setw(10) << "cv"
       << std::setw(11) << "train_s" << std::setw(10) << "test_s" << std::setw(11) << "cost_usd"
       << '\n';
    auto num = [](double v, int prec = 4) {
        if (std::isnan(v)) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        os << std::left << std::setw(24) << r.name << std::right << std::setw(8) << r.runs
           << std::setw(10) << num(r.mean_overall_auc) << std::setw(10) << num(r.mean_overall_f1)
           << std::setw(12) << num(r.improvement_pct, 2) << std::setw(10)
           << num(r.mean_retrains, 1) << std::setw(10)
           << (r.ec_flagged ? num(0.0, 2) + "*" : num(r.ec, 3)) << std::setw(10) << num(r.mean_cv)
           << std::setw(11) << num(r.mean_train_s, 3) << std::setw(10) << num(r.mean_test_s, 3)
           << std::setw(11) << num(r.train_cost_usd + r.test_cost_usd, 6) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Per-period retrain/effect matrix.

struct PeriodCell {
    int period_index = 0;
    double retrained_fraction = 0.0;
    double p_value = std::numeric_limits<double>::quiet_NaN();
    std::string symbol = "-";  // one of ^ (up), - (flat), v (down)
};

struct PolicyPeriodRow {
    std::string policy;
    std::vector<PeriodCell> cells;
};

/// For each policy and evaluation period: how often it retrained there, and
/// whether its per-repetition AUC differs significantly from the baseline's
/// at the same period (Mann-Whitney, p < 0.05; direction by medians).
inline std::vector<PolicyPeriodRow> period_effect_matrix(const ResultArchive& archive,
                                                         const std::string& baseline_name) {
    std::map<int, std::vector<double>> baseline_aucs;
    bool baseline_found = false;
    for (const auto& pr : archive.results) {
        if (pr.policy_name != baseline_name) continue;
        baseline_found = true;
        for (const auto& run : pr.runs) {
            if (run.failed) continue;
            for (const auto& rec : run.result.records) {
                if (!std::isnan(rec.auc)) baseline_aucs[rec.period_index].push_back(rec.auc);
            }
        }
    }
    if (!baseline_name.empty() && !baseline_found) throw MissingBaseline(baseline_name);

    std::vector<PolicyPeriodRow> rows;
    for (const auto& pr : archive.results) {
        PolicyPeriodRow row;
        row.policy = pr.policy_name;
        std::map<int, std::vector<double>> aucs;
        std::map<int, std::pair<std::size_t, std::size_t>> retrained;  // (retrains, runs)
        for (const auto& run : pr.runs) {
            if (run.failed) continue;
            for (const auto& rec : run.result.records) {
                auto& [r, n] = retrained[rec.period_index];
                r += rec.retrained ? 1 : 0;
                ++n;
                if (!std::isnan(rec.auc)) aucs[rec.period_index].push_back(rec.auc);
            }
        }
        for (const auto& [period, counts] : retrained) {
            PeriodCell cell;
            cell.period_index = period;
            cell.retrained_fraction =
                counts.second == 0
                    ? 0.0
                    : static_cast<double>(counts.first) / static_cast<double>(counts.second);
            const auto it = baseline_aucs.find(period);
            const auto own = aucs.find(period);
            if (it != baseline_aucs.end() && own != aucs.end() && it->second.size() >= 2 &&
                own->second.size() >= 2) {
                const auto test = mann_whitney_u(own->second, it->second);
                cell.p_value = test.p_value;
                if (test.p_value < 0.05) {
                    auto median = [](std::vector<double> v) {
                        std::sort(v.begin(), v.end());
                        const std::size_t n = v.size();
                        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
                    };
                    cell.symbol = median(own->second) > median(it->second) ? "^" : "v";
                }
            }
            row.cells.push_back(std::move(cell));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_period_matrix_csv(const std::string& path,
                                    const std::vector<PolicyPeriodRow>& rows) {
    CsvWriter w(path);
    w.cell(std::string("policy")).cell(std::string("period"));
    w.cell(std::string("retrained_fraction")).cell(std::string("change_p_value")).cell(std::string("change"));
    w.end_row();
    for (const auto& row : rows) {
        for (const auto& c : row.cells) {
            w.cell(row.policy).cell(c.period_index);
            w.cell(c.retrained_fraction).cell(c.p_value).cell(c.symbol);
            w.end_row();
        }
    }
}

inline void print_period_matrix(std::ostream& os, const std::vector<PolicyPeriodRow>& rows) {
    if (rows.empty()) return;
    os << std::left << std::setw(24) << "policy";
    for (const auto& c : rows.front().cells) os << std::setw(5) << c.period_index;
    os << '\n';
    for (const auto& row : rows) {
        os << std::left << std::setw(24) << row.policy;
        for (const auto& c : row.cells) {
            std::string mark = c.symbol;
            if (c.retrained_fraction > 0.5) mark += "R";
            os << std::setw(5) << mark;
        }
        os << '\n';
    }
    os << "(R = retrained in over half the repetitions; ^ / v = significantly higher/lower AUC "
          "than the baseline at that period)\n";
}

/// Writes summary.csv and period_matrix.csv under out_dir and prints both
/// tables. Improvement/EC columns require the named baseline policy.
inline std::vector<PolicySummary> cmd_report(const ResultArchive& archive,
                                             const std::string& baseline_name,
                                             const std::string& out_dir, std::ostream& os) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto rows = summarize_archive(archive, baseline_name);
    write_summary_csv((fs::path(out_dir) / "summary.csv").string(), rows);
    print_summary_table(os, rows);
    const auto matrix = period_effect_matrix(archive, baseline_name);
    write_period_matrix_csv((fs::path(out_dir) / "period_matrix.csv").string(), matrix);
    os << '\n';
    print_period_matrix(os, matrix);
    return rows;
}

// ---------------------------------------------------------------------------
// Scott-Knott ranking across archives.

/// Collects one measurement per repetition for each policy. For `cv` smaller
/// is better, so values are negated before ranking (reported means keep the
/// original sign). `ec` needs the baseline policy inside the same archive.
inline std::map<std::string, std::vector<double>> rank_measurements(
    const std::vector<ResultArchive>& archives, RankMetric metric,
    const std::string& baseline_name = "") {
    std::map<std::string, std::vector<double>> out;
    for (const auto& archive : archives) {
        std::map<std::size_t, double> baseline_by_rep;
        if (metric == RankMetric::Ec) {
            if (baseline_name.empty()) {
                throw DataError("metric 'ec' requires a baseline policy name");
            }
            bool found = false;
            for (const auto& pr : archive.results) {
                if (pr.policy_name != baseline_name) continue;
                found = true;
                for (std::size_t r = 0; r < pr.runs.size(); ++r) {
                    if (!pr.runs[r].failed) {
                        baseline_by_rep[r] = pr.runs[r].result.overall_auc;
                    }
                }
            }
            if (!found) throw MissingBaseline(baseline_name);
        }
        for (const auto& pr : archive.results) {
            auto& values = out[pr.policy_name];
            for (std::size_t r = 0; r < pr.runs.size(); ++r) {
                const auto& run = pr.runs[r];
                if (run.failed) continue;
                double v = std::numeric_limits<double>::quiet_NaN();
                switch (metric) {
                    case RankMetric::Auc: v = run.result.overall_auc; break;
                    case RankMetric::F1: v = run.result.overall_f1; break;
                    case RankMetric::Mcc: v = run.result.overall_mcc; break;
                    case RankMetric::Cv: v = -detail::run_cv(run.result); break;
                    case RankMetric::Ec: {
                        const auto it = baseline_by_rep.find(r);
                        if (it == baseline_by_rep.end() || std::isnan(it->second) ||
                            it->second <= 0.0 || run.result.records.empty()) {
                            break;
                        }
                        v = ec_ratio(run.result.overall_auc, it->second,
                                     run.result.retrain_count(), run.result.records.size())
                                .value;
                        break;
                    }
                }
                if (!std::isnan(v)) values.push_back(v);
            }
        }
    }
    return out;
}

/// Ranks policies over per-repetition measurements; writes rank.csv.
inline RankedGroups cmd_rank(const std::vector<ResultArchive>& archives, RankMetric metric,
                             const std::string& out_dir, std::ostream& os,
                             const std::string& baseline_name = "") {
    const auto measurements = rank_measurements(archives, metric, baseline_name);
    for (const auto& [name, values] : measurements) {
        if (values.size() < 2) throw InsufficientRepetitions(name);
    }
    auto ranked = scott_knott(measurements);
    const bool negated = metric == RankMetric::Cv;
    if (negated) {
        for (auto& g : ranked.groups) {
            for (auto& m : g.means) m = -m;
        }
    }

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    CsvWriter w((fs::path(out_dir) / "rank.csv").string());
    w.cell(std::string("rank")).cell(std::string("policy")).cell(std::string("mean"));
    w.end_row();
    for (const auto& g : ranked.groups) {
        for (std::size_t i = 0; i < g.treatments.size(); ++i) {
            w.cell(g.rank).cell(g.treatments[i]).cell(g.means[i]);
            w.end_row();
        }
    }
    for (const auto& g : ranked.groups) {
        os << "rank " << g.rank << ":";
        for (std::size_t i = 0; i < g.treatments.size(); ++i) {
            os << "  " << g.treatments[i] << " (" << g.means[i] << ")";
        }
        os << '\n';
    }
    return ranked;
}

}  // namespace driftbench
