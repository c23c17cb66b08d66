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
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "driftbench/common.hpp"

namespace driftbench {

class SingleClass : public Error {
  public:
    SingleClass() : Error("metric requires at least one sample of each class") {}
};

class ZeroMean : public Error {
  public:
    ZeroMean() : Error("coefficient of variation undefined for zero mean") {}
};

class ZeroVariance : public Error {
  public:
    ZeroVariance() : Error("series has zero variance") {}
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::string method;
};

enum class EffectMagnitude { Negligible, Small, Medium, Large };

inline const char* to_string(EffectMagnitude m) {
    switch (m) {
        case EffectMagnitude::Negligible: return "negligible";
        case EffectMagnitude::Small: return "small";
        case EffectMagnitude::Medium: return "medium";
        case EffectMagnitude::Large: return "large";
    }
    return "?";
}

struct EffectSize {
    double delta = 0.0;  // in [-1, 1]
    EffectMagnitude magnitude = EffectMagnitude::Negligible;
};

// Magnitude thresholds for |delta| (Romano et al. convention).
inline constexpr double kDeltaNegligibleBelow = 0.147;
inline constexpr double kDeltaSmallBelow = 0.33;
inline constexpr double kDeltaMediumBelow = 0.474;

inline EffectMagnitude magnitude_for(double delta) {
    const double a = std::fabs(delta);
    if (a < kDeltaNegligibleBelow) return EffectMagnitude::Negligible;
    if (a < kDeltaSmallBelow) return EffectMagnitude::Small;
    if (a < kDeltaMediumBelow) return EffectMagnitude::Medium;
    return EffectMagnitude::Large;
}

// ---------------------------------------------------------------------------
// Normal and chi-squared distribution helpers.

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730950488); }

inline double two_sided_normal_p(double z) {
    double p = 2.0 * (1.0 - normal_cdf(std::fabs(z)));
    return std::clamp(p, 0.0, 1.0);
}

/// Inverse standard normal CDF (Acklam's rational approximation, |eps| < 1.2e-9).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("normal_quantile requires p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw Error("regularized_gamma_p: invalid arguments");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // series expansion
        double sum = 1.0 / a;
        double term = sum;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // continued fraction for Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

/// Chi-squared quantile for (possibly fractional) degrees of freedom.
inline double chi2_quantile(double p, double dof) {
    if (!(p > 0.0 && p < 1.0) || dof <= 0.0) throw Error("chi2_quantile: invalid arguments");
    double lo = 0.0;
    double hi = std::max(dof, 1.0);
    while (regularized_gamma_p(dof / 2.0, hi / 2.0) < p) {
        hi *= 2.0;
        if (hi > 1e9) break;
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (regularized_gamma_p(dof / 2.0, mid / 2.0) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Classification metrics.

/// Rank-based AUC: fraction of (positive, negative) pairs ranked correctly,
/// ties counted as half.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error("auc: size mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) n_pos += (labels[i] == 1);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw SingleClass();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // midranks over tie groups, then the rank-sum form of the pair count
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) rank_sum_pos += midrank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

/// F1 and MCC from the confusion matrix at a threshold (predict positive when
/// score > threshold). Zero denominators yield 0 for the affected metric.
inline std::pair<double, double> f1_mcc(std::span<const double> scores,
                                        std::span<const int> labels, double threshold = 0.5) {
    if (scores.size() != labels.size() || scores.empty()) throw Error("f1_mcc: bad input");
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] > threshold;
        if (pred && labels[i] == 1) ++tp;
        else if (pred) ++fp;
        else if (labels[i] == 1) ++fn;
        else ++tn;
    }
    double f1 = 0.0;
    if (2 * tp + fp + fn > 0) f1 = 2 * tp / (2 * tp + fp + fn);
    double mcc = 0.0;
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom > 0) mcc = (tp * tn - fp * fn) / std::sqrt(denom);
    return {f1, mcc};
}

// ---------------------------------------------------------------------------
// Hypothesis tests.

/// Two-proportion Z-test with pooled variance, two-sided normal p-value.
/// Z is positive when the second group's proportion is larger.
inline TestResult two_proportion_z(std::size_t x1, std::size_t n1, std::size_t x2,
                                   std::size_t n2) {
    if (n1 == 0 || n2 == 0 || x1 > n1 || x2 > n2) throw Error("two_proportion_z: bad counts");
    const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
    const double pooled = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
    if (pooled <= 0.0 || pooled >= 1.0) {
        return {0.0, 1.0, "two-proportion-z/degenerate"};
    }
    const double se = std::sqrt(pooled * (1.0 - pooled) *
                                (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    const double z = (p2 - p1) / se;
    return {z, two_sided_normal_p(z), "two-proportion-z"};
}

namespace detail {

/// Null distribution counts of the Mann-Whitney U statistic: c[u] = number of
/// rank arrangements of group sizes (n, m) whose U equals u. Uses the
/// recurrence p(n,m,u) = p(n-1,m,u-m) + p(n,m-1,u) obtained by placing the
/// largest pooled element. Counts fit a double exactly for desk-scale n, m.
inline std::vector<double> mann_whitney_counts(std::size_t n, std::size_t m) {
    const std::size_t umax = n * m;
    // dp[j][u] for the current i
    std::vector<std::vector<double>> dp(m + 1, std::vector<double>(umax + 1, 0.0));
    for (std::size_t j = 0; j <= m; ++j) dp[j][0] = 1.0;  // i = 0
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<std::vector<double>> next(m + 1, std::vector<double>(umax + 1, 0.0));
        next[0][0] = 1.0;
        for (std::size_t j = 1; j <= m; ++j) {
            for (std::size_t u = 0; u <= i * j; ++u) {
                double v = next[j - 1][u];
                if (u >= j) v += dp[j][u - j];
                next[j][u] = v;
            }
        }
        dp.swap(next);
    }
    return dp[m];
}

}  // namespace detail

/// Mann-Whitney U test, two-sided. Exact enumeration when n*m <= 400 and the
/// pooled values are tie-free; otherwise normal approximation with tie and
/// continuity corrections. The reported statistic is U of the first sample.
inline TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error("mann_whitney_u: empty sample");
    const std::size_t n = a.size(), m = b.size();

    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n + m);
    for (double v : a) pooled.emplace_back(v, 0);
    for (double v : b) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    bool has_ties = false;
    double tie_term = 0.0;  // sum of t^3 - t over tie groups
    double rank_sum_a = 0.0;
    std::size_t i = 0;
    const std::size_t total = n + m;
    while (i < total) {
        std::size_t j = i;
        while (j < total && pooled[j].first == pooled[i].first) ++j;
        const std::size_t t = j - i;
        if (t > 1) {
            has_ties = true;
            tie_term += static_cast<double>(t) * t * t - static_cast<double>(t);
        }
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].second == 0) rank_sum_a += midrank;
        }
        i = j;
    }
    const double u_a =
        rank_sum_a - static_cast<double>(n) * (static_cast<double>(n) + 1.0) / 2.0;

    if (!has_ties && n * m <= 400) {
        const auto counts = detail::mann_whitney_counts(n, m);
        const double total_count = std::accumulate(counts.begin(), counts.end(), 0.0);
        const auto u_int = static_cast<std::size_t>(std::llround(u_a));
        double lower = 0.0, upper = 0.0;
        for (std::size_t u = 0; u < counts.size(); ++u) {
            if (u <= u_int) lower += counts[u];
            if (u >= u_int) upper += counts[u];
        }
        double p = 2.0 * std::min(lower, upper) / total_count;
        return {u_a, std::min(p, 1.0), "mann-whitney-u/exact"};
    }

    const double nm = static_cast<double>(n) * static_cast<double>(m);
    const double big_n = static_cast<double>(total);
    const double mu = nm / 2.0;
    const double var =
        nm / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if (var <= 0.0) {
        return {u_a, 1.0, "mann-whitney-u/normal"};
    }
    double diff = u_a - mu;
    if (diff > 0.5) diff -= 0.5;
    else if (diff < -0.5) diff += 0.5;
    else diff = 0.0;
    const double z = diff / std::sqrt(var);
    return {u_a, two_sided_normal_p(z), "mann-whitney-u/normal"};
}

/// Effect size between two failure rates: log odds ratio converted to Cliff's
/// delta through Cohen's d. Cells get a +0.5 correction when any count is zero.
inline EffectSize cliffs_delta_from_rates(std::size_t x1, std::size_t n1, std::size_t x2,
                                          std::size_t n2) {
    if (n1 == 0 || n2 == 0 || x1 > n1 || x2 > n2) {
        throw Error("cliffs_delta_from_rates: bad counts");
    }
    double a = static_cast<double>(x1), b = static_cast<double>(n1 - x1);
    double c = static_cast<double>(x2), d = static_cast<double>(n2 - x2);
    if (a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0) {
        a += 0.5;
        b += 0.5;
        c += 0.5;
        d += 0.5;
    }
    const double lor = std::log((c / d) / (a / b));
    const double cohen_d = lor * std::sqrt(3.0) / 3.141592653589793238;
    const double delta = 2.0 * normal_cdf(cohen_d / 1.4142135623730950488) - 1.0;
    return {delta, magnitude_for(delta)};
}

// ---------------------------------------------------------------------------
// Scott-Knott ranking.

struct RankedGroup {
    int rank = 0;  // 1 = best (highest mean)
    std::vector<std::string> treatments;
    std::vector<double> means;  // aligned with treatments
};

struct RankedGroups {
    std::vector<RankedGroup> groups;
};

namespace detail {

struct SkTreatment {
    std::string name;
    double mean = 0.0;
    std::size_t reps = 0;
    double within_ss = 0.0;  // sum of squared deviations from its own mean
};

/// Between-group sum of squares for a two-way contiguous split of means
/// [lo, hi) at position `split` (first group = [lo, split)).
inline double between_ss(const std::vector<SkTreatment>& t, std::size_t lo, std::size_t split,
                         std::size_t hi) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = lo; i < split; ++i) s1 += t[i].mean;
    for (std::size_t i = split; i < hi; ++i) s2 += t[i].mean;
    const double k1 = static_cast<double>(split - lo);
    const double k2 = static_cast<double>(hi - split);
    const double tot = s1 + s2;
    return s1 * s1 / k1 + s2 * s2 / k2 - tot * tot / (k1 + k2);
}

inline void scott_knott_recurse(const std::vector<SkTreatment>& t, std::size_t lo, std::size_t hi,
                                std::vector<std::pair<std::size_t, std::size_t>>& clusters) {
    const std::size_t k = hi - lo;
    if (k < 2) {
        clusters.emplace_back(lo, hi);
        return;
    }
    double best_b0 = -1.0;
    std::size_t best_split = lo + 1;
    for (std::size_t s = lo + 1; s < hi; ++s) {
        const double b0 = between_ss(t, lo, s, hi);
        if (b0 > best_b0) {
            best_b0 = b0;
            best_split = s;
        }
    }
    if (best_b0 < 1e-12) {
        clusters.emplace_back(lo, hi);
        return;
    }

    // pooled variance estimate for the current cluster
    double grand = 0.0;
    for (std::size_t i = lo; i < hi; ++i) grand += t[i].mean;
    grand /= static_cast<double>(k);
    double mean_ss = 0.0, within = 0.0, dof_within = 0.0, reps = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        mean_ss += (t[i].mean - grand) * (t[i].mean - grand);
        within += t[i].within_ss;
        dof_within += static_cast<double>(t[i].reps - 1);
        reps += static_cast<double>(t[i].reps);
    }
    const double avg_reps = reps / static_cast<double>(k);
    const double mse = dof_within > 0.0 ? within / dof_within : 0.0;
    const double var_of_mean = mse / avg_reps;
    const double sigma0_sq = (mean_ss + dof_within * var_of_mean) / (static_cast<double>(k) + dof_within);

    const double pi = 3.141592653589793238;
    bool significant;
    if (sigma0_sq < 1e-300) {
        significant = true;  // separated means with no residual noise
    } else {
        const double lambda = pi / (2.0 * (pi - 2.0)) * best_b0 / sigma0_sq;
        const double dof = static_cast<double>(k) / (pi - 2.0);
        significant = lambda > chi2_quantile(0.95, dof);
    }
    if (!significant) {
        clusters.emplace_back(lo, hi);
        return;
    }
    scott_knott_recurse(t, lo, best_split, clusters);
    scott_knott_recurse(t, best_split, hi, clusters);
}

}  // namespace detail

/// Clusters treatments into statistically distinct rank groups by recursive
/// binary splitting on the between-group sum of squares. Rank 1 holds the
/// highest means. Each treatment needs at least two measurements.
inline RankedGroups scott_knott(const std::map<std::string, std::vector<double>>& groups) {
    if (groups.empty()) throw Error("scott_knott: no groups");
    std::vector<detail::SkTreatment> treatments;
    treatments.reserve(groups.size());
    for (const auto& [name, values] : groups) {
        if (values.size() < 2) throw Error("scott_knott: treatment '" + name + "' has fewer than 2 measurements");
        detail::SkTreatment t;
        t.name = name;
        t.reps = values.size();
        t.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        for (double v : values) t.within_ss += (v - t.mean) * (v - t.mean);
        treatments.push_back(std::move(t));
    }
    std::sort(treatments.begin(), treatments.end(), [](const auto& a, const auto& b) {
        if (a.mean != b.mean) return a.mean > b.mean;
        return a.name < b.name;
    });

    std::vector<std::pair<std::size_t, std::size_t>> clusters;
    detail::scott_knott_recurse(treatments, 0, treatments.size(), clusters);
    std::sort(clusters.begin(), clusters.end());

    RankedGroups out;
    int rank = 1;
    for (const auto& [lo, hi] : clusters) {
        RankedGroup g;
        g.rank = rank++;
        for (std::size_t i = lo; i < hi; ++i) {
            g.treatments.push_back(treatments[i].name);
            g.means.push_back(treatments[i].mean);
        }
        out.groups.push_back(std::move(g));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time-series and cost metrics.

struct AutocorrPoint {
    int lag = 0;
    double coefficient = 0.0;
    double ci_bound = 0.0;  // 1.96 / sqrt(n)
};

/// Sample autocorrelation for lags 0..max_lag with the 95% significance bound.
inline std::vector<AutocorrPoint> autocorrelation(std::span<const double> series, int max_lag) {
    if (max_lag < 1 || series.size() <= static_cast<std::size_t>(max_lag) + 1) {
        throw Error("autocorrelation: series too short for max_lag");
    }
    const std::size_t n = series.size();
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    double denom = 0.0;
    for (double v : series) denom += (v - mean) * (v - mean);
    if (denom <= 0.0) throw ZeroVariance();
    const double ci = 1.96 / std::sqrt(static_cast<double>(n));
    std::vector<AutocorrPoint> out;
    out.reserve(static_cast<std::size_t>(max_lag) + 1);
    for (int lag = 0; lag <= max_lag; ++lag) {
        double num = 0.0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < n; ++t) {
            num += (series[t] - mean) * (series[t + static_cast<std::size_t>(lag)] - mean);
        }
        out.push_back({lag, num / denom, ci});
    }
    return out;
}

struct EcResult {
    double value = 0.0;
    bool zero_retrains = false;
};

/// Effectiveness per unit of cost: percentage AUC improvement over the
/// stationary baseline divided by the percentage of periods retrained.
inline EcResult ec_ratio(double auc_approach, double auc_stationary, std::size_t retrains,
                         std::size_t opportunities) {
    if (opportunities == 0) throw Error("ec_ratio: opportunities must be >= 1");
    if (!(auc_stationary > 0.0)) throw Error("ec_ratio: stationary AUC must be positive");
    if (retrains == 0) return {0.0, true};
    const double improvement_pct = 100.0 * (auc_approach - auc_stationary) / auc_stationary;
    const double frequency_pct =
        100.0 * static_cast<double>(retrains) / static_cast<double>(opportunities);
    return {improvement_pct / frequency_pct, false};
}

/// Coefficient of variation: sample standard deviation over mean.
inline double cv(std::span<const double> values) {
    if (values.size() < 2) throw Error("cv: need at least 2 values");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (std::fabs(mean) < 1e-300) throw ZeroMean();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0)) / mean;
}

inline constexpr double kDefaultHourlyRate = 0.504;  // USD per compute hour

inline double dollar_cost(double seconds, double hourly_rate) {
    return seconds / 3600.0 * hourly_rate;
}

}  // namespace driftbench
