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
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "driftbench/rng.hpp"
#include "driftbench/stats.hpp"

using namespace driftbench;

namespace {

// Independent pairwise-counting oracle for AUC.
double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

// Independent two-proportion Z (long double, different algebraic arrangement).
long double z_oracle(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2) {
    const long double p1 = static_cast<long double>(x1) / n1;
    const long double p2 = static_cast<long double>(x2) / n2;
    const long double p = static_cast<long double>(x1 + x2) / (n1 + n2);
    const long double se = sqrtl(p * (1.0L - p) / n1 + p * (1.0L - p) / n2);
    return (p2 - p1) / se;
}

// Normal-approximation Mann-Whitney p-value with continuity correction,
// written independently of the library path.
double mw_normal_approx_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<std::pair<double, int>> pooled;
    for (double v : a) pooled.emplace_back(v, 0);
    for (double v : b) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end());
    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        if (pooled[i].second == 0) rank_sum_a += static_cast<double>(i + 1);
    }
    const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
    const double u = rank_sum_a - n * (n + 1.0) / 2.0;
    const double mu = n * m / 2.0;
    const double sigma = std::sqrt(n * m * (n + m + 1.0) / 12.0);
    double diff = std::fabs(u - mu) - 0.5;
    if (diff < 0.0) diff = 0.0;
    const double z = diff / sigma;
    return std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
}

}  // namespace

TEST_CASE("auc basics") {
    SECTION("perfect separation") {
        std::vector<double> s{0.9, 0.8, 0.3, 0.2};
        std::vector<int> l{1, 1, 0, 0};
        CHECK(auc(s, l) == 1.0);
    }
    SECTION("mixed ranking") {
        std::vector<double> s{0.9, 0.7, 0.6, 0.2};
        std::vector<int> l{1, 0, 1, 0};
        CHECK(auc(s, l) == Catch::Approx(0.75).margin(1e-12));
    }
    SECTION("all ties") {
        std::vector<double> s{0.5, 0.5, 0.5, 0.5};
        std::vector<int> l{1, 0, 1, 0};
        CHECK(auc(s, l) == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("single class throws") {
        std::vector<double> s{0.5, 0.6};
        std::vector<int> l{1, 1};
        CHECK_THROWS_AS(auc(s, l), SingleClass);
    }
}

TEST_CASE("auc agrees with the pairwise-count oracle") {
    Rng rng(20240501);
    for (int it = 0; it < 50; ++it) {
        const auto n_pos = static_cast<std::size_t>(rng.uniform_int(1, 50));
        const auto n_neg = static_cast<std::size_t>(rng.uniform_int(1, 50));
        std::vector<double> scores;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n_pos; ++i) {
            scores.push_back(rng.uniform_int(0, 20) / 20.0);  // force ties
            labels.push_back(1);
        }
        for (std::size_t i = 0; i < n_neg; ++i) {
            scores.push_back(rng.uniform_int(0, 20) / 20.0);
            labels.push_back(0);
        }
        REQUIRE(auc(scores, labels) ==
                Catch::Approx(brute_force_auc(scores, labels)).margin(1e-12));
    }
}

TEST_CASE("auc complements under label flip when tie-free") {
    Rng rng(7);
    std::vector<double> scores;
    std::vector<int> labels, flipped;
    for (int i = 0; i < 40; ++i) {
        scores.push_back(rng.next_double());
        labels.push_back(i % 3 == 0 ? 1 : 0);
        flipped.push_back(1 - labels.back());
    }
    CHECK(auc(scores, labels) + auc(scores, flipped) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("f1 and mcc from the confusion matrix") {
    SECTION("perfect predictions") {
        std::vector<double> s{0.9, 0.9, 0.1, 0.1};
        std::vector<int> l{1, 1, 0, 0};
        auto [f1, mcc] = f1_mcc(s, l);
        CHECK(f1 == 1.0);
        CHECK(mcc == 1.0);
    }
    SECTION("everything predicted negative") {
        std::vector<double> s{0.1, 0.2, 0.3};
        std::vector<int> l{1, 0, 1};
        auto [f1, mcc] = f1_mcc(s, l);
        CHECK(f1 == 0.0);
    }
    SECTION("hand confusion matrix: TP=2 FP=1 FN=1 TN=6") {
        std::vector<double> s{0.9, 0.8, 0.1, 0.7, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2};
        std::vector<int> l{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
        auto [f1, mcc] = f1_mcc(s, l);
        CHECK(f1 == Catch::Approx(2.0 / 3.0).margin(1e-12));
        const double oracle_mcc = (2.0 * 6 - 1.0 * 1) / std::sqrt(3.0 * 3.0 * 7.0 * 7.0);
        CHECK(mcc == Catch::Approx(oracle_mcc).margin(1e-12));
    }
}

TEST_CASE("two-proportion z-test") {
    SECTION("worked example") {
        const auto t = two_proportion_z(10, 200, 30, 100);
        CHECK(t.statistic == Catch::Approx(6.005).margin(1e-3));
        CHECK(t.p_value < 1e-8);
    }
    SECTION("equal proportions") {
        const auto t = two_proportion_z(20, 100, 40, 200);
        CHECK(t.statistic == Catch::Approx(0.0).margin(1e-12));
        CHECK(t.p_value == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("antisymmetric under group swap") {
        const auto t1 = two_proportion_z(17, 120, 33, 90);
        const auto t2 = two_proportion_z(33, 90, 17, 120);
        CHECK(t1.statistic == Catch::Approx(-t2.statistic).margin(1e-12));
        CHECK(t1.p_value == Catch::Approx(t2.p_value).margin(1e-12));
    }
    SECTION("degenerate pooled proportion") {
        const auto t = two_proportion_z(0, 50, 0, 70);
        CHECK(t.statistic == 0.0);
        CHECK(t.p_value == 1.0);
        CHECK(t.method.find("degenerate") != std::string::npos);
    }
    SECTION("matches the independent oracle on random counts") {
        Rng rng(99);
        for (int it = 0; it < 100; ++it) {
            const auto n1 = static_cast<std::size_t>(rng.uniform_int(2, 500));
            const auto n2 = static_cast<std::size_t>(rng.uniform_int(2, 500));
            const auto x1 = static_cast<std::size_t>(rng.uniform_int(1, static_cast<int>(n1) - 1));
            const auto x2 = static_cast<std::size_t>(rng.uniform_int(1, static_cast<int>(n2) - 1));
            const auto t = two_proportion_z(x1, n1, x2, n2);
            REQUIRE(t.statistic ==
                    Catch::Approx(static_cast<double>(z_oracle(x1, n1, x2, n2))).margin(1e-9));
        }
    }
}

TEST_CASE("mann-whitney u") {
    SECTION("exact enumeration of fully separated triples") {
        std::vector<double> a{1, 2, 3}, b{4, 5, 6};
        const auto t = mann_whitney_u(a, b);
        CHECK(t.statistic == 0.0);
        CHECK(t.p_value == Catch::Approx(0.1).margin(1e-12));
        CHECK(t.method == "mann-whitney-u/exact");
    }
    SECTION("identical samples") {
        std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
        const auto t = mann_whitney_u(a, b);
        CHECK(t.p_value >= 0.99);
    }
    SECTION("invariant under strictly monotone transforms") {
        Rng rng(5);
        std::vector<double> a, b;
        for (int i = 0; i < 12; ++i) a.push_back(rng.normal());
        for (int i = 0; i < 9; ++i) b.push_back(rng.normal() + 0.4);
        const auto t1 = mann_whitney_u(a, b);
        for (auto& v : a) v = std::exp(v);
        for (auto& v : b) v = std::exp(v);
        const auto t2 = mann_whitney_u(a, b);
        CHECK(t1.p_value == Catch::Approx(t2.p_value).margin(1e-12));
        CHECK(t1.statistic == Catch::Approx(t2.statistic).margin(1e-9));
    }
    SECTION("exact and normal paths agree for tie-free n=15") {
        Rng rng(31);
        for (int it = 0; it < 20; ++it) {
            std::vector<double> a, b;
            for (int i = 0; i < 15; ++i) a.push_back(rng.normal());
            for (int i = 0; i < 15; ++i) b.push_back(rng.normal() + 0.3);
            const auto exact = mann_whitney_u(a, b);
            REQUIRE(exact.method == "mann-whitney-u/exact");
            REQUIRE(std::fabs(exact.p_value - mw_normal_approx_p(a, b)) < 0.02);
        }
    }
}

TEST_CASE("cliff's delta from failure rates") {
    SECTION("equal rates are negligible") {
        const auto e = cliffs_delta_from_rates(10, 100, 20, 200);
        CHECK(e.delta == Catch::Approx(0.0).margin(1e-12));
        CHECK(e.magnitude == EffectMagnitude::Negligible);
    }
    SECTION("sign flips when groups swap") {
        const auto e1 = cliffs_delta_from_rates(5, 100, 30, 100);
        const auto e2 = cliffs_delta_from_rates(30, 100, 5, 100);
        CHECK(e1.delta == Catch::Approx(-e2.delta).margin(1e-12));
        CHECK(e1.delta > 0.0);
    }
    SECTION("zero cells survive via the half correction") {
        const auto e = cliffs_delta_from_rates(0, 50, 10, 50);
        CHECK(std::isfinite(e.delta));
        CHECK(e.delta > 0.0);
    }
    SECTION("magnitude thresholds") {
        CHECK(magnitude_for(0.1) == EffectMagnitude::Negligible);
        CHECK(magnitude_for(0.146) == EffectMagnitude::Negligible);
        CHECK(magnitude_for(0.147) == EffectMagnitude::Small);
        CHECK(magnitude_for(0.2) == EffectMagnitude::Small);
        CHECK(magnitude_for(0.33) == EffectMagnitude::Medium);
        CHECK(magnitude_for(0.4) == EffectMagnitude::Medium);
        CHECK(magnitude_for(0.474) == EffectMagnitude::Large);
        CHECK(magnitude_for(-0.5) == EffectMagnitude::Large);
    }
}

TEST_CASE("scott-knott clustering") {
    SECTION("identical groups collapse to one cluster") {
        std::map<std::string, std::vector<double>> g;
        g["a"] = {1.0, 2.0, 3.0, 4.0};
        g["b"] = {1.0, 2.0, 3.0, 4.0};
        const auto r = scott_knott(g);
        REQUIRE(r.groups.size() == 1);
        CHECK(r.groups[0].treatments.size() == 2);
    }
    SECTION("well-separated means split into two clusters, best first") {
        std::map<std::string, std::vector<double>> g;
        Rng rng(3);
        for (int i = 0; i < 20; ++i) {
            g["high"].push_back(100.0 + rng.normal());
            g["low"].push_back(0.0 + rng.normal());
        }
        const auto r = scott_knott(g);
        REQUIRE(r.groups.size() == 2);
        CHECK(r.groups[0].rank == 1);
        CHECK(r.groups[0].treatments == std::vector<std::string>{"high"});
        CHECK(r.groups[1].treatments == std::vector<std::string>{"low"});
    }
    SECTION("cluster means are non-increasing across ranks") {
        std::map<std::string, std::vector<double>> g;
        Rng rng(11);
        for (int t = 0; t < 5; ++t) {
            for (int i = 0; i < 10; ++i) {
                g["t" + std::to_string(t)].push_back(10.0 * t + rng.normal());
            }
        }
        const auto r = scott_knott(g);
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& grp : r.groups) {
            for (double m : grp.means) {
                CHECK(m <= prev + 1e-9);
            }
            prev = *std::min_element(grp.means.begin(), grp.means.end());
        }
    }
    SECTION("between-group sum of squares matches an independent formula") {
        Rng rng(17);
        for (int it = 0; it < 100; ++it) {
            std::vector<detail::SkTreatment> t(4);
            for (auto& tr : t) {
                tr.mean = rng.uniform(0.0, 10.0);
                tr.reps = 5;
            }
            std::sort(t.begin(), t.end(), [](auto& a, auto& b) { return a.mean > b.mean; });
            std::size_t lib_best = 1;
            double lib_b0 = -1.0;
            std::size_t oracle_best = 1;
            double oracle_b0 = -1.0;
            for (std::size_t s = 1; s < t.size(); ++s) {
                const double lib = detail::between_ss(t, 0, s, t.size());
                // oracle route: weighted deviations of the two group means
                double m1 = 0, m2 = 0;
                for (std::size_t i = 0; i < s; ++i) m1 += t[i].mean;
                for (std::size_t i = s; i < t.size(); ++i) m2 += t[i].mean;
                const double k1 = static_cast<double>(s);
                const double k2 = static_cast<double>(t.size() - s);
                m1 /= k1;
                m2 /= k2;
                const double grand = (k1 * m1 + k2 * m2) / (k1 + k2);
                const double oracle =
                    k1 * (m1 - grand) * (m1 - grand) + k2 * (m2 - grand) * (m2 - grand);
                REQUIRE(lib == Catch::Approx(oracle).margin(1e-9));
                if (lib > lib_b0) {
                    lib_b0 = lib;
                    lib_best = s;
                }
                if (oracle > oracle_b0) {
                    oracle_b0 = oracle;
                    oracle_best = s;
                }
            }
            REQUIRE(lib_best == oracle_best);
        }
    }
    SECTION("preconditions") {
        std::map<std::string, std::vector<double>> g;
        g["only"] = {1.0};
        CHECK_THROWS_AS(scott_knott(g), Error);
    }
}

TEST_CASE("autocorrelation") {
    SECTION("lag zero is one") {
        std::vector<double> s{1, 3, 2, 5, 4, 6, 2, 8};
        const auto r = autocorrelation(s, 3);
        CHECK(r[0].lag == 0);
        CHECK(r[0].coefficient == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("alternating series is strongly negative at lag one") {
        std::vector<double> s;
        for (int i = 0; i < 40; ++i) s.push_back(i % 2 == 0 ? 1.0 : -1.0);
        const auto r = autocorrelation(s, 2);
        CHECK(r[1].coefficient <= -0.9);
    }
    SECTION("confidence bound for 36 points") {
        std::vector<double> s;
        Rng rng(2);
        for (int i = 0; i < 36; ++i) s.push_back(rng.normal());
        const auto r = autocorrelation(s, 5);
        CHECK(r[0].ci_bound == Catch::Approx(1.96 / 6.0).margin(1e-9));
    }
    SECTION("degenerate inputs") {
        std::vector<double> constant(10, 4.0);
        CHECK_THROWS_AS(autocorrelation(constant, 3), ZeroVariance);
        std::vector<double> tiny{1.0, 2.0};
        CHECK_THROWS_AS(autocorrelation(tiny, 3), Error);
    }
}

TEST_CASE("ec ratio") {
    SECTION("worked example") {
        // 10% improvement, retraining in 5 of 10 periods
        const auto ec = ec_ratio(0.55, 0.5, 5, 10);
        CHECK_FALSE(ec.zero_retrains);
        CHECK(ec.value == Catch::Approx(0.2).margin(1e-12));
    }
    SECTION("zero retrains flagged") {
        const auto ec = ec_ratio(0.55, 0.5, 0, 10);
        CHECK(ec.zero_retrains);
        CHECK(ec.value == 0.0);
    }
    SECTION("doubling retrains halves the ratio") {
        const auto e1 = ec_ratio(0.6, 0.5, 2, 10);
        const auto e2 = ec_ratio(0.6, 0.5, 4, 10);
        CHECK(e2.value == Catch::Approx(e1.value / 2.0).margin(1e-12));
    }
}

TEST_CASE("coefficient of variation") {
    SECTION("constant series") {
        std::vector<double> v{1, 1, 1};
        CHECK(cv(v) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("two points") {
        std::vector<double> v{2, 4};
        CHECK(cv(v) == Catch::Approx(std::sqrt(2.0) / 3.0).margin(1e-12));
    }
    SECTION("scale invariant") {
        std::vector<double> v{2, 5, 9, 4};
        std::vector<double> w;
        for (double x : v) w.push_back(x * 7.5);
        CHECK(cv(v) == Catch::Approx(cv(w)).margin(1e-12));
    }
    SECTION("zero mean throws") {
        std::vector<double> v{-1, 1};
        CHECK_THROWS_AS(cv(v), ZeroMean);
    }
}

TEST_CASE("dollar cost") {
    CHECK(dollar_cost(3600.0, 0.504) == Catch::Approx(0.504).margin(1e-12));
    CHECK(dollar_cost(0.0, 0.504) == 0.0);
    CHECK(dollar_cost(1800.0, 1.008) == Catch::Approx(dollar_cost(3600.0, 0.504)).margin(1e-12));
}

TEST_CASE("distribution helpers") {
    CHECK(chi2_quantile(0.95, 1.0) == Catch::Approx(3.8415).margin(1e-3));
    CHECK(chi2_quantile(0.95, 2.0) == Catch::Approx(5.9915).margin(1e-3));
    for (double p : {0.01, 0.1, 0.5, 0.9, 0.99}) {
        CHECK(normal_cdf(normal_quantile(p)) == Catch::Approx(p).margin(1e-8));
    }
}
