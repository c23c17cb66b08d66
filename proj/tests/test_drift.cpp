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
#include <vector>

#include "driftbench/drift.hpp"
#include "driftbench/synthetic.hpp"
#include "driftbench/tuning.hpp"

using namespace driftbench;

TEST_CASE("ddm register arithmetic") {
    DdmState state;
    Verdict v;

    std::tie(state, v) = ddm_observe(state, 0.10, 100);
    CHECK_FALSE(v.drift());
    CHECK(state.initialized);
    CHECK(state.p_min == Catch::Approx(0.10).margin(1e-12));
    CHECK(state.s_min == Catch::Approx(0.03).margin(1e-12));  // sqrt(0.1*0.9/100)

    // 0.12 + 0.0325 = 0.1525: below the drift line but not below p_min+s_min,
    // so the registers stay put
    std::tie(state, v) = ddm_observe(state, 0.12, 100);
    CHECK_FALSE(v.drift());
    CHECK(state.p_min == Catch::Approx(0.10).margin(1e-12));
    CHECK(state.s_min == Catch::Approx(0.03).margin(1e-12));

    // 0.50 + 0.05 = 0.55 >= 0.10 + 3*0.03 = 0.19
    std::tie(state, v) = ddm_observe(state, 0.50, 100);
    CHECK(v.drift());
    CHECK_FALSE(state.initialized);  // reset for a fresh baseline
}

TEST_CASE("ddm register updates and properties") {
    SECTION("registers move only downward between resets") {
        DdmState state;
        Rng rng(8);
        double prev_line = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 200; ++i) {
            const double p = rng.next_double();
            Verdict v;
            std::tie(state, v) = ddm_observe(state, p, 50);
            if (!state.initialized) {
                prev_line = std::numeric_limits<double>::infinity();
                continue;
            }
            const double line = state.p_min + state.s_min;
            CHECK(line <= prev_line + 1e-12);
            prev_line = line;
        }
    }
    SECTION("post-drift call re-initializes") {
        DdmState state;
        Verdict v;
        std::tie(state, v) = ddm_observe(state, 0.05, 400);
        std::tie(state, v) = ddm_observe(state, 0.6, 400);
        REQUIRE(v.drift());
        std::tie(state, v) = ddm_observe(state, 0.9, 400);
        CHECK_FALSE(v.drift());  // first observation after reset only seeds
        CHECK(state.p_min == Catch::Approx(0.9).margin(1e-12));
    }
    SECTION("invalid rate") {
        DdmState state;
        CHECK_THROWS_AS(ddm_observe(state, 1.5, 10), InvalidErrorRate);
        CHECK_THROWS_AS(ddm_observe(state, -0.1, 10), InvalidErrorRate);
    }
}

TEST_CASE("stepd proportion test") {
    SECTION("worked example fires on an error increase") {
        StepdState state;
        Verdict v;
        std::tie(state, v) = stepd_observe(state, 10, 200);  // seeds
        CHECK_FALSE(v.drift());
        std::tie(state, v) = stepd_observe(state, 30, 100);
        CHECK(v.drift());
        CHECK(v.diagnostics.at("z") == Catch::Approx(6.005).margin(1e-3));
        // state reset to the newest period's counts
        CHECK(state.n1 == 100);
        CHECK(state.e1 == 30);
    }
    SECTION("equal error rates stay quiet and accumulate") {
        StepdState state;
        Verdict v;
        std::tie(state, v) = stepd_observe(state, 10, 100);
        std::tie(state, v) = stepd_observe(state, 10, 100);
        CHECK_FALSE(v.drift());
        CHECK(v.diagnostics.at("z") == Catch::Approx(0.0).margin(1e-12));
        CHECK(v.diagnostics.at("p_value") == Catch::Approx(1.0).margin(1e-12));
        CHECK(state.n1 == 200);
        CHECK(state.e1 == 20);
    }
    SECTION("a significant accuracy increase does not fire") {
        StepdState state;
        Verdict v;
        std::tie(state, v) = stepd_observe(state, 60, 200);
        std::tie(state, v) = stepd_observe(state, 5, 200);
        CHECK_FALSE(v.drift());
        CHECK(v.diagnostics.at("p_value") < 0.05);  // significant, but the wrong direction
    }
    SECTION("degenerate proportions reported, not fired") {
        StepdState state;
        Verdict v;
        std::tie(state, v) = stepd_observe(state, 0, 100);
        std::tie(state, v) = stepd_observe(state, 0, 100);
        CHECK_FALSE(v.drift());
        CHECK(v.diagnostics.count("degenerate") == 1);
    }
    SECTION("z matches the shared two-proportion statistic") {
        Rng rng(15);
        for (int it = 0; it < 100; ++it) {
            const auto n1 = static_cast<std::size_t>(rng.uniform_int(2, 400));
            const auto n2 = static_cast<std::size_t>(rng.uniform_int(2, 400));
            const auto e1 = static_cast<std::size_t>(rng.uniform_int(1, static_cast<int>(n1) - 1));
            const auto e2 = static_cast<std::size_t>(rng.uniform_int(1, static_cast<int>(n2) - 1));
            StepdState state;
            Verdict v;
            std::tie(state, v) = stepd_observe(state, e1, n1);
            std::tie(state, v) = stepd_observe(state, e2, n2);
            const auto oracle = two_proportion_z(e1, n1, e2, n2);
            REQUIRE(v.diagnostics.at("z") == Catch::Approx(oracle.statistic).margin(1e-9));
        }
    }
}

TEST_CASE("perm decision rule") {
    PermParams params;
    SECTION("defaults") {
        CHECK(params.n_permutations == 100);
        CHECK(params.significance == Catch::Approx(0.01).margin(1e-15));
        CHECK(params.rate_of_change == 0.0);
    }
    SECTION("ordered risk equal to every permuted risk cannot fire") {
        std::vector<double> risks(100, 0.2);
        const auto v = detail::perm_verdict_from_risks(0.2, risks, params);
        CHECK_FALSE(v.drift());
        CHECK(v.diagnostics.at("ratio") == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("ordered risk above all permuted risks fires at the default level") {
        std::vector<double> risks(100, 0.2);
        const auto v = detail::perm_verdict_from_risks(0.5, risks, params);
        CHECK(v.drift());
        CHECK(v.diagnostics.at("ratio") == Catch::Approx(1.0 / 101.0).margin(1e-12));
    }
    SECTION("decision invariant under shifting every risk by a constant") {
        Rng rng(40);
        for (int it = 0; it < 50; ++it) {
            std::vector<double> risks;
            for (int i = 0; i < 30; ++i) risks.push_back(rng.next_double());
            const double ordered = rng.next_double();
            const double shift = rng.uniform(-5.0, 5.0);
            const auto a = detail::perm_verdict_from_risks(ordered, risks, params);
            std::vector<double> shifted = risks;
            for (auto& r : shifted) r += shift;
            const auto b = detail::perm_verdict_from_risks(ordered + shift, shifted, params);
            REQUIRE(a.signal == b.signal);
        }
    }
}

TEST_CASE("perm on synthetic periods") {
    const HyperParams hp{{"max_depth", 4}, {"min_samples_split", 5}};
    const FitFn fit = [&hp](std::span<const Sample> s, std::uint64_t seed) {
        return fit_cart(s, hp, seed);
    };

    SECTION("two different concepts fire") {
        SyntheticStreamSpec spec;
        spec.n_periods = 2;
        spec.samples_per_period = 250;
        spec.n_features = 3;
        spec.concept_schedule = {{1, 1}, {2, 2}};
        spec.noise_rate = 0.05;
        spec.positive_rate_target = 0.5;
        spec.seed = 77;
        const auto data = generate_synthetic(spec);
        PermParams params;
        params.seed = 5;
        const auto v =
            perm_detect(data.periods[0].samples, data.periods[1].samples, fit, params);
        CHECK(v.drift());
    }
    SECTION("degenerate periods are skipped") {
        std::vector<Sample> one_class;
        for (int i = 0; i < 20; ++i) {
            Sample s;
            s.features = {static_cast<double>(i)};
            s.label = 0;
            one_class.push_back(s);
        }
        PermParams params;
        const auto v = perm_detect(one_class, one_class, fit, params);
        CHECK_FALSE(v.drift());
        CHECK(v.diagnostics.count("skipped_degenerate_periods") == 1);
    }
    SECTION("learner failure degrades to no drift") {
        SyntheticStreamSpec spec;
        spec.n_periods = 2;
        spec.samples_per_period = 50;
        spec.n_features = 2;
        spec.concept_schedule = {{1, 1}};
        spec.seed = 3;
        const auto data = generate_synthetic(spec);
        const FitFn broken = [](std::span<const Sample>, std::uint64_t) -> ModelPtr {
            throw SingleClassData();
        };
        PermParams params;
        const auto v =
            perm_detect(data.periods[0].samples, data.periods[1].samples, broken, params);
        CHECK_FALSE(v.drift());
        CHECK(v.diagnostics.count("fit_error") == 1);
    }
    SECTION("deterministic given the seed") {
        SyntheticStreamSpec spec;
        spec.n_periods = 2;
        spec.samples_per_period = 120;
        spec.n_features = 2;
        spec.concept_schedule = {{1, 1}};
        spec.noise_rate = 0.2;
        spec.seed = 9;
        const auto data = generate_synthetic(spec);
        PermParams params;
        params.n_permutations = 30;
        params.seed = 11;
        const auto a = perm_detect(data.periods[0].samples, data.periods[1].samples, fit, params);
        const auto b = perm_detect(data.periods[0].samples, data.periods[1].samples, fit, params);
        CHECK(a.signal == b.signal);
        CHECK(a.diagnostics.at("ratio") == b.diagnostics.at("ratio"));
    }
}
