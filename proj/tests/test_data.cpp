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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "driftbench/csv.hpp"
#include "driftbench/logistic.hpp"
#include "driftbench/partition.hpp"
#include "driftbench/resample.hpp"
#include "driftbench/stats.hpp"
#include "driftbench/synthetic.hpp"
#include "driftbench/tuning.hpp"

using namespace driftbench;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

DatasetSchema test_schema() {
    DatasetSchema s;
    s.feature_columns = {"f1", "f2"};
    s.label_column = "failed";
    s.label_positive_value = "true";
    s.timestamp_column = "ts";
    s.timestamp_format = TimestampFormat::EpochSeconds;
    return s;
}

Sample make_sample(double x, int label, std::int64_t ts) {
    Sample s;
    s.features = {x};
    s.label = label;
    s.timestamp = ts;
    return s;
}

}  // namespace

TEST_CASE("load_csv maps rows to samples") {
    const auto path = write_temp("db_ok.csv",
                                 "f1,f2,failed,ts\n"
                                 "1.5,2.0,true,100\n"
                                 "0.5,-1.0,false,200\n"
                                 "3.25,0.0,true,300\n");
    const auto samples = load_csv(path, test_schema());
    REQUIRE(samples.size() == 3);
    CHECK(samples[0].features == std::vector<double>{1.5, 2.0});
    CHECK(samples[0].label == 1);
    CHECK(samples[1].label == 0);
    CHECK(samples[2].label == 1);
    CHECK(samples[2].timestamp == 300);
}

TEST_CASE("load_csv error paths") {
    SECTION("missing label column") {
        const auto path = write_temp("db_nolabel.csv", "f1,f2,ts\n1,2,100\n");
        try {
            load_csv(path, test_schema());
            FAIL("expected MissingColumn");
        } catch (const MissingColumn& e) {
            CHECK(e.column == "failed");
        }
    }
    SECTION("unparsable feature value, 1-based data row") {
        const auto path = write_temp("db_badval.csv",
                                     "f1,f2,failed,ts\n"
                                     "1.0,2.0,false,100\n"
                                     "abc,2.0,true,200\n");
        try {
            load_csv(path, test_schema());
            FAIL("expected UnparsableValue");
        } catch (const UnparsableValue& e) {
            CHECK(e.row == 2);
            CHECK(e.column == "f1");
        }
    }
    SECTION("no data rows") {
        const auto path = write_temp("db_empty.csv", "f1,f2,failed,ts\n");
        CHECK_THROWS_AS(load_csv(path, test_schema()), EmptyDataset);
    }
    SECTION("iso8601 timestamps") {
        auto schema = test_schema();
        schema.timestamp_format = TimestampFormat::Iso8601;
        const auto path = write_temp("db_iso.csv",
                                     "f1,f2,failed,ts\n"
                                     "1,2,false,2020-01-06\n"
                                     "1,2,true,2020-01-06T12:30:00Z\n");
        const auto samples = load_csv(path, schema);
        CHECK(samples[0].timestamp == timeutil::civil_to_epoch(2020, 1, 6));
        CHECK(samples[1].timestamp == timeutil::civil_to_epoch(2020, 1, 6, 12, 30, 0));
    }
}

TEST_CASE("partition_periods calendar granularities") {
    SECTION("three consecutive days") {
        std::vector<Sample> samples;
        const auto day0 = timeutil::civil_to_epoch(2021, 3, 1);
        for (int d = 0; d < 3; ++d) {
            for (int i = 0; i <= d; ++i) {
                samples.push_back(make_sample(0.0, 0, day0 + d * 86400 + i * 600));
            }
        }
        const auto data = partition_periods(samples, Granularity::Day);
        REQUIRE(data.periods.size() == 3);
        CHECK(data.periods[0].samples.size() == 1);
        CHECK(data.periods[1].samples.size() == 2);
        CHECK(data.periods[2].samples.size() == 3);
        CHECK(data.periods[0].index == 1);
    }
    SECTION("28 daily periods") {
        std::vector<Sample> samples;
        const auto day0 = timeutil::civil_to_epoch(2021, 5, 1);
        for (int d = 0; d < 28; ++d) samples.push_back(make_sample(0.0, 0, day0 + d * 86400 + 60));
        const auto data = partition_periods(samples, Granularity::Day);
        CHECK(data.periods.size() == 28);
    }
    SECTION("empty calendar days are retained") {
        std::vector<Sample> samples;
        const auto day0 = timeutil::civil_to_epoch(2021, 3, 1);
        samples.push_back(make_sample(0.0, 0, day0));
        samples.push_back(make_sample(0.0, 0, day0 + 2 * 86400));  // skip a day
        const auto data = partition_periods(samples, Granularity::Day);
        REQUIRE(data.periods.size() == 3);
        CHECK(data.periods[1].samples.empty());
        CHECK(data.periods[1].index == 2);
    }
    SECTION("weeks start on monday") {
        // 2020-01-05 is a Sunday, 2020-01-06 a Monday
        std::vector<Sample> samples{make_sample(0, 0, timeutil::civil_to_epoch(2020, 1, 5)),
                                    make_sample(0, 0, timeutil::civil_to_epoch(2020, 1, 6))};
        const auto data = partition_periods(samples, Granularity::Week);
        REQUIRE(data.periods.size() == 2);
        CHECK(data.periods[0].samples.size() == 1);
        CHECK(data.periods[1].samples.size() == 1);
        CHECK(data.periods[1].start == timeutil::civil_to_epoch(2020, 1, 6));
    }
    SECTION("month boundaries") {
        std::vector<Sample> samples{
            make_sample(0, 0, timeutil::civil_to_epoch(2020, 1, 31, 23, 59, 59)),
            make_sample(0, 0, timeutil::civil_to_epoch(2020, 2, 1)),
            make_sample(0, 0, timeutil::civil_to_epoch(2020, 3, 15))};
        const auto data = partition_periods(samples, Granularity::Month);
        REQUIRE(data.periods.size() == 3);
        CHECK(data.periods[0].samples.size() == 1);
        CHECK(data.periods[1].start == timeutil::civil_to_epoch(2020, 2, 1));
        CHECK(data.periods[1].end == timeutil::civil_to_epoch(2020, 3, 1));
    }
}

TEST_CASE("partition_periods fixed count agrees with per-sample bucketing") {
    std::vector<Sample> samples;
    Rng rng(404);
    const std::int64_t t0 = 1'000'000;
    const std::int64_t span_units = 10;
    const std::int64_t unit = 3600;
    for (int i = 0; i < 500; ++i) {
        samples.push_back(
            make_sample(0.0, 0, t0 + static_cast<std::int64_t>(rng.below(span_units * unit))));
    }
    samples.push_back(make_sample(0.0, 0, t0));                       // pin the extremes
    samples.push_back(make_sample(0.0, 0, t0 + span_units * unit - 1));
    const auto data = partition_periods(samples, Granularity::FixedCount, 5);
    REQUIRE(data.periods.size() == 5);

    std::int64_t lo = samples[0].timestamp, hi = lo;
    for (const auto& s : samples) {
        lo = std::min(lo, s.timestamp);
        hi = std::max(hi, s.timestamp);
    }
    const long double span = static_cast<long double>(hi - lo + 1);
    std::vector<std::size_t> oracle(5, 0);
    for (const auto& s : samples) {
        auto b = static_cast<std::size_t>(
            std::min<long double>(4.0L, (static_cast<long double>(s.timestamp - lo) * 5.0L) / span));
        ++oracle[b];
    }
    for (std::size_t p = 0; p < 5; ++p) {
        CHECK(data.periods[p].samples.size() == oracle[p]);
    }

    SECTION("bounds cover their samples") {
        for (const auto& p : data.periods) {
            CHECK(p.start < p.end);
            for (const auto& s : p.samples) {
                CHECK(s.timestamp >= p.start);
                CHECK(s.timestamp < p.end);
            }
        }
    }
}

TEST_CASE("partition_periods error paths") {
    CHECK_THROWS_AS(partition_periods({}, Granularity::Day), EmptyDataset);
    std::vector<Sample> same{make_sample(0, 0, 500), make_sample(0, 0, 500)};
    CHECK_THROWS_AS(partition_periods(same, Granularity::FixedCount, 4), ZeroSpan);
    std::vector<Sample> ok{make_sample(0, 0, 500), make_sample(0, 0, 900)};
    CHECK_THROWS_AS(partition_periods(ok, Granularity::FixedCount, std::nullopt), DataError);
}

TEST_CASE("partitioning is a partition of the input") {
    Rng rng(777);
    std::vector<Sample> samples;
    for (int i = 0; i < 400; ++i) {
        samples.push_back(make_sample(rng.normal(), static_cast<int>(rng.below(2)),
                                      1'600'000'000 + static_cast<std::int64_t>(rng.below(40) * 86400 + rng.below(86400))));
    }
    for (auto granularity : {Granularity::Day, Granularity::Week, Granularity::Month}) {
        const auto data = partition_periods(samples, granularity);
        std::size_t total = 0;
        int expected_index = 1;
        for (const auto& p : data.periods) {
            CHECK(p.index == expected_index++);
            total += p.samples.size();
            for (const auto& s : p.samples) {
                CHECK(s.timestamp >= p.start);
                CHECK(s.timestamp < p.end);
            }
        }
        CHECK(total == samples.size());
    }
}

TEST_CASE("undersample") {
    std::vector<Sample> samples;
    for (int i = 0; i < 5; ++i) samples.push_back(make_sample(i, 1, i));
    for (int i = 0; i < 500; ++i) samples.push_back(make_sample(100 + i, 0, i));

    SECTION("caps negatives at ratio * positives") {
        const auto out = undersample(samples, 10, 42);
        auto [neg, pos] = count_classes(out);
        CHECK(pos == 5);
        CHECK(neg == 50);
    }
    SECTION("keeps everything when under the cap") {
        std::vector<Sample> small(samples.begin(), samples.begin() + 35);  // 5 pos + 30 neg
        const auto out = undersample(small, 10, 42);
        CHECK(out.size() == 35);
    }
    SECTION("deterministic for a fixed seed") {
        const auto a = undersample(samples, 10, 9001);
        const auto b = undersample(samples, 10, 9001);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].features == b[i].features);
            CHECK(a[i].label == b[i].label);
        }
    }
    SECTION("different seeds pick different negatives") {
        const auto a = undersample(samples, 10, 1);
        const auto b = undersample(samples, 10, 2);
        std::multiset<double> fa, fb;
        for (const auto& s : a) {
            if (s.label == 0) fa.insert(s.features[0]);
        }
        for (const auto& s : b) {
            if (s.label == 0) fb.insert(s.features[0]);
        }
        CHECK(fa != fb);
    }
    SECTION("never drops a positive, never exceeds the bound") {
        Rng rng(5150);
        for (int it = 0; it < 20; ++it) {
            std::vector<Sample> pool;
            const int n_pos = static_cast<int>(rng.below(6));
            const int n_neg = static_cast<int>(rng.below(200));
            for (int i = 0; i < n_pos; ++i) pool.push_back(make_sample(i, 1, i));
            for (int i = 0; i < n_neg; ++i) pool.push_back(make_sample(1000 + i, 0, i));
            const int ratio = 1 + static_cast<int>(rng.below(10));
            if (n_pos == 0) {
                CHECK_THROWS_AS(undersample(pool, ratio, it), NoPositives);
                continue;
            }
            const auto out = undersample(pool, ratio, it);
            auto [neg, pos] = count_classes(out);
            CHECK(pos == static_cast<std::size_t>(n_pos));
            CHECK(neg <= static_cast<std::size_t>(ratio) * pos);
            CHECK(neg == std::min<std::size_t>(n_neg, static_cast<std::size_t>(ratio) * pos));
        }
    }
    SECTION("ratio below one rejected") {
        CHECK_THROWS_AS(undersample(samples, 0, 1), DataError);
    }
}

TEST_CASE("synthetic stream generation") {
    SyntheticStreamSpec spec;
    spec.n_periods = 10;
    spec.samples_per_period = 400;
    spec.n_features = 4;
    spec.concept_schedule = {{1, 1}, {6, 2}};
    spec.noise_rate = 0.0;
    spec.positive_rate_target = 0.3;
    spec.seed = 2024;

    SECTION("deterministic given the spec") {
        const auto a = generate_synthetic(spec);
        const auto b = generate_synthetic(spec);
        REQUIRE(a.periods.size() == b.periods.size());
        for (std::size_t p = 0; p < a.periods.size(); ++p) {
            REQUIRE(a.periods[p].samples.size() == b.periods[p].samples.size());
            for (std::size_t i = 0; i < a.periods[p].samples.size(); ++i) {
                CHECK(a.periods[p].samples[i].features == b.periods[p].samples[i].features);
                CHECK(a.periods[p].samples[i].label == b.periods[p].samples[i].label);
                CHECK(a.periods[p].samples[i].timestamp == b.periods[p].samples[i].timestamp);
            }
        }
    }
    SECTION("noise-free single concept is linearly learnable across periods") {
        auto one = spec;
        one.concept_schedule = {{1, 1}};
        one.positive_rate_target = 0.5;
        const auto data = generate_synthetic(one);
        const auto model =
            fit_logistic(data.periods[0].samples, default_hyperparams(LearnerFamily::Logistic));
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& s : data.periods[1].samples) {
            scores.push_back(model->score(s));
            labels.push_back(s.label);
        }
        CHECK(auc(scores, labels) >= 0.99);
    }
    SECTION("positive rate stays near the target through an abrupt switch") {
        auto noisy = spec;
        noisy.noise_rate = 0.1;
        const auto data = generate_synthetic(noisy);
        for (const auto& p : data.periods) {
            auto [neg, pos] = count_classes(p.samples);
            (void)neg;
            const double rate = static_cast<double>(pos) / static_cast<double>(p.samples.size());
            CHECK(std::fabs(rate - noisy.positive_rate_target) <= 0.1);
        }
    }
    SECTION("orthogonal concepts actually change the labeling rule") {
        const auto data = generate_synthetic(spec);
        const auto model =
            fit_logistic(pool_samples(data, 1, 5), default_hyperparams(LearnerFamily::Logistic));
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& s : data.periods[7].samples) {
            scores.push_back(model->score(s));
            labels.push_back(s.label);
        }
        CHECK(auc(scores, labels) < 0.65);  // pre-switch model is uninformed after it
    }
    SECTION("invalid specs rejected") {
        auto bad = spec;
        bad.noise_rate = 0.5;
        CHECK_THROWS_AS(generate_synthetic(bad), InvalidSpec);
        bad = spec;
        bad.concept_schedule = {{2, 1}};
        CHECK_THROWS_AS(generate_synthetic(bad), InvalidSpec);
        bad = spec;
        bad.concept_schedule = {{1, 1}, {1, 2}};
        CHECK_THROWS_AS(generate_synthetic(bad), InvalidSpec);
        bad = spec;
        bad.concept_schedule = {{1, 1}, {11, 2}};
        CHECK_THROWS_AS(generate_synthetic(bad), InvalidSpec);
    }
}
