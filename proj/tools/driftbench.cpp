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
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftbench/analyze.hpp"
#include "driftbench/archive.hpp"
#include "driftbench/report.hpp"
#include "driftbench/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDataError = 2;
constexpr int kExitRunFailures = 3;

driftbench::DatasetSchema load_schema_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw driftbench::DataError("cannot open schema: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw driftbench::DataError("schema parse error: " + std::string(e.what()));
    }
    return driftbench::jsonio::schema_from_json(j);
}

struct AnalyzeArgs {
    std::string input;
    std::string schema;
    std::string config;
    std::string granularity = "day";
    std::string out = "analysis";
    bool svg = false;
    int max_lag = 0;
};

int run_analyze(const AnalyzeArgs& args) {
    using namespace driftbench;
    PeriodizedDataset data;
    AnalyzeOptions options;
    options.svg = args.svg;
    options.max_lag = args.max_lag;
    if (!args.config.empty()) {
        const auto config = load_config(args.config);
        data = build_dataset(config);
        if (config.dataset.csv) options.feature_names = config.dataset.csv->schema.feature_columns;
    } else {
        if (args.input.empty() || args.schema.empty()) {
            throw DataError("analyze needs --input and --schema (or --config)");
        }
        const auto schema = load_schema_file(args.schema);
        const auto samples = load_csv(args.input, schema);
        auto [granularity, fixed_n] = jsonio::granularity_from_string(args.granularity);
        data = granularity == Granularity::FixedCount
                   ? partition_periods(samples, granularity, fixed_n)
                   : partition_periods(samples, granularity);
        options.feature_names = schema.feature_columns;
    }
    cmd_analyze(data, args.out, options);
    std::cout << "analysis written to " << args.out << " (" << data.periods.size()
              << " periods)\n";
    return kExitOk;
}

struct RunArgs {
    std::string config;
    std::string out;
    int jobs = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double hourly_rate = 0.0;
    bool rate_set = false;
};

int run_run(const RunArgs& args) {
    using namespace driftbench;
    auto config = load_config(args.config);
    if (!args.out.empty()) config.out_dir = args.out;
    if (args.seed_set) config.base_seed = args.seed;
    if (args.rate_set) config.hourly_rate = args.hourly_rate;
    const auto archive = cmd_run(config, args.jobs, std::cout);
    return archive.any_failed() ? kExitRunFailures : kExitOk;
}

struct RankArgs {
    std::vector<std::string> inputs;
    std::string metric = "auc";
    std::string baseline;
    std::string out = "ranking";
};

int run_rank(const RankArgs& args) {
    using namespace driftbench;
    std::vector<ResultArchive> archives;
    archives.reserve(args.inputs.size());
    for (const auto& path : args.inputs) archives.push_back(load_archive(path));
    cmd_rank(archives, parse_metric(args.metric), args.out, std::cout, args.baseline);
    std::cout << "ranking written to " << args.out << "/rank.csv\n";
    return kExitOk;
}

struct ReportArgs {
    std::string input;
    std::string baseline;
    std::string out = "report";
};

int run_report(const ReportArgs& args) {
    using namespace driftbench;
    const auto archive = load_archive(args.input);
    cmd_report(archive, args.baseline, args.out, std::cout);
    std::cout << "report written to " << args.out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "driftbench - benchmark harness for maintaining binary classifiers over "
        "time-partitioned operation data"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand(
        "analyze", "dataset evolution report: volume, positive rate, pairwise shift tests");
    analyze->add_option("--input", analyze_args.input, "CSV dataset path");
    analyze->add_option("--schema", analyze_args.schema, "dataset schema JSON path");
    analyze->add_option("--config", analyze_args.config,
                        "experiment config JSON (alternative dataset source)");
    analyze->add_option("--granularity", analyze_args.granularity, "day|week|month|fixed:<n>");
    analyze->add_option("--out", analyze_args.out, "output directory");
    analyze->add_flag("--svg", analyze_args.svg, "emit SVG charts");
    analyze->add_option("--max-lag", analyze_args.max_lag, "autocorrelation lag bound");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "execute the configured policies x repetitions");
    run->add_option("--config", run_args.config, "experiment config JSON")->required();
    run->add_option("--out", run_args.out, "output directory (overrides config)");
    run->add_option("--jobs", run_args.jobs, "worker threads");
    run->add_option("--seed", run_args.seed, "base seed (overrides config)")
        ->each([&](const std::string&) { run_args.seed_set = true; });
    run->add_option("--hourly-rate", run_args.hourly_rate, "USD per compute hour (overrides config)")
        ->each([&](const std::string&) { run_args.rate_set = true; });

    RankArgs rank_args;
    auto* rank = app.add_subcommand("rank", "Scott-Knott ranking of policies across archives");
    rank->add_option("--input", rank_args.inputs, "archive JSON path(s)")->required()
        ->expected(-1);
    rank->add_option("--metric", rank_args.metric, "auc|f1|mcc|cv|ec");
    rank->add_option("--baseline", rank_args.baseline, "stationary policy name (needed for ec)");
    rank->add_option("--out", rank_args.out, "output directory");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "per-policy cost/performance tables");
    report->add_option("--input", report_args.input, "archive JSON path")->required();
    report->add_option("--baseline", report_args.baseline, "stationary policy name");
    report->add_option("--out", report_args.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*analyze) return run_analyze(analyze_args);
        if (*run) return run_run(run_args);
        if (*rank) return run_rank(rank_args);
        if (*report) return run_report(report_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitUsage;
}
