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

#include <atomic>
#include <filesystem>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "driftbench/archive.hpp"
#include "driftbench/csv.hpp"
#include "driftbench/report.hpp"

namespace driftbench {

/// Seed of one (policy, repetition) run, derived statelessly from the
/// config's base seed. Archives record it, so it is part of the format.
inline std::uint64_t run_seed(std::uint64_t base_seed, const std::string& policy_name,
                              std::size_t repetition) {
    return mix_seed(base_seed, "run", fnv1a64(policy_name), repetition);
}

inline PeriodizedDataset build_dataset(const ExperimentConfig& config) {
    if (config.dataset.synthetic) {
        return generate_synthetic(*config.dataset.synthetic);
    }
    const auto samples = load_csv(config.dataset.csv->path, config.dataset.csv->schema);
    if (config.granularity == Granularity::FixedCount) {
        return partition_periods(samples, config.granularity, config.fixed_count);
    }
    return partition_periods(samples, config.granularity);
}

/// Runs every policy for every repetition. Repetitions execute in parallel
/// up to `jobs` threads; results land in fixed slots, so the archive does not
/// depend on scheduling.
inline ResultArchive execute_experiment(const ExperimentConfig& config,
                                        const PeriodizedDataset& data, int jobs = 1) {
    config.validate();
    ResultArchive archive;
    archive.environment = std::string("driftbench; compiled with ") + __VERSION__;
    archive.config = config;
    archive.results.resize(config.policies.size());

    struct Task {
        std::size_t policy_idx;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < config.policies.size(); ++p) {
        archive.results[p].policy_name = config.policies[p].name;
        archive.results[p].runs.resize(static_cast<std::size_t>(config.repetitions));
        for (std::size_t r = 0; r < static_cast<std::size_t>(config.repetitions); ++r) {
            tasks.push_back({p, r});
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) break;
            const auto [p, r] = tasks[t];
            PolicyConfig policy = config.policies[p];
            policy.seed = run_seed(config.base_seed, policy.name, r);
            RunOutcome outcome;
            try {
                outcome.result = run_policy(data, policy);
            } catch (const std::exception& e) {
                outcome.failed = true;
                outcome.error = e.what();
                outcome.result.policy_name = policy.name;
                outcome.result.seed = policy.seed;
            }
            archive.results[p].runs[r] = std::move(outcome);
        }
    };

    const int n_threads = std::max(1, jobs);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }
    return archive;
}

/// Full run command: builds the dataset, executes the experiment, persists
/// the archive as out_dir/archive.json and prints the summary table.
inline ResultArchive cmd_run(const ExperimentConfig& config, int jobs, std::ostream& os) {
    const auto data = build_dataset(config);
    auto archive = execute_experiment(config, data, jobs);

    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const auto archive_path = (fs::path(config.out_dir) / "archive.json").string();
    save_archive(archive_path, archive);
    os << "archive written to " << archive_path << "\n\n";

    const auto rows = summarize_archive(archive);
    print_summary_table(os, rows);
    if (archive.any_failed()) {
        os << "\nwarning: some runs failed; see the archive for per-run errors\n";
    }
    return archive;
}

}  // namespace driftbench
