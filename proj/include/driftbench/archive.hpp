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
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftbench/engine.hpp"
#include "driftbench/synthetic.hpp"

namespace driftbench {

using nlohmann::json;

inline constexpr int kArchiveSchemaVersion = 1;
inline constexpr int kDefaultRepetitions = 100;

struct CsvSource {
    std::string path;
    DatasetSchema schema;
};

struct DatasetSource {
    std::optional<CsvSource> csv;
    std::optional<SyntheticStreamSpec> synthetic;
};

struct ExperimentConfig {
    DatasetSource dataset;
    Granularity granularity = Granularity::Day;
    int fixed_count = 0;  // used with Granularity::FixedCount
    std::vector<PolicyConfig> policies;
    int repetitions = kDefaultRepetitions;
    std::uint64_t base_seed = 1;
    double hourly_rate = kDefaultHourlyRate;
    std::string out_dir = ".";

    void validate() const {
        if (repetitions < 1) throw DataError("repetitions must be >= 1");
        if (policies.empty()) throw DataError("config declares no policies");
        if (dataset.csv.has_value() == dataset.synthetic.has_value()) {
            throw DataError("config must declare exactly one dataset source");
        }
        std::vector<std::string> names;
        for (const auto& p : policies) {
            if (p.name.empty()) throw DataError("every policy needs a name");
            names.push_back(p.name);
        }
        std::sort(names.begin(), names.end());
        if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
            throw DataError("policy names must be unique");
        }
        if (granularity == Granularity::FixedCount && fixed_count < 1 && dataset.csv) {
            throw DataError("fixed_count granularity needs a positive period count");
        }
    }
};

struct RunOutcome {
    bool failed = false;
    std::string error;
    RunResult result;
};

struct PolicyRuns {
    std::string policy_name;
    std::vector<RunOutcome> runs;
};

struct ResultArchive {
    int schema_version = kArchiveSchemaVersion;
    std::string environment;
    ExperimentConfig config;
    std::vector<PolicyRuns> results;

    bool any_failed() const {
        for (const auto& pr : results) {
            for (const auto& r : pr.runs) {
                if (r.failed) return true;
            }
        }
        return false;
    }
};

// ---------------------------------------------------------------------------
// JSON mapping. NaN metric values persist as null.

namespace jsonio {

inline json num_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

inline double num_from(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

inline std::string granularity_to_string(Granularity g, int fixed_count) {
    if (g == Granularity::FixedCount) return "fixed:" + std::to_string(fixed_count);
    return to_string(g);
}

inline std::pair<Granularity, int> granularity_from_string(const std::string& s) {
    if (s == "day") return {Granularity::Day, 0};
    if (s == "week") return {Granularity::Week, 0};
    if (s == "month") return {Granularity::Month, 0};
    if (s.rfind("fixed:", 0) == 0) {
        const int n = std::stoi(s.substr(6));
        if (n < 1) throw DataError("fixed:<n> needs a positive n");
        return {Granularity::FixedCount, n};
    }
    throw DataError("unknown granularity: " + s + " (expected day|week|month|fixed:<n>)");
}

inline LearnerFamily learner_from_string(const std::string& s) {
    if (s == "logistic") return LearnerFamily::Logistic;
    if (s == "cart") return LearnerFamily::Cart;
    if (s == "random_forest") return LearnerFamily::RandomForest;
    if (s == "hoeffding_tree") return LearnerFamily::HoeffdingTree;
    throw DataError("unknown learner: " + s);
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "stationary") return PolicyKind::Stationary;
    if (s == "periodic") return PolicyKind::PeriodicRetrain;
    if (s == "drift") return PolicyKind::DriftGuided;
    if (s == "ensemble") return PolicyKind::Ensemble;
    if (s == "oracle") return PolicyKind::OracleOptimal;
    throw DataError("unknown policy kind: " + s);
}

inline DetectorKind detector_from_string(const std::string& s) {
    if (s == "ddm") return DetectorKind::Ddm;
    if (s == "perm") return DetectorKind::Perm;
    if (s == "stepd") return DetectorKind::Stepd;
    throw DataError("unknown detector: " + s);
}

inline EnsembleKind ensemble_from_string(const std::string& s) {
    if (s == "sea") return EnsembleKind::Sea;
    if (s == "awe") return EnsembleKind::Awe;
    if (s == "aue") return EnsembleKind::Aue;
    throw DataError("unknown ensemble: " + s);
}

inline json to_json(const DatasetSchema& s) {
    return {{"feature_columns", s.feature_columns},
            {"label_column", s.label_column},
            {"label_positive_value", s.label_positive_value},
            {"timestamp_column", s.timestamp_column},
            {"timestamp_format",
             s.timestamp_format == TimestampFormat::EpochSeconds ? "epoch_seconds" : "iso8601"}};
}

inline DatasetSchema schema_from_json(const json& j) {
    DatasetSchema s;
    s.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    s.label_column = j.at("label_column").get<std::string>();
    s.label_positive_value = j.at("label_positive_value").get<std::string>();
    s.timestamp_column = j.at("timestamp_column").get<std::string>();
    const auto fmt = j.value("timestamp_format", std::string("epoch_seconds"));
    if (fmt == "epoch_seconds") s.timestamp_format = TimestampFormat::EpochSeconds;
    else if (fmt == "iso8601") s.timestamp_format = TimestampFormat::Iso8601;
    else throw DataError("unknown timestamp_format: " + fmt);
    s.validate();
    return s;
}

inline json to_json(const SyntheticStreamSpec& s) {
    json schedule = json::array();
    for (const auto& [period, concept_id] : s.concept_schedule) {
        schedule.push_back({period, concept_id});
    }
    return {{"n_periods", s.n_periods},
            {"samples_per_period", s.samples_per_period},
            {"n_features", s.n_features},
            {"concept_schedule", schedule},
            {"noise_rate", s.noise_rate},
            {"positive_rate_target", s.positive_rate_target},
            {"seed", s.seed}};
}

inline SyntheticStreamSpec synthetic_from_json(const json& j) {
    SyntheticStreamSpec s;
    s.n_periods = j.at("n_periods").get<int>();
    s.samples_per_period = j.at("samples_per_period").get<int>();
    s.n_features = j.at("n_features").get<int>();
    for (const auto& e : j.at("concept_schedule")) {
        s.concept_schedule.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    s.noise_rate = j.value("noise_rate", 0.0);
    s.positive_rate_target = j.value("positive_rate_target", 0.5);
    s.seed = j.value("seed", std::uint64_t{0});
    s.validate();
    return s;
}

inline json to_json(const PolicyConfig& p) {
    return {{"name", p.name},
            {"kind", to_string(p.kind)},
            {"detector", to_string(p.detector)},
            {"ensemble", to_string(p.ensemble)},
            {"learner", to_string(p.learner)},
            {"hyperparams", p.hyperparams},
            {"window_k", p.window_k},
            {"tune_budget", p.tune_budget},
            {"undersample_ratio", p.undersample_ratio},
            {"oracle_repetitions", p.oracle_repetitions},
            {"oracle_alpha", p.oracle_alpha},
            {"perm",
             {{"n_permutations", p.perm.n_permutations},
              {"significance", p.perm.significance},
              {"rate_of_change", p.perm.rate_of_change}}},
            {"seed", p.seed}};
}

inline PolicyConfig policy_from_json(const json& j) {
    PolicyConfig p;
    p.name = j.at("name").get<std::string>();
    p.kind = policy_kind_from_string(j.at("kind").get<std::string>());
    p.detector = detector_from_string(j.value("detector", std::string("ddm")));
    p.ensemble = ensemble_from_string(j.value("ensemble", std::string("sea")));
    p.learner = learner_from_string(j.value("learner", std::string("cart")));
    if (j.contains("hyperparams")) p.hyperparams = j.at("hyperparams").get<HyperParams>();
    p.window_k = j.value("window_k", std::size_t{0});
    p.tune_budget = j.value("tune_budget", 0);
    p.undersample_ratio = j.value("undersample_ratio", kDefaultUndersampleRatio);
    p.oracle_repetitions = j.value("oracle_repetitions", kDefaultOracleRepetitions);
    p.oracle_alpha = j.value("oracle_alpha", kDefaultOracleAlpha);
    if (j.contains("perm")) {
        const auto& pm = j.at("perm");
        p.perm.n_permutations = pm.value("n_permutations", 100);
        p.perm.significance = pm.value("significance", 0.01);
        p.perm.rate_of_change = pm.value("rate_of_change", 0.0);
    }
    p.seed = j.value("seed", std::uint64_t{0});
    return p;
}

inline json to_json(const ExperimentConfig& c) {
    json dataset;
    if (c.dataset.csv) {
        dataset["csv"] = {{"path", c.dataset.csv->path}, {"schema", to_json(c.dataset.csv->schema)}};
    }
    if (c.dataset.synthetic) {
        dataset["synthetic"] = to_json(*c.dataset.synthetic);
    }
    json policies = json::array();
    for (const auto& p : c.policies) policies.push_back(to_json(p));
    return {{"dataset", dataset},
            {"granularity", granularity_to_string(c.granularity, c.fixed_count)},
            {"policies", policies},
            {"repetitions", c.repetitions},
            {"base_seed", c.base_seed},
            {"hourly_rate", c.hourly_rate},
            {"out_dir", c.out_dir}};
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    const auto& ds = j.at("dataset");
    if (ds.contains("csv")) {
        CsvSource src;
        src.path = ds.at("csv").at("path").get<std::string>();
        src.schema = schema_from_json(ds.at("csv").at("schema"));
        c.dataset.csv = std::move(src);
    }
    if (ds.contains("synthetic")) {
        c.dataset.synthetic = synthetic_from_json(ds.at("synthetic"));
    }
    std::tie(c.granularity, c.fixed_count) =
        granularity_from_string(j.value("granularity", std::string("day")));
    for (const auto& pj : j.at("policies")) c.policies.push_back(policy_from_json(pj));
    c.repetitions = j.value("repetitions", kDefaultRepetitions);
    c.base_seed = j.value("base_seed", std::uint64_t{1});
    c.hourly_rate = j.value("hourly_rate", kDefaultHourlyRate);
    c.out_dir = j.value("out_dir", std::string("."));
    c.validate();
    return c;
}

inline json to_json(const Verdict& v) {
    return {{"signal", to_string(v.signal)}, {"diagnostics", v.diagnostics}};
}

inline Verdict verdict_from_json(const json& j) {
    Verdict v;
    v.signal = j.at("signal").get<std::string>() == "drift" ? Signal::Drift : Signal::NoDrift;
    if (j.contains("diagnostics")) {
        v.diagnostics = j.at("diagnostics").get<std::map<std::string, double>>();
    }
    return v;
}

inline json to_json(const PeriodRecord& r) {
    json j{{"period_index", r.period_index}, {"auc", num_or_null(r.auc)},
           {"f1", r.f1},                     {"mcc", r.mcc},
           {"retrained", r.retrained},       {"train_time_s", r.train_time_s},
           {"test_time_s", r.test_time_s}};
    j["drift_verdict"] = r.drift_verdict ? to_json(*r.drift_verdict) : json(nullptr);
    return j;
}

inline PeriodRecord record_from_json(const json& j) {
    PeriodRecord r;
    r.period_index = j.at("period_index").get<int>();
    r.auc = num_from(j.at("auc"));
    r.f1 = j.at("f1").get<double>();
    r.mcc = j.at("mcc").get<double>();
    r.retrained = j.at("retrained").get<bool>();
    r.train_time_s = j.at("train_time_s").get<double>();
    r.test_time_s = j.at("test_time_s").get<double>();
    if (!j.at("drift_verdict").is_null()) r.drift_verdict = verdict_from_json(j.at("drift_verdict"));
    return r;
}

inline json to_json(const RunResult& r) {
    json records = json::array();
    for (const auto& rec : r.records) records.push_back(to_json(rec));
    return {{"policy_name", r.policy_name},
            {"seed", r.seed},
            {"records", records},
            {"overall_auc", num_or_null(r.overall_auc)},
            {"overall_f1", r.overall_f1},
            {"overall_mcc", r.overall_mcc},
            {"total_train_time_s", r.total_train_time_s},
            {"total_test_time_s", r.total_test_time_s}};
}

inline RunResult run_from_json(const json& j) {
    RunResult r;
    r.policy_name = j.at("policy_name").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& rec : j.at("records")) r.records.push_back(record_from_json(rec));
    r.overall_auc = num_from(j.at("overall_auc"));
    r.overall_f1 = j.at("overall_f1").get<double>();
    r.overall_mcc = j.at("overall_mcc").get<double>();
    r.total_train_time_s = j.at("total_train_time_s").get<double>();
    r.total_test_time_s = j.at("total_test_time_s").get<double>();
    return r;
}

inline json to_json(const ResultArchive& a) {
    json results = json::array();
    for (const auto& pr : a.results) {
        json runs = json::array();
        for (const auto& run : pr.runs) {
            runs.push_back({{"failed", run.failed},
                            {"error", run.error},
                            {"result", run.failed ? json(nullptr) : to_json(run.result)}});
        }
        results.push_back({{"policy_name", pr.policy_name}, {"runs", runs}});
    }
    return {{"schema_version", a.schema_version},
            {"environment", a.environment},
            {"config", to_json(a.config)},
            {"results", results}};
}

inline ResultArchive archive_from_json(const json& j) {
    ResultArchive a;
    a.schema_version = j.at("schema_version").get<int>();
    if (a.schema_version != kArchiveSchemaVersion) {
        throw DataError("unsupported archive schema version " + std::to_string(a.schema_version));
    }
    a.environment = j.value("environment", std::string());
    a.config = config_from_json(j.at("config"));
    for (const auto& prj : j.at("results")) {
        PolicyRuns pr;
        pr.policy_name = prj.at("policy_name").get<std::string>();
        for (const auto& rj : prj.at("runs")) {
            RunOutcome run;
            run.failed = rj.at("failed").get<bool>();
            run.error = rj.value("error", std::string());
            if (!run.failed) run.result = run_from_json(rj.at("result"));
            pr.runs.push_back(std::move(run));
        }
        a.results.push_back(std::move(pr));
    }
    return a;
}

}  // namespace jsonio

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("config parse error: " + std::string(e.what()));
    }
    return jsonio::config_from_json(j);
}

inline void save_archive(const std::string& path, const ResultArchive& archive) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open archive for writing: " + path);
    out << jsonio::to_json(archive).dump(2) << '\n';
}

inline ResultArchive load_archive(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open archive: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("archive parse error: " + std::string(e.what()));
    }
    return jsonio::archive_from_json(j);
}

/// Archive serialized with every wall-clock field zeroed; two runs of the
/// same config must produce identical fingerprints.
inline json archive_fingerprint(const ResultArchive& archive) {
    json j = jsonio::to_json(archive);
    for (auto& pr : j.at("results")) {
        for (auto& run : pr.at("runs")) {
            if (run.at("result").is_null()) continue;
            auto& res = run.at("result");
            res["total_train_time_s"] = 0.0;
            res["total_test_time_s"] = 0.0;
            for (auto& rec : res.at("records")) {
                rec["train_time_s"] = 0.0;
                rec["test_time_s"] = 0.0;
            }
        }
    }
    return j;
}

}  // namespace driftbench
