#pragma once

#include "mgomea/dataset.hpp"
#include "mgomea/engine.hpp"
#include "mgomea/stats.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgomea {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// "synth:<id>[:<samples>[:<seed>]]" or "csv:<path>:<target column name or index>".
struct DatasetRef {
    enum class Kind { Synthetic, Csv };

    Kind kind { Kind::Synthetic };
    std::string label; // directory name of the dataset's runs
    int id { 1 };
    std::size_t samples { DefaultSyntheticSamples };
    std::uint64_t seed { 0 };
    std::filesystem::path path;
    ColumnRef target { std::string("y") };
};

DatasetRef parseDatasetRef(std::string_view text);
Dataset loadDataset(const DatasetRef& ref);

struct ExperimentConfig {
    std::string name;
    RunConfig run;
};

struct ExperimentSpec {
    std::vector<ExperimentConfig> configs;
    std::vector<DatasetRef> datasets;
    std::size_t repetitions { 10 };
    std::uint64_t baseSeed { 0 };
    std::filesystem::path output;
    std::size_t jobs { 1 }; // runs executed concurrently
    bool resume { false }; // skip runs whose directory is complete and matches
};

// Applies one run-level `key = value` setting; throws ConfigError on unknown
// keys or malformed values.
void applyRunSetting(RunConfig& config, std::string_view key, std::string_view value);
// Canonical `key = value` text; parseRunConfig(formatRunConfig(c)) reproduces c.
std::string formatRunConfig(const RunConfig& config);
RunConfig parseRunConfig(std::string_view text);

// Flat key = value file. Keys before the first [section] are global: the
// experiment keys (datasets, repetitions, base_seed, output, jobs, resume) and
// run-level defaults shared by every section. Each [name] section defines one
// configuration.
ExperimentSpec parseExperimentSpec(std::string_view text);
ExperimentSpec loadExperimentSpec(const std::filesystem::path& path);

// MGOMEA_OUTPUT_ROOT, or "mgomea-out".
std::filesystem::path defaultOutputRoot();

std::filesystem::path runDirectory(const std::filesystem::path& output, std::string_view config,
    std::string_view dataset, std::size_t repetition);

// Writes config.txt, generations.jsonl, timing.csv, front.csv and finally
// run.json (the completion marker).
void writeRunOutputs(const std::filesystem::path& dir, const RunConfig& config, const Dataset& data,
    const RunResult& result, const nlohmann::json& meta);

struct RunStatus {
    std::string config;
    std::string dataset;
    std::size_t repetition { 0 };
    std::uint64_t seed { 0 };
    std::filesystem::path directory;
    bool ok { false };
    bool skipped { false };
    std::string error;
};

struct ExperimentOutcome {
    std::vector<RunStatus> runs;
    std::size_t failures { 0 };
};

// Executes every (configuration, dataset, repetition) with seed
// base_seed + repetition, then writes the summary tables. Dataset load
// failures are reported and the remaining runs proceed.
ExperimentOutcome runExperiments(const ExperimentSpec& spec, std::ostream* log = nullptr);

struct RunSummary {
    std::string config;
    std::string dataset;
    std::size_t repetition { 0 };
    std::uint64_t seed { 0 };
    std::string mode;
    std::vector<ObjectiveKind> objectives;
    std::size_t generations { 0 };
    std::uint64_t evaluations { 0 };
    std::string termination;
    double hypervolumeRun { 0.0 }; // per-run normalization
    double hypervolumeShared { 0.0 }; // shared normalization
    std::vector<ObjectiveVector> front; // reporting objectives
};

// Upper normalization bounds shared by all runs on one dataset with the same
// objective list: 1 for r2, the largest observed value otherwise.
HypervolumeSpec sharedHypervolumeSpec(std::span<const ObjectiveKind> kinds,
    std::span<const std::vector<ObjectiveVector>> fronts);

// Reads every completed run below `output`, recomputes shared-normalization
// hypervolumes and writes summary.csv (one row per run) and aggregate.csv
// (mean and std per configuration and dataset).
std::vector<RunSummary> summarize(const std::filesystem::path& output);

struct ComparisonRow {
    std::string dataset;
    std::size_t n { 0 };
    double meanA { 0.0 };
    double stdA { 0.0 };
    double meanB { 0.0 };
    double stdB { 0.0 };
    double medianA { 0.0 };
    double medianB { 0.0 };
    double pValue { 1.0 };
    bool significant { false };
};

struct ComparisonReport {
    std::string configA;
    std::string configB;
    double alpha { 0.05 };
    Alternative alternative { Alternative::TwoSided };
    std::vector<ComparisonRow> rows;
};

struct PairedSamples {
    std::string dataset;
    std::vector<double> a;
    std::vector<double> b;
};

// Signed-rank test per dataset, Holm correction over the datasets.
ComparisonReport wilcoxonHolm(std::span<const PairedSamples> samples, double alpha = 0.05,
    Alternative alternative = Alternative::TwoSided);

// Pairs shared-normalization hypervolumes by repetition.
ComparisonReport compare(std::span<const RunSummary> runs, std::string_view configA, std::string_view configB,
    double alpha = 0.05, Alternative alternative = Alternative::TwoSided);

void writeComparisonCsv(const ComparisonReport& report, const std::filesystem::path& path);

// convergence_generations.csv and convergence_time.csv with columns
// series,x,mean,std,n; one series per configuration and dataset.
void emitConvergence(const std::filesystem::path& output);

double median(std::vector<double> xs);

} // namespace mgomea
