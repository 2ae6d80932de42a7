#include "mgomea/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace mgomea;

namespace {

int runCommand(const fs::path& specPath, const std::optional<fs::path>& output, std::optional<std::size_t> jobs,
    bool resume)
{
    auto spec = loadExperimentSpec(specPath);
    if (output) {
        spec.output = *output;
    }
    if (jobs) {
        spec.jobs = std::max<std::size_t>(1, *jobs);
    }
    spec.resume = spec.resume || resume;
    fmt::print("{} configurations x {} datasets x {} repetitions -> {}\n", spec.configs.size(), spec.datasets.size(),
        spec.repetitions, spec.output.string());
    auto outcome = runExperiments(spec, &std::cout);
    fmt::print("{} runs, {} failed\n", outcome.runs.size(), outcome.failures);
    for (auto const& r : outcome.runs) {
        if (!r.ok) {
            fmt::print(stderr, "failed: {}/{}/rep{}: {}\n", r.config, r.dataset, r.repetition, r.error);
        }
    }
    return outcome.failures == 0 ? 0 : 1;
}

int summarizeCommand(const fs::path& dir)
{
    auto runs = summarize(dir);
    emitConvergence(dir);
    if (runs.empty()) {
        fmt::print(stderr, "no completed runs below {}\n", dir.string());
        return 1;
    }
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (auto const& r : runs) {
        groups[{ r.config, r.dataset }].push_back(r.hypervolumeShared);
    }
    fmt::print("{:<24} {:<16} {:>5} {:>10} {:>10}\n", "config", "dataset", "runs", "hv mean", "hv std");
    for (auto const& [key, values] : groups) {
        fmt::print("{:<24} {:<16} {:>5} {:>10.4f} {:>10.4f}\n", key.first, key.second, values.size(), mean(values),
            stddev(values));
    }
    return 0;
}

int compareCommand(const fs::path& dir, const std::string& a, const std::string& b, double alpha,
    const std::string& alternative, const std::optional<fs::path>& output)
{
    auto alt = parseAlternative(alternative);
    if (!alt) {
        throw std::invalid_argument(fmt::format("unknown alternative '{}'", alternative));
    }
    auto runs = summarize(dir);
    auto report = compare(runs, a, b, alpha, *alt);
    auto path = output.value_or(dir / fmt::format("compare_{}_vs_{}.csv", a, b));
    writeComparisonCsv(report, path);
    fmt::print("{:<16} {:>3} {:>18} {:>18} {:>10} {}\n", "dataset", "n", a, b, "p", "significant");
    for (auto const& r : report.rows) {
        fmt::print("{:<16} {:>3} {:>8.4f} +- {:<6.4f} {:>8.4f} +- {:<6.4f} {:>10.4g} {}\n", r.dataset, r.n, r.meanA,
            r.stdA, r.meanB, r.stdB, r.pValue, r.significant ? "yes" : "no");
    }
    fmt::print("written to {}\n", path.string());
    return 0;
}

int synthCommand(std::vector<int> ids, std::size_t samples, std::uint64_t seed, const fs::path& dir)
{
    if (ids.empty()) {
        ids = { 1, 2, 3, 4, 5 };
    }
    fs::create_directories(dir);
    for (auto id : ids) {
        auto path = dir / fmt::format("synth{}.csv", id);
        writeCsv(generateSynthetic(id, samples, seed), path);
        fmt::print("{}\n", path.string());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Modular GP-GOMEA symbolic regression experiments" };
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute an experiment spec");
    fs::path specPath;
    std::optional<fs::path> runOutput;
    std::optional<std::size_t> jobs;
    bool resume = false;
    run->add_option("spec", specPath, "experiment spec file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", runOutput, "output directory (overrides the spec)");
    run->add_option("-j,--jobs", jobs, "concurrent runs");
    run->add_flag("--resume", resume, "skip runs that already completed with the same settings");

    auto* summ = app.add_subcommand("summarize", "recompute summary tables and convergence data");
    fs::path summDir;
    summ->add_option("dir", summDir, "experiment output directory")->required()->check(CLI::ExistingDirectory);

    auto* cmp = app.add_subcommand("compare", "Wilcoxon signed-rank comparison with Holm correction");
    fs::path cmpDir;
    std::string configA;
    std::string configB;
    double alpha = 0.05;
    std::string alternative = "two-sided";
    std::optional<fs::path> cmpOutput;
    cmp->add_option("dir", cmpDir, "experiment output directory")->required()->check(CLI::ExistingDirectory);
    cmp->add_option("a", configA, "first configuration")->required();
    cmp->add_option("b", configB, "second configuration")->required();
    cmp->add_option("--alpha", alpha, "family-wise significance level")->capture_default_str();
    cmp->add_option("--alternative", alternative, "two-sided, greater (a > b) or less")->capture_default_str();
    cmp->add_option("-o,--output", cmpOutput, "report CSV path");

    auto* synth = app.add_subcommand("synth", "write the synthetic datasets as CSV");
    std::vector<int> ids;
    std::size_t samples = DefaultSyntheticSamples;
    std::uint64_t seed = 0;
    fs::path synthDir = ".";
    synth->add_option("--id", ids, "dataset ids (default: all)")->check(CLI::Range(1, 5));
    synth->add_option("-n,--samples", samples, "samples per dataset")->capture_default_str();
    synth->add_option("--seed", seed, "generator seed")->capture_default_str();
    synth->add_option("-o,--output", synthDir, "output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return runCommand(specPath, runOutput, jobs, resume);
        }
        if (summ->parsed()) {
            return summarizeCommand(summDir);
        }
        if (cmp->parsed()) {
            return compareCommand(cmpDir, configA, configB, alpha, alternative, cmpOutput);
        }
        if (synth->parsed()) {
            return synthCommand(ids, samples, seed, synthDir);
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
