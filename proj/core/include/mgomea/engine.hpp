#pragma once

#include "mgomea/archive.hpp"
#include "mgomea/clustering.hpp"
#include "mgomea/dataset.hpp"
#include "mgomea/objectives.hpp"
#include "mgomea/representation.hpp"
#include "mgomea/variation.hpp"

#include <chrono>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mgomea {

enum class Mode { SingleObjective, MultiObjective };

std::string_view modeName(Mode m);
std::optional<Mode> parseMode(std::string_view name);

struct RunConfig {
    std::size_t populationSize { 4096 };
    GenotypeConfig genotype {}; // featureCount and coefficient range are taken from the dataset
    std::vector<ObjectiveKind> objectives { ObjectiveKind::R2, ObjectiveKind::Size };
    Mode mode { Mode::MultiObjective };
    ClusteringStrategy clustering { ClusteringStrategy::Bkmrr };
    std::size_t clusters { 5 };
    bool linearScaling { true };
    bool duplicateMutation { false };
    bool dedupSize { false }; // optimize de-duplicated size in place of size
    double timeBudget { 3 * 3600.0 }; // seconds
    std::size_t maxGenerations { std::numeric_limits<std::size_t>::max() };
    std::size_t stagnationLimit { 100 };
    std::uint64_t seed { 0 };
    std::size_t workers { 1 };
    // Upper normalization bound per objective for reported hypervolume.
    // Missing entries fall back to defaults derived from the template and data.
    std::map<ObjectiveKind, double> hypervolumeMax;
};

// Throws std::invalid_argument on contradictory settings.
void validate(const RunConfig& config);

// Objective list the evaluator optimizes (size swapped for de-duplicated size
// when configured).
std::vector<ObjectiveKind> optimizedObjectives(const RunConfig& config);

GenotypeConfig genotypeFor(const RunConfig& config, const Dataset& data);
HypervolumeSpec hypervolumeSpecFor(const RunConfig& config, const Dataset& data);

enum class Termination { TimeBudget, Stagnation, GenerationLimit };
std::string_view terminationName(Termination t);

std::optional<Termination> shouldTerminate(std::size_t generation, std::size_t unchangedGenerations,
    double elapsedSeconds, const RunConfig& config);

struct GenerationRecord {
    std::size_t generation { 0 };
    double wallSeconds { 0.0 };
    double hypervolume { 0.0 };
    std::vector<double> best; // per optimized objective over the population
    std::uint64_t evaluations { 0 };
    std::size_t archiveSize { 0 };
    std::size_t unchangedGenerations { 0 };
    std::size_t fosFamilies { 0 };
};

// Deterministic part of a record (everything except wall time).
nlohmann::json toJson(const GenerationRecord& r, std::span<const ObjectiveKind> kinds);

struct RunResult {
    ElitistArchive archive;
    std::vector<GenerationRecord> records;
    std::vector<Individual> population;
    Termination termination { Termination::GenerationLimit };
    std::uint64_t evaluations { 0 };

    std::size_t generations() const { return records.empty() ? 0 : records.size() - 1; }
};

struct GenerationView {
    std::size_t generation;
    const std::vector<Individual>& population;
    const std::vector<Individual>* previous; // null for the initial population
    const ClusteringResult* clustering; // null in single-objective mode
    const ElitistArchive& archive;
};

struct RunHooks {
    bool recordArchive { true };
    std::function<void(const GenerationView&)> onGeneration {};
    // Called from worker threads; use with workers = 1 for ordered events.
    std::function<void(const GomStepEvent&)> gomObserver {};
};

// Front of the archive in the configured (reporting) objectives; de-duplicated
// size entries are replaced by the expression size of the stored genotype.
std::vector<ObjectiveVector> reportingFront(const ElitistArchive& archive, const RunConfig& config,
    const TemplateLayout& layout);

RunResult runSo(const RunConfig& config, const Dataset& data, const RunHooks& hooks = {});
RunResult runMo(const RunConfig& config, const Dataset& data, const RunHooks& hooks = {});
RunResult run(const RunConfig& config, const Dataset& data, const RunHooks& hooks = {});

} // namespace mgomea
