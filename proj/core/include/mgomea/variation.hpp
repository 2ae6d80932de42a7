#pragma once

#include "mgomea/archive.hpp"
#include "mgomea/linkage.hpp"
#include "mgomea/objectives.hpp"
#include "mgomea/representation.hpp"
#include "mgomea/rng.hpp"

#include <chrono>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace mgomea {

struct Individual {
    Genotype genotype;
    ObjectiveVector objectives;
    LinearScaling ls;
    int cluster { -1 };
};

struct SingleObjectiveRule {
    std::size_t objective { 0 };
};

struct MultiObjectiveRule {
    ElitistArchive* archive { nullptr };
    // Candidates dominated by this vector are rejected too; gom sets it to the
    // pre-GOM state.
    const ObjectiveVector* anchor { nullptr };
};

using AcceptanceRule = std::variant<SingleObjectiveRule, MultiObjectiveRule>;

// New is valid and not worse than old in the given objective.
bool acceptSo(const ObjectiveVector& old, const ObjectiveVector& candidate, std::size_t objective);
// Pareto improvement, identical objectives, or admission to the archive.
// Candidates dominated by `old` or by `anchor` are rejected before the archive
// is consulted; every other valid candidate is offered to the archive.
bool acceptMo(const ObjectiveVector& old, const ObjectiveVector& candidate, ElitistArchive& archive,
    const Genotype& genotype, const ObjectiveVector* anchor = nullptr);
bool accepts(const AcceptanceRule& rule, const ObjectiveVector& old, const ObjectiveVector& candidate,
    const Genotype& genotype);

struct GomStepEvent {
    const FosSubset* subset;
    bool evaluated;
    bool accepted;
    const ObjectiveVector* before;
    const ObjectiveVector* after; // candidate objectives; null when not evaluated
};

struct VariationContext {
    const GenotypeConfig* config;
    const TemplateLayout* layout;
    ObjectiveEvaluator* evaluator;
    std::function<void(const GomStepEvent&)> observer {}; // instrumentation hook
    // gom, mutateCoefficients and mutateDuplicates stop early once this passes
    std::chrono::steady_clock::time_point deadline { std::chrono::steady_clock::time_point::max() };

    bool expired() const { return std::chrono::steady_clock::now() >= deadline; }
};

// One optimal-mixing step on `ind` in place. `mask` must be the active mask of
// ind.genotype and is refreshed on acceptance. Returns true if accepted.
bool gomStep(Individual& ind, ActiveMask& mask, const FosSubset& subset, const Individual& donor,
    const AcceptanceRule& rule, VariationContext& ctx);

// Optimal mixing over the whole FOS (in the given order) with donors drawn
// uniformly from `donors`. Returns the resulting clone.
Individual gom(const Individual& ind, std::span<const FosSubset> fos, std::span<const Individual* const> donors,
    const AcceptanceRule& rule, Rng& rng, VariationContext& ctx);

// Gaussian step per active constant, c += N(0, 0.1 (1 + |c|)); each step is
// reverted when the rule rejects it.
void mutateCoefficients(Individual& ind, const AcceptanceRule& rule, Rng& rng, VariationContext& ctx);

// Mutates all but one randomly kept member of every group of individuals with
// identical objective vectors until an active position changes (capped at
// 10 * L * M attempts), then re-evaluates. Returns indices mutated.
std::vector<std::size_t> mutateDuplicates(std::vector<Individual>& population, Rng& rng, VariationContext& ctx);

// Re-evaluates ind in place.
void evaluate(Individual& ind, ObjectiveEvaluator& evaluator);

} // namespace mgomea
