#include "mgomea/variation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mgomea {

bool acceptSo(const ObjectiveVector& old, const ObjectiveVector& candidate, std::size_t objective)
{
    if (!candidate.valid) {
        return false;
    }
    if (!old.valid) {
        return true;
    }
    return !candidate.better(objective, old[objective], candidate[objective]);
}

bool acceptMo(const ObjectiveVector& old, const ObjectiveVector& candidate, ElitistArchive& archive,
    const Genotype& genotype, const ObjectiveVector* anchor)
{
    if (!candidate.valid) {
        return false;
    }
    if (old.valid && dominates(old, candidate)) {
        return false;
    }
    if (anchor != nullptr && anchor->valid && dominates(*anchor, candidate)) {
        return false;
    }
    auto const admitted = archive.tryAdd(candidate, genotype);
    if (!old.valid) {
        return true;
    }
    return admitted || dominates(candidate, old) || candidate.values == old.values;
}

bool accepts(const AcceptanceRule& rule, const ObjectiveVector& old, const ObjectiveVector& candidate,
    const Genotype& genotype)
{
    if (auto const* so = std::get_if<SingleObjectiveRule>(&rule)) {
        return acceptSo(old, candidate, so->objective);
    }
    auto const& mo = std::get<MultiObjectiveRule>(rule);
    return acceptMo(old, candidate, *mo.archive, genotype, mo.anchor);
}

void evaluate(Individual& ind, ObjectiveEvaluator& evaluator)
{
    auto e = evaluator(ind.genotype);
    ind.objectives = std::move(e.objectives);
    ind.ls = e.ls;
}

bool gomStep(Individual& ind, ActiveMask& mask, const FosSubset& subset, const Individual& donor,
    const AcceptanceRule& rule, VariationContext& ctx)
{
    auto& g = ind.genotype;
    auto const t = subset.tree;

    bool changed = false;
    bool meaningful = false;
    for (auto p : subset.positions) {
        if (!(g.at(t, p) == donor.genotype.at(t, p))) {
            changed = true;
            meaningful = meaningful || mask(t, p);
        }
    }
    if (!changed || !meaningful) {
        if (ctx.observer) {
            ctx.observer({ &subset, false, false, &ind.objectives, nullptr });
        }
        return false;
    }

    std::vector<Symbol> saved;
    saved.reserve(subset.positions.size());
    for (auto p : subset.positions) {
        saved.push_back(g.at(t, p));
        g.at(t, p) = donor.genotype.at(t, p);
    }

    auto e = (*ctx.evaluator)(g);
    auto const ok = accepts(rule, ind.objectives, e.objectives, g);
    if (ctx.observer) {
        ctx.observer({ &subset, true, ok, &ind.objectives, &e.objectives });
    }
    if (ok) {
        ind.objectives = std::move(e.objectives);
        ind.ls = e.ls;
        mask = activeMask(g, *ctx.layout);
    } else {
        for (std::size_t k = 0; k < subset.positions.size(); ++k) {
            g.at(t, subset.positions[k]) = saved[k];
        }
    }
    return ok;
}

Individual gom(const Individual& ind, std::span<const FosSubset> fos, std::span<const Individual* const> donors,
    const AcceptanceRule& rule, Rng& rng, VariationContext& ctx)
{
    Individual clone = ind;
    auto const before = ind.objectives;
    auto anchored = rule;
    if (auto* mo = std::get_if<MultiObjectiveRule>(&anchored)) {
        mo->anchor = &before;
    }
    auto mask = activeMask(clone.genotype, *ctx.layout);
    for (auto const& subset : fos) {
        if (ctx.expired()) {
            break;
        }
        auto const& donor = *donors[rng.index(donors.size())];
        gomStep(clone, mask, subset, donor, anchored, ctx);
    }
    return clone;
}

void mutateCoefficients(Individual& ind, const AcceptanceRule& rule, Rng& rng, VariationContext& ctx)
{
    auto& g = ind.genotype;
    auto const mask = activeMask(g, *ctx.layout);
    auto const before = ind.objectives;
    auto anchored = rule;
    if (auto* mo = std::get_if<MultiObjectiveRule>(&anchored)) {
        mo->anchor = &before;
    }
    for (int t = 0; t < g.treeCount(); ++t) {
        for (int p = 0; p < g.treeLength(); ++p) {
            auto& s = g.at(t, p);
            if (!mask(t, p) || s.kind != SymbolKind::Constant) {
                continue;
            }
            if (ctx.expired()) {
                return;
            }
            auto const old = s.value;
            s.value = old + rng.normal(0.0, 0.1 * (1.0 + std::abs(old)));
            auto e = (*ctx.evaluator)(g);
            if (accepts(anchored, ind.objectives, e.objectives, g)) {
                ind.objectives = std::move(e.objectives);
                ind.ls = e.ls;
            } else {
                s.value = old;
            }
        }
    }
}

std::vector<std::size_t> mutateDuplicates(std::vector<Individual>& population, Rng& rng, VariationContext& ctx)
{
    std::map<std::vector<double>, std::vector<std::size_t>> groups;
    std::vector<std::size_t> invalid;
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (population[i].objectives.valid) {
            groups[population[i].objectives.values].push_back(i);
        } else {
            invalid.push_back(i);
        }
    }

    auto const& layout = *ctx.layout;
    auto const trees = static_cast<std::size_t>(ctx.config->treeCount);
    auto const length = static_cast<std::size_t>(layout.size());
    auto const cap = 10 * length * trees;

    std::vector<std::size_t> mutated;
    auto process = [&](const std::vector<std::size_t>& group) {
        if (group.size() < 2) {
            return;
        }
        auto const keep = rng.index(group.size());
        for (std::size_t k = 0; k < group.size(); ++k) {
            if (k == keep) {
                continue;
            }
            if (ctx.expired()) {
                return;
            }
            auto& ind = population[group[k]];
            auto const mask = activeMask(ind.genotype, layout);
            for (std::size_t attempt = 0; attempt < cap; ++attempt) {
                auto t = static_cast<int>(rng.index(trees));
                auto p = static_cast<int>(rng.index(length));
                auto s = sampleLegalSymbol(t, layout.depth(p), *ctx.config, rng);
                if (s == ind.genotype.at(t, p)) {
                    continue;
                }
                // inactive positions stay inactive: none of their ancestors change
                ind.genotype.at(t, p) = s;
                if (mask(t, p)) {
                    break;
                }
            }
            evaluate(ind, *ctx.evaluator);
            mutated.push_back(group[k]);
        }
    };
    for (auto const& [values, group] : groups) {
        process(group);
    }
    process(invalid);
    std::sort(mutated.begin(), mutated.end());
    return mutated;
}

} // namespace mgomea
