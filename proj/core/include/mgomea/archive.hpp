#pragma once

#include "mgomea/objectives.hpp"
#include "mgomea/representation.hpp"

#include <mutex>
#include <optional>
#include <span>
#include <vector>

namespace mgomea {

// Pareto dominance: a is no worse than b everywhere and strictly better once.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

struct ArchiveEntry {
    ObjectiveVector objectives;
    Genotype genotype;
    std::uint64_t epoch { 0 }; // grid epoch at admission
};

// Elitist archive with adaptive-grid thinning. The grid spans the archive's
// extent at the last rebuild; before the first rebuild admission is by
// non-dominance alone.
//
// tryAdd is linearizable (internally locked). rebuildGrid and the accessors
// are meant for the generation barrier.
class ElitistArchive {
public:
    explicit ElitistArchive(std::size_t steps = 100)
        : steps_(steps)
    {
    }

    ElitistArchive(const ElitistArchive& other);
    ElitistArchive& operator=(const ElitistArchive& other);

    bool tryAdd(const ObjectiveVector& candidate, const Genotype& genotype);

    // New bounds from the current members; advances the stagnation counter
    // when nothing changed since the previous rebuild.
    void rebuildGrid();

    const std::vector<ArchiveEntry>& members() const { return members_; }
    std::vector<ObjectiveVector> front() const;
    std::size_t size() const { return members_.size(); }

    std::size_t steps() const { return steps_; }
    std::size_t unchangedGenerations() const { return unchanged_; }
    std::uint64_t epoch() const { return epoch_; }
    // Grid filtering is active for objective o after a rebuild with a
    // non-degenerate range.
    bool gridActive(std::size_t objective) const;

    // Cell coordinates; objectives without an active grid use the raw value.
    std::vector<double> cellOf(const ObjectiveVector& v) const;

private:
    struct Bounds {
        double lo;
        double hi;
    };

    std::size_t steps_;
    std::vector<ArchiveEntry> members_;
    std::vector<std::optional<Bounds>> bounds_;
    std::size_t unchanged_ { 0 };
    bool changed_ { false };
    std::uint64_t epoch_ { 0 };
    mutable std::mutex mutex_;
};

// Normalization of one objective for hypervolume: values map linearly from
// [lo, hi] onto [0, 1] and are clamped; maximized objectives are flipped so
// the reference point is (1, ..., 1).
struct ObjectiveRange {
    bool maximize { false };
    double lo { 0.0 };
    double hi { 1.0 };
};

struct HypervolumeSpec {
    std::vector<ObjectiveRange> ranges;
};

// Normalized, minimization-oriented point.
std::vector<double> normalizeForHypervolume(const ObjectiveVector& v, const HypervolumeSpec& spec);

// Two-objective hypervolume w.r.t. reference (1, 1) after normalization.
double hypervolume(std::span<const ObjectiveVector> front, const HypervolumeSpec& spec);
// Same, on already normalized minimization points.
double hypervolume2d(std::span<const std::array<double, 2>> points);

} // namespace mgomea
