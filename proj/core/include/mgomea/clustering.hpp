#pragma once

#include "mgomea/objectives.hpp"
#include "mgomea/rng.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mgomea {

enum class ClusteringStrategy {
    Original, // leader k-means + 2n/k donor clusters
    Bkrr, // balanced round robin
    Bkmrr, // per-objective extreme clusters, then balanced round robin
    None,
};

std::string_view strategyName(ClusteringStrategy s);
std::optional<ClusteringStrategy> parseStrategy(std::string_view name);

// Row-major n x m point matrix.
struct PointSet {
    std::size_t count { 0 };
    std::size_t dims { 0 };
    std::vector<double> data;

    std::span<const double> operator[](std::size_t i) const { return { data.data() + i * dims, dims }; }
};

struct Cluster {
    std::vector<double> center; // normalized objective space
    std::vector<std::size_t> members;
    std::vector<std::size_t> donors;
    int extremeObjective { -1 }; // -1 for middle clusters

    bool isExtreme() const { return extremeObjective >= 0; }
};

struct ClusteringResult {
    std::vector<Cluster> clusters;
    std::vector<std::size_t> assignment; // individual -> cluster
    std::vector<std::size_t> objectiveOrder; // BKmRR carving order
};

// Per-objective min-max scaling to [0, 1]; zero-range objectives map to 0.
// Invalid vectors are placed at the worst corner.
PointSet normalizeObjectives(std::span<const ObjectiveVector> objectives);

struct LeaderMeans {
    std::vector<std::vector<double>> centers;
    std::vector<std::size_t> assignment; // parallel to the `subset` argument
    std::size_t iterations { 0 };
};

// Leader selection (best point of a random objective, then farthest-point
// picks) followed by nearest-leader assignment and k-means (100 iterations,
// 1e-9 center movement). Operates on the points listed in `subset`.
LeaderMeans leadersKMeans(const PointSet& points, std::span<const std::size_t> subset, std::size_t k,
    std::uint32_t maximizeMask, Rng& rng);

double squaredDistance(std::span<const double> a, std::span<const double> b);

ClusteringResult clusterOriginal(std::span<const ObjectiveVector> objectives, std::size_t k, Rng& rng);
ClusteringResult clusterBkrr(std::span<const ObjectiveVector> objectives, std::size_t k, Rng& rng);
ClusteringResult clusterBkmrr(std::span<const ObjectiveVector> objectives, std::size_t k, Rng& rng);
ClusteringResult noClustering(std::span<const ObjectiveVector> objectives);

ClusteringResult cluster(ClusteringStrategy strategy, std::span<const ObjectiveVector> objectives, std::size_t k,
    Rng& rng);

} // namespace mgomea
