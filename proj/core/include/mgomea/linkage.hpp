#pragma once

#include "mgomea/representation.hpp"
#include "mgomea/rng.hpp"

#include <span>
#include <vector>

namespace mgomea {

// Pairwise mutual information between template positions of one tree.
class MIMatrix {
public:
    MIMatrix() = default;
    explicit MIMatrix(std::size_t size)
        : size_(size)
        , data_(size * size, 0.0)
    {
    }

    std::size_t size() const { return size_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * size_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * size_ + j]; }

private:
    std::size_t size_ { 0 };
    std::vector<double> data_;
};

struct FosSubset {
    int tree { 0 };
    std::vector<int> positions; // ascending

    bool operator==(const FosSubset&) const = default;
    auto operator<=>(const FosSubset&) const = default;
};

using Fos = std::vector<FosSubset>;

// Category used for MI estimation: opcode for operators, index for features,
// calls and args, one shared category for all constants.
std::uint32_t linkageCategory(const Symbol& s);

// Natural-log MI over the empirical symbol-category distribution.
MIMatrix miMatrix(std::span<const Genotype* const> individuals, int tree);

// Linkage tree from average-linkage agglomeration with MI as similarity.
// Singletons first, then merged clusters in merge order; the full set is
// appended only when includeRoot is set.
Fos upgmaFos(const MIMatrix& mi, int tree, bool includeRoot);

// Union of per-tree linkage trees; every tree but the last keeps its full-tree
// subset. Not shuffled.
Fos learnFos(std::span<const Genotype* const> individuals, int treeCount);
// learnFos followed by a uniform shuffle.
Fos combinedFos(std::span<const Genotype* const> individuals, int treeCount, Rng& rng);

} // namespace mgomea
