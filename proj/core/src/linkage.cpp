#include "mgomea/linkage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mgomea {

std::uint32_t linkageCategory(const Symbol& s)
{
    auto const kind = static_cast<std::uint32_t>(s.kind) << 24U;
    switch (s.kind) {
    case SymbolKind::Operator: return kind | static_cast<std::uint32_t>(s.op);
    case SymbolKind::Constant: return kind;
    default: return kind | (s.index & 0xffffffU);
    }
}

MIMatrix miMatrix(std::span<const Genotype* const> individuals, int tree)
{
    if (individuals.empty()) {
        throw std::invalid_argument("mutual information needs at least one individual");
    }
    auto const n = individuals.size();
    auto const length = static_cast<std::size_t>(individuals.front()->treeLength());

    // Relabel categories densely per position.
    std::vector<std::vector<std::uint16_t>> labels(length, std::vector<std::uint16_t>(n));
    std::vector<std::size_t> alphabet(length, 0);
    for (std::size_t p = 0; p < length; ++p) {
        std::vector<std::uint32_t> seen;
        for (std::size_t k = 0; k < n; ++k) {
            auto c = linkageCategory(individuals[k]->at(tree, static_cast<int>(p)));
            auto it = std::find(seen.begin(), seen.end(), c);
            if (it == seen.end()) {
                seen.push_back(c);
                it = seen.end() - 1;
            }
            labels[p][k] = static_cast<std::uint16_t>(it - seen.begin());
        }
        alphabet[p] = seen.size();
    }

    auto const total = static_cast<double>(n);
    auto entropyOf = [&](const std::vector<std::size_t>& counts) {
        double h = 0.0;
        for (auto c : counts) {
            if (c > 0) {
                auto q = static_cast<double>(c) / total;
                h -= q * std::log(q);
            }
        }
        return h;
    };

    std::vector<double> entropy(length);
    for (std::size_t p = 0; p < length; ++p) {
        std::vector<std::size_t> counts(alphabet[p], 0);
        for (auto l : labels[p]) {
            ++counts[l];
        }
        entropy[p] = entropyOf(counts);
    }

    MIMatrix mi(length);
    std::vector<std::size_t> joint;
    for (std::size_t i = 0; i < length; ++i) {
        mi(i, i) = entropy[i];
        for (std::size_t j = i + 1; j < length; ++j) {
            auto const bj = alphabet[j];
            joint.assign(alphabet[i] * bj, 0);
            for (std::size_t k = 0; k < n; ++k) {
                ++joint[labels[i][k] * bj + labels[j][k]];
            }
            auto v = entropy[i] + entropy[j] - entropyOf(joint);
            v = std::max(0.0, v);
            mi(i, j) = v;
            mi(j, i) = v;
        }
    }
    return mi;
}

Fos upgmaFos(const MIMatrix& mi, int tree, bool includeRoot)
{
    auto const length = mi.size();
    Fos fos;
    struct Cluster {
        std::vector<int> positions;
    };
    std::vector<Cluster> clusters;
    for (std::size_t p = 0; p < length; ++p) {
        clusters.push_back({ { static_cast<int>(p) } });
        fos.push_back({ tree, { static_cast<int>(p) } });
    }
    // similarity between live clusters, indexed by cluster slot
    std::vector<std::vector<double>> sim(length, std::vector<double>(length, 0.0));
    for (std::size_t i = 0; i < length; ++i) {
        for (std::size_t j = 0; j < length; ++j) {
            sim[i][j] = mi(i, j);
        }
    }
    std::vector<bool> alive(length, true);
    auto live = length;

    while (live > 1) {
        // Most similar pair; ties go to the pair with the lowest smallest
        // positions, compared lexicographically.
        std::size_t bi = 0;
        std::size_t bj = 0;
        double best = -1.0;
        bool found = false;
        for (std::size_t i = 0; i < length; ++i) {
            if (!alive[i]) {
                continue;
            }
            for (std::size_t j = i + 1; j < length; ++j) {
                if (!alive[j]) {
                    continue;
                }
                auto key = std::pair(std::min(clusters[i].positions.front(), clusters[j].positions.front()),
                    std::max(clusters[i].positions.front(), clusters[j].positions.front()));
                auto bestKey = std::pair(std::min(clusters[bi].positions.front(), clusters[bj].positions.front()),
                    std::max(clusters[bi].positions.front(), clusters[bj].positions.front()));
                if (!found || sim[i][j] > best || (sim[i][j] == best && key < bestKey)) {
                    best = sim[i][j];
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }

        auto const si = static_cast<double>(clusters[bi].positions.size());
        auto const sj = static_cast<double>(clusters[bj].positions.size());
        for (std::size_t k = 0; k < length; ++k) {
            if (!alive[k] || k == bi || k == bj) {
                continue;
            }
            auto merged = (si * sim[bi][k] + sj * sim[bj][k]) / (si + sj);
            sim[bi][k] = merged;
            sim[k][bi] = merged;
        }
        auto& target = clusters[bi].positions;
        target.insert(target.end(), clusters[bj].positions.begin(), clusters[bj].positions.end());
        std::sort(target.begin(), target.end());
        alive[bj] = false;
        --live;

        if (live > 1 || includeRoot) {
            fos.push_back({ tree, target });
        }
    }
    return fos;
}

Fos learnFos(std::span<const Genotype* const> individuals, int treeCount)
{
    Fos fos;
    for (int t = 0; t < treeCount; ++t) {
        auto mi = miMatrix(individuals, t);
        auto part = upgmaFos(mi, t, t < treeCount - 1);
        fos.insert(fos.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return fos;
}

Fos combinedFos(std::span<const Genotype* const> individuals, int treeCount, Rng& rng)
{
    auto fos = learnFos(individuals, treeCount);
    rng.shuffle(std::span<FosSubset>(fos));
    return fos;
}

} // namespace mgomea
