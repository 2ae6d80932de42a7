#include "mgomea/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace mgomea {

std::string_view strategyName(ClusteringStrategy s)
{
    switch (s) {
    case ClusteringStrategy::Original: return "original";
    case ClusteringStrategy::Bkrr: return "bkrr";
    case ClusteringStrategy::Bkmrr: return "bkmrr";
    case ClusteringStrategy::None: return "none";
    }
    return "?";
}

std::optional<ClusteringStrategy> parseStrategy(std::string_view name)
{
    for (auto s : { ClusteringStrategy::Original, ClusteringStrategy::Bkrr, ClusteringStrategy::Bkmrr,
             ClusteringStrategy::None }) {
        if (strategyName(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

double squaredDistance(std::span<const double> a, std::span<const double> b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return d;
}

PointSet normalizeObjectives(std::span<const ObjectiveVector> objectives)
{
    PointSet ps;
    ps.count = objectives.size();
    if (objectives.empty()) {
        return ps;
    }
    ps.dims = objectives.front().size();
    ps.data.assign(ps.count * ps.dims, 0.0);
    for (std::size_t o = 0; o < ps.dims; ++o) {
        auto lo = std::numeric_limits<double>::infinity();
        auto hi = -lo;
        for (auto const& v : objectives) {
            if (v.valid) {
                lo = std::min(lo, v[o]);
                hi = std::max(hi, v[o]);
            }
        }
        auto const maximize = objectives.front().maximizes(o);
        for (std::size_t i = 0; i < ps.count; ++i) {
            auto const& v = objectives[i];
            double x = 0.0;
            if (!v.valid) {
                x = maximize ? 0.0 : 1.0;
            } else if (hi > lo) {
                x = (v[o] - lo) / (hi - lo);
            }
            ps.data[i * ps.dims + o] = x;
        }
    }
    return ps;
}

namespace {
    std::size_t nearest(std::span<const double> p, const std::vector<std::vector<double>>& centers)
    {
        std::size_t best = 0;
        auto bestD = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            auto d = squaredDistance(p, centers[c]);
            if (d < bestD) {
                bestD = d;
                best = c;
            }
        }
        return best;
    }

    std::vector<double> meanOf(const PointSet& points, std::span<const std::size_t> indices)
    {
        std::vector<double> c(points.dims, 0.0);
        for (auto i : indices) {
            auto p = points[i];
            for (std::size_t d = 0; d < points.dims; ++d) {
                c[d] += p[d];
            }
        }
        if (!indices.empty()) {
            for (auto& v : c) {
                v /= static_cast<double>(indices.size());
            }
        }
        return c;
    }

    // Balanced assignment: clusters take turns, in a freshly shuffled order
    // every round, claiming their nearest unassigned point. Centers stay fixed.
    std::vector<std::vector<std::size_t>> roundRobin(const PointSet& points, std::span<const std::size_t> subset,
        const std::vector<std::vector<double>>& centers, Rng& rng)
    {
        auto const k = centers.size();
        std::vector<std::vector<std::size_t>> order(k);
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<std::pair<double, std::size_t>> keyed;
            keyed.reserve(subset.size());
            for (auto i : subset) {
                keyed.emplace_back(squaredDistance(points[i], centers[c]), i);
            }
            std::sort(keyed.begin(), keyed.end());
            order[c].reserve(keyed.size());
            for (auto const& [d, i] : keyed) {
                order[c].push_back(i);
            }
        }

        std::vector<bool> taken(points.count, false);
        std::vector<std::size_t> cursor(k, 0);
        std::vector<std::vector<std::size_t>> members(k);
        std::size_t remaining = subset.size();
        std::vector<std::size_t> turn(k);
        while (remaining > 0) {
            std::iota(turn.begin(), turn.end(), 0);
            rng.shuffle(std::span<std::size_t>(turn));
            for (auto c : turn) {
                if (remaining == 0) {
                    break;
                }
                while (taken[order[c][cursor[c]]]) {
                    ++cursor[c];
                }
                auto i = order[c][cursor[c]];
                taken[i] = true;
                members[c].push_back(i);
                --remaining;
            }
        }
        for (auto& m : members) {
            std::sort(m.begin(), m.end());
        }
        return members;
    }

    // Marks, per objective, the not-yet-extreme cluster whose center is best.
    void identifyExtremes(std::vector<Cluster>& clusters, std::size_t dims, std::uint32_t maximizeMask)
    {
        for (std::size_t o = 0; o < dims && o < clusters.size(); ++o) {
            auto const maximize = ((maximizeMask >> o) & 1U) != 0;
            int best = -1;
            for (std::size_t c = 0; c < clusters.size(); ++c) {
                if (clusters[c].isExtreme()) {
                    continue;
                }
                if (best < 0) {
                    best = static_cast<int>(c);
                    continue;
                }
                auto v = clusters[c].center[o];
                auto b = clusters[static_cast<std::size_t>(best)].center[o];
                if (maximize ? v > b : v < b) {
                    best = static_cast<int>(c);
                }
            }
            clusters[static_cast<std::size_t>(best)].extremeObjective = static_cast<int>(o);
        }
    }

    void checkK(std::size_t n, std::size_t k)
    {
        if (k == 0 || k > n) {
            throw std::invalid_argument(fmt::format("cannot form {} clusters from {} individuals", k, n));
        }
    }

    std::vector<std::size_t> assignmentFrom(const std::vector<Cluster>& clusters, std::size_t n)
    {
        std::vector<std::size_t> assignment(n, 0);
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            for (auto i : clusters[c].members) {
                assignment[i] = c;
            }
        }
        return assignment;
    }
} // namespace

LeaderMeans leadersKMeans(const PointSet& points, std::span<const std::size_t> subset, std::size_t k,
    std::uint32_t maximizeMask, Rng& rng)
{
    checkK(subset.size(), k);
    auto const o = rng.index(points.dims);
    auto const maximize = ((maximizeMask >> o) & 1U) != 0;

    std::size_t first = 0;
    for (std::size_t s = 1; s < subset.size(); ++s) {
        auto v = points[subset[s]][o];
        auto b = points[subset[first]][o];
        if (maximize ? v > b : v < b) {
            first = s;
        }
    }

    std::vector<bool> isLeader(subset.size(), false);
    std::vector<double> toLeader(subset.size(), std::numeric_limits<double>::infinity());
    LeaderMeans out;
    auto addLeader = [&](std::size_t s) {
        isLeader[s] = true;
        auto p = points[subset[s]];
        out.centers.emplace_back(p.begin(), p.end());
        for (std::size_t t = 0; t < subset.size(); ++t) {
            toLeader[t] = std::min(toLeader[t], squaredDistance(points[subset[t]], p));
        }
    };
    addLeader(first);
    while (out.centers.size() < k) {
        std::size_t pick = subset.size();
        for (std::size_t s = 0; s < subset.size(); ++s) {
            if (!isLeader[s] && (pick == subset.size() || toLeader[s] > toLeader[pick])) {
                pick = s;
            }
        }
        addLeader(pick);
    }

    out.assignment.resize(subset.size());
    for (std::size_t s = 0; s < subset.size(); ++s) {
        out.assignment[s] = nearest(points[subset[s]], out.centers);
    }

    std::vector<std::vector<std::size_t>> groups(k);
    for (std::size_t it = 0; it < 100; ++it) {
        for (auto& g : groups) {
            g.clear();
        }
        for (std::size_t s = 0; s < subset.size(); ++s) {
            groups[out.assignment[s]].push_back(subset[s]);
        }
        double moved = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (groups[c].empty()) {
                continue;
            }
            auto next = meanOf(points, groups[c]);
            moved = std::max(moved, std::sqrt(squaredDistance(next, out.centers[c])));
            out.centers[c] = std::move(next);
        }
        ++out.iterations;
        for (std::size_t s = 0; s < subset.size(); ++s) {
            out.assignment[s] = nearest(points[subset[s]], out.centers);
        }
        if (moved < 1e-9) {
            break;
        }
    }
    return out;
}

ClusteringResult clusterOriginal(std::span<const ObjectiveVector> objectives, std::size_t k, Rng& rng)
{
    auto const n = objectives.size();
    checkK(n, k);
    auto const points = normalizeObjectives(objectives);
    auto const mask = objectives.front().maximizeMask;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    auto lm = leadersKMeans(points, all, k, mask, rng);

    auto const donorSize = std::min(n, 2 * n / k);
    ClusteringResult result;
    result.clusters.resize(k);
    std::vector<std::vector<std::size_t>> memberOf(n);
    for (std::size_t c = 0; c < k; ++c) {
        auto& cl = result.clusters[c];
        cl.center = lm.centers[c];
        std::vector<std::pair<double, std::size_t>> keyed;
        keyed.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            keyed.emplace_back(squaredDistance(points[i], cl.center), i);
        }
        std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(donorSize), keyed.end());
        for (std::size_t r = 0; r < donorSize; ++r) {
            cl.donors.push_back(keyed[r].second);
            memberOf[keyed[r].second].push_back(c);
        }
        std::sort(cl.donors.begin(), cl.donors.end());
    }

    result.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto const& options = memberOf[i];
        if (options.empty()) {
            result.assignment[i] = rng.index(k);
        } else if (options.size() == 1) {
            result.assignment[i] = options.front();
        } else {
            result.assignment[i] = options[rng.index(options.size())];
        }
        result.clusters[result.assignment[i]].members.push_back(i);
    }
    identifyExtremes(result.clusters, points.dims, mask);
    return result;
}

ClusteringResult clusterBkrr(std::span<const ObjectiveVector> objectives, std::size_t k, Rng& rng)
{
    auto const n = objectives.size();
    checkK(n, k);
    auto const points = normalizeObjectives(objectives);
    auto const mask = objectives.front().maximizeMask;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    auto lm = leadersKMeans(points, all, k, mask, rng);
    auto members = roundRobin(points, all, lm.centers, rng);

    ClusteringResult result;
    result.clusters.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        result.clusters[c].center = lm.centers[c];
        result.clusters[c].members = std::move(members[c]);
        result.clusters[c].donors = result.clusters[c].members;
    }
    identifyExtremes(result.clusters, points.dims, mask);
    result.assignment = assignmentFrom(result.clusters, n);
    return result;
}

ClusteringResult clusterBkmrr(std::span<const ObjectiveVector> objectives, std::size_t k, Rng& rng)
{
    auto const n = objectives.size();
    checkK(n, k);
    auto const points = normalizeObjectives(objectives);
    auto const m = points.dims;
    auto const mask = objectives.front().maximizeMask;
    if (k <= m) {
        throw std::invalid_argument(fmt::format("bkmrr needs more clusters ({}) than objectives ({})", k, m));
    }

    ClusteringResult result;
    result.objectiveOrder.resize(m);
    std::iota(result.objectiveOrder.begin(), result.objectiveOrder.end(), 0);
    rng.shuffle(std::span<std::size_t>(result.objectiveOrder));

    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    auto const share = n / k;
    for (auto o : result.objectiveOrder) {
        auto const maximize = objectives.front().maximizes(o);
        std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
            auto const& va = objectives[a];
            auto const& vb = objectives[b];
            if (va.valid != vb.valid) {
                return va.valid;
            }
            if (!va.valid || va[o] == vb[o]) {
                return a < b;
            }
            return maximize ? va[o] > vb[o] : va[o] < vb[o];
        });
        Cluster cl;
        cl.members.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(share));
        std::sort(cl.members.begin(), cl.members.end());
        cl.donors = cl.members;
        cl.center = meanOf(points, cl.members);
        cl.extremeObjective = static_cast<int>(o);
        result.clusters.push_back(std::move(cl));
        pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(share));
    }

    std::sort(pool.begin(), pool.end());
    auto const middle = std::min(k - m, pool.size());
    if (middle > 0) {
        auto lm = leadersKMeans(points, pool, middle, mask, rng);
        auto members = roundRobin(points, pool, lm.centers, rng);
        for (std::size_t c = 0; c < middle; ++c) {
            Cluster cl;
            cl.center = lm.centers[c];
            cl.members = std::move(members[c]);
            cl.donors = cl.members;
            result.clusters.push_back(std::move(cl));
        }
    }
    result.assignment = assignmentFrom(result.clusters, n);
    return result;
}

ClusteringResult noClustering(std::span<const ObjectiveVector> objectives)
{
    auto const n = objectives.size();
    auto const points = normalizeObjectives(objectives);
    ClusteringResult result;
    Cluster cl;
    cl.members.resize(n);
    std::iota(cl.members.begin(), cl.members.end(), 0);
    cl.donors = cl.members;
    cl.center = meanOf(points, cl.members);
    result.clusters.push_back(std::move(cl));
    result.assignment.assign(n, 0);
    return result;
}

ClusteringResult cluster(ClusteringStrategy strategy, std::span<const ObjectiveVector> objectives, std::size_t k,
    Rng& rng)
{
    switch (strategy) {
    case ClusteringStrategy::Original: return clusterOriginal(objectives, k, rng);
    case ClusteringStrategy::Bkrr: return clusterBkrr(objectives, k, rng);
    case ClusteringStrategy::Bkmrr: return clusterBkmrr(objectives, k, rng);
    case ClusteringStrategy::None: return noClustering(objectives);
    }
    throw std::invalid_argument("unknown clustering strategy");
}

} // namespace mgomea
