#include "support/oracles.hpp"

#include "mgomea/clustering.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace mgomea;

namespace {

// [r2 (max), size (min)]
std::vector<ObjectiveVector> randomObjectives(std::size_t n, Rng& rng)
{
    std::vector<ObjectiveVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({ { rng.uniform(0, 1), std::floor(rng.uniform(1, 60)) }, 1, true });
    }
    return out;
}

void checkPartition(const ClusteringResult& r, std::size_t n)
{
    REQUIRE(r.assignment.size() == n);
    std::vector<int> seen(n, 0);
    for (std::size_t c = 0; c < r.clusters.size(); ++c) {
        for (auto i : r.clusters[c].members) {
            ++seen[i];
            REQUIRE(r.assignment[i] == c);
        }
    }
    for (auto s : seen) {
        REQUIRE(s == 1);
    }
}

std::pair<std::size_t, std::size_t> sizeRange(const ClusteringResult& r)
{
    std::size_t lo = SIZE_MAX, hi = 0;
    for (auto const& c : r.clusters) {
        lo = std::min(lo, c.members.size());
        hi = std::max(hi, c.members.size());
    }
    return { lo, hi };
}

double sse(const PointSet& pts, const std::vector<std::vector<double>>& centers)
{
    double s = 0;
    for (std::size_t i = 0; i < pts.count; ++i) {
        double best = 1e300;
        for (auto const& c : centers) {
            double d = 0;
            for (std::size_t j = 0; j < pts.dims; ++j) {
                d += (pts[i][j] - c[j]) * (pts[i][j] - c[j]);
            }
            best = std::min(best, d);
        }
        s += best;
    }
    return s;
}

// Farthest-point leaders starting from the best point in objective o.
std::vector<std::vector<double>> leaders(const PointSet& pts, std::size_t k, std::size_t o, bool maximize)
{
    std::size_t first = 0;
    for (std::size_t i = 1; i < pts.count; ++i) {
        if (maximize ? pts[i][o] > pts[first][o] : pts[i][o] < pts[first][o]) {
            first = i;
        }
    }
    std::vector<std::vector<double>> out { { pts[first].begin(), pts[first].end() } };
    std::set<std::size_t> used { first };
    while (out.size() < k) {
        std::size_t pick = 0;
        double far = -1;
        for (std::size_t i = 0; i < pts.count; ++i) {
            if (used.count(i)) {
                continue;
            }
            double near = 1e300;
            for (auto const& c : out) {
                double d = 0;
                for (std::size_t j = 0; j < pts.dims; ++j) {
                    d += (pts[i][j] - c[j]) * (pts[i][j] - c[j]);
                }
                near = std::min(near, d);
            }
            if (near > far) {
                far = near;
                pick = i;
            }
        }
        used.insert(pick);
        out.push_back({ pts[pick].begin(), pts[pick].end() });
    }
    return out;
}

} // namespace

TEST_CASE("normalization")
{
    std::vector<ObjectiveVector> v { { { 2, 5 }, 0, true }, { { 4, 5 }, 0, true }, { { 6, 5 }, 0, true } };
    auto p = normalizeObjectives(v);
    CHECK(p[0][0] == 0.0);
    CHECK(p[1][0] == 0.5);
    CHECK(p[2][0] == 1.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(p[i][1] == 0.0);
    }
    std::vector<ObjectiveVector> mixed { { { 2, 2 }, 1, true }, { { 4, 4 }, 1, true }, { { 6, 6 }, 1, true } };
    auto pm = normalizeObjectives(mixed);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(pm[i][0] == pm[i][1]);
    }
}

TEST_CASE("leader k-means")
{
    Rng rng(1);
    auto objs = randomObjectives(12, rng);
    auto pts = normalizeObjectives(objs);
    std::vector<std::size_t> all(12);
    std::iota(all.begin(), all.end(), 0);
    auto lm = leadersKMeans(pts, all, 12, 1, rng);
    std::set<std::size_t> distinct(lm.assignment.begin(), lm.assignment.end());
    CHECK(distinct.size() == 12);
    CHECK_THROWS(leadersKMeans(pts, all, 13, 1, rng));
    CHECK_THROWS(leadersKMeans(pts, all, 0, 1, rng));

    // two separated blobs
    std::vector<ObjectiveVector> blobs;
    for (int i = 0; i < 100; ++i) {
        auto c = i % 2 ? 0.0 : 10.0;
        blobs.push_back({ { c + rng.uniform(0, 1), c + rng.uniform(0, 1) }, 0, true });
    }
    auto bp = normalizeObjectives(blobs);
    std::vector<std::size_t> idx(100);
    std::iota(idx.begin(), idx.end(), 0);
    auto two = leadersKMeans(bp, idx, 2, 0, rng);
    // blob boxes after normalization: [0, 0.1] and [0.9, 1] roughly
    auto inBox = [&](const std::vector<double>& c, int parity) {
        double lo = 1, hi = 0;
        for (std::size_t i = 0; i < 100; ++i) {
            if (static_cast<int>(i % 2) == parity) {
                for (auto v : bp[i]) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
        return c[0] >= lo && c[0] <= hi && c[1] >= lo && c[1] <= hi;
    };
    CHECK(((inBox(two.centers[0], 0) && inBox(two.centers[1], 1)) || (inBox(two.centers[0], 1) && inBox(two.centers[1], 0))));

    for (int rep = 0; rep < 30; ++rep) {
        auto o = randomObjectives(200, rng);
        auto p = normalizeObjectives(o);
        std::vector<std::size_t> ids(200);
        std::iota(ids.begin(), ids.end(), 0);
        auto k = 2 + rng.index(6);
        auto res = leadersKMeans(p, ids, k, 1, rng);
        auto initial = std::max(sse(p, leaders(p, k, 0, true)), sse(p, leaders(p, k, 1, false)));
        CHECK(sse(p, res.centers) <= initial + 1e-12);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto own = squaredDistance(p[i], res.centers[res.assignment[i]]);
            for (auto const& c : res.centers) {
                REQUIRE(own <= squaredDistance(p[i], c));
            }
        }
    }
}

TEST_CASE("original clustering")
{
    Rng rng(2);
    auto objs = randomObjectives(4096, rng);
    auto r = clusterOriginal(objs, 5, rng);
    REQUIRE(r.clusters.size() == 5);
    checkPartition(r, 4096);
    for (auto const& c : r.clusters) {
        CHECK(c.donors.size() == 1638);
    }
    std::set<int> extremes;
    for (auto const& c : r.clusters) {
        if (c.isExtreme()) {
            CHECK(extremes.insert(c.extremeObjective).second);
        }
    }
    CHECK(extremes == std::set<int> { 0, 1 });

    std::vector<ObjectiveVector> same(20, ObjectiveVector { { 0.5, 3 }, 1, true });
    auto rs = clusterOriginal(same, 5, rng);
    checkPartition(rs, 20);
}

TEST_CASE("balanced round-robin clustering")
{
    Rng rng(3);
    auto ten = randomObjectives(10, rng);
    auto r10 = clusterBkrr(ten, 5, rng);
    checkPartition(r10, 10);
    for (auto const& c : r10.clusters) {
        CHECK(c.members.size() == 2);
        CHECK(c.donors == c.members);
    }
    for (std::size_t n : { 37u, 100u, 4096u }) {
        auto objs = randomObjectives(n, rng);
        auto r = clusterBkrr(objs, 5, rng);
        checkPartition(r, n);
        auto [lo, hi] = sizeRange(r);
        CHECK(hi - lo <= 1);
    }
}

TEST_CASE("balanced clustering with extreme clusters")
{
    Rng rng(4);
    for (std::size_t n : { 20u, 101u, 4096u }) {
        auto objs = randomObjectives(n, rng);
        // ties at the carving boundary
        for (std::size_t i = 0; i < n; i += 3) {
            objs[i].values[1] = 7;
        }
        auto r = clusterBkmrr(objs, 5, rng);
        checkPartition(r, n);
        REQUIRE(r.clusters.size() == 5);
        auto [lo, hi] = sizeRange(r);
        CHECK(hi - lo <= 1);
        CHECK(static_cast<double>(lo) >= std::floor(n / 5.0));
        CHECK(static_cast<double>(hi) <= std::ceil(n / 5.0));

        // replay the carving in the recorded order
        REQUIRE(r.objectiveOrder.size() == 2);
        std::set<std::size_t> pool;
        for (std::size_t i = 0; i < n; ++i) {
            pool.insert(i);
        }
        int extremes = 0;
        for (auto o : r.objectiveOrder) {
            std::vector<std::size_t> order(pool.begin(), pool.end());
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return objs[0].maximizes(o) ? objs[a][o] > objs[b][o] : objs[a][o] < objs[b][o];
            });
            order.resize(n / 5);
            std::sort(order.begin(), order.end());
            auto it = std::find_if(r.clusters.begin(), r.clusters.end(),
                [&](const Cluster& c) { return c.extremeObjective == static_cast<int>(o); });
            REQUIRE(it != r.clusters.end());
            auto members = it->members;
            std::sort(members.begin(), members.end());
            CHECK(members == order);
            for (auto i : order) {
                pool.erase(i);
            }
            ++extremes;
        }
        CHECK(extremes == 2);
        CHECK(std::count_if(r.clusters.begin(), r.clusters.end(), [](const Cluster& c) { return !c.isExtreme(); })
            == 3);
    }
    auto objs = randomObjectives(10, rng);
    CHECK_THROWS(clusterBkmrr(objs, 2, rng));
}

TEST_CASE("no clustering")
{
    Rng rng(5);
    auto objs = randomObjectives(9, rng);
    auto r = noClustering(objs);
    REQUIRE(r.clusters.size() == 1);
    checkPartition(r, 9);
    CHECK(!r.clusters[0].isExtreme());
    CHECK(r.clusters[0].donors.size() == 9);
    for (auto s : { ClusteringStrategy::Original, ClusteringStrategy::Bkrr, ClusteringStrategy::Bkmrr,
             ClusteringStrategy::None }) {
        CHECK(parseStrategy(strategyName(s)) == s);
    }
}
