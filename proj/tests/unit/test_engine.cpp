#include "support/oracles.hpp"

#include "mgomea/engine.hpp"

#include <doctest.h>

#include <set>

using namespace mgomea;

namespace {

RunConfig smallConfig(Mode mode, std::uint64_t seed = 1)
{
    RunConfig c;
    c.mode = mode;
    c.populationSize = 64;
    c.genotype.treeHeight = 3;
    c.genotype.treeCount = 4;
    c.clustering = mode == Mode::SingleObjective ? ClusteringStrategy::None : ClusteringStrategy::Bkmrr;
    c.maxGenerations = 6;
    c.seed = seed;
    return c;
}

const Dataset& data()
{
    static const Dataset d = generateSynthetic(1, 120, 3);
    return d;
}

std::vector<std::string> logLines(const RunResult& r, const RunConfig& c)
{
    std::vector<std::string> out;
    for (auto const& rec : r.records) {
        out.push_back(toJson(rec, optimizedObjectives(c)).dump());
    }
    return out;
}

} // namespace

TEST_CASE("termination")
{
    RunConfig c;
    c.timeBudget = 3 * 3600.0;
    c.stagnationLimit = 100;
    CHECK(shouldTerminate(5, 100, 10, c) == Termination::Stagnation);
    CHECK(shouldTerminate(5, 3, 3 * 3600.0 + 60, c) == Termination::TimeBudget);
    CHECK(!shouldTerminate(5, 99, 3 * 3600.0 - 1, c));
    c.maxGenerations = 5;
    CHECK(shouldTerminate(5, 0, 0, c) == Termination::GenerationLimit);
    CHECK(!shouldTerminate(4, 0, 0, c));
}

TEST_CASE("configuration validation")
{
    auto ok = smallConfig(Mode::MultiObjective);
    CHECK_NOTHROW(validate(ok));
    auto so = smallConfig(Mode::SingleObjective);
    CHECK_NOTHROW(validate(so));

    auto bad = so;
    bad.clustering = ClusteringStrategy::Bkrr;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = ok;
    bad.objectives = { ObjectiveKind::R2 };
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = ok;
    bad.clusters = 2;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = ok;
    bad.objectives = { ObjectiveKind::R2, ObjectiveKind::R2 };
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = ok;
    bad.linearScaling = false;
    bad.objectives = { ObjectiveKind::R2, ObjectiveKind::LSRegularizer };
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = ok;
    bad.dedupSize = true;
    bad.objectives = { ObjectiveKind::R2, ObjectiveKind::MaxError };
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = ok;
    bad.populationSize = 0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    CHECK_THROWS_AS(runSo(ok, data()), std::invalid_argument);

    auto dedup = ok;
    dedup.dedupSize = true;
    CHECK(optimizedObjectives(dedup) == std::vector { ObjectiveKind::R2, ObjectiveKind::DedupSize });
}

TEST_CASE("zero generations leave the initial front in the archive")
{
    auto c = smallConfig(Mode::SingleObjective);
    c.maxGenerations = 0;
    auto r = runSo(c, data());
    CHECK(r.generations() == 0);
    CHECK(r.termination == Termination::GenerationLimit);
    REQUIRE(r.population.size() == 64);
    // the archive holds exactly the non-dominated distinct initial vectors
    for (auto const& ind : r.population) {
        if (!ind.objectives.valid) {
            continue;
        }
        bool dominated = false;
        for (auto const& other : r.population) {
            dominated = dominated || (other.objectives.valid && dominates(other.objectives, ind.objectives));
        }
        auto inArchive = std::any_of(r.archive.members().begin(), r.archive.members().end(),
            [&](const ArchiveEntry& e) { return e.objectives.values == ind.objectives.values; });
        CHECK(inArchive == !dominated);
    }
}

TEST_CASE("single-objective runs")
{
    auto c = smallConfig(Mode::SingleObjective);
    std::vector<std::size_t> sizes;
    double best = -1;
    RunHooks hooks;
    hooks.onGeneration = [&](const GenerationView& v) {
        sizes.push_back(v.population.size());
        CHECK(v.clustering == nullptr);
    };
    auto r = runSo(c, data(), hooks);
    CHECK(r.generations() == 6);
    for (auto const& rec : r.records) {
        CHECK(rec.best[0] >= best);
        best = rec.best[0];
        CHECK(rec.fosFamilies == (rec.generation == 0 ? 0u : 4u));
    }
    CHECK(sizes == std::vector<std::size_t>(7, 64));
    CHECK(r.evaluations == r.records.back().evaluations);

    // archive is passive: disabling it leaves the trajectory unchanged
    RunHooks off;
    off.recordArchive = false;
    auto quiet = runSo(c, data(), off);
    CHECK(quiet.archive.size() == 0);
    REQUIRE(quiet.population.size() == r.population.size());
    for (std::size_t i = 0; i < r.population.size(); ++i) {
        CHECK(quiet.population[i].genotype == r.population[i].genotype);
        CHECK(quiet.population[i].objectives == r.population[i].objectives);
    }
    CHECK(quiet.evaluations == r.evaluations);
}

TEST_CASE("multi-objective runs")
{
    auto c = smallConfig(Mode::MultiObjective);
    c.clusters = 5;
    std::vector<std::size_t> sizes;
    std::vector<double> hv;
    int sizeChecks = 0;
    RunHooks hooks;
    hooks.onGeneration = [&](const GenerationView& v) {
        sizes.push_back(v.population.size());
        if (v.previous == nullptr) {
            return;
        }
        REQUIRE(v.clustering != nullptr);
        CHECK(v.clustering->clusters.size() == 5);
        for (auto const& cl : v.clustering->clusters) {
            for (auto i : cl.members) {
                auto const& before = (*v.previous)[i].objectives;
                auto const& after = v.population[i].objectives;
                if (cl.extremeObjective == 1) {
                    CHECK(after[1] <= before[1]);
                    ++sizeChecks;
                } else if (!cl.isExtreme()) {
                    CHECK(!dominates(before, after));
                }
            }
        }
    };
    auto r = runMo(c, data(), hooks);
    CHECK(sizes == std::vector<std::size_t>(7, 64));
    CHECK(sizeChecks > 0);
    for (auto const& rec : r.records) {
        if (rec.generation > 0) {
            CHECK(rec.fosFamilies == 20);
        }
        hv.push_back(rec.hypervolume);
    }
    for (std::size_t i = 1; i < hv.size(); ++i) {
        CHECK(hv[i] >= hv[i - 1] - 1e-15);
    }
    CHECK(r.archive.size() > 0);

    auto nc = c;
    nc.clustering = ClusteringStrategy::None;
    auto rn = runMo(nc, data());
    CHECK(rn.records.back().fosFamilies == 4);
}

TEST_CASE("runs are reproducible")
{
    for (auto mode : { Mode::SingleObjective, Mode::MultiObjective }) {
        auto c = smallConfig(mode, 7);
        c.duplicateMutation = true;
        auto a = run(c, data());
        auto b = run(c, data());
        CHECK(logLines(a, c) == logLines(b, c));
        CHECK(a.archive.front() == b.archive.front());
        auto other = c;
        other.seed = 8;
        CHECK(logLines(run(other, data()), c) != logLines(a, c));
    }
}

TEST_CASE("parallel workers keep the contracts")
{
    auto c = smallConfig(Mode::MultiObjective);
    c.workers = 3;
    auto r = runMo(c, data());
    CHECK(r.population.size() == 64);
    auto const& m = r.archive.members();
    for (auto const& x : m) {
        for (auto const& y : m) {
            CHECK(!dominates(x.objectives, y.objectives));
        }
    }
}

TEST_CASE("stagnation stops the run")
{
    auto c = smallConfig(Mode::MultiObjective);
    c.maxGenerations = 1000;
    c.stagnationLimit = 2;
    c.genotype.treeHeight = 1;
    c.genotype.treeCount = 1;
    c.genotype.operators = { Opcode::Add };
    auto r = runMo(c, data());
    CHECK(r.termination == Termination::Stagnation);
    CHECK(r.records.back().unchangedGenerations >= 2);

    auto t = smallConfig(Mode::SingleObjective);
    t.maxGenerations = 1000;
    t.timeBudget = 0.0;
    CHECK(runSo(t, data()).termination == Termination::TimeBudget);
}

TEST_CASE("generation records serialize")
{
    GenerationRecord rec;
    rec.generation = 3;
    rec.hypervolume = 0.25;
    rec.best = { 0.5, std::numeric_limits<double>::quiet_NaN() };
    rec.evaluations = 10;
    auto j = toJson(rec, std::vector { ObjectiveKind::R2, ObjectiveKind::Size });
    CHECK(j["generation"] == 3);
    CHECK(j["best"]["r2"] == 0.5);
    CHECK(j["best"]["size"].is_null());
    CHECK(!j.contains("wall_seconds"));
}
