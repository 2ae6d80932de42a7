#include "mgomea/harness.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace mgomea;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    auto const* env = std::getenv("MGOMEA_TEST_TMP");
    fs::path root = env != nullptr ? fs::path(env) : fs::temp_directory_path() / "mgomea-test";
    auto dir = root / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tinySpec(const fs::path& out, std::size_t reps = 10)
{
    return "datasets = synth:1:40:2\n"
           "repetitions = "
        + std::to_string(reps)
        + "\n"
          "output = "
        + out.string()
        + "\n"
          "population_size = 16\n"
          "tree_height = 2\n"
          "tree_count = 2\n"
          "max_generations = 2\n"
          "\n"
          "[mo]\n"
          "mode = mo\n"
          "clustering = bkmrr\n"
          "clusters = 3\n"
          "\n"
          "[so]\n"
          "mode = so\n";
}

} // namespace

TEST_CASE("dataset references")
{
    auto s = parseDatasetRef("synth:3");
    CHECK(s.kind == DatasetRef::Kind::Synthetic);
    CHECK(s.id == 3);
    CHECK(s.label == "synth3");
    auto n = parseDatasetRef("synth:2:50:9");
    CHECK(n.samples == 50);
    CHECK(n.seed == 9);
    CHECK(n.label == "synth2_n50_s9");
    auto c = parseDatasetRef("csv:data/air.csv:y");
    CHECK(c.kind == DatasetRef::Kind::Csv);
    CHECK(c.label == "air");
    CHECK_THROWS_AS(parseDatasetRef("synth:9"), ConfigError);
    CHECK_THROWS_AS(parseDatasetRef("csv:only"), ConfigError);
    CHECK_THROWS_AS(parseDatasetRef("web:x"), ConfigError);
}

TEST_CASE("run configuration text round trip")
{
    RunConfig c;
    c.mode = Mode::SingleObjective;
    c.objectives = { ObjectiveKind::R2, ObjectiveKind::CosineCount };
    c.clustering = ClusteringStrategy::None;
    c.populationSize = 100;
    c.genotype.operators = { Opcode::Add, Opcode::Cos };
    c.genotype.terminalProbability = 0.3;
    c.timeBudget = 12.5;
    c.maxGenerations = 40;
    c.seed = 99;
    c.hypervolumeMax[ObjectiveKind::CosineCount] = 8;
    auto text = formatRunConfig(c);
    auto back = parseRunConfig(text);
    CHECK(formatRunConfig(back) == text);
    CHECK(back.objectives == c.objectives);
    CHECK(back.genotype.operators == c.genotype.operators);
    CHECK(back.maxGenerations == 40);
    CHECK(back.hypervolumeMax.at(ObjectiveKind::CosineCount) == 8);
    CHECK(formatRunConfig(parseRunConfig(formatRunConfig(RunConfig {}))) == formatRunConfig(RunConfig {}));

    RunConfig d;
    CHECK_THROWS_AS(applyRunSetting(d, "populaton_size", "3"), ConfigError);
    CHECK_THROWS_AS(applyRunSetting(d, "population_size", "many"), ConfigError);
    CHECK_THROWS_AS(applyRunSetting(d, "objectives", "r2,volume"), ConfigError);
    CHECK_THROWS_AS(applyRunSetting(d, "linear_scaling", "maybe"), ConfigError);
}

TEST_CASE("experiment spec parsing")
{
    auto spec = parseExperimentSpec(tinySpec("out"));
    CHECK(spec.repetitions == 10);
    REQUIRE(spec.configs.size() == 2);
    CHECK(spec.configs[0].name == "mo");
    CHECK(spec.configs[0].run.populationSize == 16);
    CHECK(spec.configs[1].run.clustering == ClusteringStrategy::None);
    CHECK(spec.output == fs::path("out"));

    auto defaults = parseExperimentSpec("datasets = synth:1\n[a]\nmode = mo\n");
    CHECK(defaults.repetitions == 10);
    CHECK(defaults.configs[0].run.populationSize == 4096);
    CHECK(defaults.configs[0].run.clustering == ClusteringStrategy::Bkmrr);

    CHECK_THROWS_AS(parseExperimentSpec("[a]\nmode = mo\n"), ConfigError);
    CHECK_THROWS_AS(parseExperimentSpec("datasets = synth:1\n"), ConfigError);
    CHECK_THROWS_AS(parseExperimentSpec("datasets = synth:1\n[a]\n[a]\n"), ConfigError);
    CHECK_THROWS_AS(parseExperimentSpec("datasets = synth:1\nrepetitions = 0\n[a]\n"), ConfigError);
    CHECK_THROWS_AS(parseExperimentSpec("datasets = synth:1\n[a]\nmode = so\nclustering = bkrr\n"), ConfigError);
    CHECK_THROWS_AS(parseExperimentSpec("datasets = synth:1\n[a]\nrepetitions = 3\n"), ConfigError);
    CHECK_THROWS_AS(parseExperimentSpec("datasets = synth:1\n[a]\nthis line is junk\n"), ConfigError);
    CHECK_THROWS_AS(parseExperimentSpec("datasets = synth:1, synth:1\n[a]\n"), ConfigError);
}

TEST_CASE("experiments produce run directories and summaries")
{
    auto out = scratch("experiment");
    auto spec = parseExperimentSpec(tinySpec(out));
    auto outcome = runExperiments(spec);
    CHECK(outcome.failures == 0);
    REQUIRE(outcome.runs.size() == 20);
    for (auto const& r : outcome.runs) {
        CHECK(r.seed == r.repetition);
        for (auto f : { "config.txt", "generations.jsonl", "timing.csv", "front.csv", "run.json" }) {
            CHECK(fs::exists(r.directory / f));
        }
    }
    std::size_t dirs = 0;
    for (auto const& cfg : { "mo", "so" }) {
        for (auto const& e : fs::directory_iterator(out / cfg / "synth1_n40_s2")) {
            dirs += e.is_directory();
        }
    }
    CHECK(dirs == 20);
    CHECK(fs::exists(out / "summary.csv"));
    CHECK(fs::exists(out / "aggregate.csv"));

    auto summary = slurp(out / "summary.csv");
    auto aggregate = slurp(out / "aggregate.csv");
    auto generations = slurp(out / "convergence_generations.csv");
    CHECK(generations.starts_with("series,x,mean,std,n\n"));
    CHECK(slurp(out / "convergence_time.csv").starts_with("series,x,mean,std,n\n"));
    CHECK(generations.find("mo/synth1_n40_s2,2,") != std::string::npos);

    // summarizing again reads the same files
    summarize(out);
    CHECK(slurp(out / "summary.csv") == summary);
    CHECK(slurp(out / "aggregate.csv") == aggregate);

    // a fresh execution reproduces everything but wall times
    auto again = scratch("experiment-again");
    auto spec2 = parseExperimentSpec(tinySpec(again));
    runExperiments(spec2);
    CHECK(slurp(again / "summary.csv") == summary);
    CHECK(slurp(again / "aggregate.csv") == aggregate);
    CHECK(slurp(again / "convergence_generations.csv") == generations);

    // resume skips completed runs
    spec.resume = true;
    auto resumed = runExperiments(spec);
    for (auto const& r : resumed.runs) {
        CHECK(r.skipped);
    }
    CHECK(slurp(out / "summary.csv") == summary);

    auto runs = summarize(out);
    auto report = compare(runs, "so", "mo");
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].n == 10);
    writeComparisonCsv(report, out / "cmp.csv");
    CHECK(slurp(out / "cmp.csv").starts_with("config_a,config_b,dataset,n,"));
    CHECK_THROWS(compare(runs, "so", "absent"));
}

TEST_CASE("dataset load failures do not stop other runs")
{
    auto out = scratch("broken");
    auto spec = parseExperimentSpec("datasets = csv:" + (out / "missing.csv").string() + ":y, synth:2:30\n"
        + "repetitions = 1\noutput = " + out.string()
        + "\npopulation_size = 8\ntree_height = 2\ntree_count = 1\nmax_generations = 1\n[so]\nmode = so\n");
    auto outcome = runExperiments(spec);
    REQUIRE(outcome.runs.size() == 2);
    CHECK(outcome.failures == 1);
    CHECK(!outcome.runs[0].ok);
    CHECK(!outcome.runs[0].error.empty());
    CHECK(outcome.runs[1].ok);
}

TEST_CASE("shared normalization")
{
    std::vector<ObjectiveKind> kinds { ObjectiveKind::R2, ObjectiveKind::Size };
    std::vector<std::vector<ObjectiveVector>> fronts {
        { { { 0.5, 4 }, 1, true }, { { 0.9, 10 }, 1, true } },
        { { { 0.7, 30 }, 1, true } },
    };
    auto spec = sharedHypervolumeSpec(kinds, fronts);
    CHECK(spec.ranges[0].hi == 1.0);
    CHECK(spec.ranges[1].hi == 30.0);
    CHECK(spec.ranges[1].lo == 0.0);

    // a larger normalization bound never lowers a front's hypervolume
    auto local = sharedHypervolumeSpec(kinds, std::span(fronts).first(1));
    CHECK(local.ranges[1].hi == 10.0);
    CHECK(hypervolume(fronts[0], spec) >= hypervolume(fronts[0], local));

    CHECK(median({ 3, 1, 2 }) == 2.0);
    CHECK(median({ 4, 1, 2, 3 }) == 2.5);
}

TEST_CASE("wilcoxon-holm report")
{
    std::vector<PairedSamples> samples { { "a", { 1, 2, 3, 4, 5 }, { 1, 2, 3, 4, 5 } },
        { "b", { 2, 3, 4, 5, 6, 7, 8, 9, 10, 11 }, { 1, 1, 1, 1, 1, 1, 1, 1, 1, 1 } } };
    auto r = wilcoxonHolm(samples);
    CHECK(r.rows[0].pValue == 1.0);
    CHECK(!r.rows[0].significant);
    CHECK(r.rows[1].pValue == 2.0 / 1024.0);
    CHECK(r.rows[1].significant);
    CHECK(r.rows[1].meanA == 6.5);
}
