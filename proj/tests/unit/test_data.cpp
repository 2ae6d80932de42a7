#include "support/oracles.hpp"

#include "mgomea/dataset.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace mgomea;
namespace fs = std::filesystem;

namespace {

fs::path writeTemp(const std::string& name, const std::string& content)
{
    auto dir = fs::temp_directory_path() / "mgomea_test_data";
    fs::create_directories(dir);
    auto path = dir / name;
    std::ofstream(path) << content;
    return path;
}

std::string errorOf(const fs::path& p, const ColumnRef& target)
{
    try {
        loadCsv(p, target);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("load_csv splits off the target column")
{
    auto p = writeTemp("abc.csv", "a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
    auto d = loadCsv(p, std::string("y"));
    CHECK(d.cols() == 2);
    CHECK(d.rows() == 3);
    CHECK(d.featureNames() == std::vector<std::string> { "a", "b" });
    CHECK(d.at(2, 1) == 8.0);
    CHECK(d.target()[1] == 6.0);

    auto byIndex = loadCsv(p, std::size_t { 0 });
    CHECK(byIndex.featureNames() == std::vector<std::string> { "b", "y" });
    CHECK(byIndex.target()[2] == 7.0);
}

TEST_CASE("load_csv errors")
{
    auto p = writeTemp("abc2.csv", "a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
    CHECK(errorOf(p, std::string("z")).find("missing target column") != std::string::npos);
    CHECK(!errorOf(writeTemp("none.csv", "") / "nope.csv", std::string("y")).empty());

    auto bad = writeTemp("nan.csv", "a,b,y\n1,2,3\n4,NaN,6\n");
    auto msg = errorOf(bad, std::string("y"));
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("b") != std::string::npos);

    auto text = writeTemp("text.csv", "a,y\n1,2\nfoo,3\n");
    CHECK(!errorOf(text, std::string("y")).empty());

    auto single = writeTemp("single.csv", "a,y\n1,2\n");
    CHECK(!errorOf(single, std::string("y")).empty());
}

TEST_CASE("csv round trip is exact")
{
    auto d = generateSynthetic(3, 50, 7);
    auto p = fs::temp_directory_path() / "mgomea_test_data" / "roundtrip.csv";
    fs::create_directories(p.parent_path());
    writeCsv(d, p);
    auto back = loadCsv(p, std::string(d.targetName()));
    CHECK(back == d);
}

TEST_CASE("synthetic feature ranges follow the primes")
{
    constexpr double primes[] = { 2, 3, 5, 7, 11, 13, 17, 19, 23 };
    for (int id = 1; id <= 5; ++id) {
        auto d = generateSynthetic(id);
        CHECK(d.rows() == 1000);
        CHECK(d.cols() == syntheticFeatureCount(id));
        for (std::size_t c = 0; c < d.cols(); ++c) {
            for (std::size_t r = 0; r < d.rows(); ++r) {
                REQUIRE(d.at(r, c) >= 0.0);
                REQUIRE(d.at(r, c) <= primes[c]);
            }
        }
    }
    CHECK(syntheticFeatureCount(1) == 9);
    CHECK(syntheticFeatureCount(2) == 8);
    CHECK(syntheticFeatureCount(3) == 5);
    CHECK(syntheticFeatureCount(4) == 4);
    CHECK(syntheticFeatureCount(5) == 3);
    CHECK_THROWS(generateSynthetic(0));
    CHECK_THROWS(generateSynthetic(6));
}

TEST_CASE("synthetic 4 at the origin")
{
    std::vector<double> x(4, 0.0);
    CHECK(syntheticTarget(4, x) == doctest::Approx(std::sin(2.0) + 1.0).epsilon(1e-15));
}

TEST_CASE("synthetic generation is a pure function of its inputs")
{
    CHECK(generateSynthetic(2, 100, 5) == generateSynthetic(2, 100, 5));
    CHECK(!(generateSynthetic(2, 100, 5) == generateSynthetic(2, 100, 6)));
    for (int id = 1; id <= 5; ++id) {
        auto d = generateSynthetic(id, 200, 11);
        for (std::size_t r = 0; r < d.rows(); ++r) {
            auto x = oracle::row(d, r);
            REQUIRE(oracle::closeRel(syntheticTarget(id, x), d.target()[r], 1e-12));
        }
    }
}

TEST_CASE("target_stats")
{
    Dataset d({ { 0, 0, 0 } }, { 1, 2, 3 }, { "a" });
    auto s = targetStats(d);
    CHECK(s.minTarget == 1);
    CHECK(s.maxTarget == 3);
    CHECK(s.mean == 2);

    Dataset flat({ { 0, 0 } }, { 5, 5 }, { "a" });
    CHECK(targetStats(flat).variance == 0.0);

    Rng rng(3);
    auto big = oracle::randomDataset(1000, 1, rng, -50, 80);
    auto t = big.target();
    double m = 0;
    for (auto v : t) {
        m += v;
    }
    m /= static_cast<double>(t.size());
    double var = 0;
    for (auto v : t) {
        var += (v - m) * (v - m);
    }
    var /= static_cast<double>(t.size());
    auto bs = targetStats(big);
    CHECK(oracle::closeRel(bs.mean, m, 1e-12));
    CHECK(oracle::closeRel(bs.variance, var, 1e-12));
    CHECK(bs.minTarget <= bs.mean);
    CHECK(bs.mean <= bs.maxTarget);
}

TEST_CASE("dataset invariants")
{
    CHECK_THROWS_AS(Dataset({ { 1, 2 } }, { 1 }, { "a" }), DataError);
    CHECK_THROWS_AS(Dataset({ { 1 } }, { 1 }, { "a" }), DataError);
    CHECK_THROWS_AS(Dataset({}, { 1, 2 }, {}), DataError);
    CHECK_THROWS_AS(Dataset({ { 1, NAN } }, { 1, 2 }, { "a" }), DataError);
}
