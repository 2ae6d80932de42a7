#include "support/oracles.hpp"

#include "mgomea/representation.hpp"

#include <doctest.h>

#include <functional>
#include <map>
#include <set>

using namespace mgomea;
using S = Symbol;

namespace {

GenotypeConfig smallConfig(int h = 3, int m = 4, std::size_t features = 3)
{
    GenotypeConfig cfg;
    cfg.treeHeight = h;
    cfg.treeCount = m;
    cfg.featureCount = features;
    cfg.constMin = -2;
    cfg.constMax = 2;
    return cfg;
}

// Oracle for dedup size: count non-leaf subtrees whose canonical string was
// already seen in pre-order.
std::string canon(const Expression& e, std::size_t& pos)
{
    auto const& s = e[pos++];
    std::string out;
    if (s.kind == SymbolKind::Feature) {
        return "x" + std::to_string(s.index);
    }
    if (s.kind == SymbolKind::Constant) {
        return "c" + std::to_string(s.value);
    }
    out = "(" + std::to_string(static_cast<int>(s.op));
    for (int k = 0; k < s.arity(); ++k) {
        out += " " + canon(e, pos);
    }
    return out + ")";
}

std::uint64_t dedupOracle(const Expression& e)
{
    std::set<std::string> seen;
    std::uint64_t dup = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i].isTerminal()) {
            continue;
        }
        std::size_t p = i;
        if (!seen.insert(canon(e, p)).second) {
            ++dup;
        }
    }
    return e.size() - dup;
}

} // namespace

TEST_CASE("template layout")
{
    TemplateLayout h1(1);
    CHECK(h1.size() == 3);
    CHECK(h1.left(0) == 1);
    CHECK(h1.right(0) == 2);
    CHECK(TemplateLayout(4).size() == 31);
    TemplateLayout h2(2);
    CHECK(h2.left(0) == 1);
    CHECK(h2.right(0) == 4);
    CHECK(h2.parent(4) == 0);
    CHECK(h2.parent(3) == 1);
    CHECK(h2.isLeaf(2));
    CHECK(!h2.isLeaf(4));

    TemplateLayout h4(4);
    for (int i = 1; i < h4.size(); ++i) {
        auto p = h4.parent(i);
        CHECK((h4.left(p) == i || h4.right(p) == i));
        CHECK(h4.depth(i) == h4.depth(p) + 1);
    }
}

TEST_CASE("full trees fill every internal position with an arity-bearing symbol")
{
    auto cfg = smallConfig(4);
    TemplateLayout layout(4);
    Rng rng(1);
    for (int t = 0; t < cfg.treeCount; ++t) {
        auto tree = sampleTree(InitMethod::Full, t, cfg, layout, rng);
        int internal = 0;
        for (int p = 0; p < layout.size(); ++p) {
            if (layout.isLeaf(p)) {
                CHECK(tree[static_cast<std::size_t>(p)].isTerminal());
            } else {
                CHECK(tree[static_cast<std::size_t>(p)].arity() > 0);
                ++internal;
            }
        }
        CHECK(internal == 15);
    }
}

TEST_CASE("grow root is a terminal half of the time")
{
    auto cfg = smallConfig(4);
    TemplateLayout layout(4);
    Rng rng(2);
    int terminals = 0;
    int constants = 0;
    constexpr int n = 10000;
    for (int i = 0; i < n; ++i) {
        auto tree = sampleTree(InitMethod::Grow, cfg.treeCount - 1, cfg, layout, rng);
        if (tree[0].isTerminal()) {
            ++terminals;
            constants += tree[0].kind == SymbolKind::Constant;
        }
    }
    CHECK(std::abs(terminals / double(n) - 0.5) < 0.02);
    CHECK(std::abs(constants / double(terminals) - 0.5) < 0.03);
}

TEST_CASE("grow with a terminal root has one active node")
{
    auto cfg = smallConfig(4);
    cfg.terminalProbability = 1.0;
    TemplateLayout layout(4);
    Rng rng(3);
    auto pop = initializePopulation(1, cfg, layout, rng);
    CHECK(activeMask(pop[0], layout).count() == 1);
    CHECK(expressionSize(pop[0], layout) == 1);
}

TEST_CASE("initialization splits grow and full and respects the alphabet")
{
    auto cfg = smallConfig(4);
    TemplateLayout layout(4);
    Rng rng(4);
    auto pop = initializePopulation(10, cfg, layout, rng);
    REQUIRE(pop.size() == 10);
    int grow = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        grow += initMethodFor(i) == InitMethod::Grow;
    }
    CHECK(grow == 5);

    auto big = initializePopulation(4096, cfg, layout, rng);
    std::size_t slots = 0;
    for (auto const& g : big) {
        CHECK_NOTHROW(validate(g, layout));
        slots += static_cast<std::size_t>(g.treeCount() * g.treeLength());
        for (int t = 0; t < g.treeCount(); ++t) {
            for (int p = 0; p < g.treeLength(); ++p) {
                auto const& s = g.at(t, p);
                if (s.kind == SymbolKind::Call) {
                    REQUIRE(static_cast<int>(s.index) < t);
                }
                if (s.kind == SymbolKind::Arg) {
                    REQUIRE(t != g.lastTree());
                }
                if (s.kind == SymbolKind::Constant) {
                    REQUIRE(s.value >= cfg.constMin);
                    REQUIRE(s.value <= cfg.constMax);
                }
            }
        }
    }
    CHECK(slots == 4096u * 4 * 31);
}

TEST_CASE("full-initialized individuals are fully expanded in the top tree")
{
    auto cfg = smallConfig(3);
    cfg.subexpressions = false;
    TemplateLayout layout(3);
    Rng rng(5);
    auto pop = initializePopulation(2, cfg, layout, rng);
    auto const mask = activeMask(pop[1], layout);
    CHECK(mask(pop[1].lastTree(), 0));
    CHECK(mask.count() >= 4);
}

TEST_CASE("active mask examples")
{
    auto g = oracle::build(2, { { S::feature(0) } });
    CHECK(activeMask(g, TemplateLayout(2)).count() == 1);

    auto unary = oracle::build(2, { { S::oper(Opcode::Sin), S::feature(0) } });
    TemplateLayout layout(2);
    auto m = activeMask(unary, layout);
    CHECK(m.count() == 2);
    CHECK(m(0, 1));
    CHECK(!m(0, 4));

    // t1 = call t0 whose body reads both args
    auto called = oracle::build(2,
        { { S::oper(Opcode::Add), S::arg(0), S::arg(1) },
            { S::call(0), S::feature(0), S::constant(2.0) } });
    auto cm = activeMask(called, layout);
    CHECK(cm(0, 0));
    CHECK(cm(0, 1));
    CHECK(cm(0, 4));
    CHECK(cm(1, 1));
    CHECK(cm(1, 4));
    CHECK(cm.count() == 6);

    // callee without arg reads: call children are introns
    auto noArgs = oracle::build(2,
        { { S::oper(Opcode::Mul), S::feature(1), S::feature(1) },
            { S::call(0), S::feature(0), S::constant(2.0) } });
    auto nm = activeMask(noArgs, layout);
    CHECK(!nm(1, 1));
    CHECK(!nm(1, 4));
    CHECK(nm.count() == 4);
}

TEST_CASE("active mask is closed under parents")
{
    auto cfg = smallConfig(3, 4, 2);
    TemplateLayout layout(3);
    Rng rng(6);
    for (int i = 0; i < 300; ++i) {
        auto g = oracle::randomGenotype(cfg, layout, rng);
        auto m = activeMask(g, layout);
        for (int t = 0; t < g.treeCount(); ++t) {
            for (int p = 1; p < layout.size(); ++p) {
                if (m(t, p)) {
                    REQUIRE(m(t, layout.parent(p)));
                }
            }
        }
    }
}

TEST_CASE("active mask matches lazy evaluation")
{
    auto cfg = smallConfig(3, 4, 2);
    TemplateLayout layout(3);
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        auto g = oracle::randomGenotype(cfg, layout, rng);
        auto m = activeMask(g, layout);
        auto want = oracle::activePositions(g, 3);
        for (int t = 0; t < g.treeCount(); ++t) {
            for (int p = 0; p < layout.size(); ++p) {
                REQUIRE(m(t, p) == want[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]);
            }
        }
    }
}

TEST_CASE("expansion substitutes call arguments")
{
    // t0 = arg0 * arg1; top = call0(x1, 9)
    auto g = oracle::build(2,
        { { S::oper(Opcode::Mul), S::arg(0), S::arg(1) },
            { S::call(0), S::feature(1), S::constant(9.0) } });
    TemplateLayout layout(2);
    auto e = expand(g, layout);
    REQUIRE(e.size() == 3);
    CHECK(e[0] == S::oper(Opcode::Mul));
    CHECK(e[1] == S::feature(1));
    CHECK(e[2] == S::constant(9.0));
    CHECK(toInfix(e) == "(x1 * 9)");

    auto plain = oracle::build(2, { { S::oper(Opcode::Add), S::feature(0), S::constant(1.5) } });
    auto pe = expand(plain, layout);
    CHECK(pe.size() == 3);
    CHECK(expressionSize(plain, layout) == 3);
}

TEST_CASE("expansion agrees with direct multi-tree evaluation")
{
    auto cfg = smallConfig(3, 4, 3);
    TemplateLayout layout(3);
    Rng rng(7);
    auto data = oracle::randomDataset(5, 3, rng);
    for (int i = 0; i < 1000; ++i) {
        auto g = oracle::randomGenotype(cfg, layout, rng);
        auto e = expand(g, layout);
        REQUIRE(e.size() == expressionSize(g, layout));
        for (std::size_t r = 0; r < data.rows(); ++r) {
            auto row = oracle::row(data, r);
            REQUIRE(oracle::closeRel(oracle::evalPrefix(e, row), oracle::evalGenotype(g, 3, row), 1e-12));
        }
    }
}

TEST_CASE("expression size")
{
    TemplateLayout layout(2);
    CHECK(expressionSize(oracle::build(2, { { S::feature(0) } }), layout) == 1);
    CHECK(expressionSize(oracle::build(2, { { S::oper(Opcode::Add), S::feature(0), S::constant(1) } }), layout) == 3);

    // top calls a size-3 subexpression twice with single-leaf args
    auto g = oracle::build(2,
        { { S::oper(Opcode::Add), S::arg(0), S::arg(1) },
            { S::oper(Opcode::Mul), S::call(0), S::feature(0), S::constant(1), S::call(0), S::feature(1),
                S::feature(2) } });
    CHECK(expressionSize(g, layout) == expand(g, layout).size());
    CHECK(expressionSize(g, layout) == 7);
}

TEST_CASE("dedup size")
{
    TemplateLayout layout(2);
    auto xc = oracle::build(2, { { S::oper(Opcode::Add), S::feature(0), S::constant(1) } });
    CHECK(dedupSize(xc, layout) == 3);

    auto twice = oracle::build(2,
        { { S::oper(Opcode::Add), S::oper(Opcode::Add), S::feature(0), S::feature(1), S::oper(Opcode::Add),
            S::feature(0), S::feature(1) } });
    CHECK(expressionSize(twice, layout) == 7);
    CHECK(dedupSize(twice, layout) == 6);

    auto sinsin = oracle::build(2, { { S::oper(Opcode::Sin), S::oper(Opcode::Sin), S::feature(0) } });
    CHECK(dedupSize(sinsin, layout) == 3);

    auto cfg = smallConfig(3, 4, 2);
    TemplateLayout l3(3);
    Rng rng(8);
    for (int i = 0; i < 500; ++i) {
        auto g = oracle::randomGenotype(cfg, l3, rng);
        auto e = expand(g, l3);
        auto d = dedupSize(g, l3);
        REQUIRE(d == dedupOracle(e));
        REQUIRE(d <= expressionSize(g, l3));
        REQUIRE(expressionSize(g, l3) >= 1);
    }
}

TEST_CASE("reuse report")
{
    int const h = 2;
    TemplateLayout layout(h);
    CHECK(reuseReport(oracle::build(h, { { S::feature(0) } }), layout) == ReuseReport { 0, 0, 0 });

    auto single = oracle::build(h, { { S::feature(0) }, { S::call(0), S::feature(0), S::feature(0) } });
    CHECK(reuseReport(single, layout) == ReuseReport { 1, 0, 0 });

    // t0 reads its args; t1 calls t0 twice; t2 calls t1 twice with intron children
    auto g = oracle::build(h,
        { { S::oper(Opcode::Add), S::arg(0), S::arg(1) },
            { S::oper(Opcode::Mul), S::call(0), S::feature(0), S::feature(1), S::call(0), S::feature(1),
                S::constant(3) },
            { S::oper(Opcode::Sub), S::call(1), S::feature(0), S::feature(0), S::call(1), S::feature(1),
                S::feature(1) } });
    CHECK(reuseReport(g, layout) == ReuseReport { 6, 4, 3 });
}

TEST_CASE("expansion counts saturate")
{
    auto const top = std::numeric_limits<std::uint64_t>::max();
    CHECK(saturatingAdd(1, 2) == 3);
    CHECK(saturatingAdd(top - 1, 1) == top);
    CHECK(saturatingAdd(top - 1, 2) == top);
    CHECK(saturatingAdd(top, top) == top);
}

TEST_CASE("max expression size bounds every genotype")
{
    auto cfg = smallConfig(3, 3, 2);
    TemplateLayout layout(3);
    auto bound = maxExpressionSize(cfg);
    CHECK(bound >= 15.0);
    Rng rng(9);
    for (int i = 0; i < 500; ++i) {
        auto g = oracle::randomGenotype(cfg, layout, rng);
        REQUIRE(static_cast<double>(expressionSize(g, layout)) <= bound);
    }
    // no calls: one full tree
    cfg.subexpressions = false;
    CHECK(maxExpressionSize(cfg) == 15.0);
}

TEST_CASE("validate rejects broken genotypes")
{
    TemplateLayout layout(2);
    auto forward = oracle::build(2, { { S::call(1), S::feature(0), S::feature(0) }, { S::feature(0) } });
    CHECK_THROWS(validate(forward, layout));
    auto argTop = oracle::build(2, { { S::feature(0) }, { S::arg(0) } });
    CHECK_THROWS(validate(argTop, layout));
    auto g = oracle::build(2, { { S::feature(0) } });
    g.at(0, 2) = S::oper(Opcode::Sin);
    CHECK_THROWS(validate(g, layout));
}

TEST_CASE("text renderings and json round trip")
{
    auto g = oracle::build(2,
        { { S::oper(Opcode::Mul), S::arg(0), S::arg(1) },
            { S::oper(Opcode::Sin), S::call(0), S::feature(1), S::constant(0.5) } });
    TemplateLayout layout(2);
    auto e = expand(g, layout);
    CHECK(toInfix(e) == "sin((x1 * 0.5))");
    CHECK(toSExpression(e) == "(sin (* x1 0.5))");
    std::vector<std::string> names { "a", "b" };
    CHECK(toInfix(e, names) == "sin((b * 0.5))");
    auto modular = toModularInfix(g, layout);
    CHECK(modular.find("f0(arg0, arg1) = (arg0 * arg1)") != std::string::npos);
    CHECK(modular.find("y = sin(f0(x1, 0.5))") != std::string::npos);

    Rng rng(10);
    auto cfg = smallConfig(3);
    TemplateLayout l3(3);
    for (int i = 0; i < 50; ++i) {
        auto r = oracle::randomGenotype(cfg, l3, rng);
        CHECK(genotypeFromJson(toJson(r)) == r);
    }
}
