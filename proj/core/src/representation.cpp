#include "mgomea/representation.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <functional>
#include <map>
#include <tuple>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

namespace mgomea {

TemplateLayout::TemplateLayout(int height)
    : height_(height)
{
    if (height < 0 || height > 20) {
        throw std::invalid_argument(fmt::format("template height {} out of range", height));
    }
    auto n = static_cast<std::size_t>((1 << (height + 1)) - 1);
    depth_.assign(n, 0);
    parent_.assign(n, -1);
    // pre-order: left child follows its parent, right child follows the left subtree
    std::function<void(int, int, int)> visit = [&](int index, int depth, int parent) {
        depth_[static_cast<std::size_t>(index)] = depth;
        parent_[static_cast<std::size_t>(index)] = parent;
        if (depth < height) {
            visit(index + 1, depth + 1, index);
            visit(index + (1 << (height - depth)), depth + 1, index);
        }
    };
    visit(0, 0, -1);
}

// ---------------------------------------------------------------------------
// sampling

Symbol sampleTerminal(int tree, const GenotypeConfig& config, Rng& rng)
{
    if (rng.bernoulli(config.constantProbability)) {
        return Symbol::constant(rng.uniform(config.constMin, config.constMax));
    }
    auto const withArgs = config.subexpressions && tree < config.treeCount - 1;
    auto const choices = config.featureCount + (withArgs ? 2 : 0);
    auto pick = rng.index(choices);
    if (pick < config.featureCount) {
        return Symbol::feature(static_cast<std::uint32_t>(pick));
    }
    return Symbol::arg(static_cast<std::uint32_t>(pick - config.featureCount));
}

Symbol sampleFunction(int tree, const GenotypeConfig& config, Rng& rng)
{
    auto const calls = config.subexpressions ? static_cast<std::size_t>(tree) : 0U;
    auto pick = rng.index(config.operators.size() + calls);
    if (pick < config.operators.size()) {
        return Symbol::oper(config.operators[pick]);
    }
    return Symbol::call(static_cast<std::uint32_t>(pick - config.operators.size()));
}

Symbol sampleIntron(int tree, int depth, const GenotypeConfig& config, Rng& rng)
{
    if (depth >= config.treeHeight) {
        return sampleTerminal(tree, config, rng);
    }
    return Symbol::oper(config.operators[rng.index(config.operators.size())]);
}

Symbol sampleLegalSymbol(int tree, int depth, const GenotypeConfig& config, Rng& rng)
{
    if (depth >= config.treeHeight || rng.bernoulli(config.terminalProbability)) {
        return sampleTerminal(tree, config, rng);
    }
    return sampleFunction(tree, config, rng);
}

std::vector<Symbol> sampleTree(InitMethod method, int tree, const GenotypeConfig& config,
    const TemplateLayout& layout, Rng& rng)
{
    std::vector<Symbol> nodes(static_cast<std::size_t>(layout.size()));
    std::function<void(int, bool)> fill = [&](int pos, bool used) {
        auto const depth = layout.depth(pos);
        Symbol s;
        if (!used) {
            s = sampleIntron(tree, depth, config, rng);
        } else if (layout.isLeaf(pos)) {
            s = sampleTerminal(tree, config, rng);
        } else if (method == InitMethod::Full || !rng.bernoulli(config.terminalProbability)) {
            s = sampleFunction(tree, config, rng);
        } else {
            s = sampleTerminal(tree, config, rng);
        }
        nodes[static_cast<std::size_t>(pos)] = s;
        if (!layout.isLeaf(pos)) {
            auto const ar = used ? s.arity() : 0;
            fill(layout.left(pos), ar >= 1);
            fill(layout.right(pos), ar >= 2);
        }
    };
    fill(0, true);
    return nodes;
}

std::vector<Genotype> initializePopulation(std::size_t n, const GenotypeConfig& config,
    const TemplateLayout& layout, Rng& rng)
{
    std::vector<Genotype> population;
    population.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Genotype g(config.treeCount, layout.size());
        for (int t = 0; t < config.treeCount; ++t) {
            auto nodes = sampleTree(initMethodFor(i), t, config, layout, rng);
            std::copy(nodes.begin(), nodes.end(), g.tree(t).begin());
        }
        population.push_back(std::move(g));
    }
    return population;
}

void validate(const Genotype& g, const TemplateLayout& layout)
{
    if (g.treeLength() != layout.size() || g.treeCount() < 1) {
        throw std::invalid_argument("genotype shape does not match the template");
    }
    for (int t = 0; t < g.treeCount(); ++t) {
        for (int p = 0; p < layout.size(); ++p) {
            auto const& s = g.at(t, p);
            if (layout.isLeaf(p) && !s.isTerminal()) {
                throw std::invalid_argument(fmt::format("tree {} position {}: function symbol at a leaf", t, p));
            }
            if (s.kind == SymbolKind::Call && static_cast<int>(s.index) >= t) {
                throw std::invalid_argument(fmt::format("tree {} position {}: call to tree {}", t, p, s.index));
            }
            if (s.kind == SymbolKind::Arg && (t == g.lastTree() || s.index > 1)) {
                throw std::invalid_argument(fmt::format("tree {} position {}: illegal arg symbol", t, p));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// activity

std::size_t ActiveMask::count() const
{
    return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), 1));
}

ActiveMask activeMask(const Genotype& g, const TemplateLayout& layout)
{
    auto const trees = g.treeCount();
    ActiveMask mask(trees, layout.size());
    std::vector<char> local(static_cast<std::size_t>(trees * layout.size()), 0);
    auto localAt = [&](int t, int p) -> char& { return local[static_cast<std::size_t>(t * layout.size() + p)]; };

    // Trees in calling order: callee arg usage is known before any caller.
    for (int t = 0; t < trees; ++t) {
        std::vector<int> stack { 0 };
        while (!stack.empty()) {
            auto p = stack.back();
            stack.pop_back();
            localAt(t, p) = 1;
            auto const& s = g.at(t, p);
            if (s.kind == SymbolKind::Arg) {
                mask.setUsesArg(t, static_cast<int>(s.index), true);
                continue;
            }
            if (s.kind == SymbolKind::Call) {
                auto callee = static_cast<int>(s.index);
                if (mask.usesArg(callee, 1)) {
                    stack.push_back(layout.right(p));
                }
                if (mask.usesArg(callee, 0)) {
                    stack.push_back(layout.left(p));
                }
                continue;
            }
            if (s.arity() >= 2) {
                stack.push_back(layout.right(p));
            }
            if (s.arity() >= 1) {
                stack.push_back(layout.left(p));
            }
        }
    }

    mask.setTreeActive(g.lastTree(), true);
    for (int t = g.lastTree(); t >= 0; --t) {
        if (!mask.treeActive(t)) {
            continue;
        }
        for (int p = 0; p < layout.size(); ++p) {
            if (!localAt(t, p)) {
                continue;
            }
            mask.set(t, p, true);
            auto const& s = g.at(t, p);
            if (s.kind == SymbolKind::Call) {
                mask.setTreeActive(static_cast<int>(s.index), true);
            }
        }
    }
    return mask;
}

// ---------------------------------------------------------------------------
// expansion and size metrics

namespace {
    void expandNode(const Genotype& g, const TemplateLayout& layout, const ActiveMask& mask, int tree, int pos,
        const std::array<const Expression*, 2>& args, Expression& out)
    {
        auto const& s = g.at(tree, pos);
        switch (s.kind) {
        case SymbolKind::Arg: {
            auto const& bound = *args[s.index];
            out.insert(out.end(), bound.begin(), bound.end());
            return;
        }
        case SymbolKind::Call: {
            auto callee = static_cast<int>(s.index);
            Expression a;
            Expression b;
            if (mask.usesArg(callee, 0)) {
                expandNode(g, layout, mask, tree, layout.left(pos), args, a);
            }
            if (mask.usesArg(callee, 1)) {
                expandNode(g, layout, mask, tree, layout.right(pos), args, b);
            }
            expandNode(g, layout, mask, callee, 0, { &a, &b }, out);
            return;
        }
        default:
            out.push_back(s);
            if (s.arity() >= 1) {
                expandNode(g, layout, mask, tree, layout.left(pos), args, out);
            }
            if (s.arity() >= 2) {
                expandNode(g, layout, mask, tree, layout.right(pos), args, out);
            }
        }
    }

    std::vector<std::size_t> subtreeLengths(const Expression& e)
    {
        std::vector<std::size_t> len(e.size());
        std::vector<std::size_t> stack;
        for (std::size_t i = e.size(); i-- > 0;) {
            std::size_t total = 1;
            for (int c = 0; c < e[i].arity(); ++c) {
                total += stack.back();
                stack.pop_back();
            }
            len[i] = total;
            stack.push_back(total);
        }
        return len;
    }

    std::size_t hashSymbol(const Symbol& s)
    {
        std::uint64_t h = static_cast<std::uint64_t>(s.kind) * 0x9e3779b97f4a7c15ULL;
        switch (s.kind) {
        case SymbolKind::Operator: h ^= static_cast<std::uint64_t>(s.op) + 1; break;
        case SymbolKind::Constant: {
            auto v = s.value == 0.0 ? 0.0 : s.value; // -0.0 == 0.0
            h ^= std::bit_cast<std::uint64_t>(v);
            break;
        }
        default: h ^= s.index + 1;
        }
        return static_cast<std::size_t>(mixSeed(h));
    }
} // namespace

Expression expand(const Genotype& g, const TemplateLayout& layout)
{
    auto mask = activeMask(g, layout);
    Expression out;
    expandNode(g, layout, mask, g.lastTree(), 0, { nullptr, nullptr }, out);
    return out;
}

std::size_t subtreeLength(const Expression& e, std::size_t start)
{
    std::size_t pending = 1;
    std::size_t i = start;
    while (pending > 0) {
        pending += static_cast<std::size_t>(e[i].arity());
        --pending;
        ++i;
    }
    return i - start;
}

std::uint64_t expressionSize(const Genotype& g, const TemplateLayout& layout)
{
    auto mask = activeMask(g, layout);
    return foldExpression<std::uint64_t>(g, layout, mask, [](const Symbol&, std::span<const std::uint64_t> c) {
        std::uint64_t total = 1;
        for (auto v : c) {
            total = saturatingAdd(total, v);
        }
        return total;
    });
}

std::uint64_t dedupSize(const Expression& e)
{
    auto const len = subtreeLengths(e);
    // subtree hash -> starts of first occurrences with that hash
    std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
    std::vector<std::size_t> hashes(e.size());
    std::vector<std::size_t> stack;
    for (std::size_t i = e.size(); i-- > 0;) {
        auto h = hashSymbol(e[i]);
        for (int c = 0; c < e[i].arity(); ++c) {
            h = static_cast<std::size_t>(mixSeed(h ^ (stack.back() + 0x632be59bd9b4e019ULL * static_cast<std::size_t>(c + 1))));
            stack.pop_back();
        }
        hashes[i] = h;
        stack.push_back(h);
    }

    std::uint64_t duplicates = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i].arity() == 0) {
            continue;
        }
        auto& starts = seen[hashes[i]];
        auto same = std::find_if(starts.begin(), starts.end(), [&](std::size_t j) {
            return len[j] == len[i] && std::equal(e.begin() + static_cast<std::ptrdiff_t>(j),
                       e.begin() + static_cast<std::ptrdiff_t>(j + len[j]), e.begin() + static_cast<std::ptrdiff_t>(i));
        });
        if (same != starts.end()) {
            ++duplicates;
        } else {
            starts.push_back(i);
        }
    }
    return e.size() - duplicates;
}

std::uint64_t dedupSize(const Genotype& g, const TemplateLayout& layout)
{
    // Hash-consing over the modular fold: every distinct non-leaf subtree gets
    // one id, leaves are counted per occurrence. Never materializes the
    // expansion, whose size can be exponential in the number of trees.
    struct Node {
        std::uint64_t id { 0 };
        std::uint64_t leaves { 0 };
    };
    using Key = std::tuple<std::uint8_t, std::uint64_t, std::uint64_t, std::uint64_t>;
    std::map<Key, std::uint64_t> ids;
    std::uint64_t internal = 0;
    auto mask = activeMask(g, layout);
    auto root = foldExpression<Node>(g, layout, mask, [&](const Symbol& s, std::span<const Node> c) {
        std::uint64_t payload = 0;
        switch (s.kind) {
        case SymbolKind::Operator: payload = static_cast<std::uint64_t>(s.op); break;
        case SymbolKind::Constant: payload = std::bit_cast<std::uint64_t>(s.value == 0.0 ? 0.0 : s.value); break;
        default: payload = s.index;
        }
        Key key { static_cast<std::uint8_t>(s.kind), payload, c.size() > 0 ? c[0].id : 0, c.size() > 1 ? c[1].id : 0 };
        auto [it, inserted] = ids.try_emplace(key, ids.size() + 1);
        if (inserted && !c.empty()) {
            ++internal;
        }
        Node n { it->second, c.empty() ? 1 : 0 };
        for (auto const& child : c) {
            n.leaves = saturatingAdd(n.leaves, child.leaves);
        }
        return n;
    });
    return saturatingAdd(root.leaves, internal);
}

double maxExpressionSize(const GenotypeConfig& config)
{
    auto const hasUnary = std::any_of(config.operators.begin(), config.operators.end(), [](Opcode o) { return arity(o) == 1; });
    auto const hasBinary = std::any_of(config.operators.begin(), config.operators.end(), [](Opcode o) { return arity(o) == 2; });
    auto const last = config.treeCount - 1;

    // Largest expansion of a subtree rooted at `depth` in tree `tree` with
    // arg bindings of the given sizes. Every position at a depth has the same
    // options, so depth identifies the subtree.
    std::function<double(int, int, double, double)> best = [&](int tree, int depth, double a0, double a1) {
        double m = 1.0;
        if (config.subexpressions && tree < last) {
            m = std::max({ m, a0, a1 });
        }
        if (depth == config.treeHeight) {
            return m;
        }
        auto const child = best(tree, depth + 1, a0, a1);
        if (hasUnary) {
            m = std::max(m, 1.0 + child);
        }
        if (hasBinary) {
            m = std::max(m, 1.0 + 2.0 * child);
        }
        if (config.subexpressions) {
            for (int callee = 0; callee < tree; ++callee) {
                m = std::max(m, best(callee, 0, child, child));
            }
        }
        return m;
    };
    return best(last, 0, 0.0, 0.0);
}

ReuseReport reuseReport(const Genotype& g, const TemplateLayout& layout)
{
    auto mask = activeMask(g, layout);
    using Counts = std::vector<std::uint64_t>;
    auto const trees = static_cast<std::size_t>(g.treeCount());

    // Call instantiations per callee in the expansion of (tree, pos).
    std::function<Counts(int, int, const std::array<const Counts*, 2>&)> visit =
        [&](int tree, int pos, const std::array<const Counts*, 2>& args) -> Counts {
        auto const& s = g.at(tree, pos);
        switch (s.kind) {
        case SymbolKind::Arg: return *args[s.index];
        case SymbolKind::Call: {
            auto callee = static_cast<int>(s.index);
            Counts a(trees, 0);
            Counts b(trees, 0);
            if (mask.usesArg(callee, 0)) {
                a = visit(tree, layout.left(pos), args);
            }
            if (mask.usesArg(callee, 1)) {
                b = visit(tree, layout.right(pos), args);
            }
            auto out = visit(callee, 0, { &a, &b });
            out[static_cast<std::size_t>(callee)] = saturatingAdd(out[static_cast<std::size_t>(callee)], 1);
            return out;
        }
        default: {
            Counts out(trees, 0);
            for (int c = 0; c < s.arity(); ++c) {
                auto child = visit(tree, c == 0 ? layout.left(pos) : layout.right(pos), args);
                for (std::size_t t = 0; t < trees; ++t) {
                    out[t] = saturatingAdd(out[t], child[t]);
                }
            }
            return out;
        }
        }
    };

    auto calls = visit(g.lastTree(), 0, { nullptr, nullptr });
    ReuseReport r;
    for (std::size_t t = 0; t < trees; ++t) {
        r.uses = saturatingAdd(r.uses, calls[t]);
        auto extra = calls[t] > 0 ? calls[t] - 1 : 0;
        r.reuses = saturatingAdd(r.reuses, extra);
        if (mask.usesAnyArg(static_cast<int>(t))) {
            r.functionalReuses = saturatingAdd(r.functionalReuses, extra);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// text

namespace {
    std::string leafText(const Symbol& s, std::span<const std::string> names)
    {
        switch (s.kind) {
        case SymbolKind::Feature:
            return s.index < names.size() ? names[s.index] : fmt::format("x{}", s.index);
        case SymbolKind::Constant: return fmt::format("{}", s.value);
        case SymbolKind::Arg: return fmt::format("arg{}", s.index);
        default: return symbolTag(s);
        }
    }

    bool isInfixOperator(Opcode op)
    {
        return op == Opcode::Add || op == Opcode::Sub || op == Opcode::Mul || op == Opcode::Div;
    }

    std::string applyText(Opcode op, const std::string& a, const std::string& b)
    {
        if (isInfixOperator(op)) {
            return fmt::format("({} {} {})", a, opcodeName(op), b);
        }
        if (arity(op) == 2) {
            return fmt::format("{}({}, {})", opcodeName(op), a, b);
        }
        return fmt::format("{}({})", opcodeName(op), a);
    }

    std::string infixAt(const Expression& e, std::size_t& i, std::span<const std::string> names)
    {
        auto const& s = e[i++];
        if (s.arity() == 0) {
            return leafText(s, names);
        }
        auto a = infixAt(e, i, names);
        std::string b = s.arity() == 2 ? infixAt(e, i, names) : std::string {};
        return applyText(s.op, a, b);
    }

    std::string sexprAt(const Expression& e, std::size_t& i, std::span<const std::string> names)
    {
        auto const& s = e[i++];
        if (s.arity() == 0) {
            return leafText(s, names);
        }
        std::string out = fmt::format("({}", opcodeName(s.op));
        for (int c = 0; c < s.arity(); ++c) {
            out += ' ';
            out += sexprAt(e, i, names);
        }
        out += ')';
        return out;
    }
} // namespace

std::string toInfix(const Expression& e, std::span<const std::string> featureNames)
{
    std::size_t i = 0;
    return e.empty() ? std::string {} : infixAt(e, i, featureNames);
}

std::string toSExpression(const Expression& e, std::span<const std::string> featureNames)
{
    std::size_t i = 0;
    return e.empty() ? std::string {} : sexprAt(e, i, featureNames);
}

std::string toModularInfix(const Genotype& g, const TemplateLayout& layout, std::span<const std::string> featureNames)
{
    auto mask = activeMask(g, layout);
    std::function<std::string(int, int)> render = [&](int tree, int pos) -> std::string {
        auto const& s = g.at(tree, pos);
        if (s.kind == SymbolKind::Call) {
            auto callee = static_cast<int>(s.index);
            auto a = mask.usesArg(callee, 0) ? render(tree, layout.left(pos)) : std::string("_");
            auto b = mask.usesArg(callee, 1) ? render(tree, layout.right(pos)) : std::string("_");
            return fmt::format("f{}({}, {})", callee, a, b);
        }
        if (s.arity() == 0) {
            return leafText(s, featureNames);
        }
        auto a = render(tree, layout.left(pos));
        std::string b = s.arity() == 2 ? render(tree, layout.right(pos)) : std::string {};
        return applyText(s.op, a, b);
    };

    std::string out;
    for (int t = 0; t < g.lastTree(); ++t) {
        if (mask.treeActive(t)) {
            out += fmt::format("f{}(arg0, arg1) = {}; ", t, render(t, 0));
        }
    }
    out += fmt::format("y = {}", render(g.lastTree(), 0));
    return out;
}

nlohmann::json toJson(const Genotype& g)
{
    nlohmann::json trees = nlohmann::json::array();
    for (int t = 0; t < g.treeCount(); ++t) {
        nlohmann::json nodes = nlohmann::json::array();
        for (auto const& s : g.tree(t)) {
            if (s.kind == SymbolKind::Constant) {
                nodes.push_back(s.value);
            } else {
                nodes.push_back(symbolTag(s));
            }
        }
        trees.push_back(std::move(nodes));
    }
    return { { "trees", std::move(trees) } };
}

Genotype genotypeFromJson(const nlohmann::json& j)
{
    auto const& trees = j.at("trees");
    if (!trees.is_array() || trees.empty()) {
        throw std::invalid_argument("genotype json needs a non-empty 'trees' array");
    }
    auto const length = static_cast<int>(trees.front().size());
    Genotype g(static_cast<int>(trees.size()), length);
    for (int t = 0; t < g.treeCount(); ++t) {
        auto const& nodes = trees[static_cast<std::size_t>(t)];
        if (static_cast<int>(nodes.size()) != length) {
            throw std::invalid_argument("trees in genotype json differ in length");
        }
        for (int p = 0; p < length; ++p) {
            auto const& v = nodes[static_cast<std::size_t>(p)];
            if (v.is_number()) {
                g.at(t, p) = Symbol::constant(v.get<double>());
                continue;
            }
            auto s = parseSymbolTag(v.get<std::string>());
            if (!s) {
                throw std::invalid_argument(fmt::format("unknown symbol tag '{}'", v.get<std::string>()));
            }
            g.at(t, p) = *s;
        }
    }
    return g;
}

} // namespace mgomea
