#pragma once

#include "mgomea/rng.hpp"
#include "mgomea/symbol.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mgomea {

// Pre-order indexing of a perfect binary tree of the given height.
class TemplateLayout {
public:
    explicit TemplateLayout(int height);

    int height() const { return height_; }
    int size() const { return static_cast<int>(depth_.size()); }

    int depth(int i) const { return depth_[static_cast<std::size_t>(i)]; }
    int parent(int i) const { return parent_[static_cast<std::size_t>(i)]; }
    // -1 for leaves
    int left(int i) const { return isLeaf(i) ? -1 : i + 1; }
    int right(int i) const { return isLeaf(i) ? -1 : i + (1 << (height_ - depth(i))); }
    bool isLeaf(int i) const { return depth(i) == height_; }

private:
    int height_;
    std::vector<int> depth_;
    std::vector<int> parent_;
};

// M fixed-length trees stored back to back; tree M-1 is the top-level
// expression and tree j may only call trees i < j.
class Genotype {
public:
    Genotype() = default;
    Genotype(int treeCount, int treeLength)
        : treeCount_(treeCount)
        , treeLength_(treeLength)
        , nodes_(static_cast<std::size_t>(treeCount * treeLength))
    {
    }

    int treeCount() const { return treeCount_; }
    int treeLength() const { return treeLength_; }
    int lastTree() const { return treeCount_ - 1; }

    Symbol& at(int tree, int pos) { return nodes_[offset(tree, pos)]; }
    const Symbol& at(int tree, int pos) const { return nodes_[offset(tree, pos)]; }

    std::span<Symbol> tree(int t) { return { nodes_.data() + offset(t, 0), static_cast<std::size_t>(treeLength_) }; }
    std::span<const Symbol> tree(int t) const { return { nodes_.data() + offset(t, 0), static_cast<std::size_t>(treeLength_) }; }

    bool operator==(const Genotype&) const = default;

private:
    std::size_t offset(int tree, int pos) const { return static_cast<std::size_t>(tree * treeLength_ + pos); }

    int treeCount_ { 0 };
    int treeLength_ { 0 };
    std::vector<Symbol> nodes_;
};

struct GenotypeConfig {
    int treeHeight { 4 };
    int treeCount { 4 };
    std::vector<Opcode> operators { Opcode::Add, Opcode::Sub, Opcode::Mul, Opcode::Div,
        Opcode::Sin, Opcode::Cos, Opcode::Log, Opcode::Sqrt };
    bool subexpressions { true }; // enables call/arg symbols
    std::size_t featureCount { 1 };
    double constMin { 0.0 };
    double constMax { 1.0 };
    double terminalProbability { 0.5 }; // grow method
    double constantProbability { 0.5 }; // share of constants among drawn terminals

    int treeLength() const { return (1 << (treeHeight + 1)) - 1; }
};

enum class InitMethod { Grow, Full };

// Symbol samplers respecting the alphabet of tree `tree`.
Symbol sampleTerminal(int tree, const GenotypeConfig& config, Rng& rng);
Symbol sampleFunction(int tree, const GenotypeConfig& config, Rng& rng);
// Intron filler: an operator above the leaves, a terminal at leaf depth.
Symbol sampleIntron(int tree, int depth, const GenotypeConfig& config, Rng& rng);
// Any symbol legal at (tree, template depth); used by mutation.
Symbol sampleLegalSymbol(int tree, int depth, const GenotypeConfig& config, Rng& rng);

std::vector<Symbol> sampleTree(InitMethod method, int tree, const GenotypeConfig& config,
    const TemplateLayout& layout, Rng& rng);

// Alternates grow/full so any population is split 50/50 (grow first).
constexpr InitMethod initMethodFor(std::size_t individual)
{
    return individual % 2 == 0 ? InitMethod::Grow : InitMethod::Full;
}

std::vector<Genotype> initializePopulation(std::size_t n, const GenotypeConfig& config,
    const TemplateLayout& layout, Rng& rng);

// Throws std::invalid_argument if the genotype breaks the shape invariants
// (call to a later tree, arg in the last tree, non-terminal at a leaf).
void validate(const Genotype& g, const TemplateLayout& layout);

class ActiveMask {
public:
    ActiveMask() = default;
    ActiveMask(int trees, int length)
        : trees_(trees)
        , length_(length)
        , active_(static_cast<std::size_t>(trees * length), 0)
        , argUse_(static_cast<std::size_t>(trees), { false, false })
        , treeActive_(static_cast<std::size_t>(trees), false)
    {
    }

    bool operator()(int tree, int pos) const { return active_[static_cast<std::size_t>(tree * length_ + pos)] != 0; }
    void set(int tree, int pos, bool v) { active_[static_cast<std::size_t>(tree * length_ + pos)] = v ? 1 : 0; }

    // Whether tree t reads arg slot s somewhere in its own reachable part.
    bool usesArg(int tree, int slot) const { return argUse_[static_cast<std::size_t>(tree)][static_cast<std::size_t>(slot)]; }
    void setUsesArg(int tree, int slot, bool v) { argUse_[static_cast<std::size_t>(tree)][static_cast<std::size_t>(slot)] = v; }
    bool usesAnyArg(int tree) const { return usesArg(tree, 0) || usesArg(tree, 1); }

    // Whether tree t is reached from the top-level expression.
    bool treeActive(int tree) const { return treeActive_[static_cast<std::size_t>(tree)]; }
    void setTreeActive(int tree, bool v) { treeActive_[static_cast<std::size_t>(tree)] = v; }

    std::size_t count() const;

private:
    int trees_ { 0 };
    int length_ { 0 };
    std::vector<char> active_;
    std::vector<std::array<bool, 2>> argUse_;
    std::vector<bool> treeActive_;
};

// A position is active when it contributes to the top-level output. Children
// of a call node are active only when the callee reads the matching arg.
ActiveMask activeMask(const Genotype& g, const TemplateLayout& layout);

// Fully expanded expression in prefix order; only operators, features and
// constants appear.
using Expression = std::vector<Symbol>;

Expression expand(const Genotype& g, const TemplateLayout& layout);

// Node count of the subtree starting at prefix index `start`.
std::size_t subtreeLength(const Expression& e, std::size_t start);

// Counts over the expansion saturate at the largest uint64 value.
constexpr std::uint64_t saturatingAdd(std::uint64_t a, std::uint64_t b)
{
    return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

std::uint64_t expressionSize(const Genotype& g, const TemplateLayout& layout);
std::uint64_t dedupSize(const Expression& e);
std::uint64_t dedupSize(const Genotype& g, const TemplateLayout& layout);

// Upper bound on the expanded size of any genotype with this shape.
double maxExpressionSize(const GenotypeConfig& config);

struct ReuseReport {
    std::uint64_t uses { 0 };
    std::uint64_t reuses { 0 };
    std::uint64_t functionalReuses { 0 };
    bool operator==(const ReuseReport&) const = default;
};

ReuseReport reuseReport(const Genotype& g, const TemplateLayout& layout);

// Bottom-up reduction over the expanded expression without materializing it.
// `fn(symbol, children)` is called for operator, feature and constant nodes.
template <typename T, typename Fn>
T foldExpression(const Genotype& g, const TemplateLayout& layout, const ActiveMask& mask, Fn&& fn);

// Text renderings.
std::string toInfix(const Expression& e, std::span<const std::string> featureNames = {});
std::string toSExpression(const Expression& e, std::span<const std::string> featureNames = {});
// Subexpressions rendered as named functions: "f0(a0, a1) = ...; ...; y = ...".
std::string toModularInfix(const Genotype& g, const TemplateLayout& layout,
    std::span<const std::string> featureNames = {});

nlohmann::json toJson(const Genotype& g);
Genotype genotypeFromJson(const nlohmann::json& j);

// ---------------------------------------------------------------------------

namespace detail {
    template <typename T, typename Fn>
    T foldNode(const Genotype& g, const TemplateLayout& layout, const ActiveMask& mask, int tree, int pos,
        const std::array<const T*, 2>& args, Fn& fn)
    {
        auto const& s = g.at(tree, pos);
        switch (s.kind) {
        case SymbolKind::Arg:
            return *args[s.index];
        case SymbolKind::Call: {
            auto callee = static_cast<int>(s.index);
            T a {};
            T b {};
            if (mask.usesArg(callee, 0)) {
                a = foldNode<T>(g, layout, mask, tree, layout.left(pos), args, fn);
            }
            if (mask.usesArg(callee, 1)) {
                b = foldNode<T>(g, layout, mask, tree, layout.right(pos), args, fn);
            }
            return foldNode<T>(g, layout, mask, callee, 0, { &a, &b }, fn);
        }
        case SymbolKind::Operator: {
            std::array<T, 2> children {};
            children[0] = foldNode<T>(g, layout, mask, tree, layout.left(pos), args, fn);
            if (s.arity() == 2) {
                children[1] = foldNode<T>(g, layout, mask, tree, layout.right(pos), args, fn);
            }
            return fn(s, std::span<const T>(children.data(), static_cast<std::size_t>(s.arity())));
        }
        default:
            return fn(s, std::span<const T> {});
        }
    }
} // namespace detail

template <typename T, typename Fn>
T foldExpression(const Genotype& g, const TemplateLayout& layout, const ActiveMask& mask, Fn&& fn)
{
    return detail::foldNode<T>(g, layout, mask, g.lastTree(), 0, { nullptr, nullptr }, fn);
}

} // namespace mgomea
