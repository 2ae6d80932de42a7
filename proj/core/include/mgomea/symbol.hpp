#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mgomea {

// Operators known to the evaluator and the complexity scorer. The default
// function set uses the first eight; the rest are opt-in via configuration.
enum class Opcode : std::uint8_t {
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Log,
    Sqrt,
    Exp,
    Neg,
    Square,
    Cube,
    Max,
    Min,
    Inv,
    Abs,
    Pow,
};

inline constexpr int OpcodeCount = 17;

constexpr int arity(Opcode op)
{
    switch (op) {
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Div:
    case Opcode::Max:
    case Opcode::Min:
    case Opcode::Pow:
        return 2;
    default:
        return 1;
    }
}

std::string_view opcodeName(Opcode op);
std::optional<Opcode> parseOpcode(std::string_view name);

// Protected primitives: every input maps to a value, non-finite results only
// arise from overflow.
inline double applyOperator(Opcode op, double a, double b)
{
    constexpr double eps = 1e-12;
    switch (op) {
    case Opcode::Add: return a + b;
    case Opcode::Sub: return a - b;
    case Opcode::Mul: return a * b;
    case Opcode::Div: return std::abs(b) > eps ? a / b : 1.0;
    case Opcode::Sin: return std::sin(a);
    case Opcode::Cos: return std::cos(a);
    case Opcode::Log: return std::abs(a) > eps ? std::log(std::abs(a)) : 0.0;
    case Opcode::Sqrt: return std::sqrt(std::abs(a));
    case Opcode::Exp: return std::exp(a);
    case Opcode::Neg: return -a;
    case Opcode::Square: return a * a;
    case Opcode::Cube: return a * a * a;
    case Opcode::Max: return a < b ? b : a;
    case Opcode::Min: return b < a ? b : a;
    case Opcode::Inv: return std::abs(a) > eps ? 1.0 / a : 1.0;
    case Opcode::Abs: return std::abs(a);
    case Opcode::Pow: return std::pow(std::abs(a), b);
    }
    return 0.0;
}

enum class SymbolKind : std::uint8_t {
    Operator,
    Feature,
    Constant,
    Call, // invokes a preceding tree; children bind to its arg0/arg1
    Arg,
};

struct Symbol {
    SymbolKind kind { SymbolKind::Constant };
    Opcode op { Opcode::Add };
    std::uint32_t index { 0 }; // feature index, callee tree or arg slot
    double value { 0.0 };

    static constexpr Symbol oper(Opcode o) { return { SymbolKind::Operator, o, 0, 0.0 }; }
    static constexpr Symbol feature(std::uint32_t i) { return { SymbolKind::Feature, Opcode::Add, i, 0.0 }; }
    static constexpr Symbol constant(double v) { return { SymbolKind::Constant, Opcode::Add, 0, v }; }
    static constexpr Symbol call(std::uint32_t tree) { return { SymbolKind::Call, Opcode::Add, tree, 0.0 }; }
    static constexpr Symbol arg(std::uint32_t slot) { return { SymbolKind::Arg, Opcode::Add, slot, 0.0 }; }

    constexpr int arity() const
    {
        switch (kind) {
        case SymbolKind::Operator: return mgomea::arity(op);
        case SymbolKind::Call: return 2;
        default: return 0;
        }
    }
    constexpr bool isTerminal() const { return arity() == 0; }

    // Compares only the fields that are meaningful for the kind; constants
    // are equal on exact value.
    friend constexpr bool operator==(const Symbol& a, const Symbol& b)
    {
        if (a.kind != b.kind) {
            return false;
        }
        switch (a.kind) {
        case SymbolKind::Operator: return a.op == b.op;
        case SymbolKind::Constant: return a.value == b.value;
        default: return a.index == b.index;
        }
    }
};

// Short tag used in JSON genotype dumps: "+", "sin", "x3", "f1", "arg0".
// Constants are not tagged (they serialize as numbers).
std::string symbolTag(const Symbol& s);
std::optional<Symbol> parseSymbolTag(std::string_view tag);

} // namespace mgomea
