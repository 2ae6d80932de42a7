#include "mgomea/symbol.hpp"

#include <array>
#include <charconv>

#include <fmt/format.h>

namespace mgomea {

namespace {
    constexpr std::array<std::string_view, OpcodeCount> Names {
        "+", "-", "*", "/", "sin", "cos", "log", "sqrt", "exp", "neg", "square", "cube", "max", "min", "inv", "abs", "pow"
    };

    std::optional<std::uint32_t> parseIndex(std::string_view s)
    {
        std::uint32_t v = 0;
        if (s.empty()) {
            return std::nullopt;
        }
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc {} || ptr != s.data() + s.size()) {
            return std::nullopt;
        }
        return v;
    }
} // namespace

std::string_view opcodeName(Opcode op) { return Names[static_cast<std::size_t>(op)]; }

std::optional<Opcode> parseOpcode(std::string_view name)
{
    if (name == "add") { return Opcode::Add; }
    if (name == "sub") { return Opcode::Sub; }
    if (name == "mul") { return Opcode::Mul; }
    if (name == "div") { return Opcode::Div; }
    for (std::size_t i = 0; i < Names.size(); ++i) {
        if (Names[i] == name) {
            return static_cast<Opcode>(i);
        }
    }
    return std::nullopt;
}

std::string symbolTag(const Symbol& s)
{
    switch (s.kind) {
    case SymbolKind::Operator: return std::string(opcodeName(s.op));
    case SymbolKind::Feature: return fmt::format("x{}", s.index);
    case SymbolKind::Constant: return fmt::format("{}", s.value);
    case SymbolKind::Call: return fmt::format("f{}", s.index);
    case SymbolKind::Arg: return fmt::format("arg{}", s.index);
    }
    return {};
}

std::optional<Symbol> parseSymbolTag(std::string_view tag)
{
    if (auto op = parseOpcode(tag)) {
        return Symbol::oper(*op);
    }
    if (tag.starts_with("arg")) {
        if (auto i = parseIndex(tag.substr(3)); i && *i < 2) {
            return Symbol::arg(*i);
        }
        return std::nullopt;
    }
    if (tag.starts_with("x")) {
        if (auto i = parseIndex(tag.substr(1))) {
            return Symbol::feature(*i);
        }
        return std::nullopt;
    }
    if (tag.starts_with("f")) {
        if (auto i = parseIndex(tag.substr(1))) {
            return Symbol::call(*i);
        }
        return std::nullopt;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tag.data(), tag.data() + tag.size(), v);
    if (ec == std::errc {} && ptr == tag.data() + tag.size()) {
        return Symbol::constant(v);
    }
    return std::nullopt;
}

} // namespace mgomea
