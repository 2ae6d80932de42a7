#include "mgomea/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace mgomea {

// ---------------------------------------------------------------------------
// evaluation

std::span<double> Evaluator::acquire()
{
    if (top_ == pool_.size()) {
        pool_.emplace_back(data_->rows());
    }
    return pool_[top_++];
}

void Evaluator::predict(const Genotype& g, const TemplateLayout& layout, std::span<double> out)
{
    auto mask = activeMask(g, layout);
    top_ = 0;
    evalNode(g, layout, mask, g.lastTree(), 0, {}, out);
}

std::vector<double> Evaluator::predict(const Genotype& g, const TemplateLayout& layout)
{
    std::vector<double> out(data_->rows());
    predict(g, layout, out);
    return out;
}

namespace {
    template <typename F>
    void unaryInPlace(std::span<double> x, F f)
    {
        for (auto& v : x) {
            v = f(v);
        }
    }

    template <typename F>
    void binaryInPlace(std::span<double> x, std::span<const double> y, F f)
    {
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = f(x[i], y[i]);
        }
    }

    void applyUnary(Opcode op, std::span<double> x)
    {
        switch (op) {
        case Opcode::Sin: unaryInPlace(x, [](double a) { return std::sin(a); }); break;
        case Opcode::Cos: unaryInPlace(x, [](double a) { return std::cos(a); }); break;
        case Opcode::Sqrt: unaryInPlace(x, [](double a) { return std::sqrt(std::abs(a)); }); break;
        default: unaryInPlace(x, [op](double a) { return applyOperator(op, a, 0.0); });
        }
    }

    void applyBinary(Opcode op, std::span<double> x, std::span<const double> y)
    {
        switch (op) {
        case Opcode::Add: binaryInPlace(x, y, [](double a, double b) { return a + b; }); break;
        case Opcode::Sub: binaryInPlace(x, y, [](double a, double b) { return a - b; }); break;
        case Opcode::Mul: binaryInPlace(x, y, [](double a, double b) { return a * b; }); break;
        default: binaryInPlace(x, y, [op](double a, double b) { return applyOperator(op, a, b); });
        }
    }
} // namespace

void Evaluator::evalNode(const Genotype& g, const TemplateLayout& layout, const ActiveMask& mask, int tree, int pos,
    const Args& args, std::span<double> out)
{
    auto const& s = g.at(tree, pos);
    switch (s.kind) {
    case SymbolKind::Feature: {
        auto col = data_->column(s.index);
        std::copy(col.begin(), col.end(), out.begin());
        return;
    }
    case SymbolKind::Constant:
        std::fill(out.begin(), out.end(), s.value);
        return;
    case SymbolKind::Arg: {
        auto src = args[s.index];
        std::copy(src.begin(), src.end(), out.begin());
        return;
    }
    case SymbolKind::Call: {
        auto callee = static_cast<int>(s.index);
        Args bound {};
        std::size_t held = 0;
        if (mask.usesArg(callee, 0)) {
            auto buf = acquire();
            ++held;
            evalNode(g, layout, mask, tree, layout.left(pos), args, buf);
            bound[0] = buf;
        }
        if (mask.usesArg(callee, 1)) {
            auto buf = acquire();
            ++held;
            evalNode(g, layout, mask, tree, layout.right(pos), args, buf);
            bound[1] = buf;
        }
        evalNode(g, layout, mask, callee, 0, bound, out);
        for (; held > 0; --held) {
            release();
        }
        return;
    }
    case SymbolKind::Operator:
        evalNode(g, layout, mask, tree, layout.left(pos), args, out);
        if (s.arity() == 1) {
            applyUnary(s.op, out);
        } else {
            auto rhs = acquire();
            evalNode(g, layout, mask, tree, layout.right(pos), args, rhs);
            applyBinary(s.op, out, rhs);
            release();
        }
        return;
    }
}

// ---------------------------------------------------------------------------
// error measures

namespace {
    double mean(std::span<const double> x)
    {
        double s = 0.0;
        for (double v : x) {
            s += v;
        }
        return s / static_cast<double>(x.size());
    }

    double variance(std::span<const double> x)
    {
        auto m = mean(x);
        double s = 0.0;
        for (double v : x) {
            s += (v - m) * (v - m);
        }
        return s / static_cast<double>(x.size());
    }
} // namespace

LinearScaling fitLinearScaling(std::span<const double> pred, std::span<const double> target)
{
    auto const mp = mean(pred);
    auto const mt = mean(target);
    double cov = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        auto dp = pred[i] - mp;
        cov += dp * (target[i] - mt);
        var += dp * dp;
    }
    auto const n = static_cast<double>(pred.size());
    cov /= n;
    var /= n;
    if (!(var >= 1e-12) || !std::isfinite(var)) {
        return { mt, 0.0 };
    }
    auto b = cov / var;
    return { mt - b * mp, b };
}

double meanSquaredError(std::span<const double> pred, std::span<const double> target, LinearScaling ls)
{
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        auto r = ls.a + ls.b * pred[i] - target[i];
        s += r * r;
    }
    return s / static_cast<double>(pred.size());
}

double rSquared(std::span<const double> pred, std::span<const double> target, LinearScaling ls)
{
    auto const mse = meanSquaredError(pred, target, ls);
    if (!std::isfinite(mse)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    auto const var = variance(target);
    if (var <= 0.0) {
        return mse == 0.0 ? 1.0 : 0.0;
    }
    return 1.0 - mse / var;
}

double maxError(std::span<const double> pred, std::span<const double> target, LinearScaling ls)
{
    double m = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        auto r = std::abs(ls.a + ls.b * pred[i] - target[i]);
        if (!(r <= m)) {
            m = r; // also propagates NaN
        }
    }
    return m;
}

double lsRegularizer(LinearScaling ls)
{
    return std::log(1.0 + ls.a * ls.a + (ls.b - 1.0) * (ls.b - 1.0));
}

// ---------------------------------------------------------------------------
// structural objectives

double complexityScore(Opcode op, double c0, double c1)
{
    switch (op) {
    case Opcode::Add:
    case Opcode::Sub: return c0 + c1;
    case Opcode::Mul: return c0 * c1 + 1.0;
    case Opcode::Div: return c0 + c1 + 60.0;
    case Opcode::Neg: return c0 + 1.0;
    case Opcode::Sin:
    case Opcode::Cos:
    case Opcode::Exp:
    case Opcode::Log:
    case Opcode::Cube:
    case Opcode::Pow: return c0 * c0 * c0;
    case Opcode::Sqrt:
    case Opcode::Square:
    case Opcode::Max:
    case Opcode::Min:
    case Opcode::Abs: return c0 * c0;
    case Opcode::Inv: return c0 * c1 + 1.0; // unary: c1 is passed as 1
    }
    return 0.0;
}

namespace {
    double leafComplexity(const Symbol& s) { return s.kind == SymbolKind::Feature ? 2.0 : 1.0; }
} // namespace

double operatorComplexity(const Genotype& g, const TemplateLayout& layout)
{
    auto mask = activeMask(g, layout);
    return foldExpression<double>(g, layout, mask, [](const Symbol& s, std::span<const double> c) {
        if (c.empty()) {
            return leafComplexity(s);
        }
        return complexityScore(s.op, c[0], c.size() > 1 ? c[1] : 1.0);
    });
}

double operatorComplexity(const Expression& e)
{
    std::vector<double> stack;
    for (std::size_t i = e.size(); i-- > 0;) {
        auto const& s = e[i];
        if (s.arity() == 0) {
            stack.push_back(leafComplexity(s));
            continue;
        }
        auto c0 = stack.back();
        stack.pop_back();
        double c1 = 1.0;
        if (s.arity() == 2) {
            c1 = stack.back();
            stack.pop_back();
        }
        stack.push_back(complexityScore(s.op, c0, c1));
    }
    return stack.empty() ? 0.0 : stack.back();
}

std::uint64_t cosineCount(const Genotype& g, const TemplateLayout& layout)
{
    auto mask = activeMask(g, layout);
    return foldExpression<std::uint64_t>(g, layout, mask, [](const Symbol& s, std::span<const std::uint64_t> c) {
        std::uint64_t n = (s.kind == SymbolKind::Operator && s.op == Opcode::Cos) ? 1 : 0;
        for (auto v : c) {
            n = saturatingAdd(n, v);
        }
        return n;
    });
}

// ---------------------------------------------------------------------------
// objective vectors

std::string_view objectiveName(ObjectiveKind k)
{
    switch (k) {
    case ObjectiveKind::R2: return "r2";
    case ObjectiveKind::Size: return "size";
    case ObjectiveKind::DedupSize: return "dedup_size";
    case ObjectiveKind::MaxError: return "max_error";
    case ObjectiveKind::OperatorComplexity: return "complexity";
    case ObjectiveKind::LSRegularizer: return "ls_regularizer";
    case ObjectiveKind::CosineCount: return "cosine_count";
    }
    return "?";
}

std::optional<ObjectiveKind> parseObjective(std::string_view name)
{
    for (auto k : { ObjectiveKind::R2, ObjectiveKind::Size, ObjectiveKind::DedupSize, ObjectiveKind::MaxError,
             ObjectiveKind::OperatorComplexity, ObjectiveKind::LSRegularizer, ObjectiveKind::CosineCount }) {
        if (objectiveName(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::uint32_t maximizeMask(std::span<const ObjectiveKind> kinds)
{
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (maximizes(kinds[i])) {
            mask |= 1U << i;
        }
    }
    return mask;
}

ObjectiveEvaluator::ObjectiveEvaluator(const Dataset& data, const TemplateLayout& layout,
    std::vector<ObjectiveKind> kinds, bool linearScaling)
    : data_(&data)
    , layout_(&layout)
    , kinds_(std::move(kinds))
    , mask_(maximizeMask(kinds_))
    , linearScaling_(linearScaling)
    , evaluator_(data)
    , prediction_(data.rows())
{
    if (kinds_.empty() || kinds_.size() > 32) {
        throw std::invalid_argument("objective list must hold 1..32 objectives");
    }
    if (!linearScaling_ && std::find(kinds_.begin(), kinds_.end(), ObjectiveKind::LSRegularizer) != kinds_.end()) {
        throw std::invalid_argument("ls_regularizer requires linear scaling");
    }
}

Evaluation ObjectiveEvaluator::operator()(const Genotype& g)
{
    ++evaluations_;
    evaluator_.predict(g, *layout_, prediction_);

    Evaluation out;
    out.objectives.maximizeMask = mask_;
    out.objectives.values.assign(kinds_.size(), std::numeric_limits<double>::quiet_NaN());
    if (!std::all_of(prediction_.begin(), prediction_.end(), [](double v) { return std::isfinite(v); })) {
        out.objectives.valid = false;
        return out;
    }
    auto target = data_->target();
    if (linearScaling_) {
        out.ls = fitLinearScaling(prediction_, target);
    }

    for (std::size_t i = 0; i < kinds_.size(); ++i) {
        double v = 0.0;
        switch (kinds_[i]) {
        case ObjectiveKind::R2: v = rSquared(prediction_, target, out.ls); break;
        case ObjectiveKind::Size: v = static_cast<double>(expressionSize(g, *layout_)); break;
        case ObjectiveKind::DedupSize: v = static_cast<double>(dedupSize(g, *layout_)); break;
        case ObjectiveKind::MaxError: v = maxError(prediction_, target, out.ls); break;
        case ObjectiveKind::OperatorComplexity: v = operatorComplexity(g, *layout_); break;
        case ObjectiveKind::LSRegularizer: v = lsRegularizer(out.ls); break;
        case ObjectiveKind::CosineCount: v = static_cast<double>(cosineCount(g, *layout_)); break;
        }
        out.objectives.values[i] = v;
    }
    out.objectives.valid = std::all_of(out.objectives.values.begin(), out.objectives.values.end(),
        [](double v) { return std::isfinite(v); });
    return out;
}

} // namespace mgomea
