#pragma once

#include "mgomea/dataset.hpp"
#include "mgomea/representation.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mgomea {

// Vectorized multi-tree interpreter. A call node evaluates its children into
// argument buffers, then evaluates the callee with arg0/arg1 bound to them.
// Holds scratch buffers; use one instance per thread.
class Evaluator {
public:
    explicit Evaluator(const Dataset& data)
        : data_(&data)
    {
    }

    void predict(const Genotype& g, const TemplateLayout& layout, std::span<double> out);
    std::vector<double> predict(const Genotype& g, const TemplateLayout& layout);

private:
    using Args = std::array<std::span<const double>, 2>;

    void evalNode(const Genotype& g, const TemplateLayout& layout, const ActiveMask& mask, int tree, int pos,
        const Args& args, std::span<double> out);
    std::span<double> acquire();
    void release() { --top_; }

    const Dataset* data_;
    std::vector<std::vector<double>> pool_;
    std::size_t top_ { 0 };
};

struct LinearScaling {
    double a { 0.0 }; // offset
    double b { 1.0 }; // slope
    bool operator==(const LinearScaling&) const = default;
};

LinearScaling fitLinearScaling(std::span<const double> pred, std::span<const double> target);

// 1 - MSE/var(target). NaN marks an invalid prediction.
double rSquared(std::span<const double> pred, std::span<const double> target, LinearScaling ls);
double meanSquaredError(std::span<const double> pred, std::span<const double> target, LinearScaling ls);
double maxError(std::span<const double> pred, std::span<const double> target, LinearScaling ls);
double lsRegularizer(LinearScaling ls);

// Per-operator scores folded bottom-up over the expanded expression.
double complexityScore(Opcode op, double c0, double c1);
double operatorComplexity(const Genotype& g, const TemplateLayout& layout);
double operatorComplexity(const Expression& e);
std::uint64_t cosineCount(const Genotype& g, const TemplateLayout& layout);

enum class ObjectiveKind : std::uint8_t {
    R2,
    Size,
    DedupSize,
    MaxError,
    OperatorComplexity,
    LSRegularizer,
    CosineCount,
};

constexpr bool maximizes(ObjectiveKind k) { return k == ObjectiveKind::R2 || k == ObjectiveKind::CosineCount; }
std::string_view objectiveName(ObjectiveKind k);
std::optional<ObjectiveKind> parseObjective(std::string_view name);

// Objective values in configured order. Maximized objectives are stored as-is;
// the direction travels in `maximizeMask` (bit i set = objective i maximized).
struct ObjectiveVector {
    std::vector<double> values;
    std::uint32_t maximizeMask { 0 };
    bool valid { true };

    std::size_t size() const { return values.size(); }
    bool maximizes(std::size_t i) const { return (maximizeMask >> i) & 1U; }
    double operator[](std::size_t i) const { return values[i]; }

    // true if a is strictly better than b in objective i
    bool better(std::size_t i, double a, double b) const { return maximizes(i) ? a > b : a < b; }

    bool operator==(const ObjectiveVector&) const = default;
};

std::uint32_t maximizeMask(std::span<const ObjectiveKind> kinds);

struct Evaluation {
    ObjectiveVector objectives;
    LinearScaling ls;
};

// Computes the configured objective list for genotypes against one dataset.
// Prediction and the linear-scaling fit are shared across objectives.
class ObjectiveEvaluator {
public:
    ObjectiveEvaluator(const Dataset& data, const TemplateLayout& layout, std::vector<ObjectiveKind> kinds,
        bool linearScaling);

    Evaluation operator()(const Genotype& g);

    const std::vector<ObjectiveKind>& kinds() const { return kinds_; }
    std::uint32_t mask() const { return mask_; }
    bool linearScaling() const { return linearScaling_; }
    const TemplateLayout& layout() const { return *layout_; }
    const Dataset& data() const { return *data_; }

    std::uint64_t evaluations() const { return evaluations_; }

private:
    const Dataset* data_;
    const TemplateLayout* layout_;
    std::vector<ObjectiveKind> kinds_;
    std::uint32_t mask_;
    bool linearScaling_;
    Evaluator evaluator_;
    std::vector<double> prediction_;
    std::uint64_t evaluations_ { 0 };
};

} // namespace mgomea
