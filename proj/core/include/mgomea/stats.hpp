#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mgomea {

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(std::span<const double> xs);

enum class Alternative {
    TwoSided,
    Greater, // x tends to exceed y
    Less,
};

std::string_view alternativeName(Alternative a);
std::optional<Alternative> parseAlternative(std::string_view name);

struct WilcoxonResult {
    std::size_t n { 0 }; // non-zero differences
    double wPlus { 0.0 };
    double wMinus { 0.0 };
    double pValue { 1.0 };
    bool exact { true };
};

// Paired signed-rank test on d = x - y. Zero differences are dropped and tied
// magnitudes get average ranks. Exact null distribution for n <= 25, normal
// approximation with tie and continuity correction above.
WilcoxonResult wilcoxonSignedRank(std::span<const double> x, std::span<const double> y,
    Alternative alternative = Alternative::TwoSided);

// Bonferroni-Holm step-down: sorted p_(i) is significant while
// p_(i) <= alpha / (m - i) holds for it and every smaller p-value.
std::vector<bool> holm(std::span<const double> pValues, double alpha = 0.05);

} // namespace mgomea
