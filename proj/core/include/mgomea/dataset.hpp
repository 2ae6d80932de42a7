#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mgomea {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Regression dataset stored column-major: one contiguous column per feature.
class Dataset {
public:
    Dataset() = default;
    // Throws DataError if the invariants are violated (ragged columns,
    // non-finite values, fewer than 1 feature or 2 samples).
    Dataset(std::vector<std::vector<double>> columns, std::vector<double> target,
        std::vector<std::string> featureNames);

    std::size_t rows() const { return target_.size(); }
    std::size_t cols() const { return columns_.size(); }

    std::span<const double> column(std::size_t c) const { return columns_[c]; }
    std::span<const double> target() const { return target_; }
    double at(std::size_t row, std::size_t col) const { return columns_[col][row]; }

    const std::vector<std::string>& featureNames() const { return names_; }
    const std::string& targetName() const { return targetName_; }
    void setTargetName(std::string name) { targetName_ = std::move(name); }

    bool operator==(const Dataset&) const = default;

private:
    std::vector<std::vector<double>> columns_;
    std::vector<double> target_;
    std::vector<std::string> names_;
    std::string targetName_ { "y" };
};

struct TargetStats {
    double minTarget { 0.0 };
    double maxTarget { 0.0 };
    double mean { 0.0 };
    double variance { 0.0 }; // population variance
};

using ColumnRef = std::variant<std::string, std::size_t>;

// Plain numeric CSV: header row, comma delimiter, no quoting.
Dataset loadCsv(const std::filesystem::path& path, const ColumnRef& targetColumn);
void writeCsv(const Dataset& d, const std::filesystem::path& path);

inline constexpr std::size_t DefaultSyntheticSamples = 1000;

// Feature count of synthetic problem `id` (1..5).
std::size_t syntheticFeatureCount(int id);
// Ground-truth expression of synthetic problem `id` at one sample.
double syntheticTarget(int id, std::span<const double> x);
Dataset generateSynthetic(int id, std::size_t samples = DefaultSyntheticSamples, std::uint64_t seed = 0);

TargetStats targetStats(const Dataset& d);

} // namespace mgomea
