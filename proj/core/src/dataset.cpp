#include "mgomea/dataset.hpp"
#include "mgomea/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace mgomea {

Dataset::Dataset(std::vector<std::vector<double>> columns, std::vector<double> target,
    std::vector<std::string> featureNames)
    : columns_(std::move(columns))
    , target_(std::move(target))
    , names_(std::move(featureNames))
{
    if (columns_.empty()) {
        throw DataError("dataset needs at least one feature column");
    }
    if (target_.size() < 2) {
        throw DataError("dataset needs at least 2 samples");
    }
    for (auto const& c : columns_) {
        if (c.size() != target_.size()) {
            throw DataError("feature column length differs from target length");
        }
        if (!std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); })) {
            throw DataError("non-finite feature value");
        }
    }
    if (!std::all_of(target_.begin(), target_.end(), [](double v) { return std::isfinite(v); })) {
        throw DataError("non-finite target value");
    }
    if (names_.empty()) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            names_.push_back(fmt::format("x{}", i));
        }
    }
    if (names_.size() != columns_.size()) {
        throw DataError("feature name count differs from column count");
    }
}

namespace {
    std::vector<std::string_view> splitComma(std::string_view line)
    {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (true) {
            auto pos = line.find(',', start);
            out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
            if (pos == std::string_view::npos) {
                break;
            }
            start = pos + 1;
        }
        return out;
    }

    std::string_view trim(std::string_view s)
    {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
            s.remove_prefix(1);
        }
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
            s.remove_suffix(1);
        }
        return s;
    }

    bool parseDouble(std::string_view s, double& out)
    {
        s = trim(s);
        if (s.empty()) {
            return false;
        }
        if (s.front() == '+') {
            s.remove_prefix(1);
        }
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc {} && ptr == s.data() + s.size() && std::isfinite(out);
    }
} // namespace

Dataset loadCsv(const std::filesystem::path& path, const ColumnRef& targetColumn)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(fmt::format("cannot open file '{}'", path.string()));
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(fmt::format("'{}' is empty", path.string()));
    }
    std::vector<std::string> header;
    for (auto h : splitComma(line)) {
        header.emplace_back(trim(h));
    }

    std::size_t targetIndex = 0;
    if (auto const* name = std::get_if<std::string>(&targetColumn)) {
        auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) {
            throw DataError(fmt::format("missing target column '{}'", *name));
        }
        targetIndex = static_cast<std::size_t>(it - header.begin());
    } else {
        targetIndex = std::get<std::size_t>(targetColumn);
        if (targetIndex >= header.size()) {
            throw DataError(fmt::format("missing target column {}", targetIndex));
        }
    }

    std::vector<std::vector<double>> columns(header.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        auto cells = splitComma(line);
        if (cells.size() != header.size()) {
            throw DataError(fmt::format("row {} has {} cells, expected {}", row + 1, cells.size(), header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v;
            if (!parseDouble(cells[c], v)) {
                throw DataError(fmt::format("non-numeric cell at row {}, column {} ('{}'): '{}'",
                    row + 1, c, header[c], trim(cells[c])));
            }
            columns[c].push_back(v);
        }
        ++row;
    }
    if (row < 2) {
        throw DataError(fmt::format("'{}' has {} data rows, need at least 2", path.string(), row));
    }

    std::vector<double> target = std::move(columns[targetIndex]);
    std::string targetName = header[targetIndex];
    columns.erase(columns.begin() + static_cast<std::ptrdiff_t>(targetIndex));
    header.erase(header.begin() + static_cast<std::ptrdiff_t>(targetIndex));

    Dataset d(std::move(columns), std::move(target), std::move(header));
    d.setTargetName(std::move(targetName));
    return d;
}

void writeCsv(const Dataset& d, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError(fmt::format("cannot write '{}'", path.string()));
    }
    for (auto const& n : d.featureNames()) {
        out << n << ',';
    }
    out << d.targetName() << '\n';
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) {
            out << fmt::format("{:.17g},", d.at(r, c));
        }
        out << fmt::format("{:.17g}\n", d.target()[r]);
    }
}

namespace {
    constexpr std::array<double, 9> Primes { 2, 3, 5, 7, 11, 13, 17, 19, 23 };
}

std::size_t syntheticFeatureCount(int id)
{
    switch (id) {
    case 1: return 9;
    case 2: return 8;
    case 3: return 5;
    case 4: return 4;
    case 5: return 3;
    default: throw DataError(fmt::format("synthetic dataset id {} out of range 1..5", id));
    }
}

double syntheticTarget(int id, std::span<const double> x)
{
    switch (id) {
    case 1: {
        double s = 0.0;
        for (int i = 1; i <= 8; ++i) {
            s += std::sin(x[i] + x[0]);
        }
        return s;
    }
    case 2: {
        double s = std::sin(x[2] * x[3]);
        for (int i = 1; i <= 7; ++i) {
            s += std::sin(x[i] * x[0]);
        }
        return s;
    }
    case 3: {
        double s = 0.0;
        for (int i = 1; i <= 4; ++i) {
            s += std::sqrt(std::abs(std::sin(x[i] * x[0])));
        }
        return s;
    }
    case 4: {
        auto f0 = [](double a, double b) { return std::sin(a + b); };
        auto f1 = [](double a, double b) { return std::cos(a * b); };
        return f0(f1(x[0], x[1]), f1(x[2], x[3])) + f1(f0(x[0], x[1]), f0(x[2], x[3]));
    }
    case 5: {
        auto f0 = [](double a, double b, double c) { return std::cos(a * std::sin(b / c)); };
        return f0(x[0], x[1], x[2]) + f0(x[0], x[2], x[1]) + f0(x[1], x[0], x[2]) + f0(x[1], x[2], x[0]);
    }
    default: throw DataError(fmt::format("synthetic dataset id {} out of range 1..5", id));
    }
}

Dataset generateSynthetic(int id, std::size_t samples, std::uint64_t seed)
{
    auto const p = syntheticFeatureCount(id);
    if (samples < 2) {
        throw DataError("synthetic dataset needs at least 2 samples");
    }
    Rng rng(deriveSeed(seed, static_cast<std::uint64_t>(id)));
    std::vector<std::vector<double>> columns(p, std::vector<double>(samples));
    std::vector<double> target(samples);
    std::vector<double> x(p);
    for (std::size_t r = 0; r < samples; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            x[c] = Primes[c] * rng.uniform01();
            columns[c][r] = x[c];
        }
        target[r] = syntheticTarget(id, x);
    }
    return Dataset(std::move(columns), std::move(target), {});
}

TargetStats targetStats(const Dataset& d)
{
    auto t = d.target();
    TargetStats s;
    s.minTarget = *std::min_element(t.begin(), t.end());
    s.maxTarget = *std::max_element(t.begin(), t.end());
    // Welford keeps the variance non-negative without a second pass.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double v : t) {
        ++n;
        auto delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    s.mean = std::clamp(mean, s.minTarget, s.maxTarget);
    s.variance = std::max(0.0, m2 / static_cast<double>(n));
    return s;
}

} // namespace mgomea
