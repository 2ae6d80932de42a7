#include "mgomea/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace mgomea {

double mean(std::span<const double> xs)
{
    if (xs.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs)
{
    if (xs.size() < 2) {
        return 0.0;
    }
    auto const m = mean(xs);
    double ss = 0.0;
    for (auto x : xs) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::string_view alternativeName(Alternative a)
{
    switch (a) {
    case Alternative::TwoSided: return "two-sided";
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
    }
    return "?";
}

std::optional<Alternative> parseAlternative(std::string_view name)
{
    for (auto a : { Alternative::TwoSided, Alternative::Greater, Alternative::Less }) {
        if (alternativeName(a) == name) {
            return a;
        }
    }
    return std::nullopt;
}

namespace {
    constexpr std::size_t ExactLimit = 25;

    double normalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
}

WilcoxonResult wilcoxonSignedRank(std::span<const double> x, std::span<const double> y, Alternative alternative)
{
    if (x.size() != y.size()) {
        throw std::invalid_argument("paired samples differ in length");
    }
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != y[i]) {
            d.push_back(x[i] - y[i]);
        }
    }
    WilcoxonResult r;
    r.n = d.size();
    if (d.empty()) {
        return r;
    }

    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(d[a]) < std::abs(d[b]); });

    // doubled ranks stay integral under averaging
    std::vector<std::uint64_t> rank2(d.size());
    double tieTerm = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        auto j = i;
        while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) {
            ++j;
        }
        auto const avg2 = static_cast<std::uint64_t>(i + 1 + j + 1);
        for (auto k = i; k <= j; ++k) {
            rank2[order[k]] = avg2;
        }
        auto const t = static_cast<double>(j - i + 1);
        tieTerm += t * t * t - t;
        i = j + 1;
    }

    std::uint64_t plus2 = 0;
    std::uint64_t total2 = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        total2 += rank2[i];
        if (d[i] > 0) {
            plus2 += rank2[i];
        }
    }
    r.wPlus = static_cast<double>(plus2) / 2.0;
    r.wMinus = static_cast<double>(total2 - plus2) / 2.0;

    double upper = 0.0; // P(W+ >= observed)
    double lower = 0.0; // P(W+ <= observed)
    if (r.n <= ExactLimit) {
        std::vector<std::uint64_t> count(total2 + 1, 0);
        count[0] = 1;
        std::uint64_t reach = 0;
        for (auto v : rank2) {
            reach += v;
            for (auto s = reach; s >= v; --s) {
                count[s] += count[s - v];
            }
        }
        std::uint64_t ge = 0;
        std::uint64_t le = 0;
        for (std::uint64_t s = 0; s <= total2; ++s) {
            if (s >= plus2) {
                ge += count[s];
            }
            if (s <= plus2) {
                le += count[s];
            }
        }
        auto const all = std::ldexp(1.0, static_cast<int>(r.n));
        upper = static_cast<double>(ge) / all;
        lower = static_cast<double>(le) / all;
    } else {
        r.exact = false;
        auto const n = static_cast<double>(r.n);
        auto const mu = n * (n + 1) / 4.0;
        auto const sigma = std::sqrt(n * (n + 1) * (2 * n + 1) / 24.0 - tieTerm / 48.0);
        upper = 1.0 - normalCdf((r.wPlus - mu - 0.5) / sigma);
        lower = normalCdf((r.wPlus - mu + 0.5) / sigma);
    }

    switch (alternative) {
    case Alternative::Greater: r.pValue = upper; break;
    case Alternative::Less: r.pValue = lower; break;
    case Alternative::TwoSided: r.pValue = std::min(1.0, 2.0 * std::min(upper, lower)); break;
    }
    return r;
}

std::vector<bool> holm(std::span<const double> pValues, double alpha)
{
    auto const m = pValues.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pValues[a] < pValues[b]; });
    std::vector<bool> significant(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(pValues[order[i]] <= alpha / static_cast<double>(m - i))) {
            break;
        }
        significant[order[i]] = true;
    }
    return significant;
}

} // namespace mgomea
