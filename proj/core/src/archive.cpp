#include "mgomea/archive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mgomea {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b)
{
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.better(i, b[i], a[i])) {
            return false;
        }
        if (a.better(i, a[i], b[i])) {
            strictly = true;
        }
    }
    return strictly;
}

ElitistArchive::ElitistArchive(const ElitistArchive& other)
{
    std::scoped_lock lock(other.mutex_);
    steps_ = other.steps_;
    members_ = other.members_;
    bounds_ = other.bounds_;
    unchanged_ = other.unchanged_;
    changed_ = other.changed_;
    epoch_ = other.epoch_;
}

ElitistArchive& ElitistArchive::operator=(const ElitistArchive& other)
{
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        steps_ = other.steps_;
        members_ = other.members_;
        bounds_ = other.bounds_;
        unchanged_ = other.unchanged_;
        changed_ = other.changed_;
        epoch_ = other.epoch_;
    }
    return *this;
}

bool ElitistArchive::gridActive(std::size_t objective) const
{
    return objective < bounds_.size() && bounds_[objective].has_value();
}

std::vector<double> ElitistArchive::cellOf(const ObjectiveVector& v) const
{
    std::vector<double> cell(v.size());
    for (std::size_t o = 0; o < v.size(); ++o) {
        if (!gridActive(o)) {
            cell[o] = v[o];
            continue;
        }
        auto const& b = *bounds_[o];
        auto const steps = static_cast<double>(steps_);
        auto idx = std::floor((v[o] - b.lo) / (b.hi - b.lo) * steps);
        cell[o] = std::clamp(idx, 0.0, steps - 1.0);
    }
    return cell;
}

bool ElitistArchive::tryAdd(const ObjectiveVector& candidate, const Genotype& genotype)
{
    if (!candidate.valid) {
        return false;
    }
    std::scoped_lock lock(mutex_);
    for (auto const& m : members_) {
        if (dominates(m.objectives, candidate) || m.objectives.values == candidate.values) {
            return false;
        }
    }
    auto const cell = cellOf(candidate);
    for (auto const& m : members_) {
        if (cellOf(m.objectives) == cell && !dominates(candidate, m.objectives)) {
            return false;
        }
    }
    std::erase_if(members_, [&](const ArchiveEntry& m) { return dominates(candidate, m.objectives); });
    members_.push_back({ candidate, genotype, epoch_ });
    changed_ = true;
    unchanged_ = 0;
    return true;
}

void ElitistArchive::rebuildGrid()
{
    std::scoped_lock lock(mutex_);
    if (changed_) {
        unchanged_ = 0;
    } else {
        ++unchanged_;
    }
    changed_ = false;
    ++epoch_;

    bounds_.clear();
    if (members_.empty()) {
        return;
    }
    auto const m = members_.front().objectives.size();
    bounds_.resize(m);
    for (std::size_t o = 0; o < m; ++o) {
        auto lo = members_.front().objectives[o];
        auto hi = lo;
        for (auto const& e : members_) {
            lo = std::min(lo, e.objectives[o]);
            hi = std::max(hi, e.objectives[o]);
        }
        if (hi > lo) {
            bounds_[o] = Bounds { lo, hi };
        }
    }
}

std::vector<ObjectiveVector> ElitistArchive::front() const
{
    std::vector<ObjectiveVector> out;
    out.reserve(members_.size());
    for (auto const& m : members_) {
        out.push_back(m.objectives);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> normalizeForHypervolume(const ObjectiveVector& v, const HypervolumeSpec& spec)
{
    std::vector<double> out(v.size());
    for (std::size_t o = 0; o < v.size(); ++o) {
        auto const& r = spec.ranges[o];
        auto span = r.hi - r.lo;
        auto x = span > 0.0 ? (v[o] - r.lo) / span : 0.0;
        x = std::clamp(x, 0.0, 1.0);
        out[o] = r.maximize ? 1.0 - x : x;
    }
    return out;
}

double hypervolume2d(std::span<const std::array<double, 2>> points)
{
    std::vector<std::array<double, 2>> pts;
    for (auto const& p : points) {
        if (p[0] < 1.0 && p[1] < 1.0) {
            pts.push_back(p);
        }
    }
    std::sort(pts.begin(), pts.end());
    // sweep along the first objective; only points improving the second count
    double area = 0.0;
    double bestSecond = 1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i][1] >= bestSecond) {
            continue;
        }
        // next x where a better-second point starts
        double nextX = 1.0;
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (pts[j][1] < pts[i][1]) {
                nextX = pts[j][0];
                break;
            }
        }
        area += (nextX - pts[i][0]) * (1.0 - pts[i][1]);
        bestSecond = pts[i][1];
    }
    return area;
}

double hypervolume(std::span<const ObjectiveVector> front, const HypervolumeSpec& spec)
{
    if (spec.ranges.size() != 2) {
        throw std::invalid_argument("hypervolume is implemented for two objectives");
    }
    std::vector<std::array<double, 2>> pts;
    pts.reserve(front.size());
    for (auto const& v : front) {
        if (!v.valid) {
            continue;
        }
        auto n = normalizeForHypervolume(v, spec);
        pts.push_back({ n[0], n[1] });
    }
    return hypervolume2d(pts);
}

} // namespace mgomea
