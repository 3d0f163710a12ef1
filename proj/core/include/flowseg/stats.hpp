#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "flowseg/types.hpp"

namespace flowseg {

/// Percentile with linear interpolation between closest ranks.
/// pct in [0, 100]; values need not be sorted. Returns 0 for empty input.
inline double percentile(std::vector<double> values, double pct) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

inline double magnitude_percentile(const FlowField& f, double pct) {
    std::vector<double> mags;
    mags.reserve(f.vectors.size());
    for (const Vec2& w : f.vectors) mags.push_back(std::hypot(w.u, w.v));
    return percentile(std::move(mags), pct);
}

}  // namespace flowseg
