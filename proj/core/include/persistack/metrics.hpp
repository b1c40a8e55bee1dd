#pragma once

#include <cstdint>
#include <string>

#include "persistack/raster.hpp"

namespace persistack {

/// Tracing accuracy: branch-count ratio, recalled area, and spill into the
/// reference complement. Percentages are exact integer ratios scaled by 100;
/// they become decimals only when formatted.
struct TracingComparison {
    std::int64_t auto_branches = 0;
    std::int64_t manual_branches = 0;
    std::int64_t area_intersection = 0;      // |auto ∩ manual|
    std::int64_t area_manual = 0;            // |manual|
    std::int64_t area_spill = 0;             // |auto \ manual|
    std::int64_t area_manual_complement = 0; // width*height - |manual|

    double branch_pct() const;
    double area_recall_pct() const;
    double area_spill_pct() const;
};

/// 100 * auto / manual. Throws "undefined ratio" when manual is zero.
double branch_percentage(std::int64_t auto_count, std::int64_t manual_count);

/// 100 * |auto ∩ manual| / |manual|.
double area_recall(const BinaryImage& auto_mask, const BinaryImage& manual_mask);

/// 100 * |auto \ manual| / |complement of manual|.
double area_spill(const BinaryImage& auto_mask, const BinaryImage& manual_mask);

/// Thins the mask to a one-pixel skeleton, then counts endpoint pixels
/// (skeleton pixels with exactly one 8-connected skeleton neighbor).
std::int64_t count_branches(const BinaryImage& mask);

/// Iterative thinning (Zhang-Suen) to a one-pixel-wide skeleton.
BinaryImage skeletonize(const BinaryImage& mask);

TracingComparison compare_tracings(const BinaryImage& auto_mask, const BinaryImage& manual_mask);

/// Decimal rendering of the exact ratio 100 * numerator / denominator,
/// rounded half-up to two places ("93.30"). Shared by all report writers.
std::string format_percent(std::int64_t numerator, std::int64_t denominator);

/// Same rounding applied to an already-computed percentage.
std::string format_percent(double pct);

} // namespace persistack
