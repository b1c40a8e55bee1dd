#pragma once

#include <cstdint>
#include <vector>

#include "persistack/raster.hpp"

namespace persistack {

enum class NeighborhoodShape { square, disc };

/// Median-filter parameters. The radius is the neighborhood half-width in
/// pixels; radius 0 is the identity filter. A disc neighborhood contains the
/// offsets with dx*dx + dy*dy <= radius*radius.
struct FilterParams {
    int radius = 10;
    NeighborhoodShape shape = NeighborhoodShape::square;
};

/// Result of automatic threshold selection. `fuzziness` is the minimized
/// Huang membership-entropy averaged over pixels.
struct ThresholdResult {
    std::uint16_t level = 0;
    double fuzziness = 0.0;
};

/// Rank-order median filter with truncated neighborhoods at the borders
/// (no padding). Even-sized neighborhoods take the lower median.
GrayImage median_filter(const GrayImage& img, const FilterParams& params);

/// Threshold minimizing the Huang-Wang fuzziness of the binarization.
/// Ties break to the smallest level. Throws on a constant image.
ThresholdResult huang_threshold(const GrayImage& img);

/// Same selection driven directly by an intensity histogram. `hist` must
/// have one bin per representable value (256 or 65536 entries).
ThresholdResult huang_threshold_histogram(std::span<const std::uint64_t> hist);

/// Pixel is foreground iff its value is strictly greater than `level`.
BinaryImage binarize(const GrayImage& img, int level);

enum class ThresholdMode { huang, fixed };

struct ThresholdSpec {
    ThresholdMode mode = ThresholdMode::huang;
    int fixed_level = 0;
};

/// Per-image outcome of the salt-and-pepper removal step.
struct PreprocessResult {
    BinaryImage projection_mask;
    std::vector<BinaryImage> slice_masks;   // stack order

    GrayImage projection;                    // raw maximum projection
    GrayImage projection_filtered;           // after the median filter
    ThresholdResult projection_threshold;
    std::vector<ThresholdResult> slice_thresholds;
};

/// Median filter then threshold, applied independently to the maximum
/// projection and to every slice (each image gets its own level when the
/// mode is huang). Slices may be processed in parallel; results are
/// independent of scheduling. `threads` 0 picks the hardware default.
PreprocessResult preprocess_stack(const ZStack& stack, const FilterParams& params,
                                  const ThresholdSpec& threshold = {},
                                  unsigned threads = 0);

} // namespace persistack
