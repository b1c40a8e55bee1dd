#pragma once

#include <cstdint>
#include <vector>

#include "persistack/raster.hpp"

namespace persistack {

enum class Connectivity : int { four = 4, eight = 8 };

/// Per-pixel component ids: 0 = background, 1..k = components. Ids are dense
/// and assigned in raster-scan order of each component's first pixel.
class LabelImage {
public:
    LabelImage() = default;
    LabelImage(int width, int height, std::vector<std::int32_t> labels, std::int32_t count);

    int width() const { return width_; }
    int height() const { return height_; }
    std::int32_t component_count() const { return count_; }

    std::int32_t at(int x, int y) const {
        return labels_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::span<const std::int32_t> labels() const { return labels_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::int32_t count_ = 0;
    std::vector<std::int32_t> labels_;
};

struct ComponentStats {
    std::int32_t id = 0;
    std::int64_t area = 0;
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};

/// Two-pass connected-component labeling with union-find equivalence merging.
LabelImage label_components(const BinaryImage& img, Connectivity connectivity);

/// Mask containing exactly the pixels of one component. Throws on an
/// unknown id (the background id 0 included).
BinaryImage component_mask(const LabelImage& labels, std::int32_t id);

/// True iff some pixel carries `id` in `labels` and is foreground in `probe`.
bool component_intersects(const LabelImage& labels, std::int32_t id, const BinaryImage& probe);

/// Area and bounding box per component, ordered by id.
std::vector<ComponentStats> component_stats(const LabelImage& labels);

} // namespace persistack
