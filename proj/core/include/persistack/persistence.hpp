#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "persistack/labeling.hpp"
#include "persistack/raster.hpp"

namespace persistack {

/// Nested mask sequence level_0 ⊆ ... ⊆ level_m where level_m is the
/// binarized maximum projection. Stored compactly: one labeling of the top
/// level plus a survival depth per component. A component with survival
/// depth d intersects slices 1..d consecutively and is present in every
/// level >= m - d, so levels never need materializing to answer queries.
class Filtration {
public:
    Filtration() = default;
    Filtration(int level_count, Connectivity connectivity, LabelImage top,
               std::vector<int> survival, std::vector<std::int64_t> areas);

    int level_count() const { return level_count_; }
    Connectivity connectivity() const { return connectivity_; }
    const LabelImage& top() const { return top_; }

    /// Consecutive slices (from slice 1) the component intersects.
    int survival_depth(std::int32_t id) const { return survival_[static_cast<std::size_t>(id) - 1]; }
    /// First level containing the component: level_count - survival_depth.
    int born_level(std::int32_t id) const { return level_count_ - survival_depth(id); }
    std::int64_t area(std::int32_t id) const { return areas_[static_cast<std::size_t>(id) - 1]; }

private:
    int level_count_ = 0;
    Connectivity connectivity_ = Connectivity::eight;
    LabelImage top_;
    std::vector<int> survival_;
    std::vector<std::int64_t> areas_;
};

/// Labels the projection mask once, then drops components at their first
/// missed slice: the level m-n keeps the components of level m-n+1 whose
/// intersection with slice n is non-empty. Slice intersection tests may run
/// in parallel; the result is schedule-independent.
Filtration build_filtration(const BinaryImage& projection_mask,
                            std::span<const BinaryImage> slice_masks,
                            Connectivity connectivity, unsigned threads = 0);

/// The binary image of one level: union of components born at or before it.
BinaryImage materialize(const Filtration& filtration, int level);

/// True iff the two masks have identical foreground sets, decided by
/// comparing digests of the canonical serialized pixel buffer.
bool levels_equal(const BinaryImage& a, const BinaryImage& b);

/// Exact equality test for nested masks (inner ⊆ outer): the sets are equal
/// iff their foreground counts are. Precondition not checked.
bool levels_equal_nested(const BinaryImage& inner, const BinaryImage& outer);

/// Digest of the canonical serialized pixel buffer (dimensions then
/// row-major 0/1 bytes).
std::array<std::uint8_t, 32> mask_digest(const BinaryImage& img);

struct BarcodeInterval {
    std::int32_t id = 0;
    int birth = 0;
    int death = 0;
    std::int64_t area = 0;

    int persistence() const { return death - birth; }
    bool operator==(const BarcodeInterval&) const = default;
};

/// 0-dimensional persistence intervals: one per component of the top level,
/// all dying at the final level.
struct Barcode {
    int level_count = 0;
    Connectivity connectivity = Connectivity::eight;
    std::vector<BarcodeInterval> intervals;   // sorted by id

    bool operator==(const Barcode&) const = default;
};

/// One interval (id, born_level, m, area) per component. With the level
/// skip enabled, levels equal to their predecessor are passed over without
/// any component work; the result is identical either way.
Barcode compute_barcode(const Filtration& filtration, bool use_level_skip = true);

struct StructureExtraction {
    BinaryImage mask;
    bool empty = false;   // warning: no component survives all slices
};

/// The union of components present from the first level on, i.e. the
/// components of the projection that intersect every slice.
StructureExtraction extract_persistent_structure(const Filtration& filtration);

using Rgb = std::array<std::uint8_t, 3>;

/// Display color for a survival depth: green/orange/yellow/red for depths
/// 1..4, blue for depth m, a red-to-blue ramp in between, gray for depth 0
/// (components present only in the projection).
Rgb survival_color(int depth, int level_count);

/// Indexed raster of components colored by survival depth. Index 0 is the
/// background; index d+1 maps to depth d. The palette carries one RGB entry
/// per index.
struct ColorMap {
    int width = 0;
    int height = 0;
    int level_count = 0;
    std::vector<std::uint8_t> index;   // row-major palette indices
    std::vector<Rgb> palette;          // palette[0] = background
};

ColorMap persistence_color_map(const Filtration& filtration);

} // namespace persistack
