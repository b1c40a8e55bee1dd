#include "persistack/persistence.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "persistack/parallel.hpp"

namespace persistack {

Filtration::Filtration(int level_count, Connectivity connectivity, LabelImage top,
                       std::vector<int> survival, std::vector<std::int64_t> areas)
    : level_count_(level_count),
      connectivity_(connectivity),
      top_(std::move(top)),
      survival_(std::move(survival)),
      areas_(std::move(areas)) {
    if (level_count_ < 1) throw std::invalid_argument("a filtration needs at least one level");
    if (survival_.size() != static_cast<std::size_t>(top_.component_count()) ||
        areas_.size() != survival_.size()) {
        throw std::invalid_argument("per-component arrays do not match the component count");
    }
    for (int d : survival_) {
        if (d < 0 || d > level_count_) {
            throw std::invalid_argument("survival depth " + std::to_string(d) +
                                        " outside 0.." + std::to_string(level_count_));
        }
    }
}

Filtration build_filtration(const BinaryImage& projection_mask,
                            std::span<const BinaryImage> slice_masks,
                            Connectivity connectivity, unsigned threads) {
    if (slice_masks.empty()) {
        throw std::invalid_argument("cannot build a filtration from an empty slice list");
    }
    for (std::size_t n = 0; n < slice_masks.size(); ++n) {
        if (!slice_masks[n].same_shape(projection_mask)) {
            throw std::invalid_argument(
                "slice " + std::to_string(n + 1) + ": dimensions " +
                std::to_string(slice_masks[n].width()) + "x" + std::to_string(slice_masks[n].height()) +
                " differ from the projection (" + std::to_string(projection_mask.width()) + "x" +
                std::to_string(projection_mask.height()) + ")");
        }
    }

    LabelImage top = label_components(projection_mask, connectivity);
    const std::int32_t k = top.component_count();
    const int m = static_cast<int>(slice_masks.size());

    // hits[n][id]: component `id` shares a pixel with slice n+1.
    std::vector<std::vector<std::uint8_t>> hits(static_cast<std::size_t>(m));
    parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t n) {
        std::vector<std::uint8_t> hit(static_cast<std::size_t>(k) + 1, 0);
        std::span<const std::uint8_t> fg = slice_masks[n].data();
        std::span<const std::int32_t> lab = top.labels();
        for (std::size_t p = 0; p < fg.size(); ++p) {
            if (fg[p] && lab[p]) hit[static_cast<std::size_t>(lab[p])] = 1;
        }
        hits[n] = std::move(hit);
    });

    // Survival = length of the consecutive run of intersected slices from
    // slice 1; the component leaves the filtration at its first miss.
    std::vector<int> survival(static_cast<std::size_t>(k), 0);
    for (std::int32_t id = 1; id <= k; ++id) {
        int d = 0;
        while (d < m && hits[static_cast<std::size_t>(d)][static_cast<std::size_t>(id)]) ++d;
        survival[static_cast<std::size_t>(id) - 1] = d;
    }

    std::vector<std::int64_t> areas(static_cast<std::size_t>(k), 0);
    for (const ComponentStats& s : component_stats(top)) {
        areas[static_cast<std::size_t>(s.id) - 1] = s.area;
    }

    return Filtration(m, connectivity, std::move(top), std::move(survival), std::move(areas));
}

BinaryImage materialize(const Filtration& filtration, int level) {
    if (level < 0 || level > filtration.level_count()) {
        throw std::invalid_argument("level " + std::to_string(level) + " outside 0.." +
                                    std::to_string(filtration.level_count()));
    }
    const LabelImage& top = filtration.top();
    BinaryImage mask(top.width(), top.height());
    std::span<std::uint8_t> out = mask.data();
    std::span<const std::int32_t> lab = top.labels();
    for (std::size_t p = 0; p < out.size(); ++p) {
        out[p] = (lab[p] != 0 && filtration.born_level(lab[p]) <= level) ? 1 : 0;
    }
    return mask;
}

std::array<std::uint8_t, 32> mask_digest(const BinaryImage& img) {
    std::uint8_t header[8];
    const std::uint32_t w = static_cast<std::uint32_t>(img.width());
    const std::uint32_t h = static_cast<std::uint32_t>(img.height());
    for (int i = 0; i < 4; ++i) {
        header[i] = static_cast<std::uint8_t>((w >> (8 * i)) & 0xff);
        header[4 + i] = static_cast<std::uint8_t>((h >> (8 * i)) & 0xff);
    }

    std::array<std::uint8_t, 32> digest{};
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr ||
        EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, header, sizeof header) != 1 ||
        EVP_DigestUpdate(ctx, img.data().data(), img.data().size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest.data(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("SHA-256 digest computation failed");
    }
    EVP_MD_CTX_free(ctx);
    return digest;
}

namespace {

void check_same_shape(const BinaryImage& a, const BinaryImage& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("mask dimensions differ: " + std::to_string(a.width()) + "x" +
                                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                    "x" + std::to_string(b.height()));
    }
}

} // namespace

bool levels_equal(const BinaryImage& a, const BinaryImage& b) {
    check_same_shape(a, b);
    return mask_digest(a) == mask_digest(b);
}

bool levels_equal_nested(const BinaryImage& inner, const BinaryImage& outer) {
    check_same_shape(inner, outer);
    return foreground_count(inner) == foreground_count(outer);
}

Barcode compute_barcode(const Filtration& filtration, bool use_level_skip) {
    const int m = filtration.level_count();
    const std::int32_t k = filtration.top().component_count();

    Barcode barcode;
    barcode.level_count = m;
    barcode.connectivity = filtration.connectivity();

    if (!use_level_skip) {
        for (int level = 0; level <= m; ++level) {
            for (std::int32_t id = 1; id <= k; ++id) {
                if (filtration.born_level(id) == level) {
                    barcode.intervals.push_back({id, level, m, filtration.area(id)});
                }
            }
        }
        std::sort(barcode.intervals.begin(), barcode.intervals.end(),
                  [](const BarcodeInterval& a, const BarcodeInterval& b) { return a.id < b.id; });
        return barcode;
    }

    // Bucket births once; per level the foreground count decides whether the
    // level equals its predecessor (nested masks), and equal levels are
    // skipped without touching any component.
    std::vector<std::vector<std::int32_t>> by_birth(static_cast<std::size_t>(m) + 1);
    std::vector<std::int64_t> level_fg(static_cast<std::size_t>(m) + 1, 0);
    for (std::int32_t id = 1; id <= k; ++id) {
        const int birth = filtration.born_level(id);
        by_birth[static_cast<std::size_t>(birth)].push_back(id);
        level_fg[static_cast<std::size_t>(birth)] += filtration.area(id);
    }
    for (std::size_t i = 1; i < level_fg.size(); ++i) level_fg[i] += level_fg[i - 1];

    auto emit = [&](int level) {
        for (std::int32_t id : by_birth[static_cast<std::size_t>(level)]) {
            barcode.intervals.push_back({id, level, m, filtration.area(id)});
        }
    };

    emit(0);
    for (int i = 1; i <= m; ++i) {
        if (level_fg[static_cast<std::size_t>(i)] == level_fg[static_cast<std::size_t>(i) - 1]) {
            continue;   // levels equal, pass to the next one
        }
        emit(i);
    }

    std::sort(barcode.intervals.begin(), barcode.intervals.end(),
              [](const BarcodeInterval& a, const BarcodeInterval& b) { return a.id < b.id; });
    return barcode;
}

StructureExtraction extract_persistent_structure(const Filtration& filtration) {
    StructureExtraction result{materialize(filtration, 0), false};
    result.empty = foreground_count(result.mask) == 0;
    return result;
}

Rgb survival_color(int depth, int level_count) {
    static constexpr Rgb gray{128, 128, 128};
    static constexpr Rgb blue{0, 0, 255};
    static constexpr Rgb red{255, 0, 0};
    static constexpr std::array<Rgb, 4> anchors{{{0, 255, 0}, {255, 165, 0}, {255, 255, 0}, {255, 0, 0}}};

    if (depth <= 0) return gray;
    if (depth >= level_count) return blue;
    if (depth <= 4) return anchors[static_cast<std::size_t>(depth) - 1];

    // Depths past the named anchors ramp from red to blue.
    const double t = static_cast<double>(depth - 4) / static_cast<double>(level_count - 4);
    Rgb out{};
    for (int ch = 0; ch < 3; ++ch) {
        const double v = red[static_cast<std::size_t>(ch)] +
                         t * (blue[static_cast<std::size_t>(ch)] - red[static_cast<std::size_t>(ch)]);
        out[static_cast<std::size_t>(ch)] = static_cast<std::uint8_t>(std::lround(v));
    }
    return out;
}

ColorMap persistence_color_map(const Filtration& filtration) {
    const int m = filtration.level_count();
    if (m > 254) {
        throw std::invalid_argument("color map limited to 254 levels, got " + std::to_string(m));
    }
    const LabelImage& top = filtration.top();

    ColorMap map;
    map.width = top.width();
    map.height = top.height();
    map.level_count = m;
    map.palette.resize(static_cast<std::size_t>(m) + 2);
    map.palette[0] = Rgb{0, 0, 0};
    for (int d = 0; d <= m; ++d) {
        map.palette[static_cast<std::size_t>(d) + 1] = survival_color(d, m);
    }

    map.index.resize(static_cast<std::size_t>(map.width) * map.height, 0);
    std::span<const std::int32_t> lab = top.labels();
    for (std::size_t p = 0; p < map.index.size(); ++p) {
        if (lab[p] != 0) {
            map.index[p] = static_cast<std::uint8_t>(filtration.survival_depth(lab[p]) + 1);
        }
    }
    return map;
}

} // namespace persistack
