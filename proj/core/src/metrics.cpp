#include "persistack/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace persistack {

namespace {

void check_same_shape(const BinaryImage& a, const BinaryImage& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("mask dimensions differ: " + std::to_string(a.width()) + "x" +
                                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                    "x" + std::to_string(b.height()));
    }
}

struct AreaCounts {
    std::int64_t intersection = 0;
    std::int64_t spill = 0;        // auto without manual
    std::int64_t manual_area = 0;
};

AreaCounts area_counts(const BinaryImage& auto_mask, const BinaryImage& manual_mask) {
    AreaCounts c;
    std::span<const std::uint8_t> a = auto_mask.data();
    std::span<const std::uint8_t> m = manual_mask.data();
    for (std::size_t p = 0; p < a.size(); ++p) {
        c.manual_area += m[p];
        if (a[p]) {
            if (m[p]) ++c.intersection;
            else ++c.spill;
        }
    }
    return c;
}

} // namespace

double branch_percentage(std::int64_t auto_count, std::int64_t manual_count) {
    if (manual_count <= 0) {
        throw std::invalid_argument("undefined ratio: manual branch count is zero");
    }
    return 100.0 * static_cast<double>(auto_count) / static_cast<double>(manual_count);
}

double area_recall(const BinaryImage& auto_mask, const BinaryImage& manual_mask) {
    check_same_shape(auto_mask, manual_mask);
    const AreaCounts c = area_counts(auto_mask, manual_mask);
    if (c.manual_area == 0) {
        throw std::invalid_argument("manual mask is empty: recall undefined");
    }
    return 100.0 * static_cast<double>(c.intersection) / static_cast<double>(c.manual_area);
}

double area_spill(const BinaryImage& auto_mask, const BinaryImage& manual_mask) {
    check_same_shape(auto_mask, manual_mask);
    const AreaCounts c = area_counts(auto_mask, manual_mask);
    const std::int64_t complement = manual_mask.pixel_count() - c.manual_area;
    if (complement == 0) {
        throw std::invalid_argument("manual mask covers the whole image: spill undefined");
    }
    return 100.0 * static_cast<double>(c.spill) / static_cast<double>(complement);
}

namespace {

// Zhang-Suen neighborhood, clockwise from north: p2..p9.
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

} // namespace

BinaryImage skeletonize(const BinaryImage& mask) {
    const int w = mask.width();
    const int h = mask.height();
    BinaryImage skel = mask;

    auto px = [&](int x, int y) -> int {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0;
        return skel.at(x, y) ? 1 : 0;
    };

    std::vector<std::pair<int, int>> doomed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int phase = 0; phase < 2; ++phase) {
            doomed.clear();
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (!skel.at(x, y)) continue;
                    int n[8];
                    int b = 0;
                    for (int i = 0; i < 8; ++i) {
                        n[i] = px(x + kDx[i], y + kDy[i]);
                        b += n[i];
                    }
                    if (b < 2 || b > 6) continue;
                    int transitions = 0;
                    for (int i = 0; i < 8; ++i) {
                        if (n[i] == 0 && n[(i + 1) % 8] == 1) ++transitions;
                    }
                    if (transitions != 1) continue;
                    // p2*p4*p6 and p4*p6*p8 in phase 0; p2*p4*p8 and p2*p6*p8 in phase 1
                    const int p2 = n[0], p4 = n[2], p6 = n[4], p8 = n[6];
                    if (phase == 0) {
                        if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
                    } else {
                        if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
                    }
                    doomed.emplace_back(x, y);
                }
            }
            for (auto [x, y] : doomed) skel.set(x, y, false);
            if (!doomed.empty()) changed = true;
        }
    }
    return skel;
}

std::int64_t count_branches(const BinaryImage& mask) {
    const BinaryImage skel = skeletonize(mask);
    const int w = skel.width();
    const int h = skel.height();

    std::int64_t endpoints = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!skel.at(x, y)) continue;
            int neighbors = 0;
            for (int i = 0; i < 8; ++i) {
                const int nx = x + kDx[i];
                const int ny = y + kDy[i];
                if (nx >= 0 && ny >= 0 && nx < w && ny < h && skel.at(nx, ny)) ++neighbors;
            }
            if (neighbors == 1) ++endpoints;
        }
    }
    return endpoints;
}

TracingComparison compare_tracings(const BinaryImage& auto_mask, const BinaryImage& manual_mask) {
    check_same_shape(auto_mask, manual_mask);

    TracingComparison cmp;
    cmp.auto_branches = count_branches(auto_mask);
    cmp.manual_branches = count_branches(manual_mask);

    const AreaCounts c = area_counts(auto_mask, manual_mask);
    cmp.area_intersection = c.intersection;
    cmp.area_manual = c.manual_area;
    cmp.area_spill = c.spill;
    cmp.area_manual_complement = manual_mask.pixel_count() - c.manual_area;

    // Surface undefined ratios now rather than at access time.
    branch_percentage(cmp.auto_branches, cmp.manual_branches);
    if (cmp.area_manual == 0) {
        throw std::invalid_argument("manual mask is empty: recall undefined");
    }
    if (cmp.area_manual_complement == 0) {
        throw std::invalid_argument("manual mask covers the whole image: spill undefined");
    }
    return cmp;
}

double TracingComparison::branch_pct() const {
    return branch_percentage(auto_branches, manual_branches);
}

double TracingComparison::area_recall_pct() const {
    return 100.0 * static_cast<double>(area_intersection) / static_cast<double>(area_manual);
}

double TracingComparison::area_spill_pct() const {
    return 100.0 * static_cast<double>(area_spill) / static_cast<double>(area_manual_complement);
}

std::string format_percent(std::int64_t numerator, std::int64_t denominator) {
    if (denominator <= 0) throw std::invalid_argument("percentage denominator must be positive");
    if (numerator < 0) throw std::invalid_argument("percentage numerator must be non-negative");
    // Percent scaled to hundredths, rounded half-up, all in integers.
    const std::int64_t scaled = (numerator * 10000 + denominator / 2) / denominator;
    std::string whole = std::to_string(scaled / 100);
    const std::int64_t frac = scaled % 100;
    std::string out = whole + ".";
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
    return out;
}

std::string format_percent(double pct) {
    if (!(pct >= 0)) throw std::invalid_argument("percentage must be non-negative");
    const long long scaled = std::llround(pct * 100.0);
    std::string out = std::to_string(scaled / 100) + ".";
    const long long frac = scaled % 100;
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
    return out;
}

} // namespace persistack
