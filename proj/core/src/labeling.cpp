#include "persistack/labeling.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace persistack {

LabelImage::LabelImage(int width, int height, std::vector<std::int32_t> labels, std::int32_t count)
    : width_(width), height_(height), count_(count), labels_(std::move(labels)) {
    if (labels_.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("label buffer size does not match dimensions");
    }
}

namespace {

struct UnionFind {
    std::vector<std::int32_t> parent;

    std::int32_t make_set() {
        parent.push_back(static_cast<std::int32_t>(parent.size()));
        return static_cast<std::int32_t>(parent.size() - 1);
    }

    std::int32_t find(std::int32_t a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    }

    void unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent[static_cast<std::size_t>(b)] = a;
        else parent[static_cast<std::size_t>(a)] = b;
    }
};

} // namespace

LabelImage label_components(const BinaryImage& img, Connectivity connectivity) {
    const int w = img.width();
    const int h = img.height();
    std::span<const std::uint8_t> fg = img.data();

    std::vector<std::int32_t> prov(static_cast<std::size_t>(w) * h, -1);
    UnionFind uf;
    uf.make_set();   // slot 0 reserved so provisional ids start at 1

    const bool diag = connectivity == Connectivity::eight;

    // First pass: provisional labels from already-scanned neighbors.
    for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const std::size_t p = row + x;
            if (!fg[p]) continue;

            std::int32_t label = -1;
            auto consider = [&](std::size_t q) {
                const std::int32_t lq = prov[q];
                if (lq <= 0) return;
                if (label <= 0) label = lq;
                else uf.unite(label, lq);
            };
            if (x > 0) consider(p - 1);
            if (y > 0) {
                consider(p - static_cast<std::size_t>(w));
                if (diag) {
                    if (x > 0) consider(p - static_cast<std::size_t>(w) - 1);
                    if (x < w - 1) consider(p - static_cast<std::size_t>(w) + 1);
                }
            }
            prov[p] = (label > 0) ? label : uf.make_set();
        }
    }

    // Second pass: dense ids in raster order of each component's first pixel.
    std::vector<std::int32_t> dense(uf.parent.size(), 0);
    std::vector<std::int32_t> labels(static_cast<std::size_t>(w) * h, 0);
    std::int32_t k = 0;
    for (std::size_t p = 0; p < labels.size(); ++p) {
        if (prov[p] <= 0) continue;
        const std::int32_t root = uf.find(prov[p]);
        if (dense[static_cast<std::size_t>(root)] == 0) dense[static_cast<std::size_t>(root)] = ++k;
        labels[p] = dense[static_cast<std::size_t>(root)];
    }

    return LabelImage(w, h, std::move(labels), k);
}

namespace {

void check_id(const LabelImage& labels, std::int32_t id) {
    if (id < 1 || id > labels.component_count()) {
        throw std::invalid_argument("component id " + std::to_string(id) + " out of range 1.." +
                                    std::to_string(labels.component_count()));
    }
}

} // namespace

BinaryImage component_mask(const LabelImage& labels, std::int32_t id) {
    check_id(labels, id);
    BinaryImage mask(labels.width(), labels.height());
    std::span<std::uint8_t> out = mask.data();
    std::span<const std::int32_t> in = labels.labels();
    for (std::size_t p = 0; p < out.size(); ++p) {
        out[p] = (in[p] == id) ? 1 : 0;
    }
    return mask;
}

bool component_intersects(const LabelImage& labels, std::int32_t id, const BinaryImage& probe) {
    check_id(labels, id);
    if (probe.width() != labels.width() || probe.height() != labels.height()) {
        throw std::invalid_argument("probe dimensions do not match the label image");
    }
    std::span<const std::int32_t> in = labels.labels();
    std::span<const std::uint8_t> fg = probe.data();
    for (std::size_t p = 0; p < in.size(); ++p) {
        if (in[p] == id && fg[p]) return true;
    }
    return false;
}

std::vector<ComponentStats> component_stats(const LabelImage& labels) {
    std::vector<ComponentStats> stats(static_cast<std::size_t>(labels.component_count()));
    for (std::size_t i = 0; i < stats.size(); ++i) {
        stats[i].id = static_cast<std::int32_t>(i) + 1;
        stats[i].x_min = labels.width();
        stats[i].y_min = labels.height();
        stats[i].x_max = -1;
        stats[i].y_max = -1;
    }
    std::span<const std::int32_t> in = labels.labels();
    const int w = labels.width();
    for (std::size_t p = 0; p < in.size(); ++p) {
        const std::int32_t id = in[p];
        if (id == 0) continue;
        ComponentStats& s = stats[static_cast<std::size_t>(id) - 1];
        const int x = static_cast<int>(p % static_cast<std::size_t>(w));
        const int y = static_cast<int>(p / static_cast<std::size_t>(w));
        ++s.area;
        s.x_min = std::min(s.x_min, x);
        s.y_min = std::min(s.y_min, y);
        s.x_max = std::max(s.x_max, x);
        s.y_max = std::max(s.y_max, y);
    }
    return stats;
}

} // namespace persistack
