#include "persistack/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "persistack/parallel.hpp"

namespace persistack {

namespace {

// Neighborhood half-width per row offset dy in [-r, r]. A square window is r
// everywhere; a disc uses the widest dx with dx*dx + dy*dy <= r*r.
std::vector<int> half_widths(const FilterParams& params) {
    const int r = params.radius;
    std::vector<int> half(static_cast<std::size_t>(2 * r + 1), r);
    if (params.shape == NeighborhoodShape::disc) {
        for (int dy = -r; dy <= r; ++dy) {
            int k = static_cast<int>(std::sqrt(static_cast<double>(r) * r - static_cast<double>(dy) * dy));
            while ((k + 1) * (k + 1) + dy * dy <= r * r) ++k;
            while (k > 0 && k * k + dy * dy > r * r) --k;
            half[static_cast<std::size_t>(dy + r)] = k;
        }
    }
    return half;
}

// Histogram window with a running rank pointer. The fine tier has one bin
// per intensity; the coarse tier aggregates 256-bin blocks so the pointer
// can jump across empty regions of a 16-bit histogram.
class MedianWindow {
public:
    explicit MedianWindow(int max_value)
        : max_value_(max_value),
          fine_(static_cast<std::size_t>(max_value) + 1, 0),
          coarse_((static_cast<std::size_t>(max_value) >> 8) + 1, 0) {}

    void add(std::uint16_t v) {
        ++fine_[v];
        ++coarse_[v >> 8];
        ++count_;
        if (v < med_) ++below_;
    }

    void remove(std::uint16_t v) {
        --fine_[v];
        --coarse_[v >> 8];
        --count_;
        if (v < med_) --below_;
    }

    void reset_cursor() {
        med_ = 0;
        below_ = 0;
    }

    // Lower median: the k-th smallest value with k = floor((n+1)/2).
    std::uint16_t median() {
        const std::int64_t k = (count_ + 1) / 2;
        for (;;) {
            if (below_ >= k) {
                if ((med_ & 255) == 0) {
                    while (med_ >= 256 && coarse_[(med_ >> 8) - 1] == 0) med_ -= 256;
                }
                --med_;
                below_ -= fine_[static_cast<std::size_t>(med_)];
            } else if (below_ + fine_[static_cast<std::size_t>(med_)] < k) {
                below_ += fine_[static_cast<std::size_t>(med_)];
                ++med_;
                if ((med_ & 255) == 0) {
                    while (med_ + 255 <= max_value_ && coarse_[med_ >> 8] == 0) med_ += 256;
                }
            } else {
                return static_cast<std::uint16_t>(med_);
            }
        }
    }

private:
    int max_value_;
    int med_ = 0;
    std::int64_t below_ = 0;
    std::int64_t count_ = 0;
    std::vector<std::uint32_t> fine_;
    std::vector<std::uint32_t> coarse_;
};

} // namespace

GrayImage median_filter(const GrayImage& img, const FilterParams& params) {
    if (params.radius < 0) {
        throw std::invalid_argument("filter radius must be non-negative, got " +
                                    std::to_string(params.radius));
    }
    if (params.radius == 0) return img;

    const int w = img.width();
    const int h = img.height();
    const int r = params.radius;
    const std::vector<int> half = half_widths(params);

    std::vector<std::uint16_t> out(static_cast<std::size_t>(w) * h);
    MedianWindow window(img.max_value());

    for (int y = 0; y < h; ++y) {
        const int dy_lo = std::max(-r, -y);
        const int dy_hi = std::min(r, h - 1 - y);

        window.reset_cursor();
        for (int dy = dy_lo; dy <= dy_hi; ++dy) {
            const std::uint16_t* row = img.row(y + dy);
            const int hw = half[static_cast<std::size_t>(dy + r)];
            const int c_hi = std::min(hw, w - 1);
            for (int c = 0; c <= c_hi; ++c) window.add(row[c]);
        }

        std::uint16_t* out_row = out.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            if (x > 0) {
                for (int dy = dy_lo; dy <= dy_hi; ++dy) {
                    const std::uint16_t* row = img.row(y + dy);
                    const int hw = half[static_cast<std::size_t>(dy + r)];
                    const int c_out = x - 1 - hw;
                    if (c_out >= 0) window.remove(row[c_out]);
                    const int c_in = x + hw;
                    if (c_in < w) window.add(row[c_in]);
                }
            }
            out_row[x] = window.median();
        }

        // Drain the last window so the histogram is empty for the next row.
        for (int dy = dy_lo; dy <= dy_hi; ++dy) {
            const std::uint16_t* row = img.row(y + dy);
            const int hw = half[static_cast<std::size_t>(dy + r)];
            const int c_lo = std::max(0, w - 1 - hw);
            for (int c = c_lo; c <= w - 1; ++c) window.remove(row[c]);
        }
    }

    return GrayImage::from_pixels(w, h, img.bit_depth(), std::move(out));
}

namespace {

double membership_entropy(double membership) {
    if (membership >= 1.0) return 0.0;
    return -membership * std::log(membership) -
           (1.0 - membership) * std::log(1.0 - membership);
}

} // namespace

ThresholdResult huang_threshold_histogram(std::span<const std::uint64_t> hist) {
    if (hist.size() != 256 && hist.size() != 65536) {
        throw std::invalid_argument("histogram must cover an 8- or 16-bit range, got " +
                                    std::to_string(hist.size()) + " bins");
    }

    int g_min = -1;
    int g_max = -1;
    for (std::size_t g = 0; g < hist.size(); ++g) {
        if (hist[g] != 0) {
            if (g_min < 0) g_min = static_cast<int>(g);
            g_max = static_cast<int>(g);
        }
    }
    if (g_min < 0) throw std::invalid_argument("degenerate histogram: no pixels");
    if (g_min == g_max) {
        throw std::invalid_argument("degenerate histogram: constant image (single intensity " +
                                    std::to_string(g_min) + ")");
    }

    // Compact the occupied bins; fuzziness is piecewise constant between
    // distinct values, so scanning them covers every candidate threshold.
    std::vector<int> vals;
    std::vector<std::uint64_t> cnts;
    for (int g = g_min; g <= g_max; ++g) {
        if (hist[static_cast<std::size_t>(g)] != 0) {
            vals.push_back(g);
            cnts.push_back(hist[static_cast<std::size_t>(g)]);
        }
    }
    const std::size_t k = vals.size();

    std::uint64_t total_n = 0;
    std::uint64_t total_w = 0;
    for (std::size_t i = 0; i < k; ++i) {
        total_n += cnts[i];
        total_w += cnts[i] * static_cast<std::uint64_t>(vals[i]);
    }

    const double c = static_cast<double>(g_max - g_min);
    double best_e = std::numeric_limits<double>::infinity();
    int best_t = g_min;

    std::uint64_t n0 = 0;
    std::uint64_t w0 = 0;
    for (std::size_t p = 0; p + 1 < k; ++p) {
        n0 += cnts[p];
        w0 += cnts[p] * static_cast<std::uint64_t>(vals[p]);
        const double mu0 = static_cast<double>(w0) / static_cast<double>(n0);
        const double mu1 = static_cast<double>(total_w - w0) / static_cast<double>(total_n - n0);

        double e = 0.0;
        for (std::size_t i = 0; i <= p; ++i) {
            const double u = 1.0 / (1.0 + std::abs(static_cast<double>(vals[i]) - mu0) / c);
            e += static_cast<double>(cnts[i]) * membership_entropy(u);
        }
        for (std::size_t i = p + 1; i < k; ++i) {
            const double u = 1.0 / (1.0 + std::abs(static_cast<double>(vals[i]) - mu1) / c);
            e += static_cast<double>(cnts[i]) * membership_entropy(u);
        }

        if (e < best_e) {
            best_e = e;
            best_t = vals[p];
        }
    }

    return {static_cast<std::uint16_t>(best_t), best_e / static_cast<double>(total_n)};
}

ThresholdResult huang_threshold(const GrayImage& img) {
    std::vector<std::uint64_t> hist(static_cast<std::size_t>(img.max_value()) + 1, 0);
    for (std::uint16_t v : img.pixels()) ++hist[v];
    return huang_threshold_histogram(hist);
}

BinaryImage binarize(const GrayImage& img, int level) {
    BinaryImage mask(img.width(), img.height());
    std::span<std::uint8_t> out = mask.data();
    std::span<const std::uint16_t> px = img.pixels();
    for (std::size_t p = 0; p < out.size(); ++p) {
        out[p] = static_cast<int>(px[p]) > level ? 1 : 0;
    }
    return mask;
}

PreprocessResult preprocess_stack(const ZStack& stack, const FilterParams& params,
                                  const ThresholdSpec& threshold, unsigned threads) {
    if (params.radius < 0) {
        throw std::invalid_argument("filter radius must be non-negative, got " +
                                    std::to_string(params.radius));
    }
    if (threshold.mode == ThresholdMode::fixed &&
        (threshold.fixed_level < 0 || threshold.fixed_level > stack.slice(0).max_value())) {
        throw std::invalid_argument("fixed threshold " + std::to_string(threshold.fixed_level) +
                                    " outside the " + std::to_string(stack.bit_depth()) +
                                    "-bit intensity range");
    }

    const int m = stack.slice_count();
    PreprocessResult result;
    result.projection = max_projection(stack);
    result.slice_masks.resize(static_cast<std::size_t>(m));
    result.slice_thresholds.resize(static_cast<std::size_t>(m));

    // Image 0 is the projection, images 1..m the slices.
    parallel_for(static_cast<std::size_t>(m) + 1, threads, [&](std::size_t i) {
        const GrayImage& src = (i == 0) ? result.projection : stack.slice(static_cast<int>(i) - 1);
        GrayImage filtered = median_filter(src, params);

        ThresholdResult tr;
        if (threshold.mode == ThresholdMode::huang) {
            try {
                tr = huang_threshold(filtered);
            } catch (const std::exception& e) {
                const std::string where =
                    (i == 0) ? std::string("projection") : "slice " + std::to_string(i);
                throw std::invalid_argument(where + ": " + e.what());
            }
        } else {
            tr.level = static_cast<std::uint16_t>(threshold.fixed_level);
            tr.fuzziness = 0.0;
        }

        BinaryImage mask = binarize(filtered, tr.level);
        if (i == 0) {
            result.projection_filtered = std::move(filtered);
            result.projection_threshold = tr;
            result.projection_mask = std::move(mask);
        } else {
            result.slice_thresholds[i - 1] = tr;
            result.slice_masks[i - 1] = std::move(mask);
        }
    });

    return result;
}

} // namespace persistack
