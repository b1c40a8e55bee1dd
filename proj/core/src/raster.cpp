#include "persistack/raster.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace persistack {

namespace {

void check_dims(int width, int height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("image dimensions must be positive, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
}

void check_depth(int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) {
        throw std::invalid_argument("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
    }
}

} // namespace

GrayImage::GrayImage(int width, int height, int bit_depth, std::uint16_t fill)
    : width_(width), height_(height), bit_depth_(bit_depth) {
    check_dims(width, height);
    check_depth(bit_depth);
    if (fill > max_value()) {
        throw std::invalid_argument("fill value " + std::to_string(fill) +
                                    " exceeds bit depth " + std::to_string(bit_depth));
    }
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage GrayImage::from_pixels(int width, int height, int bit_depth,
                                 std::vector<std::uint16_t> pixels) {
    check_dims(width, height);
    check_depth(bit_depth);
    if (pixels.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("pixel buffer size " + std::to_string(pixels.size()) +
                                    " does not match " + std::to_string(width) + "x" +
                                    std::to_string(height));
    }
    if (bit_depth == 8) {
        for (std::uint16_t v : pixels) {
            if (v > 255) {
                throw std::invalid_argument("pixel value " + std::to_string(v) +
                                            " exceeds 8-bit depth");
            }
        }
    }
    GrayImage img;
    img.width_ = width;
    img.height_ = height;
    img.bit_depth_ = bit_depth;
    img.pixels_ = std::move(pixels);
    return img;
}

BinaryImage::BinaryImage(int width, int height, bool fill)
    : width_(width), height_(height) {
    check_dims(width, height);
    fg_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

ZStack::ZStack(std::vector<GrayImage> slices) : slices_(std::move(slices)) {
    if (slices_.empty()) {
        throw std::invalid_argument("a stack needs at least one slice");
    }
    const GrayImage& first = slices_.front();
    for (std::size_t i = 1; i < slices_.size(); ++i) {
        const GrayImage& s = slices_[i];
        if (!s.same_shape(first)) {
            throw std::invalid_argument(
                "slice " + std::to_string(i + 1) + ": dimensions " + std::to_string(s.width()) +
                "x" + std::to_string(s.height()) + " differ from slice 1 (" +
                std::to_string(first.width()) + "x" + std::to_string(first.height()) + ")");
        }
        if (s.bit_depth() != first.bit_depth()) {
            throw std::invalid_argument(
                "slice " + std::to_string(i + 1) + ": bit depth " + std::to_string(s.bit_depth()) +
                " differs from slice 1 (" + std::to_string(first.bit_depth()) + ")");
        }
    }
}

GrayImage max_projection(const ZStack& stack) {
    const GrayImage& first = stack.slice(0);
    std::vector<std::uint16_t> out(first.pixels().begin(), first.pixels().end());
    for (int i = 1; i < stack.slice_count(); ++i) {
        std::span<const std::uint16_t> px = stack.slice(i).pixels();
        for (std::size_t p = 0; p < out.size(); ++p) {
            out[p] = std::max(out[p], px[p]);
        }
    }
    return GrayImage::from_pixels(first.width(), first.height(), first.bit_depth(), std::move(out));
}

std::int64_t foreground_count(const BinaryImage& img) {
    std::span<const std::uint8_t> d = img.data();
    return std::accumulate(d.begin(), d.end(), std::int64_t{0});
}

} // namespace persistack
