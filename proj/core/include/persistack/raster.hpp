#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace persistack {

/// 2-D grayscale raster, row-major, origin top-left, (x, y) = (column, row).
/// Pixels are stored as 16-bit values regardless of bit depth; every value
/// is strictly below 2^bit_depth.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, int bit_depth, std::uint16_t fill = 0);

    /// Takes ownership of a row-major pixel buffer. Validates size and range.
    static GrayImage from_pixels(int width, int height, int bit_depth,
                                 std::vector<std::uint16_t> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    int bit_depth() const { return bit_depth_; }
    std::int64_t pixel_count() const { return static_cast<std::int64_t>(width_) * height_; }

    /// Largest value representable at this bit depth.
    std::uint16_t max_value() const { return bit_depth_ == 8 ? 255 : 65535; }

    std::uint16_t at(int x, int y) const { return pixels_[index(x, y)]; }
    void set(int x, int y, std::uint16_t v) { pixels_[index(x, y)] = v; }

    std::span<const std::uint16_t> pixels() const { return pixels_; }
    const std::uint16_t* row(int y) const { return pixels_.data() + static_cast<std::size_t>(y) * width_; }

    bool same_shape(const GrayImage& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool operator==(const GrayImage& other) const = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    int bit_depth_ = 8;
    std::vector<std::uint16_t> pixels_;
};

/// Foreground/background mask. Foreground is an abstract boolean; encoders
/// map foreground to white and background to black.
class BinaryImage {
public:
    BinaryImage() = default;
    BinaryImage(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }
    std::int64_t pixel_count() const { return static_cast<std::int64_t>(width_) * height_; }

    bool at(int x, int y) const { return fg_[index(x, y)] != 0; }
    void set(int x, int y, bool v) { fg_[index(x, y)] = v ? 1 : 0; }

    /// Row-major 0/1 bytes.
    std::span<const std::uint8_t> data() const { return fg_; }
    std::span<std::uint8_t> data() { return fg_; }

    bool same_shape(const BinaryImage& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool operator==(const BinaryImage& other) const = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> fg_;
};

/// Ordered slice sequence in acquisition order (slice 1 first). All slices
/// share width, height and bit depth; at least one slice.
class ZStack {
public:
    explicit ZStack(std::vector<GrayImage> slices);

    int slice_count() const { return static_cast<int>(slices_.size()); }
    const GrayImage& slice(int i) const { return slices_[static_cast<std::size_t>(i)]; }
    const std::vector<GrayImage>& slices() const { return slices_; }

    int width() const { return slices_.front().width(); }
    int height() const { return slices_.front().height(); }
    int bit_depth() const { return slices_.front().bit_depth(); }

    /// Acquisition spacing between planes, when known. Metadata only; no
    /// operation consumes it.
    std::optional<double> slice_spacing_um;

private:
    std::vector<GrayImage> slices_;
};

/// Per-pixel maximum over all slices. Same dimensions and bit depth.
GrayImage max_projection(const ZStack& stack);

/// Number of foreground pixels.
std::int64_t foreground_count(const BinaryImage& img);

} // namespace persistack
