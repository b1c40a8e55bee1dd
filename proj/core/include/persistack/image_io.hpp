#pragma once

#include <string>
#include <vector>

#include "persistack/persistence.hpp"
#include "persistack/raster.hpp"

namespace persistack {

/// Decoders accept grayscale PNG (8/16-bit), PGM (P2/P5) and a baseline
/// grayscale TIFF subset (8/16-bit, strips, uncompressed or deflate,
/// optional horizontal predictor, multi-page, either byte order).
/// Encoders pick the container from the file extension.

/// All pages of one file, in page order. Single-image formats yield one.
std::vector<GrayImage> load_gray_pages(const std::string& path);

/// First page only.
GrayImage load_gray_image(const std::string& path);

/// Builds a stack from the ordered source list. A single multi-page source
/// contributes one slice per page; with several sources each must hold
/// exactly one page.
ZStack load_stack(const std::vector<std::string>& sources);

/// Mask decoding: any nonzero pixel is foreground.
BinaryImage load_mask(const std::string& path);

/// Masks encode foreground as white (255 or 65535) and background as 0.
void save_mask(const BinaryImage& mask, const std::string& path);

void save_gray(const GrayImage& img, const std::string& path);

/// Multi-page grayscale TIFF; `deflate` toggles per-strip compression.
void save_tiff(const std::vector<GrayImage>& pages, const std::string& path, bool deflate = false);

/// 8-bit indexed-palette PNG.
void save_indexed_png(int width, int height, const std::vector<std::uint8_t>& indices,
                      const std::vector<Rgb>& palette, const std::string& path);

/// 8-bit RGB PNG from a packed row-major buffer.
void save_rgb_png(int width, int height, const std::vector<std::uint8_t>& rgb,
                  const std::string& path);

} // namespace persistack
