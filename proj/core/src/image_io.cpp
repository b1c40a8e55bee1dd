#include "persistack/image_io.hpp"

#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace persistack {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw std::runtime_error(path + ": " + msg);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    if (in.bad()) fail(path, "read error");
    return buf;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open file for writing");
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) fail(path, "write error");
}

std::string lower_ext(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

void check_decoded_dims(const std::string& path, long long w, long long h) {
    if (w <= 0 || h <= 0 || w > (1 << 20) || h > (1 << 20) || w * h > (1LL << 30)) {
        fail(path, "unreasonable image dimensions " + std::to_string(w) + "x" + std::to_string(h));
    }
}

// ---------------------------------------------------------------- PGM ----

bool is_pgm_magic(const std::vector<std::uint8_t>& buf) {
    return buf.size() >= 2 && buf[0] == 'P' && (buf[1] == '2' || buf[1] == '5');
}

// Reads the next header token, skipping whitespace and '#' comments.
std::string pgm_token(const std::vector<std::uint8_t>& buf, std::size_t& pos, const std::string& path) {
    for (;;) {
        while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
        if (pos < buf.size() && buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    std::string tok;
    while (pos < buf.size() && !std::isspace(buf[pos]) && buf[pos] != '#') {
        tok += static_cast<char>(buf[pos++]);
    }
    if (tok.empty()) fail(path, "truncated PGM header");
    return tok;
}

long long pgm_int(const std::vector<std::uint8_t>& buf, std::size_t& pos, const std::string& path) {
    const std::string tok = pgm_token(buf, pos, path);
    try {
        return std::stoll(tok);
    } catch (const std::exception&) {
        fail(path, "bad PGM header token '" + tok + "'");
    }
}

GrayImage load_pgm(const std::vector<std::uint8_t>& buf, const std::string& path) {
    std::size_t pos = 0;
    const std::string magic = pgm_token(buf, pos, path);
    const bool binary = magic == "P5";
    if (!binary && magic != "P2") fail(path, "not a PGM file (magic '" + magic + "')");

    const long long w = pgm_int(buf, pos, path);
    const long long h = pgm_int(buf, pos, path);
    const long long maxval = pgm_int(buf, pos, path);
    check_decoded_dims(path, w, h);
    if (maxval <= 0 || maxval > 65535) {
        fail(path, "unsupported PGM maxval " + std::to_string(maxval));
    }
    const int bit_depth = maxval <= 255 ? 8 : 16;
    const std::size_t count = static_cast<std::size_t>(w * h);

    std::vector<std::uint16_t> px(count);
    if (binary) {
        ++pos;   // single whitespace after maxval
        const int bpp = maxval <= 255 ? 1 : 2;
        if (buf.size() - pos < count * static_cast<std::size_t>(bpp)) {
            fail(path, "truncated PGM pixel data");
        }
        if (bpp == 1) {
            for (std::size_t i = 0; i < count; ++i) px[i] = buf[pos + i];
        } else {
            for (std::size_t i = 0; i < count; ++i) {
                px[i] = static_cast<std::uint16_t>((buf[pos + 2 * i] << 8) | buf[pos + 2 * i + 1]);
            }
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long long v = pgm_int(buf, pos, path);
            if (v < 0 || v > maxval) fail(path, "PGM sample " + std::to_string(v) + " out of range");
            px[i] = static_cast<std::uint16_t>(v);
        }
    }
    for (std::uint16_t v : px) {
        if (v > maxval) fail(path, "PGM sample exceeds declared maxval");
    }
    return GrayImage::from_pixels(static_cast<int>(w), static_cast<int>(h), bit_depth, std::move(px));
}

void save_pgm(const GrayImage& img, const std::string& path) {
    const int maxval = img.bit_depth() == 8 ? 255 : 65535;
    std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                         "\n" + std::to_string(maxval) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    if (img.bit_depth() == 8) {
        for (std::uint16_t v : img.pixels()) out.push_back(static_cast<std::uint8_t>(v));
    } else {
        for (std::uint16_t v : img.pixels()) {
            out.push_back(static_cast<std::uint8_t>(v >> 8));
            out.push_back(static_cast<std::uint8_t>(v & 0xff));
        }
    }
    write_file(path, out);
}

// ---------------------------------------------------------------- PNG ----

bool is_png_magic(const std::vector<std::uint8_t>& buf) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return buf.size() >= 8 && std::memcmp(buf.data(), sig, 8) == 0;
}

struct PngReadState {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->pos + n > st->size) {
        png_error(png, "unexpected end of PNG stream");
    }
    std::memcpy(out, st->data + st->pos, n);
    st->pos += n;
}

void png_vec_write(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

void png_vec_flush(png_structp) {}

GrayImage load_png(const std::vector<std::uint8_t>& buf, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "libpng initialization failed");
    }

    PngReadState state{buf.data(), buf.size(), 0};
    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0, h = 0;
    int depth = 0, color = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "PNG decode error");
    }

    png_set_read_fn(png, &state, png_mem_read);
    png_read_info(png, info);
    png_get_IHDR(png, info, &w, &h, &depth, &color, nullptr, nullptr, nullptr);

    if (color != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported pixel layout: only grayscale PNG is accepted");
    }
    check_decoded_dims(path, w, h);
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + static_cast<std::size_t>(y) * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const int out_depth = depth == 16 ? 16 : 8;
    std::vector<std::uint16_t> px(static_cast<std::size_t>(w) * h);
    if (out_depth == 8) {
        for (std::size_t i = 0; i < px.size(); ++i) px[i] = raw[i];
    } else {
        for (std::size_t i = 0; i < px.size(); ++i) {
            px[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);   // network order
        }
    }
    return GrayImage::from_pixels(static_cast<int>(w), static_cast<int>(h), out_depth, std::move(px));
}

void save_png_impl(int width, int height, int bit_depth, int color_type,
                   const std::vector<std::uint8_t>& raw, std::size_t rowbytes,
                   const std::vector<Rgb>* palette, const std::string& path) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(path, "libpng initialization failed");
    }

    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    std::vector<png_color> plte;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "PNG encode error");
    }

    png_set_write_fn(png, &out, png_vec_write, png_vec_flush);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    if (palette != nullptr) {
        plte.resize(palette->size());
        for (std::size_t i = 0; i < palette->size(); ++i) {
            plte[i] = {(*palette)[i][0], (*palette)[i][1], (*palette)[i][2]};
        }
        png_set_PLTE(png, info, plte.data(), static_cast<int>(plte.size()));
    }
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(raw.data() + static_cast<std::size_t>(y) * rowbytes);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);

    write_file(path, out);
}

void save_png_gray(const GrayImage& img, const std::string& path) {
    const int depth = img.bit_depth();
    const std::size_t rowbytes = static_cast<std::size_t>(img.width()) * (depth == 16 ? 2 : 1);
    std::vector<std::uint8_t> raw(rowbytes * static_cast<std::size_t>(img.height()));
    std::span<const std::uint16_t> px = img.pixels();
    if (depth == 8) {
        for (std::size_t i = 0; i < px.size(); ++i) raw[i] = static_cast<std::uint8_t>(px[i]);
    } else {
        for (std::size_t i = 0; i < px.size(); ++i) {
            raw[2 * i] = static_cast<std::uint8_t>(px[i] >> 8);   // network order
            raw[2 * i + 1] = static_cast<std::uint8_t>(px[i] & 0xff);
        }
    }
    save_png_impl(img.width(), img.height(), depth, PNG_COLOR_TYPE_GRAY, raw, rowbytes, nullptr, path);
}

// --------------------------------------------------------------- TIFF ----

bool is_tiff_magic(const std::vector<std::uint8_t>& buf) {
    if (buf.size() < 8) return false;
    const bool ii = buf[0] == 'I' && buf[1] == 'I' && buf[2] == 42 && buf[3] == 0;
    const bool mm = buf[0] == 'M' && buf[1] == 'M' && buf[2] == 0 && buf[3] == 42;
    return ii || mm;
}

struct TiffFile {
    const std::vector<std::uint8_t>& buf;
    const std::string& path;
    bool big_endian;

    std::uint16_t rd16(std::size_t off) const {
        if (off + 2 > buf.size()) fail(path, "truncated TIFF");
        return big_endian ? static_cast<std::uint16_t>((buf[off] << 8) | buf[off + 1])
                          : static_cast<std::uint16_t>(buf[off] | (buf[off + 1] << 8));
    }
    std::uint32_t rd32(std::size_t off) const {
        if (off + 4 > buf.size()) fail(path, "truncated TIFF");
        if (big_endian) {
            return (static_cast<std::uint32_t>(buf[off]) << 24) | (static_cast<std::uint32_t>(buf[off + 1]) << 16) |
                   (static_cast<std::uint32_t>(buf[off + 2]) << 8) | buf[off + 3];
        }
        return static_cast<std::uint32_t>(buf[off]) | (static_cast<std::uint32_t>(buf[off + 1]) << 8) |
               (static_cast<std::uint32_t>(buf[off + 2]) << 16) | (static_cast<std::uint32_t>(buf[off + 3]) << 24);
    }
};

struct TiffEntry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::size_t value_field = 0;   // offset of the 4-byte value/offset field
};

std::size_t tiff_type_size(std::uint16_t type) {
    switch (type) {
        case 1: return 1;   // BYTE
        case 3: return 2;   // SHORT
        case 4: return 4;   // LONG
        default: return 0;
    }
}

std::uint32_t tiff_value(const TiffFile& f, const TiffEntry& e, std::uint32_t index) {
    const std::size_t elem = tiff_type_size(e.type);
    if (elem == 0) fail(f.path, "unsupported TIFF field type " + std::to_string(e.type));
    if (index >= e.count) fail(f.path, "TIFF field index out of range");
    const std::size_t total = elem * e.count;
    const std::size_t base = total <= 4 ? e.value_field : f.rd32(e.value_field);
    const std::size_t off = base + elem * index;
    switch (elem) {
        case 1:
            if (off >= f.buf.size()) fail(f.path, "truncated TIFF");
            return f.buf[off];
        case 2: return f.rd16(off);
        default: return f.rd32(off);
    }
}

std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* src, std::size_t n,
                                       std::size_t expected, const std::string& path) {
    std::vector<std::uint8_t> out(expected);
    uLongf dest_len = static_cast<uLongf>(expected);
    const int rc = uncompress(out.data(), &dest_len, src, static_cast<uLong>(n));
    if (rc != Z_OK || dest_len != expected) fail(path, "corrupt deflate strip");
    return out;
}

GrayImage decode_tiff_page(const TiffFile& f, std::size_t ifd_off, int page) {
    const std::string where = f.path + " page " + std::to_string(page + 1);
    const std::uint16_t entry_count = f.rd16(ifd_off);

    std::uint32_t width = 0, height = 0, bits = 1, compression = 1, photometric = 1;
    std::uint32_t samples = 1, rows_per_strip = 0xffffffffu, predictor = 1, planar = 1;
    std::uint32_t sample_format = 1, orientation = 1;
    TiffEntry strip_offsets, strip_counts;
    bool have_offsets = false, have_counts = false, have_photometric = false;

    for (std::uint16_t i = 0; i < entry_count; ++i) {
        const std::size_t eoff = ifd_off + 2 + static_cast<std::size_t>(i) * 12;
        const std::uint16_t tag = f.rd16(eoff);
        TiffEntry e{f.rd16(eoff + 2), f.rd32(eoff + 4), eoff + 8};
        switch (tag) {
            case 256: width = tiff_value(f, e, 0); break;
            case 257: height = tiff_value(f, e, 0); break;
            case 258: bits = tiff_value(f, e, 0); break;
            case 259: compression = tiff_value(f, e, 0); break;
            case 262: photometric = tiff_value(f, e, 0); have_photometric = true; break;
            case 273: strip_offsets = e; have_offsets = true; break;
            case 274: orientation = tiff_value(f, e, 0); break;
            case 277: samples = tiff_value(f, e, 0); break;
            case 278: rows_per_strip = tiff_value(f, e, 0); break;
            case 279: strip_counts = e; have_counts = true; break;
            case 284: planar = tiff_value(f, e, 0); break;
            case 317: predictor = tiff_value(f, e, 0); break;
            case 322: case 323: case 324: case 325:
                fail(where, "tiled TIFF is not supported");
            case 339: sample_format = tiff_value(f, e, 0); break;
            default: break;   // ignore ancillary tags
        }
    }

    check_decoded_dims(where, width, height);
    if (samples != 1) fail(where, "unsupported pixel layout: " + std::to_string(samples) + " samples per pixel");
    if (bits != 8 && bits != 16) fail(where, "unsupported bit depth " + std::to_string(bits));
    if (compression != 1 && compression != 8 && compression != 32946) {
        fail(where, "unsupported compression " + std::to_string(compression) +
                    " (only none and deflate are accepted)");
    }
    if (have_photometric && photometric != 1) {
        fail(where, "unsupported photometric interpretation " + std::to_string(photometric));
    }
    if (planar != 1) fail(where, "unsupported planar configuration");
    if (sample_format != 1) fail(where, "unsupported sample format " + std::to_string(sample_format));
    if (orientation != 1) fail(where, "unsupported orientation " + std::to_string(orientation));
    if (predictor != 1 && predictor != 2) fail(where, "unsupported predictor " + std::to_string(predictor));
    if (!have_offsets) fail(where, "missing strip offsets");

    const std::size_t bpp = bits / 8;
    const std::uint32_t rps = std::min(rows_per_strip, height);
    if (rps == 0) fail(where, "bad rows-per-strip value");
    const std::uint32_t strips = (height + rps - 1) / rps;
    if (strip_offsets.count != strips) fail(where, "strip offset count mismatch");
    if (!have_counts && compression != 1) fail(where, "missing strip byte counts");

    std::vector<std::uint8_t> plane(static_cast<std::size_t>(width) * height * bpp);
    for (std::uint32_t s = 0; s < strips; ++s) {
        const std::uint32_t row0 = s * rps;
        const std::uint32_t rows = std::min(rps, height - row0);
        const std::size_t expected = static_cast<std::size_t>(rows) * width * bpp;
        const std::size_t src_off = tiff_value(f, strip_offsets, s);
        const std::size_t src_len = have_counts ? tiff_value(f, strip_counts, s) : expected;
        if (src_off + src_len > f.buf.size()) fail(where, "strip outside the file");

        std::vector<std::uint8_t> strip;
        if (compression == 1) {
            if (src_len < expected) fail(where, "strip shorter than expected");
            strip.assign(f.buf.begin() + static_cast<std::ptrdiff_t>(src_off),
                         f.buf.begin() + static_cast<std::ptrdiff_t>(src_off + expected));
        } else {
            strip = zlib_inflate(f.buf.data() + src_off, src_len, expected, where);
        }
        std::memcpy(plane.data() + static_cast<std::size_t>(row0) * width * bpp, strip.data(), expected);
    }

    std::vector<std::uint16_t> px(static_cast<std::size_t>(width) * height);
    if (bpp == 1) {
        for (std::size_t i = 0; i < px.size(); ++i) px[i] = plane[i];
        if (predictor == 2) {
            for (std::uint32_t y = 0; y < height; ++y) {
                std::uint16_t* row = px.data() + static_cast<std::size_t>(y) * width;
                for (std::uint32_t x = 1; x < width; ++x) {
                    row[x] = static_cast<std::uint8_t>(row[x] + row[x - 1]);
                }
            }
        }
    } else {
        for (std::size_t i = 0; i < px.size(); ++i) {
            const std::uint8_t b0 = plane[2 * i];
            const std::uint8_t b1 = plane[2 * i + 1];
            px[i] = f.big_endian ? static_cast<std::uint16_t>((b0 << 8) | b1)
                                 : static_cast<std::uint16_t>(b0 | (b1 << 8));
        }
        if (predictor == 2) {
            for (std::uint32_t y = 0; y < height; ++y) {
                std::uint16_t* row = px.data() + static_cast<std::size_t>(y) * width;
                for (std::uint32_t x = 1; x < width; ++x) {
                    row[x] = static_cast<std::uint16_t>(row[x] + row[x - 1]);
                }
            }
        }
    }

    return GrayImage::from_pixels(static_cast<int>(width), static_cast<int>(height),
                                  static_cast<int>(bits), std::move(px));
}

std::vector<GrayImage> load_tiff(const std::vector<std::uint8_t>& buf, const std::string& path) {
    TiffFile f{buf, path, buf[0] == 'M'};
    std::vector<GrayImage> pages;
    std::set<std::size_t> seen;
    std::size_t ifd = f.rd32(4);
    while (ifd != 0) {
        if (!seen.insert(ifd).second) fail(path, "cyclic IFD chain");
        if (pages.size() >= 4096) fail(path, "too many pages");
        pages.push_back(decode_tiff_page(f, ifd, static_cast<int>(pages.size())));
        const std::uint16_t n = f.rd16(ifd);
        ifd = f.rd32(ifd + 2 + static_cast<std::size_t>(n) * 12);
    }
    if (pages.empty()) fail(path, "TIFF has no pages");
    return pages;
}

void append16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void patch32(std::vector<std::uint8_t>& out, std::size_t off, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out[off + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xff);
}

void append_ifd_entry(std::vector<std::uint8_t>& out, std::uint16_t tag, std::uint16_t type,
                      std::uint32_t count, std::uint32_t value) {
    append16(out, tag);
    append16(out, type);
    append32(out, count);
    if (type == 3) {   // SHORT: left-justified in the 4-byte field (little-endian file)
        append16(out, static_cast<std::uint16_t>(value));
        append16(out, 0);
    } else {
        append32(out, value);
    }
}

std::vector<std::uint8_t> zlib_deflate(const std::uint8_t* src, std::size_t n) {
    uLongf bound = compressBound(static_cast<uLong>(n));
    std::vector<std::uint8_t> out(bound);
    if (compress2(out.data(), &bound, src, static_cast<uLong>(n), 6) != Z_OK) {
        throw std::runtime_error("deflate compression failed");
    }
    out.resize(bound);
    return out;
}

} // namespace

void save_tiff(const std::vector<GrayImage>& pages, const std::string& path, bool deflate) {
    if (pages.empty()) fail(path, "cannot write a TIFF with no pages");

    std::vector<std::uint8_t> out;
    out.reserve(1024);
    out.push_back('I');
    out.push_back('I');
    append16(out, 42);
    const std::size_t first_ifd_link = out.size();
    append32(out, 0);

    std::size_t prev_link = first_ifd_link;
    for (const GrayImage& img : pages) {
        // Strip data (single strip per page), samples little-endian.
        std::vector<std::uint8_t> strip;
        if (img.bit_depth() == 8) {
            strip.reserve(img.pixels().size());
            for (std::uint16_t v : img.pixels()) strip.push_back(static_cast<std::uint8_t>(v));
        } else {
            strip.reserve(img.pixels().size() * 2);
            for (std::uint16_t v : img.pixels()) {
                strip.push_back(static_cast<std::uint8_t>(v & 0xff));
                strip.push_back(static_cast<std::uint8_t>(v >> 8));
            }
        }
        if (deflate) strip = zlib_deflate(strip.data(), strip.size());

        if (out.size() % 2 != 0) out.push_back(0);
        const std::uint32_t strip_off = static_cast<std::uint32_t>(out.size());
        out.insert(out.end(), strip.begin(), strip.end());

        if (out.size() % 2 != 0) out.push_back(0);
        const std::uint32_t ifd_off = static_cast<std::uint32_t>(out.size());
        patch32(out, prev_link, ifd_off);

        append16(out, 9);   // entry count
        append_ifd_entry(out, 256, 4, 1, static_cast<std::uint32_t>(img.width()));
        append_ifd_entry(out, 257, 4, 1, static_cast<std::uint32_t>(img.height()));
        append_ifd_entry(out, 258, 3, 1, static_cast<std::uint32_t>(img.bit_depth()));
        append_ifd_entry(out, 259, 3, 1, deflate ? 8u : 1u);
        append_ifd_entry(out, 262, 3, 1, 1);   // BlackIsZero
        append_ifd_entry(out, 273, 4, 1, strip_off);
        append_ifd_entry(out, 277, 3, 1, 1);
        append_ifd_entry(out, 278, 4, 1, static_cast<std::uint32_t>(img.height()));
        append_ifd_entry(out, 279, 4, 1, static_cast<std::uint32_t>(strip.size()));
        prev_link = out.size();
        append32(out, 0);   // next IFD, patched by the following page
    }

    write_file(path, out);
}

std::vector<GrayImage> load_gray_pages(const std::string& path) {
    const std::vector<std::uint8_t> buf = read_file(path);
    if (buf.size() < 8) fail(path, "file too short to be an image");
    if (is_png_magic(buf)) return {load_png(buf, path)};
    if (is_pgm_magic(buf)) return {load_pgm(buf, path)};
    if (is_tiff_magic(buf)) return load_tiff(buf, path);
    fail(path, "unsupported image format (expected PNG, PGM, or TIFF)");
}

GrayImage load_gray_image(const std::string& path) {
    return std::move(load_gray_pages(path).front());
}

ZStack load_stack(const std::vector<std::string>& sources) {
    if (sources.empty()) throw std::invalid_argument("no input files given");

    std::vector<GrayImage> slices;
    std::vector<std::string> provenance;
    for (const std::string& src : sources) {
        std::vector<GrayImage> pages = load_gray_pages(src);
        if (sources.size() > 1 && pages.size() != 1) {
            fail(src, "multi-file stacks need single-page slices, found " +
                          std::to_string(pages.size()) + " pages");
        }
        for (std::size_t p = 0; p < pages.size(); ++p) {
            provenance.push_back(src + (pages.size() > 1 ? " page " + std::to_string(p + 1) : ""));
            slices.push_back(std::move(pages[p]));
        }
    }

    const GrayImage& first = slices.front();
    for (std::size_t i = 1; i < slices.size(); ++i) {
        if (!slices[i].same_shape(first)) {
            fail(provenance[i], "dimensions " + std::to_string(slices[i].width()) + "x" +
                                    std::to_string(slices[i].height()) + " differ from " +
                                    provenance[0] + " (" + std::to_string(first.width()) + "x" +
                                    std::to_string(first.height()) + ")");
        }
        if (slices[i].bit_depth() != first.bit_depth()) {
            fail(provenance[i], "bit depth " + std::to_string(slices[i].bit_depth()) +
                                    " differs from " + provenance[0]);
        }
    }
    return ZStack(std::move(slices));
}

BinaryImage load_mask(const std::string& path) {
    const GrayImage img = load_gray_image(path);
    BinaryImage mask(img.width(), img.height());
    std::span<std::uint8_t> out = mask.data();
    std::span<const std::uint16_t> px = img.pixels();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = px[i] != 0 ? 1 : 0;
    return mask;
}

void save_mask(const BinaryImage& mask, const std::string& path) {
    std::vector<std::uint16_t> px(mask.data().size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = mask.data()[i] ? 255 : 0;
    save_gray(GrayImage::from_pixels(mask.width(), mask.height(), 8, std::move(px)), path);
}

void save_gray(const GrayImage& img, const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") {
        save_png_gray(img, path);
    } else if (ext == ".pgm" || ext == ".pnm") {
        save_pgm(img, path);
    } else if (ext == ".tif" || ext == ".tiff") {
        save_tiff({img}, path);
    } else {
        fail(path, "unsupported output format '" + ext + "' (use .png, .pgm, or .tif)");
    }
}

void save_indexed_png(int width, int height, const std::vector<std::uint8_t>& indices,
                      const std::vector<Rgb>& palette, const std::string& path) {
    if (indices.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("index buffer size does not match dimensions");
    }
    if (palette.empty() || palette.size() > 256) {
        throw std::invalid_argument("palette must hold 1..256 entries");
    }
    save_png_impl(width, height, 8, PNG_COLOR_TYPE_PALETTE, indices,
                  static_cast<std::size_t>(width), &palette, path);
}

void save_rgb_png(int width, int height, const std::vector<std::uint8_t>& rgb,
                  const std::string& path) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        throw std::invalid_argument("RGB buffer size does not match dimensions");
    }
    save_png_impl(width, height, 8, PNG_COLOR_TYPE_RGB, rgb,
                  static_cast<std::size_t>(width) * 3, nullptr, path);
}

} // namespace persistack
