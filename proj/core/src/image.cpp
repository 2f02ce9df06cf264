#include "worldact/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <png.h>

#include "worldact/errors.hpp"

namespace worldact {

ImageU8 quantize_to_u8(const ImageF& img) {
  ImageU8 out(img.height(), img.width(), img.channels());
  for (size_t i = 0; i < img.size(); ++i) {
    double v = std::clamp(img.data()[i], 0.0, 1.0);
    out.data()[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

ImageF dequantize(const ImageU8& img) {
  ImageF out(img.height(), img.width(), img.channels());
  for (size_t i = 0; i < img.size(); ++i)
    out.data()[i] = img.data()[i] / 255.0;
  return out;
}

namespace {

struct FileCloser {
  void operator()(FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_png(const std::filesystem::path& path, const ImageU8& img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw ArgumentError("write_png: expected 1 or 3 channels");
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw DataError("write_png: cannot open " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("write_png: libpng failure on " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width(), img.height(), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.height());
  for (int r = 0; r < img.height(); ++r)
    rows[r] = const_cast<png_bytep>(img.data() + static_cast<size_t>(r) * img.width() * img.channels());
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageU8 read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw DataError("read_png: cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("read_png: libpng failure on " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  png_set_expand(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE)
    png_set_palette_to_rgb(png);
  png_read_update_info(png, info);

  int width = png_get_image_width(png, info);
  int height = png_get_image_height(png, info);
  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("read_png: unsupported channel count in " + path.string());
  }
  ImageU8 img(height, width, channels);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r)
    rows[r] = img.data() + static_cast<size_t>(r) * width * channels;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

std::string encode_png(const ImageU8& img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw ArgumentError("encode_png: expected 1 or 3 channels");
  std::string out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("encode_png: libpng failure");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        static_cast<std::string*>(png_get_io_ptr(p))->append(reinterpret_cast<char*>(data), len);
      },
      [](png_structp) {});
  png_set_IHDR(png, info, img.width(), img.height(), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.height());
  for (int r = 0; r < img.height(); ++r)
    rows[r] = const_cast<png_bytep>(img.data() + static_cast<size_t>(r) * img.width() * img.channels());
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

ImageU8 decode_png(const std::string& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("decode_png: libpng failure");
  }
  struct Cursor {
    const std::string* buf;
    size_t pos;
  } cur{&bytes, 0};
  png_set_read_fn(png, &cur, [](png_structp p, png_bytep data, png_size_t len) {
    auto* c = static_cast<Cursor*>(png_get_io_ptr(p));
    if (c->pos + len > c->buf->size()) png_error(p, "short read");
    std::memcpy(data, c->buf->data() + c->pos, len);
    c->pos += len;
  });
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  png_set_expand(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE)
    png_set_palette_to_rgb(png);
  png_read_update_info(png, info);
  int width = png_get_image_width(png, info);
  int height = png_get_image_height(png, info);
  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("decode_png: unsupported channel count");
  }
  ImageU8 img(height, width, channels);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r)
    rows[r] = img.data() + static_cast<size_t>(r) * width * channels;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_pfm(const std::filesystem::path& path, const ImageF& img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw ArgumentError("write_pfm: expected 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_pfm: cannot open " + path.string());
  out << (img.channels() == 1 ? "Pf" : "PF") << "\n"
      << img.width() << " " << img.height() << "\n-1.0\n";
  // PFM rows are bottom-up.
  std::vector<float> row(static_cast<size_t>(img.width()) * img.channels());
  for (int r = img.height() - 1; r >= 0; --r) {
    for (int c = 0; c < img.width(); ++c)
      for (int ch = 0; ch < img.channels(); ++ch)
        row[static_cast<size_t>(c) * img.channels() + ch] = static_cast<float>(img.at(r, c, ch));
    out.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
  }
}

ImageF read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_pfm: cannot open " + path.string());
  std::string magic;
  int width = 0, height = 0;
  double scale = 0;
  in >> magic >> width >> height >> scale;
  if (magic != "Pf" && magic != "PF")
    throw FormatError("read_pfm: bad magic in " + path.string());
  if (width <= 0 || height <= 0)
    throw FormatError("read_pfm: bad dimensions in " + path.string());
  in.get();  // single whitespace after scale
  int channels = magic == "Pf" ? 1 : 3;
  ImageF img(height, width, channels);
  std::vector<float> row(static_cast<size_t>(width) * channels);
  for (int r = height - 1; r >= 0; --r) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    if (!in) throw FormatError("read_pfm: truncated data in " + path.string());
    for (int c = 0; c < width; ++c)
      for (int ch = 0; ch < channels; ++ch)
        img.at(r, c, ch) = row[static_cast<size_t>(c) * channels + ch];
  }
  return img;
}

Mask threshold_mask(const ImageF& img, double thresh) {
  Mask m(img.height(), img.width(), 1);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      m.at(r, c) = img.at(r, c) > thresh ? 1 : 0;
  return m;
}

Mask dilate(const Mask& m, int radius) {
  if (radius <= 0) return m;
  Mask out(m.height(), m.width(), 1);
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      uint8_t v = 0;
      for (int dr = -radius; dr <= radius && !v; ++dr) {
        int rr = r + dr;
        if (rr < 0 || rr >= m.height()) continue;
        for (int dc = -radius; dc <= radius; ++dc) {
          int cc = c + dc;
          if (cc < 0 || cc >= m.width()) continue;
          if (dr * dr + dc * dc <= radius * radius && m.at(rr, cc)) { v = 1; break; }
        }
      }
      out.at(r, c) = v;
    }
  }
  return out;
}

void write_mask_png(const std::filesystem::path& path, const Mask& m) {
  ImageU8 img(m.height(), m.width(), 1);
  for (size_t i = 0; i < m.size(); ++i)
    img.data()[i] = m.data()[i] ? 255 : 0;
  write_png(path, img);
}

Mask read_mask_png(const std::filesystem::path& path) {
  ImageU8 img = read_png(path);
  Mask m(img.height(), img.width(), 1);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      m.at(r, c) = img.at(r, c, 0) >= 128 ? 1 : 0;
  return m;
}

double mask_iou(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw ArgumentError("mask_iou: shape mismatch");
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    bool va = a.data()[i], vb = b.data()[i];
    inter += va && vb;
    uni += va || vb;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

size_t mask_area(const Mask& m) {
  size_t n = 0;
  for (size_t i = 0; i < m.size(); ++i) n += m.data()[i] != 0;
  return n;
}

double psnr(const ImageF& a, const ImageF& b, const Mask* exclude) {
  if (!a.same_shape(b)) throw ArgumentError("psnr: shape mismatch");
  double sse = 0;
  size_t n = 0;
  for (int r = 0; r < a.height(); ++r) {
    for (int c = 0; c < a.width(); ++c) {
      if (exclude && exclude->at(r, c)) continue;
      for (int ch = 0; ch < a.channels(); ++ch) {
        double d = a.at(r, c, ch) - b.at(r, c, ch);
        sse += d * d;
        ++n;
      }
    }
  }
  if (n == 0) return std::numeric_limits<double>::infinity();
  double mse = sse / n;
  if (mse <= 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace worldact
