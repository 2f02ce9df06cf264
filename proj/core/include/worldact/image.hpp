#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace worldact {

/// Row-major planar image, one value per pixel per channel.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, T fill = T{})
      : height_(height), width_(width), channels_(channels),
        data_(static_cast<size_t>(height) * width * channels, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  T& at(int r, int c, int ch = 0) {
    return data_[(static_cast<size_t>(r) * width_ + c) * channels_ + ch];
  }
  T at(int r, int c, int ch = 0) const {
    return data_[(static_cast<size_t>(r) * width_ + c) * channels_ + ch];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  size_t size() const { return data_.size(); }

  bool same_shape(const Image& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

 private:
  int height_ = 0, width_ = 0, channels_ = 0;
  std::vector<T> data_;
};

using ImageF = Image<double>;   // float image, values nominally in [0,1]
using ImageU8 = Image<uint8_t>;

/// Binary mask: 0 or 1 per pixel.
using Mask = Image<uint8_t>;

ImageU8 quantize_to_u8(const ImageF& img);
ImageF dequantize(const ImageU8& img);

// PNG: 8-bit gray or RGB.
void write_png(const std::filesystem::path& path, const ImageU8& img);
ImageU8 read_png(const std::filesystem::path& path);

// In-memory PNG, for network transport.
std::string encode_png(const ImageU8& img);
ImageU8 decode_png(const std::string& bytes);

// PFM: 32-bit float, single channel (Pf) or RGB (PF), little-endian.
void write_pfm(const std::filesystem::path& path, const ImageF& img);
ImageF read_pfm(const std::filesystem::path& path);

// Mask helpers.
Mask threshold_mask(const ImageF& img, double thresh);
Mask dilate(const Mask& m, int radius);
void write_mask_png(const std::filesystem::path& path, const Mask& m);
Mask read_mask_png(const std::filesystem::path& path);
double mask_iou(const Mask& a, const Mask& b);
size_t mask_area(const Mask& m);

double psnr(const ImageF& a, const ImageF& b, const Mask* exclude = nullptr);

}  // namespace worldact
