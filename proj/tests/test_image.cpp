#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "worldact/errors.hpp"
#include "worldact/image.hpp"

using namespace worldact;

namespace {

ImageU8 gradient_image(int h, int w, int channels) {
  ImageU8 img(h, w, channels);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < channels; ++ch)
        img.at(r, c, ch) = static_cast<uint8_t>((r * 7 + c * 13 + ch * 91) % 256);
  return img;
}

}  // namespace

TEST_SUITE_BEGIN("image");

TEST_CASE("quantize and dequantize round trip on u8 values") {
  ImageU8 img = gradient_image(9, 13, 3);
  ImageU8 back = quantize_to_u8(dequantize(img));
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == img.data()[i]);
}

TEST_CASE("png file round trip, gray and rgb") {
  testutil::TempDir dir("png");
  for (int ch : {1, 3}) {
    ImageU8 img = gradient_image(17, 23, ch);
    write_png(dir.path / "a.png", img);
    ImageU8 back = read_png(dir.path / "a.png");
    REQUIRE(back.same_shape(img));
    for (size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == img.data()[i]);
  }
}

TEST_CASE("in-memory png matches file png") {
  ImageU8 img = gradient_image(12, 8, 3);
  ImageU8 back = decode_png(encode_png(img));
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == img.data()[i]);
}

TEST_CASE("decode_png rejects garbage") {
  CHECK_THROWS_AS(decode_png("definitely not a png"), FormatError);
}

TEST_CASE("pfm round trip preserves float32 values") {
  testutil::TempDir dir("pfm");
  ImageF img(6, 7, 1);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 7; ++c) img.at(r, c) = 0.25 * r - 1.5 * c + 0.125;
  write_pfm(dir.path / "d.pfm", img);
  ImageF back = read_pfm(dir.path / "d.pfm");
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.size(); ++i)
    CHECK(back.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-7));
}

TEST_CASE("threshold, dilation and mask metrics") {
  ImageF img(5, 5, 1);
  img.at(2, 2) = 0.9;
  Mask m = threshold_mask(img, 0.5);
  CHECK(mask_area(m) == 1);
  CHECK(m.at(2, 2) == 1);

  Mask d = dilate(m, 1);  // euclidean disk: radius 1 is the 4-neighborhood
  CHECK(mask_area(d) == 5);
  CHECK(d.at(1, 2) == 1);
  CHECK(d.at(1, 1) == 0);
  CHECK(d.at(0, 0) == 0);

  CHECK(mask_iou(m, d) == doctest::Approx(1.0 / 5.0));
  CHECK(mask_iou(m, m) == doctest::Approx(1.0));

  Mask empty(5, 5, 1);
  CHECK(mask_iou(empty, empty) == doctest::Approx(1.0));  // empty vs empty: no disagreement
}

TEST_CASE("mask png round trip stays binary") {
  testutil::TempDir dir("mask");
  Mask m(4, 4, 1);
  m.at(0, 0) = 1;
  m.at(3, 2) = 1;
  write_mask_png(dir.path / "m.png", m);
  Mask back = read_mask_png(dir.path / "m.png");
  REQUIRE(back.same_shape(m));
  for (size_t i = 0; i < m.size(); ++i) CHECK(back.data()[i] == m.data()[i]);
}

TEST_CASE("psnr is infinite on identical images and respects the exclusion mask") {
  ImageF a(8, 8, 3), b(8, 8, 3);
  for (size_t i = 0; i < a.size(); ++i) a.data()[i] = b.data()[i] = 0.5;
  CHECK(std::isinf(psnr(a, b)));

  b.at(4, 4, 0) = 1.0;  // single corrupted pixel
  double with = psnr(a, b);
  CHECK(with < 60);
  Mask exclude(8, 8, 1);
  exclude.at(4, 4) = 1;
  CHECK(std::isinf(psnr(a, b, &exclude)));
}

TEST_SUITE_END();
