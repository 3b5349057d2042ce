/*
 * Copyright 2026 The layerpca Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "layerpca/png.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <png.h>

#include "layerpca/errors.hpp"

namespace layerpca {

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), len);
}

void no_flush(png_structp) {}

}  // namespace

std::string encode_png(const TensorBlock& image) {
  if (image.dims.size() != 3 || image.dims[2] != 3) {
    throw DimensionError("PNG export expects an [H, W, 3] image");
  }
  const std::uint32_t h = image.dims[0];
  const std::uint32_t w = image.dims[1];
  std::vector<png_byte> pixels(image.data.size());
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    const double v = std::clamp(static_cast<double>(image.data[i]), -1.0, 1.0);
    pixels[i] = static_cast<png_byte>(std::lround((v + 1.0) * 127.5));
  }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::string out;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw IoError("PNG encoding failed");
  }
  png_set_write_fn(png, &out, append_bytes, no_flush);
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::vector<png_bytep> rows(h);
  for (std::uint32_t r = 0; r < h; ++r) rows[r] = pixels.data() + std::size_t{r} * w * 3;
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace layerpca
