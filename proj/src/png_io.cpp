// Copyright 2026 The segqual Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "segqual/types.hpp"

namespace segqual::png_io {

namespace {

struct ReadCursor {
  std::span<const std::byte> bytes;
  std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::byte>*>(png_get_io_ptr(png));
  const auto* begin = reinterpret_cast<const std::byte*>(data);
  out->insert(out->end(), begin, begin + length);
}

void flush_callback(png_structp) {}

// libpng reports through longjmp; keep the message for the exception.
void error_callback(png_structp png, png_const_charp message) {
  auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
  if (slot != nullptr) *slot = message;
  png_longjmp(png, 1);
}

void warning_callback(png_structp, png_const_charp) {}

}  // namespace

SegmentationMask read_png_mask(std::span<const std::byte> bytes, const std::string& name) {
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, error_callback, warning_callback);
  if (png == nullptr) throw FormatError(name + ": cannot initialise PNG reader");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError(name + ": cannot initialise PNG reader");
  }

  ReadCursor cursor{bytes, 0};
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(name + ": " + (error.empty() ? std::string("invalid PNG") : error));
  }
  png_set_read_fn(png, &cursor, read_callback);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  const bool gray = color_type == PNG_COLOR_TYPE_GRAY;
  const bool supported_depth = bit_depth == 8 || bit_depth == 16;
  if (gray && supported_depth) {
    if (bit_depth == 16) png_set_swap(png);
    png_read_update_info(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer.data() + r * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (!gray) throw FormatError(name + ": mask PNG must be grayscale");
  if (!supported_depth) throw FormatError(name + ": mask PNG must be 8 or 16 bit, got " + std::to_string(bit_depth));

  std::vector<ClassId> labels(static_cast<std::size_t>(width) * height);
  if (bit_depth == 8) {
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = buffer[i];
  } else {
    std::memcpy(labels.data(), buffer.data(), labels.size() * sizeof(ClassId));
  }
  return SegmentationMask(height, width, std::move(labels));
}

std::vector<std::byte> encode_png_mask(const SegmentationMask& mask) {
  bool fits_8bit = true;
  for (const ClassId v : mask.values()) {
    if (v > 0xff) {
      fits_8bit = false;
      break;
    }
  }
  const volatile int bit_depth = fits_8bit ? 8 : 16;
  const std::size_t row_bytes = mask.width() * (fits_8bit ? 1 : 2);
  std::vector<png_byte> buffer(row_bytes * mask.height());
  if (fits_8bit) {
    for (std::size_t i = 0; i < mask.size(); ++i) buffer[i] = static_cast<png_byte>(mask[i]);
  } else {
    for (std::size_t i = 0; i < mask.size(); ++i) {
      buffer[2 * i] = static_cast<png_byte>(mask[i] >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(mask[i] & 0xff);
    }
  }
  std::vector<png_bytep> rows(mask.height());
  for (std::size_t r = 0; r < mask.height(); ++r) rows[r] = buffer.data() + r * row_bytes;

  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, error_callback, warning_callback);
  if (png == nullptr) throw FormatError("cannot initialise PNG writer");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("cannot initialise PNG writer");
  }
  std::vector<std::byte> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("PNG encoding failed: " + error);
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(mask.width()), static_cast<png_uint_32>(mask.height()),
               bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace segqual::png_io
