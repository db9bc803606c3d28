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

#include "segqual/npy.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

namespace segqual::npy {

static_assert(std::endian::native == std::endian::little, "NPY payloads are handled as little-endian");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicSize = 6;

void skip_space(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n' || s[pos] == '\r')) ++pos;
}

// Locates `'key':` in the header dict and returns the offset of its value.
std::size_t find_value(std::string_view dict, std::string_view key) {
  for (const char quote : {'\'', '"'}) {
    std::string needle;
    needle += quote;
    needle += key;
    needle += quote;
    const std::size_t at = dict.find(needle);
    if (at == std::string_view::npos) continue;
    std::size_t pos = at + needle.size();
    skip_space(dict, pos);
    if (pos >= dict.size() || dict[pos] != ':') throw FormatError("npy header: missing ':' after " + std::string(key));
    ++pos;
    skip_space(dict, pos);
    return pos;
  }
  throw FormatError("npy header: missing key '" + std::string(key) + "'");
}

Header parse_header(std::string_view dict) {
  Header header;
  {
    std::size_t pos = find_value(dict, "descr");
    if (pos >= dict.size() || (dict[pos] != '\'' && dict[pos] != '"')) throw FormatError("npy header: bad descr");
    const char quote = dict[pos];
    const std::size_t end = dict.find(quote, pos + 1);
    if (end == std::string_view::npos) throw FormatError("npy header: unterminated descr");
    header.descr = std::string(dict.substr(pos + 1, end - pos - 1));
  }
  {
    const std::size_t pos = find_value(dict, "fortran_order");
    if (dict.substr(pos, 4) == "True") {
      header.fortran_order = true;
    } else if (dict.substr(pos, 5) == "False") {
      header.fortran_order = false;
    } else {
      throw FormatError("npy header: bad fortran_order");
    }
  }
  {
    std::size_t pos = find_value(dict, "shape");
    if (pos >= dict.size() || dict[pos] != '(') throw FormatError("npy header: bad shape");
    ++pos;
    for (;;) {
      skip_space(dict, pos);
      if (pos >= dict.size()) throw FormatError("npy header: unterminated shape");
      if (dict[pos] == ')') break;
      std::size_t value = 0;
      const auto [ptr, ec] = std::from_chars(dict.data() + pos, dict.data() + dict.size(), value);
      if (ec != std::errc{}) throw FormatError("npy header: bad shape entry");
      header.shape.push_back(value);
      pos = static_cast<std::size_t>(ptr - dict.data());
      skip_space(dict, pos);
      if (pos < dict.size() && dict[pos] == ',') ++pos;
    }
  }
  return header;
}

std::size_t item_size(std::string_view descr) {
  if (descr.size() < 3) throw FormatError("npy: unsupported descr '" + std::string(descr) + "'");
  std::size_t size = 0;
  const auto [ptr, ec] = std::from_chars(descr.data() + 2, descr.data() + descr.size(), size);
  if (ec != std::errc{} || size == 0) throw FormatError("npy: unsupported descr '" + std::string(descr) + "'");
  if (descr[0] == '>' && size > 1) throw FormatError("npy: big-endian payloads are not supported");
  return size;
}

}  // namespace

std::size_t Header::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Array parse(std::span<const std::byte> bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, kMagicSize) != 0) {
    throw FormatError("npy: missing magic string");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = static_cast<std::size_t>(bytes[8]) | (static_cast<std::size_t>(bytes[9]) << 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw FormatError("npy: truncated header");
    header_len = 0;
    for (int i = 0; i < 4; ++i) header_len |= static_cast<std::size_t>(bytes[8 + i]) << (8 * i);
    offset = 12;
  } else {
    throw FormatError("npy: unsupported format version " + std::to_string(major));
  }
  if (bytes.size() < offset + header_len) throw FormatError("npy: truncated header");
  const std::string_view dict(reinterpret_cast<const char*>(bytes.data() + offset), header_len);

  Array array;
  array.header = parse_header(dict);
  const std::size_t expected = array.header.element_count() * item_size(array.header.descr);
  const std::size_t data_start = offset + header_len;
  if (bytes.size() - data_start != expected) {
    throw FormatError("npy: payload has " + std::to_string(bytes.size() - data_start) + " bytes, expected " +
                      std::to_string(expected));
  }
  array.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(data_start), bytes.end());
  return array;
}

std::vector<std::byte> serialize(std::string_view descr, std::span<const std::size_t> shape,
                                 std::span<const std::byte> payload) {
  std::ostringstream dict;
  dict << "{'descr': '" << descr << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
    if (i + 1 < shape.size()) dict << " ";
  }
  dict << "), }";
  std::string header = dict.str();
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  if (header.size() > 0xffff) throw FormatError("npy: header too long for version 1.0");

  std::vector<std::byte> out;
  out.reserve(10 + header.size() + payload.size());
  for (std::size_t i = 0; i < kMagicSize; ++i) out.push_back(static_cast<std::byte>(kMagic[i]));
  out.push_back(std::byte{1});
  out.push_back(std::byte{0});
  out.push_back(static_cast<std::byte>(header.size() & 0xff));
  out.push_back(static_cast<std::byte>(header.size() >> 8));
  for (const char ch : header) out.push_back(static_cast<std::byte>(ch));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Array read(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write(const std::filesystem::path& path, std::string_view descr, std::span<const std::size_t> shape,
           std::span<const std::byte> payload) {
  write_file(path, serialize(descr, shape, payload));
}

void write_f32(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const float> values) {
  write(path, "<f4", shape, std::as_bytes(values));
}

void write_u16(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const std::uint16_t> values) {
  write(path, "<u2", shape, std::as_bytes(values));
}

void write_u32(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const std::uint32_t> values) {
  write(path, "<u4", shape, std::as_bytes(values));
}

}  // namespace segqual::npy

namespace segqual {

namespace {

template <typename T>
std::vector<T> payload_as(const npy::Array& array) {
  std::vector<T> out(array.payload.size() / sizeof(T));
  std::memcpy(out.data(), array.payload.data(), out.size() * sizeof(T));
  return out;
}

void require_c_order(const npy::Array& array, const std::filesystem::path& path) {
  if (array.header.fortran_order) throw FormatError(path.string() + ": Fortran-ordered arrays are not supported");
}

// "<f4" and "|f4"-style spellings of the same little-endian type.
bool descr_is(std::string_view descr, std::string_view kind) {
  return descr.size() == 3 && (descr[0] == '<' || descr[0] == '|' || descr[0] == '=') && descr.substr(1) == kind;
}

}  // namespace

ProbabilityMap read_probability_map(const std::filesystem::path& path) {
  const auto array = npy::read(path);
  require_c_order(array, path);
  if (!descr_is(array.header.descr, "f4")) {
    throw FormatError(path.string() + ": probability map dtype must be <f4, got " + array.header.descr);
  }
  if (array.header.shape.size() != 3) throw FormatError(path.string() + ": probability map must be (H, W, N)");
  const auto& s = array.header.shape;
  ProbabilityMap probs(s[0], s[1], s[2], payload_as<float>(array));
  try {
    probs.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return probs;
}

void write_probability_map(const std::filesystem::path& path, const ProbabilityMap& probs) {
  const std::size_t shape[] = {probs.height(), probs.width(), probs.num_classes()};
  npy::write_f32(path, shape, probs.values());
}

namespace png_io {
SegmentationMask read_png_mask(std::span<const std::byte> bytes, const std::string& name);
std::vector<std::byte> encode_png_mask(const SegmentationMask& mask);
}  // namespace png_io

SegmentationMask read_mask(const std::filesystem::path& path, std::size_t num_classes) {
  const auto bytes = read_file(path);
  SegmentationMask mask;
  static constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
    mask = png_io::read_png_mask(bytes, path.string());
  } else {
    npy::Array array;
    try {
      array = npy::parse(bytes);
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": not a PNG or NPY mask (" + e.what() + ")");
    }
    require_c_order(array, path);
    if (array.header.shape.size() != 2) throw FormatError(path.string() + ": mask must be (H, W)");
    const std::size_t h = array.header.shape[0];
    const std::size_t w = array.header.shape[1];
    if (descr_is(array.header.descr, "u2")) {
      mask = SegmentationMask(h, w, payload_as<std::uint16_t>(array));
    } else if (descr_is(array.header.descr, "u1")) {
      const auto raw = payload_as<std::uint8_t>(array);
      mask = SegmentationMask(h, w, std::vector<ClassId>(raw.begin(), raw.end()));
    } else {
      throw FormatError(path.string() + ": mask dtype must be <u2 or |u1, got " + array.header.descr);
    }
  }
  try {
    mask.validate(num_classes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return mask;
}

void write_mask_npy(const std::filesystem::path& path, const SegmentationMask& mask) {
  const std::size_t shape[] = {mask.height(), mask.width()};
  npy::write_u16(path, shape, mask.values());
}

void write_mask_png(const std::filesystem::path& path, const SegmentationMask& mask) {
  write_file(path, png_io::encode_png_mask(mask));
}

FeatureTensor read_feature_tensor(const std::filesystem::path& path) {
  const auto array = npy::read(path);
  require_c_order(array, path);
  if (!descr_is(array.header.descr, "f4")) {
    throw FormatError(path.string() + ": feature tensor dtype must be <f4, got " + array.header.descr);
  }
  if (array.header.shape.size() != 3) throw FormatError(path.string() + ": feature tensor must be (H, W, C)");
  const auto& s = array.header.shape;
  return FeatureTensor(s[0], s[1], s[2], payload_as<float>(array));
}

void write_feature_tensor(const std::filesystem::path& path, const FeatureTensor& features) {
  const std::size_t shape[] = {features.height(), features.width(), features.channels()};
  npy::write_f32(path, shape, features.values());
}

void write_heatmap(const std::filesystem::path& path, const Grid<double>& heatmap) {
  std::vector<float> values(heatmap.values().begin(), heatmap.values().end());
  const std::size_t shape[] = {heatmap.height(), heatmap.width()};
  npy::write_f32(path, shape, values);
}

void write_id_map(const std::filesystem::path& path, const Grid<SegmentId>& ids) {
  const std::size_t shape[] = {ids.height(), ids.width()};
  npy::write_u32(path, shape, ids.values());
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path.string());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::as_bytes(std::span<const char>(text.data(), text.size())));
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

}  // namespace segqual
