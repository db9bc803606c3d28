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

#include "segqual/records.hpp"

#include <charconv>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "segqual/npy.hpp"

namespace segqual {

namespace {

constexpr const char* kIdentityColumns[] = {"image_id", "segment_id", "predicted_class", "pixel_count",
                                            "image_pixels"};
constexpr const char* kQualityColumns[] = {"precision_p", "iou", "iou_adj", "target_low_quality"};
constexpr const char* kScoreColumn = "uncertainty_score";

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError("table line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view s, std::size_t line) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError("table line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  if (in_quotes) throw FormatError("table line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(current));
  return fields;
}

bool is_reserved(const std::string& name) {
  for (const char* c : kIdentityColumns) if (name == c) return true;
  for (const char* c : kQualityColumns) if (name == c) return true;
  return name == kScoreColumn;
}

}  // namespace

bool FeatureTable::has_quality() const {
  for (const auto& r : records) {
    if (r.precision_p) return true;
  }
  return false;
}

bool FeatureTable::has_scores() const {
  for (const auto& r : records) {
    if (r.uncertainty_score) return true;
  }
  return false;
}

std::optional<std::size_t> FeatureTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < feature_columns.size(); ++i) {
    if (feature_columns[i] == name) return i;
  }
  return std::nullopt;
}

std::string table_to_csv(const FeatureTable& table) {
  const bool quality = table.has_quality();
  const bool scores = table.has_scores();
  std::ostringstream out;
  bool first = true;
  auto cell = [&](const std::string& s) {
    if (!first) out << ',';
    out << s;
    first = false;
  };
  for (const char* c : kIdentityColumns) cell(c);
  for (const auto& c : table.feature_columns) cell(quote_field(c));
  if (quality) {
    for (const char* c : kQualityColumns) cell(c);
  }
  if (scores) cell(kScoreColumn);
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : table.records) {
    if (r.features.size() != table.feature_columns.size()) {
      throw ValidationError("record " + r.image_id + "/" + std::to_string(r.segment_id) + " has " +
                            std::to_string(r.features.size()) + " features, table has " +
                            std::to_string(table.feature_columns.size()) + " columns");
    }
    first = true;
    cell(quote_field(r.image_id));
    cell(std::to_string(r.segment_id));
    cell(std::to_string(r.predicted_class));
    cell(std::to_string(r.pixel_count));
    cell(std::to_string(r.image_pixels));
    for (const double v : r.features) cell(format_double(v));
    if (quality) {
      cell(opt(r.precision_p));
      cell(opt(r.iou));
      cell(opt(r.iou_adj));
      cell(r.target_low_quality ? (*r.target_low_quality ? "1" : "0") : "");
    }
    if (scores) cell(opt(r.uncertainty_score));
    out << '\n';
  }
  return out.str();
}

FeatureTable table_from_csv(const std::string& text) {
  FeatureTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return table;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line, line_no);
  if (header.size() < 5) throw FormatError("table header is missing identity columns");
  for (std::size_t i = 0; i < 5; ++i) {
    if (header[i] != kIdentityColumns[i]) {
      throw FormatError("table header column " + std::to_string(i) + " must be '" + kIdentityColumns[i] +
                        "', got '" + header[i] + "'");
    }
  }
  // Column roles.
  std::vector<int> role(header.size(), -1);  // -1 feature, 0..3 quality, 4 score
  for (std::size_t i = 5; i < header.size(); ++i) {
    int r = -1;
    for (int q = 0; q < 4; ++q) {
      if (header[i] == kQualityColumns[q]) r = q;
    }
    if (header[i] == kScoreColumn) r = 4;
    if (r == -1) {
      if (is_reserved(header[i])) throw FormatError("table header repeats column '" + header[i] + "'");
      table.feature_columns.push_back(header[i]);
    }
    role[i] = r;
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw FormatError("table line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
    }
    SegmentRecord r;
    r.image_id = fields[0];
    r.segment_id = parse_int<SegmentId>(fields[1], line_no);
    r.predicted_class = parse_int<ClassId>(fields[2], line_no);
    r.pixel_count = parse_int<std::size_t>(fields[3], line_no);
    r.image_pixels = parse_int<std::size_t>(fields[4], line_no);
    for (std::size_t i = 5; i < fields.size(); ++i) {
      const auto& f = fields[i];
      switch (role[i]) {
        case -1:
          r.features.push_back(parse_double(f, line_no));
          break;
        case 0:
          if (!f.empty()) r.precision_p = parse_double(f, line_no);
          break;
        case 1:
          if (!f.empty()) r.iou = parse_double(f, line_no);
          break;
        case 2:
          if (!f.empty()) r.iou_adj = parse_double(f, line_no);
          break;
        case 3:
          if (!f.empty()) r.target_low_quality = parse_int<int>(f, line_no) != 0;
          break;
        case 4:
          if (!f.empty()) r.uncertainty_score = parse_double(f, line_no);
          break;
      }
    }
    table.records.push_back(std::move(r));
  }
  return table;
}

std::string table_to_jsonl(const FeatureTable& table) {
  using nlohmann::ordered_json;
  std::string out;
  for (const auto& r : table.records) {
    if (r.features.size() != table.feature_columns.size()) {
      throw ValidationError("record feature count does not match table columns");
    }
    ordered_json j;
    j["image_id"] = r.image_id;
    j["segment_id"] = r.segment_id;
    j["predicted_class"] = r.predicted_class;
    j["pixel_count"] = r.pixel_count;
    j["image_pixels"] = r.image_pixels;
    ordered_json feats = ordered_json::object();
    for (std::size_t i = 0; i < r.features.size(); ++i) feats[table.feature_columns[i]] = r.features[i];
    j["features"] = feats;
    if (r.precision_p) j["precision_p"] = *r.precision_p;
    if (r.iou) j["iou"] = *r.iou;
    if (r.iou_adj) j["iou_adj"] = *r.iou_adj;
    if (r.target_low_quality) j["target_low_quality"] = *r.target_low_quality;
    if (r.uncertainty_score) j["uncertainty_score"] = *r.uncertainty_score;
    out += j.dump();
    out += '\n';
  }
  return out;
}

FeatureTable table_from_jsonl(const std::string& text) {
  using nlohmann::ordered_json;
  FeatureTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      SegmentRecord r;
      r.image_id = j.at("image_id").get<std::string>();
      r.segment_id = j.at("segment_id").get<SegmentId>();
      r.predicted_class = j.at("predicted_class").get<ClassId>();
      r.pixel_count = j.at("pixel_count").get<std::size_t>();
      r.image_pixels = j.at("image_pixels").get<std::size_t>();
      const auto& feats = j.at("features");
      if (!have_columns) {
        for (const auto& [k, v] : feats.items()) table.feature_columns.push_back(k);
        have_columns = true;
      }
      if (feats.size() != table.feature_columns.size()) {
        throw FormatError("table line " + std::to_string(line_no) + ": feature count differs from first line");
      }
      std::size_t i = 0;
      for (const auto& [k, v] : feats.items()) {
        if (k != table.feature_columns[i++]) {
          throw FormatError("table line " + std::to_string(line_no) + ": feature order differs from first line");
        }
        r.features.push_back(v.get<double>());
      }
      if (j.contains("precision_p")) r.precision_p = j["precision_p"].get<double>();
      if (j.contains("iou")) r.iou = j["iou"].get<double>();
      if (j.contains("iou_adj")) r.iou_adj = j["iou_adj"].get<double>();
      if (j.contains("target_low_quality")) r.target_low_quality = j["target_low_quality"].get<bool>();
      if (j.contains("uncertainty_score")) r.uncertainty_score = j["uncertainty_score"].get<double>();
      table.records.push_back(std::move(r));
    } catch (const ordered_json::exception& e) {
      throw FormatError("table line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

void write_table(const std::filesystem::path& path, const FeatureTable& table) {
  write_text(path, path.extension() == ".jsonl" ? table_to_jsonl(table) : table_to_csv(table));
}

FeatureTable read_table(const std::filesystem::path& path) {
  const auto text = read_text(path);
  return path.extension() == ".jsonl" ? table_from_jsonl(text) : table_from_csv(text);
}

}  // namespace segqual
