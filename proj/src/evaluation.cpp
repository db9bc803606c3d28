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

#include "segqual/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "segqual/errors.hpp"
#include "segqual/random.hpp"

namespace segqual {

namespace {

using nlohmann::ordered_json;

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
  }
}

std::vector<std::size_t> order_descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

MeanStd mean_std(std::span<const double> v) {
  MeanStd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double sq = 0.0;
  for (const double x : v) sq += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(v.size()));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_aligned(scores.size(), labels.size(), "auroc");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::size_t group_pos = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) group_pos += labels[idx[j++]] ? 1 : 0;
    // Mid-rank of the tie group, ranks starting at 1.
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += mid * static_cast<double>(group_pos);
    pos += group_pos;
    i = j;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw EvaluationError("AUROC needs both positive and negative labels");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

PrCurve precision_recall(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_aligned(scores.size(), labels.size(), "precision_recall");
  const std::size_t total_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (total_pos == 0) throw EvaluationError("precision-recall needs at least one positive");
  const auto idx = order_descending(scores);
  PrCurve curve;
  std::size_t tp = 0;
  std::size_t fp = 0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    const double t = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == t) (labels[idx[i++]] ? tp : fp) += 1;
    PrPoint pt;
    pt.threshold = t;
    pt.recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    pt.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.average_precision += (pt.recall - prev_recall) * pt.precision;
    prev_recall = pt.recall;
    curve.points.push_back(pt);
  }
  return curve;
}

ClassifierMetrics classifier_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                     std::size_t resamples, std::uint64_t seed) {
  ClassifierMetrics m;
  m.auroc.value = auroc(scores, labels);
  m.average_precision.value = precision_recall(scores, labels).average_precision;
  m.positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  m.negatives = labels.size() - m.positives;

  const std::size_t n = scores.size();
  std::vector<double> aurocs;
  std::vector<double> aps;
  std::vector<double> s(n);
  std::vector<std::uint8_t> l(n);
  for (std::size_t r = 0; r < resamples; ++r) {
    Rng rng(derive_seed(seed, r));
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = rng.below(n);
      s[i] = scores[k];
      l[i] = labels[k];
      pos += l[i];
    }
    if (pos == 0 || pos == n) continue;
    aurocs.push_back(auroc(s, l));
    aps.push_back(precision_recall(s, l).average_precision);
  }
  m.auroc.std = mean_std(aurocs).std;
  m.average_precision.std = mean_std(aps).std;
  return m;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  check_aligned(x.size(), y.size(), "pearson");
  double mx = 0.0;
  double my = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    mx += dx / k;
    my += dy / k;
    sxx += dx * (x[i] - mx);
    syy += dy * (y[i] - my);
    sxy += dx * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

BinnedQuality binned_quality(std::span<const double> scores, std::span<const SegmentQuality> qualities,
                             std::size_t bins) {
  check_aligned(scores.size(), qualities.size(), "binned_quality");
  if (bins == 0) throw ConfigError("bin count must be positive");
  std::vector<QualityBin> acc(bins);
  for (std::size_t b = 0; b < bins; ++b) acc[b].center = (static_cast<double>(b) + 0.5) / static_cast<double>(bins);
  std::vector<double> p(scores.size());
  std::vector<double> iou(scores.size());
  std::vector<double> adj(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = std::clamp(scores[i], 0.0, 1.0);
    const auto b = std::min(static_cast<std::size_t>(s * static_cast<double>(bins)), bins - 1);
    auto& bin = acc[b];
    bin.mean_p += qualities[i].precision_p;
    bin.mean_iou += qualities[i].iou;
    bin.mean_iou_adj += qualities[i].iou_adj;
    ++bin.count;
    p[i] = qualities[i].precision_p;
    iou[i] = qualities[i].iou;
    adj[i] = qualities[i].iou_adj;
  }
  BinnedQuality out;
  for (auto& bin : acc) {
    if (bin.count == 0) continue;
    const double c = static_cast<double>(bin.count);
    bin.mean_p /= c;
    bin.mean_iou /= c;
    bin.mean_iou_adj /= c;
    out.bins.push_back(bin);
  }
  out.rho_p = pearson(scores, p);
  out.rho_iou = pearson(scores, iou);
  out.rho_iou_adj = pearson(scores, adj);
  return out;
}

DeltaMiouReport delta_miou_report(std::span<const ImageQuality> before, std::span<const ImageQuality> after,
                                  std::span<const std::map<std::string, std::string>> categories) {
  check_aligned(before.size(), after.size(), "delta_miou_report");
  if (!categories.empty()) check_aligned(before.size(), categories.size(), "delta_miou_report categories");
  DeltaMiouReport r;
  r.histogram.assign(kDeltaHistogramBins, 0);
  const std::size_t n = before.size();
  std::vector<double> mb(n), ma(n), wb(n), wa(n), cb(n), ca(n);
  std::map<std::string, std::vector<double>> groups;
  std::size_t negative = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = after[i].miou - before[i].miou;
    r.deltas.push_back(d);
    mb[i] = before[i].miou;
    ma[i] = after[i].miou;
    wb[i] = static_cast<double>(before[i].num_wrong_classes);
    wa[i] = static_cast<double>(after[i].num_wrong_classes);
    cb[i] = static_cast<double>(before[i].num_correct_classes);
    ca[i] = static_cast<double>(after[i].num_correct_classes);
    if (d < 0.0) ++negative;
    const double pos = (std::clamp(d, -1.0, 1.0) + 1.0) / 2.0 * static_cast<double>(kDeltaHistogramBins);
    ++r.histogram[std::min(static_cast<std::size_t>(pos), kDeltaHistogramBins - 1)];
    if (!categories.empty()) {
      for (const auto& [key, value] : categories[i]) groups[key + "=" + value].push_back(d);
    }
  }
  if (n == 0) return r;
  r.mean_before = mean_std(mb).mean;
  r.mean_after = mean_std(ma).mean;
  r.mean = r.mean_after - r.mean_before;
  r.std = mean_std(r.deltas).std;
  r.fraction_negative = static_cast<double>(negative) / static_cast<double>(n);
  r.wrong_classes_before = mean_std(wb);
  r.wrong_classes_after = mean_std(wa);
  r.correct_classes_before = mean_std(cb);
  r.correct_classes_after = mean_std(ca);
  for (const auto& [key, values] : groups) {
    const auto ms = mean_std(values);
    r.categories[key] = {ms.mean, ms.std, values.size()};
  }
  return r;
}

std::string eval_report_to_json(const EvalReport& report) {
  ordered_json j;
  j["images"] = report.images;
  j["segments"] = report.segments;
  if (report.classifier) {
    const auto& c = *report.classifier;
    j["classifier"] = {{"auroc", c.auroc.value},
                       {"auroc_std", c.auroc.std},
                       {"average_precision", c.average_precision.value},
                       {"average_precision_std", c.average_precision.std},
                       {"positives", c.positives},
                       {"negatives", c.negatives}};
  } else {
    j["classifier"] = nullptr;
  }
  ordered_json pr = ordered_json::array();
  for (const auto& p : report.pr_curve.points) pr.push_back({p.threshold, p.recall, p.precision});
  j["pr_curve"] = {{"columns", {"threshold", "recall", "precision"}}, {"points", std::move(pr)}};

  ordered_json bins = ordered_json::array();
  for (const auto& b : report.score_quality.bins) {
    bins.push_back({{"center", b.center},
                    {"mean_p", b.mean_p},
                    {"mean_iou", b.mean_iou},
                    {"mean_iou_adj", b.mean_iou_adj},
                    {"count", b.count}});
  }
  j["score_quality"] = {{"bins", std::move(bins)},
                        {"rho_p", optional_number(report.score_quality.rho_p)},
                        {"rho_iou", optional_number(report.score_quality.rho_iou)},
                        {"rho_iou_adj", optional_number(report.score_quality.rho_iou_adj)}};

  const auto& d = report.delta_miou;
  auto ms = [](const MeanStd& m) { return ordered_json{{"mean", m.mean}, {"std", m.std}}; };
  ordered_json cats = ordered_json::object();
  for (const auto& [key, c] : d.categories) {
    cats[key] = {{"mean_delta", c.mean_delta}, {"std_delta", c.std_delta}, {"count", c.count}};
  }
  j["delta_miou"] = {{"mean", d.mean},
                     {"std", d.std},
                     {"fraction_negative", d.fraction_negative},
                     {"mean_before", d.mean_before},
                     {"mean_after", d.mean_after},
                     {"histogram", d.histogram},
                     {"deltas", d.deltas}};
  j["class_counts"] = {{"wrong_before", ms(d.wrong_classes_before)},
                       {"wrong_after", ms(d.wrong_classes_after)},
                       {"correct_before", ms(d.correct_classes_before)},
                       {"correct_after", ms(d.correct_classes_after)}};
  j["category_tables"] = std::move(cats);
  return j.dump(1) + "\n";
}

std::string pr_curve_csv(const PrCurve& curve) {
  std::string out = "threshold,recall,precision\n";
  for (const auto& p : curve.points) out += fmt(p.threshold) + "," + fmt(p.recall) + "," + fmt(p.precision) + "\n";
  return out;
}

std::string quality_bins_csv(const BinnedQuality& bins) {
  std::string out = "center,mean_p,mean_iou,mean_iou_adj,count\n";
  for (const auto& b : bins.bins) {
    out += fmt(b.center) + "," + fmt(b.mean_p) + "," + fmt(b.mean_iou) + "," + fmt(b.mean_iou_adj) + "," +
           std::to_string(b.count) + "\n";
  }
  return out;
}

std::string delta_histogram_csv(const DeltaMiouReport& report) {
  std::string out = "bin_low,bin_high,count\n";
  const double width = 2.0 / static_cast<double>(kDeltaHistogramBins);
  for (std::size_t b = 0; b < report.histogram.size(); ++b) {
    const double lo = -1.0 + width * static_cast<double>(b);
    out += fmt(lo) + "," + fmt(lo + width) + "," + std::to_string(report.histogram[b]) + "\n";
  }
  return out;
}

}  // namespace segqual
