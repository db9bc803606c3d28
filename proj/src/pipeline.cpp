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

#include "segqual/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "segqual/errors.hpp"
#include "segqual/npy.hpp"
#include "segqual/parallel.hpp"
#include "segqual/plot.hpp"

namespace segqual {

namespace {

SegmentationMask load_prediction(const DatasetManifest& manifest, const ManifestEntry& entry,
                                 const ProbabilityMap& probs) {
  if (!entry.pred_mask_path) return argmax_mask(probs);
  auto pred = read_mask(*entry.pred_mask_path, manifest.num_classes);
  if (!pred.same_shape(probs.height(), probs.width())) {
    throw ValidationError("image '" + entry.image_id + "': prediction mask shape differs from the probability map");
  }
  return pred;
}

SegmentationMask load_ground_truth(const DatasetManifest& manifest, const ManifestEntry& entry, std::size_t height,
                                   std::size_t width) {
  auto gt = read_mask(*entry.gt_mask_path, manifest.num_classes);
  if (!gt.same_shape(height, width)) {
    throw ValidationError("image '" + entry.image_id + "': ground-truth shape differs from the prediction");
  }
  return gt;
}

Grid<double> segment_score_map(const SegmentDecomposition& decomp, const std::map<SegmentId, double>& scores) {
  Grid<double> map(decomp.height(), decomp.width(), 0.0);
  for (const auto& seg : decomp.segments) {
    const double s = scores.at(seg.id);
    for (const PixelIndex p : seg.pixels) map[p] = s;
  }
  return map;
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string cell;
    try {
      while (std::getline(fields, cell, ',')) row.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": non-numeric value '" + cell + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

FeatureSetSpec feature_set_for(const DatasetManifest& manifest, FeatureSetKind kind) {
  return make_feature_set(kind, manifest.num_classes, manifest.all_have_features());
}

ImageAnalysis analyze_image(const DatasetManifest& manifest, const ManifestEntry& entry, const FeatureSetSpec& spec,
                            double tau_p) {
  const auto probs = read_probability_map(entry.prob_path);
  if (probs.num_classes() != manifest.num_classes) {
    throw ValidationError("image '" + entry.image_id + "': probability map has " +
                          std::to_string(probs.num_classes()) + " classes, manifest declares " +
                          std::to_string(manifest.num_classes));
  }
  ImageAnalysis out;
  out.image_id = entry.image_id;
  out.prediction = load_prediction(manifest, entry, probs);

  const bool with_gradient = spec.columns.size() > 3 && spec.columns[3] == "mean_gradient_norm";
  std::optional<FeatureTensor> feats;
  if (with_gradient) {
    if (!entry.features_path) {
      throw ValidationError("image '" + entry.image_id + "': feature set needs a feature tensor");
    }
    feats = read_feature_tensor(*entry.features_path);
  }
  const auto heatmaps = compute_heatmaps(probs, feats ? &*feats : nullptr);
  out.decomposition = decompose(out.prediction, manifest.background_class);

  std::vector<SegmentQuality> qualities;
  if (entry.gt_mask_path) {
    out.ground_truth = load_ground_truth(manifest, entry, probs.height(), probs.width());
    const auto gt_decomp = decompose(*out.ground_truth, manifest.background_class);
    qualities = segment_qualities(out.decomposition, out.prediction, gt_decomp);
  }

  const std::size_t image_pixels = probs.pixel_count();
  out.records.reserve(out.decomposition.segments.size());
  for (std::size_t i = 0; i < out.decomposition.segments.size(); ++i) {
    auto rec = aggregate_segment_features(heatmaps, out.decomposition.segments[i], image_pixels, spec,
                                          manifest.num_classes);
    rec.image_id = entry.image_id;
    if (!qualities.empty()) {
      rec.precision_p = qualities[i].precision_p;
      rec.iou = qualities[i].iou;
      rec.iou_adj = qualities[i].iou_adj;
      rec.target_low_quality = is_low_quality(qualities[i].precision_p, tau_p);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

FeatureTable extract_features(const DatasetManifest& manifest, FeatureSetKind kind, std::size_t threads,
                              double tau_p) {
  const auto spec = feature_set_for(manifest, kind);
  std::vector<std::vector<SegmentRecord>> per_image(manifest.entries.size());
  parallel_for(manifest.entries.size(), threads, [&](std::size_t i) {
    per_image[i] = analyze_image(manifest, manifest.entries[i], spec, tau_p).records;
  });
  FeatureTable table;
  table.feature_columns = spec.columns;
  for (auto& recs : per_image) {
    for (auto& r : recs) table.records.push_back(std::move(r));
  }
  return table;
}

CorrectionRun score_and_correct(const DatasetManifest& manifest, const MetaModel& model, double tau,
                                const std::filesystem::path& out_dir, std::size_t threads) {
  const auto expected = feature_set_for(manifest, model.feature_set.kind);
  if (expected.columns != model.feature_set.columns) {
    throw ValidationError("model was trained on a different '" + std::string(model.feature_set.name()) +
                          "' layout (" + std::to_string(model.feature_set.columns.size()) +
                          " columns) than this manifest yields (" + std::to_string(expected.columns.size()) + ")");
  }
  std::filesystem::create_directories(out_dir);
  const std::size_t n = manifest.entries.size();
  std::vector<std::vector<SegmentRecord>> per_image(n);
  CorrectionRun run;
  run.outcomes.resize(n);
  run.corrected_manifest = manifest;

  parallel_for(n, threads, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    auto analysis = analyze_image(manifest, entry, model.feature_set);
    std::map<SegmentId, double> scores;
    for (auto& rec : analysis.records) {
      rec.uncertainty_score = model.score(rec.features);
      scores[rec.segment_id] = *rec.uncertainty_score;
    }
    auto outcome = correct_mask(analysis.prediction, analysis.decomposition, scores, tau, manifest.background_class);
    const auto stem = out_dir / entry.image_id;
    write_heatmap(stem.string() + "_uncertainty.npy", segment_score_map(analysis.decomposition, scores));
    write_mask_npy(stem.string() + "_corrected.npy", outcome.corrected_mask);
    write_mask_png(stem.string() + "_corrected.png", outcome.corrected_mask);
    write_text(stem.string() + "_actions.json", actions_to_json(entry.image_id, tau, outcome.actions));
    run.corrected_manifest.entries[i].pred_mask_path = stem.string() + "_corrected.npy";
    run.outcomes[i] = std::move(outcome);
    per_image[i] = std::move(analysis.records);
  });

  run.scored.feature_columns = model.feature_set.columns;
  for (auto& recs : per_image) {
    for (auto& r : recs) run.scored.records.push_back(std::move(r));
  }
  write_table(out_dir / "scored_table.csv", run.scored);
  save_manifest(run.corrected_manifest, out_dir / "corrected_manifest.json");
  return run;
}

std::map<SegmentId, double> scores_for_image(const FeatureTable& table, const std::string& image_id) {
  std::map<SegmentId, double> scores;
  for (const auto& r : table.records) {
    if (r.image_id != image_id) continue;
    if (!r.uncertainty_score) {
      throw ValidationError("record " + image_id + "/" + std::to_string(r.segment_id) + " has no uncertainty score");
    }
    scores[r.segment_id] = *r.uncertainty_score;
  }
  return scores;
}

EvalReport evaluate(const EvaluationInputs& inputs, const std::filesystem::path& out_dir, std::size_t threads) {
  const auto& manifest = inputs.manifest;
  if (!manifest.all_have_ground_truth()) throw ValidationError("evaluation needs ground truth for every image");
  const std::size_t n = manifest.entries.size();

  std::map<std::string, std::map<SegmentId, double>> by_image;
  for (const auto& r : inputs.scored.records) {
    if (!r.uncertainty_score) {
      throw ValidationError("record " + r.image_id + "/" + std::to_string(r.segment_id) + " has no uncertainty score");
    }
    by_image[r.image_id][r.segment_id] = *r.uncertainty_score;
  }

  std::vector<ImageQuality> before(n), after(n);
  std::vector<std::vector<double>> seg_scores(n);
  std::vector<std::vector<SegmentQuality>> seg_quality(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    const auto probs = read_probability_map(entry.prob_path);
    const auto pred = load_prediction(manifest, entry, probs);
    const auto gt = load_ground_truth(manifest, entry, pred.height(), pred.width());
    const auto corrected = read_mask(inputs.corrected_dir / (entry.image_id + "_corrected.npy"), manifest.num_classes);
    if (!corrected.same_shape(pred.height(), pred.width())) {
      throw ValidationError("image '" + entry.image_id + "': corrected mask shape differs from the prediction");
    }
    before[i] = image_miou(pred, gt, manifest.background_class);
    after[i] = image_miou(corrected, gt, manifest.background_class);

    const auto decomp = decompose(pred, manifest.background_class);
    const auto qualities = segment_qualities(decomp, pred, decompose(gt, manifest.background_class));
    const auto it = by_image.find(entry.image_id);
    for (std::size_t s = 0; s < decomp.segments.size(); ++s) {
      const SegmentId id = decomp.segments[s].id;
      if (it == by_image.end() || !it->second.count(id)) {
        throw ValidationError("scored table lacks segment " + entry.image_id + "/" + std::to_string(id));
      }
      seg_scores[i].push_back(it->second.at(id));
      seg_quality[i].push_back(qualities[s]);
    }
  });

  std::vector<double> scores;
  std::vector<SegmentQuality> qualities;
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < seg_scores[i].size(); ++s) {
      scores.push_back(seg_scores[i][s]);
      qualities.push_back(seg_quality[i][s]);
      labels.push_back(is_low_quality(seg_quality[i][s].precision_p) ? 1 : 0);
    }
  }

  EvalReport report;
  report.images = n;
  report.segments = scores.size();
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives > 0 && positives < labels.size()) {
    report.classifier = classifier_metrics(scores, labels, inputs.bootstrap_resamples, inputs.seed);
    report.pr_curve = precision_recall(scores, labels);
  }
  report.score_quality = binned_quality(scores, qualities);

  std::vector<std::map<std::string, std::string>> categories;
  const bool any_categories = std::any_of(manifest.entries.begin(), manifest.entries.end(),
                                          [](const ManifestEntry& e) { return !e.categories.empty(); });
  if (any_categories) {
    for (const auto& e : manifest.entries) categories.push_back(e.categories);
  }
  report.delta_miou = delta_miou_report(before, after, categories);

  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "report.json", eval_report_to_json(report));
  write_text(out_dir / "pr_curve.csv", pr_curve_csv(report.pr_curve));
  write_text(out_dir / "quality_bins.csv", quality_bins_csv(report.score_quality));
  write_text(out_dir / "delta_miou_histogram.csv", delta_histogram_csv(report.delta_miou));
  render_plots(out_dir, out_dir);
  return report;
}

void render_plots(const std::filesystem::path& csv_dir, const std::filesystem::path& out_dir) {
  const auto pr_path = csv_dir / "pr_curve.csv";
  const auto bins_path = csv_dir / "quality_bins.csv";
  const auto hist_path = csv_dir / "delta_miou_histogram.csv";
  bool any = false;
  std::filesystem::create_directories(out_dir);

  if (std::filesystem::exists(pr_path)) {
    any = true;
    plot::Series s{"meta-classifier", {}};
    for (const auto& r : read_numeric_csv(pr_path)) {
      if (r.size() >= 3) s.points.emplace_back(r[1], r[2]);
    }
    plot::Axes axes{"Precision-recall for low-quality segments", "recall", "precision", 0.0, 1.0, 0.0, 1.0};
    write_text(out_dir / "pr_curve.svg", plot::line_plot(axes, {s}));
  }
  if (std::filesystem::exists(bins_path)) {
    any = true;
    plot::Series p{"p", {}}, iou{"IoU", {}}, adj{"IoU_adj", {}};
    for (const auto& r : read_numeric_csv(bins_path)) {
      if (r.size() < 4) continue;
      p.points.emplace_back(r[0], r[1]);
      iou.points.emplace_back(r[0], r[2]);
      adj.points.emplace_back(r[0], r[3]);
    }
    plot::Axes axes{"Segment quality by uncertainty bin", "uncertainty score", "mean quality", 0.0, 1.0, 0.0, 1.0};
    write_text(out_dir / "score_quality.svg", plot::line_plot(axes, {p, iou, adj}));
  }
  if (std::filesystem::exists(hist_path)) {
    any = true;
    std::vector<double> edges;
    std::vector<double> counts;
    for (const auto& r : read_numeric_csv(hist_path)) {
      if (r.size() < 3) continue;
      if (edges.empty()) edges.push_back(r[0]);
      edges.push_back(r[1]);
      counts.push_back(r[2]);
    }
    const double top = counts.empty() ? 1.0 : std::max(1.0, *std::max_element(counts.begin(), counts.end()));
    plot::Axes axes{"Change in mIoU after correction", "delta mIoU", "images", -1.0, 1.0, 0.0, top};
    write_text(out_dir / "delta_miou_histogram.svg", plot::histogram(axes, edges, counts));
  }
  if (!any) throw IoError("no plot CSVs found in " + csv_dir.string());
}

}  // namespace segqual
