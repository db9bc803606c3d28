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

#include "cli.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "segqual/correction.hpp"
#include "segqual/dataset.hpp"
#include "segqual/errors.hpp"
#include "segqual/evaluation.hpp"
#include "segqual/gbdt.hpp"
#include "segqual/logistic.hpp"
#include "segqual/model.hpp"
#include "segqual/npy.hpp"
#include "segqual/parallel.hpp"
#include "segqual/pipeline.hpp"
#include "segqual/synth.hpp"
#include "segqual/uncertainty.hpp"

namespace segqual::cli {

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = text.find(sep, start);
    out.emplace_back(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (end == std::string_view::npos) return out;
    start = end + 1;
  }
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("grid: bad value '" + value + "' for " + key);
  }
}

std::string describe(const GbdtParams& p) {
  std::ostringstream os;
  os << "max_depth=" << p.max_depth << " num_trees=" << p.num_trees << " learning_rate=" << p.learning_rate
     << " min_child_weight=" << p.min_child_weight << " subsample=" << p.subsample << " lambda=" << p.lambda;
  return os.str();
}

// Number of class one-hot columns and presence of gradient columns in a table.
FeatureSetSpec spec_for_table(const FeatureTable& table, FeatureSetKind kind) {
  std::size_t classes = 0;
  while (table.column_index("class_" + std::to_string(classes))) ++classes;
  return make_feature_set(kind, classes, table.column_index("mean_gradient_norm").has_value());
}

struct Common {
  std::string manifest;
  std::string feature_set = "reduced";
  std::string model;
  double tau = kDefaultTau;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
};

void add_manifest(CLI::App* app, Common& c) {
  app->add_option("--manifest", c.manifest, "dataset manifest JSON")->required()->envname("SEGQUAL_MANIFEST");
}
void add_threads(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "worker threads")->envname("SEGQUAL_THREADS")->check(CLI::PositiveNumber);
}
void add_seed(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "random seed")->envname("SEGQUAL_SEED");
}
void add_feature_set(CLI::App* app, Common& c) {
  app->add_option("--feature-set", c.feature_set, "all | reduced | uncertainty_only")
      ->envname("SEGQUAL_FEATURE_SET")
      ->check(CLI::IsMember({"all", "reduced", "uncertainty_only"}));
}
void add_model(CLI::App* app, Common& c) {
  app->add_option("--model", c.model, "model JSON")->required()->envname("SEGQUAL_MODEL");
}
void add_out(CLI::App* app, Common& c, const std::string& what) {
  app->add_option("--out", c.out, what)->required()->envname("SEGQUAL_OUT");
}

int cmd_generate(const Common& c, SynthConfig config, std::size_t count, std::ostream& out) {
  config.seed = c.seed;
  const auto manifest = generate_corpus(config, count, c.out, c.threads);
  out << "wrote " << manifest.entries.size() << " images to " << c.out << "\n";
  return kExitOk;
}

int cmd_heatmap(const Common& c, std::ostream& out) {
  const auto manifest = load_manifest(c.manifest);
  std::filesystem::create_directories(c.out);
  parallel_for(manifest.entries.size(), c.threads, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    const auto probs = read_probability_map(e.prob_path);
    std::optional<FeatureTensor> feats;
    if (e.features_path) feats = read_feature_tensor(*e.features_path);
    const auto h = compute_heatmaps(probs, feats ? &*feats : nullptr);
    const auto stem = (std::filesystem::path(c.out) / e.image_id).string();
    write_heatmap(stem + "_one_minus_max.npy", h.one_minus_max);
    write_heatmap(stem + "_entropy.npy", h.entropy);
    write_heatmap(stem + "_margin.npy", h.margin);
    if (h.gradient_norm) write_heatmap(stem + "_gradient_norm.npy", *h.gradient_norm);
  });
  out << "heatmaps for " << manifest.entries.size() << " images (" << simd::to_string(simd::active_level())
      << " kernels) in " << c.out << "\n";
  return kExitOk;
}

int cmd_extract(const Common& c, double tau_p, std::ostream& out, std::ostream& err) {
  const auto manifest = load_manifest(c.manifest);
  if (manifest.entries.empty()) err << "warning: manifest has no entries; writing an empty table\n";
  const auto table = extract_features(manifest, parse_feature_set(c.feature_set), c.threads, tau_p);
  write_table(c.out, table);
  out << "extracted " << table.records.size() << " segments (" << table.feature_columns.size()
      << " features) to " << c.out << "\n";
  return kExitOk;
}

int cmd_train(const Common& c, const std::string& table_path, const std::string& kind, const std::string& grid_text,
              std::size_t folds, double lambda, double positive_weight, std::string report_path, std::ostream& out) {
  const auto table = read_table(table_path);
  if (!table.has_quality()) throw ValidationError("training table has no quality columns (extract with ground truth)");
  const auto spec = spec_for_table(table, parse_feature_set(c.feature_set));
  const auto data = make_dataset(table, spec.columns, positive_weight);
  MetaModel model;
  model.feature_set = spec;
  if (kind == "gbdt") {
    const auto grid = parse_grid(grid_text);
    auto [gbdt, report] = train_gbdt(data, grid, folds, c.seed, c.threads);
    model.classifier = std::move(gbdt);
    if (report_path.empty()) report_path = c.out + ".report.json";
    write_text(report_path, report_to_json(report));
    const auto best = std::find_if(report.cv_grid.begin(), report.cv_grid.end(),
                                   [&](const GridResult& g) { return g.params == report.chosen; });
    out << "chosen: " << describe(report.chosen) << "\n";
    out << "cv_auroc: " << best->mean_auroc << " +- " << best->std_auroc << " (" << folds << " folds, "
        << grid.size() << " grid entries)\n";
  } else {
    LogisticOptions options;
    options.lambda = lambda;
    LogisticFitInfo info;
    model.classifier = train_logistic(data, options, &info);
    std::vector<double> scores;
    for (std::size_t r = 0; r < data.rows; ++r) scores.push_back(model.margin(data.row(r)));
    out << "logistic: iterations=" << info.iterations << " gradient_norm=" << info.gradient_norm << "\n";
    out << "train_auroc: " << auroc(scores, data.labels) << "\n";
  }
  save_model(model, c.out);
  out << "model written to " << c.out << "\n";
  return kExitOk;
}

int cmd_correct(const Common& c, std::ostream& out) {
  const auto manifest = load_manifest(c.manifest);
  const auto model = load_model(c.model);
  const auto run = score_and_correct(manifest, model, c.tau, c.out, c.threads);
  std::size_t actions = 0;
  for (const auto& o : run.outcomes) actions += o.actions.size();
  out << "scored " << run.scored.records.size() << " segments, " << actions << " corrected at tau=" << c.tau
      << "; outputs in " << c.out << "\n";
  return kExitOk;
}

int cmd_sweep(const Common& c, const std::string& taus_text, std::ostream& out) {
  const auto manifest = load_manifest(c.manifest);
  if (!manifest.all_have_ground_truth()) throw ValidationError("threshold sweep needs ground truth for every image");
  const auto model = load_model(c.model);
  if (feature_set_for(manifest, model.feature_set.kind).columns != model.feature_set.columns) {
    throw ValidationError("model feature layout does not match this manifest");
  }
  std::vector<double> taus;
  if (taus_text.empty()) {
    taus = default_tau_grid();
  } else {
    for (const auto& t : split(taus_text, ',')) taus.push_back(parse_number("taus", trim(t)));
  }
  std::vector<SweepImage> images(manifest.entries.size());
  parallel_for(images.size(), c.threads, [&](std::size_t i) {
    auto a = analyze_image(manifest, manifest.entries[i], model.feature_set);
    SweepImage& im = images[i];
    for (const auto& r : a.records) im.scores[r.segment_id] = model.score(r.features);
    im.prediction = std::move(a.prediction);
    im.decomposition = std::move(a.decomposition);
    im.ground_truth = std::move(*a.ground_truth);
  });
  const auto rows = sweep_threshold(images, taus, manifest.background_class);
  std::ostringstream csv;
  csv.precision(17);
  csv << "tau,mean_delta_miou,fraction_degraded\n";
  for (const auto& r : rows) csv << r.tau << "," << r.mean_delta_miou << "," << r.fraction_degraded << "\n";
  write_text(c.out, csv.str());
  out << "best_tau: " << best_tau(rows) << "\n";
  return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& corrected, const std::string& scored, std::size_t resamples,
                 std::ostream& out) {
  EvaluationInputs in;
  in.manifest = load_manifest(c.manifest);
  in.corrected_dir = corrected;
  in.scored = read_table(scored);
  in.seed = c.seed;
  in.bootstrap_resamples = resamples;
  const auto report = evaluate(in, c.out, c.threads);
  if (report.classifier) {
    out << "auroc: " << report.classifier->auroc.value << " +- " << report.classifier->auroc.std << "\n";
    out << "average_precision: " << report.classifier->average_precision.value << " +- "
        << report.classifier->average_precision.std << "\n";
  }
  const auto& d = report.delta_miou;
  out << "miou: " << d.mean_before << " -> " << d.mean_after << " (delta " << d.mean << ", degraded "
      << d.fraction_negative << ")\n";
  out << "wrong_classes: " << d.wrong_classes_before.mean << " -> " << d.wrong_classes_after.mean << "\n";
  return kExitOk;
}

}  // namespace

std::vector<GbdtParams> parse_grid(std::string_view text) {
  const std::string t = trim(std::string(text));
  if (t.empty() || t == "default") return default_grid();
  std::map<std::string, std::vector<double>> values;
  static const std::vector<std::string> keys = {"max_depth", "num_trees", "learning_rate",
                                                "min_child_weight", "subsample", "lambda"};
  for (const auto& part : split(t, ';')) {
    const std::string item = trim(part);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("grid: expected key=values, got '" + item + "'");
    const std::string key = trim(item.substr(0, eq));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("grid: unknown key '" + key + "'");
    if (values.count(key)) throw ConfigError("grid: key '" + key + "' given twice");
    for (const auto& v : split(item.substr(eq + 1), ',')) values[key].push_back(parse_number(key, trim(v)));
  }
  const GbdtParams defaults;
  auto list = [&](const std::string& key, double fallback) {
    const auto it = values.find(key);
    return it == values.end() ? std::vector<double>{fallback} : it->second;
  };
  std::vector<GbdtParams> grid;
  for (const double depth : list("max_depth", defaults.max_depth)) {
    for (const double trees : list("num_trees", defaults.num_trees)) {
      for (const double lr : list("learning_rate", defaults.learning_rate)) {
        for (const double mcw : list("min_child_weight", defaults.min_child_weight)) {
          for (const double sub : list("subsample", defaults.subsample)) {
            for (const double lam : list("lambda", defaults.lambda)) {
              if (depth != static_cast<int>(depth) || trees != static_cast<int>(trees)) {
                throw ConfigError("grid: max_depth and num_trees must be integers");
              }
              GbdtParams p;
              p.max_depth = static_cast<int>(depth);
              p.num_trees = static_cast<int>(trees);
              p.learning_rate = lr;
              p.min_child_weight = mcw;
              p.subsample = sub;
              p.lambda = lam;
              grid.push_back(p);
            }
          }
        }
      }
    }
  }
  return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segment-wise uncertainty estimation and segmentation mask correction", "segqual"};
  app.require_subcommand(1);
  Common c;

  SynthConfig synth;
  std::size_t count = 200;
  auto* gen = app.add_subcommand("generate", "write a synthetic corpus and manifest");
  add_out(gen, c, "output directory");
  add_seed(gen, c);
  add_threads(gen, c);
  gen->add_option("--count", count, "number of images");
  gen->add_option("--image-size", synth.image_size, "image side length in pixels");
  gen->add_option("--num-classes", synth.num_classes, "classes including background");
  gen->add_option("--cells", synth.voronoi_cells, "Voronoi cells per image");
  gen->add_option("--background-cells", synth.background_cells, "Voronoi cells labeled background");
  gen->add_option("--false-rate", synth.false_segment_rate, "expected false segments per image");
  gen->add_option("--false-min", synth.false_segment_min, "minimum false segment size");
  gen->add_option("--false-max", synth.false_segment_max, "maximum false segment size");
  gen->add_option("--jitter", synth.boundary_jitter, "boundary displacement amplitude");
  gen->add_option("--swap", synth.class_swap_prob, "per-cell class swap probability");
  gen->add_option("--correct-confidence", synth.correct_confidence, "base confidence of correct pixels");
  gen->add_option("--wrong-confidence", synth.wrong_confidence, "base confidence of wrong pixels");
  gen->add_option("--noise", synth.noise_temp, "logit noise scale");
  gen->add_option("--feature-channels", synth.feature_channels, "channels of the feature tensor (0 = none)");

  auto* heat = app.add_subcommand("heatmap", "write pixel uncertainty heatmaps");
  add_manifest(heat, c);
  add_out(heat, c, "output directory");
  add_threads(heat, c);

  double tau_p = kDefaultPrecisionThreshold;
  auto* ext = app.add_subcommand("extract", "aggregate segment features into a table");
  add_manifest(ext, c);
  add_feature_set(ext, c);
  add_out(ext, c, "feature table (.csv or .jsonl)");
  add_threads(ext, c);
  ext->add_option("--tau-p", tau_p, "precision threshold for the low-quality target");

  std::string table_path, kind = "gbdt", grid_text = "default", report_path;
  std::size_t folds = 5;
  double lambda = 1.0;
  double positive_weight = 1.0;
  auto* train = app.add_subcommand("train", "train a meta-classifier");
  train->add_option("--table", table_path, "feature table with quality columns")->required();
  add_feature_set(train, c);
  add_out(train, c, "model JSON");
  add_seed(train, c);
  add_threads(train, c);
  train->add_option("--model-kind", kind, "gbdt | logistic")->check(CLI::IsMember({"gbdt", "logistic"}));
  train->add_option("--grid", grid_text, "hyperparameter grid, e.g. max_depth=2,3;num_trees=100");
  train->add_option("--folds", folds, "cross-validation folds");
  train->add_option("--lambda", lambda, "logistic L2 strength");
  train->add_option("--positive-weight", positive_weight, "weight of low-quality segments");
  train->add_option("--report", report_path, "TrainReport JSON (default <out>.report.json)");

  auto* corr = app.add_subcommand("correct", "score segments and correct masks");
  add_manifest(corr, c);
  add_model(corr, c);
  add_out(corr, c, "output directory");
  add_threads(corr, c);
  corr->add_option("--tau", c.tau, "uncertainty threshold")->envname("SEGQUAL_TAU");

  std::string taus_text;
  auto* sweep = app.add_subcommand("sweep", "mean mIoU change per correction threshold");
  add_manifest(sweep, c);
  add_model(sweep, c);
  add_out(sweep, c, "CSV output");
  add_threads(sweep, c);
  sweep->add_option("--taus", taus_text, "comma separated thresholds (default 0,0.05,...,1)");

  std::string corrected_dir, scored_path;
  std::size_t resamples = 1000;
  auto* eval = app.add_subcommand("evaluate", "classifier and correction report");
  add_manifest(eval, c);
  add_out(eval, c, "report directory");
  add_seed(eval, c);
  add_threads(eval, c);
  eval->add_option("--corrected", corrected_dir, "directory with <id>_corrected.npy")->required();
  eval->add_option("--scored", scored_path, "scored feature table")->required();
  eval->add_option("--bootstrap", resamples, "bootstrap resamples");

  std::string csv_dir;
  auto* rep = app.add_subcommand("report", "render SVG plots from evaluation CSVs");
  rep->add_option("--in", csv_dir, "directory with the CSV exports")->required();
  add_out(rep, c, "SVG output directory");

  std::vector<std::string> argv_store{"segqual"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(c, synth, count, out);
    if (*heat) return cmd_heatmap(c, out);
    if (*ext) return cmd_extract(c, tau_p, out, err);
    if (*train) return cmd_train(c, table_path, kind, grid_text, folds, lambda, positive_weight, report_path, out);
    if (*corr) return cmd_correct(c, out);
    if (*sweep) return cmd_sweep(c, taus_text, out);
    if (*eval) return cmd_evaluate(c, corrected_dir, scored_path, resamples, out);
    if (*rep) {
      render_plots(csv_dir, c.out);
      out << "plots written to " << c.out << "\n";
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ContractViolation& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}

}  // namespace segqual::cli
