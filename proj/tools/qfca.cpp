/* Copyright 2026 The QFCA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// qfca command-line tool: detect, evaluate, bench, synth.
//
// Machine-readable results go to stdout (one JSON object per line, or CSV
// for bench); human summaries go to stderr. Exit codes: 0 ok, 1 runtime
// error, 2 usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfca/bench.hpp"
#include "qfca/config.hpp"
#include "qfca/error.hpp"
#include "qfca/features.hpp"
#include "qfca/harness.hpp"
#include "qfca/parallel.hpp"
#include "qfca/scoring.hpp"
#include "qfca/synth.hpp"
#include "qfca/tensor_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct UsageError : qfca::Error {
  using Error::Error;
};

// Flags whose text form needs converting after the parse.
struct PipelineFlags {
  std::string sigma_p;
  std::string reference;
  std::string pad;
};

void add_pipeline_options(CLI::App* app, qfca::RunConfig& cfg, PipelineFlags& flags) {
  auto& p = cfg.pipeline;
  flags.sigma_p = qfca::format_double(p.sigma_p);
  flags.reference = std::string(qfca::to_string(p.reference));
  flags.pad = std::string(qfca::to_string(p.pad));
  app->add_option("--config", "key = value file; explicit flags override it");
  app->add_option("--bins", p.n_bins, "quantization bins N")->capture_default_str();
  app->add_option("--patch-size", p.patch_size, "patch size T (odd)")->capture_default_str();
  app->add_option("--pca-components", p.pca_components, "0 = off, k > 0 enables the residual")
      ->capture_default_str();
  app->add_option("--sigma-s", p.sigma_s, "final smoothing sigma")->capture_default_str();
  app->add_option("--sigma-p", flags.sigma_p, "association window sigma, inf = box")
      ->capture_default_str();
  app->add_option("--reference", flags.reference,
                  "median-quan | mean-quan | quan-median | quan-mean")
      ->capture_default_str();
  app->add_option("--sample-budget", p.sample_budget, "reference patch locations")
      ->capture_default_str();
  app->add_option("--border", p.border_exclusion, "border exclusion, -1 = T/2")
      ->capture_default_str();
  app->add_option("--pad", flags.pad, "reflect | wrap")->capture_default_str();
  app->add_option("--feature-scale", cfg.bank.scale, "filter-bank downsampling")
      ->capture_default_str();
  app->add_option("--filter-sigmas", cfg.bank.sigmas, "filter-bank scales")->delimiter(',');
  app->add_flag("--laplacian", cfg.bank.laplacian, "add Laplacian channels");
}

void finish_pipeline_options(qfca::RunConfig& cfg, const PipelineFlags& flags) {
  cfg.pipeline.sigma_p = qfca::parse_double("sigma-p", flags.sigma_p);
  cfg.pipeline.reference = qfca::parse_reference_mode(flags.reference);
  cfg.pipeline.pad = qfca::parse_pad(flags.pad);
  cfg.pipeline.validate();
}

// --config is read before the parse so that its values become defaults.
std::optional<fs::path> find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return fs::path(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return fs::path(a.substr(9));
  }
  return std::nullopt;
}

json timings_json(const qfca::StageTimings& t) {
  return {{"pca", t.pca_ms},           {"quantize", t.quantize_ms},
          {"histogram", t.histogram_ms}, {"reference", t.reference_ms},
          {"transport", t.transport_ms}, {"associate", t.associate_ms},
          {"aggregate", t.aggregate_ms}, {"smooth", t.smooth_ms},
          {"total", t.total_ms}};
}

void add_timings(qfca::StageTimings& sum, const qfca::StageTimings& t) {
  sum.pca_ms += t.pca_ms;
  sum.quantize_ms += t.quantize_ms;
  sum.histogram_ms += t.histogram_ms;
  sum.reference_ms += t.reference_ms;
  sum.transport_ms += t.transport_ms;
  sum.associate_ms += t.associate_ms;
  sum.aggregate_ms += t.aggregate_ms;
  sum.smooth_ms += t.smooth_ms;
  sum.total_ms += t.total_ms;
}

json manifest(const std::string& command, const qfca::RunConfig& cfg,
              const std::vector<std::string>& inputs, const json& timings,
              std::optional<std::uint64_t> seed) {
  json config = json::object();
  for (const auto& [k, v] : qfca::parse_config_text(qfca::format_config(cfg))) config[k] = v;
  json m{{"tool", "qfca"},
         {"version", qfca::kVersion},
         {"command", command},
         {"config", config},
         {"config_text", qfca::format_config(cfg)},
         {"inputs", inputs},
         {"threads", qfca::num_threads()},
         {"timings_ms", timings}};
  m["seed"] = seed ? json(*seed) : json(nullptr);
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qfca::IoError(path, "cannot open for writing");
  out << text;
  if (!out) throw qfca::IoError(path, "write failed");
}

std::optional<qfca::ImageSize> resize_flag(int size) {
  if (size <= 0) return std::nullopt;
  return qfca::ImageSize{size, size};
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
  std::string image;
  std::string features;
  std::string out;
  std::string manifest;
  int resize = 0;
  bool upsample = false;
};

int run_detect(const DetectArgs& a, const qfca::RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  qfca::FeatureMap f;
  std::optional<qfca::ImageSize> image_size;
  if (!a.image.empty()) {
    const qfca::Tensor image = qfca::load_image(a.image, resize_flag(a.resize));
    image_size = qfca::ImageSize{static_cast<int>(image.shape()[1]),
                                 static_cast<int>(image.shape()[2])};
    f = qfca::extract_filterbank(image, cfg.bank);
  } else {
    f = qfca::load_external_features(a.features);
    image_size = qfca::ImageSize{f.height * f.scale, f.width * f.scale};
  }
  qfca::StageTimings timings;
  const qfca::AnomalyMap map = qfca::detect(f, cfg.pipeline, &timings);
  if (map.all_degenerate)
    std::cerr << "warning: every feature channel is constant; the map is all zeros\n";

  if (!a.out.empty()) {
    const qfca::Plane heat = a.upsample ? qfca::upsample_scores(map, *image_size) : map.scores;
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    const auto ext = out.extension().string();
    if (ext == ".qtf") {
      qfca::write_tensor(qfca::Tensor({static_cast<std::size_t>(heat.height),
                                       static_cast<std::size_t>(heat.width)},
                                      heat.data),
                         out);
    } else if (ext == ".pgm") {
      qfca::write_pgm(out, heat);
    } else {
      throw UsageError("--out must end in .qtf or .pgm");
    }
  }
  const double wall = ms_since(t0);
  const std::string input = a.image.empty() ? a.features : a.image;
  if (!a.manifest.empty()) {
    json t = timings_json(timings);
    t["wall"] = wall;
    write_text(a.manifest, manifest("detect", cfg, {input}, t, std::nullopt).dump(2) + "\n");
  }
  json line{{"command", "detect"},     {"input", input},
            {"image_score", map.image_score}, {"wall_ms", wall},
            {"height", map.scores.height},    {"width", map.scores.width},
            {"all_degenerate", map.all_degenerate}};
  std::cout << line.dump() << std::endl;
  std::fprintf(stderr, "%s: image score %.6g, %d x %d map, %.1f ms\n", input.c_str(),
               map.image_score, map.scores.height, map.scores.width, wall);
  return 0;
}

// -------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string dataset;
  std::string layout = "mvtec";
  std::vector<std::string> classes;
  std::string features_dir;
  std::string out;
  std::string manifest;
  double fpr_limit = 0.3;
  int resize = 0;
};

int run_evaluate(const EvaluateArgs& a, const qfca::RunConfig& cfg) {
  if (a.layout != "mvtec") throw UsageError("unknown layout '" + a.layout + "'");
  if (!fs::is_directory(a.dataset)) throw UsageError("dataset root not found: " + a.dataset);
  std::vector<std::string> classes = a.classes;
  if (classes.empty()) {
    for (const auto& e : fs::directory_iterator(a.dataset))
      if (e.is_directory() && fs::is_directory(e.path() / "test"))
        classes.push_back(e.path().filename().string());
    std::sort(classes.begin(), classes.end());
  }
  if (classes.empty()) throw UsageError("no classes found under " + a.dataset);
  for (const auto& c : classes)
    if (!fs::is_directory(fs::path(a.dataset) / c / "test"))
      throw UsageError("class '" + c + "' not found under " + a.dataset);

  qfca::EvalOptions opt;
  opt.pipeline = cfg.pipeline;
  opt.bank = cfg.bank;
  opt.fpr_limit = a.fpr_limit;
  opt.resize = resize_flag(a.resize);
  if (!a.features_dir.empty()) opt.features_dir = fs::path(a.features_dir);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<qfca::MetricReport> reports;
  qfca::StageTimings sum;
  std::vector<std::string> inputs;
  for (const auto& c : classes) {
    const qfca::ClassResult r = qfca::evaluate_class(a.dataset, c, opt);
    for (const auto& img : r.images) {
      add_timings(sum, img.timings);
      inputs.push_back(img.path);
    }
    auto fmt = [](const std::optional<double>& v) {
      return v ? std::to_string(100 * *v).substr(0, 6) : std::string("n/a");
    };
    std::cerr << c << ": PRO " << fmt(r.report.pro) << "  AUROC_s " << fmt(r.report.auroc_s)
              << "  F1 " << fmt(r.report.f1) << "  AUROC_c " << fmt(r.report.auroc_c) << "  ("
              << r.report.n_images << " images)\n";
    reports.push_back(r.report);
  }
  const std::string report = qfca::report_json(reports);
  if (!a.out.empty()) write_text(a.out, report + "\n");
  if (!a.manifest.empty()) {
    json t = timings_json(sum);
    t["wall"] = ms_since(t0);
    write_text(a.manifest, manifest("evaluate", cfg, inputs, t, std::nullopt).dump(2) + "\n");
  }
  std::cout << report << std::endl;
  return 0;
}

// ----------------------------------------------------------------- bench

struct BenchArgs {
  std::string suite;
  std::vector<int> sizes;
  std::vector<int> kernels;
  std::vector<int> bins;
  int channels = 0;
  int naive_planes = 0;
  int repeats = 5;
  std::uint64_t seed = 1;
};

int run_bench(const BenchArgs& a, const qfca::RunConfig& cfg) {
  const auto& suite = a.suite;
  if (suite != "pooling" && suite != "patch" && suite != "bins" && suite != "pipeline")
    throw UsageError("unknown suite '" + suite + "' (expected pooling, patch, bins or pipeline)");
  auto or_default = [](const std::vector<int>& v, std::vector<int> d) {
    return v.empty() ? d : v;
  };
  std::cout << qfca::csv_header() << "\n";
  auto emit = [](const qfca::BenchRow& row) { std::cout << qfca::csv_line(row) << std::endl; };

  if (suite == "pooling") {
    const int size = or_default(a.sizes, {128})[0];
    const int channels = a.channels > 0 ? a.channels : 256;
    const int naive = a.naive_planes > 0 ? a.naive_planes : channels;
    const auto stack = qfca::random_planes(channels, size, size, a.seed);
    std::vector<float> out;
    for (int k : or_default(a.kernels, {3, 5, 7, 9, 11, 15, 21, 31})) {
      qfca::check_kernel_size(k);
      emit(qfca::summarize("pooling-sat", std::to_string(k),
                           qfca::time_runs([&] { qfca::sat_pool_stack(stack, k, cfg.pipeline.pad, out); },
                                           a.repeats)));
      emit(qfca::summarize(
          "pooling-naive", std::to_string(k),
          qfca::time_runs([&] { qfca::naive_pool_stack(stack, k, cfg.pipeline.pad, naive, out); },
                          a.repeats)));
    }
    return 0;
  }
  if (suite == "patch" || suite == "bins") {
    const int size = or_default(a.sizes, {128})[0];
    const int channels = a.channels > 0 ? a.channels : 32;
    const auto f = qfca::random_smooth_features(channels, size, size, a.seed);
    const auto values = suite == "patch" ? or_default(a.kernels, {3, 5, 7, 9, 11})
                                         : or_default(a.bins, {2, 4, 8, 16, 32});
    for (int v : values) {
      qfca::PipelineConfig p = cfg.pipeline;
      (suite == "patch" ? p.patch_size : p.n_bins) = v;
      p.validate();
      emit(qfca::summarize(suite, std::to_string(v),
                           qfca::time_runs([&] { (void)qfca::detect(f, p); }, a.repeats)));
    }
    return 0;
  }
  for (int size : or_default(a.sizes, {256, 512, 1024})) {
    qfca::SynthConfig sc;
    sc.size = size;
    sc.seed = a.seed;
    const qfca::Tensor image = qfca::synth_image(sc, 0, true).rgb;
    emit(qfca::summarize("pipeline", std::to_string(size), qfca::time_runs([&] {
                           (void)qfca::detect(qfca::extract_filterbank(image, cfg.bank),
                                              cfg.pipeline);
                         },
                                                                              a.repeats)));
  }
  return 0;
}

// ----------------------------------------------------------------- synth

struct SynthArgs {
  std::string kind = "noise";
  std::string anomaly = "square";
  std::string out;
  std::string class_name;
  qfca::SynthConfig config;
};

int run_synth(SynthArgs a) {
  a.config.kind = qfca::parse_texture_kind(a.kind);
  a.config.anomaly = qfca::parse_anomaly_kind(a.anomaly);
  const std::string name = a.class_name.empty() ? a.kind : a.class_name;
  qfca::write_synth_dataset(a.config, a.out, name);
  json line{{"command", "synth"},
            {"class", name},
            {"kind", a.kind},
            {"anomaly", a.anomaly},
            {"images", a.config.count},
            {"good", a.config.good},
            {"size", a.config.size},
            {"seed", a.config.seed},
            {"out", a.out}};
  std::cout << line.dump() << std::endl;
  std::cerr << "wrote " << a.config.count << " images of class '" << name << "' to " << a.out
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  qfca::RunConfig cfg;
  try {
    if (const auto path = find_config(argc, argv))
      qfca::apply_config(qfca::read_config_file(*path), cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Texture anomaly maps from quantized patch statistics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qfca::kVersion);
  int threads = 0;
  app.add_option("--threads", threads, "worker cap, 0 = all logical cores")
      ->check(CLI::NonNegativeNumber);

  PipelineFlags flags;

  DetectArgs detect_args;
  auto* detect = app.add_subcommand("detect", "anomaly map of one image or feature file");
  auto* image_opt = detect->add_option("--image", detect_args.image, "PNG or PPM/PGM image");
  auto* feat_opt =
      detect->add_option("--features", detect_args.features, "QTF1 float32 [C,H,W] features");
  image_opt->excludes(feat_opt);
  detect->add_option("--out", detect_args.out, "heatmap, .qtf (float32 [H,W]) or .pgm");
  detect->add_option("--manifest", detect_args.manifest, "run manifest JSON");
  detect->add_option("--resize", detect_args.resize, "resize the image to N x N first");
  detect->add_flag("--upsample", detect_args.upsample, "write the heatmap at image resolution");
  add_pipeline_options(detect, cfg, flags);

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "metric report over a dataset");
  evaluate->add_option("--dataset", eval_args.dataset, "dataset root")->required();
  evaluate->add_option("--layout", eval_args.layout, "directory layout")->capture_default_str();
  evaluate->add_option("--classes", eval_args.classes, "comma-separated classes (default all)")
      ->delimiter(',');
  evaluate->add_option("--features-dir", eval_args.features_dir,
                       "precomputed features <dir>/<class>/<defect>/<stem>.qtf");
  evaluate->add_option("--out", eval_args.out, "write the report JSON here too");
  evaluate->add_option("--manifest", eval_args.manifest, "run manifest JSON");
  evaluate->add_option("--fpr-limit", eval_args.fpr_limit, "PRO integration limit")
      ->capture_default_str();
  evaluate->add_option("--resize", eval_args.resize, "resize images to N x N first");
  add_pipeline_options(evaluate, cfg, flags);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "timing suites as CSV");
  bench->add_option("--suite", bench_args.suite, "pooling | patch | bins | pipeline")->required();
  bench->add_option("--sizes", bench_args.sizes, "plane / image sizes")->delimiter(',');
  bench->add_option("--kernels", bench_args.kernels, "box sizes (pooling) or patch sizes (patch)")
      ->delimiter(',');
  bench->add_option("--bins-list", bench_args.bins, "bin counts (bins suite)")->delimiter(',');
  bench->add_option("--channels", bench_args.channels, "planes or feature channels");
  bench->add_option("--naive-planes", bench_args.naive_planes,
                    "planes timed for the naive pooling baseline");
  bench->add_option("--repeats", bench_args.repeats, "timed runs per point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_args.seed, "workload seed")->capture_default_str();
  add_pipeline_options(bench, cfg, flags);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write a seeded synthetic dataset");
  synth->add_option("--kind", synth_args.kind, "tiles | noise | stripes")->capture_default_str();
  synth->add_option("--anomaly", synth_args.anomaly, "square | blob")->capture_default_str();
  synth->add_option("--size", synth_args.config.size, "image size")->capture_default_str();
  synth->add_option("--seed", synth_args.config.seed, "generator seed")->capture_default_str();
  synth->add_option("--out", synth_args.out, "dataset root")->required();
  synth->add_option("--class", synth_args.class_name, "class name (default: kind)");
  synth->add_option("--anomaly-frac", synth_args.config.anomaly_frac, "anomaly area fraction")
      ->capture_default_str();
  synth->add_option("--count", synth_args.config.count, "test images")->capture_default_str();
  synth->add_option("--good", synth_args.config.good, "anomaly-free test images")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    qfca::set_num_threads(threads);
    if (*detect) {
      if (detect_args.image.empty() == detect_args.features.empty())
        throw UsageError("detect needs exactly one of --image or --features");
      finish_pipeline_options(cfg, flags);
      return run_detect(detect_args, cfg);
    }
    if (*evaluate) {
      finish_pipeline_options(cfg, flags);
      return run_evaluate(eval_args, cfg);
    }
    if (*bench) {
      finish_pipeline_options(cfg, flags);
      return run_bench(bench_args, cfg);
    }
    return run_synth(synth_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const qfca::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
