// Copyright 2026 The volaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// volaug: batch front end for phantom synthesis, augmentation, source
// matching and evaluation.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "volaug/volaug.hpp"

namespace fs = std::filesystem;
using namespace volaug;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string modality;
  unsigned threads = 0;
};

PipelineConfig resolve_config(const CommonOptions& common) {
  PipelineConfig cfg = common.config.empty() ? PipelineConfig{} : load_pipeline_config(common.config);
  if (!common.modality.empty()) cfg.augment.modality = parse_modality(common.modality);
  if (common.seed) cfg.seed = common.seed;
  return cfg;
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_json_file(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) { return fs::path(prefix + suffix); }

// --- synth -----------------------------------------------------------------

void cmd_synth(const CommonOptions& common, const std::string& spec_path, const std::string& out) {
  PhantomSpec spec = phantom_spec_from_json(read_json_file(spec_path));
  if (common.seed) spec.seed = *common.seed;
  const Phantom ph = make_phantom(spec);
  save_volume(ph.image, with_suffix(out, "_image.svol.json"));
  save_labels(ph.labels, with_suffix(out, "_labels.svol.json"));
}

// --- augment ---------------------------------------------------------------

void cmd_augment(const CommonOptions& common, const std::string& image_path, const std::string& labels_path,
                 std::size_t n, std::size_t start, const std::string& out) {
  const PipelineConfig cfg = resolve_config(common);
  if (!cfg.seed) throw ConfigError("augment requires --seed (or \"seed\" in the config)");
  Volume image = load_volume(image_path);
  const LabelMap labels = load_labels(labels_path);
  if (image.dims() != labels.dims())
    throw DataError("augment: image dims " + to_string(image.dims()) + " do not match labels " +
                    to_string(labels.dims()));
  if (cfg.normalize_input) image = normalize(image, cfg.modality());

  std::vector<AugmentResult> results(n);
  // Sample k always draws from stream k of the seed.
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::stream(*cfg.seed, start + i);
    results[i] = augment_sample(image, labels, rng, cfg.augment);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string stem = out + "_" + std::to_string(start + i);
    save_volume(results[i].image, with_suffix(stem, "_image.svol.json"));
    save_labels(results[i].labels, with_suffix(stem, "_labels.svol.json"));
  }
}

// --- fit-hist --------------------------------------------------------------

std::vector<fs::path> read_list(const fs::path& list_path) {
  std::ifstream in(list_path);
  if (!in) throw IoError("cannot open volume list " + list_path.string());
  std::vector<fs::path> paths;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    fs::path p = line.substr(first, last - first + 1);
    if (p.is_relative()) p = list_path.parent_path() / p;
    paths.push_back(p);
  }
  if (paths.empty()) throw DataError("volume list " + list_path.string() + " is empty");
  return paths;
}

void cmd_fit_hist(const CommonOptions& common, const std::string& list, const std::string& out) {
  const PipelineConfig cfg = resolve_config(common);
  std::vector<Volume> volumes;
  for (const auto& p : read_list(list)) volumes.push_back(preclip(load_volume(p), cfg.modality()));
  save_histogram(fit_source_histogram(volumes, cfg.sm_config()), out);
}

// --- match -----------------------------------------------------------------

void cmd_match(const CommonOptions& common, const std::string& image_path, const std::string& hist_path,
               const std::string& out) {
  const IntensityHistogram hist = load_histogram(hist_path);
  PipelineConfig cfg = resolve_config(common);
  if (common.modality.empty() && common.config.empty()) cfg.augment.modality = hist.config().modality;
  const SMConfig sm = cfg.sm_config();
  if (hist.config() != sm)
    throw DataError("match: histogram (" + std::string(to_string(hist.config().modality)) + ", " +
                    std::to_string(hist.n_bins()) + " bins) does not match the requested " +
                    std::string(to_string(sm.modality)) + " configuration");
  const Volume image = preclip(load_volume(image_path), sm.modality);
  save_volume(apply_sm(image, hist, sm), svol_header_path(out));
}

// --- evaluate --------------------------------------------------------------

void cmd_evaluate(const std::string& pred_path, const std::string& gt_path, const std::string& out) {
  const LabelMap pred = load_labels(pred_path);
  const LabelMap gt = load_labels(gt_path);
  if (pred.dims() != gt.dims())
    throw DataError("evaluate: dims mismatch " + to_string(pred.dims()) + " vs " + to_string(gt.dims()));
  const MetricReport report = evaluate(pred, gt);
  for (const auto& [label, s] : report.per_label)
    if (!s.assd_mm) std::cerr << "warning: label " << label << " is empty in one map; distances reported as null\n";
  write_json_file(to_json(report), out);
}

// --- inspect ---------------------------------------------------------------

nlohmann::json inspect_file(const fs::path& path) {
  const nlohmann::json j = read_json_file(path);
  nlohmann::json info;
  info["path"] = path.string();
  if (j.contains("dtype")) {
    const SvolHeader h = svol_header_from_json(j);
    info["kind"] = "svol";
    info["header"] = to_json(h);
    if (h.dtype == "f32") {
      const Volume v = load_volume(path);
      const auto d = v.data();
      info["min"] = *std::min_element(d.begin(), d.end());
      info["max"] = *std::max_element(d.begin(), d.end());
    } else {
      info["label_set"] = load_labels(path).label_set();
    }
  } else if (j.contains("cumulative")) {
    const IntensityHistogram h = histogram_from_json(j);
    info["kind"] = "histogram";
    info["n_bins"] = h.n_bins();
    info["range"] = {h.config().range_lo, h.config().range_hi};
    info["modality"] = std::string(to_string(h.config().modality));
    info["bin_width"] = h.bin_width();
  } else if (j.contains("per_label")) {
    if (auto e = validate_report_json(j); !e.empty()) throw DataError("invalid metric report: " + e);
    info["kind"] = "report";
    info["mean"] = j["mean"];
  } else {
    throw DataError(path.string() + " is not an SVOL header, histogram or metric report");
  }
  return info;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volumetric augmentation, source matching and segmentation metrics"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions common;
  app.add_option("--seed", common.seed, "Seed for stochastic commands (64-bit)");
  app.add_option("--config", common.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--modality", common.modality, "ct or mr")->check(CLI::IsMember({"ct", "mr"}));
  app.add_option("--threads", common.threads, "Worker threads (0 = hardware concurrency)");

  std::string spec_path, out, image, labels, list, hist, pred, gt;
  std::size_t n = 1, start = 0;
  std::vector<std::string> inspect_paths;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic phantom image/label pair");
  synth->add_option("--spec", spec_path, "Phantom spec JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out, "Output prefix (<out>_image.svol.json, <out>_labels.svol.json)")->required();

  auto* augment = app.add_subcommand("augment", "Write augmented image/label pairs");
  augment->add_option("--image", image, "Image SVOL header")->required();
  augment->add_option("--labels", labels, "Label SVOL header")->required();
  augment->add_option("-n,--n", n, "Number of samples")->check(CLI::PositiveNumber);
  augment->add_option("--start", start, "Index of the first sample (selects the RNG stream)");
  augment->add_option("--out", out, "Output prefix (<out>_<k>_image.svol.json, ...)")->required();

  auto* fit = app.add_subcommand("fit-hist", "Fit the average source cumulative histogram");
  fit->add_option("--list", list, "Text file with one SVOL path per line")->required();
  fit->add_option("--out", out, "Histogram JSON output")->required();

  auto* match = app.add_subcommand("match", "Map an image onto the source intensity distribution");
  match->add_option("--image", image, "Image SVOL header")->required();
  match->add_option("--hist", hist, "Histogram JSON from fit-hist")->required();
  match->add_option("--out", out, "Output SVOL header path")->required();

  auto* eval = app.add_subcommand("evaluate", "Compute DSC / ASSD / HD95 report");
  eval->add_option("--pred", pred, "Predicted label SVOL")->required();
  eval->add_option("--gt", gt, "Ground-truth label SVOL")->required();
  eval->add_option("--out", out, "Report JSON output")->required();

  auto* inspect = app.add_subcommand("inspect", "Print SVOL, histogram or report headers");
  inspect->add_option("files", inspect_paths, "Files to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  set_thread_count(common.threads);
  try {
    if (*synth) {
      cmd_synth(common, spec_path, out);
    } else if (*augment) {
      cmd_augment(common, image, labels, n, start, out);
    } else if (*fit) {
      cmd_fit_hist(common, list, out);
    } else if (*match) {
      cmd_match(common, image, hist, out);
    } else if (*eval) {
      cmd_evaluate(pred, gt, out);
    } else if (*inspect) {
      for (const auto& p : inspect_paths) std::cout << inspect_file(p).dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
