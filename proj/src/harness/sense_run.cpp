#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "core/binio.hpp"
#include "core/errors.hpp"
#include "harness/harness.hpp"

namespace beamsense::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// instance_id -> is_dynamic, from the environment metadata.
std::map<int, bool> load_truth_table(const std::string& path_dir) {
  const std::string env_meta_path = (fs::path(path_dir).parent_path() / "meta.json").string();
  std::ifstream in(env_meta_path);
  if (!in) throw core::IoError("cannot read " + env_meta_path);
  const json meta = json::parse(in);
  std::map<int, bool> table;
  for (const auto& obj : meta.at("objects")) {
    table[obj.at("instance_id").get<int>()] = obj.at("is_dynamic").get<bool>();
  }
  // The user vehicle is appended per path and is always dynamic.
  table[meta.at("user_instance_id").get<int>()] = true;
  return table;
}

}  // namespace

void run_sense(const ExperimentConfig& cfg, const std::string& path_dir,
               const std::string& out_dir) {
  const LoadedPath lp = load_path(path_dir);
  const std::map<int, bool> truth_table = load_truth_table(path_dir);
  fs::create_directories(out_dir);

  const int L = cfg.pred.window;
  if (lp.frames < cfg.detect.lags + 2)
    throw core::ParameterError("run_sense: too few frames for the test window");

  std::ofstream maps(out_dir + "/dynamic_maps.bin", std::ios::binary);
  std::ofstream report(out_dir + "/report.csv");
  if (!maps || !report) throw core::IoError("cannot open outputs under " + out_dir);
  report << "class_id,instance_key,q_stat,threshold,verdict,truth_verdict\n";

  const std::size_t grid = static_cast<std::size_t>(lp.rows) * lp.cols;
  scene::SegMapFrame frame;
  frame.rows = lp.rows;
  frame.cols = lp.cols;

  // Non-overlapping windows; a tail too short for the test is re-covered by
  // the final L frames (already-written frames are not emitted twice).
  int emit_from = 0;
  while (emit_from < lp.frames) {
    int wlen = std::min(L, lp.frames - emit_from);
    int wstart = emit_from;
    if (wlen < cfg.detect.lags + 2) {
      wlen = std::min(L, lp.frames);
      wstart = lp.frames - wlen;
    }

    std::vector<scene::SegMapFrame> frames(static_cast<std::size_t>(wlen));
    std::vector<const scene::SegMapFrame*> views;
    for (int t = 0; t < wlen; ++t) {
      auto& f = frames[static_cast<std::size_t>(t)];
      f.rows = lp.rows;
      f.cols = lp.cols;
      const std::size_t off = static_cast<std::size_t>(wstart + t) * grid;
      f.class_grid.assign(lp.class_grids.begin() + static_cast<std::ptrdiff_t>(off),
                          lp.class_grids.begin() + static_cast<std::ptrdiff_t>(off + grid));
      views.push_back(&f);
    }

    const sensing::DetectionResult det = sensing::detect_dynamic_scatterers(views, cfg.detect);

    for (const auto& tr : det.tracks) {
      // Truth verdict by majority truth-instance under the track's pixels.
      std::map<int, std::size_t> counts;
      for (std::size_t t = 0; t < tr.pixels_per_frame.size(); ++t) {
        const std::size_t off = static_cast<std::size_t>(wstart) * grid + t * grid;
        for (const std::uint32_t px : tr.pixels_per_frame[t]) ++counts[lp.truth_grids[off + px]];
      }
      int best_inst = 0;
      std::size_t best_count = 0;
      for (const auto& [inst, n] : counts) {
        if (n > best_count) {
          best_count = n;
          best_inst = inst;
        }
      }
      const auto it = truth_table.find(best_inst);
      const bool truth_dynamic = it != truth_table.end() && it->second;
      report << tr.class_id << ',' << tr.instance_key << ',' << fmt_double(tr.result.q_stat)
             << ',' << fmt_double(tr.result.threshold) << ','
             << (tr.result.is_dynamic ? "dynamic" : "static") << ','
             << (truth_dynamic ? "dynamic" : "static") << "\n";
    }

    for (int t = emit_from - wstart; t < wlen; ++t) {
      core::append_binary(maps, det.dynamic_maps[static_cast<std::size_t>(t)].data(), grid);
    }
    emit_from = wstart + wlen;
  }
}

predictor::EvalMetrics run_evaluate(const ExperimentConfig& cfg, const std::string& model_dir,
                                    const std::string& dataset_dir, const std::string& out_path) {
  const predictor::ModelParams params = predictor::load_model(model_dir);
  ExperimentConfig eval_cfg = cfg;
  eval_cfg.pred = params.cfg;  // the stored model defines the feature shapes
  const std::vector<PathOnDisk> paths = list_dataset_paths(dataset_dir);
  const predictor::Dataset data = build_features(eval_cfg, dataset_dir, paths, cfg.single_stride);
  const predictor::EvalMetrics m = predictor::evaluate(params, data, 0);

  json j;
  j["loss"] = m.loss;
  j["top1"] = m.top1;
  j["top5"] = m.top5;
  j["top10"] = m.top10;
  j["samples"] = data.size();
  std::ofstream out(out_path);
  if (!out) throw core::IoError("cannot write " + out_path);
  out << j.dump(2) << "\n";
  return m;
}

}  // namespace beamsense::harness
