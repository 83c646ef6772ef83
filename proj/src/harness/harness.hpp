#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "channel/channel.hpp"
#include "core/config.hpp"
#include "predictor/predictor.hpp"
#include "scene/scene.hpp"
#include "sensing/sensing.hpp"

namespace beamsense::harness {

// Everything an experiment run needs, parsed from the plain-text key-value
// config with spec defaults.
struct ExperimentConfig {
  std::uint64_t seed = 1;

  // scene
  scene::RasterSpec raster;
  scene::EnvConfig env;
  scene::PathConfig path;
  scene::MotionConfig motion;
  double p_flip = 0.04;
  double pc_density = 4.0;

  // channel
  channel::UPAConfig upa_t{8, 4, 0.5};
  channel::UPAConfig upa_r{4, 2, 0.5};
  channel::OFDMConfig ofdm;
  channel::TraceOptions trace;
  bool dump_channels = false;

  // dataset protocol
  int n_source_envs = 4;
  int paths_per_env = 4;
  int single_paths = 8;
  int multi_stride = 2;   // window stride, multi-environment data
  int single_stride = 1;  // window stride, target-environment data

  // sensing
  sensing::DetectionConfig detect;

  // predictor + training
  predictor::PredictorConfig pred;
  double lr = 0.05;
  int batch = 32;
  int pretrain_epochs = 30;
  int finetune_epochs = 40;
  int scratch_epochs = 90;
  int eval_subsample = 400;
  double val_fraction = 0.2;
  double finetune_fraction = 0.3;
};

ExperimentConfig parse_experiment_config(const core::Config& cfg);

// Writes the full synthetic dataset tree (segmentation frames, trajectories,
// beam labels, point clouds) under `out_dir`. mode is "single" or "multi".
void generate_dataset(const ExperimentConfig& cfg, const std::string& mode,
                      const std::string& out_dir);

// Aggregate metrics of one training arm.
struct ArmReport {
  std::string name;
  predictor::History history;           // per-epoch rows
  predictor::EvalMetrics final_test;    // on the full held-out test set
  int epochs_to_threshold = 0;
  double threshold = 0.0;
};

struct RunReport {
  std::vector<ArmReport> arms;
  double speedup = 0.0;  // scratch epochs-to-threshold / fine-tune epochs-to-threshold
};

// Pre-training on the multi-environment dataset; saves the best-validation
// checkpoint under out_dir and returns its report.
RunReport run_pretrain(const ExperimentConfig& cfg, const std::string& multi_dataset_dir,
                       const std::string& out_dir);

// Fine-tune (arm A) vs train-from-scratch (arm B) on the target environment.
RunReport run_transfer(const ExperimentConfig& cfg, const std::string& pretrained_dir,
                       const std::string& single_dataset_dir, const std::string& out_dir);

// history.csv per arm plus summary.json.
void emit_report(const RunReport& report, const std::string& out_dir);
RunReport parse_report(const std::string& out_dir);

// Dynamic scatterer maps and the per-track test report for one path.
void run_sense(const ExperimentConfig& cfg, const std::string& path_dir,
               const std::string& out_dir);

// Model evaluation on a dataset; writes metrics.json and returns the metrics.
predictor::EvalMetrics run_evaluate(const ExperimentConfig& cfg, const std::string& model_dir,
                                    const std::string& dataset_dir, const std::string& out_path);

// --- dataset access (shared by training, sensing, and tests) ---

struct PathOnDisk {
  std::string dir;
  int env_index = 0;
  int path_index = 0;
};

struct LoadedPath {
  int rows = 0;
  int cols = 0;
  int frames = 0;
  std::vector<std::uint16_t> class_grids;    // frames * rows * cols (noisy)
  std::vector<std::uint16_t> truth_grids;    // frames * rows * cols
  std::vector<core::Vec3> user_positions;
  // labels[frame * n_bs + b] = beam pair index (t_idx * N_r + r_idx)
  std::vector<std::uint16_t> labels;
  int n_bs = 0;
};

std::vector<PathOnDisk> list_dataset_paths(const std::string& dataset_dir);
LoadedPath load_path(const std::string& path_dir);

// Builds predictor samples from the given paths: windows of pooled dynamic
// maps, user positions and labels, plus one static blob per environment.
predictor::Dataset build_features(const ExperimentConfig& cfg, const std::string& dataset_dir,
                                  const std::vector<PathOnDisk>& paths, int stride);

}  // namespace beamsense::harness
