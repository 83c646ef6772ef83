#include <algorithm>
#include <cmath>
#include <filesystem>

#include "core/errors.hpp"
#include "harness/harness.hpp"

namespace beamsense::harness {

namespace {

predictor::Dataset subset(const predictor::Dataset& data, const std::vector<int>& idx) {
  predictor::Dataset out;
  out.window = data.window;
  out.pool_in = data.pool_in;
  out.n_bs = data.n_bs;
  out.static_blobs = data.static_blobs;
  const std::size_t dyn_stride = static_cast<std::size_t>(data.window) * data.pool_in;
  const std::size_t user_stride = static_cast<std::size_t>(data.window) * 3;
  for (const int i : idx) {
    out.dyn.insert(out.dyn.end(), data.dyn.begin() + static_cast<std::ptrdiff_t>(i * dyn_stride),
                   data.dyn.begin() + static_cast<std::ptrdiff_t>((i + 1) * dyn_stride));
    out.user.insert(out.user.end(),
                    data.user.begin() + static_cast<std::ptrdiff_t>(i * user_stride),
                    data.user.begin() + static_cast<std::ptrdiff_t>((i + 1) * user_stride));
    out.labels.insert(out.labels.end(),
                      data.labels.begin() + static_cast<std::ptrdiff_t>(i * data.n_bs),
                      data.labels.begin() + static_cast<std::ptrdiff_t>((i + 1) * data.n_bs));
    out.static_of.push_back(data.static_of[static_cast<std::size_t>(i)]);
    out.sample_ids.push_back(data.sample_ids[static_cast<std::size_t>(i)]);
  }
  return out;
}

int first_epoch_reaching(const predictor::History& history, double threshold) {
  int last_epoch = 0;
  for (const auto& row : history) {
    if (row.split != "val") continue;
    last_epoch = std::max(last_epoch, row.epoch);
    if (row.top1 >= threshold) return row.epoch;
  }
  return last_epoch;  // never reached: report the full run length
}

}  // namespace

RunReport run_pretrain(const ExperimentConfig& cfg, const std::string& multi_dataset_dir,
                       const std::string& out_dir) {
  const std::vector<PathOnDisk> all_paths = list_dataset_paths(multi_dataset_dir);

  // 80/20 train/validation split by path: every k-th path validates.
  const int every = std::max(2, static_cast<int>(std::lround(1.0 / cfg.val_fraction)));
  std::vector<PathOnDisk> train_paths, val_paths;
  for (std::size_t i = 0; i < all_paths.size(); ++i) {
    if (static_cast<int>(i) % every == every - 1)
      val_paths.push_back(all_paths[i]);
    else
      train_paths.push_back(all_paths[i]);
  }
  if (val_paths.empty()) {
    val_paths.push_back(train_paths.back());
    train_paths.pop_back();
  }

  const predictor::Dataset train_set =
      build_features(cfg, multi_dataset_dir, train_paths, cfg.multi_stride);
  const predictor::Dataset val_set =
      build_features(cfg, multi_dataset_dir, val_paths, cfg.multi_stride);

  core::Rng init_rng(cfg.seed);
  core::Rng model_rng = init_rng.fork("pretrain_init");
  predictor::ModelParams params = predictor::init_params(cfg.pred, model_rng);

  predictor::TrainConfig tc;
  tc.lr = cfg.lr;
  tc.batch = cfg.batch;
  tc.epochs = cfg.pretrain_epochs;
  tc.seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
  tc.eval_subsample = cfg.eval_subsample;

  // Keep the checkpoint with the best validation Top-1.
  predictor::ModelParams best = params;
  double best_top1 = -1.0;
  const predictor::History history = predictor::train(
      params, train_set, val_set, tc,
      [&best, &best_top1](int, const predictor::ModelParams& p, const predictor::EvalMetrics& m) {
        if (m.top1 > best_top1) {
          best_top1 = m.top1;
          best = p;
        }
      });

  std::filesystem::create_directories(out_dir);
  predictor::save_model(best, out_dir, cfg.seed);

  RunReport report;
  ArmReport arm;
  arm.name = "pretrain";
  arm.history = history;
  arm.final_test = predictor::evaluate(best, val_set, 0);
  arm.threshold = best_top1;
  arm.epochs_to_threshold = first_epoch_reaching(history, best_top1);
  report.arms.push_back(std::move(arm));
  return report;
}

RunReport run_transfer(const ExperimentConfig& cfg, const std::string& pretrained_dir,
                       const std::string& single_dataset_dir, const std::string& out_dir) {
  const std::vector<PathOnDisk> paths = list_dataset_paths(single_dataset_dir);
  const predictor::Dataset all =
      build_features(cfg, single_dataset_dir, paths, cfg.single_stride);

  // Per-path prefix split into tuning and test windows, with a guard gap of
  // window+horizon samples so no frame lands in both splits.
  std::vector<int> tune_idx, test_idx;
  const int gap_frames = cfg.pred.window + cfg.pred.horizon;
  std::size_t begin = 0;
  while (begin < all.sample_ids.size()) {
    const std::int64_t path_key = all.sample_ids[begin] / 1000000;
    std::size_t end = begin;
    while (end < all.sample_ids.size() && all.sample_ids[end] / 1000000 == path_key) ++end;
    const std::size_t count = end - begin;
    const std::size_t n_tune = static_cast<std::size_t>(cfg.finetune_fraction * count);
    for (std::size_t i = 0; i < n_tune; ++i) tune_idx.push_back(static_cast<int>(begin + i));
    if (n_tune > 0) {
      const std::int64_t cutoff = all.sample_ids[begin + n_tune - 1] + gap_frames;
      for (std::size_t i = n_tune; i < count; ++i) {
        if (all.sample_ids[begin + i] > cutoff) test_idx.push_back(static_cast<int>(begin + i));
      }
    } else {
      for (std::size_t i = 0; i < count; ++i) test_idx.push_back(static_cast<int>(begin + i));
    }
    begin = end;
  }
  if (tune_idx.empty() || test_idx.empty())
    throw core::ConfigError("run_transfer: split produced an empty tune or test set");

  const predictor::Dataset tune_set = subset(all, tune_idx);
  const predictor::Dataset test_set = subset(all, test_idx);

  predictor::TrainConfig tc;
  tc.lr = cfg.lr;
  tc.batch = cfg.batch;
  tc.seed = cfg.seed ^ 0xc2b2ae3d27d4eb4fULL;
  tc.eval_subsample = cfg.eval_subsample;

  // Arm B: train from scratch on the tuning data.
  core::Rng init_rng(cfg.seed);
  core::Rng scratch_rng = init_rng.fork("scratch_init");
  predictor::ModelParams scratch = predictor::init_params(cfg.pred, scratch_rng);
  tc.epochs = cfg.scratch_epochs;
  const predictor::History scratch_history = predictor::train(scratch, tune_set, test_set, tc);

  // Arm A: fine-tune the pre-trained model with the default freeze spec.
  predictor::ModelParams tuned = predictor::load_model(pretrained_dir);
  tc.epochs = cfg.finetune_epochs;
  const predictor::History tuned_history = predictor::fine_tune(
      tuned, predictor::default_freeze_spec(), tune_set, test_set, tc);

  // Threshold: the scratch arm's final Top-1 on the evaluation series.
  double scratch_final_top1 = 0.0;
  for (const auto& row : scratch_history) {
    if (row.split == "val" && row.epoch == cfg.scratch_epochs) scratch_final_top1 = row.top1;
  }

  RunReport report;
  ArmReport fine;
  fine.name = "finetune";
  fine.history = tuned_history;
  fine.final_test = predictor::evaluate(tuned, test_set, 0);
  fine.threshold = scratch_final_top1;
  fine.epochs_to_threshold = first_epoch_reaching(tuned_history, scratch_final_top1);
  ArmReport base;
  base.name = "scratch";
  base.history = scratch_history;
  base.final_test = predictor::evaluate(scratch, test_set, 0);
  base.threshold = scratch_final_top1;
  base.epochs_to_threshold = first_epoch_reaching(scratch_history, scratch_final_top1);
  report.speedup = fine.epochs_to_threshold > 0
                       ? static_cast<double>(base.epochs_to_threshold) / fine.epochs_to_threshold
                       : 0.0;
  report.arms.push_back(std::move(fine));
  report.arms.push_back(std::move(base));

  std::filesystem::create_directories(out_dir);
  predictor::save_model(tuned, out_dir + "/model", cfg.seed);
  emit_report(report, out_dir);
  return report;
}

}  // namespace beamsense::harness
