#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace beamsense::predictor {

struct PredictorConfig {
  // Encoder widths: [user, dynamic, static] features fuse per frame.
  int n_user = 12;
  int user_hidden = 32;
  int n_dyn = 128;
  int dyn_hidden = 128;
  int n_static = 116;
  int static_hidden = 64;

  // Dynamic maps are average-pooled to this coarse grid before encoding.
  int pool_rows = 18;
  int pool_cols = 27;

  // Pseudo-image dimensions (a, b, c); the static input flattens the
  // 3-channel offset tensor plus the occupancy grid.
  int static_dims[3] = {31, 21, 11};

  int rnn_hidden = 128;
  int window = 16;   // l
  int horizon = 8;   // label frame = last observed + horizon

  int n_beam_pairs = 256;  // N_t * N_r
  int n_bs = 2;            // B

  // User location normalization (factory dimensions).
  double norm_dims[3] = {60.0, 40.0, 20.0};

  int pool_in() const { return pool_rows * pool_cols; }
  int static_in() const { return static_dims[0] * static_dims[1] * static_dims[2] * 4; }
  int fused() const { return n_user + n_dyn + n_static; }
  int head_out() const { return n_beam_pairs * n_bs; }
};

struct Dense {
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
  int out = 0;
  int in = 0;
};

struct GruLayer {
  // Gate weights: w_* act on the input, u_* on the previous hidden state.
  std::vector<double> wz, uz, bz;
  std::vector<double> wr, ur, br;
  std::vector<double> wh, uh, bh;
  int hidden = 0;
  int in = 0;
};

// Freezable parameter groups; the default fine-tune spec freezes the first
// encoder layer of each branch plus both recurrent layers.
enum class Group : int {
  user_encoder_0 = 0,
  user_encoder_1,
  dyn_encoder_0,
  dyn_encoder_1,
  static_encoder_0,
  static_encoder_1,
  recurrent_0,
  recurrent_1,
  output_head,
  count
};
constexpr int kNumGroups = static_cast<int>(Group::count);

const char* group_name(Group g);
std::vector<Group> default_freeze_spec();

struct ModelParams {
  PredictorConfig cfg;
  Dense user0, user1;
  Dense dyn0, dyn1;
  Dense stat0, stat1;
  GruLayer rnn0, rnn1;
  Dense head;
  bool frozen[kNumGroups] = {};

  std::size_t parameter_count() const;
};

// One named tensor inside the model; `data` points into the live params.
struct TensorRef {
  std::string name;
  Group group;
  std::vector<double>* data;
  std::vector<std::int64_t> shape;
};
std::vector<TensorRef> tensor_registry(ModelParams& params);

ModelParams init_params(const PredictorConfig& cfg, core::Rng& rng);

// probs[pair * n_bs + bs]; every per-BS column sums to 1.
struct PredictionMatrix {
  int n_pairs = 0;
  int n_bs = 0;
  std::vector<double> probs;
};

// Training corpus stored in flat arenas. Per sample: `window` frames of
// pooled dynamic maps and user positions, one static blob per environment,
// and one optimal-beam-pair label per base station.
struct Dataset {
  int window = 0;
  int pool_in = 0;
  int n_bs = 0;
  std::vector<float> dyn;              // n * window * pool_in
  std::vector<double> user;            // n * window * 3
  std::vector<std::vector<double>> static_blobs;  // per environment, static_in each
  std::vector<std::int32_t> static_of; // n, index into static_blobs
  std::vector<std::uint16_t> labels;   // n * n_bs, beam pair index
  std::vector<std::int64_t> sample_ids;  // globally unique frame ids (leak checks)

  int size() const { return static_cast<int>(static_of.size()); }
};

PredictionMatrix forward(const ModelParams& params, const Dataset& data, int sample);

double cross_entropy(const PredictionMatrix& pred, const std::uint16_t* label_pairs);

// Mean-of-batch gradients with the same tensor layout as the model; frozen
// groups receive exactly zero.
struct Gradients {
  ModelParams tensors;  // same shapes, gradient values
};
Gradients gradient(const ModelParams& params, const Dataset& data,
                   const std::vector<int>& batch);

struct TrainConfig {
  double lr = 0.05;
  int epochs = 10;
  int batch = 32;
  std::uint64_t seed = 1;
  int eval_subsample = 0;  // 0 = evaluate on the full split
};

struct EvalMetrics {
  double loss = 0.0;
  double top1 = 0.0;
  double top5 = 0.0;
  double top10 = 0.0;
};

struct HistoryRow {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  double top1 = 0.0;
  double top5 = 0.0;
  double top10 = 0.0;
};
using History = std::vector<HistoryRow>;

EvalMetrics evaluate(const ModelParams& params, const Dataset& data, int max_samples = 0);

// Called after every epoch with the validation metrics (when a validation
// split is present); used for best-checkpoint selection.
using EpochHook = std::function<void(int epoch, const ModelParams&, const EvalMetrics&)>;

// Mini-batch SGD; deterministic given the seed. Throws TrainingError when
// the loss diverges to NaN.
History train(ModelParams& params, const Dataset& train_set, const Dataset& val_set,
              const TrainConfig& cfg);
History train(ModelParams& params, const Dataset& train_set, const Dataset& val_set,
              const TrainConfig& cfg, const EpochHook& hook);

// Applies the freeze spec, then trains only the thawed groups.
History fine_tune(ModelParams& params, const std::vector<Group>& freeze_spec,
                  const Dataset& tune_set, const Dataset& val_set, const TrainConfig& cfg);

// Fraction of (sample, BS) pairs whose true beam index ranks in the top k;
// rank ties resolve toward the lower beam index.
double top_k_accuracy(const std::vector<PredictionMatrix>& preds,
                      const std::vector<std::vector<std::uint16_t>>& labels, int k);

// Model file pair: manifest.json (layer names, shapes, frozen flags, seed,
// config) and params.bin (little-endian f64 in manifest order).
void save_model(const ModelParams& params, const std::string& dir, std::uint64_t seed);
ModelParams load_model(const std::string& dir);

}  // namespace beamsense::predictor
