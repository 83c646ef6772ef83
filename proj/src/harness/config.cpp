#include "core/errors.hpp"
#include "harness/harness.hpp"

namespace beamsense::harness {

ExperimentConfig parse_experiment_config(const core::Config& cfg) {
  ExperimentConfig e;
  e.seed = cfg.get_u64("seed", e.seed);

  e.raster.rows = static_cast<int>(cfg.get_i64("scene.raster_rows", e.raster.rows));
  e.raster.cols = static_cast<int>(cfg.get_i64("scene.raster_cols", e.raster.cols));
  e.p_flip = cfg.get_f64("scene.p_flip", e.p_flip);
  e.pc_density = cfg.get_f64("scene.pc_density", e.pc_density);
  e.env.n_arms = static_cast<int>(cfg.get_i64("scene.n_arms", e.env.n_arms));
  e.env.n_controllers = static_cast<int>(cfg.get_i64("scene.n_controllers", e.env.n_controllers));
  e.env.n_buckets = static_cast<int>(cfg.get_i64("scene.n_buckets", e.env.n_buckets));
  e.env.n_extra_vehicles =
      static_cast<int>(cfg.get_i64("scene.n_extra_vehicles", e.env.n_extra_vehicles));
  e.path.user_start.x = cfg.get_f64("scene.user_start_x", e.path.user_start.x);
  e.path.user_start.y = cfg.get_f64("scene.user_start_y", e.path.user_start.y);
  e.path.user_goal.x = cfg.get_f64("scene.user_goal_x", e.path.user_goal.x);
  e.path.user_goal.y = cfg.get_f64("scene.user_goal_y", e.path.user_goal.y);
  e.path.min_frames = static_cast<int>(cfg.get_i64("scene.frame_min", e.path.min_frames));
  e.path.max_frames = static_cast<int>(cfg.get_i64("scene.frame_max", e.path.max_frames));
  e.path.frame_cap = static_cast<int>(cfg.get_i64("scene.frame_cap", e.path.frame_cap));

  e.upa_t.nx = static_cast<int>(cfg.get_i64("channel.tx_nx", e.upa_t.nx));
  e.upa_t.ny = static_cast<int>(cfg.get_i64("channel.tx_ny", e.upa_t.ny));
  e.upa_r.nx = static_cast<int>(cfg.get_i64("channel.rx_nx", e.upa_r.nx));
  e.upa_r.ny = static_cast<int>(cfg.get_i64("channel.rx_ny", e.upa_r.ny));
  e.ofdm.carrier_hz = cfg.get_f64("channel.carrier_hz", e.ofdm.carrier_hz);
  e.ofdm.subcarriers = static_cast<int>(cfg.get_i64("channel.subcarriers", e.ofdm.subcarriers));
  e.ofdm.cyclic_prefix =
      static_cast<int>(cfg.get_i64("channel.cyclic_prefix", e.ofdm.cyclic_prefix));
  e.ofdm.sample_interval_s = cfg.get_f64("channel.sample_interval_s", e.ofdm.sample_interval_s);
  e.ofdm.rolloff = cfg.get_f64("channel.rolloff", e.ofdm.rolloff);
  e.ofdm.tx_power_per_subcarrier =
      cfg.get_f64("channel.tx_power_per_subcarrier", e.ofdm.tx_power_per_subcarrier);
  e.ofdm.noise_var = cfg.get_f64("channel.noise_var", e.ofdm.noise_var);
  e.trace.max_bounce = static_cast<int>(cfg.get_i64("channel.max_bounce", e.trace.max_bounce));
  e.trace.r_max = static_cast<int>(cfg.get_i64("channel.r_max", e.trace.r_max));
  e.trace.carrier_hz = e.ofdm.carrier_hz;
  e.dump_channels = cfg.get_bool("channel.dump_channels", e.dump_channels);

  e.n_source_envs = static_cast<int>(cfg.get_i64("multi.envs", e.n_source_envs));
  e.paths_per_env = static_cast<int>(cfg.get_i64("multi.paths_per_env", e.paths_per_env));
  e.single_paths = static_cast<int>(cfg.get_i64("single.paths", e.single_paths));
  e.multi_stride = static_cast<int>(cfg.get_i64("sample.multi_stride", e.multi_stride));
  e.single_stride = static_cast<int>(cfg.get_i64("sample.single_stride", e.single_stride));

  e.detect.mu = cfg.get_f64("sense.mu", e.detect.mu);
  e.detect.lags = static_cast<int>(cfg.get_i64("sense.lags", e.detect.lags));
  e.detect.alpha = cfg.get_f64("sense.alpha", e.detect.alpha);

  e.pred.user_hidden = static_cast<int>(cfg.get_i64("predictor.user_hidden", e.pred.user_hidden));
  e.pred.dyn_hidden = static_cast<int>(cfg.get_i64("predictor.dyn_hidden", e.pred.dyn_hidden));
  e.pred.static_hidden =
      static_cast<int>(cfg.get_i64("predictor.static_hidden", e.pred.static_hidden));
  e.pred.rnn_hidden = static_cast<int>(cfg.get_i64("predictor.rnn_hidden", e.pred.rnn_hidden));
  e.pred.pool_rows = static_cast<int>(cfg.get_i64("predictor.pool_rows", e.pred.pool_rows));
  e.pred.pool_cols = static_cast<int>(cfg.get_i64("predictor.pool_cols", e.pred.pool_cols));
  e.pred.window = static_cast<int>(cfg.get_i64("predictor.window", e.pred.window));
  e.pred.horizon = static_cast<int>(cfg.get_i64("predictor.horizon", e.pred.horizon));
  e.pred.n_bs = 2;
  e.pred.n_beam_pairs = e.upa_t.size() * e.upa_r.size();
  e.pred.norm_dims[0] = 60.0;
  e.pred.norm_dims[1] = 40.0;
  e.pred.norm_dims[2] = 20.0;

  e.lr = cfg.get_f64("train.lr", e.lr);
  e.batch = static_cast<int>(cfg.get_i64("train.batch", e.batch));
  e.pretrain_epochs = static_cast<int>(cfg.get_i64("train.pretrain_epochs", e.pretrain_epochs));
  e.finetune_epochs = static_cast<int>(cfg.get_i64("train.finetune_epochs", e.finetune_epochs));
  e.scratch_epochs = static_cast<int>(cfg.get_i64("train.scratch_epochs", e.scratch_epochs));
  e.eval_subsample = static_cast<int>(cfg.get_i64("train.eval_subsample", e.eval_subsample));
  e.val_fraction = cfg.get_f64("split.val_fraction", e.val_fraction);
  e.finetune_fraction = cfg.get_f64("split.finetune_fraction", e.finetune_fraction);

  if (!(e.finetune_fraction > 0.0 && e.finetune_fraction < 1.0))
    throw core::ConfigError("split.finetune_fraction must be in (0,1)");
  if (!(e.val_fraction > 0.0 && e.val_fraction < 1.0))
    throw core::ConfigError("split.val_fraction must be in (0,1)");
  if (e.raster.rows % e.pred.pool_rows != 0 || e.raster.cols % e.pred.pool_cols != 0)
    throw core::ConfigError("raster resolution must be divisible by the predictor pool grid");
  return e;
}

}  // namespace beamsense::harness
