#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "core/binio.hpp"
#include "core/errors.hpp"
#include "harness/harness.hpp"

namespace beamsense::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string zero_pad(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", v);
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

json layout_to_json(const scene::FactoryLayout& layout, int user_instance_id) {
  json j;
  j["length_m"] = layout.length_m;
  j["width_m"] = layout.width_m;
  j["height_m"] = layout.height_m;
  j["crossbeam_mode"] = layout.crossbeam_mode;
  json bs = json::array();
  for (const auto& p : layout.bs_positions) bs.push_back({p.x, p.y, p.z});
  j["bs_positions"] = bs;
  json objects = json::array();
  for (const auto& obj : layout.objects) {
    json o;
    o["instance_id"] = obj.instance_id;
    o["class_id"] = obj.class_id;
    o["is_dynamic"] = obj.is_dynamic;
    objects.push_back(o);
  }
  j["objects"] = objects;
  j["user_instance_id"] = user_instance_id;
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw core::IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

struct PathWriter {
  std::ofstream frames;
  std::ofstream truth;
  std::ofstream trajectory;
  std::ofstream labels;
  std::ofstream channels;

  explicit PathWriter(const std::string& dir, bool dump_channels)
      : frames(dir + "/frames.bin", std::ios::binary),
        truth(dir + "/truth.bin", std::ios::binary),
        trajectory(dir + "/trajectory.csv"),
        labels(dir + "/labels.csv") {
    if (!frames || !truth || !trajectory || !labels)
      throw core::IoError("cannot open path outputs under " + dir);
    trajectory << "frame,x,y,z\n";
    labels << "frame,bs_index,t_idx,r_idx,rate_bps_hz\n";
    if (dump_channels) {
      channels.open(dir + "/channels.bin", std::ios::binary);
      if (!channels) throw core::IoError("cannot open channels.bin under " + dir);
    }
  }
};

void generate_path(const ExperimentConfig& cfg, const scene::FactoryLayout& layout,
                   const std::string& dir, int env_index, int path_index, core::Rng& master) {
  fs::create_directories(dir);

  core::Rng path_rng = master.fork("path", static_cast<std::uint64_t>(env_index),
                                   static_cast<std::uint64_t>(path_index));
  const scene::Trajectory traj = scene::simulate_trajectory(layout, cfg.path, cfg.motion, path_rng);
  const scene::FactoryLayout with_user = scene::append_user_vehicle(layout, cfg.path.user_start);
  const int user_idx = static_cast<int>(with_user.objects.size()) - 1;

  core::Rng noise_rng = master.fork("noise", static_cast<std::uint64_t>(env_index),
                                    static_cast<std::uint64_t>(path_index));

  const channel::Codebook cb_t = channel::build_dft_codebook(cfg.upa_t);
  const channel::Codebook cb_r = channel::build_dft_codebook(cfg.upa_r);

  PathWriter out(dir, cfg.dump_channels);
  const int n_frames = static_cast<int>(traj.states_per_frame.size());
  for (int f = 0; f < n_frames; ++f) {
    const auto& states = traj.states_per_frame[f];
    scene::SegMapFrame frame = scene::rasterize(with_user, states, cfg.raster);
    frame.frame_index = f;
    const scene::SegMapFrame noisy = scene::inject_label_noise(frame, cfg.p_flip, noise_rng);

    core::append_binary(out.frames, noisy.class_grid.data(), noisy.class_grid.size());
    core::append_binary(out.truth, frame.truth_instance_grid.data(),
                        frame.truth_instance_grid.size());

    const core::Vec3 rx = traj.user_positions[static_cast<std::size_t>(f)];
    out.trajectory << f << ',' << fmt_double(rx.x) << ',' << fmt_double(rx.y) << ','
                   << fmt_double(rx.z) << "\n";

    const channel::TraceGeometry geom = channel::build_trace_geometry(with_user, states, user_idx);
    for (std::size_t b = 0; b < with_user.bs_positions.size(); ++b) {
      const channel::PathSet paths =
          channel::trace_paths(geom, with_user.bs_positions[b], rx, cfg.trace);
      const channel::PathSet usable = channel::rebase_delays(paths, cfg.ofdm);
      const channel::ChannelTensor ch =
          channel::assemble_channel(usable, cfg.upa_t, cfg.upa_r, cfg.ofdm);
      const channel::BeamSelection sel = channel::optimal_beam_pair(ch, cb_r, cb_t, cfg.ofdm);
      out.labels << f << ',' << b << ',' << sel.t_idx << ',' << sel.r_idx << ','
                 << fmt_double(sel.rate) << "\n";
      if (cfg.dump_channels) {
        std::vector<double> interleaved;
        interleaved.reserve(ch.entries.size() * 2);
        for (const auto& c : ch.entries) {
          interleaved.push_back(c.real());
          interleaved.push_back(c.imag());
        }
        core::append_binary(out.channels, interleaved.data(), interleaved.size());
      }
    }
  }

  json meta;
  meta["rows"] = cfg.raster.rows;
  meta["cols"] = cfg.raster.cols;
  meta["Q"] = scene::kNumClasses;
  meta["seed"] = cfg.seed;
  meta["frame_interval_ms"] = 50.0;
  meta["frames"] = n_frames;
  meta["n_bs"] = with_user.bs_positions.size();
  meta["env_index"] = env_index;
  meta["path_index"] = path_index;
  meta["user_instance_id"] = with_user.objects.back().instance_id;
  meta["start"] = {cfg.path.user_start.x, cfg.path.user_start.y};
  meta["goal"] = {cfg.path.user_goal.x, cfg.path.user_goal.y};
  meta["beam_pair_index"] = "t_idx * n_rx_beams + r_idx";
  meta["n_tx_beams"] = cfg.upa_t.size();
  meta["n_rx_beams"] = cfg.upa_r.size();
  write_json(meta, dir + "/meta.json");

  if (cfg.dump_channels) {
    json cm;
    cm["K"] = cfg.ofdm.subcarriers;
    cm["N_r"] = cfg.upa_r.size();
    cm["N_t"] = cfg.upa_t.size();
    cm["frames"] = n_frames;
    cm["n_bs"] = with_user.bs_positions.size();
    cm["layout"] = "frame-major, bs-major, interleaved re/im f64";
    write_json(cm, dir + "/channels_meta.json");
  }
}

}  // namespace

void generate_dataset(const ExperimentConfig& cfg, const std::string& mode,
                      const std::string& out_dir) {
  if (mode != "single" && mode != "multi")
    throw core::ParameterError("generate_dataset: mode must be 'single' or 'multi'");
  const bool single = mode == "single";
  const int n_envs = single ? 1 : cfg.n_source_envs;
  const int n_paths = single ? cfg.single_paths : cfg.paths_per_env;

  fs::create_directories(out_dir);
  core::Rng master(cfg.seed);

  json root;
  root["mode"] = mode;
  root["seed"] = cfg.seed;
  root["envs"] = n_envs;
  root["paths_per_env"] = n_paths;
  root["rows"] = cfg.raster.rows;
  root["cols"] = cfg.raster.cols;
  root["Q"] = scene::kNumClasses;
  root["p_flip"] = cfg.p_flip;
  write_json(root, out_dir + "/meta.json");

  for (int e = 0; e < n_envs; ++e) {
    core::Rng env_rng = master.fork("env", static_cast<std::uint64_t>(e));
    const scene::FactoryLayout layout = scene::sample_environment(cfg.env, env_rng);
    const std::string env_dir = out_dir + "/env_" + zero_pad(e);
    fs::create_directories(env_dir);

    core::Rng pc_rng = master.fork("pointcloud", static_cast<std::uint64_t>(e));
    const scene::PointCloud cloud = scene::sample_point_cloud(layout, cfg.pc_density, pc_rng);
    std::vector<double> flat;
    flat.reserve(cloud.points.size() * 3);
    for (const auto& p : cloud.points) {
      flat.push_back(p.x);
      flat.push_back(p.y);
      flat.push_back(p.z);
    }
    core::write_binary(env_dir + "/points.bin", flat);

    json env_meta = layout_to_json(layout, scene::next_free_instance_id(layout));
    env_meta["points"] = cloud.points.size();
    env_meta["pc_density"] = cfg.pc_density;
    write_json(env_meta, env_dir + "/meta.json");

    for (int p = 0; p < n_paths; ++p) {
      generate_path(cfg, layout, env_dir + "/path_" + zero_pad(p), e, p, master);
    }
  }
}

}  // namespace beamsense::harness
