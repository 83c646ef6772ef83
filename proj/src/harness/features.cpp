#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/binio.hpp"
#include "core/errors.hpp"
#include "harness/harness.hpp"

namespace beamsense::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<PathOnDisk> list_dataset_paths(const std::string& dataset_dir) {
  std::vector<PathOnDisk> out;
  std::vector<std::string> env_dirs;
  for (const auto& entry : fs::directory_iterator(dataset_dir)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("env_", 0) == 0)
      env_dirs.push_back(entry.path().string());
  }
  std::sort(env_dirs.begin(), env_dirs.end());
  for (std::size_t e = 0; e < env_dirs.size(); ++e) {
    std::vector<std::string> path_dirs;
    for (const auto& entry : fs::directory_iterator(env_dirs[e])) {
      if (entry.is_directory() && entry.path().filename().string().rfind("path_", 0) == 0)
        path_dirs.push_back(entry.path().string());
    }
    std::sort(path_dirs.begin(), path_dirs.end());
    for (std::size_t p = 0; p < path_dirs.size(); ++p) {
      out.push_back({path_dirs[p], static_cast<int>(e), static_cast<int>(p)});
    }
  }
  if (out.empty()) throw core::IoError("no env_*/path_* directories under " + dataset_dir);
  return out;
}

LoadedPath load_path(const std::string& path_dir) {
  std::ifstream mf(path_dir + "/meta.json");
  if (!mf) throw core::IoError("cannot read " + path_dir + "/meta.json");
  const json meta = json::parse(mf);

  LoadedPath lp;
  lp.rows = meta.at("rows");
  lp.cols = meta.at("cols");
  lp.frames = meta.at("frames");
  lp.n_bs = meta.at("n_bs");
  const int n_rx_beams = meta.at("n_rx_beams");

  lp.class_grids = core::read_binary<std::uint16_t>(path_dir + "/frames.bin");
  lp.truth_grids = core::read_binary<std::uint16_t>(path_dir + "/truth.bin");
  const std::size_t expected =
      static_cast<std::size_t>(lp.frames) * lp.rows * lp.cols;
  if (lp.class_grids.size() != expected || lp.truth_grids.size() != expected)
    throw core::IoError("frame file size mismatch under " + path_dir);

  // trajectory.csv: frame,x,y,z
  std::ifstream tf(path_dir + "/trajectory.csv");
  if (!tf) throw core::IoError("cannot read " + path_dir + "/trajectory.csv");
  std::string line;
  std::getline(tf, line);  // header
  lp.user_positions.resize(static_cast<std::size_t>(lp.frames));
  while (std::getline(tf, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    const int frame = std::stoi(field);
    core::Vec3 p;
    std::getline(ss, field, ',');
    p.x = std::stod(field);
    std::getline(ss, field, ',');
    p.y = std::stod(field);
    std::getline(ss, field, ',');
    p.z = std::stod(field);
    if (frame < 0 || frame >= lp.frames) throw core::IoError("trajectory frame out of range");
    lp.user_positions[static_cast<std::size_t>(frame)] = p;
  }

  // labels.csv: frame,bs_index,t_idx,r_idx,rate_bps_hz
  std::ifstream lf(path_dir + "/labels.csv");
  if (!lf) throw core::IoError("cannot read " + path_dir + "/labels.csv");
  std::getline(lf, line);  // header
  lp.labels.assign(static_cast<std::size_t>(lp.frames) * lp.n_bs, 0);
  while (std::getline(lf, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    const int frame = std::stoi(field);
    std::getline(ss, field, ',');
    const int bs = std::stoi(field);
    std::getline(ss, field, ',');
    const int t_idx = std::stoi(field);
    std::getline(ss, field, ',');
    const int r_idx = std::stoi(field);
    lp.labels[static_cast<std::size_t>(frame) * lp.n_bs + bs] =
        static_cast<std::uint16_t>(t_idx * n_rx_beams + r_idx);
  }
  return lp;
}

namespace {

// Static blob: voxelized point cloud flattened as [offsets | occupancy],
// offsets scaled into roughly [-1, 1] by the half cell diagonal.
std::vector<double> build_static_blob(const ExperimentConfig& cfg, const std::string& env_dir) {
  const std::vector<double> flat = core::read_binary<double>(env_dir + "/points.bin");
  scene::PointCloud cloud;
  cloud.points.resize(flat.size() / 3);
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    cloud.points[i] = {flat[i * 3], flat[i * 3 + 1], flat[i * 3 + 2]};

  const core::Box3 cube{{0.0, 0.0, 0.0},
                        {cfg.pred.norm_dims[0], cfg.pred.norm_dims[1], cfg.pred.norm_dims[2]}};
  const int a = cfg.pred.static_dims[0], b = cfg.pred.static_dims[1], c = cfg.pred.static_dims[2];
  const sensing::PseudoImage img = sensing::voxelize(cloud, cube, a, b, c);

  const double half_diag = 0.5 * std::sqrt(std::pow((cube.hi.x - cube.lo.x) / a, 2) +
                                           std::pow((cube.hi.y - cube.lo.y) / b, 2) +
                                           std::pow((cube.hi.z - cube.lo.z) / c, 2));
  std::vector<double> blob;
  blob.reserve(img.grid.size() + img.occupancy.size());
  for (const double v : img.grid) blob.push_back(v / half_diag);
  for (const std::uint8_t o : img.occupancy) blob.push_back(static_cast<double>(o));
  return blob;
}

}  // namespace

predictor::Dataset build_features(const ExperimentConfig& cfg, const std::string& dataset_dir,
                                  const std::vector<PathOnDisk>& paths, int stride) {
  if (stride < 1) throw core::ParameterError("build_features: stride must be >= 1");
  const int L = cfg.pred.window;
  const int horizon = cfg.pred.horizon;
  const int pool_in = cfg.pred.pool_in();

  predictor::Dataset data;
  data.window = L;
  data.pool_in = pool_in;
  data.n_bs = cfg.pred.n_bs;

  // One static blob per environment referenced by the given paths.
  std::vector<int> env_blob_index;
  for (const auto& p : paths) {
    while (static_cast<int>(env_blob_index.size()) <= p.env_index) env_blob_index.push_back(-1);
    if (env_blob_index[static_cast<std::size_t>(p.env_index)] < 0) {
      const std::string env_dir = fs::path(p.dir).parent_path().string();
      data.static_blobs.push_back(build_static_blob(cfg, env_dir));
      env_blob_index[static_cast<std::size_t>(p.env_index)] =
          static_cast<int>(data.static_blobs.size()) - 1;
    }
  }

  for (const auto& pod : paths) {
    const LoadedPath lp = load_path(pod.dir);
    if (lp.rows % cfg.pred.pool_rows != 0 || lp.cols % cfg.pred.pool_cols != 0)
      throw core::ConfigError("build_features: raster not divisible by pool grid");
    const int block_r = lp.rows / cfg.pred.pool_rows;
    const int block_c = lp.cols / cfg.pred.pool_cols;
    const double block_px = static_cast<double>(block_r) * block_c;

    // Per-frame instance extraction once; windows reuse it.
    std::vector<sensing::FrameInstances> instances;
    instances.reserve(static_cast<std::size_t>(lp.frames));
    scene::SegMapFrame frame;
    frame.rows = lp.rows;
    frame.cols = lp.cols;
    for (int f = 0; f < lp.frames; ++f) {
      const std::size_t offset = static_cast<std::size_t>(f) * lp.rows * lp.cols;
      frame.class_grid.assign(lp.class_grids.begin() + static_cast<std::ptrdiff_t>(offset),
                              lp.class_grids.begin() +
                                  static_cast<std::ptrdiff_t>(offset + static_cast<std::size_t>(lp.rows) * lp.cols));
      instances.push_back(sensing::extract_frame_instances(frame, cfg.detect.mu));
    }

    for (int w = 0; w + L - 1 + horizon < lp.frames; w += stride) {
      std::vector<const sensing::FrameInstances*> views;
      views.reserve(static_cast<std::size_t>(L));
      for (int t = 0; t < L; ++t) views.push_back(&instances[static_cast<std::size_t>(w + t)]);
      const sensing::DetectionResult det = sensing::detect_from_instances(views, cfg.detect);

      // Pool the dynamic pixels of each window frame to the coarse grid.
      const std::size_t base = data.dyn.size();
      data.dyn.resize(base + static_cast<std::size_t>(L) * pool_in, 0.0f);
      for (const auto& tr : det.tracks) {
        if (!tr.result.is_dynamic) continue;
        for (int t = 0; t < L; ++t) {
          float* pooled = data.dyn.data() + base + static_cast<std::size_t>(t) * pool_in;
          for (const std::uint32_t px : tr.pixels_per_frame[static_cast<std::size_t>(t)]) {
            const int r = static_cast<int>(px) / lp.cols;
            const int c = static_cast<int>(px) % lp.cols;
            pooled[(r / block_r) * cfg.pred.pool_cols + (c / block_c)] +=
                static_cast<float>(1.0 / block_px);
          }
        }
      }

      for (int t = 0; t < L; ++t) {
        const core::Vec3 pos = lp.user_positions[static_cast<std::size_t>(w + t)];
        data.user.push_back(pos.x);
        data.user.push_back(pos.y);
        data.user.push_back(pos.z);
      }

      const int label_frame = w + L - 1 + horizon;
      for (int b = 0; b < lp.n_bs; ++b)
        data.labels.push_back(lp.labels[static_cast<std::size_t>(label_frame) * lp.n_bs + b]);

      data.static_of.push_back(env_blob_index[static_cast<std::size_t>(pod.env_index)]);
      data.sample_ids.push_back(
          (static_cast<std::int64_t>(pod.env_index) * 1000 + pod.path_index) * 1000000 +
          label_frame);
    }
  }
  return data;
}

}  // namespace beamsense::harness
