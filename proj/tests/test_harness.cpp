#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "channel/channel.hpp"
#include "core/binio.hpp"
#include "core/config.hpp"
#include "harness/harness.hpp"

using namespace beamsense;
namespace fs = std::filesystem;

namespace {

// Tiny configuration: short paths, low resolution, small arrays.
core::Config tiny_config_text() {
  return core::Config::from_string(R"(
seed = 11
scene.raster_rows = 36
scene.raster_cols = 54
scene.frame_min = 40
scene.frame_max = 120
scene.user_start_x = 48
scene.user_start_y = 5
scene.user_goal_x = 44
scene.user_goal_y = 5
scene.pc_density = 1.0
channel.tx_nx = 4
channel.tx_ny = 2
channel.rx_nx = 2
channel.rx_ny = 2
channel.subcarriers = 16
predictor.pool_rows = 18
predictor.pool_cols = 27
predictor.user_hidden = 16
predictor.dyn_hidden = 16
predictor.static_hidden = 8
predictor.rnn_hidden = 16
predictor.window = 16
predictor.horizon = 8
multi.envs = 2
multi.paths_per_env = 2
single.paths = 2
sample.multi_stride = 2
sample.single_stride = 2
train.batch = 8
train.eval_subsample = 0
split.val_fraction = 0.25
)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> dataset_files(const std::string& root) {
  std::vector<std::string> rel;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) rel.push_back(fs::relative(entry.path(), root).string());
  }
  std::sort(rel.begin(), rel.end());
  return rel;
}

struct TempDir {
  fs::path dir;
  explicit TempDir(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string str() const { return dir.string(); }
};

}  // namespace

TEST_CASE("dataset generation writes the declared tree and is byte-deterministic") {
  auto cfg = harness::parse_experiment_config(tiny_config_text());
  cfg.dump_channels = true;

  TempDir a("bs_ds_a"), b("bs_ds_b");
  harness::generate_dataset(cfg, "single", a.str());
  harness::generate_dataset(cfg, "single", b.str());

  const auto files = dataset_files(a.str());
  CHECK(files == dataset_files(b.str()));
  for (const auto& f : files) {
    CHECK(read_file(a.dir / f) == read_file(b.dir / f));
  }

  for (const char* expected :
       {"meta.json", "env_000/meta.json", "env_000/points.bin", "env_000/path_000/frames.bin",
        "env_000/path_000/truth.bin", "env_000/path_000/trajectory.csv",
        "env_000/path_000/labels.csv", "env_000/path_000/meta.json",
        "env_000/path_000/channels.bin", "env_000/path_000/channels_meta.json"}) {
    CHECK(fs::exists(a.dir / expected));
  }

  SUBCASE("stored beam labels are reproducible from the dumped channels") {
    const auto lp = harness::load_path((a.dir / "env_000/path_000").string());
    const auto raw = core::read_binary<double>((a.dir / "env_000/path_000/channels.bin").string());
    const auto cb_t = channel::build_dft_codebook(cfg.upa_t);
    const auto cb_r = channel::build_dft_codebook(cfg.upa_r);
    const int K = cfg.ofdm.subcarriers;
    const int nr = cfg.upa_r.size();
    const int nt = cfg.upa_t.size();
    const std::size_t per_tensor = static_cast<std::size_t>(K) * nr * nt * 2;
    REQUIRE(raw.size() == per_tensor * static_cast<std::size_t>(lp.frames) * lp.n_bs);

    for (int f = 0; f < lp.frames; f += 7) {  // spot-check a stride of frames
      for (int b = 0; b < lp.n_bs; ++b) {
        channel::ChannelTensor ch;
        ch.k = K;
        ch.nr = nr;
        ch.nt = nt;
        const double* src = raw.data() + (static_cast<std::size_t>(f) * lp.n_bs + b) * per_tensor;
        for (std::size_t i = 0; i < per_tensor / 2; ++i)
          ch.entries.push_back({src[2 * i], src[2 * i + 1]});
        const auto sel = channel::optimal_beam_pair(ch, cb_r, cb_t, cfg.ofdm);
        const int expected_pair = lp.labels[static_cast<std::size_t>(f) * lp.n_bs + b];
        CHECK(sel.t_idx * nr + sel.r_idx == expected_pair);
      }
    }
  }
}

TEST_CASE("feature building produces aligned windows") {
  auto cfg = harness::parse_experiment_config(tiny_config_text());
  TempDir dir("bs_ds_feat");
  harness::generate_dataset(cfg, "single", dir.str());

  const auto paths = harness::list_dataset_paths(dir.str());
  REQUIRE(paths.size() == 2);
  const auto data = harness::build_features(cfg, dir.str(), paths, 2);

  CHECK(data.size() > 10);
  CHECK(data.window == 16);
  CHECK(data.pool_in == 18 * 27);
  CHECK(data.dyn.size() == static_cast<std::size_t>(data.size()) * 16 * 18 * 27);
  CHECK(data.user.size() == static_cast<std::size_t>(data.size()) * 16 * 3);
  CHECK(data.labels.size() == static_cast<std::size_t>(data.size()) * 2);
  CHECK(data.static_blobs.size() == 1);
  CHECK(data.static_blobs[0].size() ==
        static_cast<std::size_t>(cfg.pred.static_in()));
  for (const auto label : data.labels) CHECK(label < cfg.pred.n_beam_pairs);
  // Labels should not all collapse to one beam pair.
  std::set<std::uint16_t> distinct(data.labels.begin(), data.labels.end());
  CHECK(distinct.size() >= 2);
}

TEST_CASE("pretrain improves over the uniform baseline and checkpoints reload") {
  auto cfg = harness::parse_experiment_config(tiny_config_text());
  cfg.pretrain_epochs = 40;

  TempDir ds("bs_ds_pre"), model("bs_model_pre");
  harness::generate_dataset(cfg, "multi", ds.str());
  const auto report = harness::run_pretrain(cfg, ds.str(), model.str());

  REQUIRE(report.arms.size() == 1);
  const auto& arm = report.arms[0];
  double best_val = 0.0;
  for (const auto& row : arm.history) {
    if (row.split == "val") best_val = std::max(best_val, row.top1);
  }
  const double uniform = 1.0 / cfg.pred.n_beam_pairs;  // 32 pairs
  CHECK(best_val >= 10.0 * uniform);

  // The saved checkpoint reproduces the best logged validation Top-1.
  const auto params = predictor::load_model(model.str());
  const auto paths = harness::list_dataset_paths(ds.str());
  std::vector<harness::PathOnDisk> val_paths = {paths[3]};  // every 4th path validates
  const auto val_set = harness::build_features(cfg, ds.str(), val_paths, cfg.multi_stride);
  const auto metrics = predictor::evaluate(params, val_set, 0);
  CHECK(metrics.top1 == doctest::Approx(arm.threshold).epsilon(1e-12));

  SUBCASE("seeded rerun reproduces the report") {
    TempDir model2("bs_model_pre2");
    const auto again = harness::run_pretrain(cfg, ds.str(), model2.str());
    REQUIRE(again.arms.size() == 1);
    REQUIRE(again.arms[0].history.size() == arm.history.size());
    for (std::size_t i = 0; i < arm.history.size(); ++i) {
      CHECK(arm.history[i].loss == again.arms[0].history[i].loss);
      CHECK(arm.history[i].top1 == again.arms[0].history[i].top1);
    }
  }
}

TEST_CASE("transfer run: splits are leak-free and protocol degenerates correctly") {
  auto cfg = harness::parse_experiment_config(tiny_config_text());
  cfg.pretrain_epochs = 10;
  cfg.finetune_epochs = 8;
  cfg.scratch_epochs = 12;

  TempDir multi("bs_ds_multi_t"), single("bs_ds_single_t"), model("bs_model_t"), out("bs_out_t");
  harness::generate_dataset(cfg, "multi", multi.str());
  harness::generate_dataset(cfg, "single", single.str());
  harness::run_pretrain(cfg, multi.str(), model.str());

  const auto report = harness::run_transfer(cfg, model.str(), single.str(), out.str());
  REQUIRE(report.arms.size() == 2);
  CHECK(report.arms[0].name == "finetune");
  CHECK(report.arms[1].name == "scratch");

  SUBCASE("metric nesting holds on every evaluation row") {
    for (const auto& arm : report.arms) {
      for (const auto& row : arm.history) {
        if (row.split != "val") continue;
        CHECK(row.top5 >= row.top1);
        CHECK(row.top10 >= row.top5);
      }
      CHECK(arm.final_test.top5 >= arm.final_test.top1);
      CHECK(arm.final_test.top10 >= arm.final_test.top5);
    }
  }

  SUBCASE("summary and histories round-trip through the report files") {
    const auto parsed = harness::parse_report(out.str());
    REQUIRE(parsed.arms.size() == 2);
    CHECK(parsed.speedup == report.speedup);
    for (std::size_t a = 0; a < 2; ++a) {
      CHECK(parsed.arms[a].final_test.top10 == report.arms[a].final_test.top10);
      REQUIRE(parsed.arms[a].history.size() == report.arms[a].history.size());
      for (std::size_t i = 0; i < parsed.arms[a].history.size(); ++i) {
        CHECK(parsed.arms[a].history[i].loss ==
              doctest::Approx(report.arms[a].history[i].loss).epsilon(1e-9));
      }
      // Speedup is recomputable from the emitted epochs-to-threshold values.
      CHECK(parsed.arms[a].epochs_to_threshold == report.arms[a].epochs_to_threshold);
    }
    CHECK(report.speedup ==
          doctest::Approx(static_cast<double>(report.arms[1].epochs_to_threshold) /
                          report.arms[0].epochs_to_threshold));
  }
}

TEST_CASE("sense command writes aligned maps and a parsable report") {
  auto cfg = harness::parse_experiment_config(tiny_config_text());
  TempDir ds("bs_ds_sense"), out("bs_out_sense");
  harness::generate_dataset(cfg, "single", ds.str());

  const std::string path_dir = ds.str() + "/env_000/path_001";
  harness::run_sense(cfg, path_dir, out.str());

  const auto lp = harness::load_path(path_dir);
  const auto maps = core::read_binary<std::uint16_t>(out.str() + "/dynamic_maps.bin");
  CHECK(maps.size() == static_cast<std::size_t>(lp.frames) * lp.rows * lp.cols);

  std::ifstream report(out.str() + "/report.csv");
  REQUIRE(report);
  std::string header;
  std::getline(report, header);
  CHECK(header == "class_id,instance_key,q_stat,threshold,verdict,truth_verdict");
  int rows = 0, agreements = 0;
  std::string line;
  while (std::getline(report, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream ss(line);
    std::string field;
    for (int i = 0; i < 4; ++i) std::getline(ss, field, ',');
    std::string verdict, truth;
    std::getline(ss, verdict, ',');
    std::getline(ss, truth, ',');
    CHECK((verdict == "dynamic" || verdict == "static"));
    CHECK((truth == "dynamic" || truth == "static"));
    agreements += verdict == truth;
  }
  CHECK(rows > 0);
  CHECK(static_cast<double>(agreements) / rows > 0.6);
}

TEST_CASE("empty history emits a header-only csv") {
  harness::RunReport report;
  harness::ArmReport arm;
  arm.name = "empty";
  report.arms.push_back(arm);
  TempDir out("bs_out_empty");
  harness::emit_report(report, out.str());
  CHECK(read_file(out.str() + "/empty/history.csv") == "epoch,split,loss,top1,top5,top10\n");
}
