#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "beamsense/beamsense.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  explicit TempDir(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string str() const { return dir.string(); }
};

bs_config* tiny_config() {
  bs_config* cfg = nullptr;
  REQUIRE(bs_config_create(&cfg) == BS_OK);
  const char* kv[][2] = {
      {"seed", "3"},           {"scene.raster_rows", "36"}, {"scene.raster_cols", "54"},
      {"scene.frame_min", "40"}, {"scene.frame_max", "120"}, {"scene.user_start_x", "48"},
      {"scene.user_start_y", "5"}, {"scene.user_goal_x", "44"}, {"scene.user_goal_y", "5"},
      {"scene.pc_density", "1.0"}, {"channel.tx_nx", "4"},     {"channel.tx_ny", "2"},
      {"channel.rx_nx", "2"},   {"channel.rx_ny", "2"},      {"channel.subcarriers", "16"},
      {"single.paths", "1"},
  };
  for (const auto& pair : kv) REQUIRE(bs_config_set(cfg, pair[0], pair[1]) == BS_OK);
  return cfg;
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(bs_version() != nullptr);
  CHECK(std::strcmp(bs_status_name(BS_OK), "ok") == 0);
  CHECK(std::strcmp(bs_status_name(BS_ERR_IO), "io_error") == 0);
}

TEST_CASE("null arguments are rejected with a diagnostic") {
  CHECK(bs_config_create(nullptr) == BS_ERR_INVALID_ARGUMENT);
  CHECK(bs_generate(nullptr, "single", "/tmp/x") == BS_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(bs_last_error_message()) > 0);
}

TEST_CASE("config load failure reports an io error") {
  bs_config* cfg = nullptr;
  CHECK(bs_config_load("/nonexistent/path.cfg", &cfg) == BS_ERR_IO);
}

TEST_CASE("invalid mode is an invalid-argument error") {
  bs_config* cfg = tiny_config();
  TempDir out("bs_capi_badmode");
  CHECK(bs_generate(cfg, "both", out.str().c_str()) == BS_ERR_INVALID_ARGUMENT);
  bs_config_destroy(cfg);
}

TEST_CASE("generate and sense through the C surface") {
  bs_config* cfg = tiny_config();
  TempDir ds("bs_capi_ds"), out("bs_capi_sense");

  REQUIRE(bs_generate(cfg, "single", ds.str().c_str()) == BS_OK);
  CHECK(fs::exists(ds.dir / "env_000/path_000/frames.bin"));
  CHECK(fs::exists(ds.dir / "env_000/points.bin"));

  const std::string path_dir = ds.str() + "/env_000/path_000";
  REQUIRE(bs_sense(cfg, path_dir.c_str(), out.str().c_str()) == BS_OK);
  CHECK(fs::exists(out.dir / "dynamic_maps.bin"));
  CHECK(fs::exists(out.dir / "report.csv"));

  // Missing dataset directory surfaces as an io error.
  CHECK(bs_sense(cfg, (ds.str() + "/env_009/path_000").c_str(), out.str().c_str()) == BS_ERR_IO);
  bs_config_destroy(cfg);
}

TEST_CASE("config error code propagates") {
  bs_config* cfg = tiny_config();
  REQUIRE(bs_config_set(cfg, "split.finetune_fraction", "1.5") == BS_OK);
  TempDir out("bs_capi_cfg");
  CHECK(bs_generate(cfg, "single", out.str().c_str()) == BS_ERR_CONFIG);
  bs_config_destroy(cfg);
}
