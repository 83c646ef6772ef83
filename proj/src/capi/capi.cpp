#include "beamsense/beamsense.h"

#include <string>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "harness/harness.hpp"

namespace {

thread_local std::string g_last_error;

struct ConfigHandle {
  beamsense::core::Config config;
};

bs_status fail(bs_status code, const char* what) {
  g_last_error = what ? what : "";
  return code;
}

template <typename Fn>
bs_status guarded(Fn&& fn) {
  using namespace beamsense::core;
  try {
    fn();
    g_last_error.clear();
    return BS_OK;
  } catch (const ParameterError& e) {
    return fail(BS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const ConfigError& e) {
    return fail(BS_ERR_CONFIG, e.what());
  } catch (const IoError& e) {
    return fail(BS_ERR_IO, e.what());
  } catch (const LayoutError& e) {
    return fail(BS_ERR_LAYOUT, e.what());
  } catch (const SimulationError& e) {
    return fail(BS_ERR_SIMULATION, e.what());
  } catch (const TrainingError& e) {
    return fail(BS_ERR_TRAINING, e.what());
  } catch (const NumericError& e) {
    return fail(BS_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(BS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BS_ERR_INTERNAL, "unknown error");
  }
}

beamsense::harness::ExperimentConfig experiment_of(const bs_config* cfg) {
  const auto* handle = reinterpret_cast<const ConfigHandle*>(cfg);
  return beamsense::harness::parse_experiment_config(handle->config);
}

bool require(const void* p) { return p != nullptr; }

}  // namespace

extern "C" {

const char* bs_version(void) { return "0.1.0"; }

const char* bs_status_name(bs_status status) {
  switch (status) {
    case BS_OK: return "ok";
    case BS_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case BS_ERR_CONFIG: return "config_error";
    case BS_ERR_IO: return "io_error";
    case BS_ERR_LAYOUT: return "layout_error";
    case BS_ERR_SIMULATION: return "simulation_error";
    case BS_ERR_TRAINING: return "training_error";
    case BS_ERR_NUMERIC: return "numeric_error";
    case BS_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* bs_last_error_message(void) { return g_last_error.c_str(); }

bs_status bs_config_create(bs_config** out) {
  if (!require(out)) return fail(BS_ERR_INVALID_ARGUMENT, "out must not be null");
  return guarded([&] { *out = reinterpret_cast<bs_config*>(new ConfigHandle{}); });
}

bs_status bs_config_load(const char* path, bs_config** out) {
  if (!require(path) || !require(out))
    return fail(BS_ERR_INVALID_ARGUMENT, "path/out must not be null");
  return guarded([&] {
    auto* handle = new ConfigHandle{};
    try {
      handle->config = beamsense::core::Config::from_file(path);
    } catch (...) {
      delete handle;
      throw;
    }
    *out = reinterpret_cast<bs_config*>(handle);
  });
}

bs_status bs_config_set(bs_config* cfg, const char* key, const char* value) {
  if (!require(cfg) || !require(key) || !require(value))
    return fail(BS_ERR_INVALID_ARGUMENT, "cfg/key/value must not be null");
  return guarded([&] { reinterpret_cast<ConfigHandle*>(cfg)->config.set(key, value); });
}

void bs_config_destroy(bs_config* cfg) { delete reinterpret_cast<ConfigHandle*>(cfg); }

bs_status bs_generate(const bs_config* cfg, const char* mode, const char* out_dir) {
  if (!require(cfg) || !require(mode) || !require(out_dir))
    return fail(BS_ERR_INVALID_ARGUMENT, "cfg/mode/out_dir must not be null");
  return guarded([&] { beamsense::harness::generate_dataset(experiment_of(cfg), mode, out_dir); });
}

bs_status bs_sense(const bs_config* cfg, const char* path_dir, const char* out_dir) {
  if (!require(cfg) || !require(path_dir) || !require(out_dir))
    return fail(BS_ERR_INVALID_ARGUMENT, "cfg/path_dir/out_dir must not be null");
  return guarded([&] { beamsense::harness::run_sense(experiment_of(cfg), path_dir, out_dir); });
}

bs_status bs_pretrain(const bs_config* cfg, const char* dataset_dir, const char* out_dir) {
  if (!require(cfg) || !require(dataset_dir) || !require(out_dir))
    return fail(BS_ERR_INVALID_ARGUMENT, "cfg/dataset_dir/out_dir must not be null");
  return guarded([&] {
    const auto e = experiment_of(cfg);
    const auto report = beamsense::harness::run_pretrain(e, dataset_dir, out_dir);
    beamsense::harness::emit_report(report, out_dir);
  });
}

bs_status bs_finetune(const bs_config* cfg, const char* pretrained_dir, const char* dataset_dir,
                      const char* out_dir) {
  if (!require(cfg) || !require(pretrained_dir) || !require(dataset_dir) || !require(out_dir))
    return fail(BS_ERR_INVALID_ARGUMENT, "cfg/pretrained_dir/dataset_dir/out_dir must not be null");
  return guarded([&] {
    beamsense::harness::run_transfer(experiment_of(cfg), pretrained_dir, dataset_dir, out_dir);
  });
}

bs_status bs_evaluate(const bs_config* cfg, const char* model_dir, const char* dataset_dir,
                      const char* out_path) {
  if (!require(cfg) || !require(model_dir) || !require(dataset_dir) || !require(out_path))
    return fail(BS_ERR_INVALID_ARGUMENT, "cfg/model_dir/dataset_dir/out_path must not be null");
  return guarded([&] {
    beamsense::harness::run_evaluate(experiment_of(cfg), model_dir, dataset_dir, out_path);
  });
}

}  // extern "C"
