#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "core/binio.hpp"
#include "core/errors.hpp"
#include "predictor/predictor.hpp"

namespace beamsense::predictor {

namespace {

using nlohmann::json;

json config_to_json(const PredictorConfig& c) {
  json j;
  j["n_user"] = c.n_user;
  j["user_hidden"] = c.user_hidden;
  j["n_dyn"] = c.n_dyn;
  j["dyn_hidden"] = c.dyn_hidden;
  j["n_static"] = c.n_static;
  j["static_hidden"] = c.static_hidden;
  j["pool_rows"] = c.pool_rows;
  j["pool_cols"] = c.pool_cols;
  j["static_dims"] = {c.static_dims[0], c.static_dims[1], c.static_dims[2]};
  j["rnn_hidden"] = c.rnn_hidden;
  j["window"] = c.window;
  j["horizon"] = c.horizon;
  j["n_beam_pairs"] = c.n_beam_pairs;
  j["n_bs"] = c.n_bs;
  j["norm_dims"] = {c.norm_dims[0], c.norm_dims[1], c.norm_dims[2]};
  return j;
}

PredictorConfig config_from_json(const json& j) {
  PredictorConfig c;
  c.n_user = j.at("n_user");
  c.user_hidden = j.at("user_hidden");
  c.n_dyn = j.at("n_dyn");
  c.dyn_hidden = j.at("dyn_hidden");
  c.n_static = j.at("n_static");
  c.static_hidden = j.at("static_hidden");
  c.pool_rows = j.at("pool_rows");
  c.pool_cols = j.at("pool_cols");
  for (int i = 0; i < 3; ++i) c.static_dims[i] = j.at("static_dims")[static_cast<std::size_t>(i)];
  c.rnn_hidden = j.at("rnn_hidden");
  c.window = j.at("window");
  c.horizon = j.at("horizon");
  c.n_beam_pairs = j.at("n_beam_pairs");
  c.n_bs = j.at("n_bs");
  for (int i = 0; i < 3; ++i) c.norm_dims[i] = j.at("norm_dims")[static_cast<std::size_t>(i)];
  return c;
}

}  // namespace

void save_model(const ModelParams& params, const std::string& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  auto& self = const_cast<ModelParams&>(params);
  const auto refs = tensor_registry(self);

  json manifest;
  manifest["format"] = "beamsense-model-v1";
  manifest["seed"] = seed;
  manifest["config"] = config_to_json(params.cfg);
  json layers = json::array();
  std::vector<double> flat;
  for (const auto& ref : refs) {
    json layer;
    layer["name"] = ref.name;
    layer["group"] = group_name(ref.group);
    layer["shape"] = ref.shape;
    layer["frozen"] = params.frozen[static_cast<int>(ref.group)];
    layers.push_back(layer);
    flat.insert(flat.end(), ref.data->begin(), ref.data->end());
  }
  manifest["layers"] = layers;
  manifest["parameter_count"] = flat.size();

  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw core::IoError("cannot write manifest: " + dir);
  mf << manifest.dump(2) << "\n";
  core::write_binary(dir + "/params.bin", flat);
}

ModelParams load_model(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw core::IoError("cannot read manifest: " + dir + "/manifest.json");
  json manifest = json::parse(mf);

  core::Rng dummy(0);
  ModelParams params = init_params(config_from_json(manifest.at("config")), dummy);
  const std::vector<double> flat = core::read_binary<double>(dir + "/params.bin");

  const auto refs = tensor_registry(params);
  if (manifest.at("layers").size() != refs.size())
    throw core::IoError("load_model: layer count mismatch");

  std::size_t offset = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const json& layer = manifest.at("layers")[i];
    if (layer.at("name") != refs[i].name) throw core::IoError("load_model: layer order mismatch");
    const std::size_t count = refs[i].data->size();
    if (offset + count > flat.size()) throw core::IoError("load_model: params.bin too small");
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
              flat.begin() + static_cast<std::ptrdiff_t>(offset + count), refs[i].data->begin());
    offset += count;
    params.frozen[static_cast<int>(refs[i].group)] = layer.at("frozen");
  }
  if (offset != flat.size()) throw core::IoError("load_model: params.bin size mismatch");
  return params;
}

}  // namespace beamsense::predictor
