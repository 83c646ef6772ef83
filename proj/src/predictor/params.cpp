#include <cmath>

#include "core/errors.hpp"
#include "predictor/predictor.hpp"

namespace beamsense::predictor {

const char* group_name(Group g) {
  switch (g) {
    case Group::user_encoder_0: return "user_encoder.0";
    case Group::user_encoder_1: return "user_encoder.1";
    case Group::dyn_encoder_0: return "dyn_encoder.0";
    case Group::dyn_encoder_1: return "dyn_encoder.1";
    case Group::static_encoder_0: return "static_encoder.0";
    case Group::static_encoder_1: return "static_encoder.1";
    case Group::recurrent_0: return "recurrent.0";
    case Group::recurrent_1: return "recurrent.1";
    case Group::output_head: return "output_head";
    default: return "?";
  }
}

std::vector<Group> default_freeze_spec() {
  return {Group::user_encoder_0, Group::dyn_encoder_0, Group::static_encoder_0,
          Group::recurrent_0, Group::recurrent_1};
}

namespace {

Dense make_dense(int out, int in) {
  Dense d;
  d.out = out;
  d.in = in;
  d.w.assign(static_cast<std::size_t>(out) * in, 0.0);
  d.b.assign(static_cast<std::size_t>(out), 0.0);
  return d;
}

GruLayer make_gru(int hidden, int in) {
  GruLayer g;
  g.hidden = hidden;
  g.in = in;
  const std::size_t wi = static_cast<std::size_t>(hidden) * in;
  const std::size_t wh = static_cast<std::size_t>(hidden) * hidden;
  g.wz.assign(wi, 0.0);
  g.wr.assign(wi, 0.0);
  g.wh.assign(wi, 0.0);
  g.uz.assign(wh, 0.0);
  g.ur.assign(wh, 0.0);
  g.uh.assign(wh, 0.0);
  g.bz.assign(static_cast<std::size_t>(hidden), 0.0);
  g.br.assign(static_cast<std::size_t>(hidden), 0.0);
  g.bh.assign(static_cast<std::size_t>(hidden), 0.0);
  return g;
}

void fill_uniform(std::vector<double>& v, double bound, core::Rng& rng) {
  for (auto& x : v) x = rng.uniform(-bound, bound);
}

}  // namespace

std::vector<TensorRef> tensor_registry(ModelParams& p) {
  std::vector<TensorRef> refs;
  const auto add_dense = [&refs](const char* base, Group g, Dense& d) {
    refs.push_back({std::string(base) + ".w", g, &d.w, {d.out, d.in}});
    refs.push_back({std::string(base) + ".b", g, &d.b, {d.out}});
  };
  const auto add_gru = [&refs](const char* base, Group g, GruLayer& l) {
    const std::string s(base);
    refs.push_back({s + ".wz", g, &l.wz, {l.hidden, l.in}});
    refs.push_back({s + ".uz", g, &l.uz, {l.hidden, l.hidden}});
    refs.push_back({s + ".bz", g, &l.bz, {l.hidden}});
    refs.push_back({s + ".wr", g, &l.wr, {l.hidden, l.in}});
    refs.push_back({s + ".ur", g, &l.ur, {l.hidden, l.hidden}});
    refs.push_back({s + ".br", g, &l.br, {l.hidden}});
    refs.push_back({s + ".wh", g, &l.wh, {l.hidden, l.in}});
    refs.push_back({s + ".uh", g, &l.uh, {l.hidden, l.hidden}});
    refs.push_back({s + ".bh", g, &l.bh, {l.hidden}});
  };
  add_dense("user_encoder.0", Group::user_encoder_0, p.user0);
  add_dense("user_encoder.1", Group::user_encoder_1, p.user1);
  add_dense("dyn_encoder.0", Group::dyn_encoder_0, p.dyn0);
  add_dense("dyn_encoder.1", Group::dyn_encoder_1, p.dyn1);
  add_dense("static_encoder.0", Group::static_encoder_0, p.stat0);
  add_dense("static_encoder.1", Group::static_encoder_1, p.stat1);
  add_gru("recurrent.0", Group::recurrent_0, p.rnn0);
  add_gru("recurrent.1", Group::recurrent_1, p.rnn1);
  add_dense("output_head", Group::output_head, p.head);
  return refs;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  auto& self = const_cast<ModelParams&>(*this);
  for (const auto& ref : tensor_registry(self)) n += ref.data->size();
  return n;
}

ModelParams init_params(const PredictorConfig& cfg, core::Rng& rng) {
  if (cfg.window < 1 || cfg.n_bs < 1 || cfg.n_beam_pairs < 1)
    throw core::ParameterError("init_params: invalid config");

  ModelParams p;
  p.cfg = cfg;
  p.user0 = make_dense(cfg.user_hidden, 3);
  p.user1 = make_dense(cfg.n_user, cfg.user_hidden);
  p.dyn0 = make_dense(cfg.dyn_hidden, cfg.pool_in());
  p.dyn1 = make_dense(cfg.n_dyn, cfg.dyn_hidden);
  p.stat0 = make_dense(cfg.static_hidden, cfg.static_in());
  p.stat1 = make_dense(cfg.n_static, cfg.static_hidden);
  p.rnn0 = make_gru(cfg.rnn_hidden, cfg.fused());
  p.rnn1 = make_gru(cfg.rnn_hidden, cfg.rnn_hidden);
  p.head = make_dense(cfg.head_out(), cfg.rnn_hidden);

  // Scaled-uniform weight init, one named sub-stream per tensor so layers
  // with equal shapes stay decorrelated. Biases start at zero.
  for (const auto& ref : tensor_registry(p)) {
    if (ref.shape.size() < 2) continue;
    const auto fan_in = static_cast<double>(ref.shape[1]);
    core::Rng stream = rng.fork(ref.name);
    fill_uniform(*ref.data, 1.0 / std::sqrt(fan_in), stream);
  }
  return p;
}

}  // namespace beamsense::predictor
