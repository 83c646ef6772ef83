#include <cmath>
#include <cstring>

#include "core/errors.hpp"
#include "predictor/forward_cache.hpp"
#include "predictor/predictor.hpp"

namespace beamsense::predictor {

namespace {

ModelParams zero_like(const ModelParams& p) {
  ModelParams g = p;
  auto refs = tensor_registry(g);
  for (auto& ref : refs) std::fill(ref.data->begin(), ref.data->end(), 0.0);
  return g;
}

struct GruGradScratch {
  std::vector<double> dh, daz, dar, dac, drh, dx;
};

// Backward through one GRU step. `dh` carries dLoss/dh_t in, and the
// gradient w.r.t. h_{t-1} out; dx receives the input gradient.
void gru_step_backward(const GruLayer& g, GruLayer& grad, const double* x, const double* h_prev,
                       const GruStepCache& cache, GruGradScratch& s) {
  const int H = g.hidden;
  s.daz.assign(H, 0.0);
  s.dar.assign(H, 0.0);
  s.dac.assign(H, 0.0);
  s.drh.assign(H, 0.0);
  s.dx.assign(g.in, 0.0);

  std::vector<double> dh_prev(H, 0.0);
  for (int i = 0; i < H; ++i) {
    const double dh = s.dh[i];
    const double z = cache.z[i], c = cache.c[i];
    const double dz = dh * (c - h_prev[i]);
    const double dc = dh * z;
    dh_prev[i] += dh * (1.0 - z);
    s.dac[i] = dc * (1.0 - c * c);
    s.daz[i] = dz * z * (1.0 - z);
  }

  // Candidate gate: ac = Wh x + Uh (r . h_prev) + bh
  outer_add(grad.wh, H, g.in, s.dac.data(), x);
  outer_add(grad.uh, H, H, s.dac.data(), cache.rh.data());
  for (int i = 0; i < H; ++i) grad.bh[i] += s.dac[i];
  matvec_transpose_add(g.uh, H, H, s.dac.data(), s.drh.data());
  for (int i = 0; i < H; ++i) {
    const double r = cache.r[i];
    const double dr = s.drh[i] * h_prev[i];
    dh_prev[i] += s.drh[i] * r;
    s.dar[i] = dr * r * (1.0 - r);
  }

  // Update and reset gates.
  outer_add(grad.wz, H, g.in, s.daz.data(), x);
  outer_add(grad.uz, H, H, s.daz.data(), h_prev);
  for (int i = 0; i < H; ++i) grad.bz[i] += s.daz[i];
  outer_add(grad.wr, H, g.in, s.dar.data(), x);
  outer_add(grad.ur, H, H, s.dar.data(), h_prev);
  for (int i = 0; i < H; ++i) grad.br[i] += s.dar[i];

  matvec_transpose_add(g.wz, H, g.in, s.daz.data(), s.dx.data());
  matvec_transpose_add(g.wr, H, g.in, s.dar.data(), s.dx.data());
  matvec_transpose_add(g.wh, H, g.in, s.dac.data(), s.dx.data());
  matvec_transpose_add(g.uz, H, H, s.daz.data(), dh_prev.data());
  matvec_transpose_add(g.ur, H, H, s.dar.data(), dh_prev.data());

  s.dh = std::move(dh_prev);
}

void accumulate_sample(const ModelParams& p, const Dataset& data, int sample, ModelParams& grad,
                       ForwardCache& fc) {
  const PredictorConfig& cfg = p.cfg;
  run_forward(p, data, sample, fc);
  const int L = cfg.window;

  // Softmax + cross entropy: dlogits = probs - onehot, per BS column.
  std::vector<double> dlogits = fc.probs;
  const std::uint16_t* labels = data.labels.data() + static_cast<std::size_t>(sample) * cfg.n_bs;
  for (int bs = 0; bs < cfg.n_bs; ++bs) {
    dlogits[static_cast<std::size_t>(labels[bs]) * cfg.n_bs + bs] -= 1.0;
  }

  const std::vector<double>& h_final = fc.frames.back().gru1.h;
  outer_add(grad.head.w, p.head.out, p.head.in, dlogits.data(), h_final.data());
  for (int i = 0; i < p.head.out; ++i) grad.head.b[i] += dlogits[i];

  GruGradScratch s0, s1;
  s1.dh.assign(cfg.rnn_hidden, 0.0);
  matvec_transpose_add(p.head.w, p.head.out, p.head.in, dlogits.data(), s1.dh.data());
  s0.dh.assign(cfg.rnn_hidden, 0.0);

  std::vector<double> dstat_feat(cfg.n_static, 0.0);

  for (int t = L - 1; t >= 0; --t) {
    const FrameCache& f = fc.frames[static_cast<std::size_t>(t)];

    // Layer 2 consumes layer 1's hidden state as input.
    gru_step_backward(p.rnn1, grad.rnn1, f.gru0.h.data(), f.h_prev1.data(), f.gru1, s1);
    for (int i = 0; i < cfg.rnn_hidden; ++i) s0.dh[i] += s1.dx[i];

    gru_step_backward(p.rnn0, grad.rnn0, f.fused.data(), f.h_prev0.data(), f.gru0, s0);
    const std::vector<double>& dfused = s0.dx;

    // Split the fused gradient back into the three branches.
    const double* duser = dfused.data();
    const double* ddyn = dfused.data() + cfg.n_user;
    const double* dstat = dfused.data() + cfg.n_user + cfg.n_dyn;
    for (int i = 0; i < cfg.n_static; ++i) dstat_feat[i] += dstat[i];

    // User branch (two tanh blocks).
    std::vector<double> du1(cfg.n_user);
    for (int i = 0; i < cfg.n_user; ++i)
      du1[i] = duser[i] * (1.0 - f.user_feat[i] * f.user_feat[i]);
    outer_add(grad.user1.w, p.user1.out, p.user1.in, du1.data(), f.user_h.data());
    for (int i = 0; i < p.user1.out; ++i) grad.user1.b[i] += du1[i];
    std::vector<double> du0(cfg.user_hidden, 0.0);
    matvec_transpose_add(p.user1.w, p.user1.out, p.user1.in, du1.data(), du0.data());
    for (int i = 0; i < cfg.user_hidden; ++i) du0[i] *= 1.0 - f.user_h[i] * f.user_h[i];
    outer_add(grad.user0.w, p.user0.out, p.user0.in, du0.data(), f.user_in.data());
    for (int i = 0; i < p.user0.out; ++i) grad.user0.b[i] += du0[i];

    // Dynamic branch (rectifier hidden).
    outer_add(grad.dyn1.w, p.dyn1.out, p.dyn1.in, ddyn, f.dyn_h.data());
    for (int i = 0; i < p.dyn1.out; ++i) grad.dyn1.b[i] += ddyn[i];
    std::vector<double> dd0(cfg.dyn_hidden, 0.0);
    matvec_transpose_add(p.dyn1.w, p.dyn1.out, p.dyn1.in, ddyn, dd0.data());
    for (int i = 0; i < cfg.dyn_hidden; ++i)
      if (f.dyn_pre[i] <= 0.0) dd0[i] = 0.0;
    outer_add(grad.dyn0.w, p.dyn0.out, p.dyn0.in, dd0.data(), f.dyn_in.data());
    for (int i = 0; i < p.dyn0.out; ++i) grad.dyn0.b[i] += dd0[i];
  }

  // Static branch: shared across the window, gradient summed over frames.
  outer_add(grad.stat1.w, p.stat1.out, p.stat1.in, dstat_feat.data(), fc.stat_hidden.data());
  for (int i = 0; i < p.stat1.out; ++i) grad.stat1.b[i] += dstat_feat[i];
  std::vector<double> ds0(cfg.static_hidden, 0.0);
  matvec_transpose_add(p.stat1.w, p.stat1.out, p.stat1.in, dstat_feat.data(), ds0.data());
  for (int i = 0; i < cfg.static_hidden; ++i)
    if (fc.stat_pre[i] <= 0.0) ds0[i] = 0.0;
  const std::vector<double>& stat_in = data.static_blobs[data.static_of[sample]];
  outer_add(grad.stat0.w, p.stat0.out, p.stat0.in, ds0.data(), stat_in.data());
  for (int i = 0; i < p.stat0.out; ++i) grad.stat0.b[i] += ds0[i];
}

}  // namespace

Gradients gradient(const ModelParams& params, const Dataset& data,
                   const std::vector<int>& batch) {
  if (batch.empty()) throw core::ParameterError("gradient: batch must be non-empty");

  Gradients out{zero_like(params)};
  ForwardCache fc;
  for (const int sample : batch) accumulate_sample(params, data, sample, out.tensors, fc);

  const double scale = 1.0 / static_cast<double>(batch.size());
  auto refs = tensor_registry(out.tensors);
  for (auto& ref : refs) {
    if (params.frozen[static_cast<int>(ref.group)]) {
      std::fill(ref.data->begin(), ref.data->end(), 0.0);  // freeze contract
    } else {
      for (double& v : *ref.data) v *= scale;
    }
  }
  return out;
}

}  // namespace beamsense::predictor
