#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "predictor/forward_cache.hpp"
#include "predictor/predictor.hpp"

namespace beamsense::predictor {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
  for (const double x : v) {
    if (!std::isfinite(x)) throw core::NumericError(std::string("forward: non-finite ") + what);
  }
}

}  // namespace

void matvec(const std::vector<double>& w, int out, int in, const double* x, double* y) {
  for (int o = 0; o < out; ++o) {
    const double* row = w.data() + static_cast<std::size_t>(o) * in;
    double acc = 0.0;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void matvec_add(const std::vector<double>& w, int out, int in, const double* x, double* y) {
  for (int o = 0; o < out; ++o) {
    const double* row = w.data() + static_cast<std::size_t>(o) * in;
    double acc = 0.0;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] += acc;
  }
}

// y += W^T g  (back-propagated input gradient)
void matvec_transpose_add(const std::vector<double>& w, int out, int in, const double* g,
                          double* y) {
  for (int o = 0; o < out; ++o) {
    const double* row = w.data() + static_cast<std::size_t>(o) * in;
    const double go = g[o];
    if (go == 0.0) continue;
    for (int i = 0; i < in; ++i) y[i] += row[i] * go;
  }
}

// dW += g x^T
void outer_add(std::vector<double>& dw, int out, int in, const double* g, const double* x) {
  for (int o = 0; o < out; ++o) {
    double* row = dw.data() + static_cast<std::size_t>(o) * in;
    const double go = g[o];
    if (go == 0.0) continue;
    for (int i = 0; i < in; ++i) row[i] += go * x[i];
  }
}

void gru_step(const GruLayer& g, const double* x, const double* h_prev, GruStepCache& cache) {
  const int H = g.hidden;
  cache.z.resize(H);
  cache.r.resize(H);
  cache.c.resize(H);
  cache.h.resize(H);
  cache.rh.resize(H);

  std::vector<double> az(H), ar(H), ac(H);
  matvec(g.wz, H, g.in, x, az.data());
  matvec_add(g.uz, H, H, h_prev, az.data());
  matvec(g.wr, H, g.in, x, ar.data());
  matvec_add(g.ur, H, H, h_prev, ar.data());
  for (int i = 0; i < H; ++i) {
    cache.z[i] = 1.0 / (1.0 + std::exp(-(az[i] + g.bz[i])));
    cache.r[i] = 1.0 / (1.0 + std::exp(-(ar[i] + g.br[i])));
    cache.rh[i] = cache.r[i] * h_prev[i];
  }
  matvec(g.wh, H, g.in, x, ac.data());
  matvec_add(g.uh, H, H, cache.rh.data(), ac.data());
  for (int i = 0; i < H; ++i) {
    cache.c[i] = std::tanh(ac[i] + g.bh[i]);
    cache.h[i] = (1.0 - cache.z[i]) * h_prev[i] + cache.z[i] * cache.c[i];
  }
}

void run_forward(const ModelParams& p, const Dataset& data, int sample, ForwardCache& fc) {
  const PredictorConfig& cfg = p.cfg;
  if (data.window != cfg.window || data.pool_in != cfg.pool_in() || data.n_bs != cfg.n_bs)
    throw core::ParameterError("forward: dataset/config dimension mismatch");
  if (sample < 0 || sample >= data.size())
    throw core::ParameterError("forward: sample index out of range");

  const int L = cfg.window;
  fc.frames.resize(static_cast<std::size_t>(L));

  // Static branch is constant across the window: encode once.
  const std::vector<double>& stat_in = data.static_blobs[data.static_of[sample]];
  if (static_cast<int>(stat_in.size()) != cfg.static_in())
    throw core::ParameterError("forward: static blob dimension mismatch");
  fc.stat_pre.resize(cfg.static_hidden);
  fc.stat_hidden.resize(cfg.static_hidden);
  matvec(p.stat0.w, p.stat0.out, p.stat0.in, stat_in.data(), fc.stat_pre.data());
  for (int i = 0; i < cfg.static_hidden; ++i) {
    const double a = fc.stat_pre[i] + p.stat0.b[i];
    fc.stat_pre[i] = a;
    fc.stat_hidden[i] = a > 0.0 ? a : 0.0;  // rectifier
  }
  fc.stat_feat.resize(cfg.n_static);
  matvec(p.stat1.w, p.stat1.out, p.stat1.in, fc.stat_hidden.data(), fc.stat_feat.data());
  for (int i = 0; i < cfg.n_static; ++i) fc.stat_feat[i] += p.stat1.b[i];

  const float* dyn_base = data.dyn.data() + static_cast<std::size_t>(sample) * L * cfg.pool_in();
  const double* user_base = data.user.data() + static_cast<std::size_t>(sample) * L * 3;

  std::vector<double> h0(cfg.rnn_hidden, 0.0), h1(cfg.rnn_hidden, 0.0);
  for (int t = 0; t < L; ++t) {
    FrameCache& f = fc.frames[static_cast<std::size_t>(t)];

    // User branch: fixed normalization, two affine+tanh blocks.
    f.user_in.resize(3);
    for (int i = 0; i < 3; ++i)
      f.user_in[i] = 2.0 * user_base[t * 3 + i] / cfg.norm_dims[i] - 1.0;
    f.user_h.resize(cfg.user_hidden);
    matvec(p.user0.w, p.user0.out, p.user0.in, f.user_in.data(), f.user_h.data());
    for (int i = 0; i < cfg.user_hidden; ++i) f.user_h[i] = std::tanh(f.user_h[i] + p.user0.b[i]);
    f.user_feat.resize(cfg.n_user);
    matvec(p.user1.w, p.user1.out, p.user1.in, f.user_h.data(), f.user_feat.data());
    for (int i = 0; i < cfg.n_user; ++i) f.user_feat[i] = std::tanh(f.user_feat[i] + p.user1.b[i]);

    // Dynamic branch: pooled map -> hidden rectifier -> affine feature.
    f.dyn_in.resize(cfg.pool_in());
    const float* dt = dyn_base + static_cast<std::size_t>(t) * cfg.pool_in();
    for (int i = 0; i < cfg.pool_in(); ++i) f.dyn_in[i] = static_cast<double>(dt[i]);
    f.dyn_pre.resize(cfg.dyn_hidden);
    matvec(p.dyn0.w, p.dyn0.out, p.dyn0.in, f.dyn_in.data(), f.dyn_pre.data());
    f.dyn_h.resize(cfg.dyn_hidden);
    for (int i = 0; i < cfg.dyn_hidden; ++i) {
      const double a = f.dyn_pre[i] + p.dyn0.b[i];
      f.dyn_pre[i] = a;
      f.dyn_h[i] = a > 0.0 ? a : 0.0;
    }
    f.dyn_feat.resize(cfg.n_dyn);
    matvec(p.dyn1.w, p.dyn1.out, p.dyn1.in, f.dyn_h.data(), f.dyn_feat.data());
    for (int i = 0; i < cfg.n_dyn; ++i) f.dyn_feat[i] += p.dyn1.b[i];

    // Fused frame feature in [user, dynamic, static] order.
    f.fused.resize(cfg.fused());
    std::copy(f.user_feat.begin(), f.user_feat.end(), f.fused.begin());
    std::copy(f.dyn_feat.begin(), f.dyn_feat.end(), f.fused.begin() + cfg.n_user);
    std::copy(fc.stat_feat.begin(), fc.stat_feat.end(),
              f.fused.begin() + cfg.n_user + cfg.n_dyn);

    f.h_prev0 = h0;
    gru_step(p.rnn0, f.fused.data(), h0.data(), f.gru0);
    h0 = f.gru0.h;
    f.h_prev1 = h1;
    gru_step(p.rnn1, h0.data(), h1.data(), f.gru1);
    h1 = f.gru1.h;
  }

  // Output head on the final hidden state, then per-BS column softmax.
  fc.logits.resize(cfg.head_out());
  matvec(p.head.w, p.head.out, p.head.in, h1.data(), fc.logits.data());
  for (int i = 0; i < cfg.head_out(); ++i) fc.logits[i] += p.head.b[i];
  check_finite(fc.logits, "logits");

  fc.probs.resize(fc.logits.size());
  for (int bs = 0; bs < cfg.n_bs; ++bs) {
    double max_logit = -1e300;
    for (int j = 0; j < cfg.n_beam_pairs; ++j)
      max_logit = std::max(max_logit, fc.logits[static_cast<std::size_t>(j) * cfg.n_bs + bs]);
    double denom = 0.0;
    for (int j = 0; j < cfg.n_beam_pairs; ++j)
      denom += std::exp(fc.logits[static_cast<std::size_t>(j) * cfg.n_bs + bs] - max_logit);
    for (int j = 0; j < cfg.n_beam_pairs; ++j) {
      const std::size_t idx = static_cast<std::size_t>(j) * cfg.n_bs + bs;
      fc.probs[idx] = std::exp(fc.logits[idx] - max_logit) / denom;
    }
  }
}

PredictionMatrix forward(const ModelParams& params, const Dataset& data, int sample) {
  ForwardCache fc;
  run_forward(params, data, sample, fc);
  PredictionMatrix out;
  out.n_pairs = params.cfg.n_beam_pairs;
  out.n_bs = params.cfg.n_bs;
  out.probs = std::move(fc.probs);
  return out;
}

double cross_entropy(const PredictionMatrix& pred, const std::uint16_t* label_pairs) {
  double loss = 0.0;
  for (int bs = 0; bs < pred.n_bs; ++bs) {
    const int j = label_pairs[bs];
    if (j < 0 || j >= pred.n_pairs) throw core::ParameterError("cross_entropy: label out of range");
    const double p = pred.probs[static_cast<std::size_t>(j) * pred.n_bs + bs];
    loss -= std::log(std::max(p, 1e-12));  // clamp keeps the loss finite
  }
  return loss;
}

double top_k_accuracy(const std::vector<PredictionMatrix>& preds,
                      const std::vector<std::vector<std::uint16_t>>& labels, int k) {
  if (k < 1) throw core::ParameterError("top_k_accuracy: k must be >= 1");
  if (preds.size() != labels.size())
    throw core::ParameterError("top_k_accuracy: preds/labels size mismatch");

  std::size_t hits = 0, total = 0;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    const PredictionMatrix& pm = preds[s];
    if (k > pm.n_pairs) throw core::ParameterError("top_k_accuracy: k exceeds beam pair count");
    for (int bs = 0; bs < pm.n_bs; ++bs) {
      const int j = labels[s][static_cast<std::size_t>(bs)];
      const double pj = pm.probs[static_cast<std::size_t>(j) * pm.n_bs + bs];
      // Rank of the true beam with ties broken toward lower indices.
      int rank = 0;
      for (int q = 0; q < pm.n_pairs; ++q) {
        const double pq = pm.probs[static_cast<std::size_t>(q) * pm.n_bs + bs];
        if (pq > pj || (pq == pj && q < j)) ++rank;
      }
      if (rank < k) ++hits;
      ++total;
    }
  }
  return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

}  // namespace beamsense::predictor
