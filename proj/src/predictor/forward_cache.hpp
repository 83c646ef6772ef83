#pragma once

#include <vector>

#include "predictor/predictor.hpp"

namespace beamsense::predictor {

struct GruStepCache {
  std::vector<double> z, r, c, h, rh;  // gates, candidate, state, r*h_prev
};

struct FrameCache {
  std::vector<double> user_in, user_h, user_feat;
  std::vector<double> dyn_in, dyn_pre, dyn_h, dyn_feat;
  std::vector<double> fused;
  std::vector<double> h_prev0, h_prev1;
  GruStepCache gru0, gru1;
};

// Every intermediate needed by the backward pass.
struct ForwardCache {
  std::vector<FrameCache> frames;
  std::vector<double> stat_pre, stat_hidden, stat_feat;
  std::vector<double> logits, probs;
};

void run_forward(const ModelParams& params, const Dataset& data, int sample, ForwardCache& fc);

// Shared dense-algebra helpers (row-major out x in matrices).
void matvec(const std::vector<double>& w, int out, int in, const double* x, double* y);
void matvec_add(const std::vector<double>& w, int out, int in, const double* x, double* y);
void matvec_transpose_add(const std::vector<double>& w, int out, int in, const double* g,
                          double* y);
void outer_add(std::vector<double>& dw, int out, int in, const double* g, const double* x);

}  // namespace beamsense::predictor
