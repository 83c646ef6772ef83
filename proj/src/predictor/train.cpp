#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"
#include "predictor/forward_cache.hpp"
#include "predictor/predictor.hpp"

namespace beamsense::predictor {

namespace {

// Deterministic Fisher-Yates shuffle on the given stream.
void shuffle_indices(std::vector<int>& idx, core::Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_int(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

std::vector<int> eval_indices(const Dataset& data, int max_samples) {
  std::vector<int> idx;
  const int n = data.size();
  if (max_samples <= 0 || max_samples >= n) {
    idx.resize(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
  } else {
    // Even stride keeps the subsample spread over all paths.
    const double step = static_cast<double>(n) / max_samples;
    for (int i = 0; i < max_samples; ++i) idx.push_back(static_cast<int>(i * step));
  }
  return idx;
}

EvalMetrics evaluate_on(const ModelParams& params, const Dataset& data,
                        const std::vector<int>& idx) {
  EvalMetrics m;
  if (idx.empty()) return m;
  std::size_t hits1 = 0, hits5 = 0, hits10 = 0, total = 0;
  ForwardCache fc;
  for (const int s : idx) {
    run_forward(params, data, s, fc);
    const std::uint16_t* labels = data.labels.data() + static_cast<std::size_t>(s) * data.n_bs;
    for (int bs = 0; bs < data.n_bs; ++bs) {
      const int j = labels[bs];
      const double pj = fc.probs[static_cast<std::size_t>(j) * data.n_bs + bs];
      m.loss -= std::log(std::max(pj, 1e-12));
      int rank = 0;
      for (int q = 0; q < params.cfg.n_beam_pairs; ++q) {
        const double pq = fc.probs[static_cast<std::size_t>(q) * data.n_bs + bs];
        if (pq > pj || (pq == pj && q < j)) ++rank;
      }
      hits1 += rank < 1;
      hits5 += rank < 5;
      hits10 += rank < 10;
      ++total;
    }
  }
  m.loss /= static_cast<double>(idx.size());
  m.top1 = static_cast<double>(hits1) / total;
  m.top5 = static_cast<double>(hits5) / total;
  m.top10 = static_cast<double>(hits10) / total;
  return m;
}

}  // namespace

EvalMetrics evaluate(const ModelParams& params, const Dataset& data, int max_samples) {
  return evaluate_on(params, data, eval_indices(data, max_samples));
}

History train(ModelParams& params, const Dataset& train_set, const Dataset& val_set,
              const TrainConfig& cfg) {
  return train(params, train_set, val_set, cfg, EpochHook{});
}

History train(ModelParams& params, const Dataset& train_set, const Dataset& val_set,
              const TrainConfig& cfg, const EpochHook& hook) {
  if (train_set.size() == 0) throw core::ParameterError("train: empty dataset");
  if (cfg.batch < 1 || cfg.epochs < 0) throw core::ParameterError("train: invalid config");

  core::Rng rng(cfg.seed);
  History history;
  auto refs = tensor_registry(params);

  std::vector<int> order(static_cast<std::size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), 0);
  const std::vector<int> val_idx = eval_indices(val_set, cfg.eval_subsample);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    core::Rng epoch_rng = rng.fork("epoch", static_cast<std::uint64_t>(epoch));
    shuffle_indices(order, epoch_rng);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    ForwardCache fc;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      const std::vector<int> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));

      // Track the running training loss from the pre-update forward passes.
      for (const int s : batch) {
        run_forward(params, train_set, s, fc);
        const std::uint16_t* labels =
            train_set.labels.data() + static_cast<std::size_t>(s) * train_set.n_bs;
        for (int bs = 0; bs < train_set.n_bs; ++bs) {
          const double p =
              fc.probs[static_cast<std::size_t>(labels[bs]) * train_set.n_bs + bs];
          loss_sum -= std::log(std::max(p, 1e-12));
        }
      }
      loss_count += batch.size();

      Gradients grads = gradient(params, train_set, batch);
      auto gref = tensor_registry(grads.tensors);
      for (std::size_t i = 0; i < refs.size(); ++i) {
        if (params.frozen[static_cast<int>(refs[i].group)]) continue;
        std::vector<double>& w = *refs[i].data;
        const std::vector<double>& g = *gref[i].data;
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= cfg.lr * g[j];
      }
    }

    const double train_loss = loss_sum / static_cast<double>(loss_count);
    if (!std::isfinite(train_loss)) throw core::TrainingError("train: loss diverged");

    HistoryRow train_row;
    train_row.epoch = epoch;
    train_row.split = "train";
    train_row.loss = train_loss;
    history.push_back(train_row);

    if (val_set.size() > 0) {
      const EvalMetrics m = evaluate_on(params, val_set, val_idx);
      HistoryRow val_row;
      val_row.epoch = epoch;
      val_row.split = "val";
      val_row.loss = m.loss;
      val_row.top1 = m.top1;
      val_row.top5 = m.top5;
      val_row.top10 = m.top10;
      history.push_back(val_row);
      if (hook) hook(epoch, params, m);
    }
  }
  return history;
}

History fine_tune(ModelParams& params, const std::vector<Group>& freeze_spec,
                  const Dataset& tune_set, const Dataset& val_set, const TrainConfig& cfg) {
  for (bool& f : params.frozen) f = false;
  for (const Group g : freeze_spec) params.frozen[static_cast<int>(g)] = true;
  return train(params, tune_set, val_set, cfg);
}

}  // namespace beamsense::predictor
