#include <algorithm>
#include <numeric>

#include "core/errors.hpp"
#include "sensing/sensing.hpp"

namespace beamsense::sensing {

BinaryGrid class_mask(const scene::SegMapFrame& frame, int q) {
  if (q < 0 || q >= scene::kNumClasses) throw core::ParameterError("class_mask: q out of range");
  BinaryGrid mask(frame.class_grid.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = frame.class_grid[i] == q ? 1 : 0;
  return mask;
}

SegMetrics seg_metrics(const scene::SegMapFrame& pred, const scene::SegMapFrame& truth) {
  if (pred.rows != truth.rows || pred.cols != truth.cols)
    throw core::ParameterError("seg_metrics: dimension mismatch");

  const std::size_t n = pred.class_grid.size();
  std::size_t matches = 0;
  // Per-class intersection / union tallies.
  std::size_t inter[scene::kNumClasses] = {};
  std::size_t in_pred[scene::kNumClasses] = {};
  std::size_t in_truth[scene::kNumClasses] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const int p = pred.class_grid[i];
    const int t = truth.class_grid[i];
    if (p == t) {
      ++matches;
      ++inter[p];
    }
    ++in_pred[p];
    ++in_truth[t];
  }

  SegMetrics out;
  out.precision = static_cast<double>(matches) / static_cast<double>(n);
  double iou_sum = 0.0;
  int observed = 0;
  for (int q = 0; q < scene::kNumClasses; ++q) {
    const std::size_t uni = in_pred[q] + in_truth[q] - inter[q];
    if (uni == 0) continue;  // class absent from both grids
    iou_sum += static_cast<double>(inter[q]) / static_cast<double>(uni);
    ++observed;
  }
  out.miou = observed > 0 ? iou_sum / observed : 1.0;
  return out;
}

namespace {

// Union-find over provisional labels ("connectivity area sets").
struct LabelSets {
  std::vector<std::uint32_t> parent;

  std::uint32_t make() {
    parent.push_back(static_cast<std::uint32_t>(parent.size()));
    return static_cast<std::uint32_t>(parent.size() - 1);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;  // keep the smaller label as representative
  }
};

}  // namespace

std::vector<InstanceMap> two_pass_label(const BinaryGrid& mask, int rows, int cols, int q) {
  if (mask.size() != static_cast<std::size_t>(rows) * cols)
    throw core::ParameterError("two_pass_label: mask size mismatch");

  std::vector<std::uint32_t> labels(mask.size(), 0);
  LabelSets sets;
  sets.make();  // label 0 = background

  // First pass: inspect the up and left neighbours only.
  for (int r = 0; r < rows; ++r) {
    const std::size_t row = static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      if (!mask[row + c]) continue;
      const std::uint32_t up = r > 0 ? labels[row - cols + c] : 0;
      const std::uint32_t left = c > 0 ? labels[row + c - 1] : 0;
      if (up == 0 && left == 0) {
        labels[row + c] = sets.make();
      } else if (up != 0 && left != 0) {
        labels[row + c] = std::min(up, left);
        sets.unite(up, left);
      } else {
        labels[row + c] = up ? up : left;
      }
    }
  }

  // Second pass: unify provisional labels, then gather pixels per instance
  // keyed in scan order of first appearance.
  std::vector<std::uint32_t> compact(sets.parent.size(), 0);
  std::uint32_t next_key = 0;
  std::vector<InstanceMap> instances;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!labels[i]) continue;
    const std::uint32_t root = sets.find(labels[i]);
    if (compact[root] == 0) {
      compact[root] = ++next_key;
      InstanceMap inst;
      inst.class_id = q;
      inst.instance_key = static_cast<int>(next_key);
      inst.rows = rows;
      inst.cols = cols;
      instances.push_back(std::move(inst));
    }
    instances[compact[root] - 1].pixels.push_back(static_cast<std::uint32_t>(i));
  }
  return instances;
}

std::vector<InstanceMap> refine_instances(std::vector<InstanceMap> maps, double mu) {
  if (!(mu > 0.0 && mu < 1.0)) throw core::ParameterError("refine_instances: mu must be in (0,1)");
  if (maps.size() <= 1) return maps;

  // The loop always removes the current global minimum, so processing counts
  // in ascending order with a running total is equivalent and avoids the
  // quadratic rescan. Ties keep the earlier instance as the minimum.
  std::vector<std::size_t> order(maps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&maps](std::size_t a, std::size_t b) {
    return maps[a].pixels.size() < maps[b].pixels.size();
  });

  std::size_t total = 0;
  for (const auto& m : maps) total += m.pixels.size();

  std::size_t removed = 0;
  std::vector<bool> keep(maps.size(), true);
  while (removed + 1 < maps.size()) {
    const std::size_t idx = order[removed];
    const std::size_t min_count = maps[idx].pixels.size();
    const double mean_other = static_cast<double>(total - min_count) /
                              static_cast<double>(maps.size() - removed - 1);
    if (static_cast<double>(min_count) < mu * mean_other) {
      keep[idx] = false;
      total -= min_count;
      ++removed;
    } else {
      break;
    }
  }
  if (removed == 0) return maps;

  std::vector<InstanceMap> out;
  out.reserve(maps.size() - removed);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (keep[i]) out.push_back(std::move(maps[i]));
  }
  return out;
}

DiffSequence diff_sequence(const std::vector<const InstanceMap*>& frames) {
  if (frames.size() < 2) throw core::ParameterError("diff_sequence: needs at least two frames");
  const InstanceMap* first = frames.front();
  for (const InstanceMap* m : frames) {
    if (m->rows != first->rows || m->cols != first->cols)
      throw core::ParameterError("diff_sequence: dimension mismatch");
  }

  DiffSequence seq;
  seq.class_id = first->class_id;
  seq.instance_key = first->instance_key;
  seq.values.reserve(frames.size() - 1);
  for (std::size_t t = 1; t < frames.size(); ++t) {
    // Pixels in exactly one of the two masks differ; both lists are sorted,
    // so the symmetric difference is a linear merge.
    const auto& a = first->pixels;
    const auto& b = frames[t]->pixels;
    std::size_t ia = 0, ib = 0, diff = 0;
    while (ia < a.size() && ib < b.size()) {
      if (a[ia] == b[ib]) {
        ++ia;
        ++ib;
      } else if (a[ia] < b[ib]) {
        ++ia;
        ++diff;
      } else {
        ++ib;
        ++diff;
      }
    }
    diff += (a.size() - ia) + (b.size() - ib);
    seq.values.push_back(static_cast<std::int64_t>(diff));
  }
  return seq;
}

}  // namespace beamsense::sensing
