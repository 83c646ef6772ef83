#include <algorithm>

#include "core/errors.hpp"
#include "sensing/sensing.hpp"

namespace beamsense::sensing {

namespace {

struct Track {
  int class_id = 0;
  int instance_key = 0;
  std::vector<std::vector<std::uint32_t>> pixels_per_frame;  // empty when absent
};

// Pixel-indexed ownership of the previous frame's masks; version stamps make
// per-frame resets O(1). Masks of one class are disjoint, so each pixel has
// at most one owner.
struct OwnerIndex {
  std::vector<std::int32_t> owner;
  std::vector<std::uint32_t> stamp;
  std::uint32_t version = 0;

  explicit OwnerIndex(std::size_t pixels) : owner(pixels, -1), stamp(pixels, 0) {}

  void begin_frame() { ++version; }

  void claim(const std::vector<std::uint32_t>& pixels, std::int32_t id) {
    for (const std::uint32_t px : pixels) {
      owner[px] = id;
      stamp[px] = version;
    }
  }

  std::int32_t owner_of(std::uint32_t px) const {
    return stamp[px] == version ? owner[px] : -1;
  }
};

}  // namespace

FrameInstances extract_frame_instances(const scene::SegMapFrame& frame, double mu) {
  FrameInstances out;
  out.rows = frame.rows;
  out.cols = frame.cols;
  for (int q = 1; q < scene::kNumClasses; ++q) {
    out.by_class[q] =
        refine_instances(two_pass_label(class_mask(frame, q), frame.rows, frame.cols, q), mu);
  }
  return out;
}

DetectionResult detect_from_instances(const std::vector<const FrameInstances*>& frames,
                                      const DetectionConfig& cfg) {
  const int l = static_cast<int>(frames.size());
  if (l < cfg.lags + 2) throw core::ParameterError("detect_dynamic_scatterers: window too short");
  const int rows = frames.front()->rows;
  const int cols = frames.front()->cols;
  for (const auto* f : frames) {
    if (f->rows != rows || f->cols != cols)
      throw core::ParameterError("detect_dynamic_scatterers: frame dims differ");
  }

  DetectionResult out;
  out.rows = rows;
  out.cols = cols;

  std::vector<Track> tracks;
  OwnerIndex index(static_cast<std::size_t>(rows) * cols);
  for (int q = 1; q < scene::kNumClasses; ++q) {
    std::vector<std::size_t> track_ids;  // tracks of class q
    int next_key = 1;
    index.begin_frame();  // drop the previous class's ownership
    for (int t = 0; t < l; ++t) {
      const std::vector<InstanceMap>& instances = frames[t]->by_class[q];

      // Greedy maximal-overlap matching against the previous frame's masks,
      // found by probing each instance's pixels in the ownership index.
      // Ties resolve to the earliest track slot.
      std::vector<int> match(instances.size(), -1);
      std::vector<bool> taken(track_ids.size(), false);
      std::vector<std::size_t> overlap(track_ids.size(), 0);
      std::vector<std::size_t> touched;
      for (std::size_t i = 0; i < instances.size(); ++i) {
        touched.clear();
        for (const std::uint32_t px : instances[i].pixels) {
          const std::int32_t slot = index.owner_of(px);
          if (slot < 0) continue;
          if (overlap[static_cast<std::size_t>(slot)]++ == 0)
            touched.push_back(static_cast<std::size_t>(slot));
        }
        std::size_t best = 0;
        int best_track = -1;
        std::sort(touched.begin(), touched.end());
        for (const std::size_t slot : touched) {
          if (!taken[slot] && overlap[slot] > best) {
            best = overlap[slot];
            best_track = static_cast<int>(slot);
          }
        }
        for (const std::size_t slot : touched) overlap[slot] = 0;
        if (best_track >= 0) {
          match[i] = best_track;
          taken[static_cast<std::size_t>(best_track)] = true;
        }
      }

      index.begin_frame();
      for (std::size_t i = 0; i < instances.size(); ++i) {
        std::size_t tid;
        std::size_t slot;
        if (match[i] >= 0) {
          slot = static_cast<std::size_t>(match[i]);
          tid = track_ids[slot];
        } else {
          Track tr;
          tr.class_id = q;
          tr.instance_key = next_key++;
          tr.pixels_per_frame.assign(static_cast<std::size_t>(l), {});
          tracks.push_back(std::move(tr));
          tid = tracks.size() - 1;
          track_ids.push_back(tid);
          slot = track_ids.size() - 1;
        }
        tracks[tid].pixels_per_frame[static_cast<std::size_t>(t)] = instances[i].pixels;
        index.claim(tracks[tid].pixels_per_frame[static_cast<std::size_t>(t)],
                    static_cast<std::int32_t>(slot));
      }
    }
  }

  // Classify each track from its difference sequence; frames where the track
  // is absent contribute an empty mask, which the diff naturally penalizes.
  out.tracks.reserve(tracks.size());
  for (Track& tr : tracks) {
    DiffSequence seq;
    seq.class_id = tr.class_id;
    seq.instance_key = tr.instance_key;
    seq.values.reserve(static_cast<std::size_t>(l) - 1);
    const std::vector<std::uint32_t>& first = tr.pixels_per_frame[0];
    for (int t = 1; t < l; ++t) {
      // Symmetric difference of two sorted pixel lists.
      const std::vector<std::uint32_t>& other = tr.pixels_per_frame[static_cast<std::size_t>(t)];
      std::size_t ia = 0, ib = 0, diff = 0;
      while (ia < first.size() && ib < other.size()) {
        if (first[ia] == other[ib]) {
          ++ia;
          ++ib;
        } else if (first[ia] < other[ib]) {
          ++ia;
          ++diff;
        } else {
          ++ib;
          ++diff;
        }
      }
      diff += (first.size() - ia) + (other.size() - ib);
      seq.values.push_back(static_cast<std::int64_t>(diff));
    }

    DetectionResult::Track rec;
    rec.class_id = tr.class_id;
    rec.instance_key = tr.instance_key;
    rec.result = classify_dynamic(seq, cfg.lags, cfg.alpha);
    rec.pixels_per_frame = std::move(tr.pixels_per_frame);
    out.tracks.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::vector<std::uint16_t>> render_dynamic_maps(const DetectionResult& result) {
  if (result.tracks.empty()) return {};
  const std::size_t l = result.tracks.front().pixels_per_frame.size();
  std::vector<std::vector<std::uint16_t>> maps(
      l, std::vector<std::uint16_t>(static_cast<std::size_t>(result.rows) * result.cols, 0));
  for (const auto& tr : result.tracks) {
    if (!tr.result.is_dynamic) continue;
    for (std::size_t t = 0; t < l; ++t) {
      for (const std::uint32_t px : tr.pixels_per_frame[t])
        maps[t][px] = static_cast<std::uint16_t>(tr.class_id);
    }
  }
  return maps;
}

DetectionResult detect_dynamic_scatterers(const std::vector<const scene::SegMapFrame*>& frames,
                                          const DetectionConfig& cfg) {
  std::vector<FrameInstances> extracted;
  extracted.reserve(frames.size());
  for (const auto* f : frames) extracted.push_back(extract_frame_instances(*f, cfg.mu));
  std::vector<const FrameInstances*> views;
  views.reserve(extracted.size());
  for (const auto& e : extracted) views.push_back(&e);

  DetectionResult result = detect_from_instances(views, cfg);
  result.dynamic_maps = render_dynamic_maps(result);
  if (result.dynamic_maps.empty()) {
    result.dynamic_maps.assign(
        frames.size(),
        std::vector<std::uint16_t>(static_cast<std::size_t>(result.rows) * result.cols, 0));
  }
  return result;
}

}  // namespace beamsense::sensing
