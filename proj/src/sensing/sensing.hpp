#pragma once

#include <cstdint>
#include <vector>

#include "core/geometry.hpp"
#include "scene/scene.hpp"
#include "sensing/stats.hpp"

namespace beamsense::sensing {

using BinaryGrid = std::vector<std::uint8_t>;  // row-major, rows*cols entries

// One connected instance of a semantic class; pixels are stored as sorted
// row-major linear indices into the source grid.
struct InstanceMap {
  std::vector<std::uint32_t> pixels;
  int class_id = 0;
  int instance_key = 0;
  int rows = 0;
  int cols = 0;
};

// pixel = 1 iff the frame's class grid equals q.
BinaryGrid class_mask(const scene::SegMapFrame& frame, int q);

// Frame-level agreement metrics between predicted and true class grids:
// pixel precision and mean intersection-over-union over observed classes.
struct SegMetrics {
  double precision = 0.0;
  double miou = 0.0;
};
SegMetrics seg_metrics(const scene::SegMapFrame& pred, const scene::SegMapFrame& truth);

// Two-pass 4-connected component labelling (up/left scan with equivalence
// merging); each component becomes one InstanceMap, keyed in scan order.
std::vector<InstanceMap> two_pass_label(const BinaryGrid& mask, int rows, int cols, int q);

// Iteratively drops the smallest instance while its pixel count is below
// mu times the mean count of the remaining instances.
std::vector<InstanceMap> refine_instances(std::vector<InstanceMap> maps, double mu);

// Pixel-difference counts of each frame against the first; input maps must
// be aligned views of the same instance.
DiffSequence diff_sequence(const std::vector<const InstanceMap*>& frames);

// Voxelized static point cloud: per-voxel mean offset from the voxel center
// plus an occupancy grid distinguishing empty voxels from centered points.
struct PseudoImage {
  int dims[3] = {0, 0, 0};  // a, b, c
  core::Box3 cube;
  std::vector<double> grid;        // a*b*c*3, offsets in meters
  std::vector<std::uint8_t> occupancy;  // a*b*c

  std::size_t voxel_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k;
  }
};

PseudoImage voxelize(const scene::PointCloud& cloud, const core::Box3& cube, int a, int b, int c);

// Per-window dynamic scatterer detection (mask -> label -> refine -> diff ->
// Ljung-Box), with instances tracked across frames by maximal mask overlap.
struct DetectionConfig {
  double mu = 0.1;
  int lags = 4;  // m
  double alpha = 0.15;
};

struct DetectionResult {
  // Per input frame: class values kept only where a dynamic instance sits.
  std::vector<std::vector<std::uint16_t>> dynamic_maps;
  struct Track {
    int class_id = 0;
    int instance_key = 0;
    LjungBoxResult result;
    std::vector<std::vector<std::uint32_t>> pixels_per_frame;  // aligned masks
  };
  std::vector<Track> tracks;
  int rows = 0;
  int cols = 0;
};

// Refined instances of one frame, bucketed by class. Extraction is a pure
// function of the frame, so callers processing overlapping windows can cache
// it per frame.
struct FrameInstances {
  int rows = 0;
  int cols = 0;
  std::vector<InstanceMap> by_class[scene::kNumClasses];
};

FrameInstances extract_frame_instances(const scene::SegMapFrame& frame, double mu);

// Tracking + Ljung-Box classification over pre-extracted instances; leaves
// dynamic_maps empty (render_dynamic_maps fills them when needed).
DetectionResult detect_from_instances(const std::vector<const FrameInstances*>& frames,
                                      const DetectionConfig& cfg);

std::vector<std::vector<std::uint16_t>> render_dynamic_maps(const DetectionResult& result);

DetectionResult detect_dynamic_scatterers(const std::vector<const scene::SegMapFrame*>& frames,
                                          const DetectionConfig& cfg);

}  // namespace beamsense::sensing
