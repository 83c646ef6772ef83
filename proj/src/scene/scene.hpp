#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "core/geometry.hpp"
#include "core/rng.hpp"

namespace beamsense::scene {

// Semantic class ids. Background is 0 and reserved.
enum ClassId : int {
  kBackground = 0,
  kVehicle = 1,
  kArm = 2,
  kMachineTool = 3,
  kController = 4,
  kBucket = 5,
  kColumn = 6,
  kCrossbeam = 7,
};
constexpr int kNumClasses = 8;  // Q

enum class MotionKind { none, vehicle, arm };

struct ObjectSpec {
  int class_id = kBackground;
  int instance_id = 0;
  core::Polygon footprint;  // local frame, centered on the motion pivot
  double height_m = 0.0;
  bool is_dynamic = false;
  MotionKind motion_kind = MotionKind::none;
};

struct MotionState {
  core::Vec2 position;
  double heading_deg = 0.0;
  double speed_mps = 0.0;
  double arm_angle_deg = 0.0;  // arms only
};

struct MotionConfig {
  double heading_var = 7.5;                    // deg^2
  double heading_bound_deg = 30.0;             // per-step change limit
  double speed_var = 0.02;                     // (m/s)^2
  double speed_bounds[2] = {0.8, 1.2};         // m/s
  double arm_speed_range_dps[2] = {0.0, 36.0}; // deg/s
};

// Rectangular ring: inside the outer bounds but outside the work-area hole.
struct TransportArea {
  core::Rect outer;
  core::Rect hole;

  bool contains(const core::Vec2& p) const {
    return outer.contains(p) && !hole.contains_strict(p);
  }
};

struct FactoryLayout {
  double length_m = 60.0;
  double width_m = 40.0;
  double height_m = 20.0;
  core::Rect work_area{10.0, 10.0, 50.0, 30.0};
  int crossbeam_mode = 1;                 // in {1,2,3}
  std::vector<ObjectSpec> objects;        // static and dynamic, instance_id order
  std::vector<MotionState> initial_states;
  std::vector<core::Vec3> bs_positions;

  TransportArea transport_area() const {
    return {{0.0, 0.0, length_m, width_m}, work_area};
  }
};

struct RasterSpec {
  int rows = 720;   // m * H with m=2, H=360
  int cols = 1080;  // n * W with n=3, W=360
};

struct SegMapFrame {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint16_t> class_grid;           // row-major
  std::vector<std::uint16_t> truth_instance_grid;  // evaluation-only
  int frame_index = 0;
  double frame_interval_ms = 50.0;

  std::uint16_t class_at(int r, int c) const { return class_grid[static_cast<std::size_t>(r) * cols + c]; }
};

struct PointCloud {
  std::vector<core::Vec3> points;
};

struct EnvConfig {
  int n_arms = 4;
  int n_controllers = 3;
  int n_buckets = 3;
  int n_extra_vehicles = 2;  // roaming vehicles, user vehicle added separately
  int max_place_attempts = 256;
};

struct PathConfig {
  core::Vec2 user_start{48.0, 5.0};
  core::Vec2 user_goal{29.4, 5.0};
  double dt_s = 0.05;
  int min_frames = 350;
  int max_frames = 400;
  int frame_cap = 4000;
  int max_band_retries = 32;
  double antenna_height_m = 2.0;  // receiver on top of the user vehicle
};

// Per-frame snapshot of every object state plus the user position.
struct Trajectory {
  std::vector<std::vector<MotionState>> states_per_frame;  // [frame][object]
  std::vector<core::Vec3> user_positions;                  // antenna positions
  int user_object_index = -1;
};

// Sample from a normal(mu, var) restricted and renormalized to (lo, hi].
double sample_truncated_gaussian(double mu, double var, double lo, double hi, core::Rng& rng);

// One 50 ms step of a transport vehicle: heading and speed follow truncated
// Gaussians around their previous values; moves that would leave the
// transport ring trigger heading resampling, then reversal.
MotionState step_vehicle(const MotionState& state, const MotionConfig& cfg, double dt_s,
                         const TransportArea& area, core::Rng& rng);

// One step of a mechanical arm: rotation rate drawn uniformly per step.
MotionState step_arm(const MotionState& state, const MotionConfig& cfg, double dt_s,
                     core::Rng& rng);

// Goal-seeking variant used by the user vehicle: the heading mean is nudged
// toward the goal bearing, but the per-step change stays within the
// configured bound of the previous heading.
MotionState step_vehicle_toward(const MotionState& state, const MotionConfig& cfg, double dt_s,
                                const TransportArea& area, const core::Vec2& goal,
                                core::Rng& rng);

// Randomized layout: machine tools in two of the four work-area quadrants,
// arms/controllers/buckets placed without overlap, one crossbeam mode.
FactoryLayout sample_environment(const EnvConfig& cfg, core::Rng& rng);

// Structural geometry derived from the layout (not part of `objects`):
// columns below, crossbeams overhead per the layout's mode.
std::vector<core::Box3> structural_columns(const FactoryLayout& layout);
std::vector<core::Box3> structural_crossbeams(const FactoryLayout& layout);

// World-space footprint of object `i` under state `s`.
core::Polygon object_world_polygon(const ObjectSpec& obj, const MotionState& s);

// Orthographic top-down projection; each pixel takes the class of the
// topmost covering object, 0 for background. Crossbeams hang above the
// camera plane and are not rendered.
SegMapFrame rasterize(const FactoryLayout& layout, const std::vector<MotionState>& states,
                      const RasterSpec& spec);

// Each pixel is independently replaced by a uniformly random *other* class
// with probability p_flip. The truth instance grid is left untouched.
SegMapFrame inject_label_noise(const SegMapFrame& frame, double p_flip, core::Rng& rng);

// Uniform surface sampling over static geometry: static objects, columns,
// crossbeams, and the building shell.
PointCloud sample_point_cloud(const FactoryLayout& layout, double density_pts_per_m2,
                              core::Rng& rng);

// Uniform sampling over the six faces of each box; point count per face is
// area * density with stochastic rounding of the remainder.
PointCloud sample_box_surfaces(const std::vector<core::Box3>& boxes, double density_pts_per_m2,
                               core::Rng& rng);

// Smallest instance id not used by the layout's objects.
int next_free_instance_id(const FactoryLayout& layout);

// Copy of the layout with the user engineering vehicle appended; its state
// per frame is the last entry of each Trajectory snapshot.
FactoryLayout append_user_vehicle(const FactoryLayout& layout, const core::Vec2& start);

// Steps all dynamic objects until the user vehicle reaches its goal; retries
// (deterministically) until the frame count lands inside the configured band.
Trajectory simulate_trajectory(const FactoryLayout& layout, const PathConfig& cfg,
                               const MotionConfig& motion, core::Rng& rng);

// Materialized variant returning the rasterized frame sequence.
std::pair<Trajectory, std::vector<SegMapFrame>> simulate_path(const FactoryLayout& layout,
                                                              const PathConfig& cfg,
                                                              const MotionConfig& motion,
                                                              const RasterSpec& spec,
                                                              core::Rng& rng);

}  // namespace beamsense::scene
