#include <algorithm>
#include <cmath>
#include <utility>

#include "core/errors.hpp"
#include "scene/scene.hpp"

namespace beamsense::scene {

namespace {

constexpr double kVehicleLength = 3.0;
constexpr double kVehicleWidth = 2.0;
constexpr double kVehicleHeight = 2.0;

// The user is a regular engineering vehicle appended to the layout.
ObjectSpec user_vehicle_spec(int instance_id) {
  ObjectSpec obj;
  obj.class_id = kVehicle;
  obj.instance_id = instance_id;
  obj.footprint = core::rect_polygon(kVehicleLength / 2, kVehicleWidth / 2);
  obj.height_m = kVehicleHeight;
  obj.is_dynamic = true;
  obj.motion_kind = MotionKind::vehicle;
  return obj;
}

Trajectory run_attempt(const FactoryLayout& layout, const PathConfig& cfg,
                       const MotionConfig& motion, int user_index, core::Rng& rng) {
  const TransportArea ring = layout.transport_area();
  const double cell_m = 1.0 / 18.0;  // one grid cell at the default 18 px/m

  std::vector<MotionState> states = layout.initial_states;
  MotionState user;
  user.position = cfg.user_start;
  const core::Vec2 to_goal = cfg.user_goal - cfg.user_start;
  user.heading_deg = std::atan2(to_goal.y, to_goal.x) * 180.0 / M_PI;
  user.speed_mps = 1.0;
  states.push_back(user);

  std::vector<core::Rng> streams;
  streams.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) streams.push_back(rng.fork("object", i));

  Trajectory traj;
  traj.user_object_index = user_index;
  traj.states_per_frame.push_back(states);
  traj.user_positions.push_back(
      {user.position.x, user.position.y, cfg.antenna_height_m});

  for (int frame = 1; frame <= cfg.frame_cap; ++frame) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      const MotionKind kind = static_cast<int>(i) == user_index
                                  ? MotionKind::vehicle
                                  : layout.objects[i].motion_kind;
      if (kind == MotionKind::none) continue;
      if (static_cast<int>(i) == user_index) {
        MotionState& s = states[i];
        const double remaining = (cfg.user_goal - s.position).norm();
        if (remaining <= s.speed_mps * cfg.dt_s) {
          // Final approach: land on the goal rather than orbiting it.
          s.position = cfg.user_goal;
        } else {
          s = step_vehicle_toward(s, motion, cfg.dt_s, ring, cfg.user_goal, streams[i]);
        }
      } else if (kind == MotionKind::vehicle) {
        states[i] = step_vehicle(states[i], motion, cfg.dt_s, ring, streams[i]);
      } else {
        states[i] = step_arm(states[i], motion, cfg.dt_s, streams[i]);
      }
    }
    traj.states_per_frame.push_back(states);
    const core::Vec2 pos = states[user_index].position;
    traj.user_positions.push_back({pos.x, pos.y, cfg.antenna_height_m});
    if ((cfg.user_goal - pos).norm() <= cell_m) return traj;
  }
  return traj;  // goal not reached; caller decides
}

}  // namespace

int next_free_instance_id(const FactoryLayout& layout) {
  int max_id = 0;
  for (const auto& obj : layout.objects) max_id = std::max(max_id, obj.instance_id);
  return max_id + 1;
}

FactoryLayout append_user_vehicle(const FactoryLayout& layout, const core::Vec2& start) {
  FactoryLayout with_user = layout;
  with_user.objects.push_back(user_vehicle_spec(next_free_instance_id(layout)));
  MotionState s;
  s.position = start;
  s.speed_mps = 1.0;
  with_user.initial_states.push_back(s);
  return with_user;
}

Trajectory simulate_trajectory(const FactoryLayout& layout, const PathConfig& cfg,
                               const MotionConfig& motion, core::Rng& rng) {
  const TransportArea ring = layout.transport_area();
  if (!ring.contains(cfg.user_start) || !ring.contains(cfg.user_goal))
    throw core::ParameterError("simulate_trajectory: start/goal outside the transport area");

  const int user_index = static_cast<int>(layout.objects.size());

  // Deterministic retry loop: redraw the whole path until its frame count
  // lands inside the configured band.
  for (int attempt = 0; attempt < cfg.max_band_retries; ++attempt) {
    core::Rng attempt_rng = rng.fork("path_attempt", static_cast<std::uint64_t>(attempt));
    Trajectory traj = run_attempt(layout, cfg, motion, user_index, attempt_rng);
    const int frames = static_cast<int>(traj.states_per_frame.size());
    const core::Vec2 end = traj.states_per_frame.back()[user_index].position;
    const bool arrived = (cfg.user_goal - end).norm() <= 1.0 / 18.0;
    if (arrived && frames >= cfg.min_frames && frames <= cfg.max_frames) return traj;
  }
  throw core::SimulationError("simulate_trajectory: no attempt reached the goal within the band");
}

std::pair<Trajectory, std::vector<SegMapFrame>> simulate_path(const FactoryLayout& layout,
                                                              const PathConfig& cfg,
                                                              const MotionConfig& motion,
                                                              const RasterSpec& spec,
                                                              core::Rng& rng) {
  Trajectory traj = simulate_trajectory(layout, cfg, motion, rng);
  const FactoryLayout with_user = append_user_vehicle(layout, cfg.user_start);

  std::vector<SegMapFrame> frames;
  frames.reserve(traj.states_per_frame.size());
  for (std::size_t f = 0; f < traj.states_per_frame.size(); ++f) {
    SegMapFrame frame = rasterize(with_user, traj.states_per_frame[f], spec);
    frame.frame_index = static_cast<int>(f);
    frames.push_back(std::move(frame));
  }
  return {std::move(traj), std::move(frames)};
}

}  // namespace beamsense::scene
