#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "scene/scene.hpp"

namespace beamsense::scene {

namespace {

constexpr double kToolLong = 8.0;
constexpr double kToolShort = 4.0;
constexpr double kToolHeight = 3.0;
constexpr double kArmLength = 2.8;
constexpr double kArmWidth = 0.8;
constexpr double kArmHeight = 2.5;
constexpr double kControllerSide = 1.2;
constexpr double kControllerHeight = 1.5;
constexpr double kBucketSide = 1.0;
constexpr double kBucketHeight = 1.0;
constexpr double kVehicleLength = 3.0;
constexpr double kVehicleWidth = 2.0;
constexpr double kVehicleHeight = 2.0;
constexpr double kColumnSide = 0.8;
constexpr double kBeamWidth = 1.0;
constexpr double kBeamLowZ = 18.0;
constexpr double kBeamHighZ = 19.0;

// Mechanical arm: elongated footprint pivoting about its base center (the
// local origin). The swept disc radius is used for collision clearance.
core::Polygon arm_footprint() {
  return {{0.0, -kArmWidth / 2}, {kArmLength, -kArmWidth / 2},
          {kArmLength, kArmWidth / 2}, {0.0, kArmWidth / 2}};
}

core::Rect quadrant(const core::Rect& work, int idx) {
  const double mx = 0.5 * (work.x0 + work.x1);
  const double my = 0.5 * (work.y0 + work.y1);
  switch (idx) {
    case 1: return {work.x0, my, mx, work.y1};  // top-left
    case 2: return {mx, my, work.x1, work.y1};  // top-right
    case 3: return {work.x0, work.y0, mx, my};  // bottom-left
    default: return {mx, work.y0, work.x1, my};  // bottom-right
  }
}

double swept_radius(const ObjectSpec& obj) {
  double r = 0.0;
  for (const auto& p : obj.footprint) r = std::max(r, p.norm());
  // Rotating objects can reach any orientation; keep neighbours outside
  // the full swept disc.
  return r;
}

bool placement_ok(const FactoryLayout& layout, const ObjectSpec& candidate,
                  const MotionState& state) {
  const double r_new = swept_radius(candidate);
  const bool new_rotates = candidate.motion_kind == MotionKind::arm;
  for (std::size_t i = 0; i < layout.objects.size(); ++i) {
    const ObjectSpec& other = layout.objects[i];
    const MotionState& os = layout.initial_states[i];
    const bool other_rotates = other.motion_kind == MotionKind::arm;
    if (new_rotates || other_rotates) {
      const double gap = (state.position - os.position).norm();
      if (gap < r_new + swept_radius(other) + 0.2) return false;
    } else {
      const auto a = object_world_polygon(candidate, state);
      const auto b = object_world_polygon(other, os);
      if (core::polygons_overlap(a, b)) return false;
    }
  }
  return true;
}

bool footprint_inside(const core::Rect& rect, const ObjectSpec& obj, const MotionState& state) {
  if (obj.motion_kind == MotionKind::arm) {
    const double r = swept_radius(obj);
    return state.position.x - r >= rect.x0 && state.position.x + r <= rect.x1 &&
           state.position.y - r >= rect.y0 && state.position.y + r <= rect.y1;
  }
  for (const auto& p : object_world_polygon(obj, state)) {
    if (!rect.contains(p)) return false;
  }
  return true;
}

void place_uniform(FactoryLayout& layout, ObjectSpec obj, const core::Rect& sample_rect,
                   const core::Rect& containment, int max_attempts, core::Rng& rng) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    MotionState state;
    state.position = {rng.uniform(sample_rect.x0, sample_rect.x1),
                      rng.uniform(sample_rect.y0, sample_rect.y1)};
    state.heading_deg = 0.0;
    if (!footprint_inside(containment, obj, state)) continue;
    if (!placement_ok(layout, obj, state)) continue;
    layout.objects.push_back(std::move(obj));
    layout.initial_states.push_back(state);
    return;
  }
  throw core::LayoutError("sample_environment: could not place object class " +
                          std::to_string(obj.class_id));
}

}  // namespace

core::Polygon object_world_polygon(const ObjectSpec& obj, const MotionState& s) {
  const double angle = obj.motion_kind == MotionKind::arm ? s.arm_angle_deg : s.heading_deg;
  return core::rotate_translate(obj.footprint, angle, s.position);
}

std::vector<core::Box3> structural_columns(const FactoryLayout& layout) {
  std::vector<core::Box3> boxes;
  const double h = kColumnSide / 2;
  for (const double cx : {12.0, 30.0, 48.0}) {
    for (const double cy : {12.0, 28.0}) {
      boxes.push_back({{cx - h, cy - h, 0.0}, {cx + h, cy + h, layout.height_m}});
    }
  }
  return boxes;
}

std::vector<core::Box3> structural_crossbeams(const FactoryLayout& layout) {
  std::vector<core::Box3> boxes;
  const double h = kBeamWidth / 2;
  const auto x_beam = [&](double cy) {
    boxes.push_back({{0.0, cy - h, kBeamLowZ}, {layout.length_m, cy + h, kBeamHighZ}});
  };
  const auto y_beam = [&](double cx) {
    boxes.push_back({{cx - h, 0.0, kBeamLowZ}, {cx + h, layout.width_m, kBeamHighZ}});
  };
  switch (layout.crossbeam_mode) {
    case 1:
      x_beam(15.0);
      x_beam(25.0);
      break;
    case 2:
      y_beam(15.0);
      y_beam(30.0);
      y_beam(45.0);
      break;
    default:
      x_beam(12.0);
      x_beam(28.0);
      y_beam(20.0);
      y_beam(40.0);
      break;
  }
  return boxes;
}

FactoryLayout sample_environment(const EnvConfig& cfg, core::Rng& rng) {
  FactoryLayout layout;
  layout.bs_positions = {{6.0, 30.0, 8.0}, {30.0, 6.0, 8.0}};
  layout.crossbeam_mode = 1 + static_cast<int>(rng.uniform_int(3));

  int next_instance = 1;
  const auto make = [&next_instance](int class_id, core::Polygon fp, double height,
                                     MotionKind kind) {
    ObjectSpec obj;
    obj.class_id = class_id;
    obj.instance_id = next_instance++;
    obj.footprint = std::move(fp);
    obj.height_m = height;
    obj.motion_kind = kind;
    obj.is_dynamic = kind != MotionKind::none;
    return obj;
  };

  // Columns are fixed structural geometry shared by all layouts; they are
  // also real floor objects, so they get segmentation instances.
  for (const auto& box : structural_columns(layout)) {
    ObjectSpec col = make(kColumn, core::rect_polygon(kColumnSide / 2, kColumnSide / 2),
                          layout.height_m, MotionKind::none);
    MotionState s;
    s.position = {0.5 * (box.lo.x + box.hi.x), 0.5 * (box.lo.y + box.hi.y)};
    layout.objects.push_back(std::move(col));
    layout.initial_states.push_back(s);
  }

  // Machine tools occupy two distinct quadrants chosen uniformly; tools sit
  // vertically (long side along y) in quadrants 1-2 and horizontally in 3-4.
  const int first = 1 + static_cast<int>(rng.uniform_int(4));
  int second = 1 + static_cast<int>(rng.uniform_int(3));
  if (second >= first) ++second;
  for (const int qidx : {std::min(first, second), std::max(first, second)}) {
    const bool vertical = qidx <= 2;
    const double hx = (vertical ? kToolShort : kToolLong) / 2;
    const double hy = (vertical ? kToolLong : kToolShort) / 2;
    const core::Rect q = quadrant(layout.work_area, qidx);
    const core::Rect center_box{q.x0 + hx, q.y0 + hy, q.x1 - hx, q.y1 - hy};
    place_uniform(layout,
                  make(kMachineTool, core::rect_polygon(hx, hy), kToolHeight, MotionKind::none),
                  center_box, q, cfg.max_place_attempts, rng);
  }

  for (int i = 0; i < cfg.n_arms; ++i) {
    place_uniform(layout, make(kArm, arm_footprint(), kArmHeight, MotionKind::arm),
                  layout.work_area, layout.work_area, cfg.max_place_attempts, rng);
    layout.initial_states.back().arm_angle_deg = rng.uniform(0.0, 360.0);
  }
  for (int i = 0; i < cfg.n_controllers; ++i) {
    place_uniform(layout,
                  make(kController, core::rect_polygon(kControllerSide / 2, kControllerSide / 2),
                       kControllerHeight, MotionKind::none),
                  layout.work_area, layout.work_area, cfg.max_place_attempts, rng);
  }
  for (int i = 0; i < cfg.n_buckets; ++i) {
    place_uniform(layout,
                  make(kBucket, core::rect_polygon(kBucketSide / 2, kBucketSide / 2),
                       kBucketHeight, MotionKind::none),
                  layout.work_area, layout.work_area, cfg.max_place_attempts, rng);
  }

  // Roaming transport vehicles start in the ring.
  const TransportArea ring = layout.transport_area();
  for (int i = 0; i < cfg.n_extra_vehicles; ++i) {
    ObjectSpec veh = make(kVehicle, core::rect_polygon(kVehicleLength / 2, kVehicleWidth / 2),
                          kVehicleHeight, MotionKind::vehicle);
    for (int attempt = 0;; ++attempt) {
      if (attempt >= cfg.max_place_attempts)
        throw core::LayoutError("sample_environment: could not place vehicle");
      MotionState s;
      const double margin = 2.5;
      s.position = {rng.uniform(margin, layout.length_m - margin),
                    rng.uniform(margin, layout.width_m - margin)};
      s.heading_deg = rng.uniform(0.0, 360.0);
      s.speed_mps = 1.0;
      if (!ring.contains(s.position)) continue;
      if (!placement_ok(layout, veh, s)) continue;
      layout.objects.push_back(std::move(veh));
      layout.initial_states.push_back(s);
      break;
    }
  }

  return layout;
}

}  // namespace beamsense::scene
