#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "core/rng.hpp"
#include "scene/scene.hpp"
#include "sensing/sensing.hpp"

using namespace beamsense;

namespace {

// Small factory slice: one moving vehicle, one rotating arm, three static
// objects, rendered at reduced resolution.
struct MiniScene {
  scene::FactoryLayout layout;
  std::vector<std::vector<scene::MotionState>> states;  // per frame
};

MiniScene make_scene(int frames, std::uint64_t seed) {
  MiniScene ms;
  auto& layout = ms.layout;

  int next_id = 1;
  const auto add = [&](int class_id, core::Polygon fp, double h, scene::MotionKind kind,
                       core::Vec2 pos) {
    scene::ObjectSpec obj;
    obj.class_id = class_id;
    obj.instance_id = next_id++;
    obj.footprint = std::move(fp);
    obj.height_m = h;
    obj.motion_kind = kind;
    obj.is_dynamic = kind != scene::MotionKind::none;
    layout.objects.push_back(std::move(obj));
    scene::MotionState s;
    s.position = pos;
    s.speed_mps = kind == scene::MotionKind::vehicle ? 1.0 : 0.0;
    layout.initial_states.push_back(s);
  };

  add(scene::kVehicle, core::rect_polygon(1.5, 1.0), 2.0, scene::MotionKind::vehicle, {20.0, 5.0});
  add(scene::kArm, {{0, -0.4}, {2.8, -0.4}, {2.8, 0.4}, {0, 0.4}}, 2.5, scene::MotionKind::arm,
      {30.0, 20.0});
  add(scene::kMachineTool, core::rect_polygon(2.0, 4.0), 3.0, scene::MotionKind::none,
      {15.0, 25.0});
  add(scene::kController, core::rect_polygon(0.6, 0.6), 1.5, scene::MotionKind::none,
      {40.0, 15.0});
  add(scene::kBucket, core::rect_polygon(0.5, 0.5), 1.0, scene::MotionKind::none, {44.0, 26.0});

  core::Rng rng(seed);
  const scene::TransportArea ring = layout.transport_area();
  const scene::MotionConfig motion;
  auto states = layout.initial_states;
  for (int f = 0; f < frames; ++f) {
    ms.states.push_back(states);
    for (std::size_t i = 0; i < states.size(); ++i) {
      core::Rng stream = rng.fork("obj", i, static_cast<std::uint64_t>(f));
      switch (layout.objects[i].motion_kind) {
        case scene::MotionKind::vehicle:
          states[i] = scene::step_vehicle(states[i], motion, 0.05, ring, stream);
          break;
        case scene::MotionKind::arm:
          states[i] = scene::step_arm(states[i], motion, 0.05, stream);
          break;
        case scene::MotionKind::none:
          break;
      }
    }
  }
  return ms;
}

std::vector<scene::SegMapFrame> render(const MiniScene& ms, double p_flip, std::uint64_t seed) {
  const scene::RasterSpec spec{180, 270};
  core::Rng noise(seed);
  std::vector<scene::SegMapFrame> frames;
  for (const auto& st : ms.states) {
    scene::SegMapFrame f = scene::rasterize(ms.layout, st, spec);
    if (p_flip > 0.0) f = scene::inject_label_noise(f, p_flip, noise);
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace

TEST_CASE("noise-free window keeps exactly the moving objects") {
  const MiniScene ms = make_scene(16, 3);
  const auto frames = render(ms, 0.0, 0);
  std::vector<const scene::SegMapFrame*> views;
  for (const auto& f : frames) views.push_back(&f);

  const auto result = sensing::detect_dynamic_scatterers(views, {});

  std::map<int, bool> verdict_by_class;
  for (const auto& tr : result.tracks) verdict_by_class[tr.class_id] = tr.result.is_dynamic;
  CHECK(verdict_by_class.at(scene::kVehicle));
  CHECK(verdict_by_class.at(scene::kArm));  // rotation alone must classify dynamic
  CHECK_FALSE(verdict_by_class.at(scene::kMachineTool));
  CHECK_FALSE(verdict_by_class.at(scene::kController));
  CHECK_FALSE(verdict_by_class.at(scene::kBucket));

  // Dynamic maps carry only vehicle and arm pixels.
  for (const auto& map : result.dynamic_maps) {
    for (const auto v : map) {
      if (v != 0) CHECK((v == scene::kVehicle || v == scene::kArm));
    }
  }
  // And they are non-empty: the vehicle is visible in every frame.
  std::size_t nonzero = 0;
  for (const auto v : result.dynamic_maps[0]) nonzero += v != 0;
  CHECK(nonzero > 0);
}

TEST_CASE("wrapper equals the two-stage detection path") {
  const MiniScene ms = make_scene(16, 5);
  const auto frames = render(ms, 0.04, 77);
  std::vector<const scene::SegMapFrame*> views;
  for (const auto& f : frames) views.push_back(&f);
  const auto direct = sensing::detect_dynamic_scatterers(views, {});

  std::vector<sensing::FrameInstances> inst;
  for (const auto& f : frames) inst.push_back(sensing::extract_frame_instances(f, 0.1));
  std::vector<const sensing::FrameInstances*> iviews;
  for (const auto& i : inst) iviews.push_back(&i);
  const auto staged = sensing::detect_from_instances(iviews, {});

  REQUIRE(direct.tracks.size() == staged.tracks.size());
  for (std::size_t i = 0; i < direct.tracks.size(); ++i) {
    CHECK(direct.tracks[i].class_id == staged.tracks[i].class_id);
    CHECK(direct.tracks[i].result.is_dynamic == staged.tracks[i].result.is_dynamic);
    CHECK(direct.tracks[i].result.q_stat == doctest::Approx(staged.tracks[i].result.q_stat));
  }
}

TEST_CASE("overlap tracking follows a moving instance across frames") {
  const MiniScene ms = make_scene(16, 9);
  const auto frames = render(ms, 0.0, 0);
  std::vector<const scene::SegMapFrame*> views;
  for (const auto& f : frames) views.push_back(&f);
  const auto result = sensing::detect_dynamic_scatterers(views, {});

  // Exactly one vehicle track, present in every frame.
  int vehicle_tracks = 0;
  for (const auto& tr : result.tracks) {
    if (tr.class_id != scene::kVehicle) continue;
    ++vehicle_tracks;
    for (const auto& px : tr.pixels_per_frame) CHECK(!px.empty());
  }
  CHECK(vehicle_tracks == 1);
}

TEST_CASE("noisy windows still separate instances well (small corpus)") {
  int correct = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const MiniScene ms = make_scene(16, 100 + seed);
    const auto frames = render(ms, 0.04, 200 + seed);
    std::vector<const scene::SegMapFrame*> views;
    for (const auto& f : frames) views.push_back(&f);
    const auto result = sensing::detect_dynamic_scatterers(views, {});
    for (const auto& tr : result.tracks) {
      // Classes are unique per object kind in the mini scene, so the class
      // alone identifies the true motion status.
      bool truth_dynamic = tr.class_id == scene::kVehicle || tr.class_id == scene::kArm;
      if (tr.result.is_dynamic == truth_dynamic) ++correct;
      ++total;
    }
  }
  // Window-level accuracy: statics fail at roughly the test level, so demand
  // a loose bound here; the acceptance suite checks the instance-level rate.
  CHECK(total >= 30);
  CHECK(static_cast<double>(correct) / total > 0.7);
}
