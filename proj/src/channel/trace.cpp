#include <algorithm>
#include <cmath>

#include "channel/channel.hpp"
#include "core/errors.hpp"

namespace beamsense::channel {

namespace {

constexpr double kEps = 1e-9;

// Planar reflector: a rectangle on an axis-aligned plane.
struct Face {
  int axis;          // 0=x, 1=y, 2=z (plane normal direction)
  double plane;      // coordinate along `axis`
  double normal;     // +1 or -1, outward side
  double lo[2];      // rectangle bounds in the two tangential axes
  double hi[2];
  Material material;
  int owner_box;     // index into geometry boxes, -1 for shell faces
};

double component(const core::Vec3& v, int axis) {
  return axis == 0 ? v.x : axis == 1 ? v.y : v.z;
}

core::Vec3 with_component(core::Vec3 v, int axis, double value) {
  (axis == 0 ? v.x : axis == 1 ? v.y : v.z) = value;
  return v;
}

// Segment/box intersection via the slab method; `skip` ignores hits within
// eps of the segment ends (reflection points sit on box surfaces).
bool segment_hits_box(const core::Vec3& a, const core::Vec3& b, const core::Box3& box) {
  double t0 = 0.0, t1 = 1.0;
  const core::Vec3 d = b - a;
  const double av[3] = {a.x, a.y, a.z};
  const double dv[3] = {d.x, d.y, d.z};
  const double lov[3] = {box.lo.x, box.lo.y, box.lo.z};
  const double hiv[3] = {box.hi.x, box.hi.y, box.hi.z};
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(dv[axis]) < 1e-300) {
      if (av[axis] < lov[axis] || av[axis] > hiv[axis]) return false;
      continue;
    }
    double near = (lov[axis] - av[axis]) / dv[axis];
    double far = (hiv[axis] - av[axis]) / dv[axis];
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  // Grazing contacts at the very ends do not occlude.
  return t1 > kEps && t0 < 1.0 - kEps && (t1 - t0) > kEps;
}

bool segment_occluded(const core::Vec3& a, const core::Vec3& b, const TraceGeometry& geom) {
  for (const auto& box : geom.boxes) {
    if (segment_hits_box(a, b, box)) return true;
  }
  return false;
}

std::vector<Face> collect_faces(const TraceGeometry& geom) {
  std::vector<Face> faces;
  const auto add_box = [&faces](const core::Box3& box, Material mat, int owner, double inflate) {
    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3;
      const int v = (axis + 2) % 3;
      for (const int side : {0, 1}) {
        Face f;
        f.axis = axis;
        f.plane = side ? hi[axis] : lo[axis];
        f.normal = (side ? 1.0 : -1.0) * inflate;
        f.lo[0] = lo[u];
        f.hi[0] = hi[u];
        f.lo[1] = lo[v];
        f.hi[1] = hi[v];
        f.material = mat;
        f.owner_box = owner;
        faces.push_back(f);
      }
    }
  };
  // Shell faces reflect inward (normals point into the room).
  add_box(geom.shell, Material::concrete, -1, -1.0);
  for (std::size_t i = 0; i < geom.boxes.size(); ++i)
    add_box(geom.boxes[i], geom.materials[i], static_cast<int>(i), 1.0);
  return faces;
}

core::Vec3 mirror(const core::Vec3& p, const Face& f) {
  return with_component(p, f.axis, 2.0 * f.plane - component(p, f.axis));
}

// Intersection of segment a->b with the face plane, inside the rectangle.
bool plane_hit(const core::Vec3& a, const core::Vec3& b, const Face& f, core::Vec3& out) {
  const double da = component(a, f.axis) - f.plane;
  const double db = component(b, f.axis) - f.plane;
  if (da * db >= 0.0) return false;  // same side or touching
  const double t = da / (da - db);
  core::Vec3 p = a + (b - a) * t;
  const int u = (f.axis + 1) % 3;
  const int v = (f.axis + 2) % 3;
  const double pu = component(p, u);
  const double pv = component(p, v);
  if (pu < f.lo[0] - kEps || pu > f.hi[0] + kEps) return false;
  if (pv < f.lo[1] - kEps || pv > f.hi[1] + kEps) return false;
  out = p;
  return true;
}

double fspl_db(double dist_m, double carrier_hz) {
  return 20.0 * std::log10(4.0 * M_PI * dist_m * carrier_hz / kSpeedOfLight);
}

// Azimuth/elevation of a unit direction, with elevation measured from the
// array broadside (z axis) so that el=0 gives an all-ones steering vector.
void direction_angles(const core::Vec3& d, double& az_deg, double& el_deg) {
  az_deg = std::atan2(d.y, d.x) * 180.0 / M_PI;
  el_deg = std::acos(std::clamp(d.z, -1.0, 1.0)) * 180.0 / M_PI;
}

PathParams make_path(const core::Vec3& tx, const core::Vec3& rx,
                     const std::vector<core::Vec3>& reflections, double length,
                     double bounce_loss_db, const TraceOptions& opts) {
  PathParams p;
  p.bounce_count = static_cast<int>(reflections.size());
  p.power_dbm = opts.tx_power_dbm - fspl_db(length, opts.carrier_hz) - bounce_loss_db;
  const double lambda = kSpeedOfLight / opts.carrier_hz;
  p.phase_deg = -360.0 * std::fmod(length, lambda) / lambda;
  p.delay_s = length / kSpeedOfLight;

  const core::Vec3 first = reflections.empty() ? rx : reflections.front();
  const core::Vec3 last = reflections.empty() ? tx : reflections.back();
  double az, el;
  direction_angles((first - tx).normalized(), az, el);
  p.aod_az_deg = az;
  p.aod_el_deg = el;
  direction_angles((last - rx).normalized(), az, el);
  p.aoa_az_deg = az;
  p.aoa_el_deg = el;
  return p;
}

// Nudge a reflection point off its face so occlusion tests against the
// owning box see the segment leave the surface.
core::Vec3 lift(const core::Vec3& p, const Face& f) {
  return with_component(p, f.axis, component(p, f.axis) + f.normal * 1e-7);
}

}  // namespace

TraceGeometry build_trace_geometry(const scene::FactoryLayout& layout,
                                   const std::vector<scene::MotionState>& states,
                                   int skip_object) {
  TraceGeometry geom;
  geom.shell = {{0.0, 0.0, 0.0}, {layout.length_m, layout.width_m, layout.height_m}};
  const auto add = [&geom](const core::Box3& box, Material mat) {
    geom.boxes.push_back(box);
    geom.materials.push_back(mat);
  };
  for (std::size_t i = 0; i < layout.objects.size(); ++i) {
    if (static_cast<int>(i) == skip_object) continue;
    const auto& obj = layout.objects[i];
    const core::Polygon poly = scene::object_world_polygon(obj, states[i]);
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& p : poly) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    add({{min_x, min_y, 0.0}, {max_x, max_y, obj.height_m}}, Material::metal);
  }
  for (const auto& box : scene::structural_crossbeams(layout)) add(box, Material::metal);
  return geom;
}

PathSet trace_paths(const TraceGeometry& geom, const core::Vec3& tx, const core::Vec3& rx,
                    const TraceOptions& opts) {
  if ((rx - tx).norm() < 1e-12) throw core::ParameterError("trace_paths: tx equals rx");
  if (opts.max_bounce < 0 || opts.max_bounce > 2)
    throw core::ParameterError("trace_paths: max_bounce must be in [0, 2]");

  std::vector<PathParams> found;

  // Line of sight.
  if (!segment_occluded(tx, rx, geom)) {
    found.push_back(make_path(tx, rx, {}, (rx - tx).norm(), 0.0, opts));
  }

  const std::vector<Face> faces = opts.max_bounce >= 1 ? collect_faces(geom) : std::vector<Face>{};

  const auto face_loss = [&opts](const Face& f) {
    return f.material == Material::metal ? opts.metal_loss_db : opts.concrete_loss_db;
  };

  if (opts.max_bounce >= 1) {
    for (const Face& f : faces) {
      // Both endpoints must face the reflecting side.
      if ((component(tx, f.axis) - f.plane) * f.normal <= 0.0) continue;
      if ((component(rx, f.axis) - f.plane) * f.normal <= 0.0) continue;
      const core::Vec3 image = mirror(tx, f);
      core::Vec3 q;
      if (!plane_hit(image, rx, f, q)) continue;
      const core::Vec3 q_out = lift(q, f);
      if (segment_occluded(tx, q_out, geom) || segment_occluded(q_out, rx, geom)) continue;
      const double length = (image - rx).norm();  // mirror identity
      found.push_back(make_path(tx, rx, {q}, length, face_loss(f), opts));
    }
  }

  if (opts.max_bounce >= 2) {
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const Face& f1 = faces[i];
      if ((component(tx, f1.axis) - f1.plane) * f1.normal <= 0.0) continue;
      const core::Vec3 image1 = mirror(tx, f1);
      for (std::size_t j = 0; j < faces.size(); ++j) {
        if (i == j) continue;
        const Face& f2 = faces[j];
        if ((component(rx, f2.axis) - f2.plane) * f2.normal <= 0.0) continue;
        const core::Vec3 image2 = mirror(image1, f2);
        core::Vec3 q2;
        if (!plane_hit(image2, rx, f2, q2)) continue;
        core::Vec3 q1;
        if (!plane_hit(image1, q2, f1, q1)) continue;
        // The first hop must leave f1 on its reflective side.
        if ((component(q2, f1.axis) - f1.plane) * f1.normal <= 0.0) continue;
        const core::Vec3 q1_out = lift(q1, f1);
        const core::Vec3 q2_out = lift(q2, f2);
        if (segment_occluded(tx, q1_out, geom) || segment_occluded(q1_out, q2_out, geom) ||
            segment_occluded(q2_out, rx, geom))
          continue;
        const double length = (image2 - rx).norm();
        found.push_back(make_path(tx, rx, {q1, q2}, length, face_loss(f1) + face_loss(f2), opts));
      }
    }
  }

  // Stable sort keeps exact power/delay ties (symmetric rooms) in the
  // deterministic face enumeration order.
  std::stable_sort(found.begin(), found.end(), [](const PathParams& a, const PathParams& b) {
    if (a.power_dbm != b.power_dbm) return a.power_dbm > b.power_dbm;
    if (a.delay_s != b.delay_s) return a.delay_s < b.delay_s;
    return a.bounce_count < b.bounce_count;
  });
  if (static_cast<int>(found.size()) > opts.r_max) found.resize(static_cast<std::size_t>(opts.r_max));

  PathSet out;
  out.paths = std::move(found);
  return out;
}

}  // namespace beamsense::channel
