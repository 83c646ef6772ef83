#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"
#include "scene/scene.hpp"

namespace beamsense::scene {

namespace {

// Pixel (row, col) covers the world point at its center; row 0 sits at y=0.
struct PixelMap {
  double px_per_m_x;
  double px_per_m_y;

  double col_to_x(int c) const { return (c + 0.5) / px_per_m_x; }
  double row_to_y(int r) const { return (r + 0.5) / px_per_m_y; }
};

}  // namespace

SegMapFrame rasterize(const FactoryLayout& layout, const std::vector<MotionState>& states,
                      const RasterSpec& spec) {
  if (states.size() != layout.objects.size())
    throw core::ParameterError("rasterize: states/objects size mismatch");

  SegMapFrame frame;
  frame.rows = spec.rows;
  frame.cols = spec.cols;
  frame.class_grid.assign(static_cast<std::size_t>(spec.rows) * spec.cols, 0);
  frame.truth_instance_grid.assign(static_cast<std::size_t>(spec.rows) * spec.cols, 0);

  const PixelMap map{spec.cols / layout.length_m, spec.rows / layout.width_m};

  // Paint in ascending height so the topmost object wins each pixel.
  std::vector<std::size_t> order(layout.objects.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return layout.objects[a].height_m < layout.objects[b].height_m;
  });

  for (const std::size_t idx : order) {
    const ObjectSpec& obj = layout.objects[idx];
    const core::Polygon poly = object_world_polygon(obj, states[idx]);

    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& p : poly) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    const int c0 = std::max(0, static_cast<int>(std::floor(min_x * map.px_per_m_x - 0.5)));
    const int c1 = std::min(spec.cols - 1, static_cast<int>(std::ceil(max_x * map.px_per_m_x)));
    const int r0 = std::max(0, static_cast<int>(std::floor(min_y * map.px_per_m_y - 0.5)));
    const int r1 = std::min(spec.rows - 1, static_cast<int>(std::ceil(max_y * map.px_per_m_y)));

    for (int r = r0; r <= r1; ++r) {
      const double y = map.row_to_y(r);
      std::uint16_t* class_row = frame.class_grid.data() + static_cast<std::size_t>(r) * spec.cols;
      std::uint16_t* inst_row =
          frame.truth_instance_grid.data() + static_cast<std::size_t>(r) * spec.cols;
      for (int c = c0; c <= c1; ++c) {
        if (core::point_in_convex_polygon(poly, {map.col_to_x(c), y})) {
          class_row[c] = static_cast<std::uint16_t>(obj.class_id);
          inst_row[c] = static_cast<std::uint16_t>(obj.instance_id);
        }
      }
    }
  }
  return frame;
}

SegMapFrame inject_label_noise(const SegMapFrame& frame, double p_flip, core::Rng& rng) {
  if (!(p_flip >= 0.0 && p_flip < 0.5))
    throw core::ParameterError("inject_label_noise: p_flip must be in [0, 0.5)");
  SegMapFrame out = frame;
  if (p_flip == 0.0) return out;
  for (auto& value : out.class_grid) {
    if (rng.uniform() < p_flip) {
      // Uniform over the other Q-1 classes.
      const auto offset = 1 + rng.uniform_int(kNumClasses - 1);
      value = static_cast<std::uint16_t>((value + offset) % kNumClasses);
    }
  }
  return out;
}

namespace {

core::Box3 upright_box(const core::Polygon& poly, double height) {
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (const auto& p : poly) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  return {{min_x, min_y, 0.0}, {max_x, max_y, height}};
}

void sample_rect_surface(std::vector<core::Vec3>& pts, const core::Vec3& origin,
                         const core::Vec3& u, const core::Vec3& v, double area, double density,
                         core::Rng& rng) {
  const double expected = area * density;
  std::size_t count = static_cast<std::size_t>(expected);
  if (rng.uniform() < expected - static_cast<double>(count)) ++count;
  for (std::size_t i = 0; i < count; ++i) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    pts.push_back(origin + u * a + v * b);
  }
}

void sample_box_surface(std::vector<core::Vec3>& pts, const core::Box3& box, double density,
                        core::Rng& rng) {
  const core::Vec3 d = box.hi - box.lo;
  const core::Vec3 ux{d.x, 0, 0}, uy{0, d.y, 0}, uz{0, 0, d.z};
  const core::Vec3 lo = box.lo;
  sample_rect_surface(pts, lo, ux, uy, d.x * d.y, density, rng);                       // bottom
  sample_rect_surface(pts, {lo.x, lo.y, box.hi.z}, ux, uy, d.x * d.y, density, rng);   // top
  sample_rect_surface(pts, lo, ux, uz, d.x * d.z, density, rng);                       // front
  sample_rect_surface(pts, {lo.x, box.hi.y, lo.z}, ux, uz, d.x * d.z, density, rng);   // back
  sample_rect_surface(pts, lo, uy, uz, d.y * d.z, density, rng);                       // left
  sample_rect_surface(pts, {box.hi.x, lo.y, lo.z}, uy, uz, d.y * d.z, density, rng);   // right
}

}  // namespace

PointCloud sample_box_surfaces(const std::vector<core::Box3>& boxes, double density_pts_per_m2,
                               core::Rng& rng) {
  if (!(density_pts_per_m2 > 0.0))
    throw core::ParameterError("sample_box_surfaces: density must be positive");
  PointCloud cloud;
  for (const auto& box : boxes) sample_box_surface(cloud.points, box, density_pts_per_m2, rng);
  return cloud;
}

PointCloud sample_point_cloud(const FactoryLayout& layout, double density_pts_per_m2,
                              core::Rng& rng) {
  if (!(density_pts_per_m2 > 0.0))
    throw core::ParameterError("sample_point_cloud: density must be positive");

  PointCloud cloud;

  // Independent sub-streams per geometry group, so two layouts that differ
  // only in one group (e.g. the crossbeam mode) still sample identical
  // points everywhere else.
  core::Rng object_rng = rng.fork("pc_objects");
  for (std::size_t i = 0; i < layout.objects.size(); ++i) {
    const ObjectSpec& obj = layout.objects[i];
    if (obj.is_dynamic) continue;  // LIDAR scans the static environment only
    if (obj.class_id == kColumn) continue;  // covered by structural geometry below
    sample_box_surface(cloud.points,
                       upright_box(object_world_polygon(obj, layout.initial_states[i]),
                                   obj.height_m),
                       density_pts_per_m2, object_rng);
  }
  core::Rng column_rng = rng.fork("pc_columns");
  for (const auto& box : structural_columns(layout))
    sample_box_surface(cloud.points, box, density_pts_per_m2, column_rng);
  core::Rng beam_rng = rng.fork("pc_crossbeams");
  for (const auto& box : structural_crossbeams(layout))
    sample_box_surface(cloud.points, box, density_pts_per_m2, beam_rng);

  // Building shell: floor, ceiling, and the four walls.
  core::Rng shell_rng = rng.fork("pc_shell");
  const double L = layout.length_m, W = layout.width_m, H = layout.height_m;
  const core::Vec3 ux{L, 0, 0}, uy{0, W, 0}, uz{0, 0, H};
  sample_rect_surface(cloud.points, {0, 0, 0}, ux, uy, L * W, density_pts_per_m2, shell_rng);
  sample_rect_surface(cloud.points, {0, 0, H}, ux, uy, L * W, density_pts_per_m2, shell_rng);
  sample_rect_surface(cloud.points, {0, 0, 0}, ux, uz, L * H, density_pts_per_m2, shell_rng);
  sample_rect_surface(cloud.points, {0, W, 0}, ux, uz, L * H, density_pts_per_m2, shell_rng);
  sample_rect_surface(cloud.points, {0, 0, 0}, uy, uz, W * H, density_pts_per_m2, shell_rng);
  sample_rect_surface(cloud.points, {L, 0, 0}, uy, uz, W * H, density_pts_per_m2, shell_rng);
  return cloud;
}

}  // namespace beamsense::scene
