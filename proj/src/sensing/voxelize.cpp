#include <algorithm>
#include <cmath>
#include <utility>

#include "core/errors.hpp"
#include "sensing/sensing.hpp"

namespace beamsense::sensing {

namespace {

// Voxel index along one axis; a point on a shared interior face belongs to
// the lower-index voxel.
int axis_index(double coord, double lo, double cell, int count) {
  const double rel = coord - lo;
  int idx = static_cast<int>(std::floor(rel / cell));
  if (idx > 0 && rel <= idx * cell) --idx;
  if (idx >= count) idx = count - 1;  // exactly on the upper cube face
  return idx;
}

}  // namespace

PseudoImage voxelize(const scene::PointCloud& cloud, const core::Box3& cube, int a, int b, int c) {
  if (a < 1 || b < 1 || c < 1) throw core::ParameterError("voxelize: dims must be >= 1");

  PseudoImage img;
  img.dims[0] = a;
  img.dims[1] = b;
  img.dims[2] = c;
  img.cube = cube;
  const std::size_t voxels = static_cast<std::size_t>(a) * b * c;
  img.grid.assign(voxels * 3, 0.0);
  img.occupancy.assign(voxels, 0);

  const double cell_x = (cube.hi.x - cube.lo.x) / a;
  const double cell_y = (cube.hi.y - cube.lo.y) / b;
  const double cell_z = (cube.hi.z - cube.lo.z) / c;

  // Bucket points per voxel and accumulate in a canonical (sorted) order, so
  // the result is bit-identical under any permutation of the input list.
  std::vector<std::pair<std::uint64_t, core::Vec3>> keyed;
  keyed.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    if (!cube.contains(p)) throw core::ParameterError("voxelize: point outside cube");
    const int i = axis_index(p.x, cube.lo.x, cell_x, a);
    const int j = axis_index(p.y, cube.lo.y, cell_y, b);
    const int k = axis_index(p.z, cube.lo.z, cell_z, c);
    keyed.emplace_back(img.voxel_index(i, j, k), p);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first < r.first;
    if (l.second.x != r.second.x) return l.second.x < r.second.x;
    if (l.second.y != r.second.y) return l.second.y < r.second.y;
    return l.second.z < r.second.z;
  });

  for (std::size_t start = 0; start < keyed.size();) {
    std::size_t end = start;
    while (end < keyed.size() && keyed[end].first == keyed[start].first) ++end;
    const std::size_t v = keyed[start].first;
    const int i = static_cast<int>(v / (static_cast<std::size_t>(b) * c));
    const int j = static_cast<int>((v / c) % b);
    const int k = static_cast<int>(v % c);
    const core::Vec3 center{cube.lo.x + (i + 0.5) * cell_x, cube.lo.y + (j + 0.5) * cell_y,
                            cube.lo.z + (k + 0.5) * cell_z};
    core::Vec3 sum;
    for (std::size_t n = start; n < end; ++n) sum = sum + (keyed[n].second - center);
    const double count = static_cast<double>(end - start);
    img.grid[v * 3 + 0] = sum.x / count;
    img.grid[v * 3 + 1] = sum.y / count;
    img.grid[v * 3 + 2] = sum.z / count;
    img.occupancy[v] = 1;
    start = end;
  }
  return img;
}

}  // namespace beamsense::sensing
