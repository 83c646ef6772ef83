#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "scene/scene.hpp"

namespace beamsense::scene {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double wrap_degrees(double a) {
  a = std::fmod(a, 360.0);
  if (a < 0.0) a += 360.0;
  return a;
}

core::Vec2 advance(const core::Vec2& p, double heading_deg, double dist) {
  const double rad = heading_deg * M_PI / 180.0;
  return {p.x + dist * std::cos(rad), p.y + dist * std::sin(rad)};
}

// Smallest signed angle taking `from` to `to`, in (-180, 180].
double angle_diff(double to, double from) {
  double d = std::fmod(to - from, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

}  // namespace

double sample_truncated_gaussian(double mu, double var, double lo, double hi, core::Rng& rng) {
  if (!(lo < hi)) throw core::ParameterError("sample_truncated_gaussian: requires lo < hi");
  if (!(var > 0.0)) throw core::ParameterError("sample_truncated_gaussian: requires var > 0");

  const double sigma = std::sqrt(var);
  const double cdf_lo = normal_cdf((lo - mu) / sigma);
  const double cdf_hi = normal_cdf((hi - mu) / sigma);
  const double u = 1.0 - rng.uniform();  // (0, 1], keeps the draw off the lower bound
  const double target = cdf_lo + u * (cdf_hi - cdf_lo);

  // Invert the CDF by bisection; the bracket width halves each step, so
  // 80 iterations push the error far below any physical tolerance.
  double a = lo, b = hi;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (a + b);
    if (normal_cdf((mid - mu) / sigma) < target)
      a = mid;
    else
      b = mid;
  }
  return b;
}

namespace {

MotionState step_vehicle_impl(const MotionState& state, const MotionConfig& cfg, double dt_s,
                              const TransportArea& area, double heading_mean, core::Rng& rng) {
  MotionState next = state;
  next.speed_mps = sample_truncated_gaussian(state.speed_mps, cfg.speed_var, cfg.speed_bounds[0],
                                             cfg.speed_bounds[1], rng);
  const double dist = next.speed_mps * dt_s;

  // Truncation bounds are relative to the previous heading, so each step
  // changes direction by at most +/- heading_bound_deg.
  const double lo = state.heading_deg - cfg.heading_bound_deg;
  const double hi = state.heading_deg + cfg.heading_bound_deg;

  const int kResampleLimit = 8;
  for (int attempt = 0; attempt < kResampleLimit; ++attempt) {
    const double heading = sample_truncated_gaussian(heading_mean, cfg.heading_var, lo, hi, rng);
    const core::Vec2 candidate = advance(state.position, heading, dist);
    if (area.contains(candidate)) {
      next.heading_deg = wrap_degrees(heading);
      next.position = candidate;
      return next;
    }
  }

  // All resamples would exit the ring: reverse.
  const double reversed = wrap_degrees(state.heading_deg + 180.0);
  const core::Vec2 candidate = advance(state.position, reversed, dist);
  next.heading_deg = reversed;
  if (area.contains(candidate)) next.position = candidate;
  return next;  // position unchanged in the cornered case, still inside
}

}  // namespace

MotionState step_vehicle(const MotionState& state, const MotionConfig& cfg, double dt_s,
                         const TransportArea& area, core::Rng& rng) {
  return step_vehicle_impl(state, cfg, dt_s, area, state.heading_deg, rng);
}

MotionState step_vehicle_toward(const MotionState& state, const MotionConfig& cfg, double dt_s,
                                const TransportArea& area, const core::Vec2& goal,
                                core::Rng& rng) {
  const core::Vec2 to_goal = goal - state.position;
  double mean = state.heading_deg;
  if (to_goal.norm() > 1e-12) {
    const double bearing = std::atan2(to_goal.y, to_goal.x) * 180.0 / M_PI;
    const double pull = angle_diff(bearing, state.heading_deg);
    // Half-bound steering pull keeps the mean inside the truncation window.
    const double limit = 0.5 * cfg.heading_bound_deg;
    mean = state.heading_deg + std::clamp(pull, -limit, limit);
  }
  return step_vehicle_impl(state, cfg, dt_s, area, mean, rng);
}

MotionState step_arm(const MotionState& state, const MotionConfig& cfg, double dt_s,
                     core::Rng& rng) {
  MotionState next = state;
  const double rate = rng.uniform(cfg.arm_speed_range_dps[0], cfg.arm_speed_range_dps[1]);
  next.arm_angle_deg = wrap_degrees(state.arm_angle_deg + rate * dt_s);
  return next;
}

}  // namespace beamsense::scene
