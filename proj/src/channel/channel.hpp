#pragma once

#include <complex>
#include <vector>

#include "core/geometry.hpp"
#include "scene/scene.hpp"

namespace beamsense::channel {

using cplx = std::complex<double>;

constexpr double kSpeedOfLight = 299792458.0;

struct UPAConfig {
  int nx = 1;
  int ny = 1;
  double spacing = 0.5;  // element pitch in wavelengths

  int size() const { return nx * ny; }
};

struct PathParams {
  double power_dbm = 0.0;
  double phase_deg = 0.0;
  double delay_s = 0.0;
  double aoa_az_deg = 0.0;
  double aoa_el_deg = 0.0;
  double aod_az_deg = 0.0;
  double aod_el_deg = 0.0;
  int bounce_count = 0;
};

struct PathSet {
  std::vector<PathParams> paths;  // sorted by descending power, at most r_max
};

struct OFDMConfig {
  double carrier_hz = 28e9;
  int subcarriers = 64;          // K
  int cyclic_prefix = 16;        // N
  double sample_interval_s = 1e-8;  // Ts
  double rolloff = 0.1;
  double tx_power_per_subcarrier = 1.0;  // P_k, watts
  double noise_var = 2e-12;              // sigma^2, watts

  double wavelength() const { return kSpeedOfLight / carrier_hz; }
};

// K x N_r x N_t tensor, entries[k * nr * nt + r * nt + t].
struct ChannelTensor {
  int k = 0;
  int nr = 0;
  int nt = 0;
  std::vector<cplx> entries;

  cplx at(int kk, int r, int t) const {
    return entries[(static_cast<std::size_t>(kk) * nr + r) * nt + t];
  }
};

struct Codebook {
  std::vector<std::vector<cplx>> vectors;  // unit-norm columns
};

enum class Material { metal, concrete };

// Axis-aligned scene geometry seen by the tracer. Boxes occlude and reflect;
// the shell's six inner faces reflect as well.
struct TraceGeometry {
  core::Box3 shell;
  std::vector<core::Box3> boxes;
  std::vector<Material> materials;  // parallel to boxes
};

struct TraceOptions {
  int max_bounce = 1;        // <= 2
  int r_max = 25;
  double tx_power_dbm = 0.0;
  double metal_loss_db = 6.0;
  double concrete_loss_db = 10.0;
  double carrier_hz = 28e9;
};

// Scene geometry for a frame: structural boxes plus every object except the
// one indexed by `skip_object` (the user vehicle carrying the receiver).
TraceGeometry build_trace_geometry(const scene::FactoryLayout& layout,
                                   const std::vector<scene::MotionState>& states,
                                   int skip_object = -1);

// UPA response a_y (x) a_x with unit-modulus entries (Kronecker order: the
// y-axis index is the slow one).
std::vector<cplx> steering_vector(const UPAConfig& upa, double az_deg, double el_deg);

// Specular paths via the image method up to the requested bounce order,
// occlusion-tested, strongest r_max kept.
PathSet trace_paths(const TraceGeometry& geom, const core::Vec3& tx, const core::Vec3& rx,
                    const TraceOptions& opts);

// Raised-cosine pulse; the removable singularities evaluate to their limits.
double raised_cosine(double t, double rolloff, double ts);

// Geometric OFDM channel: per-subcarrier sum over cyclic-prefix taps and
// paths of gain x pulse x steering outer product.
ChannelTensor assemble_channel(const PathSet& paths, const UPAConfig& upa_t,
                               const UPAConfig& upa_r, const OFDMConfig& ofdm);

// Shift delays so the earliest path arrives at t=0 and drop anything beyond
// the cyclic-prefix window.
PathSet rebase_delays(const PathSet& paths, const OFDMConfig& ofdm);

// Orthonormal 2D DFT codebook of size nx*ny.
Codebook build_dft_codebook(const UPAConfig& upa);

// Mean spectral efficiency over subcarriers for a fixed beam pair.
double spectral_efficiency(const ChannelTensor& ch, const std::vector<cplx>& w_r,
                           const std::vector<cplx>& w_t, const OFDMConfig& ofdm);

struct BeamSelection {
  int r_idx = 0;
  int t_idx = 0;
  double rate = 0.0;
};

// Exhaustive sweep over all codeword pairs; ties resolve to the smallest
// (t_idx, r_idx) in lexicographic order.
BeamSelection optimal_beam_pair(const ChannelTensor& ch, const Codebook& cb_r,
                                const Codebook& cb_t, const OFDMConfig& ofdm);

}  // namespace beamsense::channel
