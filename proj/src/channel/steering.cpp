#include <cmath>

#include "channel/channel.hpp"
#include "core/errors.hpp"

namespace beamsense::channel {

std::vector<cplx> steering_vector(const UPAConfig& upa, double az_deg, double el_deg) {
  if (!std::isfinite(az_deg) || !std::isfinite(el_deg))
    throw core::ParameterError("steering_vector: angles must be finite");

  const double az = az_deg * M_PI / 180.0;
  const double el = el_deg * M_PI / 180.0;
  // 2*pi*spacing reduces to pi at the default half-wavelength pitch.
  const double phase_x = 2.0 * M_PI * upa.spacing * std::sin(el) * std::cos(az);
  const double phase_y = 2.0 * M_PI * upa.spacing * std::sin(el) * std::sin(az);

  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(upa.size()));
  for (int iy = 0; iy < upa.ny; ++iy) {
    const cplx ay = std::polar(1.0, phase_y * iy);
    for (int ix = 0; ix < upa.nx; ++ix) {
      out.push_back(ay * std::polar(1.0, phase_x * ix));
    }
  }
  return out;
}

Codebook build_dft_codebook(const UPAConfig& upa) {
  const int n = upa.size();
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  Codebook cb;
  cb.vectors.reserve(static_cast<std::size_t>(n));
  for (int ky = 0; ky < upa.ny; ++ky) {
    for (int kx = 0; kx < upa.nx; ++kx) {
      std::vector<cplx> w;
      w.reserve(static_cast<std::size_t>(n));
      for (int iy = 0; iy < upa.ny; ++iy) {
        for (int ix = 0; ix < upa.nx; ++ix) {
          const double phase = 2.0 * M_PI * (static_cast<double>(kx) * ix / upa.nx +
                                             static_cast<double>(ky) * iy / upa.ny);
          w.push_back(std::polar(norm, phase));
        }
      }
      cb.vectors.push_back(std::move(w));
    }
  }
  return cb;
}

}  // namespace beamsense::channel
