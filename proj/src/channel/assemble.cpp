#include <algorithm>
#include <cmath>

#include "channel/channel.hpp"
#include "core/errors.hpp"

namespace beamsense::channel {

double raised_cosine(double t, double rolloff, double ts) {
  if (!(rolloff > 0.0 && rolloff <= 1.0))
    throw core::ParameterError("raised_cosine: rolloff must be in (0, 1]");
  const double x = t / ts;

  // sinc part, with the t=0 limit.
  const double sinc = x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);

  const double denom = 1.0 - 4.0 * rolloff * rolloff * x * x;
  if (std::abs(denom) < 1e-12) {
    // t = +/- Ts / (2 * rolloff): analytic limit (pi/4) * sinc(1/(2*rolloff)).
    const double xs = 1.0 / (2.0 * rolloff);
    return M_PI / 4.0 * std::sin(M_PI * xs) / (M_PI * xs);
  }
  return sinc * std::cos(M_PI * rolloff * x) / denom;
}

PathSet rebase_delays(const PathSet& paths, const OFDMConfig& ofdm) {
  PathSet out = paths;
  if (out.paths.empty()) return out;
  double min_delay = out.paths.front().delay_s;
  for (const auto& p : out.paths) min_delay = std::min(min_delay, p.delay_s);
  for (auto& p : out.paths) p.delay_s -= min_delay;
  const double window = ofdm.cyclic_prefix * ofdm.sample_interval_s;
  std::erase_if(out.paths, [window](const PathParams& p) { return p.delay_s >= window; });
  return out;
}

ChannelTensor assemble_channel(const PathSet& paths, const UPAConfig& upa_t,
                               const UPAConfig& upa_r, const OFDMConfig& ofdm) {
  const int K = ofdm.subcarriers;
  const int N = ofdm.cyclic_prefix;
  const int nr = upa_r.size();
  const int nt = upa_t.size();

  for (const auto& p : paths.paths) {
    if (!(p.delay_s < N * ofdm.sample_interval_s))
      throw core::ConfigError("assemble_channel: path delay exceeds the cyclic prefix window");
  }

  ChannelTensor ch;
  ch.k = K;
  ch.nr = nr;
  ch.nt = nt;
  ch.entries.assign(static_cast<std::size_t>(K) * nr * nt, cplx{0.0, 0.0});

  for (const auto& p : paths.paths) {
    // dBm to watts at the boundary; everything below is linear.
    const double power_w = std::pow(10.0, (p.power_dbm - 30.0) / 10.0);
    const cplx alpha = std::polar(std::sqrt(power_w), p.phase_deg * M_PI / 180.0);

    const auto a_r = steering_vector(upa_r, p.aoa_az_deg, p.aoa_el_deg);
    const auto a_t = steering_vector(upa_t, p.aod_az_deg, p.aod_el_deg);

    // Tap-weighted DFT factor: sum_n e^{-j 2 pi k n / K} g(n Ts - tau).
    std::vector<double> pulse(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n)
      pulse[n] = raised_cosine(n * ofdm.sample_interval_s - p.delay_s, ofdm.rolloff,
                               ofdm.sample_interval_s);

    for (int k = 0; k < K; ++k) {
      cplx c{0.0, 0.0};
      for (int n = 0; n < N; ++n) {
        c += std::polar(pulse[n], -2.0 * M_PI * k * n / K);
      }
      c *= alpha;
      cplx* slab = ch.entries.data() + static_cast<std::size_t>(k) * nr * nt;
      for (int r = 0; r < nr; ++r) {
        const cplx cr = c * a_r[static_cast<std::size_t>(r)];
        for (int t = 0; t < nt; ++t) {
          slab[static_cast<std::size_t>(r) * nt + t] += cr * std::conj(a_t[static_cast<std::size_t>(t)]);
        }
      }
    }
  }
  return ch;
}

double spectral_efficiency(const ChannelTensor& ch, const std::vector<cplx>& w_r,
                           const std::vector<cplx>& w_t, const OFDMConfig& ofdm) {
  if (static_cast<int>(w_r.size()) != ch.nr || static_cast<int>(w_t.size()) != ch.nt)
    throw core::ParameterError("spectral_efficiency: beam vector dimension mismatch");

  const double snr_scale = ofdm.tx_power_per_subcarrier / ofdm.noise_var;
  double rate = 0.0;
  for (int k = 0; k < ch.k; ++k) {
    const cplx* slab = ch.entries.data() + static_cast<std::size_t>(k) * ch.nr * ch.nt;
    cplx g{0.0, 0.0};
    for (int r = 0; r < ch.nr; ++r) {
      cplx row{0.0, 0.0};
      const cplx* hrow = slab + static_cast<std::size_t>(r) * ch.nt;
      for (int t = 0; t < ch.nt; ++t) row += hrow[t] * w_t[static_cast<std::size_t>(t)];
      g += std::conj(w_r[static_cast<std::size_t>(r)]) * row;
    }
    rate += std::log2(1.0 + snr_scale * std::norm(g));
  }
  return rate / ch.k;
}

BeamSelection optimal_beam_pair(const ChannelTensor& ch, const Codebook& cb_r,
                                const Codebook& cb_t, const OFDMConfig& ofdm) {
  if (cb_r.vectors.empty() || cb_t.vectors.empty())
    throw core::ParameterError("optimal_beam_pair: empty codebook");
  for (const auto& w : cb_r.vectors) {
    if (static_cast<int>(w.size()) != ch.nr)
      throw core::ParameterError("optimal_beam_pair: receive codeword length mismatch");
  }
  for (const auto& w : cb_t.vectors) {
    if (static_cast<int>(w.size()) != ch.nt)
      throw core::ParameterError("optimal_beam_pair: transmit codeword length mismatch");
  }
  const int nr_cw = static_cast<int>(cb_r.vectors.size());
  const int nt_cw = static_cast<int>(cb_t.vectors.size());
  const double snr_scale = ofdm.tx_power_per_subcarrier / ofdm.noise_var;

  // Accumulate the per-pair rate across subcarriers with two small
  // matrix products per k: G_k = W_r^H H_k W_t.
  std::vector<double> rate(static_cast<std::size_t>(nr_cw) * nt_cw, 0.0);
  std::vector<cplx> stage(static_cast<std::size_t>(nr_cw) * ch.nt);
  for (int k = 0; k < ch.k; ++k) {
    const cplx* slab = ch.entries.data() + static_cast<std::size_t>(k) * ch.nr * ch.nt;
    for (int i = 0; i < nr_cw; ++i) {
      const auto& wr = cb_r.vectors[static_cast<std::size_t>(i)];
      for (int t = 0; t < ch.nt; ++t) {
        cplx acc{0.0, 0.0};
        for (int r = 0; r < ch.nr; ++r)
          acc += std::conj(wr[static_cast<std::size_t>(r)]) * slab[static_cast<std::size_t>(r) * ch.nt + t];
        stage[static_cast<std::size_t>(i) * ch.nt + t] = acc;
      }
    }
    for (int i = 0; i < nr_cw; ++i) {
      const cplx* srow = stage.data() + static_cast<std::size_t>(i) * ch.nt;
      for (int j = 0; j < nt_cw; ++j) {
        const auto& wt = cb_t.vectors[static_cast<std::size_t>(j)];
        cplx g{0.0, 0.0};
        for (int t = 0; t < ch.nt; ++t) g += srow[t] * wt[static_cast<std::size_t>(t)];
        rate[static_cast<std::size_t>(i) * nt_cw + j] += std::log2(1.0 + snr_scale * std::norm(g));
      }
    }
  }

  // Ties break toward the smallest (t_idx, r_idx) lexicographically.
  BeamSelection best;
  best.rate = -1.0;
  for (int j = 0; j < nt_cw; ++j) {
    for (int i = 0; i < nr_cw; ++i) {
      const double r = rate[static_cast<std::size_t>(i) * nt_cw + j] / ch.k;
      if (r > best.rate) {
        best.rate = r;
        best.r_idx = i;
        best.t_idx = j;
      }
    }
  }
  return best;
}

}  // namespace beamsense::channel
