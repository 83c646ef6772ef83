#pragma once

#include <cstdint>
#include <vector>

namespace beamsense::sensing {

// Regularized lower incomplete gamma function P(a, x).
double gamma_p(double a, double x);

// Chi-square CDF with `dof` degrees of freedom.
double chi_square_cdf(double x, int dof);

// Quantile x with P(chi2_dof <= x) = p, bisected to 1e-9 absolute.
double chi_square_quantile(double p, int dof);

// Per-instance pixel-difference time series; values[t-1] counts the pixels
// that differ between frame n+t and the window's first frame.
struct DiffSequence {
  std::vector<std::int64_t> values;
  int class_id = 0;
  int instance_key = 0;
};

struct LjungBoxResult {
  double q_stat = 0.0;
  double threshold = 0.0;
  int lags = 0;
  double alpha = 0.0;
  bool is_dynamic = false;
};

// Lag-r sample autocorrelation; a constant sequence yields 0 by convention.
double sample_autocorrelation(const DiffSequence& seq, int r);

// Ljung-Box portmanteau statistic over the first m lags.
double ljung_box_q(const DiffSequence& seq, int m);

// White-noise hypothesis test: reject (dynamic) when Q(m) exceeds the
// chi-square quantile at level 1 - alpha.
LjungBoxResult classify_dynamic(const DiffSequence& seq, int m, double alpha);

}  // namespace beamsense::sensing
