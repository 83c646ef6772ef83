#include "sensing/stats.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "core/errors.hpp"

namespace beamsense::sensing {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-16;

// Lower series expansion, converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper continued fraction (modified Lentz), for x >= a + 1.
double gamma_q_cont_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0) throw core::ParameterError("gamma_p: a must be positive");
  if (x < 0.0) throw core::ParameterError("gamma_p: x must be non-negative");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cont_fraction(a, x);
}

double chi_square_cdf(double x, int dof) {
  if (dof < 1) throw core::ParameterError("chi_square_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chi_square_quantile(double p, int dof) {
  if (!(p > 0.0 && p < 1.0)) throw core::ParameterError("chi_square_quantile: p must be in (0,1)");
  if (dof < 1) throw core::ParameterError("chi_square_quantile: dof must be >= 1");

  // Classification sweeps re-query the same (p, dof) for every instance.
  thread_local std::map<std::pair<int, double>, double> cache;
  const auto key = std::make_pair(dof, p);
  if (const auto it = cache.find(key); it != cache.end()) return it->second;

  double lo = 0.0;
  double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
  while (chi_square_cdf(hi, dof) < p) hi *= 2.0;
  // Bisection: ~70 halvings drive the bracket width below the 1e-9 target.
  for (int i = 0; i < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi_square_cdf(mid, dof) < p)
      lo = mid;
    else
      hi = mid;
  }
  const double result = 0.5 * (lo + hi);
  if (cache.size() < 1024) cache.emplace(key, result);
  return result;
}

double sample_autocorrelation(const DiffSequence& seq, int r) {
  const int t_len = static_cast<int>(seq.values.size());
  if (!(r > 0 && r < t_len - 1))
    throw core::ParameterError("sample_autocorrelation: lag out of range");

  double mean = 0.0;
  for (const auto v : seq.values) mean += static_cast<double>(v);
  mean /= t_len;

  double denom = 0.0;
  for (const auto v : seq.values) {
    const double d = static_cast<double>(v) - mean;
    denom += d * d;
  }
  if (denom == 0.0) return 0.0;  // constant sequence

  double num = 0.0;
  for (int t = r; t < t_len; ++t) {
    num += (static_cast<double>(seq.values[t]) - mean) *
           (static_cast<double>(seq.values[t - r]) - mean);
  }
  return num / denom;
}

double ljung_box_q(const DiffSequence& seq, int m) {
  const int t_len = static_cast<int>(seq.values.size());
  if (!(m > 0 && m < t_len - 1)) throw core::ParameterError("ljung_box_q: lag order out of range");

  double q = 0.0;
  for (int j = 1; j <= m; ++j) {
    const double rho = sample_autocorrelation(seq, j);
    q += rho * rho / (t_len - j);
  }
  return static_cast<double>(t_len) * (t_len + 2.0) * q;
}

LjungBoxResult classify_dynamic(const DiffSequence& seq, int m, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw core::ParameterError("classify_dynamic: alpha must be in (0,1)");
  LjungBoxResult res;
  res.lags = m;
  res.alpha = alpha;
  res.q_stat = ljung_box_q(seq, m);
  res.threshold = chi_square_quantile(1.0 - alpha, m);
  res.is_dynamic = res.q_stat > res.threshold;
  return res;
}

}  // namespace beamsense::sensing
