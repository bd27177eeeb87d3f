#include "teamvec/stats.hpp"

#include <algorithm>
#include <cmath>

#include "teamvec/errors.hpp"

namespace teamvec::stats {

namespace {

struct Moments {
  double mean = 0.0;
  double m2 = 0.0;  // biased central moments
  double m3 = 0.0;
  double m4 = 0.0;
};

Moments central_moments(const std::vector<double>& sample) {
  const double n = static_cast<double>(sample.size());
  Moments m;
  for (double v : sample) m.mean += v;
  m.mean /= n;
  for (double v : sample) {
    const double d = v - m.mean;
    m.m2 += d * d;
    m.m3 += d * d * d;
    m.m4 += d * d * d * d;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

// Normalizing transform of the sample skewness (D'Agostino 1970).
double skewness_z(double b1, double n) {
  const double y = b1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) *
                       (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  const double t = y / alpha;
  return delta * std::log(t + std::sqrt(t * t + 1.0));
}

// Normalizing transform of the sample kurtosis (Anscombe & Glynn 1983).
double kurtosis_z(double b2, double n) {
  const double mean_b2 = 3.0 * (n - 1.0) / (n + 1.0);
  const double var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) /
                        ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double x = (b2 - mean_b2) / std::sqrt(var_b2);
  const double sqrt_beta1 =
      6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
      std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
  const double a =
      6.0 + 8.0 / sqrt_beta1 *
                (2.0 / sqrt_beta1 +
                 std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
  const double term = std::cbrt((1.0 - 2.0 / a) / denom);
  return ((1.0 - 2.0 / (9.0 * a)) - term) / std::sqrt(2.0 / (9.0 * a));
}

// Survival function of the asymptotic Kolmogorov distribution.
double kolmogorov_sf(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

TestResult dagostino_pearson(const std::vector<double>& sample) {
  const size_t n_int = sample.size();
  if (n_int < 20) {
    throw DataError(
        "normality test requires at least 20 observations, got " +
        std::to_string(n_int));
  }
  const Moments m = central_moments(sample);
  if (m.m2 <= 0.0) {
    throw DataError("normality test requires nonzero sample variance");
  }
  const double n = static_cast<double>(n_int);
  const double b1 = m.m3 / std::pow(m.m2, 1.5);  // sample skewness
  const double b2 = m.m4 / (m.m2 * m.m2);        // sample kurtosis

  const double zs = skewness_z(b1, n);
  const double zk = kurtosis_z(b2, n);
  const double k2 = zs * zs + zk * zk;

  TestResult r;
  r.statistic = k2;
  r.p_value = std::exp(-0.5 * k2);  // chi-square(2) upper tail
  return r;
}

TestResult ks_two_sample(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.empty() || b.empty()) {
    throw DataError("KS test requires two non-empty samples");
  }
  std::vector<double> sa(a), sb(b);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  size_t i = 0;
  size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }

  const double effective_n = na * nb / (na + nb);
  TestResult r;
  r.statistic = d;
  r.p_value = kolmogorov_sf(std::sqrt(effective_n) * d);
  return r;
}

}  // namespace teamvec::stats
