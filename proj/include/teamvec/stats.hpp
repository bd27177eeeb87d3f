#pragma once

#include <vector>

namespace teamvec::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// D'Agostino-Pearson omnibus normality test. K^2 is the sum of the squared
/// normalized skewness and kurtosis statistics; the p-value comes from the
/// chi-square(2) upper tail. Requires n >= 20 and nonzero variance.
TestResult dagostino_pearson(const std::vector<double>& sample);

/// Two-sample Kolmogorov-Smirnov test. D is the supremum ECDF distance; the
/// p-value uses the asymptotic Kolmogorov distribution at effective sample
/// size |a||b|/(|a|+|b|).
TestResult ks_two_sample(const std::vector<double>& a,
                         const std::vector<double>& b);

}  // namespace teamvec::stats
