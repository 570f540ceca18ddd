#pragma once

#include <span>

namespace pesp {

double normal_cdf(double x);
double normal_quantile(double p);
/// Upper critical value t with P(T_df > t) = alpha.
double student_t_critical(int df, double alpha);

double mean(std::span<const double> values);
/// Unbiased sample standard deviation (0 for fewer than two values).
double sample_stddev(std::span<const double> values);

}  // namespace pesp
