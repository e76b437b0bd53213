#pragma once

#include <vector>

namespace swcrt {

double normal_cdf(double x);

// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b), evaluated by continued fraction.
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double x, double df);
double student_t_quantile(double p, double df);

// Linear-interpolation sample quantile of an unsorted sample (R type 7).
double sample_quantile(std::vector<double> values, double p);

}  // namespace swcrt
