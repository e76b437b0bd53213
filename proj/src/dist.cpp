#include "swcrt/dist.hpp"

#include <algorithm>
#include <cmath>

#include "swcrt/errors.hpp"

namespace swcrt {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  // Wichura (1988), algorithm AS 241, PPND16.
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("normal_quantile: p must lie in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                 45921.953931549871457) *
                    r +
                13731.693765509461125) *
                   r +
               1971.5909503065514427) *
                  r +
              133.14166789178437745) *
                 r +
             3.387132872796366608) /
           (((((((5226.495278852545703 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                 21213.794301586595867) *
                    r +
                5394.1960214247511077) *
                   r +
               687.1870074920579083) *
                  r +
              42.313330701600911252) *
                 r +
             1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                  1.27045825245236838258) *
                     r +
                 3.64784832476320460504) *
                    r +
                5.7694972214606914055) *
                   r +
               4.6303378461565452959) *
                  r +
              1.42343711074968357734) /
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                  0.14810397642748007459) *
                     r +
                 0.68976733498510000455) *
                    r +
                1.6763848301838038494) *
                   r +
               2.05319162663775882187) *
                  r +
              1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                  0.026532189526576123093) *
                     r +
                 0.29656057182850489123) *
                    r +
                1.7848265399172913358) *
                   r +
               5.4637849111641143699) *
                  r +
              6.6579046435011037772) /
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                  7.868691311456132591e-4) *
                     r +
                 0.0148753612908506148525) *
                    r +
                0.13692988092273580531) *
                   r +
               0.59983220655588793769) *
                  r +
              1.0);
  }
  return q < 0.0 ? -value : value;
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  const int max_iter = 400;
  const double eps = 3e-16;
  const double fpmin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw NonConvergence("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidParameter("incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(ln_front) * beta_cf(a, b, x) / a;
  return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double x, double df) {
  if (!(df > 0.0)) throw InvalidParameter("student_t_cdf: df must be positive");
  if (x == 0.0) return 0.5;
  const double p = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + x * x));
  return x > 0.0 ? 1.0 - p : p;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("student_t_quantile: p must lie in (0,1)");
  if (!(df > 0.0)) throw InvalidParameter("student_t_quantile: df must be positive");
  if (p == 0.5) return 0.0;
  const bool upper = p > 0.5;
  const double tail = upper ? p : 1.0 - p;
  // Bracket the root, then bisect on the monotone CDF.
  double lo = 0.0;
  double hi = std::max(2.0, 2.0 * normal_quantile(tail));
  while (student_t_cdf(hi, df) < tail) {
    hi *= 2.0;
    if (hi > 1e12) throw NonConvergence("student_t_quantile: failed to bracket quantile");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-14 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, df) < tail ? lo : hi) = mid;
  }
  const double q = 0.5 * (lo + hi);
  return upper ? q : -q;
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw EmptyInput("sample_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("sample_quantile: p must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace swcrt
