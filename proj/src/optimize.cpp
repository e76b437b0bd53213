#include "swcrt/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "swcrt/errors.hpp"

namespace swcrt {

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tolerance, int max_iterations, int grid_points) {
  if (!(hi > lo)) throw InvalidParameter("golden_section_minimize: empty interval");
  ScalarMinimum result;

  // Locate the best grid cell first so the golden search starts inside a
  // bracket around the global minimum of the scan.
  double best_x = lo, best_f = f(lo);
  const double step = (hi - lo) / (grid_points - 1);
  for (int i = 1; i < grid_points; ++i) {
    const double x = lo + i * step;
    const double fx = f(x);
    ++result.iterations;
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (result.iterations < max_iterations) {
    ++result.iterations;
    if ((b - a) <= tolerance * std::max(1.0, std::fabs(a) + std::fabs(b))) {
      result.converged = true;
      break;
    }
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  result.x = f1 < f2 ? x1 : x2;
  result.f = std::min(f1, f2);
  if (best_f < result.f) {
    result.x = best_x;
    result.f = best_f;
  }
  return result;
}

VectorMinimum nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& start, double step, double tolerance,
                                   int max_iterations) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> simplex(static_cast<size_t>(n) + 1, start);
  std::vector<double> values(static_cast<size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) simplex[static_cast<size_t>(i)](i - 1) += step;
  for (int i = 0; i <= n; ++i) values[static_cast<size_t>(i)] = f(simplex[static_cast<size_t>(i)]);

  VectorMinimum result;
  auto order = [&] {
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        if (values[static_cast<size_t>(j)] < values[static_cast<size_t>(i)]) {
          std::swap(values[static_cast<size_t>(i)], values[static_cast<size_t>(j)]);
          std::swap(simplex[static_cast<size_t>(i)], simplex[static_cast<size_t>(j)]);
        }
  };
  order();

  while (result.iterations < max_iterations) {
    ++result.iterations;
    const double spread = std::fabs(values[static_cast<size_t>(n)] - values[0]);
    if (spread <= tolerance * (1.0 + std::fabs(values[0]))) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[static_cast<size_t>(i)];
    centroid /= n;

    const Eigen::VectorXd worst = simplex[static_cast<size_t>(n)];
    const Eigen::VectorXd reflected = centroid + (centroid - worst);
    const double fr = f(reflected);
    if (fr < values[0]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - worst);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[static_cast<size_t>(n)] = expanded;
        values[static_cast<size_t>(n)] = fe;
      } else {
        simplex[static_cast<size_t>(n)] = reflected;
        values[static_cast<size_t>(n)] = fr;
      }
    } else if (fr < values[static_cast<size_t>(n) - 1]) {
      simplex[static_cast<size_t>(n)] = reflected;
      values[static_cast<size_t>(n)] = fr;
    } else {
      const Eigen::VectorXd contracted = centroid + 0.5 * (worst - centroid);
      const double fc = f(contracted);
      if (fc < values[static_cast<size_t>(n)]) {
        simplex[static_cast<size_t>(n)] = contracted;
        values[static_cast<size_t>(n)] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[static_cast<size_t>(i)] = simplex[0] + 0.5 * (simplex[static_cast<size_t>(i)] - simplex[0]);
          values[static_cast<size_t>(i)] = f(simplex[static_cast<size_t>(i)]);
        }
      }
    }
    order();
  }
  result.x = simplex[0];
  result.f = values[0];
  return result;
}

namespace {

Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                 double h_scale) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = h_scale * std::max(1.0, std::fabs(x(i)));
    probe(i) = x(i) + h;
    const double fp = f(probe);
    probe(i) = x(i) - h;
    const double fm = f(probe);
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

BfgsResult bfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
                         const BfgsOptions& options) {
  const Eigen::Index n = start.size();
  BfgsResult result;
  result.x = start;
  result.f = f(start);
  result.gradient = central_gradient(f, result.x, options.gradient_h);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);

  while (result.iterations < options.max_iterations) {
    if (result.gradient.cwiseAbs().maxCoeff() <= options.grad_tolerance) {
      result.converged = true;
      break;
    }
    ++result.iterations;
    Eigen::VectorXd direction = -h_inv * result.gradient;
    double slope = direction.dot(result.gradient);
    if (slope >= 0.0) {  // reset on loss of descent
      h_inv.setIdentity();
      direction = -result.gradient;
      slope = -result.gradient.squaredNorm();
    }

    double alpha = 1.0;
    double f_new = 0.0;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      x_new = result.x + alpha * direction;
      f_new = f(x_new);
      if (f_new <= result.f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd g_new = central_gradient(f, x_new, options.gradient_h);
    const Eigen::VectorXd s = x_new - result.x;
    const Eigen::VectorXd y = g_new - result.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const Eigen::VectorXd hy = h_inv * y;
      const double yhy = y.dot(hy);
      h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
               (hy * s.transpose() + s * hy.transpose()) / sy;
    }

    const bool tiny_step = s.cwiseAbs().maxCoeff() <= options.step_tolerance * (1.0 + result.x.cwiseAbs().maxCoeff()) ||
                           std::fabs(result.f - f_new) <= options.step_tolerance * (1.0 + std::fabs(result.f));
    result.x = x_new;
    result.f = f_new;
    result.gradient = g_new;
    if (tiny_step) {
      result.converged = result.gradient.cwiseAbs().maxCoeff() <= 1e3 * options.grad_tolerance;
      break;
    }
  }
  if (!result.converged && result.gradient.cwiseAbs().maxCoeff() <= options.grad_tolerance) result.converged = true;
  return result;
}

}  // namespace swcrt
