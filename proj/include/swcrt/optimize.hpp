#pragma once

#include <Eigen/Core>
#include <functional>

namespace swcrt {

struct ScalarMinimum {
  double x = 0.0;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Coarse grid scan followed by golden-section refinement on [lo, hi].
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tolerance, int max_iterations, int grid_points = 25);

struct VectorMinimum {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

VectorMinimum nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& start, double step, double tolerance,
                                   int max_iterations);

struct BfgsOptions {
  int max_iterations = 500;
  double grad_tolerance = 1e-6;
  double step_tolerance = 1e-12;
  double gradient_h = 1e-6;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
};

// BFGS with central-difference gradients and Armijo backtracking.
BfgsResult bfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
                         const BfgsOptions& options = {});

}  // namespace swcrt
