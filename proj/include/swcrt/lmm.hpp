#pragma once

#include "swcrt/model.hpp"

namespace swcrt {

struct FitOptions {
  int max_iterations = 500;
  double tolerance = 1e-9;
};

// Linear mixed model by profiled REML: the residual variance and fixed
// effects are profiled out, leaving the log-SD-ratio parameters, which are
// optimized by golden section (one group) or Nelder-Mead (two groups).
FittedModel fit_lmm(const Dataset& data, const FixedEffectsSpec& spec, RandomKind working,
                    const FitOptions& options = {});

FittedModel fit_lmm_cells(std::vector<ClusterCache> clusters, const WorkingStructure& working, int params,
                          const FitOptions& options = {});

// Generalized-least-squares assembly at fixed variance components (no
// estimation); continuous outcomes only.
FittedModel gls_with_known_variance(std::vector<ClusterCache> clusters, const WorkingStructure& working,
                                    int params, const std::vector<double>& group_variances, double sigma2);

// Profiled restricted log-likelihood at log-SD-ratio parameters (one per
// variance group); exposed for optimizer diagnostics.
double reml_profile_loglik(const std::vector<ClusterCache>& clusters, const WorkingStructure& working, int params,
                           const Eigen::VectorXd& log_sd_ratios);

}  // namespace swcrt
