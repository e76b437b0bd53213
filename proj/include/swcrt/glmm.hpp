#pragma once

#include "swcrt/model.hpp"

namespace swcrt {

struct GlmmOptions {
  int max_outer = 500;
  int max_inner = 100;
  double grad_tolerance = 1e-5;
  double separation_eta = 15.0;
};

// Logistic mixed model by Laplace-approximated maximum likelihood. Inner
// per-cluster Newton solves give the conditional modes; the outer
// quasi-Newton runs over fixed effects and log-SD parameters jointly with
// numeric gradients.
FittedModel fit_glmm_logistic(const Dataset& data, const FixedEffectsSpec& spec, RandomKind working,
                              const GlmmOptions& options = {});

FittedModel fit_glmm_cells(std::vector<ClusterCache> clusters, const WorkingStructure& working, int params,
                           const GlmmOptions& options = {});

// Pooled (no random effects) logistic Newton fit; also the starting value.
Eigen::VectorXd pooled_logistic(const std::vector<ClusterCache>& clusters, int params);

}  // namespace swcrt
