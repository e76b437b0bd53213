#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "swcrt/cli.hpp"
#include "swcrt/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stepped-wedge mixed-model simulation and cluster-robust analysis"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int workers = 0;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a simulation scenario from a config file");
  simulate->add_option("--config", config_path, "Scenario config file")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--workers", workers, "Worker threads (overrides run.workers)");

  swcrt::AnalysisRequest request;
  std::string crossover_map, model = "eti", family_name, working = "exch";
  std::vector<std::string> estimators, references;
  CLI::App* analyze = app.add_subcommand("analyze", "Fit a trial dataset and report robust inference");
  analyze->add_option("--data", request.data_path, "Long-format CSV (cluster,period,y[,n,treat])")->required();
  analyze->add_option("--crossover", crossover_map, "Per-cluster crossover map, e.g. 1=2,2=3");
  analyze->add_option("--crossover-column", request.crossover_column, "Column holding each row's crossover period");
  analyze->add_option("--model", model, "Treatment structure: eti or it")->capture_default_str();
  analyze->add_option("--family", family_name, "Outcome family: gaussian or binomial")->required();
  analyze->add_option("--working", working, "Working random-effects structure: exch, ne or ne_ri")
      ->capture_default_str();
  analyze->add_option("--estimators", estimators, "Subset of model,classic,kc,md,mbn")->delimiter(',');
  analyze->add_option("--references", references, "Subset of t,normal")->delimiter(',');
  analyze->add_option("--level", request.level, "Confidence level")->capture_default_str();
  analyze->add_option("--mbn-r", request.mbn.r, "MBN lower bound r")->capture_default_str();
  analyze->add_option("--mbn-d", request.mbn.d, "MBN threshold parameter d")->capture_default_str();
  analyze->add_option("--out", request.out_path, "Report path (stdout when omitted)");

  int design_clusters = 0, design_periods = 0, design_size = 1;
  CLI::App* design = app.add_subcommand("design", "Print a standard design allocation table");
  design->add_option("--clusters", design_clusters, "Number of clusters")->required();
  design->add_option("--periods", design_periods, "Number of periods")->required();
  design->add_option("--cluster-period-size", design_size, "Individuals per cluster-period")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) return swcrt::cmd_simulate(config_path, out_dir, workers);

  if (analyze->parsed()) {
    try {
      if (!crossover_map.empty()) request.crossover = swcrt::parse_crossover_map(crossover_map);
      if (model == "eti") {
        request.model = swcrt::Treatment::exposure_indicators;
      } else if (model == "it") {
        request.model = swcrt::Treatment::immediate;
      } else {
        throw swcrt::ConfigError("--model must be eti or it");
      }
      if (family_name == "gaussian") {
        request.family = swcrt::Family::continuous;
      } else if (family_name == "binomial") {
        request.family = swcrt::Family::binary;
      } else {
        throw swcrt::ConfigError("--family must be gaussian or binomial");
      }
      request.working = swcrt::random_kind_from_name(working);
      if (!estimators.empty()) {
        request.estimators.clear();
        for (const std::string& name : estimators) request.estimators.push_back(swcrt::estimator_from_name(name));
      }
      if (!references.empty()) {
        request.references.clear();
        for (const std::string& name : references) request.references.push_back(swcrt::reference_from_name(name));
      }
    } catch (const swcrt::Error& err) {
      std::cerr << "error: " << err.what() << '\n';
      return swcrt::kExitConfig;
    }
    return swcrt::cmd_analyze(request);
  }

  try {
    std::cout << swcrt::design_table_csv(swcrt::build_standard_design(design_clusters, design_periods, design_size));
  } catch (const swcrt::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return swcrt::kExitConfig;
  }
  return swcrt::kExitOk;
}
