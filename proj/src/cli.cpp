#include "swcrt/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "swcrt/config.hpp"
#include "swcrt/errors.hpp"
#include "swcrt/glmm.hpp"
#include "swcrt/lmm.hpp"

namespace swcrt {

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "scenario,estimand,estimator,reference,n,excluded,mean_est,bias_pct,coverage_pct,mc_se\n";
  for (const SummaryRow& row : rows)
    out << row.scenario << ',' << row.estimand << ',' << estimator_name(row.estimator) << ','
        << reference_name(row.reference) << ',' << row.n << ',' << row.excluded << ',' << format_g6(row.mean_est)
        << ',' << format_g6(row.bias_pct) << ',' << format_g6(row.coverage_pct) << ',' << format_g6(row.mc_se)
        << '\n';
  return out.str();
}

std::string records_csv(const std::vector<WorkingRun>& runs) {
  std::ostringstream out;
  out << "scenario,replication,fit_converged,boundary,quasi_separation,fit_failed,events_longest_cell,"
         "objective,iterations,estimand,estimator,reference,estimate,se,covered,usable,adjustment_failed,"
         "mbn_c,mbn_delta,mbn_phi,mbn_pstar\n";
  for (const WorkingRun& run : runs) {
    for (const ReplicationRecord& record : run.records) {
      std::ostringstream prefix;
      prefix << run.label << ',' << record.replication << ',' << record.fit_converged << ',' << record.boundary
             << ',' << record.quasi_separation << ',' << record.fit_failed << ',';
      if (record.events_longest_cell >= 0) prefix << record.events_longest_cell;
      prefix << ',' << format_full(record.objective) << ',' << record.iterations << ',';
      if (record.rows.empty()) {
        out << prefix.str() << ",,,,,," << ",,,\n";
        continue;
      }
      for (const RecordRow& row : record.rows) {
        out << prefix.str() << row.estimand << ',' << estimator_name(row.estimator) << ','
            << reference_name(row.reference) << ',';
        if (row.usable)
          out << format_full(row.estimate) << ',' << format_full(row.se) << ',' << row.covered;
        else
          out << ",,";
        out << ',' << row.usable << ',' << row.adjustment_failed << ',';
        if (row.mbn)
          out << format_full(row.mbn->c) << ',' << format_full(row.mbn->delta) << ',' << format_full(row.mbn->phi)
              << ',' << row.mbn->p_star;
        else
          out << ",,,";
        out << '\n';
      }
    }
  }
  return out.str();
}

std::string sparsity_csv(const std::vector<SparsityRow>& rows) {
  std::ostringstream out;
  out << "scenario,bin,estimand,estimator,n,se_median,se_q25,se_q75\n";
  for (const SparsityRow& row : rows)
    out << row.scenario << ',' << row.bin << ',' << row.estimand << ',' << estimator_name(row.estimator) << ','
        << row.n << ',' << format_g6(row.se_median) << ',' << format_g6(row.se_q25) << ','
        << format_g6(row.se_q75) << '\n';
  return out.str();
}

std::string analysis_report_csv(const std::vector<EstimandRow>& rows) {
  std::ostringstream out;
  out << "estimand,estimator,reference,estimate,se,lo,hi,df,covered\n";
  for (const EstimandRow& row : rows) {
    out << row.estimand << ',' << estimator_name(row.estimator) << ',' << reference_name(row.reference) << ','
        << format_g6(row.estimate) << ',' << format_g6(row.se) << ',' << format_g6(row.lo) << ','
        << format_g6(row.hi) << ',' << row.df << ',';
    if (row.covered) out << (*row.covered ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json scenario_manifest(const ScenarioConfig& scenario, const RunSettings& settings, int workers,
                                 const std::vector<std::string>& outputs) {
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["scenario"] = scenario.id;
  manifest["design"] = {{"clusters", scenario.clusters},
                        {"periods", scenario.periods},
                        {"cluster_period_size", scenario.cluster_period_size}};
  manifest["outcome"]["family"] = scenario.family == Family::continuous ? "continuous" : "binary";
  manifest["outcome"]["mu"] = scenario.mu;
  manifest["outcome"]["sigma"] = scenario.sigma;
  manifest["outcome"]["baseline_prob"] = scenario.baseline_prob;
  manifest["outcome"]["log_or"] = scenario.log_or;
  manifest["outcome"]["period_effects"] = scenario.period_effects;
  manifest["structure"] = {{"kind", random_kind_name(scenario.generating.kind)},
                           {"sigma_u", scenario.generating.sigma_u},
                           {"sigma_v", scenario.generating.sigma_v},
                           {"sigma_gamma", scenario.generating.sigma_gamma},
                           {"rho", scenario.generating.rho},
                           {"sigma_t", scenario.generating.sigma_t}};
  manifest["effect"]["deltas"] = scenario.deltas;
  manifest["model"]["treatment"] =
      scenario.fitted_treatment == Treatment::exposure_indicators ? "eti" : "it";
  std::vector<std::string> working;
  for (RandomKind kind : scenario.working) working.emplace_back(random_kind_name(kind));
  manifest["model"]["working"] = working;
  std::vector<std::string> estimators;
  for (Estimator e : scenario.estimators) estimators.emplace_back(estimator_name(e));
  manifest["estimators"] = estimators;
  std::vector<std::string> references;
  for (Reference r : scenario.references) references.emplace_back(reference_name(r));
  manifest["references"] = references;
  manifest["inference"]["level"] = scenario.level;
  manifest["mbn"] = {{"r", scenario.mbn.r}, {"d", scenario.mbn.d}};
  manifest["run"] = {{"replications", scenario.replications},
                     {"seed", scenario.seed},
                     {"workers", workers},
                     {"export_datasets", settings.export_datasets}};
  manifest["outputs"] = outputs;
  return manifest;
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int workers_override) {
  try {
    RunSettings settings;
    const ScenarioConfig scenario = load_scenario(config_path, &settings);
    const int workers = workers_override > 0 ? workers_override : settings.workers;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "'");

    const ScenarioResult result = run_scenario(scenario, workers);

    std::vector<std::string> outputs = {"summary.csv", "records.csv", "run.json"};
    write_text_file(out_dir + "/summary.csv", summary_csv(result.summary));
    write_text_file(out_dir + "/records.csv", records_csv(result.runs));
    if (result.sparsity_applicable) {
      write_text_file(out_dir + "/sparsity.csv", sparsity_csv(result.sparsity));
      outputs.emplace_back("sparsity.csv");
    }
    for (int r = 0; r < settings.export_datasets && r < scenario.replications; ++r) {
      RngStream stream(scenario.seed, scenario.id, static_cast<std::uint64_t>(r));
      const Dataset data = simulate_dataset(scenario, stream);
      const std::string name = "dataset_rep" + std::to_string(r) + ".csv";
      write_text_file(out_dir + "/" + name, dataset_csv(data));
      outputs.push_back(name);
    }
    const nlohmann::json manifest = scenario_manifest(scenario, settings, workers, outputs);
    write_text_file(out_dir + "/run.json", manifest.dump(2) + "\n");
    return kExitOk;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const IoError& err) {
    std::cerr << "io error: " << err.what() << '\n';
    return kExitIo;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitConfig;
  }
}

std::map<int, int> parse_crossover_map(const std::string& text) {
  std::map<int, int> crossover;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw SchemaError("crossover map entries look like cluster=period; got '" + item + "'");
    try {
      const int cluster = std::stoi(item.substr(0, eq));
      const int period = std::stoi(item.substr(eq + 1));
      if (crossover.count(cluster)) throw SchemaError("duplicate crossover for cluster " + std::to_string(cluster));
      crossover[cluster] = period;
    } catch (const std::invalid_argument&) {
      throw SchemaError("non-numeric crossover entry '" + item + "'");
    }
  }
  if (crossover.empty()) throw SchemaError("empty crossover map");
  return crossover;
}

int cmd_analyze(const AnalysisRequest& request) {
  try {
    IngestOptions options;
    options.crossover = request.crossover;
    options.crossover_column = request.crossover_column;
    IngestedData ingested = ingest_long_format(request.data_path, options);
    ingested.data.family = request.family;
    if (request.family == Family::binary) {
      for (const Observation& row : ingested.data.rows) {
        const double rounded = std::round(row.y);
        if (rounded != row.y || row.y < 0.0 || row.y > row.trials)
          throw SchemaError("binomial outcomes must be integer counts in 0..n");
      }
    } else {
      for (const Observation& row : ingested.data.rows)
        if (row.trials != 1) throw SchemaError("column 'n' is only meaningful for binomial outcomes");
    }

    const FixedEffectsSpec spec{request.model, ingested.periods};
    FittedModel fitted = request.family == Family::continuous
                             ? fit_lmm(ingested.data, spec, request.working)
                             : fit_glmm_logistic(ingested.data, spec, request.working);

    std::vector<std::pair<std::string, Eigen::VectorXd>> contrasts;
    contrasts.emplace_back("tate", contrast_tate(spec));
    contrasts.emplace_back("lte", contrast_lte(spec));
    if (request.model == Treatment::exposure_indicators) {
      for (int e = 1; e <= spec.periods - 1; ++e)
        contrasts.emplace_back("delta_" + std::to_string(e), contrast_exposure(spec, e));
    } else {
      contrasts.emplace_back("delta", contrast_exposure(spec, 1));
    }

    std::vector<EstimandRow> rows;
    for (const auto& [name, contrast] : contrasts)
      for (Estimator estimator : request.estimators) {
        const VarianceEstimate variance = compute_estimator(fitted, estimator, request.mbn);
        for (Reference reference : request.references)
          rows.push_back(infer(fitted, variance, contrast, reference, request.level, std::nullopt, name));
      }

    const std::string report = analysis_report_csv(rows);
    if (request.out_path.empty())
      std::cout << report;
    else
      write_text_file(request.out_path, report);

    if (!fitted.converged || fitted.quasi_separation) {
      std::cerr << "warning: fit did not converge cleanly (converged=" << fitted.converged
                << ", quasi_separation=" << fitted.quasi_separation << "); estimates written for diagnosis\n";
      return kExitNonConvergence;
    }
    return kExitOk;
  } catch (const IoError& err) {
    std::cerr << "io error: " << err.what() << '\n';
    return kExitIo;
  } catch (const NonConvergence& err) {
    std::cerr << "fit error: " << err.what() << '\n';
    return kExitNonConvergence;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace swcrt
