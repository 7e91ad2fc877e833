#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "balance_forge/balance.hpp"
#include "balance_forge/demo_data.hpp"
#include "balance_forge/errors.hpp"
#include "balance_forge/io/json_io.hpp"
#include "balance_forge/io/schema.hpp"
#include "balance_forge/propensity.hpp"
#include "balance_forge/simulate.hpp"

namespace balance_forge::cli {

/// Bad flag combinations and other operator mistakes (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BalanceOptions {
  std::string data_path;
  std::string schema_path;
  std::optional<WeightScheme> scheme;
  std::optional<std::string> weight_column;  // overrides the schema's, if any
  std::optional<std::string> ps_column;
  std::optional<std::pair<double, double>> clip;
  std::optional<std::string> out_json;
  std::optional<std::string> label;
  bool json_to_stdout = false;
};

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
}

}  // namespace detail

/// Resolve the weighting source, build the report, and render it.
/// Exactly one source may drive the weights: an explicit weight column, a
/// scheme on top of a propensity column, a scheme on top of a freshly fitted
/// logistic model, or uniform weights when nothing is requested.
inline BalanceReport run_balance(const BalanceOptions& opts, std::ostream& human_out) {
  DatasetSchema schema = DatasetSchema::load(opts.schema_path);
  if (opts.weight_column) {
    if (opts.scheme) {
      throw UsageError("--weight-column conflicts with --scheme: pick one weighting source");
    }
    schema.weight_column = opts.weight_column;
    schema.ps_column.reset();
  }
  if (opts.ps_column) {
    if (opts.weight_column) {
      throw UsageError("--ps-column conflicts with --weight-column");
    }
    schema.ps_column = opts.ps_column;
    schema.weight_column.reset();
  }

  const CohortSample sample = ingest(read_csv(opts.data_path), schema);

  std::string label;
  ScaledWeights weights;
  if (schema.weight_column && !opts.scheme) {
    weights = scale_weights(*sample.raw_weights, sample.treatment);
    label = "weights:" + *schema.weight_column;
  } else if (schema.weight_column && opts.scheme) {
    throw UsageError("schema declares weight_column '" + *schema.weight_column +
                     "'; it conflicts with --scheme");
  } else {
    const WeightScheme scheme = opts.scheme.value_or(WeightScheme::uniform);
    label = std::string(to_string(scheme));
    std::vector<double> ps;
    if (scheme != WeightScheme::uniform) {
      if (sample.propensity) {
        ps = *sample.propensity;
      } else {
        const DesignMatrix design = build_design(sample);
        const PropensityModel model = fit_logistic(design, sample.treatment);
        if (model.separation) {
          throw NumericError("propensity model failed: " + model.diagnostic);
        }
        if (!model.converged) {
          throw NumericError("propensity model did not converge (" +
                             std::to_string(model.iterations) + " iterations)");
        }
        ps = model.fitted_ps;
      }
      if (opts.clip) ps = clip_ps(ps, opts.clip->first, opts.clip->second);
      weights = scale_weights(compute_weights(ps, sample.treatment, scheme),
                              sample.treatment);
    } else {
      const std::vector<double> ones(sample.size(), 1.0);
      weights = scale_weights(ones, sample.treatment);
    }
  }

  BalanceReport report = build_report(sample, weights, opts.label.value_or(label));
  if (opts.json_to_stdout) {
    human_out << report_to_json_text(report);
  } else {
    report_to_text(report, human_out);
  }
  if (opts.out_json) detail::write_file(*opts.out_json, report_to_json_text(report));
  return report;
}

/// Merge one or more report JSON files into a long-format Q-Q TSV.
inline void run_qq(const std::vector<std::string>& report_paths, std::ostream& out) {
  if (report_paths.empty()) throw UsageError("qq: need at least one report JSON file");
  std::vector<BalanceReport> reports;
  reports.reserve(report_paths.size());
  for (const auto& path : report_paths) {
    BalanceReport report = load_report(path);
    std::size_t usable = 0;
    for (const auto& row : report.rows) usable += row.z.has_value();
    if (usable < 2) {
      throw DataError("report '" + path + "' has fewer than 2 z rows");
    }
    reports.push_back(std::move(report));
  }
  write_qq_tsv(reports, out);
}

struct SimulateOptions {
  Experiment experiment = Experiment::size_sweep;
  std::optional<std::vector<double>> grid;
  std::optional<int> replications;
  std::uint64_t seed = 0;
  bool full_grid = false;
  std::optional<std::pair<double, double>> clip;
  std::optional<std::string> out_prefix;
};

inline SimulationResult run_simulate(const SimulateOptions& opts, std::ostream& out,
                                     std::ostream& diag) {
  SimulationSpec spec = default_spec(opts.experiment, opts.full_grid);
  if (opts.grid) spec.grid = *opts.grid;
  if (opts.replications) spec.replications = *opts.replications;
  if (opts.clip) {
    spec.ps.clip_lo = opts.clip->first;
    spec.ps.clip_hi = opts.clip->second;
  }
  spec.seed = opts.seed;
  try {
    spec.validate();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }

  const SimulationResult result = run_simulation(spec);
  for (double skipped : result.skipped_grid) {
    diag << "warning: grid point " << fmt_number(skipped)
         << "% skipped (a group would have fewer than " << spec.min_group << " units)\n";
  }
  if (opts.out_prefix) {
    std::ostringstream tsv;
    simulation_to_tsv(result, tsv);
    detail::write_file(*opts.out_prefix + ".tsv", tsv.str());
    detail::write_file(*opts.out_prefix + ".json", simulation_to_json(result).dump(2) + "\n");
  } else {
    simulation_to_tsv(result, out);
  }
  return result;
}

/// Write the synthetic demonstration cohort as <prefix>.csv plus
/// <prefix>.schema.json.
inline void run_demo_data(const std::string& prefix, std::uint64_t seed, std::ostream& diag) {
  const CohortSample sample = generate_demo_cohort(seed);
  detail::write_file(prefix + ".csv", cohort_to_csv(sample));
  detail::write_file(prefix + ".schema.json", cohort_schema_json(sample));
  diag << "wrote " << prefix << ".csv (" << sample.size() << " rows, "
       << sample.n_treated() << " treated) and " << prefix << ".schema.json\n";
}

}  // namespace balance_forge::cli
