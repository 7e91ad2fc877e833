// balance-forge: covariate balance diagnostics for weighted two-group studies.
//
// Subcommands: balance (per-covariate z-differences and standardized
// differences), qq (Q-Q export of report z values), simulate (null-calibration
// sweeps), demo-data (synthetic example cohort).

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "balance_forge/cli.hpp"

namespace bf = balance_forge;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::pair<double, double> parse_clip(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw bf::cli::UsageError("--clip expects 'lo,hi'");
  }
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw bf::cli::UsageError("--clip expects numeric 'lo,hi'");
  }
}

// "a,b,c" or "lo:hi[:step]".
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  try {
    if (text.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::size_t begin = 0;
      while (begin <= text.size()) {
        const auto end = text.find(':', begin);
        parts.push_back(std::stod(text.substr(begin, end - begin)));
        if (end == std::string::npos) break;
        begin = end + 1;
      }
      if (parts.size() < 2 || parts.size() > 3) {
        throw bf::cli::UsageError("--grid range expects lo:hi[:step]");
      }
      const double lo = parts[0], hi = parts[1];
      const double step = parts.size() == 3 ? parts[2] : 1.0;
      if (!(step > 0.0) || hi < lo) {
        throw bf::cli::UsageError("--grid range expects lo <= hi and step > 0");
      }
      for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
    } else {
      std::size_t begin = 0;
      while (begin <= text.size()) {
        const auto end = text.find(',', begin);
        grid.push_back(std::stod(text.substr(begin, end - begin)));
        if (end == std::string::npos) break;
        begin = end + 1;
      }
    }
  } catch (const bf::cli::UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw bf::cli::UsageError("--grid expects 'a,b,c' or 'lo:hi[:step]'");
  }
  if (grid.empty()) throw bf::cli::UsageError("--grid produced no values");
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariate balance diagnostics for weighted two-group analyses"};
  app.require_subcommand(1);

  // balance
  auto* balance = app.add_subcommand("balance", "compute a per-covariate balance report");
  std::string data_path, schema_path, scheme_text, weight_column, ps_column, clip_text,
      out_json, label;
  bool json_to_stdout = false;
  balance->add_option("--data", data_path, "cohort CSV file")->required();
  balance->add_option("--schema", schema_path, "dataset schema JSON")->required();
  balance->add_option("--scheme", scheme_text,
                      "weight scheme: uniform|iptw|matching|overlap|att|atc");
  balance->add_option("--weight-column", weight_column, "use this CSV column as raw weights");
  balance->add_option("--ps-column", ps_column,
                      "use this CSV column as propensity scores (with --scheme)");
  balance->add_option("--clip", clip_text, "clamp propensity scores to lo,hi before weighting");
  balance->add_option("--out", out_json, "write the report JSON here");
  balance->add_option("--label", label, "method label recorded in the report");
  balance->add_flag("--json", json_to_stdout, "print JSON instead of the text table");

  // qq
  auto* qq = app.add_subcommand("qq", "export Q-Q data from balance report JSON files");
  std::vector<std::string> report_paths;
  std::string qq_out;
  qq->add_option("reports", report_paths, "balance report JSON files")->required();
  qq->add_option("--out", qq_out, "write the TSV here (default: stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run a null-calibration sweep");
  std::string experiment_text, grid_text, sim_out, sim_clip_text;
  int reps = 0;
  std::uint64_t seed = 0;
  bool full_grid = false;
  simulate->add_option("--experiment", experiment_text, "size|weights|ratio")->required();
  simulate->add_option("--grid", grid_text, "grid values 'a,b,c' or 'lo:hi[:step]'");
  simulate->add_option("--reps", reps, "replications per grid point");
  simulate->add_option("--seed", seed, "64-bit run seed");
  simulate->add_flag("--full-grid", full_grid, "use the full published sweep grid");
  simulate->add_option("--clip", sim_clip_text, "propensity clamp lo,hi (default 0.01,0.99)");
  simulate->add_option("--out", sim_out, "write <out>.tsv and <out>.json instead of stdout");

  // demo-data
  auto* demo = app.add_subcommand("demo-data", "write the synthetic example cohort");
  std::string demo_prefix = "demo";
  std::uint64_t demo_seed = bf::kDemoDataDefaultSeed;
  demo->add_option("--out", demo_prefix, "output prefix (default: demo)");
  demo->add_option("--seed", demo_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e);  // --help and friends
    }
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (balance->parsed()) {
      bf::cli::BalanceOptions opts;
      opts.data_path = data_path;
      opts.schema_path = schema_path;
      if (!scheme_text.empty()) {
        try {
          opts.scheme = bf::weight_scheme_from_string(scheme_text);
        } catch (const bf::DataError& e) {
          throw bf::cli::UsageError(e.what());
        }
      }
      if (!weight_column.empty()) opts.weight_column = weight_column;
      if (!ps_column.empty()) opts.ps_column = ps_column;
      if (!clip_text.empty()) opts.clip = parse_clip(clip_text);
      if (!out_json.empty()) opts.out_json = out_json;
      if (!label.empty()) opts.label = label;
      opts.json_to_stdout = json_to_stdout;
      bf::cli::run_balance(opts, std::cout);
    } else if (qq->parsed()) {
      if (qq_out.empty()) {
        bf::cli::run_qq(report_paths, std::cout);
      } else {
        std::ostringstream buffer;
        bf::cli::run_qq(report_paths, buffer);
        std::ofstream out(qq_out, std::ios::binary);
        if (!out) throw bf::DataError("cannot write '" + qq_out + "'");
        out << buffer.str();
      }
    } else if (simulate->parsed()) {
      bf::cli::SimulateOptions opts;
      try {
        opts.experiment = bf::experiment_from_string(experiment_text);
      } catch (const bf::DataError& e) {
        throw bf::cli::UsageError(e.what());
      }
      if (!grid_text.empty()) opts.grid = parse_grid(grid_text);
      if (reps > 0) opts.replications = reps;
      opts.seed = seed;
      opts.full_grid = full_grid;
      if (!sim_clip_text.empty()) opts.clip = parse_clip(sim_clip_text);
      if (!sim_out.empty()) opts.out_prefix = sim_out;
      bf::cli::run_simulate(opts, std::cout, std::cerr);
    } else if (demo->parsed()) {
      bf::cli::run_demo_data(demo_prefix, demo_seed, std::cerr);
    }
  } catch (const bf::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bf::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const bf::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
