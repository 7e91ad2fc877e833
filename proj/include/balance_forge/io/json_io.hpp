#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "balance_forge/balance.hpp"
#include "balance_forge/numeric.hpp"
#include "balance_forge/simulate.hpp"

namespace balance_forge {

using ordered_json = nlohmann::ordered_json;

/// Canonical number formatting: values are rounded to 12 significant digits
/// and printed exactly as they appear in JSON output, so every rendering of a
/// report carries the same digits and reserializing parsed output is a no-op.
inline std::string fmt_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return ordered_json(round_sig12(v)).dump();
}

namespace detail {

inline ordered_json json_number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig12(v);
}

}  // namespace detail

inline ordered_json report_to_json(const BalanceReport& report) {
  ordered_json doc;
  doc["method"] = report.method;
  doc["n_treated"] = report.n_treated;
  doc["n_control"] = report.n_control;
  doc["rows"] = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json jrow;
    jrow["covariate"] = row.covariate;
    jrow["kind"] = std::string(to_string(row.kind));
    jrow["z"] = row.z ? detail::json_number_or_null(row.z->z) : ordered_json(nullptr);
    jrow["sd"] = row.sd ? detail::json_number_or_null(row.sd->sd) : ordered_json(nullptr);
    if (row.z) {
      ordered_json comps;
      for (const auto& [key, value] : row.z->components) {
        comps[key] = detail::json_number_or_null(value);
      }
      jrow["components"] = std::move(comps);
      jrow["warnings"] = row.z->warnings;
    } else {
      jrow["components"] = nullptr;
      jrow["warnings"] = ordered_json::array();
    }
    jrow["error"] = row.error.empty() ? ordered_json(nullptr) : ordered_json(row.error);
    doc["rows"].push_back(std::move(jrow));
  }
  ordered_json agg;
  agg["mean_abs_z"] = detail::json_number_or_null(report.aggregates.mean_abs_z);
  agg["var_z"] = detail::json_number_or_null(report.aggregates.var_z);
  agg["rows_used"] = report.aggregates.rows_used;
  doc["aggregates"] = std::move(agg);
  return doc;
}

inline std::string report_to_json_text(const BalanceReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

inline BalanceReport report_from_json(const ordered_json& doc) {
  BalanceReport report;
  try {
    report.method = doc.at("method").get<std::string>();
    report.n_treated = doc.at("n_treated").get<std::size_t>();
    report.n_control = doc.at("n_control").get<std::size_t>();
    for (const auto& jrow : doc.at("rows")) {
      ReportRow row;
      row.covariate = jrow.at("covariate").get<std::string>();
      row.kind = zkind_from_string(jrow.at("kind").get<std::string>());
      if (!jrow.at("z").is_null()) {
        ZResult z;
        z.covariate = row.covariate;
        z.kind = row.kind;
        z.z = jrow["z"].get<double>();
        if (jrow.contains("components") && !jrow["components"].is_null()) {
          for (const auto& [key, value] : jrow["components"].items()) {
            z.components.emplace_back(key, value.is_null()
                                               ? std::numeric_limits<double>::quiet_NaN()
                                               : value.get<double>());
          }
        }
        if (jrow.contains("warnings")) {
          z.warnings = jrow["warnings"].get<std::vector<std::string>>();
        }
        row.z = std::move(z);
      }
      if (!jrow.at("sd").is_null()) {
        SdResult sd;
        sd.covariate = row.covariate;
        sd.sd = jrow["sd"].get<double>();
        row.sd = sd;
      }
      if (!jrow.at("error").is_null()) row.error = jrow["error"].get<std::string>();
      report.rows.push_back(std::move(row));
    }
    const auto& agg = doc.at("aggregates");
    report.aggregates.rows_used = agg.at("rows_used").get<std::size_t>();
    if (!agg.at("mean_abs_z").is_null()) {
      report.aggregates.mean_abs_z = agg["mean_abs_z"].get<double>();
    }
    if (!agg.at("var_z").is_null()) {
      report.aggregates.var_z = agg["var_z"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed balance report JSON: ") + e.what());
  }
  return report;
}

inline BalanceReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("report '" + path + "': " + e.what());
  }
  try {
    return report_from_json(doc);
  } catch (const DataError& e) {
    throw DataError("report '" + path + "': " + e.what());
  }
}

namespace detail {

// Group-summary cell shown in the text table, picked from the audit
// components of each row kind.
inline std::string summary_cell(const ReportRow& row, bool treated) {
  if (!row.z) return "-";
  const char* key = nullptr;
  switch (row.kind) {
    case ZKind::continuous_mean: key = treated ? "mean_treated" : "mean_control"; break;
    case ZKind::continuous_variance: key = treated ? "var_treated" : "var_control"; break;
    case ZKind::binary: key = treated ? "prevalence_treated" : "prevalence_control"; break;
    case ZKind::ordinal: key = treated ? "mean_rank_treated" : "mean_rank_control"; break;
    case ZKind::nominal: return "-";
  }
  for (const auto& [name, value] : row.z->components) {
    if (name == key) return fmt_number(value);
  }
  return "-";
}

}  // namespace detail

/// Aligned text rendering. Numbers carry the same digits as the JSON output.
inline void report_to_text(const BalanceReport& report, std::ostream& out) {
  std::vector<std::array<std::string, 6>> lines;
  lines.push_back({"covariate", "kind", "treated", "control", "z", "sd"});
  for (const auto& row : report.rows) {
    std::array<std::string, 6> line;
    line[0] = row.covariate;
    line[1] = std::string(to_string(row.kind));
    line[2] = detail::summary_cell(row, true);
    line[3] = detail::summary_cell(row, false);
    line[4] = row.z ? fmt_number(row.z->z) : ("error: " + row.error);
    line[5] = row.sd ? fmt_number(row.sd->sd) : "-";
    lines.push_back(std::move(line));
  }
  std::array<std::size_t, 6> width{};
  for (const auto& line : lines) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  out << "balance report | method: " << report.method << " | treated: " << report.n_treated
      << " | control: " << report.n_control << "\n\n";
  for (const auto& line : lines) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out << std::left << std::setw(static_cast<int>(width[c]) + 2) << line[c];
    }
    out << "\n";
  }
  out << "\naggregates: mean |z| = "
      << (report.aggregates.rows_used ? fmt_number(report.aggregates.mean_abs_z) : "-")
      << " | variance of z = "
      << (report.aggregates.rows_used >= 2 ? fmt_number(report.aggregates.var_z) : "-")
      << " | rows used = " << report.aggregates.rows_used << "\n";
  for (const auto& row : report.rows) {
    if (!row.z) continue;
    for (const auto& warning : row.z->warnings) {
      out << "warning [" << row.covariate << "]: " << warning << "\n";
    }
  }
}

/// Long-format Q-Q TSV over one or more reports; reference slopes ride along
/// in a comment header.
inline void write_qq_tsv(const std::vector<BalanceReport>& reports, std::ostream& out) {
  out << "# reference_slopes\t" << fmt_number(1.0) << "\t" << fmt_number(0.5) << "\n";
  out << "method\ttheoretical_quantile\tz\n";
  for (const auto& report : reports) {
    std::vector<double> zs;
    for (const auto& row : report.rows) {
      if (row.z) zs.push_back(row.z->z);
    }
    const QqData qq = qq_data(zs);
    for (std::size_t i = 0; i < qq.ordered.size(); ++i) {
      out << report.method << "\t" << fmt_number(qq.theoretical[i]) << "\t"
          << fmt_number(qq.ordered[i]) << "\n";
    }
  }
}

inline void simulation_to_tsv(const SimulationResult& result, std::ostream& out) {
  const auto& spec = result.spec;
  out << "# experiment=" << to_string(spec.experiment) << "\tseed=" << spec.seed
      << "\treplications=" << spec.replications << "\tps=" << fmt_number(spec.ps.mean_treated)
      << "," << fmt_number(spec.ps.mean_control) << "," << fmt_number(spec.ps.sd)
      << "\tclip=" << fmt_number(spec.ps.clip_lo) << "," << fmt_number(spec.ps.clip_hi);
  if (spec.experiment == Experiment::ratio_sweep) out << "\ttotal_n=" << spec.total_n;
  out << "\n";
  if (!result.skipped_grid.empty()) {
    out << "# skipped_grid=";
    for (std::size_t i = 0; i < result.skipped_grid.size(); ++i) {
      out << (i ? "," : "") << fmt_number(result.skipped_grid[i]);
    }
    out << "\n";
  }
  out << "grid\tscheme\tmeasure\tmean_abs\tq95\tmc_se\tnull_scale\treplications\tredraws\n";
  for (const auto& cell : result.cells) {
    out << fmt_number(cell.grid_value) << "\t" << to_string(cell.scheme) << "\t"
        << to_string(cell.measure) << "\t" << fmt_number(cell.mean_abs) << "\t"
        << fmt_number(cell.q95) << "\t" << fmt_number(cell.mc_se) << "\t"
        << fmt_number(cell.null_scale) << "\t" << cell.replications << "\t" << cell.redraws
        << "\n";
  }
}

inline ordered_json simulation_to_json(const SimulationResult& result) {
  const auto& spec = result.spec;
  ordered_json doc;
  doc["experiment"] = std::string(to_string(spec.experiment));
  doc["seed"] = spec.seed;
  doc["replications"] = spec.replications;
  doc["covariate"] = spec.covariate_kind == CovariateKind::continuous_normal
                         ? "continuous_normal"
                         : "binary_bernoulli";
  doc["schemes"] = ordered_json::array();
  for (auto s : spec.schemes) doc["schemes"].push_back(std::string(to_string(s)));
  ordered_json ps;
  ps["mean_treated"] = detail::json_number_or_null(spec.ps.mean_treated);
  ps["mean_control"] = detail::json_number_or_null(spec.ps.mean_control);
  ps["sd"] = detail::json_number_or_null(spec.ps.sd);
  ps["clip_lo"] = detail::json_number_or_null(spec.ps.clip_lo);
  ps["clip_hi"] = detail::json_number_or_null(spec.ps.clip_hi);
  doc["ps"] = std::move(ps);
  if (spec.experiment == Experiment::ratio_sweep) doc["total_n"] = spec.total_n;
  doc["grid"] = ordered_json::array();
  for (double g : spec.grid) doc["grid"].push_back(detail::json_number_or_null(g));
  doc["skipped_grid"] = ordered_json::array();
  for (double g : result.skipped_grid) {
    doc["skipped_grid"].push_back(detail::json_number_or_null(g));
  }
  doc["cells"] = ordered_json::array();
  for (const auto& cell : result.cells) {
    ordered_json jcell;
    jcell["grid"] = detail::json_number_or_null(cell.grid_value);
    jcell["scheme"] = std::string(to_string(cell.scheme));
    jcell["measure"] = std::string(to_string(cell.measure));
    jcell["mean_abs"] = detail::json_number_or_null(cell.mean_abs);
    jcell["q95"] = detail::json_number_or_null(cell.q95);
    jcell["mc_se"] = detail::json_number_or_null(cell.mc_se);
    jcell["null_scale"] = detail::json_number_or_null(cell.null_scale);
    jcell["replications"] = cell.replications;
    jcell["redraws"] = cell.redraws;
    doc["cells"].push_back(std::move(jcell));
  }
  return doc;
}

}  // namespace balance_forge
