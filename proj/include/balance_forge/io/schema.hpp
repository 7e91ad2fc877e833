#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "balance_forge/core.hpp"
#include "balance_forge/errors.hpp"
#include "balance_forge/io/csv.hpp"

namespace balance_forge {

/// Typed description of a dataset: which column carries the treatment flag,
/// the scale of every covariate, and optional weight / propensity columns.
struct CovariateSpec {
  std::string name;
  Scale scale = Scale::continuous;
  std::vector<std::string> ordered_levels;  // ordinal only
  std::vector<std::string> categories;      // nominal only
};

struct DatasetSchema {
  std::string treatment_column;
  std::vector<CovariateSpec> covariates;
  std::optional<std::string> weight_column;
  std::optional<std::string> ps_column;

  void validate() const;
  static DatasetSchema load(const std::string& path);
};

inline void DatasetSchema::validate() const {
  if (treatment_column.empty()) throw DataError("schema: treatment_column is required");
  if (covariates.empty()) throw DataError("schema: at least one covariate is required");
  std::set<std::string> names;
  for (const auto& cov : covariates) {
    if (cov.name == treatment_column) {
      throw DataError("schema: treatment column '" + treatment_column +
                      "' also listed as a covariate");
    }
    if (!names.insert(cov.name).second) {
      throw DataError("schema: duplicate covariate '" + cov.name + "'");
    }
    if (cov.scale == Scale::ordinal) {
      std::set<std::string> lv(cov.ordered_levels.begin(), cov.ordered_levels.end());
      if (cov.ordered_levels.size() < 2 || lv.size() != cov.ordered_levels.size()) {
        throw DataError("schema: ordinal covariate '" + cov.name +
                        "' needs >= 2 distinct ordered_levels");
      }
    }
    if (cov.scale == Scale::nominal) {
      std::set<std::string> ct(cov.categories.begin(), cov.categories.end());
      if (cov.categories.size() < 2 || ct.size() != cov.categories.size()) {
        throw DataError("schema: nominal covariate '" + cov.name +
                        "' needs >= 2 distinct categories");
      }
    }
  }
  if (weight_column && ps_column) {
    throw DataError("schema: at most one of weight_column and ps_column may be set");
  }
  for (const auto& opt : {weight_column, ps_column}) {
    if (opt && (names.count(*opt) || *opt == treatment_column)) {
      throw DataError("schema: column '" + *opt + "' cannot double as treatment/covariate");
    }
  }
}

inline DatasetSchema DatasetSchema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema '" + path + "': " + e.what());
  }
  DatasetSchema schema;
  try {
    schema.treatment_column = doc.at("treatment_column").get<std::string>();
    for (const auto& item : doc.at("covariates")) {
      CovariateSpec cov;
      cov.name = item.at("name").get<std::string>();
      cov.scale = scale_from_string(item.at("scale").get<std::string>());
      if (item.contains("ordered_levels")) {
        cov.ordered_levels = item["ordered_levels"].get<std::vector<std::string>>();
      }
      if (item.contains("categories")) {
        cov.categories = item["categories"].get<std::vector<std::string>>();
      }
      schema.covariates.push_back(std::move(cov));
    }
    if (doc.contains("weight_column") && !doc["weight_column"].is_null()) {
      schema.weight_column = doc["weight_column"].get<std::string>();
    }
    if (doc.contains("ps_column") && !doc["ps_column"].is_null()) {
      schema.ps_column = doc["ps_column"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema '" + path + "': " + e.what());
  }
  schema.validate();
  return schema;
}

namespace detail {

inline double parse_cell_double(const std::string& cell, std::size_t row,
                                const std::string& col) {
  if (cell.empty()) {
    throw DataError("row " + std::to_string(row) + ", column '" + col + "': missing value");
  }
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + cell.size() || !std::isfinite(v)) {
    throw DataError("row " + std::to_string(row) + ", column '" + col +
                    "': cannot parse '" + cell + "' as a number");
  }
  return v;
}

inline double parse_cell_binary(const std::string& cell, std::size_t row,
                                const std::string& col) {
  if (cell == "1" || cell == "yes") return 1.0;
  if (cell == "0" || cell == "no") return 0.0;
  throw DataError("row " + std::to_string(row) + ", column '" + col + "': expected 0/1 or " +
                  "yes/no, got '" + cell + "'");
}

inline double parse_cell_level(const std::string& cell, const std::vector<std::string>& levels,
                               std::size_t row, const std::string& col) {
  const auto it = std::find(levels.begin(), levels.end(), cell);
  if (it == levels.end()) {
    throw DataError("row " + std::to_string(row) + ", column '" + col + "': value '" + cell +
                    "' is not a declared level");
  }
  return static_cast<double>(std::distance(levels.begin(), it) + 1);
}

}  // namespace detail

/// Turn a parsed CSV table into a typed cohort according to the schema.
/// Ordinal cells map to their 1-based position in ordered_levels, nominal
/// cells to their 1-based position in categories.
inline CohortSample ingest(const CsvTable& table, const DatasetSchema& schema) {
  schema.validate();
  auto require_column = [&](const std::string& name) {
    const std::size_t idx = table.column(name);
    if (idx == CsvTable::npos) {
      throw DataError("dataset is missing column '" + name + "'");
    }
    return idx;
  };

  const std::size_t treat_idx = require_column(schema.treatment_column);
  const std::size_t n_rows = table.rows.size();

  CohortSample sample;
  sample.treatment.resize(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    sample.treatment[r] = detail::parse_cell_binary(table.rows[r][treat_idx], r + 2,
                                                    schema.treatment_column) != 0.0;
  }

  for (const auto& cov : schema.covariates) {
    const std::size_t idx = require_column(cov.name);
    CovariateColumn col;
    col.name = cov.name;
    col.scale = cov.scale;
    col.labels = cov.scale == Scale::ordinal ? cov.ordered_levels
                : cov.scale == Scale::nominal ? cov.categories
                                              : std::vector<std::string>{};
    col.values.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const std::string& cell = table.rows[r][idx];
      const std::size_t line = r + 2;  // header is line 1
      switch (cov.scale) {
        case Scale::continuous:
          col.values[r] = detail::parse_cell_double(cell, line, cov.name);
          break;
        case Scale::binary:
          col.values[r] = detail::parse_cell_binary(cell, line, cov.name);
          break;
        case Scale::ordinal:
          col.values[r] = detail::parse_cell_level(cell, cov.ordered_levels, line, cov.name);
          break;
        case Scale::nominal:
          col.values[r] = detail::parse_cell_level(cell, cov.categories, line, cov.name);
          break;
      }
    }
    sample.covariates.push_back(std::move(col));
  }

  auto load_optional = [&](const std::optional<std::string>& name,
                           std::optional<std::vector<double>>& dest) {
    if (!name) return;
    const std::size_t idx = require_column(*name);
    std::vector<double> values(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
      values[r] = detail::parse_cell_double(table.rows[r][idx], r + 2, *name);
    }
    dest = std::move(values);
  };
  load_optional(schema.weight_column, sample.raw_weights);
  load_optional(schema.ps_column, sample.propensity);

  sample.validate();
  return sample;
}

inline CohortSample ingest(const std::string& csv_path, const std::string& schema_path) {
  return ingest(read_csv(csv_path), DatasetSchema::load(schema_path));
}

}  // namespace balance_forge
