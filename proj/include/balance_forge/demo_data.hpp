#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "balance_forge/core.hpp"
#include "balance_forge/io/json_io.hpp"
#include "balance_forge/rng.hpp"

namespace balance_forge {

inline constexpr std::uint64_t kDemoDataDefaultSeed = 20210707;

/// Synthetic two-arm surgical cohort: 4 continuous, 9 binary, one 4-level
/// ordinal and one 3-level nominal covariate, with treatment assigned from a
/// known logistic model so the groups are visibly imbalanced before weighting.
inline CohortSample generate_demo_cohort(std::uint64_t seed = kDemoDataDefaultSeed,
                                         std::size_t n_units = 1282) {
  Xoshiro256pp rng = substream(seed, 77);

  CohortSample sample;
  sample.treatment.resize(n_units);

  auto continuous = [&](std::string name) {
    CovariateColumn col;
    col.name = std::move(name);
    col.scale = Scale::continuous;
    col.values.resize(n_units);
    return col;
  };
  auto binary = [&](std::string name) {
    CovariateColumn col;
    col.name = std::move(name);
    col.scale = Scale::binary;
    col.values.resize(n_units);
    return col;
  };

  CovariateColumn age = continuous("age");
  CovariateColumn bmi = continuous("bmi");
  CovariateColumn lvef = continuous("lvef");
  CovariateColumn prev_surgeries = continuous("prev_surgeries");

  const char* binary_names[] = {"female",       "hypertension", "diabetes",
                                "copd",         "renal_insufficiency",
                                "prev_mi",      "prev_stroke",  "pad",
                                "preop_iabp"};
  const double binary_prevalence[] = {0.22, 0.835, 0.29, 0.065, 0.01,
                                      0.33, 0.02,  0.115, 0.013};
  std::vector<CovariateColumn> binaries;
  for (const char* name : binary_names) binaries.push_back(binary(name));

  CovariateColumn priority;
  priority.name = "priority";
  priority.scale = Scale::ordinal;
  priority.labels = {"elective", "urgent", "emergent", "ultima_ratio"};
  priority.values.resize(n_units);

  CovariateColumn stenosis;
  stenosis.name = "main_stem_stenosis";
  stenosis.scale = Scale::nominal;
  stenosis.labels = {"yes", "no", "unclear"};
  stenosis.values.resize(n_units);

  auto categorical = [&](const double* probs, std::size_t k) {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<double>(i + 1);
    }
    return static_cast<double>(k);
  };

  const double priority_probs[] = {0.84, 0.07, 0.08, 0.01};
  const double stenosis_probs[] = {0.254, 0.30, 0.446};
  const double surgeries_probs[] = {0.92, 0.06, 0.015, 0.005};

  for (std::size_t i = 0; i < n_units; ++i) {
    age.values[i] = rng.normal(68.0, 9.3);
    bmi.values[i] = rng.normal(28.0, 4.4);
    lvef.values[i] = rng.normal(56.0, 13.0);
    prev_surgeries.values[i] = categorical(surgeries_probs, 4) - 1.0;
    for (std::size_t b = 0; b < binaries.size(); ++b) {
      binaries[b].values[i] = rng.bernoulli(binary_prevalence[b]) ? 1.0 : 0.0;
    }
    priority.values[i] = categorical(priority_probs, 4);
    stenosis.values[i] = categorical(stenosis_probs, 3);

    const double age_z = (age.values[i] - 68.0) / 9.3;
    const double bmi_z = (bmi.values[i] - 28.0) / 4.4;
    const double lvef_z = (lvef.values[i] - 56.0) / 13.0;
    double eta = -0.21;
    eta += 0.45 * age_z;
    eta += -0.25 * bmi_z;
    eta += 0.15 * lvef_z;
    eta += 0.13 * (lvef_z * lvef_z - 1.0);  // selection on spread, not just level
    eta += -0.35 * prev_surgeries.values[i];
    const double binary_effects[] = {0.10, -0.15, -0.45, -0.25, -0.50,
                                     -0.40, -0.60, 0.10,  -0.40};
    for (std::size_t b = 0; b < binaries.size(); ++b) {
      eta += binary_effects[b] * binaries[b].values[i];
    }
    eta += -0.55 * (priority.values[i] - 1.0);
    if (stenosis.values[i] == 2.0) eta += 0.35;
    if (stenosis.values[i] == 3.0) eta += -0.30;

    const double ps_true = 1.0 / (1.0 + std::exp(-eta));
    sample.treatment[i] = rng.bernoulli(ps_true) ? 1 : 0;
  }

  sample.covariates.push_back(std::move(age));
  sample.covariates.push_back(std::move(bmi));
  sample.covariates.push_back(std::move(lvef));
  sample.covariates.push_back(std::move(prev_surgeries));
  for (auto& col : binaries) sample.covariates.push_back(std::move(col));
  sample.covariates.push_back(std::move(priority));
  sample.covariates.push_back(std::move(stenosis));

  sample.validate();
  return sample;
}

/// CSV rendering of a cohort: ordinal/nominal codes become their labels,
/// binary columns 0/1, continuous columns canonical 12-digit numbers.
inline std::string cohort_to_csv(const CohortSample& sample) {
  std::string out = "treatment";
  for (const auto& col : sample.covariates) {
    out += ",";
    out += col.name;
  }
  out += "\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out += sample.treatment[i] ? "1" : "0";
    for (const auto& col : sample.covariates) {
      out += ",";
      switch (col.scale) {
        case Scale::continuous:
          out += fmt_number(col.values[i]);
          break;
        case Scale::binary:
          out += col.values[i] == 1.0 ? "1" : "0";
          break;
        case Scale::ordinal:
        case Scale::nominal:
          out += col.labels[static_cast<std::size_t>(col.values[i]) - 1];
          break;
      }
    }
    out += "\n";
  }
  return out;
}

/// Matching schema JSON for a generated cohort.
inline std::string cohort_schema_json(const CohortSample& sample) {
  ordered_json doc;
  doc["treatment_column"] = "treatment";
  doc["covariates"] = ordered_json::array();
  for (const auto& col : sample.covariates) {
    ordered_json item;
    item["name"] = col.name;
    item["scale"] = std::string(to_string(col.scale));
    if (col.scale == Scale::ordinal) item["ordered_levels"] = col.labels;
    if (col.scale == Scale::nominal) item["categories"] = col.labels;
    doc["covariates"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

}  // namespace balance_forge
