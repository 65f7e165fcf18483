#pragma once

// The acceptance suite: ten criteria, each a pass/fail with measured values.

#include <filesystem>
#include <string>
#include <vector>

#include "evoq/config.hpp"

namespace evoq {

struct Measurement {
  std::string label;  // instance or quantity
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
  bool upper = true;  // value must stay below limit
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<Measurement> measurements;
  std::string note;
  double seconds = 0.0;
};

// The heat, wave and maxwell configs shipped in configs/.
std::vector<InstanceConfig> bundled_instances(const std::filesystem::path& config_dir);

CriterionResult run_criterion(int id, const std::vector<InstanceConfig>& instances);
std::vector<CriterionResult> run_acceptance(const std::vector<InstanceConfig>& instances);

// One line per criterion.
std::string format_line(const CriterionResult& r);

// Rows of the three-way control verdict table.
struct DualityRow {
  std::string name;
  DualityVerdict verdict;
};
std::vector<DualityRow> duality_table();

}  // namespace evoq
