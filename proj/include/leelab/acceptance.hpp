#pragma once

// The acceptance suite: one deterministic result per criterion. Wall-clock
// timings are kept apart from the JSON so repeated runs compare equal.

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace leelab::acceptance {

using nlohmann::json;

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  json details = json::object();
  double seconds = 0.0;  // not part of to_json
};

struct SuiteResult {
  std::vector<CriterionResult> criteria;
  double seconds = 0.0;
  bool passed() const;
  json to_json() const;
};

/// Runs criteria 1..8, then criterion 9 (a second run compared against the
/// first plus the time budget) when `determinism` is set. `progress` is called
/// after each criterion.
SuiteResult run_suite(bool determinism = true,
                      const std::function<void(const CriterionResult&)>& progress = nullptr);

/// Criteria by id (1..8).
CriterionResult run_criterion(int id);

}  // namespace leelab::acceptance
