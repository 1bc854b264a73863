#pragma once

// JSON reports. Every report carries schema_version, version and kind; keys are
// emitted in sorted order and doubles in shortest round-trip form, so equal
// inputs give byte-identical output.

#include "leelab/elliptic.hpp"
#include "leelab/error.hpp"
#include "leelab/invariant.hpp"
#include "leelab/variation.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace leelab::report {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
const char* version();

json envelope(const std::string& kind, const json& input);

/// Nonzero coefficients as {"generators": [1-based indices], "re", "im"}.
json form_json(const exterior::Form& a);

json invariant_report(const invariant::InvariantModel& model, const json& input,
                      double tol = invariant::kDefaultTolerance);

json gauduchon_report(const elliptic::GauduchonResult& result, const json& input,
                      const elliptic::SolverOptions& opts, const json& extra = json::object());

json distinguished_report(const elliptic::DistinguishedResult& result, const json& input);

json variation_report(const std::vector<variation::VariationReport>& reports, const json& input,
                      double tolerance);

json sweep_report(const variation::Sweep& sweep, const json& input);
std::string sweep_csv(const variation::Sweep& sweep);

json error_json(ErrorCode code, const std::string& message);

/// Two-space indented dump with a trailing newline.
std::string dump(const json& doc);

}  // namespace leelab::report
