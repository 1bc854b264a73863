#pragma once

// Algebra files and atomic output.
//
// An algebra file is a JSON object
//   { "n": 2,
//     "structure": [ {"target": 1, "i": 1, "j": 2, "re": 0.0, "im": -0.5}, ... ],
//     "metric": {"h": [[a11, a12], [a21, a22]]}
//          or   {"family": "inoue_sm", "r": 1, "s": 1, "u_re": 0, "u_im": 0},
//     "volume_constant": 1 }
// where a row means d(e_target) += (re + i im) e_i ^ e_j with i < j, and
// generators 1..n are phi^1..phi^n, n+1..2n their conjugates. Entries of h are
// numbers or [re, im] pairs. Rows for barred targets may be omitted, in which
// case they are filled by conjugation. With the inoue_sm family, "n" and
// "structure" may be omitted.

#include "leelab/invariant.hpp"

#include <json.hpp>

#include <string>

namespace leelab::io {

using nlohmann::json;

/// Throws malformed_file on schema errors; algebra and metric validation
/// errors keep their own codes.
invariant::InvariantModel load_algebra(const json& doc);
invariant::InvariantModel load_algebra_file(const std::string& path);

/// Unbarred structure rows and the explicit metric matrix.
json algebra_to_json(const invariant::InvariantModel& model);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace leelab::io
