#include "leelab/leelab.h"

#include "leelab/acceptance.hpp"
#include "leelab/elliptic.hpp"
#include "leelab/error.hpp"
#include "leelab/fieldspec.hpp"
#include "leelab/io.hpp"
#include "leelab/report.hpp"
#include "leelab/variation.hpp"

#include <cstring>
#include <new>
#include <sstream>
#include <string>

using leelab::Error;
using leelab::ErrorCode;
using nlohmann::json;

struct leelab_model {
  leelab::invariant::InvariantModel model;
  json input;
};

struct leelab_field {
  leelab::torus::ScalarField field;
  json input;
};

namespace {

thread_local std::string last_error;
thread_local int last_status = LEELAB_OK;

int record(int status, const std::string& message) {
  last_status = status;
  last_error = message;
  return status;
}

int status_of(ErrorCode code) { return static_cast<int>(code) + 1; }

// Runs fn and converts exceptions into status codes.
template <class Fn>
int guard(Fn&& fn) {
  try {
    fn();
    last_status = LEELAB_OK;
    last_error.clear();
    return LEELAB_OK;
  } catch (const Error& e) {
    return record(status_of(e.code()), e.what());
  } catch (const json::exception& e) {
    return record(LEELAB_MALFORMED_FILE, e.what());
  } catch (const std::bad_alloc&) {
    return record(LEELAB_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(LEELAB_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) leelab::fail(ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

leelab::torus::Functional functional_of(const std::string& which) {
  using leelab::torus::Functional;
  if (which == "g" || which == "G") return Functional::G;
  if (which == "f" || which == "F") return Functional::F;
  if (which == "a" || which == "A") return Functional::A;
  if (which == "r" || which == "R") return Functional::R;
  leelab::fail(ErrorCode::invalid_argument, "--which must be one of g, f, a, r");
}

std::string csv_of(const leelab::torus::ScalarField& f) {
  std::ostringstream ss;
  leelab::torus::write_csv(ss, f);
  return ss.str();
}

}  // namespace

extern "C" {

const char* leelab_version(void) { return leelab::report::version(); }

const char* leelab_status_name(int status) {
  if (status == LEELAB_OK) return "ok";
  if (status >= 1 && status <= LEELAB_CONVENTION_MISMATCH) {
    return leelab::error_code_name(static_cast<ErrorCode>(status - 1));
  }
  return "internal";
}

int leelab_status_is_input_error(int status) {
  return status >= LEELAB_INVALID_ARGUMENT && status <= LEELAB_NOT_GAUDUCHON;
}

const char* leelab_last_error(void) { return last_error.c_str(); }

int leelab_last_error_json(char** out) {
  if (!out) return LEELAB_INVALID_ARGUMENT;
  const json doc = {{"schema_version", leelab::report::kSchemaVersion},
                    {"version", leelab::report::version()},
                    {"error", {{"code", leelab_status_name(last_status)}, {"message", last_error}}}};
  *out = copy_string(leelab::report::dump(doc));
  return LEELAB_OK;
}

void leelab_string_free(char* s) { delete[] s; }

int leelab_model_from_json(const char* text, leelab_model** out) {
  return guard([&] {
    require(text, "text");
    require(out, "out");
    const json doc = json::parse(text);
    *out = new leelab_model{leelab::io::load_algebra(doc), doc};
  });
}

int leelab_model_from_file(const char* path, leelab_model** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    json doc;
    try {
      doc = json::parse(leelab::io::read_file(path));
    } catch (const json::parse_error& e) {
      leelab::fail(ErrorCode::malformed_file, std::string("invalid JSON in ") + path + ": " + e.what());
    }
    *out = new leelab_model{leelab::io::load_algebra(doc), doc};
  });
}

int leelab_model_inoue(double r, double s, double u_re, double u_im, double c, leelab_model** out) {
  return guard([&] {
    require(out, "out");
    const json input = {{"model", "inoue_sm"}, {"r", r}, {"s", s}, {"u_re", u_re}, {"u_im", u_im}, {"c", c}};
    *out = new leelab_model{leelab::invariant::inoue_sm(r, s, {u_re, u_im}, c), input};
  });
}

int leelab_model_to_json(const leelab_model* model, char** out) {
  return guard([&] {
    require(model, "model");
    require(out, "out");
    *out = copy_string(leelab::report::dump(leelab::io::algebra_to_json(model->model)));
  });
}

int leelab_model_report(const leelab_model* model, double tolerance, char** out_json) {
  return guard([&] {
    require(model, "model");
    require(out_json, "out_json");
    *out_json = copy_string(leelab::report::dump(leelab::report::invariant_report(model->model, model->input, tolerance)));
  });
}

void leelab_model_free(leelab_model* model) { delete model; }

int leelab_field_parse(int n, int points, const char* spec, leelab_field** out) {
  return guard([&] {
    require(spec, "spec");
    require(out, "out");
    const leelab::torus::TorusGrid grid(n, points);
    *out = new leelab_field{leelab::fieldspec::load_scalar(spec, grid), {{"n", n}, {"grid", points}, {"spec", spec}}};
  });
}

int leelab_field_to_csv(const leelab_field* field, char** out) {
  return guard([&] {
    require(field, "field");
    require(out, "out");
    *out = copy_string(csv_of(field->field));
  });
}

int leelab_field_size(const leelab_field* field, size_t* out) {
  return guard([&] {
    require(field, "field");
    require(out, "out");
    *out = field->field.size();
  });
}

int leelab_field_values(const leelab_field* field, double* out, size_t count) {
  return guard([&] {
    require(field, "field");
    require(out, "out");
    if (count != field->field.size()) leelab::fail(ErrorCode::dimension_mismatch, "buffer size differs from field size");
    const auto v = field->field.values();
    std::copy(v.begin(), v.end(), out);
  });
}

void leelab_field_free(leelab_field* field) { delete field; }

int leelab_solve_gauduchon(const leelab_field* logfactor, char** out_json, leelab_field** out_factor) {
  return guard([&] {
    require(logfactor, "logfactor");
    require(out_json, "out_json");
    const leelab::torus::ConformalMetric m(logfactor->field, true);
    const leelab::elliptic::SolverOptions opts;
    const auto res = leelab::elliptic::gauduchon_factor(m, opts);
    json extra = json::object();
    const auto& grid = m.grid();
    const int fine = 2 * grid.points();
    std::size_t fine_size = 1;
    for (int a = 0; a < grid.axes(); ++a) fine_size *= fine;
    extra["continuum_residual"] =
        fine_size <= leelab::torus::kMaxPoints ? json(leelab::elliptic::refined_residual(m, res.factor, fine)) : json();
    extra["continuum_residual_points"] = fine_size <= leelab::torus::kMaxPoints ? json(fine) : json();
    const std::string doc = leelab::report::dump(leelab::report::gauduchon_report(res, logfactor->input, opts, extra));
    if (out_factor) *out_factor = new leelab_field{res.factor, {{"kind", "gauduchon_factor"}}};
    *out_json = copy_string(doc);
  });
}

int leelab_solve_distinguished(int n, int points, const char* drift, int synthetic, char** out_json,
                               leelab_field** out_phi) {
  return guard([&] {
    require(drift, "drift");
    require(out_json, "out_json");
    const leelab::torus::TorusGrid grid(n, points);
    const leelab::torus::ConformalMetric bg(leelab::torus::ScalarField(grid, 0.0), true);
    const auto theta0 = leelab::fieldspec::load_one_form(drift, grid);
    const auto res = leelab::elliptic::distinguished_factor(bg, theta0, std::nullopt, synthetic != 0);
    const json input = {{"n", n}, {"grid", points}, {"drift", drift}, {"synthetic", synthetic != 0}};
    const std::string doc = leelab::report::dump(leelab::report::distinguished_report(res, input));
    if (out_phi) *out_phi = new leelab_field{res.phi, {{"kind", "distinguished_phi"}}};
    *out_json = copy_string(doc);
  });
}

int leelab_check_el(const char* which, const leelab_field* base, int directions, uint64_t seed, char** out_json) {
  return guard([&] {
    require(which, "which");
    require(base, "base");
    require(out_json, "out_json");
    if (directions < 1) leelab::fail(ErrorCode::invalid_argument, "--directions must be positive");
    const auto functional = functional_of(which);
    const leelab::torus::ConformalMetric m(base->field, true);
    std::vector<leelab::variation::VariationReport> reports(directions);
    leelab::variation::parallel_for(directions, [&](int k) {
      reports[k] = leelab::variation::check_variation(
          functional, m, leelab::variation::random_direction(m, seed + static_cast<uint64_t>(k)));
    });
    json input = base->input;
    input["which"] = which;
    input["directions"] = directions;
    input["seed"] = seed;
    *out_json = copy_string(leelab::report::dump(leelab::report::variation_report(reports, input, 1e-3)));
  });
}

int leelab_sweep_inoue(const double* s_values, size_t count, double u_re, double u_im, double c, char** out_json,
                       char** out_csv) {
  return guard([&] {
    require(s_values, "s_values");
    require(out_json, "out_json");
    const std::vector<double> s(s_values, s_values + count);
    const auto sweep = leelab::variation::sweep_inoue(s, {u_re, u_im}, c);
    const json input = {{"family", "inoue_sm"}, {"s", s}, {"u_re", u_re}, {"u_im", u_im}, {"c", c}};
    const std::string doc = leelab::report::dump(leelab::report::sweep_report(sweep, input));
    if (out_csv) *out_csv = copy_string(leelab::report::sweep_csv(sweep));
    *out_json = copy_string(doc);
  });
}

int leelab_verify(int determinism, char** out_json, int* passed) {
  return guard([&] {
    require(out_json, "out_json");
    const auto suite = leelab::acceptance::run_suite(determinism != 0);
    json doc = leelab::report::envelope("verify", {{"determinism", determinism != 0}});
    const json results = suite.to_json();
    doc["criteria"] = results.at("criteria");
    doc["passed"] = results.at("passed");
    if (passed) *passed = suite.passed() ? 1 : 0;
    *out_json = copy_string(leelab::report::dump(doc));
  });
}

}  // extern "C"
