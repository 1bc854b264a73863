#include <doctest.h>

#include "leelab/leelab.h"

#include <json.hpp>

#include <string>
#include <vector>

using nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  leelab_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("model handles") {
  leelab_model* m = nullptr;
  REQUIRE(leelab_model_inoue(1.0, 1.0, 0.0, 0.0, 1.0, &m) == LEELAB_OK);
  char* out = nullptr;
  REQUIRE(leelab_model_report(m, 1e-9, &out) == LEELAB_OK);
  const json rep = json::parse(take(out));
  CHECK(rep["densities"]["F"].get<double>() == doctest::Approx(4.0));
  CHECK(rep["densities"]["A"].get<double>() == doctest::Approx(2.0));
  CHECK(rep["classification"]["skt"]["holds"] == true);

  REQUIRE(leelab_model_to_json(m, &out) == LEELAB_OK);
  const std::string saved = take(out);
  leelab_model_free(m);
  leelab_model* back = nullptr;
  REQUIRE(leelab_model_from_json(saved.c_str(), &back) == LEELAB_OK);
  REQUIRE(leelab_model_report(back, 1e-9, &out) == LEELAB_OK);
  CHECK(json::parse(take(out))["densities"]["F"].get<double>() == doctest::Approx(4.0).epsilon(1e-12));
  leelab_model_free(back);
}

TEST_CASE("errors carry codes and messages") {
  leelab_model* m = nullptr;
  const std::string path = std::string(LEELAB_DATA_DIR) + "/bad_jacobi.json";
  const int status = leelab_model_from_file(path.c_str(), &m);
  CHECK(status == LEELAB_JACOBI_VIOLATION);
  CHECK(m == nullptr);
  CHECK(std::string(leelab_status_name(status)) == "jacobi_violation");
  CHECK(leelab_status_is_input_error(status));
  CHECK_FALSE(leelab_status_is_input_error(LEELAB_NON_SOLVABLE));
  char* out = nullptr;
  REQUIRE(leelab_last_error_json(&out) == LEELAB_OK);
  const json err = json::parse(take(out));
  CHECK(err["error"]["code"] == "jacobi_violation");
  CHECK_FALSE(err["error"]["message"].get<std::string>().empty());

  CHECK(leelab_model_from_json("{not json", &m) == LEELAB_MALFORMED_FILE);
  CHECK(leelab_model_inoue(1.0, 1.0, 2.0, 0.0, 1.0, &m) == LEELAB_NON_POSITIVE_METRIC);
  CHECK(leelab_model_report(nullptr, 1e-9, &out) == LEELAB_INVALID_ARGUMENT);
  CHECK(leelab_field_parse(2, 7, "0", nullptr) == LEELAB_INVALID_ARGUMENT);
}

TEST_CASE("field handles and solvers") {
  leelab_field* f = nullptr;
  REQUIRE(leelab_field_parse(2, 8, "0.3*cos(x1)", &f) == LEELAB_OK);
  size_t size = 0;
  REQUIRE(leelab_field_size(f, &size) == LEELAB_OK);
  CHECK(size == 4096);
  std::vector<double> values(size);
  REQUIRE(leelab_field_values(f, values.data(), values.size()) == LEELAB_OK);
  CHECK(values[0] == doctest::Approx(0.3));
  CHECK(leelab_field_values(f, values.data(), 3) == LEELAB_DIMENSION_MISMATCH);

  char* out = nullptr;
  leelab_field* factor = nullptr;
  REQUIRE(leelab_solve_gauduchon(f, &out, &factor) == LEELAB_OK);
  const json rep = json::parse(take(out));
  CHECK(rep["positive"] == true);
  CHECK(rep["spectrum"]["gap"].get<double>() > 0.5);
  CHECK(rep["input"]["spec"] == "0.3*cos(x1)");
  REQUIRE(leelab_field_to_csv(factor, &out) == LEELAB_OK);
  CHECK(take(out).rfind("ix1,ix2,iy1,iy2,value\n", 0) == 0);
  leelab_field_free(factor);

  REQUIRE(leelab_check_el("a", f, 2, 5, &out) == LEELAB_OK);
  CHECK(json::parse(take(out))["passed"] == true);
  CHECK(leelab_check_el("v", f, 2, 5, &out) == LEELAB_INVALID_ARGUMENT);
  leelab_field_free(f);

  leelab_field* phi = nullptr;
  REQUIRE(leelab_solve_distinguished(2, 8, "0.5*dx1", 0, &out, &phi) == LEELAB_OK);
  CHECK(json::parse(take(out))["k0"].get<double>() > 0.0);
  leelab_field_free(phi);
  CHECK(leelab_solve_distinguished(2, 8, "(1 + 0.2*cos(x1))*dx1", 0, &out, nullptr) == LEELAB_NOT_GAUDUCHON);
}

TEST_CASE("sweep through the C interface") {
  const double s[] = {1, 2, 4, 8};
  char* out = nullptr;
  char* csv = nullptr;
  REQUIRE(leelab_sweep_inoue(s, 4, 0.0, 0.0, 1.0, &out, &csv) == LEELAB_OK);
  const json rep = json::parse(take(out));
  CHECK(rep["rows"][3]["values"]["F"].get<double>() == doctest::Approx(4.0 / 4096).epsilon(1e-12));
  CHECK(take(csv).find("r,s,u_re,u_im,c,G,F,A,R,V") == 0);
  CHECK(leelab_sweep_inoue(s, 0, 0.0, 0.0, 1.0, &out, nullptr) == LEELAB_INVALID_ARGUMENT);
}
