#include <doctest.h>

#include "leelab/error.hpp"
#include "leelab/fieldspec.hpp"
#include "leelab/io.hpp"
#include "leelab/report.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using leelab::Error;
using leelab::ErrorCode;
using leelab::io::json;
namespace fs = leelab::fieldspec;
namespace torus = leelab::torus;

namespace {

std::string data(const char* name) { return std::string(LEELAB_DATA_DIR) + "/" + name; }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("field expressions") {
  const torus::TorusGrid g(2, 8);
  const auto f = fs::load_scalar("0.3*cos(x1) - 2*sin(y2)^2 + exp(-x2/pi)", g);
  const auto expected = torus::ScalarField::sample(g, [](std::span<const double> x) {
    return 0.3 * std::cos(x[0]) - 2 * std::pow(std::sin(x[3]), 2) + std::exp(-x[1] / M_PI);
  });
  CHECK((f - expected).max_abs() < 1e-15);
  CHECK(fs::load_scalar("-(-1)", g).min() == 1.0);
  CHECK(fs::Expression::parse("2*dx1 + cos(x2)*dy1", 2).degree() == 1);

  const auto drift = fs::load_one_form("0.5*dx1 - dy2*sin(x1) + dx1/2", g);
  CHECK((drift.coefficient(0b0001) - torus::ScalarField(g, 1.0)).max_abs() < 1e-15);
  const auto sx = torus::ScalarField::sample(g, [](std::span<const double> x) { return -std::sin(x[0]); });
  CHECK((drift.coefficient(0b1000) - sx).max_abs() < 1e-15);
  CHECK(fs::load_one_form("0", g).max_abs() == 0.0);

  for (const char* bad : {"dx1*dx2", "cos(dx1)", "1 + dx1", "x3", "x0", "foo(x1)", "1/dx1", "(x1", "2 3", ""}) {
    CAPTURE(bad);
    CHECK_THROWS_AS((void)fs::Expression::parse(bad, 2), Error);
  }
  CHECK_THROWS_AS((void)fs::load_one_form("cos(x1)", g), Error);
  CHECK_THROWS_AS((void)fs::load_scalar("dx1", g), Error);
  CHECK_THROWS_AS((void)fs::load_scalar("log(x1 - 10)", g), Error);
}

TEST_CASE("field CSV specs") {
  const torus::TorusGrid g(2, 8);
  const auto f = fs::load_scalar("sin(x1 + 2*y1)", g);
  const std::string path = (std::filesystem::temp_directory_path() / "leelab_field_spec.csv").string();
  std::ostringstream ss;
  torus::write_csv(ss, f);
  leelab::io::write_atomic(path, ss.str());
  CHECK((fs::load_scalar(path, g) - f).max_abs() == 0.0);
  std::filesystem::remove(path);
  CHECK(code_of([&] { (void)fs::load_scalar("missing_field.csv", g); }) == ErrorCode::malformed_file);
}

TEST_CASE("algebra fixtures") {
  const auto inoue = leelab::io::load_algebra_file(data("inoue_sm.json"));
  const auto built = leelab::invariant::inoue_sm(1.0, 1.0, 0.0);
  for (int g = 0; g < 4; ++g) {
    CHECK((inoue.algebra().d_generator(g) - built.algebra().d_generator(g)).max_abs() < 1e-15);
  }
  const auto iwasawa = leelab::io::load_algebra_file(data("iwasawa.json"));
  CHECK(iwasawa.n() == 3);
  CHECK_FALSE(leelab::invariant::classify(iwasawa).skt.holds);
  CHECK(code_of([] { (void)leelab::io::load_algebra_file(data("bad_jacobi.json")); }) == ErrorCode::jacobi_violation);
  CHECK(leelab::invariant::classify(leelab::io::load_algebra_file(data("flat_torus.json"))).kaehler.holds);
}

TEST_CASE("algebra schema errors") {
  auto load = [](const char* text) { (void)leelab::io::load_algebra(json::parse(text)); };
  CHECK(code_of([&] { load(R"({"n": 2})"); }) == ErrorCode::malformed_file);
  CHECK(code_of([&] { load(R"({"n": 2, "structure": [], "metric": {"h": [[1, 0]]}})"); }) == ErrorCode::malformed_file);
  CHECK(code_of([&] { load(R"({"n": 2, "structure": [{"target": 1, "i": 2, "j": 1}], "metric": {"h": [[1,0],[0,1]]}})"); }) ==
        ErrorCode::malformed_file);
  CHECK(code_of([&] { load(R"({"metric": {"family": "hopf"}})"); }) == ErrorCode::malformed_file);
  CHECK(code_of([&] { load(R"({"metric": {"family": "inoue_sm", "r": 1, "s": 1, "u_re": 2}})"); }) ==
        ErrorCode::non_positive_metric);
  CHECK(code_of([&] { load(R"({"n": 2, "structure": [], "metric": {"h": [[1,0],[0,-1]]}})"); }) ==
        ErrorCode::non_positive_metric);
  // d phi^1 = phi^1 ^ phi^2 without the conjugate row for phi^1bar but with one for phi^2bar.
  CHECK(code_of([&] {
          load(R"({"n": 2, "structure": [{"target": 1, "i": 1, "j": 2, "re": 1},
                                          {"target": 4, "i": 1, "j": 3, "re": 1}],
                   "metric": {"h": [[1,0],[0,1]]}})");
        }) == ErrorCode::invalid_argument);
  CHECK_THROWS_AS((void)leelab::io::load_algebra_file(data("no_such_file.json")), Error);
}

TEST_CASE("explicit barred rows agree with auto-conjugation") {
  const auto a = leelab::io::load_algebra(json::parse(R"({"n": 2, "structure": [
      {"target": 2, "i": 1, "j": 3, "re": 0, "im": 1}], "metric": {"h": [[1,0],[0,1]]}})"));
  const auto b = leelab::io::load_algebra(json::parse(R"({"n": 2, "structure": [
      {"target": 2, "i": 1, "j": 3, "re": 0, "im": 1},
      {"target": 4, "i": 1, "j": 3, "re": 0, "im": 1}], "metric": {"h": [[1,0],[0,1]]}})"));
  // conj(i phi1 ^ phi1b) = -i phi1b ^ phi1 = i phi1 ^ phi1b.
  CHECK((a.algebra().d_generator(3) - b.algebra().d_generator(3)).max_abs() == 0.0);
}

TEST_CASE("algebra files round trip") {
  const auto model = leelab::invariant::inoue_sm(1.3, 0.7, {0.2, -0.1}, 2.0);
  const json doc = leelab::io::algebra_to_json(model);
  const auto back = leelab::io::load_algebra(json::parse(doc.dump()));
  const auto r1 = leelab::report::invariant_report(model, json::object());
  const auto r2 = leelab::report::invariant_report(back, json::object());
  for (const char* key : {"densities", "values"}) {
    for (const auto& [k, v] : r1[key].items()) {
      CHECK(std::abs(v.get<double>() - r2[key][k].get<double>()) <= 1e-12);
    }
  }
  CHECK(r1["flags"] == r2["flags"]);
  CHECK(std::abs(r1["lee_norm_sq"].get<double>() - r2["lee_norm_sq"].get<double>()) <= 1e-12);
}

TEST_CASE("reports are deterministic and versioned") {
  const auto model = leelab::invariant::inoue_sm(1.0, 2.0, 0.0);
  const std::string a = leelab::report::dump(leelab::report::invariant_report(model, {{"x", 1}}));
  const std::string b = leelab::report::dump(leelab::report::invariant_report(model, {{"x", 1}}));
  CHECK(a == b);
  const json doc = json::parse(a);
  CHECK(doc["schema_version"] == leelab::report::kSchemaVersion);
  CHECK(doc["kind"] == "invariant");
  CHECK(doc["input"]["x"] == 1);
  CHECK_FALSE(doc.contains("timestamp"));
  const json err = leelab::report::error_json(ErrorCode::jacobi_violation, "m");
  CHECK(err["error"]["code"] == "jacobi_violation");
}
