#include "leelab/io.hpp"

#include "leelab/error.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace leelab::io {

using exterior::Complex;
using exterior::Form;
using exterior::Mask;

namespace {

[[noreturn]] void malformed(const std::string& what) { fail(ErrorCode::malformed_file, "algebra file: " + what); }

double number(const json& obj, const char* key, double fallback, bool required) {
  if (!obj.contains(key)) {
    if (required) malformed(std::string("missing \"") + key + "\"");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) malformed(std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number_integer()) {
    malformed(std::string("\"") + key + "\" must be an integer");
  }
  return obj.at(key).get<int>();
}

Complex complex_entry(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  malformed("metric entries must be numbers or [re, im] pairs");
}

invariant::CoframeAlgebra parse_structure(const json& doc, int n) {
  if (!doc.contains("structure")) malformed("missing \"structure\"");
  const json& rows = doc.at("structure");
  if (!rows.is_array()) malformed("\"structure\" must be a list");
  std::vector<Form> d(2 * n, Form(n, 2));
  bool barred_rows = false;
  for (const json& row : rows) {
    if (!row.is_object()) malformed("structure rows must be objects");
    const int target = integer(row, "target");
    const int i = integer(row, "i");
    const int j = integer(row, "j");
    if (target < 1 || target > 2 * n || i < 1 || j > 2 * n || !(i < j)) {
      malformed("structure row indices must satisfy 1 <= target <= 2n and 1 <= i < j <= 2n");
    }
    const Complex c(number(row, "re", 0.0, false), number(row, "im", 0.0, false));
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) malformed("non-finite structure constant");
    barred_rows = barred_rows || target > n;
    d[target - 1].add((Mask{1} << (i - 1)) | (Mask{1} << (j - 1)), c);
  }
  if (!barred_rows) {
    d.resize(n);
    return invariant::CoframeAlgebra::from_unbarred(n, std::move(d));
  }
  return invariant::CoframeAlgebra(n, std::move(d));
}

}  // namespace

invariant::InvariantModel load_algebra(const json& doc) {
  if (!doc.is_object()) malformed("top level must be an object");
  const double c = number(doc, "volume_constant", 1.0, false);
  if (!doc.contains("metric") || !doc.at("metric").is_object()) malformed("missing \"metric\" object");
  const json& metric = doc.at("metric");

  if (metric.contains("family")) {
    if (!metric.at("family").is_string() || metric.at("family").get<std::string>() != "inoue_sm") {
      malformed("unknown metric family (supported: inoue_sm)");
    }
    const double r = number(metric, "r", 0.0, true);
    const double s = number(metric, "s", 0.0, true);
    const Complex u(number(metric, "u_re", 0.0, false), number(metric, "u_im", 0.0, false));
    if (doc.contains("n") && integer(doc, "n") != 2) malformed("the inoue_sm family has n = 2");
    if (!doc.contains("structure")) return invariant::inoue_sm(r, s, u, c);
    if (!(r * r * s * s - std::norm(u) > 0.0)) {
      fail(ErrorCode::non_positive_metric, "Inoue metric needs r^2 s^2 - |u|^2 > 0");
    }
    return invariant::InvariantModel(parse_structure(doc, 2),
                                     exterior::InvariantMetric(invariant::inoue_metric_matrix(r, s, u), c));
  }

  const int n = integer(doc, "n");
  if (n < 1 || n > exterior::kMaxN) malformed("n must be in 1.." + std::to_string(exterior::kMaxN));
  if (!metric.contains("h") || !metric.at("h").is_array() || metric.at("h").size() != std::size_t(n)) {
    malformed("metric \"h\" must be an n x n matrix");
  }
  Eigen::MatrixXcd h(n, n);
  for (int a = 0; a < n; ++a) {
    const json& row = metric.at("h")[a];
    if (!row.is_array() || row.size() != std::size_t(n)) malformed("metric \"h\" must be an n x n matrix");
    for (int b = 0; b < n; ++b) h(a, b) = complex_entry(row[b]);
  }
  return invariant::InvariantModel(parse_structure(doc, n), exterior::InvariantMetric(h, c));
}

invariant::InvariantModel load_algebra_file(const std::string& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(std::string("invalid JSON (") + e.what() + ")");
  }
  return load_algebra(doc);
}

json algebra_to_json(const invariant::InvariantModel& model) {
  const int n = model.n();
  const auto& basis = exterior::Basis::get(n);
  json rows = json::array();
  for (int g = 0; g < n; ++g) {
    const Form& dg = model.algebra().d_generator(g);
    for (Mask m : basis.masks(2)) {
      const Complex c = dg.coefficient(m);
      if (c == Complex(0.0)) continue;
      int i = -1, j = -1;
      for (int b = 0; b < 2 * n; ++b) {
        if (m & (Mask{1} << b)) (i < 0 ? i : j) = b + 1;
      }
      rows.push_back({{"target", g + 1}, {"i", i}, {"j", j}, {"re", c.real()}, {"im", c.imag()}});
    }
  }
  json h = json::array();
  for (int a = 0; a < n; ++a) {
    json row = json::array();
    for (int b = 0; b < n; ++b) {
      const Complex v = model.metric().h()(a, b);
      row.push_back({v.real() + 0.0, v.imag() + 0.0});
    }
    h.push_back(row);
  }
  return {{"n", n},
          {"structure", rows},
          {"metric", {{"h", h}}},
          {"volume_constant", model.metric().volume_constant()}};
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::malformed_file, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::malformed_file, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::malformed_file, "cannot move output into place at " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::malformed_file, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace leelab::io
