// leelab command line: invariant reports, grid solvers, variation checks,
// sweeps and the acceptance suite. Exit codes: 0 ok, 2 input error,
// 3 solver error, 4 acceptance failure.

#include "leelab/leelab.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitAcceptance = 4;

// Owns a string returned by the C API.
struct CString {
  char* p = nullptr;
  ~CString() { leelab_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

int report_failure(int status) {
  CString err;
  leelab_last_error_json(&err.p);
  std::fputs(err.p, stdout);
  std::fprintf(stderr, "leelab: %s: %s\n", leelab_status_name(status), leelab_last_error());
  return leelab_status_is_input_error(status) ? kExitInput : kExitSolver;
}

// Temporary sibling plus rename, so readers never see a partial file.
bool write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << content;
    if (!out.flush()) return false;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) std::filesystem::remove(tmp, ec);
  return !ec;
}

int emit(const std::string& content, const std::string& path) {
  if (path.empty() || path == "-") {
    std::fputs(content.c_str(), stdout);
    return 0;
  }
  if (!write_atomic(path, content)) {
    std::fprintf(stderr, "leelab: cannot write %s\n", path.c_str());
    return kExitInput;
  }
  return 0;
}

bool parse_complex(const std::string& text, double& re, double& im) {
  std::istringstream ss(text);
  char comma = 0;
  re = im = 0.0;
  if (!(ss >> re)) return false;
  if (ss >> comma) {
    if (comma != ',' || !(ss >> im)) return false;
  }
  return ss.eof() || (ss >> std::ws).eof();
}

struct Common {
  std::string out;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lee-form functionals, conformal solvers and checks for Hermitian metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(leelab_version()));

  // report-invariant
  auto* rep = app.add_subcommand("report-invariant", "Classification, densities and EL residuals of an invariant model");
  std::string algebra, model, u_text = "0,0", save_algebra, rep_out;
  double r = 1.0, s = 1.0, c = 1.0, tolerance = 1e-9;
  auto* opt_alg = rep->add_option("--algebra", algebra, "Algebra JSON file")->check(CLI::ExistingFile);
  auto* opt_model = rep->add_option("--model", model, "Built-in family")->check(CLI::IsMember({"inoue_sm"}));
  opt_alg->excludes(opt_model);
  rep->add_option("--r", r, "Inoue metric parameter r");
  rep->add_option("--s", s, "Inoue metric parameter s");
  rep->add_option("--u", u_text, "Inoue metric parameter u as RE,IM");
  rep->add_option("--c", c, "Volume constant");
  rep->add_option("--tolerance", tolerance, "Classification tolerance");
  rep->add_option("--save-algebra", save_algebra, "Also write the model as an algebra file");
  rep->add_option("-o,--out", rep_out, "Report path (default stdout)");

  // solve-gauduchon
  auto* gau = app.add_subcommand("solve-gauduchon", "Gauduchon factor of a conformal class on the flat torus");
  int n = 2, grid = 16;
  std::string logfactor, gau_out, factor_csv;
  gau->add_option("--n", n, "Complex dimension")->check(CLI::Range(2, 5));
  gau->add_option("--grid", grid, "Points per axis")->check(CLI::Range(8, 1 << 12));
  gau->add_option("--logfactor", logfactor, "FIELDSPEC expression or CSV path")->required();
  gau->add_option("-o,--out", gau_out, "Report path (default stdout)");
  gau->add_option("--factor-csv", factor_csv, "Write the factor field as CSV");

  // solve-distinguished
  auto* dis = app.add_subcommand("solve-distinguished", "Distinguished metric for a drift over the flat torus");
  std::string drift, dis_out, phi_csv;
  bool synthetic = false;
  dis->add_option("--n", n, "Complex dimension")->check(CLI::Range(2, 5));
  dis->add_option("--grid", grid, "Points per axis")->check(CLI::Range(8, 1 << 12));
  dis->add_option("--drift", drift, "Drift 1-form expression, e.g. 0.5*dx1")->required();
  dis->add_flag("--synthetic", synthetic, "Accept a drift that is not co-closed");
  dis->add_option("-o,--out", dis_out, "Report path (default stdout)");
  dis->add_option("--phi-csv", phi_csv, "Write phi as CSV");

  // check-el
  auto* el = app.add_subcommand("check-el", "Finite differences against Euler-Lagrange pairings");
  std::string which, base, el_out;
  int directions = 5;
  std::uint64_t seed = 1;
  el->add_option("--which", which, "Functional")->required()->check(CLI::IsMember({"g", "f", "a", "r"}));
  el->add_option("--n", n, "Complex dimension")->check(CLI::Range(2, 5));
  el->add_option("--grid", grid, "Points per axis")->check(CLI::Range(8, 1 << 12));
  el->add_option("--base", base, "Log conformal factor of the base point (FIELDSPEC)")->required();
  el->add_option("--directions", directions, "Number of random directions")->check(CLI::PositiveNumber);
  el->add_option("--seed", seed, "Seed of the first direction");
  el->add_option("-o,--out", el_out, "Report path (default stdout)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Functional table along the normalized Inoue family");
  std::string family = "inoue_sm", s_range, sw_out, sw_csv, sw_u = "0,0";
  std::vector<double> s_list;
  double sw_c = 1.0;
  sw->add_option("--family", family, "Family")->check(CLI::IsMember({"inoue_sm"}));
  auto* opt_s = sw->add_option("--s", s_list, "Comma-separated s values")->delimiter(',');
  auto* opt_range = sw->add_option("--s-range", s_range, "LO:HI:COUNT, geometric spacing");
  opt_s->excludes(opt_range);
  sw->add_option("--u", sw_u, "u as RE,IM");
  sw->add_option("--c", sw_c, "Volume constant");
  sw->add_option("-o,--out", sw_out, "Report path (default stdout)");
  sw->add_option("--csv", sw_csv, "Write the table as CSV");

  // verify
  auto* ver = app.add_subcommand("verify", "Run the acceptance suite");
  std::string ver_out;
  bool quick = false;
  ver->add_flag("--no-determinism", quick, "Skip the repeated run of criterion 9");
  ver->add_option("-o,--out", ver_out, "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (*rep) {
    if (algebra.empty() && model.empty()) {
      std::fprintf(stderr, "leelab: report-invariant needs --algebra or --model\n");
      return kExitInput;
    }
    leelab_model* m = nullptr;
    int status;
    if (!algebra.empty()) {
      status = leelab_model_from_file(algebra.c_str(), &m);
    } else {
      double ure = 0.0, uim = 0.0;
      if (!parse_complex(u_text, ure, uim)) {
        std::fprintf(stderr, "leelab: --u expects RE or RE,IM\n");
        return kExitInput;
      }
      status = leelab_model_inoue(r, s, ure, uim, c, &m);
    }
    if (status != LEELAB_OK) return report_failure(status);
    CString doc, saved;
    status = leelab_model_report(m, tolerance, &doc.p);
    if (status == LEELAB_OK && !save_algebra.empty()) status = leelab_model_to_json(m, &saved.p);
    leelab_model_free(m);
    if (status != LEELAB_OK) return report_failure(status);
    if (!save_algebra.empty()) {
      if (const int rc = emit(saved.str(), save_algebra)) return rc;
    }
    return emit(doc.str(), rep_out);
  }

  if (*gau) {
    leelab_field* f = nullptr;
    int status = leelab_field_parse(n, grid, logfactor.c_str(), &f);
    if (status != LEELAB_OK) return report_failure(status);
    CString doc;
    leelab_field* factor = nullptr;
    status = leelab_solve_gauduchon(f, &doc.p, &factor);
    leelab_field_free(f);
    if (status != LEELAB_OK) return report_failure(status);
    if (!factor_csv.empty()) {
      CString csv;
      leelab_field_to_csv(factor, &csv.p);
      if (const int rc = emit(csv.str(), factor_csv)) {
        leelab_field_free(factor);
        return rc;
      }
    }
    leelab_field_free(factor);
    return emit(doc.str(), gau_out);
  }

  if (*dis) {
    CString doc;
    leelab_field* phi = nullptr;
    const int status = leelab_solve_distinguished(n, grid, drift.c_str(), synthetic ? 1 : 0, &doc.p, &phi);
    if (status != LEELAB_OK) return report_failure(status);
    if (!phi_csv.empty()) {
      CString csv;
      leelab_field_to_csv(phi, &csv.p);
      if (const int rc = emit(csv.str(), phi_csv)) {
        leelab_field_free(phi);
        return rc;
      }
    }
    leelab_field_free(phi);
    return emit(doc.str(), dis_out);
  }

  if (*el) {
    leelab_field* f = nullptr;
    int status = leelab_field_parse(n, grid, base.c_str(), &f);
    if (status != LEELAB_OK) return report_failure(status);
    CString doc;
    status = leelab_check_el(which.c_str(), f, directions, seed, &doc.p);
    leelab_field_free(f);
    if (status != LEELAB_OK) return report_failure(status);
    if (const int rc = emit(doc.str(), el_out)) return rc;
    return doc.str().find("\"passed\": true") != std::string::npos ? 0 : kExitAcceptance;
  }

  if (*sw) {
    double ure = 0.0, uim = 0.0;
    if (!parse_complex(sw_u, ure, uim)) {
      std::fprintf(stderr, "leelab: --u expects RE or RE,IM\n");
      return kExitInput;
    }
    if (!s_range.empty()) {
      double lo = 0.0, hi = 0.0;
      int count = 0;
      char c1 = 0, c2 = 0;
      std::istringstream ss(s_range);
      if (!(ss >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1 || !(lo > 0.0) ||
          !(hi >= lo)) {
        std::fprintf(stderr, "leelab: --s-range expects LO:HI:COUNT with 0 < LO <= HI\n");
        return kExitInput;
      }
      for (int i = 0; i < count; ++i) {
        s_list.push_back(count == 1 ? lo : lo * std::pow(hi / lo, double(i) / (count - 1)));
      }
    }
    if (s_list.empty()) s_list = {1, 2, 4, 8};
    CString doc, csv;
    const int status = leelab_sweep_inoue(s_list.data(), s_list.size(), ure, uim, sw_c, &doc.p, &csv.p);
    if (status != LEELAB_OK) return report_failure(status);
    if (!sw_csv.empty()) {
      if (const int rc = emit(csv.str(), sw_csv)) return rc;
    }
    return emit(doc.str(), sw_out);
  }

  if (*ver) {
    CString doc;
    int passed = 0;
    const int status = leelab_verify(quick ? 0 : 1, &doc.p, &passed);
    if (status != LEELAB_OK) return report_failure(status);
    if (const int rc = emit(doc.str(), ver_out)) return rc;
    return passed ? 0 : kExitAcceptance;
  }
  return kExitInput;
}
