#include "leelab/report.hpp"

#include <cstdio>

namespace leelab::report {

using exterior::Complex;
using exterior::Mask;

namespace {

json flag_json(const invariant::Flag& f) { return {{"holds", f.holds}, {"residual", f.residual}}; }

json classification_json(const invariant::ClassificationReport& rep) {
  return {{"kaehler", flag_json(rep.kaehler)},
          {"balanced", flag_json(rep.balanced)},
          {"lck", flag_json(rep.lck)},
          {"locally_conformally_balanced", flag_json(rep.locally_conformally_balanced)},
          {"skt", flag_json(rep.skt)},
          {"gauduchon", flag_json(rep.gauduchon)},
          {"distinguished", flag_json(rep.distinguished)}};
}

// Names of the holding flags, in key order.
json holding_flags(const json& classification) {
  json holding = json::array();
  for (const auto& [name, f] : classification.items()) {
    if (f["holds"].get<bool>()) holding.push_back(name);
  }
  return holding;
}

json densities_json(const invariant::Densities& d) {
  return {{"G", d.g}, {"F", d.f}, {"A", d.a}, {"R", d.r}, {"V", d.v}};
}

json stats_json(const elliptic::SolveStats& s) {
  return {{"iterations", s.iterations}, {"residual", s.residual}, {"history", s.history}};
}

json spectrum_json(const elliptic::KernelSpectrum& s) {
  return {{"lambda1", s.lambda1},       {"lambda2", s.lambda2},     {"lambda2_imag", s.lambda2_imag},
          {"gap", s.gap},               {"iterations", s.iterations}, {"residual", s.residual}};
}

json field_summary(const torus::ScalarField& f) {
  return {{"min", f.min()}, {"max", f.max()}, {"mean", f.mean()}, {"rms", f.rms()}};
}

}  // namespace

const char* version() { return "0.1.0"; }

json envelope(const std::string& kind, const json& input) {
  return {{"schema_version", kSchemaVersion}, {"version", version()}, {"kind", kind}, {"input", input}};
}

json form_json(const exterior::Form& a) {
  json out = json::array();
  const auto& basis = a.basis();
  for (Mask m : basis.masks(a.degree())) {
    const Complex c = a.coefficient(m);
    if (c == Complex(0.0)) continue;
    json gens = json::array();
    for (int b = 0; b < basis.generators(); ++b) {
      if (m & (Mask{1} << b)) gens.push_back(b + 1);
    }
    out.push_back({{"generators", gens}, {"re", c.real()}, {"im", c.imag()}});
  }
  return out;
}

json invariant_report(const invariant::InvariantModel& model, const json& input, double tol) {
  json out = envelope("invariant", input);
  const auto rep = invariant::classify(model, tol);
  out["classification"] = classification_json(rep);
  out["flags"] = holding_flags(out["classification"]);
  out["tolerance"] = tol;
  out["n"] = model.n();
  out["total_volume"] = model.metric().total_volume();
  out["lee_form"] = form_json(invariant::lee_form(model));
  out["lee_norm_sq"] = rep.lee_norm_sq;
  const auto f = invariant::f_omega(model);
  out["f_omega"] = {{"from_contraction", f.from_contraction}, {"from_lee", f.from_lee}};
  out["densities"] = densities_json(invariant::functional_densities(model));
  out["values"] = densities_json(invariant::functional_values(model));
  const auto el = invariant::el_residuals(model);
  auto el_json = [](const invariant::ElResidual& r) { return json{{"constant", r.constant}, {"deviation", r.deviation}}; };
  out["el_residuals"] = {{"G", el_json(el.g)}, {"F", el_json(el.f)}, {"A", el_json(el.a)}, {"R", el_json(el.r)}};
  return out;
}

json gauduchon_report(const elliptic::GauduchonResult& result, const json& input, const elliptic::SolverOptions& opts,
                      const json& extra) {
  json out = envelope("gauduchon", input);
  out["spectrum"] = spectrum_json(result.spectrum);
  out["residual"] = result.residual;
  out["positive"] = result.positive;
  out["min_factor"] = result.min_factor;
  out["near_degenerate"] = result.near_degenerate;
  out["factor"] = field_summary(result.factor);
  out["gauduchon_volume"] = result.gauduchon.volume();
  out["solver"] = {{"restart", opts.restart},         {"tolerance", opts.tolerance},
                   {"shift", opts.shift},             {"arnoldi_steps", opts.arnoldi_steps},
                   {"max_inner", opts.max_inner},     {"max_outer", opts.max_outer}};
  for (const auto& [k, v] : extra.items()) out[k] = v;
  return out;
}

json distinguished_report(const elliptic::DistinguishedResult& result, const json& input) {
  json out = envelope("distinguished", input);
  out["balanced"] = result.balanced;
  out["synthetic"] = result.synthetic;
  out["k"] = result.k;
  out["k0"] = result.k0;
  out["phi"] = field_summary(result.phi);
  out["equation_residual"] = result.equation_residual;
  out["f_omega_consistency"] = {{"conformal_law", result.f_display_defect}, {"direct", result.f_direct_defect}};
  out["solver"] = stats_json(result.stats);
  out["distinguished_volume"] = result.distinguished.volume();
  return out;
}

json variation_report(const std::vector<variation::VariationReport>& reports, const json& input, double tolerance) {
  json out = envelope("variation", input);
  json rows = json::array();
  double worst = 0.0;
  for (const auto& r : reports) {
    rows.push_back({{"functional", torus::functional_name(r.which)},
                    {"fd_derivative", r.fd_derivative},
                    {"el_pairing", r.el_pairing},
                    {"relative_gap", r.relative_gap},
                    {"steps", r.steps},
                    {"central_differences", r.central_differences}});
    worst = std::max(worst, r.relative_gap);
  }
  out["directions"] = rows;
  out["max_relative_gap"] = worst;
  out["tolerance"] = tolerance;
  out["gap_floor"] = variation::kGapFloor;
  out["passed"] = worst <= tolerance;
  return out;
}

json sweep_report(const variation::Sweep& sweep, const json& input) {
  json out = envelope("sweep", input);
  json rows = json::array();
  for (const auto& row : sweep.rows) {
    rows.push_back({{"r", row.r},
                    {"s", row.s},
                    {"u_re", row.u.real()},
                    {"u_im", row.u.imag()},
                    {"c", row.c},
                    {"values", densities_json(row.values)},
                    {"flags", holding_flags(classification_json(row.flags))}});
  }
  out["rows"] = rows;
  const auto& s = sweep.summary;
  out["summary"] = {{"F_monotone_decreasing", s.f_monotone_decreasing},
                    {"F_smallest", s.f_smallest},
                    {"kaehler_attained", s.kaehler_attained},
                    {"A_decreases_as_r_shrinks", s.a_decreases_as_r_shrinks},
                    {"A_note", s.a_note}};
  return out;
}

std::string sweep_csv(const variation::Sweep& sweep) {
  std::string out = "r,s,u_re,u_im,c,G,F,A,R,V\n";
  char buf[512];
  for (const auto& row : sweep.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.r, row.s,
                  row.u.real(), row.u.imag(), row.c, row.values.g, row.values.f, row.values.a, row.values.r,
                  row.values.v);
    out += buf;
  }
  return out;
}

json error_json(ErrorCode code, const std::string& message) {
  return {{"schema_version", kSchemaVersion},
          {"version", version()},
          {"error", {{"code", error_code_name(code)}, {"message", message}}}};
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace leelab::report
