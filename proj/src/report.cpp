#include "cpdgrid/report.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "cpdgrid/decomposition.hpp"
#include "cpdgrid/error.hpp"
#include "cpdgrid/network_io.hpp"
#include "cpdgrid/spectral.hpp"
#include "json_util.hpp"

namespace cpdgrid {

using nlohmann::json;
using detail::number;
using detail::vector_json;

namespace {

json certificate_json(const Certificate& c) {
  json out = {{"kind", to_string(c.kind)},
              {"delta", number(c.delta)},
              {"v_min", number(c.v_min)},
              {"x_max", number(c.x_max)},
              {"applicable", c.applicable},
              {"reason", to_string(c.reason)},
              {"p_par", number(c.p_par)}};
  if (c.kind == CertificateKind::Spectral) {
    out["perp_norm2"] = number(c.perp_norm);
    out["lambda_n"] = number(c.scale_high);
    out["lambda2"] = number(c.scale_low);
  } else {
    out["perp_norm_inf"] = number(c.perp_norm);
    out["inf_norm"] = number(c.scale_high);
    out["g_min"] = number(c.scale_low);
  }
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

struct Analysis {
  Network ports;
  ConductanceMatrix g;
  Vector powers;
  SpectralSummary spectral;
  PowerDecomposition power;
  Certificate spectral_cert;
  Certificate infnorm_cert;
};

Analysis analyze(const Network& network) {
  auto ports = reduce_network(network);
  auto g = build_conductance_matrix(ports);
  auto powers = ports.injection_vector();
  const auto norms = inf_norm_and_gmin(ports, g);
  SpectralSummary spectral{laplacian_spectrum(g), norms.inf_norm, norms.g_min};
  auto power = decompose_power(powers);
  auto sc = certificate_spectral(spectral, power);
  auto ic = certificate_infnorm(spectral, power);
  return Analysis{std::move(ports), std::move(g), std::move(powers), std::move(spectral),
                  std::move(power), sc, ic};
}

json base_json(const Network& network, const Analysis& a) {
  json doc;
  doc["tool"] = {{"name", "cpdgrid"}, {"version", kVersion}};
  doc["network"] = json::parse(network_to_json(network));
  doc["ports"] = a.ports.nodes();
  doc["kron_reduced"] = !network.interior().empty();
  doc["conductance_matrix"] = matrix_json(a.g.values());
  doc["spectral"] = {{"eigenvalues", vector_json(a.spectral.spectrum.eigenvalues)},
                     {"lambda2", number(a.spectral.lambda2())},
                     {"lambda_n", number(a.spectral.lambda_n())},
                     {"eigenratio", number(a.spectral.eigenratio())},
                     {"inf_norm", number(a.spectral.inf_norm)},
                     {"g_min", number(a.spectral.g_min)}};
  doc["power"] = {{"injections", vector_json(a.powers)},
                  {"p_par", number(a.power.p_par)},
                  {"p_perp", vector_json(a.power.p_perp)},
                  {"p_perp_norm2", number(a.power.p_perp.norm())},
                  {"p_perp_norm_inf", number(a.power.p_perp.lpNorm<Eigen::Infinity>())}};
  doc["feasibility"] = feasibility_precheck(a.powers) == Feasibility::Feasible
                           ? "feasible"
                           : "infeasible_negative_losses";
  doc["certificates"] = {{"spectral", certificate_json(a.spectral_cert)},
                         {"inf_norm", certificate_json(a.infnorm_cert)}};
  return doc;
}

std::string csv_number(double v) {
  std::ostringstream out;
  out << std::setprecision(17);
  if (std::isfinite(v)) out << v;
  else out << (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
  return out.str();
}

json region_json(const Certificate& cert) {
  json out = {{"certificate", to_string(cert.kind)},
              {"columns", {"level_v0", "vertex", "V1", "V2", "V3", "u", "w"}},
              {"rows", json::array()}};
  if (!cert.applicable) return out;
  const auto vertices =
      region_polyline(cert.x_max, {cert.v_min, 1.5 * cert.v_min, 2.0 * cert.v_min});
  for (const auto& vx : vertices) {
    out["rows"].push_back({vx.level_v0, vx.vertex, vx.v(0), vx.v(1), vx.v(2), vx.u, vx.w});
  }
  return out;
}

json twoport_json(double g, double p1, double p2, const TwoPortResult& r) {
  json out = {{"g_siemens", g},
              {"P1", p1},
              {"P2", p2},
              {"p_par", number(r.p_par)},
              {"perp_norm1", number(r.perp_l1)},
              {"ratio", number(r.ratio)},
              {"condition_holds", r.status == TwoPortStatus::HighVoltageSolution}};
  if (r.status == TwoPortStatus::HighVoltageSolution) {
    out["V"] = vector_json(r.point.v);
    out["V0"] = number(r.point.v0);
    out["x"] = vector_json(r.point.x);
    out["x_max"] = number(r.ratio);
    out["residual_norm"] = number(r.point.residual_norm);
  } else {
    out["violated"] = r.violated;
  }
  return out;
}

}  // namespace

std::vector<RegionVertex> region_polyline(double x_max, const std::vector<double>& levels) {
  const double a = x_max;
  const double hex[6][3] = {{a, -a, 0}, {a, 0, -a}, {0, a, -a},
                            {-a, a, 0}, {-a, 0, a}, {0, -a, a}};
  const double su = 1.0 / std::sqrt(2.0);
  const double sw = 1.0 / std::sqrt(6.0);
  std::vector<RegionVertex> out;
  for (double level : levels) {
    for (int k = 0; k <= 6; ++k) {
      const auto& x = hex[k % 6];
      RegionVertex vx;
      vx.level_v0 = level;
      vx.vertex = k;
      vx.v = Vector(3);
      for (int i = 0; i < 3; ++i) vx.v(i) = level * (1.0 + x[i]);
      vx.u = level * su * (x[0] - x[1]);
      vx.w = level * sw * (x[0] + x[1] - 2.0 * x[2]);
      out.push_back(std::move(vx));
    }
  }
  return out;
}

SolveReport solve_report(const Network& network, const SolverOptions& options, ReportFormat format,
                         bool include_timing) {
  const auto started = std::chrono::steady_clock::now();
  const auto a = analyze(network);
  const auto result = solve_operating_point(a.g, a.powers, options);
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

  SolveReport out;
  out.status = result.status;
  if (format == ReportFormat::Csv) {
    std::ostringstream csv;
    csv << "start_index,V0,x_inf,residual_norm,iterations";
    for (const auto& port : a.ports.nodes()) csv << ",V_" << port;
    csv << ",spectral_verdict,inf_norm_verdict\n";
    for (const auto& p : result.points) {
      csv << p.start_index << ',' << csv_number(p.v0) << ','
          << csv_number(p.x.lpNorm<Eigen::Infinity>()) << ',' << csv_number(p.residual_norm) << ','
          << p.iterations;
      for (Eigen::Index i = 0; i < p.v.size(); ++i) csv << ',' << csv_number(p.v(i));
      const auto vs = decompose_voltage(p.v);
      csv << ',' << to_string(check_membership(a.spectral_cert, vs).verdict) << ','
          << to_string(check_membership(a.infnorm_cert, vs).verdict) << '\n';
    }
    out.text = csv.str();
    return out;
  }

  auto doc = base_json(network, a);
  json starts = json::array();
  for (const auto& s : result.starts) {
    starts.push_back({{"start_index", s.start_index},
                      {"converged", s.converged},
                      {"iterations", s.iterations},
                      {"residual_norm", number(s.residual_norm)},
                      {"failure", s.failure}});
  }
  doc["solver"] = {{"status", to_string(result.status)},
                   {"tol_watts", number(result.tol_watts)},
                   {"options",
                    {{"starts", options.n_starts},
                     {"max_iter", options.max_iter},
                     {"seed", options.seed},
                     {"tol", options.tol_watts}}},
                   {"starts", starts}};
  json points = json::array();
  for (const auto& p : result.points) {
    const auto vs = VoltageDecomposition{p.v0, p.x};
    const auto ms = check_membership(a.spectral_cert, vs);
    const auto mi = check_membership(a.infnorm_cert, vs);
    points.push_back({{"V", vector_json(p.v)},
                      {"V0", number(p.v0)},
                      {"x", vector_json(p.x)},
                      {"x_inf", number(ms.x_inf)},
                      {"residual_norm", number(p.residual_norm)},
                      {"iterations", p.iterations},
                      {"start_index", p.start_index},
                      {"membership", {{"spectral", to_string(ms.verdict)},
                                      {"inf_norm", to_string(mi.verdict)}}}});
  }
  doc["operating_points"] = points;
  if (result.status == SolveStatus::DegenerateUniformFamily) {
    doc["note"] = "P = 0: every uniform profile V = c·1 is an operating point; V = 1 V is reported";
  }
  if (include_timing) doc["timing_ms"] = elapsed_ms;
  out.text = doc.dump(2) + "\n";
  return out;
}

std::string certify_report(const Network& network, ReportFormat format) {
  const auto a = analyze(network);
  const bool three_ports = a.ports.node_count() == 3;
  if (format == ReportFormat::Csv) {
    std::ostringstream csv;
    csv << "certificate,delta,v_min,x_max,applicable,reason\n";
    for (const auto* c : {&a.spectral_cert, &a.infnorm_cert}) {
      csv << to_string(c->kind) << ',' << csv_number(c->delta) << ',' << csv_number(c->v_min)
          << ',' << csv_number(c->x_max) << ',' << (c->applicable ? 1 : 0) << ','
          << to_string(c->reason) << '\n';
    }
    if (three_ports) {
      csv << "\ncertificate,level_v0,vertex,V1,V2,V3,u,w\n";
      for (const auto* c : {&a.spectral_cert, &a.infnorm_cert}) {
        if (!c->applicable) continue;
        for (const auto& vx :
             region_polyline(c->x_max, {c->v_min, 1.5 * c->v_min, 2.0 * c->v_min})) {
          csv << to_string(c->kind) << ',' << csv_number(vx.level_v0) << ',' << vx.vertex << ','
              << csv_number(vx.v(0)) << ',' << csv_number(vx.v(1)) << ',' << csv_number(vx.v(2))
              << ',' << csv_number(vx.u) << ',' << csv_number(vx.w) << '\n';
        }
      }
    }
    return csv.str();
  }
  auto doc = base_json(network, a);
  if (three_ports) {
    doc["region"] = {{"spectral", region_json(a.spectral_cert)},
                     {"inf_norm", region_json(a.infnorm_cert)},
                     {"basis", {{"u", {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0}},
                                {"w", {1.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0),
                                       -2.0 / std::sqrt(6.0)}}}}};
  }
  if (a.ports.node_count() == 2 && a.powers(0) != a.powers(1)) {
    const double g = a.ports.branches().front().conductance;
    doc["two_port"] = twoport_json(g, a.powers(0), a.powers(1),
                                   two_port_solve(g, a.powers(0), a.powers(1)));
  }
  return doc.dump(2) + "\n";
}

std::string twoport_report(double g, double p1, double p2, const TwoPortResult& result,
                           ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::ostringstream csv;
    csv << "g_siemens,P1,P2,p_par,perp_norm1,ratio,condition_holds,V1,V2,V0,x_max\n";
    const bool ok = result.status == TwoPortStatus::HighVoltageSolution;
    csv << csv_number(g) << ',' << csv_number(p1) << ',' << csv_number(p2) << ','
        << csv_number(result.p_par) << ',' << csv_number(result.perp_l1) << ','
        << csv_number(result.ratio) << ',' << (ok ? 1 : 0) << ',';
    if (ok) {
      csv << csv_number(result.point.v(0)) << ',' << csv_number(result.point.v(1)) << ','
          << csv_number(result.point.v0) << ',' << csv_number(result.ratio) << '\n';
    } else {
      csv << ",,,\n";
    }
    return csv.str();
  }
  return twoport_json(g, p1, p2, result).dump(2) + "\n";
}

}  // namespace cpdgrid
