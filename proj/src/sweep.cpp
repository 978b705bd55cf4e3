#include "cpdgrid/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include "cpdgrid/certificates.hpp"
#include "cpdgrid/decomposition.hpp"
#include "cpdgrid/error.hpp"
#include "cpdgrid/spectral.hpp"
#include "json_util.hpp"

namespace cpdgrid {

using nlohmann::json;

std::string_view to_string(Topology topology) noexcept {
  switch (topology) {
    case Topology::Path: return "path";
    case Topology::Cycle: return "cycle";
    case Topology::Complete: return "complete";
    case Topology::RandomConnected: return "random_connected";
  }
  return "unknown";
}

std::string_view to_string(PowerScheme scheme) noexcept {
  return scheme == PowerScheme::FixedLossFraction ? "fixed_loss_fraction" : "uniform_random";
}

void SweepConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (n_instances < 0) bad("n_instances must be >= 0");
  if (min_nodes < 2 || max_nodes < min_nodes) bad("node_count range must satisfy 2 <= lo <= hi");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) bad("edge_prob must lie in (0, 1]");
  if (!(g_lo > 0.0 && g_hi >= g_lo && std::isfinite(g_hi))) {
    bad("conductance range must satisfy 0 < lo <= hi");
  }
  if (!(rho_lo >= 0.0 && rho_hi >= rho_lo && std::isfinite(rho_hi))) {
    bad("rho range must satisfy 0 <= lo <= hi");
  }
  if (rho_lo == 0.0 && rho_hi > 0.0) bad("a log-uniform rho range needs lo > 0");
  if (!(scale_watts > 0.0 && std::isfinite(scale_watts))) bad("scale_watts must be positive");
  if (max_attempts < 1) bad("max_attempts must be >= 1");
  if (threads < 1) bad("threads must be >= 1");
  solver.validate();
}

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, path + ": " + what);
}

void reject_unknown(const json& object, const std::string& path,
                    const std::set<std::string>& allowed) {
  if (!object.is_object()) config_error(path, "expected an object");
  for (const auto& [key, value] : object.items()) {
    if (allowed.count(key) == 0) config_error(path.empty() ? key : path + "." + key, "unknown field");
  }
}

double get_number(const json& value, const std::string& path) {
  if (!value.is_number()) config_error(path, "expected a number");
  return value.get<double>();
}

int get_int(const json& value, const std::string& path) {
  if (!value.is_number_integer()) config_error(path, "expected an integer");
  return value.get<int>();
}

bool get_bool(const json& value, const std::string& path) {
  if (!value.is_boolean()) config_error(path, "expected a boolean");
  return value.get<bool>();
}

void get_range(const json& value, const std::string& path, double& lo, double& hi) {
  if (value.is_number()) {
    lo = hi = value.get<double>();
    return;
  }
  if (!value.is_array() || value.size() != 2) config_error(path, "expected a number or [lo, hi]");
  lo = get_number(value[0], path + "[0]");
  hi = get_number(value[1], path + "[1]");
}

std::mt19937_64 instance_rng(std::uint64_t seed, int index, int attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(attempt),
                    0x5eedu};
  return std::mt19937_64(seq);
}

std::vector<std::pair<int, int>> draw_edges(int n, const SweepConfig& config,
                                            std::mt19937_64& rng) {
  std::set<std::pair<int, int>> edges;
  auto add = [&](int a, int b) { edges.emplace(std::min(a, b), std::max(a, b)); };
  switch (config.topology) {
    case Topology::Path:
      for (int i = 0; i + 1 < n; ++i) add(i, i + 1);
      break;
    case Topology::Cycle:
      for (int i = 0; i + 1 < n; ++i) add(i, i + 1);
      if (n >= 3) add(n - 1, 0);
      break;
    case Topology::Complete:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) add(i, j);
      break;
    case Topology::RandomConnected: {
      std::vector<int> order(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
      std::shuffle(order.begin(), order.end(), rng);
      for (int k = 1; k < n; ++k) {
        std::uniform_int_distribution<int> pick(0, k - 1);
        add(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
      }
      std::bernoulli_distribution extra(config.edge_prob);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (edges.count({i, j}) == 0 && extra(rng)) add(i, j);
      break;
    }
  }
  return {edges.begin(), edges.end()};
}

Vector draw_powers(int n, const SweepConfig& config, std::mt19937_64& rng) {
  Vector p(n);
  if (config.scheme == PowerScheme::UniformRandom) {
    std::uniform_real_distribution<double> u(-config.scale_watts, config.scale_watts);
    for (int i = 0; i < n; ++i) p(i) = u(rng);
    return p;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) p(i) = normal(rng);
  p.array() -= p.mean();
  p *= config.scale_watts / p.norm();
  double rho = config.rho_lo;
  if (config.rho_hi > config.rho_lo) {
    std::uniform_real_distribution<double> u(std::log(config.rho_lo), std::log(config.rho_hi));
    rho = std::exp(u(rng));
  }
  // p_par = rho · ||P_perp||_2
  p.array() += rho * p.norm() / static_cast<double>(n);
  return p;
}

std::string verdict_label(bool applicable, int points, int violations) {
  if (!applicable) return "not_applicable";
  if (points == 0) return "no_points";
  return violations == 0 ? "inside" : "outside";
}

SweepRow evaluate_instance(int index, const Instance& instance, const SweepConfig& config) {
  SweepRow row;
  row.index = index;
  row.attempts = instance.attempts;
  row.nodes = static_cast<int>(instance.network.node_count());
  row.branches = static_cast<int>(instance.network.branches().size());

  const auto summary = summarize_spectrum(instance.network);
  const auto power = decompose_power(instance.powers);
  const auto spectral = certificate_spectral(summary, power);
  const auto infnorm = certificate_infnorm(summary, power);
  row.lambda2 = summary.lambda2();
  row.lambda_n = summary.lambda_n();
  row.eigenratio = summary.eigenratio();
  row.inf_norm = summary.inf_norm;
  row.g_min = summary.g_min;
  row.p_par = power.p_par;
  row.perp_norm2 = spectral.perp_norm;
  row.perp_norm_inf = infnorm.perp_norm;
  row.delta = spectral.delta;
  row.v_min = spectral.v_min;
  row.x_max = spectral.x_max;
  row.spectral_applicable = spectral.applicable;
  row.delta_inf = infnorm.delta;
  row.v_min_inf = infnorm.v_min;
  row.x_max_inf = infnorm.x_max;
  row.infnorm_applicable = infnorm.applicable;

  const auto g = build_conductance_matrix(instance.network);
  const auto result = solve_operating_point(g, instance.powers, config.solver);
  row.status = result.status;
  row.points = result.status == SolveStatus::Converged ? static_cast<int>(result.points.size()) : 0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.v0_top = row.x_inf_top = row.v0_lowest = row.x_inf_largest = nan;
  if (row.points > 0) {
    row.v0_top = result.points.front().v0;
    row.x_inf_top = result.points.front().x.lpNorm<Eigen::Infinity>();
    row.v0_lowest = std::numeric_limits<double>::infinity();
    row.x_inf_largest = 0.0;
    for (const auto& point : result.points) {
      const double xi = point.x.lpNorm<Eigen::Infinity>();
      row.v0_lowest = std::min(row.v0_lowest, point.v0);
      row.x_inf_largest = std::max(row.x_inf_largest, xi);
      if (check_membership(spectral, point.v0, xi).verdict == Verdict::Outside) {
        ++row.spectral_violations;
      }
      if (check_membership(infnorm, point.v0, xi).verdict == Verdict::Outside) {
        ++row.infnorm_violations;
      }
    }
  }
  row.spectral_verdict = verdict_label(spectral.applicable, row.points, row.spectral_violations);
  row.infnorm_verdict = verdict_label(infnorm.applicable, row.points, row.infnorm_violations);
  row.tightness_v = spectral.applicable && row.points > 0 ? row.v0_lowest / row.v_min : nan;
  row.tightness_x = spectral.applicable && row.points > 0 ? row.x_inf_largest / row.x_max : nan;
  return row;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2) return 0.0;
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

json distribution_json(const Distribution& d) {
  return {{"count", d.count},
          {"min", detail::number(d.min)},
          {"mean", detail::number(d.mean)},
          {"median", detail::number(d.median)},
          {"max", detail::number(d.max)}};
}

json aggregate_json(const CertificateAggregate& a) {
  return {{"applicable_instances", a.applicable_instances},
          {"points_checked", a.points_checked},
          {"violations", a.violations},
          {"tightness_v0_over_vmin", distribution_json(a.tightness_v)},
          {"tightness_xinf_over_xmax", distribution_json(a.tightness_x)}};
}

}  // namespace

SweepConfig parse_sweep_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  reject_unknown(doc, "", {"seed", "n_instances", "node_count", "topology", "conductance", "power",
                           "filters", "max_attempts", "solver", "threads"});
  SweepConfig c;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) config_error("seed", "expected a nonnegative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("n_instances")) c.n_instances = get_int(doc["n_instances"], "n_instances");
  if (doc.contains("node_count")) {
    const auto& v = doc["node_count"];
    if (v.is_number_integer()) {
      c.min_nodes = c.max_nodes = v.get<int>();
    } else {
      if (!v.is_array() || v.size() != 2) config_error("node_count", "expected an integer or [lo, hi]");
      c.min_nodes = get_int(v[0], "node_count[0]");
      c.max_nodes = get_int(v[1], "node_count[1]");
    }
  }
  if (doc.contains("topology")) {
    const auto& t = doc["topology"];
    reject_unknown(t, "topology", {"kind", "edge_prob"});
    if (!t.contains("kind") || !t["kind"].is_string()) config_error("topology.kind", "required string");
    const auto kind = t["kind"].get<std::string>();
    if (kind == "path") c.topology = Topology::Path;
    else if (kind == "cycle") c.topology = Topology::Cycle;
    else if (kind == "complete") c.topology = Topology::Complete;
    else if (kind == "random_connected") c.topology = Topology::RandomConnected;
    else config_error("topology.kind", "unknown topology '" + kind + "'");
    if (t.contains("edge_prob")) c.edge_prob = get_number(t["edge_prob"], "topology.edge_prob");
  }
  if (doc.contains("conductance")) get_range(doc["conductance"], "conductance", c.g_lo, c.g_hi);
  if (doc.contains("power")) {
    const auto& p = doc["power"];
    reject_unknown(p, "power", {"scheme", "rho", "scale_watts"});
    if (p.contains("scheme")) {
      if (!p["scheme"].is_string()) config_error("power.scheme", "expected a string");
      const auto scheme = p["scheme"].get<std::string>();
      if (scheme == "fixed_loss_fraction") c.scheme = PowerScheme::FixedLossFraction;
      else if (scheme == "uniform_random") c.scheme = PowerScheme::UniformRandom;
      else config_error("power.scheme", "unknown scheme '" + scheme + "'");
    }
    if (p.contains("rho")) get_range(p["rho"], "power.rho", c.rho_lo, c.rho_hi);
    if (p.contains("scale_watts")) c.scale_watts = get_number(p["scale_watts"], "power.scale_watts");
  }
  if (doc.contains("filters")) {
    const auto& f = doc["filters"];
    reject_unknown(f, "filters", {"require_spectral_applicable", "require_feasible"});
    if (f.contains("require_spectral_applicable")) {
      c.require_spectral_applicable =
          get_bool(f["require_spectral_applicable"], "filters.require_spectral_applicable");
    }
    if (f.contains("require_feasible")) {
      c.require_feasible = get_bool(f["require_feasible"], "filters.require_feasible");
    }
  }
  if (doc.contains("max_attempts")) c.max_attempts = get_int(doc["max_attempts"], "max_attempts");
  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    reject_unknown(s, "solver", {"starts", "max_iter", "tol", "seed"});
    if (s.contains("starts")) c.solver.n_starts = get_int(s["starts"], "solver.starts");
    if (s.contains("max_iter")) c.solver.max_iter = get_int(s["max_iter"], "solver.max_iter");
    if (s.contains("tol")) c.solver.tol_watts = get_number(s["tol"], "solver.tol");
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) config_error("solver.seed", "expected a nonnegative integer");
      c.solver.seed = s["seed"].get<std::uint64_t>();
    }
  }
  if (doc.contains("threads")) c.threads = get_int(doc["threads"], "threads");
  c.validate();
  return c;
}

Instance generate_instance(std::uint64_t seed, int index, const SweepConfig& config) {
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    auto rng = instance_rng(seed, index, attempt);
    std::uniform_int_distribution<int> size(config.min_nodes, config.max_nodes);
    const int n = size(rng);
    const auto edges = draw_edges(n, config, rng);
    std::uniform_real_distribution<double> conductance(config.g_lo, config.g_hi);
    std::vector<std::string> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back(std::to_string(i + 1));
    std::vector<Branch> branches;
    for (const auto& [a, b] : edges) {
      const double g = config.g_hi > config.g_lo ? conductance(rng) : config.g_lo;
      branches.push_back({nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)], g});
    }
    const Vector powers = draw_powers(n, config, rng);
    std::map<std::string, double> injections;
    for (int i = 0; i < n; ++i) injections[nodes[static_cast<std::size_t>(i)]] = powers(i);
    Network network(std::move(nodes), std::move(branches), std::move(injections));

    if (config.require_feasible && feasibility_precheck(powers) != Feasibility::Feasible) continue;
    if (config.require_spectral_applicable) {
      const auto summary = summarize_spectrum(network);
      if (!certificate_spectral(summary, decompose_power(powers)).applicable) continue;
    }
    return Instance{std::move(network), powers, attempt + 1};
  }
  throw Error(ErrorCode::GenerationFailed,
              "instance " + std::to_string(index) + ": filters rejected " +
                  std::to_string(config.max_attempts) + " draws");
}

Distribution summarize(std::vector<double> values) {
  Distribution d;
  d.count = static_cast<int>(values.size());
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  d.min = values.front();
  d.max = values.back();
  double sum = 0.0;
  for (double v : values) sum += v;
  d.mean = sum / static_cast<double>(values.size());
  const auto mid = values.size() / 2;
  d.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return d;
}

SweepReport run_sweep(const SweepConfig& config) {
  config.validate();
  SweepReport report;
  report.config = config;

  using Slot = std::variant<std::monostate, SweepRow, GenerationFailure>;
  std::vector<Slot> slots(static_cast<std::size_t>(config.n_instances));
  auto work = [&](int index) {
    try {
      const auto instance = generate_instance(config.seed, index, config);
      slots[static_cast<std::size_t>(index)] = evaluate_instance(index, instance, config);
    } catch (const Error& e) {
      slots[static_cast<std::size_t>(index)] = GenerationFailure{index, e.what()};
    }
  };
  if (config.threads > 1) {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < config.threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < config.n_instances; i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  } else {
    for (int i = 0; i < config.n_instances; ++i) work(i);
  }

  std::vector<double> tv, tx, tv_inf, tx_inf, log_ratio, log_tight;
  for (auto& slot : slots) {
    if (auto* failure = std::get_if<GenerationFailure>(&slot)) {
      report.generation_failures.push_back(*failure);
      continue;
    }
    auto& row = std::get<SweepRow>(slot);
    if (row.status != SolveStatus::Converged) ++report.no_convergence;
    report.points_total += row.points;
    if (row.spectral_applicable) {
      ++report.spectral.applicable_instances;
      report.spectral.points_checked += row.points;
      report.spectral.violations += row.spectral_violations;
      if (row.points > 0) {
        tv.push_back(row.tightness_v);
        tx.push_back(row.tightness_x);
        log_ratio.push_back(std::log(row.eigenratio));
        log_tight.push_back(std::log(row.tightness_v));
      }
    }
    if (row.infnorm_applicable) {
      ++report.infnorm.applicable_instances;
      report.infnorm.points_checked += row.points;
      report.infnorm.violations += row.infnorm_violations;
      if (row.points > 0) {
        tv_inf.push_back(row.v0_lowest / row.v_min_inf);
        tx_inf.push_back(row.x_inf_largest / row.x_max_inf);
      }
    }
    report.rows.push_back(std::move(row));
  }
  report.spectral.tightness_v = summarize(tv);
  report.spectral.tightness_x = summarize(tx);
  report.infnorm.tightness_v = summarize(tv_inf);
  report.infnorm.tightness_x = summarize(tx_inf);
  report.eigenratio_tightness_correlation = pearson(log_ratio, log_tight);
  return report;
}

const std::vector<std::string> kSweepCsvColumns = {
    "index",         "attempts",          "nodes",          "branches",
    "lambda2",       "lambda_n",          "eigenratio",     "inf_norm",
    "g_min",         "p_par",             "perp_norm2",     "perp_norm_inf",
    "delta",         "v_min",             "x_max",          "spectral_applicable",
    "delta_inf",     "v_min_inf",         "x_max_inf",      "infnorm_applicable",
    "solve_status",  "points",            "v0_top",         "x_inf_top",
    "v0_lowest",     "x_inf_largest",     "spectral_verdict", "infnorm_verdict",
    "spectral_violations", "infnorm_violations", "tightness_v", "tightness_x"};

std::string sweep_rows_csv(const SweepReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < kSweepCsvColumns.size(); ++i) {
    out << (i ? "," : "") << kSweepCsvColumns[i];
  }
  out << "\n";
  auto num = [&](double v) -> std::ostringstream& {
    if (std::isfinite(v)) out << v;
    else if (std::isnan(v)) out << "nan";
    else out << (v > 0 ? "inf" : "-inf");
    return out;
  };
  for (const auto& r : report.rows) {
    out << r.index << ',' << r.attempts << ',' << r.nodes << ',' << r.branches << ',';
    num(r.lambda2) << ',';
    num(r.lambda_n) << ',';
    num(r.eigenratio) << ',';
    num(r.inf_norm) << ',';
    num(r.g_min) << ',';
    num(r.p_par) << ',';
    num(r.perp_norm2) << ',';
    num(r.perp_norm_inf) << ',';
    num(r.delta) << ',';
    num(r.v_min) << ',';
    num(r.x_max) << ',' << (r.spectral_applicable ? 1 : 0) << ',';
    num(r.delta_inf) << ',';
    num(r.v_min_inf) << ',';
    num(r.x_max_inf) << ',' << (r.infnorm_applicable ? 1 : 0) << ',';
    out << to_string(r.status) << ',' << r.points << ',';
    num(r.v0_top) << ',';
    num(r.x_inf_top) << ',';
    num(r.v0_lowest) << ',';
    num(r.x_inf_largest) << ',';
    out << r.spectral_verdict << ',' << r.infnorm_verdict << ',' << r.spectral_violations << ','
        << r.infnorm_violations << ',';
    num(r.tightness_v) << ',';
    num(r.tightness_x) << '\n';
  }
  return out.str();
}

std::string sweep_summary_json(const SweepReport& report) {
  const auto& c = report.config;
  json config = {
      {"seed", c.seed},
      {"n_instances", c.n_instances},
      {"node_count", {c.min_nodes, c.max_nodes}},
      {"topology", {{"kind", to_string(c.topology)}, {"edge_prob", c.edge_prob}}},
      {"conductance", {c.g_lo, c.g_hi}},
      {"power", {{"scheme", to_string(c.scheme)}, {"rho", {c.rho_lo, c.rho_hi}},
                 {"scale_watts", c.scale_watts}}},
      {"filters", {{"require_spectral_applicable", c.require_spectral_applicable},
                   {"require_feasible", c.require_feasible}}},
      {"max_attempts", c.max_attempts},
      {"solver", {{"starts", c.solver.n_starts}, {"max_iter", c.solver.max_iter},
                  {"tol", c.solver.tol_watts}, {"seed", c.solver.seed}}}};
  json failures = json::array();
  for (const auto& f : report.generation_failures) {
    failures.push_back({{"index", f.index}, {"message", f.message}});
  }
  json doc = {
      {"config", config},
      {"instances_attempted", c.n_instances},
      {"rows", report.rows.size()},
      {"generation_failures", report.generation_failures.size()},
      {"generation_failure_details", failures},
      {"no_convergence", report.no_convergence},
      {"points_total", report.points_total},
      {"violation_count", report.violation_count()},
      {"spectral", aggregate_json(report.spectral)},
      {"inf_norm", aggregate_json(report.infnorm)},
      {"eigenratio_tightness_correlation", detail::number(report.eigenratio_tightness_correlation)},
      {"csv_columns", kSweepCsvColumns}};
  return doc.dump(2) + "\n";
}

void write_sweep_report(const SweepReport& report, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw Error(ErrorCode::IoError, "cannot create '" + directory.string() + "': " + ec.message());
  }
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = directory / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
  };
  write("sweep_rows.csv", sweep_rows_csv(report));
  write("sweep_summary.json", sweep_summary_json(report));
}

}  // namespace cpdgrid
