#include <doctest.h>

#include <deque>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cpdgrid/decomposition.hpp"
#include "cpdgrid/error.hpp"
#include "cpdgrid/sweep.hpp"

using namespace cpdgrid;

namespace {

bool connected(const Network& net) {
  std::set<std::string> seen{net.nodes().front()};
  std::deque<std::string> queue{net.nodes().front()};
  while (!queue.empty()) {
    const auto node = queue.front();
    queue.pop_front();
    for (const auto& b : net.branches()) {
      const std::string* other = b.a == node ? &b.b : (b.b == node ? &b.a : nullptr);
      if (other && seen.insert(*other).second) queue.push_back(*other);
    }
  }
  return seen.size() == net.node_count();
}

SweepConfig small_config() {
  SweepConfig c;
  c.n_instances = 60;
  c.max_nodes = 6;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("fixed loss fraction hits the target ratio") {
  SweepConfig c;
  c.topology = Topology::Complete;
  c.min_nodes = c.max_nodes = 3;
  c.g_lo = c.g_hi = 1.0;
  c.rho_lo = c.rho_hi = 0.05;
  for (int index = 0; index < 10; ++index) {
    const auto inst = generate_instance(4, index, c);
    const auto d = decompose_power(inst.powers);
    CHECK(d.p_par / d.p_perp.norm() == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(inst.network.branches().size() == 3);
  }
}

TEST_CASE("instances are deterministic in seed and index") {
  const auto c = small_config();
  const auto a = generate_instance(8, 3, c);
  const auto b = generate_instance(8, 3, c);
  CHECK(a.powers == b.powers);
  CHECK(a.network.branches() == b.network.branches());
  const auto other = generate_instance(8, 4, c);
  CHECK((other.powers.size() != a.powers.size() || other.powers != a.powers));
}

TEST_CASE("random connected instances satisfy the network invariants") {
  SweepConfig c;
  c.min_nodes = c.max_nodes = 6;
  c.edge_prob = 0.5;
  c.require_spectral_applicable = false;
  for (int index = 0; index < 30; ++index) {
    const auto inst = generate_instance(2, index, c);
    CHECK(inst.network.node_count() == 6);
    CHECK(connected(inst.network));
    for (const auto& b : inst.network.branches()) {
      CHECK(b.conductance >= c.g_lo);
      CHECK(b.conductance <= c.g_hi);
    }
  }
}

TEST_CASE("topologies") {
  SweepConfig c;
  c.min_nodes = c.max_nodes = 5;
  c.require_spectral_applicable = false;
  c.topology = Topology::Path;
  CHECK(generate_instance(1, 0, c).network.branches().size() == 4);
  c.topology = Topology::Cycle;
  CHECK(generate_instance(1, 0, c).network.branches().size() == 5);
  c.topology = Topology::Complete;
  CHECK(generate_instance(1, 0, c).network.branches().size() == 10);
}

TEST_CASE("impossible filters raise GenerationFailed") {
  SweepConfig c;
  c.rho_lo = c.rho_hi = 5.0;  // losses exceed transfer: never applicable
  c.max_attempts = 5;
  try {
    (void)generate_instance(1, 0, c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GenerationFailed);
  }
  c.n_instances = 3;
  const auto report = run_sweep(c);
  CHECK(report.rows.empty());
  CHECK(report.generation_failures.size() == 3);
  CHECK(report.violation_count() == 0);
}

TEST_CASE("empty sweep") {
  auto c = small_config();
  c.n_instances = 0;
  const auto report = run_sweep(c);
  CHECK(report.rows.empty());
  CHECK(report.points_total == 0);
  CHECK(report.spectral.applicable_instances == 0);
  CHECK(sweep_summary_json(report).find("\"violations\"") != std::string::npos);
}

TEST_CASE("sweep soundness and thread determinism") {
  auto c = small_config();
  const auto serial = run_sweep(c);
  c.threads = 4;
  const auto parallel = run_sweep(c);
  CHECK(serial.rows.size() == 60);
  CHECK(serial.violation_count() == 0);
  CHECK(sweep_rows_csv(serial) == sweep_rows_csv(parallel));
  CHECK(sweep_summary_json(serial) == sweep_summary_json(parallel));
  for (const auto& row : serial.rows) {
    CHECK(row.spectral_applicable);
    if (row.spectral_verdict == "inside") CHECK(row.tightness_v >= 1.0);
  }
}

TEST_CASE("conservatism grows with the loss fraction") {
  // Measured direction: V0/v_min rises from 1 as rho grows (the bound is
  // asymptotically tight for vanishing losses on a uniform complete graph).
  SweepConfig c;
  c.n_instances = 100;
  c.topology = Topology::Complete;
  c.min_nodes = c.max_nodes = 4;
  c.g_lo = c.g_hi = 1.0;
  std::vector<double> tight_v, tight_x;
  for (double rho : {0.01, 0.05, 0.1}) {
    c.rho_lo = c.rho_hi = rho;
    const auto report = run_sweep(c);
    CHECK(report.violation_count() == 0);
    tight_v.push_back(report.spectral.tightness_v.mean);
    tight_x.push_back(report.spectral.tightness_x.mean);
  }
  CHECK(tight_v[0] < tight_v[1]);
  CHECK(tight_v[1] < tight_v[2]);
  CHECK(tight_x[0] > tight_x[1]);
  CHECK(tight_x[1] > tight_x[2]);
}

TEST_CASE("config parsing") {
  const auto c = parse_sweep_config(R"({"seed": 9, "n_instances": 5, "node_count": [3, 4],
      "topology": {"kind": "cycle"}, "power": {"rho": 0.02}, "threads": 2})");
  CHECK(c.seed == 9);
  CHECK(c.n_instances == 5);
  CHECK(c.topology == Topology::Cycle);
  CHECK(c.rho_lo == 0.02);
  CHECK(c.rho_hi == 0.02);
  CHECK(c.threads == 2);
  CHECK_THROWS_AS(parse_sweep_config(R"({"bogus": 1})"), Error);
  CHECK_THROWS_AS(parse_sweep_config(R"({"node_count": [5, 2]})"), Error);
  CHECK_THROWS_AS(parse_sweep_config(R"({"topology": {"kind": "random_connected", "edge_prob": 0}})"),
                  Error);
  CHECK_THROWS_AS(parse_sweep_config(R"({"power": {"rho": -1}})"), Error);
  CHECK_THROWS_AS(parse_sweep_config("{"), Error);
}

TEST_CASE("report files") {
  auto c = small_config();
  c.n_instances = 5;
  const auto report = run_sweep(c);
  const auto dir = std::filesystem::temp_directory_path() / "cpdgrid_sweep_test";
  std::filesystem::remove_all(dir);
  write_sweep_report(report, dir);
  const auto csv = slurp(dir / "sweep_rows.csv");
  CHECK(csv.substr(0, csv.find('\n')).find("index,attempts,nodes") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(slurp(dir / "sweep_summary.json") == sweep_summary_json(report));
  std::filesystem::remove_all(dir);
}

TEST_CASE("summaries") {
  const auto d = summarize({3.0, 1.0, 2.0, 10.0});
  CHECK(d.count == 4);
  CHECK(d.min == 1.0);
  CHECK(d.max == 10.0);
  CHECK(d.median == 2.5);
  CHECK(d.mean == 4.0);
  CHECK(summarize({}).count == 0);
}
