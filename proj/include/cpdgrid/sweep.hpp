#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cpdgrid/circuit_model.hpp"
#include "cpdgrid/solver.hpp"

namespace cpdgrid {

enum class Topology { Path, Cycle, Complete, RandomConnected };
enum class PowerScheme { FixedLossFraction, UniformRandom };

std::string_view to_string(Topology topology) noexcept;
std::string_view to_string(PowerScheme scheme) noexcept;

/// Monte Carlo study configuration. JSON form (all fields optional):
///
///   { "seed": 1, "n_instances": 1000, "node_count": [2, 8],
///     "topology": {"kind": "random_connected", "edge_prob": 0.5},
///     "conductance": [0.5, 2.0],
///     "power": {"scheme": "fixed_loss_fraction", "rho": [1e-4, 0.05],
///               "scale_watts": 1000},
///     "filters": {"require_spectral_applicable": true, "require_feasible": true},
///     "max_attempts": 200,
///     "solver": {"starts": 8, "max_iter": 100, "tol": 0},
///     "threads": 1 }
///
/// `rho` is p_par / ||P_perp||_2: a scalar, or [lo, hi] sampled
/// log-uniformly. `scale_watts` is ||P_perp||_2 for fixed_loss_fraction and
/// max |P_k| for uniform_random.
struct SweepConfig {
  std::uint64_t seed = 1;
  int n_instances = 1000;
  int min_nodes = 2;
  int max_nodes = 8;
  Topology topology = Topology::RandomConnected;
  double edge_prob = 0.5;
  double g_lo = 0.5;
  double g_hi = 2.0;
  PowerScheme scheme = PowerScheme::FixedLossFraction;
  double rho_lo = 1e-4;
  double rho_hi = 0.05;
  double scale_watts = 1000.0;
  bool require_spectral_applicable = true;
  bool require_feasible = true;
  int max_attempts = 200;
  SolverOptions solver;
  int threads = 1;

  /// Throws InvalidArgument.
  void validate() const;
};

/// Throws ParseError / InvalidArgument. Unknown fields are rejected.
SweepConfig parse_sweep_config(std::string_view text);

struct Instance {
  Network network;
  Vector powers;  // over network.port_ids()
  int attempts = 1;
};

/// Deterministic in (seed, index). Connectivity is guaranteed by building a
/// random spanning tree first. Throws GenerationFailed when the filters
/// reject max_attempts consecutive draws.
Instance generate_instance(std::uint64_t seed, int index, const SweepConfig& config);

struct SweepRow {
  int index = 0;
  int attempts = 0;
  int nodes = 0;
  int branches = 0;
  double lambda2 = 0.0;
  double lambda_n = 0.0;
  double eigenratio = 0.0;
  double inf_norm = 0.0;
  double g_min = 0.0;
  double p_par = 0.0;
  double perp_norm2 = 0.0;
  double perp_norm_inf = 0.0;
  double delta = 0.0;
  double v_min = 0.0;
  double x_max = 0.0;
  bool spectral_applicable = false;
  double delta_inf = 0.0;
  double v_min_inf = 0.0;
  double x_max_inf = 0.0;
  bool infnorm_applicable = false;
  SolveStatus status = SolveStatus::NoConvergence;
  int points = 0;
  double v0_top = 0.0;       // operating point with largest V0
  double x_inf_top = 0.0;
  double v0_lowest = 0.0;    // worst cases over all points found
  double x_inf_largest = 0.0;
  std::string spectral_verdict;  // inside / outside / not_applicable / no_points
  std::string infnorm_verdict;
  int spectral_violations = 0;
  int infnorm_violations = 0;
  double tightness_v = 0.0;  // v0_lowest / v_min
  double tightness_x = 0.0;  // x_inf_largest / x_max
};

struct Distribution {
  int count = 0;
  double min = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
};

Distribution summarize(std::vector<double> values);

struct CertificateAggregate {
  int applicable_instances = 0;
  int points_checked = 0;
  int violations = 0;
  Distribution tightness_v;
  Distribution tightness_x;
};

struct GenerationFailure {
  int index = 0;
  std::string message;
};

struct SweepReport {
  SweepConfig config;
  std::vector<SweepRow> rows;  // instance order
  std::vector<GenerationFailure> generation_failures;
  int no_convergence = 0;
  int points_total = 0;
  CertificateAggregate spectral;
  CertificateAggregate infnorm;
  double eigenratio_tightness_correlation = 0.0;  // Pearson(log eigenratio, log tightness_v)

  [[nodiscard]] int violation_count() const noexcept {
    return spectral.violations + infnorm.violations;
  }
};

/// Solve and certify every generated instance. Bit-identical for identical
/// config regardless of `threads`.
SweepReport run_sweep(const SweepConfig& config);

/// Stable CSV schema: see kSweepCsvColumns.
extern const std::vector<std::string> kSweepCsvColumns;
std::string sweep_rows_csv(const SweepReport& report);
std::string sweep_summary_json(const SweepReport& report);

/// Writes sweep_rows.csv and sweep_summary.json into `directory` (created if
/// missing). Throws IoError.
void write_sweep_report(const SweepReport& report, const std::filesystem::path& directory);

}  // namespace cpdgrid
