#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpdgrid/circuit_model.hpp"

namespace cpdgrid {

enum class Feasibility { Feasible, InfeasibleNegativeLosses };

/// Passivity precheck: no operating point exists when 1ᵀP < 0. Feasible
/// does not imply existence.
Feasibility feasibility_precheck(const Vector& powers);

struct SolverOptions {
  double tol_watts = 0.0;       // <= 0 selects 1e-9 · max(1, ||P||_inf)
  int max_iter = 100;
  int n_starts = 8;
  int max_backtracks = 30;      // step halvings per Newton step
  double max_condition = 1e14;  // Jacobian condition estimate limit
  double perturbation_norm = 0.1;
  double dedup_relative = 1e-6;
  int polish_steps = 3;
  std::uint64_t seed = 0;
  int threads = 1;              // starts run concurrently when > 1

  /// Throws InvalidArgument on out-of-range settings.
  void validate() const;
};

double default_tolerance(const Vector& powers);

struct OperatingPoint {
  Vector v;
  double v0 = 0.0;
  Vector x;
  double residual_norm = 0.0;  // ||diag(V)GV - P||_inf
  int iterations = 0;
  int start_index = 0;
};

struct StartReport {
  int start_index = 0;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  std::string failure;  // empty when converged
};

enum class SolveStatus {
  Converged,
  NoConvergence,
  InfeasibleNegativeLosses,
  DegenerateUniformFamily,  // P == 0: every uniform V solves; one V = 1 V is reported
};

std::string_view to_string(SolveStatus status) noexcept;

struct SolveResult {
  SolveStatus status = SolveStatus::NoConvergence;
  double tol_watts = 0.0;
  std::vector<OperatingPoint> points;  // V0 descending, then lexicographic V
  std::vector<StartReport> starts;
};

struct NewtonStep {
  Vector v_next;
  double alpha = 0.0;  // 0 when no step length reduced the residual
  double residual_before = 0.0;
  double residual_after = 0.0;
};

/// One damped Newton step on F(V) = diag(V)GV - P with Jacobian
/// diag(GV) + diag(V)G and backtracking on ||F||_2. Throws JacobianSingular
/// when the Jacobian condition estimate exceeds options.max_condition.
NewtonStep newton_step(const ConductanceMatrix& g, const Vector& powers, const Vector& voltages,
                       const SolverOptions& options = {});

/// Multi-start initial voltages. Start 0 uses V0_init and the linearized
/// deviation x = G⁺P_perp / V0²; start k >= 1 scales V0_init by 0.5, 2, 4,
/// 8, ... and adds a seeded perturbation of norm perturbation_norm in 1^⊥.
std::vector<Vector> starting_points(const ConductanceMatrix& g, const Vector& powers,
                                    const SolverOptions& options);

SolveResult solve_operating_point(const ConductanceMatrix& g, const Vector& powers,
                                  const SolverOptions& options = {});

enum class TwoPortStatus { HighVoltageSolution, NoHighVoltageSolution };

struct TwoPortResult {
  TwoPortStatus status = TwoPortStatus::NoHighVoltageSolution;
  double p_par = 0.0;
  double perp_l1 = 0.0;  // ||P_perp||_1 = |P1 - P2|
  double ratio = 0.0;    // p_par / ||P_perp||_1, must lie in (0, 1)
  std::string violated;  // which side of (0, 1) failed
  OperatingPoint point;  // valid for HighVoltageSolution
};

/// Closed-form high-voltage operating point of two ports joined by g.
/// Throws NonpositiveConductance, and EqualPowers when P1 == P2 with positive total
/// power (equal powers with nonpositive total simply violate the condition).
TwoPortResult two_port_solve(double g, double p1, double p2);

}  // namespace cpdgrid
