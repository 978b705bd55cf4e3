#pragma once

#include <string>
#include <string_view>

#include "cpdgrid/certificates.hpp"
#include "cpdgrid/circuit_model.hpp"
#include "cpdgrid/solver.hpp"

namespace cpdgrid {

inline constexpr std::string_view kVersion = "0.1.0";

enum class ReportFormat { Json, Csv };

struct SolveReport {
  SolveStatus status = SolveStatus::NoConvergence;
  std::string text;
};

/// Full analysis: network echo, port conductance matrix, spectrum, power
/// decomposition, both certificates, operating points with membership
/// verdicts. Timing is the only non-reproducible field and can be omitted.
SolveReport solve_report(const Network& network, const SolverOptions& options,
                         ReportFormat format = ReportFormat::Json, bool include_timing = true);

/// Both certificates; for three ports, the certified region sampled as
/// closed hexagonal polylines in V-space; for two ports, the exact
/// closed-form condition as well.
std::string certify_report(const Network& network, ReportFormat format = ReportFormat::Json);

std::string twoport_report(double g, double p1, double p2, const TwoPortResult& result,
                           ReportFormat format = ReportFormat::Json);

/// Region polyline for three ports: vertices of {V0·(1 + x) : 1ᵀx = 0,
/// ||x||_inf <= x_max} at each level in `levels`, each hexagon closed by
/// repeating its first vertex.
struct RegionVertex {
  double level_v0 = 0.0;
  int vertex = 0;
  Vector v;       // V-space coordinates
  double u = 0.0; // coordinates in an orthonormal basis of 1^⊥
  double w = 0.0;
};
std::vector<RegionVertex> region_polyline(double x_max, const std::vector<double>& levels);

}  // namespace cpdgrid
