#pragma once

#include "cpdgrid/circuit_model.hpp"

namespace cpdgrid {

/// P = (p_par / n)·1 + P_perp with p_par = 1ᵀP (total dissipated power) and
/// P_perp ∈ 1^⊥ (lossless inter-node transfer).
struct PowerDecomposition {
  double p_par = 0.0;
  Vector p_perp;

  [[nodiscard]] Vector reconstruct() const;
};

/// V = V0·(1 + x) with V0 the mean voltage and x ∈ 1^⊥.
struct VoltageDecomposition {
  double v0 = 0.0;
  Vector x;

  [[nodiscard]] Vector reconstruct() const;
};

PowerDecomposition decompose_power(const Vector& powers);

/// Throws ZeroMeanVoltage when mean(V) == 0.
VoltageDecomposition decompose_voltage(const Vector& voltages);

/// diag(V)·G·V − P. Zero exactly at an operating point.
Vector residual_full(const ConductanceMatrix& g, const Vector& powers, const Vector& voltages);

struct DecomposedResidual {
  double parallel = 0.0;  // V0²·xᵀGx − p_par
  Vector perpendicular;   // V0²(Gx + diag(x)Gx) − (p_par/n)·1 − P_perp
};

/// Residuals of the loss equation and the transfer equation. Throws
/// DeviationNotOrthogonal when |1ᵀx| exceeds 1e-10·n·max(1, ||x||_inf).
DecomposedResidual residual_decomposed(const ConductanceMatrix& g, double v0, const Vector& x,
                                       double p_par, const Vector& p_perp);

}  // namespace cpdgrid
