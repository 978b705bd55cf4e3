#include "cpdgrid/decomposition.hpp"

#include <cmath>

#include "cpdgrid/error.hpp"

namespace cpdgrid {

Vector PowerDecomposition::reconstruct() const {
  const auto n = static_cast<double>(p_perp.size());
  return p_perp.array() + p_par / n;
}

Vector VoltageDecomposition::reconstruct() const { return v0 * (x.array() + 1.0).matrix(); }

PowerDecomposition decompose_power(const Vector& powers) {
  if (powers.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty power vector");
  PowerDecomposition out;
  out.p_par = powers.sum();
  out.p_perp = powers.array() - out.p_par / static_cast<double>(powers.size());
  return out;
}

VoltageDecomposition decompose_voltage(const Vector& voltages) {
  if (voltages.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty voltage vector");
  VoltageDecomposition out;
  out.v0 = voltages.mean();
  if (out.v0 == 0.0 || !std::isfinite(out.v0)) {
    throw Error(ErrorCode::ZeroMeanVoltage, "mean voltage is zero; V0 is undefined");
  }
  out.x = voltages.array() / out.v0 - 1.0;
  return out;
}

Vector residual_full(const ConductanceMatrix& g, const Vector& powers, const Vector& voltages) {
  if (powers.size() != voltages.size()) {
    throw Error(ErrorCode::DimensionMismatch, "power and voltage vectors differ in length");
  }
  return voltages.cwiseProduct(g.currents(voltages)) - powers;
}

DecomposedResidual residual_decomposed(const ConductanceMatrix& g, double v0, const Vector& x,
                                       double p_par, const Vector& p_perp) {
  const auto n = x.size();
  if (p_perp.size() != n || static_cast<std::size_t>(n) != g.size()) {
    throw Error(ErrorCode::DimensionMismatch, "decomposed quantities differ in length");
  }
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  if (std::abs(x.sum()) > 1e-10 * static_cast<double>(n) * scale) {
    throw Error(ErrorCode::DeviationNotOrthogonal, "deviation vector x is not in 1^perp");
  }
  const Vector gx = g.currents(x);
  const double v0sq = v0 * v0;
  DecomposedResidual out;
  out.parallel = v0sq * x.dot(gx) - p_par;
  out.perpendicular = (v0sq * (gx + x.cwiseProduct(gx))).array() -
                      p_par / static_cast<double>(n) - p_perp.array();
  return out;
}

}  // namespace cpdgrid
