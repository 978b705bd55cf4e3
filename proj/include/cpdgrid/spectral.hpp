#pragma once

#include "cpdgrid/circuit_model.hpp"

namespace cpdgrid {

/// Ascending Laplacian spectrum with lambda_1 clamped to zero.
struct Spectrum {
  Vector eigenvalues;
  double lambda2 = 0.0;    // algebraic connectivity
  double lambda_n = 0.0;
  double eigenratio = 0.0; // lambda_n / lambda_2 >= 1
};

struct SpectralSummary {
  Spectrum spectrum;
  double inf_norm = 0.0;   // max absolute row sum of G
  double g_min = 0.0;      // smallest branch conductance of the network

  [[nodiscard]] double lambda2() const noexcept { return spectrum.lambda2; }
  [[nodiscard]] double lambda_n() const noexcept { return spectrum.lambda_n; }
  [[nodiscard]] double eigenratio() const noexcept { return spectrum.eigenratio; }
};

/// Full symmetric eigendecomposition of G. |lambda_1| must not exceed
/// 1e-9 * lambda_n (EigenSolverFailure otherwise); lambda_2 at or below that
/// threshold raises DisconnectedSpectrum.
Spectrum laplacian_spectrum(const ConductanceMatrix& matrix);

struct NormSummary {
  double inf_norm = 0.0;
  double g_min = 0.0;
};

NormSummary inf_norm_and_gmin(const Network& network, const ConductanceMatrix& matrix);

/// Spectrum and norms of the port network (Kron-reduced if needed).
SpectralSummary summarize_spectrum(const Network& network);

}  // namespace cpdgrid
