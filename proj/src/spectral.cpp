#include "cpdgrid/spectral.hpp"

#include <cmath>
#include <sstream>

#include "cpdgrid/error.hpp"

namespace cpdgrid {

namespace {

constexpr double kClampTol = 1e-9;

}  // namespace

Spectrum laplacian_spectrum(const ConductanceMatrix& matrix) {
  const auto n = matrix.values().rows();
  if (n < 2) {
    throw Error(ErrorCode::DisconnectedSpectrum, "a single node has no algebraic connectivity");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix.values(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenSolverFailure, "symmetric eigensolver did not converge");
  }
  Spectrum out;
  out.eigenvalues = solver.eigenvalues();  // ascending
  out.lambda_n = out.eigenvalues(n - 1);
  const double tol = kClampTol * std::abs(out.lambda_n);
  if (!(std::abs(out.eigenvalues(0)) <= tol)) {
    std::ostringstream msg;
    msg << "lambda_1 = " << out.eigenvalues(0) << " is not zero to tolerance " << tol;
    throw Error(ErrorCode::EigenSolverFailure, msg.str());
  }
  out.eigenvalues(0) = 0.0;
  out.lambda2 = out.eigenvalues(1);
  if (!(out.lambda2 > tol)) {
    throw Error(ErrorCode::DisconnectedSpectrum, "lambda_2 is zero: network is disconnected");
  }
  out.eigenratio = out.lambda_n / out.lambda2;
  return out;
}

NormSummary inf_norm_and_gmin(const Network& network, const ConductanceMatrix& matrix) {
  return {matrix.values().cwiseAbs().rowwise().sum().maxCoeff(), network.min_conductance()};
}

SpectralSummary summarize_spectrum(const Network& network) {
  const auto ports = reduce_network(network);
  const auto g = build_conductance_matrix(ports);
  const auto norms = inf_norm_and_gmin(ports, g);
  return {laplacian_spectrum(g), norms.inf_norm, norms.g_min};
}

}  // namespace cpdgrid
