#pragma once

#include <string_view>
#include <vector>

#include "cpdgrid/decomposition.hpp"
#include "cpdgrid/spectral.hpp"

namespace cpdgrid {

enum class CertificateKind { Spectral, InfNorm };

/// Why a certificate does or does not bind.
enum class Applicability {
  Applicable,
  NegativeLosses,        // p_par < 0: no operating point exists at all
  ZeroLosses,            // p_par == 0: delta == 0, outside the open interval
  ZeroPerpPower,         // ||P_perp|| == 0 with p_par > 0
  LossesExceedTransfer,  // ||P_perp|| <= p_par: denominator nonpositive
  DeltaTooLarge,         // delta >= 1/2
};

std::string_view to_string(CertificateKind kind) noexcept;
std::string_view to_string(Applicability reason) noexcept;

/// Operating-region certificate. For the spectral kind the conductance
/// scales are (lambda_n, lambda_2) and the power norm is ||P_perp||_2; for
/// the inf-norm kind they are (||G||_inf, g_min) and ||P_perp||_inf.
///
/// When applicable, every operating point with V0 > 0 satisfies
/// V0 >= v_min and ||x||_inf <= x_max. Inapplicable certificates still carry
/// their numbers (possibly non-finite) for diagnostics.
struct Certificate {
  CertificateKind kind = CertificateKind::Spectral;
  double delta = 0.0;
  double v_min = 0.0;
  double x_max = 0.0;
  bool applicable = false;
  Applicability reason = Applicability::ZeroLosses;

  double p_par = 0.0;
  double perp_norm = 0.0;
  double scale_high = 0.0;  // lambda_n or ||G||_inf
  double scale_low = 0.0;   // lambda_2 or g_min
};

Certificate certificate_spectral(const SpectralSummary& spectral, const PowerDecomposition& power);
Certificate certificate_infnorm(const SpectralSummary& spectral, const PowerDecomposition& power);
Certificate make_certificate(CertificateKind kind, const SpectralSummary& spectral,
                             const PowerDecomposition& power);

enum class Verdict { Inside, Outside, NotApplicable };

std::string_view to_string(Verdict verdict) noexcept;

struct Membership {
  Verdict verdict = Verdict::NotApplicable;
  bool voltage_ok = false;    // V0 >= v_min
  bool deviation_ok = false;  // ||x||_inf <= x_max
  double v0 = 0.0;
  double x_inf = 0.0;
};

Membership check_membership(const Certificate& cert, double v0, double x_inf_norm);
Membership check_membership(const Certificate& cert, const VoltageDecomposition& point);

struct ScalingRow {
  double epsilon = 0.0;
  double delta = 0.0;
  double v_min = 0.0;
  double x_max = 0.0;
  bool applicable = false;
};

/// Spectral certificate along P(eps) = eps·(p_par/n)·1 + P_perp. The base
/// (eps = 1) certificate must be applicable (CertificateInapplicableAtBase).
std::vector<ScalingRow> scaling_probe(const SpectralSummary& spectral,
                                      const PowerDecomposition& base,
                                      const std::vector<double>& epsilons);

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cpdgrid
