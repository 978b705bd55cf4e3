#include "cpdgrid/certificates.hpp"

#include <cmath>

#include "cpdgrid/error.hpp"

namespace cpdgrid {

std::string_view to_string(CertificateKind kind) noexcept {
  return kind == CertificateKind::Spectral ? "spectral" : "inf_norm";
}

std::string_view to_string(Applicability reason) noexcept {
  switch (reason) {
    case Applicability::Applicable: return "applicable";
    case Applicability::NegativeLosses: return "negative_losses";
    case Applicability::ZeroLosses: return "zero_losses";
    case Applicability::ZeroPerpPower: return "zero_perp_power";
    case Applicability::LossesExceedTransfer: return "losses_exceed_transfer";
    case Applicability::DeltaTooLarge: return "delta_too_large";
  }
  return "unknown";
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::Inside: return "inside";
    case Verdict::Outside: return "outside";
    case Verdict::NotApplicable: return "not_applicable";
  }
  return "unknown";
}

namespace {

// delta = p / (||P_perp|| - p) · high / low
// v_min = (1 - delta) / delta · sqrt(p / low)
// x_max = delta / (1 - delta)
Certificate evaluate(CertificateKind kind, double p_par, double perp_norm, double high,
                     double low) {
  Certificate c;
  c.kind = kind;
  c.p_par = p_par;
  c.perp_norm = perp_norm;
  c.scale_high = high;
  c.scale_low = low;

  const double denom = perp_norm - p_par;
  c.delta = p_par / denom * (high / low);
  c.v_min = (1.0 - c.delta) / c.delta * std::sqrt(p_par / low);
  c.x_max = c.delta / (1.0 - c.delta);

  if (p_par < 0.0) {
    c.reason = Applicability::NegativeLosses;
  } else if (p_par == 0.0) {
    c.reason = Applicability::ZeroLosses;
  } else if (perp_norm == 0.0) {
    c.reason = Applicability::ZeroPerpPower;
  } else if (!(denom > 0.0)) {
    c.reason = Applicability::LossesExceedTransfer;
  } else if (!(c.delta < 0.5)) {
    c.reason = Applicability::DeltaTooLarge;
  } else {
    c.reason = Applicability::Applicable;
  }
  c.applicable = c.reason == Applicability::Applicable;
  return c;
}

}  // namespace

Certificate certificate_spectral(const SpectralSummary& spectral, const PowerDecomposition& power) {
  return evaluate(CertificateKind::Spectral, power.p_par, power.p_perp.norm(), spectral.lambda_n(),
                  spectral.lambda2());
}

Certificate certificate_infnorm(const SpectralSummary& spectral, const PowerDecomposition& power) {
  return evaluate(CertificateKind::InfNorm, power.p_par, power.p_perp.lpNorm<Eigen::Infinity>(),
                  spectral.inf_norm, spectral.g_min);
}

Certificate make_certificate(CertificateKind kind, const SpectralSummary& spectral,
                             const PowerDecomposition& power) {
  return kind == CertificateKind::Spectral ? certificate_spectral(spectral, power)
                                           : certificate_infnorm(spectral, power);
}

Membership check_membership(const Certificate& cert, double v0, double x_inf_norm) {
  Membership m;
  m.v0 = v0;
  m.x_inf = x_inf_norm;
  m.voltage_ok = v0 >= cert.v_min;
  m.deviation_ok = x_inf_norm <= cert.x_max;
  if (!cert.applicable) {
    m.verdict = Verdict::NotApplicable;
  } else {
    m.verdict = (m.voltage_ok && m.deviation_ok) ? Verdict::Inside : Verdict::Outside;
  }
  return m;
}

Membership check_membership(const Certificate& cert, const VoltageDecomposition& point) {
  return check_membership(cert, point.v0, point.x.lpNorm<Eigen::Infinity>());
}

std::vector<ScalingRow> scaling_probe(const SpectralSummary& spectral,
                                      const PowerDecomposition& base,
                                      const std::vector<double>& epsilons) {
  if (!certificate_spectral(spectral, base).applicable) {
    throw Error(ErrorCode::CertificateInapplicableAtBase,
                "spectral certificate is not applicable at the base instance");
  }
  std::vector<ScalingRow> rows;
  rows.reserve(epsilons.size());
  for (double eps : epsilons) {
    if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be nonnegative");
    PowerDecomposition scaled{eps * base.p_par, base.p_perp};
    const auto cert = certificate_spectral(spectral, scaled);
    rows.push_back({eps, cert.delta, cert.v_min, cert.x_max, cert.applicable});
  }
  return rows;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "slope fit needs at least two paired points");
  }
  double mx = 0.0, my = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace cpdgrid
