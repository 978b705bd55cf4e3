#include "cpdgrid/solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <random>

#include "cpdgrid/certificates.hpp"
#include "cpdgrid/decomposition.hpp"
#include "cpdgrid/error.hpp"
#include "cpdgrid/spectral.hpp"

namespace cpdgrid {

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NoConvergence: return "no_convergence";
    case SolveStatus::InfeasibleNegativeLosses: return "infeasible_negative_losses";
    case SolveStatus::DegenerateUniformFamily: return "degenerate_uniform_family";
  }
  return "unknown";
}

Feasibility feasibility_precheck(const Vector& powers) {
  return powers.sum() < 0.0 ? Feasibility::InfeasibleNegativeLosses : Feasibility::Feasible;
}

void SolverOptions::validate() const {
  if (!(tol_watts >= 0.0) || !std::isfinite(tol_watts)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be a finite nonnegative number");
  }
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (n_starts < 1) throw Error(ErrorCode::InvalidArgument, "n_starts must be >= 1");
  if (max_backtracks < 0) throw Error(ErrorCode::InvalidArgument, "max_backtracks must be >= 0");
  if (!(max_condition > 1.0)) throw Error(ErrorCode::InvalidArgument, "max_condition must be > 1");
  if (!(perturbation_norm >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "perturbation_norm must be >= 0");
  }
  if (!(dedup_relative > 0.0)) throw Error(ErrorCode::InvalidArgument, "dedup threshold must be > 0");
  if (polish_steps < 0) throw Error(ErrorCode::InvalidArgument, "polish_steps must be >= 0");
  if (threads < 1) throw Error(ErrorCode::InvalidArgument, "threads must be >= 1");
}

double default_tolerance(const Vector& powers) {
  const double pmax = powers.size() == 0 ? 0.0 : powers.lpNorm<Eigen::Infinity>();
  return 1e-9 * std::max(1.0, pmax);
}

NewtonStep newton_step(const ConductanceMatrix& g, const Vector& powers, const Vector& voltages,
                       const SolverOptions& options) {
  const Vector current = g.currents(voltages);
  const Vector residual = voltages.cwiseProduct(current) - powers;
  NewtonStep out;
  out.residual_before = residual.norm();
  out.v_next = voltages;
  out.residual_after = out.residual_before;
  if (out.residual_before == 0.0) return out;

  Matrix jacobian = voltages.asDiagonal() * g.values();
  jacobian.diagonal() += current;
  Eigen::PartialPivLU<Matrix> lu(jacobian);
  const double rcond = lu.rcond();
  if (!(rcond * options.max_condition >= 1.0)) {
    throw Error(ErrorCode::JacobianSingular, "Jacobian is singular to working precision");
  }
  const Vector direction = lu.solve(residual);
  if (!direction.allFinite()) {
    throw Error(ErrorCode::JacobianSingular, "Newton direction is not finite");
  }

  double alpha = 1.0;
  for (int k = 0; k <= options.max_backtracks; ++k, alpha *= 0.5) {
    const Vector candidate = voltages - alpha * direction;
    const double r = (candidate.cwiseProduct(g.currents(candidate)) - powers).norm();
    if (r < out.residual_before) {
      out.v_next = candidate;
      out.alpha = alpha;
      out.residual_after = r;
      return out;
    }
  }
  out.alpha = 0.0;
  return out;
}

namespace {

Vector pseudo_inverse_apply(const ConductanceMatrix& g, const Vector& rhs_in_perp) {
  // G + (tr G / n²)·11ᵀ is nonsingular and agrees with G on 1^⊥, so its
  // inverse maps 1^⊥ vectors to G⁺ of them.
  const auto n = g.values().rows();
  const double shift = g.values().trace() / static_cast<double>(n * n);
  Matrix regularized = g.values();
  regularized.array() += shift;
  Vector y = regularized.ldlt().solve(rhs_in_perp);
  y.array() -= y.mean();
  return y;
}

Vector seeded_perp_direction(std::uint64_t seed, int start_index, Eigen::Index n, double norm) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(start_index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = normal(rng);
  d.array() -= d.mean();
  const double len = d.norm();
  if (len == 0.0) return Vector::Zero(n);
  return d * (norm / len);
}

struct StartOutcome {
  StartReport report;
  std::optional<OperatingPoint> point;
};

StartOutcome run_start(const ConductanceMatrix& g, const Vector& powers, const Vector& start,
                       int start_index, double tol, const SolverOptions& options) {
  StartOutcome out;
  out.report.start_index = start_index;
  Vector v = start;
  double rinf = (v.cwiseProduct(g.currents(v)) - powers).lpNorm<Eigen::Infinity>();
  int it = 0;
  try {
    while (!(rinf <= tol)) {
      if (it >= options.max_iter) {
        out.report.failure = "max_iter reached";
        break;
      }
      const auto step = newton_step(g, powers, v, options);
      ++it;
      if (step.alpha == 0.0) {
        out.report.failure = "line search stalled";
        break;
      }
      v = step.v_next;
      if (!v.allFinite()) {
        out.report.failure = "iterate is not finite";
        break;
      }
      rinf = (v.cwiseProduct(g.currents(v)) - powers).lpNorm<Eigen::Infinity>();
    }
  } catch (const Error& e) {
    out.report.failure = e.what();
  }
  out.report.iterations = it;
  out.report.residual_norm = rinf;
  if (!(rinf <= tol)) return out;

  for (int k = 0; k < options.polish_steps; ++k) {
    try {
      const auto step = newton_step(g, powers, v, options);
      if (step.alpha == 0.0) break;
      const Vector candidate = step.v_next;
      const double r = (candidate.cwiseProduct(g.currents(candidate)) - powers)
                           .lpNorm<Eigen::Infinity>();
      if (!(r < rinf)) break;
      v = candidate;
      rinf = r;
    } catch (const Error&) {
      break;
    }
  }

  // diag(-V)G(-V) = diag(V)GV: report the positive-mean mirror.
  if (v.mean() < 0.0) v = -v;
  if (v.mean() == 0.0) {
    out.report.failure = "converged to a zero-mean profile";
    return out;
  }
  out.report.converged = true;
  out.report.residual_norm = rinf;
  const auto dec = decompose_voltage(v);
  out.point = OperatingPoint{v, dec.v0, dec.x, rinf, it, start_index};
  return out;
}

bool same_point(const Vector& a, const Vector& b, double rel) {
  const double scale = std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
  return (a - b).lpNorm<Eigen::Infinity>() <= rel * scale;
}

}  // namespace

std::vector<Vector> starting_points(const ConductanceMatrix& g, const Vector& powers,
                                    const SolverOptions& options) {
  const auto n = powers.size();
  const auto spectrum = laplacian_spectrum(g);
  const auto power = decompose_power(powers);
  const double perp_norm = power.p_perp.norm();

  SpectralSummary summary;
  summary.spectrum = spectrum;
  const auto cert = certificate_spectral(summary, power);
  double v0_init = std::sqrt(std::max(perp_norm, std::abs(power.p_par)) / spectrum.lambda2);
  if (cert.applicable) v0_init = std::max(v0_init, cert.v_min);
  if (!(v0_init > 0.0) || !std::isfinite(v0_init)) v0_init = 1.0;

  const Vector linear_x = pseudo_inverse_apply(g, power.p_perp);
  std::vector<Vector> starts;
  starts.reserve(static_cast<std::size_t>(options.n_starts));
  for (int k = 0; k < options.n_starts; ++k) {
    const double factor = k == 0 ? 1.0 : (k == 1 ? 0.5 : std::ldexp(1.0, k - 1));
    const double v0 = v0_init * factor;
    Vector x = linear_x / (v0 * v0);
    if (k > 0 || x.lpNorm<Eigen::Infinity>() < 1e-12) {
      // The Jacobian is singular on the uniform ray; never start there.
      const double norm = options.perturbation_norm > 0.0 ? options.perturbation_norm : 0.1;
      x += seeded_perp_direction(options.seed, k, n, norm);
    }
    starts.push_back(v0 * (x.array() + 1.0).matrix());
  }
  return starts;
}

SolveResult solve_operating_point(const ConductanceMatrix& g, const Vector& powers,
                                  const SolverOptions& options) {
  options.validate();
  if (static_cast<std::size_t>(powers.size()) != g.size()) {
    throw Error(ErrorCode::DimensionMismatch, "power vector length does not match G");
  }
  SolveResult result;
  result.tol_watts = options.tol_watts > 0.0 ? options.tol_watts : default_tolerance(powers);

  if (feasibility_precheck(powers) == Feasibility::InfeasibleNegativeLosses) {
    result.status = SolveStatus::InfeasibleNegativeLosses;
    return result;
  }
  if (powers.isZero(0.0)) {
    result.status = SolveStatus::DegenerateUniformFamily;
    const Vector ones = Vector::Ones(powers.size());
    result.points.push_back(OperatingPoint{ones, 1.0, Vector::Zero(powers.size()), 0.0, 0, 0});
    return result;
  }

  const auto starts = starting_points(g, powers, options);
  std::vector<StartOutcome> outcomes(starts.size());
  if (options.threads > 1 && starts.size() > 1) {
    std::vector<std::future<StartOutcome>> futures;
    futures.reserve(starts.size());
    for (std::size_t k = 0; k < starts.size(); ++k) {
      futures.push_back(std::async(std::launch::async, [&, k] {
        return run_start(g, powers, starts[k], static_cast<int>(k), result.tol_watts, options);
      }));
    }
    for (std::size_t k = 0; k < starts.size(); ++k) outcomes[k] = futures[k].get();
  } else {
    for (std::size_t k = 0; k < starts.size(); ++k) {
      outcomes[k] = run_start(g, powers, starts[k], static_cast<int>(k), result.tol_watts, options);
    }
  }

  for (auto& outcome : outcomes) {
    result.starts.push_back(outcome.report);
    if (!outcome.point) continue;
    const bool duplicate = std::any_of(
        result.points.begin(), result.points.end(), [&](const OperatingPoint& kept) {
          return same_point(kept.v, outcome.point->v, options.dedup_relative);
        });
    if (!duplicate) result.points.push_back(std::move(*outcome.point));
  }
  std::sort(result.points.begin(), result.points.end(),
            [](const OperatingPoint& a, const OperatingPoint& b) {
              if (a.v0 != b.v0) return a.v0 > b.v0;
              return std::lexicographical_compare(a.v.begin(), a.v.end(), b.v.begin(), b.v.end());
            });
  result.status = result.points.empty() ? SolveStatus::NoConvergence : SolveStatus::Converged;
  return result;
}

TwoPortResult two_port_solve(double g, double p1, double p2) {
  if (!(g > 0.0) || !std::isfinite(g)) {
    throw Error(ErrorCode::NonpositiveConductance, "conductance must be positive");
  }
  if (!std::isfinite(p1) || !std::isfinite(p2)) {
    throw Error(ErrorCode::InvalidArgument, "powers must be finite");
  }
  TwoPortResult out;
  out.p_par = p1 + p2;
  out.perp_l1 = std::abs(p1 - p2);
  // Nonpositive total power fails the condition whatever the transfer is,
  // so it is reported before the ratio is formed.
  if (!(out.p_par > 0.0)) {
    out.ratio = out.perp_l1 > 0.0 ? out.p_par / out.perp_l1 : 0.0;
    out.violated = "p_par / ||P_perp||_1 <= 0";
    return out;
  }
  if (p1 == p2) {
    throw Error(ErrorCode::EqualPowers, "P1 == P2: ||P_perp||_1 is zero");
  }
  out.ratio = out.p_par / out.perp_l1;
  if (!(out.ratio < 1.0)) {
    out.violated = "p_par / ||P_perp||_1 >= 1";
    return out;
  }
  out.status = TwoPortStatus::HighVoltageSolution;
  const double v0 = out.perp_l1 / (2.0 * std::sqrt(g * out.p_par));
  const double x = out.ratio;
  const double sign = p1 > p2 ? 1.0 : -1.0;  // generating side sits higher
  Vector dev(2);
  dev << sign * x, -sign * x;
  Vector v = v0 * (dev.array() + 1.0).matrix();
  Matrix laplacian(2, 2);
  laplacian << g, -g, -g, g;
  const ConductanceMatrix gm(laplacian, {"1", "2"});
  Vector powers(2);
  powers << p1, p2;
  const double rinf = residual_full(gm, powers, v).lpNorm<Eigen::Infinity>();
  out.point = OperatingPoint{std::move(v), v0, std::move(dev), rinf, 0, 0};
  return out;
}

}  // namespace cpdgrid
