#include "cpdgrid/cpdgrid.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "cpdgrid/certificates.hpp"
#include "cpdgrid/error.hpp"
#include "cpdgrid/network_io.hpp"
#include "cpdgrid/report.hpp"
#include "cpdgrid/spectral.hpp"
#include "cpdgrid/sweep.hpp"

struct cpdgrid_network {
  cpdgrid::Network value;
};

struct cpdgrid_solution_set {
  cpdgrid::SolveResult value;
};

struct cpdgrid_string {
  std::string value;
};

static_assert(static_cast<int>(cpdgrid::ErrorCode::GenerationFailed) ==
              CPDGRID_ERR_GENERATION_FAILED);
static_assert(static_cast<int>(cpdgrid::ErrorCode::Internal) == CPDGRID_ERR_INTERNAL);

namespace {

thread_local std::string last_error;

cpdgrid_status fail(cpdgrid_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename F>
cpdgrid_status guarded(F&& body) {
  try {
    body();
    return CPDGRID_OK;
  } catch (const cpdgrid::Error& e) {
    return fail(static_cast<cpdgrid_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CPDGRID_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CPDGRID_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CPDGRID_ERR_INTERNAL, "unknown exception");
  }
}

cpdgrid::SolverOptions to_options(const cpdgrid_solver_options* in) {
  cpdgrid::SolverOptions options;
  if (in != nullptr) {
    options.tol_watts = in->tol_watts > 0.0 ? in->tol_watts : 0.0;
    options.max_iter = in->max_iter;
    options.n_starts = in->n_starts;
    options.seed = in->seed;
    options.threads = in->threads;
  }
  return options;
}

cpdgrid_solve_status to_c(cpdgrid::SolveStatus status) {
  switch (status) {
    case cpdgrid::SolveStatus::Converged: return CPDGRID_SOLVE_CONVERGED;
    case cpdgrid::SolveStatus::NoConvergence: return CPDGRID_SOLVE_NO_CONVERGENCE;
    case cpdgrid::SolveStatus::InfeasibleNegativeLosses: return CPDGRID_SOLVE_INFEASIBLE;
    case cpdgrid::SolveStatus::DegenerateUniformFamily: return CPDGRID_SOLVE_DEGENERATE;
  }
  return CPDGRID_SOLVE_NO_CONVERGENCE;
}

cpdgrid::ReportFormat to_format(cpdgrid_format format) {
  return format == CPDGRID_FORMAT_CSV ? cpdgrid::ReportFormat::Csv : cpdgrid::ReportFormat::Json;
}

cpdgrid::Certificate from_c(const cpdgrid_certificate& c) {
  cpdgrid::Certificate out;
  out.kind = c.kind == CPDGRID_CERT_SPECTRAL ? cpdgrid::CertificateKind::Spectral
                                             : cpdgrid::CertificateKind::InfNorm;
  out.delta = c.delta;
  out.v_min = c.v_min;
  out.x_max = c.x_max;
  out.applicable = c.applicable != 0;
  out.reason = static_cast<cpdgrid::Applicability>(c.reason);
  out.p_par = c.p_par;
  out.perp_norm = c.perp_norm;
  out.scale_high = c.scale_high;
  out.scale_low = c.scale_low;
  return out;
}

#define CPDGRID_REQUIRE(ptr)                                                  \
  do {                                                                        \
    if ((ptr) == nullptr)                                                     \
      return fail(CPDGRID_ERR_INVALID_ARGUMENT, #ptr " must not be NULL");    \
  } while (0)

}  // namespace

extern "C" {

const char* cpdgrid_version(void) { return cpdgrid::kVersion.data(); }

const char* cpdgrid_last_error(void) { return last_error.c_str(); }

const char* cpdgrid_string_data(const cpdgrid_string* s) {
  return s != nullptr ? s->value.c_str() : "";
}

size_t cpdgrid_string_size(const cpdgrid_string* s) { return s != nullptr ? s->value.size() : 0; }

void cpdgrid_string_free(cpdgrid_string* s) { delete s; }

cpdgrid_status cpdgrid_network_parse(const char* json, cpdgrid_network** out) {
  CPDGRID_REQUIRE(json);
  CPDGRID_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new cpdgrid_network{cpdgrid::parse_network(json)}; });
}

cpdgrid_status cpdgrid_network_load(const char* path, cpdgrid_network** out) {
  CPDGRID_REQUIRE(path);
  CPDGRID_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new cpdgrid_network{cpdgrid::load_network(path)}; });
}

void cpdgrid_network_free(cpdgrid_network* network) { delete network; }

size_t cpdgrid_network_port_count(const cpdgrid_network* network) {
  return network != nullptr ? network->value.port_ids().size() : 0;
}

cpdgrid_status cpdgrid_network_reduce(const cpdgrid_network* network, cpdgrid_network** out) {
  CPDGRID_REQUIRE(network);
  CPDGRID_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new cpdgrid_network{cpdgrid::reduce_network(network->value)}; });
}

cpdgrid_status cpdgrid_network_to_json(const cpdgrid_network* network, cpdgrid_string** out) {
  CPDGRID_REQUIRE(network);
  CPDGRID_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new cpdgrid_string{cpdgrid::network_to_json(network->value)}; });
}

cpdgrid_status cpdgrid_network_conductance(const cpdgrid_network* network, double* out,
                                           size_t capacity) {
  CPDGRID_REQUIRE(network);
  CPDGRID_REQUIRE(out);
  return guarded([&] {
    const auto g = cpdgrid::port_conductance_matrix(network->value);
    const auto n = g.size();
    if (capacity < n * n) {
      throw cpdgrid::Error(cpdgrid::ErrorCode::DimensionMismatch, "output buffer too small");
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out[i * n + j] = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  });
}

cpdgrid_status cpdgrid_network_injections(const cpdgrid_network* network, double* out,
                                          size_t capacity) {
  CPDGRID_REQUIRE(network);
  CPDGRID_REQUIRE(out);
  return guarded([&] {
    const auto p = network->value.injection_vector();
    if (capacity < static_cast<std::size_t>(p.size())) {
      throw cpdgrid::Error(cpdgrid::ErrorCode::DimensionMismatch, "output buffer too small");
    }
    for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = p(i);
  });
}

cpdgrid_status cpdgrid_network_feasibility(const cpdgrid_network* network, int32_t* feasible) {
  CPDGRID_REQUIRE(network);
  CPDGRID_REQUIRE(feasible);
  return guarded([&] {
    *feasible = cpdgrid::feasibility_precheck(network->value.injection_vector()) ==
                        cpdgrid::Feasibility::Feasible
                    ? 1
                    : 0;
  });
}

void cpdgrid_solver_options_init(cpdgrid_solver_options* options) {
  if (options == nullptr) return;
  const cpdgrid::SolverOptions defaults;
  options->tol_watts = 0.0;
  options->max_iter = defaults.max_iter;
  options->n_starts = defaults.n_starts;
  options->seed = defaults.seed;
  options->threads = defaults.threads;
}

cpdgrid_status cpdgrid_solve(const cpdgrid_network* network, const cpdgrid_solver_options* options,
                             cpdgrid_solution_set** out) {
  CPDGRID_REQUIRE(network);
  CPDGRID_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const auto ports = cpdgrid::reduce_network(network->value);
    const auto g = cpdgrid::build_conductance_matrix(ports);
    *out = new cpdgrid_solution_set{
        cpdgrid::solve_operating_point(g, ports.injection_vector(), to_options(options))};
  });
}

void cpdgrid_solution_set_free(cpdgrid_solution_set* set) { delete set; }

cpdgrid_solve_status cpdgrid_solution_set_status(const cpdgrid_solution_set* set) {
  return set != nullptr ? to_c(set->value.status) : CPDGRID_SOLVE_NO_CONVERGENCE;
}

size_t cpdgrid_solution_set_count(const cpdgrid_solution_set* set) {
  return set != nullptr ? set->value.points.size() : 0;
}

cpdgrid_status cpdgrid_solution_set_voltages(const cpdgrid_solution_set* set, size_t index,
                                             double* out, size_t capacity) {
  CPDGRID_REQUIRE(set);
  CPDGRID_REQUIRE(out);
  if (index >= set->value.points.size()) {
    return fail(CPDGRID_ERR_INVALID_ARGUMENT, "solution index out of range");
  }
  const auto& v = set->value.points[index].v;
  if (capacity < static_cast<std::size_t>(v.size())) {
    return fail(CPDGRID_ERR_DIMENSION_MISMATCH, "output buffer too small");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
  return CPDGRID_OK;
}

cpdgrid_status cpdgrid_solution_set_info(const cpdgrid_solution_set* set, size_t index,
                                         cpdgrid_point_info* out) {
  CPDGRID_REQUIRE(set);
  CPDGRID_REQUIRE(out);
  if (index >= set->value.points.size()) {
    return fail(CPDGRID_ERR_INVALID_ARGUMENT, "solution index out of range");
  }
  const auto& p = set->value.points[index];
  out->v0 = p.v0;
  out->x_inf = p.x.lpNorm<Eigen::Infinity>();
  out->residual_norm = p.residual_norm;
  out->iterations = p.iterations;
  out->start_index = p.start_index;
  return CPDGRID_OK;
}

cpdgrid_status cpdgrid_certify(const cpdgrid_network* network, cpdgrid_certificate_kind kind,
                               cpdgrid_certificate* out) {
  CPDGRID_REQUIRE(network);
  CPDGRID_REQUIRE(out);
  return guarded([&] {
    const auto summary = cpdgrid::summarize_spectrum(network->value);
    const auto power = cpdgrid::decompose_power(network->value.injection_vector());
    const auto c = cpdgrid::make_certificate(kind == CPDGRID_CERT_SPECTRAL
                                                 ? cpdgrid::CertificateKind::Spectral
                                                 : cpdgrid::CertificateKind::InfNorm,
                                             summary, power);
    out->kind = kind;
    out->delta = c.delta;
    out->v_min = c.v_min;
    out->x_max = c.x_max;
    out->applicable = c.applicable ? 1 : 0;
    out->reason = static_cast<int32_t>(c.reason);
    out->p_par = c.p_par;
    out->perp_norm = c.perp_norm;
    out->scale_high = c.scale_high;
    out->scale_low = c.scale_low;
  });
}

cpdgrid_verdict cpdgrid_check_membership(const cpdgrid_certificate* certificate, double v0,
                                         double x_inf) {
  if (certificate == nullptr) return CPDGRID_NOT_APPLICABLE;
  switch (cpdgrid::check_membership(from_c(*certificate), v0, x_inf).verdict) {
    case cpdgrid::Verdict::Inside: return CPDGRID_INSIDE;
    case cpdgrid::Verdict::Outside: return CPDGRID_OUTSIDE;
    case cpdgrid::Verdict::NotApplicable: return CPDGRID_NOT_APPLICABLE;
  }
  return CPDGRID_NOT_APPLICABLE;
}

cpdgrid_status cpdgrid_twoport_solve(double g, double p1, double p2, cpdgrid_twoport_result* out) {
  CPDGRID_REQUIRE(out);
  return guarded([&] {
    const auto r = cpdgrid::two_port_solve(g, p1, p2);
    *out = cpdgrid_twoport_result{};
    out->has_solution = r.status == cpdgrid::TwoPortStatus::HighVoltageSolution ? 1 : 0;
    out->p_par = r.p_par;
    out->perp_norm1 = r.perp_l1;
    out->ratio = r.ratio;
    if (out->has_solution) {
      out->v1 = r.point.v(0);
      out->v2 = r.point.v(1);
      out->v0 = r.point.v0;
      out->x_max = r.ratio;
    }
  });
}

cpdgrid_status cpdgrid_report_solve(const cpdgrid_network* network,
                                    const cpdgrid_solver_options* options, cpdgrid_format format,
                                    int32_t include_timing, cpdgrid_solve_status* solve_status,
                                    cpdgrid_string** out) {
  CPDGRID_REQUIRE(network);
  CPDGRID_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto report = cpdgrid::solve_report(network->value, to_options(options), to_format(format),
                                        include_timing != 0);
    if (solve_status != nullptr) *solve_status = to_c(report.status);
    *out = new cpdgrid_string{std::move(report.text)};
  });
}

cpdgrid_status cpdgrid_report_certify(const cpdgrid_network* network, cpdgrid_format format,
                                      cpdgrid_string** out) {
  CPDGRID_REQUIRE(network);
  CPDGRID_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = new cpdgrid_string{cpdgrid::certify_report(network->value, to_format(format))};
  });
}

cpdgrid_status cpdgrid_report_twoport(double g, double p1, double p2, cpdgrid_format format,
                                      int32_t* has_solution, cpdgrid_string** out) {
  CPDGRID_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const auto r = cpdgrid::two_port_solve(g, p1, p2);
    if (has_solution != nullptr) {
      *has_solution = r.status == cpdgrid::TwoPortStatus::HighVoltageSolution ? 1 : 0;
    }
    *out = new cpdgrid_string{cpdgrid::twoport_report(g, p1, p2, r, to_format(format))};
  });
}

cpdgrid_status cpdgrid_sweep_run(const char* config_json, const char* out_dir,
                                 cpdgrid_sweep_summary* summary) {
  return guarded([&] {
    const auto config = config_json != nullptr ? cpdgrid::parse_sweep_config(config_json)
                                               : cpdgrid::SweepConfig{};
    const auto report = cpdgrid::run_sweep(config);
    if (out_dir != nullptr) cpdgrid::write_sweep_report(report, out_dir);
    if (summary != nullptr) {
      summary->rows = static_cast<int32_t>(report.rows.size());
      summary->generation_failures = static_cast<int32_t>(report.generation_failures.size());
      summary->no_convergence = report.no_convergence;
      summary->points_total = report.points_total;
      summary->spectral_applicable = report.spectral.applicable_instances;
      summary->spectral_violations = report.spectral.violations;
      summary->infnorm_applicable = report.infnorm.applicable_instances;
      summary->infnorm_violations = report.infnorm.violations;
    }
  });
}

}  // extern "C"
