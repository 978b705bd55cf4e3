/*
 * cpdgrid C API.
 *
 * Operating points and operating-region certificates of resistive DC
 * networks whose ports are terminated by constant-power devices.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a cpdgrid_status;
 * on failure, cpdgrid_last_error() returns a message for the calling thread
 * that stays valid until the next failing call on that thread.
 */
#ifndef CPDGRID_H
#define CPDGRID_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CPDGRID_BUILDING_LIBRARY)
#    define CPDGRID_API __declspec(dllexport)
#  else
#    define CPDGRID_API __declspec(dllimport)
#  endif
#else
#  define CPDGRID_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpdgrid_status {
  CPDGRID_OK = 0,
  CPDGRID_ERR_INVALID_ARGUMENT = 1,
  CPDGRID_ERR_PARSE = 2,
  CPDGRID_ERR_UNKNOWN_NODE = 3,
  CPDGRID_ERR_SELF_LOOP = 4,
  CPDGRID_ERR_DUPLICATE_BRANCH = 5,
  CPDGRID_ERR_NONPOSITIVE_CONDUCTANCE = 6,
  CPDGRID_ERR_DISCONNECTED_GRAPH = 7,
  CPDGRID_ERR_INTERIOR_NODE_HAS_INJECTION = 8,
  CPDGRID_ERR_SINGULAR_INTERIOR_BLOCK = 9,
  CPDGRID_ERR_EIGEN_SOLVER_FAILURE = 10,
  CPDGRID_ERR_DISCONNECTED_SPECTRUM = 11,
  CPDGRID_ERR_ZERO_MEAN_VOLTAGE = 12,
  CPDGRID_ERR_DEVIATION_NOT_ORTHOGONAL = 13,
  CPDGRID_ERR_DIMENSION_MISMATCH = 14,
  CPDGRID_ERR_JACOBIAN_SINGULAR = 15,
  CPDGRID_ERR_EQUAL_POWERS = 16,
  CPDGRID_ERR_CERTIFICATE_INAPPLICABLE_AT_BASE = 17,
  CPDGRID_ERR_GENERATION_FAILED = 18,
  CPDGRID_ERR_IO = 19,
  CPDGRID_ERR_INTERNAL = 99
} cpdgrid_status;

typedef enum cpdgrid_format { CPDGRID_FORMAT_JSON = 0, CPDGRID_FORMAT_CSV = 1 } cpdgrid_format;

typedef enum cpdgrid_solve_status {
  CPDGRID_SOLVE_CONVERGED = 0,
  CPDGRID_SOLVE_NO_CONVERGENCE = 1,
  CPDGRID_SOLVE_INFEASIBLE = 2,
  CPDGRID_SOLVE_DEGENERATE = 3
} cpdgrid_solve_status;

typedef enum cpdgrid_certificate_kind {
  CPDGRID_CERT_SPECTRAL = 0,
  CPDGRID_CERT_INF_NORM = 1
} cpdgrid_certificate_kind;

typedef enum cpdgrid_verdict {
  CPDGRID_INSIDE = 0,
  CPDGRID_OUTSIDE = 1,
  CPDGRID_NOT_APPLICABLE = 2
} cpdgrid_verdict;

typedef struct cpdgrid_network cpdgrid_network;
typedef struct cpdgrid_solution_set cpdgrid_solution_set;
typedef struct cpdgrid_string cpdgrid_string;

typedef struct cpdgrid_solver_options {
  double tol_watts; /* <= 0: 1e-9 * max(1, ||P||_inf) */
  int32_t max_iter;
  int32_t n_starts;
  uint64_t seed;
  int32_t threads;
} cpdgrid_solver_options;

typedef struct cpdgrid_certificate {
  cpdgrid_certificate_kind kind;
  double delta;
  double v_min;
  double x_max;
  int32_t applicable;
  int32_t reason; /* 0 applicable, 1 negative losses, 2 zero losses,
                     3 zero perp power, 4 losses exceed transfer,
                     5 delta too large */
  double p_par;
  double perp_norm;  /* ||P_perp||_2 or ||P_perp||_inf */
  double scale_high; /* lambda_n or ||G||_inf */
  double scale_low;  /* lambda_2 or g_min */
} cpdgrid_certificate;

typedef struct cpdgrid_point_info {
  double v0;
  double x_inf;
  double residual_norm;
  int32_t iterations;
  int32_t start_index;
} cpdgrid_point_info;

typedef struct cpdgrid_twoport_result {
  int32_t has_solution;
  double p_par;
  double perp_norm1;
  double ratio;
  double v1;
  double v2;
  double v0;
  double x_max;
} cpdgrid_twoport_result;

typedef struct cpdgrid_sweep_summary {
  int32_t rows;
  int32_t generation_failures;
  int32_t no_convergence;
  int32_t points_total;
  int32_t spectral_applicable;
  int32_t spectral_violations;
  int32_t infnorm_applicable;
  int32_t infnorm_violations;
} cpdgrid_sweep_summary;

CPDGRID_API const char* cpdgrid_version(void);
CPDGRID_API const char* cpdgrid_last_error(void);

/* Owned strings returned by report functions. */
CPDGRID_API const char* cpdgrid_string_data(const cpdgrid_string* s);
CPDGRID_API size_t cpdgrid_string_size(const cpdgrid_string* s);
CPDGRID_API void cpdgrid_string_free(cpdgrid_string* s);

/* Networks. */
CPDGRID_API cpdgrid_status cpdgrid_network_parse(const char* json, cpdgrid_network** out);
CPDGRID_API cpdgrid_status cpdgrid_network_load(const char* path, cpdgrid_network** out);
CPDGRID_API void cpdgrid_network_free(cpdgrid_network* network);
CPDGRID_API size_t cpdgrid_network_port_count(const cpdgrid_network* network);
/* Port-only equivalent network (Kron reduction of the interior nodes). */
CPDGRID_API cpdgrid_status cpdgrid_network_reduce(const cpdgrid_network* network,
                                                  cpdgrid_network** out);
CPDGRID_API cpdgrid_status cpdgrid_network_to_json(const cpdgrid_network* network,
                                                   cpdgrid_string** out);
/* Port conductance matrix, row-major, `capacity` >= ports². */
CPDGRID_API cpdgrid_status cpdgrid_network_conductance(const cpdgrid_network* network,
                                                       double* out, size_t capacity);
CPDGRID_API cpdgrid_status cpdgrid_network_injections(const cpdgrid_network* network,
                                                      double* out, size_t capacity);
/* *feasible = 0 when the total injected power is negative. */
CPDGRID_API cpdgrid_status cpdgrid_network_feasibility(const cpdgrid_network* network,
                                                       int32_t* feasible);

/* Solving. */
CPDGRID_API void cpdgrid_solver_options_init(cpdgrid_solver_options* options);
CPDGRID_API cpdgrid_status cpdgrid_solve(const cpdgrid_network* network,
                                         const cpdgrid_solver_options* options,
                                         cpdgrid_solution_set** out);
CPDGRID_API void cpdgrid_solution_set_free(cpdgrid_solution_set* set);
CPDGRID_API cpdgrid_solve_status cpdgrid_solution_set_status(const cpdgrid_solution_set* set);
CPDGRID_API size_t cpdgrid_solution_set_count(const cpdgrid_solution_set* set);
CPDGRID_API cpdgrid_status cpdgrid_solution_set_voltages(const cpdgrid_solution_set* set,
                                                         size_t index, double* out,
                                                         size_t capacity);
CPDGRID_API cpdgrid_status cpdgrid_solution_set_info(const cpdgrid_solution_set* set,
                                                     size_t index, cpdgrid_point_info* out);

/* Certificates. */
CPDGRID_API cpdgrid_status cpdgrid_certify(const cpdgrid_network* network,
                                           cpdgrid_certificate_kind kind,
                                           cpdgrid_certificate* out);
CPDGRID_API cpdgrid_verdict cpdgrid_check_membership(const cpdgrid_certificate* certificate,
                                                     double v0, double x_inf);

/* Two-port closed form. Fails with CPDGRID_ERR_NONPOSITIVE_CONDUCTANCE, or
 * CPDGRID_ERR_EQUAL_POWERS when P1 == P2 and P1 + P2 > 0; has_solution = 0
 * when the condition fails. */
CPDGRID_API cpdgrid_status cpdgrid_twoport_solve(double g, double p1, double p2,
                                                 cpdgrid_twoport_result* out);

/* Reports (JSON or CSV text). */
CPDGRID_API cpdgrid_status cpdgrid_report_solve(const cpdgrid_network* network,
                                                const cpdgrid_solver_options* options,
                                                cpdgrid_format format, int32_t include_timing,
                                                cpdgrid_solve_status* solve_status,
                                                cpdgrid_string** out);
CPDGRID_API cpdgrid_status cpdgrid_report_certify(const cpdgrid_network* network,
                                                  cpdgrid_format format, cpdgrid_string** out);
CPDGRID_API cpdgrid_status cpdgrid_report_twoport(double g, double p1, double p2,
                                                  cpdgrid_format format, int32_t* has_solution,
                                                  cpdgrid_string** out);

/* Monte Carlo sweep: `config_json` may be NULL for defaults. Writes
 * sweep_rows.csv and sweep_summary.json into out_dir when it is non-NULL. */
CPDGRID_API cpdgrid_status cpdgrid_sweep_run(const char* config_json, const char* out_dir,
                                             cpdgrid_sweep_summary* summary);

#ifdef __cplusplus
}
#endif

#endif /* CPDGRID_H */
