#ifndef PTLPLAN_H
#define PTLPLAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtlCostKind {
  PTL_COST_KIND_MIN_MAX = 0,
  PTL_COST_KIND_C_MIN_SUM = 1,
  PTL_COST_KIND_COMBINED = 2,
} PtlCostKind;

typedef enum PtlStatus {
  PTL_STATUS_OK = 0,
  PTL_STATUS_NULL_POINTER = 1,
  PTL_STATUS_INVALID_ARGUMENT = 2,
  PTL_STATUS_INVALID_INPUT = 3,
  PTL_STATUS_REFUSED = 4,
  PTL_STATUS_IO = 5,
  PTL_STATUS_INTERNAL = 6,
} PtlStatus;

typedef struct PtlInstance PtlInstance;

typedef struct PtlPlan PtlPlan;

typedef struct PtlSolverConfig {
  uint32_t restarts;
  double rcl_alpha;
  uint64_t seed;
  enum PtlCostKind cost_function;
  double k_c;
} PtlSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *ptl_last_error(void);

struct PtlSolverConfig ptl_solver_config_default(void);

/**
 * # Safety
 * `json` must be a nul-terminated string and `out_instance` a valid pointer.
 */
enum PtlStatus ptl_instance_from_json(const char *json, struct PtlInstance **out_instance);

/**
 * Generates a synthetic instance with default generator parameters.
 *
 * # Safety
 * `out_instance` must be a valid pointer.
 */
enum PtlStatus ptl_instance_generate(uint64_t seed,
                                     double d_max,
                                     uint32_t n_vehicles,
                                     double budget_percent,
                                     struct PtlInstance **out_instance);

/**
 * # Safety
 * `instance` must be null or a handle from this library.
 */
void ptl_instance_free(struct PtlInstance *instance);

/**
 * Number of segments, or 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or a valid handle.
 */
size_t ptl_instance_segment_count(const struct PtlInstance *instance);

/**
 * # Safety
 * `instance` must be a valid handle and `out_json` a valid pointer.
 */
enum PtlStatus ptl_instance_to_json(const struct PtlInstance *instance, char **out_json);

/**
 * Solves the instance. `config` may be null for defaults. An infeasible
 * plan is still returned; check `ptl_plan_feasible`.
 *
 * # Safety
 * Pointers must be valid; `config` may be null.
 */
enum PtlStatus ptl_solve(const struct PtlInstance *instance,
                         const struct PtlSolverConfig *config,
                         struct PtlPlan **out_plan);

/**
 * # Safety
 * `plan` must be null or a handle from this library.
 */
void ptl_plan_free(struct PtlPlan *plan);

/**
 * # Safety
 * `plan` must be a valid handle and `out_cost` a valid pointer.
 */
enum PtlStatus ptl_plan_cost(const struct PtlPlan *plan, double *out_cost);

/**
 * 1 if every tour is within budget and coverage is exact, 0 otherwise or
 * for a null handle.
 *
 * # Safety
 * `plan` must be null or a valid handle.
 */
int32_t ptl_plan_feasible(const struct PtlPlan *plan);

/**
 * # Safety
 * `plan` must be null or a valid handle.
 */
size_t ptl_plan_tour_count(const struct PtlPlan *plan);

/**
 * Battery cost (percent) of tour `index`.
 *
 * # Safety
 * `plan` must be a valid handle and `out_cost` a valid pointer.
 */
enum PtlStatus ptl_plan_tour_cost(const struct PtlPlan *plan, size_t index, double *out_cost);

/**
 * Plan in the same JSON format the command-line tool writes.
 *
 * # Safety
 * `plan` must be a valid handle and `out_json` a valid pointer.
 */
enum PtlStatus ptl_plan_to_json(const struct PtlPlan *plan, char **out_json);

/**
 * Re-plan window of a feasible plan. `dt <= 0` selects the default grid.
 * `config` (may be null) controls the re-plans.
 *
 * # Safety
 * `plan` must be a valid handle, out pointers valid; `config` may be null.
 */
enum PtlStatus ptl_compute_window(const struct PtlPlan *plan,
                                  const struct PtlSolverConfig *config,
                                  double dt,
                                  double *out_window_percent,
                                  double *out_t_star);

/**
 * Evaluates a cost function over `n` tour costs.
 *
 * # Safety
 * `costs` must point to `n` doubles and `out_value` be valid.
 */
enum PtlStatus ptl_cost_evaluate(enum PtlCostKind kind,
                                 const double *costs,
                                 size_t n,
                                 double c_max,
                                 double k_c,
                                 double *out_value);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void ptl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PTLPLAN_H */
