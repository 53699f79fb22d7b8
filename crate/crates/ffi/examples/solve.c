#include <stdio.h>
#include "ptlplan.h"

int main(void) {
    PtlInstance *inst = NULL;
    if (ptl_instance_generate(1, 500.0, 4, 200.0, &inst) != PTL_STATUS_OK) {
        fprintf(stderr, "generate: %s\n", ptl_last_error());
        return 1;
    }
    PtlSolverConfig cfg = ptl_solver_config_default();
    PtlPlan *plan = NULL;
    if (ptl_solve(inst, &cfg, &plan) != PTL_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", ptl_last_error());
        ptl_instance_free(inst);
        return 1;
    }
    double cost = 0.0;
    ptl_plan_cost(plan, &cost);
    printf("segments=%zu tours=%zu cost=%.3f feasible=%d\n", ptl_instance_segment_count(inst),
           ptl_plan_tour_count(plan), cost, ptl_plan_feasible(plan));
    double window = 0.0, t_star = 0.0;
    if (ptl_compute_window(plan, &cfg, 0.0, &window, &t_star) == PTL_STATUS_OK)
        printf("window=%.2f%% t_star=%.1f\n", window, t_star);
    ptl_plan_free(plan);
    ptl_instance_free(inst);
    return 0;
}
