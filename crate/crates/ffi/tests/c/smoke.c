#include <math.h>
#include <stdio.h>
#include "parageo.h"

int main(void) {
    ParageoMetric *m = NULL;
    if (parageo_metric_builtin("sphere_stereographic", 3, 0, NULL, &m) != PARAGEO_STATUS_OK) {
        fprintf(stderr, "builtin: %s\n", parageo_last_error());
        return 1;
    }
    double x[3] = {0.0, 0.0, 0.0};
    double g[9], scal;
    if (parageo_metric_tensors(m, x, g, NULL, NULL, &scal, NULL) != PARAGEO_STATUS_OK) return 2;
    if (fabs(g[0] - 4.0) > 1e-14 || fabs(scal - 6.0) > 1e-12) return 3;

    double y0[9] = {0.1, 0.2, 0.0, 0.5, 0.0, 0.1, 0.0, 0.1, 0.0};
    ParageoTrajectory *t = NULL;
    if (parageo_integrate(m, PARAGEO_SYSTEM_CONFORMAL_COUPLED, y0, 0.0, 1.0, 1e-2, 1, &t) != PARAGEO_STATUS_OK) return 4;
    size_t len = parageo_trajectory_len(t);
    if (len != 101 || parageo_trajectory_width(t) != 9) return 5;

    if (parageo_metric_builtin("torus", 3, 0, NULL, &m) != PARAGEO_STATUS_INVALID_ARGUMENT) return 6;
    parageo_trajectory_free(t);
    parageo_metric_free(m);
    printf("ok\n");
    return 0;
}
