/* SPDX-License-Identifier: Apache-2.0 */
#include <stdio.h>
#include <stdlib.h>

#include "qbcharge.h"

int main(void) {
    QbScenario *sc = NULL;
    QbTrajectory *tr = NULL;
    if (qb_scenario_new(10000000, 1, 100, 1.0, 0.0, &sc) != QB_STATUS_OK) {
        fprintf(stderr, "new: %s\n", qb_last_error_message());
        return 1;
    }
    if (qb_integrate(sc, QB_METHOD_MEANFIELD, &tr) != QB_STATUS_OK) {
        fprintf(stderr, "integrate: %s\n", qb_last_error_message());
        return 1;
    }
    double e_b = 0.0;
    if (qb_trajectory_steady_state(tr, 1, 0.2, 1e-3, &e_b) != QB_STATUS_OK) {
        fprintf(stderr, "steady: %s\n", qb_last_error_message());
        return 1;
    }
    size_t n = qb_trajectory_len(tr);
    double *buf = malloc(n * sizeof(double));
    QbStatus st = qb_trajectory_energies(tr, 1, buf, n);
    double last = buf[n - 1];
    free(buf);
    qb_trajectory_free(tr);

    QbStatus cap = qb_integrate(sc, QB_METHOD_EXACT, &tr);
    qb_scenario_free(sc);
    printf("%zu %.6f %.6f %d %d\n", n, e_b, last, (int)st, (int)cap);
    return 0;
}
