#include <stdio.h>
#include "dnflow.h"

int main(void) {
    DnflowBundle *b = NULL;
    DnflowStatus st = dnflow_bundle_new("{\"N\": 3, \"p\": 2, \"m\": 2, \"alpha\": 1, \"r_max\": 1000, \"nodes\": 256}", &b);
    if (st != DNFLOW_STATUS_OK) {
        fprintf(stderr, "bundle: %d %s\n", st, dnflow_last_error_message());
        return 1;
    }
    double v = 0.0;
    if (dnflow_bundle_volume(b, 1.0, &v) != DNFLOW_STATUS_OK) return 2;
    DnflowSimulation *sim = NULL;
    if (dnflow_simulation_new(b, "{\"grid\": {\"kind\": \"uniform\", \"cells\": 64, \"r_max\": 8}}", 1.0, 1.0, &sim) != DNFLOW_STATUS_OK) {
        fprintf(stderr, "sim: %s\n", dnflow_last_error_message());
        return 3;
    }
    if (dnflow_simulation_run(sim, 0.5) != DNFLOW_STATUS_OK) return 4;
    DnflowObservation o;
    if (dnflow_simulation_observe(sim, &o) != DNFLOW_STATUS_OK) return 5;
    if (dnflow_bundle_volume(b, -1.0, &v) == DNFLOW_STATUS_OK) return 6;
    printf("%.17g %.17g %.17g\n", o.t, o.mass, v);
    dnflow_simulation_free(sim);
    dnflow_bundle_free(b);
    return 0;
}
