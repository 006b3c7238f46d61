#include <math.h>
#include <stdio.h>
#include "holoflow.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (line %d)\n", #cond, __LINE__); return 1; } } while (0)

int main(void) {
    const double re[] = {1.0, 0.0, 1.0};
    const double im[] = {0.0, 0.0, 0.0};
    HfPoly *p = NULL;
    CHECK(hf_poly_new(re, im, 3, &p) == HF_STATUS_OK);
    CHECK(hf_poly_degree(p) == 2);

    HfInfinity *inf = NULL;
    CHECK(hf_infinity_analyze(p, &inf) == HF_STATUS_OK);
    CHECK(hf_infinity_count(inf) == 2);
    for (size_t k = 0; k < 2; ++k) {
        HfEquilibrium e;
        CHECK(hf_infinity_get(inf, k, &e) == HF_STATUS_OK);
        CHECK(e.kind == HF_EQUILIBRIUM_KIND_SADDLE);
        CHECK(fabs(e.alpha - e.p_x) < 1e-12);
    }
    HfEquilibrium e;
    CHECK(hf_infinity_get(inf, 7, &e) == HF_STATUS_INDEX_OUT_OF_RANGE);
    char msg[128];
    CHECK(hf_last_error(msg, sizeof msg) > 0);
    hf_infinity_free(inf);

    HfTrajectory *tr = NULL;
    CHECK(hf_integrate(p, 0.0, 0.0, 0.0, 10.0, 0.0, &tr) == HF_STATUS_OK);
    CHECK(hf_trajectory_termination(tr) == HF_TERMINATION_ESCAPED);
    double t, zr, zi;
    CHECK(hf_trajectory_sample(tr, hf_trajectory_len(tr) - 1, &t, &zr, &zi) == HF_STATUS_OK);
    CHECK(fabs(t - 1.5707963267948966) < 1e-4);
    hf_trajectory_free(tr);

    HfOrbit o;
    CHECK(hf_detect_periodic(p, 0.0, 2.0, &o) == HF_STATUS_OK);
    CHECK(o.periodic == 1 && (o.winding == 1 || o.winding == -1));
    hf_poly_free(p);

    const double ords[] = {14.134725141734693, 21.022039638771555};
    double wr, wi;
    CHECK(hf_xi_continue(ords, 2, 3, 2.0, 20.0, 1.0, 0.0, &wr, &wi) == HF_STATUS_INVALID_ARGUMENT);
    CHECK(hf_xi_continue(ords, 2, 4, 2.0, 20.0, 0.5, 0.0, &wr, &wi) == HF_STATUS_OK);
    puts(hf_status_name(HF_STATUS_BRANCH_POINT_HIT));
    return 0;
}
