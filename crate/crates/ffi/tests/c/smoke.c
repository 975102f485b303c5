#include <math.h>
#include <stdio.h>
#include "resrig.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,    \
                    rr_last_error_message());                         \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    RrResonanceSet *set = NULL;
    CHECK(rr_ball_resonances(3, 1.0, 2, RR_BC_NEUMANN, &set) == RR_STATUS_OK);

    size_t n = 0;
    uint64_t total = 0;
    CHECK(rr_resonance_set_len(set, &n) == RR_STATUS_OK && n == 6);
    CHECK(rr_resonance_set_total_multiplicity(set, &total) == RR_STATUS_OK && total == 22);

    RrResonance r;
    CHECK(rr_resonance_set_get(set, 0, &r) == RR_STATUS_OK);
    CHECK(r.mode == 0 && fabs(r.im + 1.0) < 1e-15);
    CHECK(rr_resonance_set_get(set, 6, &r) == RR_STATUS_OUT_OF_RANGE);
    rr_resonance_set_free(set);

    double inv[3];
    CHECK(rr_sphere_invariants(3, 1.0, 2, inv) == RR_STATUS_OK);
    RrIdentifyResult id;
    CHECK(rr_identify(3, inv, 1e-9, &id) == RR_STATUS_OK);
    CHECK(id.is_union_of_equal_balls && id.m == 2 && fabs(id.rho - 1.0) < 1e-12);

    CHECK(rr_ball_resonances(4, 1.0, 2, RR_BC_NEUMANN, &set) == RR_STATUS_INVALID_ARGUMENT);
    printf("ok %s\n", rr_version());
    return 0;
}
