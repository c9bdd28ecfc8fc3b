/* Minimal C consumer: build the corpus scale, score one supplier.
 *
 *   cargo build -p phi-ffi
 *   cc examples/demo.c -Iinclude -L../../target/debug -lphi_ffi -lm -o demo
 *   LD_LIBRARY_PATH=../../target/debug ./demo
 */
#include "phi.h"
#include <stdio.h>

int main(void) {
    printf("phi %s\n", phi_version());

    double corpus[500];
    for (int i = 0; i < 400; i++) corpus[i] = 100.0 + (i % 40);
    for (int i = 0; i < 100; i++) corpus[400 + i] = 5000.0 + (i % 25) * 8.0;

    double median = 0.0, iqr = 0.0;
    PhiStatus status = phi_global_scale(corpus, 500, &median, &iqr);
    if (status != PHI_STATUS_OK) {
        fprintf(stderr, "scale failed: %s\n", phi_status_name(status));
        return 1;
    }

    PhiScorer *scorer = phi_scorer_default();
    PhiBreakdown out;
    status = phi_score_sample(scorer, corpus, 500, median, iqr, &out);
    phi_scorer_free(scorer);
    if (status != PHI_STATUS_OK) {
        fprintf(stderr, "scoring failed: %s\n", phi_status_name(status));
        return 1;
    }

    printf("M=%u A=%.3f T=%.3f D=%.3f score=%.3f\n",
           out.modality, out.asymmetry, out.tail, out.dispersion, out.phi);
    printf("shares: M %.1f%% A %.1f%% T %.1f%% D %.1f%%\n",
           out.contrib_modality_pct, out.contrib_asymmetry_pct,
           out.contrib_tail_pct, out.contrib_dispersion_pct);
    return 0;
}
