/* Full-swap decay of |1><1| through the C API. */
#include <math.h>
#include <stdio.h>
#include "qcollide.h"

int main(void) {
    QcSpec *spec = NULL;
    QcSeries *series = NULL;
    const double rho0[8] = {0, 0, 0, 0, 0, 0, 1, 0};
    const double times[3] = {0.0, 0.5, 1.0};
    double rho[8];

    if (qc_spec_new_partial_swap(2, 1.5707963267948966, 0, 1.0, &spec) != QC_STATUS_OK) {
        fprintf(stderr, "spec: %s\n", qc_last_error_message());
        return 1;
    }
    if (qc_integrate_me(spec, rho0, times, 3, 1e-3, QC_RHS_FORM_KRAUS, &series) != QC_STATUS_OK) {
        fprintf(stderr, "integrate: %s\n", qc_last_error_message());
        return 1;
    }
    for (size_t k = 0; k < qc_series_len(series); k++) {
        qc_series_state(series, k, rho, 8);
        double err = fabs(rho[6] - exp(-times[k]));
        printf("t=%.2f p1=%.12f err=%.2e\n", times[k], rho[6], err);
        if (err > 1e-8) return 2;
    }
    if (qc_spec_new_partial_swap(2, 0.3, 5, 1.0, &spec) == QC_STATUS_OK) return 3;
    printf("expected error: %s\n", qc_last_error_message());

    qc_series_free(series);
    qc_spec_free(spec);
    return 0;
}
