#include <stdio.h>
#include <string.h>
#include "pseudopower.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        PpStatus status_ = (call);                                         \
        if (status_ != PP_STATUS_OK) {                                     \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)status_,   \
                    pp_last_error());                                      \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    PpModel *model = NULL;
    PpSeries *series = NULL;
    CHECK(pp_model_from_json("{\"family\": \"block-transfer\", \"n\": 20, \"g\": \"2\"}", &model));
    CHECK(pp_model_evolve(model, "exact", PP_VECTORS_SPECIAL, 0, 22, &series));
    size_t len = 0;
    CHECK(pp_series_len(series, &len));
    uint64_t t = 0;
    double re = 0.0, im = 0.0;
    CHECK(pp_series_sample(series, 10, &t, &re, &im));
    char *exact_re = NULL, *exact_im = NULL;
    CHECK(pp_series_sample_exact(series, 22, &exact_re, &exact_im));
    printf("len=%zu t=%llu re=%.17g f22=%s\n", len, (unsigned long long)t, re, exact_re);
    int ok = len == 23 && t == 10 && strcmp(exact_re, "1") == 0 && strcmp(exact_im, "0") == 0;
    pp_string_free(exact_re);
    pp_string_free(exact_im);
    pp_series_free(series);

    if (pp_model_evolve(model, "big:7", PP_VECTORS_SPECIAL, 0, 4, &series) != PP_STATUS_INVALID_ARGUMENT) {
        return 1;
    }
    ok = ok && strlen(pp_last_error()) > 0;
    pp_model_free(model);
    return ok ? 0 : 1;
}
