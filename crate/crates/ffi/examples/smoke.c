/* Minimal C consumer: reproduces the duplicate-key histogram. */
#include <stdio.h>
#include "pbv.h"

int main(void) {
    PbvKeySet *keys = NULL;
    PbvCircuit *circuit = NULL;
    double probs[8];
    uint64_t counts[8];
    char msg[256];

    if (pbv_keyset_parse("010,011,011,101", &keys) != PBV_STATUS_OK) {
        pbv_last_error_message(msg, sizeof msg);
        fprintf(stderr, "parse failed: %s\n", msg);
        return 1;
    }
    if (pbv_circuit_run(keys, PBV_ORACLE_PATH_GATE, &circuit) != PBV_STATUS_OK) {
        return 1;
    }
    pbv_circuit_distribution(circuit, probs, 8);
    pbv_circuit_sample(circuit, 1024, 7, counts, 8);
    for (int x = 0; x < 8; x++) {
        if (probs[x] > 1e-12) {
            printf("%d%d%d %.6f %llu\n", (x >> 2) & 1, (x >> 1) & 1, x & 1, probs[x],
                   (unsigned long long)counts[x]);
        }
    }
    if (pbv_keyset_parse("01x", &keys) == PBV_STATUS_INVALID_INPUT) {
        pbv_last_error_message(msg, sizeof msg);
        printf("error: %s\n", msg);
    }
    pbv_circuit_free(circuit);
    pbv_keyset_free(keys);
    return 0;
}
