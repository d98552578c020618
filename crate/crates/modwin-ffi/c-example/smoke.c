#include <stdio.h>
#include <string.h>
#include "modwin.h"

static const char *FIVE_USER =
    "{\"users\":["
    "{\"l\":\"2\",\"p\":\"4\",\"r\":\"6\",\"theta\":\"1\"},"
    "{\"l\":\"2\",\"p\":\"5\",\"r\":\"5\",\"theta\":\"1\"},"
    "{\"l\":\"1\",\"p\":\"2\",\"r\":\"5\",\"theta\":\"1\"},"
    "{\"l\":\"2\",\"p\":\"6\",\"r\":\"6\",\"theta\":\"1\"},"
    "{\"l\":\"2\",\"p\":\"3\",\"r\":\"3\",\"theta\":\"1\"}"
    "],\"initial_adopters\":[]}";

int main(void) {
    ModwinPopulation *pop = NULL;
    char *err = NULL;
    if (modwin_population_parse(FIVE_USER, &pop, &err) != MODWIN_STATUS_OK) {
        fprintf(stderr, "parse failed: %s\n", err ? err : "?");
        return 1;
    }
    if (modwin_population_len(pop) != 5) return 2;

    char *lcc = NULL;
    if (modwin_lcc_exact(pop, &lcc, &err) != MODWIN_STATUS_OK) return 3;
    if (!strstr(lcc, "\"size\": 3")) { fprintf(stderr, "lcc: %s\n", lcc); return 4; }
    modwin_string_free(lcc);

    char *report = NULL;
    if (modwin_fair_limit(pop, "[\"2\",\"5\"]", &report, &err) != MODWIN_STATUS_OK) return 5;
    if (!strstr(report, "\"min_size\": 3")) { fprintf(stderr, "fair: %s\n", report); return 6; }
    modwin_string_free(report);

    char *csv = NULL;
    if (modwin_simulate_csv(pop, "[null,null]", 42, 30, &csv, &err) != MODWIN_STATUS_OK) return 7;
    if (strncmp(csv, "t,phase,actor,action,size\n", 26) != 0) return 8;
    modwin_string_free(csv);

    /* error path: malformed window */
    char *out = NULL;
    if (modwin_fair_limit(pop, "nonsense", &out, &err) != MODWIN_STATUS_VALIDATION) return 9;
    modwin_string_free(err);

    modwin_population_free(pop);
    printf("ffi smoke ok\n");
    return 0;
}
