#include <stdio.h>
#include <string.h>

#include "botlc.h"

int main(void) {
    BotlcScenario *s = NULL;
    BotlcTrajectory *t = NULL;
    BotlcSample last;

    if (botlc_scenario_load("sv_proposed", &s) != BOTLC_STATUS_OK) {
        fprintf(stderr, "load: %s\n", botlc_last_error_message());
        return 10;
    }
    if (botlc_scenario_set_t_end(s, 1.0) != BOTLC_STATUS_OK) return 11;
    if (botlc_run(s, &t) != BOTLC_STATUS_OK) return 12;
    size_t n = botlc_trajectory_len(t);
    if (n != 1001) return 13;
    if (botlc_trajectory_sample(t, n - 1, &last) != BOTLC_STATUS_OK) return 14;
    if (botlc_trajectory_sample(t, n, &last) != BOTLC_STATUS_INDEX_OUT_OF_RANGE) return 15;
    if (botlc_check(s, t) != BOTLC_STATUS_OK) return 16;
    printf("%s %zu %.6f %.3e\n", botlc_version(), n, last.t, last.xtilde_norm);
    botlc_trajectory_free(t);
    botlc_scenario_free(s);

    if (botlc_scenario_from_toml("name = ", &s) != BOTLC_STATUS_CONFIG_ERROR) return 17;
    if (s != NULL || botlc_last_error_message() == NULL) return 18;
    return 0;
}
