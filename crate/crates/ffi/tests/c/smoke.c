#include <math.h>
#include <stdio.h>
#include <string.h>

#include "smartcar.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,   \
                    __LINE__, #cond);                                \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    double deg = 0.0;
    CHECK(smartcar_nmea_validate_checksum(
        "$GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,003.1,W*6A"));
    CHECK(smartcar_nmea_to_decimal_degrees("4807.038", 'N', &deg) == SMARTCAR_STATUS_OK);
    CHECK(fabs(deg - 48.1173) < 1e-9);
    CHECK(smartcar_nmea_to_decimal_degrees("4867.000", 'N', &deg) ==
          SMARTCAR_STATUS_INVALID_COORDINATE);
    CHECK(smartcar_last_error() != NULL);

    SmartcarController *ctrl = smartcar_controller_new(NULL);
    char *actions = NULL;
    CHECK(smartcar_controller_receive_sms(ctrl, "+15550123", "HELP", 0, &actions) ==
          SMARTCAR_STATUS_OK);
    CHECK(strstr(actions, "REPLY dest=+15550123") != NULL);
    smartcar_string_free(actions);

    SmartcarSensorFrame frame = {0};
    frame.alcohol_raw = 900;
    frame.temp_c = 25.0;
    frame.humidity_pct = 50;
    CHECK(smartcar_controller_step_frame(ctrl, &frame, 0, &actions) == SMARTCAR_STATUS_OK);
    CHECK(strstr(actions, "ENGINE DISABLED") != NULL);
    smartcar_string_free(actions);
    SmartcarControllerStatus status;
    CHECK(smartcar_controller_status(ctrl, &status) == SMARTCAR_STATUS_OK);
    CHECK(!status.engine_enabled);
    smartcar_controller_free(ctrl);

    SmartcarReport *report = NULL;
    CHECK(smartcar_run_scenario("t=0 panic 1\n", NULL, 5000, &report) == SMARTCAR_STATUS_OK);
    CHECK(smartcar_report_delivered_count(report) == 1);
    CHECK(smartcar_report_violation_count(report) == 0);
    char *text = NULL;
    CHECK(smartcar_report_text(report, &text) == SMARTCAR_STATUS_OK);
    CHECK(strncmp(text, "SMARTCAR-REPORT 1\n", 18) == 0);
    smartcar_string_free(text);
    smartcar_report_free(report);

    puts("ok");
    return 0;
}
