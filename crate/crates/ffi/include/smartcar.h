#ifndef SMARTCAR_H
#define SMARTCAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Pass as `until_ms` to [`smartcar_run_scenario`] to use the default horizon.
 */
#define SMARTCAR_DEFAULT_HORIZON UINT64_MAX

typedef enum SmartcarStatus {
  SMARTCAR_STATUS_OK = 0,
  SMARTCAR_STATUS_NULL_POINTER = 1,
  SMARTCAR_STATUS_INVALID_UTF8 = 2,
  SMARTCAR_STATUS_INVALID_CONFIG = 3,
  SMARTCAR_STATUS_INVALID_SCENARIO = 4,
  SMARTCAR_STATUS_INVALID_COORDINATE = 5,
  SMARTCAR_STATUS_PANIC = 6,
} SmartcarStatus;

/**
 * Wiper modes as reported by [`SmartcarControllerStatus`].
 */
typedef enum SmartcarWiperMode {
  SMARTCAR_WIPER_MODE_OFF = 0,
  SMARTCAR_WIPER_MODE_INTERMITTENT = 1,
  SMARTCAR_WIPER_MODE_LOW = 2,
  SMARTCAR_WIPER_MODE_HIGH = 3,
} SmartcarWiperMode;

typedef struct SmartcarConfig SmartcarConfig;

typedef struct SmartcarController SmartcarController;

typedef struct SmartcarReport SmartcarReport;

/**
 * One sample of every sensor channel. Analog channels are raw 10-bit counts.
 */
typedef struct SmartcarSensorFrame {
  uint64_t t_ms;
  bool impact;
  bool panic;
  uint16_t alcohol_raw;
  bool rain_wet;
  uint16_t rain_intensity;
  double temp_c;
  uint8_t humidity_pct;
} SmartcarSensorFrame;

typedef struct SmartcarControllerStatus {
  bool engine_enabled;
  enum SmartcarWiperMode wiper_mode;
  double servo_angle_deg;
  /**
   * NaN before the first alcohol sample.
   */
  double alcohol_ema;
  bool has_fix;
  double latitude;
  double longitude;
  /**
   * True while an accident alert waits for a GPS fix.
   */
  bool accident_alert_pending;
} SmartcarControllerStatus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or NULL. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *smartcar_last_error(void);

/**
 * Releases a string returned through an `out_*` parameter.
 *
 * # Safety
 * `text` must be NULL or a pointer obtained from this library that has not
 * been freed yet.
 */
void smartcar_string_free(char *text);

/**
 * Configuration with every key at its default.
 */
struct SmartcarConfig *smartcar_config_new_default(void);

/**
 * Parses `key = value` configuration text and validates it.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out_config` must be writable.
 */
enum SmartcarStatus smartcar_config_load(const char *text, struct SmartcarConfig **out_config);

/**
 * Renders the configuration back to loadable text.
 *
 * # Safety
 * `config` must be a live handle; `out_text` must be writable.
 */
enum SmartcarStatus smartcar_config_to_text(const struct SmartcarConfig *config, char **out_text);

/**
 * # Safety
 * `config` must be NULL or a live handle.
 */
void smartcar_config_free(struct SmartcarConfig *config);

/**
 * New controller in its power-on state. The configuration is copied; NULL
 * selects the defaults.
 *
 * # Safety
 * `config` must be NULL or a live handle.
 */
struct SmartcarController *smartcar_controller_new(const struct SmartcarConfig *config);

/**
 * # Safety
 * `controller` must be NULL or a live handle.
 */
void smartcar_controller_free(struct SmartcarController *controller);

/**
 * Applies one sensor sample. The resulting actions are written to
 * `out_actions`, one per line.
 *
 * # Safety
 * `controller` and `frame` must be valid; `out_actions` must be writable.
 */
enum SmartcarStatus smartcar_controller_step_frame(struct SmartcarController *controller,
                                                   const struct SmartcarSensorFrame *frame,
                                                   uint64_t now_ms,
                                                   char **out_actions);

/**
 * Feeds one NMEA line (with or without CR/LF).
 *
 * # Safety
 * `controller` and `line` must be valid; `out_actions` must be writable.
 */
enum SmartcarStatus smartcar_controller_feed_nmea(struct SmartcarController *controller,
                                                  const char *line,
                                                  uint64_t now_ms,
                                                  char **out_actions);

/**
 * Delivers an inbound SMS; the reply appears as a `REPLY` action.
 *
 * # Safety
 * All pointers must be valid; `out_actions` must be writable.
 */
enum SmartcarStatus smartcar_controller_receive_sms(struct SmartcarController *controller,
                                                    const char *sender,
                                                    const char *body,
                                                    uint64_t now_ms,
                                                    char **out_actions);

/**
 * # Safety
 * `controller` must be a live handle; `out_status` must be writable.
 */
enum SmartcarStatus smartcar_controller_status(const struct SmartcarController *controller,
                                               struct SmartcarControllerStatus *out_status);

/**
 * True iff `line` is a framed NMEA sentence with a matching checksum.
 * NULL yields false.
 *
 * # Safety
 * `line` must be NULL or a NUL-terminated string.
 */
bool smartcar_nmea_validate_checksum(const char *line);

/**
 * Converts an NMEA `ddmm.mmmm` field plus its hemisphere letter
 * (`N`, `S`, `E` or `W`) to signed decimal degrees.
 *
 * # Safety
 * `raw` must be a NUL-terminated string; `out_degrees` must be writable.
 */
enum SmartcarStatus smartcar_nmea_to_decimal_degrees(const char *raw,
                                                     char hemisphere,
                                                     double *out_degrees);

/**
 * Runs a scenario script against virtual hardware. `config` may be NULL
 * for the defaults; `until_ms` may be [`SMARTCAR_DEFAULT_HORIZON`].
 *
 * # Safety
 * `scenario` must be a NUL-terminated string, `config` NULL or a live
 * handle, and `out_report` writable.
 */
enum SmartcarStatus smartcar_run_scenario(const char *scenario,
                                          const struct SmartcarConfig *config,
                                          uint64_t until_ms,
                                          struct SmartcarReport **out_report);

/**
 * The full line-oriented report text.
 *
 * # Safety
 * `report` must be a live handle; `out_text` must be writable.
 */
enum SmartcarStatus smartcar_report_text(const struct SmartcarReport *report, char **out_text);

/**
 * Number of invariant violations detected during the run; 0 for NULL.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
uintptr_t smartcar_report_violation_count(const struct SmartcarReport *report);

/**
 * Number of SMS delivered during the run; 0 for NULL.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
uintptr_t smartcar_report_delivered_count(const struct SmartcarReport *report);

/**
 * # Safety
 * `report` must be NULL or a live handle.
 */
void smartcar_report_free(struct SmartcarReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMARTCAR_H */
