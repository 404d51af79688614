//! Shared domain types and the controller configuration.
//!
//! Analog channels use raw 10-bit ADC counts (`0..=1023`). `rain_intensity`
//! is oriented so that higher counts mean more water on the sensor.

use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;

/// Upper bound of the 10-bit analog channels.
pub const ADC_MAX: u16 = 1023;

/// Longest SMS body we send, in GSM-7 septets (one per character).
pub const SMS_MAX_CHARS: usize = 160;

/// Latest decoded GPS position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoFix {
    pub latitude: f64,
    pub longitude: f64,
    /// Simulation time at which the sentence was decoded.
    pub timestamp_ms: u64,
    pub valid: bool,
    /// 0 when the sentence did not report it.
    pub satellites: u8,
}

impl GeoFix {
    pub fn in_range(&self) -> bool {
        (-90.0..=90.0).contains(&self.latitude) && (-180.0..=180.0).contains(&self.longitude)
    }

    /// `lat,lon` at six decimals, the only coordinate rendering used downstream.
    pub fn coordinate_text(&self) -> String {
        format!("{:.6},{:.6}", self.latitude, self.longitude)
    }
}

/// One sampling instant of every virtual sensor channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    pub t_ms: u64,
    pub impact: bool,
    pub panic: bool,
    pub alcohol_raw: u16,
    pub rain_wet: bool,
    pub rain_intensity: u16,
    pub temp_c: f64,
    pub humidity_pct: u8,
}

impl Default for SensorFrame {
    fn default() -> Self {
        SensorFrame {
            t_ms: 0,
            impact: false,
            panic: false,
            alcohol_raw: 0,
            rain_wet: false,
            rain_intensity: 0,
            temp_c: 0.0,
            humidity_pct: 0,
        }
    }
}

impl SensorFrame {
    pub fn is_well_formed(&self) -> bool {
        self.alcohol_raw <= ADC_MAX
            && self.rain_intensity <= ADC_MAX
            && self.humidity_pct <= 100
            && self.temp_c.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlertKind {
    Accident,
    Panic,
    Alcohol,
}

impl AlertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AlertKind::Accident => "ACCIDENT",
            AlertKind::Panic => "PANIC",
            AlertKind::Alcohol => "ALCOHOL",
        }
    }
}

impl fmt::Display for AlertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An outbound alert SMS, already rendered and routed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlertMessage {
    pub kind: AlertKind,
    pub destination: String,
    pub body: String,
}

/// Controller tuning. All durations are simulation milliseconds, all
/// analog thresholds raw ADC counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub alert_primary_number: String,
    pub alert_safety_number: String,
    pub alcohol_threshold: u16,
    pub alcohol_release: u16,
    /// Cut a running engine as well as inhibiting starts.
    pub alcohol_cutoff_while_running: bool,
    pub impact_window_ms: u64,
    pub impact_min_high: u32,
    pub impact_refractory_ms: u64,
    pub panic_refractory_ms: u64,
    pub gps_stale_ms: u64,
    pub gps_wait_ms: u64,
    pub sms_retry_max: u32,
    pub sms_retry_backoff_ms: u64,
    pub sms_ok_timeout_ms: u64,
    pub wiper_intermittent_max: u16,
    pub wiper_low_max: u16,
    pub tick_ms: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            alert_primary_number: "+15550100".to_string(),
            alert_safety_number: "+15550101".to_string(),
            alcohol_threshold: 450,
            alcohol_release: 400,
            alcohol_cutoff_while_running: false,
            impact_window_ms: 100,
            impact_min_high: 5,
            impact_refractory_ms: 60_000,
            panic_refractory_ms: 30_000,
            gps_stale_ms: 5_000,
            gps_wait_ms: 10_000,
            sms_retry_max: 3,
            sms_retry_backoff_ms: 2_000,
            sms_ok_timeout_ms: 5_000,
            wiper_intermittent_max: 300,
            wiper_low_max: 700,
            tick_ms: 10,
        }
    }
}

/// Phone numbers must survive being quoted inside `AT+CMGS="..."`.
pub fn is_valid_phone_number(number: &str) -> bool {
    let digits = number.strip_prefix('+').unwrap_or(number);
    !digits.is_empty() && digits.len() <= 20 && digits.bytes().all(|b| b.is_ascii_digit())
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::InvalidValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        }),
    }
}

impl Config {
    /// Parse `key = value` text. Missing keys keep their defaults, unknown
    /// keys are ignored, and the result is validated before it is returned.
    pub fn load(source: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::MissingEquals { line: line_no })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "alert_primary_number" => cfg.alert_primary_number = value.to_string(),
                "alert_safety_number" => cfg.alert_safety_number = value.to_string(),
                "alcohol_threshold" => cfg.alcohol_threshold = parse_value(key, value, line_no)?,
                "alcohol_release" => cfg.alcohol_release = parse_value(key, value, line_no)?,
                "alcohol_cutoff_while_running" => cfg.alcohol_cutoff_while_running = parse_bool(key, value, line_no)?,
                "impact_window_ms" => cfg.impact_window_ms = parse_value(key, value, line_no)?,
                "impact_min_high" => cfg.impact_min_high = parse_value(key, value, line_no)?,
                "impact_refractory_ms" => cfg.impact_refractory_ms = parse_value(key, value, line_no)?,
                "panic_refractory_ms" => cfg.panic_refractory_ms = parse_value(key, value, line_no)?,
                "gps_stale_ms" => cfg.gps_stale_ms = parse_value(key, value, line_no)?,
                "gps_wait_ms" => cfg.gps_wait_ms = parse_value(key, value, line_no)?,
                "sms_retry_max" => cfg.sms_retry_max = parse_value(key, value, line_no)?,
                "sms_retry_backoff_ms" => cfg.sms_retry_backoff_ms = parse_value(key, value, line_no)?,
                "sms_ok_timeout_ms" => cfg.sms_ok_timeout_ms = parse_value(key, value, line_no)?,
                "wiper_intermittent_max" => cfg.wiper_intermittent_max = parse_value(key, value, line_no)?,
                "wiper_low_max" => cfg.wiper_low_max = parse_value(key, value, line_no)?,
                "tick_ms" => cfg.tick_ms = parse_value(key, value, line_no)?,
                _ => {}
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn fail(keys: &str, reason: &str) -> Result<(), ConfigError> {
            Err(ConfigError::Validation {
                keys: keys.to_string(),
                reason: reason.to_string(),
            })
        }
        if !is_valid_phone_number(&self.alert_primary_number) {
            return fail("alert_primary_number", "expected digits with optional leading '+'");
        }
        if !is_valid_phone_number(&self.alert_safety_number) {
            return fail("alert_safety_number", "expected digits with optional leading '+'");
        }
        if self.alcohol_threshold > ADC_MAX {
            return fail("alcohol_threshold", "must be within 0..=1023");
        }
        if self.alcohol_release >= self.alcohol_threshold {
            return fail("alcohol_release/alcohol_threshold", "release must be below threshold");
        }
        if self.wiper_intermittent_max >= self.wiper_low_max {
            return fail(
                "wiper_intermittent_max/wiper_low_max",
                "intermittent band must end below the low band",
            );
        }
        if self.wiper_low_max >= 1024 {
            return fail("wiper_low_max", "must be below 1024");
        }
        if self.impact_min_high == 0 {
            return fail("impact_min_high", "must be at least 1");
        }
        let durations = [
            ("impact_window_ms", self.impact_window_ms),
            ("impact_refractory_ms", self.impact_refractory_ms),
            ("panic_refractory_ms", self.panic_refractory_ms),
            ("gps_stale_ms", self.gps_stale_ms),
            ("gps_wait_ms", self.gps_wait_ms),
            ("sms_retry_backoff_ms", self.sms_retry_backoff_ms),
            ("sms_ok_timeout_ms", self.sms_ok_timeout_ms),
            ("tick_ms", self.tick_ms),
        ];
        for (key, value) in durations {
            if value == 0 {
                return fail(key, "duration must be positive");
            }
        }
        Ok(())
    }

    /// Render as `key = value` text that [`Config::load`] reads back unchanged.
    pub fn to_config_text(&self) -> String {
        format!(
            "alert_primary_number = {}\n\
             alert_safety_number = {}\n\
             alcohol_threshold = {}\n\
             alcohol_release = {}\n\
             alcohol_cutoff_while_running = {}\n\
             impact_window_ms = {}\n\
             impact_min_high = {}\n\
             impact_refractory_ms = {}\n\
             panic_refractory_ms = {}\n\
             gps_stale_ms = {}\n\
             gps_wait_ms = {}\n\
             sms_retry_max = {}\n\
             sms_retry_backoff_ms = {}\n\
             sms_ok_timeout_ms = {}\n\
             wiper_intermittent_max = {}\n\
             wiper_low_max = {}\n\
             tick_ms = {}\n",
            self.alert_primary_number,
            self.alert_safety_number,
            self.alcohol_threshold,
            self.alcohol_release,
            self.alcohol_cutoff_while_running,
            self.impact_window_ms,
            self.impact_min_high,
            self.impact_refractory_ms,
            self.panic_refractory_ms,
            self.gps_stale_ms,
            self.gps_wait_ms,
            self.sms_retry_max,
            self.sms_retry_backoff_ms,
            self.sms_ok_timeout_ms,
            self.wiper_intermittent_max,
            self.wiper_low_max,
            self.tick_ms,
        )
    }
}
