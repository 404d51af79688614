//! C ABI for the smart-car controller, protocol helpers and simulator.
//!
//! Conventions:
//! - Fallible calls return a [`SmartcarStatus`]; on failure the message is
//!   available from [`smartcar_last_error`] on the same thread.
//! - Objects are opaque handles created by `*_new` / `*_load` / `*_run` and
//!   released with the matching `*_free`. Passing NULL to a free is a no-op.
//! - Strings handed out through `out_*` parameters are owned by the caller
//!   and must be released with [`smartcar_string_free`].
//! - Input strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use smartcar_core::modem::InboundSms;
use smartcar_core::nmea::{self, parse_sentence, Hemisphere};
use smartcar_core::sim::{self, SimReport};
use smartcar_core::{Action, Config, ControllerState, Input, SensorFrame, WiperMode};

/// Pass as `until_ms` to [`smartcar_run_scenario`] to use the default horizon.
pub const SMARTCAR_DEFAULT_HORIZON: u64 = u64::MAX;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmartcarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidScenario = 4,
    InvalidCoordinate = 5,
    Panic = 6,
}

/// Wiper modes as reported by [`SmartcarControllerStatus`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmartcarWiperMode {
    Off = 0,
    Intermittent = 1,
    Low = 2,
    High = 3,
}

impl From<WiperMode> for SmartcarWiperMode {
    fn from(mode: WiperMode) -> Self {
        match mode {
            WiperMode::Off => SmartcarWiperMode::Off,
            WiperMode::Intermittent => SmartcarWiperMode::Intermittent,
            WiperMode::Low => SmartcarWiperMode::Low,
            WiperMode::High => SmartcarWiperMode::High,
        }
    }
}

/// One sample of every sensor channel. Analog channels are raw 10-bit counts.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SmartcarSensorFrame {
    pub t_ms: u64,
    pub impact: bool,
    pub panic: bool,
    pub alcohol_raw: u16,
    pub rain_wet: bool,
    pub rain_intensity: u16,
    pub temp_c: f64,
    pub humidity_pct: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SmartcarControllerStatus {
    pub engine_enabled: bool,
    pub wiper_mode: SmartcarWiperMode,
    pub servo_angle_deg: f64,
    /// NaN before the first alcohol sample.
    pub alcohol_ema: f64,
    pub has_fix: bool,
    pub latitude: f64,
    pub longitude: f64,
    /// True while an accident alert waits for a GPS fix.
    pub accident_alert_pending: bool,
}

pub struct SmartcarConfig {
    inner: Config,
}

pub struct SmartcarController {
    state: ControllerState,
    config: Config,
}

pub struct SmartcarReport {
    inner: SimReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: SmartcarStatus,
    message: String,
}

impl Failure {
    fn new(status: SmartcarStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SmartcarStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SmartcarStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic");
            SmartcarStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::new(SmartcarStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure::new(SmartcarStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| Failure::new(SmartcarStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn deref_mut<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut()
        .ok_or_else(|| Failure::new(SmartcarStatus::NullPointer, format!("{what} is NULL")))
}

fn owned_string(text: &str) -> *mut c_char {
    CString::new(text.replace('\0', " ")).unwrap_or_default().into_raw()
}

unsafe fn write_string(out: *mut *mut c_char, text: &str) -> Result<(), Failure> {
    let slot = deref_mut(out, "output pointer")?;
    *slot = owned_string(text);
    Ok(())
}

fn render_actions(actions: &[Action]) -> String {
    actions.iter().map(|a| format!("{a}\n")).collect()
}

/// Message describing the last failed call on this thread, or NULL. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn smartcar_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned through an `out_*` parameter.
///
/// # Safety
/// `text` must be NULL or a pointer obtained from this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn smartcar_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Configuration with every key at its default.
#[no_mangle]
pub extern "C" fn smartcar_config_new_default() -> *mut SmartcarConfig {
    Box::into_raw(Box::new(SmartcarConfig {
        inner: Config::default(),
    }))
}

/// Parses `key = value` configuration text and validates it.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_config` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smartcar_config_load(
    text: *const c_char,
    out_config: *mut *mut SmartcarConfig,
) -> SmartcarStatus {
    guard(|| {
        let text = read_str(text, "config text")?;
        let slot = deref_mut(out_config, "out_config")?;
        let inner = Config::load(text).map_err(|e| Failure::new(SmartcarStatus::InvalidConfig, e.to_string()))?;
        *slot = Box::into_raw(Box::new(SmartcarConfig { inner }));
        Ok(())
    })
}

/// Renders the configuration back to loadable text.
///
/// # Safety
/// `config` must be a live handle; `out_text` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smartcar_config_to_text(
    config: *const SmartcarConfig,
    out_text: *mut *mut c_char,
) -> SmartcarStatus {
    guard(|| {
        let config = deref(config, "config")?;
        write_string(out_text, &config.inner.to_config_text())
    })
}

/// # Safety
/// `config` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smartcar_config_free(config: *mut SmartcarConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// New controller in its power-on state. The configuration is copied; NULL
/// selects the defaults.
///
/// # Safety
/// `config` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smartcar_controller_new(config: *const SmartcarConfig) -> *mut SmartcarController {
    let config = config.as_ref().map_or_else(Config::default, |c| c.inner.clone());
    Box::into_raw(Box::new(SmartcarController {
        state: ControllerState::new(),
        config,
    }))
}

/// # Safety
/// `controller` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smartcar_controller_free(controller: *mut SmartcarController) {
    if !controller.is_null() {
        drop(Box::from_raw(controller));
    }
}

unsafe fn step(
    controller: *mut SmartcarController,
    input: Input,
    now_ms: u64,
    out_actions: *mut *mut c_char,
) -> Result<(), Failure> {
    let controller = deref_mut(controller, "controller")?;
    if out_actions.is_null() {
        return Err(Failure::new(SmartcarStatus::NullPointer, "out_actions is NULL"));
    }
    let actions = controller.state.step(&input, &controller.config, now_ms);
    write_string(out_actions, &render_actions(&actions))
}

/// Applies one sensor sample. The resulting actions are written to
/// `out_actions`, one per line.
///
/// # Safety
/// `controller` and `frame` must be valid; `out_actions` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smartcar_controller_step_frame(
    controller: *mut SmartcarController,
    frame: *const SmartcarSensorFrame,
    now_ms: u64,
    out_actions: *mut *mut c_char,
) -> SmartcarStatus {
    guard(|| {
        let f = deref(frame, "frame")?;
        let frame = SensorFrame {
            t_ms: f.t_ms,
            impact: f.impact,
            panic: f.panic,
            alcohol_raw: f.alcohol_raw,
            rain_wet: f.rain_wet,
            rain_intensity: f.rain_intensity,
            temp_c: f.temp_c,
            humidity_pct: f.humidity_pct,
        };
        step(controller, Input::Frame(frame), now_ms, out_actions)
    })
}

/// Feeds one NMEA line (with or without CR/LF).
///
/// # Safety
/// `controller` and `line` must be valid; `out_actions` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smartcar_controller_feed_nmea(
    controller: *mut SmartcarController,
    line: *const c_char,
    now_ms: u64,
    out_actions: *mut *mut c_char,
) -> SmartcarStatus {
    guard(|| {
        if line.is_null() {
            return Err(Failure::new(SmartcarStatus::NullPointer, "line is NULL"));
        }
        // NMEA is ASCII but the parser takes raw bytes
        let sentence = parse_sentence(CStr::from_ptr(line).to_bytes());
        step(controller, Input::Nmea(sentence), now_ms, out_actions)
    })
}

/// Delivers an inbound SMS; the reply appears as a `REPLY` action.
///
/// # Safety
/// All pointers must be valid; `out_actions` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smartcar_controller_receive_sms(
    controller: *mut SmartcarController,
    sender: *const c_char,
    body: *const c_char,
    now_ms: u64,
    out_actions: *mut *mut c_char,
) -> SmartcarStatus {
    guard(|| {
        let sms = InboundSms {
            sender: read_str(sender, "sender")?.to_string(),
            body: read_str(body, "body")?.to_string(),
        };
        step(controller, Input::Sms(sms), now_ms, out_actions)
    })
}

/// # Safety
/// `controller` must be a live handle; `out_status` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smartcar_controller_status(
    controller: *const SmartcarController,
    out_status: *mut SmartcarControllerStatus,
) -> SmartcarStatus {
    guard(|| {
        let st = &deref(controller, "controller")?.state;
        let out = deref_mut(out_status, "out_status")?;
        let fix = st.gps.last_fix;
        *out = SmartcarControllerStatus {
            engine_enabled: st.engine_enabled,
            wiper_mode: st.wiper.mode.into(),
            servo_angle_deg: st.wiper.servo_angle_deg,
            alcohol_ema: st.alcohol_ema.unwrap_or(f64::NAN),
            has_fix: fix.is_some(),
            latitude: fix.map_or(0.0, |f| f.latitude),
            longitude: fix.map_or(0.0, |f| f.longitude),
            accident_alert_pending: st.accident_wait_until_ms.is_some(),
        };
        Ok(())
    })
}

/// True iff `line` is a framed NMEA sentence with a matching checksum.
/// NULL yields false.
///
/// # Safety
/// `line` must be NULL or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn smartcar_nmea_validate_checksum(line: *const c_char) -> bool {
    !line.is_null() && nmea::validate_checksum(CStr::from_ptr(line).to_bytes())
}

/// Converts an NMEA `ddmm.mmmm` field plus its hemisphere letter
/// (`N`, `S`, `E` or `W`) to signed decimal degrees.
///
/// # Safety
/// `raw` must be a NUL-terminated string; `out_degrees` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smartcar_nmea_to_decimal_degrees(
    raw: *const c_char,
    hemisphere: c_char,
    out_degrees: *mut f64,
) -> SmartcarStatus {
    guard(|| {
        let raw = read_str(raw, "coordinate")?;
        let out = deref_mut(out_degrees, "out_degrees")?;
        let letter = char::from(hemisphere as u8).to_string();
        let coordinate_error =
            |e: smartcar_core::CoordinateError| Failure::new(SmartcarStatus::InvalidCoordinate, e.to_string());
        let hemisphere = Hemisphere::from_field(&letter).map_err(coordinate_error)?;
        *out = nmea::to_decimal_degrees(raw, hemisphere).map_err(coordinate_error)?;
        Ok(())
    })
}

/// Runs a scenario script against virtual hardware. `config` may be NULL
/// for the defaults; `until_ms` may be [`SMARTCAR_DEFAULT_HORIZON`].
///
/// # Safety
/// `scenario` must be a NUL-terminated string, `config` NULL or a live
/// handle, and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn smartcar_run_scenario(
    scenario: *const c_char,
    config: *const SmartcarConfig,
    until_ms: u64,
    out_report: *mut *mut SmartcarReport,
) -> SmartcarStatus {
    guard(|| {
        let text = read_str(scenario, "scenario")?;
        let slot = deref_mut(out_report, "out_report")?;
        let default_config = Config::default();
        let config = config.as_ref().map_or(&default_config, |c| &c.inner);
        let events =
            sim::load_scenario(text).map_err(|e| Failure::new(SmartcarStatus::InvalidScenario, e.to_string()))?;
        let until = if until_ms == SMARTCAR_DEFAULT_HORIZON {
            sim::default_until_ms(&events, config)
        } else {
            until_ms
        };
        let inner = sim::run(&events, config, until);
        *slot = Box::into_raw(Box::new(SmartcarReport { inner }));
        Ok(())
    })
}

/// The full line-oriented report text.
///
/// # Safety
/// `report` must be a live handle; `out_text` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smartcar_report_text(
    report: *const SmartcarReport,
    out_text: *mut *mut c_char,
) -> SmartcarStatus {
    guard(|| {
        let report = deref(report, "report")?;
        write_string(out_text, &report.inner.to_text())
    })
}

/// Number of invariant violations detected during the run; 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smartcar_report_violation_count(report: *const SmartcarReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.violations().len())
}

/// Number of SMS delivered during the run; 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smartcar_report_delivered_count(report: *const SmartcarReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.outbound_sms().len())
}

/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smartcar_report_free(report: *mut SmartcarReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
