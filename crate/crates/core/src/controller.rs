//! The reactive safety core.
//!
//! [`ControllerState::step`] is a pure transition: it consumes one input at
//! one instant and returns the actions to perform. All I/O (modem traffic,
//! actuator lines) is left to whoever interprets those actions.

use std::collections::VecDeque;
use std::fmt;

use crate::modem::InboundSms;
use crate::nmea::{FixUpdate, GpsState, NmeaSentence};
use crate::sms::{format_alert, format_reply, parse_query, ReplyContext};
use crate::types::{AlertKind, AlertMessage, Config, SensorFrame};

/// Smoothing weight of the newest alcohol sample.
pub const ALCOHOL_EMA_ALPHA: f64 = 0.2;

pub const SERVO_MAX_DEG: f64 = 170.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WiperMode {
    Off,
    Intermittent,
    Low,
    High,
}

impl WiperMode {
    /// Full cycle length, including the rest segment of `Intermittent`.
    pub fn period_ms(self) -> Option<u64> {
        match self {
            WiperMode::Off => None,
            WiperMode::Intermittent => Some(4000),
            WiperMode::Low => Some(2000),
            WiperMode::High => Some(1000),
        }
    }

    /// Length of the 0 -> 170 -> 0 sweep within one period.
    pub fn sweep_ms(self) -> Option<u64> {
        match self {
            WiperMode::Off => None,
            WiperMode::Intermittent | WiperMode::Low => Some(2000),
            WiperMode::High => Some(1000),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WiperMode::Off => "OFF",
            WiperMode::Intermittent => "INTERMITTENT",
            WiperMode::Low => "LOW",
            WiperMode::High => "HIGH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WiperCommand {
    pub mode: WiperMode,
    pub servo_angle_deg: f64,
}

impl Default for WiperCommand {
    fn default() -> Self {
        WiperCommand {
            mode: WiperMode::Off,
            servo_angle_deg: 0.0,
        }
    }
}

pub fn wiper_mode(rain_wet: bool, rain_intensity: u16, config: &Config) -> WiperMode {
    if !rain_wet {
        WiperMode::Off
    } else if rain_intensity <= config.wiper_intermittent_max {
        WiperMode::Intermittent
    } else if rain_intensity <= config.wiper_low_max {
        WiperMode::Low
    } else {
        WiperMode::High
    }
}

/// Servo position `phase_ms` into the current mode: a triangle sweep
/// 0 -> 170 -> 0 degrees, followed by a rest at 0 for `Intermittent`.
pub fn servo_angle(mode: WiperMode, phase_ms: u64) -> f64 {
    let (Some(period), Some(sweep)) = (mode.period_ms(), mode.sweep_ms()) else {
        return 0.0;
    };
    let p = phase_ms % period;
    if p >= sweep {
        return 0.0;
    }
    let half = sweep as f64 / 2.0;
    let p = p as f64;
    if p <= half {
        SERVO_MAX_DEG * p / half
    } else {
        SERVO_MAX_DEG * (sweep as f64 - p) / half
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    AssertAirbagLine,
    SendAlert(AlertMessage),
    SendReply { dest: String, text: String },
    SetWiper(WiperCommand),
    SetEngine(bool),
    Log(String),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::AssertAirbagLine => write!(f, "AIRBAG"),
            Action::SendAlert(a) => {
                write!(f, "ALERT kind={} dest={} body={:?}", a.kind, a.destination, a.body)
            }
            Action::SendReply { dest, text } => write!(f, "REPLY dest={dest} body={text:?}"),
            Action::SetWiper(w) => write!(f, "WIPER mode={}", w.mode.as_str()),
            Action::SetEngine(on) => {
                write!(f, "ENGINE {}", if *on { "ENABLED" } else { "DISABLED" })
            }
            Action::Log(msg) => write!(f, "LOG {msg:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Frame(SensorFrame),
    Nmea(NmeaSentence),
    Sms(InboundSms),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpactDecision {
    Triggered,
    Quiet,
}

/// Count-in-window impact debounce with a refractory latch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImpactDebouncer {
    history: VecDeque<(u64, bool)>,
    latch_until_ms: u64,
}

impl ImpactDebouncer {
    pub fn latch_until_ms(&self) -> u64 {
        self.latch_until_ms
    }

    /// Records a sample and reports `Triggered` when at least
    /// `impact_min_high` highs fall within the trailing `impact_window_ms`
    /// (`(now - window, now]`) and the latch has expired.
    pub fn sample(&mut self, high: bool, config: &Config, now_ms: u64) -> ImpactDecision {
        self.history.push_back((now_ms, high));
        while let Some(&(t, _)) = self.history.front() {
            if t + config.impact_window_ms <= now_ms {
                self.history.pop_front();
            } else {
                break;
            }
        }
        let highs = self.history.iter().filter(|(_, h)| *h).count() as u64;
        if highs >= u64::from(config.impact_min_high) && now_ms >= self.latch_until_ms {
            self.latch_until_ms = now_ms + config.impact_refractory_ms;
            ImpactDecision::Triggered
        } else {
            ImpactDecision::Quiet
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NmeaStats {
    pub sentences: u64,
    pub accepted: u64,
    pub checksum_failures: u64,
    pub unsupported: u64,
    pub rejected: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub gps: GpsState,
    pub impact: ImpactDebouncer,
    /// Deadline for an accident alert still waiting on a GPS fix.
    pub accident_wait_until_ms: Option<u64>,
    pub panic_latch_until_ms: u64,
    pub panic_level: bool,
    pub alcohol_ema: Option<f64>,
    pub engine_enabled: bool,
    pub alcohol_alert_sent_this_engagement: bool,
    pub wiper: WiperCommand,
    pub wiper_since_ms: u64,
    pub last_frame: SensorFrame,
    pub nmea: NmeaStats,
}

impl Default for ControllerState {
    fn default() -> Self {
        ControllerState {
            gps: GpsState::default(),
            impact: ImpactDebouncer::default(),
            accident_wait_until_ms: None,
            panic_latch_until_ms: 0,
            panic_level: false,
            alcohol_ema: None,
            engine_enabled: true,
            alcohol_alert_sent_this_engagement: false,
            wiper: WiperCommand::default(),
            wiper_since_ms: 0,
            last_frame: SensorFrame::default(),
            nmea: NmeaStats::default(),
        }
    }
}

impl ControllerState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Applies one input. Stages run in a fixed order: gps, impact, panic,
    /// alcohol, wiper, sms.
    pub fn step(&mut self, input: &Input, config: &Config, now_ms: u64) -> Vec<Action> {
        let mut actions = Vec::new();
        match input {
            Input::Nmea(sentence) => {
                self.update_gps(sentence, now_ms, &mut actions);
                self.resolve_pending_accident(config, now_ms, &mut actions);
            }
            Input::Frame(frame) => {
                if !frame.is_well_formed() {
                    actions.push(Action::Log(format!(
                        "rejected malformed sensor frame at {}",
                        frame.t_ms
                    )));
                    self.resolve_pending_accident(config, now_ms, &mut actions);
                    return actions;
                }
                self.last_frame = *frame;
                self.resolve_pending_accident(config, now_ms, &mut actions);
                if self.impact.sample(frame.impact, config, now_ms) == ImpactDecision::Triggered {
                    actions.extend(self.on_accident(config, now_ms));
                }
                self.update_panic(frame.panic, config, now_ms, &mut actions);
                actions.extend(self.evaluate_alcohol(frame.alcohol_raw, config, now_ms));
                self.update_wiper(frame, config, now_ms, &mut actions);
            }
            Input::Sms(sms) => {
                self.resolve_pending_accident(config, now_ms, &mut actions);
                let query = parse_query(&sms.body);
                let ctx = ReplyContext {
                    frame: &self.last_frame,
                    gps: &self.gps,
                    engine_enabled: self.engine_enabled,
                    now_ms,
                };
                actions.push(Action::SendReply {
                    dest: sms.sender.clone(),
                    text: format_reply(&query, &ctx, config),
                });
            }
        }
        actions
    }

    fn update_gps(&mut self, sentence: &NmeaSentence, now_ms: u64, actions: &mut Vec<Action>) {
        self.nmea.sentences += 1;
        match self.gps.update_fix(sentence, now_ms) {
            FixUpdate::Accepted => self.nmea.accepted += 1,
            FixUpdate::BadChecksum => {
                self.nmea.checksum_failures += 1;
                actions.push(Action::Log("nmea checksum mismatch".to_string()));
            }
            FixUpdate::Unsupported => self.nmea.unsupported += 1,
            FixUpdate::NoFix => {}
            FixUpdate::BadCoordinates(e) => {
                self.nmea.rejected += 1;
                actions.push(Action::Log(format!("nmea sentence ignored: {e}")));
            }
        }
    }

    /// Fires the airbag line, then the accident alert. Without a fresh fix
    /// the alert is held for up to `gps_wait_ms`.
    pub fn on_accident(&mut self, config: &Config, now_ms: u64) -> Vec<Action> {
        let mut actions = vec![Action::AssertAirbagLine];
        if self.gps.fresh_fix(now_ms, config.gps_stale_ms).is_some() {
            actions.push(Action::SendAlert(format_alert(
                AlertKind::Accident,
                &self.gps,
                config,
                now_ms,
            )));
        } else {
            self.accident_wait_until_ms = Some(now_ms + config.gps_wait_ms);
            actions.push(Action::Log("accident alert waiting for GPS fix".to_string()));
        }
        actions
    }

    fn resolve_pending_accident(&mut self, config: &Config, now_ms: u64, actions: &mut Vec<Action>) {
        let Some(deadline) = self.accident_wait_until_ms else {
            return;
        };
        if self.gps.fresh_fix(now_ms, config.gps_stale_ms).is_some() || now_ms >= deadline {
            self.accident_wait_until_ms = None;
            actions.push(Action::SendAlert(format_alert(
                AlertKind::Accident,
                &self.gps,
                config,
                now_ms,
            )));
        }
    }

    fn update_panic(&mut self, level: bool, config: &Config, now_ms: u64, actions: &mut Vec<Action>) {
        let rising = level && !self.panic_level;
        self.panic_level = level;
        if rising && now_ms >= self.panic_latch_until_ms {
            self.panic_latch_until_ms = now_ms + config.panic_refractory_ms;
            actions.push(Action::SendAlert(format_alert(
                AlertKind::Panic,
                &self.gps,
                config,
                now_ms,
            )));
        }
    }

    /// Smooths the alcohol reading and drives the engine interlock with
    /// hysteresis between `alcohol_release` and `alcohol_threshold`.
    pub fn evaluate_alcohol(&mut self, raw: u16, config: &Config, now_ms: u64) -> Vec<Action> {
        let raw = f64::from(raw);
        let ema = match self.alcohol_ema {
            None => raw,
            Some(prev) => ALCOHOL_EMA_ALPHA * raw + (1.0 - ALCOHOL_EMA_ALPHA) * prev,
        };
        self.alcohol_ema = Some(ema);

        let mut actions = Vec::new();
        if ema >= f64::from(config.alcohol_threshold) && self.engine_enabled {
            self.engine_enabled = false;
            actions.push(Action::SetEngine(false));
            actions.push(Action::Log(
                if config.alcohol_cutoff_while_running {
                    "alcohol interlock engaged: engine cut"
                } else {
                    "alcohol interlock engaged: engine start inhibited"
                }
                .to_string(),
            ));
            if !self.alcohol_alert_sent_this_engagement {
                self.alcohol_alert_sent_this_engagement = true;
                actions.push(Action::SendAlert(format_alert(
                    AlertKind::Alcohol,
                    &self.gps,
                    config,
                    now_ms,
                )));
            }
        } else if ema < f64::from(config.alcohol_release) && !self.engine_enabled {
            self.engine_enabled = true;
            self.alcohol_alert_sent_this_engagement = false;
            actions.push(Action::SetEngine(true));
        }
        actions
    }

    fn update_wiper(&mut self, frame: &SensorFrame, config: &Config, now_ms: u64, actions: &mut Vec<Action>) {
        let mode = wiper_mode(frame.rain_wet, frame.rain_intensity, config);
        if mode != self.wiper.mode {
            self.wiper_since_ms = now_ms;
            self.wiper = WiperCommand {
                mode,
                servo_angle_deg: servo_angle(mode, 0),
            };
            actions.push(Action::SetWiper(self.wiper));
        } else {
            self.wiper.servo_angle_deg = servo_angle(mode, now_ms - self.wiper_since_ms);
        }
    }

    /// Describes every violated state invariant; empty when all hold.
    pub fn invariant_violations(&self, config: &Config) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(ema) = self.alcohol_ema {
            if ema >= f64::from(config.alcohol_threshold) && self.engine_enabled {
                out.push(format!("engine enabled with alcohol_ema {ema:.3}"));
            }
        }
        if self.wiper.mode == WiperMode::Off && self.wiper.servo_angle_deg != 0.0 {
            out.push("wiper off with non-zero servo angle".to_string());
        }
        if !(0.0..=SERVO_MAX_DEG).contains(&self.wiper.servo_angle_deg) {
            out.push(format!("servo angle {} out of range", self.wiper.servo_angle_deg));
        }
        if let Some(fix) = &self.gps.last_fix {
            if fix.valid && !fix.in_range() {
                out.push("valid fix out of range".to_string());
            }
        }
        out
    }
}
