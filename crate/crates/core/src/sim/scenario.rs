//! Line-oriented scenario scripts.
//!
//! ```text
//! # comment
//! t=1000 gps $GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,003.1,W*6A
//! t=1000 fix 48.1173 11.516667
//! t=5000 impact 1
//! t=6000 panic 1
//! t=6500 panic 0
//! t=7000 alcohol 520
//! t=8000 rain 1 640
//! t=9000 cabin 24.5 51
//! t=9500 sms +15550123 STATUS
//! t=9900 fault error_once
//! t=9900 fault silent 30000
//! ```
//!
//! `impact 1` is a one-tick pulse from the vibration sensor. Every other
//! channel holds its value until the next event for that channel.

use crate::error::ScenarioError;
use crate::types::{is_valid_phone_number, ADC_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModemFault {
    /// The next submitted SMS body is answered with `ERROR`.
    ErrorOnce,
    /// The modem ignores all input and stays quiet for this many ms.
    SilentFor(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioEventKind {
    Impact(bool),
    Panic(bool),
    Alcohol(u16),
    Rain {
        wet: bool,
        intensity: u16,
    },
    Cabin {
        temp_c: f64,
        humidity_pct: u8,
    },
    /// Raw NMEA text forwarded byte-exact to the controller.
    GpsLine(String),
    /// Position the virtual GPS reports from its next 1 Hz epoch on.
    GpsFix {
        lat: f64,
        lon: f64,
    },
    SmsIn {
        sender: String,
        body: String,
    },
    ModemFault(ModemFault),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEvent {
    pub t_ms: u64,
    /// 1-based source line.
    pub line: usize,
    pub event: ScenarioEventKind,
}

fn level(arg: &str) -> Option<bool> {
    match arg {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

fn adc(arg: &str) -> Option<u16> {
    arg.parse().ok().filter(|v| *v <= ADC_MAX)
}

fn parse_event(word: &str, rest: &str) -> Result<ScenarioEventKind, String> {
    let args: Vec<&str> = rest.split_whitespace().collect();
    let want = |n: usize| -> Result<(), String> {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("`{word}` takes {n} argument(s), got {}", args.len()))
        }
    };
    let bad = |what: &str| format!("`{word}`: invalid {what}");
    use ScenarioEventKind as K;
    Ok(match word {
        "impact" => {
            want(1)?;
            K::Impact(level(args[0]).ok_or_else(|| bad("level (0 or 1)"))?)
        }
        "panic" => {
            want(1)?;
            K::Panic(level(args[0]).ok_or_else(|| bad("level (0 or 1)"))?)
        }
        "alcohol" => {
            want(1)?;
            K::Alcohol(adc(args[0]).ok_or_else(|| bad("count (0..=1023)"))?)
        }
        "rain" => {
            want(2)?;
            K::Rain {
                wet: level(args[0]).ok_or_else(|| bad("wet level (0 or 1)"))?,
                intensity: adc(args[1]).ok_or_else(|| bad("intensity (0..=1023)"))?,
            }
        }
        "cabin" => {
            want(2)?;
            let temp_c: f64 = args[0]
                .parse()
                .ok()
                .filter(|t: &f64| t.is_finite() && (-100.0..=200.0).contains(t))
                .ok_or_else(|| bad("temperature"))?;
            let humidity_pct: u8 = args[1]
                .parse()
                .ok()
                .filter(|h| *h <= 100)
                .ok_or_else(|| bad("humidity (0..=100)"))?;
            K::Cabin { temp_c, humidity_pct }
        }
        "gps" => {
            if rest.is_empty() {
                return Err("`gps` needs a sentence".to_string());
            }
            K::GpsLine(rest.to_string())
        }
        "fix" => {
            want(2)?;
            let lat: f64 = args[0]
                .parse()
                .ok()
                .filter(|v: &f64| (-90.0..=90.0).contains(v))
                .ok_or_else(|| bad("latitude"))?;
            let lon: f64 = args[1]
                .parse()
                .ok()
                .filter(|v: &f64| (-180.0..=180.0).contains(v))
                .ok_or_else(|| bad("longitude"))?;
            K::GpsFix { lat, lon }
        }
        "sms" => {
            let (sender, body) = rest.split_once(' ').unwrap_or((rest, ""));
            if !is_valid_phone_number(sender) {
                return Err(bad("sender number"));
            }
            K::SmsIn {
                sender: sender.to_string(),
                body: body.to_string(),
            }
        }
        "fault" => match args.as_slice() {
            ["error_once"] => K::ModemFault(ModemFault::ErrorOnce),
            ["silent", ms] => K::ModemFault(ModemFault::SilentFor(ms.parse().map_err(|_| bad("silence duration"))?)),
            _ => return Err(bad("fault (error_once | silent <ms>)")),
        },
        other => return Err(format!("unknown event `{other}`")),
    })
}

/// Parses a scenario and returns its events sorted by time; events at the
/// same time keep their file order.
pub fn load_scenario(source: &str) -> Result<Vec<ScenarioEvent>, ScenarioError> {
    let mut events = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| ScenarioError::Parse { line, message };
        let text = raw.trim_start();
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let (time, rest) = text.split_once(' ').unwrap_or((text, ""));
        let t_ms = time
            .strip_prefix("t=")
            .and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| err(format!("expected `t=<ms>`, found {time:?}")))?;
        let rest = rest.trim_start();
        let (word, args) = rest.split_once(' ').unwrap_or((rest, ""));
        if word.is_empty() {
            return Err(err("missing event".to_string()));
        }
        let event = parse_event(word, args).map_err(err)?;
        events.push(ScenarioEvent { t_ms, line, event });
    }
    events.sort_by_key(|e| e.t_ms);
    Ok(events)
}
