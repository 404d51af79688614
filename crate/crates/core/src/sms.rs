//! Remote query language and outbound message templates.
//!
//! Queries are single uppercase keywords (matched case-insensitively).
//! Every rendered text fits in one 160-character SMS.

use crate::nmea::GpsState;
use crate::types::{AlertKind, AlertMessage, Config, GeoFix, SensorFrame};

pub const UNKNOWN_LOCATION: &str = "UNKNOWN (no GPS fix)";
pub const HELP_TEXT: &str = "CMDS: STATUS TEMP HUM LOC HELP";
pub const UNKNOWN_REPLY: &str = "UNKNOWN CMD. SEND HELP";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Status,
    Temp,
    Hum,
    Loc,
    Help,
    Unknown(String),
}

impl Query {
    pub const KNOWN: [Query; 5] = [Query::Status, Query::Temp, Query::Hum, Query::Loc, Query::Help];

    /// Canonical keyword; `None` for unknown text.
    pub fn keyword(&self) -> Option<&'static str> {
        match self {
            Query::Status => Some("STATUS"),
            Query::Temp => Some("TEMP"),
            Query::Hum => Some("HUM"),
            Query::Loc => Some("LOC"),
            Query::Help => Some("HELP"),
            Query::Unknown(_) => None,
        }
    }
}

pub fn parse_query(body: &str) -> Query {
    let trimmed = body.trim();
    Query::KNOWN
        .into_iter()
        .find(|q| q.keyword().is_some_and(|k| k.eq_ignore_ascii_case(trimmed)))
        .unwrap_or_else(|| Query::Unknown(trimmed.to_string()))
}

pub fn maps_url(coordinates: &str) -> String {
    format!("https://maps.google.com/?q={coordinates}")
}

/// `lat,lon <url>` using the same coordinate text in both places.
fn location_text(fix: &GeoFix) -> String {
    let coords = fix.coordinate_text();
    let url = maps_url(&coords);
    format!("{coords} {url}")
}

fn fresh<'a>(gps: &'a GpsState, config: &Config, now_ms: u64) -> Option<&'a GeoFix> {
    gps.fresh_fix(now_ms, config.gps_stale_ms)
}

/// Inputs a reply may draw from besides the query itself.
#[derive(Debug, Clone, Copy)]
pub struct ReplyContext<'a> {
    pub frame: &'a SensorFrame,
    pub gps: &'a GpsState,
    pub engine_enabled: bool,
    pub now_ms: u64,
}

pub fn format_reply(query: &Query, ctx: &ReplyContext<'_>, config: &Config) -> String {
    let frame = ctx.frame;
    match query {
        Query::Temp => format!("TEMP={:.1}C", frame.temp_c),
        Query::Hum => format!("HUM={}%", frame.humidity_pct),
        Query::Loc => match fresh(ctx.gps, config, ctx.now_ms) {
            Some(fix) => format!("LOC={}", location_text(fix)),
            None => format!("LOC={UNKNOWN_LOCATION}"),
        },
        Query::Status => format!(
            "TEMP={:.1}C HUM={}% ALC={} RAIN={} ENGINE={}",
            frame.temp_c,
            frame.humidity_pct,
            frame.alcohol_raw,
            if frame.rain_wet { "WET" } else { "DRY" },
            if ctx.engine_enabled { "ENABLED" } else { "DISABLED" },
        ),
        Query::Help => HELP_TEXT.to_string(),
        Query::Unknown(_) => UNKNOWN_REPLY.to_string(),
    }
}

fn alert_prefix(kind: AlertKind) -> &'static str {
    match kind {
        AlertKind::Accident => "ACCIDENT DETECTED",
        AlertKind::Panic => "PANIC BUTTON PRESSED",
        AlertKind::Alcohol => "ALCOHOL LIMIT EXCEEDED. Vehicle interlock engaged",
    }
}

/// Accident and panic alerts go to the primary number, alcohol alerts to
/// the driver's safety number.
pub fn alert_destination(kind: AlertKind, config: &Config) -> &str {
    match kind {
        AlertKind::Accident | AlertKind::Panic => &config.alert_primary_number,
        AlertKind::Alcohol => &config.alert_safety_number,
    }
}

pub fn format_alert(kind: AlertKind, gps: &GpsState, config: &Config, now_ms: u64) -> AlertMessage {
    let location = match fresh(gps, config, now_ms) {
        Some(fix) => location_text(fix),
        None => UNKNOWN_LOCATION.to_string(),
    };
    AlertMessage {
        kind,
        destination: alert_destination(kind, config).to_string(),
        body: format!("{}. Location: {location}", alert_prefix(kind)),
    }
}
