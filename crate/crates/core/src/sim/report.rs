//! Simulation report: an ordered record log plus a final summary, rendered
//! as line-oriented text with a stable field order.

use std::fmt::{self, Write as _};

use crate::controller::{Action, WiperMode};

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Action {
        t_ms: u64,
        /// Time of the input that produced the action.
        cause_ms: u64,
        action: Action,
    },
    SmsBegin {
        t_ms: u64,
        destination: String,
    },
    Delivered {
        t_ms: u64,
        destination: String,
        body: String,
        attempts: u32,
    },
    DeliveryFailed {
        t_ms: u64,
        destination: String,
        body: String,
        attempts: u32,
        reason: String,
    },
    Inbound {
        t_ms: u64,
        index: u32,
        sender: String,
        body: String,
    },
    FetchFailed {
        t_ms: u64,
        index: u32,
        reason: String,
    },
    Violation {
        t_ms: u64,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalState {
    pub engine_enabled: bool,
    pub wiper: WiperMode,
    pub airbag_asserted: bool,
    pub alcohol_ema: Option<f64>,
    pub fix: Option<String>,
    pub modem_stored: usize,
    pub end_ms: u64,
}

impl Default for FinalState {
    fn default() -> Self {
        FinalState {
            engine_enabled: true,
            wiper: WiperMode::Off,
            airbag_asserted: false,
            alcohol_ema: None,
            fix: None,
            modem_stored: 0,
            end_ms: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub sentences: u64,
    pub accepted_fixes: u64,
    pub checksum_failures: u64,
    pub unsupported_sentences: u64,
    pub retries: u64,
    pub delivered: u64,
    pub failed: u64,
    pub protocol_violations: u64,
}

/// One entry of [`SimReport::outbound_sms`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutboundSms<'a> {
    pub t_ms: u64,
    pub destination: &'a str,
    pub body: &'a str,
    pub attempts: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimReport {
    pub records: Vec<Record>,
    pub final_state: FinalState,
    pub counters: Counters,
}

impl SimReport {
    pub fn outbound_sms(&self) -> Vec<OutboundSms<'_>> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Delivered {
                    t_ms,
                    destination,
                    body,
                    attempts,
                } => Some(OutboundSms {
                    t_ms: *t_ms,
                    destination,
                    body,
                    attempts: *attempts,
                }),
                _ => None,
            })
            .collect()
    }

    pub fn actions(&self) -> Vec<(u64, &Action)> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Action { t_ms, action, .. } => Some((*t_ms, action)),
                _ => None,
            })
            .collect()
    }

    pub fn violations(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Violation { message, .. } => Some(message.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Record::Action { t_ms, cause_ms, action } => {
                write!(f, "ACTION t={t_ms} cause={cause_ms} {action}")
            }
            Record::SmsBegin { t_ms, destination } => write!(f, "SMS_BEGIN t={t_ms} dest={destination}"),
            Record::Delivered {
                t_ms,
                destination,
                body,
                attempts,
            } => write!(
                f,
                "SMS_DELIVERED t={t_ms} dest={destination} attempts={attempts} body={body:?}"
            ),
            Record::DeliveryFailed {
                t_ms,
                destination,
                body,
                attempts,
                reason,
            } => write!(
                f,
                "DELIVERY_FAILED t={t_ms} dest={destination} attempts={attempts} reason={reason:?} body={body:?}"
            ),
            Record::Inbound {
                t_ms,
                index,
                sender,
                body,
            } => {
                write!(f, "SMS_INBOUND t={t_ms} index={index} sender={sender} body={body:?}")
            }
            Record::FetchFailed { t_ms, index, reason } => {
                write!(f, "FETCH_FAILED t={t_ms} index={index} reason={reason:?}")
            }
            Record::Violation { t_ms, message } => write!(f, "VIOLATION t={t_ms} {message:?}"),
        }
    }
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SMARTCAR-REPORT 1")?;
        for record in &self.records {
            writeln!(f, "{record}")?;
        }
        let s = &self.final_state;
        let mut line = String::new();
        let _ = write!(
            line,
            "FINAL end={} engine={} wiper={} airbag={} alcohol_ema=",
            s.end_ms,
            if s.engine_enabled { "ENABLED" } else { "DISABLED" },
            s.wiper.as_str(),
            if s.airbag_asserted { "ASSERTED" } else { "IDLE" },
        );
        match s.alcohol_ema {
            Some(ema) => {
                let _ = write!(line, "{ema:.3}");
            }
            None => line.push_str("NONE"),
        }
        let _ = write!(
            line,
            " fix={} modem_stored={}",
            s.fix.as_deref().unwrap_or("NONE"),
            s.modem_stored
        );
        writeln!(f, "{line}")?;
        let c = &self.counters;
        writeln!(
            f,
            "COUNTERS sentences={} accepted_fixes={} checksum_failures={} unsupported={} retries={} delivered={} failed={} protocol_violations={}",
            c.sentences,
            c.accepted_fixes,
            c.checksum_failures,
            c.unsupported_sentences,
            c.retries,
            c.delivered,
            c.failed,
            c.protocol_violations
        )
    }
}
