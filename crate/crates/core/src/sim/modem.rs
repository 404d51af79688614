//! A SIM900-style modem peer speaking the text-mode SMS subset over an
//! in-memory byte stream. Echo is off.

use std::collections::BTreeMap;

use crate::clock::{Clock, SimClock};
use crate::error::TransportError;
use crate::modem::{Transport, CTRL_Z, ESC, SUPPORTED_BAUD_RATES};
use crate::sim::scenario::ModemFault;
use crate::types::{is_valid_phone_number, SMS_MAX_CHARS};

const OK: &[u8] = b"\r\nOK\r\n";
const ERROR: &[u8] = b"\r\nERROR\r\n";
const PROMPT: &[u8] = b"\r\n> ";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Host to modem.
    ToModem,
    /// Modem to host.
    FromModem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub t_ms: u64,
    pub direction: Direction,
    pub bytes: Vec<u8>,
}

/// A message the modem accepted for delivery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentSms {
    pub t_ms: u64,
    pub destination: String,
    pub body: String,
    pub reference: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct StoredSms {
    sender: String,
    body: String,
    received_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Mode {
    Command,
    Body { destination: String },
}

#[derive(Debug)]
pub struct VirtualModem {
    clock: SimClock,
    mode: Mode,
    line: Vec<u8>,
    text_mode: bool,
    baud_rate: u32,
    output: Vec<u8>,
    storage: BTreeMap<u32, StoredSms>,
    sent: Vec<SentSms>,
    next_reference: u32,
    error_budget: u32,
    silent_until_ms: u64,
    closed: bool,
    protocol_violations: u32,
    transcript: Vec<TranscriptEntry>,
}

impl VirtualModem {
    pub fn new(clock: SimClock) -> Self {
        VirtualModem {
            clock,
            mode: Mode::Command,
            line: Vec::new(),
            text_mode: false,
            baud_rate: 115_200,
            output: Vec::new(),
            storage: BTreeMap::new(),
            sent: Vec::new(),
            next_reference: 1,
            error_budget: 0,
            silent_until_ms: 0,
            closed: false,
            protocol_violations: 0,
            transcript: Vec::new(),
        }
    }

    pub fn apply_fault(&mut self, fault: ModemFault) {
        match fault {
            ModemFault::ErrorOnce => self.error_budget += 1,
            ModemFault::SilentFor(ms) => {
                let until = self.clock.now_ms() + ms;
                self.silent_until_ms = self.silent_until_ms.max(until);
            }
        }
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    fn silent(&self) -> bool {
        self.clock.now_ms() < self.silent_until_ms
    }

    /// Stores an incoming SMS at the lowest free index and announces it with
    /// `+CMTI`. Returns the index.
    pub fn inject_inbound(&mut self, sender: &str, body: &str) -> u32 {
        let index = (1..).find(|i| !self.storage.contains_key(i)).unwrap_or(1);
        self.storage.insert(
            index,
            StoredSms {
                sender: sender.to_string(),
                body: body.to_string(),
                received_ms: self.clock.now_ms(),
            },
        );
        self.output
            .extend_from_slice(format!("\r\n+CMTI: \"SM\",{index}\r\n").as_bytes());
        index
    }

    pub fn sent(&self) -> &[SentSms] {
        &self.sent
    }

    pub fn stored_count(&self) -> usize {
        self.storage.len()
    }

    pub fn baud_rate(&self) -> u32 {
        self.baud_rate
    }

    /// Times a body terminator reached the modem outside of body mode.
    pub fn protocol_violations(&self) -> u32 {
        self.protocol_violations
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    fn respond(&mut self, bytes: &[u8]) {
        self.output.extend_from_slice(bytes);
    }

    fn timestamp(ms: u64) -> String {
        let secs = ms / 1000;
        format!(
            "24/01/01,{:02}:{:02}:{:02}+00",
            (secs / 3600) % 24,
            (secs / 60) % 60,
            secs % 60
        )
    }

    fn handle_command(&mut self, raw: &[u8]) {
        let text = String::from_utf8_lossy(raw);
        let text = text.trim();
        if text.is_empty() {
            return;
        }
        let upper = text.to_ascii_uppercase();
        if upper == "AT" {
            self.respond(OK);
        } else if let Some(arg) = upper.strip_prefix("AT+CMGF=") {
            match arg {
                "1" => {
                    self.text_mode = true;
                    self.respond(OK);
                }
                _ => self.respond(ERROR),
            }
        } else if let Some(arg) = upper.strip_prefix("AT+IPR=") {
            match arg.parse::<u32>() {
                Ok(rate) if SUPPORTED_BAUD_RATES.contains(&rate) => {
                    self.baud_rate = rate;
                    self.respond(OK);
                }
                _ => self.respond(ERROR),
            }
        } else if upper.starts_with("AT+CMGS=") {
            let dest = text["AT+CMGS=".len()..]
                .strip_prefix('"')
                .and_then(|d| d.strip_suffix('"'))
                .filter(|d| is_valid_phone_number(d));
            match dest {
                Some(d) if self.text_mode => {
                    self.mode = Mode::Body {
                        destination: d.to_string(),
                    };
                    self.respond(PROMPT);
                }
                _ => self.respond(ERROR),
            }
        } else if let Some(arg) = upper.strip_prefix("AT+CMGR=") {
            let stored = arg
                .parse::<u32>()
                .ok()
                .filter(|_| self.text_mode)
                .and_then(|i| self.storage.remove(&i));
            match stored {
                Some(sms) => {
                    let response = format!(
                        "\r\n+CMGR: \"REC UNREAD\",\"{}\",\"\",\"{}\"\r\n{}\r\n\r\nOK\r\n",
                        sms.sender,
                        Self::timestamp(sms.received_ms),
                        sms.body
                    );
                    self.respond(response.as_bytes());
                }
                None => self.respond(ERROR),
            }
        } else {
            self.respond(ERROR);
        }
    }

    fn submit(&mut self, destination: String) {
        let body = String::from_utf8_lossy(&std::mem::take(&mut self.line)).into_owned();
        if self.error_budget > 0 {
            self.error_budget -= 1;
            self.respond(ERROR);
            return;
        }
        if body.chars().count() > SMS_MAX_CHARS {
            self.respond(ERROR);
            return;
        }
        let reference = self.next_reference;
        self.next_reference = self.next_reference % 255 + 1;
        self.sent.push(SentSms {
            t_ms: self.clock.now_ms(),
            destination,
            body,
            reference,
        });
        self.respond(format!("\r\n+CMGS: {reference}\r\n\r\nOK\r\n").as_bytes());
    }

    fn accept_byte(&mut self, byte: u8) {
        match &self.mode {
            Mode::Command => match byte {
                b'\r' => {
                    let line = std::mem::take(&mut self.line);
                    self.handle_command(&line);
                }
                b'\n' => {}
                CTRL_Z => {
                    self.protocol_violations += 1;
                    self.line.clear();
                    self.respond(ERROR);
                }
                ESC => self.line.clear(),
                _ => self.line.push(byte),
            },
            Mode::Body { destination } => match byte {
                CTRL_Z => {
                    let destination = destination.clone();
                    self.mode = Mode::Command;
                    self.submit(destination);
                }
                ESC => {
                    self.mode = Mode::Command;
                    self.line.clear();
                }
                _ => self.line.push(byte),
            },
        }
    }
}

impl Transport for VirtualModem {
    fn write(&mut self, bytes: &[u8]) -> Result<(), TransportError> {
        if self.closed {
            return Err(TransportError::Closed);
        }
        self.transcript.push(TranscriptEntry {
            t_ms: self.clock.now_ms(),
            direction: Direction::ToModem,
            bytes: bytes.to_vec(),
        });
        if self.silent() {
            return Ok(());
        }
        for &b in bytes {
            self.accept_byte(b);
        }
        Ok(())
    }

    fn read(&mut self) -> Result<Vec<u8>, TransportError> {
        if self.closed {
            return Err(TransportError::Closed);
        }
        if self.silent() || self.output.is_empty() {
            return Ok(Vec::new());
        }
        let out = std::mem::take(&mut self.output);
        self.transcript.push(TranscriptEntry {
            t_ms: self.clock.now_ms(),
            direction: Direction::FromModem,
            bytes: out.clone(),
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exchange(m: &mut VirtualModem, input: &[u8]) -> Vec<u8> {
        m.write(input).unwrap();
        m.read().unwrap()
    }

    #[test]
    fn basic_responses() {
        let mut m = VirtualModem::new(SimClock::new(0));
        assert_eq!(exchange(&mut m, b"AT\r"), b"\r\nOK\r\n");
        assert_eq!(exchange(&mut m, b"GARBAGE\r"), b"\r\nERROR\r\n");
        // CMGS is refused until text mode is selected
        assert_eq!(exchange(&mut m, b"AT+CMGS=\"+1555\"\r"), b"\r\nERROR\r\n");
        assert_eq!(exchange(&mut m, b"AT+CMGF=1\r"), b"\r\nOK\r\n");
        assert_eq!(exchange(&mut m, b"AT+CMGS=\"+1555\"\r"), b"\r\n> ");
        assert_eq!(exchange(&mut m, b"HI\x1a"), b"\r\n+CMGS: 1\r\n\r\nOK\r\n");
        assert_eq!(m.sent()[0].body, "HI");
        assert_eq!(m.sent()[0].destination, "+1555");
    }

    #[test]
    fn baud_rate_command() {
        let mut m = VirtualModem::new(SimClock::new(0));
        assert_eq!(exchange(&mut m, b"AT+IPR=9600\r"), b"\r\nOK\r\n");
        assert_eq!(m.baud_rate(), 9600);
        assert_eq!(exchange(&mut m, b"AT+IPR=1000\r"), b"\r\nERROR\r\n");
    }

    #[test]
    fn inbound_store_read_and_delete() {
        let clock = SimClock::new(3_723_000);
        let mut m = VirtualModem::new(clock);
        assert_eq!(m.inject_inbound("+15550123", "STATUS"), 1);
        assert_eq!(m.read().unwrap(), b"\r\n+CMTI: \"SM\",1\r\n");
        exchange(&mut m, b"AT+CMGF=1\r");
        assert_eq!(
            exchange(&mut m, b"AT+CMGR=1\r"),
            b"\r\n+CMGR: \"REC UNREAD\",\"+15550123\",\"\",\"24/01/01,01:02:03+00\"\r\nSTATUS\r\n\r\nOK\r\n"
        );
        assert_eq!(m.stored_count(), 0);
        assert_eq!(exchange(&mut m, b"AT+CMGR=1\r"), b"\r\nERROR\r\n");
    }

    #[test]
    fn faults() {
        let clock = SimClock::new(0);
        let mut m = VirtualModem::new(clock.clone());
        exchange(&mut m, b"AT+CMGF=1\r");
        m.apply_fault(ModemFault::ErrorOnce);
        exchange(&mut m, b"AT+CMGS=\"+1\"\r");
        assert_eq!(exchange(&mut m, b"X\x1a"), b"\r\nERROR\r\n");
        assert!(m.sent().is_empty());

        m.apply_fault(ModemFault::SilentFor(1000));
        assert!(exchange(&mut m, b"AT\r").is_empty());
        clock.sleep_ms(1000);
        assert_eq!(exchange(&mut m, b"AT\r"), b"\r\nOK\r\n");
    }

    #[test]
    fn body_terminator_outside_prompt_is_flagged() {
        let mut m = VirtualModem::new(SimClock::new(0));
        assert_eq!(exchange(&mut m, b"HI\x1a"), b"\r\nERROR\r\n");
        assert_eq!(m.protocol_violations(), 1);
    }

    #[test]
    fn escape_aborts_body() {
        let mut m = VirtualModem::new(SimClock::new(0));
        exchange(&mut m, b"AT+CMGF=1\r");
        exchange(&mut m, b"AT+CMGS=\"+1\"\r");
        assert!(exchange(&mut m, b"half\x1b").is_empty());
        assert_eq!(exchange(&mut m, b"AT\r"), b"\r\nOK\r\n");
        assert!(m.sent().is_empty());
    }

    #[test]
    fn closed_transport_errors() {
        let mut m = VirtualModem::new(SimClock::new(0));
        m.close();
        assert_eq!(m.write(b"AT\r"), Err(TransportError::Closed));
        assert_eq!(m.read(), Err(TransportError::Closed));
    }
}
