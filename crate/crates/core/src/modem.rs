//! AT command protocol for SIM900-class GSM modems in SMS text mode.
//!
//! Commands are ASCII terminated by `\r`. Responses are framed `\r\n...\r\n`,
//! except the SMS body prompt which is `\r\n> ` with no trailing newline.
//! Message bodies are terminated by CTRL-Z (0x1A); ESC (0x1B) aborts one.

use std::collections::VecDeque;

use crate::clock::Clock;
use crate::error::{ModemError, TransportError};
use crate::types::{is_valid_phone_number, Config, SMS_MAX_CHARS};

pub const CTRL_Z: u8 = 0x1A;
pub const ESC: u8 = 0x1B;

/// Baud rates accepted by `AT+IPR`.
pub const SUPPORTED_BAUD_RATES: [u32; 8] = [1200, 2400, 4800, 9600, 19200, 38400, 57600, 115200];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModemCommand {
    Attention,
    SetTextMode,
    /// `AT+IPR`; has no effect on a simulated byte stream.
    SetBaudRate(u32),
    SendSmsHeader(String),
    SmsBody(String),
    /// Abandons a body after the prompt.
    AbortBody,
    ReadSms(u32),
}

/// Checks the body constraints: at most 160 characters of printable ASCII,
/// so one character is one GSM-7 septet.
pub fn check_sms_body(text: &str) -> Result<(), ModemError> {
    if let Some(c) = text.chars().find(|c| !(' '..='~').contains(c)) {
        return Err(ModemError::UnsupportedChar(c));
    }
    if text.len() > SMS_MAX_CHARS {
        return Err(ModemError::BodyTooLong(text.len()));
    }
    Ok(())
}

pub fn encode_command(cmd: &ModemCommand) -> Result<Vec<u8>, ModemError> {
    let bytes = match cmd {
        ModemCommand::Attention => b"AT\r".to_vec(),
        ModemCommand::SetTextMode => b"AT+CMGF=1\r".to_vec(),
        ModemCommand::SetBaudRate(rate) => format!("AT+IPR={rate}\r").into_bytes(),
        ModemCommand::SendSmsHeader(dest) => {
            if !is_valid_phone_number(dest) {
                return Err(ModemError::InvalidNumber(dest.clone()));
            }
            format!("AT+CMGS=\"{dest}\"\r").into_bytes()
        }
        ModemCommand::SmsBody(text) => {
            check_sms_body(text)?;
            let mut out = Vec::with_capacity(text.len() + 1);
            out.extend_from_slice(text.as_bytes());
            out.push(CTRL_Z);
            out
        }
        ModemCommand::AbortBody => vec![ESC],
        ModemCommand::ReadSms(index) => format!("AT+CMGR={index}\r").into_bytes(),
    };
    Ok(bytes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InboundSms {
    pub sender: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtEvent {
    Ok,
    Error,
    /// `> ` after an accepted `AT+CMGS` header.
    Prompt,
    /// `+CMTI: "<mem>",<index>` unsolicited notification.
    SmsArrived(u32),
    /// `+CMGS: <mr>` reference reported for a submitted message.
    MessageReference(u32),
    /// `+CMGR:` header plus the body line that follows it.
    InboundSms(InboundSms),
    Line(String),
}

fn strip_cr(line: &[u8]) -> &[u8] {
    line.strip_suffix(b"\r").unwrap_or(line)
}

fn quoted_fields(line: &str) -> Vec<&str> {
    line.split('"').skip(1).step_by(2).collect()
}

fn classify_line(line: &[u8]) -> AtEvent {
    let text = String::from_utf8_lossy(line);
    let text = text.as_ref();
    if text == "OK" {
        return AtEvent::Ok;
    }
    if text == "ERROR" || text.starts_with("+CMS ERROR") || text.starts_with("+CME ERROR") {
        return AtEvent::Error;
    }
    if let Some(rest) = text.strip_prefix("+CMTI:") {
        if let Some((mem, index)) = rest.trim().split_once(',') {
            if mem.len() >= 2 && mem.starts_with('"') && mem.ends_with('"') {
                if let Ok(index) = index.trim().parse() {
                    return AtEvent::SmsArrived(index);
                }
            }
        }
    }
    if let Some(rest) = text.strip_prefix("+CMGS:") {
        if let Ok(mr) = rest.trim().parse() {
            return AtEvent::MessageReference(mr);
        }
    }
    AtEvent::Line(text.to_string())
}

fn cmgr_sender(header: &[u8]) -> Option<String> {
    let text = String::from_utf8_lossy(header);
    quoted_fields(&text).get(1).map(|s| s.to_string())
}

/// Decodes every complete event in `buffer`. The returned remainder is the
/// unconsumed tail and must be prepended to the next chunk; decoding is
/// therefore independent of how the byte stream was split.
pub fn decode_stream(buffer: &[u8]) -> (Vec<AtEvent>, &[u8]) {
    let mut events = Vec::new();
    let mut pos = 0;
    loop {
        while pos < buffer.len() && matches!(buffer[pos], b'\r' | b'\n') {
            pos += 1;
        }
        let rest = &buffer[pos..];
        if rest.is_empty() {
            break;
        }
        if rest[0] == b'>' {
            match rest.get(1) {
                None => break,
                Some(b' ') => {
                    events.push(AtEvent::Prompt);
                    pos += 2;
                    continue;
                }
                Some(_) => {}
            }
        }
        let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
            break;
        };
        let line = strip_cr(&rest[..nl]);
        let next = pos + nl + 1;
        if line.starts_with(b"+CMGR:") {
            if let Some(sender) = cmgr_sender(line) {
                let after = &buffer[next..];
                let Some(body_nl) = after.iter().position(|&b| b == b'\n') else {
                    break;
                };
                let body = String::from_utf8_lossy(strip_cr(&after[..body_nl])).into_owned();
                events.push(AtEvent::InboundSms(InboundSms { sender, body }));
                pos = next + body_nl + 1;
                continue;
            }
        }
        events.push(classify_line(line));
        pos = next;
    }
    (events, &buffer[pos..])
}

/// Incremental wrapper around [`decode_stream`] that owns the remainder.
#[derive(Debug, Default, Clone)]
pub struct StreamDecoder {
    pending: Vec<u8>,
}

impl StreamDecoder {
    pub fn push(&mut self, chunk: &[u8]) -> Vec<AtEvent> {
        self.pending.extend_from_slice(chunk);
        let (events, rest) = decode_stream(&self.pending);
        let consumed = self.pending.len() - rest.len();
        self.pending.drain(..consumed);
        events
    }

    pub fn pending(&self) -> &[u8] {
        &self.pending
    }
}

/// Byte-level link to a modem.
pub trait Transport {
    fn write(&mut self, bytes: &[u8]) -> Result<(), TransportError>;
    /// Returns whatever bytes are available now, possibly none.
    fn read(&mut self) -> Result<Vec<u8>, TransportError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SendOutcome {
    pub delivered: bool,
    pub attempts: u32,
    pub failure_reason: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Expect {
    Ok,
    Prompt,
    Inbound,
}

enum Awaited {
    Done,
    Inbound(InboundSms),
}

/// One modem conversation. Owns its transport; events that arrive while a
/// request is in flight but are not part of it are queued for the caller.
pub struct Session<T: Transport> {
    transport: T,
    decoder: StreamDecoder,
    inbox: VecDeque<AtEvent>,
    unsolicited: VecDeque<AtEvent>,
    last_reference: Option<u32>,
}

impl<T: Transport> Session<T> {
    pub fn new(transport: T) -> Self {
        Session {
            transport,
            decoder: StreamDecoder::default(),
            inbox: VecDeque::new(),
            unsolicited: VecDeque::new(),
            last_reference: None,
        }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn transport_mut(&mut self) -> &mut T {
        &mut self.transport
    }

    pub fn last_message_reference(&self) -> Option<u32> {
        self.last_reference
    }

    fn pump(&mut self) -> Result<(), TransportError> {
        let bytes = self.transport.read()?;
        if !bytes.is_empty() {
            self.inbox.extend(self.decoder.push(&bytes));
        }
        Ok(())
    }

    fn send(&mut self, cmd: &ModemCommand) -> Result<(), ModemError> {
        let bytes = encode_command(cmd)?;
        self.transport.write(&bytes)?;
        Ok(())
    }

    fn await_response(&mut self, expect: Expect, config: &Config, clock: &impl Clock) -> Result<Awaited, ModemError> {
        let started = clock.now_ms();
        loop {
            self.pump()?;
            while let Some(event) = self.inbox.pop_front() {
                match (expect, event) {
                    (_, ev @ AtEvent::SmsArrived(_)) => self.unsolicited.push_back(ev),
                    (_, AtEvent::MessageReference(mr)) => self.last_reference = Some(mr),
                    (_, AtEvent::Line(_)) => {}
                    (_, AtEvent::Error) => return Err(ModemError::ModemRejected),
                    (Expect::Ok, AtEvent::Ok) | (Expect::Prompt, AtEvent::Prompt) => return Ok(Awaited::Done),
                    (Expect::Inbound, AtEvent::InboundSms(sms)) => return Ok(Awaited::Inbound(sms)),
                    _ => return Err(ModemError::Unexpected),
                }
            }
            if clock.now_ms().saturating_sub(started) >= config.sms_ok_timeout_ms {
                return Err(ModemError::Timeout);
            }
            clock.sleep_ms(config.tick_ms);
        }
    }

    /// Drops stale final results left over from an abandoned exchange.
    fn flush_stale(&mut self) -> Result<(), TransportError> {
        self.pump()?;
        for event in std::mem::take(&mut self.inbox) {
            match event {
                AtEvent::SmsArrived(_) => self.unsolicited.push_back(event),
                AtEvent::MessageReference(mr) => self.last_reference = Some(mr),
                _ => {}
            }
        }
        Ok(())
    }

    fn attempt_send(
        &mut self,
        dest: &str,
        body: &str,
        config: &Config,
        clock: &impl Clock,
        prompted: &mut bool,
    ) -> Result<(), ModemError> {
        self.flush_stale()?;
        self.send(&ModemCommand::SetTextMode)?;
        self.await_response(Expect::Ok, config, clock)?;
        self.send(&ModemCommand::SendSmsHeader(dest.to_string()))?;
        self.await_response(Expect::Prompt, config, clock)?;
        *prompted = true;
        self.send(&ModemCommand::SmsBody(body.to_string()))?;
        self.await_response(Expect::Ok, config, clock)?;
        Ok(())
    }

    /// Sends one text-mode SMS, retrying the whole exchange after
    /// `sms_retry_backoff_ms` on ERROR or timeout, at most `sms_retry_max` times.
    pub fn send_sms(&mut self, dest: &str, body: &str, config: &Config, clock: &impl Clock) -> SendOutcome {
        let failed = |attempts, reason: String| SendOutcome {
            delivered: false,
            attempts,
            failure_reason: Some(reason),
        };
        if let Err(e) =
            encode_command(&ModemCommand::SendSmsHeader(dest.to_string())).and_then(|_| check_sms_body(body))
        {
            return failed(1, format!("invalid message: {e}"));
        }

        let max_attempts = config.sms_retry_max + 1;
        let mut last_error = ModemError::Timeout;
        for attempt in 1..=max_attempts {
            let mut prompted = false;
            match self.attempt_send(dest, body, config, clock, &mut prompted) {
                Ok(()) => {
                    return SendOutcome {
                        delivered: true,
                        attempts: attempt,
                        failure_reason: None,
                    }
                }
                Err(ModemError::Transport(e)) => return failed(attempt, e.to_string()),
                Err(e) => last_error = e,
            }
            if prompted && last_error == ModemError::Timeout {
                // the modem may still be collecting body text
                if let Err(ModemError::Transport(e)) = self.send(&ModemCommand::AbortBody) {
                    return failed(attempt, e.to_string());
                }
            }
            if attempt < max_attempts {
                clock.sleep_ms(config.sms_retry_backoff_ms);
            }
        }
        let reason = match last_error {
            ModemError::Timeout => "timeout".to_string(),
            ModemError::ModemRejected => "error".to_string(),
            other => other.to_string(),
        };
        failed(max_attempts, reason)
    }

    /// Reads (and thereby consumes) the stored message at `index`.
    pub fn fetch_inbound(&mut self, index: u32, config: &Config, clock: &impl Clock) -> Result<InboundSms, ModemError> {
        self.flush_stale()?;
        self.send(&ModemCommand::SetTextMode)?;
        self.await_response(Expect::Ok, config, clock)?;
        self.send(&ModemCommand::ReadSms(index))?;
        let sms = match self.await_response(Expect::Inbound, config, clock)? {
            Awaited::Inbound(sms) => sms,
            Awaited::Done => return Err(ModemError::Unexpected),
        };
        self.await_response(Expect::Ok, config, clock)?;
        Ok(sms)
    }

    /// Unsolicited events seen so far, including any that arrived during
    /// earlier exchanges.
    pub fn poll_unsolicited(&mut self) -> Result<Vec<AtEvent>, TransportError> {
        self.pump()?;
        for event in std::mem::take(&mut self.inbox) {
            match event {
                AtEvent::MessageReference(mr) => self.last_reference = Some(mr),
                AtEvent::Line(_) | AtEvent::Ok | AtEvent::Error | AtEvent::Prompt => {}
                other => self.unsolicited.push_back(other),
            }
        }
        Ok(self.unsolicited.drain(..).collect())
    }
}
