use smartcar_core::clock::{Clock, SimClock};
use smartcar_core::error::TransportError;
use smartcar_core::modem::{decode_stream, encode_command, AtEvent, InboundSms, ModemCommand, Session, Transport};
use smartcar_core::sim::modem::{Direction, VirtualModem};
use smartcar_core::sim::ModemFault;
use smartcar_core::{Config, ModemError};

const TRANSCRIPT: &str = include_str!("data/sim900_text_mode.transcript");

fn unescape(quoted: &str) -> Vec<u8> {
    let inner = quoted
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or_else(|| panic!("payload not quoted: {quoted}"));
    let bytes = inner.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'\\' {
            out.push(bytes[i]);
            i += 1;
            continue;
        }
        match bytes[i + 1] {
            b'r' => out.push(b'\r'),
            b'n' => out.push(b'\n'),
            b'"' => out.push(b'"'),
            b'\\' => out.push(b'\\'),
            b'x' => {
                let hex = std::str::from_utf8(&bytes[i + 2..i + 4]).unwrap();
                out.push(u8::from_str_radix(hex, 16).unwrap());
                i += 2;
            }
            other => panic!("bad escape \\{}", other as char),
        }
        i += 2;
    }
    out
}

/// Splits `"payload" = annotation` honoring escaped quotes.
fn split_payload(rest: &str) -> (Vec<u8>, Option<&str>) {
    let bytes = rest.as_bytes();
    let mut end = 1;
    while bytes[end] != b'"' || bytes[end - 1] == b'\\' && bytes[end - 2] != b'\\' {
        end += 1;
    }
    let payload = unescape(&rest[..=end]);
    let annotation = rest[end + 1..].trim().strip_prefix('=').map(str::trim);
    (payload, annotation)
}

fn parse_command(text: &str) -> ModemCommand {
    let (word, arg) = text.split_once(' ').unwrap_or((text, ""));
    match word {
        "attention" => ModemCommand::Attention,
        "text_mode" => ModemCommand::SetTextMode,
        "baud" => ModemCommand::SetBaudRate(arg.parse().unwrap()),
        "header" => ModemCommand::SendSmsHeader(arg.to_string()),
        "body" => ModemCommand::SmsBody(arg.to_string()),
        "read" => ModemCommand::ReadSms(arg.parse().unwrap()),
        other => panic!("unknown command annotation {other}"),
    }
}

fn parse_events(text: &str) -> Vec<AtEvent> {
    text.split(';')
        .map(str::trim)
        .map(|ev| {
            let mut parts = ev.splitn(3, ' ');
            match parts.next().unwrap() {
                "ok" => AtEvent::Ok,
                "error" => AtEvent::Error,
                "prompt" => AtEvent::Prompt,
                "arrived" => AtEvent::SmsArrived(parts.next().unwrap().parse().unwrap()),
                "reference" => AtEvent::MessageReference(parts.next().unwrap().parse().unwrap()),
                "inbound" => AtEvent::InboundSms(InboundSms {
                    sender: parts.next().unwrap().to_string(),
                    body: parts.next().unwrap_or("").to_string(),
                }),
                other => panic!("unknown event annotation {other}"),
            }
        })
        .collect()
}

#[test]
fn golden_transcript_matches_encoder_decoder_and_virtual_modem() {
    let mut modem = VirtualModem::new(SimClock::new(0));
    let mut checked = 0;
    for (n, line) in TRANSCRIPT.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (dir, rest) = line.split_at(1);
        let rest = rest.trim();
        match dir {
            ">" => {
                let (bytes, annotation) = split_payload(rest);
                if let Some(cmd) = annotation {
                    assert_eq!(encode_command(&parse_command(cmd)).unwrap(), bytes, "line {}", n + 1);
                }
                modem.write(&bytes).unwrap();
            }
            "<" => {
                let (bytes, annotation) = split_payload(rest);
                assert_eq!(
                    String::from_utf8_lossy(&modem.read().unwrap()),
                    String::from_utf8_lossy(&bytes),
                    "line {}",
                    n + 1
                );
                let (events, remainder) = decode_stream(&bytes);
                assert!(remainder.is_empty(), "line {}", n + 1);
                assert_eq!(events, parse_events(annotation.unwrap()), "line {}", n + 1);
                assert!(!events.iter().any(|e| matches!(e, AtEvent::Line(_))));
            }
            "!" => {
                let mut parts = rest.splitn(3, ' ');
                assert_eq!(parts.next(), Some("inbound"));
                modem.inject_inbound(parts.next().unwrap(), parts.next().unwrap_or(""));
            }
            other => panic!("line {}: bad direction {other}", n + 1),
        }
        checked += 1;
    }
    assert!(checked > 20);
    assert!(modem.read().unwrap().is_empty());
    assert_eq!(modem.sent().len(), 2);
    assert_eq!(modem.stored_count(), 2);
}

fn session(clock: &SimClock) -> Session<VirtualModem> {
    Session::new(VirtualModem::new(clock.clone()))
}

#[test]
fn send_sms_normal_mode() {
    let clock = SimClock::new(0);
    let mut s = session(&clock);
    let outcome = s.send_sms("+15550100", "HELLO", &Config::default(), &clock);
    assert!(outcome.delivered);
    assert_eq!(outcome.attempts, 1);
    assert_eq!(outcome.failure_reason, None);
    assert_eq!(s.transport().sent()[0].body, "HELLO");
    assert_eq!(s.last_message_reference(), Some(1));
    assert_eq!(clock.now_ms(), 0);
}

#[test]
fn send_sms_retries_after_errors() {
    let clock = SimClock::new(0);
    let cfg = Config::default();
    let mut s = session(&clock);
    s.transport_mut().apply_fault(ModemFault::ErrorOnce);
    s.transport_mut().apply_fault(ModemFault::ErrorOnce);
    let outcome = s.send_sms("+15550100", "HELLO", &cfg, &clock);
    assert!(outcome.delivered);
    assert_eq!(outcome.attempts, 3);
    assert_eq!(clock.now_ms(), 2 * cfg.sms_retry_backoff_ms);
    assert_eq!(s.transport().sent().len(), 1);
}

#[test]
fn send_sms_gives_up_on_silence() {
    let clock = SimClock::new(0);
    let cfg = Config::default();
    let mut s = session(&clock);
    s.transport_mut().apply_fault(ModemFault::SilentFor(1_000_000));
    let outcome = s.send_sms("+15550100", "HELLO", &cfg, &clock);
    assert!(!outcome.delivered);
    assert_eq!(outcome.attempts, cfg.sms_retry_max + 1);
    assert_eq!(outcome.failure_reason.as_deref(), Some("timeout"));
    let expected = 4 * cfg.sms_ok_timeout_ms + 3 * cfg.sms_retry_backoff_ms;
    assert_eq!(clock.now_ms(), expected);
}

#[test]
fn send_sms_recovers_when_silence_ends_mid_body() {
    // silence begins after the prompt, so the first attempt times out
    // waiting for the final OK with the modem still in body mode
    struct Script {
        inner: VirtualModem,
        clock: SimClock,
        writes: usize,
    }
    impl Transport for Script {
        fn write(&mut self, bytes: &[u8]) -> Result<(), TransportError> {
            self.writes += 1;
            if self.writes == 3 {
                self.inner.apply_fault(ModemFault::SilentFor(3_000));
            }
            self.inner.write(bytes)
        }
        fn read(&mut self) -> Result<Vec<u8>, TransportError> {
            let _ = self.clock.now_ms();
            self.inner.read()
        }
    }
    let clock = SimClock::new(0);
    let cfg = Config::default();
    let mut s = Session::new(Script {
        inner: VirtualModem::new(clock.clone()),
        clock: clock.clone(),
        writes: 0,
    });
    let outcome = s.send_sms("+15550100", "HELLO", &cfg, &clock);
    assert!(outcome.delivered, "{outcome:?}");
    assert_eq!(outcome.attempts, 2);
    assert_eq!(s.transport().inner.sent().len(), 1);
    assert_eq!(s.transport().inner.protocol_violations(), 0);
}

#[test]
fn send_sms_on_closed_transport_fails_immediately() {
    let clock = SimClock::new(0);
    let mut s = session(&clock);
    s.transport_mut().close();
    let outcome = s.send_sms("+15550100", "HELLO", &Config::default(), &clock);
    assert!(!outcome.delivered);
    assert_eq!(outcome.attempts, 1);
    assert_eq!(outcome.failure_reason.as_deref(), Some("transport closed"));
    assert_eq!(clock.now_ms(), 0);
}

#[test]
fn send_sms_rejects_invalid_message_without_traffic() {
    let clock = SimClock::new(0);
    let mut s = session(&clock);
    let outcome = s.send_sms("+15550100", &"x".repeat(161), &Config::default(), &clock);
    assert!(!outcome.delivered);
    assert!(s.transport().transcript().is_empty());
}

#[test]
fn body_only_follows_prompt() {
    let clock = SimClock::new(0);
    let cfg = Config::default();
    let mut s = session(&clock);
    s.transport_mut().apply_fault(ModemFault::ErrorOnce);
    s.send_sms("+15550100", "ONE", &cfg, &clock);
    s.transport_mut().apply_fault(ModemFault::SilentFor(7_000));
    s.send_sms("+15550100", "TWO", &cfg, &clock);
    s.send_sms("+15550100", "THREE", &cfg, &clock);

    let mut last_event = None;
    for entry in s.transport().transcript() {
        match entry.direction {
            Direction::FromModem => {
                let (events, _) = decode_stream(&entry.bytes);
                if let Some(ev) = events.last() {
                    last_event = Some(ev.clone());
                }
            }
            Direction::ToModem => {
                if entry.bytes.last() == Some(&0x1A) {
                    assert_eq!(last_event, Some(AtEvent::Prompt));
                }
            }
        }
    }
    assert_eq!(s.transport().protocol_violations(), 0);
    assert_eq!(s.transport().sent().len(), 3);
}

#[test]
fn fetch_inbound_round_trip_and_errors() {
    let clock = SimClock::new(0);
    let cfg = Config::default();
    let mut s = session(&clock);
    let index = s.transport_mut().inject_inbound("+15550123", "STATUS");
    assert_eq!(index, 1);
    assert_eq!(s.poll_unsolicited().unwrap(), vec![AtEvent::SmsArrived(1)]);
    let sms = s.fetch_inbound(1, &cfg, &clock).unwrap();
    assert_eq!(
        sms,
        InboundSms {
            sender: "+15550123".into(),
            body: "STATUS".into()
        }
    );
    assert_eq!(s.transport().stored_count(), 0);
    assert_eq!(s.fetch_inbound(1, &cfg, &clock), Err(ModemError::ModemRejected));
    assert_eq!(s.fetch_inbound(99, &cfg, &clock), Err(ModemError::ModemRejected));
}

#[test]
fn fetch_preserves_body_bytes() {
    let clock = SimClock::new(0);
    let cfg = Config::default();
    let mut s = session(&clock);
    s.transport_mut().inject_inbound("+15550123", "  Loc, please!  ");
    s.poll_unsolicited().unwrap();
    assert_eq!(s.fetch_inbound(1, &cfg, &clock).unwrap().body, "  Loc, please!  ");
}

#[test]
fn arrivals_during_send_are_queued() {
    let clock = SimClock::new(0);
    let cfg = Config::default();
    let mut s = session(&clock);
    s.transport_mut().inject_inbound("+15550123", "HELP");
    assert!(s.send_sms("+15550100", "HI", &cfg, &clock).delivered);
    assert_eq!(s.poll_unsolicited().unwrap(), vec![AtEvent::SmsArrived(1)]);
    assert!(s.poll_unsolicited().unwrap().is_empty());
}

#[test]
fn every_command_yields_structured_events() {
    let clock = SimClock::new(0);
    let mut modem = VirtualModem::new(clock);
    modem.inject_inbound("+15550123", "LOC");
    let commands = [
        ModemCommand::Attention,
        ModemCommand::SetBaudRate(9600),
        ModemCommand::SetTextMode,
        ModemCommand::SendSmsHeader("+15550100".into()),
        ModemCommand::SmsBody("PING".into()),
        ModemCommand::ReadSms(1),
        ModemCommand::ReadSms(1),
        ModemCommand::SendSmsHeader("+15550100".into()),
        ModemCommand::AbortBody,
    ];
    let mut stream = modem.read().unwrap();
    for cmd in &commands {
        modem.write(&encode_command(cmd).unwrap()).unwrap();
        stream.extend(modem.read().unwrap());
    }
    let (events, rest) = decode_stream(&stream);
    assert!(rest.is_empty());
    assert!(events.iter().all(|e| !matches!(e, AtEvent::Line(_))), "{events:?}");
    assert_eq!(events.len(), 11);
}

#[test]
fn virtual_modem_wire_examples() {
    let mut modem = VirtualModem::new(SimClock::new(0));
    let mut exchange = |bytes: &[u8]| {
        modem.write(bytes).unwrap();
        modem.read().unwrap()
    };
    assert_eq!(exchange(b"AT\r"), b"\r\nOK\r\n");
    assert_eq!(exchange(b"GARBAGE\r"), b"\r\nERROR\r\n");
    // SIM900 powers up in PDU mode, so a text-mode header needs CMGF=1 first
    assert_eq!(exchange(b"AT+CMGS=\"+1555\"\r"), b"\r\nERROR\r\n");
    assert_eq!(exchange(b"AT+CMGF=1\r"), b"\r\nOK\r\n");
    assert_eq!(exchange(b"AT+CMGS=\"+1555\"\r"), b"\r\n> ");
    assert_eq!(exchange(b"HELLO\x1a"), b"\r\n+CMGS: 1\r\n\r\nOK\r\n");
}
