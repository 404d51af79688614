//! Fixed-tick, single-threaded executor wiring the controller to the
//! virtual devices.
//!
//! Each tick: deliver due scenario events, feed GPS sentences, fetch any
//! inbound SMS, sample the sensor board, and carry out the resulting actions.
//! Sending an SMS blocks on the simulated clock; events that fall due while
//! a send is in progress are delivered on the first tick after it returns.

use crate::clock::{Clock, SimClock};
use crate::controller::{Action, ControllerState, Input};
use crate::modem::{AtEvent, Session};
use crate::nmea::parse_sentence;
use crate::sim::gps::VirtualGps;
use crate::sim::modem::VirtualModem;
use crate::sim::report::{Record, SimReport};
use crate::sim::scenario::{ScenarioEvent, ScenarioEventKind};
use crate::types::{Config, SensorFrame};

/// Current level of every simulated sensor channel.
#[derive(Debug, Clone, Copy)]
struct SensorBoard {
    impact_pulse: bool,
    panic: bool,
    alcohol: u16,
    rain_wet: bool,
    rain_intensity: u16,
    temp_c: f64,
    humidity_pct: u8,
}

impl Default for SensorBoard {
    fn default() -> Self {
        SensorBoard {
            impact_pulse: false,
            panic: false,
            alcohol: 0,
            rain_wet: false,
            rain_intensity: 0,
            temp_c: 25.0,
            humidity_pct: 50,
        }
    }
}

impl SensorBoard {
    fn frame(&self, t_ms: u64) -> SensorFrame {
        SensorFrame {
            t_ms,
            impact: self.impact_pulse,
            panic: self.panic,
            alcohol_raw: self.alcohol,
            rain_wet: self.rain_wet,
            rain_intensity: self.rain_intensity,
            temp_c: self.temp_c,
            humidity_pct: self.humidity_pct,
        }
    }
}

struct Simulation<'a> {
    config: &'a Config,
    clock: SimClock,
    session: Session<VirtualModem>,
    gps: VirtualGps,
    board: SensorBoard,
    controller: ControllerState,
    report: SimReport,
    airbag_asserted: bool,
    send_actions: u64,
}

impl<'a> Simulation<'a> {
    fn new(config: &'a Config) -> Self {
        let clock = SimClock::new(0);
        Simulation {
            config,
            session: Session::new(VirtualModem::new(clock.clone())),
            clock,
            gps: VirtualGps::new(),
            board: SensorBoard::default(),
            controller: ControllerState::new(),
            report: SimReport::default(),
            airbag_asserted: false,
            send_actions: 0,
        }
    }

    fn now(&self) -> u64 {
        self.clock.now_ms()
    }

    fn violation(&mut self, message: String) {
        let t_ms = self.now();
        self.report.records.push(Record::Violation { t_ms, message });
    }

    fn feed(&mut self, input: Input, cause_ms: u64) {
        let now = self.now();
        let actions = self.controller.step(&input, self.config, now);
        for message in self.controller.invariant_violations(self.config) {
            self.violation(message);
        }
        for action in actions {
            self.perform(action, cause_ms);
        }
    }

    fn perform(&mut self, action: Action, cause_ms: u64) {
        let t_ms = self.now();
        if t_ms < cause_ms {
            self.violation(format!("action at {t_ms} precedes its cause at {cause_ms}"));
        }
        self.report.records.push(Record::Action {
            t_ms,
            cause_ms,
            action: action.clone(),
        });
        match action {
            Action::AssertAirbagLine => self.airbag_asserted = true,
            Action::SendAlert(alert) => self.send(alert.destination, alert.body),
            Action::SendReply { dest, text } => self.send(dest, text),
            Action::SetWiper(_) | Action::SetEngine(_) | Action::Log(_) => {}
        }
    }

    fn send(&mut self, destination: String, body: String) {
        self.send_actions += 1;
        self.report.records.push(Record::SmsBegin {
            t_ms: self.now(),
            destination: destination.clone(),
        });
        let outcome = self.session.send_sms(&destination, &body, self.config, &self.clock);
        let t_ms = self.now();
        let max_attempts = self.config.sms_retry_max + 1;
        if outcome.attempts > max_attempts {
            self.violation(format!(
                "{} send attempts exceed limit {max_attempts}",
                outcome.attempts
            ));
        }
        self.report.counters.retries += u64::from(outcome.attempts.saturating_sub(1));
        if outcome.delivered {
            self.report.counters.delivered += 1;
            self.report.records.push(Record::Delivered {
                t_ms,
                destination,
                body,
                attempts: outcome.attempts,
            });
        } else {
            self.report.counters.failed += 1;
            self.report.records.push(Record::DeliveryFailed {
                t_ms,
                destination,
                body,
                attempts: outcome.attempts,
                reason: outcome.failure_reason.unwrap_or_default(),
            });
        }
    }

    fn deliver(&mut self, event: &ScenarioEvent) {
        match &event.event {
            ScenarioEventKind::Impact(level) => self.board.impact_pulse |= *level,
            ScenarioEventKind::Panic(level) => self.board.panic = *level,
            ScenarioEventKind::Alcohol(counts) => self.board.alcohol = *counts,
            ScenarioEventKind::Rain { wet, intensity } => {
                self.board.rain_wet = *wet;
                self.board.rain_intensity = *intensity;
            }
            ScenarioEventKind::Cabin { temp_c, humidity_pct } => {
                self.board.temp_c = *temp_c;
                self.board.humidity_pct = *humidity_pct;
            }
            ScenarioEventKind::GpsLine(line) => self.feed(Input::Nmea(parse_sentence(line)), event.t_ms),
            ScenarioEventKind::GpsFix { lat, lon } => self.gps.set_fix(*lat, *lon),
            ScenarioEventKind::SmsIn { sender, body } => {
                self.session.transport_mut().inject_inbound(sender, body);
            }
            ScenarioEventKind::ModemFault(fault) => self.session.transport_mut().apply_fault(*fault),
        }
    }

    fn service_modem(&mut self) {
        let events = match self.session.poll_unsolicited() {
            Ok(events) => events,
            Err(e) => {
                self.violation(format!("modem transport: {e}"));
                return;
            }
        };
        for event in events {
            let AtEvent::SmsArrived(index) = event else {
                continue;
            };
            let cause_ms = self.now();
            match self.session.fetch_inbound(index, self.config, &self.clock) {
                Ok(sms) => {
                    self.report.records.push(Record::Inbound {
                        t_ms: self.now(),
                        index,
                        sender: sms.sender.clone(),
                        body: sms.body.clone(),
                    });
                    self.feed(Input::Sms(sms), cause_ms);
                }
                Err(e) => self.report.records.push(Record::FetchFailed {
                    t_ms: self.now(),
                    index,
                    reason: e.to_string(),
                }),
            }
        }
    }

    fn tick(&mut self, events: &[ScenarioEvent]) {
        for event in events {
            self.deliver(event);
        }
        let now = self.now();
        for line in self.gps.poll(now) {
            self.feed(Input::Nmea(parse_sentence(&line)), now);
        }
        self.service_modem();
        let now = self.now();
        let frame = self.board.frame(now);
        self.feed(Input::Frame(frame), now);
        self.board.impact_pulse = false;
    }

    fn finish(mut self) -> SimReport {
        let actions = self
            .report
            .records
            .iter()
            .filter(|r| {
                matches!(
                    r,
                    Record::Action {
                        action: Action::SendAlert(_) | Action::SendReply { .. },
                        ..
                    }
                )
            })
            .count() as u64;
        let outcomes = self.report.counters.delivered + self.report.counters.failed;
        if actions != outcomes || actions != self.send_actions {
            self.violation(format!("{actions} send actions but {outcomes} delivery outcomes"));
        }
        let protocol_violations = u64::from(self.session.transport().protocol_violations());
        if protocol_violations > 0 {
            self.violation(format!("{protocol_violations} SMS bodies sent without a prompt"));
        }
        let st = &self.controller;
        let final_state = crate::sim::report::FinalState {
            engine_enabled: st.engine_enabled,
            wiper: st.wiper.mode,
            airbag_asserted: self.airbag_asserted,
            alcohol_ema: st.alcohol_ema,
            fix: st.gps.last_fix.map(|f| f.coordinate_text()),
            modem_stored: self.session.transport().stored_count(),
            end_ms: self.clock.now_ms(),
        };
        let counters = &mut self.report.counters;
        counters.sentences = st.nmea.sentences;
        counters.accepted_fixes = st.nmea.accepted;
        counters.checksum_failures = st.nmea.checksum_failures;
        counters.unsupported_sentences = st.nmea.unsupported;
        counters.protocol_violations = protocol_violations;
        self.report.final_state = final_state;
        self.report
    }
}

/// Runs `scenario` (sorted by time) against a fresh controller and virtual
/// devices until simulation time `until_ms`.
pub fn run(scenario: &[ScenarioEvent], config: &Config, until_ms: u64) -> SimReport {
    let mut sim = Simulation::new(config);
    let tick = config.tick_ms;
    let mut next_event = 0;
    let mut t = 0;
    while t <= until_ms {
        sim.clock.advance_to(t);
        let due = scenario[next_event..].iter().take_while(|e| e.t_ms <= t).count();
        sim.tick(&scenario[next_event..next_event + due]);
        next_event += due;
        // a blocking send may have pushed the clock past the next tick
        let now = sim.now();
        t = (t + tick).max(now.div_ceil(tick) * tick);
    }
    sim.finish()
}

/// Default horizon: long enough after the last event for an accident alert
/// to wait out its GPS window and a send to exhaust its retries.
pub fn default_until_ms(scenario: &[ScenarioEvent], config: &Config) -> u64 {
    let last = scenario.iter().map(|e| e.t_ms).max().unwrap_or(0);
    let retries = u64::from(config.sms_retry_max) + 1;
    let sending = retries * config.sms_ok_timeout_ms * 3 + retries * config.sms_retry_backoff_ms;
    last + config.gps_wait_ms.max(config.gps_stale_ms) + sending
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::load_scenario;

    #[test]
    fn empty_scenario_is_quiet() {
        let report = run(&[], &Config::default(), 10_000);
        assert!(report.outbound_sms().is_empty());
        assert!(report.actions().is_empty());
        assert!(report.violations().is_empty());
        assert_eq!(report.counters.sentences, 11);
        assert_eq!(report.final_state.end_ms, 10_000);
    }

    #[test]
    fn late_events_after_blocking_send_keep_order() {
        let src = "t=0 fault silent 100000\nt=100 panic 1\nt=200 panic 0\nt=300 alcohol 1000\n";
        let cfg = Config::default();
        let report = run(&load_scenario(src).unwrap(), &cfg, 40_000);
        assert!(report.violations().is_empty(), "{:?}", report.violations());
        let failed: Vec<_> = report
            .records
            .iter()
            .filter(|r| matches!(r, Record::DeliveryFailed { .. }))
            .collect();
        // panic alert and the alcohol alert both time out
        assert_eq!(failed.len(), 2);
        let times: Vec<u64> = report.actions().iter().map(|(t, _)| *t).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn default_horizon_covers_retries() {
        let cfg = Config::default();
        let ev = load_scenario("t=5000 panic 1").unwrap();
        assert!(default_until_ms(&ev, &cfg) >= 5000 + 26_000);
    }
}
