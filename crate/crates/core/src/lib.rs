//! Deterministic smart-car telematics core.
//!
//! Protocol layers ([`nmea`], [`modem`], [`sms`]) feed a pure reactive
//! [`controller`]; the [`sim`] module supplies virtual devices and a
//! scenario-driven executor so the whole system runs without hardware.

pub mod clock;
pub mod controller;
pub mod error;
pub mod modem;
pub mod nmea;
pub mod sim;
pub mod sms;
pub mod types;

pub use clock::{Clock, SimClock};
pub use controller::{Action, ControllerState, Input, WiperCommand, WiperMode};
pub use error::{ConfigError, CoordinateError, ModemError, ScenarioError, TransportError};
pub use types::{AlertKind, AlertMessage, Config, GeoFix, SensorFrame};
