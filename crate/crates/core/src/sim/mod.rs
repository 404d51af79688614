//! Hardware-free stand-ins for the modem, GPS receiver and sensor board,
//! plus the scenario executor that drives them.

pub mod executor;
pub mod gps;
pub mod modem;
pub mod report;
pub mod scenario;

pub use executor::{default_until_ms, run};
pub use gps::VirtualGps;
pub use modem::VirtualModem;
pub use report::{Record, SimReport};
pub use scenario::{load_scenario, ModemFault, ScenarioEvent, ScenarioEventKind};
