//! 1 Hz NMEA feed standing in for a NEO-6M receiver.

use crate::nmea::{encode_coordinate, frame_sentence};

pub const GPS_PERIOD_MS: u64 = 1000;

/// Fixed UTC date stamped into generated RMC sentences (ddmmyy).
const SIM_DATE: &str = "010124";

fn utc_time(t_ms: u64) -> String {
    let secs = t_ms / 1000;
    format!(
        "{:02}{:02}{:02}.{:02}",
        (secs / 3600) % 24,
        (secs / 60) % 60,
        secs % 60,
        (t_ms % 1000) / 10
    )
}

pub fn gga_sentence(lat: f64, lon: f64, t_ms: u64) -> String {
    let (lat_text, ns) = encode_coordinate(lat, true);
    let (lon_text, ew) = encode_coordinate(lon, false);
    frame_sentence(&format!(
        "GPGGA,{},{lat_text},{ns},{lon_text},{ew},1,08,0.9,10.0,M,0.0,M,,",
        utc_time(t_ms)
    ))
}

pub fn rmc_sentence(lat: f64, lon: f64, t_ms: u64) -> String {
    let (lat_text, ns) = encode_coordinate(lat, true);
    let (lon_text, ew) = encode_coordinate(lon, false);
    frame_sentence(&format!(
        "GPRMC,{},A,{lat_text},{ns},{lon_text},{ew},0.00,0.00,{SIM_DATE},,,A",
        utc_time(t_ms)
    ))
}

/// RMC with status `V`: what the receiver says before its first fix.
pub fn void_rmc_sentence(t_ms: u64) -> String {
    frame_sentence(&format!("GPRMC,{},V,,,,,,,{SIM_DATE},,,N", utc_time(t_ms)))
}

/// Emits a GGA + RMC pair per epoch once a position is scheduled, and void
/// RMC sentences before that.
#[derive(Debug, Clone, Default)]
pub struct VirtualGps {
    position: Option<(f64, f64)>,
    next_epoch_ms: u64,
    emitted: u64,
}

impl VirtualGps {
    pub fn new() -> Self {
        Self::default()
    }

    /// The new position is reported from the next epoch on.
    pub fn set_fix(&mut self, lat: f64, lon: f64) {
        self.position = Some((lat, lon));
    }

    pub fn sentences_emitted(&self) -> u64 {
        self.emitted
    }

    /// Sentences due at `t_ms`. Epochs fall on whole seconds; if several were
    /// skipped only the latest is reported.
    pub fn poll(&mut self, t_ms: u64) -> Vec<String> {
        if t_ms < self.next_epoch_ms {
            return Vec::new();
        }
        let epoch = t_ms - t_ms % GPS_PERIOD_MS;
        self.next_epoch_ms = epoch + GPS_PERIOD_MS;
        let lines = match self.position {
            Some((lat, lon)) => vec![gga_sentence(lat, lon, epoch), rmc_sentence(lat, lon, epoch)],
            None => vec![void_rmc_sentence(epoch)],
        };
        self.emitted += lines.len() as u64;
        lines
    }
}
