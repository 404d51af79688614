//! NMEA 0183 sentence framing and GGA/RMC decoding.
//!
//! Lines are delivered whole by the transport; nothing here reassembles
//! partial sentences. Every entry point is total over arbitrary bytes.

use crate::error::CoordinateError;
use crate::types::GeoFix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceKind {
    Gga,
    Rmc,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NmeaSentence {
    pub kind: SentenceKind,
    /// Comma-separated fields between `$` and `*`, address field first.
    pub raw_fields: Vec<String>,
    pub checksum_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hemisphere {
    North,
    South,
    East,
    West,
}

impl Hemisphere {
    pub fn from_field(field: &str) -> Result<Hemisphere, CoordinateError> {
        match field {
            "N" => Ok(Hemisphere::North),
            "S" => Ok(Hemisphere::South),
            "E" => Ok(Hemisphere::East),
            "W" => Ok(Hemisphere::West),
            other => Err(CoordinateError::Hemisphere(other.to_string())),
        }
    }

    fn sign(self) -> f64 {
        match self {
            Hemisphere::North | Hemisphere::East => 1.0,
            Hemisphere::South | Hemisphere::West => -1.0,
        }
    }
}

fn trim_line_end(line: &[u8]) -> &[u8] {
    let mut end = line.len();
    while end > 0 && matches!(line[end - 1], b'\r' | b'\n') {
        end -= 1;
    }
    &line[..end]
}

fn hex_value(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

/// XOR of every byte in `payload`.
pub fn checksum(payload: &[u8]) -> u8 {
    payload.iter().fold(0, |acc, b| acc ^ b)
}

/// True iff `line` is `$<payload>*hh` (optionally CR/LF terminated) and `hh`
/// equals the XOR of the payload bytes.
pub fn validate_checksum(line: impl AsRef<[u8]>) -> bool {
    let line = trim_line_end(line.as_ref());
    let Some(rest) = line.strip_prefix(b"$") else {
        return false;
    };
    let Some(star) = rest.iter().position(|&b| b == b'*') else {
        return false;
    };
    let (payload, suffix) = (&rest[..star], &rest[star + 1..]);
    if suffix.len() != 2 {
        return false;
    }
    match (hex_value(suffix[0]), hex_value(suffix[1])) {
        (Some(hi), Some(lo)) => checksum(payload) == (hi << 4 | lo),
        _ => false,
    }
}

/// Converts NMEA `ddmm.mmmm` / `dddmm.mmmm` to signed decimal degrees.
pub fn to_decimal_degrees(raw: &str, hemisphere: Hemisphere) -> Result<f64, CoordinateError> {
    let malformed = || CoordinateError::Malformed(raw.to_string());
    let (int_part, frac_part) = match raw.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (raw, None),
    };
    if !(4..=5).contains(&int_part.len()) || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    if let Some(frac) = frac_part {
        if !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
    }
    let split = int_part.len() - 2;
    let degrees: f64 = int_part[..split].parse().map_err(|_| malformed())?;
    let minutes_text = &raw[split..];
    let minutes: f64 = minutes_text.parse().map_err(|_| malformed())?;
    if minutes >= 60.0 {
        return Err(CoordinateError::MinutesOutOfRange(raw.to_string()));
    }
    let value = degrees + minutes / 60.0;
    if value > 180.0 {
        return Err(CoordinateError::OutOfRange(value));
    }
    Ok(hemisphere.sign() * value)
}

/// Number of fractional minute digits emitted by [`encode_coordinate`].
pub const MINUTE_DECIMALS: usize = 5;

/// Inverse of [`to_decimal_degrees`]: renders `degrees` as an NMEA
/// coordinate field pair, rounded to [`MINUTE_DECIMALS`] minute digits.
pub fn encode_coordinate(degrees: f64, is_latitude: bool) -> (String, &'static str) {
    let hemisphere = match (is_latitude, degrees < 0.0) {
        (true, false) => "N",
        (true, true) => "S",
        (false, false) => "E",
        (false, true) => "W",
    };
    let scale = 10u64.pow(MINUTE_DECIMALS as u32);
    let total = (degrees.abs() * 60.0 * scale as f64).round() as u64;
    let per_degree = 60 * scale;
    let whole_degrees = total / per_degree;
    let rem = total % per_degree;
    let minutes = rem / scale;
    let frac = rem % scale;
    let width = if is_latitude { 2 } else { 3 };
    let text = format!(
        "{whole_degrees:0width$}{minutes:02}.{frac:0digits$}",
        digits = MINUTE_DECIMALS
    );
    (text, hemisphere)
}

/// Wraps a payload (without `$`) into a framed sentence with checksum and CRLF.
pub fn frame_sentence(payload: &str) -> String {
    format!("${}*{:02X}\r\n", payload, checksum(payload.as_bytes()))
}

pub fn parse_sentence(line: impl AsRef<[u8]>) -> NmeaSentence {
    let line = line.as_ref();
    let checksum_ok = validate_checksum(line);
    let trimmed = trim_line_end(line);
    let body = trimmed.strip_prefix(b"$").unwrap_or(trimmed);
    let payload = match body.iter().position(|&b| b == b'*') {
        Some(star) => &body[..star],
        None => body,
    };
    let raw_fields: Vec<String> = String::from_utf8_lossy(payload)
        .split(',')
        .map(str::to_string)
        .collect();
    let kind = if trimmed.first() != Some(&b'$') {
        SentenceKind::Unsupported
    } else {
        match raw_fields[0].as_str() {
            "GPGGA" | "GNGGA" => SentenceKind::Gga,
            "GPRMC" | "GNRMC" => SentenceKind::Rmc,
            _ => SentenceKind::Unsupported,
        }
    };
    NmeaSentence {
        kind,
        raw_fields,
        checksum_ok,
    }
}

/// Why a sentence did or did not change the GPS state.
#[derive(Debug, Clone, PartialEq)]
pub enum FixUpdate {
    Accepted,
    BadChecksum,
    Unsupported,
    NoFix,
    BadCoordinates(CoordinateError),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GpsState {
    pub last_fix: Option<GeoFix>,
    pub last_update_ms: u64,
}

impl GpsState {
    /// Returns the latest fix if it is at most `stale_ms` old at `now_ms`.
    pub fn fresh_fix(&self, now_ms: u64, stale_ms: u64) -> Option<&GeoFix> {
        self.last_fix
            .as_ref()
            .filter(|fix| fix.valid && now_ms.saturating_sub(fix.timestamp_ms) <= stale_ms)
    }

    /// Merge a parsed sentence. Only checksum-clean GGA with quality > 0 or
    /// RMC with status `A` are accepted; anything else leaves `self` untouched.
    pub fn update_fix(&mut self, sentence: &NmeaSentence, now_ms: u64) -> FixUpdate {
        if !sentence.checksum_ok {
            return FixUpdate::BadChecksum;
        }
        let field = |i: usize| sentence.raw_fields.get(i).map(String::as_str).unwrap_or("");
        let (lat_idx, satellites) = match sentence.kind {
            SentenceKind::Gga => {
                match field(6).parse::<u32>() {
                    Ok(q) if q > 0 => {}
                    _ => return FixUpdate::NoFix,
                }
                (2, field(7).parse::<u8>().ok())
            }
            SentenceKind::Rmc => {
                if field(2) != "A" {
                    return FixUpdate::NoFix;
                }
                (3, None)
            }
            SentenceKind::Unsupported => return FixUpdate::Unsupported,
        };
        let decode = || -> Result<(f64, f64), CoordinateError> {
            let lat = to_decimal_degrees(field(lat_idx), Hemisphere::from_field(field(lat_idx + 1))?)?;
            let lon = to_decimal_degrees(field(lat_idx + 2), Hemisphere::from_field(field(lat_idx + 3))?)?;
            if !matches!(field(lat_idx + 1), "N" | "S") || !matches!(field(lat_idx + 3), "E" | "W") {
                return Err(CoordinateError::Hemisphere(format!(
                    "{}/{}",
                    field(lat_idx + 1),
                    field(lat_idx + 3)
                )));
            }
            if lat.abs() > 90.0 {
                return Err(CoordinateError::OutOfRange(lat));
            }
            Ok((lat, lon))
        };
        let (latitude, longitude) = match decode() {
            Ok(pair) => pair,
            Err(e) => return FixUpdate::BadCoordinates(e),
        };
        let satellites = satellites.or_else(|| self.last_fix.map(|f| f.satellites)).unwrap_or(0);
        self.last_fix = Some(GeoFix {
            latitude,
            longitude,
            timestamp_ms: now_ms,
            valid: true,
            satellites,
        });
        self.last_update_ms = now_ms;
        FixUpdate::Accepted
    }
}
