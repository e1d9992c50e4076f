//! Survey log model and its two on-disk encodings.
//!
//! A recorded survey is a sequence of pings, each carrying a GPS fix, a
//! down-scan depth, and one side-scan intensity scanline. Two encodings
//! are supported:
//!
//! * `.bsl` — the compact little-endian binary format. A 16-byte header
//!   (magic `"BSL1"`, `u32` scanline width, `u64` ping count) followed by
//!   fixed-stride records: `f64 t`, `f64 lat`, `f64 lon`, `f32 depth`,
//!   then `width` `f32` intensity samples. The fixed stride makes random
//!   access O(1).
//! * CSV — one header row `t,lat,lon,depth,i0,...,i{W-1}`, then one row
//!   per ping. Floats are written in shortest round-trip form.
//!
//! Acquisition geometry (beam tilt, deadzone, intensity full-scale) is
//! deliberately *not* stored in either encoding; it travels out of band
//! as a [`SensorConfig`], normally from CLI flags. [`parse_log`] fills in
//! documented defaults which callers override via
//! [`SurveyLog::with_config`].
//!
//! Raw intensity samples are stored untouched: values may be negative
//! (electrical noise near the transducer) and are only cleaned up during
//! normalization downstream.

use std::fmt::Write as _;

use thiserror::Error;

/// Magic bytes opening every binary log.
pub const MAGIC: [u8; 4] = *b"BSL1";

/// Byte length of the binary header (magic + width + ping count).
pub const HEADER_LEN: usize = 16;

/// Default scanline width, samples.
pub const DEFAULT_SCANLINE_WIDTH: u32 = 700;

/// Default deadzone half-width, pixels, for full-width scanlines.
pub const DEFAULT_DEADZONE_HALFWIDTH: u32 = 10;

/// Default intensity full-scale: raw samples span `[0, 2.14e9]`.
pub const DEFAULT_INTENSITY_MAX: f64 = 2.14e9;

/// Default transducer beam tilt from vertical, degrees.
pub const DEFAULT_ALPHA2_DEG: f64 = 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum LogError {
    #[error("bad magic {found:02x?}, expected {MAGIC:02x?} (\"BSL1\")")]
    BadMagic { found: [u8; 4] },
    #[error("header truncated: {len} byte(s), need {HEADER_LEN}")]
    TruncatedHeader { len: usize },
    #[error("record truncated at ping {ping}")]
    TruncatedRecord { ping: u64 },
    #[error("declared scanline width is zero")]
    ZeroWidth,
    #[error("scanline width mismatch{}: expected {expected}, found {found}", ping.map(|p| format!(" at ping {p}")).unwrap_or_default())]
    WidthMismatch {
        ping: Option<usize>,
        expected: u32,
        found: u32,
    },
    #[error("non-finite {field} at ping {ping}")]
    NonFiniteField { ping: usize, field: &'static str },
    #[error("{field} out of range at ping {ping}: {value}")]
    FieldOutOfRange {
        ping: usize,
        field: &'static str,
        value: f64,
    },
    #[error("time went backwards at ping {ping}: {prev} -> {t}")]
    NonMonotonicTime { ping: usize, prev: f64, t: f64 },
    #[error("csv header mismatch: expected \"t,lat,lon,depth,i0,...\" for width {width}")]
    HeaderMismatch { width: u32 },
    #[error("csv row {row}: expected {expected} field(s), found {found}")]
    FieldCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("csv row {row}, column {column}: {value:?} is not a number")]
    NumericParse {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("invalid sensor config: {0}")]
    BadConfig(#[from] ConfigError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("beam tilt must lie strictly between 0 and pi/2 radians, got {0}")]
    AlphaOutOfRange(f64),
    #[error("scanline width must be at least 1")]
    ZeroWidth,
    #[error("deadzone half-width {deadzone} too wide for scanline width {width} (need 2*dz < W)")]
    DeadzoneTooWide { deadzone: u32, width: u32 },
    #[error("intensity full-scale must be finite and positive, got {0}")]
    BadIntensityMax(f64),
}

/// Per-survey acquisition geometry. Travels separately from the log
/// bytes; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig {
    /// Side-scan beam tilt from vertical, radians, in (0, pi/2).
    pub alpha2_rad: f64,
    /// Samples per scanline (W).
    pub scanline_width: u32,
    /// Half-width of the zeroed band around the scanline center, pixels.
    pub deadzone_halfwidth: u32,
    /// Raw intensity full-scale; normalization divides by this.
    pub intensity_max: f64,
}

impl SensorConfig {
    pub fn new(
        alpha2_rad: f64,
        scanline_width: u32,
        deadzone_halfwidth: u32,
        intensity_max: f64,
    ) -> Result<Self, ConfigError> {
        if !(alpha2_rad > 0.0 && alpha2_rad < std::f64::consts::FRAC_PI_2) {
            return Err(ConfigError::AlphaOutOfRange(alpha2_rad));
        }
        if scanline_width == 0 {
            return Err(ConfigError::ZeroWidth);
        }
        if 2 * deadzone_halfwidth as u64 >= scanline_width as u64 {
            return Err(ConfigError::DeadzoneTooWide {
                deadzone: deadzone_halfwidth,
                width: scanline_width,
            });
        }
        if !(intensity_max.is_finite() && intensity_max > 0.0) {
            return Err(ConfigError::BadIntensityMax(intensity_max));
        }
        Ok(Self {
            alpha2_rad,
            scanline_width,
            deadzone_halfwidth,
            intensity_max,
        })
    }

    /// Defaults for a given scanline width: 30-degree beam tilt, the
    /// standard full scale, and a deadzone clipped so narrow lines stay
    /// representable.
    pub fn defaults_for_width(scanline_width: u32) -> Result<Self, ConfigError> {
        Self::new(
            DEFAULT_ALPHA2_DEG.to_radians(),
            scanline_width,
            default_deadzone_halfwidth(scanline_width),
            DEFAULT_INTENSITY_MAX,
        )
    }
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self::defaults_for_width(DEFAULT_SCANLINE_WIDTH).expect("builtin defaults are valid")
    }
}

/// Deadzone default for a scanline width: 10 pixels, shrunk as needed so
/// `2*dz < W` always holds.
pub fn default_deadzone_halfwidth(scanline_width: u32) -> u32 {
    DEFAULT_DEADZONE_HALFWIDTH.min(scanline_width.saturating_sub(1) / 2)
}

/// One sonar ping: timestamp (seconds, non-decreasing across a log), GPS
/// fix, down-scan depth (meters, positive down), and the raw side-scan
/// scanline.
#[derive(Debug, Clone, PartialEq)]
pub struct PingRecord {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub depth: f32,
    pub scanline: Vec<f32>,
}

/// A validated survey: sensor geometry plus time-ordered pings whose
/// scanlines all share the configured width.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyLog {
    config: SensorConfig,
    pings: Vec<PingRecord>,
}

impl SurveyLog {
    /// Build a log from parts, checking every invariant the parsers
    /// enforce: field finiteness and ranges, time ordering, and scanline
    /// widths.
    pub fn new(config: SensorConfig, pings: Vec<PingRecord>) -> Result<Self, LogError> {
        let mut prev_t = f64::NEG_INFINITY;
        for (i, ping) in pings.iter().enumerate() {
            validate_ping(i, ping, prev_t)?;
            if ping.scanline.len() != config.scanline_width as usize {
                return Err(LogError::WidthMismatch {
                    ping: Some(i),
                    expected: config.scanline_width,
                    found: ping.scanline.len() as u32,
                });
            }
            prev_t = ping.t;
        }
        Ok(Self { config, pings })
    }

    /// Swap in out-of-band acquisition geometry. The configured width
    /// must match the width the log was recorded with.
    pub fn with_config(self, config: SensorConfig) -> Result<Self, LogError> {
        if config.scanline_width != self.config.scanline_width {
            return Err(LogError::WidthMismatch {
                ping: None,
                expected: self.config.scanline_width,
                found: config.scanline_width,
            });
        }
        Ok(Self { config, ..self })
    }

    pub fn config(&self) -> &SensorConfig {
        &self.config
    }

    pub fn pings(&self) -> &[PingRecord] {
        &self.pings
    }

    pub fn ping_count(&self) -> usize {
        self.pings.len()
    }

    pub fn width(&self) -> u32 {
        self.config.scanline_width
    }
}

fn validate_ping(i: usize, ping: &PingRecord, prev_t: f64) -> Result<(), LogError> {
    for (field, value) in [("t", ping.t), ("lat", ping.lat), ("lon", ping.lon)] {
        if !value.is_finite() {
            return Err(LogError::NonFiniteField { ping: i, field });
        }
    }
    if !ping.depth.is_finite() {
        return Err(LogError::NonFiniteField {
            ping: i,
            field: "depth",
        });
    }
    if ping.lat.abs() > 90.0 {
        return Err(LogError::FieldOutOfRange {
            ping: i,
            field: "lat",
            value: ping.lat,
        });
    }
    if ping.lon.abs() > 180.0 {
        return Err(LogError::FieldOutOfRange {
            ping: i,
            field: "lon",
            value: ping.lon,
        });
    }
    if ping.depth < 0.0 {
        return Err(LogError::FieldOutOfRange {
            ping: i,
            field: "depth",
            value: ping.depth as f64,
        });
    }
    if ping.t < prev_t {
        return Err(LogError::NonMonotonicTime {
            ping: i,
            prev: prev_t,
            t: ping.t,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// binary encoding
// ---------------------------------------------------------------------------

/// Parse a binary `.bsl` stream.
///
/// Total over the declared ping count: bytes after the last declared
/// record are ignored. The returned log carries
/// [`SensorConfig::defaults_for_width`] for the header's width; swap the
/// real geometry in with [`SurveyLog::with_config`].
pub fn parse_log(bytes: &[u8]) -> Result<SurveyLog, LogError> {
    if bytes.len() >= 4 && bytes[..4] != MAGIC {
        let mut found = [0u8; 4];
        found.copy_from_slice(&bytes[..4]);
        return Err(LogError::BadMagic { found });
    }
    if bytes.len() < HEADER_LEN {
        return Err(LogError::TruncatedHeader { len: bytes.len() });
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    if width == 0 {
        return Err(LogError::ZeroWidth);
    }

    let stride = 28u64 + 4 * width as u64;
    let body = bytes.len() as u64 - HEADER_LEN as u64;
    let complete = body / stride;
    if count > complete {
        // `complete` is exactly the index of the first missing/partial
        // record, and it cannot exceed the declared count here.
        return Err(LogError::TruncatedRecord { ping: complete });
    }

    let config = SensorConfig::defaults_for_width(width)?;
    let mut pings = Vec::with_capacity(count as usize);
    let mut off = HEADER_LEN;
    let mut prev_t = f64::NEG_INFINITY;
    for i in 0..count as usize {
        let t = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let lat = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
        let lon = f64::from_le_bytes(bytes[off + 16..off + 24].try_into().unwrap());
        let depth = f32::from_le_bytes(bytes[off + 24..off + 28].try_into().unwrap());
        off += 28;
        let mut scanline = Vec::with_capacity(width as usize);
        scanline.extend(
            bytes[off..off + 4 * width as usize]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap())),
        );
        off += 4 * width as usize;

        let ping = PingRecord {
            t,
            lat,
            lon,
            depth,
            scanline,
        };
        validate_ping(i, &ping, prev_t)?;
        prev_t = t;
        pings.push(ping);
    }

    Ok(SurveyLog { config, pings })
}

/// Serialize a log to `.bsl` bytes. Infallible: [`SurveyLog`] is valid by
/// construction. Scanline samples round-trip bit-exactly.
pub fn write_log(log: &SurveyLog) -> Vec<u8> {
    let width = log.config.scanline_width;
    let stride = 28 + 4 * width as usize;
    let mut out = Vec::with_capacity(HEADER_LEN + stride * log.pings.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&(log.pings.len() as u64).to_le_bytes());
    for ping in &log.pings {
        out.extend_from_slice(&ping.t.to_le_bytes());
        out.extend_from_slice(&ping.lat.to_le_bytes());
        out.extend_from_slice(&ping.lon.to_le_bytes());
        out.extend_from_slice(&ping.depth.to_le_bytes());
        for &s in &ping.scanline {
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// csv encoding
// ---------------------------------------------------------------------------

fn csv_header(width: u32) -> String {
    let mut h = String::from("t,lat,lon,depth");
    for i in 0..width {
        write!(h, ",i{i}").unwrap();
    }
    h
}

/// Parse the CSV encoding. Unlike the binary path the width is not
/// self-describing, so the caller's [`SensorConfig`] drives both the
/// expected header and the per-row field count. Rows are numbered from 1
/// (the header is row 0), columns from 1.
pub fn parse_csv(text: &str, config: SensorConfig) -> Result<SurveyLog, LogError> {
    let width = config.scanline_width;
    let expected_fields = 4 + width as usize;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").trim_end_matches('\r');
    if header != csv_header(width) {
        return Err(LogError::HeaderMismatch { width });
    }

    let mut pings = Vec::new();
    let mut prev_t = f64::NEG_INFINITY;
    for (row, line) in lines.enumerate() {
        let row = row + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let found = line.split(',').count();
        if found != expected_fields {
            return Err(LogError::FieldCount {
                row,
                expected: expected_fields,
                found,
            });
        }
        let mut column = 0usize;
        let mut next_f64 = |fields: &mut std::str::Split<'_, char>| -> Result<f64, LogError> {
            column += 1;
            let raw = fields.next().expect("field count checked above");
            raw.trim().parse::<f64>().map_err(|_| LogError::NumericParse {
                row,
                column,
                value: raw.to_string(),
            })
        };

        let t = next_f64(&mut fields)?;
        let lat = next_f64(&mut fields)?;
        let lon = next_f64(&mut fields)?;
        let depth = next_f64(&mut fields)? as f32;
        let mut scanline = Vec::with_capacity(width as usize);
        for _ in 0..width {
            scanline.push(next_f64(&mut fields)? as f32);
        }

        let ping = PingRecord {
            t,
            lat,
            lon,
            depth,
            scanline,
        };
        validate_ping(pings.len(), &ping, prev_t)?;
        prev_t = t;
        pings.push(ping);
    }

    Ok(SurveyLog { config, pings })
}

/// Serialize a log as CSV. Floats use shortest round-trip formatting, so
/// reparsing recovers the exact same values.
pub fn write_csv(log: &SurveyLog) -> String {
    let mut out = csv_header(log.config.scanline_width);
    out.push('\n');
    for ping in &log.pings {
        write!(out, "{},{},{},{}", ping.t, ping.lat, ping.lon, ping.depth).unwrap();
        for &s in &ping.scanline {
            write!(out, ",{s}").unwrap();
        }
        out.push('\n');
    }
    out
}
