//! Per-ping heading frames and the pixels-per-meter calibration.
//!
//! Side-scan geometry needs to know, for every ping, which way the boat
//! was pointing: side points are laid out along the perpendicular of the
//! heading. Headings come from forward differences of consecutive GPS
//! fixes, so a stationary pair of fixes has no usable direction and the
//! ping is marked invalid rather than guessed at.
//!
//! The scanline's pixel offsets only become meters through a
//! pixels-per-distance (PPD) calibration: one reference ping whose
//! down-scan depth and first-return pixel count are trusted, giving
//! `ppd = pixels / depth`. The reference can be chosen explicitly or
//! picked automatically by looking for the ping whose down-scan depth
//! agrees best with its closest neighbors in time (the flattest spot of
//! the survey).

use crate::geo::{PlanarPosition, Vec2};
use crate::scanline::Overlay;
use crate::sonarlog::SurveyLog;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("cannot derive headings from an empty position list")]
    EmptyInput,
}

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("no usable calibration ping (need a found first return and positive depth)")]
    NoUsablePing,
    #[error("reference ping {index} out of range: log has {count} ping(s)")]
    RefPingOutOfRange { index: usize, count: usize },
}

/// Heading and its unit perpendicular for one ping. When `valid` is
/// false (stationary fix, or a first ping that never moved) the vectors
/// are zero and the ping contributes no side points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingFrame {
    /// Displacement to the next fix, meters.
    pub heading: Vec2,
    /// Unit perpendicular to the heading (heading rotated 90 degrees
    /// counterclockwise, i.e. crossed with the downward vertical).
    pub perp: Vec2,
    pub valid: bool,
}

impl HeadingFrame {
    const INVALID: HeadingFrame = HeadingFrame {
        heading: Vec2::new(0.0, 0.0),
        perp: Vec2::new(0.0, 0.0),
        valid: false,
    };
}

/// Forward-difference heading frames, one per position.
///
/// The last position has no successor to difference against, so it
/// reuses the most recent valid frame before it (and is invalid when the
/// whole track never moved).
pub fn heading_frames(positions: &[PlanarPosition]) -> Result<Vec<HeadingFrame>, TrajectoryError> {
    if positions.is_empty() {
        return Err(TrajectoryError::EmptyInput);
    }
    let n = positions.len();
    let mut frames = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let heading = positions[i + 1] - positions[i];
        match heading.normalized() {
            Some(dir) => frames.push(HeadingFrame {
                heading,
                perp: dir.perp_left(),
                valid: true,
            }),
            None => frames.push(HeadingFrame::INVALID),
        }
    }
    let last = frames
        .iter()
        .rev()
        .find(|f| f.valid)
        .copied()
        .unwrap_or(HeadingFrame::INVALID);
    frames.push(last);
    Ok(frames)
}

/// The pixels-per-distance scale tying scanline offsets to meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Pixels per meter: `ref_pixels / ref_depth`.
    pub ppd: f64,
    /// Index of the reference ping.
    pub ref_ping: usize,
    /// Down-scan depth at the reference ping, meters.
    pub ref_depth: f64,
    /// First-return pixel offset at the reference ping; the average of
    /// the two sides when both fired, so it can be fractional.
    pub ref_pixels: f64,
}

/// Number of time-neighbors consulted when ranking calibration pings.
pub const CALIBRATION_NEIGHBORS: usize = 5;

/// Derive the PPD calibration from one reference ping.
///
/// With `ref_ping` given, that ping is used (it must have a found first
/// return and positive depth). Otherwise every usable ping is ranked by
/// the mean absolute depth difference to its [`CALIBRATION_NEIGHBORS`]
/// nearest neighbors in time and the flattest one wins; ties break to
/// the lowest index. Logs shorter than the window just use the
/// neighbors that exist.
pub fn calibrate_ppd(
    log: &SurveyLog,
    overlay: &Overlay,
    ref_ping: Option<usize>,
) -> Result<Calibration, CalibrationError> {
    let pings = log.pings();
    let n = pings.len().min(overlay.per_ping.len());
    let usable = |i: usize| -> Option<f64> {
        let returns = &overlay.per_ping[i];
        if pings[i].depth <= 0.0 {
            return None;
        }
        match (returns.positive.offset(), returns.negative.offset()) {
            (Some(a), Some(b)) => Some((a as f64 + b as f64) / 2.0),
            (Some(a), None) => Some(a as f64),
            (None, Some(b)) => Some(b as f64),
            (None, None) => None,
        }
    };

    let chosen = match ref_ping {
        Some(i) => {
            if i >= n {
                return Err(CalibrationError::RefPingOutOfRange { index: i, count: n });
            }
            i
        }
        None => {
            let mut best: Option<(f64, usize)> = None;
            for i in 0..n {
                if usable(i).is_none() {
                    continue;
                }
                let score = neighbor_depth_score(pings, i);
                let candidate = (score, i);
                if best.map_or(true, |b| candidate < b) {
                    best = Some(candidate);
                }
            }
            best.ok_or(CalibrationError::NoUsablePing)?.1
        }
    };

    let ref_pixels = usable(chosen).ok_or(CalibrationError::NoUsablePing)?;
    let ref_depth = pings[chosen].depth as f64;
    Ok(Calibration {
        ppd: ref_pixels / ref_depth,
        ref_ping: chosen,
        ref_depth,
        ref_pixels,
    })
}

/// Mean absolute depth difference between ping `i` and its nearest
/// neighbors in time. Timestamps are non-decreasing, so the neighbors
/// are gathered by expanding a window around `i`; equally distant
/// candidates resolve to the lower index.
fn neighbor_depth_score(pings: &[crate::sonarlog::PingRecord], i: usize) -> f64 {
    let t = pings[i].t;
    let d = pings[i].depth as f64;
    let mut left = i;
    let mut right = i + 1;
    let mut sum = 0.0;
    let mut taken = 0usize;
    while taken < CALIBRATION_NEIGHBORS {
        let dl = (left > 0).then(|| t - pings[left - 1].t);
        let dr = (right < pings.len()).then(|| pings[right].t - t);
        let j = match (dl, dr) {
            (Some(l), Some(r)) if l <= r => {
                left -= 1;
                left
            }
            (Some(_), None) => {
                left -= 1;
                left
            }
            (None, Some(_)) | (Some(_), Some(_)) => {
                let j = right;
                right += 1;
                j
            }
            (None, None) => break,
        };
        sum += (pings[j].depth as f64 - d).abs();
        taken += 1;
    }
    if taken == 0 {
        0.0
    } else {
        sum / taken as f64
    }
}
