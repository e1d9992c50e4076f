//! Point-cloud assembly, outlier pruning, and export.
//!
//! Every ping contributes one nadir point directly under the boat (its
//! down-scan depth), and up to two side points placed from the
//! first-return geometry: a first return `p` pixels from the scanline
//! center at calibration `ppd` is a slant range `r1 = p / ppd`, which
//! splits into a depth `r1 * cos(alpha2)` and a horizontal offset
//! `r1 * sin(alpha2)` along the heading perpendicular. Coordinates are
//! ENU meters; `z` is negative down, so a 4 m deep return sits at
//! `z = -4`.
//!
//! Outlier pruning is a single radius pass: a point survives when at
//! least `min_neighbors` *other* points of the original cloud sit within
//! `radius` of it. The counts always refer to the input cloud, so
//! removal never cascades.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::geo::PlanarPosition;
use crate::scanline::{Overlay, PingReturns, Side};
use crate::sonarlog::{SensorConfig, SurveyLog};
use crate::trajectory::{Calibration, HeadingFrame};

/// Outlier radius default, in pixel-equivalents: divided by the
/// calibration's ppd to get meters.
pub const DEFAULT_RADIUS_PIXELS: f64 = 5.0;

/// Outlier neighbor-count default.
pub const DEFAULT_MIN_NEIGHBORS: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum CloudError {
    #[error("misaligned inputs: {pings} pings, {positions} positions, {frames} frames, {returns} first-return pairs")]
    AlignmentMismatch {
        pings: usize,
        positions: usize,
        frames: usize,
        returns: usize,
    },
    #[error("outlier radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("min_neighbors must be at least 1")]
    ZeroMinNeighbors,
}

/// Where a cloud point came from. The discriminants are the `source`
/// codes written to PLY.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum PointSource {
    Nadir = 0,
    PositiveSide = 1,
    NegativeSide = 2,
}

impl PointSource {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(PointSource::Nadir),
            1 => Some(PointSource::PositiveSide),
            2 => Some(PointSource::NegativeSide),
            _ => None,
        }
    }
}

/// One bathymetric point: ENU meters, `z` negative down, tagged with the
/// ping it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub source: PointSource,
    pub ping: usize,
}

/// Radius-search pruning parameters. Build through [`OutlierParams::new`]
/// so the invariants hold, or take the calibration-scaled defaults from
/// [`OutlierParams::default_for_ppd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierParams {
    pub radius: f64,
    pub min_neighbors: usize,
}

impl OutlierParams {
    pub fn new(radius: f64, min_neighbors: usize) -> Result<Self, CloudError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(CloudError::BadRadius(radius));
        }
        if min_neighbors == 0 {
            return Err(CloudError::ZeroMinNeighbors);
        }
        Ok(Self {
            radius,
            min_neighbors,
        })
    }

    /// Defaults scaled by the survey's calibration:
    /// [`DEFAULT_RADIUS_PIXELS`] pixel-equivalents of radius,
    /// [`DEFAULT_MIN_NEIGHBORS`] neighbors.
    pub fn default_for_ppd(ppd: f64) -> Self {
        Self {
            radius: DEFAULT_RADIUS_PIXELS / ppd,
            min_neighbors: DEFAULT_MIN_NEIGHBORS,
        }
    }
}

/// The up-to-two side points for one ping. Nothing is produced for a
/// side without a found first return, or for any side when the heading
/// frame is invalid (no perpendicular to lay the offset along).
pub fn side_points(
    position: PlanarPosition,
    ping: usize,
    frame: &HeadingFrame,
    returns: &PingReturns,
    cal: &Calibration,
    config: &SensorConfig,
) -> Vec<CloudPoint> {
    let mut out = Vec::with_capacity(2);
    push_side_points(&mut out, position, ping, frame, returns, cal, config);
    out
}

fn push_side_points(
    out: &mut Vec<CloudPoint>,
    position: PlanarPosition,
    ping: usize,
    frame: &HeadingFrame,
    returns: &PingReturns,
    cal: &Calibration,
    config: &SensorConfig,
) {
    if !frame.valid {
        return;
    }
    let (sin_a, cos_a) = config.alpha2_rad.sin_cos();
    for fr in [&returns.positive, &returns.negative] {
        let Some(pixels) = fr.offset() else {
            continue;
        };
        let r1 = pixels as f64 / cal.ppd;
        let depth = r1 * cos_a;
        let offset = frame.perp * (r1 * sin_a);
        let (q, source) = match fr.side {
            Side::Positive => (position + offset, PointSource::PositiveSide),
            Side::Negative => (position - offset, PointSource::NegativeSide),
        };
        out.push(CloudPoint {
            x: q.x,
            y: q.y,
            z: -depth,
            source,
            ping,
        });
    }
}

/// Assemble the full cloud: per ping, the nadir point, then the
/// positive- and negative-side points. The order is canonical (ping
/// index, then nadir/positive/negative), so identical inputs always
/// produce the identical point list.
pub fn assemble(
    log: &SurveyLog,
    positions: &[PlanarPosition],
    frames: &[HeadingFrame],
    overlay: &Overlay,
    cal: &Calibration,
) -> Result<Vec<CloudPoint>, CloudError> {
    let pings = log.pings();
    if positions.len() != pings.len()
        || frames.len() != pings.len()
        || overlay.per_ping.len() != pings.len()
    {
        return Err(CloudError::AlignmentMismatch {
            pings: pings.len(),
            positions: positions.len(),
            frames: frames.len(),
            returns: overlay.per_ping.len(),
        });
    }

    let mut out = Vec::with_capacity(3 * pings.len());
    for (i, ping) in pings.iter().enumerate() {
        out.push(CloudPoint {
            x: positions[i].x,
            y: positions[i].y,
            z: -(ping.depth as f64),
            source: PointSource::Nadir,
            ping: i,
        });
        push_side_points(
            &mut out,
            positions[i],
            i,
            &frames[i],
            &overlay.per_ping[i],
            cal,
            log.config(),
        );
    }
    Ok(out)
}

/// Single-pass radius outlier removal. Returns the surviving points in
/// their original order plus the number removed. Neighbor counts are
/// taken against the *input* cloud, so the result does not depend on
/// any removal order, and duplicates count as neighbors of each other.
pub fn remove_outliers(points: &[CloudPoint], params: &OutlierParams) -> (Vec<CloudPoint>, usize) {
    let r = params.radius;
    let r2 = r * r;
    let cell = |v: f64| (v / r).floor() as i64;

    let mut grid: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry((cell(p.x), cell(p.y), cell(p.z)))
            .or_default()
            .push(i as u32);
    }

    let keep: Vec<bool> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (cx, cy, cz) = (cell(p.x), cell(p.y), cell(p.z));
            let mut found = 0usize;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) else {
                            continue;
                        };
                        for &j in bucket {
                            if j as usize == i {
                                continue;
                            }
                            let q = &points[j as usize];
                            let d2 = (p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2);
                            if d2 <= r2 {
                                found += 1;
                                if found >= params.min_neighbors {
                                    return true;
                                }
                            }
                        }
                    }
                }
            }
            false
        })
        .collect();

    let kept: Vec<CloudPoint> = points
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| *p)
        .collect();
    let removed = points.len() - kept.len();
    (kept, removed)
}

/// Reference implementation of the same pruning rule, quadratic in the
/// cloud size. Kept public so integration tests can pit the grid version
/// against it.
pub fn remove_outliers_brute_force(
    points: &[CloudPoint],
    params: &OutlierParams,
) -> (Vec<CloudPoint>, usize) {
    let r2 = params.radius * params.radius;
    let kept: Vec<CloudPoint> = points
        .iter()
        .enumerate()
        .filter(|(i, p)| {
            let neighbors = points
                .iter()
                .enumerate()
                .filter(|(j, q)| {
                    i != j
                        && (p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2) <= r2
                })
                .count();
            neighbors >= params.min_neighbors
        })
        .map(|(_, p)| *p)
        .collect();
    let removed = points.len() - kept.len();
    (kept, removed)
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

/// ASCII XYZ export: one `x y z` line per point, six decimal places,
/// in the cloud's canonical order.
pub fn export_xyz(points: &[CloudPoint]) -> String {
    let mut out = String::with_capacity(points.len() * 32);
    for p in points {
        writeln!(out, "{:.6} {:.6} {:.6}", p.x, p.y, p.z).unwrap();
    }
    out
}

/// Binary little-endian PLY 1.0: `float x/y/z` plus a `uchar source`
/// code per vertex ([`PointSource::code`]). Note the narrowing to f32:
/// that is the precision PLY consumers get.
pub fn export_ply(points: &[CloudPoint]) -> Vec<u8> {
    let mut out = Vec::with_capacity(128 + 13 * points.len());
    out.extend_from_slice(
        format!(
            "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nproperty uchar source\nend_header\n",
            points.len()
        )
        .as_bytes(),
    );
    for p in points {
        out.extend_from_slice(&(p.x as f32).to_le_bytes());
        out.extend_from_slice(&(p.y as f32).to_le_bytes());
        out.extend_from_slice(&(p.z as f32).to_le_bytes());
        out.push(p.source.code());
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum PlyError {
    #[error("not a PLY stream")]
    BadMagic,
    #[error("unsupported PLY header (expected the binary_little_endian x/y/z/source schema)")]
    UnsupportedSchema,
    #[error("vertex data truncated: expected {expected} vertices, data holds {found}")]
    Truncated { expected: usize, found: usize },
    #[error("unknown source code {0}")]
    BadSource(u8),
}

/// A vertex as stored in the PLY encoding. `ping` provenance is not part
/// of the PLY schema, so a reparsed cloud carries geometry and source
/// only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlyVertex {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub source: u8,
}

/// Reparse a PLY stream produced by [`export_ply`].
pub fn read_ply(bytes: &[u8]) -> Result<Vec<PlyVertex>, PlyError> {
    if !bytes.starts_with(b"ply\n") {
        return Err(PlyError::BadMagic);
    }
    let header_end = bytes
        .windows(11)
        .position(|w| w == b"end_header\n")
        .ok_or(PlyError::UnsupportedSchema)?
        + 11;
    let header = std::str::from_utf8(&bytes[..header_end]).map_err(|_| PlyError::UnsupportedSchema)?;

    let mut lines = header.lines();
    if lines.next() != Some("ply") {
        return Err(PlyError::BadMagic);
    }
    if lines.next() != Some("format binary_little_endian 1.0") {
        return Err(PlyError::UnsupportedSchema);
    }
    let count: Option<usize> = match lines.next() {
        Some(l) if l.starts_with("element vertex ") => l["element vertex ".len()..].parse().ok(),
        _ => return Err(PlyError::UnsupportedSchema),
    };
    let expected_props = [
        "property float x",
        "property float y",
        "property float z",
        "property uchar source",
        "end_header",
    ];
    for want in expected_props {
        if lines.next() != Some(want) {
            return Err(PlyError::UnsupportedSchema);
        }
    }
    let count = count.ok_or(PlyError::UnsupportedSchema)?;

    let body = &bytes[header_end..];
    if body.len() < count * 13 {
        return Err(PlyError::Truncated {
            expected: count,
            found: body.len() / 13,
        });
    }
    let mut vertices = Vec::with_capacity(count);
    for rec in body.chunks_exact(13).take(count) {
        let source = rec[12];
        if PointSource::from_code(source).is_none() {
            return Err(PlyError::BadSource(source));
        }
        vertices.push(PlyVertex {
            x: f32::from_le_bytes(rec[0..4].try_into().unwrap()),
            y: f32::from_le_bytes(rec[4..8].try_into().unwrap()),
            z: f32::from_le_bytes(rec[8..12].try_into().unwrap()),
            source,
        });
    }
    Ok(vertices)
}
