//! End-to-end orchestration: survey log in, filtered point cloud out.
//!
//! The stages run in a fixed order: first-return extraction over every
//! scanline, scale calibration, projection of the GPS track to planar
//! ENU coordinates, heading frames, cloud assembly, and finally radius
//! outlier filtering. Calibration runs before any projection so that a
//! log without a single usable ping fails with a calibration error, not
//! a geometry one.
//!
//! Everything here is deterministic: the same log and parameters yield
//! the same cloud byte for byte, regardless of thread count.

use std::fmt;

use thiserror::Error;

use crate::cloud::{assemble, remove_outliers, CloudError, CloudPoint, OutlierParams};
use crate::geo::{mercator, EnuFrame, ProjectionError};
use crate::scanline::first_return_overlay;
use crate::sonarlog::SurveyLog;
use crate::trajectory::{calibrate_ppd, heading_frames, Calibration, CalibrationError, TrajectoryError};

/// First-return intensity threshold default, as a fraction of the
/// normalized scale.
pub const DEFAULT_THRESHOLD: f64 = 0.3;

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("threshold must be within (0, 1], got {0}")]
    BadThreshold(f64),
    #[error("ping {ping}: {source}")]
    Projection {
        ping: usize,
        source: ProjectionError,
    },
    #[error("no usable calibration ping: {0}")]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

/// Tunables for a pipeline run. `None` fields fall back to documented
/// defaults: automatic reference-ping selection, the first ping as ENU
/// origin, and an outlier radius scaled from the calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    pub threshold: f64,
    /// Relabel which scanline half is which side, for sensors mounted
    /// opposite to the convention.
    pub swap_sides: bool,
    pub ref_ping: Option<usize>,
    /// ENU origin as (lat, lon); defaults to the first ping's fix.
    pub origin: Option<(f64, f64)>,
    /// Outlier radius in meters; defaults to 5 / ppd once the
    /// calibration is known.
    pub radius: Option<f64>,
    pub min_neighbors: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            swap_sides: false,
            ref_ping: None,
            origin: None,
            radius: None,
            min_neighbors: crate::cloud::DEFAULT_MIN_NEIGHBORS,
        }
    }
}

/// Everything a run produces besides the files: the filtered cloud and
/// the numbers the summary is printed from.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub cloud: Vec<CloudPoint>,
    pub calibration: Calibration,
    pub origin: (f64, f64),
    pub outliers: OutlierParams,
    pub points_before: usize,
    pub removed: usize,
    pub summary: RunSummary,
}

/// Key-value run summary, one `key=value` per line via `Display`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub pings: usize,
    pub width: u32,
    pub threshold: f64,
    pub swap_sides: bool,
    pub ppd: f64,
    pub ref_ping: usize,
    pub ref_depth: f64,
    pub ref_pixels: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub outlier_radius: f64,
    pub min_neighbors: usize,
    pub points_before: usize,
    pub points_after: usize,
    pub removed: usize,
}

impl RunSummary {
    pub fn removed_pct(&self) -> f64 {
        if self.points_before == 0 {
            0.0
        } else {
            100.0 * self.removed as f64 / self.points_before as f64
        }
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pings={}", self.pings)?;
        writeln!(f, "width={}", self.width)?;
        writeln!(f, "threshold={}", self.threshold)?;
        writeln!(f, "swap_sides={}", self.swap_sides)?;
        writeln!(f, "ppd={}", self.ppd)?;
        writeln!(f, "ref_ping={}", self.ref_ping)?;
        writeln!(f, "ref_depth={}", self.ref_depth)?;
        writeln!(f, "ref_pixels={}", self.ref_pixels)?;
        writeln!(f, "origin_lat={}", self.origin_lat)?;
        writeln!(f, "origin_lon={}", self.origin_lon)?;
        writeln!(f, "outlier_radius={}", self.outlier_radius)?;
        writeln!(f, "min_neighbors={}", self.min_neighbors)?;
        writeln!(f, "points_before={}", self.points_before)?;
        writeln!(f, "points_after={}", self.points_after)?;
        writeln!(f, "removed={}", self.removed)?;
        writeln!(f, "removed_pct={:.2}", self.removed_pct())
    }
}

/// Run the full pipeline over a parsed log.
pub fn run(log: &SurveyLog, params: &PipelineParams) -> Result<PipelineOutput, PipelineError> {
    if !(params.threshold.is_finite() && params.threshold > 0.0 && params.threshold <= 1.0) {
        return Err(PipelineError::BadThreshold(params.threshold));
    }

    let mut overlay = first_return_overlay(log, params.threshold);
    if params.swap_sides {
        overlay = overlay.swapped();
    }

    let calibration = calibrate_ppd(log, &overlay, params.ref_ping)?;

    let origin_fix = params.origin.unwrap_or_else(|| {
        let first = &log.pings()[0];
        (first.lat, first.lon)
    });
    let origin = mercator(origin_fix.0, origin_fix.1)
        .map_err(|source| PipelineError::Projection { ping: 0, source })?;
    let frame = EnuFrame::new(origin);

    let mut positions = Vec::with_capacity(log.ping_count());
    for (i, ping) in log.pings().iter().enumerate() {
        let projected = mercator(ping.lat, ping.lon)
            .map_err(|source| PipelineError::Projection { ping: i, source })?;
        positions.push(frame.to_enu(projected));
    }

    let frames = heading_frames(&positions)?;
    let cloud = assemble(log, &positions, &frames, &overlay, &calibration)?;
    let radius = params
        .radius
        .unwrap_or_else(|| OutlierParams::default_for_ppd(calibration.ppd).radius);
    let outliers = OutlierParams::new(radius, params.min_neighbors)?;
    let points_before = cloud.len();
    let (kept, removed) = remove_outliers(&cloud, &outliers);

    let summary = RunSummary {
        pings: log.ping_count(),
        width: log.width(),
        threshold: params.threshold,
        swap_sides: params.swap_sides,
        ppd: calibration.ppd,
        ref_ping: calibration.ref_ping,
        ref_depth: calibration.ref_depth,
        ref_pixels: calibration.ref_pixels,
        origin_lat: origin_fix.0,
        origin_lon: origin_fix.1,
        outlier_radius: outliers.radius,
        min_neighbors: outliers.min_neighbors,
        points_before,
        points_after: kept.len(),
        removed,
    };

    Ok(PipelineOutput {
        cloud: kept,
        calibration,
        origin: origin_fix,
        outliers,
        points_before,
        removed,
        summary,
    })
}
