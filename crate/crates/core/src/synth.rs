//! Synthetic survey generation: the pipeline's independent test oracle.
//!
//! Given a known depth field and a boat path, this module fabricates a
//! complete survey log whose scanlines carry first-return pulses exactly
//! where the forward geometry says they should be. Running the real
//! pipeline over such a log and comparing the recovered cloud against
//! the field closes the loop without any recorded data.
//!
//! Path coordinates are absolute Web Mercator meters; GPS fixes come
//! from inverting the projection. The planted first-return pixel for a
//! side is `round(ppd * z_side / cos(alpha2))`, where `z_side` is the
//! field depth at the true offset location. That location depends on
//! the unknown depth itself, so it is resolved by a short fixed-point
//! iteration on `y = z * tan(alpha2)` seeded with the nadir depth.
//!
//! The post-processing mirror: rendered imagery is reduced to grayscale
//! (the [`grayscale`] luma helper) and multiplicative speckle scales
//! every nonzero sample by `max(0, 1 + sigma * g)` with unit-normal `g`.
//! Pings draw from independent generators seeded `seed ^ ping_index`,
//! so generation parallelizes without changing a single bit of output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::geo::{mercator_inverse, PlanarPosition, Vec2};
use crate::sonarlog::{LogError, PingRecord, SensorConfig, SurveyLog};
use crate::trajectory::{heading_frames, TrajectoryError};

/// Width of a planted return pulse, in pixels outward from the first
/// return. One bright pixel would be unrealistically sharp; five give
/// the threshold crossing a little body.
pub const PULSE_WIDTH_PIXELS: u32 = 5;

/// Fixed-point refinements of the side-point location. Two are enough
/// for the built-in smooth fields; the residual is far below the
/// half-pixel quantization floor.
pub const FIXED_POINT_ITERATIONS: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("path needs at least two distinct positions to define a heading")]
    DegeneratePath,
    #[error("pixels-per-depth must be positive and finite, got {0}")]
    BadPpd(f64),
    #[error("speckle sigma must be nonnegative and finite, got {0}")]
    BadSigma(f64),
    #[error("stray rate must be within [0, 1], got {0}")]
    BadStrayRate(f64),
    #[error("stray band [{lo}, {hi}] must sit inside the scannable offsets [{min}, {max}]")]
    BadStrayBand { lo: u32, hi: u32, min: u32, max: u32 },
    #[error("depth field must stay positive: ping {ping} sampled {depth}")]
    DepthOutOfRange { ping: usize, depth: f64 },
    #[error("ping {ping}: first return at pixel {pixels} falls outside the scannable offsets [{min}, {max}]")]
    ReturnOutOfSwath {
        ping: usize,
        pixels: i64,
        min: u32,
        max: u32,
    },
    #[error("{channel} channel value {value} is outside [0, 255]")]
    ChannelOutOfRange { channel: &'static str, value: f64 },
    #[error("slope direction must have nonzero length")]
    BadDirection,
    #[error("field parameter {name} must be finite, got {value}")]
    BadFieldParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Log(#[from] LogError),
}

impl From<TrajectoryError> for SynthError {
    fn from(_: TrajectoryError) -> Self {
        SynthError::DegeneratePath
    }
}

// ---------------------------------------------------------------------------
// depth fields
// ---------------------------------------------------------------------------

/// Ground-truth bathymetry: maps a planar position to a depth in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthField {
    kind: FieldKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FieldKind {
    Constant {
        depth: f64,
    },
    Slope {
        base: f64,
        grade: f64,
        unit: Vec2,
    },
    Bowl {
        center: PlanarPosition,
        center_depth: f64,
        curvature: f64,
    },
}

impl DepthField {
    /// Flat pond at a fixed depth.
    pub fn constant(depth: f64) -> Result<Self, SynthError> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(SynthError::BadFieldParameter {
                name: "depth",
                value: depth,
            });
        }
        Ok(Self {
            kind: FieldKind::Constant { depth },
        })
    }

    /// Planar incline: `base` depth at the planar origin, deepening by
    /// `grade` meters per meter travelled along `direction`.
    pub fn slope(base: f64, grade: f64, direction: Vec2) -> Result<Self, SynthError> {
        if !(base.is_finite() && base > 0.0) {
            return Err(SynthError::BadFieldParameter {
                name: "base",
                value: base,
            });
        }
        if !grade.is_finite() {
            return Err(SynthError::BadFieldParameter {
                name: "grade",
                value: grade,
            });
        }
        let unit = direction.normalized().ok_or(SynthError::BadDirection)?;
        Ok(Self {
            kind: FieldKind::Slope { base, grade, unit },
        })
    }

    /// Radial paraboloid: `center_depth` at `center`, deepening by
    /// `curvature * r^2` at planar distance `r`.
    pub fn bowl(
        center: PlanarPosition,
        center_depth: f64,
        curvature: f64,
    ) -> Result<Self, SynthError> {
        if !(center_depth.is_finite() && center_depth > 0.0) {
            return Err(SynthError::BadFieldParameter {
                name: "center_depth",
                value: center_depth,
            });
        }
        if !curvature.is_finite() {
            return Err(SynthError::BadFieldParameter {
                name: "curvature",
                value: curvature,
            });
        }
        Ok(Self {
            kind: FieldKind::Bowl {
                center,
                center_depth,
                curvature,
            },
        })
    }

    pub fn depth_at(&self, q: PlanarPosition) -> f64 {
        match self.kind {
            FieldKind::Constant { depth } => depth,
            FieldKind::Slope { base, grade, unit } => base + grade * (q.x * unit.x + q.y * unit.y),
            FieldKind::Bowl {
                center,
                center_depth,
                curvature,
            } => {
                let d = q - center;
                center_depth + curvature * (d.x * d.x + d.y * d.y)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// noise parameters
// ---------------------------------------------------------------------------

/// Multiplicative speckle configuration. `sigma` is the unitless scale
/// of the unit-normal factor; zero disables the noise pass entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeckleParams {
    pub sigma: f64,
    pub seed: u64,
}

impl SpeckleParams {
    pub fn quiet(seed: u64) -> Self {
        Self { sigma: 0.0, seed }
    }
}

/// Stray-return corruption: with probability `rate` per side, the
/// planted first return is replaced by one at a uniform pixel in
/// `[band_lo, band_hi]`, far from the true surface. Used to build noisy
/// benchmarks for the outlier filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrayParams {
    pub rate: f64,
    pub band_lo: u32,
    pub band_hi: u32,
}

// ---------------------------------------------------------------------------
// generation
// ---------------------------------------------------------------------------

/// Scannable offset range shared by both sides: the first return scan
/// starts one past the deadzone, and the shorter side of an even-width
/// line caps the far end.
fn offset_range(config: &SensorConfig) -> (u32, u32) {
    let width = config.scanline_width as usize;
    let center = width / 2;
    let positive_max = (width - 1 - center) as u32;
    let negative_max = center as u32;
    (
        config.deadzone_halfwidth + 1,
        positive_max.min(negative_max),
    )
}

/// Generate a clean survey log: planted returns, optional speckle, no
/// stray corruption.
pub fn generate_log(
    field: &DepthField,
    path: &[PlanarPosition],
    cal_ppd: f64,
    config: &SensorConfig,
    speckle: &SpeckleParams,
) -> Result<SurveyLog, SynthError> {
    generate(field, path, cal_ppd, config, speckle, None)
}

/// Generate a survey log with stray-return corruption layered on top of
/// the clean geometry. With `strays.rate == 0` the output is identical
/// to [`generate_log`] only when `sigma == 0`; otherwise the stray
/// decision draws shift the speckle stream.
pub fn generate_log_with_strays(
    field: &DepthField,
    path: &[PlanarPosition],
    cal_ppd: f64,
    config: &SensorConfig,
    speckle: &SpeckleParams,
    strays: &StrayParams,
) -> Result<SurveyLog, SynthError> {
    generate(field, path, cal_ppd, config, speckle, Some(strays))
}

fn generate(
    field: &DepthField,
    path: &[PlanarPosition],
    cal_ppd: f64,
    config: &SensorConfig,
    speckle: &SpeckleParams,
    strays: Option<&StrayParams>,
) -> Result<SurveyLog, SynthError> {
    if path.len() < 2 {
        return Err(SynthError::DegeneratePath);
    }
    if !(cal_ppd.is_finite() && cal_ppd > 0.0) {
        return Err(SynthError::BadPpd(cal_ppd));
    }
    if !(speckle.sigma.is_finite() && speckle.sigma >= 0.0) {
        return Err(SynthError::BadSigma(speckle.sigma));
    }
    let (min_px, max_px) = offset_range(config);
    if let Some(s) = strays {
        if !(s.rate.is_finite() && (0.0..=1.0).contains(&s.rate)) {
            return Err(SynthError::BadStrayRate(s.rate));
        }
        if s.band_lo < min_px || s.band_hi > max_px || s.band_lo > s.band_hi {
            return Err(SynthError::BadStrayBand {
                lo: s.band_lo,
                hi: s.band_hi,
                min: min_px,
                max: max_px,
            });
        }
    }

    let frames = heading_frames(path)?;
    if !frames.iter().any(|f| f.valid) {
        return Err(SynthError::DegeneratePath);
    }

    let tan_a = config.alpha2_rad.tan();
    let cos_a = config.alpha2_rad.cos();
    let width = config.scanline_width as usize;
    let center = width / 2;

    let pings: Vec<Result<PingRecord, SynthError>> = path
        .par_iter()
        .enumerate()
        .map(|(i, &pos)| {
            let nadir = field.depth_at(pos);
            if !(nadir.is_finite() && nadir > 0.0) {
                return Err(SynthError::DepthOutOfRange {
                    ping: i,
                    depth: nadir,
                });
            }

            let mut rng = ChaCha8Rng::seed_from_u64(speckle.seed ^ i as u64);
            let mut scanline = vec![0.0f32; width];
            let frame = &frames[i];

            if frame.valid {
                // Positive side then negative, matching the overlay's
                // reading order, so the draw sequence is reproducible.
                for sign in [1.0f64, -1.0] {
                    let stray_px = match strays {
                        Some(s) => {
                            let u: f64 = rng.gen();
                            (u < s.rate).then(|| rng.gen_range(s.band_lo..=s.band_hi))
                        }
                        None => None,
                    };
                    let px = match stray_px {
                        Some(px) => px,
                        None => {
                            // The offset location depends on the depth
                            // there; refine from the nadir depth.
                            let mut z = nadir;
                            for _ in 0..FIXED_POINT_ITERATIONS {
                                let q = pos + frame.perp * (sign * z * tan_a);
                                z = field.depth_at(q);
                            }
                            if !(z.is_finite() && z > 0.0) {
                                return Err(SynthError::DepthOutOfRange { ping: i, depth: z });
                            }
                            let px = (cal_ppd * z / cos_a).round();
                            if px < min_px as f64 || px > max_px as f64 {
                                return Err(SynthError::ReturnOutOfSwath {
                                    ping: i,
                                    pixels: px as i64,
                                    min: min_px,
                                    max: max_px,
                                });
                            }
                            px as u32
                        }
                    };
                    for k in 0..PULSE_WIDTH_PIXELS {
                        let offset = (px + k) as usize;
                        // The pulse tail may run off the line edge; the
                        // leading pixel is already range-checked.
                        let idx = if sign > 0.0 {
                            let idx = center + offset;
                            (idx < width).then_some(idx)
                        } else {
                            center.checked_sub(offset)
                        };
                        if let Some(idx) = idx {
                            scanline[idx] = config.intensity_max as f32;
                        }
                    }
                }
            }

            if speckle.sigma > 0.0 {
                for v in scanline.iter_mut() {
                    if *v != 0.0 {
                        let g: f64 = rng.sample(StandardNormal);
                        let factor = (1.0 + speckle.sigma * g).max(0.0);
                        *v = (*v as f64 * factor) as f32;
                    }
                }
            }

            let (lat, lon) = mercator_inverse(pos);
            Ok(PingRecord {
                t: i as f64,
                lat,
                lon,
                depth: nadir as f32,
                scanline,
            })
        })
        .collect();

    let pings = pings.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(SurveyLog::new(config.clone(), pings)?)
}

// ---------------------------------------------------------------------------
// path builders
// ---------------------------------------------------------------------------

/// Straight constant-speed path: `count` positions from `start`, each
/// `step` meters along `heading`.
pub fn line_path(
    start: PlanarPosition,
    heading: Vec2,
    step: f64,
    count: usize,
) -> Result<Vec<PlanarPosition>, SynthError> {
    let unit = heading.normalized().ok_or(SynthError::BadDirection)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(SynthError::BadFieldParameter {
            name: "step",
            value: step,
        });
    }
    Ok((0..count)
        .map(|i| start + unit * (step * i as f64))
        .collect())
}

/// Boustrophedon survey pattern: lanes along +x/-x joined by short +y
/// hops. `pings_per_lane` positions per lane, `step` meters apart,
/// lanes `spacing` meters apart.
pub fn lawnmower_path(
    start: PlanarPosition,
    pings_per_lane: usize,
    lanes: usize,
    step: f64,
    spacing: f64,
) -> Result<Vec<PlanarPosition>, SynthError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(SynthError::BadFieldParameter {
            name: "step",
            value: step,
        });
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(SynthError::BadFieldParameter {
            name: "spacing",
            value: spacing,
        });
    }
    let mut path = Vec::with_capacity(pings_per_lane * lanes);
    for lane in 0..lanes {
        let y = start.y + spacing * lane as f64;
        for i in 0..pings_per_lane {
            let along = step * i as f64;
            let x = if lane % 2 == 0 {
                start.x + along
            } else {
                start.x + step * (pings_per_lane.saturating_sub(1)) as f64 - along
            };
            path.push(PlanarPosition::new(x, y));
        }
    }
    Ok(path)
}

// ---------------------------------------------------------------------------
// image preprocessing
// ---------------------------------------------------------------------------

/// ITU-R BT.601 luma: `0.299 R + 0.587 G + 0.114 B`, rounded half-up.
pub fn grayscale(r: f64, g: f64, b: f64) -> Result<u8, SynthError> {
    for (channel, value) in [("red", r), ("green", g), ("blue", b)] {
        if !(value.is_finite() && (0.0..=255.0).contains(&value)) {
            return Err(SynthError::ChannelOutOfRange { channel, value });
        }
    }
    let luma = 0.299 * r + 0.587 * g + 0.114 * b;
    Ok((luma + 0.5).floor() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scanline::first_return_overlay;
    use crate::sonarlog::write_log;

    fn config() -> SensorConfig {
        SensorConfig::new(30f64.to_radians(), 700, 10, 2.14e9).unwrap()
    }

    fn east_path(count: usize, step: f64) -> Vec<PlanarPosition> {
        line_path(PlanarPosition::new(0.0, 0.0), Vec2::new(1.0, 0.0), step, count).unwrap()
    }

    #[test]
    fn flat_pond_plants_pixel_115() {
        // round(25 * 4 / cos 30) = round(115.47) = 115.
        let field = DepthField::constant(4.0).unwrap();
        let log = generate_log(
            &field,
            &east_path(20, 0.5),
            25.0,
            &config(),
            &SpeckleParams::quiet(1),
        )
        .unwrap();
        let overlay = first_return_overlay(&log, 0.3);
        for (i, ret) in overlay.per_ping.iter().enumerate() {
            if i + 1 < 20 {
                assert_eq!(ret.positive.offset(), Some(115), "ping {i}");
                assert_eq!(ret.negative.offset(), Some(115), "ping {i}");
            }
        }
        // The last ping inherits the previous heading and is planted too.
        assert_eq!(overlay.per_ping[19].positive.offset(), Some(115));
    }

    #[test]
    fn same_seed_is_bit_identical_and_different_seed_is_not() {
        let field = DepthField::constant(4.0).unwrap();
        let path = east_path(50, 0.5);
        let noisy = |seed| {
            let log = generate_log(
                &field,
                &path,
                25.0,
                &config(),
                &SpeckleParams { sigma: 0.2, seed },
            )
            .unwrap();
            write_log(&log)
        };
        assert_eq!(noisy(7), noisy(7));
        assert_ne!(noisy(7), noisy(8));
    }

    #[test]
    fn speckle_keeps_detection_on_the_planted_pixel() {
        let field = DepthField::constant(4.0).unwrap();
        let log = generate_log(
            &field,
            &east_path(500, 0.5),
            25.0,
            &config(),
            &SpeckleParams {
                sigma: 0.2,
                seed: 42,
            },
        )
        .unwrap();
        let overlay = first_return_overlay(&log, 0.3);
        let mut planted = 0;
        let mut matched = 0;
        for ret in &overlay.per_ping {
            for fr in [&ret.positive, &ret.negative] {
                planted += 1;
                if fr.offset() == Some(115) {
                    matched += 1;
                }
            }
        }
        assert!(planted >= 1000);
        let rate = matched as f64 / planted as f64;
        assert!(rate >= 0.99, "planted-pixel agreement {rate}");
    }

    #[test]
    fn stationary_ping_gets_no_returns() {
        let field = DepthField::constant(4.0).unwrap();
        let mut path = east_path(6, 0.5);
        path[3] = path[2];
        let log = generate_log(&field, &path, 25.0, &config(), &SpeckleParams::quiet(0)).unwrap();
        let overlay = first_return_overlay(&log, 0.3);
        assert!(!overlay.per_ping[2].positive.found);
        assert!(!overlay.per_ping[2].negative.found);
        assert!(overlay.per_ping[1].positive.found);
        assert!(overlay.per_ping[3].positive.found);
    }

    #[test]
    fn degenerate_paths_are_rejected() {
        let field = DepthField::constant(4.0).unwrap();
        let one = vec![PlanarPosition::new(0.0, 0.0)];
        let same = vec![PlanarPosition::new(1.0, 1.0); 5];
        for path in [one, same] {
            assert_eq!(
                generate_log(&field, &path, 25.0, &config(), &SpeckleParams::quiet(0)),
                Err(SynthError::DegeneratePath)
            );
        }
    }

    #[test]
    fn swath_overflow_is_reported() {
        // 60 m of water at 25 px/m wants pixel 1732, far past the line.
        let field = DepthField::constant(60.0).unwrap();
        let err = generate_log(
            &field,
            &east_path(3, 0.5),
            25.0,
            &config(),
            &SpeckleParams::quiet(0),
        )
        .unwrap_err();
        assert!(matches!(err, SynthError::ReturnOutOfSwath { min: 11, max: 349, .. }));
    }

    #[test]
    fn gps_fixes_invert_back_to_the_path() {
        let field = DepthField::constant(4.0).unwrap();
        let path = east_path(10, 1.0);
        let log = generate_log(&field, &path, 25.0, &config(), &SpeckleParams::quiet(0)).unwrap();
        for (ping, want) in log.pings().iter().zip(&path) {
            let got = crate::geo::mercator(ping.lat, ping.lon).unwrap();
            assert!((got.x - want.x).abs() < 1e-6);
            assert!((got.y - want.y).abs() < 1e-6);
        }
    }

    #[test]
    fn slope_and_bowl_fields_evaluate_as_documented() {
        let slope = DepthField::slope(4.0, 0.02, Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(slope.depth_at(PlanarPosition::new(10.0, 99.0)), 4.2);
        assert_eq!(slope.depth_at(PlanarPosition::new(-10.0, 0.0)), 3.8);

        let bowl = DepthField::bowl(PlanarPosition::new(1.0, 1.0), 4.0, 0.01).unwrap();
        assert_eq!(bowl.depth_at(PlanarPosition::new(1.0, 1.0)), 4.0);
        assert_eq!(bowl.depth_at(PlanarPosition::new(4.0, 5.0)), 4.25);

        assert!(DepthField::constant(0.0).is_err());
        assert!(DepthField::constant(f64::NAN).is_err());
        assert!(DepthField::slope(4.0, 0.02, Vec2::new(0.0, 0.0)).is_err());
        assert!(DepthField::bowl(PlanarPosition::new(0.0, 0.0), -1.0, 0.0).is_err());
    }

    #[test]
    fn strays_land_in_the_requested_band() {
        let field = DepthField::constant(4.0).unwrap();
        let strays = StrayParams {
            rate: 1.0,
            band_lo: 280,
            band_hi: 349,
        };
        let log = generate_log_with_strays(
            &field,
            &east_path(40, 0.5),
            25.0,
            &config(),
            &SpeckleParams::quiet(3),
            &strays,
        )
        .unwrap();
        let overlay = first_return_overlay(&log, 0.3);
        for (i, ret) in overlay.per_ping.iter().enumerate().take(39) {
            for fr in [&ret.positive, &ret.negative] {
                let px = fr.offset().expect("stray must still be a return");
                assert!((280..=349).contains(&px), "ping {i} pixel {px}");
            }
        }
    }

    #[test]
    fn zero_rate_strays_do_not_disturb_a_quiet_log() {
        let field = DepthField::constant(4.0).unwrap();
        let path = east_path(30, 0.5);
        let quiet = SpeckleParams::quiet(9);
        let clean = generate_log(&field, &path, 25.0, &config(), &quiet).unwrap();
        let zero = generate_log_with_strays(
            &field,
            &path,
            25.0,
            &config(),
            &quiet,
            &StrayParams {
                rate: 0.0,
                band_lo: 280,
                band_hi: 349,
            },
        )
        .unwrap();
        assert_eq!(write_log(&clean), write_log(&zero));
    }

    #[test]
    fn stray_parameters_are_validated() {
        let field = DepthField::constant(4.0).unwrap();
        let path = east_path(5, 0.5);
        let gen = |rate, lo, hi| {
            generate_log_with_strays(
                &field,
                &path,
                25.0,
                &config(),
                &SpeckleParams::quiet(0),
                &StrayParams {
                    rate,
                    band_lo: lo,
                    band_hi: hi,
                },
            )
        };
        assert_eq!(gen(1.5, 280, 349).unwrap_err(), SynthError::BadStrayRate(1.5));
        assert_eq!(
            gen(0.1, 5, 349).unwrap_err(),
            SynthError::BadStrayBand {
                lo: 5,
                hi: 349,
                min: 11,
                max: 349
            }
        );
        assert_eq!(
            gen(0.1, 300, 350).unwrap_err(),
            SynthError::BadStrayBand {
                lo: 300,
                hi: 350,
                min: 11,
                max: 349
            }
        );
    }

    #[test]
    fn lawnmower_lanes_alternate_direction() {
        let path = lawnmower_path(PlanarPosition::new(0.0, 0.0), 3, 2, 1.0, 10.0).unwrap();
        let xs: Vec<f64> = path.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = path.iter().map(|p| p.y).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 2.0, 1.0, 0.0]);
        assert_eq!(ys, vec![0.0, 0.0, 0.0, 10.0, 10.0, 10.0]);
    }

    #[test]
    fn luma_matches_the_fixture_triple() {
        assert_eq!(grayscale(255.0, 255.0, 255.0), Ok(255));
        assert_eq!(grayscale(0.0, 0.0, 0.0), Ok(0));
        // 0.299 * 255 = 76.245, rounds down.
        assert_eq!(grayscale(255.0, 0.0, 0.0), Ok(76));
        assert_eq!(grayscale(0.0, 255.0, 0.0), Ok(150));
        assert!(matches!(
            grayscale(256.0, 0.0, 0.0),
            Err(SynthError::ChannelOutOfRange { channel: "red", .. })
        ));
        assert!(grayscale(0.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn pulse_is_five_pixels_wide() {
        let field = DepthField::constant(4.0).unwrap();
        let log = generate_log(
            &field,
            &east_path(3, 0.5),
            25.0,
            &config(),
            &SpeckleParams::quiet(0),
        )
        .unwrap();
        let line = &log.pings()[0].scanline;
        let center = 350usize;
        for k in 0..PULSE_WIDTH_PIXELS as usize {
            assert!(line[center + 115 + k] > 0.0);
            assert!(line[center - 115 - k] > 0.0);
        }
        assert_eq!(line[center + 114], 0.0);
        assert_eq!(line[center + 120], 0.0);
        assert_eq!(line[center - 114], 0.0);
        assert_eq!(line[center - 120], 0.0);
    }
}
