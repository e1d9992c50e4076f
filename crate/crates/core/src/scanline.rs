//! Scanline normalization and first-return detection.
//!
//! A raw side-scan scanline covers both sides of the track: the center
//! pixel is the transducer, positive offsets walk one side, negative
//! offsets the other. The samples nearest the center are dominated by
//! electrical noise (including negative values), so a configured
//! deadzone band around the center is zeroed before anything else. The
//! remaining samples are scaled by the sensor's intensity full-scale and
//! clamped into `[0, 1]`.
//!
//! The *first return* on a side is the first normalized sample at or
//! above the detection threshold, scanning outward from the first pixel
//! past the deadzone. Its pixel offset from the center is the raw range
//! measurement everything downstream is built on. A side with no sample
//! above threshold simply has no first return; that is a value, not an
//! error.

use rayon::prelude::*;

use crate::sonarlog::{SensorConfig, SurveyLog};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScanlineError {
    #[error("scanline width mismatch: config says {expected}, line has {found}")]
    WidthMismatch { expected: u32, found: usize },
}

/// Which half of the scanline a measurement comes from. The mapping to
/// physical starboard/port happens at export time and can be swapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Positive,
    Negative,
}

/// A deadzone-zeroed, full-scale-normalized scanline.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedScanline {
    values: Vec<f32>,
    center: usize,
    deadzone_halfwidth: u32,
}

impl NormalizedScanline {
    /// All values, in `[0, 1]`, deadzone band zeroed.
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Center pixel index: `W / 2`, rounding down.
    pub fn center(&self) -> usize {
        self.center
    }

    pub fn deadzone_halfwidth(&self) -> u32 {
        self.deadzone_halfwidth
    }

    /// Sample at a signed pixel offset from the center, or `None` when
    /// the offset runs off the line.
    pub fn at_offset(&self, side: Side, offset: u32) -> Option<f32> {
        let idx = match side {
            Side::Positive => self.center.checked_add(offset as usize)?,
            Side::Negative => self.center.checked_sub(offset as usize)?,
        };
        self.values.get(idx).copied()
    }
}

/// Zero the deadzone, then scale by `intensity_max` and clamp to
/// `[0, 1]`. Negative samples outside the deadzone clamp to 0.
pub fn normalize(raw: &[f32], config: &SensorConfig) -> Result<NormalizedScanline, ScanlineError> {
    let width = config.scanline_width as usize;
    if raw.len() != width {
        return Err(ScanlineError::WidthMismatch {
            expected: config.scanline_width,
            found: raw.len(),
        });
    }
    let center = width / 2;
    let dz = config.deadzone_halfwidth as usize;
    let scale = config.intensity_max;
    let values = raw
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i >= center - dz && i <= center + dz {
                0.0
            } else {
                (v as f64 / scale).clamp(0.0, 1.0) as f32
            }
        })
        .collect();
    Ok(NormalizedScanline {
        values,
        center,
        deadzone_halfwidth: config.deadzone_halfwidth,
    })
}

/// First sample at or above `threshold` on one side of a normalized
/// scanline. `pixels` is the offset from the center and is only
/// meaningful when `found` is set; it is always at least
/// `deadzone_halfwidth + 1` and at most `W / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstReturn {
    pub side: Side,
    pub pixels: u32,
    pub found: bool,
}

impl FirstReturn {
    fn missing(side: Side) -> Self {
        Self {
            side,
            pixels: 0,
            found: false,
        }
    }

    /// The pixel offset as an `Option`, for callers who prefer that shape.
    pub fn offset(&self) -> Option<u32> {
        self.found.then_some(self.pixels)
    }
}

/// Scan outward from the first pixel past the deadzone and return the
/// first sample `>= threshold` on the given side.
pub fn first_return(line: &NormalizedScanline, threshold: f64, side: Side) -> FirstReturn {
    let mut p = line.deadzone_halfwidth + 1;
    while let Some(v) = line.at_offset(side, p) {
        if v as f64 >= threshold {
            return FirstReturn {
                side,
                pixels: p,
                found: true,
            };
        }
        p += 1;
    }
    FirstReturn::missing(side)
}

/// Both sides' first returns for one ping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PingReturns {
    pub positive: FirstReturn,
    pub negative: FirstReturn,
}

impl PingReturns {
    /// Exchange which scanline half feeds which geometric side, for
    /// sensors wired the other way around.
    pub fn swapped(self) -> Self {
        PingReturns {
            positive: FirstReturn {
                side: Side::Positive,
                ..self.negative
            },
            negative: FirstReturn {
                side: Side::Negative,
                ..self.positive
            },
        }
    }
}

/// First returns for every ping of a survey, aligned by ping index.
#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub per_ping: Vec<PingReturns>,
}

impl Overlay {
    pub fn swapped(self) -> Self {
        Overlay {
            per_ping: self.per_ping.into_iter().map(PingReturns::swapped).collect(),
        }
    }
}

/// Normalize every scanline and detect both sides' first returns.
pub fn first_return_overlay(log: &SurveyLog, threshold: f64) -> Overlay {
    let config = log.config();
    let per_ping = log
        .pings()
        .par_iter()
        .map(|ping| {
            let line = normalize(&ping.scanline, config)
                .expect("scanline widths are a SurveyLog invariant");
            PingReturns {
                positive: first_return(&line, threshold, Side::Positive),
                negative: first_return(&line, threshold, Side::Negative),
            }
        })
        .collect();
    Overlay { per_ping }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sonarlog::{PingRecord, DEFAULT_INTENSITY_MAX};
    use proptest::prelude::*;

    /// Width 11, deadzone 1, unit full-scale: raw values pass through
    /// untouched outside the deadzone.
    fn passthrough_config(width: u32, dz: u32) -> SensorConfig {
        SensorConfig::new(0.5, width, dz, 1.0).unwrap()
    }

    #[test]
    fn deadzone_zeroing_wins_over_scaling() {
        let config = SensorConfig::new(0.5, 5, 1, DEFAULT_INTENSITY_MAX).unwrap();
        let raw = vec![1.07e9, -5.0e8, 1.07e9, 1.07e9, 2.14e9];
        let line = normalize(&raw, &config).unwrap();
        // Center is 2; the band [1, 3] is zeroed no matter how bright.
        assert_eq!(line.center(), 2);
        assert_eq!(line.values(), &[0.5, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn negatives_outside_the_deadzone_clamp_to_zero() {
        let config = SensorConfig::new(0.5, 5, 0, 1.0).unwrap();
        let line = normalize(&[-0.25, 2.0, 0.5, -1.0e9, 0.75], &config).unwrap();
        assert_eq!(line.values(), &[0.0, 1.0, 0.0, 0.0, 0.75]);
    }

    #[test]
    fn normalize_checks_width() {
        let config = passthrough_config(5, 1);
        assert_eq!(
            normalize(&[0.0; 4], &config),
            Err(ScanlineError::WidthMismatch {
                expected: 5,
                found: 4
            })
        );
    }

    #[test]
    fn first_return_hand_case() {
        // W=11, center 5, deadzone 1. Positive offsets 2..=5 hold
        // (0.1, 0.4, 0.8, 0.2); the scan starts at offset 2.
        let mut raw = vec![0.0f32; 11];
        raw[7] = 0.1;
        raw[8] = 0.4;
        raw[9] = 0.8;
        raw[10] = 0.2;
        let line = normalize(&raw, &passthrough_config(11, 1)).unwrap();

        let fr = first_return(&line, 0.3, Side::Positive);
        assert!(fr.found);
        assert_eq!(fr.pixels, 3);
        assert_eq!(fr.offset(), Some(3));

        let fr = first_return(&line, 0.9, Side::Positive);
        assert!(!fr.found);
        assert_eq!(fr.offset(), None);

        // Nothing was planted on the negative side.
        assert!(!first_return(&line, 0.3, Side::Negative).found);
    }

    #[test]
    fn deadzone_samples_cannot_be_first_returns() {
        // A bright sample inside the deadzone is zeroed and skipped.
        let mut raw = vec![0.0f32; 11];
        raw[6] = 1.0; // offset +1, inside deadzone
        raw[9] = 1.0; // offset +4
        let line = normalize(&raw, &passthrough_config(11, 1)).unwrap();
        let fr = first_return(&line, 0.3, Side::Positive);
        assert_eq!(fr.offset(), Some(4));
    }

    #[test]
    fn overlay_is_aligned_and_labeled() {
        let config = passthrough_config(11, 1);
        let mut a = vec![0.0f32; 11];
        a[8] = 0.9; // positive offset 3
        let mut b = vec![0.0f32; 11];
        b[1] = 0.6; // negative offset 4
        let log = crate::sonarlog::SurveyLog::new(
            config,
            vec![
                PingRecord {
                    t: 0.0,
                    lat: 0.0,
                    lon: 0.0,
                    depth: 1.0,
                    scanline: a,
                },
                PingRecord {
                    t: 1.0,
                    lat: 0.0,
                    lon: 0.0,
                    depth: 1.0,
                    scanline: b,
                },
            ],
        )
        .unwrap();
        let overlay = first_return_overlay(&log, 0.3);
        assert_eq!(overlay.per_ping.len(), 2);
        assert_eq!(overlay.per_ping[0].positive.offset(), Some(3));
        assert_eq!(overlay.per_ping[0].negative.offset(), None);
        assert_eq!(overlay.per_ping[1].positive.offset(), None);
        assert_eq!(overlay.per_ping[1].negative.offset(), Some(4));
        assert_eq!(overlay.per_ping[1].negative.side, Side::Negative);

        let swapped = overlay.swapped();
        assert_eq!(swapped.per_ping[1].positive.offset(), Some(4));
        assert_eq!(swapped.per_ping[1].positive.side, Side::Positive);
        assert_eq!(swapped.per_ping[1].negative.offset(), None);
    }

    // -- invariants ----------------------------------------------------------

    fn arb_line() -> impl Strategy<Value = (Vec<f32>, SensorConfig)> {
        (1u32..40).prop_flat_map(|width| {
            let dz = 0..=(width.saturating_sub(1) / 2).min(5);
            (
                proptest::collection::vec(-3.0e9f32..3.0e9, width as usize),
                dz,
            )
                .prop_map(move |(raw, dz)| {
                    (raw, SensorConfig::new(0.5, width, dz, DEFAULT_INTENSITY_MAX).unwrap())
                })
        })
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent((raw, config) in arb_line()) {
            let once = normalize(&raw, &config).unwrap();
            let rescaled: Vec<f32> = once
                .values()
                .iter()
                .map(|&v| (v as f64 * config.intensity_max) as f32)
                .collect();
            let twice = normalize(&rescaled, &config).unwrap();
            // Scaling back up and re-normalizing costs two float
            // roundings, so equality is asserted to the last bit or the
            // immediately adjacent one.
            for (a, b) in once.values().iter().zip(twice.values()) {
                let ulps = (a.to_bits() as i64 - b.to_bits() as i64).abs();
                prop_assert!(ulps <= 1, "{a} vs {b} differ by {ulps} ulps");
            }
        }

        #[test]
        fn values_stay_in_unit_range((raw, config) in arb_line()) {
            let line = normalize(&raw, &config).unwrap();
            for &v in line.values() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn found_offsets_stay_in_band((raw, config) in arb_line(), threshold in 0.0f64..1.0) {
            let line = normalize(&raw, &config).unwrap();
            for side in [Side::Positive, Side::Negative] {
                let fr = first_return(&line, threshold, side);
                if let Some(p) = fr.offset() {
                    prop_assert!(p >= config.deadzone_halfwidth + 1);
                    prop_assert!(p as usize <= config.scanline_width as usize / 2);
                }
            }
        }

        #[test]
        fn raising_the_threshold_never_finds_earlier(
            (raw, config) in arb_line(),
            t_lo in 0.0f64..1.0,
            bump in 0.0f64..1.0,
        ) {
            let t_hi = (t_lo + bump).min(1.0);
            let line = normalize(&raw, &config).unwrap();
            for side in [Side::Positive, Side::Negative] {
                let lo = first_return(&line, t_lo, side);
                let hi = first_return(&line, t_hi, side);
                if let Some(p_hi) = hi.offset() {
                    let p_lo = lo.offset().expect("lower threshold must also fire");
                    prop_assert!(p_lo <= p_hi);
                }
            }
        }

        #[test]
        fn mirroring_swaps_the_sides(
            (raw, config) in arb_line().prop_filter("odd widths mirror cleanly", |(r, _)| r.len() % 2 == 1),
            threshold in 0.0f64..1.0,
        ) {
            let mirrored: Vec<f32> = raw.iter().rev().copied().collect();
            let line = normalize(&raw, &config).unwrap();
            let flip = normalize(&mirrored, &config).unwrap();
            let pos = first_return(&line, threshold, Side::Positive);
            let neg = first_return(&flip, threshold, Side::Negative);
            prop_assert_eq!(pos.offset(), neg.offset());
            let neg = first_return(&line, threshold, Side::Negative);
            let pos = first_return(&flip, threshold, Side::Positive);
            prop_assert_eq!(neg.offset(), pos.offset());
        }
    }
}
