//! Horizontal georeferencing.
//!
//! GPS fixes are projected with the spherical Web Mercator forward
//! transform and then shifted into a local east/north frame (ENU ground
//! plane) so the rest of the pipeline works in meters. No scale
//! correction is applied beyond the projection itself; survey areas are
//! small enough that the residual distortion is irrelevant next to the
//! sonar geometry.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Sphere radius used by the projection, meters.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

/// Latitudes at or beyond this magnitude (degrees) are rejected; the
/// projection diverges toward the poles.
pub const MAX_LATITUDE_DEG: f64 = 85.06;

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("latitude {0} deg is outside the projectable band (|lat| < {MAX_LATITUDE_DEG})")]
    LatitudeOutOfRange(f64),
}

/// A point in the projected plane (or in a local ENU frame derived from
/// it), meters. East is +x, north is +y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPosition {
    pub x: f64,
    pub y: f64,
}

impl PlanarPosition {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// A planar displacement, meters. Produced by subtracting positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// The unit vector in this direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(Vec2::new(self.x / n, self.y / n))
        }
    }

    /// Rotate 90 degrees counterclockwise: east becomes north. Equals
    /// the planar part of the cross product with the downward vertical,
    /// so it points to the left of a heading.
    pub fn perp_left(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl Sub for PlanarPosition {
    type Output = Vec2;
    fn sub(self, rhs: PlanarPosition) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Add<Vec2> for PlanarPosition {
    type Output = PlanarPosition;
    fn add(self, rhs: Vec2) -> PlanarPosition {
        PlanarPosition::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub<Vec2> for PlanarPosition {
    type Output = PlanarPosition;
    fn sub(self, rhs: Vec2) -> PlanarPosition {
        PlanarPosition::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Forward spherical Web Mercator projection.
///
/// `x = R * lon_rad`, `y = R * ln(tan(pi/4 + lat_rad/2))`.
///
/// Longitude is expected in [-180, 180]; values outside that band are the
/// caller's problem and simply extend the plane. Latitude is validated
/// because the formula blows up at the poles.
pub fn mercator(lat_deg: f64, lon_deg: f64) -> Result<PlanarPosition, ProjectionError> {
    // `!(a < b)` instead of `a >= b` so NaN latitudes are rejected too.
    if !(lat_deg.abs() < MAX_LATITUDE_DEG) {
        return Err(ProjectionError::LatitudeOutOfRange(lat_deg));
    }
    let lat = lat_deg.to_radians();
    let lon = lon_deg.to_radians();
    let x = EARTH_RADIUS_M * lon;
    // atanh(sin(lat)) == ln(tan(pi/4 + lat/2)), but stays exact at the
    // equator instead of picking up the rounding of tan(pi/4).
    let y = EARTH_RADIUS_M * lat.sin().atanh();
    Ok(PlanarPosition::new(x, y))
}

/// Inverse of [`mercator`]: plane coordinates back to (lat, lon) degrees.
pub fn mercator_inverse(p: PlanarPosition) -> (f64, f64) {
    let lon = (p.x / EARTH_RADIUS_M).to_degrees();
    let lat = (2.0 * (p.y / EARTH_RADIUS_M).exp().atan() - std::f64::consts::FRAC_PI_2).to_degrees();
    (lat, lon)
}

/// Local east/north frame anchored at a projected origin.
///
/// By convention the origin is the first ping of the survey, so clouds
/// come out in small coordinates; any other anchor works the same way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnuFrame {
    pub origin: PlanarPosition,
}

impl EnuFrame {
    pub const fn new(origin: PlanarPosition) -> Self {
        Self { origin }
    }

    /// Shift a projected position into this frame (componentwise
    /// subtraction of the origin).
    pub fn to_enu(&self, p: PlanarPosition) -> PlanarPosition {
        PlanarPosition::new(p.x - self.origin.x, p.y - self.origin.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn origin_projects_to_zero() {
        let p = mercator(0.0, 0.0).unwrap();
        assert_eq!(p, PlanarPosition::new(0.0, 0.0));
    }

    #[test]
    fn antimeridian_x_matches_published_bound() {
        let p = mercator(0.0, 180.0).unwrap();
        assert!(
            (p.x - 20_037_508.342789244).abs() < 1e-6,
            "x = {}",
            p.x
        );
        assert_eq!(p.y, 0.0);
    }

    #[test]
    fn polar_band_is_rejected() {
        assert_eq!(
            mercator(85.06, 0.0),
            Err(ProjectionError::LatitudeOutOfRange(85.06))
        );
        assert_eq!(
            mercator(-85.06, 0.0),
            Err(ProjectionError::LatitudeOutOfRange(-85.06))
        );
        assert!(matches!(
            mercator(f64::NAN, 0.0),
            Err(ProjectionError::LatitudeOutOfRange(lat)) if lat.is_nan()
        ));
        assert!(mercator(85.0599, 0.0).is_ok());
    }

    #[test]
    fn enu_is_relative_to_origin() {
        let origin = PlanarPosition::new(100.0, -40.0);
        let frame = EnuFrame::new(origin);
        assert_eq!(frame.to_enu(origin), PlanarPosition::new(0.0, 0.0));
        assert_eq!(
            frame.to_enu(PlanarPosition::new(103.0, -38.5)),
            PlanarPosition::new(3.0, 1.5)
        );
    }

    #[test]
    fn inverse_round_trips() {
        for &(lat, lon) in &[(29.6437, -82.3549), (0.0, 0.0), (-45.5, 170.25), (84.9, -179.9)] {
            let p = mercator(lat, lon).unwrap();
            let (lat2, lon2) = mercator_inverse(p);
            assert!((lat - lat2).abs() < 1e-9, "lat {lat} -> {lat2}");
            assert!((lon - lon2).abs() < 1e-9, "lon {lon} -> {lon2}");
        }
    }

    #[test]
    fn perp_turns_east_to_north() {
        let east = Vec2::new(1.0, 0.0);
        assert_eq!(east.perp_left(), Vec2::new(0.0, 1.0));
        let v = Vec2::new(3.0, 4.0);
        let t = v.perp_left();
        assert_eq!(v.x * t.x + v.y * t.y, 0.0);
    }

    proptest! {
        #[test]
        fn x_is_strictly_monotonic_in_lon(
            lat in -85.0f64..85.0,
            lon_a in -180.0f64..180.0,
            delta in 0.0001f64..10.0,
        ) {
            let lon_b = (lon_a + delta).min(180.0);
            prop_assume!(lon_b > lon_a);
            let a = mercator(lat, lon_a).unwrap();
            let b = mercator(lat, lon_b).unwrap();
            prop_assert!(b.x > a.x);
            // Same latitude, so northing must agree exactly.
            prop_assert_eq!(a.y, b.y);
        }

        #[test]
        fn y_is_strictly_monotonic_in_lat(
            lat_a in -85.0f64..84.99,
            delta in 0.0001f64..5.0,
            lon in -180.0f64..180.0,
        ) {
            let lat_b = (lat_a + delta).min(85.0);
            prop_assume!(lat_b > lat_a);
            let a = mercator(lat_a, lon).unwrap();
            let b = mercator(lat_b, lon).unwrap();
            prop_assert!(b.y > a.y);
        }

        #[test]
        fn equator_easting_is_isometric(
            lon_a in -179.0f64..179.0,
            delta in 0.001f64..1.0,
        ) {
            let lon_b = lon_a + delta;
            let a = mercator(0.0, lon_a).unwrap();
            let b = mercator(0.0, lon_b).unwrap();
            let per_degree = (b.x - a.x) / (lon_b - lon_a);
            let expected = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
            prop_assert!(
                (per_degree - expected).abs() / expected < 1e-9,
                "meters per degree at the equator drifted: {} vs {}",
                per_degree,
                expected,
            );
        }

        #[test]
        fn enu_preserves_displacements(
            ox in -1e6f64..1e6, oy in -1e6f64..1e6,
            ax in -1e6f64..1e6, ay in -1e6f64..1e6,
            bx in -1e6f64..1e6, by in -1e6f64..1e6,
        ) {
            let frame = EnuFrame::new(PlanarPosition::new(ox, oy));
            let a = PlanarPosition::new(ax, ay);
            let b = PlanarPosition::new(bx, by);
            let before = b - a;
            let after = frame.to_enu(b) - frame.to_enu(a);
            // Subtracting a shared origin is exact up to one rounding step
            // per component; with coordinates bounded by 1e6 that is well
            // under a nanometer.
            prop_assert!((before.x - after.x).abs() < 1e-8);
            prop_assert!((before.y - after.y).abs() < 1e-8);
        }
    }
}
