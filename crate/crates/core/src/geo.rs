//! Geographic coordinates and great-circle distance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius used for all great-circle computations, in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    OutOfRange { lat: f64, lon: f64 },
    #[error("malformed coordinate `{0}`, expected `lat,lon`")]
    Malformed(String),
}

impl GeoPoint {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let ok = (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon);
        if ok {
            Ok(())
        } else {
            Err(GeoError::OutOfRange {
                lat: self.lat,
                lon: self.lon,
            })
        }
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.lat, self.lon)
    }
}

impl FromStr for GeoPoint {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || GeoError::Malformed(s.to_string());
        let (lat, lon) = s.split_once(',').ok_or_else(malformed)?;
        let lat: f64 = lat.trim().parse().map_err(|_| malformed())?;
        let lon: f64 = lon.trim().parse().map_err(|_| malformed())?;
        let p = GeoPoint::new(lat, lon);
        p.validate()?;
        Ok(p)
    }
}

/// Great-circle distance in meters between two points given in degrees.
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> Result<f64, GeoError> {
    a.validate()?;
    b.validate()?;
    Ok(haversine_unchecked(a, b))
}

pub(crate) fn haversine_unchecked(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    // rounding can push h a hair above 1 for antipodes
    2.0 * EARTH_RADIUS_M * h.min(1.0).sqrt().asin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_are_zero_apart() {
        let p = GeoPoint::new(49.4179, 2.8261);
        assert_eq!(haversine_distance(p, p).unwrap(), 0.0);
    }

    #[test]
    fn antipodal_on_equator() {
        let d = haversine_distance(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 180.0)).unwrap();
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_M).abs() < 1.0);
        assert!((d - 20_015_086.8).abs() < 1.0);
    }

    #[test]
    fn paris_to_compiegne_matches_reference() {
        // reference computed independently in 40-digit arithmetic
        let d = haversine_distance(GeoPoint::new(48.8566, 2.3522), GeoPoint::new(49.4179, 2.8261))
            .unwrap();
        assert!((d - 71_302.201_428_885_5).abs() < 0.5, "{d}");
    }

    #[test]
    fn out_of_range_is_a_domain_error() {
        let bad = GeoPoint::new(91.0, 0.0);
        assert!(matches!(
            haversine_distance(bad, GeoPoint::new(0.0, 0.0)),
            Err(GeoError::OutOfRange { .. })
        ));
        assert!(haversine_distance(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, -180.5)).is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        let p: GeoPoint = "49.4179, 2.8261".parse().unwrap();
        assert_eq!(p, GeoPoint::new(49.4179, 2.8261));
        assert_eq!(p.to_string().parse::<GeoPoint>().unwrap(), p);
        assert!("49.4".parse::<GeoPoint>().is_err());
        assert!("abc,1".parse::<GeoPoint>().is_err());
    }

    #[test]
    fn symmetric() {
        let a = GeoPoint::new(-33.9, 151.2);
        let b = GeoPoint::new(51.5, -0.12);
        let ab = haversine_distance(a, b).unwrap();
        let ba = haversine_distance(b, a).unwrap();
        assert!((ab - ba).abs() < 1e-6);
    }
}
