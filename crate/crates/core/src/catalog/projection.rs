//! Equirectangular projection about a reference point.
//!
//! `x = R * dlon * cos(lat0)`, `y = R * dlat`. East-west lengths are off by
//! roughly `tan(lat0) * dlat`, so at mid latitudes pairwise distances agree
//! with great-circle distances to better than 0.1% for extents up to about
//! 15 km, and about 0.13% at 20 km.

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub lat0: f64,
    pub lon0: f64,
}

impl Projection {
    pub fn new(lat0: f64, lon0: f64) -> Self {
        Projection { lat0, lon0 }
    }

    /// Projection about the centroid of `(lat, lon)` pairs.
    pub fn about_centroid(points: &[(f64, f64)]) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        let n = points.len() as f64;
        let lat0 = points.iter().map(|p| p.0).sum::<f64>() / n;
        let lon0 = points.iter().map(|p| p.1).sum::<f64>() / n;
        Some(Projection { lat0, lon0 })
    }

    /// Degrees in, kilometres out.
    pub fn project(&self, lat: f64, lon: f64) -> (f64, f64) {
        let x = EARTH_RADIUS_KM * (lon - self.lon0).to_radians() * self.lat0.to_radians().cos();
        let y = EARTH_RADIUS_KM * (lat - self.lat0).to_radians();
        (x, y)
    }
}

/// Great-circle distance in kilometres.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().asin()
}
