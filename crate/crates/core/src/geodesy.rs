//! WGS84 geodetic <-> UTM conversion.
//!
//! The transverse Mercator is evaluated with the Krüger series carried to
//! sixth order in the third flattening, which is accurate to a few
//! nanometres within a zone and well below a millimetre out to 9° from the
//! central meridian. The inverse recovers latitude from the conformal
//! latitude by Newton iteration.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const WGS84_A: f64 = 6_378_137.0;
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
pub const UTM_K0: f64 = 0.9996;
pub const FALSE_EASTING: f64 = 500_000.0;
pub const FALSE_NORTHING_SOUTH: f64 = 10_000_000.0;

pub const MIN_LAT: f64 = -80.0;
pub const MAX_LAT: f64 = 84.0;
/// Largest distance from a zone's central meridian accepted when a zone is forced.
pub const MAX_FORCED_OFFSET_DEG: f64 = 9.0;

const MIN_EASTING: f64 = 100_000.0;
const MAX_EASTING: f64 = 900_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoCoord {
    pub lat: f64,
    pub lon: f64,
}

impl GeoCoord {
    /// Validates the latitude band and normalizes longitude into [-180, 180).
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || !(MIN_LAT..=MAX_LAT).contains(&lat) {
            return Err(Error::OutOfBand(format!(
                "latitude {lat} outside [{MIN_LAT}, {MAX_LAT}]"
            )));
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::Domain(format!("longitude {lon} outside [-180, 180]")));
        }
        let lon = if lon == 180.0 { -180.0 } else { lon };
        Ok(GeoCoord { lat, lon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hemisphere {
    North,
    South,
}

impl Hemisphere {
    pub fn is_north(self) -> bool {
        self == Hemisphere::North
    }

    pub fn from_north(north: bool) -> Self {
        if north {
            Hemisphere::North
        } else {
            Hemisphere::South
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtmCoord {
    pub easting: f64,
    pub northing: f64,
    pub zone: u8,
    pub hemisphere: Hemisphere,
}

impl UtmCoord {
    pub fn new(easting: f64, northing: f64, zone: u8, hemisphere: Hemisphere) -> Result<Self> {
        let c = UtmCoord {
            easting,
            northing,
            zone,
            hemisphere,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=60).contains(&self.zone) {
            return Err(Error::Domain(format!("zone {} outside 1..=60", self.zone)));
        }
        if !(self.easting > MIN_EASTING && self.easting < MAX_EASTING) {
            return Err(Error::OutOfBand(format!(
                "easting {} outside ({MIN_EASTING}, {MAX_EASTING})",
                self.easting
            )));
        }
        if !(self.northing >= 0.0 && self.northing < FALSE_NORTHING_SOUTH) {
            return Err(Error::OutOfBand(format!(
                "northing {} outside [0, {FALSE_NORTHING_SOUTH})",
                self.northing
            )));
        }
        Ok(())
    }
}

/// UTM zone (1..=60) containing a longitude.
pub fn zone_for_longitude(lon: f64) -> Result<u8> {
    if !lon.is_finite() || !(-180.0..180.0).contains(&lon) {
        return Err(Error::Domain(format!("longitude {lon} outside [-180, 180)")));
    }
    let zone = ((lon + 180.0) / 6.0).floor() as i64 + 1;
    Ok(zone.clamp(1, 60) as u8)
}

pub fn central_meridian(zone: u8) -> f64 {
    zone as f64 * 6.0 - 183.0
}

/// Longitude difference wrapped into [-180, 180).
fn wrap_deg(d: f64) -> f64 {
    let mut d = (d + 180.0).rem_euclid(360.0) - 180.0;
    if d >= 180.0 {
        d -= 360.0;
    }
    d
}

struct Series {
    e: f64,
    /// Rectifying radius scaled by k0.
    k0_a_hat: f64,
    alpha: [f64; 6],
    beta: [f64; 6],
}

fn series() -> &'static Series {
    use std::sync::OnceLock;
    static S: OnceLock<Series> = OnceLock::new();
    S.get_or_init(|| {
        let f = WGS84_F;
        let n = f / (2.0 - f);
        let n2 = n * n;
        let n3 = n2 * n;
        let n4 = n3 * n;
        let n5 = n4 * n;
        let n6 = n5 * n;
        let a_hat = WGS84_A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
        let alpha = [
            n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 - 127.0 * n5 / 288.0
                + 7891.0 * n6 / 37800.0,
            13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 + 281.0 * n5 / 630.0
                - 1983433.0 * n6 / 1935360.0,
            61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0
                + 167603.0 * n6 / 181440.0,
            49561.0 * n4 / 161280.0 - 179.0 * n5 / 168.0 + 6601661.0 * n6 / 7257600.0,
            34729.0 * n5 / 80640.0 - 3418889.0 * n6 / 1995840.0,
            212378941.0 * n6 / 319334400.0,
        ];
        let beta = [
            n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0 - 81.0 * n5 / 512.0
                + 96199.0 * n6 / 604800.0,
            n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0 + 46.0 * n5 / 105.0
                - 1118711.0 * n6 / 3870720.0,
            17.0 * n3 / 480.0 - 37.0 * n4 / 840.0 - 209.0 * n5 / 4480.0 + 5569.0 * n6 / 90720.0,
            4397.0 * n4 / 161280.0 - 11.0 * n5 / 504.0 - 830251.0 * n6 / 7257600.0,
            4583.0 * n5 / 161280.0 - 108847.0 * n6 / 3991680.0,
            20648693.0 * n6 / 638668800.0,
        ];
        Series {
            e: (f * (2.0 - f)).sqrt(),
            k0_a_hat: UTM_K0 * a_hat,
            alpha,
            beta,
        }
    })
}

/// tan(conformal latitude) from tan(geodetic latitude).
fn tau_prime(tau: f64, e: f64) -> f64 {
    let tau1 = tau.hypot(1.0);
    let sig = (e * (e * tau / tau1).atanh()).sinh();
    tau * sig.hypot(1.0) - sig * tau1
}

/// Projects a geodetic coordinate. Without `forced_zone` the zone containing
/// the longitude is used; with it, the longitude may lie up to 9° from the
/// forced zone's central meridian.
pub fn wgs84_to_utm(geo: GeoCoord, forced_zone: Option<u8>) -> Result<UtmCoord> {
    let geo = GeoCoord::new(geo.lat, geo.lon)?;
    let zone = match forced_zone {
        Some(z) if !(1..=60).contains(&z) => {
            return Err(Error::Domain(format!("zone {z} outside 1..=60")))
        }
        Some(z) => z,
        None => zone_for_longitude(geo.lon)?,
    };
    let dlon = wrap_deg(geo.lon - central_meridian(zone));
    if dlon.abs() >= MAX_FORCED_OFFSET_DEG {
        return Err(Error::Domain(format!(
            "longitude {} is {dlon:.3}° from the central meridian of zone {zone}",
            geo.lon
        )));
    }
    let s = series();
    let phi = geo.lat.to_radians();
    let lam = dlon.to_radians();
    let taup = tau_prime(phi.tan(), s.e);
    let xip = taup.atan2(lam.cos());
    let etap = (lam.sin() / taup.hypot(lam.cos())).asinh();
    let mut xi = xip;
    let mut eta = etap;
    for (j, a) in s.alpha.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        xi += a * (k * xip).sin() * (k * etap).cosh();
        eta += a * (k * xip).cos() * (k * etap).sinh();
    }
    let easting = FALSE_EASTING + s.k0_a_hat * eta;
    let mut northing = s.k0_a_hat * xi;
    let hemisphere = if geo.lat >= 0.0 {
        Hemisphere::North
    } else {
        northing += FALSE_NORTHING_SOUTH;
        Hemisphere::South
    };
    UtmCoord::new(easting, northing, zone, hemisphere)
}

/// Inverse projection.
pub fn utm_to_wgs84(utm: UtmCoord) -> Result<GeoCoord> {
    utm.validate()?;
    let s = series();
    let y = match utm.hemisphere {
        Hemisphere::North => utm.northing,
        Hemisphere::South => utm.northing - FALSE_NORTHING_SOUTH,
    };
    let xi = y / s.k0_a_hat;
    let eta = (utm.easting - FALSE_EASTING) / s.k0_a_hat;
    let mut xip = xi;
    let mut etap = eta;
    for (j, b) in s.beta.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        xip -= b * (k * xi).sin() * (k * eta).cosh();
        etap -= b * (k * xi).cos() * (k * eta).sinh();
    }
    let sinh_etap = etap.sinh();
    let cos_xip = xip.cos();
    let taup = xip.sin() / sinh_etap.hypot(cos_xip);
    let lam = sinh_etap.atan2(cos_xip);

    // Newton iteration for tan(phi) given tan(conformal latitude).
    let e2 = s.e * s.e;
    let e2m = 1.0 - e2;
    let mut tau = taup / e2m;
    for _ in 0..8 {
        let tp = tau_prime(tau, s.e);
        let dtau = (taup - tp) / tp.hypot(1.0) * (1.0 + e2m * tau * tau)
            / (e2m * tau.hypot(1.0));
        tau += dtau;
        if dtau.abs() <= 1e-15 * tau.abs().max(1.0) {
            break;
        }
    }
    let lat = tau.atan() * 180.0 / PI;
    let lon = wrap_deg(central_meridian(utm.zone) + lam.to_degrees());
    Ok(GeoCoord { lat, lon })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zone_examples() {
        assert_eq!(zone_for_longitude(-180.0).unwrap(), 1);
        assert_eq!(zone_for_longitude(0.0).unwrap(), 31);
        assert_eq!(zone_for_longitude(-96.34).unwrap(), 14);
        assert_eq!(zone_for_longitude(179.999).unwrap(), 60);
        assert!(zone_for_longitude(180.0).is_err());
        assert!(zone_for_longitude(-180.5).is_err());
        assert!(zone_for_longitude(f64::NAN).is_err());
    }

    #[test]
    fn equator_on_central_meridian() {
        let u = wgs84_to_utm(GeoCoord::new(0.0, 3.0).unwrap(), Some(31)).unwrap();
        assert!((u.easting - 500_000.0).abs() < 1e-9);
        assert!(u.northing.abs() < 1e-9);
        assert_eq!(u.hemisphere, Hemisphere::North);
        let g = utm_to_wgs84(UtmCoord::new(500_000.0, 0.0, 31, Hemisphere::North).unwrap()).unwrap();
        assert!(g.lat.abs() < 1e-12 && (g.lon - 3.0).abs() < 1e-12);
    }

    #[test]
    fn east_of_meridian_increases_easting() {
        let u = wgs84_to_utm(GeoCoord::new(0.0, 3.000001).unwrap(), None).unwrap();
        assert!(u.easting > 500_000.0);
        assert!(u.northing.abs() < 1e-6);
    }

    #[test]
    fn band_errors() {
        assert!(matches!(GeoCoord::new(85.0, 0.0), Err(Error::OutOfBand(_))));
        assert!(matches!(GeoCoord::new(-80.5, 0.0), Err(Error::OutOfBand(_))));
        assert!(matches!(
            UtmCoord::new(50_000.0, 10.0, 31, Hemisphere::North),
            Err(Error::OutOfBand(_))
        ));
        assert!(matches!(
            UtmCoord::new(500_000.0, -1.0, 31, Hemisphere::North),
            Err(Error::OutOfBand(_))
        ));
    }

    #[test]
    fn forced_zone_limit() {
        let g = GeoCoord::new(45.0, -75.0).unwrap();
        // zone 18 has its central meridian at -75; zone 19 is 6° away.
        assert!(matches!(wgs84_to_utm(g, Some(19)), Err(Error::OutOfBand(_))));
        assert!(matches!(wgs84_to_utm(g, Some(20)), Err(Error::Domain(_))));
    }

    #[test]
    fn lon_180_normalizes() {
        assert_eq!(GeoCoord::new(10.0, 180.0).unwrap().lon, -180.0);
    }
}
