use lakemesh::geodesy::{utm_to_wgs84, wgs84_to_utm, zone_for_longitude, GeoCoord, Hemisphere, UtmCoord};
use proptest::prelude::*;

struct Row {
    lat: f64,
    lon: f64,
    zone: u8,
    easting: f64,
    northing: f64,
}

fn reference() -> Vec<Row> {
    include_str!("data/utm_reference.csv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("kind"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                lat: f[1].parse().unwrap(),
                lon: f[2].parse().unwrap(),
                zone: f[3].parse().unwrap(),
                easting: f[4].parse().unwrap(),
                northing: f[5].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn matches_reference_within_a_millimetre() {
    let rows = reference();
    assert!(rows.len() >= 40);
    let mut forced = 0;
    for r in &rows {
        let geo = GeoCoord::new(r.lat, r.lon).unwrap();
        if zone_for_longitude(r.lon).unwrap() != r.zone {
            forced += 1;
        }
        let u = wgs84_to_utm(geo, Some(r.zone)).unwrap();
        assert_eq!(u.zone, r.zone);
        assert_eq!(u.hemisphere, Hemisphere::from_north(r.lat >= 0.0));
        let d = (u.easting - r.easting).hypot(u.northing - r.northing);
        assert!(d < 1e-3, "({}, {}) zone {}: off by {d} m", r.lat, r.lon, r.zone);
    }
    assert!(forced >= 10, "only {forced} forced-zone rows");
}

#[test]
fn reference_points_invert() {
    for r in reference() {
        let h = Hemisphere::from_north(r.lat >= 0.0);
        let g = utm_to_wgs84(UtmCoord::new(r.easting, r.northing, r.zone, h).unwrap()).unwrap();
        assert!((g.lat - r.lat).abs() < 1e-8 && (g.lon - r.lon).abs() < 1e-8, "{} {}", g.lat, g.lon);
    }
}

proptest! {
    #[test]
    fn round_trip(lat in -79.9f64..83.9, lon in -179.9f64..179.9) {
        let geo = GeoCoord::new(lat, lon).unwrap();
        let back = utm_to_wgs84(wgs84_to_utm(geo, None).unwrap()).unwrap();
        prop_assert!((back.lat - lat).abs() < 1e-9);
        prop_assert!((back.lon - lon).abs() < 1e-9);
    }

    #[test]
    fn neighbouring_zone_round_trip(lat in -79.9f64..83.9, lon in -179.0f64..179.0, west in any::<bool>()) {
        let geo = GeoCoord::new(lat, lon).unwrap();
        let z = zone_for_longitude(lon).unwrap();
        let forced = if west { if z == 1 { 60 } else { z - 1 } } else if z == 60 { 1 } else { z + 1 };
        if let Ok(u) = wgs84_to_utm(geo, Some(forced)) {
            let back = utm_to_wgs84(u).unwrap();
            prop_assert!((back.lat - lat).abs() < 1e-9);
            let dl = (back.lon - lon + 540.0).rem_euclid(360.0) - 180.0;
            prop_assert!(dl.abs() < 1e-9);
        }
    }
}
