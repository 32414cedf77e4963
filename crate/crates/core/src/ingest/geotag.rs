//! Camera geotag CSV: header `image_id,lat,lon,alt[,timestamp]`.

use crate::error::{ParseError, ParseErrorKind, Position, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GeoTagRecord {
    pub image_id: String,
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
    pub timestamp: Option<f64>,
    /// Set when the position could not be recovered; coordinates are then NaN.
    pub missing: bool,
}

impl GeoTagRecord {
    pub fn is_complete(&self) -> bool {
        !self.missing
    }
}

fn num(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_geotags(bytes: &[u8]) -> Result<Vec<GeoTagRecord>> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        ParseError::new(
            ParseErrorKind::NotText,
            Position::Byte(e.valid_up_to()),
            "geotag file is not UTF-8 text",
        )
    })?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| {
        ParseError::new(ParseErrorKind::MalformedHeader, Position::Line(1), "missing header")
    })?;
    let cols: Vec<String> = header
        .split(',')
        .map(|c| c.trim().trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    let has_ts = match cols.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["image_id", "lat", "lon", "alt"] => false,
        ["image_id", "lat", "lon", "alt", "timestamp"] => true,
        _ => {
            return Err(ParseError::new(
                ParseErrorKind::MalformedHeader,
                Position::Line(1),
                format!("expected 'image_id,lat,lon,alt[,timestamp]', found '{header}'"),
            )
            .into())
        }
    };
    let mut out = Vec::new();
    for (_, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        let image_id = f.first().map(|s| s.trim().to_string()).unwrap_or_default();
        let lat = f.get(1).and_then(|s| num(s)).filter(|v| (-90.0..=90.0).contains(v));
        let lon = f.get(2).and_then(|s| num(s)).filter(|v| (-180.0..=180.0).contains(v));
        let alt = f.get(3).and_then(|s| num(s));
        let timestamp = if has_ts { f.get(4).and_then(|s| num(s)) } else { None };
        let missing = lat.is_none() || lon.is_none() || alt.is_none();
        out.push(GeoTagRecord {
            image_id,
            lat: lat.unwrap_or(f64::NAN),
            lon: lon.unwrap_or(f64::NAN),
            alt: alt.unwrap_or(f64::NAN),
            timestamp,
            missing,
        });
    }
    Ok(out)
}

pub fn write_geotags(records: &[GeoTagRecord]) -> String {
    let mut out = String::from("image_id,lat,lon,alt,timestamp\n");
    for r in records {
        let ts = r.timestamp.map(|t| t.to_string()).unwrap_or_default();
        if r.missing {
            out.push_str(&format!("{},,,,{}\n", r.image_id, ts));
        } else {
            out.push_str(&format!("{},{},{},{},{}\n", r.image_id, r.lat, r.lon, r.alt, ts));
        }
    }
    out
}
