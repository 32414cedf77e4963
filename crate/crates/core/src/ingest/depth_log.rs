//! Echosounder depth log: `[timestamp,]lat,lon,depth` per line.

use std::fmt;

use crate::error::{Error, ParseError, ParseErrorKind, Position, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSample {
    pub lat: f64,
    pub lon: f64,
    /// Meters below the waterline, positive downward.
    pub depth: f64,
    pub timestamp: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SkipReason {
    FieldCount,
    InvalidNumber,
    LatitudeRange,
    LongitudeRange,
    NegativeDepth,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SkipReason::FieldCount => "expected 3 or 4 fields",
            SkipReason::InvalidNumber => "unparsable number",
            SkipReason::LatitudeRange => "latitude out of range",
            SkipReason::LongitudeRange => "longitude out of range",
            SkipReason::NegativeDepth => "negative depth",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseReport {
    pub lines: usize,
    pub comments: usize,
    pub skipped: Vec<(usize, SkipReason)>,
}

impl ParseReport {
    pub fn skipped_count(&self) -> usize {
        self.skipped.len()
    }

    pub fn count(&self, reason: SkipReason) -> usize {
        self.skipped.iter().filter(|(_, r)| *r == reason).count()
    }
}

fn parse_record(line: &str) -> std::result::Result<DepthSample, SkipReason> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let nums = |s: &[&str]| -> std::result::Result<Vec<f64>, SkipReason> {
        s.iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or(SkipReason::InvalidNumber)
            })
            .collect()
    };
    let (timestamp, v) = match fields.len() {
        3 => (None, nums(&fields)?),
        4 => {
            let v = nums(&fields)?;
            (Some(v[0]), v[1..].to_vec())
        }
        _ => return Err(SkipReason::FieldCount),
    };
    let (lat, lon, depth) = (v[0], v[1], v[2]);
    if !(-90.0..=90.0).contains(&lat) {
        return Err(SkipReason::LatitudeRange);
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(SkipReason::LongitudeRange);
    }
    if depth < 0.0 {
        return Err(SkipReason::NegativeDepth);
    }
    Ok(DepthSample {
        lat,
        lon,
        depth,
        timestamp,
    })
}

/// Parses a depth log. Bad lines are counted in the report and never abort the parse.
pub fn parse_depth_log(bytes: &[u8]) -> Result<(Vec<DepthSample>, ParseReport)> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        ParseError::new(
            ParseErrorKind::NotText,
            Position::Byte(e.valid_up_to()),
            "depth log is not UTF-8 text",
        )
    })?;
    if text.contains('\0') {
        let at = text.find('\0').unwrap_or(0);
        return Err(ParseError::new(
            ParseErrorKind::NotText,
            Position::Byte(at),
            "NUL byte in depth log",
        )
        .into());
    }
    let mut samples = Vec::new();
    let mut report = ParseReport::default();
    for (i, raw) in text.lines().enumerate() {
        report.lines += 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            report.comments += 1;
            continue;
        }
        match parse_record(line) {
            Ok(s) => samples.push(s),
            Err(reason) => report.skipped.push((i + 1, reason)),
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyLog {
            skipped: report.skipped.len(),
        });
    }
    Ok((samples, report))
}

/// Writes samples in the canonical layout.
pub fn write_depth_log(samples: &[DepthSample], header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        for l in h.lines() {
            out.push_str("# ");
            out.push_str(l);
            out.push('\n');
        }
    }
    for s in samples {
        if let Some(t) = s.timestamp {
            out.push_str(&format!("{t},"));
        }
        out.push_str(&format!("{},{},{}\n", s.lat, s.lon, s.depth));
    }
    out
}
