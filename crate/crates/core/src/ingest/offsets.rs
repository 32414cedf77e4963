//! Photogrammetry offset file: `offset_e offset_n offset_z` in meters.

use crate::error::{Error, ParseError, ParseErrorKind, Position, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetRecord {
    pub offset_e: f64,
    pub offset_n: f64,
    pub offset_z: f64,
}

impl OffsetRecord {
    pub fn as_vec(&self) -> [f64; 3] {
        [self.offset_e, self.offset_n, self.offset_z]
    }
}

pub fn parse_offsets(bytes: &[u8]) -> Result<OffsetRecord> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        Error::from(ParseError::new(
            ParseErrorKind::NotText,
            Position::Byte(e.valid_up_to()),
            "offset file is not text",
        ))
    })?;
    let mut found = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = Position::Line(i + 1);
        if found.is_some() {
            return Err(ParseError::new(ParseErrorKind::InvalidRecord, at, "more than one offset line").into());
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::from(ParseError::new(ParseErrorKind::InvalidRecord, at, "offsets must be finite decimals")))?;
        if vals.len() != 3 {
            return Err(ParseError::new(
                ParseErrorKind::InvalidRecord,
                at,
                format!("expected 3 offsets, found {}", vals.len()),
            )
            .into());
        }
        found = Some(OffsetRecord {
            offset_e: vals[0],
            offset_n: vals[1],
            offset_z: vals[2],
        });
    }
    found.ok_or_else(|| {
        ParseError::new(ParseErrorKind::InvalidRecord, Position::Line(1), "no offset line").into()
    })
}

pub fn write_offsets(o: &OffsetRecord) -> String {
    format!("{} {} {}\n", o.offset_e, o.offset_n, o.offset_z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_one_line() {
        let o = parse_offsets(b"  754000.5 3390000.25 -1.5 \n").unwrap();
        assert_eq!(o.as_vec(), [754000.5, 3390000.25, -1.5]);
        assert_eq!(parse_offsets(write_offsets(&o).as_bytes()).unwrap(), o);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_offsets(b"1 2\n").is_err());
        assert!(parse_offsets(b"1 2 x\n").is_err());
        assert!(parse_offsets(b"1 2 3\n4 5 6\n").is_err());
        assert!(parse_offsets(b"").is_err());
    }
}
