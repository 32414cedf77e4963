//! Wavefront OBJ geometry subset: `v` and `f` records, triangles on output.

use crate::error::{Error, ParseError, ParseErrorKind, Position, Result};
use crate::mesh::{Frame, TriMesh};

use super::ply::push_polygon;

pub fn read_obj_mesh(bytes: &[u8]) -> Result<TriMesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        Error::from(ParseError::new(
            ParseErrorKind::NotText,
            Position::Byte(e.valid_up_to()),
            "OBJ file is not UTF-8 text",
        ))
    })?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut frame = Frame::Local;
    let mut poly = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let at = Position::Line(i + 1);
        let line = raw.trim();
        if let Some(c) = line.strip_prefix('#') {
            if let Some(tag) = c.trim().strip_prefix("frame:") {
                frame = tag.trim().parse().map_err(|e: Error| {
                    Error::from(ParseError::new(ParseErrorKind::MalformedHeader, at, e.to_string()))
                })?;
            }
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in c.iter_mut() {
                    *slot = tok
                        .next()
                        .and_then(|t| t.parse::<f64>().ok())
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| {
                            Error::from(ParseError::new(
                                ParseErrorKind::InvalidRecord,
                                at,
                                "vertex needs three finite coordinates",
                            ))
                        })?;
                }
                vertices.push(c);
            }
            Some("f") => {
                poly.clear();
                for t in tok {
                    let head = t.split('/').next().unwrap_or("");
                    let idx: i64 = head.parse().map_err(|_| {
                        Error::from(ParseError::new(
                            ParseErrorKind::InvalidRecord,
                            at,
                            format!("bad face index '{t}'"),
                        ))
                    })?;
                    let n = vertices.len() as i64;
                    let zero_based = match idx {
                        0 => -1,
                        i if i > 0 => i - 1,
                        i => n + i,
                    };
                    poly.push(zero_based as f64);
                }
                push_polygon(&poly, vertices.len(), at, &mut faces)?;
            }
            _ => {}
        }
    }
    Ok(TriMesh {
        vertices,
        faces,
        frame,
    })
}

pub fn encode_obj(mesh: &TriMesh) -> Vec<u8> {
    let mut out = String::with_capacity(64 + mesh.vertices.len() * 48 + mesh.faces.len() * 24);
    out.push_str(&format!("# frame: {}\n", mesh.frame));
    for v in &mesh.vertices {
        out.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
    }
    for f in &mesh.faces {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_based_indices_become_zero_based() {
        let src = b"# frame: utm/14N\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1/1 4/1 3/1\nf 2//1 3//1 4//1\n";
        let m = read_obj_mesh(src).unwrap();
        assert_eq!(m.faces, vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]);
        assert_eq!(m.frame, Frame::Utm { zone: 14, north: true });
    }

    #[test]
    fn negative_indices_are_relative() {
        let m = read_obj_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn index_zero_is_out_of_range() {
        let e = read_obj_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError { kind: ParseErrorKind::IndexOutOfRange, position: Position::Line(4), .. })));
    }
}
