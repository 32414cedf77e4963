//! Stanford PLY reader and writer (ASCII and binary little-endian).

use crate::error::{Error, ParseError, ParseErrorKind, Position, Result};
use crate::geom::Vec3;
use crate::mesh::{Frame, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Scalar::F32 | Scalar::F64)
    }

    fn decode(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

impl Property {
    fn name(&self) -> &str {
        match self {
            Property::Scalar { name, .. } | Property::List { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    frame: Frame,
    body_offset: usize,
    body_line: usize,
}

/// Geometry decoded from a PLY file; `normals` is present when the vertex
/// element carries `nx`, `ny`, `nz`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlyData {
    pub vertices: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub faces: Vec<[u32; 3]>,
    pub frame: Frame,
}

fn header_err(line: usize, msg: impl Into<String>) -> Error {
    ParseError::new(ParseErrorKind::MalformedHeader, Position::Line(line), msg).into()
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0usize;
    let mut line_no = 0usize;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut frame = Frame::Local;
    loop {
        let rest = &bytes[pos..];
        let nl = rest.iter().position(|&b| b == b'\n').ok_or_else(|| {
            header_err(line_no + 1, "header is not terminated by 'end_header'")
        })?;
        line_no += 1;
        let raw = &rest[..nl];
        pos += nl + 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| header_err(line_no, "header line is not text"))?
            .trim_end_matches('\r')
            .trim();
        if line_no == 1 {
            if line != "ply" {
                return Err(header_err(1, "missing 'ply' magic"));
            }
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            None => continue,
            Some("format") => {
                let enc = tok.next().unwrap_or("");
                encoding = Some(match enc {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::BinaryLe,
                    "binary_big_endian" => {
                        return Err(ParseError::new(
                            ParseErrorKind::UnsupportedFormat,
                            Position::Line(line_no),
                            "big-endian PLY is not supported",
                        )
                        .into())
                    }
                    other => return Err(header_err(line_no, format!("unknown format '{other}'"))),
                });
            }
            Some("comment") => {
                let text = line["comment".len()..].trim();
                if let Some(tag) = text.strip_prefix("frame:") {
                    frame = tag
                        .trim()
                        .parse()
                        .map_err(|e: Error| header_err(line_no, e.to_string()))?;
                }
            }
            Some("obj_info") => {}
            Some("element") => {
                let name = tok.next().ok_or_else(|| header_err(line_no, "element without name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| header_err(line_no, "element count is not an integer"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| header_err(line_no, "property before any element"))?;
                let t = tok.next().unwrap_or("");
                let prop = if t == "list" {
                    let count = tok.next().and_then(Scalar::parse);
                    let item = tok.next().and_then(Scalar::parse);
                    let name = tok.next();
                    match (count, item, name) {
                        (Some(c), Some(i), Some(n)) if c.is_integer() => Property::List {
                            name: n.to_string(),
                            count: c,
                            item: i,
                        },
                        _ => return Err(header_err(line_no, "malformed list property")),
                    }
                } else {
                    let ty = Scalar::parse(t)
                        .ok_or_else(|| header_err(line_no, format!("unknown type '{t}'")))?;
                    let name = tok
                        .next()
                        .ok_or_else(|| header_err(line_no, "property without name"))?;
                    Property::Scalar {
                        name: name.to_string(),
                        ty,
                    }
                };
                el.props.push(prop);
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(header_err(line_no, format!("unexpected header keyword '{other}'")))
            }
        }
    }
    let encoding = encoding.ok_or_else(|| header_err(line_no, "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        frame,
        body_offset: pos,
        body_line: line_no + 1,
    })
}

/// One decoded element instance: scalar values and list values in property order.
enum Value {
    Scalar(f64),
    List(Vec<f64>),
}

trait BodyReader {
    fn scalar(&mut self, ty: Scalar) -> Result<f64>;
    fn begin_instance(&mut self) -> Result<()>;
    fn end_instance(&mut self) -> Result<()>;
    fn position(&self) -> Position;
    fn remaining_hint(&self) -> usize;
}

struct BinaryBody<'a> {
    bytes: &'a [u8],
    pos: usize,
    base: usize,
}

impl BodyReader for BinaryBody<'_> {
    fn scalar(&mut self, ty: Scalar) -> Result<f64> {
        let n = ty.size();
        if self.pos + n > self.bytes.len() {
            return Err(ParseError::new(
                ParseErrorKind::TruncatedBody,
                Position::Byte(self.base + self.pos),
                "binary body ends inside an element",
            )
            .into());
        }
        let v = ty.decode(&self.bytes[self.pos..self.pos + n]);
        self.pos += n;
        Ok(v)
    }
    fn begin_instance(&mut self) -> Result<()> {
        Ok(())
    }
    fn end_instance(&mut self) -> Result<()> {
        Ok(())
    }
    fn position(&self) -> Position {
        Position::Byte(self.base + self.pos)
    }
    fn remaining_hint(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

struct AsciiBody<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    first_line: usize,
    current: Vec<&'a str>,
    cursor: usize,
    line_no: usize,
    remaining: usize,
}

impl<'a> BodyReader for AsciiBody<'a> {
    fn scalar(&mut self, ty: Scalar) -> Result<f64> {
        let tok = self.current.get(self.cursor).ok_or_else(|| {
            Error::from(ParseError::new(
                ParseErrorKind::InvalidRecord,
                Position::Line(self.line_no),
                "too few values on line",
            ))
        })?;
        self.cursor += 1;
        let v: f64 = tok.parse().map_err(|_| {
            Error::from(ParseError::new(
                ParseErrorKind::InvalidRecord,
                Position::Line(self.line_no),
                format!("'{tok}' is not a number"),
            ))
        })?;
        if ty.is_integer() && v.fract() != 0.0 {
            return Err(ParseError::new(
                ParseErrorKind::InvalidRecord,
                Position::Line(self.line_no),
                format!("'{tok}' is not an integer"),
            )
            .into());
        }
        Ok(v)
    }
    fn begin_instance(&mut self) -> Result<()> {
        loop {
            match self.lines.next() {
                Some((i, l)) => {
                    self.remaining = self.remaining.saturating_sub(l.len() + 1);
                    let l = l.trim();
                    if l.is_empty() {
                        continue;
                    }
                    self.line_no = self.first_line + i;
                    self.current = l.split_whitespace().collect();
                    self.cursor = 0;
                    return Ok(());
                }
                None => {
                    return Err(ParseError::new(
                        ParseErrorKind::TruncatedBody,
                        Position::Line(self.line_no + 1),
                        "ASCII body ends before all elements were read",
                    )
                    .into())
                }
            }
        }
    }
    fn end_instance(&mut self) -> Result<()> {
        if self.cursor != self.current.len() {
            return Err(ParseError::new(
                ParseErrorKind::InvalidRecord,
                Position::Line(self.line_no),
                "unexpected extra values on line",
            )
            .into());
        }
        Ok(())
    }
    fn position(&self) -> Position {
        Position::Line(self.line_no)
    }
    fn remaining_hint(&self) -> usize {
        self.remaining
    }
}

fn read_instance(r: &mut dyn BodyReader, props: &[Property], out: &mut Vec<Value>) -> Result<()> {
    out.clear();
    r.begin_instance()?;
    for p in props {
        match p {
            Property::Scalar { ty, .. } => out.push(Value::Scalar(r.scalar(*ty)?)),
            Property::List { count, item, .. } => {
                let n = r.scalar(*count)?;
                if n < 0.0 {
                    return Err(ParseError::new(
                        ParseErrorKind::InvalidRecord,
                        r.position(),
                        "negative list length",
                    )
                    .into());
                }
                let n = n as usize;
                let mut items = Vec::with_capacity(n.min(r.remaining_hint()));
                for _ in 0..n {
                    items.push(r.scalar(*item)?);
                }
                out.push(Value::List(items));
            }
        }
    }
    r.end_instance()
}

fn decode_body(header: &Header, r: &mut dyn BodyReader) -> Result<PlyData> {
    let mut vertices = Vec::new();
    let mut normals: Option<Vec<Vec3>> = None;
    let mut faces = Vec::new();
    let mut scratch = Vec::new();
    let mut vertex_seen = false;
    for el in &header.elements {
        let find = |name: &str| el.props.iter().position(|p| p.name() == name);
        match el.name.as_str() {
            "vertex" => {
                vertex_seen = true;
                let (ix, iy, iz) = match (find("x"), find("y"), find("z")) {
                    (Some(x), Some(y), Some(z)) => (x, y, z),
                    _ => {
                        return Err(ParseError::new(
                            ParseErrorKind::MalformedHeader,
                            Position::Line(1),
                            "vertex element lacks x, y, z",
                        )
                        .into())
                    }
                };
                let nidx = match (find("nx"), find("ny"), find("nz")) {
                    (Some(a), Some(b), Some(c)) => Some((a, b, c)),
                    _ => None,
                };
                vertices.reserve(el.count.min(r.remaining_hint()));
                let mut ns = Vec::new();
                for _ in 0..el.count {
                    read_instance(r, &el.props, &mut scratch)?;
                    let get = |i: usize| match &scratch[i] {
                        Value::Scalar(v) => Some(*v),
                        Value::List(_) => None,
                    };
                    let v = match (get(ix), get(iy), get(iz)) {
                        (Some(x), Some(y), Some(z)) if x.is_finite() && y.is_finite() && z.is_finite() => [x, y, z],
                        _ => {
                            return Err(ParseError::new(
                                ParseErrorKind::InvalidRecord,
                                r.position(),
                                "vertex coordinate is not a finite scalar",
                            )
                            .into())
                        }
                    };
                    vertices.push(v);
                    if let Some((a, b, c)) = nidx {
                        ns.push([
                            get(a).unwrap_or(0.0),
                            get(b).unwrap_or(0.0),
                            get(c).unwrap_or(0.0),
                        ]);
                    }
                }
                if nidx.is_some() {
                    normals = Some(ns);
                }
            }
            "face" => {
                let li = el
                    .props
                    .iter()
                    .position(|p| {
                        matches!(p, Property::List { name, .. } if name == "vertex_indices" || name == "vertex_index")
                    })
                    .ok_or_else(|| {
                        Error::from(ParseError::new(
                            ParseErrorKind::MalformedHeader,
                            Position::Line(1),
                            "face element lacks a vertex_indices list",
                        ))
                    })?;
                if !vertex_seen {
                    return Err(ParseError::new(
                        ParseErrorKind::MalformedHeader,
                        Position::Line(1),
                        "face element precedes vertex element",
                    )
                    .into());
                }
                faces.reserve(el.count.min(r.remaining_hint()));
                for _ in 0..el.count {
                    read_instance(r, &el.props, &mut scratch)?;
                    let idx = match &scratch[li] {
                        Value::List(v) => v,
                        Value::Scalar(_) => unreachable!(),
                    };
                    push_polygon(idx, vertices.len(), r.position(), &mut faces)?;
                }
            }
            _ => {
                for _ in 0..el.count {
                    read_instance(r, &el.props, &mut scratch)?;
                }
            }
        }
    }
    Ok(PlyData {
        vertices,
        normals,
        faces,
        frame: header.frame,
    })
}

/// Validates a polygon's indices and fan-triangulates it.
pub(crate) fn push_polygon(
    idx: &[f64],
    nverts: usize,
    at: Position,
    faces: &mut Vec<[u32; 3]>,
) -> Result<()> {
    if idx.len() < 3 {
        return Err(ParseError::new(
            ParseErrorKind::DegenerateFace,
            at,
            format!("face has {} vertices", idx.len()),
        )
        .into());
    }
    let mut ids = Vec::with_capacity(idx.len());
    for &i in idx {
        if i < 0.0 || i >= nverts as f64 || i.fract() != 0.0 {
            return Err(ParseError::new(
                ParseErrorKind::IndexOutOfRange,
                at,
                format!("vertex index {i} outside 0..{nverts}"),
            )
            .into());
        }
        ids.push(i as u32);
    }
    for k in 1..ids.len() - 1 {
        let f = [ids[0], ids[k], ids[k + 1]];
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return Err(ParseError::new(
                ParseErrorKind::DegenerateFace,
                at,
                format!("face repeats a vertex index: {f:?}"),
            )
            .into());
        }
        faces.push(f);
    }
    Ok(())
}

pub fn parse_ply(bytes: &[u8]) -> Result<PlyData> {
    let header = parse_header(bytes)?;
    let body = &bytes[header.body_offset..];
    match header.encoding {
        Encoding::BinaryLe => {
            let mut r = BinaryBody {
                bytes: body,
                pos: 0,
                base: header.body_offset,
            };
            decode_body(&header, &mut r)
        }
        Encoding::Ascii => {
            let text = std::str::from_utf8(body).map_err(|e| {
                Error::from(ParseError::new(
                    ParseErrorKind::NotText,
                    Position::Byte(header.body_offset + e.valid_up_to()),
                    "ASCII PLY body is not text",
                ))
            })?;
            let mut r = AsciiBody {
                lines: text.lines().enumerate(),
                first_line: header.body_line,
                current: Vec::new(),
                cursor: 0,
                line_no: header.body_line,
                remaining: text.len(),
            };
            decode_body(&header, &mut r)
        }
    }
}

pub fn read_ply_mesh(bytes: &[u8]) -> Result<TriMesh> {
    let d = parse_ply(bytes)?;
    Ok(TriMesh {
        vertices: d.vertices,
        faces: d.faces,
        frame: d.frame,
    })
}

/// Encodes vertices, optional normals and triangles as PLY.
pub fn encode_ply(
    vertices: &[Vec3],
    normals: Option<&[Vec3]>,
    faces: &[[u32; 3]],
    frame: Frame,
    binary: bool,
) -> Vec<u8> {
    let mut out = Vec::with_capacity(256 + vertices.len() * 48 + faces.len() * 13);
    out.extend_from_slice(b"ply\n");
    out.extend_from_slice(if binary {
        b"format binary_little_endian 1.0\n".as_slice()
    } else {
        b"format ascii 1.0\n".as_slice()
    });
    out.extend_from_slice(format!("comment frame: {frame}\n").as_bytes());
    out.extend_from_slice(format!("element vertex {}\n", vertices.len()).as_bytes());
    for p in ["x", "y", "z"] {
        out.extend_from_slice(format!("property double {p}\n").as_bytes());
    }
    if normals.is_some() {
        for p in ["nx", "ny", "nz"] {
            out.extend_from_slice(format!("property double {p}\n").as_bytes());
        }
    }
    out.extend_from_slice(format!("element face {}\n", faces.len()).as_bytes());
    out.extend_from_slice(b"property list uchar int vertex_indices\nend_header\n");
    for (i, v) in vertices.iter().enumerate() {
        let n = normals.map(|n| n[i]);
        if binary {
            for c in v.iter().chain(n.iter().flatten()) {
                out.extend_from_slice(&c.to_le_bytes());
            }
        } else {
            let mut line = format!("{} {} {}", v[0], v[1], v[2]);
            if let Some(n) = n {
                line.push_str(&format!(" {} {} {}", n[0], n[1], n[2]));
            }
            line.push('\n');
            out.extend_from_slice(line.as_bytes());
        }
    }
    for f in faces {
        if binary {
            out.push(3);
            for &i in f {
                out.extend_from_slice(&(i as i32).to_le_bytes());
            }
        } else {
            out.extend_from_slice(format!("3 {} {} {}\n", f[0], f[1], f[2]).as_bytes());
        }
    }
    out
}
