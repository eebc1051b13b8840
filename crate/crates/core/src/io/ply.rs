//! PLY 1.0 reader and writer for point clouds.
//!
//! Only the `vertex` element is loaded. `x`, `y`, `z` must be `float` (or
//! `double`); `red`, `green`, `blue` are read when typed `uchar`. Every other
//! property is skipped with a warning. Elements listed before `vertex` are
//! skipped; elements after it are never read.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use log::warn;

use crate::cloud::{Point3, PointCloud, Rgb};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

impl PlyFormat {
    fn tag(self) -> &'static str {
        match self {
            PlyFormat::Ascii => "ascii",
            PlyFormat::BinaryLittleEndian => "binary_little_endian",
        }
    }
}

impl std::str::FromStr for PlyFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii" => Ok(PlyFormat::Ascii),
            "binary" | "binary_little_endian" => Ok(PlyFormat::BinaryLittleEndian),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

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

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum PropKind {
    Scalar(Scalar),
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    X,
    Y,
    Z,
    Red,
    Green,
    Blue,
    Skip,
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    kind: PropKind,
    role: Role,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Parsed header: format, declared elements, and the line count it spanned.
#[derive(Debug, Clone)]
pub struct PlyHeader {
    pub format: PlyFormat,
    pub vertex_count: usize,
    pub has_colors: bool,
    elements: Vec<Element>,
    lines: usize,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn read_header<R: BufRead>(reader: &mut R) -> Result<PlyHeader> {
    let mut line_no = 0usize;
    let mut buf = Vec::new();
    let mut next_line = |reader: &mut R, line_no: &mut usize| -> Result<Option<String>> {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            return Ok(None);
        }
        *line_no += 1;
        let s = String::from_utf8_lossy(&buf);
        Ok(Some(s.trim_end_matches(['\n', '\r']).to_string()))
    };

    match next_line(reader, &mut line_no)? {
        Some(l) if l.trim() == "ply" => {}
        _ => return Err(parse_err(1, "file does not start with \"ply\"")),
    }

    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = next_line(reader, &mut line_no)?
            .ok_or_else(|| parse_err(line_no + 1, "unexpected end of header"))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first().copied() {
            None => continue,
            Some("comment") | Some("obj_info") => continue,
            Some("format") => {
                if tokens.len() != 3 {
                    return Err(parse_err(line_no, "malformed format line"));
                }
                if tokens[2] != "1.0" {
                    return Err(Error::UnsupportedFormat(format!("version {}", tokens[2])));
                }
                format = Some(match tokens[1] {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    other => return Err(Error::UnsupportedFormat(other.to_string())),
                });
            }
            Some("element") => {
                if tokens.len() != 3 {
                    return Err(parse_err(line_no, "malformed element line"));
                }
                let count = tokens[2].parse().map_err(|_| {
                    parse_err(line_no, format!("bad element count {:?}", tokens[2]))
                })?;
                elements.push(Element {
                    name: tokens[1].to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(line_no, "property before any element"))?;
                let (kind, name) = match tokens.get(1).copied() {
                    Some("list") if tokens.len() == 5 => {
                        let count = Scalar::parse(tokens[2]).ok_or_else(|| {
                            parse_err(line_no, format!("unknown type {}", tokens[2]))
                        })?;
                        let item = Scalar::parse(tokens[3]).ok_or_else(|| {
                            parse_err(line_no, format!("unknown type {}", tokens[3]))
                        })?;
                        (PropKind::List { count, item }, tokens[4])
                    }
                    Some(ty) if tokens.len() == 3 => {
                        let s = Scalar::parse(ty)
                            .ok_or_else(|| parse_err(line_no, format!("unknown type {ty}")))?;
                        (PropKind::Scalar(s), tokens[2])
                    }
                    _ => return Err(parse_err(line_no, "malformed property line")),
                };
                element.properties.push(Property {
                    name: name.to_string(),
                    kind,
                    role: Role::Skip,
                });
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(parse_err(line_no, format!("unexpected keyword {other:?}")));
            }
        }
    }

    let format = format.ok_or_else(|| parse_err(line_no, "missing format line"))?;
    let vertex = elements
        .iter_mut()
        .find(|e| e.name == "vertex")
        .ok_or_else(|| parse_err(line_no, "no vertex element"))?;
    for p in &mut vertex.properties {
        p.role = match (p.name.as_str(), &p.kind) {
            ("x", PropKind::Scalar(Scalar::F32 | Scalar::F64)) => Role::X,
            ("y", PropKind::Scalar(Scalar::F32 | Scalar::F64)) => Role::Y,
            ("z", PropKind::Scalar(Scalar::F32 | Scalar::F64)) => Role::Z,
            ("red", PropKind::Scalar(Scalar::U8)) => Role::Red,
            ("green", PropKind::Scalar(Scalar::U8)) => Role::Green,
            ("blue", PropKind::Scalar(Scalar::U8)) => Role::Blue,
            (name @ ("x" | "y" | "z"), kind) => {
                return Err(parse_err(
                    line_no,
                    format!("coordinate {name} has unsupported type {kind:?}"),
                ))
            }
            (name, kind) => {
                warn!("skipping unsupported vertex property {name} ({kind:?})");
                Role::Skip
            }
        };
    }
    for role in [Role::X, Role::Y, Role::Z] {
        if !vertex.properties.iter().any(|p| p.role == role) {
            return Err(parse_err(
                line_no,
                format!("vertex lacks {role:?} coordinate"),
            ));
        }
    }
    let colors: Vec<bool> = [Role::Red, Role::Green, Role::Blue]
        .iter()
        .map(|r| vertex.properties.iter().any(|p| p.role == *r))
        .collect();
    let has_colors = colors.iter().all(|&c| c);
    if !has_colors && colors.iter().any(|&c| c) {
        warn!("partial color channels ignored");
        for p in &mut vertex.properties {
            if matches!(p.role, Role::Red | Role::Green | Role::Blue) {
                p.role = Role::Skip;
            }
        }
    }
    let vertex_count = vertex.count;
    Ok(PlyHeader {
        format,
        vertex_count,
        has_colors,
        elements,
        lines: line_no,
    })
}

pub fn read_ply(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ply_from(BufReader::new(file))
}

pub fn read_ply_from<R: BufRead>(mut reader: R) -> Result<PointCloud> {
    let header = read_header(&mut reader)?;
    let mut positions = Vec::with_capacity(header.vertex_count);
    let mut colors = Vec::with_capacity(if header.has_colors {
        header.vertex_count
    } else {
        0
    });
    match header.format {
        PlyFormat::Ascii => read_ascii_body(&mut reader, &header, &mut positions, &mut colors)?,
        PlyFormat::BinaryLittleEndian => {
            read_binary_body(&mut reader, &header, &mut positions, &mut colors)?
        }
    }
    if header.has_colors {
        PointCloud::with_colors(positions, colors)
    } else {
        PointCloud::new(positions)
    }
}

fn assign(role: Role, v: f64, p: &mut Point3, c: &mut Rgb) {
    match role {
        Role::X => p[0] = v,
        Role::Y => p[1] = v,
        Role::Z => p[2] = v,
        Role::Red => c[0] = v as u8,
        Role::Green => c[1] = v as u8,
        Role::Blue => c[2] = v as u8,
        Role::Skip => {}
    }
}

fn read_ascii_body<R: BufRead>(
    reader: &mut R,
    header: &PlyHeader,
    positions: &mut Vec<Point3>,
    colors: &mut Vec<Rgb>,
) -> Result<()> {
    let mut line_no = header.lines;
    let mut lines = reader.lines();
    for element in &header.elements {
        let is_vertex = element.name == "vertex";
        for read in 0..element.count {
            let line = loop {
                match lines.next() {
                    None => {
                        return Err(if is_vertex {
                            Error::TruncatedBody {
                                expected: element.count,
                                read,
                            }
                        } else {
                            parse_err(line_no, format!("element {} truncated", element.name))
                        })
                    }
                    Some(l) => {
                        line_no += 1;
                        let l = l?;
                        if !l.trim().is_empty() {
                            break l;
                        }
                    }
                }
            };
            if !is_vertex {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let mut p = [0.0; 3];
            let mut c = [0u8; 3];
            for prop in &element.properties {
                let mut take = |what: &str| -> Result<f64> {
                    let t = tokens
                        .next()
                        .ok_or_else(|| parse_err(line_no, format!("missing value for {what}")))?;
                    t.parse::<f64>()
                        .map_err(|_| parse_err(line_no, format!("bad number {t:?} for {what}")))
                };
                match prop.kind {
                    PropKind::Scalar(Scalar::F32) => {
                        let t = take(&prop.name)?;
                        // re-parse as f32 so values round-trip bitwise
                        assign(prop.role, t as f32 as f64, &mut p, &mut c);
                    }
                    PropKind::Scalar(_) => {
                        let v = take(&prop.name)?;
                        assign(prop.role, v, &mut p, &mut c);
                    }
                    PropKind::List { .. } => {
                        let n = take(&prop.name)?;
                        for _ in 0..(n.max(0.0) as usize) {
                            take(&prop.name)?;
                        }
                    }
                }
            }
            if tokens.next().is_some() {
                return Err(parse_err(line_no, "extra values on vertex line"));
            }
            positions.push(p);
            if header.has_colors {
                colors.push(c);
            }
        }
        if is_vertex {
            break;
        }
    }
    Ok(())
}

fn read_binary_body<R: Read>(
    reader: &mut R,
    header: &PlyHeader,
    positions: &mut Vec<Point3>,
    colors: &mut Vec<Rgb>,
) -> Result<()> {
    let mut buf = [0u8; 8];
    for element in &header.elements {
        let is_vertex = element.name == "vertex";
        for read in 0..element.count {
            let truncated = || {
                if is_vertex {
                    Error::TruncatedBody {
                        expected: element.count,
                        read,
                    }
                } else {
                    Error::Decode(format!("element {} truncated", element.name))
                }
            };
            let mut scalar = |s: Scalar, reader: &mut R| -> Result<f64> {
                let b = &mut buf[..s.size()];
                reader.read_exact(b).map_err(|e| {
                    if e.kind() == std::io::ErrorKind::UnexpectedEof {
                        truncated()
                    } else {
                        e.into()
                    }
                })?;
                Ok(s.decode_le(b))
            };
            let mut p = [0.0; 3];
            let mut c = [0u8; 3];
            for prop in &element.properties {
                match prop.kind {
                    PropKind::Scalar(s) => {
                        let v = scalar(s, reader)?;
                        assign(prop.role, v, &mut p, &mut c);
                    }
                    PropKind::List { count, item } => {
                        let n = scalar(count, reader)?;
                        for _ in 0..(n.max(0.0) as usize) {
                            scalar(item, reader)?;
                        }
                    }
                }
            }
            if is_vertex {
                positions.push(p);
                if header.has_colors {
                    colors.push(c);
                }
            }
        }
        if is_vertex {
            break;
        }
    }
    Ok(())
}

pub fn write_ply(cloud: &PointCloud, path: impl AsRef<Path>, format: PlyFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_ply_to(cloud, &mut w, format).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes positions as 32-bit floats. ASCII output uses the shortest decimal
/// form that parses back to the same `f32`.
pub fn write_ply_to<W: Write>(cloud: &PointCloud, w: &mut W, format: PlyFormat) -> Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format {} 1.0", format.tag())?;
    writeln!(w, "element vertex {}", cloud.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property float {axis}")?;
    }
    let colors = cloud.colors();
    if colors.is_some() {
        for ch in ["red", "green", "blue"] {
            writeln!(w, "property uchar {ch}")?;
        }
    }
    writeln!(w, "end_header")?;
    for (i, p) in cloud.positions().iter().enumerate() {
        let f = [p[0] as f32, p[1] as f32, p[2] as f32];
        match format {
            PlyFormat::Ascii => {
                write!(w, "{} {} {}", f[0], f[1], f[2])?;
                if let Some(c) = colors {
                    write!(w, " {} {} {}", c[i][0], c[i][1], c[i][2])?;
                }
                writeln!(w)?;
            }
            PlyFormat::BinaryLittleEndian => {
                for v in f {
                    w.write_all(&v.to_le_bytes())?;
                }
                if let Some(c) = colors {
                    w.write_all(&c[i])?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(s: &[u8]) -> Result<PointCloud> {
        read_ply_from(Cursor::new(s))
    }

    #[test]
    fn single_ascii_vertex() {
        let c = parse(b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n").unwrap();
        assert_eq!(c.positions(), &[[0.0, 0.0, 0.0]]);
        assert!(c.colors().is_none());
    }

    #[test]
    fn truncated_ascii_body() {
        let mut s = String::from("ply\nformat ascii 1.0\nelement vertex 10\nproperty float x\nproperty float y\nproperty float z\nend_header\n");
        for i in 0..9 {
            s.push_str(&format!("{i} 0 0\n"));
        }
        assert!(matches!(
            parse(s.as_bytes()),
            Err(Error::TruncatedBody {
                expected: 10,
                read: 9
            })
        ));
    }

    #[test]
    fn truncated_binary_body() {
        let cloud = PointCloud::new(vec![[1.0, 2.0, 3.0]; 4]).unwrap();
        let mut buf = Vec::new();
        write_ply_to(&cloud, &mut buf, PlyFormat::BinaryLittleEndian).unwrap();
        buf.truncate(buf.len() - 5);
        assert!(matches!(
            parse(&buf),
            Err(Error::TruncatedBody {
                expected: 4,
                read: 3
            })
        ));
    }

    #[test]
    fn malformed_header_reports_line() {
        let err = parse(b"ply\nformat ascii 1.0\nelement vertex x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse(b"plyx\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn big_endian_is_unsupported() {
        let err = parse(b"ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n")
            .unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
    }

    #[test]
    fn skips_unknown_properties_and_elements() {
        let text = b"ply\nformat ascii 1.0\ncomment made by hand\nelement camera 1\nproperty float fov\nelement vertex 2\nproperty float x\nproperty float nx\nproperty float y\nproperty list uchar int idx\nproperty float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n1.5\n1 9 2 3 7 7 7 3 10 20 30\n4 9 5 0 6 1 2 3\n3 0 1 1\n";
        let c = parse(text).unwrap();
        assert_eq!(c.positions(), &[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        assert_eq!(c.colors().unwrap(), &[[10, 20, 30], [1, 2, 3]]);
    }

    #[test]
    fn binary_skips_list_property() {
        let mut buf = b"ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nproperty list uchar short n\nproperty float y\nproperty float z\nend_header\n".to_vec();
        buf.extend_from_slice(&1.0f32.to_le_bytes());
        buf.push(2);
        buf.extend_from_slice(&[0, 0, 0, 0]);
        buf.extend_from_slice(&2.0f32.to_le_bytes());
        buf.extend_from_slice(&3.0f32.to_le_bytes());
        assert_eq!(parse(&buf).unwrap().positions(), &[[1.0, 2.0, 3.0]]);
    }

    #[test]
    fn empty_cloud_writes_valid_file() {
        for format in [PlyFormat::Ascii, PlyFormat::BinaryLittleEndian] {
            let mut buf = Vec::new();
            write_ply_to(&PointCloud::empty(), &mut buf, format).unwrap();
            assert!(String::from_utf8_lossy(&buf).contains("element vertex 0"));
            assert_eq!(parse(&buf).unwrap().len(), 0);
        }
    }

    #[test]
    fn colors_are_emitted() {
        let c = PointCloud::with_colors(vec![[0.0; 3]], vec![[1, 2, 3]]).unwrap();
        let mut buf = Vec::new();
        write_ply_to(&c, &mut buf, PlyFormat::Ascii).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("property uchar red\nproperty uchar green\nproperty uchar blue\n"));
        assert!(s.ends_with("0 0 0 1 2 3\n"));
    }

    #[test]
    fn binary_body_size() {
        let c = PointCloud::new(vec![[0.25, 0.5, 1.0]; 1000]).unwrap();
        let mut buf = Vec::new();
        write_ply_to(&c, &mut buf, PlyFormat::BinaryLittleEndian).unwrap();
        let end = b"end_header\n";
        let pos = buf.windows(end.len()).position(|w| w == end).unwrap() + end.len();
        assert_eq!(buf.len() - pos, 3 * 4 * 1000);
    }
}
