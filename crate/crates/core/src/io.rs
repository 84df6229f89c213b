//! Minimal PLY / OBJ / XYZ readers and writers.
//!
//! PLY supports `ascii` and `binary_little_endian` bodies with arbitrary
//! scalar vertex properties and list-valued face properties. Only the
//! properties the pipeline understands (`x y z`, `nx ny nz`,
//! `vertex_indices`/`vertex_index`) are kept.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::FormatError;
use crate::geom::{Point3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Ply,
    Obj,
    Xyz,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self, FormatError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .unwrap_or_default();
        Self::from_name(&ext)
    }

    pub fn from_name(name: &str) -> Result<Self, FormatError> {
        match name.to_ascii_lowercase().as_str() {
            "ply" => Ok(Format::Ply),
            "obj" => Ok(Format::Obj),
            "xyz" | "txt" | "pts" => Ok(Format::Xyz),
            other => Err(FormatError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Geometry read from a file: positions, optional per-vertex normals, faces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawGeometry {
    pub positions: Vec<Point3>,
    pub normals: Option<Vec<Vec3>>,
    pub faces: Vec<Vec<usize>>,
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn read(path: &Path, format: Format) -> Result<RawGeometry, FormatError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    match format {
        Format::Ply => read_ply(path, &mut reader),
        Format::Obj => read_obj(path, reader),
        Format::Xyz => read_xyz(path, reader),
    }
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64, FormatError> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("invalid number `{tok}`")))
}

fn read_xyz(path: &Path, reader: impl BufRead) -> Result<RawGeometry, FormatError> {
    let mut geo = RawGeometry::default();
    let mut normals = Vec::new();
    let mut width = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| parse_f64(path, lineno, t))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() != 3 && vals.len() != 6 {
            return Err(parse_err(path, lineno, format!("expected 3 or 6 values, found {}", vals.len())));
        }
        match width {
            None => width = Some(vals.len()),
            Some(w) if w != vals.len() => {
                return Err(parse_err(path, lineno, "inconsistent number of columns"));
            }
            _ => {}
        }
        geo.positions.push(Point3::new(vals[0], vals[1], vals[2]));
        if vals.len() == 6 {
            normals.push(Vec3::new(vals[3], vals[4], vals[5]));
        }
    }
    if width == Some(6) {
        geo.normals = Some(normals);
    }
    Ok(geo)
}

fn obj_index(path: &Path, line: usize, tok: &str, count: usize) -> Result<usize, FormatError> {
    let first = tok.split('/').next().unwrap_or("");
    let idx: i64 = first
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid face index `{tok}`")))?;
    let resolved = if idx > 0 { idx - 1 } else { count as i64 + idx };
    if idx == 0 || resolved < 0 {
        return Err(parse_err(path, line, format!("face index `{tok}` out of range")));
    }
    Ok(resolved as usize)
}

fn read_obj(path: &Path, reader: impl BufRead) -> Result<RawGeometry, FormatError> {
    let mut geo = RawGeometry::default();
    let mut normals = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        let mut toks = line.split_whitespace();
        let Some(tag) = toks.next() else { continue };
        match tag {
            "v" | "vn" => {
                let vals = toks
                    .take(3)
                    .map(|t| parse_f64(path, lineno, t))
                    .collect::<Result<Vec<_>, _>>()?;
                if vals.len() != 3 {
                    return Err(parse_err(path, lineno, format!("`{tag}` needs 3 coordinates")));
                }
                if tag == "v" {
                    geo.positions.push(Point3::new(vals[0], vals[1], vals[2]));
                } else {
                    normals.push(Vec3::new(vals[0], vals[1], vals[2]));
                }
            }
            "f" => {
                let face = toks
                    .map(|t| obj_index(path, lineno, t, geo.positions.len()))
                    .collect::<Result<Vec<_>, _>>()?;
                if face.len() < 3 {
                    return Err(parse_err(path, lineno, "face with fewer than 3 vertices"));
                }
                geo.faces.push(face);
            }
            _ => {}
        }
    }
    if let Some(bad) = geo.faces.iter().flatten().find(|&&i| i >= geo.positions.len()) {
        return Err(parse_err(path, 0, format!("face index {} out of range", bad + 1)));
    }
    if !normals.is_empty() && normals.len() == geo.positions.len() {
        geo.normals = Some(normals);
    }
    Ok(geo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
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
    fn parse(name: &str) -> Option<Self> {
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
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Body {
    Ascii,
    BinaryLe,
}

/// Per-element sink deciding which decoded values to keep.
struct PlySink {
    positions: Vec<Point3>,
    normals: Vec<Vec3>,
    faces: Vec<Vec<usize>>,
    has_normals: bool,
}

impl PlySink {
    fn vertex_slots(props: &[Property]) -> [Option<usize>; 6] {
        let mut slots = [None; 6];
        for (i, p) in props.iter().enumerate() {
            if let Property::Scalar(name, _) = p {
                let k = match name.as_str() {
                    "x" => 0,
                    "y" => 1,
                    "z" => 2,
                    "nx" => 3,
                    "ny" => 4,
                    "nz" => 5,
                    _ => continue,
                };
                slots[k] = Some(i);
            }
        }
        slots
    }
}

fn read_ply(path: &Path, reader: &mut impl BufRead) -> Result<RawGeometry, FormatError> {
    let mut line = String::new();
    let mut lineno = 0usize;
    let mut next_line = |reader: &mut dyn BufRead, line: &mut String| -> Result<usize, FormatError> {
        line.clear();
        let n = reader.read_line(line).map_err(|e| io_err(path, e))?;
        lineno += 1;
        if n == 0 {
            return Err(parse_err(path, lineno, "unexpected end of header"));
        }
        Ok(lineno)
    };
    let ln = next_line(reader, &mut line)?;
    if line.trim() != "ply" {
        return Err(parse_err(path, ln, "missing `ply` magic"));
    }
    let mut body = None;
    let mut elements: Vec<Element> = Vec::new();
    let header_end;
    loop {
        let ln = next_line(reader, &mut line)?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] => continue,
            ["comment", ..] | ["obj_info", ..] => continue,
            ["format", fmt, _version] => {
                body = Some(match *fmt {
                    "ascii" => Body::Ascii,
                    "binary_little_endian" => Body::BinaryLe,
                    other => return Err(FormatError::UnsupportedFormat(format!("ply {other}"))),
                });
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| parse_err(path, ln, format!("invalid element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            ["property", "list", cnt, item, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, ln, "property before element"))?;
                let cnt = Scalar::parse(cnt).ok_or_else(|| parse_err(path, ln, format!("unknown type `{cnt}`")))?;
                let item = Scalar::parse(item).ok_or_else(|| parse_err(path, ln, format!("unknown type `{item}`")))?;
                el.props.push(Property::List(name.to_string(), cnt, item));
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, ln, "property before element"))?;
                let ty = Scalar::parse(ty).ok_or_else(|| parse_err(path, ln, format!("unknown type `{ty}`")))?;
                el.props.push(Property::Scalar(name.to_string(), ty));
            }
            ["end_header"] => {
                header_end = ln;
                break;
            }
            _ => return Err(parse_err(path, ln, format!("unrecognized header line `{}`", line.trim()))),
        }
    }
    let body = body.ok_or_else(|| parse_err(path, header_end, "missing format line"))?;
    let mut sink = PlySink {
        positions: Vec::new(),
        normals: Vec::new(),
        faces: Vec::new(),
        has_normals: false,
    };
    match body {
        Body::Ascii => read_ply_ascii(path, reader, header_end, &elements, &mut sink)?,
        Body::BinaryLe => read_ply_binary(path, reader, &elements, &mut sink)?,
    }
    if let Some(bad) = sink.faces.iter().flatten().find(|&&i| i >= sink.positions.len()) {
        return Err(parse_err(path, header_end, format!("face index {bad} out of range")));
    }
    Ok(RawGeometry {
        normals: sink.has_normals.then_some(sink.normals),
        positions: sink.positions,
        faces: sink.faces,
    })
}

fn is_face_list(name: &str) -> bool {
    name == "vertex_indices" || name == "vertex_index"
}

fn read_ply_ascii(
    path: &Path,
    reader: &mut impl BufRead,
    header_end: usize,
    elements: &[Element],
    sink: &mut PlySink,
) -> Result<(), FormatError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (header_end + i + 1, l));
    for el in elements {
        let slots = PlySink::vertex_slots(&el.props);
        if el.name == "vertex" {
            sink.has_normals = slots[3..].iter().all(Option::is_some);
        }
        for _ in 0..el.count {
            let (ln, line) = loop {
                let (ln, line) = lines
                    .next()
                    .ok_or_else(|| parse_err(path, header_end, format!("truncated `{}` element", el.name)))?;
                let line = line.map_err(|e| io_err(path, e))?;
                if !line.trim().is_empty() {
                    break (ln, line);
                }
            };
            let mut toks = line.split_whitespace();
            let mut scalars = Vec::with_capacity(el.props.len());
            let mut face = None;
            for prop in &el.props {
                match prop {
                    Property::Scalar(..) => {
                        let t = toks.next().ok_or_else(|| parse_err(path, ln, "missing value"))?;
                        scalars.push(parse_f64(path, ln, t)?);
                    }
                    Property::List(name, ..) => {
                        let t = toks.next().ok_or_else(|| parse_err(path, ln, "missing list count"))?;
                        let n = parse_f64(path, ln, t)? as usize;
                        let mut items = Vec::with_capacity(n);
                        for _ in 0..n {
                            let t = toks.next().ok_or_else(|| parse_err(path, ln, "missing list item"))?;
                            items.push(parse_f64(path, ln, t)?);
                        }
                        scalars.push(f64::NAN);
                        if el.name == "face" && is_face_list(name) {
                            face = Some(items.into_iter().map(|v| v as usize).collect());
                        }
                    }
                }
            }
            store_record(el, &slots, &scalars, face, sink);
        }
    }
    Ok(())
}

fn store_record(el: &Element, slots: &[Option<usize>; 6], scalars: &[f64], face: Option<Vec<usize>>, sink: &mut PlySink) {
    if el.name == "vertex" {
        let get = |k: usize| slots[k].map(|i| scalars[i]).unwrap_or(0.0);
        sink.positions.push(Point3::new(get(0), get(1), get(2)));
        if sink.has_normals {
            sink.normals.push(Vec3::new(get(3), get(4), get(5)));
        }
    } else if let Some(f) = face {
        sink.faces.push(f);
    }
}

fn read_ply_binary(path: &Path, reader: &mut impl Read, elements: &[Element], sink: &mut PlySink) -> Result<(), FormatError> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf).map_err(|e| io_err(path, e))?;
    let mut off = 0usize;
    let take = |n: usize, off: &mut usize| -> Result<std::ops::Range<usize>, FormatError> {
        if *off + n > buf.len() {
            return Err(parse_err(path, 0, format!("binary body truncated at byte offset {}", *off)));
        }
        let r = *off..*off + n;
        *off += n;
        Ok(r)
    };
    let mut records: Vec<(usize, Vec<f64>, Option<Vec<usize>>)> = Vec::new();
    for (ei, el) in elements.iter().enumerate() {
        for _ in 0..el.count {
            let mut scalars = Vec::with_capacity(el.props.len());
            let mut face = None;
            for prop in &el.props {
                match prop {
                    Property::Scalar(_, ty) => {
                        let r = take(ty.size(), &mut off)?;
                        scalars.push(ty.decode_le(&buf[r]));
                    }
                    Property::List(name, cnt, item) => {
                        let r = take(cnt.size(), &mut off)?;
                        let n = cnt.decode_le(&buf[r]) as usize;
                        let mut items = Vec::with_capacity(n);
                        for _ in 0..n {
                            let r = take(item.size(), &mut off)?;
                            items.push(item.decode_le(&buf[r]) as usize);
                        }
                        scalars.push(f64::NAN);
                        if el.name == "face" && is_face_list(name) {
                            face = Some(items);
                        }
                    }
                }
            }
            records.push((ei, scalars, face));
        }
    }
    for el in elements.iter().filter(|e| e.name == "vertex") {
        sink.has_normals = PlySink::vertex_slots(&el.props)[3..].iter().all(Option::is_some);
    }
    for (ei, scalars, face) in records {
        let el = &elements[ei];
        let slots = PlySink::vertex_slots(&el.props);
        store_record(el, &slots, &scalars, face, sink);
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, FormatError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

/// Writes `geo` in `format`. PLY output is ASCII unless `binary` is set.
pub fn write(path: &Path, format: Format, geo: &RawGeometry, binary: bool) -> Result<(), FormatError> {
    let mut w = create(path)?;
    let res = match format {
        Format::Ply if binary => write_ply_binary(&mut w, geo),
        Format::Ply => write_ply_ascii(&mut w, geo),
        Format::Obj => write_obj(&mut w, geo),
        Format::Xyz => write_xyz(&mut w, geo),
    };
    res.and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

fn write_xyz(w: &mut impl Write, geo: &RawGeometry) -> std::io::Result<()> {
    for (i, p) in geo.positions.iter().enumerate() {
        match &geo.normals {
            Some(n) => writeln!(w, "{} {} {} {} {} {}", p.x, p.y, p.z, n[i].x, n[i].y, n[i].z)?,
            None => writeln!(w, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    Ok(())
}

fn write_obj(w: &mut impl Write, geo: &RawGeometry) -> std::io::Result<()> {
    for p in &geo.positions {
        writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
    }
    if let Some(normals) = &geo.normals {
        for n in normals {
            writeln!(w, "vn {} {} {}", n.x, n.y, n.z)?;
        }
    }
    for f in &geo.faces {
        write!(w, "f")?;
        for &i in f {
            if geo.normals.is_some() {
                write!(w, " {}//{}", i + 1, i + 1)?;
            } else {
                write!(w, " {}", i + 1)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

fn ply_header(w: &mut impl Write, geo: &RawGeometry, format: &str, real: &str) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format {format} 1.0")?;
    writeln!(w, "element vertex {}", geo.positions.len())?;
    for c in ["x", "y", "z"] {
        writeln!(w, "property {real} {c}")?;
    }
    if geo.normals.is_some() {
        for c in ["nx", "ny", "nz"] {
            writeln!(w, "property {real} {c}")?;
        }
    }
    writeln!(w, "element face {}", geo.faces.len())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")
}

fn write_ply_ascii(w: &mut impl Write, geo: &RawGeometry) -> std::io::Result<()> {
    ply_header(w, geo, "ascii", "double")?;
    for (i, p) in geo.positions.iter().enumerate() {
        match &geo.normals {
            Some(n) => writeln!(w, "{} {} {} {} {} {}", p.x, p.y, p.z, n[i].x, n[i].y, n[i].z)?,
            None => writeln!(w, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    for f in &geo.faces {
        write!(w, "{}", f.len())?;
        for i in f {
            write!(w, " {i}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn write_ply_binary(w: &mut impl Write, geo: &RawGeometry) -> std::io::Result<()> {
    ply_header(w, geo, "binary_little_endian", "double")?;
    for (i, p) in geo.positions.iter().enumerate() {
        for c in [p.x, p.y, p.z] {
            w.write_all(&c.to_le_bytes())?;
        }
        if let Some(n) = &geo.normals {
            for c in [n[i].x, n[i].y, n[i].z] {
                w.write_all(&c.to_le_bytes())?;
            }
        }
    }
    for f in &geo.faces {
        w.write_all(&[f.len() as u8])?;
        for &i in f {
            w.write_all(&(i as i32).to_le_bytes())?;
        }
    }
    Ok(())
}
