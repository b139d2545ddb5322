use std::io::{self, Read, Write};

use nalgebra::{Point3, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "char" | "int8" => Some(Self::I8),
            "uchar" | "uint8" => Some(Self::U8),
            "short" | "int16" => Some(Self::I16),
            "ushort" | "uint16" => Some(Self::U16),
            "int" | "int32" => Some(Self::I32),
            "uint" | "uint32" => Some(Self::U32),
            "float" | "float32" => Some(Self::F32),
            "double" | "float64" => Some(Self::F64),
            _ => None,
        }
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum PropertyKind {
    Scalar(ScalarType),
    List { count: ScalarType, item: ScalarType },
}

#[derive(Debug, Clone)]
struct Property {
    kind: PropertyKind,
    name: String,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Byte- and line-counting reader so every error can be positioned.
struct Input<R> {
    reader: R,
    offset: u64,
    line: usize,
}

impl<R: Read> Input<R> {
    fn new(reader: R) -> Self {
        Self {
            reader,
            offset: 0,
            line: 1,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line, self.offset, message)
    }

    fn read_byte(&mut self) -> Result<Option<u8>> {
        let mut b = [0u8; 1];
        loop {
            match self.reader.read(&mut b) {
                Ok(0) => return Ok(None),
                Ok(_) => {
                    self.offset += 1;
                    return Ok(Some(b[0]));
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(self.err(format!("read failed: {e}"))),
            }
        }
    }

    /// One '\n'-terminated line with the terminator and any '\r' stripped.
    /// `None` at clean EOF.
    fn read_line(&mut self) -> Result<Option<String>> {
        const MAX_LINE: usize = 1 << 16;
        let mut buf = Vec::new();
        loop {
            match self.read_byte()? {
                None => {
                    if buf.is_empty() {
                        return Ok(None);
                    }
                    break;
                }
                Some(b'\n') => break,
                Some(b) => {
                    if buf.len() >= MAX_LINE {
                        return Err(self.err("line exceeds 64 KiB"));
                    }
                    buf.push(b);
                }
            }
        }
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
        let line = String::from_utf8_lossy(&buf).into_owned();
        self.line += 1;
        Ok(Some(line))
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> Result<()> {
        let mut filled = 0;
        while filled < buf.len() {
            match self.reader.read(&mut buf[filled..]) {
                Ok(0) => {
                    self.offset += filled as u64;
                    return Err(self.err("unexpected end of file in binary payload"));
                }
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(self.err(format!("read failed: {e}"))),
            }
        }
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn skip(&mut self, mut n: u64) -> Result<()> {
        let mut chunk = [0u8; 4096];
        while n > 0 {
            let take = n.min(chunk.len() as u64) as usize;
            self.read_exact(&mut chunk[..take])?;
            n -= take as u64;
        }
        Ok(())
    }
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
}

fn parse_header<R: Read>(input: &mut Input<R>) -> Result<Header> {
    match input.read_line()? {
        Some(magic) if magic.trim() == "ply" => {}
        Some(other) => {
            return Err(input.err(format!("expected 'ply' magic, found {other:?}")));
        }
        None => return Err(input.err("empty file")),
    }

    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = input
            .read_line()?
            .ok_or_else(|| input.err("header not terminated by end_header"))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first().copied() {
            None => continue,
            Some("comment") | Some("obj_info") => continue,
            Some("end_header") => break,
            Some("format") => {
                if tokens.len() != 3 || tokens[2] != "1.0" {
                    return Err(input.err(format!("malformed format line {line:?}")));
                }
                encoding = Some(match tokens[1] {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLittleEndian,
                    other => {
                        return Err(input.err(format!("unsupported PLY format {other:?}")));
                    }
                });
            }
            Some("element") => {
                if tokens.len() != 3 {
                    return Err(input.err(format!("malformed element line {line:?}")));
                }
                let count: usize = tokens[2]
                    .parse()
                    .map_err(|_| input.err(format!("invalid element count {:?}", tokens[2])))?;
                elements.push(Element {
                    name: tokens[1].to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| input.err("property before any element"))?;
                let property = if tokens.get(1) == Some(&"list") {
                    if tokens.len() != 5 {
                        return Err(input.err(format!("malformed list property {line:?}")));
                    }
                    let count = ScalarType::from_name(tokens[2])
                        .ok_or_else(|| input.err(format!("unknown type {:?}", tokens[2])))?;
                    let item = ScalarType::from_name(tokens[3])
                        .ok_or_else(|| input.err(format!("unknown type {:?}", tokens[3])))?;
                    Property {
                        kind: PropertyKind::List { count, item },
                        name: tokens[4].to_string(),
                    }
                } else {
                    if tokens.len() != 3 {
                        return Err(input.err(format!("malformed property line {line:?}")));
                    }
                    let ty = ScalarType::from_name(tokens[1])
                        .ok_or_else(|| input.err(format!("unknown type {:?}", tokens[1])))?;
                    Property {
                        kind: PropertyKind::Scalar(ty),
                        name: tokens[2].to_string(),
                    }
                };
                if element.properties.iter().any(|p| p.name == property.name) {
                    return Err(input.err(format!("duplicate property {:?}", property.name)));
                }
                element.properties.push(property);
            }
            Some(other) => {
                return Err(input.err(format!("unknown header keyword {other:?}")));
            }
        }
    }

    let encoding = encoding.ok_or_else(|| input.err("header has no format line"))?;
    Ok(Header { encoding, elements })
}

/// Column layout of the vertex element: where x,y,z and optional normals
/// live among the declared properties.
struct VertexLayout {
    xyz: [usize; 3],
    normals: Option<[usize; 3]>,
}

fn vertex_layout<R: Read>(input: &Input<R>, element: &Element) -> Result<VertexLayout> {
    let find =
        |name: &str| -> Option<usize> { element.properties.iter().position(|p| p.name == name) };
    let coord = |name: &str| -> Result<usize> {
        let idx = find(name)
            .ok_or_else(|| input.err(format!("vertex element lacks property {name:?}")))?;
        match element.properties[idx].kind {
            PropertyKind::Scalar(ScalarType::F32) | PropertyKind::Scalar(ScalarType::F64) => {
                Ok(idx)
            }
            _ => Err(input.err(format!("property {name:?} must be float or double"))),
        }
    };
    let xyz = [coord("x")?, coord("y")?, coord("z")?];
    let normals = match (find("nx"), find("ny"), find("nz")) {
        (Some(_), Some(_), Some(_)) => Some([coord("nx")?, coord("ny")?, coord("nz")?]),
        _ => None,
    };
    Ok(VertexLayout { xyz, normals })
}

const CAP_LIMIT: usize = 1 << 20;

/// Reads a PLY point cloud from any reader. Unknown elements and
/// properties are skipped; vertex positions (and normals when all of
/// nx/ny/nz are declared) are extracted.
pub fn read_ply<R: Read>(reader: R) -> Result<PointCloud> {
    let mut input = Input::new(reader);
    let header = parse_header(&mut input)?;

    let mut points: Vec<Point3<f64>> = Vec::new();
    let mut normals: Vec<Vector3<f64>> = Vec::new();
    let mut saw_vertex = false;
    let mut want_normals = false;

    for element in &header.elements {
        let layout = if element.name == "vertex" && !saw_vertex {
            saw_vertex = true;
            let layout = vertex_layout(&input, element)?;
            want_normals = layout.normals.is_some();
            points.reserve(element.count.min(CAP_LIMIT));
            Some(layout)
        } else {
            None
        };

        match header.encoding {
            PlyEncoding::Ascii => read_ascii_element(
                &mut input,
                element,
                layout.as_ref(),
                &mut points,
                &mut normals,
            )?,
            PlyEncoding::BinaryLittleEndian => read_binary_element(
                &mut input,
                element,
                layout.as_ref(),
                &mut points,
                &mut normals,
            )?,
        }
    }

    if !saw_vertex {
        return Err(input.err("no vertex element in header"));
    }
    if want_normals {
        // Stored normals may be unnormalized; renormalize, rejecting zeros.
        let mut unit = Vec::with_capacity(normals.len());
        for (i, n) in normals.iter().enumerate() {
            let norm = n.norm();
            if !norm.is_finite() || norm == 0.0 {
                return Err(input.err(format!("vertex {i} has unusable normal {n:?}")));
            }
            unit.push(n / norm);
        }
        PointCloud::with_normals(points, unit)
    } else {
        Ok(PointCloud::new(points))
    }
}

fn check_finite<R: Read>(input: &Input<R>, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(input.err(format!("non-finite coordinate {v}")))
    }
}

fn read_ascii_element<R: Read>(
    input: &mut Input<R>,
    element: &Element,
    layout: Option<&VertexLayout>,
    points: &mut Vec<Point3<f64>>,
    normals: &mut Vec<Vector3<f64>>,
) -> Result<()> {
    for _ in 0..element.count {
        let line = input
            .read_line()?
            .ok_or_else(|| input.err(format!("truncated element {:?}", element.name)))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let mut cursor = 0usize;
        let mut values: Vec<Option<f64>> = vec![None; element.properties.len()];
        let needed: Vec<bool> = element
            .properties
            .iter()
            .enumerate()
            .map(|(i, _)| {
                layout.is_some_and(|l| {
                    l.xyz.contains(&i) || l.normals.is_some_and(|n| n.contains(&i))
                })
            })
            .collect();

        for (pi, property) in element.properties.iter().enumerate() {
            match &property.kind {
                PropertyKind::Scalar(_) => {
                    let token = tokens.get(cursor).ok_or_else(|| {
                        input.err(format!("record has too few values for {:?}", property.name))
                    })?;
                    cursor += 1;
                    if needed[pi] {
                        let v: f64 = token.parse().map_err(|_| {
                            input.err(format!("invalid number {token:?} for {:?}", property.name))
                        })?;
                        values[pi] = Some(check_finite(input, v)?);
                    }
                }
                PropertyKind::List { .. } => {
                    let token = tokens.get(cursor).ok_or_else(|| {
                        input.err(format!("record missing list count for {:?}", property.name))
                    })?;
                    cursor += 1;
                    let n: usize = token
                        .parse()
                        .map_err(|_| input.err(format!("invalid list count {token:?}")))?;
                    if tokens.len() < cursor + n {
                        return Err(input.err(format!(
                            "record has {} values, list {:?} wants {n} more",
                            tokens.len(),
                            property.name
                        )));
                    }
                    cursor += n;
                }
            }
        }
        if cursor != tokens.len() {
            return Err(input.err(format!(
                "record has {} trailing value(s)",
                tokens.len() - cursor
            )));
        }

        if let Some(layout) = layout {
            push_vertex(input, layout, &values, points, normals)?;
        }
    }
    Ok(())
}

fn read_binary_element<R: Read>(
    input: &mut Input<R>,
    element: &Element,
    layout: Option<&VertexLayout>,
    points: &mut Vec<Point3<f64>>,
    normals: &mut Vec<Vector3<f64>>,
) -> Result<()> {
    let mut buf = [0u8; 8];
    for _ in 0..element.count {
        let mut values: Vec<Option<f64>> = vec![None; element.properties.len()];
        for (pi, property) in element.properties.iter().enumerate() {
            let needed = layout
                .is_some_and(|l| l.xyz.contains(&pi) || l.normals.is_some_and(|n| n.contains(&pi)));
            match &property.kind {
                PropertyKind::Scalar(ty) => {
                    if needed {
                        input.read_exact(&mut buf[..ty.size()])?;
                        let v = match ty {
                            ScalarType::F32 => {
                                f32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64
                            }
                            ScalarType::F64 => f64::from_le_bytes(buf),
                            _ => unreachable!("layout only tracks float properties"),
                        };
                        values[pi] = Some(check_finite(input, v)?);
                    } else {
                        input.skip(ty.size() as u64)?;
                    }
                }
                PropertyKind::List { count, item } => {
                    input.read_exact(&mut buf[..count.size()])?;
                    let n = decode_unsigned(*count, &buf).ok_or_else(|| {
                        input.err(format!("negative list count for {:?}", property.name))
                    })?;
                    input.skip(n.saturating_mul(item.size() as u64))?;
                }
            }
        }
        if let Some(layout) = layout {
            push_vertex(input, layout, &values, points, normals)?;
        }
    }
    Ok(())
}

fn decode_unsigned(ty: ScalarType, buf: &[u8]) -> Option<u64> {
    let signed: i64 = match ty {
        ScalarType::I8 => buf[0] as i8 as i64,
        ScalarType::U8 => buf[0] as i64,
        ScalarType::I16 => i16::from_le_bytes([buf[0], buf[1]]) as i64,
        ScalarType::U16 => u16::from_le_bytes([buf[0], buf[1]]) as i64,
        ScalarType::I32 => i32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as i64,
        ScalarType::U32 => u32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as i64,
        ScalarType::F32 => f32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as i64,
        ScalarType::F64 => return None,
    };
    u64::try_from(signed).ok()
}

fn push_vertex<R: Read>(
    input: &Input<R>,
    layout: &VertexLayout,
    values: &[Option<f64>],
    points: &mut Vec<Point3<f64>>,
    normals: &mut Vec<Vector3<f64>>,
) -> Result<()> {
    let get = |i: usize| -> Result<f64> {
        values[i].ok_or_else(|| input.err("internal: tracked property not parsed"))
    };
    points.push(Point3::new(
        get(layout.xyz[0])?,
        get(layout.xyz[1])?,
        get(layout.xyz[2])?,
    ));
    if let Some(n) = layout.normals {
        normals.push(Vector3::new(get(n[0])?, get(n[1])?, get(n[2])?));
    }
    Ok(())
}

/// Writes the cloud as PLY with double-precision properties. Output is
/// bit-stable: the same cloud always produces identical bytes.
pub fn write_ply<W: Write>(
    cloud: &PointCloud,
    writer: &mut W,
    encoding: PlyEncoding,
) -> io::Result<()> {
    let format = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    writeln!(writer, "ply")?;
    writeln!(writer, "format {format} 1.0")?;
    writeln!(writer, "element vertex {}", cloud.len())?;
    writeln!(writer, "property double x")?;
    writeln!(writer, "property double y")?;
    writeln!(writer, "property double z")?;
    if cloud.has_normals() {
        writeln!(writer, "property double nx")?;
        writeln!(writer, "property double ny")?;
        writeln!(writer, "property double nz")?;
    }
    writeln!(writer, "end_header")?;

    match encoding {
        PlyEncoding::Ascii => {
            for (i, p) in cloud.points().iter().enumerate() {
                match cloud.normals() {
                    Some(ns) => {
                        let n = ns[i];
                        writeln!(writer, "{} {} {} {} {} {}", p.x, p.y, p.z, n.x, n.y, n.z)?;
                    }
                    None => writeln!(writer, "{} {} {}", p.x, p.y, p.z)?,
                }
            }
        }
        PlyEncoding::BinaryLittleEndian => {
            for (i, p) in cloud.points().iter().enumerate() {
                for v in [p.x, p.y, p.z] {
                    writer.write_all(&v.to_le_bytes())?;
                }
                if let Some(ns) = cloud.normals() {
                    let n = ns[i];
                    for v in [n.x, n.y, n.z] {
                        writer.write_all(&v.to_le_bytes())?;
                    }
                }
            }
        }
    }
    writer.flush()
}
