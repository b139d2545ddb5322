use std::io::{self, BufRead, BufReader, Read, Write};

use nalgebra::{Point3, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Reads whitespace-delimited "x y z [nx ny nz]" text. `#` starts a
/// comment, blank lines are skipped, and every data line must carry the
/// same column count (3 or 6).
pub fn read_xyz<R: Read>(reader: R) -> Result<PointCloud> {
    let reader = BufReader::new(reader);
    let mut points: Vec<Point3<f64>> = Vec::new();
    let mut normals: Vec<Vector3<f64>> = Vec::new();
    let mut columns: Option<usize> = None;
    let mut offset: u64 = 0;

    for (line_idx, line) in reader.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = line.map_err(|e| Error::parse(line_no, offset, format!("read failed: {e}")))?;
        let line_len = line.len() as u64 + 1;
        let data = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let tokens: Vec<&str> = data.split_whitespace().collect();
        if tokens.is_empty() {
            offset += line_len;
            continue;
        }
        if tokens.len() != 3 && tokens.len() != 6 {
            return Err(Error::parse(
                line_no,
                offset,
                format!("expected 3 or 6 values per line, found {}", tokens.len()),
            ));
        }
        match columns {
            None => columns = Some(tokens.len()),
            Some(c) if c != tokens.len() => {
                return Err(Error::parse(
                    line_no,
                    offset,
                    format!("inconsistent column count: {} after {c}", tokens.len()),
                ));
            }
            Some(_) => {}
        }
        let mut values = [0.0f64; 6];
        for (k, token) in tokens.iter().enumerate() {
            let v: f64 = token
                .parse()
                .map_err(|_| Error::parse(line_no, offset, format!("invalid number {token:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(
                    line_no,
                    offset,
                    format!("non-finite value {token:?}"),
                ));
            }
            values[k] = v;
        }
        points.push(Point3::new(values[0], values[1], values[2]));
        if tokens.len() == 6 {
            let n = Vector3::new(values[3], values[4], values[5]);
            let norm = n.norm();
            if norm == 0.0 {
                return Err(Error::parse(line_no, offset, "zero-length normal"));
            }
            normals.push(n / norm);
        }
        offset += line_len;
    }

    if columns == Some(6) {
        PointCloud::with_normals(points, normals)
    } else {
        Ok(PointCloud::new(points))
    }
}

/// Writes "x y z [nx ny nz]" lines with shortest-roundtrip float
/// formatting; output is bit-stable for a fixed cloud.
pub fn write_xyz<W: Write>(cloud: &PointCloud, writer: &mut W) -> io::Result<()> {
    for (i, p) in cloud.points().iter().enumerate() {
        match cloud.normals() {
            Some(ns) => {
                let n = ns[i];
                writeln!(writer, "{} {} {} {} {} {}", p.x, p.y, p.z, n.x, n.y, n.z)?;
            }
            None => writeln!(writer, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    writer.flush()
}
