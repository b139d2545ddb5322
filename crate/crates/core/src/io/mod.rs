//! Point cloud file I/O: PLY (ASCII and binary little-endian) and
//! whitespace-delimited XYZ text.
//!
//! Parsers are total: malformed input of any kind yields a positioned
//! [`Error::Parse`](crate::Error::Parse), never a panic.

mod ply;
mod xyz;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

pub use ply::{read_ply, write_ply, PlyEncoding};
pub use xyz::{read_xyz, write_xyz};

/// On-disk format selector. `Auto` resolves by file extension (and for
/// reads falls back to content sniffing: PLY files start with "ply").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudFormat {
    Auto,
    Ply,
    PlyAscii,
    Xyz,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn looks_like_ply(path: &Path) -> Result<bool> {
    use std::io::Read;
    let mut file = open(path)?;
    let mut magic = [0u8; 3];
    let n = file.read(&mut magic).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(n == 3 && &magic == b"ply")
}

/// Reads a point cloud, dispatching on `format`.
pub fn read_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let resolved = match format {
        CloudFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("ply") => CloudFormat::Ply,
            Some("xyz") | Some("txt") => CloudFormat::Xyz,
            _ => {
                if looks_like_ply(path)? {
                    CloudFormat::Ply
                } else {
                    CloudFormat::Xyz
                }
            }
        },
        other => other,
    };
    let name = path.display().to_string();
    let reader = BufReader::new(open(path)?);
    let result = match resolved {
        CloudFormat::Ply | CloudFormat::PlyAscii => read_ply(reader),
        CloudFormat::Xyz => read_xyz(reader),
        CloudFormat::Auto => unreachable!("resolved above"),
    };
    result.map_err(|e| e.with_source_name(&name))
}

/// Writes a point cloud with deterministic, bit-stable formatting.
/// `Auto` writes binary PLY for `.ply` paths and XYZ otherwise; `Ply`
/// means binary little-endian.
pub fn write_cloud(cloud: &PointCloud, path: impl AsRef<Path>, format: CloudFormat) -> Result<()> {
    let path = path.as_ref();
    let resolved = match format {
        CloudFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("ply") => CloudFormat::Ply,
            _ => CloudFormat::Xyz,
        },
        other => other,
    };
    let mut writer = BufWriter::new(create(path)?);
    let result = match resolved {
        CloudFormat::Ply => write_ply(cloud, &mut writer, PlyEncoding::BinaryLittleEndian),
        CloudFormat::PlyAscii => write_ply(cloud, &mut writer, PlyEncoding::Ascii),
        CloudFormat::Xyz => write_xyz(cloud, &mut writer),
        CloudFormat::Auto => unreachable!("resolved above"),
    };
    result.map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
