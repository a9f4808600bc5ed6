//! Binary matrix dumps, density coefficient files and point lists.
//!
//! A matrix dump is a 16-byte header (`N` and the method code, both `u64`
//! little-endian) followed by `A` row-major and then `f`, all `f64`
//! little-endian. Densities and points are small CSV files.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use layerpot_core::geometry::Vec3;
use layerpot_core::linalg::DenseMatrix;
use layerpot_core::{DenseSystem, Method};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FileError + '_ {
    move |source| FileError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_matrix_dump<W: Write>(system: &DenseSystem, mut out: W) -> std::io::Result<()> {
    let n = system.len();
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&system.method.code().to_le_bytes())?;
    for v in system.matrix.as_slice().iter().chain(&system.rhs) {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn save_matrix_dump(system: &DenseSystem, path: &Path) -> Result<(), FileError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    write_matrix_dump(system, std::io::BufWriter::new(file)).map_err(io_err(path))
}

/// A dump read back: method, matrix and right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDump {
    pub method: Method,
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
}

pub fn read_matrix_dump<R: Read>(mut input: R) -> Result<MatrixDump, String> {
    let mut word = [0u8; 8];
    let mut next = |input: &mut R| -> Result<[u8; 8], String> {
        input.read_exact(&mut word).map_err(|e| e.to_string())?;
        Ok(word)
    };
    let n = u64::from_le_bytes(next(&mut input)?) as usize;
    let code = u64::from_le_bytes(next(&mut input)?);
    let method = Method::from_code(code).ok_or_else(|| format!("unknown method code {code}"))?;
    let mut values = Vec::with_capacity(n * n + n);
    for _ in 0..n * n + n {
        values.push(f64::from_le_bytes(next(&mut input)?));
    }
    let mut extra = [0u8; 1];
    if input.read(&mut extra).map_err(|e| e.to_string())? != 0 {
        return Err("trailing bytes after the right-hand side".into());
    }
    let rhs = values.split_off(n * n);
    let matrix = DenseMatrix::from_row_major(n, n, values).map_err(|e| e.to_string())?;
    Ok(MatrixDump {
        method,
        matrix,
        rhs,
    })
}

pub fn load_matrix_dump(path: &Path) -> Result<MatrixDump, FileError> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    read_matrix_dump(std::io::BufReader::new(file)).map_err(|reason| FileError::Format {
        path: path.to_path_buf(),
        reason,
    })
}

/// Coefficients as `index,coefficient` rows; floats use the shortest
/// representation that round-trips exactly.
pub fn save_density(coeffs: &[f64], path: &Path) -> Result<(), FileError> {
    let csv_err = |source| FileError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["index", "coefficient"]).map_err(csv_err)?;
    for (i, c) in coeffs.iter().enumerate() {
        w.write_record([i.to_string(), c.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn load_density(path: &Path) -> Result<Vec<f64>, FileError> {
    let csv_err = |source| FileError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let format = |reason: String| FileError::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let index: usize = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| format(format!("row {row}: bad index")))?;
        if index != row {
            return Err(format(format!("row {row}: index {index} out of order")));
        }
        let c: f64 = rec
            .get(1)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| format(format!("row {row}: bad coefficient")))?;
        out.push(c);
    }
    Ok(out)
}

/// Points as `x,y,z` rows without a header; blank lines and `#` comments are skipped.
pub fn load_points(path: &Path) -> Result<Vec<Vec3>, FileError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| FileError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|source| FileError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let v: Option<Vec<f64>> = rec.iter().map(|s| s.parse().ok()).collect();
        match v {
            Some(v) if v.len() == 3 => out.push(Vec3([v[0], v[1], v[2]])),
            _ => {
                return Err(FileError::Format {
                    path: path.to_path_buf(),
                    reason: format!("row {row}: expected three numbers"),
                })
            }
        }
    }
    Ok(out)
}
