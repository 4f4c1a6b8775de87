//! JSON matrices, sample CSVs and Re/Im tables.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! crashed run never leaves half-written artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kerrsim_core::fock::DensityMatrix;
use kerrsim_core::homodyne::QuadratureSample;
use kerrsim_core::linalg::CMatrix;
use kerrsim_core::C64;
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::error::{Error, Result};

/// `{"schema_version", "dim", "re", "im"}` with row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub schema_version: u32,
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let d = m.dim();
        MatrixRecord {
            schema_version: SCHEMA_VERSION,
            dim: d,
            re: (0..d).map(|r| (0..d).map(|c| m[(r, c)].re).collect()).collect(),
            im: (0..d).map(|r| (0..d).map(|c| m[(r, c)].im).collect()).collect(),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self::from_matrix(rho.matrix())
    }

    pub fn to_matrix(&self) -> std::result::Result<CMatrix, String> {
        let d = self.dim;
        let square = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !square(&self.re) || !square(&self.im) {
            return Err(format!("expected {d}x{d} re/im arrays"));
        }
        Ok(CMatrix::from_fn(d, |r, c| C64::new(self.re[r][c], self.im[r][c])))
    }

    pub fn to_density(&self) -> std::result::Result<DensityMatrix, String> {
        self.to_matrix().map(DensityMatrix::from_matrix_unchecked)
    }
}

/// Provenance stored next to a sample CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub schema_version: u32,
    pub seed: u64,
    pub eta: f64,
    pub alpha: Option<f64>,
    /// `(theta, count)` per phase block, in file order.
    pub schedule: Vec<(f64, usize)>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    write_json(path, &MatrixRecord::from_matrix(m))
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    let record: MatrixRecord = read_json(path)?;
    record.to_matrix().map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Samples as CSV with header `theta,x`.
pub fn write_samples(path: &Path, samples: &[QuadratureSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "x"]).map_err(csv_err(path))?;
    for s in samples {
        w.serialize((s.theta, s.x)).map_err(csv_err(path))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    write_atomic(path, &bytes)
}

pub fn read_samples(path: &Path) -> Result<Vec<QuadratureSample>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = r.headers().map_err(csv_err(path))?;
    if headers.iter().collect::<Vec<_>>() != ["theta", "x"] {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "expected header `theta,x`".into(),
        });
    }
    r.deserialize::<(f64, f64)>()
        .map(|row| {
            row.map(|(theta, x)| QuadratureSample { theta, x })
                .map_err(csv_err(path))
        })
        .collect()
}

/// Sidecar path `samples.csv` → `samples.meta.json`.
pub fn metadata_path(samples: &Path) -> PathBuf {
    samples.with_extension("meta.json")
}

/// One table: header `m,0,1,...`, then one row per `m`.
fn table_bytes(values: &[Vec<f64>], path: &Path) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["m".to_string()];
    header.extend((0..values.len()).map(|n| n.to_string()));
    w.write_record(&header).map_err(csv_err(path))?;
    for (m, row) in values.iter().enumerate() {
        let mut rec = vec![m.to_string()];
        rec.extend(row.iter().map(|v| serde_json::to_string(v).expect("finite")));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.into_inner().map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes `<stem>_re.csv` and `<stem>_im.csv` in `dir`.
pub fn write_tables(dir: &Path, stem: &str, m: &CMatrix) -> Result<[PathBuf; 2]> {
    let record = MatrixRecord::from_matrix(m);
    let re = dir.join(format!("{stem}_re.csv"));
    let im = dir.join(format!("{stem}_im.csv"));
    write_atomic(&re, &table_bytes(&record.re, &re)?)?;
    write_atomic(&im, &table_bytes(&record.im, &im)?)?;
    Ok([re, im])
}

pub fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().skip(1).map(str::parse).collect();
        rows.push(row.map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: format!("{e}"),
        })?);
    }
    Ok(rows)
}
