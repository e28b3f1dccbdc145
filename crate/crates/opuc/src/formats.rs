//! On-disk formats: per-suite CSV tables, the run manifest and the binary
//! coefficient record.
//!
//! The binary record is `degree` as a little-endian `u64` followed by the
//! `degree + 1` coefficients of `Φ_n` and then those of `Φ*_n`, each stored
//! as little-endian `f64` real part then imaginary part.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use opuc_core::szego::CoeffPair;
use opuc_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupnormRow {
    pub trajectory_id: u64,
    pub degree: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub grid_max: f64,
    pub upper_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauRow {
    pub degree: usize,
    pub median_upper_bound: f64,
    pub p90_upper_bound: f64,
    pub median_grid_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: u32,
    pub p: u32,
    pub a_moment: f64,
    pub a_stderr: f64,
    pub b_moment: f64,
    pub b_stderr: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleRow {
    pub n: usize,
    pub j: usize,
    pub z_re: f64,
    pub z_im: f64,
    pub residual: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeRow {
    pub k: u32,
    pub lambda: f64,
    pub exceed_fraction: f64,
    pub bound: f64,
    pub repeats: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub level: u32,
    pub measure: f64,
    pub bound: f64,
    pub theta_star: f64,
    pub achieved: f64,
    pub lower: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub level: u32,
    pub index: u64,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub level: u32,
    pub index: u64,
    pub max_modulus: f64,
    pub half_abs_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub n: usize,
    pub defect: f64,
    pub trapezoid_m: usize,
    pub trapezoid_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub degree: usize,
    pub a_median: f64,
    pub a_p90: f64,
    pub a_grid_median: f64,
    pub b_median: f64,
    pub b_p90: f64,
    pub b_grid_median: f64,
    pub ratio: f64,
}

pub fn write_csv_to<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_csv_to(BufWriter::new(File::create(path)?), rows)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteTotal {
    pub suite: String,
    pub file: String,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub library_version: String,
    pub config: String,
    pub seed: u64,
    /// Seeds of the martingale repetitions, in row order.
    pub repetition_seeds: Vec<u64>,
    pub threads: usize,
    pub totals: Vec<SuiteTotal>,
    pub plateau_ratio: Option<f64>,
    pub ks_statistics: Vec<KsSummary>,
    pub failures: Vec<String>,
    /// Checks skipped or downgraded, with the reason.
    #[serde(default)]
    pub notes: Vec<String>,
    pub started_unix_secs: u64,
    pub wall_time_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsSummary {
    pub k: u32,
    pub statistic: f64,
    pub p_value: f64,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, manifest)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

fn write_complex<W: Write>(w: &mut W, values: &[Complex64]) -> io::Result<()> {
    for v in values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_complex<R: Read>(r: &mut R, len: usize) -> io::Result<Vec<Complex64>> {
    let mut buf = [0u8; 8];
    let mut next = |r: &mut R| -> io::Result<f64> {
        r.read_exact(&mut buf)?;
        Ok(f64::from_le_bytes(buf))
    };
    (0..len)
        .map(|_| Ok(Complex64::new(next(r)?, next(r)?)))
        .collect()
}

pub fn write_coeff_pair<W: Write>(w: &mut W, pair: &CoeffPair) -> io::Result<()> {
    w.write_all(&(pair.degree() as u64).to_le_bytes())?;
    write_complex(w, pair.phi())?;
    write_complex(w, pair.phi_star())
}

/// Reads one record and checks the monic, unit-constant and star-reversal
/// invariants to within `tolerance`.
pub fn read_coeff_pair<R: Read>(r: &mut R, tolerance: f64) -> Result<CoeffPair> {
    let mut head = [0u8; 8];
    r.read_exact(&mut head)?;
    let degree = usize::try_from(u64::from_le_bytes(head))
        .ok()
        .filter(|d| *d < usize::MAX / 32)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "degree out of range"))?;
    let phi = read_complex(r, degree + 1)?;
    let phi_star = read_complex(r, degree + 1)?;
    Ok(CoeffPair::from_parts(phi, phi_star, tolerance)?)
}

pub fn write_coeff_file(path: &Path, pair: &CoeffPair) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_coeff_pair(&mut w, pair)?;
    w.flush()?;
    Ok(())
}
