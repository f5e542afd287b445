//! Input file formats and output emission.
//!
//! All inputs are JSON documents:
//!
//! - path: `{"dim": 2n, "times": [..], "matrices": [[row-major 2n*2n], ..]}`
//! - grid function: `{"grid_shape": [..], "values": [..]}`
//! - real matrix: `{"dim": d, "values": [row-major d*d]}`
//! - Hermitian matrix: `{"dim": d, "re": [..], "im": [..]}`
//! - time-sampled family: `{"times": [..], "grid_shape": [..], "slices": [[..], ..], "weights": [..]}`
//!   (`weights` optional)

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use symporder::matrix_core::{CMat, RMat};
use symporder::prequantization::LeafFunction;
use symporder::SampledPath;

use crate::Failure;

/// Relative symplectic defect accepted in path files.
pub const FILE_TOL: f64 = 1e-9;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Input(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn field_error(path: &Path, msg: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{}: {msg}", path.display()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    pub dim: usize,
    pub times: Vec<f64>,
    pub matrices: Vec<Vec<f64>>,
}

impl PathFile {
    pub fn from_path(x: &SampledPath) -> Self {
        PathFile {
            dim: x.dim(),
            times: x.times().to_vec(),
            matrices: x.matrices().iter().map(row_major).collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    grid_shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    dim: usize,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct HermitianFile {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    times: Vec<f64>,
    grid_shape: Vec<usize>,
    slices: Vec<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

pub struct Family {
    pub times: Vec<f64>,
    pub slices: Vec<LeafFunction>,
    pub weights: Option<Vec<f64>>,
}

pub fn row_major(m: &RMat) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn square(path: &Path, what: &str, dim: usize, values: &[f64]) -> Result<RMat, Failure> {
    if values.len() != dim * dim {
        return Err(field_error(
            path,
            format!(
                "{what}: expected {} entries for dim {dim}, got {}",
                dim * dim,
                values.len()
            ),
        ));
    }
    Ok(DMatrix::from_row_slice(dim, dim, values))
}

pub fn read_path(path: &Path) -> Result<SampledPath, Failure> {
    let file: PathFile = read_json(path)?;
    if file.dim == 0 || !file.dim.is_multiple_of(2) {
        return Err(field_error(
            path,
            format!("dim: {} is not a positive even number", file.dim),
        ));
    }
    if file.times.len() != file.matrices.len() {
        return Err(field_error(
            path,
            format!(
                "{} times but {} matrices",
                file.times.len(),
                file.matrices.len()
            ),
        ));
    }
    let mats = file
        .matrices
        .iter()
        .enumerate()
        .map(|(k, m)| square(path, &format!("matrices[{k}]"), file.dim, m))
        .collect::<Result<Vec<_>, _>>()?;
    SampledPath::new(file.times, mats, FILE_TOL).map_err(|e| field_error(path, e))
}

pub fn read_grid(path: &Path) -> Result<LeafFunction, Failure> {
    let file: GridFile = read_json(path)?;
    LeafFunction::new(file.grid_shape, file.values).map_err(|e| field_error(path, e))
}

pub fn read_matrix(path: &Path) -> Result<RMat, Failure> {
    let file: MatrixFile = read_json(path)?;
    square(path, "values", file.dim, &file.values)
}

pub fn read_hermitian(path: &Path) -> Result<CMat, Failure> {
    let file: HermitianFile = read_json(path)?;
    let re = square(path, "re", file.dim, &file.re)?;
    let im = square(path, "im", file.dim, &file.im)?;
    Ok(CMat::from_fn(file.dim, file.dim, |i, j| {
        Complex64::new(re[(i, j)], im[(i, j)])
    }))
}

pub fn read_family(path: &Path) -> Result<Family, Failure> {
    let file: FamilyFile = read_json(path)?;
    let slices = file
        .slices
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            LeafFunction::new(file.grid_shape.clone(), v)
                .map_err(|e| field_error(path, format!("slices[{k}]: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Family {
        times: file.times,
        slices,
        weights: file.weights,
    })
}

/// Writes `text` to `out`, or to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
