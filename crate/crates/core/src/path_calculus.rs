//! Time-sampled paths in `Sp(2n, R)` starting at the identity.
//!
//! A path represents the element of the universal cover given by its
//! homotopy class with fixed endpoints. Group operations act pointwise.
//!
//! Every [`SampledPath`] carries a *source*: a function that can evaluate the
//! path at any time in `[0, 1]`. Paths built from closed forms keep their
//! formula; paths read from samples get a piecewise interpolant
//! `X(t) = X(t_k) exp(s L_k)`, `L_k = log(X(t_k)^{-1} X(t_{k+1}))`, which
//! stays in the symplectic group and reproduces the samples. Products,
//! inverses and powers compose the sources, so refining a derived path
//! re-evaluates it exactly instead of interpolating the derived samples.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix_core::{
    self, complex_to_real, half_dim, j_mul, max_abs, real_to_complex, symplectic_defect,
    symplectic_inverse, RMat,
};

/// Default number of uniform samples.
pub const DEFAULT_SAMPLES: usize = 256;
/// Hard cap on the number of samples reached by refinement.
pub const MAX_SAMPLES: usize = 1 << 16;
/// Target bound on `max |X_k^{-1} X_{k+1} - I|` when choosing grids for
/// derived paths.
pub const STEP_BOUND: f64 = 0.5;

/// Callable evaluation of a path at a time in `[0, 1]`.
pub type PathSource = Arc<dyn Fn(f64) -> RMat + Send + Sync>;

#[derive(Clone)]
pub struct SampledPath {
    dim: usize,
    times: Vec<f64>,
    matrices: Vec<RMat>,
    source: PathSource,
}

impl fmt::Debug for SampledPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledPath")
            .field("dim", &self.dim)
            .field("samples", &self.times.len())
            .field("endpoint", &self.matrices.last())
            .finish()
    }
}

pub(crate) fn uniform_grid(samples: usize) -> Vec<f64> {
    let last = (samples - 1) as f64;
    (0..samples).map(|k| k as f64 / last).collect()
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.len() < 3 {
        return Err(Error::invalid("a path needs at least 3 samples"));
    }
    if times[0].abs() > 1e-12 || (times[times.len() - 1] - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("sample times must start at 0 and end at 1"));
    }
    if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!(
            "sample times are not strictly increasing at index {}",
            k + 1
        )));
    }
    Ok(())
}

fn check_samples(dim: usize, matrices: &[RMat], tol: f64) -> Result<()> {
    for (k, m) in matrices.iter().enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::invalid(format!(
                "sample {k} has shape {}x{}, expected {dim}x{dim}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = max_abs(m).max(1.0);
        let defect = symplectic_defect(m)?;
        if defect > tol * scale * scale {
            return Err(Error::invalid(format!(
                "sample {k} is not symplectic (defect {defect:.3e})"
            )));
        }
    }
    let start = max_abs(&(&matrices[0] - RMat::identity(dim, dim)));
    if start > tol {
        return Err(Error::invalid(format!(
            "path does not start at the identity (deviation {start:.3e})"
        )));
    }
    Ok(())
}

/// Piecewise one-parameter-subgroup interpolant through the samples.
fn interpolant(times: &[f64], matrices: &[RMat]) -> Result<PathSource> {
    let mut logs = Vec::with_capacity(matrices.len() - 1);
    for k in 0..matrices.len() - 1 {
        let step = symplectic_inverse(&matrices[k]) * &matrices[k + 1];
        let log = matrix_core::logm(&step)
            .map_err(|_| Error::numerical(k, "consecutive samples too far apart to interpolate"))?;
        logs.push(log);
    }
    let times = times.to_vec();
    let matrices = matrices.to_vec();
    Ok(Arc::new(move |t: f64| {
        let last = times.len() - 1;
        if t >= times[last] {
            return matrices[last].clone();
        }
        if t <= times[0] {
            return matrices[0].clone();
        }
        let k = times.partition_point(|&s| s <= t) - 1;
        if t == times[k] {
            return matrices[k].clone();
        }
        let theta = (t - times[k]) / (times[k + 1] - times[k]);
        &matrices[k] * matrix_core::expm_real(&(&logs[k] * theta))
    }))
}

pub(crate) fn pow_symplectic(m: &RMat, k: i64) -> RMat {
    let dim = m.nrows();
    let mut base = if k < 0 {
        symplectic_inverse(m)
    } else {
        m.clone()
    };
    let mut e = k.unsigned_abs();
    let mut acc = RMat::identity(dim, dim);
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

impl SampledPath {
    /// Validates samples and builds the interpolating source.
    pub fn new(times: Vec<f64>, matrices: Vec<RMat>, tol: f64) -> Result<Self> {
        check_grid(&times)?;
        if matrices.len() != times.len() {
            return Err(Error::invalid(format!(
                "{} times but {} matrices",
                times.len(),
                matrices.len()
            )));
        }
        let n = half_dim(&matrices[0])?;
        check_samples(2 * n, &matrices, tol)?;
        let source = interpolant(&times, &matrices)?;
        Ok(SampledPath {
            dim: 2 * n,
            times,
            matrices,
            source,
        })
    }

    /// Samples `f` on a uniform grid; `f` stays attached as the source.
    pub fn from_fn(
        dim: usize,
        samples: usize,
        f: impl Fn(f64) -> RMat + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::from_source(dim, uniform_grid(samples.max(3)), Arc::new(f))
    }

    pub fn from_source(dim: usize, times: Vec<f64>, source: PathSource) -> Result<Self> {
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::invalid(format!("path dimension {dim} is not even")));
        }
        check_grid(&times)?;
        let matrices: Vec<RMat> = times.iter().map(|&t| source(t)).collect();
        for (k, m) in matrices.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::invalid(format!(
                    "source returned wrong shape at sample {k}"
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::numerical(k, "source returned non-finite entries"));
            }
        }
        Ok(SampledPath {
            dim,
            times,
            matrices,
            source,
        })
    }

    /// Assembles a path from samples already known to equal `source` on
    /// `times`.
    pub(crate) fn from_parts(
        dim: usize,
        times: Vec<f64>,
        matrices: Vec<RMat>,
        source: PathSource,
    ) -> Self {
        debug_assert_eq!(times.len(), matrices.len());
        SampledPath {
            dim,
            times,
            matrices,
            source,
        }
    }

    pub fn constant_identity(dim: usize, samples: usize) -> Self {
        Self::from_fn(dim, samples, move |_| RMat::identity(dim, dim))
            .expect("identity path is valid")
    }

    /// `t -> exp(t G)` for a Hamiltonian generator `G = J H`.
    pub fn exponential(generator: RMat, samples: usize) -> Result<Self> {
        half_dim(&generator)?;
        let dim = generator.nrows();
        Self::from_fn(dim, samples, move |t| {
            matrix_core::expm_real(&(&generator * t))
        })
    }

    /// Rotation by `2 pi turns t` in `Sp(2)`; a closed loop for integer `turns`.
    pub fn rotation(turns: f64, samples: usize) -> Self {
        Self::from_fn(2, samples, move |t| {
            let a = 2.0 * std::f64::consts::PI * turns * t;
            RMat::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
        })
        .expect("rotation path is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_dim(&self) -> usize {
        self.dim / 2
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn matrices(&self) -> &[RMat] {
        &self.matrices
    }

    pub fn endpoint(&self) -> &RMat {
        self.matrices.last().expect("paths are non-empty")
    }

    pub fn source(&self) -> &PathSource {
        &self.source
    }

    pub fn eval(&self, t: f64) -> RMat {
        (self.source)(t)
    }

    /// Same path, evaluated on a new grid.
    pub fn resample(&self, times: Vec<f64>) -> Result<Self> {
        Self::from_source(self.dim, times, self.source.clone())
    }

    pub fn with_samples(&self, samples: usize) -> Result<Self> {
        self.resample(uniform_grid(samples.max(3)))
    }

    /// Inserts the midpoint of every interval.
    pub fn refine(&self) -> Result<Self> {
        let mut times = Vec::with_capacity(2 * self.times.len() - 1);
        for w in self.times.windows(2) {
            times.push(w[0]);
            times.push(0.5 * (w[0] + w[1]));
        }
        times.push(*self.times.last().unwrap());
        self.resample(times)
    }

    /// `max_k |X_k^{-1} X_{k+1} - I|`, the largest step in the group.
    pub fn max_step(&self) -> f64 {
        let eye = RMat::identity(self.dim, self.dim);
        self.matrices
            .windows(2)
            .map(|w| max_abs(&(symplectic_inverse(&w[0]) * &w[1] - &eye)))
            .fold(0.0, f64::max)
    }

    /// Steps-per-unit-time scale used to size grids of derived paths.
    pub(crate) fn rate(&self) -> f64 {
        let eye = RMat::identity(self.dim, self.dim);
        self.matrices
            .windows(2)
            .zip(self.times.windows(2))
            .map(|(w, t)| max_abs(&(symplectic_inverse(&w[0]) * &w[1] - &eye)) / (t[1] - t[0]))
            .fold(0.0, f64::max)
    }

    /// Refines until [`max_step`](Self::max_step) is at most `bound` or the
    /// sample cap is reached.
    pub fn resolve(&self, bound: f64) -> Result<Self> {
        let mut path = self.clone();
        while path.max_step() > bound && 2 * path.len() - 1 <= MAX_SAMPLES {
            path = path.refine()?;
        }
        Ok(path)
    }

    /// Every sample lies in `U(n)` within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.matrices
            .iter()
            .all(|m| matrix_core::is_unitary_symplectic(m, tol).unwrap_or(false))
    }

    /// The pointwise `k`-th power; negative `k` uses the inverse.
    pub fn power(&self, k: i64) -> Result<Self> {
        let src = self.source.clone();
        let source: PathSource = Arc::new(move |t| pow_symplectic(&src(t), k));
        let samples = derived_samples(self.len(), k.unsigned_abs() as f64 * self.rate());
        Self::from_source(self.dim, uniform_grid_or(&self.times, samples), source)
    }

    /// Conjugation `W X(t) W^{-1}` by a fixed symplectic matrix.
    pub fn conjugate(&self, w: &RMat) -> Result<Self> {
        if w.nrows() != self.dim {
            return Err(Error::invalid("conjugating matrix has the wrong dimension"));
        }
        let src = self.source.clone();
        let w = w.clone();
        let w_inv = symplectic_inverse(&w);
        let source: PathSource = Arc::new(move |t| &w * src(t) * &w_inv);
        Self::from_source(self.dim, self.times.clone(), source)
    }
}

pub(crate) fn derived_samples(current: usize, rate: f64) -> usize {
    let needed = (rate / STEP_BOUND).ceil() as usize + 1;
    needed.max(current).min(MAX_SAMPLES)
}

/// Keeps `times` if it already has `samples` points, else a uniform grid.
fn uniform_grid_or(times: &[f64], samples: usize) -> Vec<f64> {
    if samples <= times.len() {
        times.to_vec()
    } else {
        uniform_grid(samples)
    }
}

fn merge_grids(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x <= y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.last().is_none_or(|&l| next - l > 1e-14) {
            out.push(next);
        }
    }
    let last = out.len() - 1;
    out[last] = 1.0;
    out
}

/// Generating Hamiltonians `H(t_k)` of a path, `X' X^{-1} = J H`.
#[derive(Debug, Clone)]
pub struct HamiltonianTrack {
    pub times: Vec<f64>,
    pub hams: Vec<RMat>,
    /// Largest antisymmetric part removed by symmetrization; a measure of
    /// finite-difference error.
    pub max_asymmetry: f64,
}

/// Weights of the derivative at 0 of the quadratic through nodes at
/// positions `x`.
fn three_point_weights(x: [f64; 3]) -> [f64; 3] {
    [
        -(x[1] + x[2]) / ((x[0] - x[1]) * (x[0] - x[2])),
        -(x[0] + x[2]) / ((x[1] - x[0]) * (x[1] - x[2])),
        -(x[0] + x[1]) / ((x[2] - x[0]) * (x[2] - x[1])),
    ]
}

/// Derivative estimate at sample `k`: centered in the interior, second-order
/// one-sided at the ends.
fn derivative_at(times: &[f64], mats: &[RMat], k: usize) -> RMat {
    let last = times.len() - 1;
    let idx = if k == 0 {
        [0, 1, 2]
    } else if k == last {
        [last, last - 1, last - 2]
    } else {
        [k - 1, k, k + 1]
    };
    let t = times[k];
    let w = three_point_weights([times[idx[0]] - t, times[idx[1]] - t, times[idx[2]] - t]);
    &mats[idx[0]] * w[0] + &mats[idx[1]] * w[1] + &mats[idx[2]] * w[2]
}

fn hamiltonian_at(times: &[f64], mats: &[RMat], k: usize) -> (RMat, f64) {
    let d = derivative_at(times, mats, k);
    let raw = -j_mul(&(d * symplectic_inverse(&mats[k])));
    let asym = max_abs(&(&raw - raw.transpose())) * 0.5;
    ((&raw + raw.transpose()) * 0.5, asym)
}

pub fn extract_hamiltonian(path: &SampledPath) -> Result<HamiltonianTrack> {
    let mut hams = Vec::with_capacity(path.len());
    let mut max_asymmetry = 0.0_f64;
    for k in 0..path.len() {
        let m = &path.matrices[k];
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::numerical(k, "singular or non-finite sample"));
        }
        let (h, asym) = hamiltonian_at(&path.times, &path.matrices, k);
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::numerical(k, "singular sample"));
        }
        max_asymmetry = max_asymmetry.max(asym);
        hams.push(h);
    }
    Ok(HamiltonianTrack {
        times: path.times.clone(),
        hams,
        max_asymmetry,
    })
}

/// Pointwise product `X(t) Y(t)` on a grid fine enough for both factors.
pub fn compose(x: &SampledPath, y: &SampledPath) -> Result<SampledPath> {
    if x.dim != y.dim {
        return Err(Error::invalid(format!(
            "cannot compose paths of dimension {} and {}",
            x.dim, y.dim
        )));
    }
    let (sx, sy) = (x.source.clone(), y.source.clone());
    let source: PathSource = Arc::new(move |t| sx(t) * sy(t));
    let merged = merge_grids(&x.times, &y.times);
    let samples = derived_samples(merged.len(), x.rate() + y.rate());
    SampledPath::from_source(x.dim, uniform_grid_or(&merged, samples), source)
}

/// Pointwise `X(t)^p Y(t)^q` on a single grid sized for the combined rate.
pub fn power_product(x: &SampledPath, p: i64, y: &SampledPath, q: i64) -> Result<SampledPath> {
    if x.dim != y.dim {
        return Err(Error::invalid(format!(
            "cannot compose paths of dimension {} and {}",
            x.dim, y.dim
        )));
    }
    let (sx, sy) = (x.source.clone(), y.source.clone());
    let source: PathSource =
        Arc::new(move |t| pow_symplectic(&sx(t), p) * pow_symplectic(&sy(t), q));
    let rate = p.unsigned_abs() as f64 * x.rate() + q.unsigned_abs() as f64 * y.rate();
    let samples = derived_samples(x.len().max(y.len()), rate);
    SampledPath::from_source(x.dim, uniform_grid(samples), source)
}

/// Pointwise inverse `Y(t)^{-1}`.
pub fn invert(y: &SampledPath) -> Result<SampledPath> {
    let src = y.source.clone();
    let source: PathSource = Arc::new(move |t| symplectic_inverse(&src(t)));
    SampledPath::from_source(y.dim, y.times.clone(), source)
}

/// The block embedding `j_i : Sp(2) -> Sp(2n)` of a single matrix
/// (`i` is 1-based).
pub fn embed_matrix(a: &RMat, i: usize, n: usize) -> Result<RMat> {
    if a.nrows() != 2 || a.ncols() != 2 {
        return Err(Error::invalid("block embedding takes a 2x2 matrix"));
    }
    if i == 0 || i > n {
        return Err(Error::invalid(format!(
            "block index {i} out of range 1..={n}"
        )));
    }
    let (r, s) = (i - 1, i - 1 + n);
    let mut b = RMat::identity(2 * n, 2 * n);
    b[(r, r)] = a[(0, 0)];
    b[(r, s)] = a[(0, 1)];
    b[(s, r)] = a[(1, 0)];
    b[(s, s)] = a[(1, 1)];
    Ok(b)
}

pub fn embed_block(x: &SampledPath, i: usize, n: usize) -> Result<SampledPath> {
    if x.dim != 2 {
        return Err(Error::invalid("block embedding takes a path in Sp(2)"));
    }
    embed_matrix(&RMat::identity(2, 2), i, n)?;
    let src = x.source.clone();
    let source: PathSource =
        Arc::new(move |t| embed_matrix(&src(t), i, n).expect("index checked above"));
    SampledPath::from_source(2 * n, x.times.clone(), source)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeStatus {
    /// Strictly positive generator along the whole representative.
    Dominant,
    /// Non-negative generator within tolerance.
    Semipositive,
    /// A negative eigenvalue beyond tolerance on this representative. Does
    /// not refute membership: other representatives of the class exist.
    Negative,
    /// The smallest eigenvalue is within the finite-difference error band.
    Undetermined,
}

impl ConeStatus {
    /// Dominant or semipositive.
    pub fn in_cone(self) -> bool {
        matches!(self, ConeStatus::Dominant | ConeStatus::Semipositive)
    }
}

/// Which representative of the homotopy class produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Representative {
    /// The sampled path itself.
    Pointwise,
    /// `exp(i t A)` with the same endpoint and Maslov index (unitary
    /// endpoints only).
    Straightened,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeVerdict {
    pub status: ConeStatus,
    pub min_eigenvalue_over_path: f64,
    pub tol: f64,
    pub max_asymmetry: f64,
    pub representative: Representative,
}

fn min_symmetric_eigenvalue(h: &RMat) -> f64 {
    if h.nrows() == 2 {
        let (a, b, d) = (h[(0, 0)], h[(0, 1)], h[(1, 1)]);
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        return mean - r;
    }
    nalgebra::SymmetricEigen::new(h.clone()).eigenvalues.min()
}

fn status_for(min_eig: f64, asym: f64, tol: f64) -> ConeStatus {
    if asym > tol && min_eig.abs() <= asym {
        ConeStatus::Undetermined
    } else if min_eig >= tol {
        ConeStatus::Dominant
    } else if min_eig > -tol {
        ConeStatus::Semipositive
    } else {
        ConeStatus::Negative
    }
}

/// Classifies the sampled representative by the smallest eigenvalue of its
/// generating Hamiltonian over all samples.
pub fn classify_cone(x: &SampledPath, tol: f64) -> Result<ConeVerdict> {
    let track = extract_hamiltonian(x)?;
    let min_eig = track
        .hams
        .iter()
        .map(min_symmetric_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    Ok(ConeVerdict {
        status: status_for(min_eig, track.max_asymmetry, tol),
        min_eigenvalue_over_path: min_eig,
        tol,
        max_asymmetry: track.max_asymmetry,
        representative: Representative::Pointwise,
    })
}

/// Looks for a semipositive representative `exp(i t A)` of a path with
/// unitary endpoint: the class is fixed by the endpoint and the Maslov
/// index, so any Hermitian `A` with `exp(iA) = endpoint` and
/// `tr A = mu` represents it. Eigenvalues of the endpoint logarithm are
/// shifted by multiples of `2 pi` to make `A` non-negative.
pub fn straightened_verdict(z: &SampledPath, tol: f64) -> Result<Option<ConeVerdict>> {
    let end = z.endpoint();
    if !matrix_core::is_unitary_symplectic(end, 1e-8)? {
        return Ok(None);
    }
    let mu = crate::maslov::maslov_index(z)?.value;
    let u = real_to_complex(end)?;
    let (phases, _) = matrix_core::unitary_eig(&u, 1e-8)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    // strict: eigenvalues in (0, 2pi]; weak: eigenvalues in [0, 2pi)
    for (strict, status) in [
        (true, ConeStatus::Dominant),
        (false, ConeStatus::Semipositive),
    ] {
        let reduced: Vec<f64> = phases
            .iter()
            .map(|&p| crate::maslov::reduce_angle(p, strict, tol))
            .collect();
        let slack = mu - reduced.iter().sum::<f64>();
        let turns = (slack / two_pi).round();
        if (slack - turns * two_pi).abs() > 1e-6 {
            return Err(Error::numerical(
                z.len() - 1,
                format!("Maslov index {mu} inconsistent with endpoint eigenvalues"),
            ));
        }
        if turns >= 0.0 {
            let lifted = crate::maslov::distribute_turns(&reduced, turns as u64);
            let min_eig = lifted.iter().cloned().fold(f64::INFINITY, f64::min);
            if status == ConeStatus::Semipositive || min_eig >= tol {
                return Ok(Some(ConeVerdict {
                    status,
                    min_eigenvalue_over_path: min_eig,
                    tol,
                    max_asymmetry: 0.0,
                    representative: Representative::Straightened,
                }));
            }
        }
    }
    Ok(None)
}

/// Certifies `X >= Y`, i.e. `X Y^{-1}` in the cone.
///
/// The pointwise representative of `X Y^{-1}` is tested first; when it fails
/// and the endpoint is unitary, the straightened representative is tried.
/// An in-cone status certifies the order; anything else is inconclusive.
pub fn order_leq(y: &SampledPath, x: &SampledPath, tol: f64) -> Result<ConeVerdict> {
    let diff = compose(x, &invert(y)?)?;
    order_verdict(&diff, tol)
}

/// Verdict for an already-formed difference path.
pub fn order_verdict(diff: &SampledPath, tol: f64) -> Result<ConeVerdict> {
    let pointwise = classify_cone(diff, tol)?;
    if pointwise.status.in_cone() {
        return Ok(pointwise);
    }
    match straightened_verdict(diff, tol)? {
        Some(v) => Ok(v),
        None => Ok(pointwise),
    }
}

/// Whether [`order_verdict`] would return an in-cone status, stopping the
/// pointwise scan at the first clearly negative sample.
pub fn order_certified(diff: &SampledPath, tol: f64) -> Result<bool> {
    let mut min_eig = f64::INFINITY;
    let mut max_asym = 0.0_f64;
    let mut refuted = false;
    for k in 0..diff.len() {
        let (h, asym) = hamiltonian_at(&diff.times, &diff.matrices, k);
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::numerical(k, "singular sample"));
        }
        min_eig = min_eig.min(min_symmetric_eigenvalue(&h));
        max_asym = max_asym.max(asym);
        if min_eig <= -tol {
            refuted = true;
            break;
        }
    }
    if !refuted && status_for(min_eig, max_asym, tol).in_cone() {
        return Ok(true);
    }
    Ok(straightened_verdict(diff, tol)?.is_some())
}

/// Realified `exp(i t A)` for a Hermitian `A`.
pub fn unitary_exponential_path(
    a: &crate::matrix_core::CMat,
    samples: usize,
) -> Result<SampledPath> {
    let spec = matrix_core::hermitian_eig(a, matrix_core::DEFAULT_TOL)?;
    let n = a.nrows();
    SampledPath::from_fn(2 * n, samples, move |t| {
        complex_to_real(&spec.apply(|l| num_complex::Complex64::from_polar(1.0, l * t)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::{is_symplectic, standard_j, DEFAULT_TOL};
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rot_generator() -> RMat {
        standard_j(1)
    }

    #[test]
    fn rotation_generator_is_identity() {
        let x = SampledPath::exponential(rot_generator(), 101).unwrap();
        let track = extract_hamiltonian(&x).unwrap();
        for h in &track.hams {
            assert!(max_abs(&(h - RMat::identity(2, 2))) < 1e-4);
        }
        let id = SampledPath::constant_identity(4, 50);
        let track = extract_hamiltonian(&id).unwrap();
        assert!(track.hams.iter().all(|h| max_abs(h) == 0.0));
    }

    #[test]
    fn new_validates() {
        let t = vec![0.0, 0.5, 1.0];
        let id = RMat::identity(2, 2);
        assert!(SampledPath::new(t.clone(), vec![id.clone(); 3], DEFAULT_TOL).is_ok());
        let bad_start = vec![id.clone() * 2.0, id.clone(), id.clone()];
        assert!(SampledPath::new(t.clone(), bad_start, DEFAULT_TOL).is_err());
        assert!(
            SampledPath::new(vec![0.0, 0.7, 0.5, 1.0], vec![id.clone(); 4], DEFAULT_TOL).is_err()
        );
        assert!(SampledPath::new(vec![0.0, 1.0], vec![id.clone(); 2], DEFAULT_TOL).is_err());
        let dil = RMat::from_diagonal_element(2, 2, 2.0);
        assert!(SampledPath::new(t, vec![id.clone(), dil, id], DEFAULT_TOL).is_err());
    }

    #[test]
    fn interpolant_reproduces_one_parameter_subgroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = sampling::random_hamiltonian_generator(&mut rng, 2, 0.7);
        let exact = SampledPath::exponential(g.clone(), 33).unwrap();
        let sampled = SampledPath::new(
            exact.times().to_vec(),
            exact.matrices().to_vec(),
            DEFAULT_TOL,
        )
        .unwrap();
        let fine = sampled.with_samples(101).unwrap();
        for (t, m) in fine.times().iter().zip(fine.matrices()) {
            let e = matrix_core::expm_real(&(&g * *t));
            assert!(max_abs(&(m - e)) < 1e-10);
        }
    }

    #[test]
    fn compose_identity_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = sampling::random_symplectic_path(&mut rng, 1, 0.8, 64);
        let id = SampledPath::constant_identity(2, 64);
        let xi = compose(&x, &id).unwrap();
        for (a, b) in xi.matrices().iter().zip(x.matrices()) {
            assert!(max_abs(&(a - b)) < 1e-13);
        }
        let z = compose(&x, &invert(&x).unwrap()).unwrap();
        for m in z.matrices() {
            assert!(max_abs(&(m - RMat::identity(2, 2))) < 1e-10);
        }
    }

    #[test]
    fn inverse_of_rotation() {
        let x = SampledPath::exponential(rot_generator(), 101).unwrap();
        let y = invert(&x).unwrap();
        let track = extract_hamiltonian(&y).unwrap();
        for h in &track.hams {
            assert!(max_abs(&(h + RMat::identity(2, 2))) < 1e-4);
        }
        let id = invert(&SampledPath::constant_identity(2, 10)).unwrap();
        assert!(id.matrices().iter().all(|m| *m == RMat::identity(2, 2)));
    }

    /// Product-formula residual `|H_XY - H_X - X^{-T} H_Y X^{-1}|` at `samples`.
    fn product_residual(seed: u64, samples: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sampling::random_symplectic_path(&mut rng, 1, 0.8, samples);
        let y = sampling::random_symplectic_path(&mut rng, 1, 0.8, samples);
        let xy = compose(&x, &y).unwrap();
        assert_eq!(xy.len(), samples);
        let hx = extract_hamiltonian(&x).unwrap();
        let hy = extract_hamiltonian(&y).unwrap();
        let hxy = extract_hamiltonian(&xy).unwrap();
        let mut worst = 0.0_f64;
        for k in 0..samples {
            let xinv = symplectic_inverse(&x.matrices()[k]);
            let predicted = &hx.hams[k] + xinv.transpose() * &hy.hams[k] * &xinv;
            worst = worst.max(max_abs(&(&hxy.hams[k] - predicted)));
        }
        worst
    }

    #[test]
    fn product_formula_second_order() {
        let coarse = product_residual(13, 65);
        let fine = product_residual(13, 129);
        let order = (coarse / fine).log2();
        assert!(fine < 1e-2, "residual {fine}");
        assert!(order >= 1.8, "measured order {order}");
    }

    #[test]
    fn inverse_generator_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let y = sampling::random_symplectic_path(&mut rng, 2, 0.5, 257);
        let yi = invert(&y).unwrap();
        let hy = extract_hamiltonian(&y).unwrap();
        let hyi = extract_hamiltonian(&yi).unwrap();
        for k in 0..y.len() {
            let m = &y.matrices()[k];
            let r = &hyi.hams[k] + m.transpose() * &hy.hams[k] * m;
            assert!(max_abs(&r) < 1e-3);
        }
    }

    #[test]
    fn closed_form_generator_of_synthesized_loop() {
        // X = U F U, U rotation by 2 pi t, F = diag(f, 1/f), f = tan(pi/4 + a t).
        let lambda: f64 = 2.0;
        let a = lambda.atan() - PI / 4.0;
        let rot = |t: f64| {
            let c = (2.0 * PI * t).cos();
            let s = (2.0 * PI * t).sin();
            RMat::from_row_slice(2, 2, &[c, -s, s, c])
        };
        let f = move |t: f64| (PI / 4.0 + a * t).tan();
        let x = SampledPath::from_fn(2, 401, move |t| {
            let u = rot(t);
            let ft = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![f(t), 1.0 / f(t)]));
            &u * ft * &u
        })
        .unwrap();
        let track = extract_hamiltonian(&x).unwrap();
        for (k, &t) in x.times().iter().enumerate() {
            let u = rot(t);
            let ft = f(t);
            let fprime = a * (1.0 + ft * ft);
            let g = fprime / ft;
            // H_F from F' F^{-1} = J H_F
            let h_f = RMat::from_row_slice(2, 2, &[0.0, -g, -g, 0.0]);
            let finv = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 / ft, ft]));
            let h_u = RMat::identity(2, 2) * (2.0 * PI);
            let ut = u.transpose();
            let expected = &h_u + &u * h_f * &ut + &u * &finv * &h_u * &finv * &ut;
            let err = max_abs(&(&track.hams[k] - &expected));
            assert!(err < 1e-3 * max_abs(&expected), "t = {t}, err = {err}");
        }
    }

    #[test]
    fn block_embeddings() {
        let id = SampledPath::constant_identity(2, 10);
        let e = embed_block(&id, 2, 3).unwrap();
        assert!(e.matrices().iter().all(|m| *m == RMat::identity(6, 6)));
        assert!(embed_block(&id, 0, 3).is_err());
        assert!(embed_block(&id, 4, 3).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let a = sampling::random_symplectic(&mut rng, 1, 1.0);
        let b = sampling::random_symplectic(&mut rng, 1, 1.0);
        let ja = embed_matrix(&a, 1, 2).unwrap();
        let jb = embed_matrix(&b, 2, 2).unwrap();
        assert!(max_abs(&(&ja * &jb - &jb * &ja)) < 1e-12);
        assert!(is_symplectic(&ja, 1e-10).unwrap());

        // embeddings respect the polar decomposition
        let pa = matrix_core::polar_decompose(&a, DEFAULT_TOL).unwrap();
        let pja = matrix_core::polar_decompose(&ja, DEFAULT_TOL).unwrap();
        let ju = embed_matrix(&pa.unitary_part, 1, 2).unwrap();
        assert!(max_abs(&(pja.unitary_part - ju)) < 1e-10);
    }

    #[test]
    fn cone_classification() {
        let x = SampledPath::exponential(rot_generator(), 101).unwrap();
        let v = classify_cone(&x, 1e-6).unwrap();
        assert_eq!(v.status, ConeStatus::Dominant);
        assert!((v.min_eigenvalue_over_path - 1.0).abs() < 1e-3);

        let id = SampledPath::constant_identity(2, 101);
        assert_eq!(
            classify_cone(&id, 1e-6).unwrap().status,
            ConeStatus::Semipositive
        );

        let y = invert(&x).unwrap();
        let v = classify_cone(&y, 1e-6).unwrap();
        assert_eq!(v.status, ConeStatus::Negative);
        assert!((v.min_eigenvalue_over_path + 1.0).abs() < 1e-3);
    }

    #[test]
    fn order_basics() {
        let x = SampledPath::exponential(rot_generator(), 101).unwrap();
        let id = SampledPath::constant_identity(2, 101);
        assert_eq!(
            order_leq(&x, &x, 1e-6).unwrap().status,
            ConeStatus::Semipositive
        );
        assert_eq!(
            order_leq(&id, &x, 1e-6).unwrap().status,
            ConeStatus::Dominant
        );
    }

    #[test]
    fn order_on_commuting_diagonal_unitaries() {
        // angle functions differ by a nondecreasing function
        let x = sampling::diagonal_unitary_path(&[9.0, 7.0], &[1.0, -2.0], 257);
        let y = sampling::diagonal_unitary_path(&[4.0, 5.0], &[1.0, -2.0], 257);
        let v = order_leq(&y, &x, 1e-6).unwrap();
        assert!(v.status.in_cone());
        assert_eq!(v.representative, Representative::Pointwise);
        let back = order_leq(&x, &y, 1e-6).unwrap();
        assert!(!back.status.in_cone());
    }

    #[test]
    fn straightened_representative_certifies() {
        // angles (10, -1): pointwise negative in one coordinate, but the class
        // has mu = 9 and contains exp(it diag(10 - 2pi, -1 + 2pi)) >= 0.
        let z = sampling::diagonal_unitary_path(&[10.0, -1.0], &[0.0, 0.0], 257);
        let v = order_verdict(&z, 1e-6).unwrap();
        assert_eq!(v.representative, Representative::Straightened);
        assert_eq!(v.status, ConeStatus::Dominant);
        assert!((v.min_eigenvalue_over_path - (10.0 - 2.0 * PI)).abs() < 1e-8);
        // (1, -1): mu = 0, no semipositive representative in the class
        let z = sampling::diagonal_unitary_path(&[1.0, -1.0], &[0.0, 0.0], 257);
        let v = order_verdict(&z, 1e-6).unwrap();
        assert_eq!(v.status, ConeStatus::Negative);
    }

    #[test]
    fn power_matches_repeated_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let x = sampling::random_symplectic_path(&mut rng, 1, 0.5, 65);
        let p3 = x.power(3).unwrap();
        let c3 = compose(&compose(&x, &x).unwrap(), &x).unwrap();
        assert!(max_abs(&(p3.endpoint() - c3.endpoint())) < 1e-10 * max_abs(c3.endpoint()));
        let pm = x.power(-2).unwrap();
        let prod = compose(&pm, &x.power(2).unwrap()).unwrap();
        assert!(max_abs(&(prod.endpoint() - RMat::identity(2, 2))) < 1e-9);
    }
}
