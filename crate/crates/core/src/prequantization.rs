//! Commuting quantomorphism families on a Lagrangian-foliated manifold.
//!
//! Hamiltonians constant on the leaves are stored by their values on a grid
//! over the leaf-parameter torus `[0, 1)^d`. Every quantity here depends only
//! on those values: for such a family the Hofer norms are the grid max and
//! `-min`, and powers add, so the asymptotic norms equal the one-step ones.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default points per leaf dimension.
pub const DEFAULT_GRID: usize = 1024;

/// Tolerance on the grid mean for a function to count as normalized.
pub const NORMALIZED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafFunction {
    pub grid_shape: Vec<usize>,
    /// Row-major values, last axis fastest.
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl LeafFunction {
    pub fn new(grid_shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if grid_shape.is_empty() || grid_shape.contains(&0) {
            return Err(Error::invalid(
                "grid shape must be non-empty with positive sizes",
            ));
        }
        let len: usize = grid_shape.iter().product();
        if len != values.len() {
            return Err(Error::invalid(format!(
                "grid shape {grid_shape:?} needs {len} values, got {}",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("value {k} is not finite")));
        }
        let mut f = LeafFunction {
            grid_shape,
            values,
            normalized: false,
        };
        f.normalized = f.mean().abs() <= NORMALIZED_TOL;
        Ok(f)
    }

    /// Samples `f` at the grid points `p_i = k_i / N_i`.
    pub fn from_fn(grid_shape: &[usize], f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let len: usize = grid_shape.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut point = vec![0.0; grid_shape.len()];
        for flat in 0..len {
            let mut rest = flat;
            for axis in (0..grid_shape.len()).rev() {
                point[axis] = (rest % grid_shape[axis]) as f64 / grid_shape[axis] as f64;
                rest /= grid_shape[axis];
            }
            values.push(f(&point));
        }
        Self::new(grid_shape.to_vec(), values)
    }

    pub fn constant(grid_shape: &[usize], c: f64) -> Result<Self> {
        Self::from_fn(grid_shape, |_| c)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// The function minus its mean.
    pub fn normalize(&self) -> Self {
        let m = self.mean();
        let mut f = LeafFunction {
            grid_shape: self.grid_shape.clone(),
            values: self.values.iter().map(|v| v - m).collect(),
            normalized: false,
        };
        f.normalized = f.mean().abs() <= NORMALIZED_TOL;
        f
    }

    pub fn scale(&self, c: f64) -> Self {
        LeafFunction {
            grid_shape: self.grid_shape.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            normalized: self.normalized,
        }
    }

    /// `max |F - G|` over the grid.
    pub fn max_distance(&self, other: &LeafFunction) -> Result<f64> {
        check_shapes(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs())))
    }

    /// Bound on how far the grid max or min can be from the true extremum of
    /// a function with gradient bound `lipschitz`.
    pub fn grid_error(&self, lipschitz: f64) -> f64 {
        let half_diag = self
            .grid_shape
            .iter()
            .map(|&n| (0.5 / n as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        lipschitz * half_diag
    }
}

fn check_shapes(a: &LeafFunction, b: &LeafFunction) -> Result<()> {
    if a.grid_shape != b.grid_shape {
        return Err(Error::invalid(format!(
            "grid shapes differ: {:?} vs {:?}",
            a.grid_shape, b.grid_shape
        )));
    }
    Ok(())
}

fn require_normalized(f: &LeafFunction) -> Result<()> {
    if !f.normalized {
        return Err(Error::domain(format!(
            "function is not normalized (mean {:.3e})",
            f.mean()
        )));
    }
    Ok(())
}

/// `e^{is}` composed with the flow of `F`: total Hamiltonian `s + F`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantElement {
    pub shift: f64,
    pub func: LeafFunction,
}

impl QuantElement {
    pub fn new(shift: f64, func: LeafFunction) -> Result<Self> {
        require_normalized(&func)?;
        if !shift.is_finite() {
            return Err(Error::invalid("shift is not finite"));
        }
        Ok(QuantElement { shift, func })
    }

    /// The rotation `e^{is}`.
    pub fn rotation(shift: f64, grid_shape: &[usize]) -> Result<Self> {
        Self::new(shift, LeafFunction::constant(grid_shape, 0.0)?)
    }

    pub fn is_dominant(&self) -> bool {
        self.shift + self.func.min() > 0.0
    }

    fn total(&self) -> impl Iterator<Item = f64> + '_ {
        self.func.values.iter().map(move |v| v + self.shift)
    }
}

fn require_dominant(a: &QuantElement, what: &str) -> Result<()> {
    if !a.is_dominant() {
        return Err(Error::domain(format!(
            "{what} is not dominant (shift + min = {:.6})",
            a.shift + a.func.min()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoferProfile {
    pub plus: f64,
    pub minus: f64,
    pub plus_asym: f64,
    pub minus_asym: f64,
}

pub fn hofer_norms(f: &LeafFunction) -> Result<HoferProfile> {
    require_normalized(f)?;
    let (plus, minus) = (f.max(), -f.min());
    Ok(HoferProfile {
        plus,
        minus,
        plus_asym: plus,
        minus_asym: minus,
    })
}

/// `(e^{is} f >= 1, e^{is} f <= 1)`.
pub fn order_bridge(s: f64, f: &LeafFunction) -> Result<(bool, bool)> {
    let h = hofer_norms(f)?;
    Ok((h.minus <= s, h.plus <= -s))
}

/// `gamma(a, b) = max (G + t) / (F + s)`.
pub fn gamma_quant(a: &QuantElement, b: &QuantElement) -> Result<f64> {
    check_shapes(&a.func, &b.func)?;
    require_dominant(a, "first element")?;
    Ok(b.total()
        .zip(a.total())
        .map(|(g, f)| g / f)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Smallest integer `m` with `n (G + t) <= m (F + s)` at every grid point.
///
/// Found by search on the pointwise condition; no ratio is formed.
pub fn gamma_n_quant_bruteforce(a: &QuantElement, b: &QuantElement, n: u64) -> Result<i64> {
    check_shapes(&a.func, &b.func)?;
    require_dominant(a, "first element")?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let n = n as f64;
    let holds = |m: i64| {
        let m = m as f64;
        b.total().zip(a.total()).all(|(g, f)| n * g <= m * f)
    };
    // bracket: holds(hi) and !holds(lo)
    let mut step = 1i64;
    let (mut lo, mut hi);
    if holds(0) {
        hi = 0;
        loop {
            lo = hi - step;
            if !holds(lo) {
                break;
            }
            hi = lo;
            step *= 2;
        }
    } else {
        lo = 0;
        loop {
            hi = lo + step;
            if holds(hi) {
                break;
            }
            lo = hi;
            step *= 2;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `K(a, b) = max |log(F + s) - log(G + t)|`.
pub fn k_quant(a: &QuantElement, b: &QuantElement) -> Result<f64> {
    check_shapes(&a.func, &b.func)?;
    require_dominant(a, "first element")?;
    require_dominant(b, "second element")?;
    Ok(a.total()
        .zip(b.total())
        .fold(0.0_f64, |acc, (f, g)| acc.max((f.ln() - g.ln()).abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationDistance {
    pub distance: f64,
    /// Rotation `e^{it*}` on the curve closest to the element.
    pub t_star: f64,
}

/// Distance from `e^{is} f` to the rotation curve `{e^{it}}`:
/// `1/2 log((s + |f|+) / (s - |f|-))`, attained at
/// `t* = sqrt((s + |f|+)(s - |f|-))`.
pub fn rotation_curve_distance(s: f64, f: &LeafFunction) -> Result<RotationDistance> {
    let h = hofer_norms(f)?;
    if !(s - h.minus_asym > 0.0) {
        return Err(Error::domain(format!(
            "s = {s} does not exceed the negative norm {}",
            h.minus_asym
        )));
    }
    let (up, down) = (s + h.plus_asym, s - h.minus_asym);
    Ok(RotationDistance {
        distance: 0.5 * (up / down).ln(),
        t_star: (up * down).sqrt(),
    })
}

/// The element with total Hamiltonian `e^F`; `K` between images equals
/// `max |F - G|`.
pub fn embed_into_z(f: &LeafFunction) -> Result<QuantElement> {
    require_normalized(f)?;
    let exp = LeafFunction::new(
        f.grid_shape.clone(),
        f.values.iter().map(|v| v.exp()).collect(),
    )?;
    let shift = exp.mean();
    let func = LeafFunction {
        grid_shape: exp.grid_shape.clone(),
        values: exp.values.iter().map(|v| v - shift).collect(),
        normalized: true,
    };
    Ok(QuantElement { shift, func })
}

/// `int_0^1 dt int_M F_t`, the time integral (trapezoid) of the
/// volume-weighted means. Weights are per grid point and need not sum to 1;
/// `None` means uniform volume.
pub fn calabi_weinstein(
    times: &[f64],
    slices: &[LeafFunction],
    weights: Option<&[f64]>,
) -> Result<f64> {
    if times.len() != slices.len() || times.is_empty() {
        return Err(Error::invalid(format!(
            "{} times but {} slices",
            times.len(),
            slices.len()
        )));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("times are not strictly increasing"));
    }
    for s in &slices[1..] {
        check_shapes(&slices[0], s)?;
    }
    let means: Vec<f64> = match weights {
        None => slices.iter().map(LeafFunction::mean).collect(),
        Some(w) => {
            if w.len() != slices[0].values.len() {
                return Err(Error::invalid(format!(
                    "{} weights for {} grid points",
                    w.len(),
                    slices[0].values.len()
                )));
            }
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::invalid("weights must be finite and non-negative"));
            }
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                return Err(Error::invalid("weights sum to zero"));
            }
            slices
                .iter()
                .map(|s| s.values.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / total)
                .collect()
        }
    };
    if times.len() == 1 {
        return Ok(means[0]);
    }
    Ok(times
        .windows(2)
        .zip(means.windows(2))
        .map(|(t, m)| 0.5 * (t[1] - t[0]) * (m[0] + m[1]))
        .sum())
}
