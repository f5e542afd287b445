//! Relative growth, the pseudo-distance `K` and the coordinate on `Z` for
//! dominant paths in the universal cover of `Sp(2n, R)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maslov::{homogenize, maslov_index};
use crate::matrix_core::RMat;
use crate::path_calculus::{
    derived_samples, order_certified, order_verdict, pow_symplectic, uniform_grid, ConeStatus,
    PathSource, SampledPath,
};

/// `n` values used for growth sequences by default.
pub const DEFAULT_NS: [u64; 7] = [1, 2, 4, 8, 16, 32, 64];

/// A point estimate with an enclosing interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn exact(v: f64) -> Self {
        Interval {
            estimate: v,
            lo: v,
            hi: v,
        }
    }

    pub fn around(v: f64, radius: f64) -> Self {
        Interval {
            estimate: v,
            lo: v - radius,
            hi: v + radius,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// `self / den` for a strictly positive denominator.
    pub fn ratio(&self, den: &Interval) -> Result<Interval> {
        if !(den.lo > 0.0) {
            return Err(Error::domain(
                "denominator interval is not strictly positive",
            ));
        }
        let c = [
            self.lo / den.lo,
            self.lo / den.hi,
            self.hi / den.lo,
            self.hi / den.hi,
        ];
        Ok(Interval {
            estimate: self.estimate / den.estimate,
            lo: c.iter().cloned().fold(f64::INFINITY, f64::min),
            hi: c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    pub fn ln(&self) -> Result<Interval> {
        if !(self.lo > 0.0) {
            return Err(Error::domain(
                "logarithm of an interval that is not strictly positive",
            ));
        }
        Ok(Interval {
            estimate: self.estimate.ln(),
            lo: self.lo.ln(),
            hi: self.hi.ln(),
        })
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            estimate: self.estimate.max(other.estimate),
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// `|self - other|`.
    pub fn abs_diff(&self, other: &Interval) -> Interval {
        let lo = self.lo - other.hi;
        let hi = self.hi - other.lo;
        let estimate = (self.estimate - other.estimate).abs();
        if lo >= 0.0 {
            Interval { estimate, lo, hi }
        } else if hi <= 0.0 {
            Interval {
                estimate,
                lo: -hi,
                hi: -lo,
            }
        } else {
            Interval {
                estimate,
                lo: 0.0,
                hi: hi.max(-lo),
            }
        }
    }
}

fn require_dominant(x: &SampledPath, tol: f64, what: &str) -> Result<()> {
    let v = order_verdict(x, tol)?;
    if v.status != ConeStatus::Dominant {
        return Err(Error::domain(format!(
            "{what} is not certified dominant (status {:?}, min eigenvalue {:.3e})",
            v.status, v.min_eigenvalue_over_path
        )));
    }
    Ok(())
}

/// Smallest `p` in `[-p_max, p_max]` for which `X^p >= Y^n` is certified.
///
/// `None` when no `p` in range is certified. Since certification is
/// conservative the result is an upper bound for `gamma_n`.
pub fn gamma_n_bruteforce(
    x: &SampledPath,
    y: &SampledPath,
    n: u64,
    p_max: u64,
    tol: f64,
) -> Result<Option<i64>> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    require_dominant(x, tol, "X")?;
    if x.dim() != y.dim() {
        return Err(Error::invalid("X and Y have different dimensions"));
    }
    let (n, p_max) = (n as i64, p_max as i64);
    // One grid for the whole scan, fine enough for the largest |p|.
    let rate = p_max as f64 * x.rate() + n as f64 * y.rate();
    let times = uniform_grid(derived_samples(x.len().max(y.len()), rate));
    let xs: Vec<RMat> = times.iter().map(|&t| x.eval(t)).collect();
    let ws: Vec<RMat> = times
        .iter()
        .map(|&t| pow_symplectic(&y.eval(t), -n))
        .collect();
    // Successive powers by one multiplication each; only for unitary X,
    // where the products stay well conditioned.
    let incremental = x.is_unitary(1e-9);
    let mut xp: Vec<RMat> = xs.iter().map(|m| pow_symplectic(m, -p_max)).collect();
    for p in -p_max..=p_max {
        if !incremental {
            xp = xs.iter().map(|m| pow_symplectic(m, p)).collect();
        }
        let mats: Vec<RMat> = xp.iter().zip(&ws).map(|(a, w)| a * w).collect();
        let (sx, sy) = (x.source().clone(), y.source().clone());
        let source: PathSource =
            Arc::new(move |t| pow_symplectic(&sx(t), p) * pow_symplectic(&sy(t), -n));
        let z = SampledPath::from_parts(x.dim(), times.clone(), mats, source);
        if order_certified(&z, tol)? {
            return Ok(Some(p));
        }
        if incremental {
            for (a, m) in xp.iter_mut().zip(&xs) {
                *a = &*a * m;
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthEstimate {
    pub gamma_n_sequence: Vec<(u64, Option<i64>)>,
    /// `gamma_n / n` at the largest `n` with a certified value.
    pub limit_estimate: Option<f64>,
    pub closed_form: Option<f64>,
}

/// Brute-force `gamma_n` for each `n` in `ns`, searching
/// `|p| <= ceil(p_max_factor * n)`.
pub fn growth_estimate(
    x: &SampledPath,
    y: &SampledPath,
    ns: &[u64],
    p_max_factor: f64,
    tol: f64,
) -> Result<GrowthEstimate> {
    let mut seq = Vec::with_capacity(ns.len());
    for &n in ns {
        let p_max = (p_max_factor * n as f64).ceil() as u64;
        seq.push((n, gamma_n_bruteforce(x, y, n, p_max, tol)?));
    }
    let limit_estimate = seq
        .iter()
        .rev()
        .find_map(|&(n, g)| g.map(|g| g as f64 / n as f64));
    let closed_form = if x.is_unitary(1e-8) && y.is_unitary(1e-8) {
        gamma_closed_unitary(x, y, tol).ok()
    } else {
        None
    };
    Ok(GrowthEstimate {
        gamma_n_sequence: seq,
        limit_estimate,
        closed_form,
    })
}

/// `gamma(X, Y) = mu(Y) / mu(X)` for unitary dominants.
pub fn gamma_closed_unitary(x: &SampledPath, y: &SampledPath, tol: f64) -> Result<f64> {
    for (p, name) in [(x, "X"), (y, "Y")] {
        if !p.is_unitary(1e-8) {
            return Err(Error::domain(format!("{name} is not a unitary path")));
        }
        require_dominant(p, tol, name)?;
    }
    let mx = maslov_index(x)?.value;
    if !(mx > 0.0) {
        return Err(Error::domain("mu(X) is not positive"));
    }
    Ok(maslov_index(y)?.value / mx)
}

/// Homogenized Maslov index `mu~(X)` as `mu(X^k)/k` at `k = k_max`, with
/// radius `c_emp / k_max`. Exact for unitary paths, where `mu` is already
/// homogeneous.
pub fn homogenized_index(x: &SampledPath, k_max: u32, c_emp: f64) -> Result<Interval> {
    if x.is_unitary(1e-9) {
        return Ok(Interval::exact(maslov_index(x)?.value));
    }
    let seq = homogenize(x, k_max)?;
    let last = *seq.last().expect("k_max >= 1");
    Ok(Interval::around(last, c_emp / k_max as f64))
}

/// `gamma(X, Y) = mu~(Y) / mu~(X)` for dominants.
pub fn gamma_closed_symplectic(
    x: &SampledPath,
    y: &SampledPath,
    k_max: u32,
    c_emp: f64,
    tol: f64,
) -> Result<Interval> {
    require_dominant(x, tol, "X")?;
    require_dominant(y, tol, "Y")?;
    let mx = homogenized_index(x, k_max, c_emp)?;
    let my = homogenized_index(y, k_max, c_emp)?;
    my.ratio(&mx)
}

/// `K(X, Y) = max(log gamma(X, Y), log gamma(Y, X))`.
pub fn pseudo_distance_k(
    x: &SampledPath,
    y: &SampledPath,
    k_max: u32,
    c_emp: f64,
    tol: f64,
) -> Result<Interval> {
    let xy = gamma_closed_symplectic(x, y, k_max, c_emp, tol)?.ln()?;
    let yx = gamma_closed_symplectic(y, x, k_max, c_emp, tol)?.ln()?;
    Ok(xy.max(&yx))
}

#[derive(Debug, Clone)]
pub struct ZPoint {
    pub representative: SampledPath,
    /// `log mu~(X)`.
    pub coordinate: Interval,
}

pub fn z_coordinate(x: &SampledPath, k_max: u32, c_emp: f64, tol: f64) -> Result<ZPoint> {
    require_dominant(x, tol, "X")?;
    let mu = homogenized_index(x, k_max, c_emp)?;
    if !(mu.lo > 0.0) {
        return Err(Error::domain(format!(
            "homogenized index {:.6} is not certified positive",
            mu.estimate
        )));
    }
    Ok(ZPoint {
        representative: x.clone(),
        coordinate: mu.ln()?,
    })
}
