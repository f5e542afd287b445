//! Dense small-matrix kernel.
//!
//! Real symplectic matrices of size `2n x 2n` are stored as `DMatrix<f64>` in
//! the block convention `J = [[0, -I], [I, 0]]`. A complex `n x n` matrix
//! `A + iB` is identified with the real block matrix `[[A, -B], [B, A]]`;
//! under this identification `U(n)` is exactly the set of orthogonal
//! symplectic matrices, i.e. the symplectic matrices commuting with `J`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Default tolerance for structural predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest absolute entry.
pub fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

/// Returns `n` for a valid `2n x 2n` matrix with finite entries.
pub fn half_dim(a: &RMat) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    let d = a.nrows();
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "matrix dimension {d} is not a positive even number"
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    Ok(d / 2)
}

/// The standard complex structure `[[0, -I], [I, 0]]` on `R^{2n}`.
pub fn standard_j(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, i + n)] = -1.0;
        j[(i + n, i)] = 1.0;
    }
    j
}

/// Computes `J * a` without forming `J`.
pub(crate) fn j_mul(a: &RMat) -> RMat {
    let n = a.nrows() / 2;
    let mut out = RMat::zeros(a.nrows(), a.ncols());
    for c in 0..a.ncols() {
        for r in 0..n {
            out[(r, c)] = -a[(r + n, c)];
            out[(r + n, c)] = a[(r, c)];
        }
    }
    out
}

/// Computes `J * v` for a vector.
pub(crate) fn j_mul_vec(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() / 2;
    let mut out = DVector::zeros(v.len());
    for r in 0..n {
        out[r] = -v[r + n];
        out[r + n] = v[r];
    }
    out
}

/// `max |A^T J A - J|`.
pub fn symplectic_defect(a: &RMat) -> Result<f64> {
    let n = half_dim(a)?;
    let lhs = a.transpose() * j_mul(a);
    Ok(max_abs(&(lhs - standard_j(n))))
}

pub fn is_symplectic(a: &RMat, tol: f64) -> Result<bool> {
    Ok(symplectic_defect(a)? <= tol)
}

/// True when `a` is symplectic and commutes with `J`, i.e. lies in `U(n)`.
pub fn is_unitary_symplectic(a: &RMat, tol: f64) -> Result<bool> {
    let n = half_dim(a)?;
    let eye = RMat::identity(2 * n, 2 * n);
    let orth = max_abs(&(a.transpose() * a - eye));
    let comm = max_abs(&(j_mul(a) - a * standard_j(n)));
    Ok(orth <= tol && comm <= tol)
}

/// Inverse of a symplectic matrix, `A^{-1} = -J A^T J`.
///
/// Exact for symplectic input; no linear solve.
pub fn symplectic_inverse(a: &RMat) -> RMat {
    let at = a.transpose();
    -j_mul(&(at * standard_j(a.nrows() / 2)))
}

/// `A + iB  ->  [[A, -B], [B, A]]`.
pub fn complex_to_real(u: &CMat) -> RMat {
    let n = u.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = u[(r, c)];
            out[(r, c)] = z.re;
            out[(r, c + n)] = -z.im;
            out[(r + n, c)] = z.im;
            out[(r + n, c + n)] = z.re;
        }
    }
    out
}

/// Inverse of [`complex_to_real`] on matrices commuting with `J`.
///
/// Reads the upper-left block as the real part and the lower-left block as
/// the imaginary part; the other two blocks are ignored.
pub fn real_to_complex(a: &RMat) -> Result<CMat> {
    let n = half_dim(a)?;
    Ok(CMat::from_fn(n, n, |r, c| {
        Complex64::new(a[(r, c)], a[(r + n, c)])
    }))
}

/// Unitary-times-positive factorization of a symplectic matrix.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    /// Orthogonal symplectic factor.
    pub unitary_part: RMat,
    /// Symmetric positive definite symplectic factor.
    pub positive_part: RMat,
}

/// Orthonormal isotropic frame `V` (`2n x n`, `V^T V = I`, `V^T J V = 0`).
///
/// Candidates are consumed in order and Gram-Schmidt orthogonalized against
/// the span of the accepted vectors and their `J` images. Degenerate
/// candidates are skipped; standard basis vectors fill any shortfall.
pub(crate) fn isotropic_frame(candidates: &[DVector<f64>], n: usize) -> RMat {
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut spanned: Vec<DVector<f64>> = Vec::with_capacity(2 * n);

    let try_add = |v: &DVector<f64>,
                   threshold: f64,
                   frame: &mut Vec<DVector<f64>>,
                   spanned: &mut Vec<DVector<f64>>| {
        if frame.len() == n {
            return;
        }
        let mut w = v.clone();
        // two passes of classical Gram-Schmidt for stability
        for _ in 0..2 {
            for s in spanned.iter() {
                let proj = s.dot(&w);
                w.axpy(-proj, s, 1.0);
            }
        }
        let norm = w.norm();
        if norm > threshold {
            w /= norm;
            let jw = j_mul_vec(&w);
            spanned.push(w.clone());
            spanned.push(jw);
            frame.push(w);
        }
    };

    for threshold in [0.5, 1e-6] {
        for v in candidates {
            try_add(v, threshold, &mut frame, &mut spanned);
        }
    }
    for k in 0..2 * n {
        let mut e = DVector::zeros(2 * n);
        e[k] = 1.0;
        try_add(&e, 1e-6, &mut frame, &mut spanned);
    }

    let mut out = RMat::zeros(2 * n, n);
    for (c, v) in frame.iter().enumerate() {
        out.set_column(c, v);
    }
    out
}

/// Polar decomposition `A = U P` of a symplectic matrix.
///
/// Computed from the singular value decomposition. Only the `n` largest
/// right singular vectors are taken from the SVD; the remaining ones are
/// their `J` images, which is exact for symplectic input and keeps `U`
/// symplectic even when `A` is badly conditioned.
pub fn polar_decompose(a: &RMat, tol: f64) -> Result<PolarFactors> {
    let n = half_dim(a)?;
    let scale = max_abs(a).max(1.0);
    let defect = symplectic_defect(a)?;
    if defect > tol * scale * scale {
        return Err(Error::invalid(format!(
            "matrix is not symplectic (defect {defect:.3e})"
        )));
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::numerical(0, "SVD did not return singular vectors"))?;
    let sigma = &svd.singular_values;
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("matrix is singular"));
    }
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let candidates: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| v_t.row(i).transpose().into_owned())
        .collect();
    let frame = isotropic_frame(&candidates, n);

    let mut unitary = RMat::zeros(2 * n, 2 * n);
    let mut positive = RMat::zeros(2 * n, 2 * n);
    for c in 0..n {
        let v = frame.column(c).into_owned();
        let av = a * &v;
        let s = av.norm();
        if s <= f64::MIN_POSITIVE {
            return Err(Error::invalid("matrix is singular"));
        }
        let u = av / s;
        let ju = j_mul_vec(&u);
        let jv = j_mul_vec(&v);
        unitary += &u * v.transpose() + &ju * jv.transpose();
        positive += (&v * v.transpose()) * s + (&jv * jv.transpose()) / s;
    }
    Ok(PolarFactors {
        unitary_part: unitary,
        positive_part: positive,
    })
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: CMat,
}

impl HermitianSpectrum {
    /// `V diag(f(lambda)) V^H`.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> CMat {
        let v = &self.eigenvectors;
        let d = CMat::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| f(l)),
        ));
        v * d * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply(|l| Complex64::new(l, 0.0))
    }

    /// `e^{iH}` evaluated spectrally.
    pub fn exp_i(&self) -> CMat {
        self.apply(|l| Complex64::from_polar(1.0, l))
    }
}

pub fn hermitian_defect(h: &CMat) -> f64 {
    max_abs_c(&(h - h.adjoint()))
}

pub fn hermitian_eig(h: &CMat, tol: f64) -> Result<HermitianSpectrum> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::invalid(
            "Hermitian input must be a non-empty square matrix",
        ));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let defect = hermitian_defect(h);
    if defect > tol * max_abs_c(h).max(1.0) {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    let sym = (h + h.adjoint()).map(|z| z * 0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMat::zeros(h.nrows(), h.ncols());
    for (c, &i) in order.iter().enumerate() {
        eigenvectors.set_column(c, &eig.eigenvectors.column(i));
    }
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// General matrix exponential (Pade scaling and squaring).
pub fn matrix_exp(a: &CMat) -> CMat {
    a.exp()
}

/// `e^{iH}` for Hermitian `H`, through [`hermitian_eig`].
pub fn exp_i_hermitian(h: &CMat, tol: f64) -> Result<CMat> {
    Ok(hermitian_eig(h, tol)?.exp_i())
}

pub fn expm_real(a: &RMat) -> RMat {
    a.exp()
}

/// Eigendecomposition `u = V diag(e^{i phi}) V^H` of a unitary matrix.
///
/// Phases are principal values in `(-pi, pi]`, eigenvectors unitary.
pub fn unitary_eig(u: &CMat, tol: f64) -> Result<(Vec<f64>, CMat)> {
    let n = u.nrows();
    if !u.is_square() || n == 0 {
        return Err(Error::invalid(
            "unitary input must be a non-empty square matrix",
        ));
    }
    let eye = CMat::identity(n, n);
    let unitarity = max_abs_c(&(u.adjoint() * u - &eye));
    if unitarity > tol {
        return Err(Error::invalid(format!(
            "matrix is not unitary (defect {unitarity:.3e})"
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    let re_part = (u + u.adjoint()).map(|z| z * 0.5);
    let im_part = (u - u.adjoint()).map(|z| z / (i * 2.0));
    // The two Hermitian parts commute; a generic combination separates
    // eigenvalues that differ in either part.
    let mut best: Option<(f64, Vec<f64>, CMat)> = None;
    for weight in [
        0.618_033_988_749_894_9,
        std::f64::consts::SQRT_2,
        -0.377_964_473,
    ] {
        let combo = &re_part + im_part.map(|z| z * weight);
        let spec = hermitian_eig(&combo, 1e-6)?;
        let v = spec.eigenvectors;
        let d = v.adjoint() * u * &v;
        let mut off = 0.0_f64;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    off = off.max(d[(r, c)].norm());
                }
            }
        }
        let phases: Vec<f64> = (0..n).map(|k| d[(k, k)].arg()).collect();
        if best.as_ref().is_none_or(|(o, _, _)| off < *o) {
            best = Some((off, phases, v));
        }
        if off <= 1e-10 {
            break;
        }
    }
    let (off, phases, v) = best.expect("at least one attempt");
    if off > 1e-6 {
        return Err(Error::numerical(
            0,
            format!("unitary diagonalization failed (off-diagonal residual {off:.3e})"),
        ));
    }
    Ok((phases, v))
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Square roots come from the Denman-Beavers iteration; once the matrix is
/// within 0.25 of the identity the Mercator series is summed. Fails for
/// matrices with eigenvalues on the closed negative real axis.
pub fn logm(a: &RMat) -> Result<RMat> {
    let d = a.nrows();
    let eye = RMat::identity(d, d);
    let mut x = a.clone();
    let mut squarings = 0u32;
    while max_abs(&(&x - &eye)) * d as f64 > 0.25 {
        if squarings >= 40 {
            return Err(Error::numerical(0, "matrix logarithm did not converge"));
        }
        x = sqrtm_denman_beavers(&x)?;
        squarings += 1;
    }
    let e = &x - &eye;
    let mut term = e.clone();
    let mut sum = e.clone();
    for k in 2..80 {
        term = &term * &e;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let contrib = &term * (sign / k as f64);
        sum += &contrib;
        if max_abs(&contrib) < 1e-18 {
            break;
        }
    }
    Ok(sum * 2f64.powi(squarings as i32))
}

fn sqrtm_denman_beavers(a: &RMat) -> Result<RMat> {
    let d = a.nrows();
    let mut y = a.clone();
    let mut z = RMat::identity(d, d);
    for _ in 0..100 {
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::numerical(0, "singular iterate in matrix square root"))?;
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::numerical(0, "singular iterate in matrix square root"))?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = max_abs(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * max_abs(&y).max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::numerical(0, "matrix square root did not converge"))
}
