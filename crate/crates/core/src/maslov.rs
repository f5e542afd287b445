//! The Maslov quasimorphism on paths in `Sp(2n, R)`.
//!
//! Convention: `mu` is measured in radians, as the total change of
//! `arg det u(t)` where `u(t)` is the complex form of the unitary polar
//! factor of `X(t)`. One full turn of the determinant counts `2 pi`;
//! [`MaslovResult::turns`] gives the value in turns.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix_core::{
    self, isotropic_frame, j_mul_vec, max_abs, polar_decompose, real_to_complex, CMat, RMat,
};
use crate::path_calculus::{self, SampledPath, MAX_SAMPLES};
use crate::sampling;

const TWO_PI: f64 = 2.0 * PI;

/// Largest accepted argument increment between consecutive samples; larger
/// steps trigger refinement.
pub const MAX_ARG_STEP: f64 = PI / 2.0;

#[derive(Debug, Clone, Serialize)]
pub struct MaslovResult {
    /// Total argument change in radians.
    pub value: f64,
    pub per_step_increments: Vec<f64>,
    pub max_step: f64,
    /// Samples of the (possibly refined) grid the value was computed on.
    pub samples: usize,
}

impl MaslovResult {
    pub fn turns(&self) -> f64 {
        self.value / TWO_PI
    }
}

/// A symplectic matrix commuting with `J` is orthogonal, hence its own
/// unitary factor. Checked blockwise without allocating.
fn commutes_with_j(m: &RMat, tol: f64) -> bool {
    let n = m.nrows() / 2;
    for r in 0..n {
        for c in 0..n {
            if (m[(r, c)] - m[(r + n, c + n)]).abs() > tol
                || (m[(r, c + n)] + m[(r + n, c)]).abs() > tol
            {
                return false;
            }
        }
    }
    true
}

/// `det` of the complex form of the unitary polar factor.
fn unitary_det(m: &RMat, index: usize) -> Result<Complex64> {
    let unitary = if commutes_with_j(m, 1e-12) {
        m.clone()
    } else {
        polar_decompose(m, 1e-6)
            .map_err(|e| Error::numerical(index, format!("polar decomposition failed: {e}")))?
            .unitary_part
    };
    let u = real_to_complex(&unitary)?;
    let det = if u.nrows() == 1 {
        u[(0, 0)]
    } else {
        u.determinant()
    };
    if !(det.norm() > 0.5) {
        return Err(Error::numerical(
            index,
            "unitary factor has degenerate determinant",
        ));
    }
    Ok(det)
}

fn arg_increments(path: &SampledPath) -> Result<Vec<f64>> {
    let dets = path
        .matrices()
        .iter()
        .enumerate()
        .map(|(k, m)| unitary_det(m, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(dets
        .windows(2)
        .map(|w| (w[1] * w[0].conj()).arg())
        .collect())
}

pub fn maslov_index(x: &SampledPath) -> Result<MaslovResult> {
    let mut path = x.clone();
    loop {
        let incs = arg_increments(&path)?;
        let max_step = incs.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
        if max_step < MAX_ARG_STEP {
            return Ok(MaslovResult {
                value: incs.iter().sum(),
                per_step_increments: incs,
                max_step,
                samples: path.len(),
            });
        }
        if 2 * path.len() - 1 > MAX_SAMPLES {
            return Err(Error::Resolution(format!(
                "argument step {max_step:.3} still too large at {} samples",
                path.len()
            )));
        }
        path = path.refine()?;
    }
}

/// `mu` from the integral of the trace of the complex generator, valid for
/// unitary paths. The complex trace is half the trace of the real `H`.
pub fn maslov_via_trace(x: &SampledPath) -> Result<f64> {
    if !x.is_unitary(1e-8) {
        return Err(Error::invalid("trace formula needs a path in U(n)"));
    }
    let track = path_calculus::extract_hamiltonian(x)?;
    let t = &track.times;
    let integrand: Vec<f64> = track.hams.iter().map(|h| 0.5 * h.trace()).collect();
    Ok(t.windows(2)
        .zip(integrand.windows(2))
        .map(|(tw, fw)| 0.5 * (tw[1] - tw[0]) * (fw[0] + fw[1]))
        .sum())
}

/// `mu(X^k) / k` for `k = 1..=k_max`.
pub fn homogenize(x: &SampledPath, k_max: u32) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    (1..=k_max)
        .map(|k| Ok(maslov_index(&x.power(k as i64)?)?.value / k as f64))
        .collect()
}

/// `|mu(XY) - mu(X) - mu(Y)|`.
pub fn defect_of_pair(x: &SampledPath, y: &SampledPath) -> Result<f64> {
    let xy = path_calculus::compose(x, y)?;
    Ok((maslov_index(&xy)?.value - maslov_index(x)?.value - maslov_index(y)?.value).abs())
}

/// Random path for defect sampling: `exp(t J S_1) exp(t J S_2)` with a
/// random scale, so both nearly unitary and strongly hyperbolic pairs occur.
pub fn defect_sample_path<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SampledPath {
    let scale = rng.random_range(0.2..2.0);
    sampling::random_symplectic_path(rng, n, scale, path_calculus::DEFAULT_SAMPLES)
}

/// Largest `|mu(XY) - mu(X) - mu(Y)|` over `num_pairs` random pairs of paths
/// in `Sp(dim)`. Pair `i` is drawn from the stream `(seed, i)`.
pub fn quasimorphism_defect_sample(num_pairs: usize, dim: usize, seed: u64) -> Result<f64> {
    if num_pairs == 0 {
        return Err(Error::invalid("num_pairs must be at least 1"));
    }
    if dim < 2 || !dim.is_multiple_of(2) {
        return Err(Error::invalid(format!("dimension {dim} is not even")));
    }
    let mut worst = 0.0_f64;
    for i in 0..num_pairs {
        let mut rng = sampling::stream(seed, i as u64);
        let x = defect_sample_path(&mut rng, dim / 2);
        let y = defect_sample_path(&mut rng, dim / 2);
        worst = worst.max(defect_of_pair(&x, &y)?);
    }
    Ok(worst)
}

/// Sampled defect times the safety factor 2.
pub fn empirical_defect_constant(num_pairs: usize, dim: usize, seed: u64) -> Result<f64> {
    Ok(2.0 * quasimorphism_defect_sample(num_pairs, dim, seed)?)
}

/// Representative of an angle modulo `2 pi` in `(0, 2 pi]` (`upper`) or in
/// `[0, 2 pi)`. Values within `snap` of a multiple of `2 pi` are snapped.
pub fn reduce_angle(phi: f64, upper: bool, snap: f64) -> f64 {
    let r = phi.rem_euclid(TWO_PI);
    let on_boundary = r <= snap || TWO_PI - r <= snap;
    match (on_boundary, upper) {
        (true, true) => TWO_PI,
        (true, false) => 0.0,
        (false, _) => r,
    }
}

/// Adds `k` multiples of `2 pi`: write `k = l n + m`, add `2 pi l` to every
/// value and one more `2 pi` to the `m` smallest. Ties keep input order.
pub fn distribute_turns(reduced: &[f64], k: u64) -> Vec<f64> {
    let n = reduced.len() as u64;
    let (l, m) = (k / n, k % n);
    let mut order: Vec<usize> = (0..reduced.len()).collect();
    order.sort_by(|&a, &b| reduced[a].total_cmp(&reduced[b]));
    let mut out: Vec<f64> = reduced.iter().map(|&v| v + TWO_PI * l as f64).collect();
    for &i in order.iter().take(m as usize) {
        out[i] += TWO_PI;
    }
    out
}

#[derive(Debug, Clone)]
pub struct RedistributedSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, matching `eigenvalues`.
    pub basis: CMat,
}

impl RedistributedSpectrum {
    pub fn reassemble(&self) -> CMat {
        let d = CMat::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        &self.basis * d * self.basis.adjoint()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn max_gap(&self) -> f64 {
        let max = self
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Non-negative Hermitian `A'` with `e^{iA'} = e^{iA}` and `tr A' = target_mu`,
/// eigenvalues no more than `2 pi n` apart.
pub fn redistribute_eigenvalues(a: &CMat, target_mu: f64) -> Result<RedistributedSpectrum> {
    let spec = matrix_core::hermitian_eig(a, matrix_core::DEFAULT_TOL)?;
    let n = spec.eigenvalues.len();
    if target_mu < TWO_PI * n as f64 {
        return Err(Error::domain(format!(
            "target {target_mu} is below 2 pi n = {}",
            TWO_PI * n as f64
        )));
    }
    let reduced: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&l| reduce_angle(l, true, 1e-12 * l.abs().max(1.0)))
        .collect();
    let k_real = (target_mu - reduced.iter().sum::<f64>()) / TWO_PI;
    let k = k_real.round();
    if (k_real - k).abs() > 1e-6 {
        return Err(Error::domain(format!(
            "target {target_mu} is not congruent to the eigenvalue sum modulo 2 pi"
        )));
    }
    Ok(RedistributedSpectrum {
        eigenvalues: distribute_turns(&reduced, k as u64),
        basis: spec.eigenvectors,
    })
}

fn check_positive_symplectic(p: &RMat) -> Result<usize> {
    let n = matrix_core::half_dim(p)?;
    let scale = max_abs(p).max(1.0);
    if max_abs(&(p - p.transpose())) > 1e-9 * scale {
        return Err(Error::invalid("target is not symmetric"));
    }
    if !matrix_core::is_symplectic(p, 1e-9 * scale * scale)? {
        return Err(Error::invalid("target is not symplectic"));
    }
    Ok(n)
}

/// Positive path in `Sp(2)` from `I` to `diag(lambda, 1/lambda)`:
/// `U(t) F(t) U(t)` with `U` the rotation by `2 pi t` and
/// `F = diag(f, 1/f)`, `f(t) = tan(pi/4 + a t)`, `a = atan(lambda) - pi/4`.
pub fn positive_block(lambda: f64, t: f64) -> RMat {
    let a = lambda.atan() - PI / 4.0;
    let f = (PI / 4.0 + a * t).tan();
    let (s, c) = (TWO_PI * t).sin_cos();
    let u = RMat::from_row_slice(2, 2, &[c, -s, s, c]);
    let ft = RMat::from_row_slice(2, 2, &[f, 0.0, 0.0, 1.0 / f]);
    &u * ft * &u
}

/// A positive path from the identity to a symmetric positive definite
/// symplectic `P`, with Maslov index `4 pi n`.
pub fn positive_path_to(p: &RMat, samples: usize) -> Result<SampledPath> {
    let n = check_positive_symplectic(p)?;
    let eig = nalgebra::SymmetricEigen::new((p + p.transpose()) * 0.5);
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::invalid("target is not positive definite"));
    }
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let candidates: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let frame = isotropic_frame(&candidates, n);
    let mut o = RMat::zeros(2 * n, 2 * n);
    for c in 0..n {
        let v = frame.column(c).into_owned();
        o.set_column(c + n, &j_mul_vec(&v));
        o.set_column(c, &v);
    }
    let lambdas: Vec<f64> = (0..n)
        .map(|i| (o.column(i).transpose() * p * o.column(i))[(0, 0)])
        .collect();
    let ot = o.transpose();
    SampledPath::from_fn(2 * n, samples, move |t| {
        let mut d = RMat::zeros(2 * n, 2 * n);
        for (i, &l) in lambdas.iter().enumerate() {
            let b = positive_block(l, t);
            d[(i, i)] = b[(0, 0)];
            d[(i, i + n)] = b[(0, 1)];
            d[(i + n, i)] = b[(1, 0)];
            d[(i + n, i + n)] = b[(1, 1)];
        }
        &o * d * &ot
    })
}

/// `mu(Y) >= 6 pi n + C`: a sufficient condition for `Y` to be positive.
/// `false` means inconclusive.
pub fn positivity_criterion(y: &SampledPath, c_emp: f64) -> Result<bool> {
    if !(c_emp >= 0.0) {
        return Err(Error::invalid("defect constant must be non-negative"));
    }
    let n = y.half_dim() as f64;
    Ok(maslov_index(y)?.value >= 3.0 * TWO_PI * n + c_emp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::{exp_i_hermitian, max_abs_c, symplectic_inverse};
    use crate::path_calculus::{classify_cone, compose, embed_block, invert, ConeStatus};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rotation_loops() {
        for k in 1..=5 {
            let x = SampledPath::rotation(k as f64, 1024);
            let m = maslov_index(&x).unwrap();
            assert!((m.value - TWO_PI * k as f64).abs() < 1e-8);
            assert!((m.turns() - k as f64).abs() < 1e-9);
        }
        let id = SampledPath::constant_identity(4, 16);
        assert_eq!(maslov_index(&id).unwrap().value, 0.0);
    }

    #[test]
    fn refines_coarse_grids() {
        let x = SampledPath::rotation(10.0, 8);
        let m = maslov_index(&x).unwrap();
        assert!((m.value - 20.0 * PI).abs() < 1e-8);
        assert!(m.samples > 8);
        assert!(m.max_step < MAX_ARG_STEP);
        let sum: f64 = m.per_step_increments.iter().sum();
        assert_eq!(sum, m.value);
    }

    #[test]
    fn unitary_exponential_has_trace_index() {
        let a = CMat::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(3.0, 0.0),
        ]));
        let x = path_calculus::unitary_exponential_path(&a, 257).unwrap();
        assert!((maslov_index(&x).unwrap().value - 4.0).abs() < 1e-10);
        assert!((maslov_via_trace(&x).unwrap() - 4.0).abs() < 1e-3);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = sampling::random_hermitian(&mut rng, 3, 1.5);
        let tr = h.trace().re;
        let x = path_calculus::unitary_exponential_path(&h, 257).unwrap();
        assert!((maslov_index(&x).unwrap().value - tr).abs() < 1e-9);
    }

    #[test]
    fn trace_formula_rejects_non_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let x = sampling::random_symplectic_path(&mut rng, 1, 1.0, 64);
        assert!(matches!(maslov_via_trace(&x), Err(Error::InvalidInput(_))));
        let loop1 = SampledPath::rotation(1.0, 512);
        assert!((maslov_via_trace(&loop1).unwrap() - TWO_PI).abs() < 1e-3);
    }

    #[test]
    fn homogenize_unitary_and_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = sampling::random_unitary_path(&mut rng, 2, 0.8, 256);
        let mu = maslov_index(&x).unwrap().value;
        for v in homogenize(&x, 6).unwrap() {
            assert!((v - mu).abs() < 1e-8);
        }
        for v in homogenize(&SampledPath::rotation(1.0, 256), 4).unwrap() {
            assert!((v - TWO_PI).abs() < 1e-8);
        }
    }

    #[test]
    fn defect_on_commuting_and_loops() {
        let x = sampling::diagonal_unitary_path(&[3.0, 5.0], &[1.0, -2.0], 256);
        let y = sampling::diagonal_unitary_path(&[7.0, 1.5], &[-3.0, 0.5], 256);
        assert!(defect_of_pair(&x, &y).unwrap() < 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let w = sampling::random_symplectic(&mut rng, 1, 0.7);
        let l1 = SampledPath::rotation(2.0, 256).conjugate(&w).unwrap();
        let l2 = SampledPath::rotation(-1.0, 256);
        assert!(defect_of_pair(&l1, &l2).unwrap() < 1e-6);
        let c = quasimorphism_defect_sample(4, 2, 5).unwrap();
        assert!(c.is_finite() && c >= 0.0);
        assert_eq!(c, quasimorphism_defect_sample(4, 2, 5).unwrap());
    }

    #[test]
    fn redistribution_examples() {
        let diag = |v: &[f64]| {
            CMat::from_diagonal(&DVector::from_iterator(
                v.len(),
                v.iter().map(|&x| Complex64::new(x, 0.0)),
            ))
        };
        let r = redistribute_eigenvalues(&diag(&[5.0 * PI, -PI]), 4.0 * PI).unwrap();
        let mut ev = r.eigenvalues.clone();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - PI).abs() < 1e-12 && (ev[1] - 3.0 * PI).abs() < 1e-12);
        let before = exp_i_hermitian(&diag(&[5.0 * PI, -PI]), 1e-9).unwrap();
        let after = exp_i_hermitian(&r.reassemble(), 1e-9).unwrap();
        assert!(max_abs_c(&(before - after)) < 1e-12);

        let r = redistribute_eigenvalues(&diag(&[TWO_PI]), TWO_PI).unwrap();
        assert!((r.eigenvalues[0] - TWO_PI).abs() < 1e-15);

        let r = redistribute_eigenvalues(&diag(&[0.0, 0.0]), 8.0 * PI).unwrap();
        assert!(r.eigenvalues.iter().all(|&l| (l - 4.0 * PI).abs() < 1e-12));

        assert!(matches!(
            redistribute_eigenvalues(&diag(&[1.0, 1.0]), 3.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            redistribute_eigenvalues(&diag(&[1.0, 1.0]), 4.0 * PI + 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn synthesized_path_examples() {
        let p = RMat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let x = positive_path_to(&p, 256).unwrap();
        assert!(max_abs(&(x.endpoint() - &p)) < 1e-12);
        assert!((maslov_index(&x).unwrap().value - 4.0 * PI).abs() < 1e-8);
        assert_eq!(
            classify_cone(&x, 1e-6).unwrap().status,
            ConeStatus::Dominant
        );

        let x = positive_path_to(&RMat::identity(2, 2), 256).unwrap();
        let rot = SampledPath::rotation(2.0, 256);
        for (a, b) in x.matrices().iter().zip(rot.matrices()) {
            assert!(max_abs(&(a - b)) < 1e-12);
        }

        assert!(positive_path_to(&RMat::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5]), 64).is_err());
        assert!(
            positive_path_to(&RMat::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, -0.5]), 64).is_err()
        );
    }

    #[test]
    fn synthesized_path_non_diagonal_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let w = sampling::random_symplectic(&mut rng, 2, 0.6);
        let pf = matrix_core::polar_decompose(&w, 1e-9).unwrap();
        let x = positive_path_to(&pf.positive_part, 512).unwrap();
        assert!(max_abs(&(x.endpoint() - &pf.positive_part)) < 1e-8);
        assert!((maslov_index(&x).unwrap().value - 8.0 * PI).abs() < 1e-6);
        assert_eq!(
            classify_cone(&x, 1e-6).unwrap().status,
            ConeStatus::Dominant
        );
    }

    #[test]
    fn criterion_examples() {
        assert!(positivity_criterion(&SampledPath::rotation(4.0, 256), 1.0).unwrap());
        assert!(!positivity_criterion(&SampledPath::constant_identity(2, 16), 0.0).unwrap());
        let p = RMat::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0 / 3.0]);
        let x = positive_path_to(&p, 256).unwrap();
        let y = x.power(2).unwrap();
        assert!(positivity_criterion(&y, 0.5).unwrap());
        assert_eq!(
            classify_cone(&y, 1e-6).unwrap().status,
            ConeStatus::Dominant
        );
    }

    fn positive_loop(seed: u64) -> SampledPath {
        // W exp(t J S) W^{-1} over a full period, with S positive definite
        // having commensurable symplectic frequencies.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k1 = rng.random_range(1..4) as f64;
        let k2 = rng.random_range(1..4) as f64;
        let w = sampling::random_symplectic(&mut rng, 2, 0.4);
        let s = RMat::from_diagonal(&DVector::from_vec(vec![k1, k2, k1, k2])) * TWO_PI;
        let g = matrix_core::standard_j(2) * s;
        SampledPath::exponential(g, 512)
            .unwrap()
            .conjugate(&w)
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn positive_loops_have_positive_index(seed in 0u64..10_000) {
            let x = positive_loop(seed);
            prop_assert!(max_abs(&(x.endpoint() - RMat::identity(4, 4))) < 1e-8);
            prop_assert_eq!(classify_cone(&x, 1e-6).unwrap().status, ConeStatus::Dominant);
            prop_assert!(maslov_index(&x).unwrap().value > 0.0);
        }

        #[test]
        fn index_is_antisymmetric(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = sampling::random_symplectic_path(&mut rng, 2, 0.8, 128);
            let a = maslov_index(&x).unwrap().value;
            let b = maslov_index(&invert(&x).unwrap()).unwrap().value;
            prop_assert!((a + b).abs() < 1e-8);
        }

        #[test]
        fn index_is_embedding_invariant(seed in 0u64..10_000, i in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = sampling::random_symplectic_path(&mut rng, 1, 1.0, 128);
            let a = maslov_index(&x).unwrap().value;
            let b = maslov_index(&embed_block(&x, i, 3).unwrap()).unwrap().value;
            prop_assert!((a - b).abs() < 1e-8);
        }

        #[test]
        fn loops_homogenize_to_constants(k in -3i32..4, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = sampling::random_symplectic(&mut rng, 1, 0.5);
            let x = SampledPath::rotation(k as f64, 256).conjugate(&w).unwrap();
            for v in homogenize(&x, 4).unwrap() {
                prop_assert!((v - TWO_PI * k as f64).abs() < 1e-8);
            }
        }

        #[test]
        fn redistribution_invariants(seed in 0u64..10_000, n in 2usize..4, extra in 0u32..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = sampling::random_hermitian(&mut rng, n, 4.0);
            let end = exp_i_hermitian(&a, 1e-9).unwrap();
            let reduced: f64 = matrix_core::hermitian_eig(&a, 1e-9).unwrap().eigenvalues
                .iter().map(|&l| reduce_angle(l, true, 1e-12)).sum();
            let mut target = reduced;
            while target < TWO_PI * n as f64 {
                target += TWO_PI;
            }
            target += TWO_PI * extra as f64;
            let r = redistribute_eigenvalues(&a, target).unwrap();
            prop_assert!((r.trace() - target).abs() < 1e-9);
            prop_assert!(r.eigenvalues.iter().all(|&l| l >= 0.0));
            prop_assert!(r.max_gap() <= TWO_PI * n as f64 + 1e-9);
            let after = exp_i_hermitian(&r.reassemble(), 1e-9).unwrap();
            prop_assert!(max_abs_c(&(after - end)) < 1e-8);
        }

        #[test]
        fn product_of_semipositive_is_semipositive(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = sampling::random_positive_diagonal(&mut rng, 1, 1.0);
            let x = positive_path_to(&p, 256).unwrap();
            let w = sampling::random_symplectic(&mut rng, 1, 0.5);
            let y = SampledPath::rotation(1.0, 256).conjugate(&w).unwrap();
            let xy = compose(&x, &y).unwrap();
            prop_assert!(classify_cone(&y, 1e-6).unwrap().status.in_cone());
            prop_assert!(classify_cone(&xy, 1e-6).unwrap().status.in_cone());
        }

        #[test]
        fn conjugation_preserves_order_verdicts(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = sampling::random_positive_diagonal(&mut rng, 1, 0.8);
            let x = positive_path_to(&p, 256).unwrap();
            let w = sampling::random_symplectic(&mut rng, 1, 0.4);
            let cx = x.conjugate(&w).unwrap();
            let a = classify_cone(&x, 1e-6).unwrap().status;
            let b = classify_cone(&cx, 1e-6).unwrap().status;
            prop_assert_eq!(a, b);
            let winv = symplectic_inverse(&w);
            prop_assert!(max_abs(&(&w * &winv - RMat::identity(2, 2))) < 1e-10);
        }
    }
}
