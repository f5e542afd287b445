//! Seeded random matrices and paths for property tests, defect sampling and
//! the experiment runners.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix_core::{complex_to_real, expm_real, j_mul, CMat, RMat};
use crate::path_calculus::SampledPath;

/// Independent deterministic stream for item `index` of a run keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> RMat {
    let g = RMat::from_fn(dim, dim, |_, _| normal(rng) * scale);
    (&g + g.transpose()) * 0.5
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        Complex64::new(normal(rng), normal(rng)) * scale
    });
    (&g + g.adjoint()).map(|z| z * 0.5)
}

/// Haar-distributed unitary matrix (QR of a complex Gaussian, phases fixed).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| Complex64::new(normal(rng), normal(rng)));
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let phases = DVector::from_iterator(
        n,
        (0..n).map(|k| {
            let d = r[(k, k)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        }),
    );
    q * CMat::from_diagonal(&phases)
}

/// `J S` with `S` random symmetric: an element of the Lie algebra sp(2n).
pub fn random_hamiltonian_generator<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> RMat {
    j_mul(&random_symmetric(rng, 2 * n, scale))
}

/// Product of two exponentials of random Hamiltonian generators.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> RMat {
    let a = expm_real(&random_hamiltonian_generator(rng, n, scale));
    let b = expm_real(&random_hamiltonian_generator(rng, n, scale));
    a * b
}

/// Random positive diagonal symplectic matrix `diag(l_1..l_n, 1/l_1..1/l_n)`
/// with `log l_i` uniform in `[-spread, spread]`.
pub fn random_positive_diagonal<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> RMat {
    let mut d = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        let l = rng.random_range(-spread..=spread).exp();
        d[(i, i)] = l;
        d[(i + n, i + n)] = 1.0 / l;
    }
    d
}

/// Random path `t -> exp(t J S_1) exp(t J S_2)` in `Sp(2n)`.
pub fn random_symplectic_path<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    scale: f64,
    samples: usize,
) -> SampledPath {
    let a = random_hamiltonian_generator(rng, n, scale);
    let b = random_hamiltonian_generator(rng, n, scale);
    SampledPath::from_fn(2 * n, samples, move |t| {
        expm_real(&(&a * t)) * expm_real(&(&b * t))
    })
    .expect("exponential paths are valid")
}

/// Random unitary path `t -> W exp(i t A + i t^2 B) W^H` realified.
///
/// `A`, `B` are random Hermitian with entries of size `scale`; the path
/// starts at the identity and its generator varies in time.
pub fn random_unitary_path<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    scale: f64,
    samples: usize,
) -> SampledPath {
    let a = random_hermitian(rng, n, scale);
    let b = random_hermitian(rng, n, scale * 0.5);
    let i = Complex64::new(0.0, 1.0);
    SampledPath::from_fn(2 * n, samples, move |t| {
        let gen = (&a * Complex64::new(t, 0.0) + &b * Complex64::new(t * t, 0.0)).map(|z| z * i);
        complex_to_real(&gen.exp())
    })
    .expect("unitary paths are valid")
}

/// Diagonal unitary path with strictly increasing angle functions
/// `theta_j(t) = a_j t + c_j sin(2 pi t) / (2 pi)`, `|c_j| < a_j`.
///
/// Returned together with the total angles `theta_j(1) = a_j`.
pub fn diagonal_unitary_path(rates: &[f64], wiggles: &[f64], samples: usize) -> SampledPath {
    let rates = rates.to_vec();
    let wiggles = wiggles.to_vec();
    let n = rates.len();
    SampledPath::from_fn(2 * n, samples, move |t| {
        let diag = DVector::from_iterator(
            n,
            rates.iter().zip(&wiggles).map(|(&a, &c)| {
                Complex64::from_polar(1.0, a * t + c * (2.0 * PI * t).sin() / (2.0 * PI))
            }),
        );
        complex_to_real(&CMat::from_diagonal(&diag))
    })
    .expect("diagonal unitary paths are valid")
}

/// Random trigonometric polynomial on the torus grid, mean removed.
///
/// Sum of `modes` terms `c cos(2 pi <k, p> + phase)` with integer
/// frequencies `|k_i| <= 4` and Gaussian amplitudes of size `scale`.
pub fn random_leaf_function<R: Rng + ?Sized>(
    rng: &mut R,
    grid_shape: &[usize],
    modes: usize,
    scale: f64,
) -> crate::prequantization::LeafFunction {
    let terms: Vec<(Vec<f64>, f64, f64)> = (0..modes)
        .map(|_| {
            let k = grid_shape
                .iter()
                .map(|_| rng.random_range(-4i32..=4) as f64)
                .collect();
            (k, normal(rng) * scale, rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    crate::prequantization::LeafFunction::from_fn(grid_shape, |p| {
        terms
            .iter()
            .map(|(k, c, phase)| {
                let arg: f64 = k.iter().zip(p).map(|(ki, pi)| ki * pi).sum();
                c * (2.0 * PI * arg + phase).cos()
            })
            .sum()
    })
    .expect("grid shape is valid")
    .normalize()
}
