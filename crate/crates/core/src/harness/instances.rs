//! Deterministic random instances keyed by `(seed, stream, size, trial)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{ExperimentConfig, FunctionSpec};
use crate::matcore::{self, c, ComplexMatrix, C64};
use crate::symbols::GaussMatrix;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Independent generator for one work item.
pub fn rng_for(seed: u64, stream: &str, size: usize, trial: usize) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for word in [fnv1a(stream), size as u64, trial as u64] {
        h = splitmix(h ^ word);
    }
    ChaCha8Rng::seed_from_u64(h)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(gaussian(rng) * scale, gaussian(rng) * scale))
}

/// Gaussian Hermitian matrix scaled to operator norm 1.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let h = (&g + g.adjoint()) * c(0.5);
    let norm = matcore::op_norm(&h);
    if norm > 0.0 {
        h / c(norm)
    } else {
        h
    }
}

/// Gaussian matrix scaled to operator norm 1.
pub fn random_contraction(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let norm = matcore::op_norm(&g);
    g / c(norm)
}

/// Real symmetric positive semidefinite matrix `G Gᵀ / d` of the given rank.
pub fn random_gram(rng: &mut impl Rng, d: usize, rank: usize) -> nalgebra::DMatrix<f64> {
    let g = nalgebra::DMatrix::<f64>::from_fn(d, rank.max(1), |_, _| gaussian(rng));
    let scale = if rank == 0 { 0.0 } else { 1.0 / d as f64 };
    &g * g.transpose() * scale
}

/// Positive kernel with unit diagonal: a random Gram matrix of unit vectors.
pub fn random_unit_kernel(rng: &mut impl Rng, m: usize, rank: usize) -> nalgebra::DMatrix<f64> {
    let mut g = nalgebra::DMatrix::<f64>::from_fn(m, rank.max(1), |_, _| gaussian(rng));
    for mut row in g.row_iter_mut() {
        let norm = row.norm();
        row /= norm;
    }
    &g * g.transpose()
}

/// Sorted distinct points drawn uniformly from `[lo, hi]`.
pub fn random_spectrum(rng: &mut impl Rng, size: usize, lo: f64, hi: f64) -> Vec<f64> {
    loop {
        let mut s: Vec<f64> = (0..size).map(|_| rng.random_range(lo..hi)).collect();
        s.sort_by(f64::total_cmp);
        if s.windows(2).all(|w| w[1] - w[0] > 1e-4 * (hi - lo)) {
            return s;
        }
    }
}

/// Scalar test functions of one variable.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFunction {
    Abs,
    Identity,
    Zero,
    /// Continuous piecewise-linear: `value` at the first knot, slopes on the
    /// `knots.len() + 1` pieces.
    Pwl {
        knots: Vec<f64>,
        slopes: Vec<f64>,
        value: f64,
    },
    SqBump,
    Poly(Vec<f64>),
}

/// `1 / max |d/dλ (λ² e^{−λ²})|`, attained at `λ² = (5 ± √17)/4`.
pub fn sq_bump_scale() -> f64 {
    let g = |l2: f64| {
        let l = l2.sqrt();
        (2.0 * l * (1.0 - l2) * (-l2).exp()).abs()
    };
    let r = 17f64.sqrt();
    1.0 / g((5.0 - r) / 4.0).max(g((5.0 + r) / 4.0))
}

impl ScalarFunction {
    pub fn name(&self) -> &'static str {
        match self {
            ScalarFunction::Abs => "abs",
            ScalarFunction::Identity => "identity",
            ScalarFunction::Zero => "zero",
            ScalarFunction::Pwl { .. } => "pwl",
            ScalarFunction::SqBump => "sq_bump",
            ScalarFunction::Poly(_) => "poly",
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFunction::Abs => x.abs(),
            ScalarFunction::Identity => x,
            ScalarFunction::Zero => 0.0,
            ScalarFunction::Pwl { knots, slopes, value } => {
                if knots.is_empty() {
                    return value + slopes[0] * x;
                }
                if x <= knots[0] {
                    return value + slopes[0] * (x - knots[0]);
                }
                let mut v = *value;
                for i in 0..knots.len() {
                    let end = knots.get(i + 1).copied().unwrap_or(f64::INFINITY);
                    if x <= end {
                        return v + slopes[i + 1] * (x - knots[i]);
                    }
                    v += slopes[i + 1] * (end - knots[i]);
                }
                v
            }
            ScalarFunction::SqBump => sq_bump_scale() * x * x * (-x * x).exp(),
            ScalarFunction::Poly(coeffs) => coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a),
        }
    }

    /// Derivative, taken from the right at kinks.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ScalarFunction::Abs => {
                if x >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            ScalarFunction::Identity => 1.0,
            ScalarFunction::Zero => 0.0,
            ScalarFunction::Pwl { knots, slopes, .. } => slopes[knots.partition_point(|&k| k <= x)],
            ScalarFunction::SqBump => sq_bump_scale() * 2.0 * x * (1.0 - x * x) * (-x * x).exp(),
            ScalarFunction::Poly(coeffs) => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &a)| acc * x + k as f64 * a),
        }
    }

    /// Upper bound for the Lipschitz constant on `[−r, r]`.
    pub fn lipschitz_bound(&self, r: f64) -> f64 {
        match self {
            ScalarFunction::Abs | ScalarFunction::Identity | ScalarFunction::SqBump => 1.0,
            ScalarFunction::Zero => 0.0,
            ScalarFunction::Pwl { slopes, .. } => slopes.iter().fold(0.0, |a, s| a.max(s.abs())),
            ScalarFunction::Poly(coeffs) => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| k as f64 * a.abs() * r.powi(k as i32 - 1))
                .sum(),
        }
    }
}

/// Random continuous piecewise-linear function with at most `max_kinks` kinks
/// in `[−1.5, 1.5]` and slopes in `[−1, 1]`.
pub fn random_pwl(rng: &mut impl Rng, max_kinks: usize) -> ScalarFunction {
    let count = rng.random_range(0..=max_kinks);
    let mut knots: Vec<f64> = (0..count).map(|_| rng.random_range(-1.5..1.5)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let slopes = (0..=knots.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    ScalarFunction::Pwl {
        knots,
        slopes,
        value: rng.random_range(-1.0..1.0),
    }
}

/// Draws the scalar function for one trial of a family.
pub fn draw_function(spec: &FunctionSpec, rng: &mut impl Rng, trial: usize) -> ScalarFunction {
    match spec {
        FunctionSpec::Abs => ScalarFunction::Abs,
        FunctionSpec::Identity => ScalarFunction::Identity,
        FunctionSpec::Pwl { max_kinks } => random_pwl(rng, *max_kinks),
        FunctionSpec::SqBump => ScalarFunction::SqBump,
        FunctionSpec::Poly { coeffs } => ScalarFunction::Poly(coeffs.clone()),
        FunctionSpec::GaussMatrix { .. } => ScalarFunction::SqBump,
        FunctionSpec::Mixed => match trial % 3 {
            0 => ScalarFunction::Abs,
            1 => random_pwl(rng, 32),
            _ => ScalarFunction::SqBump,
        },
    }
}

/// Random matrix-valued Gaussian family on the line with Hermitian
/// coefficients of operator norm 1, centers in `[−1, 1]`, widths in `[½, 2]`.
pub fn random_gauss_matrix(rng: &mut impl Rng, side: usize, terms: usize) -> GaussMatrix {
    let centers = (0..terms).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
    let widths = (0..terms).map(|_| rng.random_range(0.5..2.0)).collect();
    let coefficients = (0..terms).map(|_| random_hermitian(rng, side)).collect();
    GaussMatrix::new(centers, widths, coefficients).expect("well-formed parameters")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    Gaussian,
    /// Supported on entries between neighbouring eigenvalues of `A`.
    OffDiagonal,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub a: ComplexMatrix,
    pub x: ComplexMatrix,
    pub f: ScalarFunction,
    pub kind: PerturbationKind,
}

/// Instance for `(stream, n, trial)`: `A` Gaussian Hermitian with `‖A‖ = 1`,
/// `x` a contraction, Gaussian on even trials and concentrated next to the
/// diagonal of `A`'s eigenbasis on odd ones.
pub fn gen_instance(cfg: &ExperimentConfig, stream: &str, n: usize, trial: usize) -> Instance {
    let mut rng = rng_for(cfg.seed, stream, n, trial);
    let a = random_hermitian(&mut rng, n);
    let f = draw_function(&cfg.function_family, &mut rng, trial);
    let (x, kind) = if trial.is_multiple_of(2) {
        (random_contraction(&mut rng, n), PerturbationKind::Gaussian)
    } else {
        let eig = a.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let u = ComplexMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
        let mut y = ComplexMatrix::zeros(n, n);
        for i in 0..n - 1 {
            let phase = C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
            y[(i, i + 1)] = phase * gaussian(&mut rng).abs().max(0.1);
            y[(i + 1, i)] = phase.conj() * gaussian(&mut rng).abs().max(0.1);
        }
        let x = &u * y * u.adjoint();
        let norm = matcore::op_norm(&x);
        (x / c(norm), PerturbationKind::OffDiagonal)
    };
    Instance { a, x, f, kind }
}
