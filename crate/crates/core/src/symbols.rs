//! Symbol arithmetic: the homogeneous multiplier `m₀`, per-frequency
//! transference checks, segment averages, the weighted derivative norm
//! `HM_n`, and smooth radial cutoffs.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::doi::{divided_difference_kernel, perturbation_kernel, semigroup_kernel};
use crate::error::{Error, Result};
use crate::matcore::{self, c, ComplexMatrix};

// Odd quintic p(v) = A v⁵ + B v³ + C v on v ∈ [−½, ½] matching value, slope and
// curvature of tan at both cone edges.
const P2: f64 = PI * PI;
const QUINTIC_A: f64 = -P2 - 6.0 * PI - 12.0;
const QUINTIC_B: f64 = (P2 + 10.0 * PI + 20.0) / 2.0;
const QUINTIC_C: f64 = -(P2 + 14.0 * PI + 60.0) / 16.0;

fn off_cone_profile(v: f64) -> f64 {
    let v2 = v * v;
    v * (QUINTIC_C + v2 * (QUINTIC_B + v2 * QUINTIC_A))
}

/// Homogeneous symbol of degree zero: `ξ₂/ξ₁` on the cone `|ξ₂| ≤ |ξ₁|`,
/// a bounded smooth extension elsewhere, and `0` at the origin.
pub fn m0_eval(xi1: f64, xi2: f64) -> f64 {
    if xi1 == 0.0 && xi2 == 0.0 {
        return 0.0;
    }
    if xi2.abs() <= xi1.abs() {
        return xi2 / xi1;
    }
    // Angle measured from the ξ₂ axis, rescaled so the cone edges sit at v = ∓½.
    let v = -2.0 * (xi1 / xi2).atan() / PI;
    off_cone_profile(v)
}

/// Angular profile `ψ(θ) = m₀(cos θ, sin θ)`.
pub fn m0_profile(theta: f64) -> f64 {
    m0_eval(theta.cos(), theta.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferenceReport {
    pub heat_defect: f64,
    pub multiplier_defect: f64,
}

/// Compares the heat and `m₀` multipliers on the characters
/// `e_{(λ−μ, f(λ)−f(μ))}` with the semigroup kernel `e^{−tF}` and the divided
/// difference of `f`.
pub fn transference_defect<F>(f: F, spectrum: &[f64], t: f64) -> Result<TransferenceReport>
where
    F: Fn(f64) -> f64,
{
    let values: Vec<f64> = spectrum.iter().map(|&l| f(l)).collect();
    for (a, &l) in spectrum.iter().enumerate() {
        for (b, &m) in spectrum.iter().enumerate().skip(a + 1) {
            let slope = (values[a] - values[b]).abs() / (l - m).abs();
            if slope > 1.0 + 1e-12 {
                return Err(Error::LipschitzViolation { lambda: l, mu: m, slope });
            }
        }
    }
    let heat = semigroup_kernel(&perturbation_kernel(&f, spectrum), t)?;
    let divided = divided_difference_kernel(&f, spectrum);
    let mut report = TransferenceReport {
        heat_defect: 0.0,
        multiplier_defect: 0.0,
    };
    for (a, &l) in spectrum.iter().enumerate() {
        for (b, &m) in spectrum.iter().enumerate() {
            let d1 = l - m;
            let d2 = values[a] - values[b];
            let symbol = (-t * (d1 * d1 + d2 * d2)).exp();
            report.heat_defect = report.heat_defect.max((heat.value(a, b) - c(symbol)).norm());
            if a != b {
                let gap = (divided.value(a, b) - c(m0_eval(d1, d2))).norm();
                report.multiplier_defect = report.multiplier_defect.max(gap);
            }
        }
    }
    Ok(report)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order > 0, "quadrature order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if order == 1 {
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[order - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[order - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// A matrix-valued function on `ℝⁿ` with optional analytic partial derivatives.
pub trait OperatorFunction: Sync {
    /// Number of real variables.
    fn dim(&self) -> usize;
    /// Side of the returned matrices.
    fn side(&self) -> usize;
    fn eval(&self, t: &[f64]) -> ComplexMatrix;
    /// `∂_α f(t)` when an analytic formula is available.
    fn partial(&self, _alpha: &[usize], _t: &[f64]) -> Option<ComplexMatrix> {
        None
    }
}

type Evaluator = Box<dyn Fn(&[f64]) -> ComplexMatrix + Send + Sync>;
type PartialEvaluator = Box<dyn Fn(&[usize], &[f64]) -> ComplexMatrix + Send + Sync>;

/// Operator function backed by closures.
pub struct ClosureFunction {
    dim: usize,
    side: usize,
    eval: Evaluator,
    partial: Option<PartialEvaluator>,
}

impl ClosureFunction {
    pub fn new<F>(dim: usize, side: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> ComplexMatrix + Send + Sync + 'static,
    {
        Self {
            dim,
            side,
            eval: Box::new(eval),
            partial: None,
        }
    }

    pub fn with_partial<G>(mut self, partial: G) -> Self
    where
        G: Fn(&[usize], &[f64]) -> ComplexMatrix + Send + Sync + 'static,
    {
        self.partial = Some(Box::new(partial));
        self
    }

    /// Scalar function of one variable as a `1 × 1` operator function.
    pub fn scalar<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(1, 1, move |t| ComplexMatrix::from_element(1, 1, c(f(t[0]))))
    }
}

impl OperatorFunction for ClosureFunction {
    fn dim(&self) -> usize {
        self.dim
    }
    fn side(&self) -> usize {
        self.side
    }
    fn eval(&self, t: &[f64]) -> ComplexMatrix {
        (self.eval)(t)
    }
    fn partial(&self, alpha: &[usize], t: &[f64]) -> Option<ComplexMatrix> {
        self.partial.as_ref().map(|p| p(alpha, t))
    }
}

/// Physicists' Hermite polynomial `H_m(x)`.
fn hermite(m: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if m == 0 {
        return h0;
    }
    for k in 1..m {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `f(u) = Σ_j exp(−a_j ‖u − c_j‖²) H_j` with analytic derivatives.
#[derive(Debug, Clone)]
pub struct GaussMatrix {
    centers: Vec<Vec<f64>>,
    widths: Vec<f64>,
    coefficients: Vec<ComplexMatrix>,
}

impl GaussMatrix {
    pub fn new(centers: Vec<Vec<f64>>, widths: Vec<f64>, coefficients: Vec<ComplexMatrix>) -> Result<Self> {
        let terms = centers.len();
        if terms == 0 || widths.len() != terms || coefficients.len() != terms {
            return Err(Error::Config(format!(
                "gauss_matrix needs matching nonempty centers, widths and coefficients ({}, {}, {})",
                terms,
                widths.len(),
                coefficients.len()
            )));
        }
        let dim = centers[0].len();
        let side = coefficients[0].nrows();
        if dim == 0 || centers.iter().any(|c| c.len() != dim) {
            return Err(Error::Config("gauss_matrix centers must share a positive dimension".into()));
        }
        if coefficients.iter().any(|h| h.nrows() != side || h.ncols() != side) {
            return Err(Error::Config("gauss_matrix coefficients must be square of one side".into()));
        }
        if widths.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Config("gauss_matrix widths must be positive".into()));
        }
        Ok(Self {
            centers,
            widths,
            coefficients,
        })
    }

    /// `exp(−u²)·I_k` on the line.
    pub fn standard(side: usize) -> Self {
        Self {
            centers: vec![vec![0.0]],
            widths: vec![1.0],
            coefficients: vec![ComplexMatrix::identity(side, side)],
        }
    }

    fn weight(&self, j: usize, alpha: &[usize], t: &[f64]) -> f64 {
        let a = self.widths[j];
        let root = a.sqrt();
        let mut w = 1.0;
        for (k, &tk) in t.iter().enumerate() {
            let y = root * (tk - self.centers[j][k]);
            let m = alpha.get(k).copied().unwrap_or(0);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            w *= sign * root.powi(m as i32) * hermite(m, y) * (-y * y).exp();
        }
        w
    }
}

impl OperatorFunction for GaussMatrix {
    fn dim(&self) -> usize {
        self.centers[0].len()
    }
    fn side(&self) -> usize {
        self.coefficients[0].nrows()
    }
    fn eval(&self, t: &[f64]) -> ComplexMatrix {
        self.partial(&[], t).expect("analytic")
    }
    fn partial(&self, alpha: &[usize], t: &[f64]) -> Option<ComplexMatrix> {
        let side = self.side();
        let mut out = ComplexMatrix::zeros(side, side);
        for (j, h) in self.coefficients.iter().enumerate() {
            out += h * c(self.weight(j, alpha, t));
        }
        Some(out)
    }
}

/// Smooth step equal to `1` for `u ≤ 0` and `0` for `u ≥ 1`.
pub fn smooth_step(u: f64) -> f64 {
    fn g(u: f64) -> f64 {
        if u > 0.0 {
            (-1.0 / u).exp()
        } else {
            0.0
        }
    }
    let (a, b) = (g(1.0 - u), g(u));
    a / (a + b)
}

/// Radial cutoff `φ_l(ξ) = S((‖ξ‖ − l)/l)`: `1` on the ball of radius `l`,
/// `0` outside radius `2l`.
#[derive(Debug, Clone, Copy)]
pub struct RadialCutoff {
    pub radius: f64,
    pub dim: usize,
}

impl RadialCutoff {
    pub fn value(&self, t: &[f64]) -> f64 {
        let r = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        smooth_step((r - self.radius) / self.radius)
    }
}

impl OperatorFunction for RadialCutoff {
    fn dim(&self) -> usize {
        self.dim
    }
    fn side(&self) -> usize {
        1
    }
    fn eval(&self, t: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, c(self.value(t)))
    }
}

/// `scale · φ(t) · h(t)` for a scalar `φ`.
pub struct ScaledProduct<'a> {
    pub scalar: &'a dyn OperatorFunction,
    pub operator: &'a dyn OperatorFunction,
    pub scale: f64,
}

impl OperatorFunction for ScaledProduct<'_> {
    fn dim(&self) -> usize {
        self.operator.dim()
    }
    fn side(&self) -> usize {
        self.operator.side()
    }
    fn eval(&self, t: &[f64]) -> ComplexMatrix {
        self.operator.eval(t) * (self.scalar.eval(t)[(0, 0)] * self.scale)
    }
}

/// `∂_α h(t)`: analytic when available, otherwise nested central differences
/// with step `fd_step · max(‖t‖, 1e-300)`.
pub fn partial_derivative(h: &dyn OperatorFunction, alpha: &[usize], t: &[f64], fd_step: f64) -> ComplexMatrix {
    if let Some(d) = h.partial(alpha, t) {
        return d;
    }
    if alpha.iter().all(|&a| a == 0) {
        return h.eval(t);
    }
    let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    let step = fd_step * norm.max(1e-300);
    // Stencil: Σ_j (−1)^j C(m,j) f(x + (m/2 − j) h) / h^m in each coordinate.
    let mut stencil: Vec<(Vec<f64>, f64)> = vec![(t.to_vec(), 1.0)];
    for (k, &m) in alpha.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(stencil.len() * (m + 1));
        let mut binom = 1.0;
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let shift = (m as f64 / 2.0 - j as f64) * step;
            for (p, w) in &stencil {
                let mut q = p.clone();
                q[k] += shift;
                next.push((q, w * sign * binom / step.powi(m as i32)));
            }
            binom = binom * (m - j) as f64 / (j + 1) as f64;
        }
        stencil = next;
    }
    let side = h.side();
    stencil
        .iter()
        .fold(ComplexMatrix::zeros(side, side), |acc, (p, w)| acc + h.eval(p) * c(*w))
}

/// `(Lh)(s,t) = ∫₀¹ h((1−θ)s + θt) dθ` by Gauss–Legendre quadrature.
pub fn l_apply(h: &dyn OperatorFunction, s: &[f64], t: &[f64], quad_order: usize) -> ComplexMatrix {
    segment_average(s, t, quad_order, h.side(), |p| h.eval(p))
}

fn segment_average<F>(s: &[f64], t: &[f64], quad_order: usize, side: usize, f: F) -> ComplexMatrix
where
    F: Fn(&[f64]) -> ComplexMatrix,
{
    assert_eq!(s.len(), t.len(), "segment endpoints of different dimension");
    let (nodes, weights) = gauss_legendre(quad_order);
    let mut acc = ComplexMatrix::zeros(side, side);
    let mut p = vec![0.0; s.len()];
    for (&x, &w) in nodes.iter().zip(&weights) {
        for k in 0..s.len() {
            p[k] = (1.0 - x) * s[k] + x * t[k];
        }
        acc += f(&p) * c(w);
    }
    acc
}

/// `‖f(t) − f(s) − Σ_k (L ∂_k f)(s,t)(t_k − s_k)‖_∞`.
pub fn directional_identity_defect(f: &dyn OperatorFunction, s: &[f64], t: &[f64], quad_order: usize) -> f64 {
    let n = f.dim();
    let mut residual = f.eval(t) - f.eval(s);
    for k in 0..n {
        let mut alpha = vec![0; n];
        alpha[k] = 1;
        let avg = segment_average(s, t, quad_order, f.side(), |p| partial_derivative(f, &alpha, p, 1e-4));
        residual -= avg * c(t[k] - s[k]);
    }
    matcore::op_norm(&residual)
}

/// All multi-indices in `ℕⁿ` with `|α| ≤ max_order`, by increasing order.
pub fn multi_indices(n: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for order in 0..=max_order {
        let mut current = vec![0; n];
        compositions(order, 0, &mut current, &mut out);
    }
    out
}

fn compositions(remaining: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let n = current.len();
    if k + 1 == n {
        current[k] = remaining;
        out.push(current.clone());
        return;
    }
    if n == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for first in (0..=remaining).rev() {
        current[k] = first;
        compositions(remaining - first, k + 1, current, out);
    }
    current[k] = 0;
}

#[derive(Debug, Clone, Serialize)]
pub struct HmReport {
    pub estimate: f64,
    pub argmax_point: Vec<f64>,
    pub argmax_alpha: Vec<usize>,
    pub grid_points: usize,
    pub max_order: usize,
    pub fd_step: f64,
}

/// Sampled lower bound for `max_{|α| ≤ n+2} sup_t ‖t‖^{|α|} ‖∂_α h(t)‖`.
pub fn hm_norm_estimate(h: &dyn OperatorFunction, grid: &[Vec<f64>], fd_step: f64) -> Result<HmReport> {
    let n = h.dim();
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|p| p.len() != n) {
        return Err(Error::DimensionMismatch(format!("grid points must have dimension {n}")));
    }
    if grid.iter().any(|p| p.iter().all(|&x| x == 0.0)) {
        return Err(Error::GridContainsOrigin);
    }
    let alphas = multi_indices(n, n + 2);
    let best = grid
        .par_iter()
        .map(|p| {
            let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut best = (0.0_f64, 0usize);
            for (ai, alpha) in alphas.iter().enumerate() {
                let order: usize = alpha.iter().sum();
                let d = partial_derivative(h, alpha, p, fd_step);
                let v = norm.powi(order as i32) * matcore::op_norm(&d);
                if v > best.0 {
                    best = (v, ai);
                }
            }
            best
        })
        .collect::<Vec<_>>();
    let (arg, &(estimate, ai)) = best
        .iter()
        .enumerate()
        .fold((0, &best[0]), |acc, (i, b)| if b.0 > acc.1 .0 { (i, b) } else { acc });
    Ok(HmReport {
        estimate,
        argmax_point: grid[arg].clone(),
        argmax_alpha: alphas[ai].clone(),
        grid_points: grid.len(),
        max_order: n + 2,
        fd_step,
    })
}

/// Geometric radial shells times uniform directions, never containing 0.
/// In dimension 1 the directions are `±1`; in dimension 2 `angles` equally
/// spaced angles; in higher dimension the signed coordinate axes and the
/// normalized sign vectors.
pub fn radial_grid(n: usize, r_min: f64, r_max: f64, shells: usize, angles: usize) -> Vec<Vec<f64>> {
    assert!(n > 0 && r_min > 0.0 && r_max >= r_min && shells > 0);
    let directions: Vec<Vec<f64>> = match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..angles.max(1))
            .map(|i| {
                let th = 2.0 * PI * i as f64 / angles.max(1) as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut d = Vec::new();
            for k in 0..n {
                for sign in [1.0, -1.0] {
                    let mut v = vec![0.0; n];
                    v[k] = sign;
                    d.push(v);
                }
            }
            let scale = 1.0 / (n as f64).sqrt();
            for mask in 0..(1usize << n) {
                d.push((0..n).map(|k| if mask >> k & 1 == 1 { -scale } else { scale }).collect());
            }
            d
        }
    };
    let ratio = if shells == 1 { 1.0 } else { (r_max / r_min).powf(1.0 / (shells - 1) as f64) };
    let mut grid = Vec::with_capacity(shells * directions.len());
    for s in 0..shells {
        let r = r_min * ratio.powi(s as i32);
        for d in &directions {
            grid.push(d.iter().map(|x| x * r).collect());
        }
    }
    grid
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffReport {
    pub radius: f64,
    pub measured: f64,
    pub c_target: f64,
    pub within_target: bool,
    pub hm: HmReport,
}

/// Grid used for cutoff bounds: shells from `l/20` to `4l`.
pub fn cutoff_grid(n: usize, l: f64) -> Vec<Vec<f64>> {
    radial_grid(n, 0.05 * l, 4.0 * l, 161, 24)
}

/// Radial cutoff of radius `l` in dimension `n` with its measured derivative
/// bound.
pub fn cutoff_phi(l: f64, c_target: f64, n: usize) -> Result<(RadialCutoff, CutoffReport)> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Config(format!("cutoff radius must be positive, got {l}")));
    }
    let phi = RadialCutoff { radius: l, dim: n };
    let hm = hm_norm_estimate(&phi, &cutoff_grid(n, l), 1e-3)?;
    Ok((
        phi,
        CutoffReport {
            radius: l,
            measured: hm.estimate,
            c_target,
            within_target: hm.estimate <= c_target,
            hm,
        },
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct LeibnizReport {
    pub hm_input: f64,
    pub cutoff_bound: f64,
    pub scale: f64,
    pub hm_product: f64,
    pub holds: bool,
}

/// Normalizes `h` by its measured `HM_n` estimate and checks that
/// `(1 + c·2^{n+2})^{-1} φ_l h` stays within `1 + slack`.
pub fn leibniz_check(
    h: &dyn OperatorFunction,
    l: f64,
    grid: &[Vec<f64>],
    fd_step: f64,
    slack: f64,
) -> Result<LeibnizReport> {
    let n = h.dim();
    let hm_input = hm_norm_estimate(h, grid, fd_step)?.estimate;
    let (phi, cut) = cutoff_phi(l, f64::INFINITY, n)?;
    let cutoff_bound = cut.measured;
    let norm = if hm_input > 0.0 { hm_input } else { 1.0 };
    let scale = 1.0 / ((1.0 + cutoff_bound * 2f64.powi(n as i32 + 2)) * norm);
    let product = ScaledProduct {
        scalar: &phi,
        operator: h,
        scale,
    };
    let hm_product = hm_norm_estimate(&product, grid, fd_step)?.estimate;
    Ok(LeibnizReport {
        hm_input,
        cutoff_bound,
        scale,
        hm_product,
        holds: hm_product <= 1.0 + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::C64;

    #[test]
    fn m0_examples() {
        assert_eq!(m0_eval(2.0, 1.0), 0.5);
        assert_eq!(m0_eval(1.0, 1.0), 1.0);
        assert_eq!(m0_eval(0.0, 0.0), 0.0);
        assert_eq!(m0_eval(-3.0, -1.0), 1.0 / 3.0);
    }

    #[test]
    fn m0_extension_is_continuous_bounded_and_periodic() {
        // Just past each cone edge the extension agrees with the cone value.
        for (a, b) in [(1.0, 1.0 + 1e-9), (1.0, -1.0 - 1e-9), (-1.0, 1.0 + 1e-9)] {
            let edge = b / a;
            assert!((m0_eval(a, b) - edge.signum()).abs() < 1e-8);
        }
        let mut max = 0.0_f64;
        for i in 0..20_000 {
            let th = 2.0 * PI * i as f64 / 20_000.0;
            let v = m0_profile(th);
            max = max.max(v.abs());
            assert!((v - m0_profile(th + PI)).abs() < 1e-9);
        }
        assert!(max <= 2.0);
        // One-sided derivatives across the edge θ = π/4 agree.
        let h = 1e-5;
        let e = PI / 4.0;
        let inside = (m0_profile(e) - m0_profile(e - h)) / h;
        let outside = (m0_profile(e + h) - m0_profile(e)) / h;
        assert!((inside - outside).abs() < 1e-3);
    }

    #[test]
    fn quintic_matches_edge_jets() {
        let p = off_cone_profile;
        assert!((p(-0.5) - 1.0).abs() < 1e-13);
        assert!((p(0.5) + 1.0).abs() < 1e-13);
        let h = 1e-4;
        let d1 = (p(0.5 + h) - p(0.5 - h)) / (2.0 * h);
        let d2 = (p(0.5 + h) - 2.0 * p(0.5) + p(0.5 - h)) / (h * h);
        assert!((d1 - PI).abs() < 1e-6);
        assert!((d2 + PI * PI).abs() < 1e-4);
    }

    #[test]
    fn transference_examples() {
        let s = [-1.0, 0.0, 0.5, 2.0];
        for f in [|x: f64| x, |_: f64| 0.0, f64::abs] {
            let r = transference_defect(f, &s, 0.7).unwrap();
            assert!(r.heat_defect <= 1e-15);
            assert!(r.multiplier_defect <= 1e-15);
        }
        let r = transference_defect(f64::abs, &[-1.0, 2.0], 1.0).unwrap();
        assert_eq!(r.multiplier_defect, 0.0);
        assert!(matches!(
            transference_defect(|x| 2.0 * x, &[0.0, 1.0], 1.0),
            Err(Error::LipschitzViolation { .. })
        ));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for order in 1..=20 {
            let (x, w) = gauss_legendre(order);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for deg in 0..(2 * order) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "order {order} degree {deg}");
            }
        }
    }

    #[test]
    fn segment_average_examples() {
        let lin = ClosureFunction::scalar(|u| u);
        let sq = ClosureFunction::scalar(|u| u * u);
        let cst = ClosureFunction::new(1, 2, |_| ComplexMatrix::identity(2, 2) * C64::new(2.0, 1.0));
        let (s, t) = (0.3, -1.7);
        assert!((l_apply(&lin, &[s], &[t], 4)[(0, 0)].re - (s + t) / 2.0).abs() < 1e-15);
        assert!((l_apply(&sq, &[s], &[t], 4)[(0, 0)].re - (s * s + s * t + t * t) / 3.0).abs() < 1e-15);
        let avg = l_apply(&cst, &[s], &[t], 3);
        assert!(matcore::max_abs(&(avg - ComplexMatrix::identity(2, 2) * C64::new(2.0, 1.0))) < 1e-15);
        let a = l_apply(&sq, &[s], &[t], 5);
        let b = l_apply(&sq, &[t], &[s], 5);
        assert!(matcore::max_abs(&(a - b)) < 1e-15);
    }

    #[test]
    fn directional_identity() {
        let lin = ClosureFunction::new(2, 1, |t| ComplexMatrix::from_element(1, 1, c(3.0 * t[0] - t[1])))
            .with_partial(|a, _| ComplexMatrix::from_element(1, 1, c(if a == [1, 0] { 3.0 } else if a == [0, 1] { -1.0 } else { 0.0 })));
        assert!(directional_identity_defect(&lin, &[0.1, 0.2], &[-1.0, 2.0], 4) < 1e-14);
        let sq = ClosureFunction::scalar(|u| u * u).with_partial(|a, t| {
            ComplexMatrix::from_element(1, 1, c(if a[0] == 1 { 2.0 * t[0] } else { t[0] * t[0] }))
        });
        assert!(directional_identity_defect(&sq, &[0.4], &[-1.3], 4) < 1e-15);
        assert_eq!(directional_identity_defect(&sq, &[0.4], &[0.4], 4), 0.0);
        let g = GaussMatrix::new(
            vec![vec![0.2, -0.1], vec![-0.5, 0.3]],
            vec![1.0, 0.5],
            vec![ComplexMatrix::identity(2, 2), crate::matcore::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])],
        )
        .unwrap();
        assert!(directional_identity_defect(&g, &[0.5, 1.0], &[-0.7, 0.2], 16) < 1e-8);
    }

    #[test]
    fn hermite_derivatives_match_differences() {
        let g = GaussMatrix::new(vec![vec![0.3]], vec![2.0], vec![ComplexMatrix::identity(1, 1)]).unwrap();
        let fd = ClosureFunction::new(1, 1, move |t| g.eval(t));
        let g = GaussMatrix::new(vec![vec![0.3]], vec![2.0], vec![ComplexMatrix::identity(1, 1)]).unwrap();
        for m in 0..=4 {
            let a = g.partial(&[m], &[0.9]).unwrap()[(0, 0)].re;
            let b = partial_derivative(&fd, &[m], &[0.9], 1e-3)[(0, 0)].re;
            assert!((a - b).abs() < 1e-4 * (1.0 + a.abs()), "order {m}: {a} vs {b}");
        }
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(1, 3), vec![vec![0], vec![1], vec![2], vec![3]]);
        let two = multi_indices(2, 4);
        assert_eq!(two.len(), 15);
        assert!(two.iter().all(|a| a.iter().sum::<usize>() <= 4));
    }

    #[test]
    fn hm_estimate_examples() {
        let grid: Vec<Vec<f64>> = (1..=40).map(|i| vec![0.2 * i as f64]).collect();
        let zero = ClosureFunction::new(1, 2, |_| ComplexMatrix::zeros(2, 2));
        assert_eq!(hm_norm_estimate(&zero, &grid, 1e-2).unwrap().estimate, 0.0);
        let k = crate::matcore::from_real(2, 2, &[1.0, 2.0, 0.0, -1.0]);
        let kk = k.clone();
        let cst = ClosureFunction::new(1, 2, move |_| kk.clone());
        let r = hm_norm_estimate(&cst, &grid, 1e-2).unwrap();
        assert!((r.estimate - matcore::op_norm(&k)).abs() < 1e-6);
        let mut bad = grid.clone();
        bad.push(vec![0.0]);
        assert!(matches!(hm_norm_estimate(&cst, &bad, 1e-2), Err(Error::GridContainsOrigin)));
    }

    #[test]
    fn hm_estimate_is_stable_under_refinement() {
        let g = GaussMatrix::standard(2);
        let grid = |m: usize| -> Vec<Vec<f64>> {
            (0..=2 * m)
                .map(|i| -8.0 + 16.0 * i as f64 / (2 * m) as f64)
                .filter(|&x| x != 0.0)
                .map(|x| vec![x])
                .collect()
        };
        let coarse = hm_norm_estimate(&g, &grid(400), 1e-2).unwrap().estimate;
        let fine = hm_norm_estimate(&g, &grid(800), 1e-2).unwrap().estimate;
        assert!(coarse.is_finite() && coarse > 0.0);
        assert!((fine - coarse).abs() / fine < 0.01);
        // Finite differences against analytic derivatives.
        let fd = ClosureFunction::new(1, 2, |t| GaussMatrix::standard(2).eval(t));
        let approx = hm_norm_estimate(&fd, &grid(400), 1e-3).unwrap().estimate;
        assert!((approx - coarse).abs() / coarse < 0.01);
    }

    #[test]
    fn cutoff_examples() {
        let (phi, report) = cutoff_phi(2.0, 1e5, 2).unwrap();
        assert_eq!(phi.value(&[1.0, 1.0]), 1.0);
        assert_eq!(phi.value(&[2.0, 0.0]), 1.0);
        assert_eq!(phi.value(&[4.0, 0.0]), 0.0);
        assert_eq!(phi.value(&[3.0, 3.0]), 0.0);
        let mid = phi.value(&[3.0, 0.0]);
        assert!((mid - 0.5).abs() < 1e-15);
        assert!(report.within_target, "{report:?}");
        // Fourth radial derivatives of the smooth step reach a few thousand.
        assert!(report.measured > 1e3);
        let (_, doubled) = cutoff_phi(4.0, 10.0, 2).unwrap();
        assert!(!doubled.within_target);
        assert!((report.measured - doubled.measured).abs() / report.measured < 0.01);
    }

    #[test]
    fn leibniz_bound() {
        let g = GaussMatrix::standard(2);
        let grid = radial_grid(1, 0.01, 10.0, 400, 1);
        let r = leibniz_check(&g, 1.0, &grid, 1e-3, 0.05).unwrap();
        assert!(r.holds, "{r:?}");
    }
}
