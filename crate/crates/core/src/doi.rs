//! Kernels on finite spectra and double operator integrals.
//!
//! A double operator integral with finite spectrum is the Schur multiplier
//! `x ↦ Σ_{λ,μ} φ(λ,μ) P_λ x P_μ`. It is evaluated in the eigenbasis of the
//! underlying [`Resolution`]: compress, multiply entrywise by the kernel
//! expanded along the class labels, expand.
//!
//! The divided difference `f^{[1]}` is extended by **zero** on the diagonal,
//! not by `f'(λ)`. Use [`DiagonalRule::Derivative`] for the Daleckii–Krein
//! convention.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, c, ComplexMatrix, Resolution, SpectralIndex, C64, ONE, ZERO};

/// Scalar kernel on an index set of spectrum points (or blocks of them).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    index: SpectralIndex,
    values: ComplexMatrix,
}

impl Kernel {
    pub fn new(index: SpectralIndex, values: ComplexMatrix) -> Result<Self> {
        let m = index.len();
        if values.nrows() != m || values.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "kernel values {}x{} for an index set of size {m}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Config("kernel values must be finite".into()));
        }
        Ok(Self { index, values })
    }

    /// Kernel `φ(λ_a, λ_b)` on a list of points.
    pub fn from_fn<F>(spectrum: &[f64], f: F) -> Self
    where
        F: Fn(f64, f64) -> C64,
    {
        let values = ComplexMatrix::from_fn(spectrum.len(), spectrum.len(), |a, b| {
            f(spectrum[a], spectrum[b])
        });
        Self {
            index: SpectralIndex::Points(spectrum.to_vec()),
            values,
        }
    }

    pub fn constant(spectrum: &[f64], value: f64) -> Self {
        Self::from_fn(spectrum, |_, _| c(value))
    }

    pub fn index(&self) -> &SpectralIndex {
        &self.index
    }

    pub fn values(&self) -> &ComplexMatrix {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn value(&self, a: usize, b: usize) -> C64 {
        self.values[(a, b)]
    }

    /// `max |φ(a,b) − conj φ(b,a)|`.
    pub fn symmetry_defect(&self) -> f64 {
        matcore::max_abs(&(&self.values - self.values.adjoint()))
    }

    /// `max |φ(a,a) − 1|`.
    pub fn diagonal_defect(&self) -> f64 {
        self.values
            .diagonal()
            .iter()
            .fold(0.0, |acc, z| acc.max((z - ONE).norm()))
    }

    /// Largest absolute value off the diagonal.
    pub fn max_off_diagonal(&self) -> f64 {
        let m = self.len();
        let mut best = 0.0_f64;
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    best = best.max(self.values[(a, b)].norm());
                }
            }
        }
        best
    }

    pub fn entrywise_product(&self, other: &Kernel) -> Result<Kernel> {
        check_index(&self.index, &other.index)?;
        Ok(Kernel {
            index: self.index.clone(),
            values: self.values.component_mul(&other.values),
        })
    }

    /// Entrywise `k`-th power: the kernel of the `k`-fold composition.
    pub fn entrywise_power(&self, k: u32) -> Kernel {
        Kernel {
            index: self.index.clone(),
            values: self.values.map(|z| z.powu(k)),
        }
    }

    /// Real part as a dense real matrix.
    pub fn real_matrix(&self) -> DMatrix<f64> {
        self.values.map(|z| z.re)
    }

    pub fn to_json(&self) -> KernelJson {
        let m = self.len();
        let grab = |f: fn(&C64) -> f64| {
            (0..m)
                .map(|a| (0..m).map(|b| f(&self.values[(a, b)])).collect())
                .collect()
        };
        let blocks = match &self.index {
            SpectralIndex::Points(_) => None,
            SpectralIndex::Blocks { blocks, .. } => Some((1..=*blocks).collect()),
        };
        KernelJson {
            spectrum: self.index.points().to_vec(),
            values_re: grab(|z| z.re),
            values_im: grab(|z| z.im),
            blocks,
        }
    }

    pub fn from_json(j: &KernelJson) -> Result<Kernel> {
        let index = match &j.blocks {
            None => SpectralIndex::Points(j.spectrum.clone()),
            Some(labels) => SpectralIndex::Blocks {
                points: j.spectrum.clone(),
                blocks: labels.len(),
            },
        };
        let m = index.len();
        let shape_ok =
            |v: &Vec<Vec<f64>>| v.len() == m && v.iter().all(|row| row.len() == m);
        if !shape_ok(&j.values_re) || !shape_ok(&j.values_im) {
            return Err(Error::DimensionMismatch(format!(
                "kernel JSON values are not {m}x{m}"
            )));
        }
        let values =
            ComplexMatrix::from_fn(m, m, |a, b| C64::new(j.values_re[a][b], j.values_im[a][b]));
        Kernel::new(index, values)
    }
}

/// Kernel JSON: `{"spectrum", "values_re", "values_im"}` plus `"blocks"`
/// labels for block kernels. Block kernels are indexed `(λ_a, i)` with flat
/// index `a * blocks + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelJson {
    pub spectrum: Vec<f64>,
    pub values_re: Vec<Vec<f64>>,
    pub values_im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
}

fn check_index(a: &SpectralIndex, b: &SpectralIndex) -> Result<()> {
    if a.matches(b, 1e-12) {
        Ok(())
    } else {
        Err(Error::SpectrumMismatch(format!(
            "kernel index of size {} vs {}",
            a.len(),
            b.len()
        )))
    }
}

/// Diagonal extension of the divided difference.
#[derive(Clone, Copy)]
pub enum DiagonalRule<'a> {
    Zero,
    Derivative(&'a dyn Fn(f64) -> f64),
}

/// `f^{[1]}(λ,μ) = (f(λ) − f(μ)) / (λ − μ)` off the diagonal, zero on it.
pub fn divided_difference_kernel<F>(f: F, spectrum: &[f64]) -> Kernel
where
    F: Fn(f64) -> f64,
{
    divided_difference_kernel_with(f, spectrum, DiagonalRule::Zero)
}

pub fn divided_difference_kernel_with<F>(f: F, spectrum: &[f64], rule: DiagonalRule) -> Kernel
where
    F: Fn(f64) -> f64,
{
    let fv: Vec<f64> = spectrum.iter().map(|&l| f(l)).collect();
    let m = spectrum.len();
    let values = ComplexMatrix::from_fn(m, m, |a, b| {
        if a == b {
            match rule {
                DiagonalRule::Zero => ZERO,
                DiagonalRule::Derivative(d) => c(d(spectrum[a])),
            }
        } else {
            c((fv[a] - fv[b]) / (spectrum[a] - spectrum[b]))
        }
    });
    Kernel {
        index: SpectralIndex::Points(spectrum.to_vec()),
        values,
    }
}

/// `ψ(λ,μ) = λ − μ`, whose double operator integral is `x ↦ [A, x]`.
pub fn difference_kernel(spectrum: &[f64]) -> Kernel {
    Kernel::from_fn(spectrum, |l, m| c(l - m))
}

/// `F(λ,μ) = (λ − μ)² + (f(λ) − f(μ))²`.
pub fn perturbation_kernel<F>(f: F, spectrum: &[f64]) -> Kernel
where
    F: Fn(f64) -> f64,
{
    let fv: Vec<f64> = spectrum.iter().map(|&l| f(l)).collect();
    let m = spectrum.len();
    let values = ComplexMatrix::from_fn(m, m, |a, b| {
        let dx = spectrum[a] - spectrum[b];
        let dy = fv[a] - fv[b];
        c(dx * dx + dy * dy)
    });
    Kernel {
        index: SpectralIndex::Points(spectrum.to_vec()),
        values,
    }
}

/// Entrywise `exp(−t F)`. At `t = ∞` the limit pattern (1 where `F = 0`,
/// 0 elsewhere) is returned.
pub fn semigroup_kernel(generator: &Kernel, t: f64) -> Result<Kernel> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let values = if t.is_infinite() {
        generator
            .values
            .map(|z| if z.re.abs() <= 0.0 { ONE } else { ZERO })
    } else {
        generator.values.map(|z| c((-t * z.re).exp()))
    };
    Ok(Kernel {
        index: generator.index.clone(),
        values,
    })
}

/// Generator of the block semigroup on `M ⊗ M_2`:
/// `F_ii(λ,μ) = |λ − μ|²`, `F_ij(λ,μ) = |λ|² + |μ|²` for `i ≠ j`.
pub fn ja_generator(spectrum: &[f64]) -> Kernel {
    let index = SpectralIndex::Blocks {
        points: spectrum.to_vec(),
        blocks: 2,
    };
    let m = index.len();
    let values = ComplexMatrix::from_fn(m, m, |p, q| {
        let (l, i) = index.split(p);
        let (mu, j) = index.split(q);
        if i == j {
            c((l - mu) * (l - mu))
        } else {
            c(l * l + mu * mu)
        }
    });
    Kernel { index, values }
}

/// `exp(−t F_ij(λ,μ))` on the index set `spectrum × {1,2}`.
pub fn ja_block_kernel(spectrum: &[f64], t: f64) -> Result<Kernel> {
    semigroup_kernel(&ja_generator(spectrum), t)
}

fn check_resolution(index: &SpectralIndex, res: &Resolution) -> Result<()> {
    if index.matches(res.index(), 1e-12) {
        Ok(())
    } else {
        Err(Error::SpectrumMismatch(format!(
            "kernel over {} points, decomposition over {}",
            index.len(),
            res.index().len()
        )))
    }
}

/// `Σ_{λ,μ} K(λ,μ) P_λ x P_μ`.
pub fn schur_apply(k: &Kernel, d: impl AsRef<Resolution>, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let res = d.as_ref();
    check_resolution(&k.index, res)?;
    if x.nrows() != res.side() || x.ncols() != res.side() {
        return Err(Error::DimensionMismatch(format!(
            "operand {}x{} on a decomposition of side {}",
            x.nrows(),
            x.ncols(),
            res.side()
        )));
    }
    let labels = res.labels();
    let mut y = res.compress(x);
    for b in 0..y.ncols() {
        for a in 0..y.nrows() {
            y[(a, b)] *= k.values[(labels[a], labels[b])];
        }
    }
    Ok(res.expand(&y))
}

/// Operator-valued kernel: a `side × side` matrix for each pair of points.
#[derive(Debug, Clone)]
pub struct OperatorKernel {
    index: SpectralIndex,
    side: usize,
    blocks: Vec<ComplexMatrix>,
}

impl OperatorKernel {
    pub fn from_fn<F>(spectrum: &[f64], f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> ComplexMatrix,
    {
        let m = spectrum.len();
        let mut blocks = Vec::with_capacity(m * m);
        for &l in spectrum {
            for &mu in spectrum {
                blocks.push(f(l, mu));
            }
        }
        Self::new(SpectralIndex::Points(spectrum.to_vec()), blocks)
    }

    /// `blocks` in row-major order over the index set.
    pub fn new(index: SpectralIndex, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        let m = index.len();
        if blocks.len() != m * m || m == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for an index set of size {m}",
                blocks.len()
            )));
        }
        let side = blocks[0].nrows();
        if blocks.iter().any(|b| b.nrows() != side || b.ncols() != side) {
            return Err(Error::DimensionMismatch(
                "operator kernel blocks must share one square side".into(),
            ));
        }
        Ok(Self {
            index,
            side,
            blocks,
        })
    }

    /// Scalar kernel times the identity block.
    pub fn scalar(k: &Kernel, side: usize) -> Self {
        let m = k.len();
        let id = ComplexMatrix::identity(side, side);
        let blocks = (0..m * m).map(|p| &id * k.values[(p / m, p % m)]).collect();
        Self {
            index: k.index.clone(),
            side,
            blocks,
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn block(&self, a: usize, b: usize) -> &ComplexMatrix {
        &self.blocks[a * self.index.len() + b]
    }
}

/// `Σ_{λ,μ} K(λ,μ) ⊗ P_λ x P_μ` in `M_k ⊗ M`.
pub fn operator_schur_apply(
    k: &OperatorKernel,
    d: impl AsRef<Resolution>,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let res = d.as_ref();
    check_resolution(&k.index, res)?;
    let n = res.side();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operand {}x{} on a decomposition of side {n}",
            x.nrows(),
            x.ncols()
        )));
    }
    let s = k.side;
    let labels = res.labels();
    let y = res.compress(x);
    let mut mid = ComplexMatrix::zeros(s * n, s * n);
    for a in 0..n {
        for b in 0..n {
            let yab = y[(a, b)];
            if yab == ZERO {
                continue;
            }
            let blk = k.block(labels[a], labels[b]);
            for al in 0..s {
                for be in 0..s {
                    mid[(al * n + a, be * n + b)] = blk[(al, be)] * yab;
                }
            }
        }
    }
    let big = res.ampliate(s);
    Ok(big.expand(&mid))
}

/// A one-parameter Schur multiplier semigroup `T_t = I_{exp(−tF)}` on the
/// algebra of a resolution.
#[derive(Debug, Clone)]
pub struct SchurSemigroup {
    resolution: Resolution,
    generator: Kernel,
}

impl SchurSemigroup {
    /// Requires the generator to be real, symmetric, nonnegative, with zero
    /// diagonal.
    pub fn new(resolution: Resolution, generator: Kernel) -> Result<Self> {
        check_resolution(&generator.index, &resolution)?;
        let g = &generator.values;
        let m = generator.len();
        for a in 0..m {
            if g[(a, a)].norm() > 1e-14 {
                return Err(Error::Config(format!(
                    "generator diagonal entry {a} is {}",
                    g[(a, a)]
                )));
            }
            for b in 0..m {
                let z = g[(a, b)];
                if z.im != 0.0 || z.re < 0.0 || (z - g[(b, a)]).norm() > 1e-14 {
                    return Err(Error::Config(format!(
                        "generator must be real, symmetric and nonnegative (entry {a},{b})"
                    )));
                }
            }
        }
        Ok(Self {
            resolution,
            generator,
        })
    }

    /// The semigroup of `exp(−tF)` with `F(λ,μ) = (λ−μ)² + (f(λ)−f(μ))²`.
    pub fn perturbation<F>(d: &matcore::SpectralDecomposition, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        Self::new(d.resolution().clone(), perturbation_kernel(f, d.spectrum()))
    }

    /// The block semigroup on `M ⊗ M_2`, ampliated by `I_k` on the left
    /// (`id_{M_k} ⊗ J`). `k = 1` gives `J` itself.
    pub fn ja(d: &matcore::SpectralDecomposition, k: usize) -> Result<Self> {
        let res = d.resolution().lift_blocks(2).ampliate(k);
        Self::new(res, ja_generator(d.spectrum()))
    }

    pub fn resolution(&self) -> &Resolution {
        &self.resolution
    }

    pub fn generator(&self) -> &Kernel {
        &self.generator
    }

    pub fn side(&self) -> usize {
        self.resolution.side()
    }

    pub fn kernel(&self, t: f64) -> Result<Kernel> {
        semigroup_kernel(&self.generator, t)
    }

    pub fn apply(&self, t: f64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        schur_apply(&self.kernel(t)?, &self.resolution, x)
    }

    /// Entries with `F = 0` are fixed by the flow; everything else decays.
    pub fn limit(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.apply(f64::INFINITY, x)
    }
}

/// Dyadic grid `{0} ∪ {2^{k/per_octave} : k_min·per_octave ≤ k ≤ k_max·per_octave}`.
pub fn dyadic_grid(k_min: i32, k_max: i32, per_octave: u32) -> Vec<f64> {
    let per = per_octave.max(1) as i32;
    let mut grid = vec![0.0];
    grid.extend((k_min * per..=k_max * per).map(|k| (k as f64 / per as f64).exp2()));
    grid
}

/// Default grid `{0} ∪ {2^k : −20 ≤ k ≤ 20}`.
pub fn default_grid() -> Vec<f64> {
    dyadic_grid(-20, 20, 1)
}

/// Complete-positivity, unitality and symmetry diagnostics of a semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovReport {
    pub min_kernel_eigenvalue: f64,
    pub max_diagonal_defect: f64,
    pub max_symmetry_defect: f64,
}

impl MarkovReport {
    pub fn is_markov(&self, psd_tol: f64, unit_tol: f64) -> bool {
        self.min_kernel_eigenvalue >= -psd_tol
            && self.max_diagonal_defect <= unit_tol
            && self.max_symmetry_defect <= unit_tol
    }
}

/// Kernel-matrix eigenvalue (complete positivity of the Schur multiplier),
/// diagonal (unitality and trace preservation) and symmetry (self-adjointness)
/// defects over a time grid.
pub fn markov_defects(s: &SchurSemigroup, t_grid: &[f64]) -> Result<MarkovReport> {
    let mut report = MarkovReport {
        min_kernel_eigenvalue: f64::INFINITY,
        max_diagonal_defect: 0.0,
        max_symmetry_defect: 0.0,
    };
    for &t in t_grid {
        let k = s.kernel(t)?;
        let real = k.real_matrix();
        let sym = (&real + real.transpose()) * 0.5;
        let min_eig = sym
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        report.min_kernel_eigenvalue = report.min_kernel_eigenvalue.min(min_eig);
        report.max_diagonal_defect = report.max_diagonal_defect.max(k.diagonal_defect());
        let m = k.len();
        for a in 0..m {
            for b in 0..m {
                let d = (k.values[(a, b)] - k.values[(b, a)]).norm();
                report.max_symmetry_defect = report.max_symmetry_defect.max(d);
            }
        }
    }
    Ok(report)
}

/// `Σ_λ P_λ x P_λ`: the trace-preserving conditional expectation onto the
/// relative commutant of the spectral projections.
pub fn block_diagonal(d: impl AsRef<Resolution>, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let res = d.as_ref();
    let m = res.classes();
    let id = Kernel::new(
        res.index().clone(),
        ComplexMatrix::from_fn(m, m, |a, b| if a == b { ONE } else { ZERO }),
    )?;
    schur_apply(&id, res, x)
}
