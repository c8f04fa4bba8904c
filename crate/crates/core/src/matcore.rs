//! Dense complex-matrix primitives.
//!
//! Hermitian spectral analysis with eigenvalue clustering, functional
//! calculus, Schatten norms, Kronecker products and vector-state slice maps.
//! Matrices are plain [`nalgebra::DMatrix`] values over [`Complex64`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Matrix unit `e_{ij}` (zero-based) of the given side.
pub fn unit(side: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(side, side);
    m[(i, j)] = ONE;
    m
}

pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v)),
    ))
}

pub fn from_real(rows: usize, cols: usize, row_major: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, row_major.iter().map(|&v| c(v)))
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Largest absolute entry.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    op_norm(&(m - m.adjoint()))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Unnormalized matrix trace.
pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Normalized trace `tr(m) / side`.
pub fn normalized_trace(m: &ComplexMatrix) -> C64 {
    trace(m) / m.nrows() as f64
}

/// Standard Kronecker product; the left factor indexes the outer blocks.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

fn fingerprint(m: &ComplexMatrix) -> String {
    format!(
        "{}x{} matrix (frobenius {:e}, trace {:e})",
        m.nrows(),
        m.ncols(),
        m.norm(),
        trace(m)
    )
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() || m.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square and nonempty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn require_hermitian(h: &ComplexMatrix) -> Result<()> {
    require_square(h, "Hermitian input")?;
    let defect = hermitian_defect(h);
    if defect.is_nan() || defect > tolerance::HERMITIAN {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Raw eigenpairs of a Hermitian matrix, ascending.
fn eigh(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let sym = (h + h.adjoint()) * c(0.5);
    let n = sym.nrows();
    let eig = sym
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::NoConvergence {
            fingerprint: fingerprint(h),
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigenvalues_hermitian(h: &ComplexMatrix) -> Result<Vec<f64>> {
    require_hermitian(h)?;
    let sym = (h + h.adjoint()) * c(0.5);
    let n = sym.nrows();
    let values = sym
        .try_symmetric_eigen(f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::NoConvergence {
            fingerprint: fingerprint(h),
        })?
        .eigenvalues;
    let mut v: Vec<f64> = values.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues_hermitian(h)?[0])
}

pub fn is_psd(h: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(h)? >= -tol)
}

/// Labels of an orthogonal resolution of the identity.
///
/// `Points` labels projections by spectrum points. `Blocks` labels the
/// projections `P_λ ⊗ e_ii` of `M ⊗ M_b`; the flat index of `(λ_a, i)` is
/// `a * blocks + i`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralIndex {
    Points(Vec<f64>),
    Blocks { points: Vec<f64>, blocks: usize },
}

impl SpectralIndex {
    pub fn len(&self) -> usize {
        match self {
            SpectralIndex::Points(p) => p.len(),
            SpectralIndex::Blocks { points, blocks } => points.len() * blocks,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> &[f64] {
        match self {
            SpectralIndex::Points(p) => p,
            SpectralIndex::Blocks { points, .. } => points,
        }
    }

    /// Spectrum point and block label of a flat index.
    pub fn split(&self, flat: usize) -> (f64, usize) {
        match self {
            SpectralIndex::Points(p) => (p[flat], 0),
            SpectralIndex::Blocks { points, blocks } => (points[flat / blocks], flat % blocks),
        }
    }

    pub fn matches(&self, other: &SpectralIndex, tol: f64) -> bool {
        let same_shape = match (self, other) {
            (SpectralIndex::Points(_), SpectralIndex::Points(_)) => true,
            (
                SpectralIndex::Blocks { blocks: a, .. },
                SpectralIndex::Blocks { blocks: b, .. },
            ) => a == b,
            _ => false,
        };
        same_shape
            && self.points().len() == other.points().len()
            && self
                .points()
                .iter()
                .zip(other.points())
                .all(|(a, b)| (a - b).abs() <= tol * (1.0 + a.abs()))
    }
}

/// An orthogonal resolution of the identity `Σ_c P_c = I`, stored as a
/// unitary basis whose columns carry class labels: `P_c` is the projection
/// onto the columns labelled `c`.
#[derive(Debug, Clone)]
pub struct Resolution {
    index: SpectralIndex,
    basis: ComplexMatrix,
    labels: Vec<usize>,
}

impl Resolution {
    pub fn new(index: SpectralIndex, basis: ComplexMatrix, labels: Vec<usize>) -> Result<Self> {
        require_square(&basis, "resolution basis")?;
        if labels.len() != basis.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a basis of side {}",
                labels.len(),
                basis.ncols()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= index.len()) {
            return Err(Error::DimensionMismatch(format!(
                "label {bad} outside index set of size {}",
                index.len()
            )));
        }
        Ok(Self {
            index,
            basis,
            labels,
        })
    }

    /// Resolution of the standard basis, one projection `e_ii` per point.
    pub fn standard(points: Vec<f64>) -> Self {
        let n = points.len();
        Self {
            index: SpectralIndex::Points(points),
            basis: ComplexMatrix::identity(n, n),
            labels: (0..n).collect(),
        }
    }

    pub fn index(&self) -> &SpectralIndex {
        &self.index
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.index.len()
    }

    pub fn side(&self) -> usize {
        self.basis.nrows()
    }

    pub fn projection(&self, class: usize) -> ComplexMatrix {
        let n = self.side();
        let mut p = ComplexMatrix::zeros(n, n);
        for (col, &l) in self.labels.iter().enumerate() {
            if l == class {
                let v = self.basis.column(col);
                p += v * v.adjoint();
            }
        }
        p
    }

    pub fn projections(&self) -> Vec<ComplexMatrix> {
        (0..self.classes()).map(|c| self.projection(c)).collect()
    }

    /// `U* x U`: coordinates of `x` in the resolution's basis.
    pub fn compress(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint() * x * &self.basis
    }

    /// Inverse of [`Resolution::compress`].
    pub fn expand(&self, y: &ComplexMatrix) -> ComplexMatrix {
        &self.basis * y * self.basis.adjoint()
    }

    /// `P ↦ P ⊗ e_ii` resolution of `M ⊗ M_blocks`.
    pub fn lift_blocks(&self, blocks: usize) -> Resolution {
        let basis = kron(&self.basis, &ComplexMatrix::identity(blocks, blocks));
        let labels = self
            .labels
            .iter()
            .flat_map(|&l| (0..blocks).map(move |i| l * blocks + i))
            .collect();
        let index = match &self.index {
            SpectralIndex::Points(points) => SpectralIndex::Blocks {
                points: points.clone(),
                blocks,
            },
            SpectralIndex::Blocks { .. } => {
                panic!("lift_blocks applied to an already lifted resolution")
            }
        };
        Resolution {
            index,
            basis,
            labels,
        }
    }

    /// `P ↦ I_k ⊗ P` resolution of `M_k ⊗ M`.
    pub fn ampliate(&self, k: usize) -> Resolution {
        let basis = kron(&ComplexMatrix::identity(k, k), &self.basis);
        let labels = (0..k).flat_map(|_| self.labels.iter().copied()).collect();
        Resolution {
            index: self.index.clone(),
            basis,
            labels,
        }
    }
}

impl AsRef<Resolution> for Resolution {
    fn as_ref(&self) -> &Resolution {
        self
    }
}

/// Clustered spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    source: ComplexMatrix,
    spectrum: Vec<f64>,
    resolution: Resolution,
}

impl AsRef<Resolution> for SpectralDecomposition {
    fn as_ref(&self) -> &Resolution {
        &self.resolution
    }
}

impl SpectralDecomposition {
    pub fn source(&self) -> &ComplexMatrix {
        &self.source
    }

    /// Strictly increasing cluster representatives.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn resolution(&self) -> &Resolution {
        &self.resolution
    }

    pub fn side(&self) -> usize {
        self.source.nrows()
    }

    pub fn projections(&self) -> Vec<ComplexMatrix> {
        self.resolution.projections()
    }

    /// `Σ_i λ_i P_i`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let diag: Vec<f64> = self
            .resolution
            .labels
            .iter()
            .map(|&l| self.spectrum[l])
            .collect();
        self.resolution.expand(&real_diag(&diag))
    }

    /// Decomposition of `A_l = l⁻¹ ⌊l A⌋`, obtained by flooring the
    /// spectrum onto the grid `l⁻¹ ℤ` and merging the projections that land
    /// on the same grid point.
    pub fn discretize(&self, l: f64) -> SpectralDecomposition {
        assert!(l > 0.0, "discretization level must be positive");
        let floored: Vec<f64> = self.spectrum.iter().map(|&v| (l * v).floor() / l).collect();
        let mut points: Vec<f64> = floored.clone();
        points.dedup();
        let remap: Vec<usize> = floored
            .iter()
            .map(|v| points.iter().position(|p| p == v).unwrap())
            .collect();
        let labels = self.resolution.labels.iter().map(|&l| remap[l]).collect();
        let resolution = Resolution {
            index: SpectralIndex::Points(points.clone()),
            basis: self.resolution.basis.clone(),
            labels,
        };
        let source = {
            let diag: Vec<f64> = resolution.labels.iter().map(|&l| points[l]).collect();
            resolution.expand(&real_diag(&diag))
        };
        SpectralDecomposition {
            source,
            spectrum: points,
            resolution,
        }
    }
}

/// Default clustering threshold `1e-8 · (1 + ‖H‖)`.
pub fn default_cluster_tol(h: &ComplexMatrix) -> f64 {
    tolerance::CLUSTER_REL * (1.0 + op_norm(h))
}

/// Spectral decomposition with agglomerative clustering of eigenvalues:
/// consecutive sorted eigenvalues closer than `cluster_tol` share one
/// projection, represented by the cluster mean.
pub fn eig_hermitian(h: &ComplexMatrix, cluster_tol: f64) -> Result<SpectralDecomposition> {
    require_hermitian(h)?;
    let (values, vectors) = eigh(h)?;
    let mut labels = Vec::with_capacity(values.len());
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if i == 0 || v - values[i - 1] >= cluster_tol {
            clusters.push(Vec::new());
        }
        clusters.last_mut().unwrap().push(v);
        labels.push(clusters.len() - 1);
    }
    let spectrum: Vec<f64> = clusters
        .iter()
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    Ok(SpectralDecomposition {
        source: h.clone(),
        resolution: Resolution {
            index: SpectralIndex::Points(spectrum.clone()),
            basis: vectors,
            labels,
        },
        spectrum,
    })
}

pub fn eig_hermitian_default(h: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let tol = default_cluster_tol(h);
    eig_hermitian(h, tol)
}

/// `Σ_i f(λ_i) P_i`. A non-finite value of `f` counts as undefined.
pub fn apply_scalar_function<F>(d: &SpectralDecomposition, f: F) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> f64,
{
    let values = d
        .spectrum
        .iter()
        .map(|&l| {
            let v = f(l);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::UndefinedAt { point: l })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let diag: Vec<f64> = d.resolution.labels.iter().map(|&l| values[l]).collect();
    let out = d.resolution.expand(&real_diag(&diag));
    Ok((&out + out.adjoint()) * c(0.5))
}

/// Operator-valued calculus `Σ_i g(λ_i) ⊗ P_i` in `M_k ⊗ M`.
pub fn apply_operator_function<F>(d: &SpectralDecomposition, g: F) -> ComplexMatrix
where
    F: Fn(f64) -> ComplexMatrix,
{
    let blocks: Vec<ComplexMatrix> = d.spectrum.iter().map(|&l| g(l)).collect();
    let k = blocks[0].nrows();
    let mut out = ComplexMatrix::zeros(k * d.side(), k * d.side());
    for (block, p) in blocks.iter().zip(d.projections()) {
        out += kron(block, &p);
    }
    out
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    m.singular_values().iter().copied().collect()
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// `(Σ s_i^p)^{1/p}` (or `max s_i` for `p = ∞`) with an optional divisor
/// `weight` inside the root; `weight = side` gives the normalized trace.
pub fn schatten_from_singular(sv: &[f64], p: f64, weight: f64) -> Result<f64> {
    check_exponent(p)?;
    let top = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    if p.is_infinite() || top == 0.0 {
        return Ok(top);
    }
    let sum: f64 = sv.iter().map(|&s| (s / top).powf(p)).sum();
    Ok(top * (sum / weight).powf(1.0 / p))
}

/// Schatten `p`-norm with the unnormalized trace; `p = f64::INFINITY` is the
/// operator norm.
pub fn schatten_norm(m: &ComplexMatrix, p: f64) -> Result<f64> {
    check_exponent(p)?;
    schatten_from_singular(&singular_values(m), p, 1.0)
}

/// Schatten `p`-norm with the normalized trace `tr / side`.
pub fn schatten_norm_normalized(m: &ComplexMatrix, p: f64) -> Result<f64> {
    check_exponent(p)?;
    schatten_from_singular(&singular_values(m), p, m.nrows() as f64)
}

/// Slice map `id ⊗ ω` where `ω = ⟨· v, v⟩` and `v = vac_1 ⊗ … ⊗ vac_r` is a
/// product vector on the legs after the first `keep`.
pub fn slice_vacuum(
    y: &ComplexMatrix,
    dims: &[usize],
    keep: usize,
    vacs: &[ComplexVector],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if y.nrows() != total || y.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix side {} does not match leg dimensions {:?}",
            y.nrows(),
            dims
        )));
    }
    if keep > dims.len() || vacs.len() != dims.len() - keep {
        return Err(Error::DimensionMismatch(format!(
            "keeping {keep} of {} legs needs {} vacuum vectors, got {}",
            dims.len(),
            dims.len().saturating_sub(keep),
            vacs.len()
        )));
    }
    let mut v = ComplexVector::from_element(1, ONE);
    for (vac, &d) in vacs.iter().zip(&dims[keep..]) {
        if vac.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "vacuum vector of length {} on a leg of dimension {d}",
                vac.len()
            )));
        }
        if (vac.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::DimensionMismatch(format!(
                "vacuum vector has norm {}",
                vac.norm()
            )));
        }
        v = v.kronecker(vac);
    }
    let kept: usize = dims[..keep].iter().product();
    let sliced = v.len();
    let support: Vec<(usize, C64)> = v
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 0.0)
        .map(|(i, &z)| (i, z))
        .collect();
    let mut out = ComplexMatrix::zeros(kept, kept);
    for a in 0..kept {
        for b in 0..kept {
            let mut acc = ZERO;
            for &(ci, cv) in &support {
                for &(di, dv) in &support {
                    acc += cv.conj() * y[(a * sliced + ci, b * sliced + di)] * dv;
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Matrix JSON object: `{"rows", "cols", "re", "im"}` with row-major nested
/// arrays of doubles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let grab = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            re: grab(|z| z.re),
            im: grab(|z| z.im),
        }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        let shape_ok = |rows: &Vec<Vec<f64>>| {
            rows.len() == j.rows && rows.iter().all(|r| r.len() == j.cols)
        };
        if j.rows == 0 || j.cols == 0 || !shape_ok(&j.re) || !shape_ok(&j.im) {
            return Err(Error::DimensionMismatch(format!(
                "matrix JSON does not describe a {}x{} matrix",
                j.rows, j.cols
            )));
        }
        Ok(ComplexMatrix::from_fn(j.rows, j.cols, |r, c| {
            C64::new(j.re[r][c], j.im[r][c])
        }))
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrix serialization")
}

pub fn matrix_from_json(s: &str) -> Result<ComplexMatrix> {
    let j: MatrixJson = serde_json::from_str(s)?;
    ComplexMatrix::try_from(&j)
}
