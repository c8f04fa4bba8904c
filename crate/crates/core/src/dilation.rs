//! Markov dilation of a discrete Schur-multiplier semigroup on the truncated
//! tower `M ⊗ Γ^{⊗K}`, where `Γ` is the Clifford algebra of the kernel `φ`.
//!
//! `π_k(x) = Σ P_i x P_j ⊗ (s(e_i)s(e_j))^{⊗k} ⊗ I^{⊗(K−k)}` and `E_m` slices
//! legs `m+1..K` with the vacuum state. Both are returned as matrices of full
//! system dimension.

use rayon::prelude::*;
use serde::Serialize;

use crate::clifford::{build_clifford_with, CliffordRep};
use crate::doi::{schur_apply, Kernel};
use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix, ComplexVector, SpectralDecomposition};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct DilationSystem {
    base: SpectralDecomposition,
    phi: Kernel,
    clifford: CliffordRep,
    depth: usize,
    dims: Vec<usize>,
    projections: Vec<ComplexMatrix>,
    /// `s(e_i) s(e_j)`, indexed `i * m + j`.
    pair_products: Vec<ComplexMatrix>,
}

pub fn build_dilation(d: &SpectralDecomposition, phi: &Kernel, depth: usize) -> Result<DilationSystem> {
    build_dilation_with(d, phi, depth, &Tolerances::default())
}

pub fn build_dilation_with(
    d: &SpectralDecomposition,
    phi: &Kernel,
    depth: usize,
    tol: &Tolerances,
) -> Result<DilationSystem> {
    if !phi.index().matches(&matcore::SpectralIndex::Points(d.spectrum().to_vec()), tol.cluster_rel) {
        return Err(Error::SpectrumMismatch(format!(
            "kernel over {} points, decomposition over {}",
            phi.len(),
            d.spectrum().len()
        )));
    }
    let imag = phi.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let sym = phi.symmetry_defect();
    if imag > tol.hermitian || sym > tol.hermitian {
        return Err(Error::NotHermitian { defect: imag.max(sym) });
    }
    let unit_defect = phi.diagonal_defect();
    if unit_defect > tol.hermitian {
        return Err(Error::NotUnital { defect: unit_defect });
    }
    let gram = phi.real_matrix();
    let min_eigenvalue = gram.clone().symmetric_eigen().eigenvalues.min();
    if min_eigenvalue < -tol.psd {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    let clifford = build_clifford_with(&gram, tol)?;
    let fock = clifford.fock_dim();
    let n = d.side();
    let total = (0..depth).try_fold(n, |acc, _| acc.checked_mul(fock));
    match total {
        Some(t) if t <= tol.max_total_dim => {}
        _ => {
            return Err(Error::CapExceeded {
                what: "dilation dimension",
                size: total.unwrap_or(usize::MAX),
                cap: tol.max_total_dim,
            })
        }
    }
    let mut dims = vec![n];
    dims.extend(std::iter::repeat_n(fock, depth));
    let m = phi.len();
    let pair_products = (0..m * m)
        .map(|ij| clifford.s(ij / m) * clifford.s(ij % m))
        .collect();
    Ok(DilationSystem {
        base: d.clone(),
        phi: phi.clone(),
        clifford,
        depth,
        dims,
        projections: d.projections(),
        pair_products,
    })
}

impl DilationSystem {
    pub fn base(&self) -> &SpectralDecomposition {
        &self.base
    }

    pub fn phi(&self) -> &Kernel {
        &self.phi
    }

    pub fn clifford(&self) -> &CliffordRep {
        &self.clifford
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Leg dimensions `(n, 2^r, …, 2^r)`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn fock(&self) -> usize {
        self.clifford.fock_dim()
    }

    fn identity_legs(&self, legs: usize) -> ComplexMatrix {
        let side = self.fock().pow(legs as u32);
        ComplexMatrix::identity(side, side)
    }

    fn check_base(&self, x: &ComplexMatrix) -> Result<()> {
        let n = self.base.side();
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "operand {}x{} on a base of side {n}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// `π_k(x)`.
    pub fn pi(&self, x: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
        if k > self.depth {
            return Err(Error::OutOfRange { index: k, max: self.depth });
        }
        self.check_base(x)?;
        let m = self.projections.len();
        let n = self.base.side();
        let tail = self.identity_legs(self.depth - k);
        let legs_side = tail.nrows() * self.fock().pow(k as u32);
        let total = self.total_dim();
        let mut out = ComplexMatrix::zeros(total, total);
        let dst = out.as_mut_slice();
        for i in 0..m {
            for j in 0..m {
                let block = &self.projections[i] * x * &self.projections[j];
                if block.iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                let w = &self.pair_products[i * m + j];
                let legs = (0..k).fold(ComplexMatrix::identity(1, 1), |acc, _| matcore::kron(&acc, w));
                let legs = matcore::kron(&legs, &tail);
                let src = legs.as_slice();
                // Column-major accumulation of block ⊗ legs.
                for b in 0..n {
                    for a in 0..n {
                        let coef = block[(a, b)];
                        if coef.norm() == 0.0 {
                            continue;
                        }
                        for col in 0..legs_side {
                            let d0 = (b * legs_side + col) * total + a * legs_side;
                            let s0 = col * legs_side;
                            for (o, v) in dst[d0..d0 + legs_side].iter_mut().zip(&src[s0..s0 + legs_side]) {
                                *o += coef * v;
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `E_m(Y)`: vacuum slice of legs `m+1..K`, re-embedded at full dimension.
    pub fn conditional_expect(&self, y: &ComplexMatrix, m: usize) -> Result<ComplexMatrix> {
        if m > self.depth {
            return Err(Error::OutOfRange { index: m, max: self.depth });
        }
        let vacs: Vec<ComplexVector> = vec![self.clifford.vacuum().clone(); self.depth - m];
        let sliced = matcore::slice_vacuum(y, &self.dims, m + 1, &vacs)?;
        Ok(matcore::kron(&sliced, &self.identity_legs(self.depth - m)))
    }

    /// `T(x)`: the Schur multiplier with kernel `φ`.
    pub fn step(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        schur_apply(&self.phi, &self.base, x)
    }

    pub fn step_power(&self, x: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
        (0..k).try_fold(x.clone(), |acc, _| self.step(&acc))
    }

    /// `‖E_m(π_k(x)) − π_m(T^{k−m}(x))‖_∞` for one sample and one pair.
    pub fn dilation_defect(&self, x: &ComplexMatrix, m: usize, k: usize) -> Result<f64> {
        if k < m {
            return Err(Error::OutOfRange { index: m, max: k });
        }
        let lhs = self.conditional_expect(&self.pi(x, k)?, m)?;
        let rhs = self.pi(&self.step_power(x, k - m)?, m)?;
        Ok(matcore::op_norm(&(lhs - rhs)))
    }

    /// `‖π_k(xy) − π_k(x)π_k(y)‖_∞`.
    pub fn multiplicativity_defect(&self, x: &ComplexMatrix, y: &ComplexMatrix, k: usize) -> Result<f64> {
        let joint = self.pi(&(x * y), k)?;
        let split = self.pi(x, k)? * self.pi(y, k)?;
        Ok(matcore::op_norm(&(joint - split)))
    }
}

/// Maximum dilation defect over all samples and pairs `(m, k)` with `m ≤ k`.
/// Defects are measured in the Frobenius norm, an upper bound for the
/// operator norm that stays cheap at full tower dimension.
pub fn verify_dilation(s: &DilationSystem, samples: &[ComplexMatrix], pairs: &[(usize, usize)]) -> Result<f64> {
    if let Some(&(m, k)) = pairs.iter().find(|&&(m, k)| m > k || k > s.depth) {
        return Err(Error::OutOfRange { index: m.max(k), max: s.depth });
    }
    let per_sample = samples
        .par_iter()
        .map(|x| {
            let mut powers = vec![x.clone()];
            for _ in 0..s.depth {
                let next = s.step(powers.last().expect("nonempty"))?;
                powers.push(next);
            }
            let mut worst = 0.0_f64;
            for k in 0..=s.depth {
                if !pairs.iter().any(|&(_, kk)| kk == k) {
                    continue;
                }
                let top = s.pi(x, k)?;
                for &(m, _) in pairs.iter().filter(|&&(_, kk)| kk == k) {
                    let lhs = s.conditional_expect(&top, m)?;
                    let rhs = s.pi(&powers[k - m], m)?;
                    worst = worst.max((lhs - rhs).norm());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_sample.into_iter().fold(0.0, f64::max))
}

/// All pairs `(m, k)` with `0 ≤ m ≤ k ≤ depth`.
pub fn all_pairs(depth: usize) -> Vec<(usize, usize)> {
    (0..=depth).flat_map(|k| (0..=k).map(move |m| (m, k))).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PathModulusRow {
    pub sample: usize,
    pub s: usize,
    pub t: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn normalized_l2(m: &ComplexMatrix) -> f64 {
    (m.norm_squared() / m.nrows() as f64).sqrt()
}

/// `‖π_t x − π_s x‖₂² ≤ 2 ‖x‖₂ ‖x − T^{|s−t|} x‖₂` with normalized traces.
pub fn path_modulus_check(
    s: &DilationSystem,
    samples: &[ComplexMatrix],
    pairs: &[(usize, usize)],
) -> Result<Vec<PathModulusRow>> {
    if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a.max(b) > s.depth) {
        return Err(Error::OutOfRange { index: a.max(b), max: s.depth });
    }
    let per_sample = samples
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let pis = (0..=s.depth).map(|k| s.pi(x, k)).collect::<Result<Vec<_>>>()?;
            let x_norm = normalized_l2(x);
            pairs
                .iter()
                .map(|&(a, b)| {
                    let lhs = normalized_l2(&(&pis[b] - &pis[a])).powi(2);
                    let moved = x - s.step_power(x, a.abs_diff(b))?;
                    let rhs = 2.0 * x_norm * normalized_l2(&moved);
                    Ok(PathModulusRow {
                        sample: i,
                        s: a,
                        t: b,
                        lhs,
                        rhs,
                        holds: lhs <= rhs + 1e-9,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_sample.into_iter().flatten().collect())
}

/// `‖T^k(x) − I_{φ^k}(x)‖_∞`: iterating the multiplier against the entrywise
/// power of its kernel.
pub fn markov_composition_defect(
    phi: &Kernel,
    d: &SpectralDecomposition,
    x: &ComplexMatrix,
    k: u32,
) -> Result<f64> {
    let iterated = (0..k).try_fold(x.clone(), |acc, _| schur_apply(phi, d, &acc))?;
    let direct = schur_apply(&phi.entrywise_power(k), d, x)?;
    Ok(matcore::op_norm(&(iterated - direct)))
}
