//! Fock-space representation of the exterior algebra over a possibly
//! degenerate Gram matrix.
//!
//! The Gram matrix `φ` defines the inner product `⟨ξ, η⟩ = ξᵀ φ η` on `ℝ^d`.
//! Its degenerate part is quotiented out through the eigendecomposition
//! `φ = W Λ Wᵀ`: the generators `e_i` are sent to rows of `V = W Λ^{1/2}`
//! (restricted to the nonzero eigenvalues), coordinates with respect to an
//! orthonormal basis `f_1, …, f_r` of the quotient. The antisymmetric Fock space
//! over `ℝ^r` is realised on the occupation-number basis of `(ℂ²)^{⊗r}` with
//! Jordan–Wigner creation operators, and the vacuum is the all-empty state.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matcore::{self, c, ComplexMatrix, ComplexVector, C64, ONE};
use crate::tolerance::{self, Tolerances};

#[derive(Debug, Clone)]
pub struct CliffordRep {
    gram: DMatrix<f64>,
    embedding: DMatrix<f64>,
    fock_dim: usize,
    /// `l(f_k)` for the orthonormal quotient basis.
    creation: Vec<ComplexMatrix>,
    /// `s(e_i)` for the generators.
    s_ops: Vec<ComplexMatrix>,
    vacuum: ComplexVector,
}

fn pauli_z() -> ComplexMatrix {
    matcore::real_diag(&[1.0, -1.0])
}

/// `|1⟩⟨0|`: raises the occupation of one mode.
fn raise() -> ComplexMatrix {
    matcore::unit(2, 1, 0)
}

fn jordan_wigner_creation(mode: usize, modes: usize) -> ComplexMatrix {
    let mut op = ComplexMatrix::identity(1, 1);
    for k in 0..modes {
        let factor = match k.cmp(&mode) {
            std::cmp::Ordering::Less => pauli_z(),
            std::cmp::Ordering::Equal => raise(),
            std::cmp::Ordering::Greater => ComplexMatrix::identity(2, 2),
        };
        op = matcore::kron(&op, &factor);
    }
    op
}

pub fn build_clifford(gram: &DMatrix<f64>) -> Result<CliffordRep> {
    build_clifford_with(gram, &Tolerances::default())
}

pub fn build_clifford_with(gram: &DMatrix<f64>, tol: &Tolerances) -> Result<CliffordRep> {
    let d = gram.nrows();
    if d == 0 || gram.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "Gram matrix must be square and nonempty, got {}x{}",
            gram.nrows(),
            gram.ncols()
        )));
    }
    let defect = (gram - gram.transpose()).abs().max();
    if defect > tol.hermitian {
        return Err(Error::NotHermitian { defect });
    }
    let sym = (gram + gram.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.min();
    if min_eigenvalue < -tolerance::GRAM_PSD {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    let scale = 1.0 + sym.abs().row_sum().max();
    let cutoff = tol.degeneracy_rel * scale;
    let mut kept: Vec<usize> = (0..d).filter(|&k| eig.eigenvalues[k] > cutoff).collect();
    kept.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let r = kept.len();
    let fock_dim = 1usize
        .checked_shl(r as u32)
        .filter(|&f| f <= tol.max_fock_dim)
        .ok_or(Error::CapExceeded {
            what: "Fock dimension",
            size: r,
            cap: tol.max_fock_dim,
        })?;

    let mut embedding = DMatrix::<f64>::zeros(d, r);
    for (col, &k) in kept.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        // Fix the eigenvector sign: largest entry positive.
        let pivot = v
            .iter()
            .copied()
            .fold(0.0_f64, |a, x| if x.abs() > a.abs() { x } else { a });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        let root = eig.eigenvalues[k].sqrt();
        for i in 0..d {
            embedding[(i, col)] = sign * v[i] * root;
        }
    }

    let creation: Vec<ComplexMatrix> = (0..r).map(|k| jordan_wigner_creation(k, r)).collect();
    let mut vacuum = ComplexVector::zeros(fock_dim);
    vacuum[0] = ONE;
    let mut rep = CliffordRep {
        gram: sym,
        embedding,
        fock_dim,
        creation,
        s_ops: Vec::new(),
        vacuum,
    };
    rep.s_ops = (0..d)
        .map(|i| {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            rep.field(&e)
        })
        .collect();
    Ok(rep)
}

impl CliffordRep {
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Rank of the Gram matrix after the quotient.
    pub fn effective_dim(&self) -> usize {
        self.creation.len()
    }

    /// `d × r` matrix with `V Vᵀ = φ`.
    pub fn embedding(&self) -> &DMatrix<f64> {
        &self.embedding
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn generators(&self) -> usize {
        self.gram.nrows()
    }

    pub fn vacuum(&self) -> &ComplexVector {
        &self.vacuum
    }

    /// `s(e_i)`.
    pub fn s(&self, i: usize) -> &ComplexMatrix {
        &self.s_ops[i]
    }

    pub fn s_ops(&self) -> &[ComplexMatrix] {
        &self.s_ops
    }

    pub fn inner(&self, xi: &DVector<f64>, eta: &DVector<f64>) -> f64 {
        (xi.transpose() * &self.gram * eta)[(0, 0)]
    }

    fn quotient_coords(&self, xi: &DVector<f64>) -> DVector<f64> {
        assert_eq!(xi.len(), self.generators(), "vector length");
        self.embedding.transpose() * xi
    }

    /// Creation operator `l(ξ)`.
    pub fn creation(&self, xi: &DVector<f64>) -> ComplexMatrix {
        let coords = self.quotient_coords(xi);
        let mut op = ComplexMatrix::zeros(self.fock_dim, self.fock_dim);
        for (k, a) in self.creation.iter().enumerate() {
            op += a * c(coords[k]);
        }
        op
    }

    /// Annihilation operator `l*(ξ)`, the adjoint of `l(ξ)`.
    pub fn annihilation(&self, xi: &DVector<f64>) -> ComplexMatrix {
        self.creation(xi).adjoint()
    }

    /// Field operator `s(ξ) = l(ξ) + l*(ξ)`.
    pub fn field(&self, xi: &DVector<f64>) -> ComplexMatrix {
        let l = self.creation(xi);
        let ad = l.adjoint();
        l + ad
    }

    /// Vacuum state `⟨Y Ω, Ω⟩`.
    pub fn vacuum_trace(&self, y: &ComplexMatrix) -> Result<C64> {
        if y.nrows() != self.fock_dim || y.ncols() != self.fock_dim {
            return Err(Error::DimensionMismatch(format!(
                "operator side {} on a Fock space of dimension {}",
                y.nrows(),
                self.fock_dim
            )));
        }
        Ok((self.vacuum.adjoint() * y * &self.vacuum)[(0, 0)])
    }

    /// `‖s(ξ)s(η) + s(η)s(ξ) − 2⟨ξ,η⟩ I‖`.
    pub fn car_defect(&self, xi: &DVector<f64>, eta: &DVector<f64>) -> Result<f64> {
        let d = self.generators();
        if xi.len() != d || eta.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "vectors of length {} and {} for {d} generators",
                xi.len(),
                eta.len()
            )));
        }
        let sx = self.field(xi);
        let se = self.field(eta);
        let anti = &sx * &se + &se * &sx;
        let target = ComplexMatrix::identity(self.fock_dim, self.fock_dim) * c(2.0 * self.inner(xi, eta));
        Ok(matcore::op_norm(&(anti - target)))
    }

    /// Product `s(e_{i_1}) ⋯ s(e_{i_k})`; the empty word is the identity.
    pub fn word(&self, letters: &[usize]) -> ComplexMatrix {
        letters.iter().fold(
            ComplexMatrix::identity(self.fock_dim, self.fock_dim),
            |acc, &i| acc * &self.s_ops[i],
        )
    }
}

impl Default for CliffordRep {
    /// Representation over the zero-dimensional space: scalars only.
    fn default() -> Self {
        CliffordRep {
            gram: DMatrix::zeros(0, 0),
            embedding: DMatrix::zeros(0, 0),
            fock_dim: 1,
            creation: Vec::new(),
            s_ops: Vec::new(),
            vacuum: ComplexVector::from_element(1, ONE),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{from_real, max_abs};

    fn basis(d: usize, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        e
    }

    #[test]
    fn one_generator() {
        let r = build_clifford(&DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(r.fock_dim(), 2);
        assert!(max_abs(&(r.s(0) - from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]))) < 1e-15);
    }

    #[test]
    fn orthonormal_pair_matches_hand_built_representation() {
        let r = build_clifford(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(r.fock_dim(), 4);
        // Hand-built CAR pair on ℂ² ⊗ ℂ²: X ⊗ I and Z ⊗ X.
        let x = from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let z = from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let id = ComplexMatrix::identity(2, 2);
        let hand = [matcore::kron(&x, &id), matcore::kron(&z, &x)];
        for h in &hand {
            assert!(max_abs(&(h * h - ComplexMatrix::identity(4, 4))) < 1e-15);
        }
        assert!(max_abs(&(&hand[0] * &hand[1] + &hand[1] * &hand[0])) < 1e-15);
        let anti = r.s(0) * r.s(1) + r.s(1) * r.s(0);
        assert!(max_abs(&anti) < 1e-15);
        for i in 0..2 {
            // Same vacuum moments as the hand-built pair.
            for j in 0..2 {
                let ours = r.vacuum_trace(&(r.s(i) * r.s(j))).unwrap();
                assert!((ours - (&hand[i] * &hand[j])[(0, 0)]).norm() < 1e-15);
            }
        }
        assert!(r.car_defect(&basis(2, 0), &basis(2, 1)).unwrap() < 1e-15);
    }

    #[test]
    fn degenerate_gram_identifies_generators() {
        let r = build_clifford(&DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert_eq!(r.effective_dim(), 1);
        assert_eq!(r.fock_dim(), 2);
        assert!(max_abs(&(r.s(0) - r.s(1))) < 1e-12);
        let v = DVector::from_vec(vec![1.0, -1.0]);
        assert!(matcore::op_norm(&r.field(&v)) < 1e-9);
    }

    #[test]
    fn vacuum_trace_examples() {
        let gram = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.2, 0.5, 1.0, -0.3, 0.2, -0.3, 1.0]);
        let r = build_clifford(&gram).unwrap();
        let id = ComplexMatrix::identity(r.fock_dim(), r.fock_dim());
        assert_eq!(r.vacuum_trace(&id).unwrap(), ONE);
        for i in 0..3 {
            assert!(r.vacuum_trace(r.s(i)).unwrap().norm() < 1e-15);
            for j in 0..3 {
                let t = r.vacuum_trace(&(r.s(i) * r.s(j))).unwrap();
                assert!((t.re - gram[(i, j)]).abs() < 1e-12 && t.im.abs() < 1e-12);
            }
        }
        assert!(r.vacuum_trace(&ComplexMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn car_defect_edge_cases() {
        let r = build_clifford(&DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert!(r.car_defect(&basis(1, 0), &basis(1, 0)).unwrap() < 1e-15);
        assert_eq!(r.car_defect(&DVector::zeros(1), &basis(1, 0)).unwrap(), 0.0);
        assert!(r.car_defect(&DVector::zeros(2), &basis(1, 0)).is_err());
    }

    #[test]
    fn rejects_indefinite_and_oversized() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(build_clifford(&bad), Err(Error::NotPositive { .. })));
        let tol = Tolerances {
            max_fock_dim: 4,
            ..Tolerances::default()
        };
        assert!(matches!(
            build_clifford_with(&DMatrix::identity(3, 3), &tol),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn annihilation_is_adjoint_of_creation() {
        let r = build_clifford(&DMatrix::identity(2, 2)).unwrap();
        let xi = DVector::from_vec(vec![0.3, -0.7]);
        let l = r.creation(&xi);
        assert!(max_abs(&(r.annihilation(&xi) - l.adjoint())) < 1e-15);
        // l(ξ) Ω is the one-particle vector ξ.
        let one = &l * r.vacuum();
        assert!((one.norm() - xi.norm()).abs() < 1e-15);
    }
}
