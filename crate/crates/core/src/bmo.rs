//! Semigroup BMO norms for Schur multiplier semigroups.
//!
//! For `x` in `M°` the column norm is
//! `sup_t ‖T_t(x*x) − T_t(x)* T_t(x)‖^{1/2}`, the row norm is the column norm
//! of `x*`, and the BMO norm is their maximum. The supremum over `t ≥ 0` is
//! taken over a finite grid together with the `t → ∞` limit, where the kernel
//! collapses to the indicator of `F = 0`.
//!
//! All evaluation happens in the eigenbasis of the semigroup's resolution,
//! where `T_t` is an entrywise product and the operator norm is unchanged.

use serde::{Serialize, Serializer};

pub use crate::doi::SchurSemigroup;
use crate::error::{Error, Result};
use crate::matcore::{self, c, ComplexMatrix};

/// Kernel of `T_t` expanded to the basis of the resolution.
struct Flow<'a> {
    semigroup: &'a SchurSemigroup,
}

impl Flow<'_> {
    fn expanded_kernel(&self, t: f64) -> Result<ComplexMatrix> {
        let k = self.semigroup.kernel(t)?;
        let labels = self.semigroup.resolution().labels();
        let n = labels.len();
        Ok(ComplexMatrix::from_fn(n, n, |a, b| k.value(labels[a], labels[b])))
    }
}

fn evaluation_points(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(&t) = grid.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let mut pts = grid.to_vec();
    if !pts.iter().any(|t| t.is_infinite()) {
        pts.push(f64::INFINITY);
    }
    Ok(pts)
}

/// `x − lim_{t→∞} T_t(x)`: removes the entries on which the generator
/// vanishes. For the spectral semigroup this is `x − Σ_λ P_λ x P_λ`.
pub fn project_circ(s: &SchurSemigroup, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(x - s.limit(x)?)
}

/// `T_t(x*x) − T_t(x)* T_t(x)`.
pub fn variance(s: &SchurSemigroup, t: f64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let tx = s.apply(t, x)?;
    Ok(s.apply(t, &(x.adjoint() * x))? - tx.adjoint() * tx)
}

/// Which square appears in a variance-type expression.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Column,
    Row,
}

fn square(y: &ComplexMatrix, side: Side) -> ComplexMatrix {
    match side {
        Side::Column => y.adjoint() * y,
        Side::Row => y * y.adjoint(),
    }
}

fn sup_over<F>(points: &[f64], mut value: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut best = (0.0, points[0]);
    for &t in points {
        let v = value(t)?;
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// `(sup value, argmax t)` of the column variance of `x`.
fn column_sup(s: &SchurSemigroup, x: &ComplexMatrix, points: &[f64]) -> Result<(f64, f64)> {
    let flow = Flow { semigroup: s };
    let y = s.resolution().compress(x);
    let yy = y.adjoint() * &y;
    let (v, t) = sup_over(points, |t| {
        let k = flow.expanded_kernel(t)?;
        let ty = k.component_mul(&y);
        let var = k.component_mul(&yy) - ty.adjoint() * &ty;
        Ok(matcore::op_norm(&var))
    })?;
    Ok((v.sqrt(), t))
}

fn small_sup(
    s: &SchurSemigroup,
    x: &ComplexMatrix,
    points: &[f64],
    side: Side,
) -> Result<(f64, f64)> {
    let flow = Flow { semigroup: s };
    let y = s.resolution().compress(x);
    let (v, t) = sup_over(points, |t| {
        let k = flow.expanded_kernel(t)?;
        let diff = &y - k.component_mul(&y);
        let var = k.component_mul(&square(&diff, side));
        Ok(matcore::op_norm(&var))
    })?;
    Ok((v.sqrt(), t))
}

/// Column BMO norm over `grid ∪ {∞}`.
pub fn bmo_column_norm(s: &SchurSemigroup, x: &ComplexMatrix, grid: &[f64]) -> Result<f64> {
    let pts = evaluation_points(grid)?;
    Ok(column_sup(s, x, &pts)?.0)
}

/// Row BMO norm, the column norm of `x*`.
pub fn bmo_row_norm(s: &SchurSemigroup, x: &ComplexMatrix, grid: &[f64]) -> Result<f64> {
    bmo_column_norm(s, &x.adjoint(), grid)
}

/// `sup_t ‖T_t(|x − T_t x|²)‖^{1/2}`, maximized over the column and row
/// variants.
pub fn bmo_small_norm(s: &SchurSemigroup, x: &ComplexMatrix, grid: &[f64]) -> Result<f64> {
    let pts = evaluation_points(grid)?;
    let col = small_sup(s, x, &pts, Side::Column)?.0;
    let row = small_sup(s, x, &pts, Side::Row)?.0;
    Ok(col.max(row))
}

fn serialize_time<S: Serializer>(t: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if t.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*t)
    }
}

fn serialize_times<S: Serializer>(ts: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(ts.len()))?;
    for t in ts {
        if t.is_infinite() {
            seq.serialize_element("inf")?;
        } else {
            seq.serialize_element(t)?;
        }
    }
    seq.end()
}

/// Column, row and max BMO norms plus the small-bmo variant, with the times
/// at which each supremum was attained. Infinite times serialize as `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BmoReport {
    pub column_norm: f64,
    pub row_norm: f64,
    pub max_norm: f64,
    pub bmo_small_norm: f64,
    #[serde(serialize_with = "serialize_time")]
    pub argmax_column_t: f64,
    #[serde(serialize_with = "serialize_time")]
    pub argmax_row_t: f64,
    #[serde(serialize_with = "serialize_time")]
    pub argmax_small_t: f64,
    /// `‖x − project_circ(x)‖`; nonzero means `x` is not in `M°` and the
    /// norms are those of the given representative.
    pub circ_defect: f64,
    #[serde(serialize_with = "serialize_times")]
    pub grid: Vec<f64>,
}

impl BmoReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization")
    }
}

pub fn bmo_norm(s: &SchurSemigroup, x: &ComplexMatrix, grid: &[f64]) -> Result<BmoReport> {
    let pts = evaluation_points(grid)?;
    let (column_norm, argmax_column_t) = column_sup(s, x, &pts)?;
    let (row_norm, argmax_row_t) = column_sup(s, &x.adjoint(), &pts)?;
    let small_col = small_sup(s, x, &pts, Side::Column)?;
    let small_row = small_sup(s, x, &pts, Side::Row)?;
    let (bmo_small_norm, argmax_small_t) = if small_col.0 >= small_row.0 {
        small_col
    } else {
        small_row
    };
    let circ_defect = matcore::op_norm(&s.limit(x)?);
    Ok(BmoReport {
        column_norm,
        row_norm,
        max_norm: column_norm.max(row_norm),
        bmo_small_norm,
        argmax_column_t,
        argmax_row_t,
        argmax_small_t,
        circ_defect,
        grid: pts,
    })
}

/// Smallest eigenvalue of any column variance over the grid (Kadison–Schwarz
/// margin; nonnegative for a completely positive unital flow).
pub fn min_variance_eigenvalue(s: &SchurSemigroup, x: &ComplexMatrix, grid: &[f64]) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for &t in &evaluation_points(grid)? {
        let v = variance(s, t, x)?;
        let v = (&v + v.adjoint()) * c(0.5);
        worst = worst.min(matcore::min_eigenvalue(&v)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doi::default_grid;
    use crate::matcore::{eig_hermitian, from_real, max_abs, real_diag, unit, C64};

    fn two_point() -> SchurSemigroup {
        let d = eig_hermitian(&real_diag(&[0.0, 1.0]), 1e-8).unwrap();
        SchurSemigroup::perturbation(&d, |l| l).unwrap()
    }

    #[test]
    fn circ_projection_examples() {
        let s = two_point();
        assert!(max_abs(&project_circ(&s, &real_diag(&[2.0, -1.0])).unwrap()) < 1e-15);
        assert!(max_abs(&(project_circ(&s, &unit(2, 0, 1)).unwrap() - unit(2, 0, 1))) < 1e-15);
        assert!(max_abs(&project_circ(&s, &ComplexMatrix::identity(2, 2)).unwrap()) < 1e-15);
        let x = from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let once = project_circ(&s, &x).unwrap();
        assert!(max_abs(&(project_circ(&s, &once).unwrap() - &once)) < 1e-15);
    }

    #[test]
    fn closed_form_two_point_flow() {
        // Variance of e12 is (1 − e^{−4t}) e22, so every norm tends to 1.
        let s = two_point();
        for t in [0.0, 0.25, 1.0, 4.0] {
            let v = variance(&s, t, &unit(2, 0, 1)).unwrap();
            let expect = real_diag(&[0.0, 1.0 - (-4.0 * t).exp()]);
            assert!(max_abs(&(v - expect)) < 1e-14);
        }
        let g = default_grid();
        assert!((bmo_column_norm(&s, &unit(2, 0, 1), &g).unwrap() - 1.0).abs() < 1e-14);
        assert!((bmo_column_norm(&s, &unit(2, 1, 0), &g).unwrap() - 1.0).abs() < 1e-14);
        let r = bmo_norm(&s, &unit(2, 0, 1), &g).unwrap();
        assert!((r.max_norm - 1.0).abs() < 1e-14);
        assert!(r.argmax_column_t >= 1.0);
        assert_eq!(r.circ_defect, 0.0);
    }

    #[test]
    fn small_bmo_closed_form() {
        // x − T_t x = (1 − e^{−2t}) e12, so the small variance is (1 − e^{−2t})² e22.
        let s = two_point();
        for t in [0.5, 2.0] {
            let v = small_sup(&s, &unit(2, 0, 1), &[t], Side::Column).unwrap().0;
            let expect = 1.0 - (-2.0 * t).exp();
            assert!((v - expect).abs() < 1e-14);
        }
        assert!((bmo_small_norm(&s, &unit(2, 0, 1), &default_grid()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trivial_inputs() {
        let s = two_point();
        let g = default_grid();
        assert_eq!(bmo_column_norm(&s, &ComplexMatrix::zeros(2, 2), &g).unwrap(), 0.0);
        assert_eq!(bmo_small_norm(&s, &ComplexMatrix::zeros(2, 2), &g).unwrap(), 0.0);
        assert!(bmo_small_norm(&s, &real_diag(&[1.0, 3.0]), &g).unwrap() < 1e-15);
        assert!(matches!(bmo_column_norm(&s, &unit(2, 0, 1), &[]), Err(Error::EmptyGrid)));
    }

    #[test]
    fn hermitian_rows_equal_columns_and_homogeneity() {
        let d = eig_hermitian(&real_diag(&[-0.5, 0.25, 1.0]), 1e-8).unwrap();
        let s = SchurSemigroup::perturbation(&d, f64::abs).unwrap();
        let x = from_real(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, -1.0, 2.0, -1.0, 0.0]);
        let g = default_grid();
        let r = bmo_norm(&s, &x, &g).unwrap();
        assert!((r.row_norm - r.column_norm).abs() < 1e-14);
        let scaled = bmo_norm(&s, &(&x * C64::new(0.0, -3.0)), &g).unwrap();
        assert!((scaled.max_norm - 3.0 * r.max_norm).abs() < 1e-12);
        let json = r.to_json();
        assert!(json.contains("\"grid\":[0.0,"));
        assert!(json.contains("\"inf\""));
    }
}
