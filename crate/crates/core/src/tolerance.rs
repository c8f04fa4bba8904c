//! Central numerical tolerances.
//!
//! Every check in the crate reads its threshold from here so that a run can
//! be tightened or relaxed from the experiment configuration in one place.

use serde::{Deserialize, Serialize};

/// Allowed Hermitian defect ‖H − H*‖ for inputs to the spectral routines.
pub const HERMITIAN: f64 = 1e-10;
/// Relative eigenvalue clustering threshold, scaled by `1 + ‖H‖`.
pub const CLUSTER_REL: f64 = 1e-8;
/// Relative rank threshold for quotienting a Gram matrix, scaled by `1 + ‖φ‖`.
pub const DEGENERACY_REL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a kernel or Gram matrix.
pub const PSD: f64 = 1e-10;
/// Allowed negative eigenvalue of a Gram matrix handed to the Clifford builder.
pub const GRAM_PSD: f64 = 1e-8;
/// Denominators below this mark a report row as skipped.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;
/// Exact sub-identities asserted by the harness.
pub const IDENTITY: f64 = 1e-9;
/// Largest admissible Fock dimension.
pub const MAX_FOCK_DIM: usize = 1 << 12;
/// Largest admissible side of a dilation matrix.
pub const MAX_TOTAL_DIM: usize = 4096;

/// Overridable copy of the defaults above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub hermitian: f64,
    pub cluster_rel: f64,
    pub degeneracy_rel: f64,
    pub psd: f64,
    pub identity: f64,
    pub degenerate_denominator: f64,
    pub max_fock_dim: usize,
    pub max_total_dim: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN,
            cluster_rel: CLUSTER_REL,
            degeneracy_rel: DEGENERACY_REL,
            psd: PSD,
            identity: IDENTITY,
            degenerate_denominator: DEGENERATE_DENOMINATOR,
            max_fock_dim: MAX_FOCK_DIM,
            max_total_dim: MAX_TOTAL_DIM,
        }
    }
}
