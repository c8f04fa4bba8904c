//! Semigroup BMO norm of a commutator under the perturbation semigroup
//! `exp(-tF)`, compared with its operator norm.

use ncbmo::bmo::bmo_norm;
use ncbmo::doi::{default_grid, SchurSemigroup};
use ncbmo::harness::instances::{random_contraction, random_hermitian, rng_for};
use ncbmo::matcore::{self, eig_hermitian_default};

fn main() -> ncbmo::Result<()> {
    let mut rng = rng_for(3, "example", 8, 0);
    let a = random_hermitian(&mut rng, 8);
    let x = random_contraction(&mut rng, 8);
    let d = eig_hermitian_default(&a)?;
    let s = SchurSemigroup::perturbation(&d, f64::abs)?;

    let report = bmo_norm(&s, &x, &default_grid())?;
    println!("BMO norm:   {:.6}", report.max_norm);
    println!("bmo norm:   {:.6}", report.bmo_small_norm);
    println!("operator:   {:.6}", matcore::op_norm(&x));
    Ok(())
}
