//! Divided differences as Schur multipliers: the commutator `[f(A), X]`
//! equals the multiplier of `f^{[1]}` applied to `[A, X]`.

use ncbmo::doi::{divided_difference_kernel, schur_apply};
use ncbmo::harness::instances::{random_contraction, random_hermitian, rng_for};
use ncbmo::matcore::{self, eig_hermitian_default};

fn main() -> ncbmo::Result<()> {
    let mut rng = rng_for(2, "example", 8, 0);
    let a = random_hermitian(&mut rng, 8);
    let x = random_contraction(&mut rng, 8);
    let d = eig_hermitian_default(&a)?;

    let f = f64::abs;
    let kernel = divided_difference_kernel(f, d.spectrum());
    let lhs = matcore::commutator(&matcore::apply_scalar_function(&d, f)?, &x);
    let rhs = schur_apply(&kernel, &d, &matcore::commutator(&a, &x))?;
    println!("factorization defect: {:e}", matcore::op_norm(&(&lhs - &rhs)));

    let ratio = matcore::schatten_norm(&lhs, 2.0)? / matcore::schatten_norm(&matcore::commutator(&a, &x), 2.0)?;
    println!("||[|A|, X]||_2 / ||[A, X]||_2 = {ratio:.4}");
    Ok(())
}
