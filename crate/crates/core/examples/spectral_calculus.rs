//! Eigendecomposition, functional calculus and Schatten norms of a random
//! Hermitian matrix.

use ncbmo::harness::instances::{random_hermitian, rng_for};
use ncbmo::matcore::{self, eig_hermitian_default};

fn main() -> ncbmo::Result<()> {
    let mut rng = rng_for(1, "example", 6, 0);
    let a = random_hermitian(&mut rng, 6);
    let d = eig_hermitian_default(&a)?;
    println!("spectrum: {:?}", d.spectrum());
    println!("reconstruction error: {:e}", matcore::op_norm(&(d.reconstruct() - &a)));

    let abs_a = matcore::apply_scalar_function(&d, f64::abs)?;
    let square = &abs_a * &abs_a - &a * &a;
    println!("| |A|^2 - A^2 |: {:e}", matcore::op_norm(&square));

    for p in [1.0, 2.0, 4.0, f64::INFINITY] {
        println!("||A||_{p} = {:.6}", matcore::schatten_norm(&a, p)?);
    }
    Ok(())
}
