//! Builds the dilation tower of a unital positive kernel and checks
//! `E_m(pi_k(x)) = pi_m(T^{k-m} x)` on a few samples.

use ncbmo::dilation::{all_pairs, build_dilation, path_modulus_check, verify_dilation};
use ncbmo::doi::Kernel;
use ncbmo::harness::instances::{random_contraction, rng_for};
use ncbmo::matcore::{self, c, eig_hermitian_default, SpectralIndex};

fn main() -> ncbmo::Result<()> {
    let a = matcore::real_diag(&[-1.0, 1.0, 1.0]);
    let d = eig_hermitian_default(&a)?;
    let gram = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
    let phi = Kernel::new(SpectralIndex::Points(d.spectrum().to_vec()), gram.map(c))?;
    let system = build_dilation(&d, &phi, 3)?;
    println!("tower dimensions: {:?}", system.dims());

    let mut rng = rng_for(4, "example", 3, 0);
    let xs: Vec<_> = (0..4).map(|_| random_contraction(&mut rng, 3)).collect();
    let pairs = all_pairs(3);
    println!("dilation defect: {:e}", verify_dilation(&system, &xs, &pairs)?);

    let rows = path_modulus_check(&system, &xs, &pairs)?;
    let holds = rows.iter().filter(|r| r.holds).count();
    println!("path modulus inequality holds on {holds}/{} pairs", rows.len());
    Ok(())
}
