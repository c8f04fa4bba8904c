//! Fermionic fields over a Gram matrix: canonical anticommutation relations
//! and vacuum moments.

use nalgebra::{DMatrix, DVector};
use ncbmo::clifford::build_clifford;

fn main() -> ncbmo::Result<()> {
    let gram = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.2, 0.5, 1.0, 0.3, 0.2, 0.3, 1.0]);
    let rep = build_clifford(&gram)?;
    println!("effective dimension {}, Fock dimension {}", rep.effective_dim(), rep.fock_dim());

    let xi = DVector::from_vec(vec![1.0, -2.0, 0.5]);
    let eta = DVector::from_vec(vec![0.0, 1.0, 3.0]);
    println!("CAR defect: {:e}", rep.car_defect(&xi, &eta)?);

    for i in 0..3 {
        let row: Vec<String> = (0..3)
            .map(|j| format!("{:.3}", rep.vacuum_trace(&(rep.s(i) * rep.s(j))).map(|z| z.re).unwrap_or(f64::NAN)))
            .collect();
        println!("tau(s_{i} s_j) = [{}]", row.join(", "));
    }
    Ok(())
}
