//! Operator-valued functions: analytic and numerical partial derivatives of
//! a Gaussian matrix function, its HM estimate and the segment average.

use ncbmo::matcore::{self, from_real};
use ncbmo::symbols::{
    directional_identity_defect, hm_norm_estimate, l_apply, partial_derivative, radial_grid, ClosureFunction,
    GaussMatrix, OperatorFunction,
};

fn gauss() -> ncbmo::Result<GaussMatrix> {
    GaussMatrix::new(
        vec![vec![0.0, 0.0], vec![1.0, -0.5]],
        vec![1.0, 0.5],
        vec![from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]), from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])],
    )
}

fn main() -> ncbmo::Result<()> {
    let h = gauss()?;
    let t = [0.3, -0.7];
    let analytic = h.partial(&[1, 2], &t).expect("analytic partials");
    let plain = ClosureFunction::new(2, 2, move |p| h.eval(p));
    let numeric = partial_derivative(&plain, &[1, 2], &t, 1e-3);
    println!("d^(1,2) analytic vs numeric: {:e}", matcore::op_norm(&(&analytic - &numeric)));

    let h = gauss()?;
    let grid = radial_grid(2, 0.1, 4.0, 12, 8);
    let hm = hm_norm_estimate(&h, &grid, 1e-3)?;
    println!("HM estimate {:.4} at {:?}, alpha {:?}", hm.estimate, hm.argmax_point, hm.argmax_alpha);

    let s = [0.0, 0.5];
    let avg = l_apply(&h, &s, &t, 16);
    println!("segment average norm {:.6}", matcore::op_norm(&avg));
    println!("directional identity defect {:e}", directional_identity_defect(&h, &s, &t, 16));
    Ok(())
}
