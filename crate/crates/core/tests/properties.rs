use nalgebra::{DMatrix, DVector};
use ncbmo::dilation::{all_pairs, build_dilation, verify_dilation};
use ncbmo::doi::{divided_difference_kernel, markov_defects, schur_apply, Kernel, SchurSemigroup};
use ncbmo::harness::instances::{
    gaussian, random_contraction, random_gram, random_hermitian, random_pwl, random_unit_kernel, rng_for,
};
use ncbmo::matcore::{self, c, eig_hermitian_default, ComplexMatrix, SpectralIndex};
use ncbmo::symbols::{l_apply, m0_eval, ClosureFunction};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

/// Hermitian matrix of the given side whose spectrum is exactly `points`
/// (each point repeated cyclically).
fn with_spectrum(seed: u64, points: &[f64], side: usize) -> ComplexMatrix {
    let mut rng = rng_for(seed, "basis", side, 0);
    let h = random_hermitian(&mut rng, side);
    let u = eig_hermitian_default(&h).unwrap().resolution().basis().clone();
    let diag: Vec<f64> = (0..side).map(|i| points[i % points.len()]).collect();
    &u * matcore::real_diag(&diag) * u.adjoint()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn car_relations_hold(seed in any::<u64>(), d in 1usize..=5) {
        let mut rng = rng_for(seed, "car", d, 0);
        let gram = random_gram(&mut rng, d, d);
        let rep = ncbmo::clifford::build_clifford(&gram).unwrap();
        let xi = DVector::from_fn(d, |_, _| gaussian(&mut rng));
        let eta = DVector::from_fn(d, |_, _| gaussian(&mut rng));
        prop_assert!(rep.car_defect(&xi, &eta).unwrap() <= 1e-9);
        for i in 0..d {
            for j in 0..d {
                let moment = rep.vacuum_trace(&(rep.s(i) * rep.s(j))).unwrap();
                prop_assert!((moment - c(gram[(i, j)])).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn schur_multipliers_compose(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = rng_for(seed, "compose", n, 0);
        let a = random_hermitian(&mut rng, n);
        let x = random_contraction(&mut rng, n);
        let d = eig_hermitian_default(&a).unwrap();
        let phi = Kernel::from_fn(d.spectrum(), |l, m| c((l - m).cos()));
        let psi = Kernel::from_fn(d.spectrum(), |l, m| c((-(l - m).powi(2)).exp()));
        let twice = schur_apply(&phi, &d, &schur_apply(&psi, &d, &x).unwrap()).unwrap();
        let once = schur_apply(&phi.entrywise_product(&psi).unwrap(), &d, &x).unwrap();
        prop_assert!(matcore::op_norm(&(twice - once)) <= 1e-12);
    }

    #[test]
    fn commutators_factor_through_divided_differences(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = rng_for(seed, "factor", n, 0);
        let a = random_hermitian(&mut rng, n);
        let x = random_contraction(&mut rng, n);
        let f = random_pwl(&mut rng, 8);
        let d = eig_hermitian_default(&a).unwrap();
        let fa = matcore::apply_scalar_function(&d, |t| f.eval(t)).unwrap();
        let kernel = divided_difference_kernel(|t| f.eval(t), d.spectrum());
        let lhs = matcore::commutator(&fa, &x);
        let rhs = schur_apply(&kernel, &d, &matcore::commutator(&a, &x)).unwrap();
        prop_assert!(matcore::op_norm(&(lhs - rhs)) <= 1e-9);
    }

    #[test]
    fn perturbation_semigroups_are_markov(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = rng_for(seed, "markov", n, 0);
        let a = random_hermitian(&mut rng, n);
        let f = random_pwl(&mut rng, 8);
        let d = eig_hermitian_default(&a).unwrap();
        let s = SchurSemigroup::perturbation(&d, |t| f.eval(t)).unwrap();
        let report = markov_defects(&s, &ncbmo::doi::dyadic_grid(-6, 6, 1)).unwrap();
        prop_assert!(report.min_kernel_eigenvalue >= -1e-10);
        prop_assert!(report.max_diagonal_defect <= 1e-12);
        prop_assert!(report.max_symmetry_defect <= 1e-12);
    }

    #[test]
    fn schatten_norms_decrease_in_p(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = rng_for(seed, "schatten", n, 0);
        let x = random_contraction(&mut rng, n);
        let ps = [1.0, 1.5, 2.0, 4.0, 8.0, f64::INFINITY];
        let norms: Vec<f64> = ps.iter().map(|&p| matcore::schatten_norm(&x, p).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn m0_is_homogeneous_of_degree_zero(xi1 in -1e3f64..1e3, xi2 in -1e3f64..1e3) {
        prop_assume!(xi1.abs() + xi2.abs() > 1e-6);
        let base = m0_eval(xi1, xi2);
        for lambda in [2.0, 10.0, 0.5] {
            let scaled = m0_eval(lambda * xi1, lambda * xi2);
            prop_assert!((scaled - base).abs() <= 4.0 * f64::EPSILON * base.abs().max(1.0));
        }
        prop_assert!(base.abs() <= 1.5);
    }

    #[test]
    fn m0_is_odd_in_the_second_variable(xi1 in -1e3f64..1e3, xi2 in -1e3f64..1e3) {
        prop_assume!(xi1.abs() + xi2.abs() > 1e-6);
        prop_assert!((m0_eval(xi1, -xi2) + m0_eval(xi1, xi2)).abs() <= 1e-15);
    }

    #[test]
    fn segment_average_is_exact_on_cubics(s in -3.0f64..3.0, t in -3.0f64..3.0) {
        prop_assume!((t - s).abs() > 1e-3);
        let h = ClosureFunction::scalar(|x| x * x * x - 2.0 * x + 1.0);
        let got = l_apply(&h, &[s], &[t], 16)[(0, 0)].re;
        let primitive = |x: f64| x.powi(4) / 4.0 - x * x + x;
        let exact = (primitive(t) - primitive(s)) / (t - s);
        prop_assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn dilation_embeddings_are_unital_star_homomorphisms(seed in any::<u64>()) {
        let mut rng = rng_for(seed, "tower", 2, 0);
        let a = with_spectrum(seed, &[-1.0, 1.0], 2);
        let d = eig_hermitian_default(&a).unwrap();
        let gram = random_unit_kernel(&mut rng, 2, 2);
        let phi = Kernel::new(SpectralIndex::Points(d.spectrum().to_vec()), gram.map(c)).unwrap();
        let system = build_dilation(&d, &phi, 2).unwrap();
        let x = random_contraction(&mut rng, 2);
        let y = random_contraction(&mut rng, 2);
        for k in 0..=2 {
            let one = system.pi(&ComplexMatrix::identity(2, 2), k).unwrap();
            prop_assert!(matcore::max_abs(&(one - ComplexMatrix::identity(system.total_dim(), system.total_dim()))) <= 1e-12);
            let star = system.pi(&x.adjoint(), k).unwrap() - system.pi(&x, k).unwrap().adjoint();
            prop_assert!(matcore::max_abs(&star) <= 1e-12);
            prop_assert!(system.multiplicativity_defect(&x, &y, k).unwrap() <= 1e-12);
        }
        prop_assert!(verify_dilation(&system, &[x], &all_pairs(2)).unwrap() <= 1e-9);
    }
}

#[test]
fn non_positive_gram_is_rejected() {
    let gram = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(ncbmo::clifford::build_clifford(&gram).is_err());
}
