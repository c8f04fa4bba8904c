//! Randomized property suites over the numerical core.

use nalgebra::DVector;
use rand::Rng;

use super::config::ExperimentConfig;
use super::instances::{self, random_pwl, random_spectrum, rng_for};
use super::report::ReportRow;
use crate::bmo::min_variance_eigenvalue;
use crate::clifford::build_clifford_with;
use crate::dilation::{
    all_pairs, build_dilation_with, markov_composition_defect, path_modulus_check, verify_dilation,
};
use crate::doi::{markov_defects, schur_apply, Kernel, SchurSemigroup};
use crate::error::Result;
use crate::matcore::{self, c, eig_hermitian_default, real_diag, ComplexMatrix, SpectralIndex};
use crate::symbols::{self, gauss_legendre, ClosureFunction, GaussMatrix};

const EXACT: f64 = 1e-9;
const MOMENT: f64 = 1e-10;
const KERNEL_EXACT: f64 = 1e-12;

/// Spectral reconstruction, Schatten monotonicity and Schur composition.
pub fn matcore_doi_suite(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for trial in 0..cfg.suites.quadrature_draws {
        let mut rng = rng_for(cfg.seed, "matcore", 0, trial);
        let n = rng.random_range(2..=8);
        let a = instances::random_hermitian(&mut rng, n);
        let d = eig_hermitian_default(&a)?;
        let rec = matcore::op_norm(&(d.reconstruct() - &a));
        rows.push(ReportRow::new("spectral_reconstruction", n).trial(trial).assert(rec, rec, EXACT));

        let x = instances::gaussian_matrix(&mut rng, n, n);
        let ps = [1.0, 1.5, 2.0, 4.0, 16.0, f64::INFINITY];
        let norms: Vec<f64> = ps.iter().map(|&p| matcore::schatten_norm(&x, p)).collect::<Result<_>>()?;
        let worst = norms.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max).max(0.0);
        rows.push(ReportRow::new("schatten_monotone", n).trial(trial).assert(worst, worst, EXACT));

        let k1 = Kernel::from_fn(d.spectrum(), |l, m| c((l - m).cos()));
        let k2 = Kernel::from_fn(d.spectrum(), |l, m| c((-(l - m) * (l - m)).exp()));
        let twice = schur_apply(&k1, &d, &schur_apply(&k2, &d, &x)?)?;
        let once = schur_apply(&k1.entrywise_product(&k2)?, &d, &x)?;
        let defect = matcore::op_norm(&(twice - once));
        rows.push(ReportRow::new("schur_composition", n).trial(trial).assert(defect, defect, KERNEL_EXACT));
    }
    Ok(rows)
}

/// CAR relations and vacuum moments over random positive Gram matrices.
pub fn car_suite(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for trial in 0..cfg.suites.car_draws {
        let mut rng = rng_for(cfg.seed, "car", 0, trial);
        let d = rng.random_range(1..=5);
        let rank = rng.random_range(0..=d);
        let gram = instances::random_gram(&mut rng, d, rank);
        let rep = build_clifford_with(&gram, &cfg.tolerances)?;
        let mut car = 0.0_f64;
        let mut moment = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let (mut ei, mut ej) = (DVector::zeros(d), DVector::zeros(d));
                ei[i] = 1.0;
                ej[j] = 1.0;
                car = car.max(rep.car_defect(&ei, &ej)?);
                let t = rep.vacuum_trace(&(rep.s(i) * rep.s(j)))?;
                moment = moment.max((t - c(gram[(i, j)])).norm());
            }
        }
        let xi = DVector::from_fn(d, |_, _| instances::gaussian(&mut rng));
        let eta = DVector::from_fn(d, |_, _| instances::gaussian(&mut rng));
        car = car.max(rep.car_defect(&xi, &eta)? / (1.0 + xi.norm() * eta.norm()));
        rows.push(ReportRow::new("car_defect", d).trial(trial).assert(car, car, EXACT));
        rows.push(ReportRow::new("vacuum_moments", d).trial(trial).assert(moment, moment, MOMENT));
    }
    Ok(rows)
}

struct DilationCase {
    spectrum: usize,
    side: usize,
    rank: usize,
    depth: usize,
    samples: usize,
    check_products: bool,
}

fn base_with_spectrum(rng: &mut impl Rng, spectrum: usize, side: usize) -> ComplexMatrix {
    let points = random_spectrum(rng, spectrum, -1.0, 1.0);
    let diag: Vec<f64> = (0..side).map(|i| points[i % spectrum]).collect();
    let g = instances::gaussian_matrix(rng, side, side);
    let q = g.qr().q();
    &q * real_diag(&diag) * q.adjoint()
}

/// Dilation identity, path modulus, homomorphism and nesting checks.
pub fn dilation_suite(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let samples = cfg.suites.dilation_samples;
    let cases = [
        DilationCase { spectrum: 2, side: 2, rank: 2, depth: 3, samples, check_products: true },
        DilationCase { spectrum: 2, side: 4, rank: 2, depth: 3, samples, check_products: false },
        DilationCase { spectrum: 2, side: 3, rank: 1, depth: 3, samples, check_products: true },
        DilationCase { spectrum: 3, side: 3, rank: 3, depth: 2, samples, check_products: true },
        DilationCase { spectrum: 3, side: 4, rank: 2, depth: 3, samples, check_products: false },
        DilationCase { spectrum: 3, side: 4, rank: 3, depth: 2, samples, check_products: false },
        DilationCase {
            spectrum: 3,
            side: 3,
            rank: 3,
            depth: 3,
            samples: samples.div_ceil(10),
            check_products: false,
        },
    ];
    let mut rows = Vec::new();
    for (case_index, case) in cases.iter().enumerate() {
        let mut rng = rng_for(cfg.seed, "dilation", case.side, case_index);
        let a = base_with_spectrum(&mut rng, case.spectrum, case.side);
        let d = eig_hermitian_default(&a)?;
        let gram = instances::random_unit_kernel(&mut rng, case.spectrum, case.rank);
        let phi = Kernel::new(SpectralIndex::Points(d.spectrum().to_vec()), gram.map(c))?;
        let system = build_dilation_with(&d, &phi, case.depth, &cfg.tolerances)?;
        let xs: Vec<ComplexMatrix> = (0..case.samples)
            .map(|i| {
                let g = instances::random_contraction(&mut rng, case.side);
                if i % 2 == 0 {
                    (&g + g.adjoint()) * c(0.5)
                } else {
                    g
                }
            })
            .collect();
        let pairs = all_pairs(case.depth);
        let n = case.side;
        let defect = verify_dilation(&system, &xs, &pairs)?;
        rows.push(ReportRow::new("dilation_identity", n).trial(case_index).assert(defect, defect, EXACT));

        let modulus = path_modulus_check(&system, &xs, &pairs)?;
        let slack = modulus.iter().map(|r| r.lhs - r.rhs).fold(f64::NEG_INFINITY, f64::max);
        let ratio = modulus
            .iter()
            .filter(|r| r.rhs > 0.0)
            .map(|r| r.lhs / r.rhs)
            .fold(0.0, f64::max);
        rows.push(ReportRow::new("path_modulus", n).trial(case_index).assert(ratio, slack, EXACT));

        let composition = xs
            .iter()
            .map(|x| markov_composition_defect(&phi, &d, x, case.depth as u32 + 1))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rows.push(
            ReportRow::new("markov_composition", n).trial(case_index).assert(composition, composition, KERNEL_EXACT),
        );

        if case.check_products {
            let mut worst = 0.0_f64;
            let mut nesting = 0.0_f64;
            for pair in xs.windows(2).take(3) {
                for k in 0..=case.depth {
                    worst = worst.max(system.multiplicativity_defect(&pair[0], &pair[1], k)?);
                    let tr = matcore::normalized_trace(&system.pi(&pair[0], k)?);
                    worst = worst.max((tr - matcore::normalized_trace(&pair[0])).norm());
                }
                let top = system.pi(&pair[0], case.depth)?;
                for m in 0..=case.depth {
                    for m2 in 0..=case.depth {
                        let lhs = system.conditional_expect(&system.conditional_expect(&top, m2)?, m)?;
                        let rhs = system.conditional_expect(&top, m.min(m2))?;
                        nesting = nesting.max(matcore::max_abs(&(lhs - rhs)));
                    }
                }
            }
            rows.push(ReportRow::new("pi_homomorphism", n).trial(case_index).assert(worst, worst, EXACT));
            rows.push(ReportRow::new("conditional_nesting", n).trial(case_index).assert(nesting, nesting, EXACT));
        }
    }
    Ok(rows)
}

/// Positivity, unit diagonal and symmetry of `e^{−tF}` and the block kernels,
/// with Kadison–Schwarz variances on random inputs.
pub fn markov_suite(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let grid = cfg.t_grid.points();
    let mut rows = Vec::new();
    for trial in 0..cfg.suites.markov_draws {
        let mut rng = rng_for(cfg.seed, "markov", 0, trial);
        let m = rng.random_range(2..=12);
        let spectrum = random_spectrum(&mut rng, m, -1.5, 1.5);
        let f = random_pwl(&mut rng, 32);
        let d = eig_hermitian_default(&real_diag(&spectrum))?;
        let semigroups = [
            ("perturbation", SchurSemigroup::perturbation(&d, |l| f.eval(l))?),
            ("ja", SchurSemigroup::ja(&d, 1)?),
        ];
        for (name, s) in &semigroups {
            let report = markov_defects(s, &grid)?;
            let neg = -report.min_kernel_eigenvalue;
            rows.push(
                ReportRow::new(&format!("markov_{name}_min_eigenvalue"), m)
                    .trial(trial)
                    .assert(report.min_kernel_eigenvalue, neg, cfg.tolerances.psd),
            );
            let unit = report.max_diagonal_defect;
            rows.push(
                ReportRow::new(&format!("markov_{name}_unit_diagonal"), m).trial(trial).assert(unit, unit, KERNEL_EXACT),
            );
            let sym = report.max_symmetry_defect;
            rows.push(ReportRow::new(&format!("markov_{name}_symmetry"), m).trial(trial).assert(sym, sym, KERNEL_EXACT));

            let side = s.side();
            let mut min_var = f64::INFINITY;
            for _ in 0..cfg.suites.variance_samples {
                let x = instances::random_contraction(&mut rng, side);
                min_var = min_var.min(min_variance_eigenvalue(s, &x, &grid)?);
            }
            rows.push(ReportRow::new(&format!("variance_{name}"), m).trial(trial).assert(min_var, -min_var, EXACT));
        }
    }
    Ok(rows)
}

/// Per-frequency heat and `m₀` identities for random 1-Lipschitz functions.
pub fn transference_suite(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for trial in 0..cfg.suites.transference_draws {
        let mut rng = rng_for(cfg.seed, "transference", 0, trial);
        let m = rng.random_range(2..=12);
        let spectrum = random_spectrum(&mut rng, m, -1.5, 1.5);
        let f = random_pwl(&mut rng, 32);
        let t = 2f64.powi(rng.random_range(-10..=10));
        let r = symbols::transference_defect(|l| f.eval(l), &spectrum, t)?;
        rows.push(
            ReportRow::new("transference_multiplier", m)
                .trial(trial)
                .assert(r.multiplier_defect, r.multiplier_defect, KERNEL_EXACT),
        );
        rows.push(ReportRow::new("transference_heat", m).trial(trial).assert(r.heat_defect, r.heat_defect, 1e-15));
    }
    Ok(rows)
}

/// Directional-derivative identity and exactness of the segment average.
pub fn quadrature_suite(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for trial in 0..cfg.suites.quadrature_draws {
        let mut rng = rng_for(cfg.seed, "quadrature", 0, trial);
        let dim = 1 + trial % 2;
        let side = rng.random_range(1..=3);
        let terms = rng.random_range(1..=3);
        let centers = (0..terms).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let widths = (0..terms).map(|_| rng.random_range(0.5..2.0)).collect();
        let coefficients = (0..terms).map(|_| instances::random_hermitian(&mut rng, side)).collect();
        let f = GaussMatrix::new(centers, widths, coefficients)?;
        let s: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let t: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let defect = symbols::directional_identity_defect(&f, &s, &t, 16);
        rows.push(ReportRow::new("directional_identity", dim).trial(trial).assert(defect, defect, 1e-8));

        let order = rng.random_range(1..=10);
        let degree = 2 * order - 1;
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let poly = instances::ScalarFunction::Poly(coeffs.clone());
        let h = ClosureFunction::scalar(move |u| poly.eval(u));
        let got = symbols::l_apply(&h, &[a], &[b], order)[(0, 0)].re;
        let anti = |u: f64| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &ck)| ck * u.powi(k as i32 + 1) / (k as f64 + 1.0))
                .sum::<f64>()
        };
        let exact = (anti(b) - anti(a)) / (b - a);
        let err = (got - exact).abs();
        rows.push(ReportRow::new("l_apply_polynomial", order).trial(trial).assert(err, err, KERNEL_EXACT));

        let (nodes, weights) = gauss_legendre(order);
        let mass = (weights.iter().sum::<f64>() - 1.0).abs();
        let inside = nodes.iter().all(|&x| (0.0..=1.0).contains(&x));
        rows.push(ReportRow::new("quadrature_weights", order).trial(trial).assert(
            mass,
            if inside { mass } else { f64::INFINITY },
            KERNEL_EXACT,
        ));
    }
    Ok(rows)
}
