//! End-to-end acceptance run: the default configuration through every stage,
//! one verdict line per criterion.

use ncbmo::harness::{run_suite, ExperimentConfig, ReportRow, Status};

struct Verdict {
    label: &'static str,
    ok: bool,
    detail: String,
}

fn asserted<'a>(rows: &'a [ReportRow], names: &[&str]) -> Vec<&'a ReportRow> {
    rows.iter()
        .filter(|r| names.iter().any(|n| r.experiment == *n))
        .filter(|r| matches!(r.status, Status::Pass | Status::Fail))
        .collect()
}

fn prefixed<'a>(rows: &'a [ReportRow], prefix: &str) -> Vec<&'a ReportRow> {
    rows.iter()
        .filter(|r| r.experiment.starts_with(prefix))
        .filter(|r| matches!(r.status, Status::Pass | Status::Fail))
        .collect()
}

fn judge(label: &'static str, rows: &[&ReportRow], min_rows: usize) -> Verdict {
    let failed = rows.iter().filter(|r| r.status == Status::Fail).count();
    let worst = rows
        .iter()
        .map(|r| r.normalized_constant)
        .fold(f64::NEG_INFINITY, f64::max);
    Verdict {
        label,
        ok: rows.len() >= min_rows && failed == 0,
        detail: format!("{} rows, {} failed, max measured {:e}", rows.len(), failed, worst),
    }
}

fn main() {
    let cfg = ExperimentConfig::default();
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let outcome = run_suite(&cfg, first.path()).unwrap();
    run_suite(&cfg, second.path()).unwrap();
    let rows = &outcome.rows;

    let mut verdicts = vec![
        judge("CAR relations and vacuum moments", &asserted(rows, &["car_defect", "vacuum_moments"]), 2),
        judge("dilation identity", &asserted(rows, &["dilation_identity"]), 1),
        judge("path modulus inequality", &asserted(rows, &["path_modulus"]), 1),
        judge("Markov kernel certificate", &prefixed(rows, "markov_"), 6),
        judge("Kadison-Schwarz variance", &prefixed(rows, "variance_"), 2),
        judge(
            "exact Lipschitz sub-identities",
            &asserted(
                rows,
                &["commutator_factorization", "lipschitz_r2", "doubling_identity", "zero_diagonal"],
            ),
            4,
        ),
        judge("transference multipliers", &asserted(rows, &["transference_multiplier"]), 1),
    ];

    let mut constants = asserted(
        rows,
        &["lipschitz_difference", "commutator_p", "schur_p", "logn", "bmo_commutator", "bmo_schur"],
    );
    constants.extend(asserted(
        rows,
        &["lipschitz_difference_sup", "commutator_p_sup", "schur_p_sup", "bmo_commutator_sup", "bmo_schur_sup"],
    ));
    let mut verdict = judge("empirical constants under caps", &constants, 1);
    for p in [1.5, 2.0, 4.0, 8.0, 16.0] {
        let covered = constants
            .iter()
            .any(|r| r.experiment == "lipschitz_difference" && r.p == Some(p));
        if !covered {
            verdict.ok = false;
            verdict.detail.push_str(&format!(", p={p} missing"));
        }
    }
    verdicts.push(verdict);

    verdicts.push(judge(
        "quadrature identities",
        &asserted(rows, &["directional_identity", "l_apply_polynomial"]),
        2,
    ));

    let a = std::fs::read(first.path().join("report.csv")).unwrap();
    let b = std::fs::read(second.path().join("report.csv")).unwrap();
    verdicts.push(Verdict {
        label: "deterministic CSV",
        ok: !a.is_empty() && a == b,
        detail: format!("{} bytes vs {} bytes", a.len(), b.len()),
    });

    for (i, v) in verdicts.iter().enumerate() {
        let mark = if v.ok { "PASS" } else { "FAIL" };
        println!("criterion {}: {} {} ({})", i + 1, mark, v.label, v.detail);
    }
    let failed: Vec<_> = verdicts.iter().filter(|v| !v.ok).map(|v| v.label).collect();
    if !outcome.passed || !failed.is_empty() {
        eprintln!("acceptance failed: {failed:?}");
        eprint!("{}", ncbmo::harness::report::failure_dump(rows));
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria passed", verdicts.len());
}
