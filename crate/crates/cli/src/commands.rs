//! Implementations of the subcommands: each one builds a [`Report`] with a
//! JSON result tree and the matching CSV rows.

use crate::report::{num, Report, Status};
use crate::{CliError, Common};
use rgl_core::divergence::{
    alpha_divergence_at, limit_at_zero, psi, sandwiched_eigenvalues, LimitSide,
};
use rgl_core::geometry::{curvature_mixed, duality_residual_max, metric_matrix, FdSteps};
use rgl_core::lab::{
    divergence_monotonicity_experiment, metric_monotonicity_experiment, operator_monotone_test,
    strict_convexity_spectra_oracle, CellClaim, DivergenceKind, ExperimentReport, LabOptions,
    MonotoneFunction,
};
use rgl_core::matrix::{majorizes, HermitianOperator};
use rgl_core::rng::{complex_gaussian, rng_for, sub_seed};
use rgl_core::states::{pinching_fixed_point_check, random_state, DensityState, StateChart};
use rgl_core::wire::{doc_to_state, MatrixDoc};
use serde_json::json;
use std::path::Path;

const BUNDLED_PAIR: &str = include_str!("../fixtures/two_limit_pair.json");

#[derive(serde::Deserialize)]
struct PairDoc {
    rho: MatrixDoc,
    sigma: MatrixDoc,
}

/// The bundled example pair whose one-sided α→0 limits differ.
fn bundled_pair() -> (DensityState, DensityState) {
    let doc: PairDoc = serde_json::from_str(BUNDLED_PAIR).expect("bundled fixture parses");
    (
        doc_to_state(&doc.rho).expect("bundled rho is a state"),
        doc_to_state(&doc.sigma).expect("bundled sigma is a state"),
    )
}

fn load_state(path: &Path) -> Result<DensityState, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let doc: MatrixDoc = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed state file {}: {e}", path.display())))?;
    doc_to_state(&doc)
        .map_err(|e| CliError::Usage(format!("invalid state in {}: {e}", path.display())))
}

/// Snap near-1 grid values onto the exact Umegaki branch and reject values
/// inside the refusal band around 0.
fn snap_alpha(alpha: f64) -> Result<f64, CliError> {
    if (alpha - 1.0).abs() < 1e-8 {
        return Ok(1.0);
    }
    if alpha.abs() < 1e-8 {
        return Err(CliError::Usage(format!(
            "alpha = {alpha} sits inside the refusal band around 0; the one-sided limits differ \
             (run appendix-a for the bundled example)"
        )));
    }
    Ok(alpha)
}

/// D̃_α, extended through α = 1 by α·D_α (both branches coincide there).
fn sandwiched_value(rho: &DensityState, sigma: &DensityState, alpha: f64) -> rgl_core::Result<f64> {
    Ok(alpha * alpha_divergence_at(rho, sigma, alpha)?)
}

// ---------------------------------------------------------------------------
// divergence
// ---------------------------------------------------------------------------

pub fn divergence(
    common: &Common,
    alphas: Vec<f64>,
    rho: Option<&Path>,
    sigma: Option<&Path>,
) -> Result<Report, CliError> {
    let (rho, sigma) = match (rho, sigma) {
        (Some(r), Some(s)) => (load_state(r)?, load_state(s)?),
        (None, None) => bundled_pair(),
        _ => {
            return Err(CliError::Usage(
                "--rho and --sigma must be given together (or neither, for the bundled pair)"
                    .into(),
            ))
        }
    };
    if rho.dim() != sigma.dim() {
        return Err(CliError::Usage(format!(
            "state dimensions differ: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for raw in alphas {
        let alpha = snap_alpha(raw)?;
        let psi_v = psi(&rho, &sigma, alpha)?;
        let d = alpha_divergence_at(&rho, &sigma, alpha)?;
        let dt = sandwiched_value(&rho, &sigma, alpha)?;
        rows.push(vec![num(alpha), num(psi_v), num(d), num(dt)]);
        cells.push(json!({
            "alpha": alpha,
            "psi": psi_v,
            "d_alpha": d,
            "sandwiched": dt,
        }));
    }
    Ok(Report {
        command: "divergence".into(),
        seed: common.resolve_seed(),
        params: json!({ "dim": rho.dim() }),
        status: Status::Ok,
        results: json!({ "values": cells }),
        csv_header: ["alpha", "psi", "d_alpha", "sandwiched"]
            .map(String::from)
            .to_vec(),
        csv_rows: rows,
    })
}

// ---------------------------------------------------------------------------
// appendix-a
// ---------------------------------------------------------------------------

pub fn appendix_a(common: &Common) -> Result<Report, CliError> {
    let limit_tol = common.tol.unwrap_or(1e-4);
    let eig_tol = 1e-10;
    let (rho, sigma) = bundled_pair();

    let above = limit_at_zero(&rho, &sigma, LimitSide::Above)?;
    let below = limit_at_zero(&rho, &sigma, LimitSide::Below)?;
    let expect_above = 0.5 * 1.5f64.ln();
    let expect_below = 0.5 * 2.0f64.ln();

    let mut rows = Vec::new();
    let mut pass = true;
    let mut push_check = |name: &str, value: f64, expected: f64, tol: f64| {
        let err = (value - expected).abs();
        let ok = err <= tol;
        pass &= ok;
        rows.push(vec![
            name.to_string(),
            num(value),
            num(expected),
            num(err),
            num(tol),
            ok.to_string(),
        ]);
        json!({ "name": name, "value": value, "expected": expected, "abs_error": err, "pass": ok })
    };

    let mut checks = vec![
        push_check("limit_above", above.estimate, expect_above, limit_tol),
        push_check("limit_below", below.estimate, expect_below, limit_tol),
    ];

    // spectrum of the sandwiched operator against its closed 2×2 formula
    for alpha in [0.5, 1.0, 2.0, -1.0] {
        let x = 3.0f64.powf(1.0 / alpha);
        let s = (9.0 - 3.0 * x + x * x).sqrt();
        let denom = 3.0 * 4.0f64.powf(1.0 / alpha);
        let lo = (3.0 + x - s) / denom;
        let hi = (3.0 + x + s) / denom;
        let eigs = sandwiched_eigenvalues(&rho, &sigma, alpha)?;
        let err = (eigs[0] - lo).abs().max((eigs[1] - hi).abs());
        checks.push(push_check(
            &format!("spectrum_alpha_{alpha}"),
            err,
            0.0,
            eig_tol,
        ));
    }

    Ok(Report {
        command: "appendix-a".into(),
        seed: common.resolve_seed(),
        params: json!({ "limit_tolerance": limit_tol, "eigenvalue_tolerance": eig_tol }),
        status: if pass { Status::Ok } else { Status::Violation },
        results: json!({
            "checks": checks,
            "limit_above": { "estimate": above.estimate, "error_bound": above.error_bound },
            "limit_below": { "estimate": below.estimate, "error_bound": below.error_bound },
        }),
        csv_header: [
            "quantity",
            "value",
            "expected",
            "abs_error",
            "tolerance",
            "pass",
        ]
        .map(String::from)
        .to_vec(),
        csv_rows: rows,
    })
}

// ---------------------------------------------------------------------------
// scan-alpha
// ---------------------------------------------------------------------------

/// Random state mixed toward uniform so finite-difference stencils stay
/// inside the faithful cone.
fn conditioned_state(n: usize, seed: u64) -> DensityState {
    let raw = random_state(n, seed);
    let (state, _) = DensityState::faithful_from(
        raw.op()
            .scale(0.75)
            .add(&HermitianOperator::identity(n).scale(0.25 / n as f64)),
        1e-3,
    )
    .expect("mixing toward uniform keeps the state faithful");
    state
}

pub fn scan_alpha(
    common: &Common,
    alphas: Vec<f64>,
    dim: usize,
    sigma_seed: Option<u64>,
) -> Result<Report, CliError> {
    if dim < 2 {
        return Err(CliError::Usage("scan-alpha needs dim ≥ 2".into()));
    }
    let seed = common.resolve_seed();
    let rho = conditioned_state(dim, seed);
    let sigma = match sigma_seed {
        Some(s) => conditioned_state(dim, s),
        None => rho.clone(),
    };
    let chart = StateChart::new(dim)?;
    let steps = FdSteps::default();

    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for raw in alphas {
        let alpha = snap_alpha(raw)?;
        let psi_v = psi(&rho, &sigma, alpha)?;
        let d = alpha_divergence_at(&rho, &sigma, alpha)?;
        let dt = sandwiched_value(&rho, &sigma, alpha)?;
        let g = metric_matrix(&rho, &chart, alpha)?;
        let eigs = g.clone().symmetric_eigen().eigenvalues;
        let g_min = eigs.iter().cloned().fold(f64::MAX, f64::min);
        let g_max = eigs.iter().cloned().fold(f64::MIN, f64::max);
        let duality = duality_residual_max(&rho, &chart, alpha, &steps)?;
        let curv = curvature_mixed(&rho, &chart, alpha, alpha, &steps)?;
        rows.push(vec![
            num(alpha),
            num(psi_v),
            num(d),
            num(dt),
            num(g_min),
            num(g_max),
            num(duality),
            num(curv.max_abs_riemann_primal),
            num(curv.max_abs_riemann_dual),
        ]);
        cells.push(json!({
            "alpha": alpha,
            "psi": psi_v,
            "d_alpha": d,
            "sandwiched": dt,
            "metric_eig_min": g_min,
            "metric_eig_max": g_max,
            "duality_residual_max": duality,
            "riemann_primal": curv.max_abs_riemann_primal,
            "riemann_dual": curv.max_abs_riemann_dual,
        }));
    }
    Ok(Report {
        command: "scan-alpha".into(),
        seed,
        params: json!({ "dim": dim, "sigma_seed": sigma_seed }),
        status: Status::Ok,
        results: json!({ "scan": cells }),
        csv_header: [
            "alpha",
            "psi",
            "d_alpha",
            "sandwiched",
            "metric_eig_min",
            "metric_eig_max",
            "duality_residual_max",
            "riemann_primal",
            "riemann_dual",
        ]
        .map(String::from)
        .to_vec(),
        csv_rows: rows,
    })
}

// ---------------------------------------------------------------------------
// monotonicity experiments
// ---------------------------------------------------------------------------

fn lab_options(common: &Common, expect_violation: bool) -> LabOptions {
    LabOptions {
        rel_tol: common.tol.unwrap_or(rgl_core::lab::DEFAULT_REL_TOL),
        stop_early: expect_violation,
        refine: true,
    }
}

fn experiment_rows(report: &ExperimentReport, rows: &mut Vec<Vec<String>>) {
    for cell in &report.cells {
        rows.push(vec![
            num(cell.parameter),
            cell.dim.to_string(),
            claim_label(cell.claim).to_string(),
            cell.trials_run.to_string(),
            cell.violations.to_string(),
            cell.failed_trials.to_string(),
            cell.floored_trials.to_string(),
            num(cell.worst_margin),
            cell.worst_trial.to_string(),
        ]);
    }
}

const EXPERIMENT_HEADER: [&str; 9] = [
    "parameter",
    "dim",
    "claim",
    "trials_run",
    "violations",
    "failed_trials",
    "floored_trials",
    "worst_margin",
    "worst_trial",
];

/// Expectations met: with --expect-violation every cell must contain one;
/// otherwise every cell must match its own claim (report-only cells always
/// pass).
fn experiments_status(reports: &[ExperimentReport], expect_violation: bool) -> Status {
    let ok = reports.iter().all(|r| {
        r.cells.iter().all(|c| {
            if expect_violation {
                c.violations > 0
            } else {
                c.meets_claim()
            }
        })
    });
    if ok {
        Status::Ok
    } else {
        Status::Violation
    }
}

pub fn monotone_f(
    common: &Common,
    betas: Vec<f64>,
    dims: &[usize],
    trials: u64,
    expect_violation: bool,
) -> Result<Report, CliError> {
    let seed = common.resolve_seed();
    let opts = lab_options(common, expect_violation);
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for (idx, &beta) in betas.iter().enumerate() {
        let report = operator_monotone_test(
            &MonotoneFunction::Kernel { beta },
            dims,
            trials,
            sub_seed(seed, 0x51, idx as u64),
            &opts,
        )?;
        experiment_rows(&report, &mut rows);
        reports.push(report);
    }
    let status = experiments_status(&reports, expect_violation);
    Ok(Report {
        command: "monotone-f".into(),
        seed,
        params: json!({
            "betas": betas,
            "dims": dims,
            "trials": trials,
            "expect_violation": expect_violation,
        }),
        status,
        results: json!({ "experiments": reports }),
        csv_header: EXPERIMENT_HEADER.map(String::from).to_vec(),
        csv_rows: rows,
    })
}

pub fn monotone_metric(
    common: &Common,
    alphas: Vec<f64>,
    dim: usize,
    trials: u64,
    expect_violation: bool,
) -> Result<Report, CliError> {
    let seed = common.resolve_seed();
    let opts = lab_options(common, expect_violation);
    let grid: Vec<f64> = alphas
        .iter()
        .map(|&a| snap_alpha(a))
        .collect::<Result<_, _>>()?;
    let report = metric_monotonicity_experiment(&grid, dim, trials, seed, &opts)?;
    let mut rows = Vec::new();
    experiment_rows(&report, &mut rows);
    let reports = vec![report];
    let status = experiments_status(&reports, expect_violation);
    Ok(Report {
        command: "monotone-metric".into(),
        seed,
        params: json!({
            "alphas": grid,
            "dim": dim,
            "trials": trials,
            "expect_violation": expect_violation,
        }),
        status,
        results: json!({ "experiments": reports }),
        csv_header: EXPERIMENT_HEADER.map(String::from).to_vec(),
        csv_rows: rows,
    })
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum Variant {
    Rescaled,
    Sandwiched,
}

pub fn monotone_divergence(
    common: &Common,
    alphas: Vec<f64>,
    dim: usize,
    trials: u64,
    variant: Variant,
    expect_violation: bool,
) -> Result<Report, CliError> {
    let seed = common.resolve_seed();
    let opts = lab_options(common, expect_violation);
    let which = match variant {
        Variant::Rescaled => DivergenceKind::Rescaled,
        Variant::Sandwiched => DivergenceKind::Sandwiched,
    };
    let grid: Vec<f64> = alphas
        .iter()
        .map(|&a| snap_alpha(a))
        .collect::<Result<_, _>>()?;
    let report = divergence_monotonicity_experiment(&grid, dim, trials, seed, which, &opts)?;
    let mut rows = Vec::new();
    experiment_rows(&report, &mut rows);
    let reports = vec![report];
    let status = experiments_status(&reports, expect_violation);
    Ok(Report {
        command: "monotone-divergence".into(),
        seed,
        params: json!({
            "alphas": grid,
            "dim": dim,
            "trials": trials,
            "variant": format!("{variant:?}"),
            "expect_violation": expect_violation,
        }),
        status,
        results: json!({ "experiments": reports }),
        csv_header: EXPERIMENT_HEADER.map(String::from).to_vec(),
        csv_rows: rows,
    })
}

// ---------------------------------------------------------------------------
// flatness
// ---------------------------------------------------------------------------

pub fn flatness(
    common: &Common,
    alphas: Vec<f64>,
    dim: usize,
    states: usize,
    connection_alpha: Option<f64>,
) -> Result<Report, CliError> {
    let seed = common.resolve_seed();
    let chart = StateChart::new(dim)?;
    let steps = FdSteps::default();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for raw in alphas {
        let alpha = snap_alpha(raw)?;
        let conn_alpha = match connection_alpha {
            Some(c) => snap_alpha(c)?,
            None => alpha,
        };
        let mut worst_primal = 0.0f64;
        let mut worst_dual = 0.0f64;
        for s in 0..states {
            let state_seed = sub_seed(seed, 0x52, s as u64);
            let rho = conditioned_state(dim, state_seed);
            let report = curvature_mixed(&rho, &chart, alpha, conn_alpha, &steps)?;
            worst_primal = worst_primal.max(report.max_abs_riemann_primal);
            worst_dual = worst_dual.max(report.max_abs_riemann_dual);
            rows.push(vec![
                num(alpha),
                num(conn_alpha),
                state_seed.to_string(),
                num(report.max_abs_riemann_primal),
                num(report.max_abs_riemann_dual),
                num(report.step),
            ]);
        }
        cells.push(json!({
            "alpha": alpha,
            "connection_alpha": conn_alpha,
            "states": states,
            "max_riemann_primal": worst_primal,
            "max_riemann_dual": worst_dual,
        }));
    }
    Ok(Report {
        command: "flatness".into(),
        seed,
        params: json!({ "dim": dim, "states": states, "connection_alpha": connection_alpha }),
        status: Status::Ok,
        results: json!({ "curvature": cells }),
        csv_header: [
            "alpha",
            "connection_alpha",
            "state_seed",
            "riemann_primal",
            "riemann_dual",
            "step",
        ]
        .map(String::from)
        .to_vec(),
        csv_rows: rows,
    })
}

// ---------------------------------------------------------------------------
// positivity and pinching lemmas
// ---------------------------------------------------------------------------

pub fn positivity(
    common: &Common,
    alphas: Vec<f64>,
    dim: usize,
    trials: u64,
) -> Result<Report, CliError> {
    let seed = common.resolve_seed();
    let opts = lab_options(common, false);
    let grid: Vec<f64> = alphas
        .iter()
        .map(|&a| snap_alpha(a))
        .collect::<Result<_, _>>()?;
    let report = rgl_core::lab::positivity_experiment(&grid, dim, trials, seed, &opts)?;
    let mut rows = Vec::new();
    experiment_rows(&report, &mut rows);
    let status = if report.any_violation() {
        Status::Violation
    } else {
        Status::Ok
    };
    Ok(Report {
        command: "positivity".into(),
        seed,
        params: json!({ "alphas": grid, "dim": dim, "trials": trials }),
        status,
        results: json!({ "experiments": [report] }),
        csv_header: EXPERIMENT_HEADER.map(String::from).to_vec(),
        csv_rows: rows,
    })
}

pub fn pinching_lemmas(common: &Common, dim: usize, trials: u64) -> Result<Report, CliError> {
    let seed = common.resolve_seed();
    let opts = lab_options(common, false);

    // fixed-point equivalence and spectral majorization, Monte Carlo
    let mut fixed_point_violations = 0u64;
    let mut majorization_violations = 0u64;
    for t in 0..trials {
        let ts = sub_seed(seed, 0x53, t);
        let sigma = random_state(dim, sub_seed(ts, 1, 0));
        let a = HermitianOperator::symmetrize(complex_gaussian(&mut rng_for(ts, 2, 0), dim, dim));
        let check = pinching_fixed_point_check(&sigma, &a)?;
        if check.lemma_violated() {
            fixed_point_violations += 1;
        }
        let pinched = rgl_core::states::pinching(&sigma, &a)?;
        let la = a.spectral()?.eigenvalues().to_vec();
        let le = pinched.spectral()?.eigenvalues().to_vec();
        if !majorizes(&la, &le, 1e-10)? {
            majorization_violations += 1;
        }
    }

    let oracle = strict_convexity_spectra_oracle(dim, trials, seed, &opts)?;
    let oracle_cell = &oracle.cells[0];

    let rows = vec![
        vec![
            "pinching_fixed_point".into(),
            trials.to_string(),
            fixed_point_violations.to_string(),
            String::from("0"),
        ],
        vec![
            "pinching_majorization".into(),
            trials.to_string(),
            majorization_violations.to_string(),
            String::from("0"),
        ],
        vec![
            "strict_convexity_spectra".into(),
            oracle_cell.trials_run.to_string(),
            oracle_cell.violations.to_string(),
            num(oracle_cell.worst_margin),
        ],
    ];
    let clean =
        fixed_point_violations == 0 && majorization_violations == 0 && !oracle.any_violation();
    Ok(Report {
        command: "pinching-lemmas".into(),
        seed,
        params: json!({ "dim": dim, "trials": trials }),
        status: if clean { Status::Ok } else { Status::Violation },
        results: json!({
            "fixed_point_violations": fixed_point_violations,
            "majorization_violations": majorization_violations,
            "strict_convexity": oracle,
        }),
        csv_header: ["check", "trials", "violations", "worst_margin"]
            .map(String::from)
            .to_vec(),
        csv_rows: rows,
    })
}

pub(crate) fn claim_label(claim: CellClaim) -> &'static str {
    match claim {
        CellClaim::ExpectMonotone => "expect-monotone",
        CellClaim::ExpectViolation => "expect-violation",
        CellClaim::OpenQuestion => "open-question",
    }
}
