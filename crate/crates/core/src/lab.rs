//! Monte-Carlo experiments and counterexample searches for the monotonicity
//! structure of the divergence family.
//!
//! Each experiment sweeps a parameter grid, runs seeded independent trials
//! per cell, and aggregates worst margins plus a fully serialized, re-runnable
//! counterexample for every violated cell. Margins are uniformly oriented:
//! positive means the inequality under test was violated beyond tolerance.
//!
//! Trials derive per-index sub-seeds from the master seed, so reports are
//! bit-identical across runs and thread counts; rayon only shortens the wall
//! clock. Counterexamples are shrunk toward the trivial instance (smaller
//! perturbation, channel closer to the identity) while the violation
//! persists, to keep archived fixtures small.

use crate::divergence::{alpha_divergence_at, sandwiched_renyi};
use crate::error::{Error, Result};
use crate::geometry::{metric_with_kernel, KernelFamily};
use crate::matrix::{matrix_function, HermitianOperator, ScalarFunction};
use crate::rng::{complex_gaussian, fnv1a, rng_for, sub_seed};
use crate::states::{
    pinching, pinching_fixed_point_check, random_channel, random_state, random_tangent,
    DensityState, QuantumChannel, StateChart, TangentVector, RANDOM_STATE_FLOOR,
};
use crate::wire::{ChannelDoc, MatrixDoc};
use crate::CMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default relative violation tolerance: separates genuine violations from
/// float noise on the lhs scale.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Absolute positivity tolerance for the divergence.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Operator-monotonicity eigenvalue tolerance.
pub const LOEWNER_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Regions and claims
// ---------------------------------------------------------------------------

/// The metric is monotone exactly on α ≤ −1 or α ≥ ½ (boundary included).
pub fn metric_monotone_region(alpha: f64) -> bool {
    alpha <= -1.0 || alpha >= 0.5
}

/// The kernel member f_β is operator monotone exactly for β ∈ [−1, 2].
pub fn kernel_monotone_region(beta: f64) -> bool {
    (-1.0..=2.0).contains(&beta)
}

/// Which divergence variant a monotonicity experiment exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivergenceKind {
    /// D_α = ψ/(α(α−1))
    Rescaled,
    /// D̃_α = ψ/(α−1) = α·D_α
    Sandwiched,
}

/// What is known about monotonicity of a divergence variant at a given α.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellClaim {
    /// Monotone; any violation is a failure.
    ExpectMonotone,
    /// Known non-monotone; a search that finds no violation under-samples.
    ExpectViolation,
    /// No settled claim; the cell is report-only.
    OpenQuestion,
}

pub fn divergence_claim(alpha: f64, which: DivergenceKind) -> CellClaim {
    match which {
        DivergenceKind::Rescaled => {
            if alpha >= 0.5 {
                CellClaim::ExpectMonotone
            } else if alpha > -1.0 && alpha != 0.0 {
                CellClaim::ExpectViolation
            } else {
                CellClaim::OpenQuestion
            }
        }
        DivergenceKind::Sandwiched => {
            if alpha >= 0.5 {
                CellClaim::ExpectMonotone
            } else if alpha > 0.0 {
                CellClaim::ExpectViolation
            } else {
                CellClaim::OpenQuestion
            }
        }
    }
}

pub fn metric_claim(alpha: f64) -> CellClaim {
    if metric_monotone_region(alpha) {
        CellClaim::ExpectMonotone
    } else {
        CellClaim::ExpectViolation
    }
}

pub fn kernel_claim(beta: f64) -> CellClaim {
    if kernel_monotone_region(beta) {
        CellClaim::ExpectMonotone
    } else {
        CellClaim::ExpectViolation
    }
}

// ---------------------------------------------------------------------------
// Outcome and report types
// ---------------------------------------------------------------------------

/// One trial: the two sides of the inequality under test and the oriented
/// violation margin (positive = violated beyond tolerance). The digest
/// identifies the drawn inputs byte-for-byte.
#[derive(Clone, Copy, Debug)]
pub struct TrialOutcome {
    pub trial: u64,
    pub sub_seed: u64,
    pub digest: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub floored: bool,
}

/// Serialized inputs of an archived counterexample.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct CounterexampleInputs {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub matrices: BTreeMap<String, MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelDoc>,
}

/// A violating instance, stored with everything needed to recompute its
/// margin from scratch.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Counterexample {
    pub claim: String,
    pub parameter: f64,
    pub dim: usize,
    pub trial: u64,
    pub sub_seed: u64,
    pub rel_tol: f64,
    pub margin: f64,
    pub inputs: CounterexampleInputs,
}

/// Aggregate of one parameter cell.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CellReport {
    pub parameter: f64,
    pub dim: usize,
    pub claim: CellClaim,
    pub trials_run: u64,
    pub violations: u64,
    pub failed_trials: u64,
    pub floored_trials: u64,
    pub worst_margin: f64,
    pub worst_trial: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl CellReport {
    /// Whether the cell's empirical outcome matches its claim.
    pub fn meets_claim(&self) -> bool {
        match self.claim {
            CellClaim::ExpectMonotone => self.violations == 0,
            CellClaim::ExpectViolation => self.violations > 0,
            CellClaim::OpenQuestion => true,
        }
    }
}

/// Full experiment output: one cell per grid point.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExperimentReport {
    pub claim: String,
    pub master_seed: u64,
    pub rel_tol: f64,
    pub cells: Vec<CellReport>,
}

impl ExperimentReport {
    pub fn any_violation(&self) -> bool {
        self.cells.iter().any(|c| c.violations > 0)
    }

    pub fn all_cells_meet_claims(&self) -> bool {
        self.cells.iter().all(CellReport::meets_claim)
    }
}

/// Knobs shared by every experiment.
#[derive(Clone, Copy, Debug)]
pub struct LabOptions {
    pub rel_tol: f64,
    /// Stop a cell at the first violating chunk (used by searches).
    pub stop_early: bool,
    /// Shrink found counterexamples toward the trivial instance.
    pub refine: bool,
}

impl Default for LabOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            stop_early: false,
            refine: true,
        }
    }
}

// ---------------------------------------------------------------------------
// Cell runner
// ---------------------------------------------------------------------------

const CHUNK: u64 = 256;

struct CellScan {
    trials_run: u64,
    violations: u64,
    failed: u64,
    floored: u64,
    worst_margin: f64,
    worst_trial: u64,
    first_violation: Option<u64>,
}

/// Run up to `trials` independent trials in deterministic index order
/// (parallel within chunks), optionally stopping after the first chunk that
/// contains a violation.
fn run_cell<F>(trials: u64, stop_early: bool, trial_fn: F) -> CellScan
where
    F: Fn(u64) -> Result<TrialOutcome> + Sync,
{
    let mut scan = CellScan {
        trials_run: 0,
        violations: 0,
        failed: 0,
        floored: 0,
        worst_margin: f64::NEG_INFINITY,
        worst_trial: 0,
        first_violation: None,
    };
    let mut start = 0u64;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        let outcomes: Vec<(u64, Result<TrialOutcome>)> = (start..end)
            .into_par_iter()
            .map(|t| (t, trial_fn(t)))
            .collect();
        for (t, res) in outcomes {
            scan.trials_run += 1;
            match res {
                Ok(out) => {
                    if out.floored {
                        scan.floored += 1;
                    }
                    if out.margin > scan.worst_margin {
                        scan.worst_margin = out.margin;
                        scan.worst_trial = t;
                    }
                    if out.margin > 0.0 {
                        scan.violations += 1;
                        if scan.first_violation.is_none() {
                            scan.first_violation = Some(t);
                        }
                    }
                }
                Err(_) => scan.failed += 1,
            }
        }
        start = end;
        if stop_early && scan.first_violation.is_some() {
            break;
        }
    }
    // keep the field JSON-serializable even when every trial errored
    if !scan.worst_margin.is_finite() {
        scan.worst_margin = -f64::MAX;
    }
    scan
}

fn digest_matrices(mats: &[&CMatrix]) -> u64 {
    let mut bytes = Vec::new();
    for m in mats {
        for v in m.iter() {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    fnv1a(&bytes)
}

// ---------------------------------------------------------------------------
// Operator monotonicity of the kernel family
// ---------------------------------------------------------------------------

/// Functions accepted by the operator-monotonicity search. Both variants are
/// serializable through their parameter, so archived counterexamples can be
/// re-verified from disk.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub enum MonotoneFunction {
    Kernel { beta: f64 },
    Power { exponent: f64 },
}

impl MonotoneFunction {
    fn scalar(&self) -> ScalarFunction {
        match self {
            Self::Kernel { beta } => KernelFamily::from_beta(*beta).as_scalar_function(),
            Self::Power { exponent } => ScalarFunction::Power(*exponent),
        }
    }

    fn claim_name(&self) -> &'static str {
        match self {
            Self::Kernel { .. } => "kernel-operator-monotone",
            Self::Power { .. } => "power-operator-monotone",
        }
    }

    fn parameter(&self) -> f64 {
        match self {
            Self::Kernel { beta } => *beta,
            Self::Power { exponent } => *exponent,
        }
    }

    fn claim(&self) -> CellClaim {
        match self {
            Self::Kernel { beta } => kernel_claim(*beta),
            // t^λ is operator monotone exactly for λ ∈ [0, 1]
            Self::Power { exponent } => {
                if (0.0..=1.0).contains(exponent) {
                    CellClaim::ExpectMonotone
                } else {
                    CellClaim::ExpectViolation
                }
            }
        }
    }
}

/// Random strictly positive matrix with a moderate spectrum.
fn random_positive(n: usize, seed: u64, stream: u64) -> HermitianOperator {
    let g = complex_gaussian(&mut rng_for(seed, stream, 0), n, n);
    let w = (&g * g.adjoint()).map(|z| z / n as f64);
    HermitianOperator::symmetrize(w + CMatrix::identity(n, n).map(|z| z * 0.05))
}

/// Random positive semidefinite perturbation with log-uniform scale.
fn random_psd_perturbation(n: usize, seed: u64) -> HermitianOperator {
    let mut rng = rng_for(seed, 11, 0);
    let scale = 10f64.powf(rng.random::<f64>() * 2.5 - 2.0);
    let g = complex_gaussian(&mut rng, n, n);
    let w = (&g * g.adjoint()).map(|z| z * (scale / n as f64));
    HermitianOperator::symmetrize(w)
}

fn loewner_margin(
    a: &HermitianOperator,
    b: &HermitianOperator,
    f: &ScalarFunction,
) -> Result<(f64, f64)> {
    let fa = matrix_function(a, f)?;
    let fb = matrix_function(b, f)?;
    let min_eig = fb.sub(&fa).spectral()?.min_eigenvalue();
    Ok((min_eig, -min_eig - LOEWNER_TOL))
}

/// Search for violations of A ⪯ B ⇒ f(A) ⪯ f(B) over random pairs
/// B = A + P with P ⪰ 0, one cell per dimension in `dims`.
pub fn operator_monotone_test(
    func: &MonotoneFunction,
    dims: &[usize],
    trials: u64,
    seed: u64,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    let scalar = func.scalar();
    let mut cells = Vec::new();
    for (cell_idx, &n) in dims.iter().enumerate() {
        let cell_seed = sub_seed(seed, 0x0A, cell_idx as u64);
        let trial_fn = |t: u64| -> Result<TrialOutcome> {
            let ts = sub_seed(cell_seed, 0, t);
            let a = random_positive(n, ts, 10);
            let p = random_psd_perturbation(n, ts);
            let b = a.add(&p);
            let (min_eig, margin) = loewner_margin(&a, &b, &scalar)?;
            Ok(TrialOutcome {
                trial: t,
                sub_seed: ts,
                digest: digest_matrices(&[a.matrix(), b.matrix()]),
                lhs: min_eig,
                rhs: -LOEWNER_TOL,
                margin,
                floored: false,
            })
        };
        let scan = run_cell(trials, opts.stop_early, trial_fn);
        let counterexample = match scan.first_violation {
            Some(t) => {
                let ts = sub_seed(cell_seed, 0, t);
                let a = random_positive(n, ts, 10);
                let p = random_psd_perturbation(n, ts);
                Some(refine_loewner(func, &scalar, &a, &p, n, t, ts, opts)?)
            }
            None => None,
        };
        cells.push(CellReport {
            parameter: func.parameter(),
            dim: n,
            claim: func.claim(),
            trials_run: scan.trials_run,
            violations: scan.violations,
            failed_trials: scan.failed,
            floored_trials: 0,
            worst_margin: scan.worst_margin,
            worst_trial: scan.worst_trial,
            counterexample,
        });
    }
    Ok(ExperimentReport {
        claim: func.claim_name().into(),
        master_seed: seed,
        rel_tol: opts.rel_tol,
        cells,
    })
}

#[allow(clippy::too_many_arguments)]
fn refine_loewner(
    func: &MonotoneFunction,
    scalar: &ScalarFunction,
    a: &HermitianOperator,
    p: &HermitianOperator,
    dim: usize,
    trial: u64,
    trial_seed: u64,
    opts: &LabOptions,
) -> Result<Counterexample> {
    let mut best_p = p.clone();
    let mut best_margin = loewner_margin(a, &a.add(&best_p), scalar)?.1;
    if opts.refine {
        let mut scale = 0.5f64;
        for _ in 0..30 {
            let candidate = p.scale(scale);
            let margin = loewner_margin(a, &a.add(&candidate), scalar)?.1;
            // keep the violation comfortably above the search threshold
            if margin > 2e-6 {
                best_p = candidate;
                best_margin = margin;
                scale *= 0.5;
            } else {
                break;
            }
        }
    }
    let b = a.add(&best_p);
    let mut matrices = BTreeMap::new();
    matrices.insert("a".to_string(), MatrixDoc::from(a));
    matrices.insert("b".to_string(), MatrixDoc::from(&b));
    Ok(Counterexample {
        claim: func.claim_name().into(),
        parameter: func.parameter(),
        dim,
        trial,
        sub_seed: trial_seed,
        rel_tol: opts.rel_tol,
        margin: best_margin,
        inputs: CounterexampleInputs {
            matrices,
            channel: None,
        },
    })
}

// ---------------------------------------------------------------------------
// Metric monotonicity under CPTP maps
// ---------------------------------------------------------------------------

fn trial_channel(n: usize, trial: u64, seed: u64) -> QuantumChannel {
    // alternate a low Kraus rank with the full rank n²; low-rank channels
    // find divergence violations faster, full rank covers the generic case
    let rank = if trial.is_multiple_of(2) { 2 } else { n * n };
    random_channel(n, rank, seed)
}

struct MetricTrialData {
    rho: DensityState,
    x: TangentVector,
    channel: QuantumChannel,
}

fn metric_trial_inputs(chart: &StateChart, n: usize, trial: u64, ts: u64) -> MetricTrialData {
    MetricTrialData {
        rho: random_state(n, sub_seed(ts, 1, 0)),
        x: random_tangent(chart, sub_seed(ts, 2, 0)),
        channel: trial_channel(n, trial, sub_seed(ts, 3, 0)),
    }
}

fn metric_margin(
    data: &MetricTrialData,
    kernel: &KernelFamily,
    rel_tol: f64,
) -> Result<(f64, f64, f64, bool)> {
    let lhs = metric_with_kernel(&data.rho, &data.x, &data.x, kernel)?;
    let out_op = data.channel.apply(data.rho.op())?;
    let (out_state, floored) = DensityState::faithful_from(out_op, RANDOM_STATE_FLOOR)?;
    let pushed = data.channel.push_forward(&data.x)?;
    let rhs = metric_with_kernel(&out_state, &pushed, &pushed, kernel)?;
    let margin = rhs - lhs - rel_tol * lhs.abs();
    Ok((lhs, rhs, margin, floored))
}

/// Check g_ρ(X,X) ≥ g_γ(ρ)(γ_*X, γ_*X) − rel_tol·g_ρ(X,X) over random
/// (ρ, X, γ) triples, one cell per α in the grid.
pub fn metric_monotonicity_experiment(
    alpha_grid: &[f64],
    dim: usize,
    trials: u64,
    seed: u64,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    let chart = StateChart::new(dim)?;
    let mut cells = Vec::new();
    for (cell_idx, &alpha) in alpha_grid.iter().enumerate() {
        if alpha == 0.0 {
            return Err(Error::AlphaDomain {
                alpha,
                reason: "the metric is undefined at alpha = 0".into(),
            });
        }
        let kernel = KernelFamily::from_alpha(alpha)?;
        let cell_seed = sub_seed(seed, 0x0B, cell_idx as u64);
        let trial_fn = |t: u64| -> Result<TrialOutcome> {
            let ts = sub_seed(cell_seed, 0, t);
            let data = metric_trial_inputs(&chart, dim, t, ts);
            let (lhs, rhs, margin, floored) = metric_margin(&data, &kernel, opts.rel_tol)?;
            Ok(TrialOutcome {
                trial: t,
                sub_seed: ts,
                digest: digest_matrices(&[data.rho.op().matrix(), data.x.mrep().matrix()]),
                lhs,
                rhs,
                margin,
                floored,
            })
        };
        let scan = run_cell(trials, opts.stop_early, trial_fn);
        let counterexample = match scan.first_violation {
            Some(t) => {
                let ts = sub_seed(cell_seed, 0, t);
                let data = metric_trial_inputs(&chart, dim, t, ts);
                Some(refine_metric(alpha, &kernel, data, dim, t, ts, opts)?)
            }
            None => None,
        };
        cells.push(CellReport {
            parameter: alpha,
            dim,
            claim: metric_claim(alpha),
            trials_run: scan.trials_run,
            violations: scan.violations,
            failed_trials: scan.failed,
            floored_trials: scan.floored,
            worst_margin: scan.worst_margin,
            worst_trial: scan.worst_trial,
            counterexample,
        });
    }
    Ok(ExperimentReport {
        claim: "metric-monotone".into(),
        master_seed: seed,
        rel_tol: opts.rel_tol,
        cells,
    })
}

/// Convex mixture of a channel with the identity: Kraus set
/// {√(1−s)·K_i} ∪ {√s·I}.
fn channel_toward_identity(channel: &QuantumChannel, s: f64) -> QuantumChannel {
    let n = channel.input_dim();
    let mut kraus: Vec<CMatrix> = channel
        .kraus()
        .iter()
        .map(|k| k.map(|z| z * (1.0 - s).sqrt()))
        .collect();
    kraus.push(CMatrix::identity(n, n).map(|z| z * s.sqrt()));
    QuantumChannel::new(kraus).expect("mixture of CPTP maps is CPTP")
}

fn refine_metric(
    alpha: f64,
    kernel: &KernelFamily,
    mut data: MetricTrialData,
    dim: usize,
    trial: u64,
    trial_seed: u64,
    opts: &LabOptions,
) -> Result<Counterexample> {
    let mut margin = metric_margin(&data, kernel, opts.rel_tol)?.2;
    if opts.refine {
        for k in 1..30 {
            let s = 1.0 - 0.5f64.powi(k);
            let candidate = MetricTrialData {
                rho: data.rho.clone(),
                x: data.x.clone(),
                channel: channel_toward_identity(&data.channel, s),
            };
            let m = metric_margin(&candidate, kernel, opts.rel_tol)?.2;
            if m > 0.0 {
                data = candidate;
                margin = m;
            } else {
                break;
            }
        }
    }
    let mut matrices = BTreeMap::new();
    matrices.insert("rho".to_string(), MatrixDoc::from(data.rho.op()));
    matrices.insert("x_mrep".to_string(), MatrixDoc::from(data.x.mrep()));
    Ok(Counterexample {
        claim: "metric-monotone".into(),
        parameter: alpha,
        dim,
        trial,
        sub_seed: trial_seed,
        rel_tol: opts.rel_tol,
        margin,
        inputs: CounterexampleInputs {
            matrices,
            channel: Some(ChannelDoc::from_channel(&data.channel)),
        },
    })
}

// ---------------------------------------------------------------------------
// Divergence monotonicity under CPTP maps
// ---------------------------------------------------------------------------

struct DivergenceTrialData {
    rho: DensityState,
    sigma: DensityState,
    channel: QuantumChannel,
}

fn divergence_trial_inputs(n: usize, trial: u64, ts: u64) -> DivergenceTrialData {
    DivergenceTrialData {
        rho: random_state(n, sub_seed(ts, 1, 0)),
        sigma: random_state(n, sub_seed(ts, 2, 0)),
        channel: trial_channel(n, trial, sub_seed(ts, 3, 0)),
    }
}

fn divergence_value(
    rho: &DensityState,
    sigma: &DensityState,
    alpha: f64,
    which: DivergenceKind,
) -> Result<f64> {
    match which {
        DivergenceKind::Rescaled => alpha_divergence_at(rho, sigma, alpha),
        DivergenceKind::Sandwiched => sandwiched_renyi(rho, sigma, alpha),
    }
}

fn divergence_margin(
    data: &DivergenceTrialData,
    alpha: f64,
    which: DivergenceKind,
    rel_tol: f64,
) -> Result<(f64, f64, f64, bool)> {
    let lhs = divergence_value(&data.rho, &data.sigma, alpha, which)?;
    let (out_rho, f1) =
        DensityState::faithful_from(data.channel.apply(data.rho.op())?, RANDOM_STATE_FLOOR)?;
    let (out_sigma, f2) =
        DensityState::faithful_from(data.channel.apply(data.sigma.op())?, RANDOM_STATE_FLOOR)?;
    let rhs = divergence_value(&out_rho, &out_sigma, alpha, which)?;
    let margin = rhs - lhs - rel_tol * lhs.abs().max(1e-12);
    Ok((lhs, rhs, margin, f1 || f2))
}

/// Check D(ρ‖σ) ≥ D(γ(ρ)‖γ(σ)) − tol over random (ρ, σ, γ) triples for the
/// chosen divergence variant, one cell per α.
pub fn divergence_monotonicity_experiment(
    alpha_grid: &[f64],
    dim: usize,
    trials: u64,
    seed: u64,
    which: DivergenceKind,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    let mut cells = Vec::new();
    for (cell_idx, &alpha) in alpha_grid.iter().enumerate() {
        let cell_seed = sub_seed(seed, 0x0C, cell_idx as u64);
        let trial_fn = |t: u64| -> Result<TrialOutcome> {
            let ts = sub_seed(cell_seed, 0, t);
            let data = divergence_trial_inputs(dim, t, ts);
            let (lhs, rhs, margin, floored) = divergence_margin(&data, alpha, which, opts.rel_tol)?;
            Ok(TrialOutcome {
                trial: t,
                sub_seed: ts,
                digest: digest_matrices(&[data.rho.op().matrix(), data.sigma.op().matrix()]),
                lhs,
                rhs,
                margin,
                floored,
            })
        };
        let scan = run_cell(trials, opts.stop_early, trial_fn);
        let counterexample = match scan.first_violation {
            Some(t) => {
                let ts = sub_seed(cell_seed, 0, t);
                let data = divergence_trial_inputs(dim, t, ts);
                Some(refine_divergence(alpha, which, data, dim, t, ts, opts)?)
            }
            None => None,
        };
        cells.push(CellReport {
            parameter: alpha,
            dim,
            claim: divergence_claim(alpha, which),
            trials_run: scan.trials_run,
            violations: scan.violations,
            failed_trials: scan.failed,
            floored_trials: scan.floored,
            worst_margin: scan.worst_margin,
            worst_trial: scan.worst_trial,
            counterexample,
        });
    }
    let claim = match which {
        DivergenceKind::Rescaled => "divergence-monotone-rescaled",
        DivergenceKind::Sandwiched => "divergence-monotone-sandwiched",
    };
    Ok(ExperimentReport {
        claim: claim.into(),
        master_seed: seed,
        rel_tol: opts.rel_tol,
        cells,
    })
}

fn refine_divergence(
    alpha: f64,
    which: DivergenceKind,
    mut data: DivergenceTrialData,
    dim: usize,
    trial: u64,
    trial_seed: u64,
    opts: &LabOptions,
) -> Result<Counterexample> {
    let mut margin = divergence_margin(&data, alpha, which, opts.rel_tol)?.2;
    if opts.refine {
        for k in 1..30 {
            let s = 1.0 - 0.5f64.powi(k);
            let candidate = DivergenceTrialData {
                rho: data.rho.clone(),
                sigma: data.sigma.clone(),
                channel: channel_toward_identity(&data.channel, s),
            };
            let m = divergence_margin(&candidate, alpha, which, opts.rel_tol)?.2;
            if m > 0.0 {
                data = candidate;
                margin = m;
            } else {
                break;
            }
        }
    }
    let claim = match which {
        DivergenceKind::Rescaled => "divergence-monotone-rescaled",
        DivergenceKind::Sandwiched => "divergence-monotone-sandwiched",
    };
    let mut matrices = BTreeMap::new();
    matrices.insert("rho".to_string(), MatrixDoc::from(data.rho.op()));
    matrices.insert("sigma".to_string(), MatrixDoc::from(data.sigma.op()));
    Ok(Counterexample {
        claim: claim.into(),
        parameter: alpha,
        dim,
        trial,
        sub_seed: trial_seed,
        rel_tol: opts.rel_tol,
        margin,
        inputs: CounterexampleInputs {
            matrices,
            channel: Some(ChannelDoc::from_channel(&data.channel)),
        },
    })
}

// ---------------------------------------------------------------------------
// Positivity and the pinching proof steps
// ---------------------------------------------------------------------------

/// Positivity margin of one (ρ, σ, α) instance: the worst of
/// D ≥ −1e-10, (D < 1e-6 ⇒ ‖ρ−σ‖_F < 1e-4), and the pinching step
/// D(E_σ(ρ)‖σ) ≤ D(ρ‖σ) + 1e-10.
fn positivity_margin(rho: &DensityState, sigma: &DensityState, alpha: f64) -> Result<(f64, f64)> {
    let d = alpha_divergence_at(rho, sigma, alpha)?;
    let m1 = -d - POSITIVITY_TOL;
    let m2 = if d < 1e-6 {
        rho.op().sub(sigma.op()).frobenius_norm() - 1e-4
    } else {
        f64::NEG_INFINITY
    };
    let pinched = DensityState::new(pinching(sigma, rho.op())?)?;
    let d_pinched = alpha_divergence_at(&pinched, sigma, alpha)?;
    let m3 = d_pinched - d - POSITIVITY_TOL;
    Ok((d, m1.max(m2).max(m3)))
}

/// Positivity and data-processing-step experiment over random pairs, one
/// cell per α.
pub fn positivity_experiment(
    alpha_grid: &[f64],
    dim: usize,
    trials: u64,
    seed: u64,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    let mut cells = Vec::new();
    for (cell_idx, &alpha) in alpha_grid.iter().enumerate() {
        let cell_seed = sub_seed(seed, 0x0D, cell_idx as u64);
        let trial_fn = |t: u64| -> Result<TrialOutcome> {
            let ts = sub_seed(cell_seed, 0, t);
            let rho = random_state(dim, sub_seed(ts, 1, 0));
            let sigma = random_state(dim, sub_seed(ts, 2, 0));
            let (d, margin) = positivity_margin(&rho, &sigma, alpha)?;
            Ok(TrialOutcome {
                trial: t,
                sub_seed: ts,
                digest: digest_matrices(&[rho.op().matrix(), sigma.op().matrix()]),
                lhs: d,
                rhs: 0.0,
                margin,
                floored: false,
            })
        };
        let scan = run_cell(trials, opts.stop_early, trial_fn);
        let counterexample = scan.first_violation.map(|t| {
            let ts = sub_seed(cell_seed, 0, t);
            let rho = random_state(dim, sub_seed(ts, 1, 0));
            let sigma = random_state(dim, sub_seed(ts, 2, 0));
            let mut matrices = BTreeMap::new();
            matrices.insert("rho".to_string(), MatrixDoc::from(rho.op()));
            matrices.insert("sigma".to_string(), MatrixDoc::from(sigma.op()));
            Counterexample {
                claim: "divergence-positivity".into(),
                parameter: alpha,
                dim,
                trial: t,
                sub_seed: ts,
                rel_tol: opts.rel_tol,
                margin: scan.worst_margin,
                inputs: CounterexampleInputs {
                    matrices,
                    channel: None,
                },
            }
        });
        cells.push(CellReport {
            parameter: alpha,
            dim,
            claim: CellClaim::ExpectMonotone,
            trials_run: scan.trials_run,
            violations: scan.violations,
            failed_trials: scan.failed,
            floored_trials: 0,
            worst_margin: scan.worst_margin,
            worst_trial: scan.worst_trial,
            counterexample,
        });
    }
    Ok(ExperimentReport {
        claim: "divergence-positivity".into(),
        master_seed: seed,
        rel_tol: opts.rel_tol,
        cells,
    })
}

/// Margin of the strict-convexity/pinching spectra implication for one
/// (σ, A) draw with f(t) = 1/t.
fn convexity_margin(sigma: &DensityState, a: &HermitianOperator) -> Result<f64> {
    let b = pinching(sigma, a)?;
    let tr_f = |m: &HermitianOperator| -> Result<f64> {
        let spec = m.spectral()?;
        if spec.min_eigenvalue() <= 0.0 {
            return Err(Error::NotPositive {
                min_eig: spec.min_eigenvalue(),
            });
        }
        Ok(spec.eigenvalues().iter().map(|x| 1.0 / x).sum())
    };
    let tf_a = tr_f(a)?;
    let tf_b = tr_f(&b)?;
    let mut margin = f64::NEG_INFINITY;
    if (tf_a - tf_b).abs() < 1e-10 {
        // equal traces of a strictly convex function force equal ordered
        // spectra and, through the pinching equivalence, equal operators
        let check = pinching_fixed_point_check(sigma, a)?;
        margin = margin
            .max(check.spectra_deviation - 1e-8)
            .max(check.operator_deviation - 1e-8);
    }
    if a.sub(&b).frobenius_norm() > 1e-6 {
        // genuinely non-commuting draws must lose trace value strictly
        margin = margin.max(1e-12 - (tf_a - tf_b));
    }
    Ok(margin)
}

/// Monte-Carlo confirmation of the strict-convexity spectra implication and
/// of the pinching fixed-point equivalence.
pub fn strict_convexity_spectra_oracle(
    dim: usize,
    trials: u64,
    seed: u64,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    let cell_seed = sub_seed(seed, 0x0E, 0);
    let trial_fn = |t: u64| -> Result<TrialOutcome> {
        let ts = sub_seed(cell_seed, 0, t);
        let sigma = random_state(dim, sub_seed(ts, 1, 0));
        // alternate generic draws with commuting ones so both branches of
        // the implication get exercised
        let a = if t.is_multiple_of(4) {
            let probs = random_state(dim, sub_seed(ts, 2, 0));
            sigma.spectral().apply_values(probs.eigenvalues())
        } else {
            random_positive(dim, ts, 12)
        };
        let margin = convexity_margin(&sigma, &a)?;
        Ok(TrialOutcome {
            trial: t,
            sub_seed: ts,
            digest: digest_matrices(&[sigma.op().matrix(), a.matrix()]),
            lhs: 0.0,
            rhs: 0.0,
            margin,
            floored: false,
        })
    };
    let scan = run_cell(trials, opts.stop_early, trial_fn);
    let counterexample = scan.first_violation.map(|t| {
        let ts = sub_seed(cell_seed, 0, t);
        let sigma = random_state(dim, sub_seed(ts, 1, 0));
        let a = random_positive(dim, ts, 12);
        let mut matrices = BTreeMap::new();
        matrices.insert("sigma".to_string(), MatrixDoc::from(sigma.op()));
        matrices.insert("a".to_string(), MatrixDoc::from(&a));
        Counterexample {
            claim: "pinching-strict-convexity".into(),
            parameter: 0.0,
            dim,
            trial: t,
            sub_seed: ts,
            rel_tol: opts.rel_tol,
            margin: scan.worst_margin,
            inputs: CounterexampleInputs {
                matrices,
                channel: None,
            },
        }
    });
    Ok(ExperimentReport {
        claim: "pinching-strict-convexity".into(),
        master_seed: seed,
        rel_tol: opts.rel_tol,
        cells: vec![CellReport {
            parameter: 0.0,
            dim,
            claim: CellClaim::ExpectMonotone,
            trials_run: scan.trials_run,
            violations: scan.violations,
            failed_trials: scan.failed,
            floored_trials: 0,
            worst_margin: scan.worst_margin,
            worst_trial: scan.worst_trial,
            counterexample,
        }],
    })
}

// ---------------------------------------------------------------------------
// Counterexample re-verification
// ---------------------------------------------------------------------------

impl Counterexample {
    /// Recompute the margin from the serialized inputs alone. Archived
    /// fixtures must reproduce their recorded margin to 1e-12.
    pub fn reverify(&self) -> Result<f64> {
        let get = |name: &str| -> Result<HermitianOperator> {
            self.inputs
                .matrices
                .get(name)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("counterexample misses input '{name}'"))
                })
                .and_then(crate::wire::doc_to_hermitian)
        };
        match self.claim.as_str() {
            "kernel-operator-monotone" | "power-operator-monotone" => {
                let a = get("a")?;
                let b = get("b")?;
                let scalar = if self.claim.starts_with("kernel") {
                    KernelFamily::from_beta(self.parameter).as_scalar_function()
                } else {
                    ScalarFunction::Power(self.parameter)
                };
                Ok(loewner_margin(&a, &b, &scalar)?.1)
            }
            "metric-monotone" => {
                let rho = DensityState::new(get("rho")?)?;
                let x = TangentVector::new(get("x_mrep")?)?;
                let channel = self
                    .inputs
                    .channel
                    .as_ref()
                    .ok_or_else(|| {
                        Error::InvalidParameter("counterexample misses its channel".into())
                    })?
                    .to_channel()?;
                let kernel = KernelFamily::from_alpha(self.parameter)?;
                let data = MetricTrialData { rho, x, channel };
                Ok(metric_margin(&data, &kernel, self.rel_tol)?.2)
            }
            "divergence-monotone-rescaled" | "divergence-monotone-sandwiched" => {
                let which = if self.claim.ends_with("sandwiched") {
                    DivergenceKind::Sandwiched
                } else {
                    DivergenceKind::Rescaled
                };
                let data = DivergenceTrialData {
                    rho: DensityState::new(get("rho")?)?,
                    sigma: DensityState::new(get("sigma")?)?,
                    channel: self
                        .inputs
                        .channel
                        .as_ref()
                        .ok_or_else(|| {
                            Error::InvalidParameter("counterexample misses its channel".into())
                        })?
                        .to_channel()?,
                };
                Ok(divergence_margin(&data, self.parameter, which, self.rel_tol)?.2)
            }
            "divergence-positivity" => {
                let rho = DensityState::new(get("rho")?)?;
                let sigma = DensityState::new(get("sigma")?)?;
                Ok(positivity_margin(&rho, &sigma, self.parameter)?.1)
            }
            "pinching-strict-convexity" => {
                let sigma = DensityState::new(get("sigma")?)?;
                let a = get("a")?;
                convexity_margin(&sigma, &a)
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown counterexample claim '{other}'"
            ))),
        }
    }
}
