//! Scalar divergence functionals on pairs of faithful states.
//!
//! For α ∉ {0, 1} the central objects are
//!
//! - ψ(α)   = log Tr (σ^((1−α)/2α) ρ σ^((1−α)/2α))^α,
//! - D̃_α    = ψ(α)/(α−1)            (sandwiched Rényi relative entropy),
//! - D_α    = ψ(α)/(α(α−1))         (its rescaling, nonnegative for all α≠0),
//!
//! with the α→1 limit Tr{ρ(log ρ − log σ)} handled as an explicit branch.
//! α = 0 is genuinely excluded: the two one-sided limits α→0± exist but
//! differ for non-commuting pairs, so [`limit_at_zero`] evaluates each side
//! by Richardson extrapolation over a dyadic α-sequence.
//!
//! Evaluating ψ for |α| ~ 2⁻¹⁶ is impossible by direct eigendecomposition:
//! the sandwiched operator's spectrum spans a range like e^(±|log s|/α),
//! far beyond what double precision resolves. [`limit_at_zero`] therefore
//! uses a graded spectral form: with σ's eigenbasis ordered by dominance and
//! ρ written there as R, block Schur elimination yields pivot spectra m_j
//! per eigenvalue cluster, and
//!
//!   log λ_j(A) = ((1−α)/α)·log s_j + log m_j,
//!   ψ(α) = logsumexp_j ( (1−α)·log s_j + α·log m_j ),
//!
//! exact for commuting pairs and accurate to O(e^(−|gap|/|α|)) otherwise —
//! superpolynomially small over the extrapolation range.

use crate::error::{Error, Result};
use crate::matrix::HermitianOperator;
use crate::states::DensityState;
use crate::CMatrix;

/// Refusal band around the removable/singular α values 0 and 1 for generic
/// evaluation: 1/(α(α−1)) amplifies roundoff catastrophically inside it.
pub const ALPHA_BAND: f64 = 1e-8;

// ---------------------------------------------------------------------------
// AlphaParameter
// ---------------------------------------------------------------------------

/// Order parameter for the rescaled divergence.
///
/// `Generic(α)` covers α ∉ {0, 1}; `UmegakiLimit` is the explicit α = 1
/// branch. Values inside the refusal band around 0 or 1 are rejected: near 0
/// the two one-sided limits differ in general (use [`limit_at_zero`]), near 1
/// the caller should use the exact limit branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaParameter {
    Generic(f64),
    UmegakiLimit,
}

impl AlphaParameter {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            return Ok(Self::UmegakiLimit);
        }
        if !alpha.is_finite() {
            return Err(Error::AlphaDomain {
                alpha,
                reason: "alpha must be finite".into(),
            });
        }
        if alpha.abs() < ALPHA_BAND {
            return Err(Error::AlphaDomain {
                alpha,
                reason:
                    "the divergence has no two-sided limit at alpha = 0; use limit_at_zero for \
                     the one-sided limits"
                        .into(),
            });
        }
        if (alpha - 1.0).abs() < ALPHA_BAND {
            return Err(Error::AlphaDomain {
                alpha,
                reason: "inside the refusal band around 1; use the Umegaki limit branch".into(),
            });
        }
        Ok(Self::Generic(alpha))
    }

    pub fn value(&self) -> f64 {
        match self {
            Self::Generic(a) => *a,
            Self::UmegakiLimit => 1.0,
        }
    }
}

// ---------------------------------------------------------------------------
// The sandwiched operator and ψ
// ---------------------------------------------------------------------------

fn check_pair(rho: &DensityState, sigma: &DensityState) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    Ok(())
}

/// A = σ^((1−α)/2α) ρ σ^((1−α)/2α); strictly positive for faithful inputs.
pub fn sandwiched_operator(
    rho: &DensityState,
    sigma: &DensityState,
    alpha: f64,
) -> Result<HermitianOperator> {
    check_pair(rho, sigma)?;
    if alpha == 0.0 {
        return Err(Error::AlphaDomain {
            alpha,
            reason: "the sandwich exponent (1−α)/2α is undefined at alpha = 0".into(),
        });
    }
    let c = (1.0 - alpha) / (2.0 * alpha);
    let sc = sigma.power(c);
    Ok(HermitianOperator::symmetrize(
        sc.matrix() * rho.op().matrix() * sc.matrix(),
    ))
}

/// Ascending eigenvalues of the sandwiched operator.
pub fn sandwiched_eigenvalues(
    rho: &DensityState,
    sigma: &DensityState,
    alpha: f64,
) -> Result<Vec<f64>> {
    let a = sandwiched_operator(rho, sigma, alpha)?;
    Ok(a.spectral()?.eigenvalues().to_vec())
}

/// ψ(α) = log Tr A^α through the spectral path.
///
/// For commuting inputs this reduces to log Σ p_i^α q_i^(1−α).
///
/// Tr A^α is dominated by the large eigenvalues of A^sign(α), so the
/// spectrum is taken from A itself for α > 0 and from
/// A⁻¹ = σ^(−c) ρ⁻¹ σ^(−c) for α < 0: either way the dominant part of the
/// sum comes from the well-resolved top of the computed spectrum, and the
/// noise floor of the tail (absolute eigensolver error ~ε·‖·‖) enters the
/// trace only through a positive power. Tail entries that round to small
/// negatives are dropped; a genuinely non-positive spectrum is an error.
pub fn psi(rho: &DensityState, sigma: &DensityState, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::AlphaDomain {
            alpha,
            reason: "psi is defined for alpha ≠ 0 only".into(),
        });
    }
    let eigs = if alpha > 0.0 {
        sandwiched_eigenvalues(rho, sigma, alpha)?
    } else {
        inverse_sandwiched_eigenvalues(rho, sigma, alpha)?
    };
    let top = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top <= 0.0 {
        return Err(Error::Numerical {
            what: "sandwiched operator lost strict positivity at working precision".into(),
            residual: top,
        });
    }
    let exponent = alpha.abs();
    let mut total = 0.0f64;
    for &x in &eigs {
        if x <= 0.0 {
            if x.abs() <= 1e-12 * top {
                continue;
            }
            return Err(Error::Numerical {
                what: "sandwiched operator lost strict positivity at working precision".into(),
                residual: x,
            });
        }
        total += x.powf(exponent);
    }
    let value = total.ln();
    if !value.is_finite() {
        return Err(Error::Numerical {
            what: "psi evaluation produced a non-finite intermediate".into(),
            residual: value,
        });
    }
    Ok(value)
}

/// Ascending spectrum of A⁻¹ = σ^(−c) ρ⁻¹ σ^(−c); for α < 0 every factor
/// carries a positive exponent, so no catastrophic scale enters the product.
fn inverse_sandwiched_eigenvalues(
    rho: &DensityState,
    sigma: &DensityState,
    alpha: f64,
) -> Result<Vec<f64>> {
    check_pair(rho, sigma)?;
    let c = (1.0 - alpha) / (2.0 * alpha);
    let sc = sigma.power(-c);
    let rho_inv = rho.power(-1.0);
    let inv = HermitianOperator::symmetrize(sc.matrix() * rho_inv.matrix() * sc.matrix());
    Ok(inv.spectral()?.eigenvalues().to_vec())
}

/// D̃_α = ψ(α)/(α−1) for α ∉ {0, 1}; equals α·D_α on states.
pub fn sandwiched_renyi(rho: &DensityState, sigma: &DensityState, alpha: f64) -> Result<f64> {
    match AlphaParameter::new(alpha)? {
        AlphaParameter::Generic(a) => Ok(psi(rho, sigma, a)? / (a - 1.0)),
        AlphaParameter::UmegakiLimit => Err(Error::AlphaDomain {
            alpha,
            reason: "the relative entropy at alpha = 1 is the Umegaki branch of alpha_divergence"
                .into(),
        }),
    }
}

/// Tr{ρ(log ρ − log σ)}.
pub fn umegaki_relative_entropy(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    check_pair(rho, sigma)?;
    let tr_rho_log_rho: f64 = rho.eigenvalues().iter().map(|&p| p * p.ln()).sum();
    let tr_rho_log_sigma = sigma.log_matrix().hs_inner(rho.op());
    Ok(tr_rho_log_rho - tr_rho_log_sigma)
}

/// The rescaled divergence D_α: ψ(α)/(α(α−1)) generically, the Umegaki
/// relative entropy at α = 1. Nonnegative, zero exactly at ρ = σ.
pub fn alpha_divergence(
    rho: &DensityState,
    sigma: &DensityState,
    alpha: &AlphaParameter,
) -> Result<f64> {
    match alpha {
        AlphaParameter::Generic(a) => Ok(psi(rho, sigma, *a)? / (a * (a - 1.0))),
        AlphaParameter::UmegakiLimit => umegaki_relative_entropy(rho, sigma),
    }
}

/// Convenience wrapper taking a raw α (1.0 maps to the Umegaki branch).
pub fn alpha_divergence_at(rho: &DensityState, sigma: &DensityState, alpha: f64) -> Result<f64> {
    alpha_divergence(rho, sigma, &AlphaParameter::new(alpha)?)
}

// ---------------------------------------------------------------------------
// Classical alpha-divergence
// ---------------------------------------------------------------------------

/// (1 − Σ p_i^α q_i^(1−α)) / (α(1−α)) on strictly positive probability
/// vectors, for α ∉ {0, 1}.
pub fn classical_alpha_divergence(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    check_probability_vector(p)?;
    check_probability_vector(q)?;
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if alpha.abs() < ALPHA_BAND || (alpha - 1.0).abs() < ALPHA_BAND {
        return Err(Error::AlphaDomain {
            alpha,
            reason: "the classical alpha-divergence needs alpha outside {0, 1}".into(),
        });
    }
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(&pi, &qi)| pi.powf(alpha) * qi.powf(1.0 - alpha))
        .sum();
    Ok((1.0 - s) / (alpha * (1.0 - alpha)))
}

/// log Σ p_i^α q_i^(1−α), the commuting form of ψ; computed in log space so
/// it stays finite for extreme α.
pub fn classical_psi(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    check_probability_vector(p)?;
    check_probability_vector(q)?;
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let terms: Vec<f64> = p
        .iter()
        .zip(q)
        .map(|(&pi, &qi)| alpha * pi.ln() + (1.0 - alpha) * qi.ln())
        .collect();
    Ok(logsumexp(&terms))
}

fn check_probability_vector(p: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &x in p {
        if x <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "probability vector must be strictly positive, got entry {x}"
            )));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidTrace {
            trace: sum,
            expected: 1.0,
        });
    }
    Ok(())
}

fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

// ---------------------------------------------------------------------------
// One-sided limits at α = 0
// ---------------------------------------------------------------------------

/// Which one-sided limit of D_α at α = 0 to extrapolate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitSide {
    Above,
    Below,
}

/// Result of the α→0± extrapolation: the estimate, a conservative error
/// bound from the Richardson table, the general sandwich bounds
/// −log(eig ρ) − H(σ), and the raw (α, D_α) samples.
#[derive(Clone, Debug)]
pub struct ZeroLimitReport {
    pub estimate: f64,
    pub error_bound: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub evaluations: Vec<(f64, f64)>,
}

/// ψ(α) in the graded spectral form, valid asymptotically as α → 0±.
///
/// Exact for commuting pairs at every α; for non-commuting pairs the error is
/// O(e^(−|log-gap|·|1/α|)) per σ-eigenvalue cluster pair.
pub fn psi_graded(rho: &DensityState, sigma: &DensityState, alpha: f64) -> Result<f64> {
    check_pair(rho, sigma)?;
    if alpha == 0.0 {
        return Err(Error::AlphaDomain {
            alpha,
            reason: "psi is defined for alpha ≠ 0 only".into(),
        });
    }
    let n = rho.dim();
    let spec = sigma.spectral();
    // order σ's eigenbasis so the dominant scale of s^((1−α)/α) comes first
    let descending = alpha > 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let eigs = spec.eigenvalues();
    if descending {
        order.sort_by(|&i, &j| eigs[j].total_cmp(&eigs[i]));
    } // ascending is the spectral default
    let s_sorted: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
    let u = spec.eigenvectors();
    let up = CMatrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    let mut work = up.adjoint() * rho.op().matrix() * &up;

    // clusters of near-equal σ eigenvalues
    let mut cluster_sizes: Vec<usize> = Vec::new();
    let mut cluster_logs: Vec<f64> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        let split = i == n || {
            let gap = (s_sorted[i] - s_sorted[i - 1]).abs();
            gap > 1e-10 * s_sorted[i].abs().max(s_sorted[i - 1].abs())
        };
        if split {
            cluster_sizes.push(i - start);
            let mean_log =
                s_sorted[start..i].iter().map(|x| x.ln()).sum::<f64>() / (i - start) as f64;
            cluster_logs.push(mean_log);
            start = i;
        }
    }

    // block Schur elimination: pivot spectra per cluster
    let mut log_lambdas = Vec::with_capacity(n);
    let two_c = (1.0 - alpha) / alpha;
    for (&m, &log_s) in cluster_sizes.iter().zip(&cluster_logs) {
        let size = work.nrows();
        let block = work.view((0, 0), (m, m)).into_owned();
        let block_h = HermitianOperator::symmetrize(block.clone());
        let pivots = block_h.spectral()?;
        for &mu in pivots.eigenvalues() {
            if mu <= 0.0 {
                return Err(Error::Numerical {
                    what: "graded elimination lost positivity".into(),
                    residual: mu,
                });
            }
            log_lambdas.push(two_c * log_s + mu.ln());
        }
        if size > m {
            let inv = block.try_inverse().ok_or(Error::Numerical {
                what: "singular pivot block in graded elimination".into(),
                residual: 0.0,
            })?;
            let rest = work.view((m, m), (size - m, size - m)).into_owned();
            let lower = work.view((m, 0), (size - m, m)).into_owned();
            let upper = work.view((0, m), (m, size - m)).into_owned();
            work = rest - lower * inv * upper;
        }
    }

    let terms: Vec<f64> = log_lambdas.iter().map(|l| alpha * l).collect();
    Ok(logsumexp(&terms))
}

/// One-sided limit of D_α as α → 0±, Richardson-extrapolated over the dyadic
/// sequence α_k = ±2^(−k), k = 6..=16.
pub fn limit_at_zero(
    rho: &DensityState,
    sigma: &DensityState,
    side: LimitSide,
) -> Result<ZeroLimitReport> {
    check_pair(rho, sigma)?;
    let sign = match side {
        LimitSide::Above => 1.0,
        LimitSide::Below => -1.0,
    };
    let mut evaluations = Vec::new();
    for k in 6..=16u32 {
        let a = sign * 0.5f64.powi(k as i32);
        let value = psi_graded(rho, sigma, a)? / (a * (a - 1.0));
        evaluations.push((a, value));
    }

    // raw differences must not blow up
    let raw: Vec<f64> = evaluations.iter().map(|&(_, v)| v).collect();
    let mut growth = 0;
    for w in raw.windows(3) {
        let d0 = (w[1] - w[0]).abs();
        let d1 = (w[2] - w[1]).abs();
        if d1 > 4.0 * d0 + 1e-12 {
            growth += 1;
        }
    }
    if growth >= 3 {
        return Err(Error::ExtrapolationDiverged { sequence: raw });
    }

    // Richardson table, ratio 2, three levels
    let mut cols = vec![raw.clone()];
    for m in 1..=3usize {
        let prev = &cols[m - 1];
        let factor = (2.0f64).powi(m as i32);
        let next: Vec<f64> = prev
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        cols.push(next);
    }
    let last = *cols[3].last().unwrap();
    let prev_same = cols[3][cols[3].len() - 2];
    let prev_level = *cols[2].last().unwrap();
    let error_bound = (last - prev_same).abs().max((last - prev_level).abs()) + 1e-14;

    let h_sigma: f64 = -sigma.eigenvalues().iter().map(|&s| s * s.ln()).sum::<f64>();
    let lower_bound = -rho.max_eigenvalue().ln() - h_sigma;
    let upper_bound = -rho.min_eigenvalue().ln() - h_sigma;

    Ok(ZeroLimitReport {
        estimate: last,
        error_bound,
        lower_bound,
        upper_bound,
        evaluations,
    })
}
