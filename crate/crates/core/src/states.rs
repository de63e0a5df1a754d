//! The quantum state space and its surroundings.
//!
//! A point of the state space is a faithful density operator: strictly
//! positive, unit trace. Tangent vectors are carried by their
//! m-representation X^(m) = Xρ, a traceless Hermitian matrix. Charts are
//! affine: ρ_θ = center + Σ θ_a F_a over a trace-orthonormal traceless basis
//! {F_a}, so coordinate vector fields have constant m-representations.
//!
//! CPTP maps are held in Kraus form; the pushforward of a tangent vector
//! under an affine channel is the channel applied to its m-representation.
//! Pinching with respect to a state σ projects onto the commutant of σ's
//! spectral projectors.

use crate::error::{Error, Result};
use crate::matrix::{HermitianOperator, SpectralDecomposition};
use crate::rng::{complex_gaussian, rng_for};
use crate::{CMatrix, C64};
use rand_distr::{Distribution, StandardNormal};

/// Unit-trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;

/// Faithfulness threshold: the smallest admissible eigenvalue of a state.
pub const FAITHFUL_MIN_EIG: f64 = 1e-12;

/// Eigenvalue floor enforced by the random state generator.
pub const RANDOM_STATE_FLOOR: f64 = 1e-6;

/// Relative gap below which two eigenvalues of σ share a pinching projector.
pub const PINCHING_GROUP_REL_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// DensityState
// ---------------------------------------------------------------------------

/// A faithful density operator with its spectral decomposition cached.
#[derive(Clone, Debug)]
pub struct DensityState {
    op: HermitianOperator,
    spectral: SpectralDecomposition,
}

impl DensityState {
    /// Validate unit trace (within [`TRACE_TOL`]) and strict positivity
    /// (min eigenvalue above [`FAITHFUL_MIN_EIG`]).
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace {
                trace,
                expected: 1.0,
            });
        }
        let spectral = op.spectral()?;
        if spectral.min_eigenvalue() <= FAITHFUL_MIN_EIG {
            return Err(Error::NotPositive {
                min_eig: spectral.min_eigenvalue(),
            });
        }
        Ok(Self { op, spectral })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let op = HermitianOperator::identity(n).scale(1.0 / n as f64);
        let spectral = op.spectral().expect("identity spectral");
        Self { op, spectral }
    }

    /// Diagonal state from a strictly positive probability vector.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(p))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectral.eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral.min_eigenvalue()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.spectral.max_eigenvalue()
    }

    /// ρ^x through the cached decomposition.
    pub fn power(&self, x: f64) -> HermitianOperator {
        self.spectral.apply_scalar(|p| p.powf(x))
    }

    /// log ρ through the cached decomposition.
    pub fn log_matrix(&self) -> HermitianOperator {
        self.spectral.apply_scalar(f64::ln)
    }

    /// Build a faithful state from a Hermitian matrix that may sit slightly
    /// outside the faithful cone (e.g. a channel output). The matrix is
    /// trace-normalized and, if its minimum eigenvalue falls below `floor`,
    /// mixed toward the maximally mixed state just enough to clear it.
    /// Returns the state and whether flooring was applied.
    pub fn faithful_from(op: HermitianOperator, floor: f64) -> Result<(Self, bool)> {
        let trace = op.trace();
        if trace.abs() < 1e-12 {
            return Err(Error::InvalidTrace {
                trace,
                expected: 1.0,
            });
        }
        let normalized = op.scale(1.0 / trace);
        let spec = normalized.spectral()?;
        let min = spec.min_eigenvalue();
        let n = normalized.dim();
        if min >= floor {
            return Ok((
                Self {
                    op: normalized,
                    spectral: spec,
                },
                false,
            ));
        }
        let uniform = 1.0 / n as f64;
        if min >= uniform {
            return Err(Error::NotPositive { min_eig: min });
        }
        let t = ((floor * 1.25 - min) / (uniform - min)).clamp(0.0, 1.0);
        let mixed = normalized
            .scale(1.0 - t)
            .add(&HermitianOperator::identity(n).scale(t * uniform));
        let spectral = mixed.spectral()?;
        Ok((
            Self {
                op: mixed,
                spectral,
            },
            true,
        ))
    }
}

// ---------------------------------------------------------------------------
// TangentVector
// ---------------------------------------------------------------------------

/// The m-representation X^(m) = Xρ of a tangent vector: traceless Hermitian.
#[derive(Clone, Debug)]
pub struct TangentVector {
    mrep: HermitianOperator,
}

impl TangentVector {
    pub fn new(mrep: HermitianOperator) -> Result<Self> {
        let trace = mrep.trace();
        if trace.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace {
                trace,
                expected: 0.0,
            });
        }
        Ok(Self { mrep })
    }

    pub fn dim(&self) -> usize {
        self.mrep.dim()
    }

    pub fn mrep(&self) -> &HermitianOperator {
        &self.mrep
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mrep: self.mrep.scale(factor),
        }
    }
}

// ---------------------------------------------------------------------------
// QuantumChannel
// ---------------------------------------------------------------------------

/// A CPTP map in Kraus form: A ↦ Σ K_i A K_i† with Σ K_i† K_i = I.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    input_dim: usize,
    output_dim: usize,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter(
                "a channel needs at least one Kraus operator".into(),
            ));
        }
        let output_dim = kraus[0].nrows();
        let input_dim = kraus[0].ncols();
        for k in &kraus {
            if k.nrows() != output_dim || k.ncols() != input_dim {
                return Err(Error::DimensionMismatch {
                    left: k.nrows(),
                    right: output_dim,
                });
            }
        }
        let mut sum = CMatrix::zeros(input_dim, input_dim);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let residual = (&sum - CMatrix::identity(input_dim, input_dim)).norm();
        if residual > TRACE_TOL {
            return Err(Error::KrausIncomplete { residual });
        }
        Ok(Self {
            kraus,
            input_dim,
            output_dim,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(n, n)],
            input_dim: n,
            output_dim: n,
        }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Σ K_i A K_i†. Preserves the trace and Hermiticity.
    pub fn apply(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        if a.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: self.input_dim,
            });
        }
        let mut out = CMatrix::zeros(self.output_dim, self.output_dim);
        for k in &self.kraus {
            out += k * a.matrix() * k.adjoint();
        }
        Ok(HermitianOperator::symmetrize(out))
    }

    /// Pushforward of a tangent vector: the channel applied to X^(m).
    pub fn push_forward(&self, x: &TangentVector) -> Result<TangentVector> {
        TangentVector::new(self.apply(x.mrep())?)
    }
}

// ---------------------------------------------------------------------------
// StateChart
// ---------------------------------------------------------------------------

/// A global affine chart: an ordered, trace-orthonormal basis of the
/// traceless Hermitian matrices on C^n (n²−1 elements).
///
/// Ordering: the n−1 diagonal elements come first, so the leading indices
/// span the commutative submanifold of diagonal states; then, for each pair
/// i<j in lexicographic order, the symmetric element followed by the
/// antisymmetric one.
#[derive(Clone, Debug)]
pub struct StateChart {
    dim: usize,
    basis: Vec<HermitianOperator>,
}

impl StateChart {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "chart dimension must be at least 2, got {n}"
            )));
        }
        let mut basis = Vec::with_capacity(n * n - 1);
        for l in 1..n {
            // diag(1, ..., 1, -l, 0, ..., 0) / sqrt(l(l+1))
            let norm = (l as f64 * (l as f64 + 1.0)).sqrt();
            let mut d = vec![0.0; n];
            for item in d.iter_mut().take(l) {
                *item = 1.0 / norm;
            }
            d[l] = -(l as f64) / norm;
            basis.push(HermitianOperator::from_real_diagonal(&d));
        }
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut sym = CMatrix::zeros(n, n);
                sym[(i, j)] = C64::new(inv_sqrt2, 0.0);
                sym[(j, i)] = C64::new(inv_sqrt2, 0.0);
                basis.push(HermitianOperator::symmetrize(sym));
                let mut asym = CMatrix::zeros(n, n);
                asym[(i, j)] = C64::new(0.0, inv_sqrt2);
                asym[(j, i)] = C64::new(0.0, -inv_sqrt2);
                basis.push(HermitianOperator::symmetrize(asym));
            }
        }
        Ok(Self { dim: n, basis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of chart coordinates, n²−1.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[HermitianOperator] {
        &self.basis
    }

    pub fn element(&self, a: usize) -> &HermitianOperator {
        &self.basis[a]
    }

    /// Indices of the diagonal basis elements (the commutative directions).
    pub fn diagonal_indices(&self) -> std::ops::Range<usize> {
        0..(self.dim - 1)
    }

    /// center + Σ θ_a F_a, validated as a faithful state. The error reports
    /// the minimum eigenvalue when the coordinates leave the faithful cone.
    pub fn state(&self, center: &DensityState, theta: &[f64]) -> Result<DensityState> {
        if theta.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: theta.len(),
                right: self.len(),
            });
        }
        if center.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: center.dim(),
                right: self.dim,
            });
        }
        let mut m = center.op().matrix().clone();
        for (t, f) in theta.iter().zip(self.basis.iter()) {
            if *t != 0.0 {
                m += f.matrix().map(|z| z * *t);
            }
        }
        let op = HermitianOperator::symmetrize(m);
        let spec = op.spectral()?;
        if spec.min_eigenvalue() <= FAITHFUL_MIN_EIG {
            return Err(Error::StateRange {
                min_eig: spec.min_eigenvalue(),
            });
        }
        DensityState::new(op)
    }

    /// Coordinates of a traceless Hermitian matrix (or of state − center)
    /// via trace inner products with the basis.
    pub fn coordinates_of(&self, m: &HermitianOperator) -> Vec<f64> {
        self.basis.iter().map(|f| f.hs_inner(m)).collect()
    }

    /// Tangent vector with the given chart coordinates.
    pub fn tangent(&self, coords: &[f64]) -> Result<TangentVector> {
        if coords.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: coords.len(),
                right: self.len(),
            });
        }
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (c, f) in coords.iter().zip(self.basis.iter()) {
            m += f.matrix().map(|z| z * *c);
        }
        TangentVector::new(HermitianOperator::symmetrize(m))
    }
}

// ---------------------------------------------------------------------------
// Pinching
// ---------------------------------------------------------------------------

/// Group σ's (ascending) eigenvalues into near-degenerate clusters and
/// return, for each index, its cluster id.
fn pinching_clusters(spec: &SpectralDecomposition) -> Vec<usize> {
    let eigs = spec.eigenvalues();
    let mut cluster = vec![0usize; eigs.len()];
    let mut current = 0;
    for i in 1..eigs.len() {
        let gap = (eigs[i] - eigs[i - 1]).abs();
        if gap > PINCHING_GROUP_REL_TOL * eigs[i].abs().max(eigs[i - 1].abs()).max(1e-300) {
            current += 1;
        }
        cluster[i] = current;
    }
    cluster
}

/// E_σ(A) = Σ_i E_i A E_i over σ's spectral projectors.
pub fn pinching(sigma: &DensityState, a: &HermitianOperator) -> Result<HermitianOperator> {
    if sigma.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            left: sigma.dim(),
            right: a.dim(),
        });
    }
    let spec = sigma.spectral();
    let cluster = pinching_clusters(spec);
    let mut at = spec.to_eigenbasis(a.matrix());
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            if cluster[i] != cluster[j] {
                at[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(HermitianOperator::symmetrize(spec.from_eigenbasis(&at)))
}

/// σ's spectral projectors, one per eigenvalue cluster.
pub fn pinching_projectors(sigma: &DensityState) -> Vec<CMatrix> {
    let spec = sigma.spectral();
    let cluster = pinching_clusters(spec);
    let n = sigma.dim();
    let n_clusters = cluster.last().map_or(0, |c| c + 1);
    let u = spec.eigenvectors();
    (0..n_clusters)
        .map(|c| {
            let mut p = CMatrix::zeros(n, n);
            for (k, &ck) in cluster.iter().enumerate() {
                if ck == c {
                    let col = u.column(k);
                    for i in 0..n {
                        for j in 0..n {
                            p[(i, j)] += col[i] * col[j].conj();
                        }
                    }
                }
            }
            p
        })
        .collect()
}

/// The pinching operation expressed as a quantum channel (projector Kraus
/// set).
pub fn pinching_channel(sigma: &DensityState) -> Result<QuantumChannel> {
    QuantumChannel::new(pinching_projectors(sigma))
}

/// Outcome of testing the two equivalent fixed-point conditions of pinching:
/// equality of ordered spectra and equality of operators.
#[derive(Clone, Copy, Debug)]
pub struct PinchingFixedPointReport {
    pub spectra_equal: bool,
    pub operator_equal: bool,
    pub spectra_deviation: f64,
    pub operator_deviation: f64,
}

impl PinchingFixedPointReport {
    /// Equal spectra without equal operators would contradict the
    /// equivalence; flag it.
    pub fn lemma_violated(&self) -> bool {
        self.spectra_equal && !self.operator_equal
    }
}

/// Compare λ↓(A) with λ↓(E_σ(A)) (tolerance 1e-8 per eigenvalue) and
/// ‖A − E_σ(A)‖_F against 1e-8.
pub fn pinching_fixed_point_check(
    sigma: &DensityState,
    a: &HermitianOperator,
) -> Result<PinchingFixedPointReport> {
    let pinched = pinching(sigma, a)?;
    let ea = a.spectral()?;
    let eb = pinched.spectral()?;
    let spectra_deviation = ea
        .eigenvalues()
        .iter()
        .zip(eb.eigenvalues())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    let operator_deviation = a.sub(&pinched).frobenius_norm();
    Ok(PinchingFixedPointReport {
        spectra_equal: spectra_deviation <= 1e-8,
        operator_equal: operator_deviation <= 1e-8,
        spectra_deviation,
        operator_deviation,
    })
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

/// Random faithful state: G G†/Tr(G G†) for complex Gaussian G, floored to
/// min eigenvalue ≥ [`RANDOM_STATE_FLOOR`]. Identical seeds give identical
/// states.
pub fn random_state(n: usize, seed: u64) -> DensityState {
    let g = complex_gaussian(&mut rng_for(seed, 1, 0), n, n);
    let w = &g * g.adjoint();
    let (state, _) =
        DensityState::faithful_from(HermitianOperator::symmetrize(w), RANDOM_STATE_FLOOR)
            .expect("Wishart matrix has positive trace");
    state
}

/// Random CPTP channel on C^n with the given Kraus rank, carved out of a
/// Haar-random isometry (QR of a complex Gaussian block with phase fix).
pub fn random_channel(n: usize, rank: usize, seed: u64) -> QuantumChannel {
    assert!(rank >= 1, "Kraus rank must be at least 1");
    let g = complex_gaussian(&mut rng_for(seed, 2, 0), rank * n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // fix column phases so the isometry is Haar distributed
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..q.nrows() {
            q[(i, c)] *= phase.conj();
        }
    }
    let kraus: Vec<CMatrix> = (0..rank).map(|b| q.rows(b * n, n).into_owned()).collect();
    QuantumChannel::new(kraus).expect("QR isometry is trace preserving")
}

/// Random tangent vector: standard normal chart coordinates.
pub fn random_tangent(chart: &StateChart, seed: u64) -> TangentVector {
    let mut rng = rng_for(seed, 3, 0);
    let coords: Vec<f64> = (0..chart.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    chart.tangent(&coords).expect("chart basis is traceless")
}
