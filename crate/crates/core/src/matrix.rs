//! Spectral calculus on Hermitian matrices.
//!
//! Everything downstream reduces to functions of Hermitian matrices and their
//! directional (Gâteaux/Fréchet) derivatives. This module provides
//!
//! - [`HermitianOperator`] and its validated [`SpectralDecomposition`];
//! - [`matrix_function`]: f(A) = U diag(f(λ)) U†;
//! - [`frechet_derivative`]: Df(A)\[B\] through the first divided-difference
//!   kernel f\[λ_i, λ_j\] in A's eigenbasis;
//! - [`frechet_quadrature`]: the same derivative through integral
//!   representations (Dyson integral for exp, resolvent integral for log, a
//!   double integral for powers), evaluated with Gauss–Legendre rules — an
//!   independent route used to cross-check the closed form;
//! - [`second_frechet_derivative`]: D²f(A)\[B,C\] through second divided
//!   differences;
//! - [`trace_power_derivative`]: D(Tr A^λ)\[B\] = λ Tr{A^(λ−1) B};
//! - [`majorizes`]: descending partial-sum dominance of real vectors.
//!
//! Degenerate eigenvalues are handled by switching divided differences to
//! derivative limits when |λ_i − λ_j| < 1e-10·max(1, |λ_i|). Assembled
//! results are symmetrized (M + M†)/2 to suppress roundoff drift.

use crate::error::{Error, Result};
use crate::{CMatrix, C64};
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Absolute tolerance for the Hermiticity check.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Relative threshold below which two eigenvalues are treated as coincident
/// in divided differences.
pub const DEGENERACY_REL_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// An n×n complex self-adjoint matrix, the universal carrier for states,
/// observables, and tangent-vector representations.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    /// Validate and wrap a complex matrix. Fails if the matrix is not square
    /// or deviates from its conjugate transpose by more than
    /// [`HERMITICITY_TOL`] in any entry. The stored matrix is symmetrized.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let mut residual = 0.0f64;
        for i in 0..mat.nrows() {
            for j in i..mat.ncols() {
                let d = mat[(i, j)] - mat[(j, i)].conj();
                residual = residual.max(d.norm());
            }
        }
        if residual > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                residual,
                tol: HERMITICITY_TOL,
            });
        }
        Ok(Self::symmetrize(mat))
    }

    /// Wrap (M + M†)/2 without validation. Used for results that are
    /// Hermitian by construction up to roundoff.
    pub fn symmetrize(mat: CMatrix) -> Self {
        let adj = mat.adjoint();
        Self {
            mat: (mat + adj).map(|z| z * 0.5),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            mat: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: CMatrix::identity(n, n),
        }
    }

    /// Diagonal matrix from real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            mat: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Real part of the trace (the imaginary part vanishes for Hermitian
    /// matrices up to roundoff).
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Sum with another Hermitian operator.
    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: self.mat.map(|z| z * factor),
        }
    }

    /// Real Hilbert–Schmidt inner product Re Tr{A B}.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.mat[(i, j)] * other.mat[(j, i)];
            }
        }
        acc.re
    }

    /// Spectral decomposition with eigenvalues sorted ascending.
    pub fn spectral(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::of(self)
    }
}

/// Eigen-decomposition of a Hermitian operator: ascending real eigenvalues
/// and a unitary matrix of column eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn of(a: &HermitianOperator) -> Result<Self> {
        let n = a.dim();
        if a.mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical {
                what: "eigendecomposition of a non-finite matrix".into(),
                residual: f64::NAN,
            });
        }
        let eig = a.mat.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Unitary matrix whose columns are the eigenvectors, ordered to match
    /// [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// U diag(λ) U†, for checking the reconstruction invariant.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.apply_scalar(|x| x)
    }

    /// U diag(f(λ)) U† for a plain scalar map (no domain checks).
    pub fn apply_scalar(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.apply_values(&vals)
    }

    /// U diag(vals) U† with one value per eigenvalue position.
    pub fn apply_values(&self, vals: &[f64]) -> HermitianOperator {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for c in 0..n {
            let v = C64::new(vals[c], 0.0);
            for r in 0..n {
                scaled[(r, c)] *= v;
            }
        }
        HermitianOperator::symmetrize(scaled * self.eigenvectors.adjoint())
    }

    /// Conjugate a matrix into the eigenbasis: U† M U.
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// Conjugate a matrix out of the eigenbasis: U M U†.
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }
}

/// Scalar functions that may be lifted to Hermitian matrices.
///
/// `Power` and `Log` require a strictly positive spectrum. `Custom` carries
/// its own callable together with optional derivative callables; the first
/// derivative is needed by [`frechet_derivative`], the second by
/// [`second_frechet_derivative`].
#[derive(Clone)]
pub enum ScalarFunction {
    Power(f64),
    Exp,
    Log,
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        df: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
        d2f: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
        positive_domain: bool,
    },
}

impl std::fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Power(p) => write!(f, "Power({p})"),
            Self::Exp => write!(f, "Exp"),
            Self::Log => write!(f, "Log"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl ScalarFunction {
    pub fn name(&self) -> String {
        match self {
            Self::Power(p) => format!("t^{p}"),
            Self::Exp => "exp".into(),
            Self::Log => "log".into(),
            Self::Custom { name, .. } => name.clone(),
        }
    }

    /// Whether the spectrum must be strictly positive.
    pub fn requires_positive(&self) -> bool {
        match self {
            Self::Power(_) | Self::Log => true,
            Self::Exp => false,
            Self::Custom {
                positive_domain, ..
            } => *positive_domain,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.domain_check(x)?;
        Ok(match self {
            Self::Power(p) => x.powf(*p),
            Self::Exp => x.exp(),
            Self::Log => x.ln(),
            Self::Custom { f, .. } => f(x),
        })
    }

    pub fn d1(&self, x: f64) -> Result<f64> {
        self.domain_check(x)?;
        match self {
            Self::Power(p) => Ok(p * x.powf(p - 1.0)),
            Self::Exp => Ok(x.exp()),
            Self::Log => Ok(1.0 / x),
            Self::Custom { df, .. } => df
                .as_ref()
                .map(|g| g(x))
                .ok_or(Error::MissingDerivative { order: 1 }),
        }
    }

    pub fn d2(&self, x: f64) -> Result<f64> {
        self.domain_check(x)?;
        match self {
            Self::Power(p) => Ok(p * (p - 1.0) * x.powf(p - 2.0)),
            Self::Exp => Ok(x.exp()),
            Self::Log => Ok(-1.0 / (x * x)),
            Self::Custom { d2f, .. } => d2f
                .as_ref()
                .map(|g| g(x))
                .ok_or(Error::MissingDerivative { order: 2 }),
        }
    }

    fn domain_check(&self, x: f64) -> Result<()> {
        if self.requires_positive() && x <= 0.0 {
            return Err(Error::EigenvalueDomain {
                value: x,
                func: self.name(),
            });
        }
        Ok(())
    }

    /// Check every eigenvalue against the function's domain, naming the
    /// offending one on failure.
    pub fn check_spectrum(&self, eigenvalues: &[f64]) -> Result<()> {
        for &x in eigenvalues {
            self.domain_check(x)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Matrix functions and Fréchet derivatives (closed form)
// ---------------------------------------------------------------------------

/// f(A) = U diag(f(λ_i)) U†.
pub fn matrix_function(a: &HermitianOperator, f: &ScalarFunction) -> Result<HermitianOperator> {
    let spec = a.spectral()?;
    f.check_spectrum(spec.eigenvalues())?;
    let mut vals = Vec::with_capacity(spec.dim());
    for &x in spec.eigenvalues() {
        vals.push(f.eval(x)?);
    }
    Ok(spec.apply_values(&vals))
}

fn near(x: f64, y: f64) -> bool {
    (x - y).abs() < DEGENERACY_REL_TOL * x.abs().max(1.0)
}

/// First divided difference f\[x,y\] with the derivative as coincidence limit.
fn divided_difference(f: &ScalarFunction, x: f64, y: f64) -> Result<f64> {
    if near(x, y) {
        f.d1(0.5 * (x + y))
    } else {
        Ok((f.eval(x)? - f.eval(y)?) / (x - y))
    }
}

/// Second divided difference f\[x,y,z\]; the outer difference is taken across
/// the widest pair for stability, and full coincidence falls back to f″/2.
fn divided_difference2(f: &ScalarFunction, x: f64, y: f64, z: f64) -> Result<f64> {
    let mut v = [x, y, z];
    v.sort_by(f64::total_cmp);
    let (a, b, c) = (v[0], v[1], v[2]);
    if near(a, c) {
        Ok(f.d2((a + b + c) / 3.0)? / 2.0)
    } else {
        Ok((divided_difference(f, a, b)? - divided_difference(f, b, c)?) / (a - c))
    }
}

/// Df(A)\[B\]: the directional derivative of A ↦ f(A) at A in direction B,
/// assembled entrywise as f\[λ_i, λ_j\]·(U†BU)_ij in A's eigenbasis.
///
/// Linear in B; Hermitian for Hermitian B.
pub fn frechet_derivative(
    a: &HermitianOperator,
    b: &HermitianOperator,
    f: &ScalarFunction,
) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let spec = a.spectral()?;
    f.check_spectrum(spec.eigenvalues())?;
    let bt = spec.to_eigenbasis(b.matrix());
    let out = frechet_in_eigenbasis(spec.eigenvalues(), &bt, f)?;
    Ok(HermitianOperator::symmetrize(spec.from_eigenbasis(&out)))
}

/// Entrywise divided-difference product in a fixed eigenbasis; `eigs\[i\]` is
/// the diagonal value attached to row/column i (no sorting assumed).
pub(crate) fn frechet_in_eigenbasis(
    eigs: &[f64],
    b: &CMatrix,
    f: &ScalarFunction,
) -> Result<CMatrix> {
    let n = eigs.len();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = b[(i, j)] * divided_difference(f, eigs[i], eigs[j])?;
        }
    }
    Ok(out)
}

/// D²f(A)\[B,C\]: symmetric bilinear second derivative, assembled from second
/// divided differences summed over both orderings of (B, C).
pub fn second_frechet_derivative(
    a: &HermitianOperator,
    b: &HermitianOperator,
    c: &HermitianOperator,
    f: &ScalarFunction,
) -> Result<HermitianOperator> {
    if a.dim() != b.dim() || a.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim().max(c.dim()),
        });
    }
    let spec = a.spectral()?;
    f.check_spectrum(spec.eigenvalues())?;
    let bt = spec.to_eigenbasis(b.matrix());
    let ct = spec.to_eigenbasis(c.matrix());
    let out = second_frechet_in_eigenbasis(spec.eigenvalues(), &bt, &ct, f)?;
    Ok(HermitianOperator::symmetrize(spec.from_eigenbasis(&out)))
}

pub(crate) fn second_frechet_in_eigenbasis(
    eigs: &[f64],
    b: &CMatrix,
    c: &CMatrix,
    f: &ScalarFunction,
) -> Result<CMatrix> {
    let n = eigs.len();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                let w = divided_difference2(f, eigs[i], eigs[k], eigs[j])?;
                acc += (b[(i, k)] * c[(k, j)] + c[(i, k)] * b[(k, j)]) * w;
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// D(Tr A^λ)\[B\] = λ·Tr{A^(λ−1) B}.
pub fn trace_power_derivative(
    a: &HermitianOperator,
    b: &HermitianOperator,
    lambda: f64,
) -> Result<f64> {
    let spec = a.spectral()?;
    if spec.min_eigenvalue() <= 0.0 {
        return Err(Error::NotPositive {
            min_eig: spec.min_eigenvalue(),
        });
    }
    let apow = spec.apply_scalar(|x| x.powf(lambda - 1.0));
    Ok(lambda * apow.hs_inner(b))
}

// ---------------------------------------------------------------------------
// Quadrature route
// ---------------------------------------------------------------------------

/// Node counts and the agreement tolerance for the integral representations.
///
/// The t-integral over \[0,1\] uses `t_nodes` Gauss–Legendre points; the
/// s-integral over [0,∞) is mapped by s = u/(1−u) onto [0,1) and uses
/// `s_nodes` points. Convergence is asserted by re-evaluating at half the
/// node counts.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureConfig {
    pub t_nodes: usize,
    pub s_nodes: usize,
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            t_nodes: 64,
            s_nodes: 128,
            tol: 1e-6,
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] via Golub–Welsch.
fn gauss_legendre_raw(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64) / ((4 * i * i - 1) as f64).sqrt();
        m[(i, i - 1)] = b;
        m[(i - 1, i)] = b;
    }
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Nodes and weights of one quadrature rule.
type QuadratureRule = Arc<(Vec<f64>, Vec<f64>)>;

/// Cached Gauss–Legendre rule mapped to [0, 1].
pub fn gauss_legendre_unit(n: usize) -> QuadratureRule {
    static CACHE: OnceLock<Mutex<HashMap<usize, QuadratureRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let (x, w) = gauss_legendre_raw(n);
            let nodes: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
            let weights: Vec<f64> = w.iter().map(|v| 0.5 * v).collect();
            Arc::new((nodes, weights))
        })
        .clone()
}

/// Df(A)\[B\] through the integral representations:
///
/// - exp: ∫₀¹ e^((1−t)A) B e^(tA) dt
/// - log: ∫₀^∞ (sI+A)⁻¹ B (sI+A)⁻¹ ds
/// - power λ: λ ∫₀¹ dt ∫₀^∞ ds A^((1−t)λ) (sI+A)⁻¹ B (sI+A)⁻¹ A^(tλ)
///
/// Returns the higher-order evaluation after checking it against half the
/// node counts; disagreement beyond `cfg.tol · (1 + ‖B‖_F)` is reported as a
/// quadrature failure with the residual.
pub fn frechet_quadrature(
    a: &HermitianOperator,
    b: &HermitianOperator,
    f: &ScalarFunction,
    cfg: &QuadratureConfig,
) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let spec = a.spectral()?;
    f.check_spectrum(spec.eigenvalues())?;
    let bt = spec.to_eigenbasis(b.matrix());

    let fine = quadrature_in_eigenbasis(spec.eigenvalues(), &bt, f, cfg.t_nodes, cfg.s_nodes)?;
    let coarse = quadrature_in_eigenbasis(
        spec.eigenvalues(),
        &bt,
        f,
        (cfg.t_nodes / 2).max(2),
        (cfg.s_nodes / 2).max(2),
    )?;
    let residual = (&fine - &coarse).norm();
    let scale = 1.0 + b.frobenius_norm();
    if residual > cfg.tol * scale {
        return Err(Error::QuadratureDiverged {
            residual,
            tol: cfg.tol * scale,
        });
    }
    Ok(HermitianOperator::symmetrize(spec.from_eigenbasis(&fine)))
}

fn quadrature_in_eigenbasis(
    eigs: &[f64],
    b: &CMatrix,
    f: &ScalarFunction,
    t_nodes: usize,
    s_nodes: usize,
) -> Result<CMatrix> {
    let n = eigs.len();
    let mut out = CMatrix::zeros(n, n);
    match f {
        ScalarFunction::Exp => {
            let rule = gauss_legendre_unit(t_nodes);
            for (t, w) in rule.0.iter().zip(rule.1.iter()) {
                for i in 0..n {
                    for j in 0..n {
                        let factor = ((1.0 - t) * eigs[i]).exp() * (t * eigs[j]).exp();
                        out[(i, j)] += b[(i, j)] * (w * factor);
                    }
                }
            }
        }
        ScalarFunction::Log => {
            let rule = gauss_legendre_unit(s_nodes);
            for (u, w) in rule.0.iter().zip(rule.1.iter()) {
                let s = u / (1.0 - u);
                let jac = 1.0 / ((1.0 - u) * (1.0 - u));
                for i in 0..n {
                    for j in 0..n {
                        let factor = jac / ((s + eigs[i]) * (s + eigs[j]));
                        out[(i, j)] += b[(i, j)] * (w * factor);
                    }
                }
            }
        }
        ScalarFunction::Power(lambda) => {
            let trule = gauss_legendre_unit(t_nodes);
            let srule = gauss_legendre_unit(s_nodes);
            for (t, wt) in trule.0.iter().zip(trule.1.iter()) {
                for (u, ws) in srule.0.iter().zip(srule.1.iter()) {
                    let s = u / (1.0 - u);
                    let jac = 1.0 / ((1.0 - u) * (1.0 - u));
                    for i in 0..n {
                        for j in 0..n {
                            let factor = lambda
                                * eigs[i].powf((1.0 - t) * lambda)
                                * eigs[j].powf(t * lambda)
                                * jac
                                / ((s + eigs[i]) * (s + eigs[j]));
                            out[(i, j)] += b[(i, j)] * (wt * ws * factor);
                        }
                    }
                }
            }
        }
        ScalarFunction::Custom { .. } => {
            return Err(Error::InvalidParameter(
                "quadrature form is available for exp, log, and power kinds only".into(),
            ));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Majorization
// ---------------------------------------------------------------------------

/// x ≻ y: after sorting both descending, every partial sum of x dominates the
/// corresponding partial sum of y (within `tol`) and the totals agree
/// (within `tol`).
pub fn majorizes(x: &[f64], y: &[f64], tol: f64) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    ys.sort_by(|a, b| b.total_cmp(a));
    let mut px = 0.0;
    let mut py = 0.0;
    for k in 0..xs.len() {
        px += xs[k];
        py += ys[k];
        if k + 1 < xs.len() && px < py - tol {
            return Ok(false);
        }
    }
    Ok((px - py).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian, rng_for};

    fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
        let g = complex_gaussian(&mut rng_for(seed, 100, 0), n, n);
        HermitianOperator::symmetrize(g)
    }

    /// Random strictly positive matrix with spectrum in a moderate band.
    fn random_positive(n: usize, seed: u64) -> HermitianOperator {
        let g = complex_gaussian(&mut rng_for(seed, 101, 0), n, n);
        let w = &g * g.adjoint();
        let scaled = w.map(|z| z / n as f64);
        HermitianOperator::symmetrize(scaled + CMatrix::identity(n, n).map(|z| z * 0.1))
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.5, 0.1),
                C64::new(0.5, 0.1),
                C64::new(2.0, 0.0),
            ],
        );
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn spectral_identity_and_diagonal() {
        let id = HermitianOperator::identity(2);
        let s = id.spectral().unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 1.0]);

        let d = HermitianOperator::from_real_diagonal(&[0.75, 0.25]);
        let s = d.spectral().unwrap();
        assert!((s.eigenvalues()[0] - 0.25).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn spectral_reconstruction() {
        for seed in 0..5 {
            let a = random_hermitian(4, seed);
            let s = a.spectral().unwrap();
            let err = (s.reconstruct().matrix() - a.matrix()).norm() / a.matrix().norm().max(1.0);
            assert!(err < 1e-10, "reconstruction error {err:.3e}");
            // columns orthonormal
            let gram = s.eigenvectors().adjoint() * s.eigenvectors();
            let dev = (&gram - CMatrix::identity(4, 4)).norm();
            assert!(dev < 1e-10, "orthonormality deviation {dev:.3e}");
        }
    }

    #[test]
    fn matrix_function_power_cases() {
        let a = random_positive(3, 3);
        let p1 = matrix_function(&a, &ScalarFunction::Power(1.0)).unwrap();
        assert!((p1.matrix() - a.matrix()).norm() < 1e-12);

        let d = HermitianOperator::from_real_diagonal(&[4.0, 9.0]);
        let half = matrix_function(&d, &ScalarFunction::Power(0.5)).unwrap();
        assert!((half.matrix()[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((half.matrix()[(1, 1)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exp_log_round_trip() {
        for seed in 0..4 {
            let a = random_positive(3, 40 + seed);
            let l = matrix_function(&a, &ScalarFunction::Log).unwrap();
            let back = matrix_function(&l, &ScalarFunction::Exp).unwrap();
            let err = (back.matrix() - a.matrix()).norm();
            assert!(err < 1e-10, "round trip error {err:.3e}");
        }
    }

    #[test]
    fn matrix_function_domain_error_names_eigenvalue() {
        let d = HermitianOperator::from_real_diagonal(&[1.0, -0.5]);
        let err = matrix_function(&d, &ScalarFunction::Log).unwrap_err();
        match err {
            Error::EigenvalueDomain { value, .. } => assert!((value + 0.5).abs() < 1e-12),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn frechet_power_one_is_identity_map() {
        let a = random_positive(3, 7);
        let b = random_hermitian(3, 8);
        let d = frechet_derivative(&a, &b, &ScalarFunction::Power(1.0)).unwrap();
        assert!((d.matrix() - b.matrix()).norm() < 1e-12);
    }

    #[test]
    fn frechet_commuting_diagonal_matches_power_rule() {
        let a = HermitianOperator::from_real_diagonal(&[0.5, 2.0, 3.0]);
        let b = HermitianOperator::from_real_diagonal(&[1.0, -1.0, 0.5]);
        let lam = 0.7;
        let d = frechet_derivative(&a, &b, &ScalarFunction::Power(lam)).unwrap();
        // λ·A^(λ−1)·B on commuting diagonals
        for i in 0..3 {
            let expect = lam * a.matrix()[(i, i)].re.powf(lam - 1.0) * b.matrix()[(i, i)].re;
            assert!((d.matrix()[(i, i)].re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn frechet_matches_central_finite_difference() {
        let a = random_positive(3, 11);
        let b = random_hermitian(3, 12);
        let f = ScalarFunction::Power(0.7);
        let d = frechet_derivative(&a, &b, &f).unwrap();
        let h = 1e-5;
        let plus = matrix_function(
            &HermitianOperator::symmetrize(a.matrix() + b.matrix().map(|z| z * h)),
            &f,
        )
        .unwrap();
        let minus = matrix_function(
            &HermitianOperator::symmetrize(a.matrix() - b.matrix().map(|z| z * h)),
            &f,
        )
        .unwrap();
        let fd = (plus.matrix() - minus.matrix()).map(|z| z / (2.0 * h));
        let err = (d.matrix() - fd).norm();
        assert!(err < 1e-6, "finite-difference mismatch {err:.3e}");
    }

    #[test]
    fn frechet_is_linear_in_direction() {
        let a = random_positive(3, 21);
        let b1 = random_hermitian(3, 22);
        let b2 = random_hermitian(3, 23);
        let f = ScalarFunction::Power(-0.4);
        let combo = HermitianOperator::symmetrize(
            b1.matrix().map(|z| z * 2.5) - b2.matrix().map(|z| z * 0.75),
        );
        let lhs = frechet_derivative(&a, &combo, &f).unwrap();
        let d1 = frechet_derivative(&a, &b1, &f).unwrap();
        let d2 = frechet_derivative(&a, &b2, &f).unwrap();
        let rhs = d1.matrix().map(|z| z * 2.5) - d2.matrix().map(|z| z * 0.75);
        assert!((lhs.matrix() - rhs).norm() < 1e-12);
    }

    #[test]
    fn second_frechet_trivial_cases() {
        let a = random_positive(2, 31);
        let b = random_hermitian(2, 32);
        let c = random_hermitian(2, 33);

        let zero = second_frechet_derivative(&a, &b, &c, &ScalarFunction::Power(1.0)).unwrap();
        assert!(zero.matrix().norm() < 1e-12);

        let sq = second_frechet_derivative(&a, &b, &c, &ScalarFunction::Power(2.0)).unwrap();
        let expect = b.matrix() * c.matrix() + c.matrix() * b.matrix();
        assert!((sq.matrix() - expect).norm() < 1e-10);
    }

    #[test]
    fn second_frechet_matches_nested_finite_difference() {
        let a = random_positive(2, 41);
        let b = random_hermitian(2, 42);
        let c = random_hermitian(2, 43);
        let f = ScalarFunction::Power(-0.5);
        let d2 = second_frechet_derivative(&a, &b, &c, &f).unwrap();

        let h = 1e-4;
        let ap = HermitianOperator::symmetrize(a.matrix() + c.matrix().map(|z| z * h));
        let am = HermitianOperator::symmetrize(a.matrix() - c.matrix().map(|z| z * h));
        let dp = frechet_derivative(&ap, &b, &f).unwrap();
        let dm = frechet_derivative(&am, &b, &f).unwrap();
        let fd = (dp.matrix() - dm.matrix()).map(|z| z / (2.0 * h));
        let err = (d2.matrix() - fd).norm();
        assert!(err < 1e-5, "nested finite-difference mismatch {err:.3e}");

        // symmetric in (B, C)
        let swapped = second_frechet_derivative(&a, &c, &b, &f).unwrap();
        assert!((d2.matrix() - swapped.matrix()).norm() < 1e-12);
    }

    #[test]
    fn trace_power_derivative_examples() {
        let a = random_positive(3, 51);
        let b = random_hermitian(3, 52);
        // λ = 1 reduces to the trace of the direction
        let t = trace_power_derivative(&a, &b, 1.0).unwrap();
        assert!((t - b.trace()).abs() < 1e-12);

        let d = HermitianOperator::from_real_diagonal(&[1.0, 4.0]);
        let id = HermitianOperator::identity(2);
        let v = trace_power_derivative(&d, &id, 0.5).unwrap();
        assert!((v - 0.75).abs() < 1e-12);
    }

    #[test]
    fn trace_power_derivative_requires_positive_base() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, -0.25]);
        let b = HermitianOperator::identity(2);
        assert!(matches!(
            trace_power_derivative(&a, &b, 0.5),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn trace_power_derivative_matches_finite_difference_and_frechet_trace() {
        let a = random_positive(3, 61);
        let b = random_hermitian(3, 62);
        let lam = 1.7;
        let v = trace_power_derivative(&a, &b, lam).unwrap();

        let h = 1e-6;
        let tp = |m: &HermitianOperator| -> f64 {
            m.spectral()
                .unwrap()
                .eigenvalues()
                .iter()
                .map(|x| x.powf(lam))
                .sum()
        };
        let plus = HermitianOperator::symmetrize(a.matrix() + b.matrix().map(|z| z * h));
        let minus = HermitianOperator::symmetrize(a.matrix() - b.matrix().map(|z| z * h));
        let fd = (tp(&plus) - tp(&minus)) / (2.0 * h);
        assert!((v - fd).abs() < 1e-6, "fd mismatch {:.3e}", (v - fd).abs());

        // cyclicity: must equal Tr Df(A)[B] for f = t^λ
        let df = frechet_derivative(&a, &b, &ScalarFunction::Power(lam)).unwrap();
        assert!((v - df.trace()).abs() < 1e-10);
    }

    #[test]
    fn quadrature_exp_at_zero_base_returns_direction() {
        let a = HermitianOperator::zeros(3);
        let b = random_hermitian(3, 71);
        let q =
            frechet_quadrature(&a, &b, &ScalarFunction::Exp, &QuadratureConfig::default()).unwrap();
        assert!((q.matrix() - b.matrix()).norm() < 1e-12);
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let cfg = QuadratureConfig::default();
        for (seed, f) in [
            (81u64, ScalarFunction::Log),
            (82, ScalarFunction::Exp),
            (83, ScalarFunction::Power(0.3)),
            (84, ScalarFunction::Power(-0.6)),
        ] {
            let a = random_positive(2, seed);
            let b = random_hermitian(2, seed + 1000);
            let q = frechet_quadrature(&a, &b, &f, &cfg).unwrap();
            let d = frechet_derivative(&a, &b, &f).unwrap();
            let err = (q.matrix() - d.matrix()).norm();
            assert!(err < 1e-6, "{f:?}: quadrature vs closed form {err:.3e}");
        }
    }

    #[test]
    fn quadrature_power_fixed_pair() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, 2.0]);
        let b = HermitianOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        ))
        .unwrap();
        let f = ScalarFunction::Power(0.3);
        let q = frechet_quadrature(&a, &b, &f, &QuadratureConfig::default()).unwrap();
        let d = frechet_derivative(&a, &b, &f).unwrap();
        assert!((q.matrix() - d.matrix()).norm() < 1e-6);
    }

    #[test]
    fn majorization_basic_cases() {
        assert!(majorizes(&[1.0, 0.0], &[0.5, 0.5], 1e-10).unwrap());
        assert!(majorizes(&[0.3, 0.7], &[0.3, 0.7], 1e-10).unwrap());
        assert!(!majorizes(&[0.5, 0.5], &[1.0, 0.0], 1e-10).unwrap());
        assert!(!majorizes(&[0.6, 0.5], &[0.6, 0.4], 1e-10).unwrap());
        assert!(matches!(
            majorizes(&[1.0], &[0.5, 0.5], 1e-10),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
