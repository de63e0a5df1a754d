//! The information-geometric structure induced by the rescaled sandwiched
//! Rényi divergence: Riemannian metric, dual affine connections, duality
//! residuals, and curvature diagnostics.
//!
//! Two independent routes are provided for both the metric and the
//! connections:
//!
//! - a closed spectral form built from the operator kernel family
//!   f_β(t) = ((β−1)/β)·(t^β−1)/(t^(β−1)−1), β = 1/α, and from first- and
//!   second-order Fréchet derivatives of matrix powers;
//! - finite differences of the scalar divergence in an affine chart
//!   (second mixed derivatives for the metric, third mixed derivatives for
//!   the connections), with one Richardson halving per derivative layer.
//!
//! The two routes cross-validate each other; the duality identity
//! ∂_i g_jk = Γ_{ij,k} + Γ*_{ik,j} ties them together. Curvature is
//! assembled from closed-form Christoffel symbols differentiated once, so
//! only a single finite-difference layer touches the third-derivative data.

use crate::divergence::{alpha_divergence, AlphaParameter};
use crate::error::{Error, Result};
use crate::matrix::{
    frechet_in_eigenbasis, second_frechet_in_eigenbasis, HermitianOperator, ScalarFunction,
};
use crate::states::{DensityState, StateChart, TangentVector};
use crate::{CMatrix, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Kernel family
// ---------------------------------------------------------------------------

/// The operator kernel family behind the induced metric, parameterized by
/// β = 1/α:
///
///   f_β(t) = ((β−1)/β) · (t^β − 1)/(t^(β−1) − 1),
///
/// continuously extended to β ∈ {0, 1} and t = 1. Everything is evaluated
/// through the single representation f_β(t) = E(βu)/E((β−1)u) with
/// u = log t and E(x) = (e^x − 1)/x, which removes every seam at once.
///
/// Notable members: β = 2 (α = ½) gives (1+t)/2, the SLD kernel; β = −1
/// (α = −1) gives 2t/(1+t), the real RLD kernel; β = 1 (α = 1) gives
/// (t−1)/log t, the Bogoliubov kernel; β = 0 (α → ±∞) gives t·log t/(t−1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelFamily {
    beta: f64,
}

impl KernelFamily {
    pub fn from_beta(beta: f64) -> Self {
        Self { beta }
    }

    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if alpha == 0.0 {
            return Err(Error::AlphaDomain {
                alpha,
                reason: "the kernel family is indexed by beta = 1/alpha".into(),
            });
        }
        Ok(Self { beta: 1.0 / alpha })
    }

    /// The α → ±∞ limit member, t·log t/(t−1).
    pub fn infinite_alpha() -> Self {
        Self { beta: 0.0 }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Evaluate f_β(t) for t > 0.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::EigenvalueDomain {
                value: t,
                func: format!("kernel f_beta with beta = {}", self.beta),
            });
        }
        let u = t.ln();
        let a = self.beta * u;
        let b = (self.beta - 1.0) * u;
        let value = if a.abs() > 700.0 || b.abs() > 700.0 {
            (log_e_ratio(a) - log_e_ratio(b)).exp()
        } else {
            e_ratio(a) / e_ratio(b)
        };
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::KernelNonFinite { t });
        }
        Ok(value)
    }

    /// The kernel as a scalar function usable by the matrix calculus.
    pub fn as_scalar_function(&self) -> ScalarFunction {
        let k = *self;
        ScalarFunction::Custom {
            name: format!("f_beta({})", self.beta),
            f: std::sync::Arc::new(move |t| k.eval(t).unwrap_or(f64::NAN)),
            df: None,
            d2f: None,
            positive_domain: true,
        }
    }
}

/// E(x) = (e^x − 1)/x with the removable singularity at 0 filled in.
fn e_ratio(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
    } else {
        x.exp_m1() / x
    }
}

/// log E(x) for |x| too large to exponentiate.
fn log_e_ratio(x: f64) -> f64 {
    if x > 700.0 {
        x - x.ln()
    } else if x < -700.0 {
        -(-x).ln()
    } else {
        e_ratio(x).ln()
    }
}

// ---------------------------------------------------------------------------
// e-representation and metric (closed spectral form)
// ---------------------------------------------------------------------------

/// The e-representation of a tangent vector at ρ: in ρ's eigenbasis,
/// entrywise division of X^(m) by p_j·f(p_i/p_j). The kernel symmetry
/// f(t) = t·f(1/t) makes the denominator symmetric and the result Hermitian.
pub fn e_representation(
    rho: &DensityState,
    x: &TangentVector,
    kernel: &KernelFamily,
) -> Result<HermitianOperator> {
    if rho.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: x.dim(),
        });
    }
    let spec = rho.spectral();
    let p = spec.eigenvalues();
    let xt = spec.to_eigenbasis(x.mrep().matrix());
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = p[j] * kernel.eval(p[i] / p[j])?;
            if !denom.is_finite() || denom <= 0.0 {
                return Err(Error::KernelNonFinite { t: p[i] / p[j] });
            }
            out[(i, j)] = xt[(i, j)] / denom;
        }
    }
    Ok(HermitianOperator::symmetrize(spec.from_eigenbasis(&out)))
}

/// g_ρ(X, Y) = Tr{X^(e) Y^(m)} for the kernel attached to α.
pub fn metric(rho: &DensityState, x: &TangentVector, y: &TangentVector, alpha: f64) -> Result<f64> {
    metric_with_kernel(rho, x, y, &KernelFamily::from_alpha(alpha)?)
}

/// Same bilinear form with an explicit kernel member.
pub fn metric_with_kernel(
    rho: &DensityState,
    x: &TangentVector,
    y: &TangentVector,
    kernel: &KernelFamily,
) -> Result<f64> {
    let xe = e_representation(rho, x, kernel)?;
    Ok(xe.hs_inner(y.mrep()))
}

/// Gram matrix of the chart basis under the closed-form metric.
pub fn metric_matrix(rho: &DensityState, chart: &StateChart, alpha: f64) -> Result<DMatrix<f64>> {
    let kernel = KernelFamily::from_alpha(alpha)?;
    let spec = rho.spectral();
    let p = spec.eigenvalues();
    let n = rho.dim();
    let m = chart.len();
    // precompute both representations of every basis element in the eigenbasis
    let mut ereps = Vec::with_capacity(m);
    let mut mreps = Vec::with_capacity(m);
    for f in chart.basis() {
        let ft = spec.to_eigenbasis(f.matrix());
        let mut e = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                e[(i, j)] = ft[(i, j)] / (p[j] * kernel.eval(p[i] / p[j])?);
            }
        }
        ereps.push(e);
        mreps.push(ft);
    }
    let mut g = DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    acc += ereps[a][(i, j)] * mreps[b][(j, i)];
                }
            }
            g[(a, b)] = acc.re;
            g[(b, a)] = acc.re;
        }
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Finite-difference (Eguchi) route
// ---------------------------------------------------------------------------

/// Step sizes for the divergence-differencing route: `second` for second
/// derivatives (metric), `third` for third derivatives and the curvature
/// layer. One Richardson halving is applied at each layer.
#[derive(Clone, Copy, Debug)]
pub struct FdSteps {
    pub second: f64,
    pub third: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            second: 1e-3,
            third: 5e-3,
        }
    }
}

/// D_α(ρ_θ ‖ ρ_η) for chart offsets around a common center; `swap`
/// exchanges which slot the two offset vectors feed.
struct DivergenceOnChart<'a> {
    chart: &'a StateChart,
    center: &'a DensityState,
    alpha: AlphaParameter,
    swap: bool,
}

impl DivergenceOnChart<'_> {
    fn eval(&self, theta: &[f64], eta: &[f64]) -> Result<f64> {
        let (first, second) = if self.swap {
            (eta, theta)
        } else {
            (theta, eta)
        };
        let rho = self.chart.state(self.center, first)?;
        let sigma = self.chart.state(self.center, second)?;
        alpha_divergence(&rho, &sigma, &self.alpha)
    }

    /// Second mixed θ-derivative ∂θ_i ∂θ_j at θ = 0 for fixed η, central
    /// differences at step h (no Richardson at this layer).
    fn theta_hessian(&self, i: usize, j: usize, h: f64, eta: &[f64]) -> Result<f64> {
        let m = self.chart.len();
        let mut theta = vec![0.0; m];
        if i == j {
            theta[i] = h;
            let plus = self.eval(&theta, eta)?;
            theta[i] = -h;
            let minus = self.eval(&theta, eta)?;
            theta[i] = 0.0;
            let mid = self.eval(&theta, eta)?;
            Ok((plus - 2.0 * mid + minus) / (h * h))
        } else {
            let mut value = 0.0;
            for (si, sj, w) in [
                (1.0, 1.0, 1.0),
                (1.0, -1.0, -1.0),
                (-1.0, 1.0, -1.0),
                (-1.0, -1.0, 1.0),
            ] {
                theta[i] = si * h;
                theta[j] = sj * h;
                value += w * self.eval(&theta, eta)?;
            }
            Ok(value / (4.0 * h * h))
        }
    }

    /// θ-Hessian entry with one Richardson halving.
    fn theta_hessian_refined(&self, i: usize, j: usize, h: f64, eta: &[f64]) -> Result<f64> {
        let coarse = self.theta_hessian(i, j, h, eta)?;
        let fine = self.theta_hessian(i, j, h / 2.0, eta)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }
}

/// Metric entry by second finite differences of θ ↦ D_α(ρ_θ ‖ ρ) with one
/// Richardson halving. If the stencil leaves the faithful cone the step is
/// halved once before the range error is propagated.
pub fn metric_eguchi(
    rho: &DensityState,
    chart: &StateChart,
    i: usize,
    j: usize,
    alpha: f64,
    steps: &FdSteps,
) -> Result<f64> {
    let d = DivergenceOnChart {
        chart,
        center: rho,
        alpha: AlphaParameter::new(alpha)?,
        swap: false,
    };
    let eta = vec![0.0; chart.len()];
    match d.theta_hessian_refined(i, j, steps.second, &eta) {
        Err(Error::StateRange { .. }) => d.theta_hessian_refined(i, j, steps.second / 2.0, &eta),
        other => other,
    }
}

/// Which of the dual pair of connections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConnectionKind {
    Primal,
    Dual,
}

/// Coordinate array Γ_{ij,k} = g(∇_{∂i} ∂j, ∂k) at a state, together with
/// the chart Gram matrix in the same coordinates.
///
/// Serializes to JSON as flat row-major arrays plus the coordinate count.
#[derive(Clone, Debug)]
pub struct ConnectionCoefficients {
    pub kind: ConnectionKind,
    /// Number of chart coordinates.
    pub coords: usize,
    gamma: Vec<f64>,
    pub metric_matrix: DMatrix<f64>,
}

impl Serialize for ConnectionCoefficients {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("ConnectionCoefficients", 4)?;
        s.serialize_field("kind", &self.kind)?;
        s.serialize_field("coords", &self.coords)?;
        s.serialize_field("gamma", &self.gamma)?;
        let flat: Vec<f64> = (0..self.coords)
            .flat_map(|i| (0..self.coords).map(move |j| (i, j)))
            .map(|(i, j)| self.metric_matrix[(i, j)])
            .collect();
        s.serialize_field("metric_matrix", &flat)?;
        s.end()
    }
}

impl ConnectionCoefficients {
    fn new(kind: ConnectionKind, coords: usize, metric_matrix: DMatrix<f64>) -> Self {
        Self {
            kind,
            coords,
            gamma: vec![0.0; coords * coords * coords],
            metric_matrix,
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.coords + j) * self.coords + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[self.idx(i, j, k)]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let at = self.idx(i, j, k);
        self.gamma[at] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.gamma
    }

    /// Largest |Γ_{ij,k} − Γ_{ji,k}|; both connections are torsion-free, so
    /// this measures numerical noise only.
    pub fn max_torsion(&self) -> f64 {
        let m = self.coords;
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    worst = worst.max((self.get(i, j, k) - self.get(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// Largest absolute entry difference against another coefficient array.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.gamma
            .iter()
            .zip(&other.gamma)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Both connections by mixed finite differences of the scalar divergence:
/// Γ_{ij,k} = −\[∂²θ_iθ_j\]\[∂η_k\] D_α(ρ_θ‖ρ_η) at coincidence, and the dual
/// with the slot roles exchanged. One Richardson halving on each layer.
pub fn connections_eguchi(
    rho: &DensityState,
    chart: &StateChart,
    alpha: f64,
    steps: &FdSteps,
) -> Result<(ConnectionCoefficients, ConnectionCoefficients)> {
    let g = metric_matrix(rho, chart, alpha)?;
    let primal = eguchi_gamma(rho, chart, alpha, steps, false, &g)?;
    let dual = eguchi_gamma(rho, chart, alpha, steps, true, &g)?;
    Ok((primal, dual))
}

fn eguchi_gamma(
    rho: &DensityState,
    chart: &StateChart,
    alpha: f64,
    steps: &FdSteps,
    swap: bool,
    g: &DMatrix<f64>,
) -> Result<ConnectionCoefficients> {
    let d = DivergenceOnChart {
        chart,
        center: rho,
        alpha: AlphaParameter::new(alpha)?,
        swap,
    };
    let m = chart.len();
    let kind = if swap {
        ConnectionKind::Dual
    } else {
        ConnectionKind::Primal
    };
    let mut out = ConnectionCoefficients::new(kind, m, g.clone());
    match fill_eguchi_gamma(&d, m, steps.third, &mut out) {
        Err(Error::StateRange { .. }) => {
            out = ConnectionCoefficients::new(kind, m, g.clone());
            fill_eguchi_gamma(&d, m, steps.third / 2.0, &mut out)?;
            Ok(out)
        }
        Err(e) => Err(e),
        Ok(()) => Ok(out),
    }
}

fn fill_eguchi_gamma(
    d: &DivergenceOnChart<'_>,
    m: usize,
    h: f64,
    out: &mut ConnectionCoefficients,
) -> Result<()> {
    // For each η-direction k the full θ-Hessian is evaluated at the four
    // stencil offsets ±h, ±h/2 and combined into a Richardson-refined first
    // derivative along η_k.
    for k in 0..m {
        let hess_at = |offset: f64| -> Result<Vec<f64>> {
            let mut eta = vec![0.0; m];
            eta[k] = offset;
            let mut hs = vec![0.0; m * m];
            for i in 0..m {
                for j in i..m {
                    let v = d.theta_hessian_refined(i, j, h, &eta)?;
                    hs[i * m + j] = v;
                    hs[j * m + i] = v;
                }
            }
            Ok(hs)
        };
        let hp = hess_at(h)?;
        let hm = hess_at(-h)?;
        let hp2 = hess_at(h / 2.0)?;
        let hm2 = hess_at(-h / 2.0)?;
        for i in 0..m {
            for j in 0..m {
                let coarse = (hp[i * m + j] - hm[i * m + j]) / (2.0 * h);
                let fine = (hp2[i * m + j] - hm2[i * m + j]) / h;
                out.set(i, j, k, -(4.0 * fine - coarse) / 3.0);
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Closed-form connections
// ---------------------------------------------------------------------------

/// Shared spectral data for the closed-form expressions at one state, all in
/// ρ's eigenbasis.
struct ClosedFormContext {
    /// eigenvalues p of ρ
    p: Vec<f64>,
    /// q = p^(1/α), the spectrum of the coincidence operator ρ^(1/α)
    q: Vec<f64>,
    /// diagonal of ρ^c with c = (1−α)/2α
    dc: Vec<f64>,
    /// chart basis in the eigenbasis
    f: Vec<CMatrix>,
    /// B_a = ρ^c F_a ρ^c
    b: Vec<CMatrix>,
    /// M_a = D(t^(α−1))(ρ^(1/α))\[B_a\]
    m_op: Vec<CMatrix>,
    alpha: f64,
    c: f64,
}

impl ClosedFormContext {
    fn build(rho: &DensityState, chart: &StateChart, alpha: f64) -> Result<Self> {
        let spec = rho.spectral();
        let p = spec.eigenvalues().to_vec();
        let c = (1.0 - alpha) / (2.0 * alpha);
        let q: Vec<f64> = p.iter().map(|x| x.powf(1.0 / alpha)).collect();
        let dc: Vec<f64> = p.iter().map(|x| x.powf(c)).collect();
        let power = ScalarFunction::Power(alpha - 1.0);
        let mut f = Vec::with_capacity(chart.len());
        let mut b = Vec::with_capacity(chart.len());
        let mut m_op = Vec::with_capacity(chart.len());
        for fa in chart.basis() {
            let ft = spec.to_eigenbasis(fa.matrix());
            let ba = scale_both(&ft, &dc);
            let ma = frechet_in_eigenbasis(&q, &ba, &power)?;
            f.push(ft);
            b.push(ba);
            m_op.push(ma);
        }
        Ok(Self {
            p,
            q,
            dc,
            f,
            b,
            m_op,
            alpha,
            c,
        })
    }

    /// D W_a (ρ)\[F_b\]: derivative of W_a = ρ^c M_a(ρ) ρ^c along F_b, by the
    /// product rule over the three ρ-dependent factors.
    fn w_derivative(&self, a: usize, bdir: usize) -> Result<CMatrix> {
        let power = ScalarFunction::Power(self.alpha - 1.0);
        // derivative of ρ^c along F_b
        let qc = frechet_in_eigenbasis(&self.p, &self.f[bdir], &ScalarFunction::Power(self.c))?;
        // derivative of ρ^(1/α) along F_b
        let q_inner = frechet_in_eigenbasis(
            &self.p,
            &self.f[bdir],
            &ScalarFunction::Power(1.0 / self.alpha),
        )?;
        // derivative of B_a = ρ^c F_a ρ^c along F_b
        let db = &qc * &self.f[a] * diag(&self.dc) + diag(&self.dc) * &self.f[a] * &qc;
        // derivative of M_a: base moves inside the matrix power, and the
        // direction argument moves too
        let dm = second_frechet_in_eigenbasis(&self.q, &self.b[a], &q_inner, &power)?
            + frechet_in_eigenbasis(&self.q, &db, &power)?;
        // product rule on ρ^c M_a ρ^c
        let out = &qc * &self.m_op[a] * diag(&self.dc)
            + diag(&self.dc) * &self.m_op[a] * &qc
            + scale_both(&dm, &self.dc);
        Ok(out)
    }
}

fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(values[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// diag(v) · M · diag(v)
fn scale_both(m: &CMatrix, v: &[f64]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (v[i] * v[j]))
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Both connections in closed form.
///
/// For α ≠ 1, with A₀ = ρ^(1/α), B_a = ρ^c F_a ρ^c, P = D(t^(α−1))(A₀) and
/// P² its second derivative, and T_{a,b} the product-rule derivative of
/// W_a = ρ^c P(B_a) ρ^c along F_b:
///
///   Γ_{ij,k}  = [ Tr{P²(B_i, B_k)·B_j} − Tr{F_j·T_{i,k}} ] / (α−1)
///   Γ*_{ij,k} = [ Tr{F_k·T_{i,j}} + Tr{F_k·T_{j,i}} − Tr{P²(B_i, B_j)·B_k} ] / (α−1)
///
/// At α = 1 the limit branch applies: the primal coefficients vanish in the
/// affine chart (the relative entropy is linear in its first slot there) and
/// Γ*_{ij,k} = Tr{D²log(ρ)\[F_i, F_j\]·F_k}.
pub fn connections_closed_form(
    rho: &DensityState,
    chart: &StateChart,
    alpha: f64,
) -> Result<(ConnectionCoefficients, ConnectionCoefficients)> {
    if alpha == 0.0 {
        return Err(Error::AlphaDomain {
            alpha,
            reason: "connections exist for alpha ≠ 0 only".into(),
        });
    }
    let g = metric_matrix(rho, chart, alpha)?;
    let m = chart.len();
    let mut primal = ConnectionCoefficients::new(ConnectionKind::Primal, m, g.clone());
    let mut dual = ConnectionCoefficients::new(ConnectionKind::Dual, m, g);

    if alpha == 1.0 {
        let spec = rho.spectral();
        let p = spec.eigenvalues().to_vec();
        let f: Vec<CMatrix> = chart
            .basis()
            .iter()
            .map(|fa| spec.to_eigenbasis(fa.matrix()))
            .collect();
        for i in 0..m {
            for j in i..m {
                let d2 = second_frechet_in_eigenbasis(&p, &f[i], &f[j], &ScalarFunction::Log)?;
                for (k, fk) in f.iter().enumerate() {
                    let v = trace_product(&d2, fk).re;
                    dual.set(i, j, k, v);
                    dual.set(j, i, k, v);
                }
            }
        }
        return Ok((primal, dual));
    }

    let ctx = ClosedFormContext::build(rho, chart, alpha)?;
    let power = ScalarFunction::Power(alpha - 1.0);
    let scale = 1.0 / (alpha - 1.0);

    // fully symmetric third-derivative traces Tr{P²(B_i, B_k)·B_j}
    let mut third = vec![0.0; m * m * m];
    for i in 0..m {
        for k in i..m {
            let p2 = second_frechet_in_eigenbasis(&ctx.q, &ctx.b[i], &ctx.b[k], &power)?;
            for j in 0..m {
                let v = trace_product(&p2, &ctx.b[j]).re;
                third[(i * m + k) * m + j] = v;
                third[(k * m + i) * m + j] = v;
            }
        }
    }
    // metric-derivative traces Tr{F_j · T_{i,k}}
    let mut tder = vec![0.0; m * m * m];
    for i in 0..m {
        for k in 0..m {
            let t_ik = ctx.w_derivative(i, k)?;
            for j in 0..m {
                tder[(i * m + k) * m + j] = trace_product(&ctx.f[j], &t_ik).re;
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let gamma = scale * (third[(i * m + k) * m + j] - tder[(i * m + k) * m + j]);
                primal.set(i, j, k, gamma);
                let gamma_star = scale
                    * (tder[(i * m + j) * m + k] + tder[(j * m + i) * m + k]
                        - third[(i * m + j) * m + k]);
                dual.set(i, j, k, gamma_star);
            }
        }
    }
    Ok((primal, dual))
}

// ---------------------------------------------------------------------------
// Duality residual
// ---------------------------------------------------------------------------

/// |∂_i g_jk − Γ_{ij,k} − Γ*_{ik,j}| with ∂_i g_jk by a Richardson-refined
/// central difference of the closed-form metric along chart direction i, and
/// the closed-form connections at the base state.
pub fn duality_residual(
    rho: &DensityState,
    chart: &StateChart,
    alpha: f64,
    i: usize,
    j: usize,
    k: usize,
    steps: &FdSteps,
) -> Result<f64> {
    let (primal, dual) = connections_closed_form(rho, chart, alpha)?;
    let dg = metric_matrix_derivative(rho, chart, alpha, i, steps)?;
    Ok((dg[(j, k)] - primal.get(i, j, k) - dual.get(i, k, j)).abs())
}

/// Largest duality residual over the full index sweep, sharing one
/// closed-form connection evaluation and one metric stencil per direction.
pub fn duality_residual_max(
    rho: &DensityState,
    chart: &StateChart,
    alpha: f64,
    steps: &FdSteps,
) -> Result<f64> {
    let (primal, dual) = connections_closed_form(rho, chart, alpha)?;
    let m = chart.len();
    let mut worst = 0.0f64;
    for i in 0..m {
        let dg = metric_matrix_derivative(rho, chart, alpha, i, steps)?;
        for j in 0..m {
            for k in 0..m {
                let res = (dg[(j, k)] - primal.get(i, j, k) - dual.get(i, k, j)).abs();
                worst = worst.max(res);
            }
        }
    }
    Ok(worst)
}

/// Duality defect of the mismatched structure (g^(α), ∇^(β), ∇^(γ)): the
/// largest |∂_i g^α_jk − g^α(∇^β_{∂i} ∂j, ∂k) − g^α(∂j, ∇^γ_{∂i} ∂k)| over
/// all index triples, with each borrowed connection's second-kind symbols
/// (raised by its own Gram matrix) lowered back through g^α. Reduces to
/// [`duality_residual_max`] at α = β = γ; a visibly nonzero defect means the
/// borrowed pair is not metric-dual under g^α.
pub fn triad_duality_residual_max(
    rho: &DensityState,
    chart: &StateChart,
    metric_alpha: f64,
    beta: f64,
    gamma: f64,
    steps: &FdSteps,
) -> Result<f64> {
    let m = chart.len();
    let ga = metric_matrix(rho, chart, metric_alpha)?;
    let second_kind = |c: f64, dual: bool| -> Result<Vec<f64>> {
        let (primal, dual_conn) = connections_closed_form(rho, chart, c)?;
        let conn = if dual { dual_conn } else { primal };
        let gc = metric_matrix(rho, chart, c)?;
        let ginv = gc
            .try_inverse()
            .ok_or(Error::IllConditioned { cond: f64::MAX })?;
        let mut out = vec![0.0; m * m * m];
        for l in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let mut acc = 0.0;
                    for w in 0..m {
                        acc += ginv[(l, w)] * conn.get(j, k, w);
                    }
                    out[(l * m + j) * m + k] = acc;
                }
            }
        }
        Ok(out)
    };
    let gb = second_kind(beta, false)?;
    let gg = second_kind(gamma, true)?;
    let mut worst = 0.0f64;
    for i in 0..m {
        let dg = metric_matrix_derivative(rho, chart, metric_alpha, i, steps)?;
        for j in 0..m {
            for k in 0..m {
                let mut lowered_b = 0.0;
                let mut lowered_g = 0.0;
                for l in 0..m {
                    lowered_b += ga[(k, l)] * gb[(l * m + i) * m + j];
                    lowered_g += ga[(j, l)] * gg[(l * m + i) * m + k];
                }
                worst = worst.max((dg[(j, k)] - lowered_b - lowered_g).abs());
            }
        }
    }
    Ok(worst)
}

/// ∂_i G(θ)|₀ of the full chart Gram matrix, Richardson-refined central
/// differences at step `steps.second`.
fn metric_matrix_derivative(
    rho: &DensityState,
    chart: &StateChart,
    alpha: f64,
    i: usize,
    steps: &FdSteps,
) -> Result<DMatrix<f64>> {
    let m = chart.len();
    let h = steps.second;
    let at = |offset: f64| -> Result<DMatrix<f64>> {
        let mut theta = vec![0.0; m];
        theta[i] = offset;
        metric_matrix(&chart.state(rho, &theta)?, chart, alpha)
    };
    let coarse = (at(h)? - at(-h)?) / (2.0 * h);
    let fine = (at(h / 2.0)? - at(-h / 2.0)?) / h;
    Ok((fine * 4.0 - coarse) / 3.0)
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

/// Curvature magnitudes of the dual pair at one state: the largest absolute
/// Riemann component for each connection, assembled from closed-form
/// Christoffel symbols of the second kind differentiated once by
/// Richardson-refined central differences at step `step`.
///
/// The verdict stays numeric by construction: the report carries magnitudes
/// and the step used, never a flatness boolean.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub alpha: f64,
    pub connection_alpha: f64,
    pub dim: usize,
    pub step: f64,
    pub max_abs_riemann_primal: f64,
    pub max_abs_riemann_dual: f64,
}

/// Curvature of the structure (g^(α), ∇^(α), ∇^(α)*).
pub fn curvature(
    rho: &DensityState,
    chart: &StateChart,
    alpha: f64,
    steps: &FdSteps,
) -> Result<CurvatureReport> {
    curvature_mixed(rho, chart, alpha, alpha, steps)
}

/// Curvature of the connection pair attached to `connection_alpha`, reported
/// under the structure label `metric_alpha`. The mixed form backs the
/// report-only scan over mismatched structures (a metric from one member of
/// the family against connections from another); the standard report has
/// both parameters equal.
///
/// The index raising always uses the connection's own Gram matrix: the
/// Riemann tensor of ∇^(D_c) is intrinsic to the connection, so the mixed
/// scan reports genuine curvatures of the borrowed pair rather than a hybrid
/// object. Flatness of the borrowed pair is what the mismatched-structure
/// question turns on.
pub fn curvature_mixed(
    rho: &DensityState,
    chart: &StateChart,
    metric_alpha: f64,
    connection_alpha: f64,
    steps: &FdSteps,
) -> Result<CurvatureReport> {
    let m = chart.len();
    let h = steps.third;

    // Christoffel symbols of the second kind for both connections at a chart
    // offset, flattened as [l][j][k].
    let christoffels = |theta: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let state = if theta.iter().all(|&t| t == 0.0) {
            rho.clone()
        } else {
            chart.state(rho, theta)?
        };
        let (primal, dual) = connections_closed_form(&state, chart, connection_alpha)?;
        let g = metric_matrix(&state, chart, connection_alpha)?;
        let spec_g = g.clone().symmetric_eigen();
        let max_eig = spec_g.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        let min_eig = spec_g.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        if min_eig <= 0.0 || max_eig / min_eig > 1e8 {
            return Err(Error::IllConditioned {
                cond: max_eig / min_eig.max(f64::MIN_POSITIVE),
            });
        }
        let ginv = g
            .try_inverse()
            .ok_or(Error::IllConditioned { cond: f64::MAX })?;
        let raise = |c: &ConnectionCoefficients| -> Vec<f64> {
            let mut out = vec![0.0; m * m * m];
            for l in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let mut acc = 0.0;
                        for w in 0..m {
                            acc += ginv[(l, w)] * c.get(j, k, w);
                        }
                        out[(l * m + j) * m + k] = acc;
                    }
                }
            }
            out
        };
        Ok((raise(&primal), raise(&dual)))
    };

    let base = christoffels(&vec![0.0; m])?;
    // Richardson-refined ∂_i of both Christoffel arrays
    let mut d_primal = vec![vec![0.0; m * m * m]; m];
    let mut d_dual = vec![vec![0.0; m * m * m]; m];
    for i in 0..m {
        let at = |offset: f64| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut theta = vec![0.0; m];
            theta[i] = offset;
            christoffels(&theta)
        };
        let (pp, dp) = at(h)?;
        let (pm, dm) = at(-h)?;
        let (pp2, dp2) = at(h / 2.0)?;
        let (pm2, dm2) = at(-h / 2.0)?;
        for idx in 0..m * m * m {
            let coarse = (pp[idx] - pm[idx]) / (2.0 * h);
            let fine = (pp2[idx] - pm2[idx]) / h;
            d_primal[i][idx] = (4.0 * fine - coarse) / 3.0;
            let coarse = (dp[idx] - dm[idx]) / (2.0 * h);
            let fine = (dp2[idx] - dm2[idx]) / h;
            d_dual[i][idx] = (4.0 * fine - coarse) / 3.0;
        }
    }

    let riemann_max = |gamma: &[f64], dgamma: &[Vec<f64>]| -> f64 {
        let at = |l: usize, j: usize, k: usize| gamma[(l * m + j) * m + k];
        let mut worst = 0.0f64;
        for l in 0..m {
            for k in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        let mut r = dgamma[i][(l * m + j) * m + k] - dgamma[j][(l * m + i) * m + k];
                        for mu in 0..m {
                            r += at(l, i, mu) * at(mu, j, k) - at(l, j, mu) * at(mu, i, k);
                        }
                        worst = worst.max(r.abs());
                    }
                }
            }
        }
        worst
    };

    Ok(CurvatureReport {
        alpha: metric_alpha,
        connection_alpha,
        dim: rho.dim(),
        step: h,
        max_abs_riemann_primal: riemann_max(&base.0, &d_primal),
        max_abs_riemann_dual: riemann_max(&base.1, &d_dual),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_state, random_tangent};

    const E: f64 = std::f64::consts::E;

    #[test]
    fn kernel_fixture_members() {
        let sld = KernelFamily::from_beta(2.0);
        let rld = KernelFamily::from_beta(-1.0);
        let bogoliubov = KernelFamily::from_beta(1.0);
        for t in [0.01, 0.3, 1.0, 2.5, 40.0] {
            assert!((sld.eval(t).unwrap() - (1.0 + t) / 2.0).abs() < 1e-12);
            assert!((rld.eval(t).unwrap() - 2.0 * t / (1.0 + t)).abs() < 1e-12);
            let expect = if t == 1.0 { 1.0 } else { (t - 1.0) / t.ln() };
            assert!((bogoliubov.eval(t).unwrap() - expect).abs() < 1e-12);
        }
        // endpoint values at t = e
        assert!((sld.eval(E).unwrap() - (1.0 + E) / 2.0).abs() < 1e-12);
        assert!((rld.eval(E).unwrap() - 2.0 * E / (1.0 + E)).abs() < 1e-12);
        // α = ½ and α = −1 reach the same members through 1/α
        assert_eq!(KernelFamily::from_alpha(0.5).unwrap().beta(), 2.0);
        assert_eq!(KernelFamily::from_alpha(-1.0).unwrap().beta(), -1.0);
    }

    #[test]
    fn kernel_normalization_symmetry_and_product_identity() {
        let t_grid: Vec<f64> = (0..50)
            .map(|k| 0.01 * (100.0f64 / 0.01).powf(k as f64 / 49.0))
            .collect();
        for beta in [-1.5, -1.0, -0.3, 0.0, 0.4, 1.0, 1.7, 2.0, 2.6] {
            let k = KernelFamily::from_beta(beta);
            assert!((k.eval(1.0).unwrap() - 1.0).abs() < 1e-12);
            for &t in &t_grid {
                let f = k.eval(t).unwrap();
                assert!(f > 0.0);
                // f(t) = t f(1/t)
                let sym = t * k.eval(1.0 / t).unwrap();
                assert!((f - sym).abs() < 1e-12 * f.max(1.0), "beta {beta} t {t}");
            }
        }
        // f_{1/2−δ}(t)·f_{1/2+δ}(t) = t
        for delta in [0.1, 0.5, 1.0, 1.5] {
            let lo = KernelFamily::from_beta(0.5 - delta);
            let hi = KernelFamily::from_beta(0.5 + delta);
            for &t in &t_grid {
                let prod = lo.eval(t).unwrap() * hi.eval(t).unwrap();
                assert!(
                    (prod - t).abs() < 1e-10 * t.max(1.0),
                    "delta {delta} t {t}: {prod}"
                );
            }
        }
    }

    #[test]
    fn kernel_seams_are_smooth() {
        let f0 = KernelFamily::from_beta(0.0);
        let f1 = KernelFamily::from_beta(1.0);
        for t in [0.05, 0.7, 3.0, 60.0] {
            for eps in [1e-5, -1e-5] {
                // relative seam gap: the exact family itself moves by
                // ~|eps|·log(t)·f at large t, so an absolute bound cannot hold
                let near0 = KernelFamily::from_beta(eps).eval(t).unwrap();
                let base0 = f0.eval(t).unwrap();
                assert!((near0 - base0).abs() < 1e-4 * base0.max(1.0));
                let near1 = KernelFamily::from_beta(1.0 + eps).eval(t).unwrap();
                let base1 = f1.eval(t).unwrap();
                assert!((near1 - base1).abs() < 1e-4 * base1.max(1.0));
            }
        }
        // values at t near 1 stay finite and near 1
        let v = KernelFamily::from_beta(0.37).eval(1.0 + 1e-9).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
        // the α → ±∞ member coincides with the β = 0 extension
        let inf = KernelFamily::infinite_alpha();
        for t in [0.2, 5.0] {
            assert!((inf.eval(t).unwrap() - t * t.ln() / (t - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_bounds_inside_and_outside_the_monotone_range() {
        let t_grid: Vec<f64> = (0..60).map(|k| 0.02 * 1.2f64.powi(k)).collect();
        for beta in [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0] {
            let k = KernelFamily::from_beta(beta);
            for &t in &t_grid {
                let f = k.eval(t).unwrap();
                let low = 2.0 * t / (1.0 + t);
                let high = (1.0 + t) / 2.0;
                assert!(
                    f >= low - 1e-10 && f <= high + 1e-10,
                    "beta {beta} t {t}: {f} outside [{low}, {high}]"
                );
            }
        }
        for beta in [-1.2, 2.2] {
            let k = KernelFamily::from_beta(beta);
            let violated = t_grid.iter().any(|&t| {
                let f = k.eval(t).unwrap();
                f < 2.0 * t / (1.0 + t) - 1e-10 || f > (1.0 + t) / 2.0 + 1e-10
            });
            assert!(violated, "beta {beta} should break the kernel bounds");
        }
    }

    #[test]
    fn e_representation_special_cases() {
        let chart = StateChart::new(2).unwrap();
        let uniform = DensityState::maximally_mixed(2);
        let x = random_tangent(&chart, 3);
        for alpha in [0.5, -1.0, 2.0] {
            let kernel = KernelFamily::from_alpha(alpha).unwrap();
            let e = e_representation(&uniform, &x, &kernel).unwrap();
            // at the uniform state every ratio is 1: X^(e) = n·X^(m)
            let expect = x.mrep().scale(2.0);
            assert!((e.matrix() - expect.matrix()).norm() < 1e-12);
        }

        // diagonal state and direction: entries x_i/p_i, family independent
        let rho = DensityState::from_probabilities(&[0.7, 0.3]).unwrap();
        let xd = TangentVector::new(HermitianOperator::from_real_diagonal(&[0.2, -0.2])).unwrap();
        for alpha in [0.5, -1.0, 3.0] {
            let kernel = KernelFamily::from_alpha(alpha).unwrap();
            let e = e_representation(&rho, &xd, &kernel).unwrap();
            assert!((e.matrix()[(0, 0)].re - 0.2 / 0.7).abs() < 1e-12);
            assert!((e.matrix()[(1, 1)].re - (-0.2 / 0.3)).abs() < 1e-12);
        }

        // pairing positivity
        for seed in 0..10 {
            let rho = random_state(2, 900 + seed);
            let x = random_tangent(&chart, 800 + seed);
            let kernel = KernelFamily::from_alpha(0.7).unwrap();
            let e = e_representation(&rho, &x, &kernel).unwrap();
            assert!(e.hs_inner(x.mrep()) > 0.0);
        }
    }

    #[test]
    fn metric_at_uniform_state_is_alpha_independent() {
        let chart = StateChart::new(2).unwrap();
        let uniform = DensityState::maximally_mixed(2);
        let x = random_tangent(&chart, 17);
        let c2 = x.mrep().hs_inner(x.mrep());
        for alpha in [-2.0, -1.0, 0.5, 0.7, 1.0, 2.0] {
            let g = metric(&uniform, &x, &x, alpha).unwrap();
            assert!((g - 2.0 * c2).abs() < 1e-12, "alpha {alpha}: {g} vs {c2}");
        }
    }

    #[test]
    fn metric_diagonal_restriction_is_classical_fisher() {
        let rho = DensityState::from_probabilities(&[0.5, 0.3, 0.2]).unwrap();
        let x = TangentVector::new(HermitianOperator::from_real_diagonal(&[0.1, -0.04, -0.06]))
            .unwrap();
        let y = TangentVector::new(HermitianOperator::from_real_diagonal(&[-0.02, 0.05, -0.03]))
            .unwrap();
        let fisher: f64 = [0.1 * -0.02 / 0.5, -0.04 * 0.05 / 0.3, -0.06 * -0.03 / 0.2]
            .iter()
            .sum();
        for alpha in [-2.0, -1.0, 0.5, 0.7, 1.0, 2.0, 5.0] {
            let g = metric(&rho, &x, &y, alpha).unwrap();
            assert!((g - fisher).abs() < 1e-10, "alpha {alpha}: {g} vs {fisher}");
        }
    }

    fn well_conditioned_state(n: usize, seed: u64) -> DensityState {
        let raw = random_state(n, seed);
        let (state, _) = DensityState::faithful_from(
            raw.op()
                .scale(0.75)
                .add(&HermitianOperator::identity(n).scale(0.25 / n as f64)),
            1e-3,
        )
        .unwrap();
        state
    }

    /// The kernel form Tr{X^(e) Y^(m)} must coincide with the trace form
    /// (1/(α−1))·Tr{F_k · ρ^c P(B_j) ρ^c} that the connection machinery is
    /// built from — an algebraic identity tying the two derivations of the
    /// metric together.
    #[test]
    fn metric_kernel_form_equals_trace_form() {
        let chart = StateChart::new(3).unwrap();
        let rho = well_conditioned_state(3, 7200);
        let spec = rho.spectral();
        let p = spec.eigenvalues().to_vec();
        for alpha in [-1.0, -0.4, 0.5, 0.7, 2.0, 5.0] {
            let g = metric_matrix(&rho, &chart, alpha).unwrap();
            let c = (1.0 - alpha) / (2.0 * alpha);
            let q: Vec<f64> = p.iter().map(|x| x.powf(1.0 / alpha)).collect();
            let dc: Vec<f64> = p.iter().map(|x| x.powf(c)).collect();
            let power = ScalarFunction::Power(alpha - 1.0);
            let f: Vec<CMatrix> = chart
                .basis()
                .iter()
                .map(|fa| spec.to_eigenbasis(fa.matrix()))
                .collect();
            for j in 0..chart.len() {
                let bj = scale_both(&f[j], &dc);
                let w = scale_both(&frechet_in_eigenbasis(&q, &bj, &power).unwrap(), &dc);
                for k in 0..chart.len() {
                    let route2 = trace_product(&f[k], &w).re / (alpha - 1.0);
                    assert!(
                        (g[(j, k)] - route2).abs() < 1e-10 * (1.0 + g[(j, k)].abs()),
                        "alpha {alpha} ({j},{k}): kernel {} vs trace form {route2}",
                        g[(j, k)]
                    );
                }
            }
        }
    }

    #[test]
    fn metric_closed_form_matches_eguchi() {
        let chart = StateChart::new(2).unwrap();
        let steps = FdSteps::default();
        for seed in 0..3 {
            let rho = well_conditioned_state(2, 7100 + seed);
            for alpha in [-1.0, 0.5, 0.7, 1.0, 2.0] {
                let g = metric_matrix(&rho, &chart, alpha).unwrap();
                for i in 0..chart.len() {
                    for j in i..chart.len() {
                        let fd = metric_eguchi(&rho, &chart, i, j, alpha, &steps).unwrap();
                        let rel = (fd - g[(i, j)]).abs() / g[(i, j)].abs().max(1e-2);
                        assert!(
                            rel < 1e-5,
                            "alpha {alpha} ({i},{j}): closed {} vs fd {fd}, rel {rel:.2e}",
                            g[(i, j)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn eguchi_metric_on_uniform_qubit() {
        let chart = StateChart::new(2).unwrap();
        let uniform = DensityState::maximally_mixed(2);
        let steps = FdSteps::default();
        let g00 = metric_eguchi(&uniform, &chart, 0, 0, 0.7, &steps).unwrap();
        assert!((g00 - 2.0).abs() < 1e-6, "got {g00}");
        let g01 = metric_eguchi(&uniform, &chart, 0, 1, 0.7, &steps).unwrap();
        let g10 = metric_eguchi(&uniform, &chart, 1, 0, 0.7, &steps).unwrap();
        assert!((g01 - g10).abs() < 1e-8);
    }

    #[test]
    fn closed_form_connections_match_eguchi_on_qubit() {
        let chart = StateChart::new(2).unwrap();
        let steps = FdSteps::default();
        let rho = well_conditioned_state(2, 7300);
        for alpha in [0.5, 2.0, 1.0] {
            let (cf_p, cf_d) = connections_closed_form(&rho, &chart, alpha).unwrap();
            let (fd_p, fd_d) = connections_eguchi(&rho, &chart, alpha, &steps).unwrap();
            let dp = cf_p.max_abs_difference(&fd_p);
            let dd = cf_d.max_abs_difference(&fd_d);
            assert!(dp < 1e-3, "alpha {alpha}: primal mismatch {dp:.3e}");
            assert!(dd < 1e-3, "alpha {alpha}: dual mismatch {dd:.3e}");
            assert!(cf_p.max_torsion() < 1e-10);
            assert!(cf_d.max_torsion() < 1e-10);
        }
    }

    /// Connection coefficients of the classical alpha-family on the simplex
    /// in mixture-affine coordinates, as derived from the divergence itself:
    /// (α−1)·Σ F_iF_jF_k/p² for the primal and −α·Σ F_iF_jF_k/p² for the
    /// dual.
    fn classical_gamma(
        p: &[f64],
        basis: &[Vec<f64>],
        i: usize,
        j: usize,
        k: usize,
        alpha: f64,
        dual: bool,
    ) -> f64 {
        let factor = if dual { -alpha } else { alpha - 1.0 };
        let mut acc = 0.0;
        for (x, &px) in p.iter().enumerate() {
            acc += basis[i][x] * basis[j][x] * basis[k][x] / (px * px);
        }
        factor * acc
    }

    #[test]
    fn commutative_restriction_matches_classical_connections() {
        let chart = StateChart::new(3).unwrap();
        let p = [0.5, 0.3, 0.2];
        let rho = DensityState::from_probabilities(&p).unwrap();
        let diag: Vec<Vec<f64>> = chart
            .diagonal_indices()
            .map(|a| {
                (0..3)
                    .map(|x| chart.element(a).matrix()[(x, x)].re)
                    .collect()
            })
            .collect();
        for alpha in [0.5, 1.0, 2.0, -1.0] {
            let (cf_p, cf_d) = connections_closed_form(&rho, &chart, alpha).unwrap();
            for i in chart.diagonal_indices() {
                for j in chart.diagonal_indices() {
                    for k in chart.diagonal_indices() {
                        let cp = classical_gamma(&p, &diag, i, j, k, alpha, false);
                        let cd = classical_gamma(&p, &diag, i, j, k, alpha, true);
                        assert!(
                            (cf_p.get(i, j, k) - cp).abs() < 1e-8,
                            "alpha {alpha} primal ({i}{j}{k}): {} vs {cp}",
                            cf_p.get(i, j, k)
                        );
                        assert!(
                            (cf_d.get(i, j, k) - cd).abs() < 1e-8,
                            "alpha {alpha} dual ({i}{j}{k}): {} vs {cd}",
                            cf_d.get(i, j, k)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mixed_structures_break_duality_but_matched_ones_keep_it() {
        let chart = StateChart::new(2).unwrap();
        let steps = FdSteps::default();
        let rho = well_conditioned_state(2, 7700);
        // the matched triad reduces to the standard duality identity
        for alpha in [0.5, 1.0, 2.0] {
            let matched =
                triad_duality_residual_max(&rho, &chart, alpha, alpha, alpha, &steps).unwrap();
            let standard = duality_residual_max(&rho, &chart, alpha, &steps).unwrap();
            assert!((matched - standard).abs() < 1e-10);
            assert!(matched < 1e-4);
        }
        // borrowed pairs over a small (beta, gamma) grid: at least one defect
        // per row is visibly nonzero, and the diagonal of the scan confirms
        // nothing accidental holds either
        let mut any_large = false;
        for beta in [0.5, 2.0] {
            for gamma in [0.5, 2.0] {
                let defect =
                    triad_duality_residual_max(&rho, &chart, 1.0, beta, gamma, &steps).unwrap();
                if defect > 1e-2 {
                    any_large = true;
                }
            }
        }
        assert!(
            any_large,
            "every borrowed pair looked metric-dual under g^1"
        );
    }

    #[test]
    fn connection_coefficients_serialize_flat() {
        let chart = StateChart::new(2).unwrap();
        let rho = well_conditioned_state(2, 7600);
        let (primal, _) = connections_closed_form(&rho, &chart, 0.7).unwrap();
        let json: serde_json::Value = serde_json::to_value(&primal).unwrap();
        assert_eq!(json["coords"], 3);
        assert_eq!(json["gamma"].as_array().unwrap().len(), 27);
        assert_eq!(json["metric_matrix"].as_array().unwrap().len(), 9);
        assert_eq!(json["kind"], "Primal");
    }

    #[test]
    fn duality_residual_small_on_qubit() {
        let chart = StateChart::new(2).unwrap();
        let steps = FdSteps::default();
        let rho = well_conditioned_state(2, 7400);
        for alpha in [0.7, 1.0] {
            let worst = duality_residual_max(&rho, &chart, alpha, &steps).unwrap();
            assert!(worst < 1e-4, "alpha {alpha}: duality residual {worst:.3e}");
        }
        // the uniform center carries extra symmetry
        let uniform = DensityState::maximally_mixed(2);
        let res = duality_residual(&uniform, &chart, 0.5, 0, 1, 2, &steps).unwrap();
        assert!(res < 1e-6, "symmetric-point residual {res:.3e}");
    }

    #[test]
    fn curvature_rejects_ill_conditioned_metric() {
        // a barely-faithful state pushes the Gram condition past 1e8
        let chart = StateChart::new(2).unwrap();
        let rho =
            DensityState::new(HermitianOperator::from_real_diagonal(&[1.0 - 1e-9, 1e-9])).unwrap();
        let err = curvature(&rho, &chart, 0.5, &FdSteps::default());
        assert!(matches!(err, Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn curvature_flat_at_umegaki_point_and_not_nearby() {
        let chart = StateChart::new(2).unwrap();
        let steps = FdSteps::default();
        let rho = well_conditioned_state(2, 7500);
        let flat = curvature(&rho, &chart, 1.0, &steps).unwrap();
        assert!(flat.max_abs_riemann_primal <= 5e-3);
        assert!(flat.max_abs_riemann_dual <= 5e-3);

        let half = curvature(&rho, &chart, 0.5, &steps).unwrap();
        let two = curvature(&rho, &chart, 2.0, &steps).unwrap();
        for report in [&half, &two] {
            let max = report
                .max_abs_riemann_primal
                .max(report.max_abs_riemann_dual);
            assert!(
                max >= 10.0 * flat.max_abs_riemann_primal.max(flat.max_abs_riemann_dual),
                "alpha {}: {max:.3e} not an order above the flat case",
                report.alpha
            );
        }
    }
}
