//! # rgl-core
//!
//! Numerical information geometry of the sandwiched Rényi α-divergence
//!
//! D_α(ρ‖σ) = 1/(α(α−1)) · log Tr (σ^((1−α)/2α) ρ σ^((1−α)/2α))^α
//!
//! on the manifold of faithful density operators of a finite-dimensional
//! Hilbert space. The crate provides
//!
//! - [`matrix`]: spectral calculus on Hermitian matrices — matrix functions,
//!   first- and second-order Fréchet derivatives in divided-difference and
//!   integral (Gauss–Legendre) form, majorization utilities;
//! - [`states`]: faithful states, tangent vectors, coordinate charts, CPTP
//!   channels in Kraus form, pinching, and seeded random generators;
//! - [`divergence`]: ψ, the sandwiched Rényi relative entropy, the rescaled
//!   α-divergence with its α=1 (Umegaki) branch, the classical
//!   alpha-divergence, and one-sided α→0 limit extrapolation;
//! - [`geometry`]: the induced Riemannian metric (spectral kernel and
//!   finite-difference forms), the operator-kernel family f_β, the dual pair
//!   of affine connections, duality residuals, and curvature diagnostics;
//! - [`lab`]: reproducible Monte-Carlo experiments and counterexample
//!   searches for the monotonicity regions of the metric, the divergence,
//!   and the kernel family.
//!
//! All operations are pure functions over value types; random generators take
//! explicit seeds, so everything is safe to fan out across threads.

#![forbid(unsafe_code)]

pub mod divergence;
pub mod error;
pub mod geometry;
pub mod lab;
pub mod matrix;
pub mod rng;
pub mod states;
pub mod wire;

pub use error::{Error, Result};

/// Complex double-precision scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// Complex dense matrix type used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<C64>;
