//! Cross-method validation sweeps: the closed spectral forms of the metric
//! and the connections against the divergence finite-difference route, the
//! duality identity, torsion-freeness, and the classical (commutative)
//! restriction oracles.

use rgl_core::geometry::{
    connections_closed_form, connections_eguchi, duality_residual_max, metric, metric_eguchi,
    metric_matrix, FdSteps,
};
use rgl_core::matrix::HermitianOperator;
use rgl_core::states::{random_state, random_tangent, DensityState, StateChart};

const ALPHA_GRID: [f64; 6] = [-2.0, -1.0, 0.5, 0.7, 1.0, 2.0];

/// Random state mixed toward uniform so the finite-difference stencils stay
/// well inside the faithful cone.
fn conditioned_state(n: usize, seed: u64) -> DensityState {
    let raw = random_state(n, seed);
    let (state, _) = DensityState::faithful_from(
        raw.op()
            .scale(0.7)
            .add(&HermitianOperator::identity(n).scale(0.3 / n as f64)),
        1e-3,
    )
    .unwrap();
    state
}

#[test]
fn metric_routes_agree_across_alpha_and_dims() {
    let steps = FdSteps::default();
    let mut checked = 0usize;
    for n in [2usize, 3] {
        let chart = StateChart::new(n).unwrap();
        for trial in 0..9u64 {
            let rho = conditioned_state(n, 9000 + 17 * trial + n as u64);
            for &alpha in &ALPHA_GRID {
                let x = random_tangent(&chart, 9100 + trial);
                let y = random_tangent(&chart, 9200 + trial);
                let closed = metric(&rho, &x, &y, alpha).unwrap();
                // expand against the chart Gram matrix
                let g = metric_matrix(&rho, &chart, alpha).unwrap();
                let xc = chart.coordinates_of(x.mrep());
                let yc = chart.coordinates_of(y.mrep());
                let mut via_gram = 0.0;
                for i in 0..chart.len() {
                    for j in 0..chart.len() {
                        via_gram += xc[i] * g[(i, j)] * yc[j];
                    }
                }
                assert!(
                    (closed - via_gram).abs() < 1e-10 * (1.0 + closed.abs()),
                    "gram expansion mismatch at alpha {alpha}"
                );
                checked += 1;
            }
        }
        // direct curvature of the scalar divergence, entrywise
        let rho = conditioned_state(n, 9500 + n as u64);
        for &alpha in &ALPHA_GRID {
            let g = metric_matrix(&rho, &chart, alpha).unwrap();
            for i in 0..chart.len() {
                for j in i..chart.len() {
                    let fd = metric_eguchi(&rho, &chart, i, j, alpha, &steps).unwrap();
                    let rel = (fd - g[(i, j)]).abs() / g[(i, j)].abs().max(1e-2);
                    assert!(
                        rel <= 1e-4,
                        "n={n} alpha={alpha} ({i},{j}): rel err {rel:.2e}"
                    );
                }
            }
        }
    }
    assert!(checked >= 100, "sweep too small: {checked}");
}

#[test]
fn connection_routes_agree_on_qubit_and_qutrit() {
    let steps = FdSteps::default();
    for n in [2usize, 3] {
        let chart = StateChart::new(n).unwrap();
        let rho = conditioned_state(n, 9700 + n as u64);
        for alpha in [0.5, 1.0, 2.0] {
            let (cf_p, cf_d) = connections_closed_form(&rho, &chart, alpha).unwrap();
            let (fd_p, fd_d) = connections_eguchi(&rho, &chart, alpha, &steps).unwrap();
            let dp = cf_p.max_abs_difference(&fd_p);
            let dd = cf_d.max_abs_difference(&fd_d);
            assert!(dp <= 1e-3, "n={n} alpha={alpha}: primal mismatch {dp:.3e}");
            assert!(dd <= 1e-3, "n={n} alpha={alpha}: dual mismatch {dd:.3e}");
            // torsion-freeness of both routes
            assert!(cf_p.max_torsion() < 1e-10);
            assert!(cf_d.max_torsion() < 1e-10);
            assert!(fd_p.max_torsion() < 1e-6);
            assert!(fd_d.max_torsion() < 1e-6);
        }
    }
}

#[test]
fn duality_identity_holds_on_sweeps() {
    let steps = FdSteps::default();
    for n in [2usize, 3] {
        let chart = StateChart::new(n).unwrap();
        let rho = conditioned_state(n, 9800 + n as u64);
        for alpha in [-1.0, 0.7, 1.0, 2.0] {
            let worst = duality_residual_max(&rho, &chart, alpha, &steps).unwrap();
            assert!(worst <= 1e-4, "n={n} alpha={alpha}: residual {worst:.3e}");
        }
    }
}

/// Classical Fisher information matrix of the diagonal family.
#[test]
fn diagonal_gram_block_is_classical_fisher() {
    let chart = StateChart::new(3).unwrap();
    let p = [0.6, 0.25, 0.15];
    let rho = DensityState::from_probabilities(&p).unwrap();
    for alpha in [-2.0, 0.5, 1.0, 3.0] {
        let g = metric_matrix(&rho, &chart, alpha).unwrap();
        for i in chart.diagonal_indices() {
            for j in chart.diagonal_indices() {
                let mut fisher = 0.0;
                for (x, &px) in p.iter().enumerate() {
                    fisher += chart.element(i).matrix()[(x, x)].re
                        * chart.element(j).matrix()[(x, x)].re
                        / px;
                }
                assert!(
                    (g[(i, j)] - fisher).abs() < 1e-10,
                    "alpha {alpha} ({i},{j}): {} vs {fisher}",
                    g[(i, j)]
                );
            }
        }
    }
}

/// On the commutative (diagonal) submanifold the restricted structure is the
/// classical simplex geometry, whose two connections have constant sectional
/// curvature α(1−α) — the Fisher 0-connection value 1/4 at α = ½, zero at
/// α = 1, and −2 at α = 2. The diagonal directions are totally geodesic
/// (mixed coefficients vanish by conjugation symmetry), so the restricted
/// Riemann tensor is assembled from the diagonal blocks alone.
#[test]
fn restricted_curvature_matches_classical_constant() {
    let chart = StateChart::new(3).unwrap();
    let p = [0.45, 0.35, 0.2];
    let rho = DensityState::from_probabilities(&p).unwrap();
    let diag: Vec<usize> = chart.diagonal_indices().collect();
    let m = diag.len();
    let h = 5e-3;

    // restricted Christoffel symbols of the second kind at a diagonal offset
    let restricted = |alpha: f64, theta_full: &[f64]| -> Vec<f64> {
        let state = chart.state(&rho, theta_full).unwrap();
        let (primal, dual) = connections_closed_form(&state, &chart, alpha).unwrap();
        let g = metric_matrix(&state, &chart, alpha).unwrap();
        let mut gd = nalgebra::DMatrix::<f64>::zeros(m, m);
        for (a, &ia) in diag.iter().enumerate() {
            for (b, &ib) in diag.iter().enumerate() {
                gd[(a, b)] = g[(ia, ib)];
            }
        }
        let ginv = gd.try_inverse().unwrap();
        let mut out = vec![0.0; 2 * m * m * m];
        for (which, conn) in [&primal, &dual].iter().enumerate() {
            for l in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let mut acc = 0.0;
                        for w in 0..m {
                            acc += ginv[(l, w)] * conn.get(diag[j], diag[k], diag[w]);
                        }
                        out[which * m * m * m + (l * m + j) * m + k] = acc;
                    }
                }
            }
        }
        out
    };

    for alpha in [0.5, 1.0, 2.0] {
        let expect_k = alpha * (1.0 - alpha);
        let zero = vec![0.0; chart.len()];
        let base = restricted(alpha, &zero);
        // derivative of the restricted Christoffels along each diagonal axis
        let mut deriv = vec![vec![0.0; 2 * m * m * m]; m];
        for (i, &axis) in diag.iter().enumerate() {
            let mut theta = zero.clone();
            theta[axis] = h;
            let plus = restricted(alpha, &theta);
            theta[axis] = -h;
            let minus = restricted(alpha, &theta);
            for idx in 0..2 * m * m * m {
                deriv[i][idx] = (plus[idx] - minus[idx]) / (2.0 * h);
            }
        }
        let g = metric_matrix(&rho, &chart, alpha).unwrap();
        for which in 0..2usize {
            let at = |l: usize, j: usize, k: usize| base[which * m * m * m + (l * m + j) * m + k];
            // R(∂_0, ∂_1)∂_1 paired with ∂_0 against K(g_11 g_00 − g_01 g_01)
            let (i, j, k) = (0usize, 1usize, 1usize);
            let mut r_upper = vec![0.0; m];
            for l in 0..m {
                let mut r = deriv[i][which * m * m * m + (l * m + j) * m + k]
                    - deriv[j][which * m * m * m + (l * m + i) * m + k];
                for mu in 0..m {
                    r += at(l, i, mu) * at(mu, j, k) - at(l, j, mu) * at(mu, i, k);
                }
                r_upper[l] = r;
            }
            let mut lowered = 0.0;
            for (l, &il) in diag.iter().enumerate() {
                lowered += g[(diag[0], il)] * r_upper[l];
            }
            let denom = g[(diag[1], diag[1])] * g[(diag[0], diag[0])]
                - g[(diag[0], diag[1])] * g[(diag[0], diag[1])];
            let k_measured = lowered / denom;
            assert!(
                (k_measured - expect_k).abs() < 1e-3 * (1.0 + expect_k.abs()),
                "alpha {alpha} connection {which}: K = {k_measured} vs {expect_k}"
            );
        }
    }
}

/// The finite-difference route must also reproduce the classical connection
/// coefficients on diagonal index triples (the closed-form route is covered
/// in the unit tests).
#[test]
fn eguchi_connections_match_classical_on_diagonal_family() {
    let chart = StateChart::new(2).unwrap();
    let p = [0.65, 0.35];
    let rho = DensityState::from_probabilities(&p).unwrap();
    let steps = FdSteps::default();
    let f0: Vec<f64> = (0..2)
        .map(|x| chart.element(0).matrix()[(x, x)].re)
        .collect();
    for alpha in [0.5, 1.0, 2.0] {
        let (fd_p, fd_d) = connections_eguchi(&rho, &chart, alpha, &steps).unwrap();
        let sum: f64 = p
            .iter()
            .enumerate()
            .map(|(x, &px)| f0[x] * f0[x] * f0[x] / (px * px))
            .sum();
        let classical_primal = (alpha - 1.0) * sum;
        let classical_dual = -alpha * sum;
        assert!(
            (fd_p.get(0, 0, 0) - classical_primal).abs() < 1e-3,
            "alpha {alpha}: primal {} vs {classical_primal}",
            fd_p.get(0, 0, 0)
        );
        assert!(
            (fd_d.get(0, 0, 0) - classical_dual).abs() < 1e-3,
            "alpha {alpha}: dual {} vs {classical_dual}",
            fd_d.get(0, 0, 0)
        );
    }
}
