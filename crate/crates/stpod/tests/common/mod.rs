#![allow(dead_code)]

//! Shared test support: an independent quadrature oracle for the space-time
//! norms and seeded random fields.
//!
//! The oracle evaluates the P1⊗P1 expansion pointwise from the raw
//! coefficient matrix and integrates with its own hardcoded Gauss rule, so
//! it shares no code path with the Gramian-based norm implementations it
//! checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stpod::field::CoefficientField;
use stpod::grid::{BoundaryMode, Grid1D};

/// 3-point Gauss-Legendre rule on [-1, 1]; exact through degree 5, enough
/// for the degree-2 integrands of squared P1⊗P1 expansions.
#[allow(clippy::excessive_precision)]
const GL3_NODES: [f64; 3] = [-0.774596669241483377, 0.0, 0.774596669241483377];
#[allow(clippy::excessive_precision)]
const GL3_WEIGHTS: [f64; 3] = [
    0.555555555555555556,
    0.888888888888888889,
    0.555555555555555556,
];

/// Hat function centered at `node` of a uniform grid, evaluated at `p`.
fn hat(a: f64, h: f64, node: usize, p: f64) -> f64 {
    let center = a + node as f64 * h;
    (1.0 - (p - center).abs() / h).max(0.0)
}

/// Derivative of the hat centered at `node`, evaluated inside cell `cell`.
fn hat_derivative_in_cell(h: f64, node: usize, cell: usize) -> f64 {
    if cell + 1 == node {
        1.0 / h
    } else if cell == node {
        -1.0 / h
    } else {
        0.0
    }
}

fn space_node_of(grid: &Grid1D, active: usize) -> usize {
    match grid.boundary_mode {
        BoundaryMode::AllNodes => active,
        BoundaryMode::ZeroDirichlet => active + 1,
    }
}

/// Evaluate Σ_ij X[i][j] ν_i(ξ) ψ_j(τ) directly from the coefficients.
pub fn oracle_evaluate(field: &CoefficientField, tau: f64, xi: f64) -> f64 {
    let tg = &field.time_grid;
    let xg = &field.space_grid;
    let mut total = 0.0;
    for i in 0..field.x.nrows() {
        let nu = hat(xg.a, xg.h, space_node_of(xg, i), xi);
        if nu == 0.0 {
            continue;
        }
        for j in 0..field.x.ncols() {
            let psi = hat(tg.a, tg.h, j, tau);
            if psi != 0.0 {
                total += field.x[(i, j)] * nu * psi;
            }
        }
    }
    total
}

/// Time derivative of the expansion inside time cell `kt`.
fn oracle_evaluate_dt(field: &CoefficientField, kt: usize, xi: f64) -> f64 {
    let tg = &field.time_grid;
    let xg = &field.space_grid;
    let mut total = 0.0;
    for i in 0..field.x.nrows() {
        let nu = hat(xg.a, xg.h, space_node_of(xg, i), xi);
        if nu == 0.0 {
            continue;
        }
        for j in 0..field.x.ncols() {
            let dpsi = hat_derivative_in_cell(tg.h, j, kt);
            if dpsi != 0.0 {
                total += field.x[(i, j)] * nu * dpsi;
            }
        }
    }
    total
}

/// √∬ x² by composite per-cell Gauss quadrature of the expansion.
pub fn oracle_l2_norm(field: &CoefficientField) -> f64 {
    integrate_squared(field, |f, _kt, tau, xi| oracle_evaluate(f, tau, xi))
}

/// √∬ (x_t)² by the same quadrature on the cellwise-constant-in-time slope.
pub fn oracle_dt_norm(field: &CoefficientField) -> f64 {
    integrate_squared(field, |f, kt, _tau, xi| oracle_evaluate_dt(f, kt, xi))
}

fn integrate_squared(
    field: &CoefficientField,
    value: impl Fn(&CoefficientField, usize, f64, f64) -> f64,
) -> f64 {
    let tg = &field.time_grid;
    let xg = &field.space_grid;
    let mut total = 0.0;
    for kt in 0..tg.n_nodes - 1 {
        let (t0, t1) = (tg.node(kt), tg.node(kt + 1));
        for kx in 0..xg.n_nodes - 1 {
            let (x0, x1) = (xg.node(kx), xg.node(kx + 1));
            for (gt, wt) in GL3_NODES.iter().zip(&GL3_WEIGHTS) {
                let tau = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * gt;
                for (gx, wx) in GL3_NODES.iter().zip(&GL3_WEIGHTS) {
                    let xi = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * gx;
                    let v = value(field, kt, tau, xi);
                    total += wt * wx * 0.25 * (t1 - t0) * (x1 - x0) * v * v;
                }
            }
        }
    }
    total.sqrt()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random coefficient field with entries in [-1, 1).
pub fn random_field(rng: &mut ChaCha8Rng, tg: &Grid1D, xg: &Grid1D) -> CoefficientField {
    let x = DMatrix::from_fn(xg.n_active(), tg.n_active(), |_, _| rng.random_range(-1.0..1.0));
    CoefficientField::new(x, tg.clone(), xg.clone()).unwrap()
}

pub fn time_grid(n: usize) -> Grid1D {
    Grid1D::uniform(0.0, 1.0, n, BoundaryMode::AllNodes).unwrap()
}

pub fn space_grid(n: usize) -> Grid1D {
    Grid1D::uniform(0.0, 1.0, n, BoundaryMode::ZeroDirichlet).unwrap()
}
