//! Norm representations checked against the independent quadrature oracle.

mod common;

use common::{oracle_dt_norm, oracle_evaluate, oracle_l2_norm, random_field, seeded_rng,
    space_grid, time_grid};
use stpod::grid::GramianSet;

#[test]
fn sty_norm_matches_quadrature_on_the_derived_grid_pair() {
    // 5×4 coefficient matrix: q = 5 (7 space nodes), s = 4
    let tg = time_grid(4);
    let xg = space_grid(7);
    let g = GramianSet::assemble(&tg, &xg, 1.0).unwrap();
    let mut rng = seeded_rng(42);
    for _ in 0..10 {
        let f = random_field(&mut rng, &tg, &xg);
        let lhs = f.sty_norm(&g).unwrap();
        let rhs = oracle_l2_norm(&f);
        assert!((lhs - rhs).abs() <= 1e-10 * rhs, "{lhs} vs {rhs}");
    }
}

#[test]
fn sty_dt_norm_matches_quadrature_on_the_derived_grid_pair() {
    let tg = time_grid(4);
    let xg = space_grid(7);
    let g = GramianSet::assemble(&tg, &xg, 1.0).unwrap();
    let mut rng = seeded_rng(43);
    for _ in 0..10 {
        let f = random_field(&mut rng, &tg, &xg);
        let lhs = f.sty_dt_norm(&g).unwrap();
        let rhs = oracle_dt_norm(&f);
        assert!((lhs - rhs).abs() <= 1e-10 * rhs, "{lhs} vs {rhs}");
    }
}

#[test]
fn norms_match_quadrature_across_grid_shapes() {
    let mut rng = seeded_rng(7);
    for (nt, nx) in [(3usize, 5usize), (6, 4), (9, 9), (5, 12), (12, 6)] {
        let tg = time_grid(nt);
        let xg = space_grid(nx);
        let g = GramianSet::assemble(&tg, &xg, 1.0).unwrap();
        let f = random_field(&mut rng, &tg, &xg);
        let n = f.sty_norm(&g).unwrap();
        let on = oracle_l2_norm(&f);
        assert!((n - on).abs() <= 1e-10 * on, "norm {nt}x{nx}");
        let d = f.sty_dt_norm(&g).unwrap();
        let od = oracle_dt_norm(&f);
        assert!((d - od).abs() <= 1e-10 * od, "dt norm {nt}x{nx}");
    }
}

#[test]
fn evaluate_agrees_with_the_oracle_expansion() {
    let tg = time_grid(6);
    let xg = space_grid(8);
    let mut rng = seeded_rng(11);
    let f = random_field(&mut rng, &tg, &xg);
    for k in 0..40 {
        let tau = (k as f64 * 0.317) % 1.0;
        let xi = (k as f64 * 0.709) % 1.0;
        let a = f.evaluate(tau, xi).unwrap();
        let b = oracle_evaluate(&f, tau, xi);
        assert!((a - b).abs() < 1e-13, "({tau}, {xi}): {a} vs {b}");
    }
}
