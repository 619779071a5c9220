//! Optimal low-rank bases in space and time and the associated projections.
//!
//! The space basis comes from the leading left singular vectors of the
//! weighted coefficient matrix L_Yᵀ X L_S. The time basis is built from the
//! right singular vectors of the same matrix with its first column zeroed,
//! prepended with the first column of L_Sᵀ; that choice pins the first
//! reduced time function to the t = 0 nodal hat, so the initial condition
//! survives the reduction exactly, at the price of an orthogonality defect
//! in the reduced time Gramian.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::field::CoefficientField;
use crate::grid::{GramianSet, Grid1D};
use crate::linalg::FullSvd;
use crate::{Result, StpodError};

/// Which dimension the composite projection reduces first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionOrder {
    SpaceFirst,
    TimeFirst,
}

impl ProjectionOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProjectionOrder::SpaceFirst => "space-first",
            ProjectionOrder::TimeFirst => "time-first",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "space-first" => Ok(ProjectionOrder::SpaceFirst),
            "time-first" => Ok(ProjectionOrder::TimeFirst),
            other => Err(StpodError::Config(format!(
                "unknown projection order `{other}` (expected space-first or time-first)"
            ))),
        }
    }
}

/// Full SVD of the weighted coefficient matrix L_Yᵀ X L_S.
#[derive(Debug, Clone)]
pub struct WeightedSvd {
    /// Left singular vectors, q×q orthogonal.
    pub v: DMatrix<f64>,
    /// Singular values, length min(q, s), nonincreasing.
    pub sigma: DVector<f64>,
    /// Right singular vectors, s×s orthogonal.
    pub u: DMatrix<f64>,
}

pub fn weighted_svd(field: &CoefficientField, g: &GramianSet) -> Result<WeightedSvd> {
    let svd = FullSvd::new(&field.weighted(g)?)?;
    Ok(WeightedSvd { v: svd.v, sigma: svd.sigma, u: svd.u })
}

/// Reduced basis in space: the leading left singular vectors together with
/// the transform L_Y⁻ᵀ V̂ mapping reduced coefficients to nodal ones.
#[derive(Debug, Clone)]
pub struct SpaceReducedBasis {
    pub v_hat: DMatrix<f64>,
    pub q_hat: usize,
    /// q×q̂; column k holds the nodal coefficients of ν̂_k.
    pub transform: DMatrix<f64>,
    /// All singular values of the matrix the basis was computed from.
    pub sigma: DVector<f64>,
}

pub fn reduce_space(
    field: &CoefficientField,
    g: &GramianSet,
    q_hat: usize,
) -> Result<SpaceReducedBasis> {
    let (q, _) = g.dims();
    if q_hat < 1 || q_hat > q {
        return Err(StpodError::InvalidReduction(format!(
            "q_hat must lie in 1..={q}, got {q_hat}"
        )));
    }
    let svd = weighted_svd(field, g)?;
    let v_hat = svd.v.columns(0, q_hat).into_owned();
    let transform = g
        .l_y
        .tr_solve_lower_triangular(&v_hat)
        .ok_or_else(|| StpodError::Factorization("L_Y is singular".into()))?;
    Ok(SpaceReducedBasis { v_hat, q_hat, transform, sigma: svd.sigma })
}

/// Reduced basis in time with the initial-condition modification: the first
/// column of U_hat is the first column of L_Sᵀ (so ψ̂₁ = ψ₁), the remaining
/// columns are leading right singular vectors of the first-column-zeroed
/// weighted matrix.
#[derive(Debug, Clone)]
pub struct TimeReducedBasisIc {
    pub u_hat: DMatrix<f64>,
    pub s_hat: usize,
    /// s×ŝ; column k holds the nodal coefficients of ψ̂_k. The first column
    /// is exactly e₁ and the first row of the remaining columns is zero.
    pub transform: DMatrix<f64>,
    /// Reduced time Gramian U_hatᵀ U_hat; identity on the 2.. block only.
    pub m_s_hat: DMatrix<f64>,
    /// Singular values of L_Yᵀ X̊ L_S (the zeroed matrix the basis came from).
    pub sigma: DVector<f64>,
    /// ŝ = 1 keeps only the initial-condition function.
    pub degenerate: bool,
}

pub fn reduce_time_ic(
    field: &CoefficientField,
    g: &GramianSet,
    s_hat: usize,
) -> Result<TimeReducedBasisIc> {
    let (_, s) = g.dims();
    if s_hat < 1 || s_hat > s {
        return Err(StpodError::InvalidReduction(format!(
            "s_hat must lie in 1..={s}, got {s_hat}"
        )));
    }
    let zeroed = field.zero_first_column();
    let svd = FullSvd::new(&zeroed.weighted(g)?)?;

    let mut u_hat = DMatrix::zeros(s, s_hat);
    // first column of L_Sᵀ: only the (1,1) entry of the lower factor survives
    u_hat[(0, 0)] = g.l_s[(0, 0)];
    if s_hat > 1 {
        let raw = svd.u.columns(0, s_hat - 1).into_owned();
        let cleaned = enforce_zero_start(&raw, g)?;
        u_hat.view_mut((0, 1), (s, s_hat - 1)).copy_from(&cleaned);
    }

    let transform = g
        .l_s
        .tr_solve_lower_triangular(&u_hat)
        .ok_or_else(|| StpodError::Factorization("L_S is singular".into()))?;
    let m_s_hat = u_hat.transpose() * &u_hat;
    Ok(TimeReducedBasisIc {
        u_hat,
        s_hat,
        transform,
        m_s_hat,
        sigma: svd.sigma,
        degenerate: s_hat == 1,
    })
}

/// Project right singular vectors onto the subspace {u = L_Sᵀw : w₁ = 0} and
/// re-orthonormalize. Vectors with positive singular value satisfy the
/// constraint exactly in exact arithmetic, but the computed vectors of small
/// singular values drift off it by roughly eps/σ; the drift would show up as
/// a nonzero value of ψ̂_j at t = 0. Columns that collapse under the
/// projection belong to vanished singular values (the basis direction is
/// free there), so they are replaced by a deterministic completion taken
/// from the constraint subspace itself.
fn enforce_zero_start(raw: &DMatrix<f64>, g: &GramianSet) -> Result<DMatrix<f64>> {
    let s = raw.nrows();
    let wanted = raw.ncols();
    let mut w = g
        .l_s
        .tr_solve_lower_triangular(raw)
        .ok_or_else(|| StpodError::Factorization("L_S is singular".into()))?;
    for c in 0..w.ncols() {
        w[(0, c)] = 0.0;
    }
    let constrained = g.l_s.transpose() * w;

    let mut u = DMatrix::zeros(s, wanted);
    let mut filled = 0;
    let push = |u: &mut DMatrix<f64>, filled: &mut usize, cand: &DVector<f64>, threshold: f64| {
        let mut v = cand.clone();
        // two Gram-Schmidt passes against the accepted columns
        for _ in 0..2 {
            for prev in 0..*filled {
                let p = u.column(prev).clone_owned();
                let dot = p.dot(&v);
                v.axpy(-dot, &p, 1.0);
            }
        }
        let norm = v.norm();
        if norm > threshold {
            v.scale_mut(1.0 / norm);
            u.column_mut(*filled).copy_from(&v);
            *filled += 1;
            true
        } else {
            false
        }
    };
    // singular vectors keep unit norm under the constraint fix unless their
    // singular value has vanished and the direction is arbitrary anyway
    for c in 0..wanted {
        push(&mut u, &mut filled, &constrained.column(c).clone_owned(), 0.5);
        if filled == wanted {
            break;
        }
    }
    // completion candidates L_Sᵀ e_k, k ≥ 2, all satisfying the constraint;
    // near the end only a thin residual direction is left, so accept any
    // numerically independent remainder
    let mut k = 1;
    while filled < wanted && k < s {
        let mut cand = g.l_s.transpose().column(k).clone_owned();
        cand.scale_mut(1.0 / cand.norm());
        push(&mut u, &mut filled, &cand, 1e-8);
        k += 1;
    }
    if filled < wanted {
        return Err(StpodError::Factorization(
            "time basis candidates became linearly dependent".into(),
        ));
    }
    Ok(u)
}

/// Coefficient matrix of the orthogonal projection onto the reduced-space
/// product space, stored at full size: X' = L_Y⁻ᵀ V̂ V̂ᵀ L_Yᵀ X.
pub fn project_space(
    field: &CoefficientField,
    basis: &SpaceReducedBasis,
    g: &GramianSet,
) -> Result<CoefficientField> {
    let (q, _) = g.dims();
    if basis.v_hat.nrows() != q {
        return Err(StpodError::DimensionMismatch(format!(
            "space basis has {} rows, expected {q}",
            basis.v_hat.nrows()
        )));
    }
    let w = g.l_y.tr_mul(&field.x);
    let projected = &basis.v_hat * (basis.v_hat.tr_mul(&w));
    let x = g
        .l_y
        .tr_solve_lower_triangular(&projected)
        .ok_or_else(|| StpodError::Factorization("L_Y is singular".into()))?;
    field.with_matrix(x)
}

/// Initial-condition-preserving time projection: the first coefficient
/// column passes through unchanged, the zeroed remainder is projected onto
/// span{ψ̂₂, …, ψ̂_ŝ} via X̊ L_S Ů Ůᵀ L_S⁻¹.
pub fn project_time_ic(
    field: &CoefficientField,
    basis: &TimeReducedBasisIc,
    g: &GramianSet,
) -> Result<CoefficientField> {
    let (_, s) = g.dims();
    if basis.u_hat.nrows() != s {
        return Err(StpodError::DimensionMismatch(format!(
            "time basis has {} rows, expected {s}",
            basis.u_hat.nrows()
        )));
    }
    let zeroed = field.zero_first_column();
    let mut x = DMatrix::zeros(field.x.nrows(), s);
    x.column_mut(0).copy_from(&field.x.column(0));
    if basis.s_hat > 1 {
        let u_ring = basis.u_hat.columns(1, basis.s_hat - 1);
        let gmat = &zeroed.x * &g.l_s;
        let h = (&gmat * u_ring) * u_ring.transpose();
        // solve X̊' L_S = H  ⇔  L_Sᵀ X̊'ᵀ = Hᵀ
        let xt = g
            .l_s
            .tr_solve_lower_triangular(&h.transpose())
            .ok_or_else(|| StpodError::Factorization("L_S is singular".into()))?;
        let x_ring = xt.transpose();
        for j in 1..s {
            x.column_mut(j).copy_from(&x_ring.column(j));
        }
    }
    field.with_matrix(x)
}

/// Result of the two-stage projection onto the reduced product space.
#[derive(Debug, Clone)]
pub struct CompositeProjection {
    /// The projected field, stored at full q×s size.
    pub field: CoefficientField,
    /// Stage-one output (space-projected for SpaceFirst, time-projected for
    /// TimeFirst); the singular values of its zeroed/full weighted matrix
    /// feed the error bounds.
    pub intermediate: CoefficientField,
    pub space_basis: SpaceReducedBasis,
    pub time_basis: TimeReducedBasisIc,
    pub order: ProjectionOrder,
}

/// Apply both projections in the requested order. The stage-two basis is
/// computed from the stage-one output, which is what makes the order matter.
pub fn project_composite(
    field: &CoefficientField,
    order: ProjectionOrder,
    q_hat: usize,
    s_hat: usize,
    g: &GramianSet,
) -> Result<CompositeProjection> {
    match order {
        ProjectionOrder::SpaceFirst => {
            let space_basis = reduce_space(field, g, q_hat)?;
            let intermediate = project_space(field, &space_basis, g)?;
            let time_basis = reduce_time_ic(&intermediate, g, s_hat)?;
            let projected = project_time_ic(&intermediate, &time_basis, g)?;
            Ok(CompositeProjection {
                field: projected,
                intermediate,
                space_basis,
                time_basis,
                order,
            })
        }
        ProjectionOrder::TimeFirst => {
            let time_basis = reduce_time_ic(field, g, s_hat)?;
            let intermediate = project_time_ic(field, &time_basis, g)?;
            let space_basis = reduce_space(&intermediate, g, q_hat)?;
            let projected = project_space(&intermediate, &space_basis, g)?;
            Ok(CompositeProjection {
                field: projected,
                intermediate,
                space_basis,
                time_basis,
                order,
            })
        }
    }
}

/// Dump sampled time basis functions: a one-line JSON header, a CSV header,
/// then one row per time node with the nodal values of each ψ̂_k.
pub fn write_time_basis_csv<W: Write>(
    basis: &TimeReducedBasisIc,
    grid: &Grid1D,
    w: &mut W,
) -> Result<()> {
    let header = serde_json::json!({
        "kind": "time",
        "s_hat": basis.s_hat,
        "grid": {"a": grid.a, "b": grid.b, "n_nodes": grid.n_nodes},
    });
    writeln!(w, "{header}")?;
    let cols: Vec<String> = (1..=basis.s_hat).map(|k| format!("psi_hat_{k}")).collect();
    writeln!(w, "tau,{}", cols.join(","))?;
    for l in 0..grid.n_nodes {
        let mut row = vec![format!("{:.16e}", grid.node(l))];
        for k in 0..basis.s_hat {
            row.push(format!("{:.16e}", basis.transform[(l, k)]));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Dump sampled space basis functions including the zero boundary values.
pub fn write_space_basis_csv<W: Write>(
    basis: &SpaceReducedBasis,
    grid: &Grid1D,
    w: &mut W,
) -> Result<()> {
    let header = serde_json::json!({
        "kind": "space",
        "q_hat": basis.q_hat,
        "grid": {"a": grid.a, "b": grid.b, "n_nodes": grid.n_nodes},
    });
    writeln!(w, "{header}")?;
    let cols: Vec<String> = (1..=basis.q_hat).map(|k| format!("nu_hat_{k}")).collect();
    writeln!(w, "xi,{}", cols.join(","))?;
    for m in 0..grid.n_nodes {
        let mut row = vec![format!("{:.16e}", grid.node(m))];
        for k in 0..basis.q_hat {
            let value = if m == 0 || m == grid.n_nodes - 1 {
                0.0
            } else {
                basis.transform[(m - 1, k)]
            };
            row.push(format!("{:.16e}", value));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
