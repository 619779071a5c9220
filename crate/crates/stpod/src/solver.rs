//! Full-order and reduced-order space-time Galerkin solves for the heat problem.
//!
//! The full-order system is (D_S ⊗ M_Y + M_S ⊗ A_Y) vec(X) = vec(F) with the
//! first time-test block replaced by the initial-condition rows
//! X[:,1] = Π_Y x₀. Because D_S and M_S are tridiagonal for the nodal P1
//! basis the system is block tridiagonal over time columns and is solved by
//! a forward/backward block sweep of q×q solves; a dense vec-system solver
//! is kept for small grids and cross-checks. The reduced system carries the
//! same structure under congruence with the basis transforms and is solved
//! densely at its small size.

use nalgebra::{DMatrix, DVector};

use crate::field::CoefficientField;
use crate::grid::{BoundaryMode, GramianSet, Grid1D};
use crate::linalg::{cond_estimate_1, norm_1, PartialPivLu};
use crate::pod::{SpaceReducedBasis, TimeReducedBasisIc};
use crate::quad::gauss_legendre_on;
use crate::{Result, StpodError};

pub type SpaceTimeFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// The evolution problem x_t − μ x_ξξ = f on [0,T]×Ω with zero spatial
/// boundary values and initial state x₀.
pub struct ProblemSpec {
    pub mu: f64,
    pub forcing: SpaceTimeFn,
    pub initial: SpaceFn,
    pub t_final: f64,
    pub domain: (f64, f64),
    pub exact_solution: Option<SpaceTimeFn>,
}

impl ProblemSpec {
    /// Manufactured problem whose exact solution is
    /// 10·sin(πξ−2τ)·cos(πτ−3ξ)·ξ·(ξ−1)³.
    pub fn example1(mu: f64) -> Self {
        ProblemSpec {
            mu,
            forcing: Box::new(move |tau, xi| ex1_dt(tau, xi) - mu * ex1_dxx(tau, xi)),
            initial: Box::new(|xi| ex1_value(0.0, xi)),
            t_final: 1.0,
            domain: (0.0, 1.0),
            exact_solution: Some(Box::new(ex1_value)),
        }
    }

    /// Zero initial state driven by a ring-shaped indicator forcing in the
    /// space-time plane: f = 5·χ_D, D = B_{1/√5}(½) \ B_{1/√8}(½).
    pub fn example2(mu: f64) -> Self {
        ProblemSpec {
            mu,
            forcing: Box::new(ring_forcing),
            initial: Box::new(|_| 0.0),
            t_final: 1.0,
            domain: (0.0, 1.0),
            exact_solution: None,
        }
    }

    /// Unforced decay of the first Fourier mode; handy as a plain default.
    pub fn decay_mode(mu: f64) -> Self {
        ProblemSpec {
            mu,
            forcing: Box::new(|_, _| 0.0),
            initial: Box::new(|xi| (std::f64::consts::PI * xi).sin()),
            t_final: 1.0,
            domain: (0.0, 1.0),
            exact_solution: None,
        }
    }
}

/// Exact solution of example 1.
pub fn ex1_value(tau: f64, xi: f64) -> f64 {
    let pi = std::f64::consts::PI;
    10.0 * (pi * xi - 2.0 * tau).sin() * (pi * tau - 3.0 * xi).cos() * xi * (xi - 1.0).powi(3)
}

/// ∂x/∂τ of the example-1 solution.
pub fn ex1_dt(tau: f64, xi: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let a = (pi * xi - 2.0 * tau).sin();
    let b = (pi * tau - 3.0 * xi).cos();
    let a_t = -2.0 * (pi * xi - 2.0 * tau).cos();
    let b_t = -pi * (pi * tau - 3.0 * xi).sin();
    let p = xi * (xi - 1.0).powi(3);
    10.0 * p * (a_t * b + a * b_t)
}

/// ∂²x/∂ξ² of the example-1 solution.
pub fn ex1_dxx(tau: f64, xi: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let a = (pi * xi - 2.0 * tau).sin();
    let b = (pi * tau - 3.0 * xi).cos();
    let a_x = pi * (pi * xi - 2.0 * tau).cos();
    let b_x = 3.0 * (pi * tau - 3.0 * xi).sin();
    let a_xx = -pi * pi * a;
    let b_xx = -9.0 * b;
    let p = xi * (xi - 1.0).powi(3);
    let p1 = (xi - 1.0).powi(2) * (4.0 * xi - 1.0);
    let p2 = 6.0 * (xi - 1.0) * (2.0 * xi - 1.0);
    10.0 * (a_xx * b * p + a * b_xx * p + a * b * p2 + 2.0 * a_x * b_x * p + 2.0 * a_x * b * p1
        + 2.0 * a * b_x * p1)
}

/// Ring indicator forcing of example 2.
pub fn ring_forcing(tau: f64, xi: f64) -> f64 {
    let r2 = (tau - 0.5).powi(2) + (xi - 0.5).powi(2);
    if (0.125..=0.2).contains(&r2) {
        5.0
    } else {
        0.0
    }
}

/// Forcing derived from an exact solution with closed-form partials:
/// f = x_τ − μ·x_ξξ.
pub fn manufactured_forcing(
    value_dt: fn(f64, f64) -> f64,
    value_dxx: fn(f64, f64) -> f64,
    mu: f64,
) -> impl Fn(f64, f64) -> f64 {
    move |tau, xi| value_dt(tau, xi) - mu * value_dxx(tau, xi)
}

/// Per-cell quadrature settings for right-hand-side assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    /// Gauss-Legendre points per subcell and direction.
    pub order: usize,
    /// Uniform subdivisions of every cell per direction; raises the
    /// resolution of discontinuous integrands such as the ring forcing.
    pub subdivision: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { order: 3, subdivision: 1 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(StpodError::Config(format!(
                "quadrature order must be at least 2, got {}",
                self.order
            )));
        }
        if self.subdivision < 1 {
            return Err(StpodError::Config("subdivision must be at least 1".into()));
        }
        Ok(())
    }
}

/// Load matrix F[i][j] = ∬ f·ν_i·ψ_j assembled by composite per-cell
/// Gauss-Legendre quadrature over both grids.
pub fn assemble_rhs(
    forcing: &dyn Fn(f64, f64) -> f64,
    time_grid: &Grid1D,
    space_grid: &Grid1D,
    quad: &QuadratureSpec,
) -> Result<DMatrix<f64>> {
    quad.validate()?;
    let s = time_grid.n_active();
    let q = space_grid.n_active();
    let mut f_mat = DMatrix::zeros(q, s);

    let t_axis = axis_quadrature(time_grid, quad);
    let x_axis = axis_quadrature(space_grid, quad);

    for (kt, t_pieces) in t_axis.iter().enumerate() {
        for (kx, x_pieces) in x_axis.iter().enumerate() {
            for &(tau, wt, psi_left) in t_pieces {
                for &(xi, wx, nu_left) in x_pieces {
                    let fv = forcing(tau, xi) * wt * wx;
                    if fv == 0.0 {
                        continue;
                    }
                    for (tn, psi) in [(kt, psi_left), (kt + 1, 1.0 - psi_left)] {
                        let Some(j) = active_index(time_grid, tn) else { continue };
                        for (xn, nu) in [(kx, nu_left), (kx + 1, 1.0 - nu_left)] {
                            let Some(i) = active_index(space_grid, xn) else { continue };
                            f_mat[(i, j)] += fv * psi * nu;
                        }
                    }
                }
            }
        }
    }
    Ok(f_mat)
}

/// Per cell: list of (point, weight, value of the left hat at the point).
fn axis_quadrature(grid: &Grid1D, quad: &QuadratureSpec) -> Vec<Vec<(f64, f64, f64)>> {
    let mut cells = Vec::with_capacity(grid.n_nodes - 1);
    for k in 0..grid.n_nodes - 1 {
        let left = grid.node(k);
        let mut pieces = Vec::with_capacity(quad.subdivision * quad.order);
        for sub in 0..quad.subdivision {
            let a = left + sub as f64 * grid.h / quad.subdivision as f64;
            let b = left + (sub + 1) as f64 * grid.h / quad.subdivision as f64;
            let (pts, wts) = gauss_legendre_on(a, b, quad.order);
            for (p, w) in pts.into_iter().zip(wts) {
                pieces.push((p, w, 1.0 - (p - left) / grid.h));
            }
        }
        cells.push(pieces);
    }
    cells
}

fn active_index(grid: &Grid1D, node: usize) -> Option<usize> {
    match grid.boundary_mode {
        BoundaryMode::AllNodes => Some(node),
        BoundaryMode::ZeroDirichlet => {
            if node == 0 || node == grid.n_nodes - 1 {
                None
            } else {
                Some(node - 1)
            }
        }
    }
}

/// L²(Ω) projection of the initial state onto the spatial basis: solves
/// M_Y c = b with b[i] = ∫ x₀ ν_i.
pub fn project_initial(
    initial: &dyn Fn(f64) -> f64,
    space_grid: &Grid1D,
    g: &GramianSet,
    quad: &QuadratureSpec,
) -> Result<DVector<f64>> {
    quad.validate()?;
    let q = space_grid.n_active();
    let mut b = DVector::zeros(q);
    for (kx, pieces) in axis_quadrature(space_grid, quad).iter().enumerate() {
        for &(xi, w, nu_left) in pieces {
            let fv = initial(xi) * w;
            for (xn, nu) in [(kx, nu_left), (kx + 1, 1.0 - nu_left)] {
                if let Some(i) = active_index(space_grid, xn) {
                    b[i] += fv * nu;
                }
            }
        }
    }
    let y = g
        .l_y
        .solve_lower_triangular(&b)
        .ok_or_else(|| StpodError::Factorization("L_Y is singular".into()))?;
    g.l_y
        .tr_solve_lower_triangular(&y)
        .ok_or_else(|| StpodError::Factorization("L_Y is singular".into()))
}

/// Coupling block B_{jl} = D_S[j,l]·M_Y + M_S[j,l]·A_Y of the vec system.
fn coupling_block(g: &GramianSet, j: usize, l: usize) -> DMatrix<f64> {
    &g.m_y * g.d_s[(j, l)] + &g.a_y * g.m_s[(j, l)]
}

/// Solve the full-order model by the block-tridiagonal time sweep.
///
/// Column 0 of the result equals the projected initial condition exactly; the
/// remaining columns satisfy the Galerkin equations of the time-test
/// functions j ≥ 2.
pub fn solve_fom(problem: &ProblemSpec, g: &GramianSet, quad: &QuadratureSpec) -> Result<CoefficientField> {
    let f_mat = assemble_rhs(&problem.forcing, &g.time_grid, &g.space_grid, quad)?;
    let ic = project_initial(&problem.initial, &g.space_grid, g, quad)?;
    solve_fom_with(&f_mat, &ic, g)
}

/// Block-sweep solve with a preassembled load matrix and initial coefficients.
pub fn solve_fom_with(
    f_mat: &DMatrix<f64>,
    ic_coeffs: &DVector<f64>,
    g: &GramianSet,
) -> Result<CoefficientField> {
    let (q, s) = g.dims();
    if f_mat.shape() != (q, s) || ic_coeffs.len() != q {
        return Err(StpodError::DimensionMismatch(format!(
            "load matrix {:?} / initial vector {} vs grids {q}x{s}",
            f_mat.shape(),
            ic_coeffs.len()
        )));
    }
    let mut x = DMatrix::zeros(q, s);
    x.column_mut(0).copy_from(ic_coeffs);
    if s == 1 {
        return CoefficientField::new(x, g.time_grid.clone(), g.space_grid.clone());
    }

    // forward elimination over time columns
    let mut carries: Vec<Option<DMatrix<f64>>> = vec![None; s];
    let mut reduced_rhs: Vec<DVector<f64>> = vec![DVector::zeros(0); s];
    for j in 1..s {
        let mut diag = coupling_block(g, j, j);
        let mut rhs = f_mat.column(j).clone_owned();
        if j == 1 {
            rhs -= coupling_block(g, 1, 0) * ic_coeffs;
        } else {
            let sub = coupling_block(g, j, j - 1);
            if let Some(c_prev) = &carries[j - 1] {
                diag -= &sub * c_prev;
            }
            rhs -= &sub * &reduced_rhs[j - 1];
        }
        let lu = diag.lu();
        if j + 1 < s {
            let sup = coupling_block(g, j, j + 1);
            carries[j] = Some(lu.solve(&sup).ok_or_else(|| {
                StpodError::SingularSystem(format!("time block {j} is singular"))
            })?);
        }
        reduced_rhs[j] = lu
            .solve(&rhs)
            .ok_or_else(|| StpodError::SingularSystem(format!("time block {j} is singular")))?;
    }
    x.column_mut(s - 1).copy_from(&reduced_rhs[s - 1]);
    for j in (1..s - 1).rev() {
        let next = x.column(j + 1).clone_owned();
        let mut col = reduced_rhs[j].clone();
        if let Some(c) = &carries[j] {
            col -= c * next;
        }
        x.column_mut(j).copy_from(&col);
    }

    let field = CoefficientField::new(x, g.time_grid.clone(), g.space_grid.clone())?;
    let residual = fom_residual_max(&field, f_mat, g);
    log::debug!("fom_residual_max={residual:.3e} f_max={:.3e}", f_mat.amax());
    Ok(field)
}

/// Dense solve of the full vec system; intended for small grids and as an
/// oracle for the block sweep.
pub fn solve_fom_dense(
    f_mat: &DMatrix<f64>,
    ic_coeffs: &DVector<f64>,
    g: &GramianSet,
) -> Result<CoefficientField> {
    let (q, s) = g.dims();
    let n = q * s;
    let mut a = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for i in 0..q {
        a[(i, i)] = 1.0;
        rhs[i] = ic_coeffs[i];
    }
    for j in 1..s {
        for l in 0..s {
            let ds = g.d_s[(j, l)];
            let ms = g.m_s[(j, l)];
            if ds == 0.0 && ms == 0.0 {
                continue;
            }
            for i in 0..q {
                for m in 0..q {
                    a[(j * q + i, l * q + m)] += ds * g.m_y[(i, m)] + ms * g.a_y[(i, m)];
                }
            }
        }
        for i in 0..q {
            rhs[j * q + i] = f_mat[(i, j)];
        }
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| StpodError::SingularSystem("dense vec system".into()))?;
    let mut x = DMatrix::zeros(q, s);
    for j in 0..s {
        for i in 0..q {
            x[(i, j)] = sol[j * q + i];
        }
    }
    CoefficientField::new(x, g.time_grid.clone(), g.space_grid.clone())
}

/// Max-norm residual of the Galerkin test rows j ≥ 2.
pub fn fom_residual_max(field: &CoefficientField, f_mat: &DMatrix<f64>, g: &GramianSet) -> f64 {
    let lhs = &g.m_y * &field.x * g.d_s.transpose() + &g.a_y * &field.x * &g.m_s;
    let mut worst: f64 = 0.0;
    for j in 1..f_mat.ncols() {
        for i in 0..f_mat.nrows() {
            worst = worst.max((lhs[(i, j)] - f_mat[(i, j)]).abs());
        }
    }
    worst
}

/// Reduced Galerkin system assembled by congruence with the basis transforms.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub q_hat: usize,
    pub s_hat: usize,
    pub m_s_hat: DMatrix<f64>,
    pub d_s_hat: DMatrix<f64>,
    pub m_y_hat: DMatrix<f64>,
    pub a_y_hat: DMatrix<f64>,
    pub f_hat: DMatrix<f64>,
    pub ic_reduced: DVector<f64>,
    /// The square (q̂·ŝ) operator with the first block row replaced by the
    /// reduced initial-condition rows.
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

pub fn assemble_rom(
    g: &GramianSet,
    space_basis: &SpaceReducedBasis,
    time_basis: &TimeReducedBasisIc,
    f_mat: &DMatrix<f64>,
    ic_coeffs: &DVector<f64>,
) -> Result<ReducedSystem> {
    let (q, s) = g.dims();
    if f_mat.shape() != (q, s) || ic_coeffs.len() != q {
        return Err(StpodError::DimensionMismatch(format!(
            "load matrix {:?} / initial vector {} vs grids {q}x{s}",
            f_mat.shape(),
            ic_coeffs.len()
        )));
    }
    let t_y = &space_basis.transform;
    let t_s = &time_basis.transform;
    let q_hat = space_basis.q_hat;
    let s_hat = time_basis.s_hat;

    let m_s_hat = t_s.tr_mul(&g.m_s) * t_s;
    let d_s_hat = t_s.tr_mul(&g.d_s) * t_s;
    let m_y_hat = t_y.tr_mul(&g.m_y) * t_y;
    let a_y_hat = t_y.tr_mul(&g.a_y) * t_y;
    let f_hat = t_y.tr_mul(f_mat) * t_s;
    let ic_reduced = space_basis.v_hat.tr_mul(&(g.l_y.tr_mul(ic_coeffs)));

    let n = q_hat * s_hat;
    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for i in 0..q_hat {
        matrix[(i, i)] = 1.0;
        rhs[i] = ic_reduced[i];
    }
    for j in 1..s_hat {
        for l in 0..s_hat {
            for i in 0..q_hat {
                for m in 0..q_hat {
                    matrix[(j * q_hat + i, l * q_hat + m)] =
                        d_s_hat[(j, l)] * m_y_hat[(i, m)] + m_s_hat[(j, l)] * a_y_hat[(i, m)];
                }
            }
        }
        for i in 0..q_hat {
            rhs[j * q_hat + i] = f_hat[(i, j)];
        }
    }
    Ok(ReducedSystem {
        q_hat,
        s_hat,
        m_s_hat,
        d_s_hat,
        m_y_hat,
        a_y_hat,
        f_hat,
        ic_reduced,
        matrix,
        rhs,
    })
}

/// Reduced solution and its lift back to full nodal coefficients.
#[derive(Debug, Clone)]
pub struct RomSolution {
    pub x_hat: DMatrix<f64>,
    pub lifted: CoefficientField,
    /// Hager estimate of the 1-norm condition number of the reduced operator.
    pub cond_estimate: f64,
}

/// Solve the reduced system by dense LU with partial pivoting. Near-singular
/// systems (reduced dimensions past the numerical rank) are solved anyway;
/// the condition estimate is returned so callers can flag the report.
pub fn solve_rom(
    sys: &ReducedSystem,
    space_basis: &SpaceReducedBasis,
    time_basis: &TimeReducedBasisIc,
    g: &GramianSet,
) -> Result<RomSolution> {
    let n = sys.matrix.nrows();
    let lu = PartialPivLu::new(sys.matrix.clone())?;
    let sol = lu.solve(&sys.rhs);
    let cond_estimate = cond_estimate_1(
        n,
        norm_1(&sys.matrix),
        |b| lu.solve(b),
        |b| lu.solve_transpose(b),
    );
    log::debug!(
        "rom_cond_est={cond_estimate:.3e} q_hat={} s_hat={}",
        sys.q_hat,
        sys.s_hat
    );

    let mut x_hat = DMatrix::zeros(sys.q_hat, sys.s_hat);
    for j in 0..sys.s_hat {
        for i in 0..sys.q_hat {
            x_hat[(i, j)] = sol[j * sys.q_hat + i];
        }
    }
    let lifted_x = &space_basis.transform * &x_hat * time_basis.transform.transpose();
    let lifted = CoefficientField::new(lifted_x, g.time_grid.clone(), g.space_grid.clone())?;
    Ok(RomSolution { x_hat, lifted, cond_estimate })
}
