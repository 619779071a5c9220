//! Uniform 1D grids and the P1 finite-element Gramians.
//!
//! The time interval keeps all nodal hat functions; the spatial interval
//! drops the two boundary hats to realize homogeneous Dirichlet conditions.
//! All element integrals are closed-form polynomials of the hat functions,
//! so no quadrature enters the matrix assembly.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::{Result, StpodError};

/// Which nodal basis functions a grid exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Every node carries a basis function (time grids).
    AllNodes,
    /// Only interior nodes carry basis functions (spatial Dirichlet grids).
    ZeroDirichlet,
}

impl BoundaryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryMode::AllNodes => "all_nodes",
            BoundaryMode::ZeroDirichlet => "zero_dirichlet",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all_nodes" => Ok(BoundaryMode::AllNodes),
            "zero_dirichlet" => Ok(BoundaryMode::ZeroDirichlet),
            other => Err(StpodError::Config(format!("unknown boundary mode `{other}`"))),
        }
    }
}

/// Uniform 1D node set on [a, b].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub n_nodes: usize,
    pub h: f64,
    pub boundary_mode: BoundaryMode,
}

impl Grid1D {
    /// Build a uniform grid with `n_nodes` nodes at a + k*h, h = (b-a)/(n_nodes-1).
    pub fn uniform(a: f64, b: f64, n_nodes: usize, boundary_mode: BoundaryMode) -> Result<Self> {
        if n_nodes < 2 {
            return Err(StpodError::InvalidGrid(format!(
                "need at least 2 nodes, got {n_nodes}"
            )));
        }
        // also rejects NaN endpoints
        if b <= a || !(a.is_finite() && b.is_finite()) {
            return Err(StpodError::InvalidGrid(format!(
                "interval must satisfy b > a, got [{a}, {b}]"
            )));
        }
        let h = (b - a) / (n_nodes - 1) as f64;
        Ok(Grid1D { a, b, n_nodes, h, boundary_mode })
    }

    /// Coordinate of node k, bit-identical to a + k*h.
    pub fn node(&self, k: usize) -> f64 {
        self.a + k as f64 * self.h
    }

    /// Number of active basis functions.
    pub fn n_active(&self) -> usize {
        match self.boundary_mode {
            BoundaryMode::AllNodes => self.n_nodes,
            BoundaryMode::ZeroDirichlet => self.n_nodes - 2,
        }
    }

    /// Node index carrying the given active basis function.
    pub fn node_of_basis(&self, basis_index: usize) -> usize {
        match self.boundary_mode {
            BoundaryMode::AllNodes => basis_index,
            BoundaryMode::ZeroDirichlet => basis_index + 1,
        }
    }

    /// Value of the `basis_index`-th active hat function at `point`.
    pub fn eval_basis(&self, basis_index: usize, point: f64) -> Result<f64> {
        if basis_index >= self.n_active() {
            return Err(StpodError::InvalidBasisIndex {
                index: basis_index,
                n_active: self.n_active(),
            });
        }
        let center = self.node(self.node_of_basis(basis_index));
        let t = 1.0 - (point - center).abs() / self.h;
        Ok(t.max(0.0))
    }

    /// Index of the cell [node_k, node_{k+1}] containing `point` (clamped to the last cell).
    pub fn cell_of(&self, point: f64) -> usize {
        let k = ((point - self.a) / self.h).floor();
        (k.max(0.0) as usize).min(self.n_nodes - 2)
    }
}

/// Mass, derivative, and advection Gramians for one (time, space) grid pair,
/// together with the factors the reduction pipeline consumes.
///
/// Matrix conventions: `m_s[j][l] = ∫ψ_l ψ_j`, `k_s[j][l] = ∫ψ̇_l ψ̇_j`,
/// `d_s[j][l] = ∫ψ̇_l ψ_j`, `m_y`/`a_y` the spatial mass and μ-scaled
/// stiffness restricted to interior nodes. `l_s`/`l_y` are lower-triangular
/// Cholesky factors; `j_s` satisfies j_s·j_sᵀ = k_s.
#[derive(Debug, Clone)]
pub struct GramianSet {
    pub time_grid: Grid1D,
    pub space_grid: Grid1D,
    pub mu: f64,
    pub m_s: DMatrix<f64>,
    pub k_s: DMatrix<f64>,
    pub d_s: DMatrix<f64>,
    pub m_y: DMatrix<f64>,
    pub a_y: DMatrix<f64>,
    pub l_s: DMatrix<f64>,
    pub l_y: DMatrix<f64>,
    pub j_s: DMatrix<f64>,
}

/// P1 mass matrix on all nodes of a uniform grid.
pub fn p1_mass(n_nodes: usize, h: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n_nodes, n_nodes);
    for k in 0..n_nodes - 1 {
        m[(k, k)] += h / 3.0;
        m[(k + 1, k + 1)] += h / 3.0;
        m[(k, k + 1)] += h / 6.0;
        m[(k + 1, k)] += h / 6.0;
    }
    m
}

/// P1 derivative Gramian ∫ψ̇ψ̇ on all nodes of a uniform grid.
pub fn p1_stiffness(n_nodes: usize, h: f64) -> DMatrix<f64> {
    let mut k_mat = DMatrix::zeros(n_nodes, n_nodes);
    for k in 0..n_nodes - 1 {
        k_mat[(k, k)] += 1.0 / h;
        k_mat[(k + 1, k + 1)] += 1.0 / h;
        k_mat[(k, k + 1)] -= 1.0 / h;
        k_mat[(k + 1, k)] -= 1.0 / h;
    }
    k_mat
}

/// P1 advection matrix d[j][l] = ∫ψ̇_l ψ_j on all nodes of a uniform grid.
pub fn p1_advection(n_nodes: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n_nodes, n_nodes);
    for k in 0..n_nodes - 1 {
        // On cell [k, k+1]: ∫ over the cell of ψ̇_l ψ_j = slope_l * h/2 for both hats.
        d[(k, k)] -= 0.5;
        d[(k, k + 1)] += 0.5;
        d[(k + 1, k)] -= 0.5;
        d[(k + 1, k + 1)] += 0.5;
    }
    d
}

impl GramianSet {
    /// Assemble all matrices and factors for a time grid (all nodes) and a
    /// spatial Dirichlet grid. `mu` scales the spatial stiffness.
    pub fn assemble(time_grid: &Grid1D, space_grid: &Grid1D, mu: f64) -> Result<Self> {
        if time_grid.boundary_mode != BoundaryMode::AllNodes {
            return Err(StpodError::InvalidGrid(
                "time grid must expose all nodes".into(),
            ));
        }
        if space_grid.boundary_mode != BoundaryMode::ZeroDirichlet {
            return Err(StpodError::InvalidGrid(
                "space grid must be zero-Dirichlet".into(),
            ));
        }
        if mu.is_nan() || mu <= 0.0 {
            return Err(StpodError::InvalidGrid(format!("mu must be positive, got {mu}")));
        }
        let s = time_grid.n_nodes;
        let m_s = p1_mass(s, time_grid.h);
        let k_s = p1_stiffness(s, time_grid.h);
        let d_s = p1_advection(s);

        let nx = space_grid.n_nodes;
        let m_y_full = p1_mass(nx, space_grid.h);
        let k_y_full = p1_stiffness(nx, space_grid.h);
        let q = nx - 2;
        let m_y = m_y_full.view((1, 1), (q, q)).into_owned();
        let a_y = k_y_full.view((1, 1), (q, q)).into_owned() * mu;

        let l_s = Cholesky::new(m_s.clone())
            .ok_or_else(|| StpodError::Factorization("time mass matrix is not SPD".into()))?
            .l();
        let l_y = Cholesky::new(m_y.clone())
            .ok_or_else(|| StpodError::Factorization("space mass matrix is not SPD".into()))?
            .l();
        let j_s = psd_factor(&k_s);

        Ok(GramianSet {
            time_grid: time_grid.clone(),
            space_grid: space_grid.clone(),
            mu,
            m_s,
            k_s,
            d_s,
            m_y,
            a_y,
            l_s,
            l_y,
            j_s,
        })
    }

    /// Active basis counts (q, s).
    pub fn dims(&self) -> (usize, usize) {
        (self.space_grid.n_active(), self.time_grid.n_active())
    }
}

/// Factor a symmetric PSD matrix as J·Jᵀ through its eigendecomposition,
/// dropping eigenvalues below 1e-13 of the largest. K_S has the constants in
/// its null space, so a plain Cholesky would fail; every downstream quantity
/// depends on J only through J·Jᵀ, which makes the factorization choice free.
pub fn psd_factor(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let eig = SymmetricEigen::new(k.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("eigenvalues are finite")
    });
    let lambda_max = eig.eigenvalues[order[0]].max(0.0);
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > 1e-13 * lambda_max)
        .collect();
    let mut j = DMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt();
        for row in 0..n {
            j[(row, col)] = eig.eigenvectors[(row, i)] * scale;
        }
    }
    j
}
