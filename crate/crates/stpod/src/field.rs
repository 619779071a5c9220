//! Coefficient-matrix representation of functions in the space-time product space.
//!
//! A function x(τ, ξ) = Σ_j Σ_i X[i][j] ν_i(ξ) ψ_j(τ) is stored as its q×s
//! coefficient matrix X, column j holding the spatial coefficients of time
//! basis function j. Norms are evaluated through the weighted Frobenius
//! representations ‖x‖ = ‖L_Yᵀ X L_S‖_F and ‖x_t‖ = ‖L_Yᵀ X J_S‖_F.

use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DMatrix;

use crate::grid::{BoundaryMode, GramianSet, Grid1D};
use crate::{Result, StpodError};

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub x: DMatrix<f64>,
    pub time_grid: Grid1D,
    pub space_grid: Grid1D,
}

impl CoefficientField {
    pub fn new(x: DMatrix<f64>, time_grid: Grid1D, space_grid: Grid1D) -> Result<Self> {
        if x.nrows() != space_grid.n_active() || x.ncols() != time_grid.n_active() {
            return Err(StpodError::DimensionMismatch(format!(
                "coefficient matrix is {}x{}, grids expect {}x{}",
                x.nrows(),
                x.ncols(),
                space_grid.n_active(),
                time_grid.n_active()
            )));
        }
        Ok(CoefficientField { x, time_grid, space_grid })
    }

    pub fn zeros(time_grid: Grid1D, space_grid: Grid1D) -> Self {
        let x = DMatrix::zeros(space_grid.n_active(), time_grid.n_active());
        CoefficientField { x, time_grid, space_grid }
    }

    /// Replace the coefficient matrix, keeping the grids.
    pub fn with_matrix(&self, x: DMatrix<f64>) -> Result<Self> {
        Self::new(x, self.time_grid.clone(), self.space_grid.clone())
    }

    fn check_gramians(&self, g: &GramianSet) -> Result<()> {
        let (q, s) = g.dims();
        if self.x.nrows() != q || self.x.ncols() != s {
            return Err(StpodError::DimensionMismatch(format!(
                "field is {}x{}, Gramians expect {q}x{s}",
                self.x.nrows(),
                self.x.ncols()
            )));
        }
        Ok(())
    }

    /// Weighted coefficient matrix L_Yᵀ X L_S whose SVD drives the reduction.
    pub fn weighted(&self, g: &GramianSet) -> Result<DMatrix<f64>> {
        self.check_gramians(g)?;
        Ok(g.l_y.transpose() * &self.x * &g.l_s)
    }

    /// L²(0,T; L²(Ω)) norm of the represented function.
    pub fn sty_norm(&self, g: &GramianSet) -> Result<f64> {
        Ok(self.weighted(g)?.norm())
    }

    /// L² norm of the time derivative of the represented function.
    pub fn sty_dt_norm(&self, g: &GramianSet) -> Result<f64> {
        self.check_gramians(g)?;
        Ok((g.l_y.transpose() * &self.x * &g.j_s).norm())
    }

    /// Point evaluation of the P1⊗P1 expansion; exact nodal interpolation at
    /// grid nodes and zero on the Dirichlet boundary.
    pub fn evaluate(&self, tau: f64, xi: f64) -> Result<f64> {
        let tg = &self.time_grid;
        let xg = &self.space_grid;
        let tol_t = 1e-12 * (tg.b - tg.a);
        let tol_x = 1e-12 * (xg.b - xg.a);
        if tau < tg.a - tol_t || tau > tg.b + tol_t || xi < xg.a - tol_x || xi > xg.b + tol_x {
            return Err(StpodError::OutOfDomain { tau, xi });
        }
        let tau = tau.clamp(tg.a, tg.b);
        let xi = xi.clamp(xg.a, xg.b);
        let kt = tg.cell_of(tau);
        let kx = xg.cell_of(xi);
        // snap bit-identical node hits so nodal interpolation is exact
        let local = |grid: &Grid1D, k: usize, p: f64| -> f64 {
            if p == grid.node(k) {
                0.0
            } else if p == grid.node(k + 1) {
                1.0
            } else {
                ((p - grid.node(k)) / grid.h).clamp(0.0, 1.0)
            }
        };
        let rt = local(tg, kt, tau);
        let rx = local(xg, kx, xi);
        let tvals = [(kt, 1.0 - rt), (kt + 1, rt)];
        let xvals = [(kx, 1.0 - rx), (kx + 1, rx)];
        let mut total = 0.0;
        for &(tn, tv) in &tvals {
            for &(xn, xv) in &xvals {
                if let Some((i, j)) = self.active_pair(xn, tn) {
                    total += self.x[(i, j)] * tv * xv;
                }
            }
        }
        Ok(total)
    }

    fn active_pair(&self, space_node: usize, time_node: usize) -> Option<(usize, usize)> {
        let i = match self.space_grid.boundary_mode {
            BoundaryMode::AllNodes => space_node,
            BoundaryMode::ZeroDirichlet => {
                if space_node == 0 || space_node == self.space_grid.n_nodes - 1 {
                    return None;
                }
                space_node - 1
            }
        };
        let j = match self.time_grid.boundary_mode {
            BoundaryMode::AllNodes => time_node,
            BoundaryMode::ZeroDirichlet => {
                if time_node == 0 || time_node == self.time_grid.n_nodes - 1 {
                    return None;
                }
                time_node - 1
            }
        };
        Some((i, j))
    }

    /// Copy with the first coefficient column set to zero.
    pub fn zero_first_column(&self) -> Self {
        let mut x = self.x.clone();
        for i in 0..x.nrows() {
            x[(i, 0)] = 0.0;
        }
        CoefficientField {
            x,
            time_grid: self.time_grid.clone(),
            space_grid: self.space_grid.clone(),
        }
    }

    /// Coefficient-wise difference with another field on the same grids.
    pub fn difference(&self, other: &CoefficientField) -> Result<CoefficientField> {
        if self.x.shape() != other.x.shape() {
            return Err(StpodError::DimensionMismatch(format!(
                "fields are {:?} and {:?}",
                self.x.shape(),
                other.x.shape()
            )));
        }
        Ok(CoefficientField {
            x: &self.x - &other.x,
            time_grid: self.time_grid.clone(),
            space_grid: self.space_grid.clone(),
        })
    }

    /// Serialize as CSV: one header row `q,s,time_a,time_b,time_nodes,
    /// time_mode,space_a,space_b,space_nodes,space_mode`, then q rows of s
    /// values. Floats carry 17 significant digits so the round trip is
    /// bit-exact.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let tg = &self.time_grid;
        let xg = &self.space_grid;
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{},{}",
            self.x.nrows(),
            self.x.ncols(),
            tg.a,
            tg.b,
            tg.n_nodes,
            tg.boundary_mode.as_str(),
            xg.a,
            xg.b,
            xg.n_nodes,
            xg.boundary_mode.as_str()
        )?;
        for i in 0..self.x.nrows() {
            let row: Vec<String> = (0..self.x.ncols()).map(|j| format!("{:.16e}", self.x[(i, j)])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, path: &str) -> Result<Self> {
        let malformed = |reason: &str| StpodError::Malformed {
            path: path.to_string(),
            reason: reason.to_string(),
        };
        let mut lines = BufReader::new(r).lines();
        let header = lines.next().ok_or_else(|| malformed("empty file"))??;
        let parts: Vec<&str> = header.trim().split(',').collect();
        if parts.len() != 10 {
            return Err(malformed("header must have 10 fields"));
        }
        let q: usize = parts[0].parse().map_err(|_| malformed("bad q"))?;
        let s: usize = parts[1].parse().map_err(|_| malformed("bad s"))?;
        let ta: f64 = parts[2].parse().map_err(|_| malformed("bad time_a"))?;
        let tb: f64 = parts[3].parse().map_err(|_| malformed("bad time_b"))?;
        let tn: usize = parts[4].parse().map_err(|_| malformed("bad time_nodes"))?;
        let tmode = BoundaryMode::parse(parts[5]).map_err(|_| malformed("bad time_mode"))?;
        let xa: f64 = parts[6].parse().map_err(|_| malformed("bad space_a"))?;
        let xb: f64 = parts[7].parse().map_err(|_| malformed("bad space_b"))?;
        let xn: usize = parts[8].parse().map_err(|_| malformed("bad space_nodes"))?;
        let xmode = BoundaryMode::parse(parts[9]).map_err(|_| malformed("bad space_mode"))?;
        let time_grid = Grid1D::uniform(ta, tb, tn, tmode)?;
        let space_grid = Grid1D::uniform(xa, xb, xn, xmode)?;
        let mut x = DMatrix::zeros(q, s);
        for i in 0..q {
            let line = lines.next().ok_or_else(|| malformed("missing data row"))??;
            let vals: Vec<&str> = line.trim().split(',').collect();
            if vals.len() != s {
                return Err(malformed("wrong number of columns"));
            }
            for (j, v) in vals.iter().enumerate() {
                x[(i, j)] = v.parse().map_err(|_| malformed("bad float"))?;
            }
        }
        CoefficientField::new(x, time_grid, space_grid)
    }
}
