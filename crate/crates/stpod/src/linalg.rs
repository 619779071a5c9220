//! Dense linear-algebra helpers shared by the reduction and solver modules.

use nalgebra::{DMatrix, DVector};

use crate::{Result, StpodError};

/// Full singular value decomposition m = v · diag(sigma) · uᵀ with square
/// orthogonal factors on both sides.
///
/// `sigma` has min(nrows, ncols) entries sorted nonincreasing; `v` is
/// nrows×nrows and `u` is ncols×ncols. Columns beyond the thin rank are a
/// deterministic orthonormal completion. Singular-vector signs are
/// canonicalized pairwise so repeated runs produce identical output.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub v: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub u: DMatrix<f64>,
}

impl FullSvd {
    /// Computed by cyclic one-sided Jacobi rotations. Golub-Kahan
    /// implementations (including nalgebra's, observed on 0.35) can return
    /// invalid singular values for rank-deficient inputs, and zeroed columns
    /// make such matrices routine here; Jacobi is unconditionally robust and
    /// keeps small singular vectors numerically orthogonal.
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let (nr, nc) = m.shape();
        let k = nr.min(nc);
        // run on the tall orientation; columns of the working matrix carry
        // the left vectors of that orientation
        let transposed = nr < nc;
        let tall = if transposed { m.transpose() } else { m.clone() };
        let (g, sigma_raw, rot) = one_sided_jacobi(tall)?;

        // sort nonincreasing, stable on ties
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| {
            sigma_raw[j]
                .partial_cmp(&sigma_raw[i])
                .expect("finite singular values")
                .then(i.cmp(&j))
        });

        let mut sigma = DVector::zeros(k);
        let mut v = DMatrix::zeros(nr, k);
        let mut u = DMatrix::zeros(nc, k);
        for (col, &i) in order.iter().enumerate() {
            sigma[col] = sigma_raw[i];
            let (long, short) = if transposed {
                (u.column_mut(col), v.column_mut(col))
            } else {
                (v.column_mut(col), u.column_mut(col))
            };
            let mut long = long;
            let mut short = short;
            if sigma_raw[i] > 0.0 {
                for r in 0..long.len() {
                    long[r] = g[(r, i)] / sigma_raw[i];
                }
            }
            for r in 0..short.len() {
                short[r] = rot[(r, i)];
            }
        }

        // canonical sign: largest-magnitude entry of each left vector positive,
        // flipping the paired right vector with it keeps the reconstruction
        for col in 0..k {
            if sigma[col] == 0.0 {
                continue;
            }
            let vc = v.column(col);
            let mut imax = 0;
            for r in 1..nr {
                if vc[r].abs() > vc[imax].abs() {
                    imax = r;
                }
            }
            if vc[imax] < 0.0 {
                for r in 0..nr {
                    v[(r, col)] = -v[(r, col)];
                }
                for r in 0..nc {
                    u[(r, col)] = -u[(r, col)];
                }
            }
        }

        // the rotation side is a complete orthogonal set even where σ = 0;
        // the normalized-column side carries no information there, so drop
        // those columns and complete the basis deterministically
        let rank = (0..k).filter(|&i| sigma[i] > 0.0).count();
        let (v_full, u_full) = if transposed {
            (v, complete_orthonormal(u.columns(0, rank).into_owned()))
        } else {
            (complete_orthonormal(v.columns(0, rank).into_owned()), u)
        };
        Ok(FullSvd { v: v_full, sigma, u: u_full })
    }

    /// sigma[i] with zero padding past min(nrows, ncols).
    pub fn sigma_padded(&self, i: usize) -> f64 {
        if i < self.sigma.len() {
            self.sigma[i]
        } else {
            0.0
        }
    }
}

/// Cyclic one-sided Jacobi on a tall matrix (nrows ≥ ncols): rotates column
/// pairs until all are mutually orthogonal to machine precision. Returns the
/// rotated matrix G = A·J (columns are unnormalized left vectors), the
/// column norms (singular values), and the accumulated rotations J (the
/// right singular vectors).
fn one_sided_jacobi(mut g: DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let n = g.ncols();
    let mut rot = DMatrix::identity(n, n);
    let tol = 2.0 * f64::EPSILON;
    let max_sweeps = 60;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for r in 0..g.nrows() {
                    let gp = g[(r, p)];
                    let gq = g[(r, q)];
                    app += gp * gp;
                    aqq += gq * gq;
                    apq += gp * gq;
                }
                if !(app.is_finite() && aqq.is_finite() && apq.is_finite()) {
                    return Err(StpodError::SvdFailed);
                }
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for r in 0..g.nrows() {
                    let gp = g[(r, p)];
                    let gq = g[(r, q)];
                    g[(r, p)] = cs * gp - sn * gq;
                    g[(r, q)] = sn * gp + cs * gq;
                }
                for r in 0..n {
                    let vp = rot[(r, p)];
                    let vq = rot[(r, q)];
                    rot[(r, p)] = cs * vp - sn * vq;
                    rot[(r, q)] = sn * vp + cs * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(StpodError::SvdFailed);
    }
    let sigma: Vec<f64> = (0..n).map(|c| g.column(c).norm()).collect();
    Ok((g, sigma, rot))
}

/// Extend a matrix of orthonormal columns to a square orthogonal matrix by
/// orthogonalizing canonical basis vectors against the accepted columns.
/// Deterministic: candidates are taken in index order and kept when the
/// residual stays above a fixed threshold.
pub fn complete_orthonormal(partial: DMatrix<f64>) -> DMatrix<f64> {
    let n = partial.nrows();
    let k = partial.ncols();
    if k == n {
        return partial;
    }
    assert!(k < n, "more columns than rows");
    let mut q = DMatrix::zeros(n, n);
    q.view_mut((0, 0), (n, k)).copy_from(&partial);
    let mut filled = k;
    for cand in 0..n {
        if filled == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[cand] = 1.0;
        // two rounds of classical Gram-Schmidt against everything accepted so far
        for _ in 0..2 {
            for c in 0..filled {
                let qc = q.column(c);
                let dot = qc.dot(&v);
                v.axpy(-dot, &qc.clone_owned(), 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= norm;
            q.column_mut(filled).copy_from(&v);
            filled += 1;
        }
    }
    assert_eq!(filled, n, "orthonormal completion failed");
    q
}

/// Dense LU with partial pivoting, blocked so the trailing updates run
/// through the matrix-multiply kernel. The reduced systems reach a few
/// thousand unknowns, where the unblocked column-by-column factorization is
/// memory-bound and several times slower.
#[derive(Debug, Clone)]
pub struct PartialPivLu {
    lu: DMatrix<f64>,
    ipiv: Vec<usize>,
}

const LU_PANEL: usize = 64;

impl PartialPivLu {
    /// Factor P·A = L·U. Fails only on an exactly zero pivot; tiny pivots
    /// factor through, matching the solve-anyway policy for near-singular
    /// reduced systems.
    pub fn new(mut a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "matrix must be square");
        let mut ipiv: Vec<usize> = (0..n).collect();
        let mut k = 0;
        while k < n {
            let nb = LU_PANEL.min(n - k);
            // unblocked factorization of the panel columns k..k+nb
            for j in k..k + nb {
                let mut piv = j;
                let mut best = a[(j, j)].abs();
                for i in j + 1..n {
                    let v = a[(i, j)].abs();
                    if v > best {
                        best = v;
                        piv = i;
                    }
                }
                if best == 0.0 {
                    return Err(StpodError::SingularSystem(format!(
                        "zero pivot at column {j}"
                    )));
                }
                if piv != j {
                    a.swap_rows(piv, j);
                }
                ipiv[j] = piv;
                let d = a[(j, j)];
                for i in j + 1..n {
                    a[(i, j)] /= d;
                }
                for c in j + 1..k + nb {
                    let ujc = a[(j, c)];
                    if ujc != 0.0 {
                        for i in j + 1..n {
                            let lij = a[(i, j)];
                            a[(i, c)] -= lij * ujc;
                        }
                    }
                }
            }
            if k + nb < n {
                // U block row: solve the unit-lower panel against the right part
                for j in k..k + nb {
                    for i in k..j {
                        let lji = a[(j, i)];
                        if lji != 0.0 {
                            for c in k + nb..n {
                                let v = a[(i, c)];
                                a[(j, c)] -= lji * v;
                            }
                        }
                    }
                }
                // trailing update through gemm
                let m = n - k - nb;
                let p = n - k - nb;
                let l21 = a.view((k + nb, k), (m, nb)).into_owned();
                let u12 = a.view((k, k + nb), (nb, p)).into_owned();
                a.view_mut((k + nb, k + nb), (m, p)).gemm(-1.0, &l21, &u12, 1.0);
            }
            k += nb;
        }
        Ok(PartialPivLu { lu: a, ipiv })
    }

    /// Solve A·x = b.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.lu.nrows();
        let mut x = b.clone();
        for i in 0..n {
            if self.ipiv[i] != i {
                x.swap_rows(i, self.ipiv[i]);
            }
        }
        // forward substitution with unit-lower L
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for i in j + 1..n {
                    x[i] -= self.lu[(i, j)] * xj;
                }
            }
        }
        // back substitution with U
        for j in (0..n).rev() {
            x[j] /= self.lu[(j, j)];
            let xj = x[j];
            if xj != 0.0 {
                for i in 0..j {
                    x[i] -= self.lu[(i, j)] * xj;
                }
            }
        }
        x
    }

    /// Solve Aᵀ·x = b (Aᵀ = Uᵀ·Lᵀ·P).
    pub fn solve_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.lu.nrows();
        let mut x = b.clone();
        // forward substitution with Uᵀ (lower triangular)
        for j in 0..n {
            x[j] /= self.lu[(j, j)];
            let xj = x[j];
            if xj != 0.0 {
                for i in j + 1..n {
                    x[i] -= self.lu[(j, i)] * xj;
                }
            }
        }
        // back substitution with Lᵀ (unit upper triangular)
        for j in (0..n).rev() {
            let xj = x[j];
            if xj != 0.0 {
                for i in 0..j {
                    x[i] -= self.lu[(j, i)] * xj;
                }
            }
        }
        for i in (0..n).rev() {
            if self.ipiv[i] != i {
                x.swap_rows(i, self.ipiv[i]);
            }
        }
        x
    }
}

/// Hager-style estimate of the 1-norm condition number of a factored matrix.
///
/// `solve` applies A⁻¹ and `solve_t` applies A⁻ᵀ; `a_norm_1` is the 1-norm of
/// A itself. A handful of iterations gives a reliable order-of-magnitude
/// estimate, which is all the ill-conditioning diagnostics need.
pub fn cond_estimate_1<S, T>(n: usize, a_norm_1: f64, mut solve: S, mut solve_t: T) -> f64
where
    S: FnMut(&DVector<f64>) -> DVector<f64>,
    T: FnMut(&DVector<f64>) -> DVector<f64>,
{
    if n == 0 {
        return 0.0;
    }
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let y = solve(&x);
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = DVector::from_iterator(n, y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }));
        let z = solve_t(&xi);
        let (mut jmax, mut zmax) = (0, 0.0);
        for (j, &v) in z.iter().enumerate() {
            if v.abs() > zmax {
                zmax = v.abs();
                jmax = j;
            }
        }
        if zmax <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[jmax] = 1.0;
    }
    a_norm_1 * est
}

/// 1-norm (maximum absolute column sum) of a dense matrix.
pub fn norm_1(m: &DMatrix<f64>) -> f64 {
    let mut best: f64 = 0.0;
    for c in 0..m.ncols() {
        let s: f64 = m.column(c).iter().map(|v| v.abs()).sum();
        best = best.max(s);
    }
    best
}
