//! Dense real Gauss-Jordan elimination with partial pivoting.

use crate::error::Inconsistent;

pub const DEFAULT_PIVOT_TOL: f64 = 1e-9;

/// Residual allowance for a solution, relative to `1 + max|rhs|`.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn with_width(ncols: usize) -> Self {
        DenseMatrix::zeros(0, ncols)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(ncols: usize, rows: &[Vec<f64>]) -> Self {
        let mut m = DenseMatrix::with_width(ncols);
        for r in rows {
            m.push_row(r);
        }
        m
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.ncols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.nrows += 1;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).iter().zip(y).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// `[matrix | rhs]` over the reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    pub pivot_tol: f64,
}

impl RealSystem {
    pub fn new(matrix: DenseMatrix, rhs: Vec<f64>) -> Self {
        assert_eq!(matrix.nrows(), rhs.len(), "rhs length must equal row count");
        RealSystem {
            matrix,
            rhs,
            pivot_tol: DEFAULT_PIVOT_TOL,
        }
    }

    pub fn with_pivot_tol(mut self, tol: f64) -> Self {
        assert!(tol > 0.0, "pivot tolerance must be positive");
        self.pivot_tol = tol;
        self
    }

    pub fn empty(width: usize) -> Self {
        RealSystem::new(DenseMatrix::with_width(width), Vec::new())
    }

    /// Largest absolute residual `|M y - b|`.
    pub fn residual(&self, y: &[f64]) -> f64 {
        self.matrix
            .mul_vec(y)
            .iter()
            .zip(&self.rhs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn residual_bound(&self) -> f64 {
        let scale = self.rhs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        CONSISTENCY_TOL * (1.0 + scale)
    }
}

struct Reduced {
    rhs: Vec<f64>,
    pivots: Vec<usize>,
}

/// Gauss-Jordan with maximum-magnitude pivot per column. Pivots at or below
/// `tol * max|M|` count as zero. Pivot rows are normalized to 1.
fn gauss_jordan(m: &DenseMatrix, rhs: Option<&[f64]>, tol: f64, full: bool) -> Reduced {
    let mut work = m.clone();
    let mut b = rhs
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| vec![0.0; m.nrows()]);
    let (nrows, ncols) = (m.nrows(), m.ncols());
    let threshold = tol * m.max_abs();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let (p, best) = (rank..nrows)
            .map(|r| (r, work[(r, col)].abs()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= threshold {
            continue;
        }
        if p != rank {
            for k in 0..ncols {
                work.data.swap(p * ncols + k, rank * ncols + k);
            }
            b.swap(p, rank);
        }
        let inv = 1.0 / work[(rank, col)];
        for k in col..ncols {
            work[(rank, k)] *= inv;
        }
        work[(rank, col)] = 1.0;
        b[rank] *= inv;

        let pivot_row: Vec<f64> = work.row(rank)[col..].to_vec();
        let pivot_rhs = b[rank];
        let lo = if full { 0 } else { rank + 1 };
        for r in lo..nrows {
            if r == rank {
                continue;
            }
            let factor = work[(r, col)];
            if factor == 0.0 {
                continue;
            }
            let row = &mut work.data[r * ncols + col..(r + 1) * ncols];
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= factor * p;
            }
            row[0] = 0.0;
            b[r] -= factor * pivot_rhs;
        }
        pivots.push(col);
        rank += 1;
    }
    Reduced { rhs: b, pivots }
}

/// Numerical rank under a relative pivot tolerance.
pub fn real_rank(m: &DenseMatrix, pivot_tol: f64) -> usize {
    assert!(pivot_tol > 0.0, "pivot tolerance must be positive");
    gauss_jordan(m, None, pivot_tol, false).pivots.len()
}

/// Finds a solution with every free variable set to 0, or reports the system
/// inconsistent when no candidate meets the residual bound.
pub fn real_solve(sys: &RealSystem) -> Result<Vec<f64>, Inconsistent> {
    let reduced = gauss_jordan(&sys.matrix, Some(&sys.rhs), sys.pivot_tol, true);
    let bound = sys.residual_bound();
    let rank = reduced.pivots.len();
    if reduced.rhs[rank..].iter().any(|r| r.abs() > bound) {
        return Err(Inconsistent);
    }
    let mut y = vec![0.0; sys.matrix.ncols()];
    for (r, &col) in reduced.pivots.iter().enumerate() {
        y[col] = reduced.rhs[r];
    }
    if sys.residual(&y) > bound {
        return Err(Inconsistent);
    }
    Ok(y)
}
