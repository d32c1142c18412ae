//! Dense linear algebra at desk scale: LU with partial pivoting and
//! Householder QR least squares. Kept in-module for bit-reproducible runs.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Columns given as slices of length `rows`.
    pub fn from_cols(rows: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularMatrix;

/// Solve `a x = b` by LU with partial pivoting. Fails only on an exactly
/// zero pivot after row exchange.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, SingularMatrix> {
    let n = a.rows;
    assert_eq!(a.cols, n, "lu_solve needs a square matrix");
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x: Vec<f64> = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[(col, col)].abs();
        for row in col + 1..n {
            let v = m[(row, col)].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Err(SingularMatrix);
        }
        if pivot != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot, j)];
                m[(pivot, j)] = tmp;
            }
            x.swap(col, pivot);
        }
        let d = m[(col, col)];
        for row in col + 1..n {
            let factor = m[(row, col)] / d;
            if factor != 0.0 {
                for j in col + 1..n {
                    m[(row, j)] -= factor * m[(col, j)];
                }
                x[row] -= factor * x[col];
            }
            m[(row, col)] = 0.0;
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in col + 1..n {
            s -= m[(col, j)] * x[j];
        }
        x[col] = s / m[(col, col)];
    }
    Ok(x)
}

/// Least-squares solution of `min ||rhs - a gamma||_2` by Householder QR,
/// columns processed left to right. A dependent column (tiny diagonal)
/// truncates the factorisation there: trailing coefficients are zero and the
/// number of columns actually used is returned alongside the solution.
pub fn qr_least_squares(a: &Matrix, rhs: &[f64]) -> (Vec<f64>, usize) {
    let n = a.rows;
    let m = a.cols;
    assert_eq!(rhs.len(), n);
    let mut work = a.clone();
    let mut y: Vec<f64> = rhs.to_vec();
    let max_rank = n.min(m);

    // column scale for the rank cutoff
    let mut scale = 0.0f64;
    for j in 0..m {
        let norm = (0..n)
            .map(|i| work[(i, j)] * work[(i, j)])
            .sum::<f64>()
            .sqrt();
        scale = scale.max(norm);
    }
    let cutoff = 1e-13 * scale.max(f64::MIN_POSITIVE);

    let mut rank = 0;
    let mut diag = vec![0.0f64; max_rank];
    for j in 0..max_rank {
        // Householder vector for column j, rows j..
        let mut alpha = (j..n)
            .map(|i| work[(i, j)] * work[(i, j)])
            .sum::<f64>()
            .sqrt();
        if alpha <= cutoff {
            break; // dependent column: truncate
        }
        if work[(j, j)] > 0.0 {
            alpha = -alpha;
        }
        let mut v = vec![0.0f64; n - j];
        v[0] = work[(j, j)] - alpha;
        for i in j + 1..n {
            v[i - j] = work[(i, j)];
        }
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        if vtv == 0.0 {
            break;
        }
        // apply I - 2 v v^T / (v^T v) to the remaining columns and the rhs
        for col in j..m {
            let dot: f64 = (j..n).map(|i| v[i - j] * work[(i, col)]).sum();
            let f = 2.0 * dot / vtv;
            for i in j..n {
                work[(i, col)] -= f * v[i - j];
            }
        }
        let dot: f64 = (j..n).map(|i| v[i - j] * y[i]).sum();
        let f = 2.0 * dot / vtv;
        for i in j..n {
            y[i] -= f * v[i - j];
        }
        diag[j] = alpha;
        rank = j + 1;
    }

    // back-substitute on the leading rank x rank triangle
    let mut gamma = vec![0.0f64; m];
    for j in (0..rank).rev() {
        let mut s = y[j];
        for col in j + 1..rank {
            s -= work[(j, col)] * gamma[col];
        }
        gamma[j] = s / diag[j];
    }
    (gamma, rank)
}
