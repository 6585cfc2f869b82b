//! Dense matrix spectral machinery: largest singular triplet by power
//! iteration, full thin SVD by one-sided Jacobi rotations, and projection
//! onto the spectral-norm unit ball. Everything targets small desk-scale
//! matrices and stays dependency free.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Parameter("matrix must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::IncompatibleShapes(format!(
                "matrix data length {} for {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// y = A^T x
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let w = x[i];
            for (j, &a) in row.iter().enumerate() {
                y[j] += w * a;
            }
        }
        y
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Thin SVD result with orthonormal singular vector columns.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Non-increasing singular values (all >= 0), length min(rows, cols).
    pub singular_values: Vec<f64>,
    /// Left singular vectors, rows x k.
    pub u: Matrix,
    /// Right singular vectors, cols x k.
    pub v: Matrix,
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 60;

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn power_iterate(a: &Matrix, start: Vec<f64>) -> (f64, Vec<f64>, Vec<f64>) {
    let mut v = start;
    normalize(&mut v);
    let mut sigma = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let av = a.matvec(&v);
        let new_sigma = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut w = a.matvec_t(&av);
        if normalize(&mut w) == 0.0 {
            // v is in the null space of A; caller handles the fallback.
            return (0.0, vec![0.0; a.rows], v);
        }
        v = w;
        let done = (new_sigma - sigma).abs() <= POWER_TOL * new_sigma.max(1.0);
        sigma = new_sigma;
        if done {
            break;
        }
    }
    // One Rayleigh refinement round.
    let mut u = a.matvec(&v);
    if normalize(&mut u) == 0.0 {
        return (0.0, vec![0.0; a.rows], v);
    }
    let mut v2 = a.matvec_t(&u);
    if normalize(&mut v2) > 0.0 {
        v = v2;
    }
    let av = a.matvec(&v);
    let value: f64 = u.iter().zip(&av).map(|(x, y)| x * y).sum();
    (value, u, v)
}

/// Largest singular value of `A` with unit vectors achieving `u^T A v = sigma`.
///
/// Deterministic all-ones start with an e1-perturbed fallback when the first
/// run stalls below the sigma_1 >= ||A||_F / sqrt(min(rows, cols)) floor.
pub fn spectral_norm_matrix(a: &Matrix) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    if !a.is_finite() {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let fro = a.frobenius_norm();
    if fro == 0.0 {
        let mut u = vec![0.0; a.rows];
        let mut v = vec![0.0; a.cols];
        u[0] = 1.0;
        v[0] = 1.0;
        return Ok((0.0, u, v));
    }
    let n = a.cols;
    let start: Vec<f64> = vec![1.0; n];
    let (value, u, v) = power_iterate(a, start);
    let floor = fro / (a.rows.min(a.cols) as f64).sqrt();
    if value >= floor * (1.0 - 1e-10) {
        return Ok((value, u, v));
    }
    // The all-ones start landed in a lower singular subspace; perturb.
    let mut start2: Vec<f64> = vec![1e-3; n];
    start2[0] = 1.0;
    if n > 1 {
        start2[n - 1] = -0.5;
    }
    let (value2, u2, v2) = power_iterate(a, start2);
    if value2 > value {
        Ok((value2, u2, v2))
    } else {
        Ok((value, u, v))
    }
}

/// Full thin SVD by one-sided Jacobi on the taller orientation.
pub fn thin_svd(a: &Matrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let transposed = a.rows < a.cols;
    let work = if transposed { a.transpose() } else { a.clone() };
    let (rows, cols) = (work.rows, work.cols);

    // Column-major copies of B and V so rotations touch contiguous memory.
    let mut b: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| work.at(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut col = vec![0.0; cols];
            col[j] = 1.0;
            col
        })
        .collect();

    let scale = work.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut converged = false;
    let mut max_off = 0.0f64;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        max_off = 0.0;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let dp: f64 = b[p].iter().map(|x| x * x).sum();
                let dq: f64 = b[q].iter().map(|x| x * x).sum();
                let g: f64 = b[p].iter().zip(&b[q]).map(|(x, y)| x * y).sum();
                let denom = (dp * dq).sqrt();
                let off = if denom > 0.0 { g.abs() / denom } else { 0.0 };
                max_off = max_off.max(off);
                if denom <= (JACOBI_TOL * scale).powi(2) || off <= JACOBI_TOL {
                    continue;
                }
                rotated = true;
                let zeta = (dq - dp) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let bp = b[p][i];
                    let bq = b[q][i];
                    b[p][i] = c * bp - s * bq;
                    b[q][i] = s * bp + c * bq;
                }
                for i in 0..cols {
                    let vp = v[p][i];
                    let vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged && max_off > 1e-10 {
        return Err(Error::Convergence {
            iterations: JACOBI_MAX_SWEEPS,
            residual: max_off,
        });
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = b.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let k = cols; // thin: min(rows, cols) of the original
    let mut sigma = Vec::with_capacity(k);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &j in &order {
        sigma.push(norms[j]);
        v_cols.push(v[j].clone());
        if norms[j] > scale * 1e-300 && norms[j] > 0.0 {
            u_cols.push(b[j].iter().map(|x| x / norms[j]).collect());
        } else {
            u_cols.push(vec![0.0; rows]);
        }
    }
    // Complete zero-sigma left vectors to an orthonormal set.
    for idx in 0..k {
        if sigma[idx] > 0.0 {
            continue;
        }
        'candidate: for basis in 0..rows {
            let mut cand = vec![0.0; rows];
            cand[basis] = 1.0;
            for col in u_cols.iter().take(k) {
                let dot: f64 = col.iter().zip(&cand).map(|(a, b)| a * b).sum();
                for (c, &o) in cand.iter_mut().zip(col.iter()) {
                    *c -= dot * o;
                }
            }
            if normalize(&mut cand) > 1e-8 {
                u_cols[idx] = cand;
                break 'candidate;
            }
        }
    }

    let pack = |cols_vec: &[Vec<f64>], nrows: usize| -> Matrix {
        let mut m = Matrix::zeros(nrows, cols_vec.len());
        for (j, col) in cols_vec.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    };
    let u = pack(&u_cols, rows);
    let vv = pack(&v_cols, cols);
    if transposed {
        Ok(SvdResult {
            singular_values: sigma,
            u: vv,
            v: u,
        })
    } else {
        Ok(SvdResult {
            singular_values: sigma,
            u,
            v: vv,
        })
    }
}

/// Nearest matrix in Frobenius distance with spectral norm at most one:
/// SVD with singular values clipped at 1. Returns the input unchanged when
/// it is already inside the ball.
pub fn project_spectral_ball(a: &Matrix) -> Result<Matrix> {
    let svd = thin_svd(a)?;
    if svd.singular_values.first().copied().unwrap_or(0.0) <= 1.0 {
        return Ok(a.clone());
    }
    let k = svd.singular_values.len();
    let mut out = Matrix::zeros(a.rows, a.cols);
    for r in 0..k {
        let s = svd.singular_values[r].min(1.0);
        if s == 0.0 {
            continue;
        }
        for i in 0..a.rows {
            let ui = svd.u.at(i, r) * s;
            for j in 0..a.cols {
                out.data[i * a.cols + j] += ui * svd.v.at(j, r);
            }
        }
    }
    Ok(out)
}

/// Matrix nuclear norm (sum of singular values).
pub fn nuclear_norm_matrix(a: &Matrix) -> Result<f64> {
    Ok(thin_svd(a)?.singular_values.iter().sum())
}
