//! Dense complex matrices, pivoted LU, and Hessenberg reduction.
//!
//! Matrices are small (a few hundred rows at most) and dense, so everything is
//! stored row-major in a single `Vec<Complex64>`.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from already computed rows. All rows must have length `cols`.
    pub fn from_rows(rows: Vec<Vec<Complex64>>, cols: usize) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r);
        }
        Self { rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    /// `self - other`, elementwise.
    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Aᵀ x` (no conjugation).
    pub fn transpose_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    /// `A* x` (conjugate transpose).
    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `I - λ A` for a square `A`.
    pub fn identity_minus(&self, lambda: Complex64) -> CMatrix {
        assert!(self.is_square());
        let mut m = self.clone();
        m.scale(-lambda);
        for i in 0..self.rows {
            m[(i, i)] += ONE;
        }
        m
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: CMatrix,
    /// `perm[i]` is the original row that ended up in position `i`.
    perm: Vec<usize>,
    swaps_odd: bool,
}

impl LuFactor {
    pub fn new(a: &CMatrix) -> Self {
        assert!(a.is_square(), "LU of a non-square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps_odd = false;

        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].norm()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps_odd = !swaps_odd;
            }
            if pmax == 0.0 {
                // exactly singular column; leave the zero pivot in place
                continue;
            }
            let pivot = lu[(k, k)];
            let (upper, lower) = lu.data.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..(k + 1) * n];
            for row in lower.chunks_exact_mut(n) {
                let l = row[k] / pivot;
                row[k] = l;
                if l == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    row[j] -= l * pivot_row[j];
                }
            }
        }
        Self { lu, perm, swaps_odd }
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn determinant(&self) -> Complex64 {
        let prod: Complex64 = (0..self.dim()).map(|i| self.lu[(i, i)]).product();
        if self.swaps_odd {
            -prod
        } else {
            prod
        }
    }

    /// Product of the `U` diagonal, without the permutation sign.
    pub fn u_diagonal_product(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.lu[(i, i)]).product()
    }

    pub fn permutation_sign(&self) -> f64 {
        if self.swaps_odd {
            -1.0
        } else {
            1.0
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in 0..i {
                acc -= row[j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[Complex64]) -> Vec<Complex64> {
        self.solve_transposed(b, false)
    }

    /// Solves `A* x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        self.solve_transposed(b, true)
    }

    fn solve_transposed(&self, b: &[Complex64], conjugate: bool) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let c = |z: Complex64| if conjugate { z.conj() } else { z };
        // Uᵀ y = b, column-oriented so the row-major storage is walked in order
        let mut y = b.to_vec();
        for i in 0..n {
            y[i] /= c(self.lu[(i, i)]);
            let yi = y[i];
            let row = self.lu.row(i);
            for j in i + 1..n {
                y[j] -= c(row[j]) * yi;
            }
        }
        // Lᵀ z = y, unit diagonal
        for i in (0..n).rev() {
            let zi = y[i];
            let row = self.lu.row(i);
            for j in 0..i {
                y[j] -= c(row[j]) * zi;
            }
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

/// Reduces a square matrix to upper Hessenberg form by a unitary similarity
/// (Householder reflectors). Eigenvalues, and hence `det(I - λA)`, are preserved.
pub fn hessenberg(a: &CMatrix) -> CMatrix {
    assert!(a.is_square());
    let n = a.rows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let x = &mut v[..len];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = h[(k + 1 + i, k)];
        }
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
        x[0] += phase * alpha;
        let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for xi in x.iter_mut() {
            *xi /= vnorm;
        }
        // rows: H <- P H
        for j in 0..n {
            let s: Complex64 = (0..len).map(|i| x[i].conj() * h[(k + 1 + i, j)]).sum();
            if s == ZERO {
                continue;
            }
            for i in 0..len {
                h[(k + 1 + i, j)] -= 2.0 * x[i] * s;
            }
        }
        // columns: H <- H P
        for i in 0..n {
            let row = h.row_mut(i);
            let s: Complex64 = (0..len).map(|l| row[k + 1 + l] * x[l]).sum();
            if s == ZERO {
                continue;
            }
            for l in 0..len {
                row[k + 1 + l] -= 2.0 * s * x[l].conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// `det(I - λH)` and its logarithmic derivative `d/dλ log det(I - λH)` for an
/// upper Hessenberg `H`, in O(n²) via forward-mode elimination.
///
/// The logarithmic derivative is `None` when the determinant vanishes exactly.
pub fn hessenberg_det_and_log_derivative(h: &CMatrix, lambda: Complex64) -> (Complex64, Option<Complex64>) {
    let n = h.rows();
    let mut m = h.identity_minus(lambda);
    let mut dm = h.clone();
    dm.scale(-ONE);
    let mut det = ONE;
    let mut log_deriv = ZERO;
    let mut exact_zero = false;
    for k in 0..n {
        if k + 1 < n && m[(k + 1, k)].norm() > m[(k, k)].norm() {
            for j in k..n {
                m.data.swap(k * n + j, (k + 1) * n + j);
                dm.data.swap(k * n + j, (k + 1) * n + j);
            }
            det = -det;
        }
        let piv = m[(k, k)];
        let dpiv = dm[(k, k)];
        if piv == ZERO {
            exact_zero = true;
            det = ZERO;
            break;
        }
        det *= piv;
        log_deriv += dpiv / piv;
        if k + 1 < n {
            let sub = m[(k + 1, k)];
            let dsub = dm[(k + 1, k)];
            let l = sub / piv;
            let dl = (dsub * piv - sub * dpiv) / (piv * piv);
            for j in k..n {
                let mkj = m[(k, j)];
                let dmkj = dm[(k, j)];
                m[(k + 1, j)] -= l * mkj;
                dm[(k + 1, j)] -= dl * mkj + l * dmkj;
            }
        }
    }
    if exact_zero {
        (det, None)
    } else {
        (det, Some(log_deriv))
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
