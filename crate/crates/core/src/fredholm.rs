//! Fredholm determinants, first Fredholm minors, and characteristic values.
//!
//! Two independent routes to `D_{T_n}(λ)`:
//!
//! * the determinant series, whose m-fold integrals of `m×m` kernel
//!   determinants are evaluated with the classical coefficient recursion
//!
//!   ```text
//!   c_0 = 1,  b_0 = K
//!   c_m = (1/m) ∫ b_{m−1}(x,x) dx
//!   b_m(s,t) = c_m K(s,t) − ∫ K(s,x) b_{m−1}(x,t) dx
//!   D(λ) = Σ (−λ)^m c_m,   D(s,t|λ) = Σ (−λ)^m b_m(s,t)
//!   ```
//!
//!   where `c_m` is the m-th series coefficient divided by `m!`. With Nyström
//!   quadrature this is exactly the symmetrized product-rule quadrature of the
//!   m-dimensional integrals, at O(m·N³) instead of O(N^m);
//! * `det(I − λA)` of the Nyström matrix via pivoted LU.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Discretization;
use crate::kernel::{subkernel_at, KernelSpec, TruncationScheme, Variant};
use crate::linalg::{hessenberg, hessenberg_det_and_log_derivative, CMatrix, LuFactor};
use crate::nystrom::NystromMatrix;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest supported series order.
pub const MAX_SERIES_ORDER: usize = 8;
/// Default ceiling on the node count of the series workspace.
pub const DEFAULT_NODE_CEILING: usize = 2048;
pub const NEWTON_BUDGET: usize = 50;
pub const DEDUP_TOL: f64 = 1e-6;
pub const ZERO_TOL: f64 = 1e-8;

/// `|D(λ)| < 1e−10·(1 + |λ|)`: no resolvent kernel is built at such λ.
pub fn is_numerically_characteristic(det: Complex64, lambda: Complex64) -> bool {
    det.norm() < 1e-10 * (1.0 + lambda.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetPath {
    Series,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetResult {
    pub value: Complex64,
    pub path: DetPath,
    /// Highest series order summed; zero on the matrix path.
    pub terms_used: usize,
    /// Hadamard bound on the omitted series tail; zero on the matrix path.
    pub tail_bound: f64,
}

/// Series coefficients of `D_{T_n}` on a grid over `𝕀_n`.
#[derive(Debug, Clone)]
pub struct FredholmSeries {
    kernel: KernelSpec,
    tau: f64,
    nystrom: NystromMatrix,
    /// `c_0 ..= c_{m_max}`
    coefficients: Vec<Complex64>,
    kernel_sup: f64,
    volume: f64,
}

impl FredholmSeries {
    pub fn new(
        k: &KernelSpec,
        trunc: &TruncationScheme,
        n: usize,
        grid: &Discretization,
        m_max: usize,
        node_ceiling: usize,
    ) -> Result<Self> {
        if !(1..=MAX_SERIES_ORDER).contains(&m_max) {
            return Err(Error::invalid(
                "m_max",
                format!("must lie in 1..={MAX_SERIES_ORDER}, got {m_max}"),
            ));
        }
        if grid.len() > node_ceiling {
            return Err(Error::BudgetExceeded {
                nodes: grid.len(),
                ceiling: node_ceiling,
            });
        }
        let tau = trunc.tau(n);
        let nystrom = NystromMatrix::assemble(k, trunc, n, Variant::Plain, grid);
        let a = nystrom.entries();
        let w = grid.weights();
        let dim = grid.len();
        // b_0 at node pairs: K_n(x_i, x_j) = A_ij / w_j
        let mut b = CMatrix::from_fn(dim, dim, |i, j| a[(i, j)] / w[j]);
        let kernel_nodes = b.clone();
        let kernel_sup = kernel_nodes.max_abs();
        let mut coefficients = vec![ONE];
        for m in 1..=m_max {
            let c_m: Complex64 = (0..dim).map(|i| b[(i, i)] * w[i]).sum::<Complex64>() / m as f64;
            coefficients.push(c_m);
            if m < m_max {
                let mut next = a.matmul(&b);
                next.scale(-ONE);
                for i in 0..dim {
                    for (dst, kv) in next.row_mut(i).iter_mut().zip(kernel_nodes.row(i)) {
                        *dst += c_m * kv;
                    }
                }
                b = next;
            }
        }
        Ok(Self {
            kernel: k.clone(),
            tau,
            nystrom,
            coefficients,
            kernel_sup,
            volume: w.iter().sum(),
        })
    }

    pub fn m_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `c_m`, the m-th series coefficient divided by `m!`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn determinant(&self, lambda: Complex64) -> DetResult {
        let mut value = Complex64::new(0.0, 0.0);
        let mut power = ONE;
        for c in &self.coefficients {
            value += power * c;
            power *= -lambda;
        }
        DetResult {
            value,
            path: DetPath::Series,
            terms_used: self.m_max(),
            tail_bound: hadamard_tail(self.m_max(), lambda.norm() * self.kernel_sup * self.volume),
        }
    }

    /// First Fredholm minor `D_{T_n}(s,t|λ)` truncated at `m_max`.
    pub fn minor(&self, lambda: Complex64, s: f64, t: f64) -> Complex64 {
        let grid = self.nystrom.grid();
        let a = self.nystrom.entries();
        let x = grid.nodes();
        let w = grid.weights();
        let kn = |p: f64, q: f64| subkernel_at(&self.kernel, self.tau, Variant::Plain, p, q);
        // column b_m(x_k, t) and the (s, ·) row needed to close each term
        let k_col: Vec<Complex64> = x.iter().map(|&xi| kn(xi, t)).collect();
        let k_row_w: Vec<Complex64> = x.iter().zip(w).map(|(&xj, &wj)| kn(s, xj) * wj).collect();
        let k_st = kn(s, t);

        let mut col = k_col.clone();
        let mut total = k_st;
        let mut power = ONE;
        for c_m in &self.coefficients[1..] {
            power *= -lambda;
            let b_st = c_m * k_st - dot(&k_row_w, &col);
            total += power * b_st;
            let a_col = a.matvec(&col);
            col = k_col.iter().zip(&a_col).map(|(kc, ac)| c_m * kc - ac).collect();
        }
        total
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ_{m > m_max} m^{m/2} x^m / m!` with `x = |λ|·sup|K|·vol`, saturating at
/// `f64::MAX`.
pub fn hadamard_tail(m_max: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    let mut ln_fact: f64 = (1..=m_max).map(|j| (j as f64).ln()).sum();
    let mut sum = 0.0f64;
    let mut prev = f64::NEG_INFINITY;
    for m in m_max + 1..m_max + 1000000 {
        let mf = m as f64;
        ln_fact += mf.ln();
        let ln_term = mf * lx + 0.5 * mf * mf.ln() - ln_fact;
        if ln_term > 709.0 {
            return f64::MAX;
        }
        let term = ln_term.exp();
        sum += term;
        if !sum.is_finite() {
            return f64::MAX;
        }
        // terms are log-concave in m; stop once past the peak and negligible
        if ln_term < prev && term <= 1e-17 * sum {
            break;
        }
        prev = ln_term;
    }
    sum
}

/// Partial sum of the determinant series through `m_max`.
pub fn det_series(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    n: usize,
    lambda: Complex64,
    grid: &Discretization,
    m_max: usize,
) -> Result<DetResult> {
    Ok(FredholmSeries::new(k, trunc, n, grid, m_max, DEFAULT_NODE_CEILING)?.determinant(lambda))
}

/// Partial sum of the first-minor series at `(s, t)` through `m_max`.
#[allow(clippy::too_many_arguments)]
pub fn minor_series(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    n: usize,
    lambda: Complex64,
    s: f64,
    t: f64,
    grid: &Discretization,
    m_max: usize,
) -> Result<Complex64> {
    Ok(FredholmSeries::new(k, trunc, n, grid, m_max, DEFAULT_NODE_CEILING)?.minor(lambda, s, t))
}

/// `det(I − λA)` by pivoted LU.
pub fn det_matrix(m: &NystromMatrix, lambda: Complex64) -> DetResult {
    let value = if lambda == Complex64::new(0.0, 0.0) {
        ONE
    } else {
        LuFactor::new(&m.entries().identity_minus(lambda)).determinant()
    };
    DetResult {
        value,
        path: DetPath::Matrix,
        terms_used: 0,
        tail_bound: 0.0,
    }
}

/// Closed rectangle in ℂ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let all_finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !all_finite || re_max < re_min || im_max < im_min {
            return Err(Error::invalid(
                "region",
                format!("need finite re0 <= re1, im0 <= im1; got {re_min},{re_max},{im_min},{im_max}"),
            ));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }

    /// Cell-centred lattice with `density` points per unit length.
    pub fn lattice(&self, density: f64) -> Vec<Complex64> {
        let width = self.re_max - self.re_min;
        let height = self.im_max - self.im_min;
        let nx = (width * density).ceil().max(1.0) as usize;
        let ny = (height * density).ceil().max(1.0) as usize;
        let mut pts = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                pts.push(Complex64::new(
                    self.re_min + (i as f64 + 0.5) * width / nx as f64,
                    self.im_min + (j as f64 + 0.5) * height / ny as f64,
                ));
            }
        }
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharScanResult {
    /// Sorted by real part, then imaginary part.
    pub zeros: Vec<Complex64>,
    pub search_region: Region,
    pub grid_density: f64,
}

/// Zeros of `D_{T_n}` in `region`, found by Newton iteration from a seed lattice.
pub fn char_scan(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    n: usize,
    region: Region,
    density: f64,
    grid: &Discretization,
) -> Result<CharScanResult> {
    let m = NystromMatrix::assemble(k, trunc, n, Variant::Plain, grid);
    char_scan_matrix(&m, region, density)
}

pub fn char_scan_matrix(m: &NystromMatrix, region: Region, density: f64) -> Result<CharScanResult> {
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::invalid("density", format!("must be positive, got {density}")));
    }
    let h = hessenberg(m.entries());
    let slack = 1e-9 * (1.0 + region.re_max.abs().max(region.re_min.abs()));
    let found: Vec<Complex64> = region
        .lattice(density)
        .par_iter()
        .filter_map(|&seed| newton_root(&h, seed))
        .filter(|z| region.contains(*z, slack))
        .collect();

    let mut zeros: Vec<Complex64> = Vec::new();
    for z in found {
        if zeros.iter().all(|y| (y - z).norm() > DEDUP_TOL) {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(CharScanResult {
        zeros,
        search_region: region,
        grid_density: density,
    })
}

/// Whether λ lies within the zero-deduplication distance of a characteristic
/// value of `h`, a Hessenberg form of the Nyström matrix, or fails the
/// determinant guard outright.
///
/// A determinant threshold alone cannot see a seven-digit approximation of a
/// characteristic value: there `|det|` is ~1e-8, far above the guard.
pub fn near_characteristic(h: &CMatrix, lambda: Complex64) -> bool {
    let (det, _) = hessenberg_det_and_log_derivative(h, lambda);
    if is_numerically_characteristic(det, lambda) {
        return true;
    }
    newton_root(h, lambda).is_some_and(|z| (z - lambda).norm() <= DEDUP_TOL)
}

fn newton_root(h: &CMatrix, seed: Complex64) -> Option<Complex64> {
    let mut z = seed;
    for _ in 0..NEWTON_BUDGET {
        let (_, log_deriv) = hessenberg_det_and_log_derivative(h, z);
        let Some(ld) = log_deriv else {
            return Some(z);
        };
        if !(ld.re.is_finite() && ld.im.is_finite()) || ld.norm() == 0.0 {
            return None;
        }
        let step = ld.inv();
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return None;
        }
        if step.norm() <= 1e-12 * (1.0 + z.norm()) {
            let (d_final, _) = hessenberg_det_and_log_derivative(h, z);
            return (d_final.norm() < ZERO_TOL).then_some(z);
        }
    }
    None
}
