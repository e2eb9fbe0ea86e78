//! Resolvent kernels of subkernels, the Neumann series of the full kernel,
//! residual checks of the defining equations, and the second-kind solver.
//!
//! A subkernel resolvent is evaluated through the Nyström extension
//!
//! ```text
//! T_{n|λ}(s,t) = χ_n(s)·[T(s,t) + λ Σ_j T(s,x_j) w_j r_j(t)],   r(t) = (I − λA)⁻¹ k_t
//! ```
//!
//! with `k_t(x_j) = T_n(x_j, t)`. The tilde variant is `χ_n(t)` times the
//! plain one.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fredholm::{is_numerically_characteristic, DetPath, DetResult};
use crate::grid::Discretization;
use crate::kernel::{subkernel_at, KernelSpec, Side, TruncationScheme, Variant};
use crate::linalg::{norm2, CMatrix, LuFactor};
use crate::nystrom::{operator_norm_estimate, NystromMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const NEUMANN_MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ResolventPath {
    /// LU solve of `I − λA`.
    #[default]
    Fredholm,
    /// Summed Neumann series of `(I − λA)⁻¹`; requires `|λ|·‖A‖ < 1`.
    Neumann,
}

#[derive(Debug, Clone)]
enum Solver {
    Lu(LuFactor),
    Neumann,
}

/// Resolvent kernel `T_{n|λ}` of a subkernel at a regular value λ.
#[derive(Debug, Clone)]
pub struct ResolventHandle {
    kernel: KernelSpec,
    n: usize,
    tau: f64,
    lambda: Complex64,
    det: DetResult,
    variant: Variant,
    path: ResolventPath,
    nystrom: NystromMatrix,
    solver: Solver,
    det_scale: f64,
}

/// Builds the resolvent kernel of `T_n` (or `T̃_n`) at λ.
///
/// The grid may extend past `𝕀_n`; rows of nodes outside are masked.
pub fn make_resolvent(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    n: usize,
    lambda: Complex64,
    grid: &Discretization,
    variant: Variant,
    path: ResolventPath,
) -> Result<ResolventHandle> {
    let nystrom = NystromMatrix::assemble(k, trunc, n, Variant::Plain, grid);
    let lu = LuFactor::new(&nystrom.entries().identity_minus(lambda));
    let det = DetResult {
        value: if lambda == ZERO { ONE } else { lu.determinant() },
        path: DetPath::Matrix,
        terms_used: 0,
        tail_bound: 0.0,
    };
    if is_numerically_characteristic(det.value, lambda) {
        return Err(Error::Characteristic {
            lambda,
            det_abs: det.value.norm(),
        });
    }
    let solver = match path {
        ResolventPath::Fredholm => Solver::Lu(lu),
        ResolventPath::Neumann => {
            let product = lambda.norm() * operator_norm_estimate(&nystrom);
            if product >= 1.0 {
                return Err(Error::NeumannDivergence { product });
            }
            Solver::Neumann
        }
    };
    Ok(ResolventHandle {
        kernel: k.clone(),
        n,
        tau: trunc.tau(n),
        lambda,
        det,
        variant,
        path,
        nystrom,
        solver,
        det_scale: 1.0,
    })
}

impl ResolventHandle {
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn det(&self) -> &DetResult {
        &self.det
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn path(&self) -> ResolventPath {
        self.path
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn grid(&self) -> &Discretization {
        self.nystrom.grid()
    }

    /// Same handle with the determinant in the minor/determinant quotient
    /// multiplied by `factor`. Only useful as a negative control.
    pub fn with_det_scaled(&self, factor: f64) -> Self {
        let mut h = self.clone();
        h.det_scale *= factor;
        h.det.value *= factor;
        h
    }

    /// The same variant of the subkernel this handle resolves.
    pub fn subkernel(&self, s: f64, t: f64) -> Complex64 {
        subkernel_at(&self.kernel, self.tau, self.variant, s, t)
    }

    fn inside(&self, x: f64) -> bool {
        x.abs() < self.tau
    }

    fn keeps(&self, s: f64, t: f64) -> bool {
        self.inside(s) && (self.variant == Variant::Plain || self.inside(t))
    }

    /// `(I − λA)⁻¹ b`
    fn apply_inverse(&self, b: &[Complex64]) -> Vec<Complex64> {
        match &self.solver {
            Solver::Lu(lu) => lu.solve(b),
            Solver::Neumann => self.neumann_sum(b, |v| self.nystrom.entries().matvec(v)),
        }
    }

    /// `(I − λA)⁻ᵀ b`
    fn apply_inverse_transpose(&self, b: &[Complex64]) -> Vec<Complex64> {
        match &self.solver {
            Solver::Lu(lu) => lu.solve_transpose(b),
            Solver::Neumann => self.neumann_sum(b, |v| self.nystrom.entries().transpose_matvec(v)),
        }
    }

    fn neumann_sum(&self, b: &[Complex64], apply: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Vec<Complex64> {
        let mut sum = b.to_vec();
        let mut term = b.to_vec();
        for _ in 0..NEUMANN_MAX_TERMS {
            term = apply(&term).into_iter().map(|v| v * self.lambda).collect();
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
            if norm2(&term) <= 1e-17 * norm2(&sum) {
                break;
            }
        }
        sum
    }

    /// `k_t(x_j) = T_n(x_j, t)`
    fn column_source(&self, t: f64) -> Vec<Complex64> {
        self.grid()
            .nodes()
            .iter()
            .map(|&x| subkernel_at(&self.kernel, self.tau, Variant::Plain, x, t))
            .collect()
    }

    /// `a_j(s) = T(s, x_j)·w_j`
    fn row_source(&self, s: f64) -> Vec<Complex64> {
        self.grid()
            .nodes()
            .iter()
            .zip(self.grid().weights())
            .map(|(&x, &w)| self.kernel.eval(s, x) * w)
            .collect()
    }

    fn finish(&self, k_st: Complex64, correction: Complex64) -> Complex64 {
        let v = k_st + self.lambda * correction;
        if self.det_scale == 1.0 {
            v
        } else {
            v / self.det_scale
        }
    }

    /// `T_{n|λ}(s, t)`, or `T̃_{n|λ}(s, t)` for the tilde variant.
    pub fn eval(&self, s: f64, t: f64) -> Complex64 {
        if !self.keeps(s, t) {
            return ZERO;
        }
        let r = self.apply_inverse(&self.column_source(t));
        let a = self.row_source(s);
        self.finish(self.kernel.eval(s, t), dot(&a, &r))
    }

    /// Values on the product `ss × ts`, row `i` for `ss[i]`.
    pub fn eval_block(&self, ss: &[f64], ts: &[f64]) -> CMatrix {
        let rows: Vec<Vec<Complex64>> = if ss.len() <= ts.len() {
            let sources: Vec<Vec<Complex64>> = ts.par_iter().map(|&t| self.column_source(t)).collect();
            ss.par_iter()
                .map(|&s| {
                    if !self.inside(s) {
                        return vec![ZERO; ts.len()];
                    }
                    let rho = self.apply_inverse_transpose(&self.row_source(s));
                    ts.iter()
                        .zip(&sources)
                        .map(|(&t, k_t)| {
                            if self.keeps(s, t) {
                                self.finish(self.kernel.eval(s, t), dot(&rho, k_t))
                            } else {
                                ZERO
                            }
                        })
                        .collect()
                })
                .collect()
        } else {
            let solved: Vec<Vec<Complex64>> = ts
                .par_iter()
                .map(|&t| self.apply_inverse(&self.column_source(t)))
                .collect();
            ss.par_iter()
                .map(|&s| {
                    if !self.inside(s) {
                        return vec![ZERO; ts.len()];
                    }
                    let a = self.row_source(s);
                    ts.iter()
                        .zip(&solved)
                        .map(|(&t, r)| {
                            if self.keeps(s, t) {
                                self.finish(self.kernel.eval(s, t), dot(&a, r))
                            } else {
                                ZERO
                            }
                        })
                        .collect()
                })
                .collect()
        };
        CMatrix::from_rows(rows, ts.len())
    }

    /// `∫ T_{n|λ}(x_i, y) g(y) dy` at every grid node, by the handle's quadrature.
    pub fn apply(&self, g: &[Complex64]) -> Vec<Complex64> {
        let nodes = self.grid().nodes().to_vec();
        nodes.iter().map(|&x| self.apply_at(x, g)).collect()
    }

    /// `∫ T_{n|λ}(s, y) g(y) dy` for `g` sampled on the handle's grid.
    pub fn apply_at(&self, s: f64, g: &[Complex64]) -> Complex64 {
        assert_eq!(g.len(), self.grid().len());
        if !self.inside(s) {
            return ZERO;
        }
        let x = self.grid().nodes();
        let w = self.grid().weights();
        let gw: Vec<Complex64> = x
            .iter()
            .zip(w)
            .zip(g)
            .map(|((&xj, &wj), gj)| {
                if self.variant == Variant::Tilde && !self.inside(xj) {
                    ZERO
                } else {
                    gj * wj
                }
            })
            .collect();
        // Σ_j T_n(s,y_j) w_j g_j + λ a(s)ᵀ (I − λA)⁻¹ Σ_j k_{y_j} w_j g_j
        let direct: Complex64 = x.iter().zip(&gw).map(|(&y, gwj)| self.kernel.eval(s, y) * gwj).sum();
        let projected: Vec<Complex64> = x
            .iter()
            .map(|&xi| {
                x.iter()
                    .zip(&gw)
                    .map(|(&y, gwj)| subkernel_at(&self.kernel, self.tau, Variant::Plain, xi, y) * gwj)
                    .sum()
            })
            .collect();
        let r = self.apply_inverse(&projected);
        self.finish(direct, dot(&self.row_source(s), &r))
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Grid samples of a resolvent Carleman function.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventCarleman {
    pub direction: Side,
    pub anchor: f64,
    pub nodes: Vec<f64>,
    pub samples: Vec<Complex64>,
}

/// Row: `conj(T_{n|λ}(anchor, ·))`; column: `T_{n|λ}(·, anchor)`.
pub fn resolvent_carleman(
    h: &ResolventHandle,
    direction: Side,
    anchor: f64,
    grid: &Discretization,
) -> ResolventCarleman {
    let nodes = grid.nodes().to_vec();
    let samples = match direction {
        Side::Row => h
            .eval_block(&[anchor], &nodes)
            .row(0)
            .iter()
            .map(|z| z.conj())
            .collect(),
        Side::Column => h.eval_block(&nodes, &[anchor]).column(0),
    };
    ResolventCarleman {
        direction,
        anchor,
        nodes,
        samples,
    }
}

/// Sup-norm residuals of the two defining integral equations over
/// `grid_eval × grid_eval`, integrals taken with the handle's quadrature.
pub fn residual_check(h: &ResolventHandle, grid_eval: &[f64]) -> (f64, f64) {
    let x = h.grid().nodes().to_vec();
    let w = h.grid().weights();
    let lambda = h.lambda();
    let v_st = h.eval_block(grid_eval, grid_eval);
    let v_xt = h.eval_block(&x, grid_eval);
    let v_sx = h.eval_block(grid_eval, &x);
    let k_sx = CMatrix::from_fn(grid_eval.len(), x.len(), |i, j| h.subkernel(grid_eval[i], x[j]) * w[j]);
    let k_xt = CMatrix::from_fn(x.len(), grid_eval.len(), |j, l| w[j] * h.subkernel(x[j], grid_eval[l]));

    let mut left = 0.0f64;
    let mut right = 0.0f64;
    for (i, &s) in grid_eval.iter().enumerate() {
        for (l, &t) in grid_eval.iter().enumerate() {
            let k_st = h.subkernel(s, t);
            let mut int_left = ZERO;
            let mut int_right = ZERO;
            for j in 0..x.len() {
                int_left += k_sx[(i, j)] * v_xt[(j, l)];
                int_right += v_sx[(i, j)] * k_xt[(j, l)];
            }
            left = left.max((v_st[(i, l)] - lambda * int_left - k_st).norm());
            right = right.max((v_st[(i, l)] - lambda * int_right - k_st).norm());
        }
    }
    (left, right)
}

/// Sampled solution of `f − λT_n f = g` on a handle's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub nodes: Vec<f64>,
    pub values: Vec<Complex64>,
    g: Vec<Complex64>,
}

impl Solution {
    /// Nyström interpolant `f(s) = g(s) + λ∫T_{n|λ}(s,y)g(y)dy`.
    pub fn value_at(&self, h: &ResolventHandle, s: f64, g_at_s: Complex64) -> Complex64 {
        g_at_s + h.lambda() * h.apply_at(s, &self.g)
    }
}

/// `f = g + λ T_{n|λ} g`, with `g` sampled on the handle's grid.
pub fn solve_equation(h: &ResolventHandle, g: &[Complex64]) -> Result<Solution> {
    if g.len() != h.grid().len() {
        return Err(Error::invalid(
            "g",
            format!("expected {} samples, got {}", h.grid().len(), g.len()),
        ));
    }
    let lambda = h.lambda();
    let applied = h.apply(g);
    let values = g.iter().zip(&applied).map(|(gi, ai)| gi + lambda * ai).collect();
    Ok(Solution {
        nodes: h.grid().nodes().to_vec(),
        values,
        g: g.to_vec(),
    })
}

/// `max_i |f_i − λ Σ_j T_n(x_i,x_j) w_j f_j − g_i|`
pub fn back_substitution_residual(h: &ResolventHandle, g: &[Complex64], f: &[Complex64]) -> f64 {
    let x = h.grid().nodes();
    let w = h.grid().weights();
    let lambda = h.lambda();
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let tf: Complex64 = x
                .iter()
                .zip(w)
                .zip(f)
                .map(|((&xj, &wj), fj)| h.subkernel(xi, xj) * wj * fj)
                .sum();
            (f[i] - lambda * tf - g[i]).norm()
        })
        .fold(0.0, f64::max)
}

/// Seven unit Gaussians centred at −3, …, 3.
pub fn probe_basis(nodes: &[f64]) -> Vec<Vec<Complex64>> {
    (-3..=3)
        .map(|c| {
            nodes
                .iter()
                .map(|&x| Complex64::new((-(x - c as f64).powi(2)).exp(), 0.0))
                .collect()
        })
        .collect()
}

/// Residual of `T_{|λ} − A_{|λ} = (I + λT_{|λ})(T − A)(I + λA_{|λ})` with
/// `T`, `A` the subkernels of `h_a`, `h_b`, applied to the probe basis.
pub fn second_resolvent_residual(h_a: &ResolventHandle, h_b: &ResolventHandle) -> Result<f64> {
    if h_a.lambda() != h_b.lambda() || h_a.grid().nodes() != h_b.grid().nodes() {
        return Err(Error::GridMismatch);
    }
    let lambda = h_a.lambda();
    let x = h_a.grid().nodes().to_vec();
    let w = h_a.grid().weights();
    let weighted = |mut m: CMatrix| {
        for i in 0..m.rows() {
            for (v, wj) in m.row_mut(i).iter_mut().zip(w) {
                *v *= wj;
            }
        }
        m
    };
    let r_a = weighted(h_a.eval_block(&x, &x));
    let r_b = weighted(h_b.eval_block(&x, &x));
    let t_a = weighted(CMatrix::from_fn(x.len(), x.len(), |i, j| h_a.subkernel(x[i], x[j])));
    let t_b = weighted(CMatrix::from_fn(x.len(), x.len(), |i, j| h_b.subkernel(x[i], x[j])));
    let r_diff = r_a.sub(&r_b);
    let t_diff = t_a.sub(&t_b);

    let mut worst = 0.0f64;
    for g in probe_basis(&x) {
        let lhs = r_diff.matvec(&g);
        let rb_g = r_b.matvec(&g);
        let u: Vec<Complex64> = g.iter().zip(&rb_g).map(|(gi, ri)| gi + lambda * ri).collect();
        let v = t_diff.matvec(&u);
        let ra_v = r_a.matvec(&v);
        let rhs = v.iter().zip(&ra_v).map(|(vi, ri)| vi + lambda * ri);
        for (l, r) in lhs.iter().zip(rhs) {
            worst = worst.max((l - r).norm());
        }
    }
    Ok(worst)
}

/// Partial Neumann sum with its a-priori tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Neumann series `Σ_{m≥1} λ^{m−1} T^{[m]}` of the untruncated kernel,
/// with iterants computed by quadrature on a full-line grid.
#[derive(Debug, Clone)]
pub struct NeumannExpansion {
    kernel: KernelSpec,
    lambda: Complex64,
    grid: Discretization,
    /// unweighted `K(y_i, y_j)`
    kernel_nodes: CMatrix,
    norm: f64,
    row_sup: f64,
    col_sup: f64,
}

impl NeumannExpansion {
    pub fn new(k: &KernelSpec, lambda: Complex64, disc: &Discretization) -> Result<Self> {
        let full = NystromMatrix::full(k, disc);
        let norm = operator_norm_estimate(&full);
        let product = lambda.norm() * norm;
        if product >= 1.0 {
            return Err(Error::NeumannDivergence { product });
        }
        let y = disc.nodes();
        let kernel_nodes = CMatrix::from_fn(y.len(), y.len(), |i, j| k.eval(y[i], y[j]));
        let row_sup = y
            .iter()
            .map(|&s| k.carleman_norm(s, disc, Side::Row))
            .fold(0.0, f64::max);
        let col_sup = y
            .iter()
            .map(|&s| k.carleman_norm(s, disc, Side::Column))
            .fold(0.0, f64::max);
        Ok(Self {
            kernel: k.clone(),
            lambda,
            grid: disc.clone(),
            kernel_nodes,
            norm,
            row_sup,
            col_sup,
        })
    }

    pub fn operator_norm(&self) -> f64 {
        self.norm
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Bound on `Σ_{m > terms} |λ|^{m−1} sup|T^{[m]}|` from
    /// `sup|T^{[m]}| ≤ ‖τ′‖_∞‖τ‖_∞‖T‖^{m−2}`.
    pub fn tail_bound(&self, terms: usize) -> f64 {
        assert!(terms >= 1);
        let q = self.lambda.norm() * self.norm;
        let lam = self.lambda.norm();
        self.col_sup * self.row_sup * lam.powi(terms as i32) * self.norm.powi(terms as i32 - 1) / (1.0 - q)
    }

    /// Smallest number of terms whose tail bound is at most `tol`.
    pub fn terms_for(&self, tol: f64) -> usize {
        (1..NEUMANN_MAX_TERMS)
            .find(|&t| self.tail_bound(t) <= tol)
            .unwrap_or(NEUMANN_MAX_TERMS)
    }

    fn weighted(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().zip(self.grid.weights()).map(|(a, w)| a * w).collect()
    }

    /// `Σ_{m=1}^{terms−1} λ^{m−1} ρ_m` where `ρ_{m+1} = step(w∘ρ_m)`.
    fn accumulate(
        &self,
        start: Vec<Complex64>,
        terms: usize,
        step: impl Fn(&[Complex64]) -> Vec<Complex64>,
    ) -> Vec<Complex64> {
        let mut sigma = vec![ZERO; start.len()];
        let mut rho = start;
        let mut power = ONE;
        for m in 1..terms {
            for (s, r) in sigma.iter_mut().zip(&rho) {
                *s += power * r;
            }
            if m + 1 < terms {
                rho = step(&self.weighted(&rho));
                power *= self.lambda;
            }
        }
        sigma
    }

    pub fn eval(&self, s: f64, t: f64, terms: usize) -> NeumannValue {
        let terms = terms.max(1);
        let y = self.grid.nodes();
        let col: Vec<Complex64> = y.iter().map(|&yj| self.kernel.eval(yj, t)).collect();
        let sigma = self.accumulate(col, terms, |v| self.kernel_nodes.matvec(v));
        let a: Vec<Complex64> = self.weighted(&y.iter().map(|&yj| self.kernel.eval(s, yj)).collect::<Vec<_>>());
        NeumannValue {
            value: self.kernel.eval(s, t) + self.lambda * dot(&a, &sigma),
            tail_bound: self.tail_bound(terms),
            terms,
        }
    }

    /// Values on `ss × ts` with the given number of terms.
    pub fn eval_block(&self, ss: &[f64], ts: &[f64], terms: usize) -> CMatrix {
        let terms = terms.max(1);
        let y = self.grid.nodes();
        let rows: Vec<Vec<Complex64>> = if ss.len() <= ts.len() {
            let k_yt: Vec<Vec<Complex64>> = ts
                .par_iter()
                .map(|&t| self.weighted(&y.iter().map(|&yj| self.kernel.eval(yj, t)).collect::<Vec<_>>()))
                .collect();
            ss.par_iter()
                .map(|&s| {
                    let row: Vec<Complex64> = y.iter().map(|&yj| self.kernel.eval(s, yj)).collect();
                    let sigma = self.accumulate(row, terms, |v| self.kernel_nodes.transpose_matvec(v));
                    ts.iter()
                        .zip(&k_yt)
                        .map(|(&t, kw)| self.kernel.eval(s, t) + self.lambda * dot(&sigma, kw))
                        .collect()
                })
                .collect()
        } else {
            let sigmas: Vec<Vec<Complex64>> = ts
                .par_iter()
                .map(|&t| {
                    let col: Vec<Complex64> = y.iter().map(|&yj| self.kernel.eval(yj, t)).collect();
                    self.accumulate(col, terms, |v| self.kernel_nodes.matvec(v))
                })
                .collect();
            ss.par_iter()
                .map(|&s| {
                    let a = self.weighted(&y.iter().map(|&yj| self.kernel.eval(s, yj)).collect::<Vec<_>>());
                    ts.iter()
                        .zip(&sigmas)
                        .map(|(&t, sigma)| self.kernel.eval(s, t) + self.lambda * dot(&a, sigma))
                        .collect()
                })
                .collect()
        };
        CMatrix::from_rows(rows, ts.len())
    }
}

/// `Σ_{m=1}^{n_terms} λ^{m−1} T^{[m]}(s,t)` plus its geometric tail bound.
pub fn neumann_full(
    k: &KernelSpec,
    lambda: Complex64,
    s: f64,
    t: f64,
    disc: &Discretization,
    n_terms: usize,
) -> Result<NeumannValue> {
    Ok(NeumannExpansion::new(k, lambda, disc)?.eval(s, t, n_terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, QuadratureConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(n: usize) -> (TruncationScheme, Discretization) {
        let trunc = TruncationScheme::default();
        let grid = build_grid(&trunc, n, QuadratureConfig::default()).unwrap();
        (trunc, grid)
    }

    #[test]
    fn lambda_zero_reproduces_subkernel_exactly() {
        let (trunc, grid) = setup(4);
        for k in KernelSpec::builtins() {
            for variant in [Variant::Plain, Variant::Tilde] {
                let h = make_resolvent(&k, &trunc, 4, c(0.0, 0.0), &grid, variant, ResolventPath::Fredholm).unwrap();
                for &(s, t) in &[(0.0, 0.0), (0.4, -1.3), (2.9, 3.5), (-3.5, 0.2)] {
                    assert_eq!(h.eval(s, t), k.subkernel(&trunc, 4, variant, s, t));
                }
                let (l, r) = residual_check(&h, &[-3.5, -1.0, 0.0, 0.7, 2.0, 3.2]);
                assert!(l <= 1e-14 && r <= 1e-14);
            }
        }
    }

    #[test]
    fn plain_resolvent_has_compact_s_support() {
        let (trunc, grid) = setup(4);
        let h = make_resolvent(
            &KernelSpec::gauss_cauchy(),
            &trunc,
            4,
            c(0.3, 0.1),
            &grid,
            Variant::Plain,
            ResolventPath::Fredholm,
        )
        .unwrap();
        assert_eq!(h.eval(3.0, 0.0), c(0.0, 0.0));
        assert_eq!(h.eval(-3.7, 1.0), c(0.0, 0.0));
        assert_ne!(h.eval(0.5, 3.5), c(0.0, 0.0));
    }

    #[test]
    fn characteristic_lambda_is_refused() {
        let (trunc, grid) = setup(6);
        let k = KernelSpec::rank1_gauss();
        // exact characteristic value of the discrete operator
        let c_n: f64 = grid.integrate(|x| (-2.0 * x * x).exp());
        let err = make_resolvent(
            &k,
            &trunc,
            6,
            c(1.0 / c_n, 0.0),
            &grid,
            Variant::Plain,
            ResolventPath::Fredholm,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Characteristic { .. }));
    }

    #[test]
    fn neumann_path_requires_small_lambda() {
        let (trunc, grid) = setup(6);
        let k = KernelSpec::rank1_gauss();
        let err = make_resolvent(
            &k,
            &trunc,
            6,
            c(0.9, 0.0),
            &grid,
            Variant::Plain,
            ResolventPath::Neumann,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NeumannDivergence { .. }));
        let full = Discretization::interval(-8.0, 8.0, QuadratureConfig::default()).unwrap();
        assert!(matches!(
            neumann_full(&k, c(0.9, 0.0), 0.0, 0.0, &full, 10),
            Err(Error::NeumannDivergence { .. })
        ));
    }

    #[test]
    fn neumann_and_lu_paths_agree_on_handles() {
        let (trunc, grid) = setup(6);
        for k in KernelSpec::builtins() {
            let lu = make_resolvent(
                &k,
                &trunc,
                6,
                c(0.3, 0.2),
                &grid,
                Variant::Plain,
                ResolventPath::Fredholm,
            )
            .unwrap();
            let ns = make_resolvent(
                &k,
                &trunc,
                6,
                c(0.3, 0.2),
                &grid,
                Variant::Plain,
                ResolventPath::Neumann,
            )
            .unwrap();
            for &(s, t) in &[(0.0, 0.0), (1.1, -0.6), (-2.0, 4.5)] {
                assert!((lu.eval(s, t) - ns.eval(s, t)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn eval_block_matches_pointwise_eval_both_orientations() {
        let (trunc, grid) = setup(4);
        let h = make_resolvent(
            &KernelSpec::gauss_cauchy(),
            &trunc,
            4,
            c(0.5, 0.2),
            &grid,
            Variant::Tilde,
            ResolventPath::Fredholm,
        )
        .unwrap();
        let few = [-0.5, 1.5];
        let many = [-4.0, -2.2, -1.0, 0.0, 0.3, 2.5, 3.9];
        for (ss, ts) in [(&few[..], &many[..]), (&many[..], &few[..])] {
            let block = h.eval_block(ss, ts);
            for (i, &s) in ss.iter().enumerate() {
                for (j, &t) in ts.iter().enumerate() {
                    assert!((block[(i, j)] - h.eval(s, t)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn solve_rejects_wrong_length_and_zero_rhs_gives_zero() {
        let (trunc, grid) = setup(4);
        let h = make_resolvent(
            &KernelSpec::rank1_gauss(),
            &trunc,
            4,
            c(0.3, 0.0),
            &grid,
            Variant::Plain,
            ResolventPath::Fredholm,
        )
        .unwrap();
        assert!(solve_equation(&h, &[c(1.0, 0.0)]).is_err());
        let f = solve_equation(&h, &vec![c(0.0, 0.0); grid.len()]).unwrap();
        assert!(f.values.iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn second_resolvent_requires_common_grid() {
        let (trunc, grid) = setup(4);
        let (_, other) = setup(6);
        let k = KernelSpec::rank1_gauss();
        let a = make_resolvent(
            &k,
            &trunc,
            4,
            c(0.3, 0.0),
            &grid,
            Variant::Plain,
            ResolventPath::Fredholm,
        )
        .unwrap();
        let b = make_resolvent(
            &k,
            &trunc,
            6,
            c(0.3, 0.0),
            &other,
            Variant::Plain,
            ResolventPath::Fredholm,
        )
        .unwrap();
        assert_eq!(second_resolvent_residual(&a, &b), Err(Error::GridMismatch));
        assert_eq!(second_resolvent_residual(&a, &a).unwrap(), 0.0);
    }
}
