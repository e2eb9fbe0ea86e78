//! Nyström matrices of subkernel operators and operator-norm estimates.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{build_grid, Discretization};
use crate::kernel::{subkernel_at, KernelSpec, TruncationScheme, Variant};
use crate::linalg::{norm2, CMatrix};

const MAX_POWER_ITERATIONS: usize = 200;
const POWER_RTOL: f64 = 1e-12;

/// `A[i][j] = K_variant(s_i, s_j)·w_j` on a quadrature grid.
#[derive(Debug, Clone)]
pub struct NystromMatrix {
    entries: CMatrix,
    variant: Variant,
    tau: f64,
    grid: Discretization,
}

impl NystromMatrix {
    pub fn assemble(
        k: &KernelSpec,
        trunc: &TruncationScheme,
        n: usize,
        variant: Variant,
        grid: &Discretization,
    ) -> Self {
        Self::assemble_with_tau(k, trunc.tau(n), variant, grid)
    }

    pub(crate) fn assemble_with_tau(k: &KernelSpec, tau: f64, variant: Variant, grid: &Discretization) -> Self {
        let x = grid.nodes();
        let w = grid.weights();
        let rows: Vec<Vec<Complex64>> = x
            .par_iter()
            .map(|&s| {
                x.iter()
                    .zip(w)
                    .map(|(&t, &wt)| subkernel_at(k, tau, variant, s, t) * wt)
                    .collect()
            })
            .collect();
        Self {
            entries: CMatrix::from_rows(rows, x.len()),
            variant,
            tau,
            grid: grid.clone(),
        }
    }

    /// Untruncated kernel on the grid: every node is treated as interior.
    pub fn full(k: &KernelSpec, grid: &Discretization) -> Self {
        Self::assemble_with_tau(k, f64::INFINITY, Variant::Plain, grid)
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn grid(&self) -> &Discretization {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    /// `D^{1/2} A D^{−1/2}`: the operator in L²-orthonormal coordinates.
    pub fn symmetric_form(&self) -> CMatrix {
        let sw: Vec<f64> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        CMatrix::from_fn(self.dim(), self.dim(), |i, j| self.entries[(i, j)] * (sw[i] / sw[j]))
    }
}

/// Largest singular value by power iteration on `B*B`.
///
/// The start vector is fixed (`x_i = 1 + (i+1)/dim`) so repeated runs are
/// bit-identical; it is deliberately not constant, because a constant vector
/// is orthogonal to every odd function on a symmetric grid.
pub fn top_singular_value(
    dim: usize,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    apply_adjoint: impl Fn(&[Complex64]) -> Vec<Complex64>,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut x: Vec<Complex64> = (0..dim)
        .map(|i| Complex64::new(1.0 + (i + 1) as f64 / dim as f64, 0.0))
        .collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut sigma = 0.0;
    for _ in 0..MAX_POWER_ITERATIONS {
        let y = apply(&x);
        let next_sigma = norm2(&y);
        let z = apply_adjoint(&y);
        let nz = norm2(&z);
        let converged = (next_sigma - sigma).abs() <= POWER_RTOL * next_sigma;
        sigma = next_sigma;
        if nz == 0.0 || !nz.is_finite() || converged {
            break;
        }
        x = z.into_iter().map(|v| v / nz).collect();
    }
    sigma
}

/// Operator-norm estimate of the discretized operator.
pub fn operator_norm_estimate(m: &NystromMatrix) -> f64 {
    let b = m.symmetric_form();
    top_singular_value(m.dim(), |x| b.matvec(x), |y| b.adjoint_matvec(y))
}

/// `sqrt(w_r)·K(r, c)·sqrt(w_c)` between two grids.
pub(crate) fn weighted_block(
    rows: &Discretization,
    cols: &Discretization,
    f: impl Fn(f64, f64) -> Complex64 + Sync,
) -> CMatrix {
    let cw: Vec<f64> = cols.weights().iter().map(|w| w.sqrt()).collect();
    let data: Vec<Vec<Complex64>> = rows
        .nodes()
        .par_iter()
        .zip(rows.weights())
        .map(|(&s, &ws)| {
            let sws = ws.sqrt();
            cols.nodes()
                .iter()
                .zip(&cw)
                .map(|(&t, &swt)| f(s, t) * (sws * swt))
                .collect()
        })
        .collect();
    CMatrix::from_rows(data, cols.len())
}

/// Estimates `‖(T − T_n)T_nᵐ‖` (plain) or `‖(T − T̃_n)T̃_nᵐ‖` (tilde).
///
/// The outer factor `χ̂_n(s)T(s,x)` lives on the annulus `τ_n ≤ |s| ≤ R`,
/// where `R` is the radius of `grid_outer`; the inner factors live on `𝕀_n`.
/// In the plain case the last factor maps all of `[−R, R]` into `𝕀_n`.
pub fn tail_norm(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    n: usize,
    m: usize,
    variant: Variant,
    grid_outer: &Discretization,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("m", "power must be at least 1"));
    }
    let tau = trunc.tau(n);
    let radius = grid_outer.radius();
    if radius <= tau {
        return Err(Error::invalid(
            "grid_outer",
            format!("radius {radius} does not exceed tau_n = {tau}"),
        ));
    }
    let cfg = grid_outer.config();
    let inner = build_grid(trunc, n, cfg)?;
    let annulus = Discretization::annulus(tau, radius, cfg)?;
    let eval = |s: f64, t: f64| k.eval(s, t);

    let outer_block = weighted_block(&annulus, &inner, eval);
    let inner_block = weighted_block(&inner, &inner, eval);
    let last_block = match variant {
        Variant::Plain => weighted_block(&inner, grid_outer, eval),
        Variant::Tilde => inner_block.clone(),
    };

    let apply = |x: &[Complex64]| {
        let mut v = last_block.matvec(x);
        for _ in 1..m {
            v = inner_block.matvec(&v);
        }
        outer_block.matvec(&v)
    };
    let apply_adjoint = |y: &[Complex64]| {
        let mut v = outer_block.adjoint_matvec(y);
        for _ in 1..m {
            v = inner_block.adjoint_matvec(&v);
        }
        last_block.adjoint_matvec(&v)
    };
    Ok(top_singular_value(last_block.cols(), apply, apply_adjoint))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::QuadratureConfig;

    fn full_line(r: f64) -> Discretization {
        Discretization::interval(-r, r, QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn zero_kernel_gives_zero_matrix_and_norm() {
        let trunc = TruncationScheme::default();
        let grid = build_grid(&trunc, 4, QuadratureConfig::default()).unwrap();
        let m = NystromMatrix::assemble(&KernelSpec::zero(), &trunc, 4, Variant::Plain, &grid);
        assert_eq!(m.entries().max_abs(), 0.0);
        assert_eq!(operator_norm_estimate(&m), 0.0);
    }

    #[test]
    fn rank_one_norms() {
        let grid = full_line(6.0);
        let m = NystromMatrix::full(&KernelSpec::rank1_gauss(), &grid);
        assert!((operator_norm_estimate(&m) - 1.2533141373155003).abs() < 1e-6);
        let odd = NystromMatrix::full(&KernelSpec::rank1_odd(), &grid);
        // (π/2)^{1/4}·(¼√(π/2))^{1/2}
        let expected = 1.2533141373155003f64.sqrt() * (0.25 * 1.2533141373155003f64).sqrt();
        assert!((operator_norm_estimate(&odd) - expected).abs() < 1e-6);
    }

    #[test]
    fn plain_and_tilde_coincide_on_interior_grid() {
        let trunc = TruncationScheme::default();
        let grid = build_grid(&trunc, 6, QuadratureConfig::default()).unwrap();
        for k in KernelSpec::builtins() {
            let p = NystromMatrix::assemble(&k, &trunc, 6, Variant::Plain, &grid);
            let t = NystromMatrix::assemble(&k, &trunc, 6, Variant::Tilde, &grid);
            assert_eq!(p.entries(), t.entries());
        }
    }

    #[test]
    fn hermitian_symmetric_form() {
        let trunc = TruncationScheme::default();
        let grid = build_grid(&trunc, 6, QuadratureConfig::default()).unwrap();
        for k in KernelSpec::builtins().into_iter().filter(|k| k.is_hermitian()) {
            let b = NystromMatrix::assemble(&k, &trunc, 6, Variant::Tilde, &grid).symmetric_form();
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    assert!((b[(i, j)] - b[(j, i)].conj()).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn norm_contracts_under_truncation() {
        let trunc = TruncationScheme::default();
        let enclosing = full_line(8.0);
        for k in KernelSpec::builtins() {
            let full = operator_norm_estimate(&NystromMatrix::full(&k, &enclosing));
            for n in [1, 2, 4, 8] {
                let plain = operator_norm_estimate(&NystromMatrix::assemble(&k, &trunc, n, Variant::Plain, &enclosing));
                let tilde = operator_norm_estimate(&NystromMatrix::assemble(&k, &trunc, n, Variant::Tilde, &enclosing));
                assert!(tilde <= plain + 1e-8, "{}: {tilde} > {plain}", k.label());
                assert!(plain <= full + 1e-8, "{}: {plain} > {full}", k.label());
            }
        }
    }

    #[test]
    fn tail_norm_of_trivial_kernels() {
        let trunc = TruncationScheme::default();
        let outer = full_line(12.0);
        for n in [2, 6, 10] {
            assert_eq!(
                tail_norm(&KernelSpec::zero(), &trunc, n, 1, Variant::Plain, &outer).unwrap(),
                0.0
            );
            let odd = tail_norm(&KernelSpec::rank1_odd(), &trunc, n, 1, Variant::Plain, &outer).unwrap();
            assert!(odd <= 1e-12, "{odd}");
        }
        assert!(tail_norm(&KernelSpec::rank1_gauss(), &trunc, 2, 0, Variant::Plain, &outer).is_err());
        assert!(tail_norm(
            &KernelSpec::rank1_gauss(),
            &trunc,
            2,
            1,
            Variant::Plain,
            &full_line(1.5)
        )
        .is_err());
    }
}
