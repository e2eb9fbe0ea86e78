//! Composite Gauss–Legendre grids on truncation intervals.

use crate::error::{Error, Result};
use crate::kernel::TruncationScheme;

/// Orders for which composite grids can be built.
pub const SUPPORTED_ORDERS: [usize; 3] = [4, 8, 16];

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Nodes come from Newton's method on the three-term recurrence; the rule is
/// symmetrized afterwards so mirrored panels produce mirrored nodes exactly.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel density and per-panel order shared by every grid of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureConfig {
    pub panels_per_unit: usize,
    pub order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            panels_per_unit: 4,
            order: 8,
        }
    }
}

impl QuadratureConfig {
    pub fn new(panels_per_unit: usize, order: usize) -> Result<Self> {
        let cfg = Self { panels_per_unit, order };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels_per_unit == 0 {
            return Err(Error::invalid("panels_per_unit", "must be at least 1"));
        }
        if !SUPPORTED_ORDERS.contains(&self.order) {
            return Err(Error::UnsupportedOrder(self.order));
        }
        Ok(())
    }
}

/// Quadrature nodes and positive weights over a union of intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panel_count: usize,
    order: usize,
    panels_per_unit: usize,
    segments: Vec<(f64, f64)>,
}

impl Discretization {
    /// Composite rule on `(lo, hi)` with `ceil((hi - lo) * panels_per_unit)` panels.
    pub fn interval(lo: f64, hi: f64, cfg: QuadratureConfig) -> Result<Self> {
        Self::from_segments(&[(lo, hi)], cfg)
    }

    /// `[-outer, -inner] ∪ [inner, outer]`.
    pub fn annulus(inner: f64, outer: f64, cfg: QuadratureConfig) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(Error::invalid(
                "annulus",
                format!("need 0 <= inner < outer, got {inner}, {outer}"),
            ));
        }
        Self::from_segments(&[(-outer, -inner), (inner, outer)], cfg)
    }

    fn from_segments(segments: &[(f64, f64)], cfg: QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let (ref_nodes, ref_weights) = gauss_legendre(cfg.order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panel_count = 0;
        for &(lo, hi) in segments {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::invalid(
                    "interval",
                    format!("need finite lo < hi, got ({lo}, {hi})"),
                ));
            }
            let panels = (((hi - lo) * cfg.panels_per_unit as f64) - 1e-9).ceil().max(1.0) as usize;
            let edge = |k: usize| (lo * (panels - k) as f64 + hi * k as f64) / panels as f64;
            for k in 0..panels {
                let (a, b) = (edge(k), edge(k + 1));
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                for (xi, wi) in ref_nodes.iter().zip(&ref_weights) {
                    nodes.push(mid + half * xi);
                    weights.push(half * wi);
                }
            }
            panel_count += panels;
        }
        Ok(Self {
            nodes,
            weights,
            panel_count,
            order: cfg.order,
            panels_per_unit: cfg.panels_per_unit,
            segments: segments.to_vec(),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_count(&self) -> usize {
        self.panel_count
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn config(&self) -> QuadratureConfig {
        QuadratureConfig {
            panels_per_unit: self.panels_per_unit,
            order: self.order,
        }
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    /// Largest `|x|` covered by the grid.
    pub fn radius(&self) -> f64 {
        self.segments
            .iter()
            .map(|&(a, b)| a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Composite Gauss–Legendre grid on `(-τ_n, τ_n)`.
pub fn build_grid(trunc: &TruncationScheme, n: usize, cfg: QuadratureConfig) -> Result<Discretization> {
    let tau = trunc.tau(n);
    Discretization::interval(-tau, tau, cfg)
}
