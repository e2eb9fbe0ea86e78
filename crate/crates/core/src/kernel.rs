//! Kernel families, subkernel truncations, Carleman norm-functions and iterants.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Discretization;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shape of a one-dimensional basis factor, evaluated at `y = scale·(x − shift)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// `e^{−y²}`
    Gauss,
    /// `y·e^{−y²}`
    XGauss,
    /// `1/cosh y`
    Sech,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFn {
    kind: BasisKind,
    scale: f64,
    shift: f64,
}

impl BasisFn {
    pub fn new(kind: BasisKind, scale: f64, shift: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(
                "scale",
                format!("must be finite and positive, got {scale}"),
            ));
        }
        if !shift.is_finite() {
            return Err(Error::invalid("shift", "must be finite"));
        }
        Ok(Self { kind, scale, shift })
    }

    pub fn gauss() -> Self {
        Self {
            kind: BasisKind::Gauss,
            scale: 1.0,
            shift: 0.0,
        }
    }

    pub fn x_gauss() -> Self {
        Self {
            kind: BasisKind::XGauss,
            scale: 1.0,
            shift: 0.0,
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = self.scale * (x - self.shift);
        match self.kind {
            BasisKind::Gauss => (-y * y).exp(),
            BasisKind::XGauss => y * (-y * y).exp(),
            BasisKind::Sech => 1.0 / y.cosh(),
        }
    }

    /// Radius beyond which `|f| < 1e−14`.
    pub fn tail_radius(&self) -> f64 {
        let reach = match self.kind {
            BasisKind::Gauss | BasisKind::XGauss => 8.0,
            // sech(36) ≈ 4.6e−16
            BasisKind::Sech => 36.0,
        };
        self.shift.abs() + reach / self.scale
    }
}

/// `coefficient · left(s) · right(t)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableTerm {
    pub coefficient: Complex64,
    pub left: BasisFn,
    pub right: BasisFn,
}

impl SeparableTerm {
    pub fn new(coefficient: Complex64, left: BasisFn, right: BasisFn) -> Self {
        Self {
            coefficient,
            left,
            right,
        }
    }
}

/// Kernel sampled on a uniform square grid and bilinearly interpolated; zero
/// outside the sampled square.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    lo: f64,
    hi: f64,
    size: usize,
    values: Arc<[Complex64]>,
}

impl TabulatedKernel {
    /// `values[i * size + j] = K(x_i, x_j)` with `x_i = lo + i·(hi − lo)/(size − 1)`.
    pub fn new(lo: f64, hi: f64, size: usize, values: Vec<Complex64>) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid("custom_tabulated.lo/hi", "need finite lo < hi"));
        }
        if size < 2 {
            return Err(Error::invalid(
                "custom_tabulated.size",
                "need at least 2 samples per axis",
            ));
        }
        if values.len() != size * size {
            return Err(Error::invalid(
                "custom_tabulated.values",
                format!("expected {} values, got {}", size * size, values.len()),
            ));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("custom_tabulated.values", "non-finite entry"));
        }
        Ok(Self {
            lo,
            hi,
            size,
            values: values.into(),
        })
    }

    fn eval(&self, s: f64, t: f64) -> Complex64 {
        if !(s >= self.lo && s <= self.hi && t >= self.lo && t <= self.hi) {
            return ZERO;
        }
        let h = (self.hi - self.lo) / (self.size - 1) as f64;
        let locate = |x: f64| {
            let u = ((x - self.lo) / h).min((self.size - 1) as f64);
            let i = (u.floor() as usize).min(self.size - 2);
            (i, u - i as f64)
        };
        let (i, a) = locate(s);
        let (j, b) = locate(t);
        let v = |i: usize, j: usize| self.values[i * self.size + j];
        v(i, j) * ((1.0 - a) * (1.0 - b))
            + v(i + 1, j) * (a * (1.0 - b))
            + v(i, j + 1) * ((1.0 - a) * b)
            + v(i + 1, j + 1) * (a * b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    SeparableSum(Vec<SeparableTerm>),
    /// `coefficient · e^{−(s²+t²)} / (1 + (s − t)²)`
    GaussCauchy {
        coefficient: Complex64,
    },
    CustomTabulated(TabulatedKernel),
}

/// Which side of a kernel a Carleman function is taken along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `s ↦ conj(K(s, ·))`
    Row,
    /// `t ↦ K(·, t)`
    Column,
}

/// Subkernel masking: `Plain` cuts the first variable, `Tilde` cuts both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    Plain,
    Tilde,
}

/// A continuous kernel on ℝ² vanishing at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    hermitian: bool,
    label: String,
}

impl KernelSpec {
    /// Validates parameters and, when `hermitian` is claimed, checks
    /// `K(s,t) = conj(K(t,s))` on a sample lattice.
    pub fn new(family: KernelFamily, hermitian: bool, label: impl Into<String>) -> Result<Self> {
        match &family {
            KernelFamily::SeparableSum(terms) => {
                for (i, term) in terms.iter().enumerate() {
                    if !(term.coefficient.re.is_finite() && term.coefficient.im.is_finite()) {
                        return Err(Error::invalid(format!("terms[{i}].coefficient"), "must be finite"));
                    }
                }
            }
            KernelFamily::GaussCauchy { coefficient } => {
                if !(coefficient.re.is_finite() && coefficient.im.is_finite()) {
                    return Err(Error::invalid("coefficient", "must be finite"));
                }
            }
            KernelFamily::CustomTabulated(_) => {}
        }
        let spec = Self {
            family,
            hermitian,
            label: label.into(),
        };
        if hermitian && !spec.is_numerically_hermitian(1e-14) {
            return Err(Error::invalid(
                "hermitian",
                "kernel is not conjugate-symmetric on the sample lattice",
            ));
        }
        Ok(spec)
    }

    pub fn separable(terms: Vec<SeparableTerm>, label: &str) -> Result<Self> {
        let family = KernelFamily::SeparableSum(terms);
        let probe = Self {
            family: family.clone(),
            hermitian: false,
            label: String::new(),
        };
        let hermitian = probe.is_numerically_hermitian(1e-14);
        Self::new(family, hermitian, label)
    }

    /// `e^{−s²−t²}`, rank one with `∫u·v = √(π/2)`.
    pub fn rank1_gauss() -> Self {
        Self::separable(
            vec![SeparableTerm::new(
                Complex64::new(1.0, 0.0),
                BasisFn::gauss(),
                BasisFn::gauss(),
            )],
            "rank1_gauss",
        )
        .expect("builtin")
    }

    /// `e^{−s²}·t e^{−t²}`, nilpotent: `T² = 0`.
    pub fn rank1_odd() -> Self {
        Self::separable(
            vec![SeparableTerm::new(
                Complex64::new(1.0, 0.0),
                BasisFn::gauss(),
                BasisFn::x_gauss(),
            )],
            "rank1_odd",
        )
        .expect("builtin")
    }

    /// `e^{−s²}e^{−t²} + ½·(s e^{−s²})(t e^{−t²})`, two orthogonal hermitian terms.
    pub fn rank2_orthogonal() -> Self {
        Self::separable(
            vec![
                SeparableTerm::new(Complex64::new(1.0, 0.0), BasisFn::gauss(), BasisFn::gauss()),
                SeparableTerm::new(Complex64::new(0.5, 0.0), BasisFn::x_gauss(), BasisFn::x_gauss()),
            ],
            "rank2_orthogonal",
        )
        .expect("builtin")
    }

    pub fn gauss_cauchy() -> Self {
        Self::new(
            KernelFamily::GaussCauchy {
                coefficient: Complex64::new(1.0, 0.0),
            },
            true,
            "gauss_cauchy",
        )
        .expect("builtin")
    }

    pub fn zero() -> Self {
        Self::separable(
            vec![SeparableTerm::new(ZERO, BasisFn::gauss(), BasisFn::gauss())],
            "zero",
        )
        .expect("builtin")
    }

    /// Every shipped kernel family instance used in verification.
    pub fn builtins() -> Vec<KernelSpec> {
        vec![
            Self::rank1_gauss(),
            Self::rank1_odd(),
            Self::rank2_orthogonal(),
            Self::gauss_cauchy(),
        ]
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Closed-form oracles exist only for separable sums.
    pub fn is_oracle(&self) -> bool {
        matches!(self.family, KernelFamily::SeparableSum(_))
    }

    pub fn eval(&self, s: f64, t: f64) -> Complex64 {
        match &self.family {
            KernelFamily::SeparableSum(terms) => terms
                .iter()
                .map(|term| term.coefficient * (term.left.eval(s) * term.right.eval(t)))
                .sum(),
            KernelFamily::GaussCauchy { coefficient } => {
                let d = s - t;
                coefficient * ((-(s * s + t * t)).exp() / (1.0 + d * d))
            }
            KernelFamily::CustomTabulated(tab) => tab.eval(s, t),
        }
    }

    /// Radius outside of which the kernel is numerically zero (< 1e−14).
    pub fn tail_radius(&self) -> f64 {
        match &self.family {
            KernelFamily::SeparableSum(terms) => terms
                .iter()
                .flat_map(|t| [t.left.tail_radius(), t.right.tail_radius()])
                .fold(1.0, f64::max),
            KernelFamily::GaussCauchy { .. } => 8.0,
            KernelFamily::CustomTabulated(tab) => tab.lo.abs().max(tab.hi.abs()),
        }
    }

    fn is_numerically_hermitian(&self, tol: f64) -> bool {
        let r = self.tail_radius().min(10.0);
        let pts: Vec<f64> = (0..=24).map(|i| -r + 2.0 * r * i as f64 / 24.0).collect();
        pts.iter().all(|&s| {
            pts.iter()
                .all(|&t| (self.eval(s, t) - self.eval(t, s).conj()).norm() <= tol)
        })
    }

    /// `T_n(s,t) = χ_n(s)T(s,t)`, `T̃_n(s,t) = χ_n(s)T(s,t)χ_n(t)`.
    pub fn subkernel(&self, trunc: &TruncationScheme, n: usize, variant: Variant, s: f64, t: f64) -> Complex64 {
        let tau = trunc.tau(n);
        subkernel_at(self, tau, variant, s, t)
    }

    /// `‖K(s,·)‖` (row) or `‖K(·,s)‖` (column) by quadrature on `disc`.
    pub fn carleman_norm(&self, s: f64, disc: &Discretization, side: Side) -> f64 {
        let sq: f64 = disc
            .nodes()
            .iter()
            .zip(disc.weights())
            .map(|(&x, &w)| {
                let v = match side {
                    Side::Row => self.eval(s, x),
                    Side::Column => self.eval(x, s),
                };
                w * v.norm_sqr()
            })
            .sum();
        sq.sqrt()
    }

    /// The `m`-th iterated kernel `T^{[m]}(s,t)`, an (m−1)-fold composition by
    /// quadrature on `disc`. `m = 1` returns the kernel itself.
    pub fn iterant(&self, m: usize, s: f64, t: f64, disc: &Discretization) -> Complex64 {
        assert!(m >= 1, "iterant order starts at 1");
        if m == 1 {
            return self.eval(s, t);
        }
        let x = disc.nodes();
        let w = disc.weights();
        // v(x) = T^{[k]}(x, t), starting from k = 1
        let mut v: Vec<Complex64> = x.iter().map(|&xi| self.eval(xi, t)).collect();
        for _ in 0..m - 2 {
            v = x
                .iter()
                .map(|&xi| {
                    x.iter()
                        .zip(w)
                        .zip(&v)
                        .map(|((&xj, &wj), vj)| self.eval(xi, xj) * wj * vj)
                        .sum()
                })
                .collect();
        }
        x.iter()
            .zip(w)
            .zip(&v)
            .map(|((&xj, &wj), vj)| self.eval(s, xj) * wj * vj)
            .sum()
    }
}

pub(crate) fn subkernel_at(k: &KernelSpec, tau: f64, variant: Variant, s: f64, t: f64) -> Complex64 {
    let inside = |x: f64| x.abs() < tau;
    let keep = match variant {
        Variant::Plain => inside(s),
        Variant::Tilde => inside(s) && inside(t),
    };
    if keep {
        k.eval(s, t)
    } else {
        ZERO
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    Arithmetic { step: f64 },
    Geometric { ratio: f64 },
}

/// Strictly increasing radii `τ_n → ∞` defining `𝕀_n = (−τ_n, τ_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationScheme {
    tau0: f64,
    growth: Growth,
}

impl Default for TruncationScheme {
    /// `τ_n = 1 + 0.5·n`
    fn default() -> Self {
        Self {
            tau0: 1.0,
            growth: Growth::Arithmetic { step: 0.5 },
        }
    }
}

impl TruncationScheme {
    pub fn new(tau0: f64, growth: Growth) -> Result<Self> {
        if !(tau0.is_finite() && tau0 > 0.0) {
            return Err(Error::invalid(
                "truncation.tau0",
                format!("must be positive, got {tau0}"),
            ));
        }
        match growth {
            Growth::Arithmetic { step } if !(step.is_finite() && step > 0.0) => {
                return Err(Error::invalid(
                    "truncation.step",
                    format!("must be positive, got {step}"),
                ));
            }
            Growth::Geometric { ratio } if !(ratio.is_finite() && ratio > 1.0) => {
                return Err(Error::invalid(
                    "truncation.ratio",
                    format!("must exceed 1, got {ratio}"),
                ));
            }
            _ => {}
        }
        Ok(Self { tau0, growth })
    }

    pub fn arithmetic(tau0: f64, step: f64) -> Result<Self> {
        Self::new(tau0, Growth::Arithmetic { step })
    }

    pub fn geometric(tau0: f64, ratio: f64) -> Result<Self> {
        Self::new(tau0, Growth::Geometric { ratio })
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn tau(&self, n: usize) -> f64 {
        match self.growth {
            Growth::Arithmetic { step } => self.tau0 + step * n as f64,
            Growth::Geometric { ratio } => self.tau0 * ratio.powi(n as i32),
        }
    }

    /// Indicator of the open interval `(−τ_n, τ_n)`.
    pub fn chi(&self, n: usize, x: f64) -> f64 {
        if x.abs() < self.tau(n) {
            1.0
        } else {
            0.0
        }
    }

    /// The index `n ≥ 1` with `τ_n = tau`, if any.
    pub fn index_of(&self, tau: f64) -> Option<usize> {
        (1..=100_000)
            .take_while(|&n| self.tau(n) <= tau + 1e-9)
            .find(|&n| (self.tau(n) - tau).abs() < 1e-9)
    }

    /// `P_n f` for a sampled function.
    pub fn project(&self, n: usize, nodes: &[f64], f: &[Complex64]) -> Vec<Complex64> {
        nodes.iter().zip(f).map(|(&x, v)| v * self.chi(n, x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::QuadratureConfig;

    const SQRT_HALF_PI: f64 = 1.2533141373155003;

    fn full_line(k: &KernelSpec) -> Discretization {
        let r = k.tail_radius();
        Discretization::interval(-r, r, QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let g = KernelSpec::rank1_gauss();
        assert_eq!(g.eval(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert!((g.eval(1.0, 0.0).re - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(KernelSpec::rank1_odd().eval(2.0, 0.0), ZERO);
    }

    #[test]
    fn builtins_decay_and_flags() {
        for k in KernelSpec::builtins() {
            for &(s, t) in &[(8.0, 0.0), (0.0, -8.0), (9.0, 9.0), (-8.0, 3.0)] {
                assert!(k.eval(s, t).norm() < 1e-12, "{} at ({s},{t})", k.label());
            }
        }
        assert!(KernelSpec::rank1_gauss().is_hermitian());
        assert!(KernelSpec::rank2_orthogonal().is_hermitian());
        assert!(KernelSpec::gauss_cauchy().is_hermitian());
        assert!(!KernelSpec::rank1_odd().is_hermitian());
        assert!(!KernelSpec::gauss_cauchy().is_oracle());
    }

    #[test]
    fn false_hermitian_claim_is_rejected() {
        let fam = KernelFamily::SeparableSum(vec![SeparableTerm::new(
            Complex64::new(1.0, 0.0),
            BasisFn::gauss(),
            BasisFn::x_gauss(),
        )]);
        assert!(KernelSpec::new(fam, true, "bad").is_err());
        let fam = KernelFamily::SeparableSum(vec![SeparableTerm::new(
            Complex64::new(0.0, 1.0),
            BasisFn::gauss(),
            BasisFn::gauss(),
        )]);
        // i·e^{−s²−t²} is skew, not hermitian
        assert!(KernelSpec::new(fam, true, "skew").is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BasisFn::new(BasisKind::Gauss, 0.0, 0.0).is_err());
        assert!(BasisFn::new(BasisKind::Sech, 1.0, f64::NAN).is_err());
        assert!(TruncationScheme::arithmetic(-1.0, 0.5).is_err());
        assert!(TruncationScheme::arithmetic(1.0, 0.0).is_err());
        assert!(TruncationScheme::geometric(1.0, 1.0).is_err());
        let fam = KernelFamily::GaussCauchy {
            coefficient: Complex64::new(f64::INFINITY, 0.0),
        };
        assert!(KernelSpec::new(fam, false, "inf").is_err());
    }

    #[test]
    fn carleman_norm_examples() {
        let k = KernelSpec::rank1_gauss();
        let disc = full_line(&k);
        let quarter = SQRT_HALF_PI.sqrt();
        assert!((k.carleman_norm(0.0, &disc, Side::Row) - quarter).abs() < 1e-12);
        assert!((k.carleman_norm(1.0, &disc, Side::Row) - (-1.0f64).exp() * quarter).abs() < 1e-12);
        assert_eq!(KernelSpec::zero().carleman_norm(0.3, &disc, Side::Column), 0.0);
        for s in [-1.3, 0.0, 0.7] {
            let gc = KernelSpec::gauss_cauchy();
            assert!((gc.carleman_norm(s, &disc, Side::Row) - gc.carleman_norm(s, &disc, Side::Column)).abs() < 1e-14);
        }
    }

    #[test]
    fn subkernel_examples() {
        let k = KernelSpec::rank1_gauss();
        let trunc = TruncationScheme::default();
        let n = trunc.index_of(2.0).unwrap();
        assert_eq!(k.subkernel(&trunc, n, Variant::Plain, 3.0, 0.0), ZERO);
        assert_eq!(k.subkernel(&trunc, n, Variant::Tilde, 1.0, 3.0), ZERO);
        let v = k.subkernel(&trunc, n, Variant::Plain, 1.0, 3.0);
        assert!((v.re - (-10.0f64).exp()).abs() < 1e-19);
        // boundary of the open interval is outside
        assert_eq!(k.subkernel(&trunc, n, Variant::Plain, 2.0, 0.0), ZERO);
    }

    #[test]
    fn subkernels_converge_uniformly() {
        let trunc = TruncationScheme::default();
        let pts: Vec<f64> = (0..=40).map(|i| -10.0 + 0.5 * i as f64).collect();
        for k in KernelSpec::builtins() {
            let mut last = f64::INFINITY;
            for n in 1..=20 {
                let diff = pts
                    .iter()
                    .flat_map(|&s| pts.iter().map(move |&t| (s, t)))
                    .map(|(s, t)| (k.subkernel(&trunc, n, Variant::Tilde, s, t) - k.eval(s, t)).norm())
                    .fold(0.0, f64::max);
                assert!(diff <= last);
                last = diff;
                if trunc.tau(n) >= 8.0 {
                    assert!(diff < 1e-10);
                }
            }
        }
    }

    #[test]
    fn iterant_examples() {
        let k = KernelSpec::rank1_gauss();
        let disc = full_line(&k);
        assert!((k.iterant(2, 0.0, 0.0, &disc).re - SQRT_HALF_PI).abs() < 1e-12);
        assert!((k.iterant(3, 0.0, 0.0, &disc).re - SQRT_HALF_PI * SQRT_HALF_PI).abs() < 1e-12);
        let odd = KernelSpec::rank1_odd();
        for &(s, t) in &[(0.0, 1.0), (0.3, -0.4), (1.2, 0.5)] {
            assert!(odd.iterant(2, s, t, &disc).norm() < 1e-15);
        }
    }

    #[test]
    fn iterant_semigroup() {
        let disc = full_line(&KernelSpec::rank2_orthogonal());
        for k in [KernelSpec::rank1_gauss(), KernelSpec::rank2_orthogonal()] {
            for &(s, t) in &[(0.0, 0.0), (0.4, -0.9)] {
                // ∫T^{[2]}(s,x)T(x,t)dx = T^{[3]}(s,t), ∫T^{[2]}T^{[2]} = T^{[4]}
                let via2_then_1: Complex64 = disc
                    .nodes()
                    .iter()
                    .zip(disc.weights())
                    .map(|(&x, &w)| k.iterant(2, s, x, &disc) * w * k.eval(x, t))
                    .sum();
                assert!((via2_then_1 - k.iterant(3, s, t, &disc)).norm() < 1e-8);
                let via2_then_2: Complex64 = disc
                    .nodes()
                    .iter()
                    .zip(disc.weights())
                    .map(|(&x, &w)| k.iterant(2, s, x, &disc) * w * k.iterant(2, x, t, &disc))
                    .sum();
                assert!((via2_then_2 - k.iterant(4, s, t, &disc)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn truncation_scheme_indices() {
        let t = TruncationScheme::default();
        assert_eq!(t.tau(6), 4.0);
        assert_eq!(t.index_of(4.0), Some(6));
        assert_eq!(t.index_of(4.25), None);
        let g = TruncationScheme::geometric(1.0, 2.0).unwrap();
        assert_eq!(g.index_of(8.0), Some(3));
        for n in 1..200 {
            assert!(t.tau(n + 1) > t.tau(n));
            assert!(g.tau(n.min(60) + 1) > g.tau(n.min(60)));
        }
    }

    #[test]
    fn tabulated_kernel_interpolates_bilinearly() {
        let size = 3;
        let values: Vec<Complex64> = (0..9).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let tab = TabulatedKernel::new(-1.0, 1.0, size, values).unwrap();
        let k = KernelSpec::new(KernelFamily::CustomTabulated(tab), false, "tab").unwrap();
        assert_eq!(k.eval(-1.0, -1.0).re, 0.0);
        assert_eq!(k.eval(1.0, 1.0).re, 8.0);
        assert!((k.eval(-0.5, 0.0).re - 2.5).abs() < 1e-15);
        assert_eq!(k.eval(1.5, 0.0), ZERO);
        assert!(!k.is_oracle());
        assert!(TabulatedKernel::new(0.0, 1.0, 2, vec![ZERO; 3]).is_err());
    }

    #[test]
    fn projections_increase_to_identity() {
        let trunc = TruncationScheme::default();
        let disc = Discretization::interval(-10.0, 10.0, QuadratureConfig::default()).unwrap();
        let f: Vec<Complex64> = disc
            .nodes()
            .iter()
            .map(|&x| Complex64::new(1.0 / x.cosh(), 0.0))
            .collect();
        let mut last = f64::INFINITY;
        for n in 1..=18 {
            let p = trunc.project(n, disc.nodes(), &f);
            let resid: f64 = p
                .iter()
                .zip(&f)
                .zip(disc.weights())
                .map(|((a, b), w)| w * (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid <= last);
            last = resid;
        }
    }
}
