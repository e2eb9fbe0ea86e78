//! JSON run configuration.
//!
//! Parsing goes through an intermediate [`Value`] so duplicate keys can be
//! reported (the last occurrence wins) before the typed, `deny_unknown_fields`
//! pass. Every error carries the dotted path of the offending field.

use std::cell::RefCell;
use std::fmt;

use fredkern::{
    default_eval_grid, default_n_list, BasisFn, BasisKind, Complex64, KernelFamily, KernelSpec, QuadratureConfig,
    ReferenceSource, ResolventPath, SeparableTerm, ShiftSchedule, TabulatedKernel, TruncationScheme, Variant,
};
use serde::de::{DeserializeSeed, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// A complex number written as a JSON number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cplx(pub Complex64);

impl Cplx {
    pub fn real(re: f64) -> Self {
        Self(Complex64::new(re, 0.0))
    }
}

impl Serialize for Cplx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Cplx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Real(f64),
            Pair(f64, f64),
        }
        match Raw::deserialize(d) {
            Ok(Raw::Real(re)) => Ok(Cplx(Complex64::new(re, 0.0))),
            Ok(Raw::Pair(re, im)) => Ok(Cplx(Complex64::new(re, im))),
            Err(_) => Err(serde::de::Error::custom("expected a number or a [re, im] pair")),
        }
    }
}

fn one() -> Cplx {
    Cplx::real(1.0)
}

fn one_f64() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinName {
    Rank1Gauss,
    Rank1Odd,
    Rank2Orthogonal,
    GaussCauchy,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKindName {
    Gauss,
    XGauss,
    Sech,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub kind: BasisKindName,
    #[serde(default = "one_f64")]
    pub scale: f64,
    #[serde(default)]
    pub shift: f64,
}

impl BasisConfig {
    pub fn build(&self, path: &str) -> Result<BasisFn, ConfigError> {
        let kind = match self.kind {
            BasisKindName::Gauss => BasisKind::Gauss,
            BasisKindName::XGauss => BasisKind::XGauss,
            BasisKindName::Sech => BasisKind::Sech,
        };
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(ConfigError::new(
                format!("{path}.scale"),
                format!("must be positive, got {}", self.scale),
            ));
        }
        if !self.shift.is_finite() {
            return Err(ConfigError::new(format!("{path}.shift"), "must be finite"));
        }
        BasisFn::new(kind, self.scale, self.shift).map_err(|e| ConfigError::new(path, e.to_string()))
    }
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            kind: BasisKindName::Gauss,
            scale: 1.0,
            shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    #[serde(default = "one")]
    pub coefficient: Cplx,
    pub left: BasisConfig,
    pub right: BasisConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinKernel {
    pub name: BuiltinName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableSumKernel {
    pub terms: Vec<TermConfig>,
    /// Detected from the terms when absent.
    #[serde(default)]
    pub hermitian: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussCauchyKernel {
    #[serde(default = "one")]
    pub coefficient: Cplx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedKernelConfig {
    pub lo: f64,
    pub hi: f64,
    pub size: usize,
    /// Row-major `K(x_i, x_j)`.
    pub values: Vec<Cplx>,
    #[serde(default)]
    pub hermitian: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelConfig {
    Builtin(BuiltinKernel),
    SeparableSum(SeparableSumKernel),
    GaussCauchy(GaussCauchyKernel),
    CustomTabulated(TabulatedKernelConfig),
}

impl KernelConfig {
    /// Re-reads a kernel block against its variant's own type. The tagged
    /// enum buffers its content, which hides where inside it an error sits.
    fn locate_error(value: &Value) -> Option<ConfigError> {
        fn typed<T: serde::de::DeserializeOwned>(rest: Value) -> Option<ConfigError> {
            serde_path_to_error::deserialize::<_, T>(rest).err().map(|e| {
                let inner = e.path().to_string();
                let path = if inner == "." {
                    "kernel".to_string()
                } else {
                    format!("kernel.{inner}")
                };
                ConfigError::new(path, e.inner().to_string())
            })
        }
        let mut rest = value.as_object()?.clone();
        let family = rest.remove("family")?;
        let rest = Value::Object(rest);
        match family.as_str()? {
            "builtin" => typed::<BuiltinKernel>(rest),
            "separable_sum" => typed::<SeparableSumKernel>(rest),
            "gauss_cauchy" => typed::<GaussCauchyKernel>(rest),
            "custom_tabulated" => typed::<TabulatedKernelConfig>(rest),
            _ => None,
        }
    }
}

fn core(path: &'static str) -> impl Fn(fredkern::Error) -> ConfigError {
    move |e| ConfigError::new(path, e.to_string())
}

impl KernelConfig {
    pub fn build(&self) -> Result<KernelSpec, ConfigError> {
        match self {
            KernelConfig::Builtin(BuiltinKernel { name }) => Ok(match name {
                BuiltinName::Rank1Gauss => KernelSpec::rank1_gauss(),
                BuiltinName::Rank1Odd => KernelSpec::rank1_odd(),
                BuiltinName::Rank2Orthogonal => KernelSpec::rank2_orthogonal(),
                BuiltinName::GaussCauchy => KernelSpec::gauss_cauchy(),
                BuiltinName::Zero => KernelSpec::zero(),
            }),
            KernelConfig::SeparableSum(SeparableSumKernel { terms, hermitian }) => {
                if terms.is_empty() {
                    return Err(ConfigError::new("kernel.terms", "need at least one term"));
                }
                let mut built = Vec::with_capacity(terms.len());
                for (i, term) in terms.iter().enumerate() {
                    let path = format!("kernel.terms[{i}]");
                    let c = term.coefficient.0;
                    if !(c.re.is_finite() && c.im.is_finite()) {
                        return Err(ConfigError::new(format!("{path}.coefficient"), "must be finite"));
                    }
                    built.push(SeparableTerm::new(
                        c,
                        term.left.build(&format!("{path}.left"))?,
                        term.right.build(&format!("{path}.right"))?,
                    ));
                }
                match hermitian {
                    None => KernelSpec::separable(built, "separable_sum").map_err(core("kernel.terms")),
                    Some(h) => KernelSpec::new(KernelFamily::SeparableSum(built), *h, "separable_sum")
                        .map_err(core("kernel.hermitian")),
                }
            }
            KernelConfig::GaussCauchy(GaussCauchyKernel { coefficient }) => {
                let c = coefficient.0;
                let hermitian = c.im == 0.0;
                KernelSpec::new(KernelFamily::GaussCauchy { coefficient: c }, hermitian, "gauss_cauchy")
                    .map_err(core("kernel.coefficient"))
            }
            KernelConfig::CustomTabulated(TabulatedKernelConfig {
                lo,
                hi,
                size,
                values,
                hermitian,
            }) => {
                if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                    return Err(ConfigError::new(
                        "kernel.hi",
                        format!("need finite lo < hi, got {lo}, {hi}"),
                    ));
                }
                if *size < 2 {
                    return Err(ConfigError::new("kernel.size", "need at least 2 samples per axis"));
                }
                if values.len() != size * size {
                    return Err(ConfigError::new(
                        "kernel.values",
                        format!("expected {} values, got {}", size * size, values.len()),
                    ));
                }
                let table = TabulatedKernel::new(*lo, *hi, *size, values.iter().map(|v| v.0).collect())
                    .map_err(core("kernel.values"))?;
                KernelSpec::new(KernelFamily::CustomTabulated(table), *hermitian, "custom_tabulated")
                    .map_err(core("kernel.hermitian"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthConfig {
    Arithmetic { step: f64 },
    Geometric { ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default = "one_f64")]
    pub tau0: f64,
    #[serde(default = "TruncationConfig::default_growth")]
    pub growth: GrowthConfig,
}

impl TruncationConfig {
    fn default_growth() -> GrowthConfig {
        GrowthConfig::Arithmetic { step: 0.5 }
    }

    pub fn build(&self) -> Result<TruncationScheme, ConfigError> {
        if !(self.tau0.is_finite() && self.tau0 > 0.0) {
            return Err(ConfigError::new(
                "truncation.tau0",
                format!("must be positive, got {}", self.tau0),
            ));
        }
        match self.growth {
            GrowthConfig::Arithmetic { step } => {
                if !(step.is_finite() && step > 0.0) {
                    return Err(ConfigError::new(
                        "truncation.growth.step",
                        format!("must be positive, got {step}"),
                    ));
                }
                TruncationScheme::arithmetic(self.tau0, step)
            }
            GrowthConfig::Geometric { ratio } => {
                if !(ratio.is_finite() && ratio > 1.0) {
                    return Err(ConfigError::new(
                        "truncation.growth.ratio",
                        format!("must exceed 1, got {ratio}"),
                    ));
                }
                TruncationScheme::geometric(self.tau0, ratio)
            }
        }
        .map_err(|e| ConfigError::new("truncation", e.to_string()))
    }
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            tau0: 1.0,
            growth: Self::default_growth(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureBlock {
    #[serde(default = "QuadratureBlock::default_ppu")]
    pub panels_per_unit: usize,
    #[serde(default = "QuadratureBlock::default_order")]
    pub order: usize,
}

impl QuadratureBlock {
    fn default_ppu() -> usize {
        4
    }

    fn default_order() -> usize {
        8
    }

    pub fn build(&self) -> Result<QuadratureConfig, ConfigError> {
        if self.panels_per_unit == 0 {
            return Err(ConfigError::new("quadrature.panels_per_unit", "must be at least 1"));
        }
        QuadratureConfig::new(self.panels_per_unit, self.order)
            .map_err(|e| ConfigError::new("quadrature.order", e.to_string()))
    }
}

impl Default for QuadratureBlock {
    fn default() -> Self {
        Self {
            panels_per_unit: Self::default_ppu(),
            order: Self::default_order(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    #[default]
    Plain,
    Tilde,
}

impl From<VariantName> for Variant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::Plain => Variant::Plain,
            VariantName::Tilde => Variant::Tilde,
        }
    }
}

/// `points` equispaced values on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SampleGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.hi
                } else {
                    self.lo + h * i as f64
                }
            })
            .collect()
    }

    fn validate(&self, path: &str) -> Result<(), ConfigError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(ConfigError::new(format!("{path}.hi"), "need finite lo <= hi"));
        }
        if self.points == 0 {
            return Err(ConfigError::new(format!("{path}.points"), "must be at least 1"));
        }
        Ok(())
    }
}

impl Default for SampleGrid {
    fn default() -> Self {
        let g = default_eval_grid();
        Self {
            lo: g[0],
            hi: g[g.len() - 1],
            points: g.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetPathName {
    #[default]
    Matrix,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetBlock {
    #[serde(default)]
    pub path: DetPathName,
    #[serde(default = "DetBlock::default_m_max")]
    pub m_max: usize,
}

impl DetBlock {
    fn default_m_max() -> usize {
        6
    }
}

impl Default for DetBlock {
    fn default() -> Self {
        Self {
            path: DetPathName::default(),
            m_max: Self::default_m_max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolventPathName {
    #[default]
    Fredholm,
    Neumann,
}

impl From<ResolventPathName> for ResolventPath {
    fn from(p: ResolventPathName) -> Self {
        match p {
            ResolventPathName::Fredholm => ResolventPath::Fredholm,
            ResolventPathName::Neumann => ResolventPath::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventBlock {
    #[serde(default)]
    pub path: ResolventPathName,
    #[serde(default)]
    pub grid: SampleGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveBlock {
    /// Right-hand side `g`.
    #[serde(default)]
    pub rhs: BasisConfig,
    #[serde(default)]
    pub grid: SampleGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    /// `[re_min, re_max, im_min, im_max]`
    #[serde(default = "ScanBlock::default_region")]
    pub region: [f64; 4],
    /// Newton seeds per unit length.
    #[serde(default = "ScanBlock::default_density")]
    pub density: f64,
}

impl ScanBlock {
    fn default_region() -> [f64; 4] {
        [0.0, 2.0, -0.5, 0.5]
    }

    fn default_density() -> f64 {
        4.0
    }
}

impl Default for ScanBlock {
    fn default() -> Self {
        Self {
            region: Self::default_region(),
            density: Self::default_density(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKindName {
    #[default]
    Zero,
    Harmonic,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default)]
    pub kind: ScheduleKindName,
    #[serde(default = "one")]
    pub beta0: Cplx,
    /// Used by the geometric schedule only.
    #[serde(default = "ScheduleConfig::default_ratio")]
    pub ratio: f64,
}

impl ScheduleConfig {
    fn default_ratio() -> f64 {
        0.5
    }

    pub fn build(&self) -> Result<ShiftSchedule, ConfigError> {
        Ok(match self.kind {
            ScheduleKindName::Zero => ShiftSchedule::zero(),
            ScheduleKindName::Harmonic => ShiftSchedule::harmonic(self.beta0.0),
            ScheduleKindName::Geometric => ShiftSchedule::geometric(self.beta0.0, self.ratio).map_err(|_| {
                ConfigError::new("converge.schedule.ratio", format!("need |r| < 1, got {}", self.ratio))
            })?,
        })
    }
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            kind: ScheduleKindName::Zero,
            beta0: one(),
            ratio: Self::default_ratio(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceName {
    #[default]
    Auto,
    NeumannDisk,
    LargestN,
}

impl ReferenceName {
    pub fn source(self) -> Option<ReferenceSource> {
        match self {
            ReferenceName::Auto => None,
            ReferenceName::NeumannDisk => Some(ReferenceSource::NeumannDisk),
            ReferenceName::LargestN => Some(ReferenceSource::LargestN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeBlock {
    /// Indices with `τ_n ∈ [2, 6]` when absent.
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub reference: ReferenceName,
    #[serde(default)]
    pub eval_grid: SampleGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailnormBlock {
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default = "TailnormBlock::default_m")]
    pub m: usize,
    /// Radius of the full-line grid; `max(kernel tail radius, τ_max + 2)` when absent.
    #[serde(default)]
    pub outer_radius: Option<f64>,
}

impl TailnormBlock {
    fn default_m() -> usize {
        1
    }
}

impl Default for TailnormBlock {
    fn default() -> Self {
        Self {
            n_list: None,
            m: Self::default_m(),
            outer_radius: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "OutputBlock::default_dir")]
    pub dir: String,
}

impl OutputBlock {
    fn default_dir() -> String {
        "out".to_string()
    }
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: Self::default_dir(),
        }
    }
}

fn default_n() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
    /// Subkernel index for `det`, `solve`, `resolvent` and `scan`.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub variant: VariantName,
    #[serde(default)]
    pub lambda: Cplx,
    #[serde(default)]
    pub det: DetBlock,
    #[serde(default)]
    pub resolvent: ResolventBlock,
    #[serde(default)]
    pub solve: SolveBlock,
    #[serde(default)]
    pub scan: ScanBlock,
    #[serde(default)]
    pub converge: ConvergeBlock,
    #[serde(default)]
    pub tailnorm: TailnormBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Typed objects built from a validated config.
#[derive(Debug, Clone)]
pub struct Model {
    pub kernel: KernelSpec,
    pub trunc: TruncationScheme,
    pub quad: QuadratureConfig,
}

impl RunConfig {
    /// Validates every block, fills derived defaults in place and returns
    /// the typed model.
    pub fn resolve(&mut self) -> Result<Model, ConfigError> {
        let kernel = self.kernel.build()?;
        if let KernelConfig::SeparableSum(SeparableSumKernel { hermitian, .. }) = &mut self.kernel {
            hermitian.get_or_insert(kernel.is_hermitian());
        }
        let trunc = self.truncation.build()?;
        let quad = self.quadrature.build()?;

        let lam = self.lambda.0;
        if !(lam.re.is_finite() && lam.im.is_finite()) {
            return Err(ConfigError::new("lambda", "must be finite"));
        }
        if self.det.m_max == 0 || self.det.m_max > fredkern::fredholm::MAX_SERIES_ORDER {
            return Err(ConfigError::new(
                "det.m_max",
                format!(
                    "must be in 1..={}, got {}",
                    fredkern::fredholm::MAX_SERIES_ORDER,
                    self.det.m_max
                ),
            ));
        }
        self.resolvent.grid.validate("resolvent.grid")?;
        self.solve.rhs.build("solve.rhs")?;
        self.solve.grid.validate("solve.grid")?;
        let [a, b, c, d] = self.scan.region;
        fredkern::Region::new(a, b, c, d).map_err(|e| ConfigError::new("scan.region", e.to_string()))?;
        if !(self.scan.density.is_finite() && self.scan.density > 0.0) {
            return Err(ConfigError::new("scan.density", "must be positive"));
        }

        let list = self.converge.n_list.get_or_insert_with(|| default_n_list(&trunc));
        if list.is_empty() {
            return Err(ConfigError::new("converge.n_list", "must not be empty"));
        }
        self.converge.schedule.build()?;
        self.converge.eval_grid.validate("converge.eval_grid")?;

        let list = self.tailnorm.n_list.get_or_insert_with(|| default_n_list(&trunc));
        if list.is_empty() {
            return Err(ConfigError::new("tailnorm.n_list", "must not be empty"));
        }
        if self.tailnorm.m == 0 {
            return Err(ConfigError::new("tailnorm.m", "must be at least 1"));
        }
        let tau_max = list.iter().map(|&n| trunc.tau(n)).fold(0.0, f64::max);
        let radius = *self
            .tailnorm
            .outer_radius
            .get_or_insert_with(|| kernel.tail_radius().max(tau_max + 2.0));
        if !(radius.is_finite() && radius > tau_max) {
            return Err(ConfigError::new(
                "tailnorm.outer_radius",
                format!("must exceed the largest tau_n = {tau_max}, got {radius}"),
            ));
        }
        if self.output.dir.is_empty() {
            return Err(ConfigError::new("output.dir", "must not be empty"));
        }
        Ok(Model { kernel, trunc, quad })
    }

    pub fn echo(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub config: RunConfig,
    /// Dotted paths of keys that occurred more than once.
    pub duplicate_keys: Vec<String>,
}

/// Parses and structurally validates a config. Derived defaults are filled
/// later by [`RunConfig::resolve`].
pub fn parse_config(text: &[u8]) -> Result<Parsed, ConfigError> {
    let dups = RefCell::new(Vec::new());
    let mut de = serde_json::Deserializer::from_slice(text);
    let value = Tracked {
        path: String::new(),
        dups: &dups,
    }
    .deserialize(&mut de)
    .and_then(|v| de.end().map(|_| v))
    .map_err(|e| ConfigError::new("", format!("malformed JSON: {e}")))?;
    if !value.is_object() {
        return Err(ConfigError::new("", "top level must be a JSON object"));
    }
    let config: RunConfig = serde_path_to_error::deserialize(&value).map_err(|e| {
        let mut path = e.path().to_string();
        let message = e.inner().to_string();
        if path == "." {
            path.clear();
        }
        if path == "kernel" {
            if let Some(found) = value.get("kernel").and_then(KernelConfig::locate_error) {
                return found;
            }
        }
        // an unknown tag is reported at the enum, not at its tag field
        if message.starts_with("unknown variant") {
            if path == "kernel" {
                path.push_str(".family");
            } else if path.ends_with("growth") {
                path.push_str(".kind");
            }
        }
        ConfigError::new(path, message)
    })?;
    Ok(Parsed {
        config,
        duplicate_keys: dups.into_inner(),
    })
}

/// Builds a [`Value`] while recording the paths of repeated object keys.
struct Tracked<'a> {
    path: String,
    dups: &'a RefCell<Vec<String>>,
}

impl Tracked<'_> {
    fn child(&self, segment: &str) -> Self {
        let path = if self.path.is_empty() {
            segment.to_string()
        } else if segment.starts_with('[') {
            format!("{}{segment}", self.path)
        } else {
            format!("{}.{segment}", self.path)
        };
        Tracked { path, dups: self.dups }
    }
}

impl<'de> DeserializeSeed<'de> for Tracked<'_> {
    type Value = Value;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Value, D::Error> {
        d.deserialize_any(self)
    }
}

impl<'de> Visitor<'de> for Tracked<'_> {
    type Value = Value;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("any JSON value")
    }

    fn visit_bool<E>(self, v: bool) -> Result<Value, E> {
        Ok(Value::Bool(v))
    }

    fn visit_i64<E>(self, v: i64) -> Result<Value, E> {
        Ok(Value::from(v))
    }

    fn visit_u64<E>(self, v: u64) -> Result<Value, E> {
        Ok(Value::from(v))
    }

    fn visit_f64<E>(self, v: f64) -> Result<Value, E> {
        Ok(Value::from(v))
    }

    fn visit_str<E>(self, v: &str) -> Result<Value, E> {
        Ok(Value::String(v.to_string()))
    }

    fn visit_string<E>(self, v: String) -> Result<Value, E> {
        Ok(Value::String(v))
    }

    fn visit_unit<E>(self) -> Result<Value, E> {
        Ok(Value::Null)
    }

    fn visit_none<E>(self) -> Result<Value, E> {
        Ok(Value::Null)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Value, A::Error> {
        let mut out = Vec::new();
        while let Some(v) = seq.next_element_seed(self.child(&format!("[{}]", out.len())))? {
            out.push(v);
        }
        Ok(Value::Array(out))
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Value, A::Error> {
        let mut out = Map::new();
        while let Some(key) = map.next_key::<String>()? {
            let child = self.child(&key);
            let path = child.path.clone();
            let v = map.next_value_seed(child)?;
            if out.insert(key, v).is_some() {
                self.dups.borrow_mut().push(path);
            }
        }
        Ok(Value::Object(out))
    }
}
