//! Convergence of subkernel resolvents to the resolvent of the full kernel.
//!
//! Distances are discrete: sups over an evaluation grid, L² norms by
//! quadrature on a reference grid that covers the kernel's numerical support.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fredholm::near_characteristic;
use crate::grid::{build_grid, Discretization, QuadratureConfig};
use crate::kernel::{KernelSpec, TruncationScheme, Variant};
use crate::linalg::{hessenberg, CMatrix, LuFactor};
use crate::nystrom::{tail_norm, top_singular_value, NystromMatrix};
use crate::resolvent::{make_resolvent, NeumannExpansion, ResolventPath};

/// Absolute slack below which a rise in a distance sequence counts as roundoff.
pub const MONOTONE_FLOOR: f64 = 1e-12;
/// Tail norms below this label every probed regular λ as a point of strong convergence.
pub const TAIL_THRESHOLD: f64 = 1e-6;
const NEUMANN_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// `β_n ≡ 0`
    Zero,
    /// `β_n = β₀/n`, with `β_0 = β₀`
    Harmonic,
    /// `β_n = β₀·rⁿ`
    Geometric { ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSchedule {
    kind: ScheduleKind,
    beta0: Complex64,
}

impl ShiftSchedule {
    pub fn zero() -> Self {
        Self {
            kind: ScheduleKind::Zero,
            beta0: Complex64::new(0.0, 0.0),
        }
    }

    pub fn harmonic(beta0: Complex64) -> Self {
        Self {
            kind: ScheduleKind::Harmonic,
            beta0,
        }
    }

    pub fn geometric(beta0: Complex64, ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio.abs() < 1.0) {
            return Err(Error::invalid("schedule.ratio", format!("need |r| < 1, got {ratio}")));
        }
        Ok(Self {
            kind: ScheduleKind::Geometric { ratio },
            beta0,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn beta0(&self) -> Complex64 {
        self.beta0
    }

    pub fn beta(&self, n: usize) -> Complex64 {
        match self.kind {
            ScheduleKind::Zero => Complex64::new(0.0, 0.0),
            ScheduleKind::Harmonic => self.beta0 / n.max(1) as f64,
            ScheduleKind::Geometric { ratio } => self.beta0 * ratio.powi(n as i32),
        }
    }
}

/// `λ_n(λ) = λ/(1 − β_nλ)`
pub fn lambda_shift(lambda: Complex64, schedule: &ShiftSchedule, n: usize) -> Result<Complex64> {
    let beta = schedule.beta(n);
    if beta == Complex64::new(0.0, 0.0) {
        return Ok(lambda);
    }
    let denom = Complex64::new(1.0, 0.0) - beta * lambda;
    if denom.norm() <= f64::EPSILON {
        return Err(Error::Pole { n });
    }
    Ok(lambda / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceSource {
    /// Neumann series of the full kernel; needs `|λ|·‖T‖ < 1`.
    NeumannDisk,
    /// Subkernel resolvent at the largest index of the list.
    LargestN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub lambda: Complex64,
    pub n_values: Vec<usize>,
    pub tau_values: Vec<f64>,
    pub sup_t_diff: Vec<f64>,
    pub sup_row_diff: Vec<f64>,
    pub sup_col_diff: Vec<f64>,
    pub reference_source: ReferenceSource,
    /// Indices dropped because `λ_n(λ)` was characteristic for them.
    pub skipped: Vec<usize>,
}

impl ConvergenceReport {
    pub fn is_empty(&self) -> bool {
        self.n_values.is_empty()
    }

    /// All three sequences non-increasing up to [`MONOTONE_FLOOR`].
    pub fn is_monotone(&self) -> bool {
        [&self.sup_t_diff, &self.sup_row_diff, &self.sup_col_diff]
            .iter()
            .all(|seq| is_non_increasing(seq, MONOTONE_FLOOR))
    }

    /// Largest of the three final distances.
    pub fn final_max(&self) -> Option<f64> {
        let last = |v: &Vec<f64>| v.last().copied();
        Some(
            last(&self.sup_t_diff)?
                .max(last(&self.sup_row_diff)?)
                .max(last(&self.sup_col_diff)?),
        )
    }
}

pub fn is_non_increasing(seq: &[f64], floor: f64) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] + floor)
}

/// Indices whose `τ_n` lies in `[2, 6]`.
pub fn default_n_list(trunc: &TruncationScheme) -> Vec<usize> {
    (0..=400)
        .filter(|&n| {
            let tau = trunc.tau(n);
            (2.0 - 1e-12..=6.0 + 1e-12).contains(&tau)
        })
        .collect()
}

/// 49 equispaced points on `[−6, 6]`.
pub fn default_eval_grid() -> Vec<f64> {
    (0..49).map(|i| -6.0 + 0.25 * i as f64).collect()
}

/// Samples of one resolvent kernel, as needed by the three distances.
struct Samples {
    /// `eval × eval`
    pairs: CMatrix,
    /// `eval × ref_nodes`
    rows: CMatrix,
    /// `ref_nodes × eval`
    cols: CMatrix,
}

impl Samples {
    fn new(eval: &[f64], ref_nodes: &[f64], block: impl Fn(&[f64], &[f64]) -> CMatrix) -> Self {
        Self {
            pairs: block(eval, eval),
            rows: block(eval, ref_nodes),
            cols: block(ref_nodes, eval),
        }
    }

    /// (sup over pairs, sup over row anchors, sup over column anchors)
    fn distances(&self, other: &Samples, weights: &[f64]) -> (f64, f64, f64) {
        let sup_t = self.pairs.sub(&other.pairs).max_abs();
        let rows = self.rows.sub(&other.rows);
        let sup_row = (0..rows.rows())
            .map(|i| weighted_l2(rows.row(i).iter().copied(), weights))
            .fold(0.0, f64::max);
        let cols = self.cols.sub(&other.cols);
        let sup_col = (0..cols.cols())
            .map(|j| weighted_l2(cols.column(j).into_iter(), weights))
            .fold(0.0, f64::max);
        (sup_t, sup_row, sup_col)
    }
}

fn weighted_l2(v: impl Iterator<Item = Complex64>, weights: &[f64]) -> f64 {
    v.zip(weights).map(|(z, w)| w * z.norm_sqr()).sum::<f64>().sqrt()
}

fn reference_grid(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    n_list: &[usize],
    cfg: QuadratureConfig,
) -> Result<Discretization> {
    let tau_max = n_list.iter().map(|&n| trunc.tau(n)).fold(0.0, f64::max);
    let radius = k.tail_radius().max(tau_max);
    Discretization::interval(-radius, radius, cfg)
}

/// Distances between `T_{n|λ_n(λ)}` and a reference for `T_{|λ}`, per n.
///
/// With `reference = None` the Neumann series is used when it converges and
/// the largest-n subkernel resolvent otherwise.
#[allow(clippy::too_many_arguments)]
pub fn shifted_diagnostic(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    lambda: Complex64,
    schedule: &ShiftSchedule,
    n_list: &[usize],
    eval_grid: &[f64],
    reference: Option<ReferenceSource>,
    variant: Variant,
    cfg: QuadratureConfig,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() {
        return Err(Error::invalid("n_list", "must not be empty"));
    }
    let ref_disc = reference_grid(k, trunc, n_list, cfg)?;
    let ref_nodes = ref_disc.nodes();

    let neumann = match reference {
        Some(ReferenceSource::LargestN) => None,
        Some(ReferenceSource::NeumannDisk) => Some(NeumannExpansion::new(k, lambda, &ref_disc)?),
        None => match NeumannExpansion::new(k, lambda, &ref_disc) {
            Ok(ex) => Some(ex),
            Err(Error::NeumannDivergence { .. }) => None,
            Err(e) => return Err(e),
        },
    };
    let (reference_source, ref_samples) = match neumann {
        Some(ex) => {
            let terms = ex.terms_for(NEUMANN_TOL);
            (
                ReferenceSource::NeumannDisk,
                Samples::new(eval_grid, ref_nodes, |ss, ts| ex.eval_block(ss, ts, terms)),
            )
        }
        None => {
            let n_max = *n_list.iter().max().expect("non-empty");
            let grid = build_grid(trunc, n_max, cfg)?;
            let h = make_resolvent(k, trunc, n_max, lambda, &grid, variant, ResolventPath::Fredholm)?;
            (
                ReferenceSource::LargestN,
                Samples::new(eval_grid, ref_nodes, |ss, ts| h.eval_block(ss, ts)),
            )
        }
    };

    let cells: Vec<Result<Option<(f64, f64, f64)>>> = n_list
        .par_iter()
        .map(|&n| {
            let lambda_n = lambda_shift(lambda, schedule, n)?;
            let grid = build_grid(trunc, n, cfg)?;
            match make_resolvent(k, trunc, n, lambda_n, &grid, variant, ResolventPath::Fredholm) {
                Ok(h) => {
                    let samples = Samples::new(eval_grid, ref_nodes, |ss, ts| h.eval_block(ss, ts));
                    Ok(Some(samples.distances(&ref_samples, ref_disc.weights())))
                }
                Err(Error::Characteristic { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut report = ConvergenceReport {
        lambda,
        n_values: Vec::new(),
        tau_values: Vec::new(),
        sup_t_diff: Vec::new(),
        sup_row_diff: Vec::new(),
        sup_col_diff: Vec::new(),
        reference_source,
        skipped: Vec::new(),
    };
    for (&n, cell) in n_list.iter().zip(cells) {
        match cell? {
            Some((t, row, col)) => {
                report.n_values.push(n);
                report.tau_values.push(trunc.tau(n));
                report.sup_t_diff.push(t);
                report.sup_row_diff.push(row);
                report.sup_col_diff.push(col);
            }
            None => report.skipped.push(n),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    pub bounded: bool,
    /// Largest resolvent norm over the list; infinite on a characteristic hit.
    pub m: f64,
    pub norms: Vec<f64>,
}

/// Probes whether the Fredholm resolvents of `A_n = β_nI + T_n` at ζ stay
/// bounded along `n_list`.
pub fn boundedness_probe(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    zeta: Complex64,
    schedule: &ShiftSchedule,
    n_list: &[usize],
    cfg: QuadratureConfig,
) -> Result<BoundednessReport> {
    if zeta == Complex64::new(0.0, 0.0) {
        return Err(Error::invalid("zeta", "must be nonzero"));
    }
    if n_list.is_empty() {
        return Err(Error::invalid("n_list", "must not be empty"));
    }
    let norms: Vec<f64> = n_list
        .par_iter()
        .map(|&n| -> Result<f64> {
            let grid = build_grid(trunc, n, cfg)?;
            let a = NystromMatrix::assemble(k, trunc, n, Variant::Plain, &grid);
            let beta = schedule.beta(n);
            let mut b = a.symmetric_form();
            let mut h = hessenberg(&b);
            for i in 0..b.rows() {
                b[(i, i)] += beta;
                h[(i, i)] += beta;
            }
            if near_characteristic(&h, zeta) {
                return Ok(f64::INFINITY);
            }
            let lu = LuFactor::new(&b.identity_minus(zeta));
            let norm = top_singular_value(
                b.rows(),
                |x| b.matvec(&lu.solve(x)),
                |y| lu.solve_adjoint(&b.adjoint_matvec(y)),
            );
            Ok(if norm.is_finite() { norm } else { f64::INFINITY })
        })
        .collect::<Result<_>>()?;

    let m = norms.iter().copied().fold(0.0, f64::max);
    let mut sorted = norms.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let last = *norms.last().expect("non-empty");
    Ok(BoundednessReport {
        bounded: m.is_finite() && last <= 2.0 * median,
        m,
        norms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub n_values: Vec<usize>,
    pub tau_values: Vec<f64>,
    pub plain: Vec<f64>,
    pub tilde: Vec<f64>,
    /// Both sequences decrease and end below [`TAIL_THRESHOLD`].
    pub strong_convergence: bool,
}

/// `‖(T − T_n)T_nᵐ‖` and `‖(T − T̃_n)T̃_nᵐ‖` along `n_list`.
pub fn tail_condition_report(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    m: usize,
    n_list: &[usize],
    disc: &Discretization,
) -> Result<TailReport> {
    let pairs: Vec<(f64, f64)> = n_list
        .par_iter()
        .map(|&n| {
            Ok((
                tail_norm(k, trunc, n, m, Variant::Plain, disc)?,
                tail_norm(k, trunc, n, m, Variant::Tilde, disc)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (plain, tilde): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let settles = |v: &[f64]| is_non_increasing(v, MONOTONE_FLOOR) && v.last().is_some_and(|&x| x < TAIL_THRESHOLD);
    Ok(TailReport {
        n_values: n_list.to_vec(),
        tau_values: n_list.iter().map(|&n| trunc.tau(n)).collect(),
        strong_convergence: settles(&plain) && settles(&tilde),
        plain,
        tilde,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub n_values: Vec<usize>,
    pub tau_values: Vec<f64>,
    pub sup_t_diff: Vec<f64>,
    pub sup_row_diff: Vec<f64>,
    pub sup_col_diff: Vec<f64>,
}

impl Envelope {
    pub fn is_monotone(&self) -> bool {
        [&self.sup_t_diff, &self.sup_row_diff, &self.sup_col_diff]
            .iter()
            .all(|seq| is_non_increasing(seq, MONOTONE_FLOOR))
    }

    pub fn final_max(&self) -> Option<f64> {
        let last = |v: &Vec<f64>| v.last().copied();
        Some(
            last(&self.sup_t_diff)?
                .max(last(&self.sup_row_diff)?)
                .max(last(&self.sup_col_diff)?),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub reports: Vec<ConvergenceReport>,
    /// λ samples that were characteristic, or nearly so, for some n.
    pub skipped: Vec<Complex64>,
    pub envelope: Envelope,
}

/// Zero-schedule diagnostics over several λ plus their per-n maximum.
pub fn compact_sweep(
    k: &KernelSpec,
    trunc: &TruncationScheme,
    lambda_samples: &[Complex64],
    n_list: &[usize],
    eval_grid: &[f64],
    cfg: QuadratureConfig,
) -> Result<SweepReport> {
    let mut envelope = Envelope {
        n_values: Vec::new(),
        tau_values: Vec::new(),
        sup_t_diff: Vec::new(),
        sup_row_diff: Vec::new(),
        sup_col_diff: Vec::new(),
    };
    if lambda_samples.is_empty() {
        return Ok(SweepReport {
            reports: Vec::new(),
            skipped: Vec::new(),
            envelope,
        });
    }
    let forms: Vec<CMatrix> = n_list
        .par_iter()
        .map(|&n| {
            let grid = build_grid(trunc, n, cfg)?;
            Ok(hessenberg(
                NystromMatrix::assemble(k, trunc, n, Variant::Plain, &grid).entries(),
            ))
        })
        .collect::<Result<_>>()?;

    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for &lambda in lambda_samples {
        if forms.par_iter().any(|h| near_characteristic(h, lambda)) {
            skipped.push(lambda);
            continue;
        }
        let report = shifted_diagnostic(
            k,
            trunc,
            lambda,
            &ShiftSchedule::zero(),
            n_list,
            eval_grid,
            None,
            Variant::Plain,
            cfg,
        )?;
        reports.push(report);
    }

    if let Some(first) = reports.first() {
        envelope.n_values = first.n_values.clone();
        envelope.tau_values = first.tau_values.clone();
        let per_n_max = |pick: fn(&ConvergenceReport) -> &Vec<f64>| -> Vec<f64> {
            (0..first.n_values.len())
                .map(|i| reports.iter().map(|r| pick(r)[i]).fold(0.0, f64::max))
                .collect()
        };
        envelope.sup_t_diff = per_n_max(|r| &r.sup_t_diff);
        envelope.sup_row_diff = per_n_max(|r| &r.sup_row_diff);
        envelope.sup_col_diff = per_n_max(|r| &r.sup_col_diff);
    }
    Ok(SweepReport {
        reports,
        skipped,
        envelope,
    })
}
