//! Resolvent kernels for continuous bi-Carleman kernels on the real line.
//!
//! A kernel `K(s,t)` is truncated to subkernels supported on `(−τ_n, τ_n)`,
//! whose Fredholm determinants, first minors and resolvent kernels are
//! computed on composite Gauss–Legendre grids. The [`convergence`] module
//! tracks how those subkernel resolvents approach the resolvent kernel of the
//! untruncated operator.

pub mod convergence;
pub mod error;
pub mod fredholm;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod nystrom;
pub mod resolvent;

pub use error::{Error, Result};
pub use grid::{build_grid, Discretization, QuadratureConfig};
pub use kernel::{
    BasisFn, BasisKind, Growth, KernelFamily, KernelSpec, SeparableTerm, Side, TabulatedKernel, TruncationScheme,
    Variant,
};
pub use nystrom::{operator_norm_estimate, tail_norm, NystromMatrix};

pub use convergence::{
    boundedness_probe, compact_sweep, default_eval_grid, default_n_list, lambda_shift, shifted_diagnostic,
    tail_condition_report, BoundednessReport, ConvergenceReport, Envelope, ReferenceSource, ScheduleKind,
    ShiftSchedule, SweepReport, TailReport,
};
pub use fredholm::{
    char_scan, char_scan_matrix, det_matrix, det_series, minor_series, near_characteristic, CharScanResult, DetPath,
    DetResult, FredholmSeries, Region,
};
pub use resolvent::{
    back_substitution_residual, make_resolvent, neumann_full, probe_basis, residual_check, resolvent_carleman,
    second_resolvent_residual, solve_equation, NeumannExpansion, NeumannValue, ResolventCarleman, ResolventHandle,
    ResolventPath, Solution,
};

pub use num_complex::Complex64;
