//! `fredkern` command runner.
//!
//! ```text
//! fredkern <solve|det|resolvent|scan|converge|tailnorm> --config <path>
//!          [--lambda re[,im]] [--region re0,re1,im0,im1] [--out <dir>]
//! ```
//!
//! Exit codes: 0 success, 1 usage/config/I-O error, 2 numerical obstruction
//! (characteristic λ, divergent Neumann series, shift pole). Each error is a
//! single `E_*` line on stderr; warnings are `W_*` lines.

pub mod config;
pub mod output;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use fredkern::{
    back_substitution_residual, build_grid, char_scan, det_matrix, det_series, make_resolvent, near_characteristic,
    shifted_diagnostic, solve_equation, tail_condition_report, Complex64, Discretization, NystromMatrix, Region,
    Variant,
};

use config::{ConfigError, DetPathName, Model, RunConfig};
use fredkern::linalg::hessenberg;
use output::{fmt_short, write_csv, Field};

pub use config::parse_config;
pub use output::emit_grid_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Solve,
    Det,
    Resolvent,
    Scan,
    Converge,
    Tailnorm,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Det => "det",
            Command::Resolvent => "resolvent",
            Command::Scan => "scan",
            Command::Converge => "converge",
            Command::Tailnorm => "tailnorm",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fredkern",
    version,
    about = "Fredholm determinants and resolvent kernels of truncated kernels"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Overrides `lambda`: `re` or `re,im`
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Overrides `scan.region`: `re0,re1,im0,im1`
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// Overrides `output.dir`
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(ConfigError),
    Io { path: PathBuf, message: String },
    Numeric(fredkern::Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Numeric(fredkern::Error::InvalidParameter { .. })
            | Failure::Numeric(fredkern::Error::UnsupportedOrder(_))
            | Failure::Numeric(fredkern::Error::BudgetExceeded { .. }) => 1,
            Failure::Numeric(_) => 2,
            _ => 1,
        }
    }

    fn line(&self) -> String {
        use fredkern::Error as E;
        match self {
            Failure::Usage(m) => format!("E_USAGE msg={m:?}"),
            Failure::Config(e) => format!("E_CONFIG path={} msg={:?}", e.path, e.message),
            Failure::Io { path, message } => format!("E_IO path={} msg={message:?}", path.display()),
            Failure::Numeric(e) => match e {
                E::Characteristic { lambda, det_abs } => {
                    format!(
                        "E_CHARACTERISTIC lambda={:e},{:e} det_abs={det_abs:e}",
                        lambda.re, lambda.im
                    )
                }
                E::NeumannDivergence { product } => format!("E_NEUMANN_DIVERGENCE product={product:e}"),
                E::Pole { n } => format!("E_POLE n={n}"),
                E::BudgetExceeded { nodes, ceiling } => format!("E_BUDGET nodes={nodes} ceiling={ceiling}"),
                other => format!("E_NUMERIC msg={:?}", other.to_string()),
            },
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<fredkern::Error> for Failure {
    fn from(e: fredkern::Error) -> Self {
        Failure::Numeric(e)
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Runs one command; `argv` excludes the program name.
pub fn run_command<S: AsRef<str>>(argv: &[S]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_command`] with explicit output streams.
pub fn run_with<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = std::iter::once("fredkern").chain(argv.iter().map(|a| a.as_ref()));
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let first = e
                .to_string()
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ")
                .to_string();
            let _ = writeln!(err, "{}", Failure::Usage(first).line());
            return 1;
        }
    };
    match run(&cli, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "{}", f.line());
            f.code()
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("FREDKERN_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| ConfigError::new("FREDKERN_THREADS", format!("expected a positive integer, got {raw:?}")))?;
    // a second call in the same process finds the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn parse_floats(raw: &str, what: &str) -> Result<Vec<f64>, Failure> {
    raw.split(',')
        .map(|p| p.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Failure::Usage(format!("--{what}: cannot parse {raw:?}")))
}

fn parse_lambda(raw: &str) -> Result<Complex64, Failure> {
    match parse_floats(raw, "lambda")?.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(Failure::Usage(format!("--lambda: expected re or re,im, got {raw:?}"))),
    }
}

fn parse_region(raw: &str) -> Result<[f64; 4], Failure> {
    parse_floats(raw, "region")?
        .try_into()
        .map_err(|_| Failure::Usage(format!("--region: expected re0,re1,im0,im1, got {raw:?}")))
}

struct Run<'a> {
    cfg: RunConfig,
    model: Model,
    dir: PathBuf,
    log: String,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Run<'_> {
    fn warn(&mut self, line: String) {
        let _ = writeln!(self.err, "{line}");
        let _ = writeln!(self.log, "{line}");
    }

    fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<Field>]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        emit_grid_csv(&path, header, rows).map_err(|e| io_failure(&path, e))?;
        let _ = writeln!(self.log, "wrote {name} rows={}", rows.len());
        Ok(())
    }

    fn grid(&self) -> Result<Discretization, Failure> {
        Ok(build_grid(&self.model.trunc, self.cfg.n, self.model.quad)?)
    }

    fn lambda(&self) -> Complex64 {
        self.cfg.lambda.0
    }

    /// The determinant guard misses decimal approximations of a characteristic
    /// value (|D| ~ 1e-8 at seven digits), so also look for a nearby zero.
    fn require_regular(&self, grid: &Discretization) -> Result<(), Failure> {
        let lambda = self.lambda();
        if lambda == Complex64::new(0.0, 0.0) {
            return Ok(());
        }
        let m = NystromMatrix::assemble(&self.model.kernel, &self.model.trunc, self.cfg.n, Variant::Plain, grid);
        if near_characteristic(&hessenberg(m.entries()), lambda) {
            let det = det_matrix(&m, lambda).value;
            return Err(fredkern::Error::Characteristic {
                lambda,
                det_abs: det.norm(),
            }
            .into());
        }
        Ok(())
    }
}

fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    configure_threads()?;
    let text = std::fs::read(&cli.config).map_err(|e| io_failure(&cli.config, e))?;
    let parsed = parse_config(&text)?;
    let mut cfg = parsed.config;
    if let Some(raw) = &cli.lambda {
        cfg.lambda = config::Cplx(parse_lambda(raw)?);
    }
    if let Some(raw) = &cli.region {
        cfg.scan.region = parse_region(raw)?;
    }
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.to_string_lossy().into_owned();
    }
    let model = cfg.resolve()?;
    let dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
    let echo_path = dir.join("config.echo.json");
    std::fs::write(&echo_path, cfg.echo()).map_err(|e| io_failure(&echo_path, e))?;

    let mut run = Run {
        cfg,
        model,
        dir,
        log: format!("command={}\n", cli.command.name()),
        out,
        err,
    };
    for path in parsed.duplicate_keys {
        run.warn(format!("W_DUPLICATE_KEY path={path}"));
    }
    let result = match cli.command {
        Command::Det => det(&mut run),
        Command::Solve => solve(&mut run),
        Command::Resolvent => resolvent(&mut run),
        Command::Scan => scan(&mut run),
        Command::Converge => converge(&mut run),
        Command::Tailnorm => tailnorm(&mut run),
    };
    if let Err(f) = &result {
        let _ = writeln!(run.log, "{}", f.line());
    }
    let log_path = run.dir.join("run.log");
    std::fs::write(&log_path, &run.log).map_err(|e| io_failure(&log_path, e))?;
    result
}

fn det(run: &mut Run) -> Result<(), Failure> {
    let grid = run.grid()?;
    let lambda = run.lambda();
    let Model { kernel, trunc, .. } = &run.model;
    let d = match run.cfg.det.path {
        DetPathName::Matrix => {
            let m = NystromMatrix::assemble(kernel, trunc, run.cfg.n, run.cfg.variant.into(), &grid);
            det_matrix(&m, lambda)
        }
        DetPathName::Series => det_series(kernel, trunc, run.cfg.n, lambda, &grid, run.cfg.det.m_max)?,
    };
    let _ = writeln!(run.out, "D {} {}", fmt_short(d.value.re), fmt_short(d.value.im));
    run.write_csv(
        "det.csv",
        &["lambda_re", "lambda_im", "det_re", "det_im", "tail_bound"],
        &[vec![
            Field::Real(lambda.re),
            Field::Real(lambda.im),
            Field::Real(d.value.re),
            Field::Real(d.value.im),
            Field::Real(d.tail_bound),
        ]],
    )
}

fn solve(run: &mut Run) -> Result<(), Failure> {
    let grid = run.grid()?;
    run.require_regular(&grid)?;
    let Model { kernel, trunc, .. } = &run.model;
    let h = make_resolvent(
        kernel,
        trunc,
        run.cfg.n,
        run.lambda(),
        &grid,
        run.cfg.variant.into(),
        run.cfg.resolvent.path.into(),
    )?;
    let rhs = run.cfg.solve.rhs.build("solve.rhs")?;
    let g: Vec<Complex64> = grid.nodes().iter().map(|&x| Complex64::new(rhs.eval(x), 0.0)).collect();
    let sol = solve_equation(&h, &g)?;
    let residual = back_substitution_residual(&h, &g, &sol.values);
    let rows: Vec<Vec<Field>> = run
        .cfg
        .solve
        .grid
        .values()
        .into_iter()
        .map(|s| {
            let f = sol.value_at(&h, s, Complex64::new(rhs.eval(s), 0.0));
            vec![Field::Real(s), Field::Real(f.re), Field::Real(f.im)]
        })
        .collect();
    let _ = writeln!(run.out, "R {}", fmt_short(residual));
    run.write_csv("solution.csv", &["s", "f_re", "f_im"], &rows)
}

fn resolvent(run: &mut Run) -> Result<(), Failure> {
    let grid = run.grid()?;
    run.require_regular(&grid)?;
    let variant: Variant = run.cfg.variant.into();
    let Model { kernel, trunc, .. } = &run.model;
    let h = make_resolvent(
        kernel,
        trunc,
        run.cfg.n,
        run.lambda(),
        &grid,
        variant,
        run.cfg.resolvent.path.into(),
    )?;
    let pts = run.cfg.resolvent.grid.values();
    let values = h.eval_block(&pts, &pts);
    let mut sub_rows = Vec::with_capacity(pts.len() * pts.len());
    let mut res_rows = Vec::with_capacity(pts.len() * pts.len());
    for (i, &s) in pts.iter().enumerate() {
        for (j, &t) in pts.iter().enumerate() {
            let k = kernel.subkernel(trunc, run.cfg.n, variant, s, t);
            let r = values[(i, j)];
            sub_rows.push(vec![
                Field::Real(s),
                Field::Real(t),
                Field::Real(k.re),
                Field::Real(k.im),
            ]);
            res_rows.push(vec![
                Field::Real(s),
                Field::Real(t),
                Field::Real(r.re),
                Field::Real(r.im),
            ]);
        }
    }
    let header = ["s", "t", "re", "im"];
    run.write_csv("subkernel.csv", &header, &sub_rows)?;
    run.write_csv("resolvent.csv", &header, &res_rows)
}

fn scan(run: &mut Run) -> Result<(), Failure> {
    let grid = run.grid()?;
    let [a, b, c, d] = run.cfg.scan.region;
    let region = Region::new(a, b, c, d)?;
    let result = char_scan(
        &run.model.kernel,
        &run.model.trunc,
        run.cfg.n,
        region,
        run.cfg.scan.density,
        &grid,
    )?;
    let rows: Vec<Vec<Field>> = result
        .zeros
        .iter()
        .map(|z| vec![Field::Real(z.re), Field::Real(z.im)])
        .collect();
    let mut buf = Vec::new();
    write_csv(&mut buf, &["re", "im"], &rows).map_err(|e| io_failure(Path::new("<stdout>"), e))?;
    let _ = run.out.write_all(&buf);
    run.write_csv("zeros.csv", &["re", "im"], &rows)
}

fn converge(run: &mut Run) -> Result<(), Failure> {
    let block = &run.cfg.converge;
    let n_list = block.n_list.clone().unwrap_or_default();
    let report = shifted_diagnostic(
        &run.model.kernel,
        &run.model.trunc,
        run.lambda(),
        &block.schedule.build()?,
        &n_list,
        &block.eval_grid.values(),
        block.reference.source(),
        run.cfg.variant.into(),
        run.model.quad,
    )?;
    for n in &report.skipped {
        run.warn(format!("W_SKIPPED n={n} reason=characteristic"));
    }
    let _ = writeln!(run.log, "reference={:?}", report.reference_source);
    let rows: Vec<Vec<Field>> = (0..report.n_values.len())
        .map(|i| {
            vec![
                Field::Index(report.n_values[i]),
                Field::Real(report.tau_values[i]),
                Field::Real(report.sup_t_diff[i]),
                Field::Real(report.sup_row_diff[i]),
                Field::Real(report.sup_col_diff[i]),
            ]
        })
        .collect();
    run.write_csv(
        "convergence.csv",
        &["n", "tau_n", "sup_T_diff", "sup_row_diff", "sup_col_diff"],
        &rows,
    )
}

fn tailnorm(run: &mut Run) -> Result<(), Failure> {
    let block = &run.cfg.tailnorm;
    let n_list = block.n_list.clone().unwrap_or_default();
    let radius = block.outer_radius.unwrap_or_default();
    let outer = Discretization::interval(-radius, radius, run.model.quad)?;
    let report = tail_condition_report(&run.model.kernel, &run.model.trunc, block.m, &n_list, &outer)?;
    let _ = writeln!(run.log, "strong_convergence={}", report.strong_convergence);
    let rows: Vec<Vec<Field>> = (0..report.n_values.len())
        .map(|i| {
            vec![
                Field::Index(report.n_values[i]),
                Field::Real(report.tau_values[i]),
                Field::Real(report.plain[i]),
                Field::Real(report.tilde[i]),
            ]
        })
        .collect();
    run.write_csv("tailnorm.csv", &["n", "tau_n", "tail_norm", "tail_norm_tilde"], &rows)
}
