//! Command line front end. Data goes to stdout or to files named by the
//! caller; progress and diagnostics go to stderr. Exit code 0 on success,
//! 1 when the numerics fail (no convergence, broken invariant), 2 for
//! usage and configuration mistakes.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tpschwarz::config::{ConfigError, ExperimentConfig, ProblemConfig};
use tpschwarz::csvout::Table;
use tpschwarz::experiments::{
    bounds, clustering, cn_order, heatcool, weak_scaling, ExperimentError,
};
use tpschwarz::pool::{resolve_workers, WorkerPool};
use tpschwarz::scenario::{initial_state, target_field};
use tpschwarz_core::model::SpatialGrid;
use tpschwarz_core::modes::{coefficients, eigenbasis, ModeCoefficients};
use tpschwarz_core::pint::{
    assemble_fields, monolithic_solve, schwarz_solve, SchwarzSolver, SchwarzState, SolveOptions,
};
use tpschwarz_core::theory::{eigenvalue_detail, spectrum_report, SymbolCurve};

#[derive(Parser)]
#[command(name = "tpschwarz", version, about = "Window-parallel solver and spectral toolkit for parabolic tracking control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the per-mode interface coefficients.
    #[command(subcommand)]
    Modes(ModesCommand),
    /// Spectral reports for the interface iteration.
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Run the window-parallel solver on a configured problem.
    Solve(SolveArgs),
    /// Run one of the packaged studies end to end.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand)]
enum ModesCommand {
    /// Dump lambda, sigma and the interface coefficients for every mode.
    Dump(ModesDumpArgs),
}

#[derive(Args)]
struct ModesDumpArgs {
    /// Number of interior grid points.
    #[arg(long = "M")]
    interior_points: usize,
    /// Control regularization weight.
    #[arg(long)]
    nu: f64,
    /// Window length.
    #[arg(long)]
    dt: f64,
    /// Length of the spatial domain.
    #[arg(long, default_value_t = 1.0)]
    domain_length: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// Radius, norms and clustering of the iteration matrix over window counts.
    Report(ReportArgs),
    /// Eigenvalues of the iteration matrix with region membership.
    Spectrum(SpectrumArgs),
    /// The two symbol eigenvalue branches over the frequency circle.
    Symbol(SymbolArgs),
}

/// Picks the spatial mode a spectral report is about.
#[derive(Args)]
struct ModeArgs {
    /// Number of interior grid points.
    #[arg(long = "M", default_value_t = 128)]
    interior_points: usize,
    /// Mode index, counted from 1.
    #[arg(long = "m", default_value_t = 1)]
    mode: usize,
    /// Control regularization weight.
    #[arg(long)]
    nu: f64,
    /// Window length.
    #[arg(long)]
    dt: f64,
    /// Length of the spatial domain.
    #[arg(long, default_value_t = 1.0)]
    domain_length: f64,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    mode: ModeArgs,
    /// Window counts to report on.
    #[arg(long = "N-list", value_delimiter = ',', default_value = "2,4,8,16,32,64,128")]
    window_counts: Vec<usize>,
    /// Distance band counted as clustered on the symbol curve.
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Resolution of the symbol curve used for distances.
    #[arg(long, default_value_t = 2001)]
    theta_samples: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    mode: ModeArgs,
    /// Window count.
    #[arg(long = "N")]
    windows: usize,
    /// Resolution of the symbol curve used for distances.
    #[arg(long, default_value_t = 2001)]
    theta_samples: usize,
    /// Slack for the region membership test.
    #[arg(long, default_value_t = 1e-10)]
    region_tol: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SymbolArgs {
    #[command(flatten)]
    mode: ModeArgs,
    /// Number of sample points over the frequency circle.
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem description, see the JSON schema in the README.
    #[arg(long)]
    config: PathBuf,
    /// Stop when the interface increment falls below this.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Sweep budget.
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    /// Worker threads; defaults to TPS_WORKERS or the machine parallelism,
    /// never more than the window count.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; history goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the converged state, adjoint and control fields.
    #[arg(long)]
    dump_fields: bool,
    /// Skip the sequential reference solve and its error columns.
    #[arg(long)]
    no_reference: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Which study to run.
    id: ExperimentId,
    /// Overrides for the study parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the CSV outputs and the manifest.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for the solver-backed studies.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentId {
    Bounds,
    Clustering,
    CnOrder,
    WeakScaling,
    Heatcool,
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Numerical(msg) => CliError::Numerical(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Modes(ModesCommand::Dump(a)) => modes_dump(a),
        Command::Theory(TheoryCommand::Report(a)) => theory_report(a),
        Command::Theory(TheoryCommand::Spectrum(a)) => theory_spectrum(a),
        Command::Theory(TheoryCommand::Symbol(a)) => theory_symbol(a),
        Command::Solve(a) => solve(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn mode_coefficients(a: &ModeArgs) -> Result<ModeCoefficients, CliError> {
    if a.interior_points == 0 {
        return Err(CliError::Usage("need at least one interior point".into()));
    }
    if a.mode == 0 || a.mode > a.interior_points {
        return Err(CliError::Usage(format!(
            "mode index {} outside 1..={}",
            a.mode, a.interior_points
        )));
    }
    if !(a.domain_length > 0.0) {
        return Err(CliError::Usage("domain length must be positive".into()));
    }
    let grid = SpatialGrid {
        domain_length: a.domain_length,
        interior_points: a.interior_points,
    };
    let lambda = eigenbasis(&grid).lambda(a.mode - 1);
    coefficients(lambda, a.nu, a.dt).map_err(usage)
}

fn modes_dump(a: ModesDumpArgs) -> Result<(), CliError> {
    if a.interior_points == 0 {
        return Err(CliError::Usage("need at least one interior point".into()));
    }
    if !(a.domain_length > 0.0) {
        return Err(CliError::Usage("domain length must be positive".into()));
    }
    let grid = SpatialGrid {
        domain_length: a.domain_length,
        interior_points: a.interior_points,
    };
    let basis = eigenbasis(&grid);
    let mut t = Table::new("m,lambda,sigma,c1,c2");
    for m in 1..=a.interior_points {
        let c = coefficients(basis.lambda(m - 1), a.nu, a.dt).map_err(usage)?;
        t.row(&[m.into(), c.lambda.into(), c.sigma.into(), c.c1.into(), c.c2.into()]);
    }
    t.emit(a.out.as_deref()).map_err(usage)
}

fn theory_report(a: ReportArgs) -> Result<(), CliError> {
    let c = mode_coefficients(&a.mode)?;
    if a.window_counts.iter().any(|&n| n < 2) {
        return Err(CliError::Usage("window counts must be at least 2".into()));
    }
    let rows = spectrum_report(&c, &a.window_counts, a.eps, a.theta_samples.max(2))
        .map_err(numerical)?;
    let mut t =
        Table::new("N,rho,rho_tilde,sqrt_rho_tilde,inf_norm,max_dist_sigmaT,frac_outside_eps");
    for r in rows {
        t.row(&[
            r.windows.into(),
            r.rho.into(),
            r.rho_tilde.into(),
            r.sqrt_rho_tilde.into(),
            r.infinity_norm.into(),
            r.max_distance.into(),
            r.outside_fraction.into(),
        ]);
    }
    t.emit(a.out.as_deref()).map_err(usage)
}

fn theory_spectrum(a: SpectrumArgs) -> Result<(), CliError> {
    let c = mode_coefficients(&a.mode)?;
    if a.windows < 2 {
        return Err(CliError::Usage("window count must be at least 2".into()));
    }
    let rows = eigenvalue_detail(&c, a.windows, a.theta_samples.max(2), a.region_tol)
        .map_err(numerical)?;
    let mut t = Table::new("re,im,in_region_D,dist_sigmaT");
    for r in rows {
        t.row(&[r.re.into(), r.im.into(), r.in_region.into(), r.distance.into()]);
    }
    t.emit(a.out.as_deref()).map_err(usage)
}

fn theory_symbol(a: SymbolArgs) -> Result<(), CliError> {
    let c = mode_coefficients(&a.mode)?;
    let curve = SymbolCurve::sample(&c, a.samples.max(2));
    let mut t = Table::new("theta,re_plus,im_plus,re_minus,im_minus");
    for i in 0..curve.thetas().len() {
        let (p, m) = (curve.plus()[i], curve.minus()[i]);
        t.row(&[curve.thetas()[i].into(), p.re.into(), p.im.into(), m.re.into(), m.im.into()]);
    }
    t.emit(a.out.as_deref()).map_err(usage)
}

fn solve(a: SolveArgs) -> Result<(), CliError> {
    let cfg = ProblemConfig::from_path(&a.config)?;
    let spec = cfg.spec();
    spec.validate().map_err(usage)?;
    if !(a.tol > 0.0) || a.max_iters == 0 {
        return Err(CliError::Usage("tol must be positive and max-iters nonzero".into()));
    }
    if a.dump_fields && a.out.is_none() {
        return Err(CliError::Usage("--dump-fields needs --out".into()));
    }
    let workers = resolve_workers(a.workers, spec.windows).map_err(CliError::Usage)?;
    let pool = WorkerPool::new(workers).map_err(CliError::Usage)?;
    eprintln!(
        "solving {} windows x {} steps, {} interior points, {} workers",
        spec.windows, spec.steps_per_window, spec.interior_points, workers
    );

    let target = target_field(cfg.scenario, &spec);
    let y0 = initial_state(cfg.scenario, &spec);
    let solver = SchwarzSolver::new(spec, &target, &y0).map_err(numerical)?;
    let reference = if a.no_reference {
        None
    } else {
        Some(monolithic_solve(spec, &target, &y0).map_err(numerical)?)
    };
    let mut state = SchwarzState::initial(&solver);
    let report = schwarz_solve(
        &solver,
        &mut state,
        SolveOptions { tol: a.tol, max_iters: a.max_iters },
        reference.as_ref(),
        &pool,
    )
    .map_err(numerical)?;

    let mut history = Table::new("iter,interface_incr,err_y,err_p");
    for rec in &report.history {
        history.row(&[
            rec.iteration.into(),
            rec.interface_increment.into(),
            rec.err_y.into(),
            rec.err_p.into(),
        ]);
    }

    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(usage)?;
        let path = dir.join("solve_history.csv");
        history.write_to(&path).map_err(usage)?;
        eprintln!("wrote {}", path.display());
        if a.dump_fields {
            let fields = assemble_fields(&solver, &state);
            let grid = spec.grid();
            let time = spec.time();
            for (name, field) in [("state", &fields.y), ("adjoint", &fields.p), ("control", &fields.u)] {
                let mut t = Table::new("t,x,value");
                for l in 0..field.levels() {
                    for j in 0..field.nodes() {
                        t.row(&[time.time(l).into(), grid.node(j).into(), field.at(l, j).into()]);
                    }
                }
                let path = dir.join(format!("solve_{name}.csv"));
                t.write_to(&path).map_err(usage)?;
                eprintln!("wrote {}", path.display());
            }
        }
    } else {
        history.emit(None).map_err(usage)?;
    }

    let last = report.history.last().map(|r| r.interface_increment).unwrap_or(f64::NAN);
    if report.converged {
        eprintln!(
            "converged in {} sweeps, last interface increment {last:.3e}",
            report.iterations
        );
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "no convergence to {:e} within {} sweeps, last interface increment {last:.3e}; history written",
            a.tol, a.max_iters
        )))
    }
}

fn experiment(a: ExperimentArgs) -> Result<(), CliError> {
    let cfg = match &a.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    // Studies cap their own solver fan-out at the window count per run, so
    // the pool is sized from the flag, the environment or the machine alone.
    let workers = resolve_workers(a.workers, usize::MAX).map_err(CliError::Usage)?;
    let pool = WorkerPool::new(workers).map_err(CliError::Usage)?;
    let outputs = match a.id {
        ExperimentId::Bounds => bounds::run(&cfg, &a.out)?.outputs,
        ExperimentId::Clustering => clustering::run(&cfg, &a.out)?.outputs,
        ExperimentId::CnOrder => cn_order::run(&cfg, &a.out)?.outputs,
        ExperimentId::WeakScaling => weak_scaling::run(&cfg, &a.out, &pool)?.outputs,
        ExperimentId::Heatcool => heatcool::run(&cfg, &a.out, &pool)?.outputs,
    };
    eprintln!(
        "wrote {} data files and manifest.json to {}",
        outputs.len(),
        a.out.display()
    );
    Ok(())
}
