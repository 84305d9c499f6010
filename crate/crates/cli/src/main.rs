//! Command-line surface: population validation, exact variance tables,
//! seeded Monte Carlo runs, figure-data sweeps, and the pooling-inequality
//! audit. Emits CSV/JSON for external plotting.
//!
//! Exit codes: 0 success/pass, 1 validation or audit failure, 2 usage or
//! parse error.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ipwvar::{
    OutcomeModel, PopulationSpec, SimConfig, StratumSpec, SweepParameter, SweepRow,
    WeightingScheme, gap_polynomials, run_monte_carlo, stratum_variances, sweep,
};
use output::{CsvDocument, Envelope, emit};

/// Default seed environment variable; echoed in the output envelope whenever
/// it supplies the seed.
const SEED_ENV: &str = "IPWVAR_SEED";

#[derive(Parser)]
#[command(
    name = "ipwvar",
    version,
    about = "Exact and simulated finite-sample variances for inverse propensity weighted estimators on discrete strata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a population file against the data-model invariants.
    Validate {
        /// Population JSON file.
        population: PathBuf,
    },
    /// Exact per-stratum variance table (CSV) for both weightings.
    Exact {
        /// Population JSON file.
        population: PathBuf,
        /// Weight rows by (N_x/N)^2 (variances) and N_x/N (means); the
        /// footer then totals the full estimator.
        #[arg(long, conflicts_with = "paper_literal")]
        weighted: bool,
        /// Report raw per-stratum values; the footer is the plain sum of the
        /// per-stratum variance differences. This is the default.
        #[arg(long)]
        paper_literal: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded Monte Carlo run; prints a JSON report.
    Simulate {
        /// Population JSON file.
        population: PathBuf,
        /// Comma-separated weighting schemes to evaluate on shared draws.
        #[arg(long, value_delimiter = ',', default_values_t = vec![SchemeArg::True, SchemeArg::Estimated, SchemeArg::Hybrid])]
        schemes: Vec<SchemeArg>,
        /// Replication count.
        #[arg(long, default_value_t = 200_000)]
        reps: u64,
        /// Master seed; defaults to $IPWVAR_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutcomeModelArg::Gaussian)]
        outcome_model: OutcomeModelArg,
        /// Replications per deterministic RNG chunk.
        #[arg(long, default_value_t = SimConfig::DEFAULT_CHUNK_SIZE)]
        chunk_size: u64,
        /// Worker threads (0 = all cores). Results do not depend on this.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV sweep backing one of the tool's two reference figures.
    Figure {
        /// 1: single-cell true vs estimated weighting, zero-mean and shifted
        /// panels. 2: twin cells, split vs pooled.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        figure: u8,
        /// Number of propensity grid points, placed at i/(K+1).
        #[arg(long, default_value_t = 49)]
        grid_points: usize,
        /// Monte Carlo replications per grid point; 0 disables MC columns.
        #[arg(long, default_value_t = 0)]
        reps: u64,
        /// Master seed; defaults to $IPWVAR_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutcomeModelArg::Gaussian)]
        outcome_model: OutcomeModelArg,
        /// Cell size override.
        #[arg(long, default_value_t = 17)]
        n_total: u64,
        /// Treated-arm outcome variance override.
        #[arg(long, default_value_t = 4.0)]
        var1: f64,
        /// Control-arm outcome variance override.
        #[arg(long, default_value_t = 16.0)]
        var0: f64,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit the split-vs-pooled variance gap and its certificate
    /// polynomials over an (n, p) grid; exits 0 iff everything passes.
    AppendixCheck {
        /// Largest free-assignment count n to scan (from 1).
        #[arg(long, default_value_t = 200)]
        n_max: u64,
        /// Number of propensity grid points, placed at i/(K+1).
        #[arg(long, default_value_t = 199)]
        grid_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    True,
    Estimated,
    Hybrid,
}

impl std::fmt::Display for SchemeArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SchemeArg::True => "true",
            SchemeArg::Estimated => "estimated",
            SchemeArg::Hybrid => "hybrid",
        };
        f.write_str(name)
    }
}

impl From<SchemeArg> for WeightingScheme {
    fn from(arg: SchemeArg) -> Self {
        match arg {
            SchemeArg::True => WeightingScheme::TruePropensity,
            SchemeArg::Estimated => WeightingScheme::EstimatedPropensity,
            SchemeArg::Hybrid => WeightingScheme::HybridCollapsed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutcomeModelArg {
    Gaussian,
    TwoPoint,
}

impl From<OutcomeModelArg> for OutcomeModel {
    fn from(arg: OutcomeModelArg) -> Self {
        match arg {
            OutcomeModelArg::Gaussian => OutcomeModel::Gaussian,
            OutcomeModelArg::TwoPoint => OutcomeModel::TwoPoint,
        }
    }
}

enum CliError {
    /// Unusable input: exit 2.
    Usage(String),
    /// Valid invocation, failed computation or validation: exit 1.
    Failure(String),
}

impl From<ipwvar::Error> for CliError {
    fn from(err: ipwvar::Error) -> Self {
        CliError::Failure(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {err}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Validate { population } => cmd_validate(&population),
        Command::Exact { population, weighted, out, .. } => {
            cmd_exact(&population, weighted, out.as_deref())
        }
        Command::Simulate {
            population,
            schemes,
            reps,
            seed,
            outcome_model,
            chunk_size,
            threads,
            out,
        } => cmd_simulate(
            &population,
            &schemes,
            reps,
            seed,
            outcome_model.into(),
            chunk_size,
            threads,
            out.as_deref(),
        ),
        Command::Figure {
            figure,
            grid_points,
            reps,
            seed,
            outcome_model,
            n_total,
            var1,
            var0,
            threads,
            out,
        } => cmd_figure(
            figure,
            grid_points,
            reps,
            seed,
            outcome_model.into(),
            n_total,
            var1,
            var0,
            threads,
            out.as_deref(),
        ),
        Command::AppendixCheck { n_max, grid_points, out } => {
            cmd_appendix_check(n_max, grid_points, out.as_deref())
        }
    }
}

fn load_population(path: &Path) -> Result<PopulationSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", path.display())))
}

fn resolve_seed(flag: Option<u64>) -> Result<(u64, &'static str), CliError> {
    if let Some(seed) = flag {
        return Ok((seed, "flag"));
    }
    match std::env::var(SEED_ENV) {
        Ok(value) => value
            .parse::<u64>()
            .map(|seed| (seed, "env"))
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={value} is not a valid u64 seed"))),
        Err(_) => Ok((0, "default")),
    }
}

/// Runs `body` inside a dedicated rayon pool when a thread count is pinned.
fn with_threads<T: Send>(
    threads: usize,
    body: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    if threads == 0 {
        return body();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
    pool.install(body)
}

fn cmd_validate(path: &Path) -> Result<ExitCode, CliError> {
    let pop = load_population(path)?;
    let report = pop.validate();
    if report.is_valid() {
        return Ok(ExitCode::SUCCESS);
    }
    for violation in &report.violations {
        println!("{violation}");
    }
    Ok(ExitCode::from(1))
}

fn cmd_exact(path: &Path, weighted: bool, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let pop = load_population(path)?;
    pop.require_valid()?;

    let mut doc = CsvDocument::new();
    doc.comment("population", serde_json::to_string(&pop).expect("population serializes"));
    doc.comment("mode", if weighted { "weighted" } else { "paper_literal" });
    doc.header(&["label", "v_true", "v_est", "mean_true", "mean_est", "difference"]);

    let total_size = pop.total_size() as f64;
    let mut totals = [0.0f64; 5];
    for spec in &pop.strata {
        let v = stratum_variances(spec)?;
        let (vw, mw) = if weighted {
            let share = spec.n_total as f64 / total_size;
            (share * share, share)
        } else {
            (1.0, 1.0)
        };
        let row = [
            vw * v.v_true,
            vw * v.v_est,
            mw * v.mean_true,
            mw * v.mean_est,
            vw * (v.v_true - v.v_est),
        ];
        for (total, value) in totals.iter_mut().zip(row) {
            *total += value;
        }
        doc.row(&spec.label, &row);
    }
    doc.row("TOTAL", &totals);

    emit(out, &doc.render())?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    path: &Path,
    schemes: &[SchemeArg],
    reps: u64,
    seed_flag: Option<u64>,
    outcome_model: OutcomeModel,
    chunk_size: u64,
    threads: usize,
    out: Option<&Path>,
) -> Result<ExitCode, CliError> {
    let pop = load_population(path)?;
    let (seed, seed_source) = resolve_seed(seed_flag)?;
    let schemes: Vec<WeightingScheme> = schemes.iter().map(|&s| s.into()).collect();
    let config =
        SimConfig { replications: reps, master_seed: seed, outcome_model, chunk_size };
    let report = with_threads(threads, || Ok(run_monte_carlo(&pop, &schemes, &config)?))?;
    let envelope =
        Envelope::new(report).with_population(&pop).with_seed(seed, seed_source);
    emit(out, &envelope.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn propensity_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| i as f64 / (points + 1) as f64).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_figure(
    figure: u8,
    grid_points: usize,
    reps: u64,
    seed_flag: Option<u64>,
    outcome_model: OutcomeModel,
    n_total: u64,
    var1: f64,
    var0: f64,
    threads: usize,
    out: Option<&Path>,
) -> Result<ExitCode, CliError> {
    if grid_points == 0 {
        return Err(CliError::Usage("--grid-points must be at least 1".into()));
    }
    let (seed, seed_source) = resolve_seed(seed_flag)?;
    let grid = propensity_grid(grid_points);
    let config = (reps > 0).then_some(SimConfig {
        replications: reps,
        master_seed: seed,
        outcome_model,
        chunk_size: SimConfig::DEFAULT_CHUNK_SIZE,
    });

    let mut doc = CsvDocument::new();
    doc.comment("figure", figure);
    doc.comment("n_total", n_total);
    doc.comment("var1", var1);
    doc.comment("var0", var0);
    doc.comment("grid_points", grid_points);
    doc.comment("reps", reps);
    if reps > 0 {
        doc.comment("seed", seed);
        doc.comment("seed_source", seed_source);
        doc.comment(
            "outcome_model",
            match outcome_model {
                OutcomeModel::Gaussian => "gaussian",
                OutcomeModel::TwoPoint => "two_point",
            },
        );
    }

    let cell =
        |label: &str, mu1: f64, mu0: f64| StratumSpec::new(label, 0.5, mu1, mu0, var1, var0, n_total);

    match figure {
        1 => {
            // Two panels over the same grid: zero means and shifted means.
            let schemes = [WeightingScheme::TruePropensity, WeightingScheme::EstimatedPropensity];
            let (left, right) = with_threads(threads, || {
                let left_template = PopulationSpec::new(vec![cell("x", 0.0, 0.0)]);
                let right_template = PopulationSpec::new(vec![cell("x", 1.0, 3.0)]);
                let left = sweep(
                    &left_template,
                    SweepParameter::Propensity,
                    &grid,
                    &schemes,
                    config.as_ref(),
                )?;
                let right = sweep(
                    &right_template,
                    SweepParameter::Propensity,
                    &grid,
                    &schemes,
                    config.as_ref(),
                )?;
                Ok((left, right))
            })?;
            doc.comment("left_panel", "mu1=0 mu0=0");
            doc.comment("right_panel", "mu1=1 mu0=3");
            let mut columns =
                vec!["p", "left_v_true", "left_v_est", "right_v_true", "right_v_est"];
            if reps > 0 {
                columns.extend([
                    "left_mc_v_true",
                    "left_mc_v_est",
                    "right_mc_v_true",
                    "right_mc_v_est",
                ]);
            }
            doc.header(&columns);
            for (l, r) in left.iter().zip(&right) {
                let mut values = vec![
                    l.value,
                    l.cells[0].exact_variance,
                    l.cells[1].exact_variance,
                    r.cells[0].exact_variance,
                    r.cells[1].exact_variance,
                ];
                if reps > 0 {
                    values.extend(mc_columns(l));
                    values.extend(mc_columns(r));
                }
                doc.numeric_row(&values);
            }
        }
        _ => {
            // Twin cells sharing everything: split (estimated weighting per
            // cell) versus pooled (hybrid).
            let schemes =
                [WeightingScheme::EstimatedPropensity, WeightingScheme::HybridCollapsed];
            let rows = with_threads(threads, || {
                let template =
                    PopulationSpec::new(vec![cell("a", 0.0, 0.0), cell("b", 0.0, 0.0)]);
                Ok(sweep(&template, SweepParameter::Propensity, &grid, &schemes, config.as_ref())?)
            })?;
            let mut columns = vec!["p", "v_estimated", "v_hybrid"];
            if reps > 0 {
                columns.extend(["mc_v_estimated", "mc_v_hybrid"]);
            }
            doc.header(&columns);
            for row in &rows {
                let mut values =
                    vec![row.value, row.cells[0].exact_variance, row.cells[1].exact_variance];
                if reps > 0 {
                    values.extend(mc_columns(row));
                }
                doc.numeric_row(&values);
            }
        }
    }

    emit(out, &doc.render())?;
    Ok(ExitCode::SUCCESS)
}

fn mc_columns(row: &SweepRow) -> Vec<f64> {
    row.cells.iter().map(|c| c.mc_variance.expect("MC requested")).collect()
}

#[derive(Serialize)]
struct Extremum {
    value: f64,
    n: u64,
    p: f64,
}

#[derive(Serialize)]
struct GapAudit {
    n_max: u64,
    grid_points: usize,
    gap_floor: f64,
    g1_floor: f64,
    min_gap: Extremum,
    min_g1: Extremum,
    g3_nonnegative: bool,
    boundaries_ok: bool,
    pass: bool,
}

fn cmd_appendix_check(
    n_max: u64,
    grid_points: usize,
    out: Option<&Path>,
) -> Result<ExitCode, CliError> {
    if n_max < 1 {
        return Err(CliError::Usage("--n-max must be at least 1".into()));
    }
    if grid_points == 0 {
        return Err(CliError::Usage("--grid-points must be at least 1".into()));
    }
    let grid = propensity_grid(grid_points);

    let mut min_gap = Extremum { value: f64::INFINITY, n: 0, p: 0.0 };
    let mut min_g1 = Extremum { value: f64::INFINITY, n: 0, p: 0.0 };
    let mut g3_nonnegative = true;
    let mut boundaries_ok = true;

    for n in 1..=n_max {
        for &p in &grid {
            let gap = ipwvar::collapsed_pair_gap(n, p)?;
            if gap < min_gap.value {
                min_gap = Extremum { value: gap, n, p };
            }
            let chain = gap_polynomials(n, p);
            if chain.g1 < min_g1.value {
                min_g1 = Extremum { value: chain.g1, n, p };
            }
            if chain.g3 < 0.0 {
                g3_nonnegative = false;
            }
        }
        // Exact boundary values of the certificate chain.
        let at_zero = gap_polynomials(n, 0.0);
        let at_one = gap_polynomials(n, 1.0);
        if at_zero.g1 != 0.0 || at_one.g1 != 1.0 || at_one.g2 != n as f64 {
            boundaries_ok = false;
        }
        if at_zero.g3 < 0.0 || at_one.g3 < 0.0 {
            g3_nonnegative = false;
        }
    }

    let audit = GapAudit {
        n_max,
        grid_points,
        gap_floor: -1e-15,
        g1_floor: -1e-12,
        pass: min_gap.value >= -1e-15
            && min_g1.value >= -1e-12
            && g3_nonnegative
            && boundaries_ok,
        min_gap,
        min_g1,
        g3_nonnegative,
        boundaries_ok,
    };
    let pass = audit.pass;
    emit(out, &Envelope::new(audit).to_json())?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
