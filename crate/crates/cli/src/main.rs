use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inflatelab::experiments::{self, Experiment, ExperimentError, InflationRecord, PointFailure};
use inflatelab::io::{self, ConfigError, DataSpecError, OutputError, RunConfig, exit as exit_codes};
use inflatelab::norms::{self, BesovParams, Exponent, NormError};
use inflatelab::oracle::{self, ComparisonOptions, ExtrapolationOptions, OracleError};
use inflatelab::picard::{self, EquationId, PicardError};
use inflatelab::trees::{self, AritySet, TreeError};
use inflatelab::FieldError;

#[derive(Parser)]
#[command(name = "inflatelab", version, about = "Norm inflation experiments for cubic parabolic equations on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an inflation scan and write one CSV row per scan point.
    Inflate {
        #[arg(long)]
        experiment: Option<Experiment>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the records as JSON lines.
        #[arg(long)]
        jsonl: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Print the generation-j Picard term in canonical text form.
    Iterate {
        #[arg(long)]
        equation: EquationId,
        #[arg(long)]
        data: String,
        #[arg(long)]
        generation: usize,
        /// Evaluate at this time instead of printing the time profile.
        #[arg(long)]
        time: Option<f64>,
        #[arg(long, default_value_t = picard::SeriesOptions::default().generation_cap)]
        generation_cap: usize,
    },
    /// Count or list the trees of one generation.
    Trees {
        #[arg(long)]
        generation: usize,
        #[arg(long, default_value = "3")]
        arity: AritySet,
        #[arg(long)]
        count_only: bool,
    },
    /// Besov norm of initial data (C^s by default).
    Norm {
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, default_value = "inf")]
        p: Exponent,
        #[arg(long, default_value = "inf")]
        q: Exponent,
        #[arg(long)]
        data: String,
    },
    /// Integrate the Galerkin system, optionally against the partial sums.
    Oracle {
        #[arg(long)]
        equation: EquationId,
        #[arg(long)]
        data: String,
        #[arg(long)]
        t_end: f64,
        /// Step size; defaults to 1e-5·t_end, or to Romberg's own start with --compare-j.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long = "compare-j", alias = "compare-J")]
        compare_j: Option<usize>,
        #[arg(long, default_value_t = picard::SeriesOptions::default().c0)]
        c0: f64,
    },
    /// Render a results CSV as a log-log SVG plot.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataSpecError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} scan points failed")]
    Scan { failed: usize, total: usize, code: i32 },
}

fn field_code(e: &FieldError) -> i32 {
    match e {
        FieldError::Overflow => exit_codes::RESOURCE,
        _ => exit_codes::CONFIG,
    }
}

fn picard_code(e: &PicardError) -> i32 {
    match e {
        PicardError::Field(f) => field_code(f),
        PicardError::CapExceeded { .. } | PicardError::TermBudget { .. } => exit_codes::RESOURCE,
        PicardError::Tree(_) => exit_codes::RESOURCE,
        PicardError::ArityMismatch(_) | PicardError::NonStaticData => exit_codes::CONFIG,
    }
}

fn norm_code(e: &NormError) -> i32 {
    match e {
        NormError::Field(f) => field_code(f),
        NormError::GridTooLarge { .. } => exit_codes::RESOURCE,
        NormError::NotStatic | NormError::InvalidExponent(_) => exit_codes::CONFIG,
    }
}

fn experiment_code(e: &ExperimentError) -> i32 {
    match e {
        ExperimentError::Field(f) => field_code(f),
        ExperimentError::Picard(p) => picard_code(p),
        ExperimentError::Norm(n) => norm_code(n),
        ExperimentError::FrequencyOverflow { .. } => exit_codes::RESOURCE,
        ExperimentError::TooFewPoints(_) | ExperimentError::NonPositive { .. } => exit_codes::NUMERICAL,
        ExperimentError::Window { .. }
        | ExperimentError::InvalidParameter(_)
        | ExperimentError::UnsupportedEquation(_) => exit_codes::CONFIG,
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Data(_) | CliError::Usage(_) => exit_codes::CONFIG,
            CliError::Output(_) => exit_codes::RESOURCE,
            CliError::Experiment(e) => experiment_code(e),
            CliError::Picard(e) => picard_code(e),
            CliError::Norm(e) => norm_code(e),
            CliError::Tree(TreeError::CapExceeded { .. }) => exit_codes::RESOURCE,
            CliError::Tree(TreeError::Parse { .. }) => exit_codes::CONFIG,
            CliError::Oracle(e) => match e {
                OracleError::Field(f) => field_code(f),
                OracleError::Picard(p) => picard_code(p),
                OracleError::BlowUp { .. } | OracleError::OutsideRadius { .. } => exit_codes::NUMERICAL,
                OracleError::TooManyModes(_) => exit_codes::RESOURCE,
                OracleError::NonStaticData | OracleError::InvalidStep(_) => exit_codes::CONFIG,
            },
            CliError::Scan { code, .. } => *code,
        }
    }
}

fn echo_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".config.json");
    out.with_file_name(name)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|source| OutputError::Io { path: path.to_path_buf(), source }.into())
}

fn inflate(
    experiment: Option<Experiment>,
    config: Option<&Path>,
    out: &Path,
    jsonl: Option<&Path>,
    plot: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = match (config, experiment) {
        (Some(path), exp) => io::parse_config(path, exp)?,
        (None, Some(exp)) => RunConfig::from_json("{}", Some(exp))?,
        (None, None) => return Err(CliError::Usage("give --experiment, --config or both".into())),
    };
    write_file(&echo_path(out), &cfg.to_json_pretty())?;

    let mut failures: Vec<PointFailure> = Vec::new();
    let outcomes = experiments::run_inflation_scan(&cfg.scan_spec(), |o| {
        if let Err(f) = o {
            let k = f.k.map(|k| format!(", K = {k}")).unwrap_or_default();
            eprintln!("scan point N = {}{k} failed: {}", f.n, f.error);
        }
    });
    let total = outcomes.len();
    let mut records: Vec<InflationRecord> = Vec::with_capacity(total);
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    for r in &records {
        let rel = (r.p0_xi1_closed - r.p0_xi1_pipeline).abs() / r.p0_xi1_closed.abs().max(f64::MIN_POSITIVE);
        if rel > cfg.closed_form_rtol {
            let k = r.k.map(|k| format!(", K = {k}")).unwrap_or_default();
            eprintln!("warning: N = {}{k}: pipeline differs from the closed form by {rel:.3e} (relative)", r.n);
        }
    }
    io::emit_results(&records, out, jsonl)?;
    if let Some(svg) = plot {
        io::emit_plot(&records, svg)?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        let code = failures.iter().map(|f| experiment_code(&f.error)).max().unwrap_or(exit_codes::RESOURCE);
        Err(CliError::Scan { failed: failures.len(), total, code })
    }
}

fn iterate(eq: EquationId, data: &str, j: usize, time: Option<f64>, cap: usize) -> Result<(), CliError> {
    let u0 = io::parse_data_spec(data)?;
    let xi = picard::xi_with_cap(j, &u0, &eq.spec(u0.dim()), cap)?;
    let out = match time {
        Some(t) => xi.evaluate_at(t),
        None => xi,
    };
    print!("{}", out.to_canonical_string());
    Ok(())
}

fn list_trees(j: usize, arity: AritySet, count_only: bool) -> Result<(), CliError> {
    if count_only {
        println!("{}", trees::count(j, arity));
        return Ok(());
    }
    let mut out = String::new();
    for t in trees::enumerate(j, arity)? {
        out.push_str(&t.serialize());
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

fn norm(s: f64, p: Exponent, q: Exponent, data: &str) -> Result<(), CliError> {
    let u0 = io::parse_data_spec(data)?;
    let est = norms::besov_norm(&u0, BesovParams { s, p, q })?;
    println!("value {}", io::format_float(est.value));
    println!("error_bound {}", io::format_float(est.error_bound));
    Ok(())
}

#[derive(serde::Serialize)]
struct OracleRun {
    equation: String,
    t_end: f64,
    dt: f64,
    steps: usize,
    truncation: usize,
    modes: usize,
    hermitian_defect: f64,
    field: String,
}

fn run_oracle(
    eq: EquationId,
    data: &str,
    t_end: f64,
    dt: Option<f64>,
    truncation: Option<usize>,
    compare_j: Option<usize>,
    c0: f64,
) -> Result<(), CliError> {
    let u0 = io::parse_data_spec(data)?;
    let spec = eq.spec(u0.dim());
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(CliError::Usage(format!("--t-end must be finite and ≥ 0, got {t_end}")));
    }
    let steps_for = |dt: f64| -> Result<usize, CliError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CliError::Usage(format!("--dt must be positive, got {dt}")));
        }
        Ok(((t_end / dt).ceil() as usize).max(1))
    };
    let json = if let Some(big_j) = compare_j {
        let mut opts = ComparisonOptions { truncation, ..ComparisonOptions::default() };
        opts.series.c0 = c0;
        if let Some(dt) = dt {
            opts.extrapolation = ExtrapolationOptions { initial_steps: steps_for(dt)?, ..opts.extrapolation };
        }
        let report = oracle::compare_with_series(&u0, &spec, t_end, big_j, opts)?;
        serde_json::to_string_pretty(&report).expect("report serializes")
    } else {
        let truncation = truncation.unwrap_or_else(|| oracle::default_truncation(1));
        let steps = steps_for(dt.unwrap_or(1e-5 * t_end).max(f64::MIN_POSITIVE))?;
        let sys = oracle::GalerkinSystem::new(&u0, &spec, truncation)?;
        let state = sys.run(sys.initial_state(&u0), t_end, steps)?;
        let run = OracleRun {
            equation: eq.name().to_string(),
            t_end,
            dt: t_end / steps as f64,
            steps,
            truncation,
            modes: sys.modes().len(),
            hermitian_defect: sys.hermitian_defect(&state),
            field: sys.to_field(&state).to_canonical_string(),
        };
        serde_json::to_string_pretty(&run).expect("run serializes")
    };
    println!("{json}");
    Ok(())
}

fn plot(csv: &Path, out: &Path) -> Result<(), CliError> {
    let file = std::fs::File::open(csv).map_err(|source| OutputError::Io { path: csv.to_path_buf(), source })?;
    let records = io::read_csv(file).map_err(|message| CliError::Usage(format!("{}: {message}", csv.display())))?;
    io::emit_plot(&records, out)?;
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("INFLATELAB_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("INFLATELAB_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Inflate { experiment, config, out, jsonl, plot } => {
            inflate(experiment, config.as_deref(), &out, jsonl.as_deref(), plot.as_deref())
        }
        Command::Iterate { equation, data, generation, time, generation_cap } => {
            iterate(equation, &data, generation, time, generation_cap)
        }
        Command::Trees { generation, arity, count_only } => list_trees(generation, arity, count_only),
        Command::Norm { s, p, q, data } => norm(s, p, q, &data),
        Command::Oracle { equation, data, t_end, dt, truncation, compare_j, c0 } => {
            run_oracle(equation, &data, t_end, dt, truncation, compare_j, c0)
        }
        Command::Plot { csv, out } => plot(&csv, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
