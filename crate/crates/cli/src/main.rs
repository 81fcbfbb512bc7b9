use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mhq_core::report::{AnalysisReport, ReportOptions};
use mhq_core::simulation::{
    ConvergenceConfig, SimulationDesign, StudyKind, StudySummary, DEFAULT_CONVERGENCE_REPLICATES,
    RNG_ALGORITHM,
};
use mhq_core::{parse_csv, parse_json, ErrorCategory};

const EXIT_PARSE: u8 = 2;
const EXIT_UNDEFINED: u8 = 3;
const EXIT_DESIGN: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(
    name = "mhq",
    about = "Mantel-Haenszel indicators for stratified 2x2 tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute stratum ratios, MH indicators, weights and confidence intervals.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo study of the MHq variance estimators.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Print version and RNG information.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Skm,
    Bh,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input file (`stratum,a,b,c,d` CSV or JSON array); `-` reads stdin.
    input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    input_format: Option<InputFormat>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Two-sided confidence level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Variance methods for MHq; BH is reported for comparison only.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "skm")]
    methods: Vec<Method>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Worker threads; 0 uses all cores. Never changes results.
    #[arg(long, env = "MHQ_THREADS", default_value_t = 0)]
    threads: usize,
    /// Directory for `<study>.csv` and `<study>.json`; CSV goes to stdout
    /// when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    /// Number of strata.
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    n_mentioned: u64,
    #[arg(long, default_value_t = 1000)]
    n_not_mentioned: u64,
    /// True column risk ratio p1/p2, shared by all strata.
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
    #[arg(long, default_value_t = 0.01)]
    p1_low: f64,
    #[arg(long, default_value_t = 0.2)]
    p1_high: f64,
    /// Datasets per repetition.
    #[arg(long, default_value_t = 10_000)]
    datasets: usize,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    run: RunArgs,
}

impl DesignArgs {
    fn design(&self) -> SimulationDesign {
        SimulationDesign {
            k: self.k,
            n_mentioned: self.n_mentioned,
            n_not_mentioned: self.n_not_mentioned,
            psi: self.psi,
            p1_low: self.p1_low,
            p1_high: self.p1_high,
            datasets_per_rep: self.datasets,
            reps: self.reps,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long, default_value_t = 2.0)]
    psi: f64,
    /// Stratum proportions p1; p2 = p1/psi.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
    p1: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    n_mentioned: u64,
    #[arg(long, default_value_t = 1000)]
    n_not_mentioned: u64,
    /// Sample-size multipliers.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    scales: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_CONVERGENCE_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// SD bias of the SKM and BH formulas against simulated ground truth.
    Bias(DesignArgs),
    /// Coverage of nominal 95% SKM and BH intervals.
    Coverage(DesignArgs),
    /// Mean widths of the SKM and BH intervals.
    Width(DesignArgs),
    /// Mean |MHq - psi| as sample sizes grow.
    Convergence(ConvergenceArgs),
}

enum CliError {
    Core(mhq_core::Error),
    Io { path: PathBuf, source: io::Error },
    Usage(String),
}

impl From<mhq_core::Error> for CliError {
    fn from(e: mhq_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.category() {
                ErrorCategory::Parse => EXIT_PARSE,
                ErrorCategory::Undefined => EXIT_UNDEFINED,
                ErrorCategory::Design => EXIT_DESIGN,
            },
            CliError::Io { .. } => EXIT_IO,
            CliError::Usage(_) => EXIT_PARSE,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e @ mhq_core::Error::InvalidLevel(_)) => format!("--level: {e}"),
            CliError::Core(e) => e.to_string(),
            CliError::Io { path, source } => format!("{}: {source}", path.display()),
            CliError::Usage(m) => m.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => analyze(&args),
        Command::Simulate(cmd) => simulate(cmd),
        Command::Version => {
            println!("mhq {}", env!("CARGO_PKG_VERSION"));
            println!("rng: {RNG_ALGORITHM}");
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::io(path, e))?;
        return Ok(text);
    }
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let text = read_input(&args.input)?;
    let format = args.input_format.unwrap_or_else(|| {
        match args.input.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => InputFormat::Json,
            _ => InputFormat::Csv,
        }
    });
    let dataset = match format {
        InputFormat::Csv => parse_csv(&text)?,
        InputFormat::Json => parse_json(&text)?,
    };
    let opts = ReportOptions {
        level: args.level,
        include_bh: args.methods.contains(&Method::Bh),
    };
    let report = AnalysisReport::build(&dataset, &opts)?;
    let rendered = match args.format {
        OutputFormat::Text => report.to_text(),
        OutputFormat::Json => report.to_json() + "\n",
        OutputFormat::Csv => report.to_csv(),
    };
    write_output(args.out.as_deref(), &rendered)
}

fn with_pool<T>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    Ok(pool.install(f))
}

fn simulate(cmd: SimulateCommand) -> Result<(), CliError> {
    let (summary, run) = match cmd {
        SimulateCommand::Bias(args) => (run_design(StudyKind::Bias, &args)?, args.run),
        SimulateCommand::Coverage(args) => (run_design(StudyKind::Coverage, &args)?, args.run),
        SimulateCommand::Width(args) => (run_design(StudyKind::Width, &args)?, args.run),
        SimulateCommand::Convergence(args) => {
            let config = ConvergenceConfig {
                replicates: args.replicates,
                ..ConvergenceConfig::homogeneous(
                    args.psi,
                    &args.p1,
                    args.n_mentioned,
                    args.n_not_mentioned,
                    args.scales.clone(),
                    args.seed,
                )
            };
            let summary = with_pool(args.run.threads, || StudySummary::convergence(&config))??;
            (summary, args.run)
        }
    };
    match &run.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            let name = summary.study.name();
            write_output(Some(&dir.join(format!("{name}.csv"))), &summary.to_csv())?;
            write_output(
                Some(&dir.join(format!("{name}.json"))),
                &(summary.to_json() + "\n"),
            )?;
            println!("{}", summary.digest());
        }
        None => {
            write_output(None, &summary.to_csv())?;
            eprintln!("{}", summary.digest());
        }
    }
    Ok(())
}

fn run_design(kind: StudyKind, args: &DesignArgs) -> Result<StudySummary, CliError> {
    let design = args.design();
    design.validate()?;
    Ok(with_pool(args.run.threads, || {
        StudySummary::run(kind, &design)
    })??)
}
