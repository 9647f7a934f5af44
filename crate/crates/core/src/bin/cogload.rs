use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cogload::ingest::DEFAULT_MIN_RESPONSES;
use cogload::irt::CalibrationConfig;
use cogload::report::config::FlatConfig;
use cogload::report::{self, AnalyzeOptions, CalibrateOptions, ReportOptions};
use cogload::simgen::{self, SimConfig};
use cogload::{Error, Result};

/// Rasch calibration and cognitive-load proxy pipeline.
#[derive(Parser)]
#[command(name = "cogload", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic fixture directory.
    Simulate(SimulateArgs),
    /// Calibrate item difficulties from an event log.
    Calibrate(CalibrateArgs),
    /// Segment sessions and build the proxy tables.
    Analyze(AnalyzeArgs),
    /// Render SVGs from proxy.csv and trends.csv.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat key=value file; keys are the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    learners: Option<usize>,
    #[arg(long)]
    items: Option<usize>,
    /// Learners in the calibration bank (0 disables bank_events.csv).
    #[arg(long)]
    bank_learners: Option<usize>,
    /// Defaults to min(90, items).
    #[arg(long)]
    session_items: Option<usize>,
    /// Defaults to min(20, session_items / 3).
    #[arg(long)]
    routing_items: Option<usize>,
    #[arg(long)]
    routing_level: Option<f64>,
    #[arg(long)]
    adaptation_step: Option<f64>,
    #[arg(long)]
    admin_every: Option<usize>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    theta_mean: Option<f64>,
    #[arg(long)]
    theta_sd: Option<f64>,
    #[arg(long)]
    b_min: Option<f64>,
    #[arg(long)]
    b_max: Option<f64>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Event CSV, or a fixture directory (bank_events.csv when present,
    /// else events.csv).
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_responses: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long)]
    theta_bound: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fixture directory supplying defaults for every input path.
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    questionnaires: Option<PathBuf>,
    #[arg(long)]
    subscale_map: Option<PathBuf>,
    #[arg(long)]
    items: Option<PathBuf>,
    /// ground_truth.json or a learner_id,routing_end_ts CSV.
    #[arg(long)]
    routing: Option<PathBuf>,
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_svg: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Analysis output directory holding proxy.csv and trends.csv.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    proxy: Option<PathBuf>,
    #[arg(long)]
    trends: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FlatConfig> {
    match path {
        Some(p) => FlatConfig::load(p),
        None => Ok(FlatConfig::default()),
    }
}

fn required(value: Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    value.ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    let d = SimConfig::default();
    let out = required(cfg.resolve(args.out, "out")?, "out")?;
    let n_items = cfg.resolve(args.items, "items")?.unwrap_or(d.n_items);
    let session_item_count = cfg
        .resolve(args.session_items, "session-items")?
        .unwrap_or(d.session_item_count.min(n_items));
    let config = SimConfig {
        n_learners: cfg.resolve(args.learners, "learners")?.unwrap_or(d.n_learners),
        n_items,
        session_item_count,
        routing_item_count: cfg
            .resolve(args.routing_items, "routing-items")?
            .unwrap_or(d.routing_item_count.min(session_item_count / 3)),
        seed: cfg.resolve(args.seed, "seed")?.unwrap_or(d.seed),
        bank_learners: cfg
            .resolve(args.bank_learners, "bank-learners")?
            .unwrap_or(d.bank_learners),
        routing_level: cfg
            .resolve(args.routing_level, "routing-level")?
            .unwrap_or(d.routing_level),
        adaptation_step: cfg
            .resolve(args.adaptation_step, "adaptation-step")?
            .unwrap_or(d.adaptation_step),
        administration_every: cfg
            .resolve(args.admin_every, "admin-every")?
            .unwrap_or(d.administration_every),
        noise_sd: cfg.resolve(args.noise_sd, "noise-sd")?.unwrap_or(d.noise_sd),
        theta_mean: cfg.resolve(args.theta_mean, "theta-mean")?.unwrap_or(d.theta_mean),
        theta_sd: cfg.resolve(args.theta_sd, "theta-sd")?.unwrap_or(d.theta_sd),
        b_min: cfg.resolve(args.b_min, "b-min")?.unwrap_or(d.b_min),
        b_max: cfg.resolve(args.b_max, "b-max")?.unwrap_or(d.b_max),
        ..d
    };
    cfg.finish()?;
    let study = report::run_simulate(&config, &out)?;
    let events = study.events().len();
    let admins = study.administrations().len();
    println!("seed {}", config.seed);
    println!(
        "learners {} items {} events {} administrations {} bank_learners {}",
        config.n_learners, config.n_items, events, admins, config.bank_learners
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn events_path(p: PathBuf) -> PathBuf {
    if p.is_dir() {
        let bank = p.join(simgen::BANK_EVENTS_FILE);
        if bank.is_file() {
            return bank;
        }
        return p.join(simgen::EVENTS_FILE);
    }
    p
}

fn calibrate(args: CalibrateArgs) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    let d = CalibrationConfig::default();
    let events = events_path(required(cfg.resolve(args.events, "events")?, "events")?);
    let out = required(cfg.resolve(args.out, "out")?, "out")?;
    let opts = CalibrateOptions {
        events,
        out_dir: out.clone(),
        min_responses: cfg
            .resolve(args.min_responses, "min-responses")?
            .unwrap_or(DEFAULT_MIN_RESPONSES),
        calibration: CalibrationConfig {
            max_iterations: cfg
                .resolve(args.max_iterations, "max-iterations")?
                .unwrap_or(d.max_iterations),
            convergence_tolerance: cfg
                .resolve(args.tolerance, "tolerance")?
                .unwrap_or(d.convergence_tolerance),
            newton_damping: cfg.resolve(args.damping, "damping")?.unwrap_or(d.newton_damping),
            theta_bound: cfg.resolve(args.theta_bound, "theta-bound")?.unwrap_or(d.theta_bound),
        },
    };
    cfg.finish()?;
    let s = report::run_calibrate(&opts)?;
    println!(
        "first attempts {} items kept {} removed {} (min responses {})",
        s.first_attempts, s.kept_item_count, s.removed_item_count, opts.min_responses
    );
    println!(
        "calibrated {} items, {} learners, {} excluded; {} iterations, converged {}",
        s.calibrated_items, s.calibrated_learners, s.excluded, s.iterations_used, s.converged
    );
    println!(
        "log-likelihood {} -> {}",
        s.initial_log_likelihood, s.final_log_likelihood
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn fixture_path(fixture: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
    fixture.as_ref().map(|d| d.join(name))
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    let fixture = cfg.resolve(args.fixture, "fixture")?;
    let existing = |name: &str| fixture_path(&fixture, name).filter(|p| p.exists());
    let events = cfg
        .resolve(args.events, "events")?
        .or(fixture_path(&fixture, simgen::EVENTS_FILE));
    let questionnaires = cfg
        .resolve(args.questionnaires, "questionnaires")?
        .or(fixture_path(&fixture, simgen::QUESTIONNAIRES_FILE));
    let subscale_map = cfg
        .resolve(args.subscale_map, "subscale-map")?
        .or(existing(simgen::SUBSCALE_MAP_FILE));
    let items = cfg.resolve(args.items, "items")?.or(existing(simgen::ITEMS_FILE));
    let routing = cfg
        .resolve(args.routing, "routing")?
        .or(existing(simgen::GROUND_TRUTH_FILE));
    let file_no_svg: Option<bool> = cfg.take("no-svg")?;
    let opts = AnalyzeOptions {
        events: required(events, "events")?,
        questionnaires: required(questionnaires, "questionnaires")?,
        subscale_map,
        calibration: required(cfg.resolve(args.calibration, "calibration")?, "calibration")?,
        items,
        routing,
        out_dir: required(cfg.resolve(args.out, "out")?, "out")?,
        emit_svg: !(args.no_svg || file_no_svg.unwrap_or(false)),
    };
    cfg.finish()?;
    let s = report::run_analyze(&opts)?;
    println!(
        "segments {} records {} learners {} unassigned events {} warnings {}",
        s.n_segments, s.n_records, s.n_learners, s.n_unassigned_events, s.n_warnings
    );
    if let Some(a) = &s.alignment_combined_vs_cl {
        let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_owned(), |v| format!("{v:.4}"));
        println!(
            "combined_std vs cl_reported: pearson {} spearman {} (n = {})",
            show(a.pearson_r),
            show(a.spearman_rho),
            a.n
        );
    }
    println!("wrote {}", opts.out_dir.display());
    Ok(())
}

fn report_cmd(args: ReportArgs) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    let input = cfg.resolve(args.input, "input")?;
    let from_input = |name: &str| input.as_ref().map(|d: &PathBuf| d.join(name));
    let proxy = cfg.resolve(args.proxy, "proxy")?.or(from_input(report::PROXY_FILE));
    let trends = cfg.resolve(args.trends, "trends")?.or(from_input(report::TRENDS_FILE));
    let out = cfg.resolve(args.out, "out")?.or(input.clone());
    cfg.finish()?;
    let opts = ReportOptions {
        proxy: required(proxy, "proxy")?,
        trends: required(trends, "trends")?,
        out_dir: required(out, "out")?,
    };
    report::run_report(&opts)?;
    println!("wrote {}", opts.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors share exit status 1 with other invalid input.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Analyze(a) => analyze(a),
        Command::Report(a) => report_cmd(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(report::exit_code(&e) as u8)
        }
    }
}
