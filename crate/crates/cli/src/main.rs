use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mirp_core::constants::dbm_to_watt;
use mirp_core::datasets::write_iq;
use mirp_harness::config::RfmodSource;
use mirp_harness::data::{data_dir, idx_header, summarize, SplitSummary};
use mirp_harness::search::gamma_search;
use mirp_harness::sweep::{load_sweep, save_sweep};
use mirp_harness::train::{load_training, save_training};
use mirp_harness::{
    assumption_report, emit_report, load_task, power_sweep, run_training, summary_table, ExperimentConfig,
    HarnessError, Mode, Task,
};

#[derive(Parser)]
#[command(name = "mirp", version, about = "Micro-ring perceptron RF sensing experiments")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML). Defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Config override `section.key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Mirp,
    Untrained,
    Conventional,
    All,
}

impl ModeArg {
    fn resolve(arg: Option<ModeArg>, cfg: &ExperimentConfig) -> Vec<Mode> {
        match arg {
            None => vec![cfg.experiment.mode],
            Some(ModeArg::Mirp) => vec![Mode::Mirp],
            Some(ModeArg::Untrained) => vec![Mode::Untrained],
            Some(ModeArg::Conventional) => vec![Mode::Conventional],
            Some(ModeArg::All) => Mode::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the link budget and weak-coupling checks.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Exit with status 2 when any check fails.
        #[arg(long)]
        strict: bool,
    },
    /// Train noiselessly and write checkpoints and curves.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Grid-search the ring linewidth on the validation split.
    Search {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Evaluate trained checkpoints across the RF power grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Noise trials per power.
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated powers in watts (`1e-12`) or dBm (`-90dBm`).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        powers: Option<Vec<String>>,
    },
    /// Collect sweep results into a CSV and an SVG chart.
    Report {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Power (W) for the printed summary table.
        #[arg(long, default_value_t = 1e-12)]
        power: f64,
    },
    /// Dataset utilities.
    #[command(subcommand)]
    Data(DataCommand),
}

#[derive(Subcommand)]
enum DataCommand {
    /// Print record counts, shapes and RMS statistics.
    Inspect {
        #[command(flatten)]
        common: Common,
    },
    /// Write the synthetic RF-modulation corpus as I/Q files.
    Synth {
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<mirp_core::Error> for Failure {
    fn from(e: mirp_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn parse_power(token: &str) -> Result<f64, String> {
    let t = token.trim();
    let lower = t.to_ascii_lowercase();
    let (number, dbm) = match lower.strip_suffix("dbm") {
        Some(n) => (n.trim(), true),
        None => (lower.strip_suffix('w').unwrap_or(&lower).trim(), false),
    };
    let v: f64 = number.parse().map_err(|_| format!("cannot read power `{t}`"))?;
    Ok(if dbm { dbm_to_watt(v) } else { v })
}

fn load_config(common: &Common, fallback: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("experiment.seed={seed}"));
    }
    let path = common.config.as_deref().or(fallback);
    let cfg = match path {
        Some(p) => ExperimentConfig::load(p, &overrides),
        None => ExperimentConfig::from_toml_with("", &overrides),
    };
    let cfg = cfg.map_err(|e| Failure::Usage(e.to_string()))?;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Outcome {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn cmd_validate(common: &Common, strict: bool) -> Outcome {
    let cfg = load_config(common, None)?;
    let report = assumption_report(&cfg)?;
    print!("{}", report.to_text());
    write_file(&common.out.join("validation.json"), &to_json(&report))?;
    if strict && !report.pass {
        return Err(Failure::Runtime("assumption checks failed".into()));
    }
    Ok(())
}

fn cmd_train(common: &Common, mode: Option<ModeArg>) -> Outcome {
    let cfg = load_config(common, None)?;
    write_file(&common.out.join("config.resolved.toml"), &cfg.to_toml())?;
    let data = load_task(&cfg)?;
    for m in ModeArg::resolve(mode, &cfg) {
        let outcome = run_training(&cfg, &data, m)?;
        let path = save_training(&common.out, &cfg, &outcome)?;
        println!(
            "{}: {} epochs, noiseless test accuracy {:.4}{} -> {}",
            m.name(),
            outcome.curve.len(),
            outcome.test_accuracy,
            if outcome.stopped_early { " (early stop)" } else { "" },
            path.display()
        );
    }
    Ok(())
}

fn cmd_search(common: &Common, mode: Option<ModeArg>) -> Outcome {
    let cfg = load_config(common, None)?;
    let data = load_task(&cfg)?;
    for m in ModeArg::resolve(mode, &cfg) {
        if m == Mode::Conventional {
            println!("conventional: no ring linewidth to search");
            continue;
        }
        let s = gamma_search(&cfg, &data, m)?;
        println!("{}: validation accuracy at {:e} W", m.name(), s.reference_power);
        for r in &s.rows {
            println!(
                "  linewidth/2pi {:>10.3e} Hz  noisy {:.4}  noiseless {:.4}  seed {}",
                r.linewidth_hz, r.accuracy, r.noiseless_accuracy, r.seed
            );
        }
        println!("  best {:e} Hz", s.best_linewidth_hz);
        write_file(&common.out.join(format!("{}.search.json", m.name())), &to_json(&s))?;
    }
    Ok(())
}

fn cmd_sweep(common: &Common, mode: Option<ModeArg>, trials: Option<usize>, powers: Option<&[String]>) -> Outcome {
    let fallback = common.out.join("config.resolved.toml");
    let mut common = common.clone();
    if let Some(t) = trials {
        common.overrides.push(format!("sweep.trials={t}"));
    }
    if let Some(ps) = powers {
        let watts = ps.iter().map(|p| parse_power(p)).collect::<Result<Vec<f64>, String>>().map_err(Failure::Usage)?;
        let list: Vec<String> = watts.iter().map(|w| format!("{w:e}")).collect();
        common.overrides.push(format!("sweep.powers_watt=[{}]", list.join(",")));
    }
    if common.config.is_none() && !fallback.is_file() {
        return Err(Failure::Runtime(format!(
            "no {} found; run `mirp train --out {}` first or pass --config",
            fallback.display(),
            common.out.display()
        )));
    }
    let cfg = load_config(&common, Some(&fallback))?;
    let modes = ModeArg::resolve(mode, &cfg);
    let mut states = Vec::with_capacity(modes.len());
    for &m in &modes {
        states.push(load_training(&common.out, &cfg, m)?);
    }
    let data = load_task(&cfg)?;
    let mut results = Vec::new();
    for state in &states {
        let r = power_sweep(state, &cfg, &data.test.records)?;
        let path = save_sweep(&common.out, &r)?;
        println!("{}: noiseless {:.4} -> {}", r.mode.name(), r.noiseless_accuracy, path.display());
        results.push(r);
    }
    print!("{}", summary_table(&results, 1e-12));
    Ok(())
}

fn cmd_report(out: &Path, power: f64) -> Outcome {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(out)
        .map_err(|e| io_failure(out, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".sweep.json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Runtime(format!("no *.sweep.json in {}; run `mirp sweep` first", out.display())));
    }
    let mut results = paths.iter().map(|p| load_sweep(p)).collect::<Result<Vec<_>, _>>()?;
    results.sort_by_key(|r| Mode::ALL.iter().position(|&m| m == r.mode));
    let files = emit_report(out, &results)?;
    print!("{}", summary_table(&results, power));
    println!("wrote {} and {}", files.csv.display(), files.svg.display());
    Ok(())
}

fn print_summary(s: &SplitSummary) {
    println!(
        "  {:<10} {:>6} records  {}x{}  rms mean {:.4} [{:.4}, {:.4}]  zero-rms {}  classes {:?}",
        s.name, s.records, s.channels, s.len, s.rms[0], s.rms[1], s.rms[2], s.zero_rms_records, s.class_counts
    );
}

fn cmd_inspect(common: &Common) -> Outcome {
    let cfg = load_config(common, None)?;
    let dir = data_dir(&cfg);
    if cfg.experiment.task == Task::Mnist {
        let m = dir.join("mnist");
        let (train, len) = idx_header(&m.join("train-images-idx3-ubyte"))?;
        let (test, _) = idx_header(&m.join("t10k-images-idx3-ubyte"))?;
        println!("mnist files: {train} train / {test} test, M={len}");
    }
    let data = load_task(&cfg)?;
    println!("{} as configured:", cfg.experiment.task.name());
    print_summary(&summarize("train", &data.train));
    if let Some(v) = &data.validation {
        print_summary(&summarize("validation", v));
    }
    print_summary(&summarize("test", &data.test));
    Ok(())
}

fn cmd_synth(common: &Common) -> Outcome {
    let mut cfg = load_config(common, None)?;
    cfg.experiment.task = Task::Rfmod;
    cfg.data.rfmod_source = RfmodSource::Synthetic;
    let data = load_task(&cfg)?;
    let dir = common.out.join("rfmod");
    std::fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
    // validation records follow the training records, as the loader expects
    let mut pool = data.train.records.clone();
    pool.extend(data.validation.iter().flat_map(|v| v.records.iter().cloned()));
    write_iq(&dir.join("train.iq"), &pool)?;
    write_iq(&dir.join("test.iq"), &data.test.records)?;
    println!(
        "wrote {} train and {} test frames of length {} to {}",
        pool.len(),
        data.test.len(),
        cfg.data.rfmod_len,
        dir.display()
    );
    println!("use with --set data.rfmod_source=\"iq\" --set data.dir=\"{}\"", common.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Validate { common, strict } => cmd_validate(common, *strict),
        Command::Train { common, mode } => cmd_train(common, *mode),
        Command::Search { common, mode } => cmd_search(common, *mode),
        Command::Sweep { common, mode, trials, powers } => cmd_sweep(common, *mode, *trials, powers.as_deref()),
        Command::Report { out, power } => cmd_report(out, *power),
        Command::Data(DataCommand::Inspect { common }) => cmd_inspect(common),
        Command::Data(DataCommand::Synth { common }) => cmd_synth(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("mirp: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("mirp: {msg}");
            ExitCode::from(2)
        }
    }
}
