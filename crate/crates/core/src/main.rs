use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use roughphd::harness::{self, output, Preset, RunConfig};
use roughphd::rng::trial_seed;
use roughphd::scenario::simulate;
use roughphd::{selftest, Error};

#[derive(Parser)]
#[command(name = "roughphd", version, about = "Particle PHD filter roughening benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (TOML key/value document)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of Monte Carlo trials
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Output directory
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Built-in preset: paper-np200 or paper-np1000
    #[arg(long, global = true, default_value = "paper-np200")]
    preset: String,

    /// Run trials on a single thread
    #[arg(long, global = true)]
    serial: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the configured variants and write trials.tsv and summary.tsv
    Run,
    /// Sweep the roughening strength for both modes and write sweep.tsv
    Sweep,
    /// Dump the ground truth and scans of one trial
    Scenario {
        /// Trial index whose realization is dumped
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Run the built-in oracle and invariant checks
    Selftest,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = Preset::from_str(&cli.preset)?.config();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)?;
        cfg = harness::apply_config_text(cfg, &text)?;
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if cli.serial {
        cfg.parallel = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    if let Command::Selftest = cli.command {
        let mut all = true;
        for c in selftest::run_all() {
            let status = if c.passed { "PASS" } else { "FAIL" };
            println!("{}", format!("{status} {} {}", c.name, c.detail).trim_end());
            all &= c.passed;
        }
        return Ok(all);
    }
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Run => {
            let report = harness::run(&cfg)?;
            write(&cli.out, "trials.tsv", &output::trials_table(&cfg, &report.trials))?;
            write(&cli.out, "summary.tsv", &output::summary_table(&report.summary))?;
            for v in &report.summary.variants {
                let gain = v.gain_ratio.map_or_else(|| "-".into(), output::sig6);
                println!("{:<12} mean_ospa {} gain_ratio {}", v.name, output::sig6(v.overall_ospa), gain);
            }
        }
        Command::Sweep => {
            let report = harness::sweep(&cfg)?;
            let table = output::sweep_table(&report);
            write(&cli.out, "sweep.tsv", &table)?;
            print!("{table}");
        }
        Command::Scenario { trial } => {
            let scenario = simulate(&cfg.scenario, trial_seed(cfg.master_seed, trial))?;
            write(&cli.out, "truth.tsv", &scenario.truth.to_columns())?;
            write(&cli.out, "scans.tsv", &scenario.scans.to_columns())?;
        }
        Command::Selftest => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
