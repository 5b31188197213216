use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hems_core::sim::{emit_report, run_scenario, RunConfig, Scenario, Summary};
use hems_core::Error;

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

const COMPARISON_FILE: &str = "comparison.json";

#[derive(Parser)]
#[command(name = "hems", version, about = "Closed-loop home energy management simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its reports.
    Run {
        #[arg(long)]
        scenario: Scenario,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate two scenarios and compare their metrics.
    Compare {
        scenario_a: Scenario,
        scenario_b: Scenario,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Simulated days including the warm-up day.
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Weather CSV; a synthetic series is generated when omitted.
    #[arg(long)]
    weather: Option<PathBuf>,
    /// JSON file overriding any run setting.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_solver_failure() {
            EXIT_SOLVER
        } else if matches!(e, Error::AtStep { .. }) {
            EXIT_RUNTIME
        } else {
            EXIT_CONFIG
        };
        Failure { code, error: e.into() }
    }
}

fn io_failure(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        error: e.into(),
    }
}

fn load_config(scenario: Scenario, common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure {
                code: EXIT_CONFIG,
                error: anyhow::anyhow!("reading {}: {e}", path.display()),
            })?;
            RunConfig::from_json_str(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.scenario = scenario;
    if let Some(days) = common.days {
        cfg.days = days;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(w) = &common.weather {
        cfg.weather_file = Some(w.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(scenario: Scenario, common: &Common, dir: &Path) -> Result<Summary, Failure> {
    let cfg = load_config(scenario, common)?;
    eprintln!("running {scenario}: {} days, seed {}", cfg.days, cfg.seed);
    let result = run_scenario(&cfg)?;
    let files = emit_report(&result, dir).map_err(io_failure)?;
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(result.summary())
}

fn print_summary(s: &Summary) {
    let cop = s.heating.average_cop.map_or("n/a".to_string(), |c| format!("{c:.2}"));
    println!(
        "{:<13} net {:>7.3} C$/day  buy {:>7.3}  sell {:>7.3}  COP {cop}  SOC {:.1}-{:.1}%",
        s.scenario, s.cost.net_cad_per_day, s.cost.buy_cad_per_day, s.cost.sell_cad_per_day, s.soc.min_pct, s.soc.max_pct
    );
}

fn compare(a: Scenario, b: Scenario, common: &Common) -> Result<(), Failure> {
    if a == b {
        return Err(Failure {
            code: EXIT_CONFIG,
            error: anyhow::anyhow!("compare needs two different scenarios"),
        });
    }
    let sa = simulate(a, common, &common.out.join(a.name()))?;
    let sb = simulate(b, common, &common.out.join(b.name()))?;
    print_summary(&sa);
    print_summary(&sb);
    let (ca, cb) = (sa.cost.net_cad_per_day, sb.cost.net_cad_per_day);
    let saving = (cb != 0.0).then(|| 100.0 * (cb - ca) / cb.abs());
    if let Some(p) = saving {
        println!("{a} costs {p:.1}% less than {b}");
    }
    let doc = json!({
        "schema_version": hems_core::sim::metrics::SCHEMA_VERSION,
        "scenario_a": sa,
        "scenario_b": sb,
        "net_cost_saving_a_vs_b_pct": saving,
    });
    let path = common.out.join(COMPARISON_FILE);
    let mut text = serde_json::to_string_pretty(&doc).map_err(io_failure)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(io_failure)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { scenario, common } => simulate(*scenario, common, &common.out).map(|s| print_summary(&s)),
        Command::Compare {
            scenario_a,
            scenario_b,
            common,
        } => compare(*scenario_a, *scenario_b, common),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code)
        }
    }
}
