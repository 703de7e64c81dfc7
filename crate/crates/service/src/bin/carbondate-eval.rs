use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use carbondate::eval::{gold_from_world, load_gold, AucAxis};
use carbondate::{Method, PlausibilityWindow, SyntheticWorld, UtcTimestamp};
use carbondate_service::{run_evaluation, write_outputs, ServiceConfig, TransportMode};
use clap::{ArgGroup, Parser, ValueEnum};

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Normalized,
    Raw,
}

#[derive(Parser)]
#[command(name = "carbondate-eval", version, about = "Score creation-date estimates against ground truth")]
#[command(group(ArgGroup::new("truth").required(true).args(["gold", "world"])))]
struct Cli {
    /// CSV with header uri,real_date,category.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// World descriptor written by `carbondate gen-world`.
    #[arg(long)]
    world: Option<PathBuf>,
    /// Cassette to replay; for --world it defaults to the sibling world.jsonl.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Method to disable for one extra scoring pass; repeatable.
    #[arg(long = "ablate")]
    ablate: Vec<Method>,
    #[arg(long, default_value = "eval-out")]
    out: PathBuf,
    /// Fixed current time (ISO 8601); worlds carry their own.
    #[arg(long)]
    now: Option<String>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long, value_enum, default_value_t = Axis::Normalized)]
    axis: Axis,
}

fn run(cli: Cli) -> Result<(), String> {
    let mut config = ServiceConfig::from_env().map_err(|e| e.to_string())?;
    if let Some(now) = &cli.now {
        config.now = Some(UtcTimestamp::parse_iso(now).map_err(|e| format!("--now: {e}"))?);
    }
    if let Some(p) = cli.parallelism {
        config.parallelism = p;
    }
    let gold = match (&cli.gold, &cli.world) {
        (Some(path), _) => {
            let now = config.now.unwrap_or_else(|| carbondate::Clock::now(&carbondate::SystemClock));
            let window = PlausibilityWindow::until(now).map_err(|e| e.to_string())?;
            let file = fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
            load_gold(file, &window).map_err(|e| format!("{}: {e}", path.display()))?
        }
        (None, Some(path)) => {
            let world = SyntheticWorld::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
            config.now = Some(world.now);
            if cli.replay.is_none() {
                config.transport = TransportMode::Replay(path.with_extension("jsonl"));
            }
            gold_from_world(&world)
        }
        (None, None) => unreachable!("clap requires one of --gold or --world"),
    };
    if let Some(path) = &cli.replay {
        config.transport = TransportMode::Replay(path.clone());
    }
    let estimator = config.build_estimator().map_err(|e| e.to_string())?;
    let axis = match cli.axis {
        Axis::Normalized => AucAxis::Normalized,
        Axis::Raw => AucAxis::RawIndex,
    };
    let (records, summary) = run_evaluation(gold, &estimator, &cli.ablate, axis, config.parallelism);
    write_outputs(&cli.out, &records, &summary).map_err(|e| format!("{}: {e}", cli.out.display()))?;
    eprintln!(
        "{} resources, {} estimated, {} exact; outputs in {}",
        summary.n,
        summary.estimated_count,
        summary.exact_count,
        cli.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("carbondate-eval: {e}");
            ExitCode::FAILURE
        }
    }
}
