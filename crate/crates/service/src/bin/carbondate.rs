use std::fs;
use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use carbondate::sources::Upstreams;
use carbondate::{generate_world, LagModel, ReportFormat, UtcTimestamp};
use carbondate_service::{run_batch, serve, AppState, ServiceConfig, TransportMode};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "carbondate", version, about = "Estimate when web resources were created")]
struct Cli {
    #[command(flatten)]
    common: CommonFlags,
    #[command(subcommand)]
    command: Command,
}

/// Flags override the file named by CARBONDATE_CONFIG.
#[derive(Args)]
struct CommonFlags {
    /// Address for `serve`.
    #[arg(long, global = true)]
    listen: Option<String>,
    /// Comma-separated methods, e.g. archives,social.
    #[arg(long, global = true)]
    sources: Option<String>,
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Answer upstream requests from a cassette.
    #[arg(long, global = true, conflicts_with = "record")]
    replay: Option<PathBuf>,
    /// Query live upstreams and append every interaction to a cassette.
    #[arg(long, global = true)]
    record: Option<PathBuf>,
    /// Fixed current time (ISO 8601) for the plausibility window.
    #[arg(long, global = true)]
    now: Option<String>,
    #[arg(long, global = true)]
    format: Option<ReportFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Serve GET /cd/{uri} and GET /healthz.
    Serve,
    /// Estimate every URI in a file (one per line) and print JSON lines.
    Batch {
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic world (world.json) and its cassette (world.jsonl).
    GenWorld {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// JSON lag model; the built-in defaults otherwise.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn config(flags: &CommonFlags) -> Result<ServiceConfig, String> {
    let mut config = ServiceConfig::from_env().map_err(|e| e.to_string())?;
    if let Some(listen) = &flags.listen {
        config.listen = listen.clone();
    }
    if let Some(list) = &flags.sources {
        config.sources = ServiceConfig::parse_sources(list).map_err(|e| e.to_string())?;
    }
    if let Some(ms) = flags.timeout_ms {
        config.timeout_ms = ms;
    }
    if let Some(p) = flags.parallelism {
        config.parallelism = p;
    }
    if let Some(path) = &flags.replay {
        config.transport = TransportMode::Replay(path.clone());
    }
    if let Some(path) = &flags.record {
        config.transport = TransportMode::Record(path.clone());
    }
    if let Some(now) = &flags.now {
        config.now = Some(UtcTimestamp::parse_iso(now).map_err(|e| format!("--now: {e}"))?);
    }
    if let Some(format) = flags.format {
        config.format = format;
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::GenWorld { seed, n, model, out } => {
            let model = match model {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
                }
                None => LagModel::default(),
            };
            let upstreams = ServiceConfig::from_env().map(|c| c.upstreams).unwrap_or_else(|_| Upstreams::default());
            let (world, cassette) = generate_world(seed, n, &model, &upstreams).map_err(|e| e.to_string())?;
            fs::create_dir_all(&out).map_err(|e| e.to_string())?;
            world.save(out.join("world.json")).map_err(|e| e.to_string())?;
            cassette.save(out.join("world.jsonl")).map_err(|e| e.to_string())?;
            eprintln!("wrote {} resources to {}", world.resources.len(), out.display());
            Ok(())
        }
        Command::Batch { input, output } => {
            let config = config(&cli.common)?;
            let estimator = config.build_estimator().map_err(|e| e.to_string())?;
            let reader = fs::File::open(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let stats = match output {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                    run_batch(BufReader::new(reader), io::BufWriter::new(file), &estimator, config.format, config.parallelism)
                }
                None => run_batch(BufReader::new(reader), io::stdout().lock(), &estimator, config.format, config.parallelism),
            }
            .map_err(|e| e.to_string())?;
            estimator.transport().persist().map_err(|e| e.to_string())?;
            eprintln!("{} reports, {} malformed", stats.reports, stats.malformed);
            Ok(())
        }
        Command::Serve => {
            let config = config(&cli.common)?;
            let estimator = config.build_estimator().map_err(|e| e.to_string())?;
            let state = Arc::new(AppState {
                estimator,
                format: config.format,
            });
            let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            eprintln!("listening on {}", config.listen);
            let served = runtime.block_on(async {
                tokio::select! {
                    r = serve(&config.listen, Arc::clone(&state)) => r,
                    _ = tokio::signal::ctrl_c() => Ok(()),
                }
            });
            state.estimator.transport().persist().map_err(|e| e.to_string())?;
            served.map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("carbondate: {e}");
            ExitCode::FAILURE
        }
    }
}
