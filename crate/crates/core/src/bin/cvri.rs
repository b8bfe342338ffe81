use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use cvri::pipeline::{parse_stages, run_pipeline, OutputLayout, ProjectConfig, ScenarioSnapshot, Stage};
use cvri::vri::VRIWeights;

#[derive(Parser)]
#[command(name = "cvri", version, about = "Community vulnerability pipeline and snapshot API")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the activity model from diaries.
    Fit(Common),
    /// Propagate or sample the activity trajectory.
    Simulate(Common),
    /// Allocate the trajectory onto buildings.
    Map(Common),
    /// Score and rank the three aspect layers.
    Assess(Common),
    /// Compose and render VRI frames.
    Render(Common),
    /// Serve the HTTP API over a finished output directory.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Comma-separated stages or `all`; defaults to the subcommand's stage.
    #[arg(long)]
    stages: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Raw weights `qd,qa,qb`, normalized to sum 1.
    #[arg(long, value_name = "QD,QA,QB")]
    weights: Option<String>,
    /// Render only this step.
    #[arg(long, value_name = "T")]
    timestep: Option<usize>,
}

fn parse_weights(raw: &str) -> cvri::Result<VRIWeights> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| cvri::Error::InvalidWeights(format!("`{raw}`: {e}")))?;
    match parts[..] {
        [d, a, b] => VRIWeights::normalized(d, a, b),
        _ => Err(cvri::Error::InvalidWeights(format!(
            "expected three values, got `{raw}`"
        ))),
    }
}

fn load_config(c: &Common) -> cvri::Result<ProjectConfig> {
    let mut config = ProjectConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        config.seed = seed;
    }
    if let Some(w) = &c.weights {
        config.weights = parse_weights(w)?;
    }
    if let Some(t) = c.timestep {
        config.render.timesteps = Some(vec![t]);
    }
    Ok(config)
}

fn run_stage(c: &Common, stage: Stage) -> cvri::Result<()> {
    let config = load_config(c)?;
    let stages = match &c.stages {
        Some(s) => parse_stages(s)?,
        None => vec![stage],
    };
    let run = run_pipeline(&config, &stages, &c.out)?;
    let layout = OutputLayout::new(&c.out);
    for p in &run.written {
        println!("{}", layout.relative(p));
    }
    Ok(())
}

fn serve(c: &Common, bind: SocketAddr) -> cvri::Result<()> {
    let config = load_config(c)?;
    let snapshot = ScenarioSnapshot::load(&config, &OutputLayout::new(&c.out))?;
    eprintln!("serving {} on http://{bind}", snapshot.content_hash());
    let rt = tokio::runtime::Runtime::new().map_err(|e| cvri::Error::io(bind.to_string(), e))?;
    rt.block_on(cvri::service::serve(Arc::new(snapshot), bind))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(c) => run_stage(c, Stage::Fit),
        Command::Simulate(c) => run_stage(c, Stage::Simulate),
        Command::Map(c) => run_stage(c, Stage::Map),
        Command::Assess(c) => run_stage(c, Stage::Assess),
        Command::Render(c) => run_stage(c, Stage::Render),
        Command::Serve { common, bind } => serve(common, *bind),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
