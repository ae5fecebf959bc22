use aerr_nav::config::{EpisodeConfig, ReasonerKind};
use aerr_nav::priors::default_priors;
use aerr_nav::render::{log_from_jsonl, log_to_jsonl, render_svg};
use aerr_nav::runner::{discover_scenarios, make_reasoner, run_batch, run_episode_traced, BatchReport};
use aerr_nav::state_machine::validate_log;
use aerr_nav::world::{load_scenario, MultiFloorWorld};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "aerr-nav", version, about = "Multi-floor object-navigation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode.
    Run(RunArgs),
    /// Run every scenario of a directory and report SR / SPL.
    Bench(BenchArgs),
    /// Load scenarios and check their invariants.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Check a state log against the transition relation and re-render it.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ReasonerArg {
    Scripted,
    Remote,
}

#[derive(Args, Clone)]
struct Common {
    /// Episode config (JSON); defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    reasoner: Option<ReasonerArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    no_recovery: bool,
    #[arg(long)]
    no_reminiscing: bool,
    #[arg(long)]
    static_weights: bool,
    #[arg(long)]
    no_slow_thinking: bool,
}

impl Common {
    fn apply(&self, mut cfg: EpisodeConfig) -> Result<EpisodeConfig> {
        if let Some(r) = self.reasoner {
            cfg.reasoner.kind = match r {
                ReasonerArg::Scripted => ReasonerKind::Scripted,
                ReasonerArg::Remote => ReasonerKind::Remote,
            };
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.max_steps {
            cfg.max_steps = m;
        }
        cfg.ablation.recovery &= !self.no_recovery;
        cfg.ablation.reminiscing &= !self.no_reminiscing;
        cfg.ablation.dynamic_weights &= !self.static_weights;
        cfg.ablation.slow_thinking &= !self.no_slow_thinking;
        cfg.validate()?;
        Ok(cfg)
    }

    fn config(&self) -> Result<EpisodeConfig> {
        let base = match &self.config {
            Some(p) => EpisodeConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => EpisodeConfig::default(),
        };
        self.apply(base)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Write an SVG of the episode.
    #[arg(long)]
    render: Option<PathBuf>,
    /// Write the per-step state log as JSONL.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Print the full result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scenarios: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Directory of configs; each one is run over the corpus.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    log: PathBuf,
    /// Scenario the log came from, for the background of the rendering.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    render: Option<PathBuf>,
}

#[derive(Serialize)]
struct MatrixEntry {
    config: String,
    report: BatchReport,
}

#[derive(Serialize)]
struct MatrixReport {
    runs: Vec<MatrixEntry>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(a: RunArgs) -> Result<ExitCode> {
    let cfg = a.common.config()?;
    let world = load_scenario(&a.scenario)?;
    let priors = default_priors();
    let reasoner = make_reasoner(&cfg, &priors)?;
    let trace = run_episode_traced(&world, &cfg, &priors, reasoner.as_ref())?;
    let r = &trace.result;
    if let Some(p) = &a.log {
        write(p, &log_to_jsonl(&r.log))?;
    }
    if let Some(p) = &a.render {
        write(p, &render_svg(Some(&world), &r.log))?;
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(r)?);
    } else {
        println!(
            "{}: {} in {} steps, path {:.2} m, optimal {}, SPL {:.3}, floors {:?}, reasoner calls {} ({} fallback)",
            r.scenario,
            if r.success { "success" } else { "failure" },
            r.steps,
            r.path_length_m,
            r.optimal_length_m.map_or("n/a".into(), |o| format!("{o:.2} m")),
            r.spl_term,
            r.floors_visited,
            r.reasoner_calls,
            r.reasoner_fallbacks
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn print_table(rows: &[(String, &BatchReport)]) {
    let mut tags: Vec<&String> = rows.iter().flat_map(|(_, r)| r.tags.keys()).collect();
    tags.sort();
    tags.dedup();
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(6);
    let mut header = format!("{:<name_w$} {:>6} {:>6}", "config", "SR", "SPL");
    for t in &tags {
        let w = t.len() + 4;
        header.push_str(&format!("  {:>w$} {:>w$}", format!("{t} SR"), format!("{t} SPL")));
    }
    println!("{header}");
    for (name, r) in rows {
        let mut line = format!("{:<name_w$} {:>6.3} {:>6.3}", name, r.overall.sr, r.overall.spl);
        for t in &tags {
            let w = t.len() + 4;
            match r.tags.get(*t) {
                Some(a) => line.push_str(&format!("  {:>w$.3} {:>w$.3}", a.sr, a.spl)),
                None => line.push_str(&format!("  {:>w$} {:>w$}", "-", "-")),
            }
        }
        println!("{line}");
    }
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode> {
    let scenarios = discover_scenarios(&a.scenarios).with_context(|| format!("reading {}", a.scenarios.display()))?;
    if scenarios.is_empty() {
        eprintln!("no scenarios in {}", a.scenarios.display());
        return Ok(ExitCode::from(1));
    }
    let priors = default_priors();
    let configs: Vec<(String, EpisodeConfig)> = match &a.matrix {
        Some(dir) => {
            let files = discover_scenarios(dir).with_context(|| format!("reading {}", dir.display()))?;
            if files.is_empty() {
                bail!("no configs in {}", dir.display());
            }
            files
                .iter()
                .map(|p| {
                    let cfg = EpisodeConfig::load(p).with_context(|| format!("loading {}", p.display()))?;
                    let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    Ok((name, a.common.apply(cfg)?))
                })
                .collect::<Result<_>>()?
        }
        None => {
            let cfg = a.common.config()?;
            vec![(cfg.ablation.label(), cfg)]
        }
    };
    let mut runs = Vec::new();
    for (name, cfg) in configs {
        let reasoner = make_reasoner(&cfg, &priors)?;
        let report = run_batch(&scenarios, &cfg, &priors, reasoner.as_ref(), a.jobs);
        for f in &report.failures {
            eprintln!("{}: {}", f.scenario, f.error);
        }
        runs.push(MatrixEntry { config: name, report });
    }
    let rows: Vec<(String, &BatchReport)> = runs.iter().map(|e| (e.config.clone(), &e.report)).collect();
    print_table(&rows);
    if let Some(out) = &a.out {
        let json = if a.matrix.is_some() {
            serde_json::to_string_pretty(&MatrixReport { runs })?
        } else {
            serde_json::to_string_pretty(&runs[0].report)?
        };
        write(out, &json)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(paths: &[PathBuf]) -> ExitCode {
    let mut ok = true;
    for p in paths {
        let files = if p.is_dir() {
            discover_scenarios(p).unwrap_or_default()
        } else {
            vec![p.clone()]
        };
        for f in files {
            match load_scenario(&f) {
                Ok(w) => println!("{}: ok ({} floors, target {})", f.display(), w.floors.len(), w.target_category),
                Err(e) => {
                    ok = false;
                    println!("{}: {e}", f.display());
                }
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_replay(a: ReplayArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&a.log).with_context(|| format!("reading {}", a.log.display()))?;
    let log = log_from_jsonl(&text).context("parsing state log")?;
    let cfg = match &a.config {
        Some(p) => EpisodeConfig::load(p)?,
        None => EpisodeConfig::default(),
    };
    let world: Option<MultiFloorWorld> = a.scenario.as_ref().map(load_scenario).transpose()?;
    if let Some(p) = &a.render {
        write(p, &render_svg(world.as_ref(), &log))?;
    }
    let violations = validate_log(&log, cfg.stuck.d_split_m);
    if violations.is_empty() {
        println!("{}: {} lines, all transitions legal", a.log.display(), log.len());
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &violations {
            println!("{v}");
        }
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Validate { paths } => Ok(cmd_validate(&paths)),
        Command::Replay(a) => cmd_replay(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
