use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use asmseq::decoder::{decode_plan, parse_pipe_plan, Dictionary, Plan};
use asmseq::executor::{execute_plan, ExecConfig, ImpedanceParams};
use asmseq::harness::{
    build_prompt, export_layout, oracle_plan, render_svg, run_trials, Evaluator, LayoutFile, LlmConfig, OracleOutput,
    PlannerBackend, Proposal, TaskSpec,
};
use asmseq::matcher::match_objects;
use asmseq::perception::{parse_cloud, perceive, PerceptionConfig};
use asmseq::validators::Outcome;
use asmseq::world::Scene;

#[derive(Parser)]
#[command(name = "asmseq", version, about = "Decode, plan, validate and simulate assembly sequences")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decode a planner transcript into JSON steps (or pipe specs).
    Decode {
        transcript: PathBuf,
        /// Task file supplying the object dictionary; bracketed words are used otherwise.
        #[arg(long)]
        task: Option<PathBuf>,
        /// Read the transcript as a pipe list.
        #[arg(long)]
        pipe: bool,
    },
    /// Print the reference plan for a task.
    Plan {
        task: PathBuf,
        #[arg(long)]
        json: bool,
        /// For pipe tasks: write STEM.json and STEM.svg.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Classify a plan, layout file or transcript against a task.
    Validate { input: PathBuf, task: PathBuf },
    /// Match and execute a plan in a scene.
    Simulate {
        plan: PathBuf,
        scene: PathBuf,
        /// Write the end-effector trajectory as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON file with impedance parameters.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Run a batch of trials and print the report.
    Trials {
        task: PathBuf,
        /// oracle | corpus:PATH | llm | noisy:RATE:SEED[:deletion|jitter|detour]
        #[arg(long, default_value = "oracle")]
        backend: String,
        #[arg(short, default_value_t = 20)]
        n: usize,
        #[command(flatten)]
        llm: LlmArgs,
    },
    /// Draw a layout file as SVG.
    Render {
        layout: PathBuf,
        /// Defaults to the layout path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the system and user prompt for a task.
    Prompt { task: PathBuf },
    /// Cluster a labeled point cloud into boxes.
    Perceive {
        cloud: PathBuf,
        /// Comma-separated object labels to keep.
        #[arg(long, value_delimiter = ',')]
        labels: Vec<String>,
        #[arg(long, default_value_t = 0.1)]
        bandwidth: f64,
        #[arg(long, default_value_t = 1)]
        iterations: usize,
        #[arg(long, default_value_t = 0.05)]
        radius: f64,
        #[arg(long, default_value_t = 10)]
        min_points: usize,
    },
}

#[derive(clap::Args)]
struct LlmArgs {
    /// JSON file with base_url, model, temperature, timeout_secs, max_retries, backoff_ms.
    #[arg(long)]
    llm_config: Option<PathBuf>,
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    timeout_secs: Option<f64>,
}

impl LlmArgs {
    fn config(&self) -> Result<LlmConfig> {
        let mut cfg = match &self.llm_config {
            Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
            None => LlmConfig::default(),
        };
        if let Some(u) = &self.base_url {
            cfg.base_url = u.clone();
        }
        if let Some(m) = &self.model {
            cfg.model = m.clone();
        }
        if self.temperature.is_some() {
            cfg.temperature = self.temperature;
        }
        if let Some(t) = self.timeout_secs {
            cfg.timeout_secs = t;
        }
        Ok(cfg.with_env_key())
    }
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    out!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn load_plan(p: &Path, dict: &Dictionary) -> Result<Plan> {
    let text = read(p)?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    Ok(decode_plan(&text, dict)?)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Decode { transcript, task, pipe } => {
            let text = read(&transcript)?;
            let task = task.map(|t| TaskSpec::load(&t)).transpose()?;
            if pipe || matches!(task, Some(TaskSpec::Pipe(_))) {
                print_json(&parse_pipe_plan(&text)?)?;
            } else {
                let dict = task.map(|t| t.dictionary()).unwrap_or_else(|| Dictionary::inferred_from(&text));
                print_json(&decode_plan(&text, &dict)?)?;
            }
        }
        Cmd::Plan { task, json, export } => {
            let task = TaskSpec::load(&task)?;
            match oracle_plan(&task)? {
                OracleOutput::Plan(plan) if json => print_json(&plan)?,
                OracleOutput::Plan(plan) => out!("{}", plan.render()),
                OracleOutput::Layout(layout) => {
                    let TaskSpec::Pipe(spec) = &task else { unreachable!() };
                    if let Some(stem) = export {
                        export_layout(&layout, spec, &stem.with_extension("json"), &stem.with_extension("svg"))?;
                    }
                    if json {
                        out!("{}", LayoutFile::new(&layout, spec).to_json());
                    } else {
                        out!("{layout}");
                    }
                }
            }
        }
        Cmd::Validate { input, task } => {
            let task = TaskSpec::load(&task)?;
            let text = read(&input)?;
            let trimmed = text.trim_start();
            let proposal = if trimmed.starts_with('{') {
                Proposal::Layout(LayoutFile::from_json(&text)?.segments)
            } else if trimmed.starts_with('[') {
                let plan: Plan = serde_json::from_str(&text).context("plan JSON")?;
                Proposal::Text(plan.render())
            } else {
                Proposal::Text(text)
            };
            let verdict = Evaluator::new(&task).evaluate(&proposal);
            out!("{}", verdict.to_json());
            if verdict.outcome == Outcome::Fail {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Simulate { plan, scene, csv, params } => {
            let scene = Scene::load(&scene)?;
            let dict = Dictionary::with_objects(scene.objects.iter().map(|o| o.name.clone()));
            let plan = load_plan(&plan, &dict)?;
            let params: ImpedanceParams = match params {
                Some(p) => serde_json::from_str(&read(&p)?)?,
                None => ImpedanceParams::default(),
            };
            let ops = match_objects(&plan, &scene, &dict)?;
            let ex = execute_plan(&ops, &scene, &params, &ExecConfig::default())?;
            if let Some(path) = csv {
                std::fs::write(&path, ex.trajectory.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            out!("{}", ex.scene.to_json());
        }
        Cmd::Trials { task, backend, n, llm } => {
            if n == 0 {
                bail!("-n must be at least 1");
            }
            let task = TaskSpec::load(&task)?;
            let backend = PlannerBackend::parse(&backend, &llm.config()?)?;
            let report = run_trials(&task, &backend, n);
            out!("{}", report.to_json());
            if report.incomplete.is_some() {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Render { layout, out } => {
            let file = LayoutFile::load(&layout)?;
            let out = out.unwrap_or_else(|| layout.with_extension("svg"));
            std::fs::write(&out, render_svg(&file.segments, &file.spec)).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote {}", out.display());
        }
        Cmd::Prompt { task } => print_json(&build_prompt(&TaskSpec::load(&task)?))?,
        Cmd::Perceive { cloud, labels, bandwidth, iterations, radius, min_points } => {
            let (cloud, point_labels) = parse_cloud(&read(&cloud)?)?;
            let dict = if labels.is_empty() {
                Dictionary::with_objects(point_labels.iter().flatten().cloned())
            } else {
                Dictionary::with_objects(labels)
            };
            let cfg = PerceptionConfig { bandwidth, iterations, radius, min_points };
            print_json(&perceive(&cloud, &point_labels, &dict, &cfg)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
