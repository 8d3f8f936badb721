use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use safeset::config::{AnalysisConfig, OssChoice};
use safeset::report::AnalysisReport;
use safeset::{csvio, emit_report, init_threads, run_analysis, ColumnMap, RunError};
use safeset_core::ingest::{label_collisions, CollisionRule, Dataset};
use safeset_core::oss::{extract_states, transitions};
use safeset_core::simgen::{ncap_battery, simulate_follow, IdmParams, ScenarioSpec};
use safeset_core::{OssSpec, ReachMode};

#[derive(Parser)]
#[command(name = "safeset", version, about = "Almost-safe operable domain quantification from driving data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a recording, optionally rewriting it in canonical form.
    Ingest(IngestArgs),
    /// Project a recording into a state space and write the states.
    Extract(ExtractArgs),
    /// Run the full analysis and write the report files.
    Analyze(AnalyzeArgs),
    /// Generate car-following recordings from the IDM simulator.
    Simulate(SimulateArgs),
    /// Print a summary of a written report.
    Report(ReportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Recording CSV.
    #[arg(long)]
    input: PathBuf,
    /// Collision sidecar CSV with `trajectory_id,frame`.
    #[arg(long)]
    collisions: Option<PathBuf>,
    /// Column remap `field=header`, repeatable.
    #[arg(long = "col", value_name = "FIELD=HEADER")]
    columns: Vec<String>,
    /// labels_only, geometric_overlap or either.
    #[arg(long, default_value = "labels_only")]
    rule: String,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset, RunError> {
        let columns = ColumnMap::from_flags(&self.columns)?;
        let d = csvio::read_dataset(&self.input, &columns, self.collisions.as_deref())?;
        Ok(label_collisions(&d, parse_rule(&self.rule)?))
    }
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Canonical CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sidecar output for the labelled events.
    #[arg(long)]
    collisions_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    input: InputArgs,
    /// State-space preset name.
    #[arg(long, default_value = "highd-lead")]
    oss: String,
    /// JSON file with an explicit state-space specification.
    #[arg(long)]
    oss_spec: Option<PathBuf>,
    /// States CSV output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSON configuration; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    collisions: Option<PathBuf>,
    #[arg(long = "col", value_name = "FIELD=HEADER")]
    columns: Vec<String>,
    #[arg(long)]
    oss: Option<String>,
    #[arg(long)]
    oss_spec: Option<PathBuf>,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha_lo: Option<f64>,
    #[arg(long)]
    alpha_hi: Option<f64>,
    #[arg(long)]
    alpha_threshold: Option<f64>,
    /// undirected, ancestors or descendants.
    #[arg(long)]
    reach_mode: Option<String>,
    #[arg(long)]
    match_radius: Option<f64>,
    #[arg(long)]
    cluster_max: Option<usize>,
    #[arg(long)]
    max_exact_dim: Option<usize>,
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fail instead of lowering alpha when excluded states fall inside.
    #[arg(long)]
    no_tighten: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// idm0, idm1 or a JSON file with custom IDM parameters.
    #[arg(long, default_value = "idm0")]
    policy: String,
    /// JSON file with custom IDM parameters.
    #[arg(long)]
    policy_file: Option<PathBuf>,
    /// JSON file with a single scenario; the 48-scenario battery otherwise.
    #[arg(long, conflicts_with = "battery")]
    scenario: Option<PathBuf>,
    /// Scenario battery; only ncap48 exists.
    #[arg(long)]
    battery: Option<String>,
    /// Seed of the battery's grid jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Recording CSV output.
    #[arg(long)]
    out: PathBuf,
    /// Collision sidecar output; defaults next to the recording.
    #[arg(long)]
    collisions_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// A written report.json.
    #[arg(long)]
    report: PathBuf,
}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Validation(msg.into())
}

fn parse_rule(s: &str) -> Result<CollisionRule, RunError> {
    s.parse().map_err(|_| invalid(format!("unknown collision rule {s}")))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn oss_choice(preset: Option<&str>, file: Option<&Path>) -> Result<Option<OssChoice>, RunError> {
    Ok(match (file, preset) {
        (Some(f), _) => Some(OssChoice::Spec(read_json::<OssSpec>(f)?)),
        (None, Some(p)) => Some(OssChoice::Preset(p.to_string())),
        (None, None) => None,
    })
}

fn ingest(a: &IngestArgs) -> Result<(), RunError> {
    let d = a.input.load()?;
    if let Some(out) = &a.out {
        csvio::write_samples(BufWriter::new(File::create(out)?), d.samples())?;
    }
    if let Some(out) = &a.collisions_out {
        csvio::write_collisions(BufWriter::new(File::create(out)?), d.collision_events())?;
    }
    let summary = serde_json::json!({
        "samples": d.samples().len(),
        "trajectories": d.trajectory_ids().len(),
        "dt": d.dt(),
        "collision_events": d.collision_events().len(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn extract(a: &ExtractArgs) -> Result<(), RunError> {
    let spec = oss_choice(Some(&a.oss), a.oss_spec.as_deref())?.expect("preset has a default").resolve()?;
    let d = a.input.load()?;
    let ts = extract_states(&d, &spec).map_err(|e| invalid(e.to_string()))?;
    csvio::write_states(BufWriter::new(File::create(&a.out)?), &spec.dimension_names(), &ts)?;
    let summary = serde_json::json!({
        "trajectories": ts.len(),
        "states": ts.iter().map(|t| t.states.len()).sum::<usize>(),
        "transitions": transitions(&ts).len(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn analyze_config(a: &AnalyzeArgs) -> Result<AnalysisConfig, RunError> {
    let mut cfg = match &a.config {
        Some(p) => AnalysisConfig::load(p)?,
        None => AnalysisConfig::default(),
    };
    if let Some(v) = &a.input {
        cfg.input = v.clone();
    }
    if let Some(v) = &a.collisions {
        cfg.collisions = Some(v.clone());
    }
    let cols = ColumnMap::from_flags(&a.columns)?;
    cfg.columns.extend(cols.entries().clone());
    if let Some(c) = oss_choice(a.oss.as_deref(), a.oss_spec.as_deref())? {
        cfg.oss = c;
    }
    if let Some(r) = &a.rule {
        cfg.collision_rule = parse_rule(r)?;
    }
    if let Some(m) = &a.reach_mode {
        cfg.reach_mode = m.parse::<ReachMode>().map_err(|_| invalid(format!("unknown reach mode {m}")))?;
    }
    cfg.beta = a.beta.unwrap_or(cfg.beta);
    cfg.alpha.lo = a.alpha_lo.unwrap_or(cfg.alpha.lo);
    cfg.alpha.hi = a.alpha_hi.unwrap_or(cfg.alpha.hi);
    cfg.alpha.threshold = a.alpha_threshold.unwrap_or(cfg.alpha.threshold);
    cfg.match_radius = a.match_radius.unwrap_or(cfg.match_radius);
    cfg.cluster_max = a.cluster_max.or(cfg.cluster_max);
    cfg.max_exact_dim = a.max_exact_dim.unwrap_or(cfg.max_exact_dim);
    cfg.mc_samples = a.mc_samples.unwrap_or(cfg.mc_samples);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.tighten_alpha &= !a.no_tighten;
    if let Some(o) = &a.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn analyze(a: &AnalyzeArgs) -> Result<(), RunError> {
    let cfg = analyze_config(a)?;
    let run = run_analysis(&cfg)?;
    let files = emit_report(&run.report, &run.spec, &run.outcome, &cfg.output_dir)?;
    print_summary(&run.report);
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<(), RunError> {
    let sv = match &a.policy_file {
        Some(p) => read_json::<IdmParams>(p)?,
        None if a.policy.ends_with(".json") => read_json::<IdmParams>(Path::new(&a.policy))?,
        None => IdmParams::preset(&a.policy).ok_or_else(|| invalid(format!("unknown policy {}", a.policy)))?,
    };
    if let Some(b) = a.battery.as_deref().filter(|b| *b != "ncap48") {
        return Err(invalid(format!("unknown battery {b}")));
    }
    let d = match &a.scenario {
        Some(p) => simulate_follow(&sv, &read_json::<ScenarioSpec>(p)?)?,
        None => ncap_battery(&sv, a.seed)?,
    };
    let sidecar = a.collisions_out.clone().unwrap_or_else(|| a.out.with_extension("collisions.csv"));
    csvio::write_dataset(&a.out, Some(&sidecar), &d)?;
    println!(
        "{} trajectories, {} samples, {} collisions -> {} and {}",
        d.trajectory_ids().len(),
        d.samples().len(),
        d.collision_events().len(),
        a.out.display(),
        sidecar.display()
    );
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.6}"))
}

fn print_summary(r: &AnalysisReport) {
    let d = &r.dataset;
    println!("state space      {:?}, {} dimensions", r.state_space.kind, r.state_space.dimension_names.len());
    println!("trajectories     {} ({} unsafe), {} collision events", d.trajectories, d.unsafe_trajectories, d.collision_events);
    println!("states           {} observed, {} distinct, {} potentially safe", d.states, d.distinct_states, r.safe_states.count);
    println!("transitions      {} ({} safe, {} other)", d.transitions, d.safe_transitions, d.other_transitions);
    println!("shape            {} member(s), alpha* {}, {} component(s)", r.shape.members.len(), opt(r.shape.alpha_star), r.shape.components);
    println!("epsilon (exact)  {:.6} at confidence {}", r.epsilon.epsilon_bar_exact, r.epsilon.confidence);
    println!("epsilon (loop)   {:.6}", r.epsilon.epsilon_bar_loop);
    println!("occupancy        {:.6}", r.coverage.occupancy);
    println!("density          {}", opt(r.physical_density));
    println!("ttc mean/std     {} / {}", opt(r.baseline.ttc_mean), opt(r.baseline.ttc_std));
    println!("fatality bound   {}", opt(r.baseline.fatality_bound));
    for w in &r.warnings {
        println!("note: {w}");
    }
}

fn report(a: &ReportArgs) -> Result<(), RunError> {
    let r: AnalysisReport = read_json(&a.report)?;
    print_summary(&r);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Extract(a) => extract(a),
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Report(a) => report(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
