use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use iotsched::evaluation::{compare_runs, Front, HV_REFERENCE};
use iotsched::model::{Instant, PassCatalog};
use iotsched::scenario::{
    load_passes, riot_eligible_satellites, satellite_name, synth_passes, write_passes_csv, CampaignSpec, PassFormat,
    ScenarioError, SynthParams,
};
use iotsched::search::{self, AcoConfig, Algorithm, ArchiveEntry, ParetoArchive, Scenario, SearchConfig, SearchError};

const EXIT_NO_FEASIBLE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

/// Failure carrying the process exit code.
#[derive(Debug)]
enum Failure {
    Invalid(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }
}

trait Classify<T> {
    fn invalid(self) -> Result<T, Failure>;
    fn internal(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn invalid(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Invalid(e.into()))
    }
    fn internal(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(e.into()))
    }
}

#[derive(Parser)]
#[command(name = "iotsched", version, about = "Schedule satellite test campaigns on a shared ground antenna")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic pass catalog as CSV.
    Synth(SynthArgs),
    /// Dump the candidate procedures and conflict-graph statistics.
    Candidates(CandidatesArgs),
    /// Search for Pareto-optimal schedules.
    Optimize(OptimizeArgs),
    /// Compare archives from several runs.
    Evaluate(EvaluateArgs),
    /// Export one archive member as a Gantt CSV or slot JSON.
    Export(ExportArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    sats: usize,
    #[arg(long, default_value_t = 3)]
    days: i64,
    /// Window start, ISO-8601 UTC.
    #[arg(long, default_value = "2024-10-01T00:00:00Z")]
    start: String,
    #[arg(long)]
    site: Option<String>,
    #[arg(long)]
    riot_fraction: Option<f64>,
    #[arg(long)]
    period_minutes: Option<u64>,
    /// Pass CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write a campaign with SQM for every satellite and RIOT for those
    /// with low-elevation passes.
    #[arg(long)]
    campaign_out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Pass catalog, CSV or JSON by extension.
    #[arg(long)]
    passes: PathBuf,
    /// Campaign JSON.
    #[arg(long)]
    campaign: PathBuf,
}

#[derive(Args)]
struct CandidatesArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output JSON, stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include the conflict edge list.
    #[arg(long)]
    edges: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Nsga3,
    Rs,
    Aco,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Nsga3 => Algorithm::Nsga3,
            AlgoArg::Rs => Algorithm::RandomSearch,
            AlgoArg::Aco => Algorithm::Aco,
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    /// Run manifest to start from; flags override its fields.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    passes: Option<PathBuf>,
    #[arg(long)]
    campaign: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluation budget.
    #[arg(long)]
    evals: Option<usize>,
    /// Wall-clock cap in seconds.
    #[arg(long)]
    wallclock: Option<f64>,
    #[arg(long)]
    population_size: Option<usize>,
    #[arg(long)]
    reference_points: Option<usize>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    ants: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// Evaluate sequentially.
    #[arg(long)]
    sequential: bool,
    #[arg(long, env = "IOTSCHED_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// `LABEL=ARCHIVE.json`, repeated once per run.
    #[arg(long = "run", required = true, value_parser = parse_run)]
    runs: Vec<(String, PathBuf)>,
    /// Report JSON, stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pairwise comparison table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Per-run indicators as CSV.
    #[arg(long)]
    runs_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Gantt,
    Slots,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long, default_value_t = 0)]
    member: usize,
    #[arg(long, value_enum, default_value_t = ExportFormat::Gantt)]
    format: ExportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_run(s: &str) -> Result<(String, PathBuf), String> {
    let (label, path) = s.split_once('=').ok_or_else(|| format!("expected LABEL=PATH, got {s:?}"))?;
    if label.is_empty() || path.is_empty() {
        return Err(format!("expected LABEL=PATH, got {s:?}"));
    }
    Ok((label.to_string(), PathBuf::from(path)))
}

/// Everything needed to reproduce an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RunManifest {
    passes: PathBuf,
    campaign: PathBuf,
    algorithm: Algorithm,
    seed: u64,
    #[serde(default)]
    search: SearchConfig,
    #[serde(default)]
    aco: AcoConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).internal()?;
    }
    let f = File::create(path).with_context(|| format!("writing {}", path.display())).internal()?;
    Ok(BufWriter::new(f))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display())).internal()
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    let f = File::open(path).with_context(|| format!("reading {}", path.display())).invalid()?;
    Ok(BufReader::new(f))
}

fn read_catalog(path: &Path) -> Result<PassCatalog, Failure> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => PassFormat::Json,
        _ => PassFormat::Csv,
    };
    let loaded = load_passes(open(path)?, format).with_context(|| format!("loading {}", path.display())).invalid()?;
    for w in &loaded.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(loaded.catalog)
}

fn read_campaign(path: &Path) -> Result<CampaignSpec, Failure> {
    CampaignSpec::from_json(open(path)?).with_context(|| format!("loading {}", path.display())).invalid()
}

fn build_scenario(passes: &Path, campaign: &Path) -> Result<Scenario, Failure> {
    let catalog = read_catalog(passes)?;
    let spec = read_campaign(campaign)?;
    Scenario::build(&catalog, &spec).map_err(|e| match e {
        SearchError::Scenario(ScenarioError::Uncoverable(reqs)) => {
            let list: Vec<String> = reqs.iter().map(|r| format!("  {r}")).collect();
            Failure::Invalid(anyhow!("infeasible scenario, no candidate for:\n{}", list.join("\n")))
        }
        other => Failure::Invalid(other.into()),
    })
}

fn cmd_synth(a: SynthArgs) -> Result<u8, Failure> {
    let start = Instant::parse(&a.start).invalid()?;
    let end = Instant::from_epoch_seconds(start.epoch_seconds() + a.days * 86_400);
    let mut params = SynthParams::default();
    if let Some(site) = a.site {
        params.site_id = site.into();
    }
    if let Some(f) = a.riot_fraction {
        params.riot_fraction = f;
    }
    if let Some(p) = a.period_minutes {
        params.period_minutes = p;
    }
    let catalog = synth_passes(a.seed, a.sats, (start, end), &params).invalid()?;
    let mut w = create(&a.out)?;
    write_passes_csv(&catalog, &mut w).with_context(|| format!("writing {}", a.out.display())).internal()?;
    w.flush().with_context(|| format!("writing {}", a.out.display())).internal()?;

    let sats: Vec<_> = (0..a.sats).map(satellite_name).collect();
    let riot = riot_eligible_satellites(&catalog, 5.0);
    for s in &sats {
        let n = catalog.passes_of(s).count();
        let low = if riot.contains(s) { ", low-elevation edges" } else { "" };
        println!("{s}: {n} passes{low}");
    }
    if let Some(path) = a.campaign_out {
        let spec = CampaignSpec::sqm_all_riot_some(params.site_id.clone(), (start, end), sats, &riot);
        write_text(&path, &(serde_json::to_string_pretty(&spec).internal()? + "\n"))?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct CandidateRecord {
    id: usize,
    satellite: String,
    #[serde(rename = "type")]
    proc_type: String,
    t_start: Instant,
    t_end: Instant,
    config_minutes: u64,
    degree: usize,
}

#[derive(Serialize)]
struct CandidateDump {
    candidates: Vec<CandidateRecord>,
    requirements: Vec<RequirementOptions>,
    graph: GraphStats,
}

#[derive(Serialize)]
struct RequirementOptions {
    requirement: String,
    options: Vec<usize>,
}

#[derive(Serialize)]
struct GraphStats {
    vertices: usize,
    edges: usize,
    density: f64,
    max_degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge_list: Option<Vec<[usize; 2]>>,
}

fn cmd_candidates(a: CandidatesArgs) -> Result<u8, Failure> {
    let scn = build_scenario(&a.scenario.passes, &a.scenario.campaign)?;
    let n = scn.candidates.len();
    let dump = CandidateDump {
        candidates: scn
            .candidates
            .candidates
            .iter()
            .map(|c| CandidateRecord {
                id: c.id.0,
                satellite: c.satellite_id().to_string(),
                proc_type: c.proc_type.to_string(),
                t_start: c.t_start,
                t_end: c.t_end,
                config_minutes: c.config_time.as_secs() / 60,
                degree: scn.graph.degree(c.id.0),
            })
            .collect(),
        requirements: scn
            .candidates
            .by_requirement
            .iter()
            .map(|(r, opts)| RequirementOptions { requirement: r.to_string(), options: opts.clone() })
            .collect(),
        graph: GraphStats {
            vertices: n,
            edges: scn.graph.edge_count(),
            density: if n > 1 { 2.0 * scn.graph.edge_count() as f64 / (n * (n - 1)) as f64 } else { 0.0 },
            max_degree: (0..n).map(|i| scn.graph.degree(i)).max().unwrap_or(0),
            edge_list: a.edges.then(|| scn.graph.to_export(&scn.candidates).edges),
        },
    };
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&dump).internal()? + "\n"))?;
    Ok(0)
}

fn resolve_manifest(a: &OptimizeArgs) -> Result<RunManifest, Failure> {
    let mut m = match &a.manifest {
        Some(path) => serde_json::from_reader(open(path)?)
            .with_context(|| format!("parsing manifest {}", path.display()))
            .invalid()?,
        None => {
            let missing = |what: &str| Failure::Invalid(anyhow!("--{what} is required without --manifest"));
            RunManifest {
                passes: a.passes.clone().ok_or_else(|| missing("passes"))?,
                campaign: a.campaign.clone().ok_or_else(|| missing("campaign"))?,
                algorithm: a.algo.map(Algorithm::from).unwrap_or(Algorithm::Nsga3),
                seed: 0,
                search: SearchConfig::default(),
                aco: AcoConfig::default(),
                output_dir: None,
            }
        }
    };
    if let Some(p) = &a.passes {
        m.passes = p.clone();
    }
    if let Some(c) = &a.campaign {
        m.campaign = c.clone();
    }
    if let Some(algo) = a.algo {
        m.algorithm = algo.into();
    }
    if let Some(seed) = a.seed {
        m.seed = seed;
    }
    if let Some(e) = a.evals {
        m.search.eval_budget = e;
        m.aco.eval_budget = e;
    }
    if let Some(w) = a.wallclock {
        m.search.wallclock_cap_seconds = w;
        m.aco.wallclock_cap_seconds = w;
    }
    if let Some(v) = a.population_size {
        m.search.population_size = v;
    }
    if let Some(v) = a.reference_points {
        m.search.reference_points = v;
    }
    if let Some(v) = a.crossover_rate {
        m.search.crossover_rate = v;
    }
    if let Some(v) = a.mutation_rate {
        m.search.mutation_rate = v;
    }
    if let Some(v) = a.ants {
        m.aco.ants = v;
    }
    if let Some(v) = a.rho {
        m.aco.rho = v;
    }
    if a.sequential {
        m.search.parallel = false;
        m.aco.parallel = false;
    }
    if let Some(d) = &a.out_dir {
        m.output_dir = Some(d.clone());
    }
    m.search.rng_seed = m.seed;
    m.aco.rng_seed = m.seed;
    m.search.validate().invalid()?;
    m.aco.validate().invalid()?;
    Ok(m)
}

fn cmd_optimize(a: OptimizeArgs) -> Result<u8, Failure> {
    let manifest = resolve_manifest(&a)?;
    let out_dir = manifest.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let scn = build_scenario(&manifest.passes, &manifest.campaign)?;
    log::info!(
        "{} candidates, {} conflicts, {} requirements",
        scn.candidates.len(),
        scn.graph.edge_count(),
        scn.genome_len()
    );
    let outcome = search::run(&scn, manifest.algorithm, &manifest.search, &manifest.aco).internal()?;

    let recorded = RunManifest { output_dir: None, ..manifest.clone() };
    write_text(&out_dir.join("manifest.json"), &(serde_json::to_string_pretty(&recorded).internal()? + "\n"))?;
    write_text(&out_dir.join("archive.json"), &(outcome.archive.to_json() + "\n"))?;
    write_text(&out_dir.join("telemetry.json"), &(outcome.telemetry.to_json() + "\n"))?;
    let schedules = out_dir.join("schedules");
    if schedules.exists() {
        fs::remove_dir_all(&schedules).with_context(|| format!("clearing {}", schedules.display())).internal()?;
    }
    for i in 0..outcome.archive.len() {
        let csv = outcome.archive.gantt_csv(i).expect("member exists");
        write_text(&schedules.join(format!("member-{i:03}.csv")), &csv)?;
    }

    let t = &outcome.telemetry;
    eprintln!(
        "{}: {} evaluations, {} iterations, stopped on {:?}; front of {} ({} feasible)",
        manifest.algorithm.name(),
        t.total_evals,
        t.iterations.len(),
        t.stop_reason,
        outcome.archive.len(),
        outcome.archive.feasible_count()
    );
    if outcome.found_feasible() {
        Ok(0)
    } else {
        eprintln!("no feasible schedule found");
        Ok(EXIT_NO_FEASIBLE)
    }
}

fn read_archive(path: &Path) -> Result<ParetoArchive, Failure> {
    let entries: Vec<ArchiveEntry> = serde_json::from_reader(open(path)?)
        .with_context(|| format!("parsing archive {}", path.display()))
        .invalid()?;
    Ok(ParetoArchive { entries })
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<u8, Failure> {
    let mut runs: Vec<(String, Front)> = Vec::with_capacity(a.runs.len());
    for (label, path) in &a.runs {
        let archive = read_archive(path)?;
        runs.push((label.clone(), archive.front(path.display().to_string())));
    }
    let report = compare_runs(&runs, HV_REFERENCE).invalid()?;
    for n in &report.notices {
        eprintln!("note: {n}");
    }
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&report).internal()? + "\n"))?;
    if let Some(p) = &a.csv {
        write_text(p, &report.comparisons_csv())?;
    }
    if let Some(p) = &a.runs_csv {
        write_text(p, &report.runs_csv())?;
    }
    Ok(0)
}

fn cmd_export(a: ExportArgs) -> Result<u8, Failure> {
    let archive = read_archive(&a.archive)?;
    let entry = archive
        .entries
        .get(a.member)
        .ok_or_else(|| Failure::Invalid(anyhow!("archive has {} members, no member {}", archive.len(), a.member)))?;
    let text = match a.format {
        ExportFormat::Gantt => archive.gantt_csv(a.member).expect("member exists"),
        ExportFormat::Slots => serde_json::to_string_pretty(&entry.slots).internal()? + "\n",
    };
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Candidates(a) => cmd_candidates(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let code = f.code();
            let (Failure::Invalid(e) | Failure::Internal(e)) = f;
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
