//! Pass ingestion, synthetic pass generation, campaign configuration and
//! candidate test-procedure generation.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Duration, Instant, ModelError, PassCatalog, ProcedureId, ProcedureType, SatelliteId, SatellitePass, SiteId,
    TestProcedure,
};
use crate::objectives::CostModel;
use crate::slotting::SlottingPolicy;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at {locator}: {message}")]
    Parse { locator: String, message: String },
    #[error("record {record}: {source}")]
    InvalidRecord { record: usize, source: ModelError },
    #[error("passes from several sites in one catalog ({0} and {1})")]
    MixedSites(SiteId, SiteId),
    #[error("catalog site {catalog} does not match campaign site {campaign}")]
    SiteMismatch { catalog: SiteId, campaign: SiteId },
    #[error("invalid campaign: {0}")]
    InvalidCampaign(String),
    #[error("invalid synthesis parameters: {0}")]
    InvalidSynth(String),
    #[error("infeasible scenario: no candidate procedure for {}", format_requirements(.0))]
    Uncoverable(Vec<Requirement>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_requirements(reqs: &[Requirement]) -> String {
    reqs.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
}

/// A (satellite, procedure type) pair the campaign must cover exactly once.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Requirement {
    pub satellite_id: SatelliteId,
    pub proc_type: ProcedureType,
}

impl Requirement {
    pub fn new(satellite_id: impl Into<SatelliteId>, proc_type: ProcedureType) -> Self {
        Requirement { satellite_id: satellite_id.into(), proc_type }
    }
}

impl std::fmt::Display for Requirement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} on {}", self.proc_type, self.satellite_id)
    }
}

fn default_config_minutes() -> u64 {
    15
}
fn default_sqm_minutes() -> u64 {
    45
}
fn default_riot_edge() -> f64 {
    5.0
}

/// Campaign configuration, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub site_id: SiteId,
    pub window: (Instant, Instant),
    pub satellites: Vec<SatelliteId>,
    pub requirements: Vec<Requirement>,
    #[serde(default = "default_config_minutes")]
    pub config_time_minutes: u64,
    #[serde(default = "default_sqm_minutes")]
    pub sqm_duration_minutes: u64,
    #[serde(default = "default_riot_edge")]
    pub riot_max_edge_elevation_deg: f64,
    #[serde(default)]
    pub cost_model: CostModel,
    #[serde(default)]
    pub slotting: SlottingPolicy,
}

impl CampaignSpec {
    /// An SQM requirement for every satellite plus a RIOT requirement for each
    /// satellite in `riot_satellites`.
    pub fn sqm_all_riot_some(
        site_id: SiteId,
        window: (Instant, Instant),
        satellites: Vec<SatelliteId>,
        riot_satellites: &[SatelliteId],
    ) -> Self {
        let mut requirements: Vec<Requirement> = satellites
            .iter()
            .map(|s| Requirement::new(s.clone(), ProcedureType::Sqm))
            .collect();
        requirements.extend(riot_satellites.iter().map(|s| Requirement::new(s.clone(), ProcedureType::Riot)));
        CampaignSpec {
            site_id,
            window,
            satellites,
            requirements,
            config_time_minutes: default_config_minutes(),
            sqm_duration_minutes: default_sqm_minutes(),
            riot_max_edge_elevation_deg: default_riot_edge(),
            cost_model: CostModel::default(),
            slotting: SlottingPolicy::default(),
        }
    }

    pub fn from_json(reader: impl Read) -> Result<Self, ScenarioError> {
        let spec: CampaignSpec = serde_json::from_reader(reader).map_err(|e| ScenarioError::Parse {
            locator: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn config_time(&self) -> Duration {
        Duration::from_minutes(self.config_time_minutes)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::InvalidCampaign(m));
        if self.window.0 >= self.window.1 {
            return bad("window start must precede window end".into());
        }
        if self.sqm_duration_minutes == 0 {
            return bad("sqm_duration_minutes must be positive".into());
        }
        let sats: HashSet<_> = self.satellites.iter().collect();
        let mut seen = HashSet::new();
        for r in &self.requirements {
            if !sats.contains(&r.satellite_id) {
                return bad(format!("requirement {r} names a satellite outside the campaign"));
            }
            if !seen.insert(r) {
                return bad(format!("duplicate requirement {r}"));
            }
        }
        if self.requirements.is_empty() {
            return bad("no requirements".into());
        }
        self.cost_model.validate().map_err(|e| ScenarioError::InvalidCampaign(e.to_string()))?;
        self.slotting.validate().map_err(|e| ScenarioError::InvalidCampaign(e.to_string()))?;
        Ok(())
    }
}

/// Every procedure that could be scheduled, grouped by the requirement it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub candidates: Vec<TestProcedure>,
    /// Indices into `candidates`, in the order of the campaign's requirements.
    pub by_requirement: Vec<(Requirement, Vec<usize>)>,
}

impl CandidateSet {
    /// Builds a set from candidates whose ids equal their positions. Groups
    /// follow first appearance of each (satellite, type) pair.
    pub fn from_candidates(candidates: Vec<TestProcedure>) -> Self {
        let mut slot_of: BTreeMap<Requirement, usize> = BTreeMap::new();
        let mut by_requirement: Vec<(Requirement, Vec<usize>)> = Vec::new();
        for (i, c) in candidates.iter().enumerate() {
            debug_assert_eq!(c.id, ProcedureId(i));
            let r = Requirement::new(c.satellite_id().clone(), c.proc_type);
            let k = *slot_of.entry(r.clone()).or_insert_with(|| {
                by_requirement.push((r, Vec::new()));
                by_requirement.len() - 1
            });
            by_requirement[k].1.push(i);
        }
        CandidateSet { candidates, by_requirement }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn requirement_count(&self) -> usize {
        self.by_requirement.len()
    }

    pub fn options(&self, requirement_index: usize) -> &[usize] {
        &self.by_requirement[requirement_index].1
    }

    pub fn get(&self, id: ProcedureId) -> Option<&TestProcedure> {
        self.candidates.get(id.0)
    }
}

// ---------------------------------------------------------------------------
// Pass ingestion

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassFormat {
    Csv,
    Json,
}

/// One pass as it appears in CSV and JSON pass files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    pub sat: String,
    pub site: String,
    pub t_start: Instant,
    pub t_max: Instant,
    pub t_end: Instant,
    pub el_start: f64,
    pub el_max: f64,
    pub el_end: f64,
    pub az_start: f64,
    pub az_max: f64,
    pub az_end: f64,
}

impl From<PassRecord> for SatellitePass {
    fn from(r: PassRecord) -> Self {
        SatellitePass {
            satellite_id: SatelliteId(r.sat),
            site_id: SiteId(r.site),
            t_start: r.t_start,
            t_max: r.t_max,
            t_end: r.t_end,
            theta_start: r.el_start,
            theta_max: r.el_max,
            theta_end: r.el_end,
            phi_start: r.az_start,
            phi_max: r.az_max,
            phi_end: r.az_end,
        }
    }
}

impl From<&SatellitePass> for PassRecord {
    fn from(p: &SatellitePass) -> Self {
        PassRecord {
            sat: p.satellite_id.0.clone(),
            site: p.site_id.0.clone(),
            t_start: p.t_start,
            t_max: p.t_max,
            t_end: p.t_end,
            el_start: p.theta_start,
            el_max: p.theta_max,
            el_end: p.theta_end,
            az_start: p.phi_start,
            az_max: p.phi_max,
            az_end: p.phi_end,
        }
    }
}

/// A loaded catalog plus any non-fatal notices raised while reading it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPasses {
    pub catalog: PassCatalog,
    pub warnings: Vec<String>,
}

/// Reads a pass file. The catalog window spans the earliest rise to the
/// latest set in the file.
pub fn load_passes(source: impl Read, format: PassFormat) -> Result<LoadedPasses, ScenarioError> {
    let records: Vec<PassRecord> = match format {
        PassFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
            let mut out = Vec::new();
            for (i, row) in rdr.deserialize::<PassRecord>().enumerate() {
                out.push(row.map_err(|e| ScenarioError::Parse {
                    locator: match e.position() {
                        Some(p) => format!("line {}", p.line()),
                        None => format!("record {}", i + 1),
                    },
                    message: e.to_string(),
                })?);
            }
            out
        }
        PassFormat::Json => {
            let mut buf = String::new();
            let mut source = source;
            source.read_to_string(&mut buf)?;
            if buf.trim().is_empty() {
                Vec::new()
            } else {
                serde_json::from_str(&buf).map_err(|e| ScenarioError::Parse {
                    locator: format!("line {} column {}", e.line(), e.column()),
                    message: e.to_string(),
                })?
            }
        }
    };

    let mut warnings = Vec::new();
    if records.is_empty() {
        log::warn!("pass file contains no passes");
        warnings.push("pass file contains no passes".to_string());
        return Ok(LoadedPasses {
            catalog: PassCatalog {
                site_id: SiteId::default(),
                window: (Instant::default(), Instant::default()),
                passes: Vec::new(),
            },
            warnings,
        });
    }

    let mut passes = Vec::with_capacity(records.len());
    for (i, rec) in records.into_iter().enumerate() {
        let pass = SatellitePass::from(rec);
        pass.validate().map_err(|source| ScenarioError::InvalidRecord { record: i + 1, source })?;
        passes.push(pass);
    }
    let site_id = passes[0].site_id.clone();
    if let Some(other) = passes.iter().find(|p| p.site_id != site_id) {
        return Err(ScenarioError::MixedSites(site_id, other.site_id.clone()));
    }
    let lo = passes.iter().map(|p| p.t_start).min().unwrap();
    let hi = passes.iter().map(|p| p.t_end).max().unwrap();
    passes.sort_by(|a, b| (a.t_start, &a.satellite_id).cmp(&(b.t_start, &b.satellite_id)));
    Ok(LoadedPasses { catalog: PassCatalog { site_id, window: (lo, hi), passes }, warnings })
}

pub fn write_passes_csv(catalog: &PassCatalog, sink: impl Write) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_writer(sink);
    for p in &catalog.passes {
        w.serialize(PassRecord::from(p)).map_err(|e| ScenarioError::Parse {
            locator: "writer".into(),
            message: e.to_string(),
        })?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Synthetic passes

/// Knobs for the synthetic pass generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub site_id: SiteId,
    /// Nominal time between consecutive passes of one satellite.
    pub period_minutes: u64,
    /// Uniform jitter applied to each nominal rise time, plus or minus.
    pub jitter_minutes: u64,
    pub min_pass_minutes: u64,
    pub max_pass_minutes: u64,
    /// Fraction of satellites whose passes rise and set at or below 5 degrees.
    pub riot_fraction: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            site_id: SiteId::new("REDU"),
            period_minutes: 480,
            jitter_minutes: 30,
            min_pass_minutes: 120,
            max_pass_minutes: 300,
            riot_fraction: 1.0 / 3.0,
        }
    }
}

pub fn satellite_name(k: usize) -> SatelliteId {
    SatelliteId(format!("s{}", k + 1))
}

/// Deterministic pseudo-orbital pass catalog. Satellites are named `s1..sN`.
pub fn synth_passes(
    seed: u64,
    n_sats: usize,
    window: (Instant, Instant),
    params: &SynthParams,
) -> Result<PassCatalog, ScenarioError> {
    let bad = |m: &str| Err(ScenarioError::InvalidSynth(m.to_string()));
    if n_sats == 0 {
        return bad("at least one satellite is required");
    }
    if window.0 >= window.1 {
        return bad("window must be non-empty");
    }
    if params.min_pass_minutes == 0 || params.min_pass_minutes > params.max_pass_minutes {
        return bad("pass duration bounds must satisfy 0 < min <= max");
    }
    if params.period_minutes == 0 {
        return bad("period must be positive");
    }
    if !(0.0..=1.0).contains(&params.riot_fraction) {
        return bad("riot_fraction must lie in [0, 1]");
    }
    let span = (window.1.epoch_seconds() - window.0.epoch_seconds()) as u64;
    if span < params.min_pass_minutes * 60 {
        return bad("window is shorter than one synthetic pass");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n_sats).collect();
    order.shuffle(&mut rng);
    let n_low = (params.riot_fraction * n_sats as f64).round() as usize;
    let mut low_edge = vec![false; n_sats];
    for &k in order.iter().take(n_low) {
        low_edge[k] = true;
    }

    let period = (params.period_minutes * 60) as i64;
    let jitter = (params.jitter_minutes * 60) as i64;
    let mut passes = Vec::new();
    for (k, &low) in low_edge.iter().enumerate() {
        let sat = satellite_name(k);
        let phase = rng.random_range(0..period);
        let mut nominal = window.0.epoch_seconds() + phase;
        while nominal < window.1.epoch_seconds() {
            let j = if jitter > 0 { rng.random_range(-jitter..=jitter) } else { 0 };
            let dur = rng.random_range(params.min_pass_minutes * 60..=params.max_pass_minutes * 60) as i64;
            let culm = rng.random_range(0.3..0.7);
            let theta_max = rng.random_range(10.0..=90.0);
            let (theta_start, theta_end) = if low {
                (rng.random_range(0.0..=5.0), rng.random_range(0.0..=5.0))
            } else {
                (rng.random_range(5.5..=9.5), rng.random_range(0.0..=9.5))
            };
            let phi_start: f64 = rng.random_range(0.0..360.0);
            let phi_max: f64 = rng.random_range(0.0..360.0);
            let phi_end: f64 = rng.random_range(0.0..360.0);

            let start = nominal + j;
            let end = start + dur;
            let max = start + ((dur as f64 * culm) as i64).clamp(1, dur - 1);
            nominal += period;
            if start < window.0.epoch_seconds() || end > window.1.epoch_seconds() {
                continue;
            }
            passes.push(SatellitePass {
                satellite_id: sat.clone(),
                site_id: params.site_id.clone(),
                t_start: Instant::from_epoch_seconds(start),
                t_max: Instant::from_epoch_seconds(max),
                t_end: Instant::from_epoch_seconds(end),
                theta_start: round3(theta_start),
                theta_max: round3(theta_max),
                theta_end: round3(theta_end),
                phi_start: round3(phi_start) % 360.0,
                phi_max: round3(phi_max) % 360.0,
                phi_end: round3(phi_end) % 360.0,
            });
        }
    }
    passes.sort_by(|a, b| (a.t_start, &a.satellite_id).cmp(&(b.t_start, &b.satellite_id)));
    Ok(PassCatalog { site_id: params.site_id.clone(), window, passes })
}

// Keeps CSV text short and stable.
fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Satellites in a catalog with at least one pass whose edges are both at or
/// below `max_edge_deg`, in name order.
pub fn riot_eligible_satellites(catalog: &PassCatalog, max_edge_deg: f64) -> Vec<SatelliteId> {
    let mut out: Vec<SatelliteId> = catalog
        .passes
        .iter()
        .filter(|p| p.theta_start <= max_edge_deg && p.theta_end <= max_edge_deg)
        .map(|p| p.satellite_id.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    out.sort_by_key(|s| (s.0.len(), s.0.clone()));
    out
}

// ---------------------------------------------------------------------------
// Candidate generation

/// Expands a catalog into the candidate procedures for a campaign.
///
/// SQM candidates start at, end at, or are centred on each pass's culmination;
/// placements leaving the pass are dropped. RIOT candidates cover passes whose
/// rise and set elevations are both within the configured edge limit.
pub fn generate_candidates(catalog: &PassCatalog, spec: &CampaignSpec) -> Result<CandidateSet, ScenarioError> {
    spec.validate()?;
    if !catalog.passes.is_empty() && catalog.site_id != spec.site_id {
        return Err(ScenarioError::SiteMismatch {
            catalog: catalog.site_id.clone(),
            campaign: spec.site_id.clone(),
        });
    }
    let config = spec.config_time();
    let sqm = Duration::from_minutes(spec.sqm_duration_minutes);
    let half = Duration::from_secs(sqm.as_secs() / 2);

    let mut candidates: Vec<TestProcedure> = Vec::new();
    let mut by_requirement = Vec::with_capacity(spec.requirements.len());
    let mut uncovered = Vec::new();

    for req in &spec.requirements {
        let mut indices = Vec::new();
        let mut passes: Vec<&SatellitePass> = catalog
            .passes_of(&req.satellite_id)
            .filter(|p| p.t_start >= spec.window.0 && p.t_end <= spec.window.1)
            .collect();
        passes.sort_by_key(|p| p.t_start);
        for pass in passes {
            let shared = Arc::new(pass.clone());
            let intervals: Vec<(Instant, Instant)> = match req.proc_type {
                ProcedureType::Sqm => vec![
                    (pass.t_max, pass.t_max + sqm),
                    (pass.t_max - sqm, pass.t_max),
                    (pass.t_max - half, pass.t_max - half + sqm),
                ],
                ProcedureType::Riot => {
                    let edge = spec.riot_max_edge_elevation_deg;
                    if pass.theta_start <= edge && pass.theta_end <= edge {
                        vec![(pass.t_start, pass.t_end)]
                    } else {
                        vec![]
                    }
                }
            };
            for (start, end) in intervals {
                if start < pass.t_start || end > pass.t_end {
                    continue;
                }
                let id = ProcedureId(candidates.len());
                let proc = TestProcedure::new(id, req.proc_type, start, end, config, shared.clone())
                    .map_err(|source| ScenarioError::InvalidRecord { record: id.0, source })?;
                indices.push(id.0);
                candidates.push(proc);
            }
        }
        if indices.is_empty() {
            uncovered.push(req.clone());
        }
        by_requirement.push((req.clone(), indices));
    }

    if !uncovered.is_empty() {
        return Err(ScenarioError::Uncoverable(uncovered));
    }
    Ok(CandidateSet { candidates, by_requirement })
}
