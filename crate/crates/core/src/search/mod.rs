//! Schedule search: genome encoding, NSGA-III, random search and a MAX-MIN
//! ant system, with run telemetry and the resulting Pareto archive.

mod aco;
mod nsga3;
mod operators;
mod random;
mod refpoints;

use std::time::{Duration as WallDuration, Instant as WallInstant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conflicts::{build_graph, ConflictGraph};
use crate::evaluation::{hypervolume, Front, HV_REFERENCE};
use crate::model::{Duration, Instant, PassCatalog, ProcedureSchedule, ProcedureType, Slot, TestProcedure};
use crate::objectives::{dominates, Assessment, CostModel, FitnessVector, Objectives, RawFitness};
use crate::par;
use crate::scenario::{generate_candidates, CampaignSpec, CandidateSet, ScenarioError};
use crate::slotting::{slot_schedule_for, SlottingPolicy};

pub use aco::{aco_run, AcoConfig};
pub use nsga3::{environmental_selection, non_dominated_sort, nsga3_run};
pub use operators::{
    crossover_one_point, init_population, mutate, mutation_weights, random_genome, tournament, tournament_winner,
};
pub use random::random_search_run;
pub use refpoints::{das_dennis, das_dennis_for, riesz_points, RefPointMethod};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("genome has {found} genes, scenario has {expected} requirements")]
    GenomeLength { expected: usize, found: usize },
    #[error("gene {gene} of requirement {requirement} exceeds its {options} options")]
    GeneOutOfRange { requirement: usize, gene: usize, options: usize },
    #[error("schedule does not cover requirement {0}")]
    MissingRequirement(usize),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// A campaign expanded into everything the search needs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: CampaignSpec,
    pub candidates: CandidateSet,
    pub graph: ConflictGraph,
    /// Cost model with resolved normalization bounds.
    pub cost: CostModel,
}

impl Scenario {
    pub fn build(catalog: &PassCatalog, spec: &CampaignSpec) -> Result<Self, SearchError> {
        let candidates = generate_candidates(catalog, spec)?;
        Ok(Self::from_candidates(spec.clone(), candidates))
    }

    pub fn from_candidates(spec: CampaignSpec, candidates: CandidateSet) -> Self {
        let graph = build_graph(&candidates);
        let cost = spec.cost_model.resolved(&candidates, &spec.slotting);
        Scenario { spec, candidates, graph, cost }
    }

    pub fn policy(&self) -> &SlottingPolicy {
        &self.spec.slotting
    }

    pub fn delta_c(&self) -> Duration {
        self.spec.config_time()
    }

    pub fn objectives(&self) -> Objectives<'_> {
        Objectives { graph: &self.graph, policy: &self.spec.slotting, cost: &self.cost, delta_c: self.delta_c() }
    }

    pub fn genome_len(&self) -> usize {
        self.candidates.requirement_count()
    }

    pub fn options(&self, requirement: usize) -> &[usize] {
        self.candidates.options(requirement)
    }

    pub fn check(&self, g: &Genome) -> Result<(), SearchError> {
        if g.0.len() != self.genome_len() {
            return Err(SearchError::GenomeLength { expected: self.genome_len(), found: g.0.len() });
        }
        for (r, &gene) in g.0.iter().enumerate() {
            let options = self.options(r).len();
            if gene >= options {
                return Err(SearchError::GeneOutOfRange { requirement: r, gene, options });
            }
        }
        Ok(())
    }

    /// Candidate indices selected by a genome. The genome must be valid.
    pub fn vertices(&self, g: &Genome) -> Vec<usize> {
        g.0.iter().enumerate().map(|(r, &gene)| self.options(r)[gene]).collect()
    }

    pub fn decode(&self, g: &Genome) -> Result<ProcedureSchedule, SearchError> {
        self.check(g)?;
        let procs = self.vertices(g).into_iter().map(|v| self.candidates.candidates[v].clone()).collect();
        Ok(ProcedureSchedule::new(procs)?)
    }

    pub fn encode(&self, s: &ProcedureSchedule) -> Result<Genome, SearchError> {
        let genes = (0..self.genome_len())
            .map(|r| {
                self.options(r)
                    .iter()
                    .position(|&v| s.procedures().iter().any(|p| p.id.0 == v))
                    .ok_or(SearchError::MissingRequirement(r))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Genome(genes))
    }

    /// Violations and, when feasible, raw objectives of the candidate set
    /// `vertices`.
    pub fn assess_vertices(&self, vertices: &[usize]) -> Assessment {
        let violations = self.graph.count_conflicts(vertices);
        if violations > 0 {
            return Assessment { violations, raw: None };
        }
        let procs: Vec<TestProcedure> = vertices.iter().map(|&v| self.candidates.candidates[v].clone()).collect();
        let raw = self.objectives().raw_fitness(&procs).expect("scenario invariants guarantee a scorable schedule");
        Assessment { violations, raw: Some(raw) }
    }

    pub fn assess(&self, g: &Genome) -> Assessment {
        self.assess_vertices(&self.vertices(g))
    }

    /// Assesses genomes, on the rayon pool when `parallel` is set and the
    /// feature is enabled. Results follow input order.
    pub fn assess_all(&self, genomes: &[Genome], parallel: bool) -> Vec<Assessment> {
        par::map(genomes, parallel, |g| self.assess(g))
    }
}

/// One gene per requirement: the index of the chosen candidate among that
/// requirement's options.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub assessment: Assessment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "nsga3")]
    Nsga3,
    #[serde(rename = "rs")]
    RandomSearch,
    #[serde(rename = "aco")]
    Aco,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nsga3 => "nsga3",
            Algorithm::RandomSearch => "rs",
            Algorithm::Aco => "aco",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nsga3" => Ok(Algorithm::Nsga3),
            "rs" => Ok(Algorithm::RandomSearch),
            "aco" => Ok(Algorithm::Aco),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub population_size: usize,
    pub reference_points: usize,
    pub reference_method: RefPointMethod,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub p_nc_min: f64,
    pub p_nc_max: f64,
    pub eval_budget: usize,
    pub wallclock_cap_seconds: f64,
    pub rng_seed: u64,
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population_size: 200,
            reference_points: 100,
            reference_method: RefPointMethod::Riesz,
            crossover_rate: 0.8,
            mutation_rate: 0.2,
            p_nc_min: 0.5,
            p_nc_max: 0.95,
            eval_budget: 10_000,
            wallclock_cap_seconds: 3600.0,
            rng_seed: 0,
            parallel: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if self.reference_points == 0 {
            return bad("reference_points must be positive");
        }
        for (name, p) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SearchError::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(0.0 <= self.p_nc_min && self.p_nc_min <= self.p_nc_max && self.p_nc_max <= 1.0) {
            return bad("need 0 <= p_nc_min <= p_nc_max <= 1");
        }
        if self.eval_budget == 0 {
            return bad("eval_budget must be positive");
        }
        if !(self.wallclock_cap_seconds > 0.0) {
            return bad("wallclock_cap_seconds must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EvalBudget,
    Wallclock,
}

pub(crate) struct Budget {
    pub evals: usize,
    max_evals: usize,
    started: WallInstant,
    cap: WallDuration,
}

impl Budget {
    pub fn new(max_evals: usize, cap_seconds: f64) -> Self {
        Budget {
            evals: 0,
            max_evals,
            started: WallInstant::now(),
            cap: WallDuration::from_secs_f64(cap_seconds),
        }
    }

    pub fn remaining(&self) -> usize {
        self.max_evals.saturating_sub(self.evals)
    }

    pub fn stop(&self) -> Option<StopReason> {
        if self.evals >= self.max_evals {
            Some(StopReason::EvalBudget)
        } else if self.started.elapsed() >= self.cap {
            Some(StopReason::Wallclock)
        } else {
            None
        }
    }

    pub fn elapsed(&self) -> WallDuration {
        self.started.elapsed()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Cumulative evaluations at the end of the iteration.
    pub evals: usize,
    /// `None` when the iteration produced no schedule.
    pub min_violations: Option<usize>,
    pub mean_violations: Option<f64>,
    pub front_size: usize,
    pub hypervolume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub stop_reason: StopReason,
    pub total_evals: usize,
    pub iterations: Vec<IterationRecord>,
}

impl Telemetry {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("telemetry serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcedureRecord {
    pub id: usize,
    pub satellite: String,
    #[serde(rename = "type")]
    pub proc_type: ProcedureType,
    pub t_start: Instant,
    pub t_end: Instant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub genome: Genome,
    pub procedures: Vec<ProcedureRecord>,
    pub slots: Vec<Slot>,
    pub fitness_raw: Option<RawFitness>,
    pub fitness_minimized: [f64; 3],
    pub violations: usize,
    /// Non-domination rank within the final population.
    pub rank: usize,
    /// Associated reference point, for NSGA-III.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub niche: Option<usize>,
}

/// The reported front of a run. Holds only feasible schedules whenever any
/// feasible schedule was found.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParetoArchive {
    pub entries: Vec<ArchiveEntry>,
}

impl ParetoArchive {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn feasible_count(&self) -> usize {
        self.entries.iter().filter(|e| e.violations == 0).count()
    }

    /// Minimized objective vectors of the feasible entries.
    pub fn front(&self, provenance: impl Into<String>) -> Front {
        let points = self.entries.iter().filter(|e| e.violations == 0).map(|e| e.fitness_minimized).collect();
        Front::new(points, provenance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("archive serializes")
    }

    /// Gantt rows for the first entry: `slot_start,slot_end,procedures`.
    pub fn gantt_csv(&self, entry: usize) -> Option<String> {
        let e = self.entries.get(entry)?;
        let mut out = String::from("slot_start,slot_end,procedures\n");
        for s in &e.slots {
            let inside: Vec<String> = e
                .procedures
                .iter()
                .filter(|p| p.t_start >= s.t_start && p.t_end <= s.t_end)
                .map(|p| format!("{}:{}:{}", p.satellite, p.proc_type, p.id))
                .collect();
            out.push_str(&format!("{},{},{}\n", s.t_start.to_iso(), s.t_end.to_iso(), inside.join(" ")));
        }
        Some(out)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub archive: ParetoArchive,
    pub telemetry: Telemetry,
    pub elapsed: WallDuration,
}

impl RunOutcome {
    pub fn found_feasible(&self) -> bool {
        self.archive.feasible_count() > 0
    }
}

pub fn run(scn: &Scenario, algo: Algorithm, cfg: &SearchConfig, aco: &AcoConfig) -> Result<RunOutcome, SearchError> {
    match algo {
        Algorithm::Nsga3 => nsga3_run(scn, cfg),
        Algorithm::RandomSearch => random_search_run(scn, cfg),
        Algorithm::Aco => aco_run(scn, aco),
    }
}

pub(crate) fn archive_entry(
    scn: &Scenario,
    genome: &Genome,
    fitness: &FitnessVector,
    rank: usize,
    niche: Option<usize>,
) -> ArchiveEntry {
    let verts = scn.vertices(genome);
    let procedures: Vec<ProcedureRecord> = verts
        .iter()
        .map(|&v| {
            let p = &scn.candidates.candidates[v];
            ProcedureRecord {
                id: p.id.0,
                satellite: p.satellite_id().to_string(),
                proc_type: p.proc_type,
                t_start: p.t_start,
                t_end: p.t_end,
            }
        })
        .collect();
    let slots = slot_schedule_for(verts.iter().map(|&v| &scn.candidates.candidates[v]), scn.policy()).slots;
    ArchiveEntry {
        genome: genome.clone(),
        procedures,
        slots,
        fitness_raw: fitness.raw,
        fitness_minimized: fitness.minimized,
        violations: fitness.violations,
        rank,
        niche,
    }
}

/// Indices of the non-dominated members, with duplicate genomes removed.
/// Restricted to feasible members whenever one exists.
pub(crate) fn first_front(genomes: &[&Genome], fitness: &[FitnessVector]) -> Vec<usize> {
    let any_feasible = fitness.iter().any(|f| f.is_feasible());
    let pool: Vec<usize> = (0..fitness.len()).filter(|&i| !any_feasible || fitness[i].is_feasible()).collect();
    let mut out: Vec<usize> = Vec::new();
    for &i in &pool {
        let dominated = pool.iter().any(|&j| dominates(&fitness[j].minimized, &fitness[i].minimized));
        if !dominated && !out.iter().any(|&k| genomes[k] == genomes[i]) {
            out.push(i);
        }
    }
    out
}

pub(crate) fn front_hypervolume(fitness: &[FitnessVector], members: &[usize]) -> f64 {
    let pts = members.iter().filter(|&&i| fitness[i].is_feasible()).map(|&i| fitness[i].minimized).collect();
    hypervolume(&Front::new(pts, "telemetry"), HV_REFERENCE)
}

pub(crate) fn violation_stats(assessments: &[&Assessment]) -> (Option<usize>, Option<f64>) {
    if assessments.is_empty() {
        return (None, None);
    }
    let min = assessments.iter().map(|a| a.violations).min();
    let mean = assessments.iter().map(|a| a.violations as f64).sum::<f64>() / assessments.len() as f64;
    (min, Some(mean))
}

#[cfg(test)]
pub(crate) mod testkit {
    use super::*;
    use crate::scenario::{synth_passes, SynthParams};

    /// Synthetic scenario: `n_sats` satellites over `days` days, SQM on all
    /// of them and RIOT on those with low-elevation passes.
    pub fn scenario(seed: u64, n_sats: usize, days: i64) -> Scenario {
        let start = Instant::from_epoch_seconds(1_727_740_800);
        let end = Instant::from_epoch_seconds(1_727_740_800 + days * 86_400);
        let params = SynthParams::default();
        let catalog = synth_passes(seed, n_sats, (start, end), &params).unwrap();
        let riot = crate::scenario::riot_eligible_satellites(&catalog, 5.0);
        let sats: Vec<_> = (0..n_sats).map(crate::scenario::satellite_name).collect();
        let spec = CampaignSpec::sqm_all_riot_some(params.site_id.clone(), (start, end), sats, &riot);
        Scenario::build(&catalog, &spec).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_encode_round_trip() {
        let scn = testkit::scenario(3, 4, 2);
        let g = Genome((0..scn.genome_len()).map(|r| scn.options(r).len() - 1).collect());
        let s = scn.decode(&g).unwrap();
        assert_eq!(s.len(), scn.genome_len());
        assert_eq!(scn.encode(&s).unwrap(), g);
    }

    #[test]
    fn invalid_genomes_are_rejected() {
        let scn = testkit::scenario(3, 4, 2);
        assert!(matches!(scn.decode(&Genome(vec![0])), Err(SearchError::GenomeLength { .. })));
        let mut g = Genome(vec![0; scn.genome_len()]);
        g.0[0] = scn.options(0).len();
        assert!(matches!(scn.decode(&g), Err(SearchError::GeneOutOfRange { .. })));
    }

    #[test]
    fn fast_assessment_matches_objectives() {
        let scn = testkit::scenario(5, 4, 2);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
        for _ in 0..50 {
            let g = random_genome(&scn, &mut rng);
            let fast = scn.assess(&g);
            let slow = scn.objectives().assess(&scn.decode(&g).unwrap()).unwrap();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn parallel_assessment_matches_sequential() {
        let scn = testkit::scenario(5, 4, 2);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let pop = init_population(&scn, 64, &mut rng);
        assert_eq!(scn.assess_all(&pop, true), scn.assess_all(&pop, false));
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        let bad = SearchConfig { p_nc_min: 0.9, p_nc_max: 0.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SearchConfig { population_size: 1, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::Nsga3, Algorithm::RandomSearch, Algorithm::Aco] {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("ga".parse::<Algorithm>().is_err());
    }
}
