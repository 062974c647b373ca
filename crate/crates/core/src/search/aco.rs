//! MAX-MIN ant system baseline.
//!
//! Each ant starts from a random candidate and repeatedly adds a candidate
//! of an unfilled requirement that conflicts with nothing chosen so far,
//! weighing pheromone on the edge from its last choice against the gain in
//! scalar fitness. An ant with no admissible continuation yields nothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    archive_entry, first_front, front_hypervolume, Algorithm, Budget, Genome, Individual, IterationRecord,
    ParetoArchive, RunOutcome, Scenario, SearchError, Telemetry,
};
use crate::objectives::{penalize_population, Assessment};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcoConfig {
    pub ants: usize,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub deposit: f64,
    /// Defaults to `deposit / rho`.
    pub tau_max: Option<f64>,
    /// Defaults to `tau_max / (2 n)` for `n` candidates.
    pub tau_min: Option<f64>,
    /// Floor of the heuristic desirability.
    pub epsilon: f64,
    /// Each ant counts as one evaluation.
    pub eval_budget: usize,
    pub wallclock_cap_seconds: f64,
    pub rng_seed: u64,
    pub parallel: bool,
}

impl Default for AcoConfig {
    fn default() -> Self {
        AcoConfig {
            ants: 50,
            alpha: 1.0,
            beta: 1.0,
            rho: 0.5,
            deposit: 100.0,
            tau_max: None,
            tau_min: None,
            epsilon: 1e-6,
            eval_budget: 10_000,
            wallclock_cap_seconds: 3600.0,
            rng_seed: 0,
            parallel: true,
        }
    }
}

impl AcoConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.ants == 0 {
            return bad("ants must be positive");
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad("rho must lie in (0, 1]");
        }
        if !(self.deposit > 0.0 && self.epsilon > 0.0) {
            return bad("deposit and epsilon must be positive");
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return bad("alpha and beta must be non-negative");
        }
        if let (Some(lo), Some(hi)) = (self.tau_min, self.tau_max) {
            if !(0.0 < lo && lo <= hi) {
                return bad("need 0 < tau_min <= tau_max");
            }
        }
        if self.eval_budget == 0 || !(self.wallclock_cap_seconds > 0.0) {
            return bad("budgets must be positive");
        }
        Ok(())
    }
}

struct Colony<'a> {
    scn: &'a Scenario,
    cfg: &'a AcoConfig,
    requirement_of: Vec<usize>,
    tau: Vec<f64>,
    tau_min: f64,
    tau_max: f64,
}

impl<'a> Colony<'a> {
    fn new(scn: &'a Scenario, cfg: &'a AcoConfig) -> Self {
        let n = scn.candidates.len();
        let mut requirement_of = vec![0; n];
        for r in 0..scn.genome_len() {
            for &v in scn.options(r) {
                requirement_of[v] = r;
            }
        }
        let tau_max = cfg.tau_max.unwrap_or(cfg.deposit / cfg.rho);
        let tau_min = cfg.tau_min.unwrap_or(tau_max / (2.0 * n as f64));
        Colony { scn, cfg, requirement_of, tau: vec![tau_max; n * n], tau_min, tau_max }
    }

    fn scalar(&self, path: &[usize]) -> f64 {
        let a = self.scn.assess_vertices(path);
        a.raw.map_or(0.0, |r| (r.usage + r.frag + (1.0 - r.cost)) / 3.0)
    }

    /// One ant's construction, in visiting order, or `None` at a dead end.
    fn construct(&self, rng: &mut impl Rng) -> Option<Vec<usize>> {
        let n = self.scn.candidates.len();
        let reqs = self.scn.genome_len();
        let start = rng.random_range(0..n);
        let mut path = vec![start];
        let mut covered = vec![false; reqs];
        covered[self.requirement_of[start]] = true;
        while path.len() < reqs {
            let admissible: Vec<usize> = (0..reqs)
                .filter(|&r| !covered[r])
                .flat_map(|r| self.scn.options(r).iter().copied())
                .filter(|&v| !self.scn.graph.conflicts_with(v, &path, None))
                .collect();
            if admissible.is_empty() {
                return None;
            }
            let base = self.scalar(&path);
            let gains = par::map(&admissible, self.cfg.parallel, |&v| {
                let mut p = path.clone();
                p.push(v);
                self.scalar(&p) - base
            });
            let best_gain = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let last = *path.last().unwrap();
            let weights: Vec<f64> = admissible
                .iter()
                .zip(&gains)
                .map(|(&v, &g)| {
                    let eta = if best_gain > 0.0 { (g / best_gain).max(self.cfg.epsilon) } else { self.cfg.epsilon };
                    self.tau[last * n + v].powf(self.cfg.alpha) * eta.powf(self.cfg.beta)
                })
                .collect();
            let next = admissible[roulette(&weights, rng)];
            covered[self.requirement_of[next]] = true;
            path.push(next);
        }
        Some(path)
    }

    fn update(&mut self, best_path: &[usize], best_value: f64) {
        let n = self.scn.candidates.len();
        for t in &mut self.tau {
            *t = ((1.0 - self.cfg.rho) * *t).clamp(self.tau_min, self.tau_max);
        }
        for w in best_path.windows(2) {
            let t = &mut self.tau[w[0] * n + w[1]];
            *t = (*t + self.cfg.deposit * best_value).clamp(self.tau_min, self.tau_max);
        }
    }

    fn genome(&self, path: &[usize]) -> Genome {
        let mut genes = vec![0; self.scn.genome_len()];
        for &v in path {
            let r = self.requirement_of[v];
            genes[r] = self.scn.options(r).iter().position(|&o| o == v).unwrap();
        }
        Genome(genes)
    }
}

fn roulette(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return rng.random_range(0..weights.len());
    }
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

pub fn aco_run(scn: &Scenario, cfg: &AcoConfig) -> Result<RunOutcome, SearchError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut colony = Colony::new(scn, cfg);
    let mut budget = Budget::new(cfg.eval_budget, cfg.wallclock_cap_seconds);
    let mut archive: Vec<Individual> = Vec::new();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut iterations = Vec::new();
    let mut dead_ends = 0usize;

    let stop_reason = 'outer: loop {
        let mut completed = 0usize;
        let mut stopped = None;
        for _ in 0..cfg.ants {
            if let Some(reason) = budget.stop() {
                stopped = Some(reason);
                break;
            }
            budget.evals += 1;
            let Some(path) = colony.construct(&mut rng) else {
                dead_ends += 1;
                continue;
            };
            completed += 1;
            let value = colony.scalar(&path);
            if best.as_ref().is_none_or(|b| value > b.1) {
                best = Some((path.clone(), value));
            }
            let assessment: Assessment = scn.assess_vertices(&path);
            archive.push(Individual { genome: colony.genome(&path), assessment });
        }
        if !archive.is_empty() {
            let fit = penalize_population(&archive.iter().map(|m| m.assessment).collect::<Vec<_>>());
            let genomes: Vec<&Genome> = archive.iter().map(|m| &m.genome).collect();
            let keep = first_front(&genomes, &fit);
            let mut pool: Vec<Option<Individual>> = archive.into_iter().map(Some).collect();
            archive = keep.iter().map(|&i| pool[i].take().unwrap()).collect();
        }
        if let Some((path, value)) = &best {
            colony.update(path, *value);
        }
        let fit = penalize_population(&archive.iter().map(|m| m.assessment).collect::<Vec<_>>());
        let all: Vec<usize> = (0..archive.len()).collect();
        iterations.push(IterationRecord {
            iteration: iterations.len(),
            evals: budget.evals,
            min_violations: (completed > 0).then_some(0),
            mean_violations: (completed > 0).then_some(0.0),
            front_size: archive.len(),
            hypervolume: front_hypervolume(&fit, &all),
        });
        if let Some(reason) = stopped.or_else(|| budget.stop()) {
            break 'outer reason;
        }
    };
    log::debug!("aco: {dead_ends} of {} ants reached a dead end", budget.evals);

    let fit = penalize_population(&archive.iter().map(|m| m.assessment).collect::<Vec<_>>());
    let entries = archive.iter().zip(&fit).map(|(m, f)| archive_entry(scn, &m.genome, f, 0, None)).collect();
    Ok(RunOutcome {
        archive: ParetoArchive { entries },
        telemetry: Telemetry {
            algorithm: Algorithm::Aco,
            seed: cfg.rng_seed,
            stop_reason,
            total_evals: budget.evals,
            iterations,
        },
        elapsed: budget.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::testkit;
    use super::*;

    #[test]
    fn ant_solutions_are_feasible_and_complete() {
        let scn = testkit::scenario(4, 4, 2);
        let cfg = AcoConfig { ants: 10, eval_budget: 40, ..Default::default() };
        let out = aco_run(&scn, &cfg).unwrap();
        assert_eq!(out.telemetry.total_evals, 40);
        assert_eq!(out.telemetry.iterations.len(), 4);
        for e in &out.archive.entries {
            assert_eq!(e.violations, 0);
            assert_eq!(e.procedures.len(), scn.genome_len());
            scn.check(&e.genome).unwrap();
        }
    }

    #[test]
    fn pheromone_stays_within_bounds() {
        let scn = testkit::scenario(4, 4, 2);
        let cfg = AcoConfig::default();
        let mut colony = Colony::new(&scn, &cfg);
        let n = scn.candidates.len();
        assert_eq!(colony.tau_max, 200.0);
        assert!((colony.tau_min - 200.0 / (2.0 * n as f64)).abs() < 1e-12);
        let path: Vec<usize> = (0..scn.genome_len()).map(|r| scn.options(r)[0]).collect();
        for _ in 0..30 {
            colony.update(&path, 0.9);
        }
        assert!(colony.tau.iter().all(|&t| t >= colony.tau_min && t <= colony.tau_max));
        // fixed point of t = (1 - rho) t + deposit * F
        assert!((colony.tau[path[0] * n + path[1]] - 100.0 * 0.9 / 0.5).abs() < 1e-6);
        assert_eq!(colony.tau[path[1] * n + path[0]], colony.tau_min);
    }

    #[test]
    fn roulette_follows_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut hits = [0usize; 3];
        for _ in 0..30_000 {
            hits[roulette(&[1.0, 0.0, 3.0], &mut rng)] += 1;
        }
        assert_eq!(hits[1], 0);
        assert!((hits[2] as f64 / hits[0] as f64 - 3.0).abs() < 0.2);
    }
}
