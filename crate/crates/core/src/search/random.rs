//! Uniform random sampling baseline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::operators::init_population;
use super::{
    archive_entry, first_front, front_hypervolume, violation_stats, Algorithm, Budget, Genome, Individual,
    IterationRecord, ParetoArchive, RunOutcome, Scenario, SearchConfig, SearchError, Telemetry,
};
use crate::objectives::{penalize_population, FitnessVector};

/// Samples genomes uniformly in batches of `population_size` and keeps the
/// non-dominated set of everything sampled, scored with the same penalty
/// rule as NSGA-III.
pub fn random_search_run(scn: &Scenario, cfg: &SearchConfig) -> Result<RunOutcome, SearchError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut budget = Budget::new(cfg.eval_budget, cfg.wallclock_cap_seconds);
    let mut archive: Vec<Individual> = Vec::new();
    let mut fitness: Vec<FitnessVector> = Vec::new();
    let mut iterations = Vec::new();

    let stop_reason = loop {
        if let Some(reason) = budget.stop() {
            break reason;
        }
        let n = cfg.population_size.min(budget.remaining());
        let genomes = init_population(scn, n, &mut rng);
        let assessed = scn.assess_all(&genomes, cfg.parallel);
        budget.evals += n;
        let (min_violations, mean_violations) = violation_stats(&assessed.iter().collect::<Vec<_>>());

        let mut pool = std::mem::take(&mut archive);
        pool.extend(genomes.into_iter().zip(assessed).map(|(genome, assessment)| Individual { genome, assessment }));
        let pool_fit = penalize_population(&pool.iter().map(|m| m.assessment).collect::<Vec<_>>());
        let refs: Vec<&Genome> = pool.iter().map(|m| &m.genome).collect();
        let keep = first_front(&refs, &pool_fit);
        let mut pool: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
        archive = keep.iter().map(|&i| pool[i].take().unwrap()).collect();
        fitness = keep.iter().map(|&i| pool_fit[i]).collect();

        let all: Vec<usize> = (0..archive.len()).collect();
        iterations.push(IterationRecord {
            iteration: iterations.len(),
            evals: budget.evals,
            min_violations,
            mean_violations,
            front_size: archive.len(),
            hypervolume: front_hypervolume(&fitness, &all),
        });
    };

    let entries = archive.iter().zip(&fitness).map(|(m, f)| archive_entry(scn, &m.genome, f, 0, None)).collect();
    Ok(RunOutcome {
        archive: ParetoArchive { entries },
        telemetry: Telemetry {
            algorithm: Algorithm::RandomSearch,
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
    use crate::objectives::dominates;

    #[test]
    fn archive_is_mutually_non_dominated() {
        let scn = testkit::scenario(4, 4, 2);
        let cfg = SearchConfig { eval_budget: 1000, population_size: 100, ..Default::default() };
        let out = random_search_run(&scn, &cfg).unwrap();
        assert_eq!(out.telemetry.total_evals, 1000);
        assert_eq!(out.telemetry.iterations.len(), 10);
        let pts: Vec<[f64; 3]> = out.archive.entries.iter().map(|e| e.fitness_minimized).collect();
        for p in &pts {
            assert!(!pts.iter().any(|q| dominates(q, p)));
        }
        if out.found_feasible() {
            assert!(out.archive.entries.iter().all(|e| e.violations == 0));
        }
    }

    #[test]
    fn same_seed_same_result() {
        let scn = testkit::scenario(4, 4, 2);
        let cfg = SearchConfig { eval_budget: 500, population_size: 100, rng_seed: 7, ..Default::default() };
        let a = random_search_run(&scn, &cfg).unwrap();
        let b = random_search_run(&scn, &SearchConfig { parallel: false, ..cfg }).unwrap();
        assert_eq!(a.archive, b.archive);
        assert_eq!(a.telemetry, b.telemetry);
    }
}
