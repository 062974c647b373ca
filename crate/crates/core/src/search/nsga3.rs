//! NSGA-III with reference-point niching.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::operators::{breed, init_population};
use super::refpoints::reference_points;
use super::{
    archive_entry, first_front, front_hypervolume, violation_stats, Algorithm, Budget, Genome, Individual,
    IterationRecord, ParetoArchive, RunOutcome, Scenario, SearchConfig, SearchError, Telemetry,
};
use crate::objectives::{dominates, penalize_population, FitnessVector};

/// Fast non-dominated sort. Returns fronts of indices, best first.
pub fn non_dominated_sort(points: &[[f64; 3]]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = b[i];
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..4 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Normalized objective vectors of `members`: translated by the ideal point
/// and scaled by the intercepts of the hyperplane through the extreme points,
/// or by the worst values when that hyperplane is degenerate.
fn normalize(points: &[[f64; 3]], members: &[usize]) -> Vec<[f64; 3]> {
    let mut ideal = [f64::INFINITY; 3];
    for &i in members {
        for k in 0..3 {
            ideal[k] = ideal[k].min(points[i][k]);
        }
    }
    let translated: Vec<[f64; 3]> =
        members.iter().map(|&i| [points[i][0] - ideal[0], points[i][1] - ideal[1], points[i][2] - ideal[2]]).collect();

    let mut extremes = [[0.0; 3]; 3];
    for (axis, extreme) in extremes.iter_mut().enumerate() {
        let asf = |t: &[f64; 3]| {
            (0..3).map(|k| t[k] / if k == axis { 1.0 } else { 1e-6 }).fold(f64::NEG_INFINITY, f64::max)
        };
        *extreme = *translated.iter().min_by(|a, b| asf(a).total_cmp(&asf(b))).unwrap();
    }
    let worst = translated.iter().fold([0.0f64; 3], |w, t| [w[0].max(t[0]), w[1].max(t[1]), w[2].max(t[2])]);
    let intercepts = solve3(extremes, [1.0; 3])
        .map(|a| [1.0 / a[0], 1.0 / a[1], 1.0 / a[2]])
        .filter(|c| c.iter().all(|&v| v.is_finite() && v > 1e-6))
        .unwrap_or_else(|| worst.map(|v| if v > 1e-10 { v } else { 1.0 }));

    translated.iter().map(|t| [t[0] / intercepts[0], t[1] / intercepts[1], t[2] / intercepts[2]]).collect()
}

fn associate(f: &[f64; 3], refs: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, w) in refs.iter().enumerate() {
        let ww: f64 = w.iter().map(|v| v * v).sum();
        let proj: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / ww;
        let d: f64 = (0..3).map(|k| (f[k] - proj * w[k]).powi(2)).sum::<f64>().sqrt();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Result of one environmental selection: chosen indices with their
/// non-domination rank and associated reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub chosen: Vec<usize>,
    pub ranks: Vec<usize>,
    pub niches: Vec<usize>,
}

/// Chooses `n` of `points` by non-domination rank, filling the last
/// partially admitted front by niche counts over `refs`.
pub fn environmental_selection(points: &[[f64; 3]], n: usize, refs: &[Vec<f64>], rng: &mut impl Rng) -> Selection {
    let fronts = non_dominated_sort(points);
    let mut members: Vec<usize> = Vec::new();
    let mut rank_of = vec![usize::MAX; points.len()];
    let mut last = 0;
    for (r, f) in fronts.iter().enumerate() {
        for &i in f {
            rank_of[i] = r;
        }
        members.extend_from_slice(f);
        last = r;
        if members.len() >= n {
            break;
        }
    }
    let normalized = normalize(points, &members);
    let assoc: Vec<(usize, f64)> = normalized.iter().map(|f| associate(f, refs)).collect();
    let niche_of = |pos: usize| assoc[pos].0;

    let selected_count = members.len() - fronts[last].len();
    let mut chosen_pos: Vec<usize> = (0..selected_count).collect();
    if members.len() > n {
        let mut counts = vec![0usize; refs.len()];
        for &p in &chosen_pos {
            counts[niche_of(p)] += 1;
        }
        let mut pending: Vec<usize> = (selected_count..members.len()).collect();
        let mut excluded = vec![false; refs.len()];
        while chosen_pos.len() < n {
            let min = (0..refs.len()).filter(|&j| !excluded[j]).map(|j| counts[j]).min().unwrap();
            let candidates: Vec<usize> = (0..refs.len()).filter(|&j| !excluded[j] && counts[j] == min).collect();
            let j = candidates[rng.random_range(0..candidates.len())];
            let in_niche: Vec<usize> = (0..pending.len()).filter(|&k| niche_of(pending[k]) == j).collect();
            if in_niche.is_empty() {
                excluded[j] = true;
                continue;
            }
            let pick = if counts[j] == 0 {
                *in_niche.iter().min_by(|&&a, &&b| assoc[pending[a]].1.total_cmp(&assoc[pending[b]].1)).unwrap()
            } else {
                in_niche[rng.random_range(0..in_niche.len())]
            };
            chosen_pos.push(pending.swap_remove(pick));
            counts[j] += 1;
        }
    } else {
        chosen_pos.extend(selected_count..members.len());
    }
    chosen_pos.sort_unstable();
    Selection {
        chosen: chosen_pos.iter().map(|&p| members[p]).collect(),
        ranks: chosen_pos.iter().map(|&p| rank_of[members[p]]).collect(),
        niches: chosen_pos.iter().map(|&p| niche_of(p)).collect(),
    }
}

struct Population {
    members: Vec<Individual>,
    fitness: Vec<FitnessVector>,
    ranks: Vec<usize>,
    niches: Vec<usize>,
}

fn select(pool: Vec<Individual>, n: usize, refs: &[Vec<f64>], rng: &mut impl Rng) -> Population {
    let assessments: Vec<_> = pool.iter().map(|m| m.assessment).collect();
    let fit = penalize_population(&assessments);
    let points: Vec<[f64; 3]> = fit.iter().map(|f| f.minimized).collect();
    let sel = environmental_selection(&points, n.min(pool.len()), refs, rng);
    let mut pool: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    let members: Vec<Individual> = sel.chosen.iter().map(|&i| pool[i].take().unwrap()).collect();
    let assessments: Vec<_> = members.iter().map(|m| m.assessment).collect();
    Population { fitness: penalize_population(&assessments), members, ranks: sel.ranks, niches: sel.niches }
}

fn record(pop: &Population, iteration: usize, evals: usize) -> IterationRecord {
    let genomes: Vec<&Genome> = pop.members.iter().map(|m| &m.genome).collect();
    let front = first_front(&genomes, &pop.fitness);
    let refs: Vec<_> = pop.members.iter().map(|m| &m.assessment).collect();
    let (min_violations, mean_violations) = violation_stats(&refs);
    IterationRecord {
        iteration,
        evals,
        min_violations,
        mean_violations,
        front_size: front.len(),
        hypervolume: front_hypervolume(&pop.fitness, &front),
    }
}

pub fn nsga3_run(scn: &Scenario, cfg: &SearchConfig) -> Result<RunOutcome, SearchError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let refs = reference_points(cfg.reference_method, cfg.reference_points, &mut rng);
    let mut budget = Budget::new(cfg.eval_budget, cfg.wallclock_cap_seconds);

    let n0 = cfg.population_size.min(budget.remaining());
    let genomes = init_population(scn, n0, &mut rng);
    let assessed = scn.assess_all(&genomes, cfg.parallel);
    budget.evals += n0;
    let initial: Vec<Individual> =
        genomes.into_iter().zip(assessed).map(|(genome, assessment)| Individual { genome, assessment }).collect();
    let mut pop = select(initial, cfg.population_size, &refs, &mut rng);
    let mut iterations = vec![record(&pop, 0, budget.evals)];

    let stop_reason = loop {
        if let Some(reason) = budget.stop() {
            break reason;
        }
        let n_off = cfg.population_size.min(budget.remaining());
        let parents: Vec<Genome> = pop.members.iter().map(|m| m.genome.clone()).collect();
        let children = breed(scn, &parents, &pop.fitness, &pop.ranks, n_off, cfg, &mut rng);
        let assessed = scn.assess_all(&children, cfg.parallel);
        budget.evals += n_off;

        let mut seen: HashSet<Genome> = HashSet::with_capacity(2 * cfg.population_size);
        let mut combined: Vec<Individual> = Vec::with_capacity(pop.members.len() + n_off);
        let offspring = children.into_iter().zip(assessed).map(|(genome, assessment)| Individual { genome, assessment });
        for ind in pop.members.drain(..).chain(offspring) {
            if seen.insert(ind.genome.clone()) {
                combined.push(ind);
            }
        }
        pop = select(combined, cfg.population_size, &refs, &mut rng);
        iterations.push(record(&pop, iterations.len(), budget.evals));
    };

    let genomes: Vec<&Genome> = pop.members.iter().map(|m| &m.genome).collect();
    let front = first_front(&genomes, &pop.fitness);
    let entries = front
        .iter()
        .map(|&i| archive_entry(scn, &pop.members[i].genome, &pop.fitness[i], pop.ranks[i], Some(pop.niches[i])))
        .collect();
    Ok(RunOutcome {
        archive: ParetoArchive { entries },
        telemetry: Telemetry {
            algorithm: Algorithm::Nsga3,
            seed: cfg.rng_seed,
            stop_reason,
            total_evals: budget.evals,
            iterations,
        },
        elapsed: budget.elapsed(),
    })
}
