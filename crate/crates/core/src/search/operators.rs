//! Variation and selection operators on requirement-indexed genomes.

use rand::Rng;

use super::{Genome, Scenario, SearchConfig};
use crate::objectives::{dominates, FitnessVector};

pub fn random_genome(scn: &Scenario, rng: &mut impl Rng) -> Genome {
    Genome((0..scn.genome_len()).map(|r| rng.random_range(0..scn.options(r).len())).collect())
}

/// `n` genomes drawn uniformly from each requirement's options.
pub fn init_population(scn: &Scenario, n: usize, rng: &mut impl Rng) -> Vec<Genome> {
    (0..n).map(|_| random_genome(scn, rng)).collect()
}

/// Swaps the tails of two genomes after a random cut point.
pub fn crossover_one_point(a: &Genome, b: &Genome, rng: &mut impl Rng) -> (Genome, Genome) {
    let n = a.0.len();
    if n < 2 {
        return (a.clone(), b.clone());
    }
    let cut = rng.random_range(1..n);
    let mut c = a.0[..cut].to_vec();
    c.extend_from_slice(&b.0[cut..]);
    let mut d = b.0[..cut].to_vec();
    d.extend_from_slice(&a.0[cut..]);
    (Genome(c), Genome(d))
}

/// Selection probabilities for replacing gene `pos`: one entry per
/// alternative gene value. Alternatives that would not conflict with the rest
/// of the schedule get weight `P_nc`, which grows as the schedule gets closer
/// to feasible, and the others `1 - P_nc`.
pub fn mutation_weights(scn: &Scenario, g: &Genome, pos: usize, p_nc_min: f64, p_nc_max: f64) -> Vec<(usize, f64)> {
    let verts = scn.vertices(g);
    let xi = scn.graph.count_conflicts(&verts) as f64;
    let ratio = (1.0 - xi / verts.len() as f64).clamp(0.0, 1.0);
    let p_nc = p_nc_min + (p_nc_max - p_nc_min) * ratio;
    let p_c = 1.0 - p_nc;

    let mut weights: Vec<(usize, f64)> = scn
        .options(pos)
        .iter()
        .enumerate()
        .filter(|&(gene, _)| gene != g.0[pos])
        .map(|(gene, &v)| {
            let w = if scn.graph.conflicts_with(v, &verts, Some(pos)) { p_c } else { p_nc };
            (gene, w)
        })
        .collect();
    let total: f64 = weights.iter().map(|w| w.1).sum();
    let k = weights.len() as f64;
    for w in &mut weights {
        w.1 = if total > 0.0 { w.1 / total } else { 1.0 / k };
    }
    weights
}

/// Conflict-aware mutation, applied with probability `mutation_rate`.
pub fn mutate(scn: &Scenario, g: &mut Genome, cfg: &SearchConfig, rng: &mut impl Rng) {
    if g.0.is_empty() || !rng.random_bool(cfg.mutation_rate) {
        return;
    }
    let pos = rng.random_range(0..g.0.len());
    let weights = mutation_weights(scn, g, pos, cfg.p_nc_min, cfg.p_nc_max);
    if weights.is_empty() {
        return;
    }
    let mut u: f64 = rng.random();
    for &(gene, w) in &weights {
        if u < w {
            g.0[pos] = gene;
            return;
        }
        u -= w;
    }
    g.0[pos] = weights.last().unwrap().0;
}

/// Outcome of a binary tournament between members `i` and `j`: fewer
/// violations wins, then Pareto dominance, then lower rank, then a coin flip.
pub fn tournament_winner(i: usize, j: usize, fitness: &[FitnessVector], ranks: &[usize], rng: &mut impl Rng) -> usize {
    let (a, b) = (&fitness[i], &fitness[j]);
    if a.violations != b.violations {
        return if a.violations < b.violations { i } else { j };
    }
    if dominates(&a.minimized, &b.minimized) {
        return i;
    }
    if dominates(&b.minimized, &a.minimized) {
        return j;
    }
    if ranks[i] != ranks[j] {
        return if ranks[i] < ranks[j] { i } else { j };
    }
    if rng.random_bool(0.5) {
        i
    } else {
        j
    }
}

pub fn tournament(fitness: &[FitnessVector], ranks: &[usize], rng: &mut impl Rng) -> usize {
    let n = fitness.len();
    let i = rng.random_range(0..n);
    if n == 1 {
        return i;
    }
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    tournament_winner(i, j, fitness, ranks, rng)
}

/// `n` offspring from binary tournaments, one-point crossover and mutation.
pub(crate) fn breed(
    scn: &Scenario,
    parents: &[Genome],
    fitness: &[FitnessVector],
    ranks: &[usize],
    n: usize,
    cfg: &SearchConfig,
    rng: &mut impl Rng,
) -> Vec<Genome> {
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let a = &parents[tournament(fitness, ranks, rng)];
        let b = &parents[tournament(fitness, ranks, rng)];
        let (mut c, mut d) = if rng.random_bool(cfg.crossover_rate) {
            crossover_one_point(a, b, rng)
        } else {
            (a.clone(), b.clone())
        };
        mutate(scn, &mut c, cfg, rng);
        mutate(scn, &mut d, cfg, rng);
        out.push(c);
        out.push(d);
    }
    out.truncate(n);
    out
}

#[cfg(test)]
mod tests {
    use super::super::testkit;
    use super::*;
    use crate::objectives::penalize_population;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn crossover_preserves_genes_per_position() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = Genome(vec![0, 1, 2, 3, 4]);
        let b = Genome(vec![5, 6, 7, 8, 9]);
        for _ in 0..20 {
            let (c, d) = crossover_one_point(&a, &b, &mut rng);
            for k in 0..5 {
                let pair = [c.0[k], d.0[k]];
                assert!(pair == [a.0[k], b.0[k]] || pair == [b.0[k], a.0[k]]);
            }
            assert_ne!(c, a);
        }
    }

    #[test]
    fn mutation_weights_form_a_distribution() {
        let scn = testkit::scenario(2, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let g = random_genome(&scn, &mut rng);
            let pos = rng.random_range(0..g.0.len());
            let w = mutation_weights(&scn, &g, pos, 0.5, 0.95);
            assert_eq!(w.len(), scn.options(pos).len() - 1);
            if !w.is_empty() {
                assert!((w.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(w.iter().all(|x| x.0 != g.0[pos]));
            }
        }
    }

    #[test]
    fn feasible_schedule_favours_non_conflicting_alternatives() {
        let scn = testkit::scenario(2, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..2000 {
            let g = random_genome(&scn, &mut rng);
            if scn.assess(&g).violations != 0 {
                continue;
            }
            let verts = scn.vertices(&g);
            for pos in 0..g.0.len() {
                let w = mutation_weights(&scn, &g, pos, 0.5, 0.95);
                let conflicting: Vec<bool> =
                    w.iter().map(|&(gene, _)| scn.graph.conflicts_with(scn.options(pos)[gene], &verts, Some(pos))).collect();
                if conflicting.iter().any(|&c| c) && conflicting.iter().any(|&c| !c) {
                    let nc = w.iter().zip(&conflicting).find(|(_, &c)| !c).unwrap().0 .1;
                    let c = w.iter().zip(&conflicting).find(|(_, &c)| c).unwrap().0 .1;
                    assert!((nc / c - 0.95 / 0.05).abs() < 1e-6);
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn mutation_respects_rate() {
        let scn = testkit::scenario(2, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = SearchConfig { mutation_rate: 0.0, ..Default::default() };
        let g0 = random_genome(&scn, &mut rng);
        let mut g = g0.clone();
        for _ in 0..50 {
            mutate(&scn, &mut g, &cfg, &mut rng);
        }
        assert_eq!(g, g0);
        let cfg = SearchConfig { mutation_rate: 1.0, ..Default::default() };
        let mut changed = 0;
        for _ in 0..50 {
            let mut h = g0.clone();
            mutate(&scn, &mut h, &cfg, &mut rng);
            scn.check(&h).unwrap();
            changed += usize::from(h != g0);
        }
        assert!(changed > 0);
    }

    #[test]
    fn feasible_beats_infeasible_in_tournament() {
        let scn = testkit::scenario(2, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pop = init_population(&scn, 60, &mut rng);
        let fit = penalize_population(&scn.assess_all(&pop, false));
        let ranks = vec![0; pop.len()];
        for i in 0..pop.len() {
            for j in 0..pop.len() {
                if fit[i].violations == 0 && fit[j].violations > 0 {
                    assert_eq!(tournament_winner(i, j, &fit, &ranks, &mut rng), i);
                    assert_eq!(tournament_winner(j, i, &fit, &ranks, &mut rng), i);
                }
            }
        }
    }
}
