//! Pairwise conflict rules and the conflict graph over candidate procedures.
//!
//! Two procedures conflict when they are alternatives for the same
//! requirement, when their intervals overlap on the single antenna, or when
//! the gap between them is shorter than the later one's configuration time.
//! A procedure schedule is feasible iff it is an independent set of the graph.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ProcedureId, ProcedureSchedule, TestProcedure};
use crate::scenario::CandidateSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConflictError {
    #[error("procedure {0} is not a vertex of the conflict graph")]
    UnknownProcedure(ProcedureId),
}

/// Whether `a` and `b` cannot both appear in one schedule.
///
/// Intervals are treated as half-open, so back-to-back procedures do not
/// overlap; they are still subject to the configuration-gap rule. With
/// `single_antenna` off only the same-requirement rule applies.
pub fn conflicts_pair(a: &TestProcedure, b: &TestProcedure, single_antenna: bool) -> bool {
    if a.proc_type == b.proc_type && a.satellite_id() == b.satellite_id() {
        return true;
    }
    if !single_antenna {
        return false;
    }
    if a.t_start < b.t_end && b.t_start < a.t_end {
        return true;
    }
    let (earlier, later) = if a.t_start <= b.t_start { (a, b) } else { (b, a) };
    let gap = later.t_start.epoch_seconds() - earlier.t_end.epoch_seconds();
    gap < later.config_time.as_secs() as i64
}

/// Undirected, irreflexive conflict graph with a dense adjacency bitmap for
/// constant-time edge queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl ConflictGraph {
    pub fn with_vertices(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        ConflictGraph {
            n,
            words,
            bits: vec![0; words * n],
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Adds the edge `{i, j}`; self-loops and repeats are ignored.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        if i == j || self.has_edge(i, j) {
            return;
        }
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
        self.adjacency[i].push(j);
        self.adjacency[j].push(i);
        self.edge_count += 1;
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] & (1 << (j % 64)) != 0
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Number of conflicting unordered pairs among `vertices`.
    pub fn count_conflicts(&self, vertices: &[usize]) -> usize {
        let mut count = 0;
        for (k, &i) in vertices.iter().enumerate() {
            for &j in &vertices[k + 1..] {
                if self.has_edge(i, j) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Whether adding `v` to `vertices` would introduce a conflict. `skip`
    /// names a position of `vertices` to ignore.
    pub fn conflicts_with(&self, v: usize, vertices: &[usize], skip: Option<usize>) -> bool {
        vertices
            .iter()
            .enumerate()
            .any(|(k, &u)| Some(k) != skip && self.has_edge(u, v))
    }

    pub fn to_export(&self, cands: &CandidateSet) -> GraphExport {
        GraphExport {
            vertices: cands.candidates.iter().map(|c| c.id).collect(),
            edges: self.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }
}

/// Edge-list form of the graph for debugging.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphExport {
    pub vertices: Vec<ProcedureId>,
    pub edges: Vec<[usize; 2]>,
}

/// Builds the conflict graph with a start-sorted sweep: a candidate can only
/// conflict on time with candidates starting before its end plus the largest
/// configuration time. Same-requirement cliques are added per group.
pub fn build_graph(cands: &CandidateSet) -> ConflictGraph {
    build_graph_with(cands, true)
}

pub fn build_graph_with(cands: &CandidateSet, single_antenna: bool) -> ConflictGraph {
    let n = cands.len();
    let mut g = ConflictGraph::with_vertices(n);
    let procs = &cands.candidates;

    for (_, group) in &cands.by_requirement {
        for (k, &i) in group.iter().enumerate() {
            for &j in &group[k + 1..] {
                g.add_edge(i, j);
            }
        }
    }
    if !single_antenna {
        return g;
    }

    let max_config = procs.iter().map(|p| p.config_time.as_secs() as i64).max().unwrap_or(0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (procs[i].t_start, i));
    for (k, &i) in order.iter().enumerate() {
        let horizon = procs[i].t_end.epoch_seconds() + max_config;
        for &j in &order[k + 1..] {
            if procs[j].t_start.epoch_seconds() >= horizon {
                break;
            }
            if conflicts_pair(&procs[i], &procs[j], true) {
                g.add_edge(i, j);
            }
        }
    }
    g
}

fn vertex_ids(s: &ProcedureSchedule, g: &ConflictGraph) -> Result<Vec<usize>, ConflictError> {
    s.procedures()
        .iter()
        .map(|p| if p.id.0 < g.vertex_count() { Ok(p.id.0) } else { Err(ConflictError::UnknownProcedure(p.id)) })
        .collect()
}

/// Degree of infeasibility: conflicting unordered pairs within `s`.
pub fn violation_count(s: &ProcedureSchedule, g: &ConflictGraph) -> Result<usize, ConflictError> {
    Ok(g.count_conflicts(&vertex_ids(s, g)?))
}

pub fn feasible(s: &ProcedureSchedule, g: &ConflictGraph) -> Result<bool, ConflictError> {
    Ok(violation_count(s, g)? == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::ProcedureType::{Riot, Sqm};
    use crate::model::{Instant, TestProcedure};
    use proptest::prelude::*;

    fn p(id: usize, sat: &str, s: Instant, e: Instant, cfg: u64) -> TestProcedure {
        procedure(id, sat, Sqm, s, e, cfg)
    }

    #[test]
    fn same_requirement_conflicts() {
        let a = p(0, "a", at(10, 0), at(10, 45), 15);
        let b = p(1, "a", at(20, 0), at(20, 45), 15);
        assert!(conflicts_pair(&a, &b, true));
        assert!(conflicts_pair(&a, &b, false));
        // same satellite, different type: only time matters
        let c = procedure(2, "a", Riot, at(20, 0), at(22, 0), 15);
        assert!(!conflicts_pair(&a, &c, true));
    }

    #[test]
    fn overlap_conflicts() {
        let a = p(0, "a", at(10, 0), at(11, 0), 0);
        let b = p(1, "b", at(10, 30), at(11, 30), 0);
        assert!(conflicts_pair(&a, &b, true));
        assert!(!conflicts_pair(&a, &b, false));
    }

    #[test]
    fn configuration_gap_rule() {
        let a = p(0, "a", at(9, 0), at(10, 0), 15);
        let b = p(1, "b", at(10, 10), at(11, 0), 15);
        let c = p(2, "c", at(10, 15), at(11, 0), 15);
        assert!(conflicts_pair(&a, &b, true));
        assert!(!conflicts_pair(&a, &c, true));
        // touching with no configuration time is fine
        let d = p(3, "d", at(10, 0), at(10, 30), 0);
        assert!(!conflicts_pair(&a, &d, true));
    }

    #[test]
    fn later_procedure_config_governs() {
        let a = p(0, "a", at(9, 0), at(10, 0), 60);
        let b = p(1, "b", at(10, 10), at(11, 0), 5);
        assert!(!conflicts_pair(&a, &b, true));
        assert!(!conflicts_pair(&b, &a, true));
    }

    /// Three satellites A, B, C with three candidates each, arranged so that
    /// A0 overlaps B0 and C0, A1 overlaps B1, and C2 ends too close to B2.
    fn three_satellite_set() -> CandidateSet {
        let cands = vec![
            p(0, "A", at(10, 0), at(11, 0), 15),
            p(1, "A", at(14, 0), at(15, 0), 15),
            p(2, "A", at(22, 0), at(23, 0), 15),
            p(3, "B", at(10, 30), at(11, 30), 15),
            p(4, "B", at(14, 30), at(15, 30), 15),
            p(5, "B", at(18, 10), at(19, 0), 15),
            p(6, "C", at(10, 15), at(11, 15), 15),
            p(7, "C", at(12, 30), at(13, 30), 15),
            p(8, "C", at(17, 0), at(18, 0), 15),
        ];
        CandidateSet::from_candidates(cands)
    }

    #[test]
    fn small_graph_and_feasible_set() {
        let set = three_satellite_set();
        let g = build_graph(&set);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(g.has_edge(i, j) && g.has_edge(j, i));
        }
        assert!(g.has_edge(1, 4), "A1-B1 overlap");
        assert!(g.has_edge(5, 8), "B2 too close after C2");
        assert!(g.has_edge(0, 3) && g.has_edge(0, 6));

        let pick = |ids: &[usize]| {
            ProcedureSchedule::new(ids.iter().map(|&i| set.candidates[i].clone()).collect()).unwrap()
        };
        assert!(feasible(&pick(&[1, 3, 8]), &g).unwrap());
        assert!(!feasible(&pick(&[0, 3, 6]), &g).unwrap());
        assert!(feasible(&ProcedureSchedule::default(), &g).unwrap());
    }

    #[test]
    fn chain_has_two_conflicts() {
        let set = CandidateSet::from_candidates(vec![
            p(0, "s1", at(10, 0), at(11, 0), 15),
            p(1, "s2", at(10, 45), at(11, 45), 15),
            p(2, "s3", at(11, 30), at(12, 30), 15),
        ]);
        let g = build_graph(&set);
        let s = ProcedureSchedule::new(set.candidates.clone()).unwrap();
        assert_eq!(violation_count(&s, &g).unwrap(), 2);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert!(!feasible(&s, &g).unwrap());
    }

    #[test]
    fn degenerate_graphs() {
        let one = CandidateSet::from_candidates(vec![p(0, "a", at(1, 0), at(2, 0), 15)]);
        assert_eq!(build_graph(&one).edge_count(), 0);
        let far = CandidateSet::from_candidates(vec![
            p(0, "a", at(1, 0), at(2, 0), 15),
            p(1, "b", at(4, 0), at(5, 0), 15),
        ]);
        assert_eq!(build_graph(&far).edge_count(), 0);
    }

    #[test]
    fn clique_counts_all_pairs() {
        for k in 1..8usize {
            let cands: Vec<_> = (0..k).map(|i| p(i, &format!("s{i}"), at(10, i as i64), at(12, 0), 15)).collect();
            let set = CandidateSet::from_candidates(cands);
            let g = build_graph(&set);
            let s = ProcedureSchedule::new(set.candidates.clone()).unwrap();
            let mut brute = 0;
            for i in 0..k {
                for j in i + 1..k {
                    if conflicts_pair(&set.candidates[i], &set.candidates[j], true) {
                        brute += 1;
                    }
                }
            }
            assert_eq!(brute, k * (k - 1) / 2);
            assert_eq!(violation_count(&s, &g).unwrap(), brute);
        }
    }

    #[test]
    fn unknown_procedure_is_an_error() {
        let set = CandidateSet::from_candidates(vec![p(0, "a", at(1, 0), at(2, 0), 15)]);
        let g = build_graph(&set);
        let stranger = ProcedureSchedule::new(vec![p(7, "b", at(1, 0), at(2, 0), 15)]).unwrap();
        assert_eq!(violation_count(&stranger, &g), Err(ConflictError::UnknownProcedure(ProcedureId(7))));
    }

    #[test]
    fn export_lists_edges() {
        let set = three_satellite_set();
        let g = build_graph(&set);
        let json = serde_json::to_value(g.to_export(&set)).unwrap();
        assert_eq!(json["vertices"].as_array().unwrap().len(), 9);
        assert_eq!(json["edges"].as_array().unwrap().len(), g.edge_count());
    }

    fn arb_procs() -> impl Strategy<Value = Vec<(u8, i64, i64, u64)>> {
        prop::collection::vec((0u8..6, 0i64..600, 5i64..120, 0u64..30), 1..30)
    }

    proptest! {
        #[test]
        fn sweep_matches_all_pairs(raw in arb_procs()) {
            let cands: Vec<_> = raw
                .iter()
                .enumerate()
                .map(|(i, &(s, st, d, cfg))| p(i, &format!("s{s}"), at(0, st), at(0, st + d), cfg))
                .collect();
            let set = CandidateSet::from_candidates(cands);
            let g = build_graph(&set);
            for i in 0..set.len() {
                prop_assert!(!g.has_edge(i, i));
                for j in 0..set.len() {
                    if i != j {
                        let a = conflicts_pair(&set.candidates[i], &set.candidates[j], true);
                        prop_assert_eq!(a, conflicts_pair(&set.candidates[j], &set.candidates[i], true));
                        prop_assert_eq!(g.has_edge(i, j), a);
                        prop_assert_eq!(g.has_edge(i, j), g.neighbors(i).contains(&j));
                    }
                }
            }
        }
    }
}
