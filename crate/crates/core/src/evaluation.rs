//! Pareto-front quality indicators and the statistics used to compare
//! algorithms across repeated runs.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::objectives::dominates;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluationError {
    #[error("indicator needs a non-empty front")]
    EmptyFront,
    #[error("statistic needs non-empty samples")]
    EmptySample,
    #[error("points of dimension {found} mixed with dimension {expected}")]
    MixedDimensions { expected: usize, found: usize },
    #[error("non-finite coordinate in front {0}")]
    NonFinite(String),
}

pub type Point = [f64; 3];

/// Default hypervolume reference point in minimized, normalized space.
pub const HV_REFERENCE: Point = [1.1, 1.1, 1.1];

/// A set of objective vectors (minimization) from one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub points: Vec<Point>,
    pub provenance: String,
}

impl Front {
    pub fn new(points: Vec<Point>, provenance: impl Into<String>) -> Self {
        Front { points, provenance: provenance.into() }
    }

    /// The non-dominated subset, with duplicates removed and points sorted.
    pub fn non_dominated(points: &[Point], provenance: impl Into<String>) -> Self {
        let mut pts: Vec<Point> = points.to_vec();
        pts.sort_by(cmp_points);
        pts.dedup();
        let keep: Vec<Point> = pts
            .iter()
            .filter(|p| !pts.iter().any(|q| dominates(q, &p[..])))
            .copied()
            .collect();
        Front { points: keep, provenance: provenance.into() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn check_finite(&self) -> Result<(), EvaluationError> {
        if self.points.iter().flatten().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(EvaluationError::NonFinite(self.provenance.clone()))
        }
    }
}

fn cmp_points(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn distance(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn nearest(p: &Point, set: &[Point]) -> f64 {
    set.iter().map(|q| distance(p, q)).fold(f64::INFINITY, f64::min)
}

/// Non-dominated union of several runs' fronts.
pub fn reference_front(runs: &[Front]) -> Front {
    let all: Vec<Point> = runs.iter().flat_map(|f| f.points.iter().copied()).collect();
    Front::non_dominated(&all, "reference")
}

/// Generational distance: mean Euclidean distance from each point of `front`
/// to its nearest point on `reference`.
pub fn gd(front: &Front, reference: &Front) -> Result<f64, EvaluationError> {
    if front.is_empty() || reference.is_empty() {
        return Err(EvaluationError::EmptyFront);
    }
    let total: f64 = front.points.iter().map(|p| nearest(p, &reference.points)).sum();
    Ok(total / front.len() as f64)
}

/// Generalized spread over nearest-neighbour distances.
///
/// Extreme points, one per objective with the largest value in it, come from
/// `extremes_from` when given and from the front itself otherwise. A front
/// with fewer than two points scores 0; a front whose points all coincide
/// scores 1.
pub fn spread(front: &Front, extremes_from: Option<&Front>) -> f64 {
    let n = front.len();
    if n < 2 {
        return 0.0;
    }
    let source = extremes_from.filter(|f| !f.is_empty()).unwrap_or(front);
    let extreme_sum: f64 = (0..3)
        .map(|k| {
            let e = source
                .points
                .iter()
                .max_by(|a, b| a[k].total_cmp(&b[k]).then_with(|| cmp_points(b, a)))
                .unwrap();
            nearest(e, &front.points)
        })
        .sum();
    let d: Vec<f64> = (0..n)
        .map(|i| {
            front
                .points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| distance(&front.points[i], q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let dev: f64 = d.iter().map(|x| (x - mean).abs()).sum();
    let denom = extreme_sum + n as f64 * mean;
    if denom <= 0.0 {
        return 1.0;
    }
    (extreme_sum + dev) / denom
}

/// Exact hypervolume of a 3-D front by sweeping the third objective and
/// measuring the 2-D dominated area at each level.
///
/// Points exceeding the reference point in any coordinate are discarded.
pub fn hypervolume(front: &Front, ref_point: Point) -> f64 {
    let mut pts: Vec<Point> = Vec::with_capacity(front.len());
    let mut discarded = 0;
    for p in &front.points {
        if p.iter().zip(&ref_point).all(|(x, r)| x <= r) {
            pts.push(*p);
        } else {
            discarded += 1;
        }
    }
    if discarded > 0 {
        log::warn!(
            "hypervolume of {}: discarded {discarded} point(s) beyond the reference point",
            front.provenance
        );
    }
    if pts.is_empty() {
        return 0.0;
    }
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut layer: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    let mut volume = 0.0;
    for (i, p) in pts.iter().enumerate() {
        layer.push([p[0], p[1]]);
        let z_next = pts.get(i + 1).map_or(ref_point[2], |q| q[2]);
        if z_next > p[2] {
            volume += area_2d(&mut layer, ref_point[0], ref_point[1]) * (z_next - p[2]);
        }
    }
    volume
}

fn area_2d(pts: &mut [[f64; 2]], rx: f64, ry: f64) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut best_y = ry;
    for (i, p) in pts.iter().enumerate() {
        best_y = best_y.min(p[1]);
        let x_next = pts.get(i + 1).map_or(rx, |q| q[0]);
        area += (x_next - p[0]) * (ry - best_y);
    }
    area
}

/// Two-sided Mann–Whitney U test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    pub p_value: f64,
}

/// Normal approximation with tie correction and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, EvaluationError> {
    if a.is_empty() || b.is_empty() {
        return Err(EvaluationError::EmptySample);
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let mut pooled: Vec<(f64, usize)> = a.iter().map(|&x| (x, 0)).chain(b.iter().map(|&x| (x, 1))).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += pooled[i..=j].iter().filter(|e| e.1 == 0).count() as f64 * avg_rank;
        i = j + 1;
    }
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return Ok(MannWhitney { u, p_value: 1.0 });
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = (2.0 * (1.0 - normal.cdf(z))).min(1.0);
    Ok(MannWhitney { u, p_value: p })
}

/// Vargha–Delaney effect size: `P(a > b) + 0.5 P(a = b)`.
pub fn vargha_delaney_a12(a: &[f64], b: &[f64]) -> Result<f64, EvaluationError> {
    if a.is_empty() || b.is_empty() {
        return Err(EvaluationError::EmptySample);
    }
    let mut score = 0.0;
    for x in a {
        for y in b {
            if x > y {
                score += 1.0;
            } else if x == y {
                score += 0.5;
            }
        }
    }
    Ok(score / (a.len() * b.len()) as f64)
}

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Gd,
    Sp,
    Hv,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Hv, Metric::Sp, Metric::Gd];

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::Hv)
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Gd => "GD",
            Metric::Sp => "SP",
            Metric::Hv => "HV",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunIndicators {
    pub algorithm: String,
    pub run: String,
    pub front_size: usize,
    pub gd: f64,
    pub sp: f64,
    pub hv: f64,
}

impl RunIndicators {
    pub fn value(&self, m: Metric) -> f64 {
        match m {
            Metric::Gd => self.gd,
            Metric::Sp => self.sp,
            Metric::Hv => self.hv,
        }
    }
}

/// One metric compared between two algorithms. `a12` is the probability that
/// a run of `algorithm_a` is better than a run of `algorithm_b`, in the
/// metric's own sense of better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: Metric,
    pub algorithm_a: String,
    pub algorithm_b: String,
    pub p_value: f64,
    pub a12: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub reference_front_size: usize,
    pub hv_reference: Point,
    pub alpha: f64,
    pub runs: Vec<RunIndicators>,
    pub comparisons: Vec<MetricComparison>,
    pub notices: Vec<String>,
}

/// Indicators for labelled runs against their common reference front, and
/// pairwise statistics between every two algorithm labels.
pub fn compare_runs(runs: &[(String, Front)], hv_ref: Point) -> Result<ComparisonReport, EvaluationError> {
    for (_, f) in runs {
        f.check_finite()?;
    }
    let fronts: Vec<Front> = runs.iter().map(|(_, f)| f.clone()).collect();
    let reference = reference_front(&fronts);
    let mut notices = Vec::new();

    let mut indicators = Vec::with_capacity(runs.len());
    for (label, f) in runs {
        let front = Front::non_dominated(&f.points, f.provenance.clone());
        if front.is_empty() {
            notices.push(format!("run {} of {label} has an empty front; skipped", f.provenance));
            continue;
        }
        indicators.push(RunIndicators {
            algorithm: label.clone(),
            run: f.provenance.clone(),
            front_size: front.len(),
            gd: gd(&front, &reference)?,
            sp: spread(&front, Some(&reference)),
            hv: hypervolume(&front, hv_ref),
        });
    }

    let mut labels: Vec<String> = Vec::new();
    for r in &indicators {
        if !labels.contains(&r.algorithm) {
            labels.push(r.algorithm.clone());
        }
    }

    let mut comparisons = Vec::new();
    if labels.len() < 2 && indicators.len() <= 1 {
        notices.push("fewer than two runs: statistics skipped".to_string());
    } else if labels.len() < 2 {
        notices.push("a single algorithm label: pairwise statistics skipped".to_string());
    }
    for (i, a) in labels.iter().enumerate() {
        for b in &labels[i + 1..] {
            for metric in Metric::ALL {
                let va: Vec<f64> = indicators.iter().filter(|r| &r.algorithm == a).map(|r| r.value(metric)).collect();
                let vb: Vec<f64> = indicators.iter().filter(|r| &r.algorithm == b).map(|r| r.value(metric)).collect();
                let mw = mann_whitney_u(&va, &vb)?;
                let a12 = if metric.higher_is_better() {
                    vargha_delaney_a12(&va, &vb)?
                } else {
                    vargha_delaney_a12(&vb, &va)?
                };
                comparisons.push(MetricComparison {
                    metric,
                    algorithm_a: a.clone(),
                    algorithm_b: b.clone(),
                    p_value: mw.p_value,
                    a12,
                    mean_a: mean(&va),
                    mean_b: mean(&vb),
                    significant: mw.p_value < SIGNIFICANCE,
                });
            }
        }
    }

    Ok(ComparisonReport {
        reference_front_size: reference.len(),
        hv_reference: hv_ref,
        alpha: SIGNIFICANCE,
        runs: indicators,
        comparisons,
        notices,
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

impl ComparisonReport {
    /// Comparison table as CSV: one row per metric and algorithm pair.
    pub fn comparisons_csv(&self) -> String {
        let mut out = String::from("metric,algorithm_a,algorithm_b,p_value,a12,mean_a,mean_b\n");
        for c in &self.comparisons {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.metric.name(),
                c.algorithm_a,
                c.algorithm_b,
                c.p_value,
                c.a12,
                c.mean_a,
                c.mean_b
            ));
        }
        out
    }

    pub fn runs_csv(&self) -> String {
        let mut out = String::from("algorithm,run,front_size,gd,sp,hv\n");
        for r in &self.runs {
            out.push_str(&format!("{},{},{},{},{},{}\n", r.algorithm, r.run, r.front_size, r.gd, r.sp, r.hv));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn front(points: &[Point]) -> Front {
        Front::new(points.to_vec(), "t")
    }

    #[test]
    fn reference_front_examples() {
        let a = front(&[[0.1, 0.5, 0.5], [0.5, 0.1, 0.5]]);
        assert_eq!(reference_front(std::slice::from_ref(&a)).points, Front::non_dominated(&a.points, "").points);
        let b = front(&[[0.6, 0.6, 0.6], [0.5, 0.5, 0.05]]);
        let r = reference_front(&[a.clone(), b.clone()]);
        assert!(!r.points.contains(&[0.6, 0.6, 0.6]));
        assert_eq!(r.len(), 3);
        assert_eq!(reference_front(&[b, a]).points, r.points);
    }

    #[test]
    fn gd_examples() {
        let r = front(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        assert_eq!(gd(&r, &r).unwrap(), 0.0);
        let g = gd(&front(&[[1.0, 1.0, 1.0]]), &front(&[[0.0, 0.0, 0.0]])).unwrap();
        assert!((g - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(gd(&front(&[]), &r), Err(EvaluationError::EmptyFront));
        let f = front(&[[0.5, 0.5, 0.5], [0.9, 0.1, 0.2]]);
        let before = gd(&f, &r).unwrap();
        let more = front(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.5, 0.4]]);
        assert!(gd(&f, &more).unwrap() <= before);
    }

    #[test]
    fn spread_uniform_line_is_zero() {
        let pts: Vec<Point> = (0..6).map(|i| [i as f64 * 0.2, 1.0 - i as f64 * 0.2, 0.5]).collect();
        let s = spread(&front(&pts), None);
        assert!(s.abs() < 1e-12, "{s}");
        assert_eq!(spread(&front(&[[0.1, 0.2, 0.3]]), None), 0.0);
    }

    #[test]
    fn spread_of_cluster_is_near_one() {
        let identical = front(&[[0.5, 0.5, 0.5]; 4]);
        assert_eq!(spread(&identical, None), 1.0);
        // Four points in a 0.01-wide cluster against a reference whose
        // extremes sit at the unit corners.
        let cluster = front(&[[0.5, 0.5, 0.5], [0.51, 0.5, 0.5], [0.5, 0.51, 0.5], [0.5, 0.5, 0.51]]);
        let reference = front(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        // hand evaluation: each extreme is sqrt(0.25*2 + 0.24^2)-ish from the
        // nearest cluster point; nearest-neighbour distances are all 0.01.
        let e = ((0.49f64).powi(2) + 0.25 + 0.25).sqrt();
        let expect = (3.0 * e + 0.0) / (3.0 * e + 4.0 * 0.01);
        let s = spread(&cluster, Some(&reference));
        assert!((s - expect).abs() < 1e-12, "{s} vs {expect}");
        assert!(s > 0.97);
    }

    #[test]
    fn hypervolume_examples() {
        assert!((hypervolume(&front(&[[0.5, 0.5, 0.5]]), [1.0; 3]) - 0.125).abs() < 1e-15);
        assert_eq!(hypervolume(&front(&[[0.0, 1.0, 1.0]]), [1.0; 3]), 0.0);
        let two = front(&[[0.2, 0.6, 0.5], [0.6, 0.2, 0.5]]);
        // two boxes of 0.8*0.4*0.5 overlapping in 0.4*0.4*0.5
        let expect = 2.0 * 0.8 * 0.4 * 0.5 - 0.4 * 0.4 * 0.5;
        assert!((hypervolume(&two, [1.0; 3]) - expect).abs() < 1e-12);
        let mut with_dominated = two.clone();
        with_dominated.points.push([0.7, 0.7, 0.7]);
        assert!((hypervolume(&with_dominated, [1.0; 3]) - expect).abs() < 1e-12);
        assert_eq!(hypervolume(&front(&[[1.5, 0.1, 0.1]]), [1.0; 3]), 0.0);
        assert_eq!(hypervolume(&front(&[]), [1.0; 3]), 0.0);
    }

    #[test]
    fn mann_whitney_examples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let same = mann_whitney_u(&a, &a).unwrap();
        assert!((same.p_value - 1.0).abs() < 1e-12);
        let sep = mann_whitney_u(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
        assert_eq!(sep.u, 0.0);
        assert!(sep.p_value < 0.1, "{}", sep.p_value);
        let swapped = mann_whitney_u(&[10.0, 11.0, 12.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(swapped.u, 9.0 - sep.u);
        assert!((swapped.p_value - sep.p_value).abs() < 1e-15);
        assert_eq!(mann_whitney_u(&[2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap().p_value, 1.0);
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
    }

    #[test]
    fn mann_whitney_matches_reference_implementation() {
        // scipy.stats.mannwhitneyu(x, y, method="asymptotic", use_continuity=True)
        let x = [0.8, 0.83, 0.83, 0.9, 1.1, 1.2];
        let y = [0.7, 0.75, 0.8, 0.82, 0.83];
        let mw = mann_whitney_u(&x, &y).unwrap();
        assert_eq!(mw.u, 26.5);
        assert!((mw.p_value - 0.04220081948488961).abs() < 1e-10, "{}", mw.p_value);
        let sep = mann_whitney_u(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
        assert!((sep.p_value - 0.08085559837005224).abs() < 1e-10, "{}", sep.p_value);
    }

    #[test]
    fn a12_examples() {
        let a = [0.1, 0.4, 0.4, 0.9];
        assert_eq!(vargha_delaney_a12(&a, &a).unwrap(), 0.5);
        assert_eq!(vargha_delaney_a12(&[5.0, 6.0], &[1.0, 2.0]).unwrap(), 1.0);
        let b = [0.3, 0.5, 0.0];
        let s = vargha_delaney_a12(&a, &b).unwrap() + vargha_delaney_a12(&b, &a).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compare_runs_orients_a12_towards_better() {
        let good = |i: usize| Front::new(vec![[0.1, 0.1, 0.1 + 0.001 * i as f64]], format!("g{i}"));
        let bad = |i: usize| Front::new(vec![[0.9, 0.9, 0.9 - 0.001 * i as f64]], format!("b{i}"));
        let mut runs = Vec::new();
        for i in 0..5 {
            runs.push(("good".to_string(), good(i)));
            runs.push(("bad".to_string(), bad(i)));
        }
        let report = compare_runs(&runs, HV_REFERENCE).unwrap();
        assert_eq!(report.runs.len(), 10);
        let hv = report.comparisons.iter().find(|c| c.metric == Metric::Hv).unwrap();
        let gdc = report.comparisons.iter().find(|c| c.metric == Metric::Gd).unwrap();
        assert_eq!((hv.a12, gdc.a12), (1.0, 1.0));
        assert!(hv.significant && gdc.significant);
        assert!(report.comparisons_csv().starts_with("metric,algorithm_a,algorithm_b,p_value,a12,mean_a,mean_b\n"));
    }

    #[test]
    fn compare_single_run_skips_statistics() {
        let runs = vec![("x".to_string(), Front::new(vec![[0.2, 0.3, 0.4]], "r0"))];
        let report = compare_runs(&runs, HV_REFERENCE).unwrap();
        assert_eq!(report.runs.len(), 1);
        assert!(report.comparisons.is_empty());
        assert_eq!(report.notices.len(), 1);
    }

    #[test]
    fn compare_identical_algorithms_gives_half() {
        let f = |i: usize| Front::new(vec![[0.1 * i as f64, 0.5, 0.5]], format!("r{i}"));
        let mut runs = Vec::new();
        for i in 0..4 {
            runs.push(("a".to_string(), f(i)));
            runs.push(("a-again".to_string(), f(i)));
        }
        let report = compare_runs(&runs, HV_REFERENCE).unwrap();
        assert!(report.comparisons.iter().all(|c| c.a12 == 0.5));
    }

    fn arb_front() -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b, c)| [a, b, c]), 1..15)
    }

    proptest! {
        #[test]
        fn indicators_are_permutation_invariant(mut pts in arb_front(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let f1 = Front::new(pts.clone(), "a");
            pts.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let f2 = Front::new(pts, "b");
            prop_assert!((hypervolume(&f1, [1.0; 3]) - hypervolume(&f2, [1.0; 3])).abs() < 1e-12);
            prop_assert!((spread(&f1, None) - spread(&f2, None)).abs() < 1e-12);
            let r = reference_front(std::slice::from_ref(&f1));
            prop_assert!((gd(&f1, &r).unwrap() - gd(&f2, &r).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn hypervolume_is_monotone(pts in arb_front(), extra in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)) {
            let f = Front::new(pts.clone(), "a");
            let mut g = pts;
            g.push([extra.0, extra.1, extra.2]);
            let g = Front::new(g, "b");
            prop_assert!(hypervolume(&g, [1.0; 3]) >= hypervolume(&f, [1.0; 3]) - 1e-12);
        }

        #[test]
        fn gd_of_reference_against_itself_is_zero(pts in arb_front()) {
            let r = reference_front(&[Front::new(pts, "a")]);
            prop_assert_eq!(gd(&r, &r).unwrap(), 0.0);
        }
    }
}
