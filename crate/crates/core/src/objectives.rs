//! Fitness functions, the slot cost model and the penalty applied to
//! infeasible schedules.
//!
//! All three objectives are minimized internally as
//! `(1 - usage, 1 - fragmentation, normalized cost)`. An infeasible schedule
//! gets, per objective, the worst feasible value of its population plus its
//! violation count, so any feasible schedule dominates any infeasible one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conflicts::{violation_count, ConflictError, ConflictGraph};
use crate::model::{span_of, Duration, ModelError, ProcedureSchedule, SlotSchedule, TestProcedure};
use crate::scenario::CandidateSet;
use crate::slotting::{generate_slot, slot_schedule_for, SlottingPolicy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("fitness of an empty schedule is undefined")]
    EmptySchedule,
    #[error("invalid cost model: {0}")]
    InvalidCostModel(String),
    #[error(transparent)]
    Conflict(#[from] ConflictError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Cost of slot allotments: hourly up to a day, flat beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub rate_per_hour: f64,
    pub day_cap_cost: f64,
    pub day_threshold_minutes: u64,
    /// Best-case and worst-case campaign cost used for normalization. Derived
    /// from the candidate set when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_max: Option<f64>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            rate_per_hour: 456.0,
            day_cap_cost: 3561.0,
            day_threshold_minutes: 1440,
            cost_min: None,
            cost_max: None,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), ObjectiveError> {
        if !(self.rate_per_hour > 0.0 && self.day_cap_cost > 0.0) {
            return Err(ObjectiveError::InvalidCostModel("rate and cap must be positive".into()));
        }
        if let (Some(lo), Some(hi)) = (self.cost_min, self.cost_max) {
            if !(lo < hi) {
                return Err(ObjectiveError::InvalidCostModel(format!("cost_min {lo} must be below cost_max {hi}")));
            }
        }
        Ok(())
    }

    pub fn slot_cost(&self, span: Duration) -> f64 {
        if span.as_secs() < self.day_threshold_minutes * 60 {
            span.as_minutes_f64() / 60.0 * self.rate_per_hour
        } else {
            self.day_cap_cost
        }
    }

    /// Fills in absent normalization bounds from the candidate set.
    ///
    /// The lower bound is one contiguous block holding the shortest candidate
    /// of every requirement, rounded up to whole quanta and capped at a day.
    /// The upper bound gives the longest-slot candidate of every requirement
    /// its own unconsolidated slot.
    pub fn resolved(&self, cands: &CandidateSet, policy: &SlottingPolicy) -> CostModel {
        let mut out = *self;
        let quantum = policy.slot_quantum_minutes * 60;
        let lo = || {
            let total: u64 = cands
                .by_requirement
                .iter()
                .filter_map(|(_, idx)| {
                    idx.iter()
                        .map(|&i| {
                            let (a, b) = policy.cover(&cands.candidates[i]);
                            (b.epoch_seconds() - a.epoch_seconds()) as u64
                        })
                        .min()
                })
                .sum();
            let rounded = total.div_ceil(quantum) * quantum;
            self.slot_cost(Duration::from_secs(rounded)).min(self.day_cap_cost)
        };
        let hi = || -> f64 {
            cands
                .by_requirement
                .iter()
                .filter_map(|(_, idx)| {
                    idx.iter()
                        .map(|&i| self.slot_cost(generate_slot(&cands.candidates[i], policy).span()))
                        .max_by(f64::total_cmp)
                })
                .sum()
        };
        let min = self.cost_min.unwrap_or_else(lo);
        let mut max = self.cost_max.unwrap_or_else(hi);
        if self.cost_max.is_none() && max <= min {
            max = min + self.rate_per_hour;
        }
        out.cost_min = Some(min);
        out.cost_max = Some(max);
        out
    }
}

/// Raw objective values of a feasible schedule, in their natural orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawFitness {
    /// Antenna usage efficiency, higher is better.
    #[serde(rename = "use")]
    pub usage: f64,
    /// One minus relative fragmentation, higher is better.
    pub frag: f64,
    /// Normalized cost, lower is better.
    pub cost: f64,
    /// Cost of the slot schedule before normalization.
    pub cost_value: f64,
    pub slots: usize,
    pub span_seconds: u64,
}

impl RawFitness {
    /// Objectives with cost flipped, so that every value is higher-is-better.
    pub fn scores(&self) -> [f64; 3] {
        [self.usage, self.frag, 1.0 - self.cost]
    }

    pub fn minimized(&self) -> [f64; 3] {
        [1.0 - self.usage, 1.0 - self.frag, self.cost]
    }
}

/// Outcome of evaluating a schedule before population-level penalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assessment {
    pub violations: usize,
    pub raw: Option<RawFitness>,
}

impl Assessment {
    pub fn is_feasible(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    pub raw: Option<RawFitness>,
    pub violations: usize,
    /// Values handed to the optimizer.
    pub minimized: [f64; 3],
}

impl FitnessVector {
    pub fn is_feasible(&self) -> bool {
        self.violations == 0
    }
}

/// `((|S| - 1) * delta_c + total duration) / span(S)`.
pub fn fit_use(s: &ProcedureSchedule, delta_c: Duration) -> Result<f64, ObjectiveError> {
    fit_use_of(s.procedures(), delta_c)
}

pub fn fit_use_of(procs: &[TestProcedure], delta_c: Duration) -> Result<f64, ObjectiveError> {
    if procs.is_empty() {
        return Err(ObjectiveError::EmptySchedule);
    }
    let span = span_of(procs)?;
    let busy: u64 = procs.iter().map(|p| p.duration().as_secs()).sum();
    let overhead = (procs.len() as u64 - 1) * delta_c.as_secs();
    Ok((overhead + busy) as f64 / span.as_secs() as f64)
}

/// `1 - (|Q| - 1) / (|S| - 1)`, or 1 for a single procedure.
pub fn fit_frag(s: &ProcedureSchedule, q: &SlotSchedule) -> f64 {
    fit_frag_counts(s.len(), q.len())
}

pub fn fit_frag_counts(procedures: usize, slots: usize) -> f64 {
    if procedures <= 1 {
        return 1.0;
    }
    1.0 - (slots.saturating_sub(1)) as f64 / (procedures - 1) as f64
}

pub fn cost_of(q: &SlotSchedule, m: &CostModel) -> f64 {
    q.slots.iter().map(|s| m.slot_cost(s.span())).sum()
}

/// Cost normalized into `[0, 1]` by the model's bounds, clamped.
pub fn fit_cost(q: &SlotSchedule, m: &CostModel) -> Result<f64, ObjectiveError> {
    normalize_cost(cost_of(q, m), m)
}

pub fn normalize_cost(cost: f64, m: &CostModel) -> Result<f64, ObjectiveError> {
    let (lo, hi) = match (m.cost_min, m.cost_max) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(ObjectiveError::InvalidCostModel("cost bounds are unresolved".into())),
    };
    if !(hi > lo) {
        return Err(ObjectiveError::InvalidCostModel(format!("cost_max {hi} must exceed cost_min {lo}")));
    }
    Ok(((cost - lo) / (hi - lo)).clamp(0.0, 1.0))
}

/// Everything needed to score a schedule.
#[derive(Debug, Clone, Copy)]
pub struct Objectives<'a> {
    pub graph: &'a ConflictGraph,
    pub policy: &'a SlottingPolicy,
    pub cost: &'a CostModel,
    pub delta_c: Duration,
}

impl Objectives<'_> {
    pub fn assess(&self, s: &ProcedureSchedule) -> Result<Assessment, ObjectiveError> {
        let violations = violation_count(s, self.graph)?;
        if violations > 0 {
            return Ok(Assessment { violations, raw: None });
        }
        Ok(Assessment { violations, raw: Some(self.raw_fitness(s.procedures())?) })
    }

    /// Objectives of a set of procedures, regardless of conflicts.
    pub fn raw_fitness(&self, procs: &[TestProcedure]) -> Result<RawFitness, ObjectiveError> {
        let usage = fit_use_of(procs, self.delta_c)?;
        let q = slot_schedule_for(procs.iter(), self.policy);
        let cost_value = cost_of(&q, self.cost);
        Ok(RawFitness {
            usage,
            frag: fit_frag_counts(procs.len(), q.len()),
            cost: normalize_cost(cost_value, self.cost)?,
            cost_value,
            slots: q.len(),
            span_seconds: span_of(procs)?.as_secs(),
        })
    }

    pub fn evaluate(&self, s: &ProcedureSchedule, pop_feasible_max: [f64; 3]) -> Result<FitnessVector, ObjectiveError> {
        Ok(penalize(&self.assess(s)?, pop_feasible_max))
    }
}

/// Applies the penalty rule to one assessment.
pub fn penalize(a: &Assessment, feasible_max: [f64; 3]) -> FitnessVector {
    let minimized = match (&a.raw, a.violations) {
        (Some(raw), 0) => raw.minimized(),
        _ => {
            let g = a.violations as f64;
            [feasible_max[0] + g, feasible_max[1] + g, feasible_max[2] + g]
        }
    };
    FitnessVector { raw: a.raw.filter(|_| a.violations == 0), violations: a.violations, minimized }
}

/// Worst minimized value per objective over the feasible members, or ones.
pub fn feasible_max<'a>(assessments: impl IntoIterator<Item = &'a Assessment>) -> [f64; 3] {
    let mut max: Option<[f64; 3]> = None;
    for a in assessments {
        if let (0, Some(raw)) = (a.violations, &a.raw) {
            let m = raw.minimized();
            max = Some(match max {
                None => m,
                Some(cur) => [cur[0].max(m[0]), cur[1].max(m[1]), cur[2].max(m[2])],
            });
        }
    }
    max.unwrap_or([1.0; 3])
}

pub fn penalize_population(assessments: &[Assessment]) -> Vec<FitnessVector> {
    let fmax = feasible_max(assessments);
    assessments.iter().map(|a| penalize(a, fmax)).collect()
}

/// `a` Pareto-dominates `b` (minimization).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}
