//! Slot scheduling: derive antenna allotments from a procedure schedule.
//!
//! One slot is generated per procedure (start floored to the alignment grid,
//! length rounded up to the slot quantum), overlapping or touching slots are
//! merged, and any 24-hour window holding more than six hours of slots is
//! replaced by a single day-long slot.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Duration, Instant, ProcedureSchedule, Slot, SlotSchedule, TestProcedure};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlottingError {
    #[error("invalid slotting policy: {0}")]
    InvalidPolicy(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlottingPolicy {
    pub align_minutes: u64,
    pub slot_quantum_minutes: u64,
    pub consolidation_threshold_minutes: u64,
    pub consolidation_window_minutes: u64,
    /// Reserve the configuration time ahead of each procedure.
    pub cover_config_time: bool,
}

impl Default for SlottingPolicy {
    fn default() -> Self {
        SlottingPolicy {
            align_minutes: 15,
            slot_quantum_minutes: 60,
            consolidation_threshold_minutes: 360,
            consolidation_window_minutes: 1440,
            cover_config_time: true,
        }
    }
}

impl SlottingPolicy {
    pub fn validate(&self) -> Result<(), SlottingError> {
        if self.align_minutes == 0 || self.slot_quantum_minutes == 0 {
            return Err(SlottingError::InvalidPolicy("align and quantum must be positive"));
        }
        if !self.slot_quantum_minutes.is_multiple_of(self.align_minutes) {
            return Err(SlottingError::InvalidPolicy("align_minutes must divide slot_quantum_minutes"));
        }
        if self.consolidation_threshold_minutes >= self.consolidation_window_minutes {
            return Err(SlottingError::InvalidPolicy("consolidation threshold must be below the window"));
        }
        Ok(())
    }

    fn align(&self) -> Duration {
        Duration::from_minutes(self.align_minutes)
    }

    fn quantum(&self) -> u64 {
        self.slot_quantum_minutes * 60
    }

    fn window(&self) -> Duration {
        Duration::from_minutes(self.consolidation_window_minutes)
    }

    fn threshold(&self) -> u64 {
        self.consolidation_threshold_minutes * 60
    }

    /// The interval a procedure needs reserved under this policy.
    pub fn cover(&self, p: &TestProcedure) -> (Instant, Instant) {
        if self.cover_config_time {
            (p.t_start - p.config_time, p.t_end)
        } else {
            (p.t_start, p.t_end)
        }
    }

    /// `[start, start + k * quantum]` for the smallest `k >= 1` reaching `end`.
    fn quantized(&self, start: Instant, end: Instant) -> Slot {
        let q = self.quantum() as i64;
        let need = (end.epoch_seconds() - start.epoch_seconds()).max(1);
        let k = (need + q - 1) / q;
        Slot { t_start: start, t_end: Instant::from_epoch_seconds(start.epoch_seconds() + k * q) }
    }
}

pub fn generate_slot(p: &TestProcedure, policy: &SlottingPolicy) -> Slot {
    let (start, end) = policy.cover(p);
    policy.quantized(start.floor_to(policy.align()), end)
}

/// Merges overlapping or touching slots. A merged slot is stretched to a whole
/// number of quanta from its start, which may in turn reach the next slot.
pub fn combine_overlapping(slots: &[Slot], policy: &SlottingPolicy) -> Vec<Slot> {
    let mut sorted = slots.to_vec();
    sorted.sort();
    let mut out: Vec<Slot> = Vec::with_capacity(sorted.len());
    for s in sorted {
        match out.last_mut() {
            Some(last) if s.t_start <= last.t_end => {
                if s.t_end > last.t_end {
                    *last = policy.quantized(last.t_start, s.t_end);
                }
            }
            _ => out.push(s),
        }
    }
    out
}

/// Replaces every run of slots holding more than the threshold within one
/// consolidation window, anchored at the run's first slot, by a single slot
/// spanning the window. Repeats until nothing changes.
pub fn consolidate(slots: &[Slot], policy: &SlottingPolicy) -> Vec<Slot> {
    let mut current = combine_overlapping(slots, policy);
    loop {
        let next = consolidate_pass(&current, policy);
        if next == current {
            return next;
        }
        current = next;
    }
}

fn consolidate_pass(slots: &[Slot], policy: &SlottingPolicy) -> Vec<Slot> {
    let window = policy.window();
    let threshold = policy.threshold();
    let mut out: Vec<Slot> = Vec::with_capacity(slots.len());
    let mut i = 0;
    while i < slots.len() {
        let anchor = slots[i].t_start;
        let window_end = anchor + window;
        let mut used = 0u64;
        let mut j = i;
        let mut reach = window_end;
        while j < slots.len() && slots[j].t_start < window_end {
            let hi = slots[j].t_end.min(window_end);
            used += (hi.epoch_seconds() - slots[j].t_start.epoch_seconds()) as u64;
            reach = reach.max(slots[j].t_end);
            j += 1;
        }
        if used > threshold {
            out.push(policy.quantized(anchor, reach));
            i = j;
        } else {
            out.push(slots[i]);
            i += 1;
        }
    }
    combine_overlapping(&out, policy)
}

/// Slot schedule for a procedure schedule: generate, merge, consolidate.
pub fn slot_schedule(s: &ProcedureSchedule, policy: &SlottingPolicy) -> SlotSchedule {
    slot_schedule_for(s.procedures().iter(), policy)
}

pub fn slot_schedule_for<'a>(procs: impl IntoIterator<Item = &'a TestProcedure>, policy: &SlottingPolicy) -> SlotSchedule {
    let initial: Vec<Slot> = procs.into_iter().map(|p| generate_slot(p, policy)).collect();
    if initial.is_empty() {
        return SlotSchedule::default();
    }
    SlotSchedule { slots: consolidate(&initial, policy) }
}

/// Index of the slot containing each procedure's cover interval.
pub fn assign_procedures(s: &[TestProcedure], q: &SlotSchedule, policy: &SlottingPolicy) -> Vec<Option<usize>> {
    s.iter()
        .map(|p| {
            let (a, b) = policy.cover(p);
            q.slots.iter().position(|slot| slot.contains(a, b))
        })
        .collect()
}
