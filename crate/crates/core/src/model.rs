//! Domain model: time arithmetic, satellite passes, test procedures and
//! the two schedule kinds (procedure schedule and slot schedule).

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Sub};
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid interval: {end} is before {start}")]
    InvalidInterval { start: Instant, end: Instant },
    #[error("invalid order: procedure {later} ends before procedure {earlier} starts")]
    InvalidOrder { earlier: ProcedureId, later: ProcedureId },
    #[error("empty procedure schedule")]
    EmptySchedule,
    #[error("invalid pass for satellite {satellite}: violates {rule}")]
    InvalidPass { satellite: SatelliteId, rule: &'static str },
    #[error("invalid procedure {id}: violates {rule}")]
    InvalidProcedure { id: ProcedureId, rule: &'static str },
    #[error("duplicate procedure id {0}")]
    DuplicateProcedure(ProcedureId),
    #[error("procedures {0} and {1} cover the same requirement ({2} on {3})")]
    DuplicateRequirement(ProcedureId, ProcedureId, ProcedureType, SatelliteId),
    #[error("invalid slot: start {start} is not before end {end}")]
    InvalidSlot { start: Instant, end: Instant },
    #[error("cannot parse timestamp {0:?}")]
    BadTimestamp(String),
}

/// A point in time, as whole UTC seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Instant(i64);

impl Instant {
    pub const fn from_epoch_seconds(secs: i64) -> Self {
        Instant(secs)
    }

    pub const fn epoch_seconds(self) -> i64 {
        self.0
    }

    /// Parses an RFC 3339 / ISO-8601 timestamp. Sub-second parts are truncated.
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        let s = s.trim();
        DateTime::parse_from_rfc3339(s)
            .map(|dt| Instant(dt.with_timezone(&Utc).timestamp()))
            .or_else(|_| {
                chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
                    .map(|n| Instant(n.and_utc().timestamp()))
            })
            .map_err(|_| ModelError::BadTimestamp(s.to_string()))
    }

    pub fn to_iso(self) -> String {
        match DateTime::<Utc>::from_timestamp(self.0, 0) {
            Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Secs, true),
            None => format!("@{}", self.0),
        }
    }

    /// Largest instant `<= self` that is a whole multiple of `step` since the epoch.
    pub fn floor_to(self, step: Duration) -> Instant {
        let step = step.as_secs() as i64;
        if step == 0 {
            return self;
        }
        Instant(self.0 - self.0.rem_euclid(step))
    }

    pub fn saturating_sub(self, d: Duration) -> Instant {
        Instant(self.0.saturating_sub(d.as_secs() as i64))
    }
}

impl fmt::Display for Instant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso())
    }
}

impl Add<Duration> for Instant {
    type Output = Instant;
    fn add(self, rhs: Duration) -> Instant {
        Instant(self.0 + rhs.0 as i64)
    }
}

impl Sub<Duration> for Instant {
    type Output = Instant;
    fn sub(self, rhs: Duration) -> Instant {
        Instant(self.0 - rhs.0 as i64)
    }
}

impl Serialize for Instant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_iso())
    }
}

impl<'de> Deserialize<'de> for Instant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Instant::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// A non-negative span of whole seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Duration(u64);

impl Duration {
    pub const ZERO: Duration = Duration(0);

    pub const fn from_secs(secs: u64) -> Self {
        Duration(secs)
    }

    pub const fn from_minutes(min: u64) -> Self {
        Duration(min * 60)
    }

    pub const fn from_hours(h: u64) -> Self {
        Duration(h * 3600)
    }

    pub const fn as_secs(self) -> u64 {
        self.0
    }

    pub fn as_minutes_f64(self) -> f64 {
        self.0 as f64 / 60.0
    }

    pub fn as_hours_f64(self) -> f64 {
        self.0 as f64 / 3600.0
    }
}

impl Add for Duration {
    type Output = Duration;
    fn add(self, rhs: Duration) -> Duration {
        Duration(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Duration {
    fn sum<I: Iterator<Item = Duration>>(iter: I) -> Duration {
        Duration(iter.map(|d| d.0).sum())
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.0)
    }
}

/// Elapsed time from `a` to `b`.
pub fn delta_time(a: Instant, b: Instant) -> Result<Duration, ModelError> {
    if b < a {
        return Err(ModelError::InvalidInterval { start: a, end: b });
    }
    Ok(Duration((b.0 - a.0) as u64))
}

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

string_id!(SatelliteId);
string_id!(SiteId);

/// Index of a procedure inside its candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProcedureId(pub usize);

impl fmt::Display for ProcedureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One visibility window of a satellite over a ground site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatellitePass {
    pub satellite_id: SatelliteId,
    pub site_id: SiteId,
    pub t_start: Instant,
    pub t_max: Instant,
    pub t_end: Instant,
    /// Elevation at rise, culmination and set, in degrees.
    pub theta_start: f64,
    pub theta_max: f64,
    pub theta_end: f64,
    /// Azimuth at rise, culmination and set, in degrees.
    pub phi_start: f64,
    pub phi_max: f64,
    pub phi_end: f64,
}

impl SatellitePass {
    /// Checks the pass invariants, naming the first one violated.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |rule| {
            Err(ModelError::InvalidPass {
                satellite: self.satellite_id.clone(),
                rule,
            })
        };
        if self.t_start >= self.t_max {
            return fail("t_start < t_max");
        }
        if self.t_max >= self.t_end {
            return fail("t_max < t_end");
        }
        let elevations = [self.theta_start, self.theta_max, self.theta_end];
        if elevations.iter().any(|e| !(0.0..=90.0).contains(e)) {
            return fail("0 <= elevation <= 90");
        }
        if self.theta_max < self.theta_start || self.theta_max < self.theta_end {
            return fail("theta_max >= edge elevations");
        }
        let azimuths = [self.phi_start, self.phi_max, self.phi_end];
        if azimuths.iter().any(|a| !(0.0..360.0).contains(a)) {
            return fail("0 <= azimuth < 360");
        }
        Ok(())
    }

    pub fn duration(&self) -> Duration {
        Duration((self.t_end.0 - self.t_start.0) as u64)
    }
}

/// All passes over one site within a time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassCatalog {
    pub site_id: SiteId,
    pub window: (Instant, Instant),
    pub passes: Vec<SatellitePass>,
}

impl PassCatalog {
    pub fn passes_of<'a>(&'a self, sat: &'a SatelliteId) -> impl Iterator<Item = &'a SatellitePass> + 'a {
        self.passes.iter().filter(move |p| &p.satellite_id == sat)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for p in &self.passes {
            p.validate()?;
            if p.site_id != self.site_id {
                return Err(ModelError::InvalidPass {
                    satellite: p.satellite_id.clone(),
                    rule: "pass site matches catalog site",
                });
            }
            if p.t_start < self.window.0 || p.t_end > self.window.1 {
                return Err(ModelError::InvalidPass {
                    satellite: p.satellite_id.clone(),
                    rule: "pass lies within catalog window",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProcedureType {
    #[serde(rename = "SQM")]
    Sqm,
    #[serde(rename = "RIOT")]
    Riot,
}

impl fmt::Display for ProcedureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcedureType::Sqm => "SQM",
            ProcedureType::Riot => "RIOT",
        })
    }
}

/// A typed test bound to one satellite pass.
#[derive(Debug, Clone, PartialEq)]
pub struct TestProcedure {
    pub id: ProcedureId,
    pub proc_type: ProcedureType,
    pub t_start: Instant,
    pub t_end: Instant,
    /// Antenna configuration time needed before the procedure starts.
    pub config_time: Duration,
    pub pass: Arc<SatellitePass>,
}

impl TestProcedure {
    pub fn new(
        id: ProcedureId,
        proc_type: ProcedureType,
        t_start: Instant,
        t_end: Instant,
        config_time: Duration,
        pass: Arc<SatellitePass>,
    ) -> Result<Self, ModelError> {
        if t_start >= t_end {
            return Err(ModelError::InvalidProcedure { id, rule: "t_start < t_end" });
        }
        if t_start < pass.t_start || t_end > pass.t_end {
            return Err(ModelError::InvalidProcedure { id, rule: "procedure lies within its pass" });
        }
        Ok(TestProcedure { id, proc_type, t_start, t_end, config_time, pass })
    }

    pub fn satellite_id(&self) -> &SatelliteId {
        &self.pass.satellite_id
    }

    pub fn duration(&self) -> Duration {
        Duration((self.t_end.0 - self.t_start.0) as u64)
    }
}

/// Elapsed time from the start of `ti` to the end of `tj`.
pub fn span_pair(ti: &TestProcedure, tj: &TestProcedure) -> Result<Duration, ModelError> {
    delta_time(ti.t_start, tj.t_end).map_err(|_| ModelError::InvalidOrder {
        earlier: ti.id,
        later: tj.id,
    })
}

/// Span of a set of procedures: first start to last end.
pub fn span_of<'a>(procs: impl IntoIterator<Item = &'a TestProcedure>) -> Result<Duration, ModelError> {
    let mut bounds: Option<(Instant, Instant)> = None;
    for p in procs {
        bounds = Some(match bounds {
            None => (p.t_start, p.t_end),
            Some((lo, hi)) => (lo.min(p.t_start), hi.max(p.t_end)),
        });
    }
    let (lo, hi) = bounds.ok_or(ModelError::EmptySchedule)?;
    delta_time(lo, hi)
}

/// A selection of test procedures, at most one per (type, satellite).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProcedureSchedule {
    procedures: Vec<TestProcedure>,
}

impl ProcedureSchedule {
    pub fn new(procedures: Vec<TestProcedure>) -> Result<Self, ModelError> {
        let mut ids = HashSet::with_capacity(procedures.len());
        let mut reqs = std::collections::HashMap::with_capacity(procedures.len());
        for p in &procedures {
            if !ids.insert(p.id) {
                return Err(ModelError::DuplicateProcedure(p.id));
            }
            if let Some(prev) = reqs.insert((p.proc_type, p.satellite_id().clone()), p.id) {
                return Err(ModelError::DuplicateRequirement(
                    prev,
                    p.id,
                    p.proc_type,
                    p.satellite_id().clone(),
                ));
            }
        }
        Ok(ProcedureSchedule { procedures })
    }

    pub fn procedures(&self) -> &[TestProcedure] {
        &self.procedures
    }

    pub fn len(&self) -> usize {
        self.procedures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.procedures.is_empty()
    }

    pub fn span(&self) -> Result<Duration, ModelError> {
        span_schedule(self)
    }
}

pub fn span_schedule(s: &ProcedureSchedule) -> Result<Duration, ModelError> {
    span_of(s.procedures())
}

/// A contiguous antenna allotment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub t_start: Instant,
    pub t_end: Instant,
}

impl Slot {
    pub fn new(t_start: Instant, t_end: Instant) -> Result<Self, ModelError> {
        if t_start >= t_end {
            return Err(ModelError::InvalidSlot { start: t_start, end: t_end });
        }
        Ok(Slot { t_start, t_end })
    }

    pub fn span(&self) -> Duration {
        Duration((self.t_end.0 - self.t_start.0) as u64)
    }

    pub fn contains(&self, start: Instant, end: Instant) -> bool {
        self.t_start <= start && end <= self.t_end
    }
}

/// Chronologically sorted, non-overlapping slots.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlotSchedule {
    pub slots: Vec<Slot>,
}

impl SlotSchedule {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// A procedure schedule together with the slots reserved for it.
#[derive(Debug, Clone, PartialEq)]
pub struct IotSchedule {
    pub procedures: ProcedureSchedule,
    pub slots: SlotSchedule,
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub const H: i64 = 3600;
    pub const M: i64 = 60;

    /// 2024-10-01T00:00:00Z
    pub const DAY0: i64 = 1_727_740_800;

    pub fn at(h: i64, m: i64) -> Instant {
        Instant::from_epoch_seconds(DAY0 + h * H + m * M)
    }

    pub fn pass(sat: &str, start: Instant, end: Instant) -> Arc<SatellitePass> {
        let mid = Instant::from_epoch_seconds((start.epoch_seconds() + end.epoch_seconds()) / 2);
        Arc::new(SatellitePass {
            satellite_id: sat.into(),
            site_id: "site".into(),
            t_start: start,
            t_max: mid,
            t_end: end,
            theta_start: 2.0,
            theta_max: 60.0,
            theta_end: 3.0,
            phi_start: 10.0,
            phi_max: 100.0,
            phi_end: 200.0,
        })
    }

    pub fn procedure(id: usize, sat: &str, ty: ProcedureType, start: Instant, end: Instant, cfg_min: u64) -> TestProcedure {
        TestProcedure::new(
            ProcedureId(id),
            ty,
            start,
            end,
            Duration::from_minutes(cfg_min),
            pass(sat, start, end),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delta_time_examples() {
        let t = at(10, 0);
        assert_eq!(delta_time(t, t).unwrap(), Duration::ZERO);
        assert_eq!(delta_time(at(10, 0), at(10, 45)).unwrap().as_secs(), 2700);
        assert_eq!(delta_time(at(0, 0), at(24, 0)).unwrap().as_secs(), 86_400);
        assert!(matches!(
            delta_time(at(11, 0), at(10, 0)),
            Err(ModelError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn span_pair_examples() {
        let a = procedure(0, "a", ProcedureType::Sqm, at(10, 0), at(11, 0), 0);
        let b = procedure(1, "b", ProcedureType::Sqm, at(12, 0), at(13, 0), 0);
        let c = procedure(2, "c", ProcedureType::Sqm, at(10, 30), at(10, 45), 0);
        assert_eq!(span_pair(&a, &b).unwrap(), Duration::from_hours(3));
        assert_eq!(span_pair(&a, &a).unwrap(), Duration::from_hours(1));
        assert_eq!(span_pair(&a, &c).unwrap(), Duration::from_minutes(45));
        assert!(matches!(span_pair(&b, &a), Err(ModelError::InvalidOrder { .. })));
    }

    #[test]
    fn span_schedule_examples() {
        let one = ProcedureSchedule::new(vec![procedure(0, "a", ProcedureType::Sqm, at(10, 0), at(11, 0), 0)]).unwrap();
        assert_eq!(span_schedule(&one).unwrap(), Duration::from_hours(1));

        let mut procs = vec![
            procedure(0, "a", ProcedureType::Sqm, at(10, 0), at(13, 0), 0),
            procedure(1, "b", ProcedureType::Sqm, at(14, 0), at(18, 0), 0),
            procedure(2, "c", ProcedureType::Sqm, at(19, 0), at(21, 0), 0),
        ];
        let s = ProcedureSchedule::new(procs.clone()).unwrap();
        assert_eq!(span_schedule(&s).unwrap(), Duration::from_hours(11));
        procs.reverse();
        let r = ProcedureSchedule::new(procs).unwrap();
        assert_eq!(span_schedule(&r).unwrap(), Duration::from_hours(11));

        assert_eq!(span_schedule(&ProcedureSchedule::default()), Err(ModelError::EmptySchedule));
    }

    #[test]
    fn schedule_rejects_duplicate_requirement() {
        let a = procedure(0, "a", ProcedureType::Sqm, at(10, 0), at(11, 0), 0);
        let b = procedure(1, "a", ProcedureType::Sqm, at(12, 0), at(13, 0), 0);
        assert!(matches!(
            ProcedureSchedule::new(vec![a.clone(), b]),
            Err(ModelError::DuplicateRequirement(..))
        ));
        assert!(matches!(
            ProcedureSchedule::new(vec![a.clone(), a]),
            Err(ModelError::DuplicateProcedure(_))
        ));
    }

    #[test]
    fn procedure_must_lie_in_pass() {
        let p = pass("a", at(10, 0), at(11, 0));
        let r = TestProcedure::new(ProcedureId(0), ProcedureType::Sqm, at(10, 30), at(11, 30), Duration::ZERO, p);
        assert!(matches!(r, Err(ModelError::InvalidProcedure { .. })));
    }

    #[test]
    fn iso_round_trip() {
        let t = Instant::parse("2024-10-01T10:37:30Z").unwrap();
        assert_eq!(t, Instant::from_epoch_seconds(DAY0 + 10 * H + 37 * M + 30));
        assert_eq!(t.to_iso(), "2024-10-01T10:37:30Z");
        assert_eq!(Instant::parse("2024-10-01T10:37:30").unwrap(), t);
        assert!(Instant::parse("yesterday").is_err());
    }

    #[test]
    fn floor_to_quarter_hour() {
        assert_eq!(at(10, 7).floor_to(Duration::from_minutes(15)), at(10, 0));
        assert_eq!(at(10, 15).floor_to(Duration::from_minutes(15)), at(10, 15));
    }

    proptest! {
        #[test]
        fn delta_time_is_additive(a in -1_000_000i64..1_000_000, x in 0i64..100_000, y in 0i64..100_000) {
            let ta = Instant::from_epoch_seconds(a);
            let tb = Instant::from_epoch_seconds(a + x);
            let tc = Instant::from_epoch_seconds(a + x + y);
            let sum = delta_time(ta, tb).unwrap() + delta_time(tb, tc).unwrap();
            prop_assert_eq!(sum, delta_time(ta, tc).unwrap());
        }

        #[test]
        fn span_is_permutation_invariant_and_bounded(
            raw in prop::collection::vec((0i64..200, 1i64..20), 1..12),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let procs: Vec<_> = raw
                .iter()
                .enumerate()
                .map(|(i, &(s, d))| {
                    let sat = format!("s{i}");
                    procedure(i, &sat, ProcedureType::Sqm, at(0, s * 5), at(0, s * 5 + d * 5), 0)
                })
                .collect();
            let mut shuffled = procs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = span_schedule(&ProcedureSchedule::new(procs.clone()).unwrap()).unwrap();
            let b = span_schedule(&ProcedureSchedule::new(shuffled).unwrap()).unwrap();
            prop_assert_eq!(a, b);
            let longest = procs.iter().map(|p| p.duration()).max().unwrap();
            prop_assert!(a >= longest);
        }
    }
}
