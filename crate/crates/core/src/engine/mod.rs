//! Event-loop simulator. Time only advances to releases, completions and
//! block ends; the policy is consulted whenever the channel is free.
//!
//! Order of events at a block start `t`: the running packet completes if it
//! ends exactly at `t` and is lost otherwise, releases at `t` become pending,
//! the fault source picks the next fault, then the policy decides.

use std::sync::Arc;

use crate::model::{validate_instance, FaultSequence, Instance, PacketBatch, Recording, SizeCatalog, Trace, TransmissionRecord, PhaseStart};
use crate::numeric::GoldenNumber;
use crate::policies::{Decision, DecisionContext, Policy};
use crate::{Error, Result};

/// The adversary's move at a block start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaultDecision {
    /// Next fault; must lie strictly after the current time.
    NextFault(GoldenNumber),
    EndOfSchedule,
}

/// Simulation state at a decision point: nothing is running.
#[derive(Clone, Debug)]
pub struct SimState {
    now: GoldenNumber,
    pending: Vec<u64>,
    releases: Arc<[PacketBatch]>,
    next_release: usize,
    phase_start: GoldenNumber,
    in_phase: bool,
    speed: GoldenNumber,
    catalog: SizeCatalog,
    durations: Vec<GoldenNumber>,
}

/// How a call to [`SimState::run_until`] stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Exit {
    ReachedEnd,
    Stopped,
    /// Idle with nothing pending and no future releases.
    Quiescent,
}

/// Callbacks fired while the state advances.
trait Observer {
    fn phase_started(&mut self, _time: &GoldenNumber, _size_index: usize) {}

    /// Returns `false` to stop right after the start.
    fn started(&mut self, _size_index: usize, _time: &GoldenNumber) -> bool {
        true
    }

    fn finished(&mut self, _record: TransmissionRecord) {}
}

impl SimState {
    pub fn new(inst: &Instance, speed: GoldenNumber) -> Result<Self> {
        if speed < GoldenNumber::one() {
            return Err(Error::Precondition(format!("speed {speed} is below 1")));
        }
        let durations = inst
            .catalog
            .sizes()
            .iter()
            .map(|l| l.checked_div(&speed).expect("speed is positive"))
            .collect();
        let mut releases = inst.batches.clone();
        releases.sort_by(|a, b| a.release.cmp(&b.release).then(a.size_index.cmp(&b.size_index)));
        let mut state = SimState {
            now: GoldenNumber::zero(),
            pending: vec![0; inst.catalog.len()],
            releases: releases.into(),
            next_release: 0,
            phase_start: GoldenNumber::zero(),
            in_phase: false,
            speed,
            catalog: inst.catalog.clone(),
            durations,
        };
        state.release_due();
        Ok(state)
    }

    pub fn now(&self) -> &GoldenNumber {
        &self.now
    }

    pub fn pending(&self) -> &[u64] {
        &self.pending
    }

    pub fn speed(&self) -> &GoldenNumber {
        &self.speed
    }

    pub fn catalog(&self) -> &SizeCatalog {
        &self.catalog
    }

    pub fn in_phase(&self) -> bool {
        self.in_phase
    }

    /// `t_B`; meaningful only while a phase is open.
    pub fn phase_start(&self) -> &GoldenNumber {
        &self.phase_start
    }

    /// `rel(t) = s·(t − t_B)`, zero outside a phase.
    pub fn rel(&self) -> GoldenNumber {
        if self.in_phase {
            &self.speed * &(&self.now - &self.phase_start)
        } else {
            GoldenNumber::zero()
        }
    }

    /// `true` when nothing is pending and nothing will be released.
    pub fn is_exhausted(&self) -> bool {
        self.next_release == self.releases.len() && self.pending.iter().all(|&c| c == 0)
    }

    fn next_release_time(&self) -> Option<&GoldenNumber> {
        self.releases.get(self.next_release).map(|b| &b.release)
    }

    fn release_due(&mut self) {
        while let Some(b) = self.releases.get(self.next_release) {
            if b.release > self.now {
                break;
            }
            self.pending[b.size_index] += b.count;
            self.next_release += 1;
        }
    }

    /// A fault at `now` closes the open phase.
    fn fault(&mut self) {
        self.in_phase = false;
    }

    /// Advances until `end` (inclusive), the observer stops, or the state
    /// goes quiescent. A transmission ending exactly at `end` completes.
    fn run_until(&mut self, policy: &dyn Policy, end: Option<&GoldenNumber>, obs: &mut dyn Observer) -> Result<Exit> {
        loop {
            if end.is_some_and(|e| self.now >= *e) {
                return Ok(Exit::ReachedEnd);
            }
            let rel = self.rel();
            let decision = policy.decide(&DecisionContext {
                catalog: &self.catalog,
                pending: &self.pending,
                rel: &rel,
                at_phase_boundary: !self.in_phase,
            });
            let size_index = match decision {
                Decision::StartPhaseWith(i) => {
                    self.check_pending(policy, i)?;
                    self.in_phase = true;
                    self.phase_start = self.now.clone();
                    obs.phase_started(&self.now, i);
                    i
                }
                Decision::Continue(i) => {
                    if !self.in_phase {
                        return Err(Error::Contract(format!(
                            "policy `{}` continued a phase at {} but no phase is open",
                            policy.name(),
                            self.now
                        )));
                    }
                    self.check_pending(policy, i)?;
                    i
                }
                Decision::EndPhase => {
                    if !self.in_phase {
                        return Err(Error::Contract(format!(
                            "policy `{}` ended a phase at {} but no phase is open",
                            policy.name(),
                            self.now
                        )));
                    }
                    self.in_phase = false;
                    continue;
                }
                Decision::Idle => {
                    self.in_phase = false;
                    let target = match (self.next_release_time(), end) {
                        (None, None) => return Ok(Exit::Quiescent),
                        (Some(r), None) => r.clone(),
                        (None, Some(e)) => e.clone(),
                        (Some(r), Some(e)) => r.clone().min(e.clone()),
                    };
                    self.now = target;
                    self.release_due();
                    continue;
                }
            };

            self.pending[size_index] -= 1;
            let start = self.now.clone();
            let finish = &start + &self.durations[size_index];
            if !obs.started(size_index, &start) {
                self.pending[size_index] += 1;
                return Ok(Exit::Stopped);
            }
            let completed = end.is_none_or(|e| finish <= *e);
            self.now = if completed { finish } else { end.expect("bounded").clone() };
            if !completed {
                self.pending[size_index] += 1;
            }
            self.release_due();
            obs.finished(TransmissionRecord {
                size_index,
                start,
                end: self.now.clone(),
                completed,
                phase_start: self.phase_start.clone(),
            });
        }
    }

    fn check_pending(&self, policy: &dyn Policy, i: usize) -> Result<()> {
        if self.pending.get(i).copied().unwrap_or(0) == 0 {
            return Err(Error::Contract(format!(
                "policy `{}` chose size {} at {} with no such packet pending",
                policy.name(),
                i + 1,
                self.now
            )));
        }
        Ok(())
    }
}

/// First start times of a fault-free continuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunAhead {
    first_start: Vec<Option<GoldenNumber>>,
    limit: Option<GoldenNumber>,
}

impl RunAhead {
    /// `τ_i`; `None` means never, or not before the limit.
    pub fn tau(&self, i: usize) -> Option<&GoldenNumber> {
        self.first_start[i].as_ref()
    }

    /// `τ_{≥i} = min_{j≥i} τ_j`.
    pub fn tau_at_least(&self, i: usize) -> Option<&GoldenNumber> {
        self.first_start[i..].iter().flatten().min()
    }

    /// The lookahead cap the values were computed with.
    pub fn limit(&self) -> Option<&GoldenNumber> {
        self.limit.as_ref()
    }
}

struct FirstStarts {
    first: Vec<Option<GoldenNumber>>,
    unresolved: usize,
}

impl Observer for FirstStarts {
    fn started(&mut self, size_index: usize, time: &GoldenNumber) -> bool {
        if self.first[size_index].is_none() {
            self.first[size_index] = Some(time.clone());
            self.unresolved -= 1;
        }
        self.unresolved > 0
    }
}

/// Simulates a copy of `state` with no further faults and records when each
/// size is first started. Starts at or after `limit` are not observed; with
/// no limit the copy runs until every size started or it goes quiescent.
pub fn run_ahead(state: &SimState, policy: &dyn Policy, limit: Option<&GoldenNumber>) -> RunAhead {
    let mut copy = state.clone();
    let k = copy.catalog.len();
    let mut obs = FirstStarts { first: vec![None; k], unresolved: k };
    // a fault-free run never violates a contract the real run would not
    let _ = copy.run_until(policy, limit, &mut obs);
    RunAhead { first_start: obs.first, limit: limit.cloned() }
}

/// What a fault source sees at a block start.
pub struct BlockView<'a> {
    pub state: &'a SimState,
    pub policy: &'a dyn Policy,
    /// Zero-based index of the block about to start.
    pub block_index: usize,
}

impl BlockView<'_> {
    pub fn now(&self) -> &GoldenNumber {
        self.state.now()
    }

    pub fn run_ahead(&self, limit: Option<&GoldenNumber>) -> RunAhead {
        run_ahead(self.state, self.policy, limit)
    }
}

pub trait FaultSource {
    fn next_fault(&mut self, view: &BlockView<'_>) -> Result<FaultDecision>;

    /// The full sequence, when it is known in advance.
    fn declared(&self) -> Option<&FaultSequence> {
        None
    }
}

/// Replays a fixed sequence, ending with the horizon.
#[derive(Clone, Debug)]
pub struct StaticFaults {
    seq: FaultSequence,
}

impl StaticFaults {
    pub fn new(seq: FaultSequence) -> Self {
        StaticFaults { seq }
    }
}

impl FaultSource for StaticFaults {
    fn next_fault(&mut self, view: &BlockView<'_>) -> Result<FaultDecision> {
        let next = self.seq.next_after(view.now());
        Ok(if next > *view.now() { FaultDecision::NextFault(next) } else { FaultDecision::EndOfSchedule })
    }

    fn declared(&self) -> Option<&FaultSequence> {
        Some(&self.seq)
    }
}

struct Recorder<'t> {
    trace: &'t mut Trace,
    block_load: GoldenNumber,
}

impl Observer for Recorder<'_> {
    fn phase_started(&mut self, time: &GoldenNumber, size_index: usize) {
        if self.trace.recording == Recording::Full {
            self.trace.phases.push(PhaseStart { time: time.clone(), size_index });
        }
    }

    fn finished(&mut self, record: TransmissionRecord) {
        if record.completed {
            self.trace.completed_counts[record.size_index] += 1;
            self.block_load = &self.block_load + self.trace.catalog.size(record.size_index);
        }
        if self.trace.recording == Recording::Full {
            self.trace.records.push(record);
        }
    }
}

/// Runs `policy` at `speed` against `source` until it ends the schedule.
pub fn run_online(
    policy: &dyn Policy,
    inst: &Instance,
    source: &mut dyn FaultSource,
    speed: &GoldenNumber,
    recording: Recording,
) -> Result<Trace> {
    validate_instance(inst, &FaultSequence::no_faults(GoldenNumber::zero())).map_err(Error::Invalid)?;
    let mut state = SimState::new(inst, speed.clone())?;
    let mut trace = Trace::new(policy.name(), speed.clone(), inst.catalog.clone(), recording);
    trace.warnings.extend(policy.catalog_warning(&inst.catalog));
    let mut emitted = Vec::new();

    loop {
        let view = BlockView { state: &state, policy, block_index: emitted.len() };
        let fault = match source.next_fault(&view)? {
            FaultDecision::EndOfSchedule => break,
            FaultDecision::NextFault(f) => f,
        };
        if fault <= *state.now() {
            return Err(Error::Contract(format!("fault at {fault} is not after the current time {}", state.now())));
        }
        let mut rec = Recorder { trace: &mut trace, block_load: GoldenNumber::zero() };
        state.run_until(policy, Some(&fault), &mut rec)?;
        let load = rec.block_load;
        trace.block_loads.push(load);
        state.fault();
        emitted.push(fault);
    }

    trace.faults = match source.declared() {
        Some(seq) => seq.clone(),
        None => {
            let horizon = state.now().clone();
            FaultSequence::new(emitted, horizon)
        }
    };
    Ok(trace)
}

/// [`run_online`] against a fixed fault sequence.
pub fn run_static(policy: &dyn Policy, inst: &Instance, faults: &FaultSequence, speed: &GoldenNumber) -> Result<Trace> {
    validate_instance(inst, faults).map_err(Error::Invalid)?;
    run_online(policy, inst, &mut StaticFaults::new(faults.clone()), speed, Recording::Full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::g;
    use crate::policies::PolicyKind;

    fn inst(sizes: &[i64], batches: &[(usize, &str, u64)]) -> Instance {
        let cat = SizeCatalog::from_ints(sizes).unwrap();
        Instance::new(cat, batches.iter().map(|&(i, r, c)| PacketBatch::new(i, g(r), c)).collect())
    }

    #[test]
    fn completion_at_fault_counts() {
        let i = inst(&[2], &[(0, "0", 1)]);
        let t = run_static(&PolicyKind::Main, &i, &FaultSequence::new(vec![g("2")], g("3")), &g("1")).unwrap();
        assert_eq!(t.records[0].end, g("2"));
        assert!(t.records[0].completed);
        assert_eq!(t.total_load(), g("2"));
    }

    #[test]
    fn fault_inside_jams_then_retries() {
        let i = inst(&[2], &[(0, "0", 1)]);
        let t = run_static(&PolicyKind::Main, &i, &FaultSequence::new(vec![g("19/10")], g("4")), &g("1")).unwrap();
        assert_eq!(t.records.len(), 2);
        assert!(!t.records[0].completed);
        assert_eq!(t.records[0].end, g("19/10"));
        assert_eq!(t.records[1].start, g("19/10"));
        assert!(t.records[1].completed);
    }

    #[test]
    fn main_hand_simulation() {
        let i = inst(&[1, 2], &[(0, "0", 2), (1, "0", 1)]);
        let t = run_static(&PolicyKind::Main, &i, &FaultSequence::no_faults(g("4")), &g("1")).unwrap();
        let starts: Vec<_> = t.records.iter().map(|r| (r.size_index, r.start.clone())).collect();
        assert_eq!(starts, vec![(0, g("0")), (0, g("1")), (1, g("2"))]);
        assert!(t.records.iter().all(|r| r.completed));
        assert_eq!(t.phases.len(), 1);
    }

    #[test]
    fn run_ahead_first_starts() {
        let i = inst(&[1, 2], &[(0, "0", 2), (1, "0", 1)]);
        let s = SimState::new(&i, g("1")).unwrap();
        let ra = run_ahead(&s, &PolicyKind::Main, None);
        assert_eq!(ra.tau(0), Some(&g("0")));
        assert_eq!(ra.tau(1), Some(&g("2")));
        assert_eq!(ra.tau_at_least(1), Some(&g("2")));
        assert_eq!(ra.tau_at_least(0), Some(&g("0")));
    }

    #[test]
    fn run_ahead_empty_is_never() {
        let i = inst(&[1, 2], &[]);
        let s = SimState::new(&i, g("1")).unwrap();
        let ra = run_ahead(&s, &PolicyKind::Main, None);
        assert_eq!(ra.tau(0), None);
        assert_eq!(ra.tau_at_least(0), None);
    }

    #[test]
    fn run_ahead_two_sizes_setting() {
        // forty ones make P^{<ℓ} ≥ ℓ, so ℓ = 5 first runs once rel = 5
        let i = inst(&[1, 5], &[(0, "0", 40), (1, "0", 2)]);
        let s = SimState::new(&i, g("1")).unwrap();
        assert_eq!(run_ahead(&s, &PolicyKind::Main, None).tau(1), Some(&g("5")));
        let capped = run_ahead(&s, &PolicyKind::Main, Some(&g("3")));
        assert_eq!(capped.tau(1), None);
        assert_eq!(capped.tau(0), Some(&g("0")));
    }

    #[test]
    fn idle_jumps_to_release() {
        let i = inst(&[1], &[(0, "3/2", 1)]);
        let t = run_static(&PolicyKind::Main, &i, &FaultSequence::no_faults(g("5")), &g("2")).unwrap();
        assert_eq!(t.records[0].start, g("3/2"));
        assert_eq!(t.records[0].end, g("2"));
    }

    #[test]
    fn release_after_horizon_contributes_nothing() {
        let i = inst(&[1], &[(0, "10", 1)]);
        let t = run_static(&PolicyKind::Main, &i, &FaultSequence::no_faults(g("5")), &g("1")).unwrap();
        assert!(t.records.is_empty());
        assert_eq!(t.total_load(), g("0"));
    }

    struct Bad;
    impl Policy for Bad {
        fn name(&self) -> &str {
            "bad"
        }
        fn decide(&self, _ctx: &DecisionContext<'_>) -> Decision {
            Decision::StartPhaseWith(0)
        }
    }

    #[test]
    fn non_pending_choice_is_contract_error() {
        let i = inst(&[1], &[(0, "0", 1)]);
        let err = run_static(&Bad, &i, &FaultSequence::no_faults(g("5")), &g("1")).unwrap_err();
        assert!(matches!(err, Error::Contract(_)), "{err}");
    }

    struct Backwards;
    impl FaultSource for Backwards {
        fn next_fault(&mut self, view: &BlockView<'_>) -> Result<FaultDecision> {
            Ok(FaultDecision::NextFault(view.now().clone()))
        }
    }

    #[test]
    fn past_fault_is_contract_error() {
        let i = inst(&[1], &[(0, "0", 1)]);
        let err = run_online(&PolicyKind::Main, &i, &mut Backwards, &g("1"), Recording::Full).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn run_ahead_leaves_state_untouched() {
        struct Peek(StaticFaults);
        impl FaultSource for Peek {
            fn next_fault(&mut self, view: &BlockView<'_>) -> Result<FaultDecision> {
                view.run_ahead(None);
                self.0.next_fault(view)
            }
        }
        let i = inst(&[1, 2, 3], &[(0, "0", 4), (1, "1/2", 2), (2, "0", 2)]);
        let faults = FaultSequence::new(vec![g("5/2"), g("6")], g("9"));
        let plain = run_static(&PolicyKind::Main, &i, &faults, &g("1")).unwrap();
        let peeked = run_online(&PolicyKind::Main, &i, &mut Peek(StaticFaults::new(faults.clone())), &g("1"), Recording::Full).unwrap();
        assert_eq!(plain.records, peeked.records);
    }

    #[test]
    fn totals_mode_matches_full() {
        let i = inst(&[1, 2, 3], &[(0, "0", 4), (1, "1/2", 2), (2, "0", 2)]);
        let faults = FaultSequence::new(vec![g("5/2"), g("6")], g("9"));
        let full = run_static(&PolicyKind::Main, &i, &faults, &g("1")).unwrap();
        let totals =
            run_online(&PolicyKind::Main, &i, &mut StaticFaults::new(faults), &g("1"), Recording::Totals).unwrap();
        assert!(totals.records.is_empty());
        assert_eq!(full.completed_counts, totals.completed_counts);
        assert_eq!(full.block_loads, totals.block_loads);
    }
}
