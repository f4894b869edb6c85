use std::collections::BTreeMap;

use crate::model::{Instance, Recording, Trace};
use crate::numeric::GoldenNumber;
use crate::{Error, Result};

/// Pending and running counts reconstructed from a trace, as step functions
/// over the event times. A packet is pending at `t` if it is released by
/// `t`, not completed by `t`, and not started before `t` and still running;
/// so one started exactly at `t` is still pending at `t` itself.
#[derive(Clone, Debug)]
pub struct PendingProfile {
    pub times: Vec<GoldenNumber>,
    /// Pending counts on the open step `(times[j], times[j+1])`.
    pub pending: Vec<Vec<i64>>,
    /// Pending counts at the instant `times[j]`.
    pub instant: Vec<Vec<i64>>,
    /// Transmissions running on `[times[j], times[j+1])`; 0 or 1.
    pub running: Vec<i64>,
}

#[derive(Clone, Default)]
struct Delta {
    pending: Vec<i64>,
    starts: Vec<i64>,
    running: i64,
}

pub(crate) fn require_annotated(trace: &Trace) -> Result<()> {
    if trace.recording != Recording::Full {
        return Err(Error::Precondition("trace keeps totals only; a fully recorded trace is needed".into()));
    }
    if !trace.records.is_empty() && trace.phases.is_empty() {
        return Err(Error::Precondition("trace has transmissions but no phase annotations".into()));
    }
    Ok(())
}

pub(crate) fn require_same_catalog(trace: &Trace, inst: &Instance) -> Result<()> {
    if trace.catalog != inst.catalog {
        return Err(Error::Precondition("trace and instance use different size catalogs".into()));
    }
    Ok(())
}

impl PendingProfile {
    pub fn new(trace: &Trace, inst: &Instance) -> Result<Self> {
        require_annotated(trace)?;
        require_same_catalog(trace, inst)?;
        let k = inst.catalog.len();
        let mut deltas: BTreeMap<GoldenNumber, Delta> = BTreeMap::new();
        fn at<'m>(m: &'m mut BTreeMap<GoldenNumber, Delta>, t: &GoldenNumber, k: usize) -> &'m mut Delta {
            m.entry(t.clone()).or_insert_with(|| Delta { pending: vec![0; k], starts: vec![0; k], running: 0 })
        }
        at(&mut deltas, &GoldenNumber::zero(), k);
        at(&mut deltas, &trace.faults.horizon, k);
        for f in &trace.faults.faults {
            at(&mut deltas, f, k);
        }
        for b in &inst.batches {
            at(&mut deltas, &b.release, k).pending[b.size_index] += b.count as i64;
        }
        for r in &trace.records {
            let d = at(&mut deltas, &r.start, k);
            d.pending[r.size_index] -= 1;
            d.starts[r.size_index] += 1;
            d.running += 1;
            let d = at(&mut deltas, &r.end, k);
            d.running -= 1;
            if !r.completed {
                d.pending[r.size_index] += 1;
            }
        }
        let mut times = Vec::with_capacity(deltas.len());
        let mut pending = Vec::with_capacity(deltas.len());
        let mut instant = Vec::with_capacity(deltas.len());
        let mut running = Vec::with_capacity(deltas.len());
        let mut cur = vec![0i64; k];
        let mut run = 0i64;
        for (t, d) in deltas {
            for (c, x) in cur.iter_mut().zip(&d.pending) {
                *c += x;
            }
            run += d.running;
            times.push(t);
            instant.push(cur.iter().zip(&d.starts).map(|(c, x)| c + x).collect());
            pending.push(cur.clone());
            running.push(run);
        }
        Ok(PendingProfile { times, pending, instant, running })
    }

    /// Index of the last event time `≤ t`.
    pub fn step_at(&self, t: &GoldenNumber) -> Option<usize> {
        self.times.partition_point(|x| x <= t).checked_sub(1)
    }

    /// Pending count at the instant `t`.
    pub fn pending_at(&self, t: &GoldenNumber, size_index: usize) -> i64 {
        match self.step_at(t) {
            Some(j) if self.times[j] == *t => self.instant[j][size_index],
            Some(j) => self.pending[j][size_index],
            None => 0,
        }
    }

    /// End of step `j`; `None` for the last step.
    pub fn step_end(&self, j: usize) -> Option<&GoldenNumber> {
        self.times.get(j + 1)
    }
}

/// Critical times indexed as in the analysis: entry `i ≥ 1` belongs to size
/// index `i − 1`, entry 0 is the horizon `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalTimes {
    /// `C_0 = T ≥ C_1 ≥ … ≥ C_k`.
    pub ordered: Vec<GoldenNumber>,
    /// `C'_i`: supremum of all i-good times in `[0, T]`; `C'_0 = T`.
    pub unordered: Vec<GoldenNumber>,
}

impl CriticalTimes {
    pub fn k(&self) -> usize {
        self.ordered.len() - 1
    }
}

/// Supremum of i-good times `t ≤ cap` for size index `i`.
fn sup_good(trace: &Trace, profile: &PendingProfile, i: usize, cap: &GoldenNumber) -> GoldenNumber {
    let mut best = GoldenNumber::zero();
    for p in &trace.phases {
        if p.size_index > i && p.time <= *cap && p.time > best {
            best = p.time.clone();
        }
    }
    for (j, t) in profile.times.iter().enumerate() {
        if t > cap {
            break;
        }
        if profile.instant[j][i] == 0 && t > &best {
            best = t.clone();
        }
        if profile.pending[j][i] == 0 && t < cap {
            let end = profile.step_end(j).map_or(cap, |e| e.min(cap));
            if *end > best {
                best = end.clone();
            }
        }
    }
    best
}

/// i-goodness holds when a phase starts with a packet larger than `ℓ_i`, when
/// no `ℓ_i` is pending, or at 0. Suprema are taken over the instants and open
/// steps of a [`PendingProfile`].
pub fn critical_times(alg_trace: &Trace, inst: &Instance) -> Result<CriticalTimes> {
    let profile = PendingProfile::new(alg_trace, inst)?;
    Ok(critical_times_from(alg_trace, &profile))
}

pub(crate) fn critical_times_from(trace: &Trace, profile: &PendingProfile) -> CriticalTimes {
    let k = trace.catalog.len();
    let horizon = trace.faults.horizon.clone();
    let mut ordered = vec![horizon.clone()];
    let mut unordered = vec![horizon.clone()];
    for i in 0..k {
        let cap = ordered[i].clone();
        ordered.push(sup_good(trace, profile, i, &cap));
        unordered.push(sup_good(trace, profile, i, &horizon));
    }
    CriticalTimes { ordered, unordered }
}
