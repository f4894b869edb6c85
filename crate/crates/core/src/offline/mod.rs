//! Exact offline optimum at speed 1 for small instances, and a feasibility
//! checker for offline schedules at any speed.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use crate::model::{FaultSequence, Instance};
use crate::numeric::GoldenNumber;
use crate::{Error, Result};

/// Largest total packet count [`opt_bruteforce`] accepts.
pub const MAX_PACKETS: u64 = 24;
/// Largest number of non-empty blocks [`opt_bruteforce`] accepts.
pub const MAX_BLOCKS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub size_index: usize,
    pub start: GoldenNumber,
    pub end: GoldenNumber,
    /// Zero-based index into [`FaultSequence::blocks`].
    pub block_index: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OfflineSchedule {
    pub assignments: Vec<Assignment>,
    pub value: GoldenNumber,
}

impl OfflineSchedule {
    /// Recomputes `value` from the assignments.
    pub fn from_assignments(assignments: Vec<Assignment>, inst: &Instance) -> Self {
        let value = assignments.iter().map(|a| inst.catalog.size(a.size_index).clone()).sum();
        OfflineSchedule { assignments, value }
    }

    pub fn count_of(&self, size_index: usize) -> usize {
        self.assignments.iter().filter(|a| a.size_index == size_index).count()
    }

    /// Same columns as the trace export; `completed` is always true and
    /// `phase_start` holds the block start.
    pub fn write_csv<W: Write>(&self, inst: &Instance, faults: &FaultSequence, w: W, digits: u32) -> Result<()> {
        let blocks = faults.blocks();
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["start", "end", "size_index", "size", "completed", "phase_start"])?;
        for a in &self.assignments {
            let block_start = blocks.get(a.block_index).map(|b| b.0.to_decimal(digits)).unwrap_or_default();
            out.write_record([
                a.start.to_decimal(digits),
                a.end.to_decimal(digits),
                (a.size_index + 1).to_string(),
                inst.catalog.size(a.size_index).to_decimal(digits),
                "true".to_string(),
                block_start,
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Releases per size, ascending.
fn releases_by_size(inst: &Instance) -> Vec<Vec<GoldenNumber>> {
    let mut out = vec![Vec::new(); inst.catalog.len()];
    for b in &inst.batches {
        for _ in 0..b.count {
            out[b.size_index].push(b.release.clone());
        }
    }
    for r in &mut out {
        r.sort();
    }
    out
}

struct Search<'a> {
    inst: &'a Instance,
    blocks: Vec<(GoldenNumber, GoldenNumber)>,
    releases: Vec<Vec<GoldenNumber>>,
    memo: HashMap<(usize, Vec<usize>), (GoldenNumber, Vec<usize>)>,
}

impl Search<'_> {
    /// Packs the chosen packets back-to-back in release order from the
    /// block start; `None` if they do not fit.
    fn pack(&self, block: usize, used: &[usize], take: &[usize]) -> Option<Vec<Assignment>> {
        let (start, end) = &self.blocks[block];
        let mut chosen: Vec<(&GoldenNumber, usize)> = Vec::new();
        for (i, (&u, &c)) in used.iter().zip(take).enumerate() {
            chosen.extend(self.releases[i][u..u + c].iter().map(|r| (r, i)));
        }
        chosen.sort();
        let mut cursor = start.clone();
        let mut out = Vec::with_capacity(chosen.len());
        for (release, i) in chosen {
            let s = cursor.max(release.clone());
            let e = &s + self.inst.catalog.size(i);
            if e > *end {
                return None;
            }
            cursor = e.clone();
            out.push(Assignment { size_index: i, start: s, end: e, block_index: block });
        }
        Some(out)
    }

    fn best(&mut self, block: usize, used: &[usize]) -> GoldenNumber {
        if block == self.blocks.len() {
            return GoldenNumber::zero();
        }
        let key = (block, used.to_vec());
        if let Some((v, _)) = self.memo.get(&key) {
            return v.clone();
        }
        let len = &self.blocks[block].1 - &self.blocks[block].0;
        let mut take = vec![0; used.len()];
        let mut best = (GoldenNumber::zero(), vec![0; used.len()]);
        let mut first = true;
        self.enumerate(block, used, &len, 0, &GoldenNumber::zero(), &mut take, &mut best, &mut first);
        self.memo.insert(key, best.clone());
        best.0
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &mut self,
        block: usize,
        used: &[usize],
        len: &GoldenNumber,
        i: usize,
        load: &GoldenNumber,
        take: &mut Vec<usize>,
        best: &mut (GoldenNumber, Vec<usize>),
        first: &mut bool,
    ) {
        if i == used.len() {
            if self.pack(block, used, take).is_none() {
                return;
            }
            let next: Vec<usize> = used.iter().zip(take.iter()).map(|(u, t)| u + t).collect();
            let value = load + &self.best(block + 1, &next);
            if *first || value > best.0 {
                *first = false;
                *best = (value, take.clone());
            }
            return;
        }
        let avail = self.releases[i].len() - used[i];
        let size = self.inst.catalog.size(i).clone();
        let mut acc = load.clone();
        for c in 0..=avail {
            if c > 0 {
                acc = &acc + &size;
                if acc > *len {
                    break;
                }
            }
            take[i] = c;
            self.enumerate(block, used, len, i + 1, &acc, take, best, first);
        }
        take[i] = 0;
    }
}

/// Maximum total size completable at speed 1. Exhaustive over per-block
/// count vectors, memoized on (block, packets used per size). Within a size,
/// packets are used in release order.
pub fn opt_bruteforce(inst: &Instance, faults: &FaultSequence) -> Result<OfflineSchedule> {
    let n = inst.packet_count();
    if n > MAX_PACKETS {
        return Err(Error::SizeLimit(format!("{n} packets, at most {MAX_PACKETS} supported")));
    }
    let blocks = faults.blocks();
    if blocks.len() > MAX_BLOCKS {
        return Err(Error::SizeLimit(format!("{} blocks, at most {MAX_BLOCKS} supported", blocks.len())));
    }
    let mut search = Search { inst, blocks, releases: releases_by_size(inst), memo: HashMap::new() };
    let k = inst.catalog.len();
    let mut used = vec![0; k];
    let value = search.best(0, &used);

    let mut assignments = Vec::new();
    for b in 0..search.blocks.len() {
        let take = search.memo.get(&(b, used.clone())).map(|(_, t)| t.clone()).expect("memoized along the optimum");
        assignments.extend(search.pack(b, &used, &take).expect("optimum is feasible"));
        for (u, t) in used.iter_mut().zip(&take) {
            *u += t;
        }
    }
    Ok(OfflineSchedule { assignments, value })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleViolation {
    UnknownSize { index: usize },
    WrongDuration { index: usize },
    OutsideHorizon { index: usize },
    CrossesFault { index: usize, fault: GoldenNumber },
    WrongBlock { index: usize, declared: usize },
    BeforeRelease { index: usize, size_index: usize, release: GoldenNumber },
    OverUse { size_index: usize, used: u64, available: u64 },
    Overlap { first: usize, second: usize },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleViolation::UnknownSize { index } => write!(f, "assignment {} has an unknown size", index + 1),
            ScheduleViolation::WrongDuration { index } => {
                write!(f, "assignment {} does not last size/speed", index + 1)
            }
            ScheduleViolation::OutsideHorizon { index } => write!(f, "assignment {} lies outside [0, T]", index + 1),
            ScheduleViolation::CrossesFault { index, fault } => {
                write!(f, "assignment {} crosses fault at {fault}", index + 1)
            }
            ScheduleViolation::WrongBlock { index, declared } => {
                write!(f, "assignment {} is not inside its declared block {}", index + 1, declared + 1)
            }
            ScheduleViolation::BeforeRelease { index, size_index, release } => write!(
                f,
                "assignment {} starts before the release of batch size={} release={release}",
                index + 1,
                size_index + 1
            ),
            ScheduleViolation::OverUse { size_index, used, available } => {
                write!(f, "size {} used {used} times but only {available} packets exist", size_index + 1)
            }
            ScheduleViolation::Overlap { first, second } => {
                write!(f, "assignments {} and {} overlap", first + 1, second + 1)
            }
        }
    }
}

/// Checks every schedule invariant at `speed`; returns all violations.
pub fn verify_schedule(
    sched: &OfflineSchedule,
    inst: &Instance,
    faults: &FaultSequence,
    speed: &GoldenNumber,
) -> Result<(), Vec<ScheduleViolation>> {
    let mut out = Vec::new();
    let k = inst.catalog.len();
    let blocks = faults.blocks();
    let bounds = faults.boundaries();
    let zero = GoldenNumber::zero();

    for (index, a) in sched.assignments.iter().enumerate() {
        if a.size_index >= k {
            out.push(ScheduleViolation::UnknownSize { index });
            continue;
        }
        let dur = inst.catalog.size(a.size_index).checked_div(speed).expect("positive speed");
        if &a.end - &a.start != dur {
            out.push(ScheduleViolation::WrongDuration { index });
        }
        if a.start < zero || a.end > faults.horizon {
            out.push(ScheduleViolation::OutsideHorizon { index });
        }
        // boundaries are sorted, so the first one past the start decides
        let pos = bounds.partition_point(|f| *f <= a.start);
        if let Some(f) = bounds.get(pos) {
            if *f < a.end {
                out.push(ScheduleViolation::CrossesFault { index, fault: f.clone() });
            }
        }
        let inside = blocks.get(a.block_index).is_some_and(|(u, v)| a.start >= *u && a.end <= *v);
        if !inside {
            out.push(ScheduleViolation::WrongBlock { index, declared: a.block_index });
        }
    }

    // the j-th earliest start of a size must not precede its j-th release
    for i in 0..k {
        let mut starts: Vec<(&GoldenNumber, usize)> = sched
            .assignments
            .iter()
            .enumerate()
            .filter(|(_, a)| a.size_index == i)
            .map(|(n, a)| (&a.start, n))
            .collect();
        starts.sort();
        let mut batches: Vec<_> = inst.batches.iter().filter(|b| b.size_index == i && b.count > 0).collect();
        batches.sort_by(|a, b| a.release.cmp(&b.release));
        let available: u64 = batches.iter().map(|b| b.count).sum();
        if starts.len() as u64 > available {
            out.push(ScheduleViolation::OverUse { size_index: i, used: starts.len() as u64, available });
        }
        let (mut bi, mut left) = (0, batches.first().map_or(0, |b| b.count));
        for (start, index) in starts {
            while left == 0 && bi + 1 < batches.len() {
                bi += 1;
                left = batches[bi].count;
            }
            if left == 0 {
                break;
            }
            if *start < batches[bi].release {
                out.push(ScheduleViolation::BeforeRelease {
                    index,
                    size_index: i,
                    release: batches[bi].release.clone(),
                });
            }
            left -= 1;
        }
    }

    let mut order: Vec<usize> = (0..sched.assignments.len()).collect();
    order.sort_by(|&x, &y| sched.assignments[x].start.cmp(&sched.assignments[y].start));
    for w in order.windows(2) {
        if sched.assignments[w[1]].start < sched.assignments[w[0]].end {
            out.push(ScheduleViolation::Overlap { first: w[0], second: w[1] });
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PacketBatch, SizeCatalog};
    use crate::numeric::g;

    fn inst(sizes: &[i64], batches: &[(usize, &str, u64)]) -> Instance {
        let cat = SizeCatalog::from_ints(sizes).unwrap();
        Instance::new(cat, batches.iter().map(|&(i, r, c)| PacketBatch::new(i, g(r), c)).collect())
    }

    #[test]
    fn everything_fits_without_faults() {
        let i = inst(&[1, 2, 3], &[(0, "0", 2), (1, "0", 1), (2, "0", 2)]);
        let s = opt_bruteforce(&i, &FaultSequence::no_faults(g("20"))).unwrap();
        assert_eq!(s.value, i.total_size());
        assert!(verify_schedule(&s, &i, &FaultSequence::no_faults(g("20")), &g("1")).is_ok());
    }

    #[test]
    fn single_block_subset() {
        let i = inst(&[2, 3], &[(0, "0", 2), (1, "0", 1)]);
        let f = FaultSequence::no_faults(g("5"));
        assert_eq!(opt_bruteforce(&i, &f).unwrap().value, g("5"));
    }

    #[test]
    fn releases_inside_block_delay_packing() {
        let i = inst(&[2], &[(0, "0", 1), (0, "3", 1)]);
        let f = FaultSequence::no_faults(g("4"));
        // the late packet cannot finish by 4
        assert_eq!(opt_bruteforce(&i, &f).unwrap().value, g("2"));
        let f = FaultSequence::no_faults(g("5"));
        assert_eq!(opt_bruteforce(&i, &f).unwrap().value, g("4"));
    }

    #[test]
    fn caps_are_errors() {
        let i = inst(&[1], &[(0, "0", 25)]);
        assert!(matches!(opt_bruteforce(&i, &FaultSequence::no_faults(g("30"))), Err(Error::SizeLimit(_))));
        let i = inst(&[1], &[(0, "0", 1)]);
        let f = FaultSequence::new((1..=9).map(GoldenNumber::from_int).collect(), g("9"));
        assert!(matches!(opt_bruteforce(&i, &f), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn crossing_fault_reported() {
        let i = inst(&[2], &[(0, "0", 1)]);
        let f = FaultSequence::new(vec![g("1")], g("4"));
        let s = OfflineSchedule::from_assignments(
            vec![Assignment { size_index: 0, start: g("0"), end: g("2"), block_index: 0 }],
            &i,
        );
        let v = verify_schedule(&s, &i, &f, &g("1")).unwrap_err();
        assert!(v.iter().any(|x| x.to_string() == "assignment 1 crosses fault at 1"), "{v:?}");
    }

    #[test]
    fn early_start_names_batch() {
        let i = inst(&[2], &[(0, "1", 1)]);
        let f = FaultSequence::no_faults(g("4"));
        let s = OfflineSchedule::from_assignments(
            vec![Assignment { size_index: 0, start: g("0"), end: g("2"), block_index: 0 }],
            &i,
        );
        let v = verify_schedule(&s, &i, &f, &g("1")).unwrap_err();
        assert_eq!(v[0].to_string(), "assignment 1 starts before the release of batch size=1 release=1");
    }

    #[test]
    fn overuse_and_overlap() {
        let i = inst(&[1], &[(0, "0", 1)]);
        let f = FaultSequence::no_faults(g("4"));
        let a = |s: &str, e: &str| Assignment { size_index: 0, start: g(s), end: g(e), block_index: 0 };
        let s = OfflineSchedule::from_assignments(vec![a("0", "1"), a("1/2", "3/2")], &i);
        let v = verify_schedule(&s, &i, &f, &g("1")).unwrap_err();
        assert!(v.iter().any(|x| matches!(x, ScheduleViolation::OverUse { .. })));
        assert!(v.iter().any(|x| matches!(x, ScheduleViolation::Overlap { .. })));
    }
}
