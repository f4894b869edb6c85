use std::io::Write;

use super::{FaultSequence, SizeCatalog, SizeFilter};
use crate::numeric::GoldenNumber;
use crate::Result;

/// One transmission attempt. A failed attempt ends at the fault that
/// jammed it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransmissionRecord {
    pub size_index: usize,
    pub start: GoldenNumber,
    pub end: GoldenNumber,
    pub completed: bool,
    /// Start `t_B` of the enclosing phase.
    pub phase_start: GoldenNumber,
}

/// A Step (2) decision: a phase began at `time` with a packet of `size_index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseStart {
    pub time: GoldenNumber,
    pub size_index: usize,
}

/// How much of a run the engine keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Recording {
    /// Every transmission record.
    #[default]
    Full,
    /// Per-size completion counts and per-block loads only; for runs with
    /// millions of transmissions.
    Totals,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub policy: String,
    pub speed: GoldenNumber,
    pub catalog: SizeCatalog,
    pub records: Vec<TransmissionRecord>,
    pub phases: Vec<PhaseStart>,
    /// Faults as realized during the run, with the horizon the run ended at.
    pub faults: FaultSequence,
    /// Completed packets per size.
    pub completed_counts: Vec<u64>,
    /// Completed load per block, in block order.
    pub block_loads: Vec<GoldenNumber>,
    pub warnings: Vec<String>,
    pub recording: Recording,
}

impl Trace {
    pub fn new(policy: &str, speed: GoldenNumber, catalog: SizeCatalog, recording: Recording) -> Self {
        let k = catalog.len();
        Trace {
            policy: policy.to_string(),
            speed,
            catalog,
            records: Vec::new(),
            phases: Vec::new(),
            faults: FaultSequence::no_faults(GoldenNumber::zero()),
            completed_counts: vec![0; k],
            block_loads: Vec::new(),
            warnings: Vec::new(),
            recording,
        }
    }

    /// `L_ALG`: total size of everything completed.
    pub fn total_load(&self) -> GoldenNumber {
        self.completed_counts
            .iter()
            .enumerate()
            .map(|(i, &c)| self.catalog.size(i).mul_int(c as i64))
            .sum()
    }

    pub fn load_of_size(&self, i: usize) -> GoldenNumber {
        self.catalog.size(i).mul_int(self.completed_counts[i] as i64)
    }

    /// `L(filter, (u, v])` over completed records.
    pub fn completed_load(&self, filter: SizeFilter, u: &GoldenNumber, v: &GoldenNumber) -> GoldenNumber {
        assert_eq!(self.recording, Recording::Full, "interval loads need a fully recorded trace");
        sum_loads(
            self.records.iter().filter(|r| r.completed).map(|r| (r.size_index, &r.end)),
            &self.catalog,
            filter,
            u,
            v,
        )
    }

    /// Maximal gaps in `[0, T]` where nothing is transmitted.
    pub fn idle_intervals(&self) -> Vec<(GoldenNumber, GoldenNumber)> {
        let mut out = Vec::new();
        let mut cursor = GoldenNumber::zero();
        for r in &self.records {
            if r.start > cursor {
                out.push((cursor.clone(), r.start.clone()));
            }
            cursor = r.end.clone();
        }
        if self.faults.horizon > cursor {
            out.push((cursor, self.faults.horizon.clone()));
        }
        out
    }

    /// CSV with columns `start,end,size_index,size,completed,phase_start`.
    pub fn write_csv<W: Write>(&self, w: W, digits: u32) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["start", "end", "size_index", "size", "completed", "phase_start"])?;
        for r in &self.records {
            out.write_record([
                r.start.to_decimal(digits),
                r.end.to_decimal(digits),
                (r.size_index + 1).to_string(),
                self.catalog.size(r.size_index).to_decimal(digits),
                r.completed.to_string(),
                r.phase_start.to_decimal(digits),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Sums sizes of completions `(size_index, end)` with `end ∈ (u, v]`.
pub fn sum_loads<'a>(
    completions: impl Iterator<Item = (usize, &'a GoldenNumber)>,
    catalog: &SizeCatalog,
    filter: SizeFilter,
    u: &GoldenNumber,
    v: &GoldenNumber,
) -> GoldenNumber {
    let mut counts = vec![0i64; catalog.len()];
    for (i, end) in completions {
        if filter.matches(i) && end > u && end <= v {
            counts[i] += 1;
        }
    }
    counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| catalog.size(i).mul_int(c)).sum()
}

/// Free-function form of [`Trace::completed_load`].
pub fn completed_load(trace: &Trace, filter: SizeFilter, u: &GoldenNumber, v: &GoldenNumber) -> GoldenNumber {
    trace.completed_load(filter, u, v)
}
