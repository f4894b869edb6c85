//! Instances, fault sequences and execution traces, plus the completed-load
//! measures `L(filter, (u, v])` every audit is phrased in.
//!
//! Size indices are 0-based in code and 1-based in files and CSV output, so
//! that index `i` in a file names the size `ℓ_i`.

mod io;
mod trace;

pub use io::{read_instance, write_instance, write_loads_csv, LoadRow};
pub use trace::{completed_load, sum_loads, PhaseStart, Recording, TransmissionRecord, Trace};

use std::fmt;

use crate::numeric::GoldenNumber;
use crate::{Error, Result};

/// Sizes `ℓ_1 < … < ℓ_k`; `ℓ_0 = 0` is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SizeCatalog {
    sizes: Vec<GoldenNumber>,
}

impl SizeCatalog {
    pub fn new(sizes: Vec<GoldenNumber>) -> Result<Self> {
        let violations = catalog_violations(&sizes);
        if violations.is_empty() {
            Ok(SizeCatalog { sizes })
        } else {
            Err(Error::Invalid(violations))
        }
    }

    /// Builds a catalog without checking invariants; `validate_instance`
    /// reports anything wrong with it.
    pub fn new_unchecked(sizes: Vec<GoldenNumber>) -> Self {
        SizeCatalog { sizes }
    }

    pub fn from_ints(sizes: &[i64]) -> Result<Self> {
        Self::new(sizes.iter().map(|&s| GoldenNumber::from_int(s)).collect())
    }

    /// Number of sizes `k`.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn size(&self, i: usize) -> &GoldenNumber {
        &self.sizes[i]
    }

    pub fn sizes(&self) -> &[GoldenNumber] {
        &self.sizes
    }

    /// `ℓ_{i-1}` in 0-based terms: the next smaller size, or zero.
    pub fn smaller(&self, i: usize) -> GoldenNumber {
        if i == 0 {
            GoldenNumber::zero()
        } else {
            self.sizes[i - 1].clone()
        }
    }

    /// `ℓ_k`.
    pub fn largest(&self) -> &GoldenNumber {
        self.sizes.last().expect("catalog is non-empty")
    }

    pub fn index_of(&self, size: &GoldenNumber) -> Option<usize> {
        self.sizes.binary_search(size).ok()
    }

    /// Every size divides every larger one.
    pub fn is_divisible(&self) -> bool {
        self.sizes.windows(2).all(|w| w[1].is_multiple_of(&w[0]))
    }
}

fn catalog_violations(sizes: &[GoldenNumber]) -> Vec<Violation> {
    let mut v = Vec::new();
    if sizes.is_empty() {
        v.push(Violation::EmptyCatalog);
    }
    for (i, s) in sizes.iter().enumerate() {
        if !s.is_positive() {
            v.push(Violation::NonPositiveSize { index: i + 1 });
        }
    }
    for (i, w) in sizes.windows(2).enumerate() {
        if w[1] <= w[0] {
            v.push(Violation::SizesNotIncreasing { index: i + 2 });
        }
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PacketBatch {
    pub size_index: usize,
    pub release: GoldenNumber,
    pub count: u64,
}

impl PacketBatch {
    pub fn new(size_index: usize, release: GoldenNumber, count: u64) -> Self {
        PacketBatch { size_index, release, count }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub catalog: SizeCatalog,
    pub batches: Vec<PacketBatch>,
}

impl Instance {
    /// Builds the canonical form: batches sorted by release, then size, with
    /// equal (release, size) batches merged and empty batches dropped.
    pub fn new(catalog: SizeCatalog, batches: Vec<PacketBatch>) -> Self {
        let mut inst = Instance { catalog, batches };
        inst.canonicalize();
        inst
    }

    pub fn canonicalize(&mut self) {
        let mut batches = std::mem::take(&mut self.batches);
        batches.retain(|b| b.count > 0);
        batches.sort_by(|x, y| x.release.cmp(&y.release).then(x.size_index.cmp(&y.size_index)));
        let mut merged: Vec<PacketBatch> = Vec::with_capacity(batches.len());
        for b in batches {
            match merged.last_mut() {
                Some(last) if last.release == b.release && last.size_index == b.size_index => last.count += b.count,
                _ => merged.push(b),
            }
        }
        self.batches = merged;
    }

    pub fn packet_count(&self) -> u64 {
        self.batches.iter().map(|b| b.count).sum()
    }

    pub fn count_of(&self, size_index: usize) -> u64 {
        self.batches.iter().filter(|b| b.size_index == size_index).map(|b| b.count).sum()
    }

    pub fn total_size(&self) -> GoldenNumber {
        self.batches
            .iter()
            .map(|b| self.catalog.size(b.size_index).mul_int(b.count as i64))
            .sum()
    }
}

/// Fault times `f_1 < … < f_N` and the end of the schedule `T ≥ f_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultSequence {
    pub faults: Vec<GoldenNumber>,
    pub horizon: GoldenNumber,
}

impl FaultSequence {
    pub fn new(faults: Vec<GoldenNumber>, horizon: GoldenNumber) -> Self {
        FaultSequence { faults, horizon }
    }

    pub fn no_faults(horizon: GoldenNumber) -> Self {
        FaultSequence { faults: Vec::new(), horizon }
    }

    /// Blocks `(f_i, f_{i+1}]` with `f_0 = 0` and `f_{N+1} = T`; empty
    /// blocks are skipped.
    pub fn blocks(&self) -> Vec<(GoldenNumber, GoldenNumber)> {
        let mut out = Vec::with_capacity(self.faults.len() + 1);
        let mut prev = GoldenNumber::zero();
        for f in self.faults.iter().chain(std::iter::once(&self.horizon)) {
            if *f > prev {
                out.push((prev.clone(), f.clone()));
                prev = f.clone();
            }
        }
        out
    }

    /// Block ends, i.e. faults plus the horizon, without duplicates.
    pub fn boundaries(&self) -> Vec<GoldenNumber> {
        self.blocks().into_iter().map(|(_, e)| e).collect()
    }

    /// First fault (or the horizon) strictly after `t`.
    pub fn next_after(&self, t: &GoldenNumber) -> GoldenNumber {
        let pos = self.faults.partition_point(|f| f <= t);
        self.faults
            .get(pos)
            .cloned()
            .unwrap_or_else(|| self.horizon.clone())
            .max(t.clone())
    }
}

/// One broken invariant found by [`validate_instance`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyCatalog,
    NonPositiveSize { index: usize },
    SizesNotIncreasing { index: usize },
    BadSizeIndex { batch: usize, index: usize },
    NegativeRelease { batch: usize },
    BatchesUnsorted { batch: usize },
    NegativeFault { index: usize },
    FaultsNotIncreasing { index: usize },
    HorizonBeforeFault,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyCatalog => write!(f, "catalog has no sizes"),
            Violation::NonPositiveSize { index } => write!(f, "size {index} is not positive"),
            Violation::SizesNotIncreasing { index } => write!(f, "sizes not increasing at size {index}"),
            Violation::BadSizeIndex { batch, index } => write!(f, "batch {batch} names unknown size {index}"),
            Violation::NegativeRelease { batch } => write!(f, "batch {batch} has a negative release time"),
            Violation::BatchesUnsorted { batch } => write!(f, "batch {batch} is out of release order"),
            Violation::NegativeFault { index } => write!(f, "fault {index} is negative"),
            Violation::FaultsNotIncreasing { index } => write!(f, "faults not strictly increasing at fault {index}"),
            Violation::HorizonBeforeFault => write!(f, "horizon precedes the last fault"),
        }
    }
}

/// Checks every instance and fault-sequence invariant and reports all
/// violations found. Batch and fault numbers in the report are 1-based.
pub fn validate_instance(inst: &Instance, faults: &FaultSequence) -> Result<(), Vec<Violation>> {
    let mut v = catalog_violations(inst.catalog.sizes());
    let k = inst.catalog.len();
    for (n, b) in inst.batches.iter().enumerate() {
        if b.size_index >= k {
            v.push(Violation::BadSizeIndex { batch: n + 1, index: b.size_index + 1 });
        }
        if b.release.is_negative() {
            v.push(Violation::NegativeRelease { batch: n + 1 });
        }
    }
    for (n, w) in inst.batches.windows(2).enumerate() {
        if w[1].release < w[0].release {
            v.push(Violation::BatchesUnsorted { batch: n + 2 });
        }
    }
    for (n, f) in faults.faults.iter().enumerate() {
        if f.is_negative() {
            v.push(Violation::NegativeFault { index: n + 1 });
        }
    }
    for (n, w) in faults.faults.windows(2).enumerate() {
        if w[1] <= w[0] {
            v.push(Violation::FaultsNotIncreasing { index: n + 2 });
        }
    }
    if let Some(last) = faults.faults.last() {
        if faults.horizon < *last {
            v.push(Violation::HorizonBeforeFault);
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Which sizes a load measure counts (0-based size index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeFilter {
    Exactly(usize),
    AtLeast(usize),
    LessThan(usize),
    All,
}

impl SizeFilter {
    pub fn matches(&self, size_index: usize) -> bool {
        match *self {
            SizeFilter::Exactly(i) => size_index == i,
            SizeFilter::AtLeast(i) => size_index >= i,
            SizeFilter::LessThan(i) => size_index < i,
            SizeFilter::All => true,
        }
    }
}

impl fmt::Display for SizeFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeFilter::Exactly(i) => write!(f, "={}", i + 1),
            SizeFilter::AtLeast(i) => write!(f, ">={}", i + 1),
            SizeFilter::LessThan(i) => write!(f, "<{}", i + 1),
            SizeFilter::All => write!(f, "all"),
        }
    }
}
