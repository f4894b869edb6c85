//! Static constructions: a fixed instance, fault sequence and the
//! adversary's speed-1 schedule.
//!
//! Where the algorithm must open every phase with a size-1 packet, one extra
//! size-1 packet is released at 0 so that the last phase behaves like the
//! others; the adversary completes it in the unit-fault tail.

use crate::model::{FaultSequence, Instance, PacketBatch, SizeCatalog};
use crate::numeric::GoldenNumber;
use crate::offline::{Assignment, OfflineSchedule};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct GeneratedScenario {
    pub name: &'static str,
    pub instance: Instance,
    pub faults: FaultSequence,
    pub declared_adv_schedule: OfflineSchedule,
    /// Number of long phases before the unit-fault tail.
    pub phases: usize,
    pub claimed_alg_per_phase: GoldenNumber,
    pub claimed_adv_per_phase: GoldenNumber,
    pub claimed_alg_gain: GoldenNumber,
    pub claimed_adv_gain: GoldenNumber,
}

fn int(n: i64) -> GoldenNumber {
    GoldenNumber::from_int(n)
}

fn require(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what()))
    }
}

fn positive_integer(x: &GoldenNumber, name: &str) -> Result<i64> {
    match x.to_i64() {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(Error::Precondition(format!("{name} = {x} must be a positive integer"))),
    }
}

/// Builds faults and the declared schedule as blocks are appended.
struct Builder {
    faults: Vec<GoldenNumber>,
    assignments: Vec<Assignment>,
    now: GoldenNumber,
}

impl Builder {
    fn new() -> Self {
        Builder { faults: Vec::new(), assignments: Vec::new(), now: GoldenNumber::zero() }
    }

    /// Closes a block of length `len`; the adversary runs `packet` from its start.
    fn block(&mut self, len: &GoldenNumber, packet: Option<(usize, &GoldenNumber)>) {
        let start = self.now.clone();
        self.now = &start + len;
        if let Some((size_index, size)) = packet {
            let end = &start + size;
            self.assignments.push(Assignment { size_index, start, end, block_index: self.faults.len() });
        }
        self.faults.push(self.now.clone());
    }

    /// Unit-length blocks, each carrying one size-1 packet.
    fn unit_tail(&mut self, size_index: usize, count: u64) {
        let one = int(1);
        for _ in 0..count {
            self.block(&one, Some((size_index, &one)));
        }
    }

    fn finish(mut self, name: &'static str, inst: Instance, phases: usize, alg: GoldenNumber, adv: GoldenNumber) -> GeneratedScenario {
        let horizon = self.faults.pop().unwrap_or_default();
        let faults = FaultSequence::new(self.faults, horizon);
        let sched = OfflineSchedule::from_assignments(self.assignments, &inst);
        let n = int(phases as i64);
        GeneratedScenario {
            name,
            claimed_alg_gain: &alg * &n,
            claimed_adv_gain: sched.value.clone(),
            claimed_alg_per_phase: alg,
            claimed_adv_per_phase: adv,
            instance: inst,
            faults,
            declared_adv_schedule: sched,
            phases,
        }
    }
}

/// Ratio `1 + 2/s − ε/2` for `s ∈ [1, 2)`: phases of length `4/s − ε` in
/// which the algorithm gets two 1s and loses a 2.
pub fn gen_below2(s: &GoldenNumber, eps: &GoldenNumber, n: usize) -> Result<GeneratedScenario> {
    require(*s >= int(1) && *s < int(2), || format!("speed {s} outside [1, 2)"))?;
    require(eps.is_positive(), || format!("ε = {eps} must be positive"))?;
    require(n >= 1, || "at least one phase".to_string())?;
    let big = &(&int(4) / s) - eps;
    require(big > int(2), || format!("4/s − ε = {big} must exceed 2"))?;

    let cat = SizeCatalog::new(vec![int(1), int(2), big.clone()])?;
    let nn = n as u64;
    let inst = Instance::new(
        cat,
        vec![
            PacketBatch::new(0, GoldenNumber::zero(), 2 * nn),
            PacketBatch::new(1, GoldenNumber::zero(), 1),
            PacketBatch::new(2, GoldenNumber::zero(), nn),
        ],
    );
    let mut b = Builder::new();
    for _ in 0..n {
        b.block(&big, Some((2, &big)));
    }
    b.unit_tail(0, 2 * nn);
    let adv = &int(2) + &big;
    Ok(b.finish("below2", inst, n, int(2), adv))
}

/// Ratio `(2y − 1)/(ys/2 + 1)` for `s ∈ [2, 4)` with sizes `1, x, y, z`,
/// `x = y(s − 2)/2 + 2`, `z = x + y − 1`. Blocks have length `y`; the
/// algorithm's `z` would end at `y + 2/s`.
pub fn gen_mid24(s: &GoldenNumber, y: &GoldenNumber, n: usize) -> Result<GeneratedScenario> {
    require(*s >= int(2) && *s < int(4), || format!("speed {s} outside [2, 4)"))?;
    let yi = positive_integer(y, "y")?;
    require(n >= 1, || "at least one phase".to_string())?;
    let one = int(1);
    let x = &(&(y * &(s - &int(2))) / &int(2)) + &int(2);
    require(x <= y - &one, || format!("x = {x} exceeds y − 1 = {}; choose a larger y", y - &one))?;
    let z = &(&x + y) - &one;

    let cat = SizeCatalog::new(vec![one.clone(), x.clone(), y.clone(), z])?;
    let nn = n as u64;
    let ones = nn * (yi as u64 - 1) + 1;
    let x_offset = &(y - &one) / s;
    let mut batches = vec![
        PacketBatch::new(0, GoldenNumber::zero(), ones),
        PacketBatch::new(2, GoldenNumber::zero(), nn),
        PacketBatch::new(3, GoldenNumber::zero(), 1),
    ];
    for p in 0..n {
        batches.push(PacketBatch::new(1, &(y * &int(p as i64)) + &x_offset, 1));
    }
    let inst = Instance::new(cat, batches);
    let mut b = Builder::new();
    for _ in 0..n {
        b.block(y, Some((2, y)));
    }
    b.unit_tail(0, ones);
    let alg = &(y - &one) + &x;
    let adv = &(y + y) - &one;
    Ok(b.finish("mid24", inst, n, alg, adv))
}

/// Divisible sizes `1, ℓ, 2ℓ` with faults every `2ℓ`; the `ℓ` of each phase
/// is released when the algorithm, at speed `s`, finishes that phase's 1s.
/// The algorithm completes the `2ℓ` only at `s ≥ 2.5 − 1/(2ℓ)`.
pub fn gen_div43(s: &GoldenNumber, l: &GoldenNumber, n: usize) -> Result<GeneratedScenario> {
    let li = positive_integer(l, "ℓ")?;
    require(li >= 2, || format!("ℓ = {l} must be at least 2"))?;
    require(n >= 1, || "at least one phase".to_string())?;
    let one = int(1);
    let two_l = l + l;
    let gain3 = &(l * &int(3)) - &one;
    let gain5 = &(l * &int(5)) - &one;
    // the ℓ must finish inside the block
    require(&gain3 / s <= two_l, || format!("speed {s} too low to finish the ℓ packet; need s ≥ (3ℓ − 1)/(2ℓ)"))?;

    let cat = SizeCatalog::new(vec![one.clone(), l.clone(), two_l.clone()])?;
    let nn = n as u64;
    let ones = nn * (2 * li as u64 - 1) + 1;
    let offset = &(&two_l - &one) / s;
    let mut batches =
        vec![PacketBatch::new(0, GoldenNumber::zero(), ones), PacketBatch::new(2, GoldenNumber::zero(), nn)];
    for p in 0..n {
        batches.push(PacketBatch::new(1, &(&two_l * &int(p as i64)) + &offset, 1));
    }
    let inst = Instance::new(cat, batches);
    let mut b = Builder::new();
    for _ in 0..n {
        b.block(&two_l, Some((2, &two_l)));
    }
    b.unit_tail(0, ones);
    let alg = if &gain5 / s <= two_l { gain5 } else { gain3 };
    let adv = &(&two_l + &two_l) - &one;
    Ok(b.finish("div43", inst, n, alg, adv))
}

/// Ratio 2 for `s < 2` with sizes `1` and `ℓ`: each phase releases one `ℓ`
/// and `ℓ` 1s and ends at `(2ℓ − ε)/s`.
pub fn gen_twosizes(s: &GoldenNumber, eps: &GoldenNumber, l: &GoldenNumber, n: usize) -> Result<GeneratedScenario> {
    require(*s >= int(1) && *s < int(2), || format!("speed {s} outside [1, 2)"))?;
    require(eps.is_positive(), || format!("ε = {eps} must be positive"))?;
    let li = positive_integer(l, "ℓ")?;
    require(n >= 1, || "at least one phase".to_string())?;
    let bound = (s + eps).max(eps / &(&int(2) - s));
    require(*l >= bound, || format!("ℓ = {l} below max(s + ε, ε/(2 − s)) = {bound}"))?;
    require(li >= 2, || format!("ℓ = {l} must be at least 2"))?;

    let one = int(1);
    let cat = SizeCatalog::new(vec![one.clone(), l.clone()])?;
    let len = &(&(l + l) - eps) / s;
    let mut batches = Vec::new();
    for p in 0..n {
        let t = &len * &int(p as i64);
        batches.push(PacketBatch::new(0, t.clone(), li as u64));
        batches.push(PacketBatch::new(1, t, 1));
    }
    let inst = Instance::new(cat, batches);
    let mut b = Builder::new();
    for _ in 0..n {
        b.block(&len, Some((1, l)));
    }
    b.unit_tail(0, n as u64 * li as u64);
    Ok(b.finish("twosizes", inst, n, l.clone(), l + l))
}
