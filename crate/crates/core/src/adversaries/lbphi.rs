//! Adaptive adversary with sizes `ε` and `φ^{i−1}` for `i = 1..k`, all
//! released at 0, against any deterministic policy at speed `s < φ + 1`.
//! Catalog index `i` holds `ℓ_i`, index 0 holds `ε`.

use num_traits::ToPrimitive;

use super::{AdversaryStrategy, CaseRecord, Ledger};
use crate::engine::{BlockView, FaultDecision, FaultSource, RunAhead};
use crate::model::{Instance, PacketBatch, SizeCatalog};
use crate::numeric::{phi_pow, GoldenNumber};
use crate::offline::OfflineSchedule;
use crate::{Error, Result};

const MAX_K: usize = 64;

#[derive(Clone, Debug)]
pub struct LbPhiParams {
    pub s: GoldenNumber,
    pub eps: GoldenNumber,
    /// Number of non-ε sizes; `None` picks the smallest valid one.
    pub k: Option<usize>,
    pub a: GoldenNumber,
}

/// `φ + 1 − 1/φ^{k−1}`.
fn speed_cap(k: usize) -> GoldenNumber {
    let phi = GoldenNumber::phi();
    let tail = phi_pow(k as u32 - 1).recip().expect("nonzero");
    &(&phi + &GoldenNumber::one()) - &tail
}

/// Smallest `k ≥ 1` with `s < φ + 1 − 1/φ^{k−1}`.
pub fn minimal_k(s: &GoldenNumber) -> Result<usize> {
    let limit = &GoldenNumber::phi() + &GoldenNumber::one();
    if *s >= limit {
        return Err(Error::Precondition(format!("speed {s} is not below φ + 1")));
    }
    (1..=MAX_K)
        .find(|&k| *s < speed_cap(k))
        .ok_or_else(|| Error::Precondition(format!("speed {s} needs more than {MAX_K} sizes")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Main,
    /// Strategy FINISH; `long` is the smallest exhausted index.
    Finish { long: usize },
    Drain,
    Done,
}

#[derive(Clone, Debug)]
pub struct LbPhiStrategy {
    p: LbPhiParams,
    pub k: usize,
    /// Initial counts `N_0..N_k`.
    pub counts: Vec<u64>,
    inst: Instance,
    pending: Vec<u64>,
    mode: Mode,
    ledger: Ledger,
    /// Longest block produced so far.
    pub max_block: GoldenNumber,
}

fn minimal_above(x: &GoldenNumber, what: &str) -> Result<u64> {
    // smallest integer strictly above x
    let n: num_bigint::BigInt = x.floor() + 1;
    n.to_u64()
        .filter(|&c| c >= 1)
        .ok_or_else(|| Error::Precondition(format!("{what} = {n} does not fit a packet count")))
}

pub fn lbphi_strategy(p: LbPhiParams) -> Result<LbPhiStrategy> {
    let one = GoldenNumber::one();
    if p.s < one {
        return Err(Error::Precondition(format!("speed {} is below 1", p.s)));
    }
    if !p.eps.is_positive() || p.eps >= one {
        return Err(Error::Precondition(format!("ε = {} outside (0, 1)", p.eps)));
    }
    if p.a.is_negative() {
        return Err(Error::Precondition(format!("A = {} must be non-negative", p.a)));
    }
    let k = match p.k {
        Some(k) => {
            if k == 0 || k > MAX_K {
                return Err(Error::Precondition(format!("k = {k} outside 1..={MAX_K}")));
            }
            let cap = speed_cap(k);
            if p.s >= cap {
                return Err(Error::Precondition(format!(
                    "s < φ + 1 − 1/φ^(k−1) fails: s = {}, bound = {} for k = {k}",
                    p.s,
                    cap.to_decimal(6)
                )));
            }
            k
        }
        None => minimal_k(&p.s)?,
    };

    let mut sizes = vec![p.eps.clone()];
    sizes.extend((0..k).map(|i| phi_pow(i as u32)));
    let cat = SizeCatalog::new(sizes)?;
    let lk = cat.size(k).clone();
    let phi = GoldenNumber::phi();
    let factor = &(&phi * &p.s) * &lk;

    let mut counts = vec![0u64; k + 1];
    counts[k] = minimal_above(&(&p.a / &lk), "N_k")?;
    let mut above: u64 = counts[k];
    for i in (1..k).rev() {
        let bound = &(&factor * &GoldenNumber::from_int(above as i64)) + &(&p.a / cat.size(i));
        counts[i] = minimal_above(&bound, &format!("N_{i}"))?;
        above += counts[i];
    }
    let eps2 = &p.eps * &p.eps;
    let lead = &(&(&p.a + &one) + &(&phi * &lk)) / &eps2;
    counts[0] = minimal_above(&(&lead * &(&factor * &GoldenNumber::from_int(above as i64))), "N_0")?;

    let inst = Instance::new(
        cat,
        counts.iter().enumerate().map(|(i, &c)| PacketBatch::new(i, GoldenNumber::zero(), c)).collect(),
    );
    Ok(LbPhiStrategy {
        p,
        k,
        pending: counts.clone(),
        counts,
        inst,
        mode: Mode::Main,
        ledger: Ledger::default(),
        max_block: GoldenNumber::zero(),
    })
}

/// `a < b` with `None` read as ∞; two infinities compare equal.
fn before(a: Option<&GoldenNumber>, b: Option<&GoldenNumber>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

impl LbPhiStrategy {
    fn size(&self, i: usize) -> &GoldenNumber {
        self.inst.catalog.size(i)
    }

    fn lk(&self) -> &GoldenNumber {
        self.size(self.k)
    }

    /// `x < t + ℓ_i/(φs)`.
    fn too_early(&self, x: Option<&GoldenNumber>, t: &GoldenNumber, i: usize) -> bool {
        let phi = GoldenNumber::phi();
        let bound = t + &(self.size(i) / &(&phi * &self.p.s));
        before(x, Some(&bound))
    }

    fn close(&mut self, case: &'static str, block: usize, t: &GoldenNumber, f: GoldenNumber, gain: GoldenNumber) -> Result<FaultDecision> {
        if !gain.is_positive() {
            return Err(Error::Contract(format!("case {case} at {t} completes nothing for the adversary")));
        }
        let len = &f - t;
        if len > self.max_block {
            self.max_block = len;
        }
        self.ledger.log(case, block, t, &f, gain);
        Ok(FaultDecision::NextFault(f))
    }

    /// Fault just before the first too-early start of size `ℓ_i` completes;
    /// the adversary fills the block with ε's.
    fn eps_block(&mut self, case: &'static str, block: usize, t: &GoldenNumber, tau: &GoldenNumber, i: usize) -> Result<FaultDecision> {
        let f = &(tau + &(self.size(i) / &self.p.s)) - &self.p.eps;
        let room = (&(&f - t) / &self.p.eps).floor_u64().unwrap_or(0);
        let count = room.min(self.pending[0]);
        let eps = self.p.eps.clone();
        let gain = self.ledger.pack(0, &eps, count, t, block);
        self.pending[0] -= count;
        self.close(case, block, t, f, gain)
    }

    /// One packet of size `ℓ_i` from `t`, fault at `t + len`.
    fn one_packet(&mut self, case: &'static str, block: usize, t: &GoldenNumber, i: usize, len: GoldenNumber) -> Result<FaultDecision> {
        let size = self.size(i).clone();
        let gain = self.ledger.pack(i, &size, 1, t, block);
        self.pending[i] -= 1;
        let f = t + &len;
        self.close(case, block, t, f, gain)
    }

    fn end(&mut self, case: &'static str, block: usize, t: &GoldenNumber) -> Result<FaultDecision> {
        self.mode = Mode::Done;
        self.ledger.log_end(case, block, t);
        Ok(FaultDecision::EndOfSchedule)
    }

    fn ahead(&self, view: &BlockView<'_>) -> RunAhead {
        // every threshold and fault of the block lies below t + 2φℓ_k
        let reach = &(&GoldenNumber::phi() * self.lk()) * &GoldenNumber::from_int(2);
        view.run_ahead(Some(&(view.now() + &reach)))
    }

    fn main_loop(&mut self, view: &BlockView<'_>, t: &GoldenNumber, block: usize) -> Result<FaultDecision> {
        let k = self.k;
        // B1
        let need = &(&GoldenNumber::phi() * self.lk()) / &self.p.eps;
        if GoldenNumber::from_int(self.pending[0] as i64) < need {
            return self.end("B1", block, t);
        }
        // B2
        if let Some(long) = (1..=k).find(|&i| self.pending[i] == 0) {
            self.mode = Mode::Finish { long };
            return self.finish(view, t, block, long);
        }
        let ra = self.ahead(view);
        // B3
        if self.too_early(ra.tau(1), t, 1) {
            let tau = ra.tau(1).expect("finite").clone();
            return self.eps_block("B3", block, t, &tau, 1);
        }
        // B4
        if k >= 2 && self.too_early(ra.tau_at_least(2), t, 2) {
            let tau = ra.tau_at_least(2).expect("finite").clone();
            return self.eps_block("B4", block, t, &tau, 2);
        }
        // B5
        if let Some(i) = (1..k).find(|&i| before(ra.tau_at_least(i + 1), ra.tau(i))) {
            let len = self.size(i).clone();
            return self.one_packet("B5", block, t, i, len);
        }
        // B6
        let len = self.lk().clone();
        self.one_packet("B6", block, t, k, len)
    }

    fn finish(&mut self, view: &BlockView<'_>, t: &GoldenNumber, block: usize, long: usize) -> Result<FaultDecision> {
        // F1
        let supply = self.size(0).mul_int(self.pending[0] as i64);
        if supply < &GoldenNumber::phi() * self.lk() {
            return self.end("F1", block, t);
        }
        // F2
        let Some(short) = (1..long).rev().find(|&j| self.pending[j] > 0) else {
            self.mode = Mode::Drain;
            return self.drain(t, block);
        };
        let ra = self.ahead(view);
        let tau = ra.tau_at_least(long);
        // F3
        if self.too_early(tau, t, long) {
            let tau = tau.expect("finite").clone();
            return self.eps_block("F3", block, t, &tau, long);
        }
        // F4
        let len = self.size(long - 1).clone();
        self.one_packet("F4", block, t, short, len)
    }

    fn drain(&mut self, t: &GoldenNumber, block: usize) -> Result<FaultDecision> {
        if self.pending[0] == 0 {
            return self.end("F2", block, t);
        }
        let eps = self.p.eps.clone();
        self.one_packet("F2", block, t, 0, eps)
    }
}

impl FaultSource for LbPhiStrategy {
    fn next_fault(&mut self, view: &BlockView<'_>) -> Result<FaultDecision> {
        let t = view.now().clone();
        let block = view.block_index;
        match self.mode {
            Mode::Main => self.main_loop(view, &t, block),
            Mode::Finish { long } => self.finish(view, &t, block, long),
            Mode::Drain => self.drain(&t, block),
            Mode::Done => Ok(FaultDecision::EndOfSchedule),
        }
    }
}

impl AdversaryStrategy for LbPhiStrategy {
    fn instance(&self) -> &Instance {
        &self.inst
    }

    fn speed(&self) -> &GoldenNumber {
        &self.p.s
    }

    fn additive(&self) -> &GoldenNumber {
        &self.p.a
    }

    fn declared_schedule(&self) -> &OfflineSchedule {
        &self.ledger.schedule
    }

    fn case_log(&self) -> &[CaseRecord] {
        &self.ledger.cases
    }
}
