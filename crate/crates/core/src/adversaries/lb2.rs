//! Adaptive adversary for two sizes `1` and `ℓ`, all released at 0, against
//! any deterministic policy at speed `s < 2`.

use num_traits::ToPrimitive;

use super::{AdversaryStrategy, CaseRecord, Ledger};
use crate::engine::{BlockView, FaultDecision, FaultSource};
use crate::model::{Instance, PacketBatch, SizeCatalog};
use crate::numeric::GoldenNumber;
use crate::offline::OfflineSchedule;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct Lb2Params {
    pub l: GoldenNumber,
    pub a: GoldenNumber,
    pub s: GoldenNumber,
    /// Gap left before `τ + ℓ/s` in case D4.
    pub eps: GoldenNumber,
}

impl Lb2Params {
    pub fn new(l: GoldenNumber, a: GoldenNumber, s: GoldenNumber) -> Self {
        Lb2Params { l, a, s, eps: GoldenNumber::ratio(1, 100) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Main,
    Drain,
    Done,
}

#[derive(Clone, Debug)]
pub struct Lb2Strategy {
    p: Lb2Params,
    inst: Instance,
    pub n0: u64,
    pub n1: u64,
    /// Packets the adversary has not completed, per size.
    pending: [u64; 2],
    mode: Mode,
    ledger: Ledger,
    warnings: Vec<String>,
}

fn to_count(x: num_bigint::BigInt, what: &str) -> Result<u64> {
    x.to_u64().ok_or_else(|| Error::Precondition(format!("{what} = {x} does not fit a packet count")))
}

pub fn lb2_strategy(p: Lb2Params) -> Result<Lb2Strategy> {
    let one = GoldenNumber::one();
    let two = GoldenNumber::from_int(2);
    if p.s < one || p.s >= two {
        return Err(Error::Precondition(format!("speed {} outside [1, 2)", p.s)));
    }
    if p.l <= one {
        return Err(Error::Precondition(format!("ℓ = {} must exceed 1", p.l)));
    }
    if p.a.is_negative() {
        return Err(Error::Precondition(format!("A = {} must be non-negative", p.a)));
    }
    if !p.eps.is_positive() || p.eps >= one {
        return Err(Error::Precondition(format!("ε = {} outside (0, 1)", p.eps)));
    }
    let mut warnings = Vec::new();
    let threshold = &(&two * &p.s) / &(&two - &p.s);
    if p.l <= threshold {
        warnings.push(format!("ℓ = {} does not exceed 2s/(2 − s) = {}; the guarantee is not covered", p.l, threshold));
    }
    let n1 = to_count((&p.a / &p.l).ceil(), "N_1")? + 1;
    let inner = &(&(&GoldenNumber::from_int(n1 as i64) * &(&p.s - &one)) * &p.l) + &(&p.a + &one);
    let n0 = to_count((&(&(&two * &p.l) / &p.s) * &inner).ceil(), "N_0")?;
    let cat = SizeCatalog::new(vec![one, p.l.clone()])?;
    let inst = Instance::new(
        cat,
        vec![PacketBatch::new(0, GoldenNumber::zero(), n0), PacketBatch::new(1, GoldenNumber::zero(), n1)],
    );
    Ok(Lb2Strategy { p, inst, n0, n1, pending: [n0, n1], mode: Mode::Main, ledger: Ledger::default(), warnings })
}

impl Lb2Strategy {
    fn drain(&mut self, t: &GoldenNumber, block: usize) -> FaultDecision {
        if self.pending[0] == 0 {
            self.mode = Mode::Done;
            self.ledger.log_end("D2", block, t);
            return FaultDecision::EndOfSchedule;
        }
        let one = GoldenNumber::one();
        let gain = self.ledger.pack(0, &one, 1, t, block);
        self.pending[0] -= 1;
        let f = t + &one;
        self.ledger.log("D2", block, t, &f, gain);
        FaultDecision::NextFault(f)
    }
}

impl FaultSource for Lb2Strategy {
    fn next_fault(&mut self, view: &BlockView<'_>) -> Result<FaultDecision> {
        let t = view.now().clone();
        let block = view.block_index;
        match self.mode {
            Mode::Done => return Ok(FaultDecision::EndOfSchedule),
            Mode::Drain => return Ok(self.drain(&t, block)),
            Mode::Main => {}
        }
        let l = self.p.l.clone();
        let ls = &l / &self.p.s;

        // D1
        if GoldenNumber::from_int(self.pending[0] as i64) < &(&l + &l) / &self.p.s {
            self.mode = Mode::Done;
            self.ledger.log_end("D1", block, &t);
            return Ok(FaultDecision::EndOfSchedule);
        }
        // D2
        if self.pending[1] == 0 {
            self.mode = Mode::Drain;
            return Ok(self.drain(&t, block));
        }
        // τ only matters up to t + ℓ/s − 2 < t + ℓ
        let limit = &t + &(&l + &l);
        let ahead = view.run_ahead(Some(&limit));
        let late = &(&t + &ls) - &GoldenNumber::from_int(2);
        match ahead.tau(1) {
            // D3
            None => {}
            Some(tau) if *tau >= late => {}
            // D4
            Some(tau) => {
                let f = &(tau + &ls) - &self.p.eps;
                let room = (&f - &t).floor_u64().unwrap_or(0);
                let count = room.min(self.pending[0]);
                if count == 0 {
                    return Err(Error::Contract(format!("case D4 at {t} leaves no room for a size-1 packet")));
                }
                let gain = self.ledger.pack(0, &GoldenNumber::one(), count, &t, block);
                self.pending[0] -= count;
                self.ledger.log("D4", block, &t, &f, gain);
                return Ok(FaultDecision::NextFault(f));
            }
        }
        let f = &t + &l;
        let gain = self.ledger.pack(1, &l, 1, &t, block);
        self.pending[1] -= 1;
        self.ledger.log("D3", block, &t, &f, gain);
        Ok(FaultDecision::NextFault(f))
    }
}

impl AdversaryStrategy for Lb2Strategy {
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

    fn warnings(&self) -> &[String] {
        &self.warnings
    }
}
