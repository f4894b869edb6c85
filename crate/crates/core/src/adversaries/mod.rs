//! Hard instances. Static generators emit a full scenario with the
//! adversary's declared schedule; adaptive strategies choose faults block by
//! block by watching the policy's fault-free continuation.

mod lb2;
mod lbphi;
mod scenarios;

pub use lb2::{lb2_strategy, Lb2Params, Lb2Strategy};
pub use lbphi::{lbphi_strategy, minimal_k, LbPhiParams, LbPhiStrategy};
pub use scenarios::{gen_below2, gen_div43, gen_mid24, gen_twosizes, GeneratedScenario};

use std::io::Write;

use crate::engine::{run_online, FaultSource};
use crate::model::{Instance, Recording, Trace};
use crate::numeric::GoldenNumber;
use crate::offline::{Assignment, OfflineSchedule};
use crate::policies::Policy;
use crate::Result;

/// One adversary decision; drain cases cover a run of consecutive blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseRecord {
    /// Case label such as `D3` or `F4`; `end` for the closing decision.
    pub case: &'static str,
    pub first_block: usize,
    pub blocks: usize,
    pub start: GoldenNumber,
    pub end: GoldenNumber,
    pub adv_gain: GoldenNumber,
}

/// An interactive fault source that also schedules its own packets.
pub trait AdversaryStrategy: FaultSource {
    fn instance(&self) -> &Instance;

    /// The speed the strategy was built against.
    fn speed(&self) -> &GoldenNumber;

    fn additive(&self) -> &GoldenNumber;

    fn declared_schedule(&self) -> &OfflineSchedule;

    fn case_log(&self) -> &[CaseRecord];

    fn warnings(&self) -> &[String] {
        &[]
    }
}

/// Result of running a policy against an adaptive strategy.
#[derive(Clone, Debug)]
pub struct LowerBoundOutcome {
    pub instance: Instance,
    pub trace: Trace,
    pub adv_schedule: OfflineSchedule,
    pub alg_gain: GoldenNumber,
    pub adv_gain: GoldenNumber,
    pub additive: GoldenNumber,
    pub cases: Vec<CaseRecord>,
}

impl LowerBoundOutcome {
    /// `L_ADV > L_ALG + A`, exactly.
    pub fn verdict(&self) -> bool {
        self.adv_gain > &self.alg_gain + &self.additive
    }

    /// CSV with columns `case,first_block,blocks,start,end,adv_gain,alg_gain`.
    pub fn write_cases_csv<W: Write>(&self, w: W, digits: u32) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["case", "first_block", "blocks", "start", "end", "adv_gain", "alg_gain"])?;
        for c in &self.cases {
            let alg: GoldenNumber =
                self.trace.block_loads.iter().skip(c.first_block).take(c.blocks).sum();
            out.write_record([
                c.case.to_string(),
                (c.first_block + 1).to_string(),
                c.blocks.to_string(),
                c.start.to_decimal(digits),
                c.end.to_decimal(digits),
                c.adv_gain.to_decimal(digits),
                alg.to_decimal(digits),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs `policy` at the strategy's speed against it.
pub fn run_lower_bound<S: AdversaryStrategy>(
    mut strategy: S,
    policy: &dyn Policy,
    recording: Recording,
) -> Result<LowerBoundOutcome> {
    let inst = strategy.instance().clone();
    let speed = strategy.speed().clone();
    let mut trace = run_online(policy, &inst, &mut strategy, &speed, recording)?;
    trace.warnings.extend(strategy.warnings().iter().cloned());
    let adv_schedule = strategy.declared_schedule().clone();
    Ok(LowerBoundOutcome {
        alg_gain: trace.total_load(),
        adv_gain: adv_schedule.value.clone(),
        additive: strategy.additive().clone(),
        cases: strategy.case_log().to_vec(),
        adv_schedule,
        trace,
        instance: inst,
    })
}

/// Declared-schedule and case bookkeeping shared by the adaptive strategies.
#[derive(Clone, Debug, Default)]
struct Ledger {
    schedule: OfflineSchedule,
    cases: Vec<CaseRecord>,
}

impl Ledger {
    /// Places `count` packets of one size back-to-back from `start`.
    fn pack(&mut self, size_index: usize, size: &GoldenNumber, count: u64, start: &GoldenNumber, block: usize) -> GoldenNumber {
        let mut cursor = start.clone();
        for _ in 0..count {
            let end = &cursor + size;
            self.schedule.assignments.push(Assignment { size_index, start: cursor, end: end.clone(), block_index: block });
            cursor = end;
        }
        let gain = size.mul_int(count as i64);
        self.schedule.value = &self.schedule.value + &gain;
        gain
    }

    fn log(&mut self, case: &'static str, block: usize, start: &GoldenNumber, end: &GoldenNumber, gain: GoldenNumber) {
        if let Some(last) = self.cases.last_mut() {
            if last.case == case && matches!(case, "D2" | "F2") && last.first_block + last.blocks == block {
                last.blocks += 1;
                last.end = end.clone();
                last.adv_gain = &last.adv_gain + &gain;
                return;
            }
        }
        self.cases.push(CaseRecord {
            case,
            first_block: block,
            blocks: 1,
            start: start.clone(),
            end: end.clone(),
            adv_gain: gain,
        });
    }

    fn log_end(&mut self, case: &'static str, block: usize, at: &GoldenNumber) {
        self.cases.push(CaseRecord {
            case,
            first_block: block,
            blocks: 0,
            start: at.clone(),
            end: at.clone(),
            adv_gain: GoldenNumber::zero(),
        });
    }
}
