use std::io::Write;

use super::critical::{critical_times_from, require_annotated, require_same_catalog, PendingProfile};
use super::CriticalTimes;
use crate::model::{sum_loads, Instance, SizeFilter, Trace, TransmissionRecord};
use crate::numeric::GoldenNumber;
use crate::offline::OfflineSchedule;
use crate::{Error, Result};

/// One audited inequality. Size indices are 1-based; `u, v` bound the
/// interval or transmission the check is about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditCheck {
    pub check: &'static str,
    pub i: Option<usize>,
    pub u: GoldenNumber,
    pub v: GoldenNumber,
    pub lhs: GoldenNumber,
    pub rhs: GoldenNumber,
    /// `lhs − rhs`.
    pub slack: GoldenNumber,
    pub pass: bool,
}

impl AuditCheck {
    fn new(
        check: &'static str,
        i: Option<usize>,
        (u, v): (&GoldenNumber, &GoldenNumber),
        lhs: GoldenNumber,
        rhs: GoldenNumber,
        pass: impl FnOnce(&GoldenNumber, &GoldenNumber) -> bool,
    ) -> Self {
        let pass = pass(&lhs, &rhs);
        AuditCheck { check, i, u: u.clone(), v: v.clone(), slack: &lhs - &rhs, lhs, rhs, pass }
    }
}

pub fn violations(checks: &[AuditCheck]) -> Vec<&AuditCheck> {
    checks.iter().filter(|c| !c.pass).collect()
}

/// CSV with columns `check,i,u,v,lhs,rhs,slack,pass`.
pub fn write_audit_csv<W: Write>(checks: &[AuditCheck], w: W, digits: u32) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["check", "i", "u", "v", "lhs", "rhs", "slack", "pass"])?;
    for c in checks {
        out.write_record([
            c.check.to_string(),
            c.i.map(|i| i.to_string()).unwrap_or_default(),
            c.u.to_decimal(digits),
            c.v.to_decimal(digits),
            c.lhs.to_decimal(digits),
            c.rhs.to_decimal(digits),
            c.slack.to_decimal(digits),
            c.pass.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    /// Starts at `C_i`.
    Initial,
    /// Starts at a fault inside `(C_i, C_{i−1})`.
    Proper,
}

/// An i-segment `(u, v]`; `i` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub i: usize,
    pub kind: SegmentKind,
    pub u: GoldenNumber,
    pub v: GoldenNumber,
}

/// Cuts each `(C_i, C_{i−1}]` at the faults.
pub fn segments(ct: &CriticalTimes, faults: &crate::model::FaultSequence) -> Vec<Segment> {
    let mut out = Vec::new();
    for i in 1..=ct.k() {
        let (lo, hi) = (&ct.ordered[i], &ct.ordered[i - 1]);
        if lo >= hi {
            continue;
        }
        let v = faults.next_after(lo).min(hi.clone());
        out.push(Segment { i, kind: SegmentKind::Initial, u: lo.clone(), v });
        for f in faults.faults.iter().filter(|f| *f > lo && *f < hi) {
            let v = faults.next_after(f).min(hi.clone());
            out.push(Segment { i, kind: SegmentKind::Proper, u: f.clone(), v });
        }
    }
    out
}

fn alg_load(trace: &Trace, filter: SizeFilter, u: &GoldenNumber, v: &GoldenNumber) -> GoldenNumber {
    trace.completed_load(filter, u, v)
}

fn opt_load(opt: &OfflineSchedule, inst: &Instance, filter: SizeFilter, u: &GoldenNumber, v: &GoldenNumber) -> GoldenNumber {
    sum_loads(opt.assignments.iter().map(|a| (a.size_index, &a.end)), &inst.catalog, filter, u, v)
}

/// Per-segment checks: on proper segments
/// `(R − 1)·L_ALG((u,v]) + L_ALG(≥i,(u,v]) ≥ L_OPT(≥i,(u,v])`, on initial
/// segments `L_ALG(≥i,(u,v]) > s(v − u) − 4ℓ_k`.
pub fn segment_audit(
    alg_trace: &Trace,
    inst: &Instance,
    opt_schedule: &OfflineSchedule,
    s: &GoldenNumber,
    r: &GoldenNumber,
) -> Result<Vec<AuditCheck>> {
    require_same_catalog(alg_trace, inst)?;
    if *s != alg_trace.speed {
        return Err(Error::Precondition(format!("trace ran at speed {}, audit asked for {s}", alg_trace.speed)));
    }
    if let Some(a) = opt_schedule.assignments.iter().find(|a| a.size_index >= inst.catalog.len()) {
        return Err(Error::Precondition(format!("schedule uses size index {} outside the catalog", a.size_index + 1)));
    }
    let profile = PendingProfile::new(alg_trace, inst)?;
    let ct = critical_times_from(alg_trace, &profile);
    let four_lk = inst.catalog.largest().mul_int(4);
    let r_minus = r - &GoldenNumber::one();
    let mut out = Vec::new();
    for seg in segments(&ct, &alg_trace.faults) {
        let idx = seg.i - 1;
        let span = (&seg.u, &seg.v);
        let alg_hi = alg_load(alg_trace, SizeFilter::AtLeast(idx), &seg.u, &seg.v);
        match seg.kind {
            SegmentKind::Initial => {
                let rhs = &(s * &(&seg.v - &seg.u)) - &four_lk;
                out.push(AuditCheck::new("segment_initial", Some(seg.i), span, alg_hi, rhs, |l, r| l > r));
            }
            SegmentKind::Proper => {
                let all = alg_load(alg_trace, SizeFilter::All, &seg.u, &seg.v);
                let lhs = &(&r_minus * &all) + &alg_hi;
                let rhs = opt_load(opt_schedule, inst, SizeFilter::AtLeast(idx), &seg.u, &seg.v);
                out.push(AuditCheck::new("segment_proper", Some(seg.i), span, lhs, rhs, |l, r| l >= r));
            }
        }
    }
    Ok(out)
}

/// Records grouped by enclosing phase, in time order.
fn phases(records: &[TransmissionRecord]) -> Vec<&[TransmissionRecord]> {
    let mut out = Vec::new();
    let mut begin = 0;
    for j in 1..=records.len() {
        if j == records.len() || records[j].phase_start != records[begin].phase_start {
            if j > begin {
                out.push(&records[begin..j]);
            }
            begin = j;
        }
    }
    out
}

/// Trace-level checks:
/// - `structure_order`, `structure_duration`, `structure_fault`: records do
///   not overlap, completed ones take `ℓ/s` without a fault strictly inside,
///   jammed ones end at the fault that hit them;
/// - `non_idle`: nothing is pending while the channel idles;
/// - `phase_half_load`: a phase whose first packet completed carries more
///   than `s·(t_E − t_B)/2`;
/// - `main_phase_persists`, `main_small_load` (MAIN only): while some `ℓ_i`
///   stays pending from a phase start `u` up to `v` without a fault, the
///   phase does not end in `(u, v)` and `L(<i,(u,v]) < ℓ_i + ℓ_{i−1}`;
/// - `div_divisible` (DIV only): `ℓ_i | rel(t)` at each start and completion.
pub fn lemma_audit(alg_trace: &Trace, inst: &Instance) -> Result<Vec<AuditCheck>> {
    require_annotated(alg_trace)?;
    require_same_catalog(alg_trace, inst)?;
    let tr = alg_trace;
    let cat = &tr.catalog;
    let s = &tr.speed;
    let zero = GoldenNumber::zero();
    let mut out = Vec::new();

    let mut prev_end = zero.clone();
    for r in &tr.records {
        let span = (&r.start, &r.end);
        let i = Some(r.size_index + 1);
        out.push(AuditCheck::new("structure_order", i, span, r.start.clone(), prev_end.clone(), |l, r| l >= r));
        prev_end = r.end.clone();
        let need = cat.size(r.size_index) / s;
        let took = &r.end - &r.start;
        let next = tr.faults.next_after(&r.start);
        if r.completed {
            out.push(AuditCheck::new("structure_duration", i, span, took, need, |l, r| l == r));
            out.push(AuditCheck::new("structure_fault", i, span, next, r.end.clone(), |l, r| l >= r));
        } else {
            out.push(AuditCheck::new("structure_duration", i, span, took, need, |l, r| l < r));
            out.push(AuditCheck::new("structure_fault", i, span, next, r.end.clone(), |l, r| l == r));
        }
    }

    let profile = PendingProfile::new(tr, inst)?;
    for j in 0..profile.times.len() {
        let Some(end) = profile.step_end(j) else { break };
        let t = &profile.times[j];
        if profile.running[j] == 0 && *t < tr.faults.horizon {
            let load: GoldenNumber =
                profile.pending[j].iter().enumerate().map(|(i, &c)| cat.size(i).mul_int(c)).sum();
            out.push(AuditCheck::new("non_idle", None, (t, end), load, zero.clone(), |l, r| l == r));
        }
    }

    let grouped = phases(&tr.records);
    let phased = matches!(tr.policy.as_str(), "main" | "div");
    for ph in grouped.iter().filter(|_| phased) {
        let first = &ph[0];
        if !first.completed {
            continue;
        }
        let tb = &first.phase_start;
        let te = &ph[ph.len() - 1].end;
        let load: GoldenNumber = ph.iter().filter(|r| r.completed).map(|r| cat.size(r.size_index).clone()).sum();
        let rhs = &(s * &(te - tb)) / &GoldenNumber::from_int(2);
        out.push(AuditCheck::new("phase_half_load", None, (tb, te), load, rhs, |l, r| l > r));
    }

    match tr.policy.as_str() {
        "main" => {
            for ph in &grouped {
                let u = &ph[0].phase_start;
                let te = &ph[ph.len() - 1].end;
                let Some(j0) = profile.step_at(u) else { continue };
                let fault = tr.faults.next_after(u);
                for i in 0..cat.len() {
                    if profile.pending[j0][i] == 0 {
                        continue;
                    }
                    let mut j = j0;
                    while profile.pending[j][i] > 0 && profile.step_end(j).is_some_and(|e| *e < fault) {
                        j += 1;
                    }
                    let v = if profile.pending[j][i] > 0 {
                        profile.step_end(j).map_or(fault.clone(), |e| e.min(&fault).clone())
                    } else {
                        profile.times[j].clone()
                    };
                    if v <= *u {
                        continue;
                    }
                    let idx = Some(i + 1);
                    out.push(AuditCheck::new("main_phase_persists", idx, (u, &v), te.clone(), v.clone(), |l, r| l >= r));
                    let small = tr.completed_load(SizeFilter::LessThan(i), u, &v);
                    let bound = cat.size(i) + &cat.smaller(i);
                    out.push(AuditCheck::new("main_small_load", idx, (u, &v), small, bound, |l, r| l < r));
                }
            }
        }
        "div" => {
            for r in &tr.records {
                let size = cat.size(r.size_index);
                let i = Some(r.size_index + 1);
                let rel = s * &(&r.start - &r.phase_start);
                out.push(AuditCheck::new("div_divisible", i, (&r.start, &r.start), rel, size.clone(), |l, r| {
                    l.is_multiple_of(r)
                }));
                if r.completed {
                    let rel = s * &(&r.end - &r.phase_start);
                    out.push(AuditCheck::new("div_divisible", i, (&r.end, &r.end), rel, size.clone(), |l, r| {
                        l.is_multiple_of(r)
                    }));
                }
            }
        }
        _ => {}
    }
    Ok(out)
}
