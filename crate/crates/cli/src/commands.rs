use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use jamsim::adversaries::run_lower_bound;
use jamsim::analysis::{lemma_audit, ratio_report, rs_bound, segment_audit, violations, write_audit_csv, AuditCheck};
use jamsim::engine::run_static;
use jamsim::fuzz::{fuzz_case, fuzz_speed, FuzzConfig, SizeFamily};
use jamsim::model::{write_instance, Recording};
use jamsim::offline::{opt_bruteforce, verify_schedule, MAX_BLOCKS, MAX_PACKETS};
use jamsim::{FaultSequence, GoldenNumber, Instance, PacketBatch, Policy, PolicyKind, SizeCatalog};

use crate::scenario::{ScenarioName, ScenarioParams};
use crate::{parse_g, AuditArgs, ExportArgs, LowerboundArgs, OptArgs, SimulateArgs, SweepArgs};

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn int(n: i64) -> GoldenNumber {
    GoldenNumber::from_int(n)
}

fn fits_bruteforce(inst: &Instance, faults: &FaultSequence) -> bool {
    inst.packet_count() <= MAX_PACKETS && faults.blocks().len() <= MAX_BLOCKS
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn parse_additive(text: &str, catalog: &SizeCatalog) -> Result<GoldenNumber> {
    if text == "6kl" {
        return Ok(catalog.largest().mul_int(6 * catalog.len() as i64));
    }
    parse_g(text).map_err(anyhow::Error::msg).context("parsing --additive")
}

pub fn simulate(a: SimulateArgs, d: u32) -> Result<bool> {
    let src = a.source.load(&a.speed)?;
    if let Some(sched) = &src.declared {
        if let Err(v) = verify_schedule(sched, &src.instance, &src.faults, &int(1)) {
            bail!("declared schedule of {} is infeasible: {v:?}", src.name);
        }
    }
    let tr = run_static(&a.policy, &src.instance, &src.faults, &a.speed)?;
    warn_all(&tr.warnings);
    if let Some(path) = &a.out {
        tr.write_csv(sink(&a.out)?, d).with_context(|| format!("writing {}", path.display()))?;
    }

    let opt = match &src.declared {
        Some(s) => Some((s.value.clone(), "declared")),
        None if fits_bruteforce(&src.instance, &src.faults) => {
            Some((opt_bruteforce(&src.instance, &src.faults)?.value, "bruteforce"))
        }
        None => None,
    };
    let mut out = io::stdout().lock();
    writeln!(out, "source: {}", src.name)?;
    writeln!(out, "policy: {}", a.policy.name())?;
    writeln!(out, "speed: {}", a.speed)?;
    writeln!(out, "alg_gain: {}", tr.total_load().to_decimal(d))?;
    match opt {
        Some((value, how)) => {
            let additive = parse_additive(&a.additive, &src.instance.catalog)?;
            let rep = ratio_report(&tr, &value, &additive);
            writeln!(out, "opt_gain: {} ({how})", rep.opt_gain.to_decimal(d))?;
            writeln!(out, "additive: {}", rep.additive.to_decimal(d))?;
            writeln!(out, "satisfied_r: {}", rep.satisfied_r.to_decimal(d))?;
            writeln!(out, "one_competitive: {}", rep.one_competitive)?;
        }
        None => writeln!(out, "opt_gain: unavailable (instance exceeds the exhaustive-search caps)")?,
    }
    Ok(true)
}

/// `start:stop:step` or `s1,s2,...`.
fn parse_grid(text: &str) -> Result<Vec<GoldenNumber>> {
    let parse = |t: &str| parse_g(t.trim()).map_err(anyhow::Error::msg);
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        ensure!(parts.len() == 3, "grid `{text}` is not start:stop:step");
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        ensure!(step.is_positive(), "grid step {step} must be positive");
        let mut out = Vec::new();
        let mut s = start;
        while s <= stop {
            out.push(s.clone());
            s = &s + &step;
        }
        out
    } else {
        text.split(',').filter(|t| !t.trim().is_empty()).map(parse).collect::<Result<_>>()?
    };
    ensure!(!grid.is_empty(), "grid `{text}` is empty");
    for s in &grid {
        ensure!(*s >= int(1) && *s <= int(8), "grid speed {s} outside [1, 8]");
    }
    Ok(grid)
}

fn measured(params: &ScenarioParams, name: ScenarioName, s: &GoldenNumber, d: u32) -> Result<String> {
    let sc = params.generate(name, s)?;
    let tr = run_static(&PolicyKind::Main, &sc.instance, &sc.faults, s)?;
    Ok(ratio_report(&tr, &sc.declared_adv_schedule.value, &GoldenNumber::zero()).satisfied_r.to_decimal(d))
}

pub fn sweep(a: SweepArgs, d: u32) -> Result<bool> {
    let grid = parse_grid(&a.grid)?;
    let l = a.params.l.clone().unwrap_or_else(|| int(100));
    // the div43 ℓ only fits its block from (3ℓ − 1)/(2ℓ) on
    let div43_from = &(&l.mul_int(3) - &int(1)) / &l.mul_int(2);
    let mut w = csv::Writer::from_writer(sink(&a.out)?);
    w.write_record(["s", "rs_bound", "below2", "mid24", "div43"])?;
    for s in &grid {
        let below2 = if *s < int(2) { measured(&a.params, ScenarioName::Below2, s, d)? } else { String::new() };
        let mid24 = if *s >= int(2) && *s < int(4) {
            measured(&a.params, ScenarioName::Mid24, s, d)?
        } else {
            String::new()
        };
        let div43 = if *s >= div43_from && *s < GoldenNumber::ratio(5, 2) {
            measured(&a.params, ScenarioName::Div43, s, d)?
        } else {
            String::new()
        };
        w.write_record([s.to_decimal(d), rs_bound(s)?.to_decimal(d), below2, mid24, div43])?;
    }
    w.flush()?;
    Ok(true)
}

pub fn lowerbound(a: LowerboundArgs, d: u32) -> Result<bool> {
    let out = match a.scenario {
        ScenarioName::Lb2 => run_lower_bound(a.params.lb2(&a.speed)?, &a.policy, Recording::Full)?,
        ScenarioName::Lbphi => {
            let st = a.params.lbphi(&a.speed)?;
            eprintln!("lbphi: k = {}, counts N_0..N_k = {:?}", st.k, st.counts);
            // totals only: N_0 ε-packets would make a full trace huge
            run_lower_bound(st, &a.policy, Recording::Totals)?
        }
        other => bail!("{other} is a static scenario; use `simulate`"),
    };
    warn_all(&out.trace.warnings);
    let valid = verify_schedule(&out.adv_schedule, &out.instance, &out.trace.faults, &int(1));
    if let Err(v) = &valid {
        eprintln!("declared adversary schedule is infeasible: {v:?}");
    }
    if let Some(path) = &a.out {
        out.write_cases_csv(sink(&a.out)?, d).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut o = io::stdout().lock();
    writeln!(o, "scenario: {}", a.scenario)?;
    writeln!(o, "policy: {}", a.policy.name())?;
    writeln!(o, "speed: {}", a.speed)?;
    writeln!(o, "blocks: {}", out.trace.faults.blocks().len())?;
    writeln!(o, "L_ALG: {}", out.alg_gain.to_decimal(d))?;
    writeln!(o, "L_ADV: {}", out.adv_gain.to_decimal(d))?;
    writeln!(o, "A: {}", out.additive.to_decimal(d))?;
    writeln!(o, "verdict: {}", out.verdict())?;
    Ok(out.verdict() && valid.is_ok())
}

#[derive(Default)]
struct Tally {
    cases: u64,
    checks: usize,
    failed: Vec<AuditCheck>,
}

impl Tally {
    fn add(&mut self, label: &str, checks: Vec<AuditCheck>) {
        self.cases += 1;
        self.checks += checks.len();
        for c in violations(&checks) {
            eprintln!("violation in {label}: {} i={:?} u={} v={} slack={}", c.check, c.i, c.u, c.v, c.slack);
            self.failed.push(c.clone());
        }
    }
}

/// A MAIN trace with one completed record moved across a fault.
fn corrupt_control(w: &mut dyn Write) -> Result<Vec<AuditCheck>> {
    let cat = SizeCatalog::from_ints(&[1, 2, 4])?;
    let inst = Instance::new(
        cat,
        vec![PacketBatch::new(0, int(0), 3), PacketBatch::new(1, int(0), 2), PacketBatch::new(2, int(1), 1)],
    );
    let faults = FaultSequence::new(vec![GoldenNumber::ratio(5, 2), int(7)], int(12));
    let mut tr = run_static(&PolicyKind::Main, &inst, &faults, &int(1))?;
    let r = tr
        .records
        .iter_mut()
        .find(|r| r.completed && r.end > faults.faults[0])
        .context("control trace has no completion after the first fault")?;
    let len = &r.end - &r.start;
    r.start = int(2);
    r.end = &int(2) + &len;
    let checks = lemma_audit(&tr, &inst)?;
    writeln!(w, "corrupt control: {} of {} checks failed", violations(&checks).len(), checks.len())?;
    Ok(checks)
}

pub fn audit(a: AuditArgs, d: u32) -> Result<bool> {
    let mut failed = Vec::new();
    let mut w = csv::Writer::from_writer(sink(&a.out)?);
    if a.corrupt {
        let checks = corrupt_control(&mut io::stderr())?;
        let bad: Vec<AuditCheck> = violations(&checks).into_iter().cloned().collect();
        w.write_record(["suite", "policy", "speed", "cases", "checks", "violations"])?;
        w.write_record(["corrupt", "main", "1", "1", &checks.len().to_string(), &bad.len().to_string()])?;
        failed = bad;
    } else {
        let mut lemma = [Tally::default(), Tally::default()];
        let policies = [PolicyKind::Main, PolicyKind::Div];
        for idx in 0..a.runs {
            // alternate general and divisible catalogs
            let family = if idx % 2 == 0 { SizeFamily::General } else { SizeFamily::Divisible };
            let case = fuzz_case(a.seed, idx, &FuzzConfig::with_family(family));
            let s = fuzz_speed(a.seed, idx);
            for (p, t) in policies.iter().zip(lemma.iter_mut()) {
                let tr = run_static(p, &case.instance, &case.faults, &s)?;
                t.add(&format!("lemma {p} case {idx} s={s}"), lemma_audit(&tr, &case.instance)?);
            }
        }
        let speeds = [1, 2, 4, 6];
        let mut segment: Vec<Tally> = speeds.iter().map(|_| Tally::default()).collect();
        let seg_seed = a.seed.wrapping_add(1);
        for idx in 0..a.segment_runs {
            let case = fuzz_case(seg_seed, idx, &FuzzConfig::default());
            let opt = opt_bruteforce(&case.instance, &case.faults)?;
            for (&s, t) in speeds.iter().zip(segment.iter_mut()) {
                let s = int(s);
                let tr = run_static(&PolicyKind::Main, &case.instance, &case.faults, &s)?;
                let checks = segment_audit(&tr, &case.instance, &opt, &s, &rs_bound(&s)?)?;
                t.add(&format!("segment case {idx} s={s}"), checks);
            }
        }
        w.write_record(["suite", "policy", "speed", "cases", "checks", "violations"])?;
        for (p, t) in policies.iter().zip(lemma) {
            w.write_record(["lemma", p.name(), "fuzz", &t.cases.to_string(), &t.checks.to_string(), &t.failed.len().to_string()])?;
            failed.extend(t.failed);
        }
        for (s, t) in speeds.iter().zip(segment) {
            w.write_record(["segment", "main", &s.to_string(), &t.cases.to_string(), &t.checks.to_string(), &t.failed.len().to_string()])?;
            failed.extend(t.failed);
        }
    }
    w.flush()?;
    if let Some(path) = &a.violations {
        write_audit_csv(&failed, sink(&a.violations)?, d).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(failed.is_empty())
}

pub fn opt(a: OptArgs, d: u32) -> Result<bool> {
    let src = a.source.load(&a.speed)?;
    let sched = opt_bruteforce(&src.instance, &src.faults)?;
    if let Some(path) = &a.out {
        sched
            .write_csv(&src.instance, &src.faults, sink(&a.out)?, d)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let mut o = io::stdout().lock();
    writeln!(o, "source: {}", src.name)?;
    writeln!(o, "packets: {}", src.instance.packet_count())?;
    writeln!(o, "blocks: {}", src.faults.blocks().len())?;
    writeln!(o, "opt: {}", sched.value.to_decimal(d))?;
    writeln!(o, "scheduled: {}", sched.assignments.len())?;
    if let Some(decl) = &src.declared {
        writeln!(o, "declared: {}", decl.value.to_decimal(d))?;
    }
    Ok(true)
}

pub fn export(a: ExportArgs) -> Result<bool> {
    let src = a.source.load(&a.speed)?;
    let mut w = sink(&a.out)?;
    write_instance(&src.instance, &src.faults, &mut w)?;
    w.flush()?;
    Ok(true)
}
