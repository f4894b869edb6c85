//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Tolerances and runtime limits are pinned below.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use jamsim::adversaries::{
    gen_below2, gen_div43, gen_mid24, gen_twosizes, lb2_strategy, lbphi_strategy, run_lower_bound, GeneratedScenario,
    Lb2Params, LbPhiParams,
};
use jamsim::analysis::{lemma_audit, ratio_report, rs_bound, s_alpha, segment_audit, violations};
use jamsim::engine::run_static;
use jamsim::fuzz::{fuzz_case, fuzz_speed, FuzzConfig, SizeFamily};
use jamsim::model::Recording;
use jamsim::numeric::{phi_pow, GoldenNumber, Rational};
use jamsim::offline::{opt_bruteforce, verify_schedule};
use jamsim::PolicyKind;
use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const RATIO_TOL: &str = "1/20";
const FUZZ_RUNS: u64 = 200;
const AUDIT_RUNS: u64 = 1000;
const NUMERIC_RUNS: usize = 10_000;
/// Fixed-point digits of the decimal oracle.
const ORACLE_DIGITS: u32 = 60;

fn g(s: &str) -> GoldenNumber {
    s.parse().unwrap_or_else(|e| panic!("bad literal {s}: {e}"))
}

type Verdict = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Ratio of the verified declared schedule to the policy's gain.
fn scenario_ratio(sc: &GeneratedScenario, policy: PolicyKind, s: &GoldenNumber) -> Result<GoldenNumber, String> {
    verify_schedule(&sc.declared_adv_schedule, &sc.instance, &sc.faults, &g("1"))
        .map_err(|v| format!("{}: declared schedule invalid: {:?}", sc.name, v.first()))?;
    let tr = run_static(&policy, &sc.instance, &sc.faults, s).map_err(|e| e.to_string())?;
    let rep = ratio_report(&tr, &sc.declared_adv_schedule.value, &GoldenNumber::zero());
    rep.satisfied_r.value().cloned().ok_or_else(|| format!("{}: {policy} gained nothing", sc.name))
}

fn c1() -> Verdict {
    let t = Instant::now();
    let r1 = rs_bound(&g("1")).map_err(|e| e.to_string())?;
    let r4 = rs_bound(&g("4")).map_err(|e| e.to_string())?;
    let r6 = rs_bound(&g("6")).map_err(|e| e.to_string())?;
    let a1 = s_alpha(&g("1")).map_err(|e| e.to_string())?;
    let a2 = s_alpha(&g("2")).map_err(|e| e.to_string())?;
    let big = s_alpha(&g("1000000")).map_err(|e| e.to_string())?;
    let took = t.elapsed();
    let exact = r1 == g("3") && r4 == g("7/6") && r6 == g("1") && a1 == g("6") && a2 == g("3");
    let limit = big > g("2") && big < g("2") + g("1/100000");
    ensure(
        exact && limit && took < Duration::from_millis(1),
        format!("R_1={r1} R_4={r4} R_6={r6} S_1={a1} S_2={a2} S_1e6={} in {took:?}", big.to_decimal(8)),
    )
}

fn c2() -> Verdict {
    let s = g("1");
    let sc = gen_below2(&s, &g("1/1000"), 200).map_err(|e| e.to_string())?;
    let r = scenario_ratio(&sc, PolicyKind::Main, &s)?;
    let need = g("3") - g(RATIO_TOL);
    ensure(r >= need, format!("MAIN(1) below2 ratio {} ≥ {}", r.to_decimal(5), need.to_decimal(5)))
}

fn c3() -> Verdict {
    let s = g("2");
    let sc = gen_mid24(&s, &g("1000"), 50).map_err(|e| e.to_string())?;
    let r = scenario_ratio(&sc, PolicyKind::Main, &s)?;
    let need = g("2") - g(RATIO_TOL);
    ensure(r >= need, format!("MAIN(2) mid24 ratio {} ≥ {}", r.to_decimal(5), need.to_decimal(5)))
}

fn c4() -> Verdict {
    let l = g("100");
    let n = 50;
    let need = g("4/3") - g(RATIO_TOL);
    let s24 = g("12/5");
    let s25 = g("5/2");
    let sc24 = gen_div43(&s24, &l, n).map_err(|e| e.to_string())?;
    let sc25 = gen_div43(&s25, &l, n).map_err(|e| e.to_string())?;
    let r24 = scenario_ratio(&sc24, PolicyKind::Main, &s24)?;
    // the same faults and releases timed for 2.5 still hold MAIN(2.4) down
    let r24_on_25 = scenario_ratio(&sc25, PolicyKind::Main, &s24)?;
    let tr = run_static(&PolicyKind::Main, &sc25.instance, &sc25.faults, &s25).map_err(|e| e.to_string())?;
    let per_phase = l.mul_int(5) - g("1");
    // the last phase also fits the padding 1 into its final 0.4
    let full = tr.block_loads.len() >= n
        && tr.block_loads[..n - 1].iter().all(|x| *x == per_phase)
        && tr.block_loads[n - 1] >= per_phase;
    let blocks = sc25.faults.blocks();
    let big_done = blocks[..n].iter().all(|(u, v)| {
        tr.records.iter().filter(|r| r.completed && r.size_index == 2 && r.end > *u && r.end <= *v).count() == 1
    });
    ensure(
        r24 >= need && r24_on_25 >= need && full && big_done,
        format!(
            "MAIN(2.4) ratio {} and {} on the 2.5 timing ≥ {}; MAIN(2.5) gains {per_phase} in each of {n} phases: {}",
            r24.to_decimal(5),
            r24_on_25.to_decimal(5),
            need.to_decimal(5),
            full && big_done
        ),
    )
}

fn c5() -> Verdict {
    let s = g("19/10");
    let sc = gen_twosizes(&s, &g("1/2"), &g("10"), 100).map_err(|e| e.to_string())?;
    let need = g("2") - g(RATIO_TOL);
    let rm = scenario_ratio(&sc, PolicyKind::Main, &s)?;
    let rd = scenario_ratio(&sc, PolicyKind::Div, &s)?;
    ensure(
        rm >= need && rd >= need,
        format!("twosizes ratios MAIN {} DIV {} ≥ {}", rm.to_decimal(5), rd.to_decimal(5), need.to_decimal(5)),
    )
}

/// `6kℓ_k` or `10kℓ_k`.
fn additive(inst: &jamsim::Instance, factor: i64) -> GoldenNumber {
    inst.catalog.largest().mul_int(factor * inst.catalog.len() as i64)
}

fn c6() -> Verdict {
    let cfg = FuzzConfig::default();
    let s = g("4");
    let mut bad = Vec::new();
    for i in 0..FUZZ_RUNS {
        let c = fuzz_case(SEED, i, &cfg);
        let opt = opt_bruteforce(&c.instance, &c.faults).map_err(|e| e.to_string())?;
        let tr = run_static(&PolicyKind::Main, &c.instance, &c.faults, &s).map_err(|e| e.to_string())?;
        if opt.value > tr.total_load() + additive(&c.instance, 10) {
            bad.push(i);
        }
    }
    ensure(bad.is_empty(), format!("{FUZZ_RUNS} instances, L_OPT ≤ L_MAIN(4) + 10kℓ_k; violations {bad:?}"))
}

fn c7_c8(kind: u8) -> Verdict {
    let cfg = FuzzConfig::with_family(SizeFamily::Divisible);
    let mut bad = Vec::new();
    for i in 0..FUZZ_RUNS {
        let c = fuzz_case(SEED + 1, i, &cfg);
        let opt = opt_bruteforce(&c.instance, &c.faults).map_err(|e| e.to_string())?;
        let a = additive(&c.instance, 6);
        let run = |p: PolicyKind, s: &str| {
            run_static(&p, &c.instance, &c.faults, &g(s)).map(|t| t.total_load()).map_err(|e| e.to_string())
        };
        let ok = if kind == 7 {
            let d2 = run(PolicyKind::Div, "2")?;
            let d1 = run(PolicyKind::Div, "1")?;
            opt.value <= &d2 + &a && opt.value <= d1.mul_int(2) + a
        } else {
            opt.value <= run(PolicyKind::Main, "5/2")? + a
        };
        if !ok {
            bad.push(i);
        }
    }
    let what = if kind == 7 { "L_OPT ≤ L_DIV(2) + 6kℓ_k and ≤ 2·L_DIV(1) + 6kℓ_k" } else { "L_OPT ≤ L_MAIN(2.5) + 6kℓ_k" };
    ensure(bad.is_empty(), format!("{FUZZ_RUNS} divisible instances, {what}; violations {bad:?}"))
}

fn c9() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for (p, s) in [(PolicyKind::Main, "3/2"), (PolicyKind::Main, "19/10"), (PolicyKind::Div, "19/10"), (PolicyKind::Greedy, "3/2")] {
        let t = Instant::now();
        let st = lb2_strategy(Lb2Params::new(g("5"), g("3"), g(s))).map_err(|e| e.to_string())?;
        let out = run_lower_bound(st, &p, Recording::Full).map_err(|e| e.to_string())?;
        let valid = verify_schedule(&out.adv_schedule, &out.instance, &out.trace.faults, &g("1")).is_ok();
        let took = t.elapsed();
        ok &= out.verdict() && valid && took < Duration::from_secs(30);
        lines.push(format!("{p}({s}) ADV {} > ALG {} + 3 {took:.1?}", out.adv_gain, out.alg_gain));
    }
    ensure(ok, lines.join("; "))
}

fn c10() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    let s = g("11/5");
    for p in [PolicyKind::Main, PolicyKind::Div] {
        let t = Instant::now();
        let st = lbphi_strategy(LbPhiParams { s: s.clone(), eps: g("1/10"), k: None, a: g("1") })
            .map_err(|e| e.to_string())?;
        let k = st.k;
        let cap = GoldenNumber::phi() * phi_pow(k as u32 - 1);
        let out = run_lower_bound(st, &p, Recording::Totals).map_err(|e| e.to_string())?;
        let longest = out.trace.faults.blocks().into_iter().map(|(a, b)| b - a).max().unwrap_or_default();
        let took = t.elapsed();
        ok &= out.verdict() && longest <= cap && took < Duration::from_secs(600);
        lines.push(format!(
            "{p}(2.2) k={k} ADV {} > ALG {} + 1, longest block {} ≤ φℓ_k {} {took:.1?}",
            out.adv_gain.to_decimal(4),
            out.alg_gain.to_decimal(4),
            longest.to_decimal(4),
            cap.to_decimal(4)
        ));
    }
    ensure(ok, lines.join("; "))
}

fn c11() -> Verdict {
    let t = Instant::now();
    let mut lemma_bad = 0usize;
    let mut lemma_checks = 0usize;
    for i in 0..AUDIT_RUNS {
        let family = if i % 2 == 0 { SizeFamily::General } else { SizeFamily::Divisible };
        let c = fuzz_case(SEED + 2, i, &FuzzConfig::with_family(family));
        let s = fuzz_speed(SEED + 2, i);
        for p in [PolicyKind::Main, PolicyKind::Div] {
            let tr = run_static(&p, &c.instance, &c.faults, &s).map_err(|e| e.to_string())?;
            let checks = lemma_audit(&tr, &c.instance).map_err(|e| e.to_string())?;
            lemma_checks += checks.len();
            lemma_bad += violations(&checks).len();
        }
    }
    let mut seg_bad = 0usize;
    let mut seg_checks = 0usize;
    let cfg = FuzzConfig::default();
    for i in 0..FUZZ_RUNS {
        let c = fuzz_case(SEED + 3, i, &cfg);
        let opt = opt_bruteforce(&c.instance, &c.faults).map_err(|e| e.to_string())?;
        for s in ["1", "2", "4", "6"] {
            let s = g(s);
            let r = rs_bound(&s).map_err(|e| e.to_string())?;
            let tr = run_static(&PolicyKind::Main, &c.instance, &c.faults, &s).map_err(|e| e.to_string())?;
            let checks = segment_audit(&tr, &c.instance, &opt, &s, &r).map_err(|e| e.to_string())?;
            seg_checks += checks.len();
            seg_bad += violations(&checks).len();
        }
    }
    let took = t.elapsed();
    ensure(
        lemma_bad == 0 && seg_bad == 0 && took < Duration::from_secs(300),
        format!(
            "lemma audit {lemma_bad} of {lemma_checks} checks failed over {} traces; segment audit {seg_bad} of {seg_checks} failed; {took:.1?}",
            2 * AUDIT_RUNS
        ),
    )
}

/// `⌊φ·10^d⌋ = ⌊(10^d + √(5·10^{2d}))/2⌋`, off by at most one.
fn phi_fixed(d: u32) -> BigInt {
    let scale = BigInt::from(10).pow(d);
    let root: BigInt = (&scale * &scale * 5u32).sqrt();
    (scale + root) / 2
}

/// `(a + bφ)·10^d` in fixed point, with an error bound.
fn oracle(x: &GoldenNumber, phi: &BigInt, d: u32) -> (BigInt, BigInt) {
    let scale = BigInt::from(10).pow(d);
    let (an, ad) = (x.a().numer(), x.a().denom());
    let (bn, bd) = (x.b().numer(), x.b().denom());
    let a_part = &an * &scale / &ad;
    let b_part = &bn * phi / &bd;
    // truncations: 1 from each division plus |b|·1 from φ's last digit
    let err = BigInt::from(4) + bn.abs() / &bd;
    (a_part + b_part, err)
}

fn random_golden(rng: &mut ChaCha8Rng) -> GoldenNumber {
    let r = |rng: &mut ChaCha8Rng| Rational::new(rng.gen_range(-2000..=2000), rng.gen_range(1..=300));
    if rng.gen_bool(0.1) {
        // near-ties with φ's convergents: F(n+1)/F(n) − φ
        let n = rng.gen_range(2..30u32);
        let p = phi_pow(n);
        let q = phi_pow(n - 1);
        let conv = Rational::from_big(p.b().numer() + q.b().numer(), p.b().numer());
        return GoldenNumber::new(conv, Rational::from_integer(-1));
    }
    GoldenNumber::new(r(rng), r(rng))
}

fn c12() -> Verdict {
    let t = Instant::now();
    let phi = phi_fixed(ORACLE_DIGITS);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut disagree = 0usize;
    let mut undecided = 0usize;
    for _ in 0..NUMERIC_RUNS {
        let x = random_golden(&mut rng);
        let y = random_golden(&mut rng);
        let (xv, xe) = oracle(&x, &phi, ORACLE_DIGITS);
        let (yv, _) = oracle(&y, &phi, ORACLE_DIGITS);
        if xv.abs() > xe {
            let want = if xv.is_positive() { 1 } else { -1 };
            disagree += usize::from(x.signum() != want);
        } else if !x.is_zero() {
            undecided += 1;
        }
        // arithmetic: compare z = x op y against the oracle on the operands
        let scale = BigInt::from(10).pow(ORACLE_DIGITS);
        let tol = BigInt::from(10).pow(ORACLE_DIGITS / 2);
        let checks: [(GoldenNumber, BigInt); 3] = [
            (&x + &y, &xv + &yv),
            (&x - &y, &xv - &yv),
            (&x * &y, &xv * &yv / &scale),
        ];
        for (z, want) in checks {
            let (zv, _) = oracle(&z, &phi, ORACLE_DIGITS);
            disagree += usize::from((zv - want).abs() > tol);
        }
        if !y.is_zero() && yv.abs() > &scale / 1000 {
            let (zv, _) = oracle(&(&x / &y), &phi, ORACLE_DIGITS);
            let want = &xv * &scale / &yv;
            disagree += usize::from((zv - want).abs() > tol);
        }
    }
    let took = t.elapsed();
    ensure(
        disagree == 0 && undecided == 0 && took < Duration::from_secs(10),
        format!("{NUMERIC_RUNS} random pairs at {ORACLE_DIGITS} digits: {disagree} disagreements, {undecided} undecided, {took:.1?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Verdict); 12] = [
        (1, "bound formulas", c1),
        (2, "below2 tightness", c2),
        (3, "mid24 tightness", c3),
        (4, "div43 tightness", c4),
        (5, "twosizes", c5),
        (6, "MAIN(4) fuzz", c6),
        (7, "DIV divisible", || c7_c8(7)),
        (8, "MAIN(2.5) divisible", || c7_c8(8)),
        (9, "lb2 adversary", c9),
        (10, "lbphi adversary", c10),
        (11, "audit suites", c11),
        (12, "numeric oracle", c12),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let verdict = run();
        let took = t.elapsed();
        match verdict {
            Ok(d) => println!("criterion {id:>2} PASS  {name}: {d} [{took:.1?}]"),
            Err(d) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {d} [{took:.1?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
