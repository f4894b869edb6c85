//! Property suites over exact arithmetic, load measures, the engine and the
//! offline optimum.

use jamsim::adversaries::{gen_below2, gen_div43, gen_mid24, gen_twosizes};
use jamsim::engine::{run_ahead, run_online, run_static, BlockView, FaultDecision, FaultSource, StaticFaults};
use jamsim::fuzz::{fuzz_case, FuzzCase, FuzzConfig, SizeFamily};
use jamsim::model::{validate_instance, Recording};
use jamsim::numeric::{g, gn_arith, gn_sign, phi_pow, ArithOp};
use jamsim::offline::{opt_bruteforce, verify_schedule, MAX_BLOCKS, MAX_PACKETS};
use jamsim::{FaultSequence, GoldenNumber, Instance, PacketBatch, PolicyKind, Rational, Result, SizeFilter};
use num_bigint::BigInt;
use proptest::prelude::*;

const DIGITS: u32 = 50;

fn rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..=10_000, 1i64..=1_000).prop_map(|(n, d)| Rational::new(n, d))
}

fn golden() -> impl Strategy<Value = GoldenNumber> {
    (rational(), rational()).prop_map(|(a, b)| GoldenNumber::new(a, b))
}

/// `⌊10^d·φ⌋` from the integer square root of `5·10^{2d}`.
fn phi_scaled(d: u32) -> BigInt {
    let scale = BigInt::from(10).pow(d);
    let root: BigInt = (&scale * &scale * 5u32).sqrt();
    (scale + root) / 2
}

/// Sign of `a + bφ` from a `DIGITS`-digit evaluation, or `None` if the
/// value sits within the evaluation error of zero.
fn decimal_sign(x: &GoldenNumber) -> Option<i32> {
    let scale = BigInt::from(10).pow(DIGITS);
    // x·a_d·b_d·10^d, up to the error of ⌊10^d φ⌋
    let v = x.a().numer() * x.b().denom() * &scale + x.b().numer() * x.a().denom() * phi_scaled(DIGITS);
    let err = (x.b().numer() * x.a().denom()).magnitude().clone();
    let v_abs = v.magnitude().clone();
    if v_abs <= err {
        None
    } else if v > BigInt::from(0) {
        Some(1)
    } else {
        Some(-1)
    }
}

fn cfg(family: SizeFamily) -> FuzzConfig {
    FuzzConfig::with_family(family)
}

fn small_case() -> impl Strategy<Value = FuzzCase> {
    (any::<u64>(), 0u64..1_000_000).prop_map(|(seed, index)| fuzz_case(seed, index, &cfg(SizeFamily::General)))
}

fn speed() -> impl Strategy<Value = GoldenNumber> {
    (0i64..=28).prop_map(|j| &GoldenNumber::one() + &GoldenNumber::ratio(j, 4))
}

fn policy() -> impl Strategy<Value = PolicyKind> {
    prop::sample::select(PolicyKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn sign_matches_decimal_oracle(x in golden()) {
        if let Some(s) = decimal_sign(&x) {
            prop_assert_eq!(gn_sign(&x), s);
        } else {
            prop_assert!(x.is_zero());
        }
    }

    #[test]
    fn convergent_differences_have_the_right_sign(n in 2u32..60) {
        // F(n+1)/F(n) alternates around φ
        let p = phi_pow(n);
        let (f_n, f_n1) = (p.b().clone(), &p.b().clone() + p.a());
        let x = &GoldenNumber::from_rational(&f_n1 / &f_n) - &GoldenNumber::phi();
        let expect = if n % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(gn_sign(&x), expect);
    }

    #[test]
    fn field_axioms(x in golden(), y in golden(), z in golden()) {
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
        if !y.is_zero() {
            prop_assert_eq!(&(&x / &y) * &y, x.clone());
        }
    }

    #[test]
    fn order_is_compatible_with_addition(x in golden(), y in golden(), z in golden()) {
        prop_assert_eq!(x < y, &x + &z < &y + &z);
        prop_assert_eq!(x < y, gn_sign(&(&y - &x)) > 0);
    }

    #[test]
    fn literal_round_trip(x in golden()) {
        prop_assert_eq!(x.to_string().parse::<GoldenNumber>().unwrap(), x);
    }

    #[test]
    fn phi_pow_is_additive(m in 0u32..=40, n in 0u32..=40) {
        prop_assert_eq!(phi_pow(m + n), gn_arith(&phi_pow(m), &phi_pow(n), ArithOp::Mul).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn load_is_additive(case in small_case(), s in speed(), p in policy(), cut in 0i64..=64) {
        let tr = run_static(&p, &case.instance, &case.faults, &s).unwrap();
        let zero = GoldenNumber::zero();
        let t = case.faults.horizon.clone();
        let mid = &t * &GoldenNumber::ratio(cut, 64);
        let all = tr.completed_load(SizeFilter::All, &zero, &t);
        prop_assert_eq!(&all, &tr.total_load());
        prop_assert_eq!(
            &all,
            &(&tr.completed_load(SizeFilter::All, &zero, &mid) + &tr.completed_load(SizeFilter::All, &mid, &t))
        );
        for i in 0..case.instance.catalog.len() {
            let split = &tr.completed_load(SizeFilter::LessThan(i), &zero, &t)
                + &tr.completed_load(SizeFilter::AtLeast(i), &zero, &t);
            prop_assert_eq!(&all, &split);
            prop_assert_eq!(tr.completed_load(SizeFilter::Exactly(i), &zero, &t), tr.load_of_size(i));
        }
    }

    #[test]
    fn engine_traces_are_well_formed(case in small_case(), s in speed(), p in policy()) {
        let tr = run_static(&p, &case.instance, &case.faults, &s).unwrap();
        let bounds = case.faults.boundaries();
        for w in tr.records.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
        for r in &tr.records {
            prop_assert!(r.end > r.start);
            let dur = case.instance.catalog.size(r.size_index) / &s;
            // the first boundary after the start ends every record
            let next = case.faults.next_after(&r.start);
            if r.completed {
                prop_assert_eq!(&r.end - &r.start, dur);
                prop_assert!(r.end <= next);
            } else {
                prop_assert_eq!(&r.end, &next);
                prop_assert!(bounds.contains(&r.end));
            }
        }
        let per_block: GoldenNumber = tr.block_loads.iter().sum();
        prop_assert_eq!(per_block, tr.total_load());
    }

    #[test]
    fn engine_is_deterministic(case in small_case(), s in speed(), p in policy()) {
        let a = run_static(&p, &case.instance, &case.faults, &s).unwrap();
        let b = run_static(&p, &case.instance, &case.faults, &s).unwrap();
        prop_assert_eq!(a.records, b.records);
        prop_assert_eq!(a.phases, b.phases);
        prop_assert_eq!(a.block_loads, b.block_loads);
    }

    #[test]
    fn run_ahead_has_no_side_effects(case in small_case(), s in speed(), p in policy(), capped in any::<bool>()) {
        struct Peek {
            inner: StaticFaults,
            capped: bool,
        }
        impl FaultSource for Peek {
            fn next_fault(&mut self, view: &BlockView<'_>) -> Result<FaultDecision> {
                let d = self.inner.next_fault(view)?;
                let limit = match (&d, self.capped) {
                    (FaultDecision::NextFault(f), true) => Some(f.clone()),
                    _ => None,
                };
                run_ahead(view.state, view.policy, limit.as_ref());
                view.run_ahead(None);
                Ok(d)
            }
            fn declared(&self) -> Option<&FaultSequence> {
                self.inner.declared()
            }
        }
        let plain = run_static(&p, &case.instance, &case.faults, &s).unwrap();
        let mut src = Peek { inner: StaticFaults::new(case.faults.clone()), capped };
        let peeked = run_online(&p, &case.instance, &mut src, &s, Recording::Full).unwrap();
        prop_assert_eq!(plain.records, peeked.records);
        prop_assert_eq!(plain.block_loads, peeked.block_loads);
    }
}

fn shuffled(inst: &Instance, order: &[usize]) -> Instance {
    // split every batch into singletons, then permute without canonicalizing
    let mut singles: Vec<PacketBatch> = inst
        .batches
        .iter()
        .flat_map(|b| std::iter::repeat(PacketBatch::new(b.size_index, b.release.clone(), 1)).take(b.count as usize))
        .collect();
    for (i, &j) in order.iter().enumerate() {
        let n = singles.len();
        if n > 1 {
            singles.swap(i % n, j % n);
        }
    }
    Instance { catalog: inst.catalog.clone(), batches: singles }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn opt_is_feasible_and_permutation_invariant(
        case in small_case(),
        order in prop::collection::vec(0usize..64, 0..32),
    ) {
        let opt = opt_bruteforce(&case.instance, &case.faults).unwrap();
        prop_assert!(verify_schedule(&opt, &case.instance, &case.faults, &GoldenNumber::one()).is_ok());
        let perm = shuffled(&case.instance, &order);
        prop_assert_eq!(opt_bruteforce(&perm, &case.faults).unwrap().value, opt.value);
    }

    #[test]
    fn removing_a_fault_never_lowers_opt(case in small_case(), pick in any::<prop::sample::Index>()) {
        prop_assume!(!case.faults.faults.is_empty());
        let opt = opt_bruteforce(&case.instance, &case.faults).unwrap().value;
        let mut faults = case.faults.faults.clone();
        faults.remove(pick.index(faults.len()));
        let fewer = FaultSequence::new(faults, case.faults.horizon.clone());
        prop_assert!(opt_bruteforce(&case.instance, &fewer).unwrap().value >= opt);
    }

    #[test]
    fn opt_dominates_every_policy_at_speed_one(case in small_case(), p in policy()) {
        let opt = opt_bruteforce(&case.instance, &case.faults).unwrap().value;
        let tr = run_static(&p, &case.instance, &case.faults, &GoldenNumber::one()).unwrap();
        prop_assert!(opt >= tr.total_load());
    }
}

/// Only the smallest scenarios fit the brute force; each unit-tail block
/// counts against the block cap.
#[test]
fn opt_dominates_declared_schedules() {
    let mut checked = 0;
    for n in 1..=2 {
        let scenarios = [
            gen_below2(&g("1"), &g("1/10"), n),
            gen_mid24(&g("3"), &g("10"), n),
            gen_div43(&g("12/5"), &g("4"), n),
            gen_twosizes(&g("19/10"), &g("1/2"), &g("5"), n),
        ];
        for sc in scenarios {
            let sc = sc.unwrap();
            validate_instance(&sc.instance, &sc.faults).unwrap();
            let declared = &sc.declared_adv_schedule;
            assert!(verify_schedule(declared, &sc.instance, &sc.faults, &GoldenNumber::one()).is_ok());
            if sc.instance.packet_count() > MAX_PACKETS || sc.faults.blocks().len() > MAX_BLOCKS {
                continue;
            }
            let opt = opt_bruteforce(&sc.instance, &sc.faults).unwrap().value;
            assert!(opt >= declared.value, "{}: OPT {opt} below declared {}", sc.name, declared.value);
            checked += 1;
        }
    }
    assert!(checked > 0);
}
