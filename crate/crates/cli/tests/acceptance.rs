//! End-to-end acceptance gates for the whole workspace. Each test
//! checks one externally promised behaviour, enforces its wall-clock
//! budget, and prints a single PASS line (visible under
//! `--nocapture`). Every numeric claim is checked in exact arithmetic,
//! several against independent brute-force recounts implemented here
//! from scratch.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use egyptian_core::dynamics::{
    above_accumulation_census, below_accumulation_census, extract_decreasing,
    find_accumulation_point, AccumulationOutcome, ElementStream, ExtractOutcome, StreamOrder,
};
use egyptian_core::group::{make_integers, make_rationals, OrderedGroup, Rationals};
use egyptian_core::lcf0::{
    finite_set, negate, unit_fractions, weighted, BoundStream, Lcf0Set, WeightedSpec,
};
use egyptian_core::sumset::{
    build_net, cover_soundness, enumerate_representations, find_gap, representation_census,
    trichotomy_check, GapOutcome, SumSpec, TrichotomyOutcome, DEFAULT_TUPLE_BUDGET,
};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow2(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2).pow(k))
}

fn unit_spec(n: usize) -> SumSpec<Rationals> {
    SumSpec::new(make_rationals(), vec![unit_fractions(); n]).unwrap()
}

fn finish(criterion: u32, what: &str, start: Instant, budget_secs: u64) {
    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(budget_secs),
        "criterion {criterion} blew its {budget_secs}s budget: {elapsed:?}"
    );
    println!("PASS criterion {criterion}: {what} ({elapsed:?})");
}

/// Independent recount of ordered unit-fraction representations:
/// sorted-denominator search with the classical bound chain
/// ceil(1/r) ≤ m ≤ floor(t/r), then multiset-to-tuple expansion.
fn oracle_ordered(g: &BigRational, n: usize) -> BTreeSet<Vec<BigRational>> {
    fn descend(r: &BigRational, t: usize, min_m: u64, stack: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if t == 0 {
            if r.is_zero() {
                out.push(stack.clone());
            }
            return;
        }
        if !r.is_positive() {
            return;
        }
        let lo = r.recip().ceil().to_integer().to_u64().unwrap().max(min_m);
        let hi = (BigRational::from_integer(BigInt::from(t)) / r)
            .floor()
            .to_integer()
            .to_u64()
            .unwrap();
        for m in lo..=hi {
            stack.push(m);
            descend(&(r - q(1, m as i64)), t - 1, m, stack, out);
            stack.pop();
        }
    }
    fn spread(items: &mut [u64], i: usize, out: &mut BTreeSet<Vec<BigRational>>) {
        if i == items.len() {
            out.insert(items.iter().map(|m| q(1, *m as i64)).collect());
            return;
        }
        for j in i..items.len() {
            items.swap(i, j);
            spread(items, i + 1, out);
            items.swap(i, j);
        }
    }
    let mut multisets = Vec::new();
    descend(g, n, 1, &mut Vec::new(), &mut multisets);
    let mut ordered = BTreeSet::new();
    for mut ms in multisets {
        spread(&mut ms, 0, &mut ordered);
    }
    ordered
}

/// Does any sum of at most `n` unit fractions with denominators ≤
/// `bound` fall strictly inside (alpha, beta)? Exhaustive except for
/// the innermost denominator, which is counted analytically.
fn unit_sum_inside(alpha: &BigRational, beta: &BigRational, n: usize, bound: u64) -> bool {
    fn exists(alpha: &BigRational, beta: &BigRational, t: usize, min_m: u64, bound: u64) -> bool {
        if t == 1 {
            if !beta.is_positive() {
                return false;
            }
            let lo = beta
                .recip()
                .floor()
                .to_integer()
                .to_u64()
                .map(|f| f.saturating_add(1))
                .unwrap_or(u64::MAX)
                .max(min_m);
            let hi = if alpha.is_positive() {
                let cut = alpha.recip();
                let f = cut.floor().to_integer().to_u64().unwrap_or(u64::MAX);
                if cut.is_integer() {
                    f.saturating_sub(1)
                } else {
                    f
                }
            } else {
                u64::MAX
            }
            .min(bound);
            return lo <= hi;
        }
        for m in min_m..=bound {
            let unit = q(1, m as i64);
            if &unit * BigRational::from_integer(BigInt::from(t)) <= *alpha {
                return false; // even t copies of 1/m cannot reach past alpha
            }
            if exists(&(alpha - &unit), &(beta - &unit), t - 1, m, bound) {
                return true;
            }
        }
        false
    }
    if alpha.is_negative() && beta.is_positive() {
        return true; // the empty (zero-padded) sum
    }
    (1..=n).any(|t| exists(alpha, beta, t, 1, bound))
}

#[test]
fn criterion_1_ordered_representation_counts() {
    let t = Instant::now();

    let one = q(1, 1);
    let engine3: BTreeSet<Vec<BigRational>> = enumerate_representations(&unit_spec(3), &one)
        .unwrap()
        .into_iter()
        .map(|rep| rep.terms)
        .collect();
    assert_eq!(engine3.len(), 10);
    assert_eq!(engine3, oracle_ordered(&one, 3));

    let half = q(1, 2);
    let engine2: BTreeSet<Vec<BigRational>> = enumerate_representations(&unit_spec(2), &half)
        .unwrap()
        .into_iter()
        .map(|rep| rep.terms)
        .collect();
    assert_eq!(engine2.len(), 3);
    assert_eq!(engine2, oracle_ordered(&half, 2));

    finish(
        1,
        "10 ordered 3-term representations of 1 and 3 of 1/2, matching brute force",
        t,
        5,
    );
}

#[test]
fn criterion_2_integer_singleton_sumsets() {
    let t = Instant::now();
    let group = make_integers();
    let one_set = finite_set(group.clone(), vec![BigInt::one()]).unwrap();

    for n in 1..=8usize {
        let spec = SumSpec::new(group.clone(), vec![one_set.clone(); n]).unwrap();
        let net = build_net(&spec, 1, DEFAULT_TUPLE_BUDGET).unwrap();
        let expected: Vec<BigInt> = (0..=n as i64).map(BigInt::from).collect();
        assert_eq!(net.points, expected, "net for n = {n}");
        assert!(net.fattening.is_zero());

        let reps = enumerate_representations(&spec, &BigInt::from(n as i64)).unwrap();
        assert_eq!(reps.len(), 1, "n = {n} must have a unique representation");
        assert!(reps[0].terms.iter().all(|t| t.is_one()));
    }

    finish(2, "ℤ with T = {1}: net {0,…,n} and a unique representation up to n = 8", t, 1);
}

#[test]
fn criterion_3_gap_certificates_cross_checked() {
    let t = Instant::now();

    let two = unit_spec(2);
    let cert2 = match find_gap(&two, (&q(5, 6), &q(1, 1)), 8, DEFAULT_TUPLE_BUDGET).unwrap() {
        GapOutcome::Found(c) => c,
        GapOutcome::NotFoundAtResolution { .. } => panic!("no certificate over (5/6, 1)"),
    };
    assert_eq!((&cert2.gap.0, &cert2.gap.1), (&q(5, 6), &q(1, 1)));

    let one = unit_spec(1);
    let cert1 = match find_gap(&one, (&q(1, 3), &q(1, 2)), 8, DEFAULT_TUPLE_BUDGET).unwrap() {
        GapOutcome::Found(c) => c,
        GapOutcome::NotFoundAtResolution { .. } => panic!("no certificate over (1/3, 1/2)"),
    };
    assert_eq!((&cert1.gap.0, &cert1.gap.1), (&q(1, 3), &q(1, 2)));

    assert!(!unit_sum_inside(&cert2.gap.0, &cert2.gap.1, 2, 1_000));
    assert!(!unit_sum_inside(&cert1.gap.0, &cert1.gap.1, 1, 1_000));

    finish(
        3,
        "gaps (5/6, 1) for two terms and (1/3, 1/2) for one term, empty by brute force",
        t,
        5,
    );
}

#[test]
fn criterion_4_nets_cover_random_representations() {
    let t = Instant::now();
    let mut checked = 0u32;

    // materialized nets where they are cheap: nearest-point distances
    for (n, k) in [(2, 4), (2, 6), (2, 8), (3, 4), (3, 6)] {
        let spec = unit_spec(n);
        let net = build_net(&spec, k, DEFAULT_TUPLE_BUDGET).unwrap();
        let bound = BigRational::from_integer(BigInt::from(n)) * pow2(k);
        assert_eq!(net.fattening, bound);
        let report = cover_soundness(&spec, &net, 170, 0x5eed + k as u64).unwrap();
        assert!(report.all_within, "escape at n = {n}, k = {k}");
        assert!(report.max_distance < bound);
        checked += report.trials;
    }

    // n = 3 at k = 8: the net has millions of points, so exhibit the
    // covering point directly instead of materializing. Replacing each
    // term by itself (if it survives truncation) or zero lands on a net
    // point by construction, within n·2^{-k} exactly.
    {
        let k = 8u32;
        let set = unit_fractions();
        let deep = set.truncate(k + 8);
        let shallow = set.truncate(k);
        let bound = BigRational::from_integer(BigInt::from(3)) * pow2(k);
        let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee);
        let group = make_rationals();
        for _ in 0..170 {
            let terms: Vec<BigRational> = (0..3)
                .map(|_| deep[rng.gen_range(0..deep.len())].clone())
                .collect();
            let total = terms
                .iter()
                .fold(BigRational::zero(), |acc, x| group.add(&acc, x));
            let net_point = terms
                .iter()
                .map(|x| {
                    if shallow.binary_search(x).is_ok() {
                        x.clone()
                    } else {
                        BigRational::zero()
                    }
                })
                .fold(BigRational::zero(), |acc, x| group.add(&acc, &x));
            let distance = (&total - &net_point).abs();
            assert!(distance < bound, "distance {distance} at terms {terms:?}");
            checked += 1;
        }
    }

    assert!(checked >= 1_000, "only {checked} representations sampled");
    finish(
        4,
        "1020 random 2- and 3-term sums within n·2^{-k} of a net point at k in {4,6,8}",
        t,
        30,
    );
}

#[test]
fn criterion_5_census_stabilizes_at_enumeration_count() {
    let t = Instant::now();
    let spec = unit_spec(2);
    let mut rng = ChaCha8Rng::seed_from_u64(20_26);

    for trial in 0..20 {
        let g = q(1, rng.gen_range(2..=8)) + q(1, rng.gen_range(2..=8));
        let reps = enumerate_representations(&spec, &g).unwrap();
        let report =
            representation_census(&spec, &g, &[3, 6, 9, 12], DEFAULT_TUPLE_BUDGET).unwrap();
        for w in report.counts.windows(2) {
            assert!(w[0] <= w[1], "trial {trial}: counts fell: {:?}", report.counts);
        }
        assert_eq!(
            *report.counts.last().unwrap() as usize,
            reps.len(),
            "trial {trial}: census for {g} did not stabilize at the enumeration count"
        );
    }

    finish(
        5,
        "20 random targets: censuses nondecreasing over (3,6,9,12), tails equal enumeration",
        t,
        60,
    );
}

#[test]
fn criterion_6_trichotomy_classification() {
    let t = Instant::now();
    let units = unit_fractions();
    let mixed = SumSpec::new(
        make_rationals(),
        vec![units.clone(), units.clone(), negate(&units)],
    )
    .unwrap();
    let schedule = [4u32, 6, 8];
    let mut outcomes = Vec::new();

    let census_half =
        representation_census(&mixed, &q(1, 2), &schedule, DEFAULT_TUPLE_BUDGET).unwrap();
    assert!(
        census_half.counts[0] < census_half.counts[1]
            && census_half.counts[1] < census_half.counts[2],
        "membership census must keep growing: {:?}",
        census_half.counts
    );
    let verdict = trichotomy_check(&mixed, &q(1, 2), &census_half).unwrap();
    assert_eq!(verdict, TrichotomyOutcome::Member(1), "1/2 = 1/2 + 1/m - 1/m");
    outcomes.push(verdict);

    let census_zero =
        representation_census(&mixed, &BigRational::zero(), &schedule, DEFAULT_TUPLE_BUDGET)
            .unwrap();
    assert!(census_zero.counts[0] < census_zero.counts[1]);
    let verdict = trichotomy_check(&mixed, &BigRational::zero(), &census_zero).unwrap();
    assert_eq!(verdict, TrichotomyOutcome::Zero);
    outcomes.push(verdict);

    let plain = unit_spec(3);
    let census_one = representation_census(&plain, &q(1, 1), &schedule, DEFAULT_TUPLE_BUDGET).unwrap();
    let verdict = trichotomy_check(&plain, &q(1, 1), &census_one).unwrap();
    assert_eq!(verdict, TrichotomyOutcome::FiniteStable);
    assert_eq!(*census_one.counts.last().unwrap(), 10);
    outcomes.push(verdict);

    assert!(
        outcomes.iter().all(|o| *o != TrichotomyOutcome::Violation),
        "a violation verdict would falsify the classification theorem"
    );

    finish(
        6,
        "MEMBER(1) for 1/2, ZERO for 0, FINITE_STABLE for 1; no violations",
        t,
        60,
    );
}

fn half_plus_units_spec() -> SumSpec<Rationals> {
    let group = make_rationals();
    let half = finite_set(group.clone(), vec![q(1, 2)]).unwrap();
    let tail = weighted(
        WeightedSpec::new(
            vec![BigRational::one()],
            BoundStream::Arithmetic {
                start: q(2, 1),
                step: q(1, 1),
            },
        )
        .unwrap(),
    );
    SumSpec::new(group, vec![half, tail]).unwrap()
}

#[test]
fn criterion_7_accumulation_point_and_decreasing_trace() {
    let t = Instant::now();
    let stream = ElementStream::new(half_plus_units_spec(), StreamOrder::ByDenominatorSum);

    match find_accumulation_point(&stream, 64, 20).unwrap() {
        AccumulationOutcome::Found(p) => assert_eq!(p, q(1, 2)),
        AccumulationOutcome::NoneFound => panic!("1/2 must be recovered"),
    }

    let trace = match extract_decreasing(&stream, &q(1, 2), 20, 1_000_000) {
        ExtractOutcome::Complete(trace) => trace,
        ExtractOutcome::BudgetExhausted(trace) => {
            panic!("budget exhausted after {} terms", trace.terms.len())
        }
    };
    assert_eq!(trace.terms.len(), 20);
    assert_eq!(trace.terms[0].value, q(1, 1));
    assert_eq!(trace.terms[1].value, q(5, 6));
    assert_eq!(trace.terms[2].value, q(3, 4));
    for w in trace.terms.windows(2) {
        assert!(w[1].value < w[0].value, "trace must strictly decrease");
    }
    for item in &trace.terms {
        assert!(item.value > q(1, 2));
        assert!(item.witness.verify(stream.spec()));
    }

    finish(
        7,
        "accumulation point 1/2 recovered; strictly decreasing 20-term trace starts 1, 5/6, 3/4",
        t,
        5,
    );
}

#[test]
fn criterion_8_no_accumulation_from_below() {
    let t = Instant::now();
    let spec = unit_spec(2);
    let half = q(1, 2);
    let eta = q(1, 100);
    let schedule = [6u32, 8, 10];

    let below =
        below_accumulation_census(&spec, &half, &eta, &schedule, DEFAULT_TUPLE_BUDGET).unwrap();
    assert_eq!(below, vec![0, 0, 0]);

    let above =
        above_accumulation_census(&spec, &half, &eta, &schedule, DEFAULT_TUPLE_BUDGET).unwrap();
    assert_eq!(above, vec![0, 156, 924]);
    assert!(above[0] < above[1] && above[1] < above[2]);

    // brute-force confirmation with denominators to 10^3: nothing sums
    // into the lower window, something does sum into the upper one
    assert!(!unit_sum_inside(&(&half - &eta), &half, 2, 1_000));
    assert!(unit_sum_inside(&half, &(&half + &eta), 2, 1_000)); // 1/2 + 1/101

    finish(
        8,
        "zero census below 1/2 at η = 1/100 over (6,8,10); above-side keeps growing",
        t,
        10,
    );
}

#[test]
fn criterion_9_weighted_truncations_match_formula() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9_181);

    for trial in 0..10 {
        let mut numerators = BTreeSet::new();
        for _ in 0..rng.gen_range(1..=3) {
            numerators.insert(q(rng.gen_range(1..=9), rng.gen_range(1..=4)));
        }
        let numerators: Vec<BigRational> = numerators.into_iter().collect();
        let stream = BoundStream::Geometric {
            start: q(rng.gen_range(1..=5), 1),
            ratio: q(rng.gen_range(3..=6), 2),
        };
        let set: Lcf0Set<Rationals> =
            weighted(WeightedSpec::new(numerators.clone(), stream.clone()).unwrap());

        for k in 0..=16u32 {
            let eps = pow2(k);
            // the defining formula, evaluated by raw stream iteration
            let mut expected = BTreeSet::new();
            let cutoff = numerators.iter().max().unwrap() / &eps;
            for b in stream.iter() {
                if b >= cutoff {
                    break;
                }
                for a in &numerators {
                    if b < a / &eps {
                        expected.insert(a / &b);
                    }
                }
            }
            let expected: Vec<BigRational> = expected.into_iter().collect();
            assert_eq!(*set.truncate(k), expected, "trial {trial}, depth {k}");
        }
    }

    finish(
        9,
        "10 random weighted sets match {a/b : b < a/ε} by raw iteration to depth 16",
        t,
        5,
    );
}

#[test]
fn criterion_10_cli_output_is_byte_identical_across_runs() {
    let t = Instant::now();
    let units2 = r#"[{"kind":"unit_fractions"},{"kind":"unit_fractions"}]"#;
    let units3 =
        r#"[{"kind":"unit_fractions"},{"kind":"unit_fractions"},{"kind":"unit_fractions"}]"#;
    let half_plus = r#"[{"kind":"finite","elements":["1/2"]},{"kind":"weighted","A":["1"],"B":{"kind":"arithmetic","start":"2","step":"1"}}]"#;
    let ones4 = r#"[{"kind":"finite","elements":["1"]},{"kind":"finite","elements":["1"]},{"kind":"finite","elements":["1"]},{"kind":"finite","elements":["1"]}]"#;
    let pairs = r#"[{"kind":"finite","elements":["(0,1)","(1,-2)"]},{"kind":"finite","elements":["(0,1)","(1,-2)"]}]"#;

    let runs: Vec<(&str, String, i32)> = vec![
        (
            "reps",
            format!(r#"{{"group":"rationals","sets":{units3},"target":"1"}}"#),
            0,
        ),
        (
            "reps",
            format!(r#"{{"group":"integers","sets":{ones4},"target":"4"}}"#),
            0,
        ),
        (
            "reps",
            format!(r#"{{"group":"lex_pairs","sets":{pairs},"target":"(1,-1)"}}"#),
            0,
        ),
        (
            "census",
            format!(r#"{{"group":"rationals","sets":{units3},"target":"1","schedule":[1,2,3,6]}}"#),
            0,
        ),
        (
            "gap",
            format!(r#"{{"group":"rationals","sets":{units2},"query":["5/6","1"],"k_max":8}}"#),
            0,
        ),
        (
            "gap",
            format!(r#"{{"group":"rationals","sets":{units2},"query":["5/6","1"],"k_max":1}}"#),
            2,
        ),
        (
            "net",
            format!(r#"{{"group":"rationals","sets":[{{"kind":"unit_fractions"}}],"k":2}}"#),
            0,
        ),
        (
            "accum",
            format!(
                r#"{{"group":"rationals","sets":{half_plus},"order":"by-denominator-sum","samples":64,"depth":20}}"#
            ),
            0,
        ),
        (
            "decseq",
            format!(
                r#"{{"group":"rationals","sets":{half_plus},"order":"by-denominator-sum","point":"1/2","length":5}}"#
            ),
            0,
        ),
        (
            "belowcensus",
            format!(
                r#"{{"group":"rationals","sets":{units2},"point":"1/2","eta":"1/100","schedule":[6,8,10]}}"#
            ),
            0,
        ),
        (
            "belowcensus",
            format!(
                r#"{{"group":"rationals","sets":{units2},"point":"1/2","eta":"1/100","schedule":[6,8,10],"side":"above"}}"#
            ),
            0,
        ),
        (
            "validate",
            format!(
                r#"{{"group":"rationals","sets":[{{"kind":"unit_fractions"}},{{"kind":"negate","of":{{"kind":"unit_fractions"}}}}]}}"#
            ),
            0,
        ),
    ];

    for (command, config, want_exit) in &runs {
        let (out1, err1, code1) = common::egyptian(&["--command", command], config);
        let (out2, _err2, code2) = common::egyptian(&["--command", command], config);
        assert_eq!(code1, *want_exit, "{command}: exit {code1}, stderr: {err1}");
        assert_eq!(code2, *want_exit);
        assert_eq!(out1, out2, "{command} output changed between runs");
        assert!(!out1.is_empty(), "{command} printed nothing");
    }

    finish(
        10,
        "every command produced byte-identical output across two runs",
        t,
        120,
    );
}
