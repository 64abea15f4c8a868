//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines are always shown.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use datavec::bca::{
    bfs_oracle, random_bca, reachable, BcaShape, OracleBounds, OracleVerdict, Reachability,
};
use datavec::expressibility::{
    fast_is_permutation_sum, is_permutation_sum, support_bound, synthesize_reversible_witness,
    verify_witness, ExpressibilityInstance, PermutationSumWitness,
};
use datavec::histogram::{decompose, Histogram, SimpleHistogram};
use datavec::oracle::{
    finite_domain_decide, oracle_decide, random_instance, random_planted_instance,
    random_reversible_instance, InstanceShape, OracleBudget, OracleResult,
};
use datavec::reversibility::{is_reversible_set, reversal_witness, ReversibleSet};
use datavec::updn::{
    effects_certificate, random_firings, random_marking, random_net, random_reversible_net,
    random_walk, state_equation, state_equation_fast, NetShape, Updn,
};
use datavec::vector::{DataValue, DataVector, FiniteInjection, Tuple};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXAMPLE_BUDGET: Duration = Duration::from_millis(10);
const ORACLE_SUITE_BUDGET: Duration = Duration::from_secs(120);
const SCALED_FAST_BUDGET: Duration = Duration::from_secs(1);

fn d(id: u64) -> DataValue {
    DataValue::new(id)
}

struct Verdict {
    pass: bool,
    summary: String,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Verdict {
            pass,
            summary: summary.into(),
        }
    }
}

/// A witness together with the instance it was produced for.
type Produced = (ExpressibilityInstance, PermutationSumWitness);

fn ms(t: Duration) -> String {
    format!("{:.1} ms", t.as_secs_f64() * 1000.0)
}

fn sums_back(h: &Histogram, parts: &[SimpleHistogram]) -> bool {
    let mut sum = Histogram::zero(h.rows().iter().copied()).expect("rows are nonempty");
    for p in parts {
        match sum.add(p.histogram()) {
            Ok(s) => sum = s,
            Err(_) => return false,
        }
    }
    sum == *h
}

/// Rows `α₁, α₂` and columns `β₁…β₅` as ids `1, 2` and `11…15`.
fn degree_four_histogram() -> Verdict {
    let start = Instant::now();
    let h = Histogram::validate(
        [d(1), d(2)],
        [
            (d(1), d(12), 2),
            (d(1), d(13), 1),
            (d(1), d(15), 1),
            (d(2), d(11), 3),
            (d(2), d(13), 1),
        ],
    );
    let Ok(h) = h else {
        return Verdict::new(false, "the histogram does not validate");
    };
    let parts = decompose(&h);
    let elapsed = start.elapsed();
    let Ok(parts) = parts else {
        return Verdict::new(false, "decomposition failed");
    };
    let pass =
        h.degree() == 4 && parts.len() == 4 && sums_back(&h, &parts) && elapsed < EXAMPLE_BUDGET;
    Verdict::new(
        pass,
        format!(
            "degree {}, {} parts, {} (limit 10 ms)",
            h.degree(),
            parts.len(),
            ms(elapsed)
        ),
    )
}

/// A sum of `degree` random injections from `|S| ≤ 4` rows into at most 8 columns.
fn random_histogram(seed: u64) -> Histogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.gen_range(1..=4u64);
    let columns = rng.gen_range(rows..=8);
    let degree = rng.gen_range(1..=8);
    let mut pool: Vec<u64> = (100..100 + columns).collect();
    let mut h = Histogram::zero((0..rows).map(d)).expect("rows are nonempty");
    for _ in 0..degree {
        pool.shuffle(&mut rng);
        let pi = FiniteInjection::new((0..rows).map(|r| (d(r), d(pool[r as usize]))))
            .expect("distinct images");
        let x = SimpleHistogram::from_injection(&pi).expect("injections are simple");
        h = h.add(x.histogram()).expect("same rows");
    }
    h
}

fn decomposition_suite() -> Verdict {
    let mut failures = 0;
    for seed in 0..500 {
        let h = random_histogram(seed);
        let ok = match decompose(&h) {
            Ok(parts) => parts.len() as u64 == h.degree() && sums_back(&h, &parts),
            Err(_) => false,
        };
        if !ok {
            failures += 1;
        }
    }
    Verdict::new(
        failures == 0,
        format!("500 histograms, {failures} failures"),
    )
}

fn oracle_agreement(produced: &mut Vec<Produced>) -> Verdict {
    let start = Instant::now();
    let (mut positives, mut failures, mut capped) = (0, 0, 0);
    for seed in 0..200u64 {
        let shape = InstanceShape {
            dim: 1 + (seed % 2) as usize,
            max_base: 3,
            max_support: 3,
            entry_bound: 2,
            data_range: 6,
        };
        let inst = if seed % 4 < 2 {
            random_planted_instance(seed, &shape, 4)
        } else {
            random_instance(seed, &shape)
        };
        match oracle_decide(&inst, &OracleBudget::for_instance(&inst, 4)) {
            Ok(OracleResult::Yes(_)) => {
                positives += 1;
                match is_permutation_sum(&inst) {
                    Ok(out) => match out.witness {
                        Some(w) if verify_witness(&inst, &w).unwrap_or(false) => {
                            produced.push((inst, w))
                        }
                        _ => failures += 1,
                    },
                    Err(_) => failures += 1,
                }
            }
            Ok(OracleResult::NoUpToBudget) => {}
            Err(_) => capped += 1,
        }
    }
    let elapsed = start.elapsed();
    let pass = failures == 0 && elapsed < ORACLE_SUITE_BUDGET;
    Verdict::new(
        pass,
        format!(
            "200 instances, {positives} oracle YES, {failures} not accepted, {capped} oracle caps, {:.1} s (limit 120 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn reversible_shape(seed: u64) -> InstanceShape {
    InstanceShape {
        dim: 1 + (seed % 2) as usize,
        max_base: 3,
        max_support: 2,
        entry_bound: 2,
        data_range: 6,
    }
}

fn fast_agreement(produced: &mut Vec<Produced>) -> Verdict {
    let (mut yes, mut disagreements, mut bad_witnesses) = (0, 0, 0);
    for seed in 0..100u64 {
        let inst = random_reversible_instance(seed, &reversible_shape(seed), 3);
        let Ok(cert) = ReversibleSet::certify(inst.base().to_vec()) else {
            disagreements += 1;
            continue;
        };
        let fast = fast_is_permutation_sum(&inst, &cert).expect("certificate matches");
        let general = is_permutation_sum(&inst).expect("dimensions agree");
        if fast != general.is_yes() {
            disagreements += 1;
            continue;
        }
        if fast {
            yes += 1;
            for w in [
                general.witness,
                synthesize_reversible_witness(&inst, &cert).ok(),
            ] {
                match w {
                    Some(w) if verify_witness(&inst, &w).unwrap_or(false) => {
                        produced.push((inst.clone(), w))
                    }
                    _ => bad_witnesses += 1,
                }
            }
        }
    }
    Verdict::new(
        disagreements == 0 && bad_witnesses == 0,
        format!("100 reversible instances, {yes} YES, {disagreements} disagreements, {bad_witnesses} bad witnesses"),
    )
}

fn reversal_soundness(produced: &mut Vec<Produced>) -> Verdict {
    let (mut sets, mut members, mut failures) = (0, 0, 0);
    for seed in 0..300u64 {
        let inst = if seed < 100 {
            random_reversible_instance(seed, &reversible_shape(seed), 3)
        } else {
            random_instance(seed, &reversible_shape(seed))
        };
        let base = inst.base();
        if !is_reversible_set(base)
            .expect("dimensions agree")
            .is_reversible()
        {
            continue;
        }
        sets += 1;
        for v in base {
            members += 1;
            let reverse =
                ExpressibilityInstance::new(base.to_vec(), v.neg()).expect("dimensions agree");
            match reversal_witness(v, base) {
                Ok(w) if verify_witness(&reverse, &w).unwrap_or(false) => {
                    produced.push((reverse, w))
                }
                _ => failures += 1,
            }
        }
    }
    Verdict::new(
        failures == 0 && sets > 0,
        format!("{sets} reversible sets, {members} members, {failures} failures"),
    )
}

fn support_bounds(produced: &[Produced]) -> Verdict {
    let violations = produced
        .iter()
        .filter(|(inst, w)| w.data_values().len() > support_bound(inst))
        .count();
    Verdict::new(
        violations == 0,
        format!("{} witnesses, {violations} violations", produced.len()),
    )
}

fn state_equation_soundness() -> Verdict {
    let shape = NetShape::default();
    let (mut pairs, mut failures) = (0, 0);
    for seed in 0..100 {
        let net = random_net(seed, &shape);
        let start = random_marking(seed, &net, &shape);
        for m in random_walk(&net, &start, 10, seed) {
            pairs += 1;
            if !state_equation(&net, &start, &m)
                .map(|o| o.holds())
                .unwrap_or(false)
            {
                failures += 1;
            }
        }
    }
    Verdict::new(
        failures == 0,
        format!("100 nets, {pairs} visited markings, {failures} failures"),
    )
}

/// Ten places and fifty transitions with their reverses, each flow over ten
/// variables, so every displacement has support at most ten.
fn scaled_net(seed: u64) -> Updn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net =
        Updn::new((0..10).map(|p| format!("p{p}")).collect()).expect("places are distinct");
    let arcs = |rng: &mut ChaCha8Rng| -> Vec<(usize, DataValue, u64)> {
        (0..rng.gen_range(1..=4))
            .map(|_| {
                (
                    rng.gen_range(0..10),
                    d(rng.gen_range(0..10)),
                    rng.gen_range(1..=2),
                )
            })
            .collect()
    };
    for t in 0..50 {
        let input = arcs(&mut rng);
        let output = arcs(&mut rng);
        net.add_transition(&format!("t{t}"), &input, &output)
            .expect("arcs in range");
        net.add_transition(&format!("r{t}"), &output, &input)
            .expect("arcs in range");
    }
    net
}

fn updn_fast_route() -> Verdict {
    let shape = NetShape::default();
    let mut disagreements = 0;
    for seed in 0..50 {
        let net = random_reversible_net(seed, &shape);
        let from = random_marking(seed, &net, &shape);
        let to = if seed % 2 == 0 {
            random_marking(seed + 1000, &net, &shape)
        } else {
            random_walk(&net, &from, 6, seed)
                .pop()
                .expect("walks start at the source")
        };
        let Some(cert) = effects_certificate(&net) else {
            disagreements += 1;
            continue;
        };
        let fast = state_equation_fast(&net, &from, &to, &cert).expect("markings fit");
        let general = state_equation(&net, &from, &to)
            .expect("markings fit")
            .holds();
        if fast != general {
            disagreements += 1;
        }
    }

    let net = scaled_net(7);
    let big = NetShape {
        data_range: 12,
        max_tokens: 3,
        ..NetShape::default()
    };
    let from = random_marking(7, &net, &big);
    let to = random_firings(&net, &from, 30, 7)
        .pop()
        .map_or(from.clone(), |f| f.marking);
    let max_support = net
        .displacements()
        .iter()
        .map(DataVector::support_len)
        .max()
        .unwrap_or(0);
    let start = Instant::now();
    let scaled = effects_certificate(&net).map(|cert| state_equation_fast(&net, &from, &to, &cert));
    let elapsed = start.elapsed();
    let scaled_ok = matches!(scaled, Some(Ok(true)));
    Verdict::new(
        disagreements == 0 && scaled_ok && elapsed < SCALED_FAST_BUDGET && max_support <= 10,
        format!(
            "50 marking pairs, {disagreements} disagreements; scaled net (10 places, {} effects, supports <= {max_support}) \
             certified and decided in {} (limit 1 s)",
            net.transitions().len(),
            ms(elapsed)
        ),
    )
}

fn bca_completeness() -> Verdict {
    let (mut agreed, mut disagreements, mut inconclusive) = (0, 0, 0);
    for seed in 0..150 {
        let (a, from, to) = random_bca(seed, &BcaShape::default());
        let decided = match reachable(&a, &from, &to) {
            Ok(out) => out.verdict,
            Err(_) => {
                disagreements += 1;
                continue;
            }
        };
        let oracle = bfs_oracle(&a, &from, &to, &OracleBounds::default());
        let agrees = match oracle {
            Ok(OracleVerdict::Reachable(_)) => decided.is_reachable(),
            Ok(OracleVerdict::Unreachable) => decided == Reachability::Unreachable,
            Ok(OracleVerdict::NoUpToBound) | Err(_) => {
                inconclusive += 1;
                continue;
            }
        };
        if agrees {
            agreed += 1;
        } else {
            disagreements += 1;
        }
    }
    Verdict::new(
        disagreements == 0,
        format!("150 automata, {agreed} agreements, {disagreements} disagreements, {inconclusive} oracle inconclusive"),
    )
}

/// Domain `{α₁, α₂, α₃}`, `v` constant 1 on it, target `⟦α₁ ↦ 3⟧`.
fn finite_domain_regression() -> Verdict {
    let domain: BTreeSet<DataValue> = (1..=3).map(d).collect();
    let v = DataVector::from_entries(1, domain.iter().map(|a| (*a, Tuple::from_i64s(&[1]))))
        .expect("dimension 1");
    let x = DataVector::lift(&Tuple::new(vec![BigInt::from(3)]), d(1));
    let inst = ExpressibilityInstance::new(vec![v.clone(), v.neg()], x).expect("dimensions agree");
    let cert = ReversibleSet::certify(inst.base().to_vec()).expect("v and -v reverse each other");
    let conditions = fast_is_permutation_sum(&inst, &cert).expect("certificate matches");
    let restricted = finite_domain_decide(&inst, &domain).expect("domain covers the target");
    Verdict::new(
        conditions && restricted.is_none(),
        format!(
            "subgroup conditions {}, restricted domain {}",
            if conditions { "hold" } else { "fail" },
            if restricted.is_some() { "YES" } else { "NO" }
        ),
    )
}

fn timed(name: &'static str, run: impl FnOnce() -> Verdict) -> (&'static str, Verdict, Duration) {
    let start = Instant::now();
    let v = run();
    (name, v, start.elapsed())
}

fn main() -> ExitCode {
    let mut produced = Vec::new();
    let mut results = vec![
        timed("degree-four histogram", degree_four_histogram),
        timed("decomposition suite", decomposition_suite),
        timed("oracle agreement", || oracle_agreement(&mut produced)),
        timed("fast path agreement", || fast_agreement(&mut produced)),
        timed("reversal soundness", || reversal_soundness(&mut produced)),
    ];
    results.push(timed("support bound", || support_bounds(&produced)));
    results.push(timed("state equation soundness", state_equation_soundness));
    results.push(timed("net fast route", updn_fast_route));
    results.push(timed("automata completeness", bca_completeness));
    results.push(timed("finite domain regression", finite_domain_regression));
    let mut failed = 0;
    for (i, (name, v, t)) in results.iter().enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {:>2} {name}: {} [{:.1} s]",
            i + 1,
            v.summary,
            t.as_secs_f64()
        );
        if !v.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
