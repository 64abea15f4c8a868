use std::collections::{BTreeMap, BTreeSet, HashSet};

use datavec::bca::{augment_counters, random_bca, BcaShape};
use datavec::expressibility::{
    fast_is_permutation_sum, is_permutation_sum, support_bound, synthesize_reversible_witness,
    verify_witness, ExpressibilityInstance, WitnessTerm,
};
use datavec::histogram::{decompose, eval, extract_simple, Histogram, SimpleHistogram};
use datavec::linalg::{
    hnf, ilp_feasible, lp_feasible, HermiteForm, IlpInstance, LinearSystem, Rational, Relation,
};
use datavec::oracle::{
    canonical_sequences, random_planted_instance, random_reversible_instance, InstanceShape,
};
use datavec::reversibility::{is_reversible_in, reversal_witness, ReversibleSet};
use datavec::updn::{random_firings, random_marking, random_net, NetShape};
use datavec::vector::{DataValue, DataVector, FiniteInjection, Tuple};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn d(id: u64) -> DataValue {
    DataValue::new(id)
}

fn vector(dim: usize, entries: &BTreeMap<u64, Vec<i64>>) -> DataVector {
    DataVector::from_entries(
        dim,
        entries
            .iter()
            .map(|(a, xs)| (d(*a), Tuple::from_i64s(&xs[..dim]))),
    )
    .unwrap()
}

/// Vectors over ids `0..8` with entries in `[-3, 3]`; zero tuples may be drawn.
fn arb_vector(dim: usize) -> impl Strategy<Value = DataVector> {
    prop::collection::btree_map(0u64..8, prop::collection::vec(-3i64..=3, dim), 0..5)
        .prop_map(move |m| vector(dim, &m))
}

/// A permutation of ids `0..16`; restricted to `0..8` it is an injection
/// covering every vector drawn by [`arb_vector`].
fn arb_renaming() -> impl Strategy<Value = FiniteInjection> {
    Just((0u64..16).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|images| {
            FiniteInjection::new((0..8).map(|a| (d(a), d(images[a as usize])))).unwrap()
        })
}

fn stored_tuples_are_nonzero(v: &DataVector) -> bool {
    v.iter().all(|(_, t)| !t.is_zero())
}

proptest! {
    #[test]
    fn renaming_preserves_weight_and_support_size(v in arb_vector(2), pi in arb_renaming()) {
        let w = v.apply_injection(&pi).unwrap();
        prop_assert_eq!(w.weight(), v.weight());
        prop_assert_eq!(w.support_len(), v.support_len());
        prop_assert!(stored_tuples_are_nonzero(&w));
    }

    #[test]
    fn equalize_spreads_the_weight(v in arb_vector(2), extra in prop::collection::btree_set(0u64..12, 0..4)) {
        let mut set = v.support_set();
        set.extend(extra.into_iter().map(d));
        let e = v.equalize(&set).unwrap();
        for a in &set {
            prop_assert_eq!(e.value(*a), v.weight());
        }
        prop_assert!(e.support().all(|a| set.contains(&a)));
        prop_assert!(stored_tuples_are_nonzero(&e));
    }

    #[test]
    fn full_rotation_is_the_identity(v in arb_vector(1), extra in prop::collection::btree_set(0u64..12, 0..4)) {
        let mut set = v.support_set();
        set.extend(extra.into_iter().map(d));
        prop_assert_eq!(v.rotate(&set, set.len()).unwrap(), v.clone());
        if set.len() > 1 && !v.is_zero() {
            let once = v.rotate(&set, 1).unwrap();
            prop_assert_eq!(once.weight(), v.weight());
        }
    }

    #[test]
    fn addition_is_a_commutative_monoid(a in arb_vector(2), b in arb_vector(2), c in arb_vector(2)) {
        let ab_c = a.add(&b).unwrap().add(&c).unwrap();
        let a_bc = a.add(&b.add(&c).unwrap()).unwrap();
        prop_assert_eq!(&ab_c, &a_bc);
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.add(&DataVector::zero(2)).unwrap(), a.clone());
        prop_assert!(a.add(&a.neg()).unwrap().is_zero());
        prop_assert!(stored_tuples_are_nonzero(&ab_c));
        prop_assert!(stored_tuples_are_nonzero(&a.sub(&b).unwrap()));
    }
}

/// Row set `0..rows` and `degree` injections into the columns `100..108`.
fn arb_histogram() -> impl Strategy<Value = Histogram> {
    (1usize..=4, 0usize..=8)
        .prop_flat_map(|(rows, degree)| {
            let column_ids = Just((100u64..108).collect::<Vec<_>>()).prop_shuffle();
            (Just(rows), prop::collection::vec(column_ids, degree))
        })
        .prop_map(|(rows, parts)| {
            let mut h = Histogram::zero((0..rows as u64).map(d)).unwrap();
            for cols in parts {
                let pi =
                    FiniteInjection::new((0..rows).map(|r| (d(r as u64), d(cols[r])))).unwrap();
                h = h
                    .add(SimpleHistogram::from_injection(&pi).unwrap().histogram())
                    .unwrap();
            }
            h
        })
}

fn row_vector(h: &Histogram, values: &[i64]) -> DataVector {
    let entries = h
        .rows()
        .iter()
        .zip(values)
        .map(|(r, x)| (*r, Tuple::from_i64s(&[*x, 1])));
    DataVector::from_entries(2, entries).unwrap()
}

proptest! {
    #[test]
    fn decomposition_sums_back(h in arb_histogram()) {
        let parts = decompose(&h).unwrap();
        prop_assert_eq!(parts.len() as u64, h.degree());
        let mut sum = Histogram::zero(h.rows().iter().copied()).unwrap();
        for p in &parts {
            prop_assert_eq!(p.histogram().rows(), h.rows());
            prop_assert!(SimpleHistogram::new(p.histogram().clone()).is_ok());
            sum = sum.add(p.histogram()).unwrap();
        }
        prop_assert_eq!(sum, h);
    }

    #[test]
    fn extraction_lowers_the_degree_and_covers_saturated_columns(h in arb_histogram()) {
        prop_assume!(h.degree() > 0);
        let (x, rest) = extract_simple(&h).unwrap();
        prop_assert_eq!(rest.degree(), h.degree() - 1);
        let revalidated = Histogram::validate(rest.rows().iter().copied(), rest.entries()).unwrap();
        prop_assert_eq!(&revalidated, &rest);
        let covered = x.histogram().column_sums().unwrap();
        for (c, s) in h.column_sums().unwrap() {
            if s == h.degree() {
                prop_assert_eq!(covered.get(&c), Some(&1));
            }
        }
    }

    #[test]
    fn eval_is_additive(
        (h1, h2) in arb_histogram().prop_flat_map(|h1| {
            let rows = h1.rows().len();
            (Just(h1), arb_histogram().prop_filter("same rows", move |h| h.rows().len() == rows))
        }),
        values in prop::collection::vec(-3i64..=3, 4),
    ) {
        let v = row_vector(&h1, &values);
        let whole = eval(&v, &h1.add(&h2).unwrap()).unwrap();
        prop_assert_eq!(whole, eval(&v, &h1).unwrap().add(&eval(&v, &h2).unwrap()).unwrap());
    }
}

fn relation(i: u8) -> Relation {
    match i % 3 {
        0 => Relation::Eq,
        1 => Relation::Le,
        _ => Relation::Ge,
    }
}

type RawRow = (Vec<i64>, u8, i64);

fn arb_rows() -> impl Strategy<Value = Vec<RawRow>> {
    prop::collection::vec(
        (prop::collection::vec(-3i64..=3, 3), any::<u8>(), -6i64..=6),
        1..=3,
    )
}

fn system(rows: &[RawRow]) -> LinearSystem {
    let mut sys = LinearSystem::new(3);
    for (coeffs, rel, rhs) in rows {
        let coeffs = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| (j, BigInt::from(*c)));
        sys.add_int_row(coeffs, relation(*rel), BigInt::from(*rhs))
            .unwrap();
    }
    sys
}

fn as_rationals(x: &[BigInt]) -> Vec<Rational> {
    x.iter().cloned().map(Rational::from_integer).collect()
}

/// Every integer point of `[0, bound]^3`.
fn box_points(bound: i64) -> impl Iterator<Item = Vec<BigInt>> {
    (0..=bound).flat_map(move |a| {
        (0..=bound).flat_map(move |b| {
            (0..=bound).map(move |c| vec![BigInt::from(a), BigInt::from(b), BigInt::from(c)])
        })
    })
}

fn det(m: &[Vec<BigInt>]) -> BigInt {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut total = BigInt::zero();
    for (j, a) in m[0].iter().enumerate() {
        let minor: Vec<Vec<BigInt>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = a * det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * &brow[j]).sum())
                .collect()
        })
        .collect()
}

proptest! {
    #[test]
    fn lp_solutions_satisfy_the_system(rows in arb_rows()) {
        let sys = system(&rows);
        match lp_feasible(&sys) {
            Some(x) => prop_assert!(sys.is_satisfied_by(&x)),
            None => prop_assert!(box_points(4).all(|p| !sys.is_satisfied_by(&as_rationals(&p)))),
        }
    }

    #[test]
    fn bounded_ilp_agrees_with_enumeration(rows in arb_rows()) {
        let sys = system(&rows);
        let any_point = box_points(3).any(|p| sys.is_satisfied_by(&as_rationals(&p)));
        let inst = IlpInstance::with_upper_bounds(sys.clone(), vec![BigInt::from(3); 3]).unwrap();
        match ilp_feasible(&inst) {
            Some(x) => {
                prop_assert!(sys.is_satisfied_by(&as_rationals(&x)));
                prop_assert!(x.iter().all(|v| !v.is_negative() && *v <= BigInt::from(3)));
            }
            None => prop_assert!(!any_point),
        }
        prop_assert_eq!(ilp_feasible(&inst).is_some(), any_point);
    }

    #[test]
    fn hermite_form_is_normalized(m in prop::collection::vec(prop::collection::vec(-4i64..=4, 3), 2..=3)) {
        let m: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|x| BigInt::from(*x)).collect()).collect();
        let (h, u) = hnf(&m);
        prop_assert_eq!(mat_mul(&m, &u), h.clone());
        prop_assert!(det(&u).abs().is_one());
        let form = HermiteForm::compute(&m, 3, false);
        prop_assert_eq!(&form.h, &h);
        let mut last_row = None;
        for (k, &(r, c)) in form.pivots.iter().enumerate() {
            prop_assert_eq!(c, k);
            prop_assert!(last_row.map_or(true, |l| r > l));
            last_row = Some(r);
            prop_assert!(h[r][c].is_positive());
            prop_assert!((0..r).all(|i| h[i][c].is_zero()));
            prop_assert!((0..c).all(|j| !h[r][j].is_negative() && h[r][j] < h[r][c]));
        }
        prop_assert_eq!(form.rank(), form.pivots.len());
        for row in &h {
            prop_assert!(row[form.pivots.len()..].iter().all(Zero::is_zero));
        }
    }
}

fn small_shape(dim: usize, max_base: usize) -> InstanceShape {
    InstanceShape {
        dim,
        max_base,
        max_support: 2,
        ..InstanceShape::default()
    }
}

/// Whether `w` is a nonnegative integer combination of `gens`.
fn in_integer_cone(w: &Tuple, gens: &[Tuple]) -> bool {
    let mut sys = LinearSystem::new(gens.len());
    for k in 0..w.dim() {
        let row = gens
            .iter()
            .enumerate()
            .map(|(j, g)| (j, g.entries()[k].clone()));
        sys.add_int_row(row, Relation::Eq, w.entries()[k].clone())
            .unwrap();
    }
    ilp_feasible(&IlpInstance::new(sys)).is_some()
}

/// Nonnegative integer combinations with coefficients at most `bound`.
fn in_bounded_cone(w: &Tuple, gens: &[Tuple], bound: i64) -> bool {
    fn go(rest: Tuple, gens: &[Tuple], bound: i64) -> bool {
        match gens.split_first() {
            None => rest.is_zero(),
            Some((g, tail)) => (0..=bound).any(|n| {
                let used = g.scale(&BigInt::from(n));
                let left: Vec<BigInt> = rest
                    .entries()
                    .iter()
                    .zip(used.entries())
                    .map(|(a, b)| a - b)
                    .collect();
                go(Tuple::new(left), tail, bound)
            }),
        }
    }
    go(w.clone(), gens, bound)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fast_and_general_agree_on_reversible_sets(seed in 0u64..100_000, dim in 1usize..=2) {
        let inst = random_reversible_instance(seed, &small_shape(dim, 3), 3);
        let cert = ReversibleSet::certify(inst.base().to_vec()).unwrap();
        let fast = fast_is_permutation_sum(&inst, &cert).unwrap();
        let general = is_permutation_sum(&inst).unwrap();
        prop_assert_eq!(fast, general.is_yes());
        if fast {
            let w = synthesize_reversible_witness(&inst, &cert).unwrap();
            prop_assert!(verify_witness(&inst, &w).unwrap());
        }
    }

    #[test]
    fn general_witnesses_verify_within_the_support_bound(seed in 0u64..100_000, dim in 1usize..=2) {
        let inst = random_planted_instance(seed, &small_shape(dim, 3), 3);
        let out = is_permutation_sum(&inst).unwrap();
        prop_assert!(out.is_yes());
        let w = out.witness.unwrap();
        prop_assert!(verify_witness(&inst, &w).unwrap());
        prop_assert!(w.data_values().len() <= support_bound(&inst));
        let weights: Vec<Tuple> = inst.base().iter().map(DataVector::weight).collect();
        prop_assert!(in_integer_cone(&inst.target().weight(), &weights));
    }

    #[test]
    fn reversibility_is_sound_and_complete(seed in 0u64..100_000, dim in 1usize..=2) {
        let inst = random_planted_instance(seed, &small_shape(dim, 3), 1);
        let base = inst.base();
        let weights: Vec<Tuple> = base.iter().map(DataVector::weight).collect();
        for v in base {
            let reversible = is_reversible_in(v, base).unwrap();
            let reverse = ExpressibilityInstance::new(base.to_vec(), v.neg()).unwrap();
            prop_assert_eq!(is_permutation_sum(&reverse).unwrap().is_yes(), reversible);
            // Rational feasibility of the weight equation is integer feasibility,
            // because `v` itself may absorb the common denominator.
            let negated = Tuple::new(v.weight().entries().iter().map(|x| -x).collect());
            prop_assert_eq!(in_integer_cone(&negated, &weights), reversible);
            if in_bounded_cone(&negated, &weights, 4) {
                prop_assert!(reversible);
            }
            if reversible {
                let w = reversal_witness(v, base).unwrap();
                prop_assert!(verify_witness(&reverse, &w).unwrap());
            }
        }
    }
}

/// Relabels values outside `anchored` in order of first appearance.
fn relabel(
    seq: &[WitnessTerm],
    anchored: &BTreeSet<DataValue>,
    free: &[DataValue],
) -> Vec<(usize, Vec<(DataValue, DataValue)>)> {
    let mut names: BTreeMap<DataValue, DataValue> = BTreeMap::new();
    seq.iter()
        .map(|t| {
            let pairs = t
                .map
                .pairs()
                .map(|(a, b)| {
                    if anchored.contains(&b) {
                        (a, b)
                    } else {
                        let next = names.len();
                        (a, *names.entry(b).or_insert_with(|| free[next]))
                    }
                })
                .collect();
            (t.base, pairs)
        })
        .collect()
}

fn naive_sequences(base: &[DataVector], pool: &[DataValue], len: usize) -> Vec<Vec<WitnessTerm>> {
    fn injections(
        domain: &[DataValue],
        pool: &[DataValue],
        image: &mut Vec<DataValue>,
        out: &mut Vec<FiniteInjection>,
    ) {
        if image.len() == domain.len() {
            out.push(
                FiniteInjection::new(domain.iter().copied().zip(image.iter().copied())).unwrap(),
            );
            return;
        }
        for &b in pool {
            if !image.contains(&b) {
                image.push(b);
                injections(domain, pool, image, out);
                image.pop();
            }
        }
    }
    let mut terms = Vec::new();
    for (j, v) in base.iter().enumerate() {
        let domain: Vec<DataValue> = v.support().collect();
        let mut maps = Vec::new();
        injections(&domain, pool, &mut Vec::new(), &mut maps);
        terms.extend(maps.into_iter().map(|map| WitnessTerm { base: j, map }));
    }
    let mut out: Vec<Vec<WitnessTerm>> = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                terms.iter().map(move |t| {
                    let mut s = s.clone();
                    s.push(t.clone());
                    s
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn canonical_enumeration_counts_renaming_classes(seed in 0u64..100_000, len in 1usize..=2) {
        let shape = InstanceShape { max_base: 2, data_range: 3, ..small_shape(1, 2) };
        let inst = random_planted_instance(seed, &shape, 2);
        let anchored = inst.target().support_set();
        let free: Vec<DataValue> = (200..203).map(d).collect();
        let mut pool: Vec<DataValue> = anchored.iter().copied().collect();
        pool.extend(&free);
        let canonical = canonical_sequences(&inst, &pool, len);
        let classes: HashSet<_> = naive_sequences(inst.base(), &pool, len)
            .iter()
            .map(|s| relabel(s, &anchored, &free))
            .collect();
        prop_assert_eq!(canonical.len(), classes.len());
        for s in &canonical {
            prop_assert!(classes.contains(&relabel(s, &anchored, &free)));
            prop_assert_eq!(relabel(s, &anchored, &free), s.iter().map(|t| (t.base, t.map.pairs().collect())).collect::<Vec<_>>());
        }
    }

    #[test]
    fn firing_adds_the_renamed_displacement(seed in 0u64..100_000) {
        let shape = NetShape::default();
        let net = random_net(seed, &shape);
        let start = random_marking(seed, &net, &shape);
        let mut m = start;
        for f in random_firings(&net, &m.clone(), 10, seed) {
            let delta = net.displacement(f.transition).unwrap().apply_injection(&f.mode).unwrap();
            prop_assert_eq!(f.marking.vector(), &m.vector().add(&delta).unwrap());
            prop_assert_eq!(&net.fire(&m, f.transition, &f.mode).unwrap(), &f.marking);
            m = f.marking;
        }
    }

    #[test]
    fn augmented_counters_telescope(seed in 0u64..100_000, choices in prop::collection::vec(any::<prop::sample::Index>(), 0..8)) {
        let (a, from, _) = random_bca(seed, &BcaShape::default());
        let aug = augment_counters(&a);
        let k = a.dim();
        let n = a.states().len();
        let mut state = from.state;
        let mut aux = vec![BigInt::zero(); n];
        for choice in choices {
            let out: Vec<usize> = (0..a.edges().len()).filter(|e| a.edges()[*e].from == state).collect();
            if out.is_empty() {
                break;
            }
            let e = *choice.get(&out);
            let at_marker = aug.bca.edges()[e].label.value(aug.marker);
            for (q, x) in at_marker.entries()[k..].iter().enumerate() {
                aux[q] += x;
            }
            state = a.edges()[e].to;
        }
        let mut expected = vec![BigInt::zero(); n];
        expected[state] += 1;
        expected[from.state] -= 1;
        prop_assert_eq!(aux, expected);
    }

    #[test]
    fn steps_add_the_label_weight(seed in 0u64..100_000, pi in arb_renaming(), pick in any::<prop::sample::Index>()) {
        let (a, from, _) = random_bca(seed, &BcaShape::default());
        let out: Vec<usize> = (0..a.edges().len()).filter(|e| a.edges()[*e].from == from.state).collect();
        prop_assume!(!out.is_empty());
        let e = *pick.get(&out);
        let next = a.step(&from, e, &pi).unwrap();
        let label = &a.edges()[e].label;
        prop_assert_eq!(next.vector.weight(), from.vector.add(label).unwrap().weight());
        prop_assert_eq!(next.state, a.edges()[e].to);
    }
}
