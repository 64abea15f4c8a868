use super::*;
use crate::vector::Interner;

const COUNTER: &str = "state q0 qf;\nedge q0 -> q0 label {a: [1]};\nedge q0 -> qf label {};\n";

fn name(s: &str) -> DataValue {
    Interner::global().intern(s)
}

fn config(a: &Bca, state: &str, v: &str) -> Configuration {
    Configuration {
        state: a.state_index(state).unwrap(),
        vector: a.parse_vector(v).unwrap(),
    }
}

#[test]
fn parses_and_prints() {
    let a = Bca::parse(COUNTER).unwrap();
    assert_eq!(a.dim(), 1);
    assert_eq!(a.states(), ["q0", "qf"]);
    assert_eq!(a.edges().len(), 2);
    assert!(a.edges()[1].label.is_zero());
    assert_eq!(Bca::parse(&a.to_text()).unwrap(), a);

    let b = Bca::parse("dim 3;\nstate q;\nedge q -> q label {};").unwrap();
    assert_eq!(b.dim(), 3);
    let c = Bca::parse("state q;\nedge q -> q label {x: [1, -2]};").unwrap();
    assert_eq!(c.dim(), 2);
}

#[test]
fn parse_errors_carry_lines() {
    let err = Bca::parse("state q0;\n\nedge q0 -> q1 label {};").unwrap_err();
    assert_eq!(
        err,
        BcaError::Parse(ParseError::new(3, "unknown state `q1`"))
    );
    assert!(matches!(
        Bca::parse("dim 1;\nstate q;\nedge q -> q label {a: [1, 2]};"),
        Err(BcaError::Parse(e)) if e.line == 3
    ));
    assert!(
        matches!(Bca::parse("state q;\nedge q q label {};"), Err(BcaError::Parse(e)) if e.line == 2)
    );
    assert!(matches!(Bca::parse("state q q;"), Err(BcaError::Parse(_))));
    assert!(matches!(
        Bca::parse("dim 0;\nstate q;"),
        Err(BcaError::Parse(_))
    ));
    assert!(matches!(Bca::parse(""), Err(BcaError::Parse(_))));
}

#[test]
fn step_examples() {
    let a = Bca::parse(COUNTER).unwrap();
    let c = config(&a, "q0", "{}");
    let id = FiniteInjection::identity([name("a")]);
    let next = a.step(&c, 0, &id).unwrap();
    assert_eq!(next, config(&a, "q0", "{a: [1]}"));
    let done = a.step(&next, 1, &FiniteInjection::default()).unwrap();
    assert_eq!(done.vector, next.vector);
    assert_eq!(done.state, 1);
    assert_eq!(
        a.step(&done, 0, &id),
        Err(BcaError::EdgeMismatch {
            edge: 0,
            expected: 0,
            found: 1
        })
    );

    let inv =
        Bca::parse("state q;\nedge q -> q label {a: [2]};\nedge q -> q label {a: [-2]};").unwrap();
    let start = config(&inv, "q", "{b: [1]}");
    let theta = FiniteInjection::new([(name("a"), name("c"))]).unwrap();
    let there = inv.step(&start, 0, &theta).unwrap();
    assert_eq!(inv.step(&there, 1, &theta).unwrap(), start);
}

#[test]
fn augmentation_adds_state_counters() {
    let a = Bca::parse("state p q;\nedge p -> q label {a: [5]};\nedge q -> p label {a: [1]};\nedge p -> p label {a: [1]};")
        .unwrap();
    let aug = augment_counters(&a);
    assert_eq!(aug.bca.dim(), 3);
    assert!(!a.label_values().contains(&aug.marker));
    let e = &aug.bca.edges()[0].label;
    assert_eq!(e.value(name("a")), Tuple::from_i64s(&[5, 0, 0]));
    assert_eq!(e.value(aug.marker), Tuple::from_i64s(&[0, -1, 1]));
    assert_eq!(aug.bca.edges()[2].label.support_len(), 1);

    let mut cycle = DataVector::zero(3);
    cycle.add_assign(&aug.bca.edges()[0].label).unwrap();
    cycle.add_assign(&aug.bca.edges()[1].label).unwrap();
    assert_eq!(cycle.value(aug.marker), Tuple::zero(3));
    assert_eq!(cycle.value(name("a")), Tuple::from_i64s(&[6, 0, 0]));
}

fn count(s: Skeletons) -> usize {
    match s {
        Skeletons::Complete(l) => l.len(),
        Skeletons::Capped(_) => panic!("capped"),
    }
}

#[test]
fn skeleton_enumeration() {
    let a = Bca::parse(COUNTER).unwrap();
    let Skeletons::Complete(same) = skeletons(&a, 0, 0, 100).unwrap() else {
        panic!()
    };
    assert_eq!(
        same,
        vec![SkeletonPath {
            states: vec![0],
            edges: vec![]
        }]
    );
    let Skeletons::Complete(chain) = skeletons(&a, 0, 1, 100).unwrap() else {
        panic!()
    };
    assert_eq!(
        chain,
        vec![SkeletonPath {
            states: vec![0, 1],
            edges: vec![1]
        }]
    );

    // Self-loops on a and b plus a -> b: a loop is always removable.
    let loops = Bca::parse(
        "state a b;\nedge a -> a label {};\nedge b -> b label {};\nedge a -> b label {};",
    )
    .unwrap();
    assert_eq!(count(skeletons(&loops, 0, 1, 100).unwrap()), 1);
    assert_eq!(count(skeletons(&loops, 1, 0, 100).unwrap()), 0);

    // a <-> b plus a loop at a: from a to a, the empty walk and a b a.
    let back = Bca::parse(
        "state a b;\nedge a -> b label {};\nedge b -> a label {};\nedge a -> a label {};",
    )
    .unwrap();
    assert_eq!(count(skeletons(&back, 0, 0, 100).unwrap()), 2);

    // Two parallel edges a -> b and b -> c: two multisets from a to c; and
    // a -> b -> a -> c is irreducible since dropping a b a loses b.
    let par = Bca::parse(
        "state a b c;\nedge a -> b label {};\nedge a -> b label {};\nedge b -> a label {};\nedge a -> c label {};",
    )
    .unwrap();
    assert_eq!(count(skeletons(&par, 0, 2, 100).unwrap()), 3);
    assert!(matches!(skeletons(&par, 0, 2, 2).unwrap(), Skeletons::Capped(l) if l.len() == 2));
}

#[test]
fn skeletons_are_irreducible_and_short() {
    let full = Bca::parse(
        "state a b c;\nedge a -> b label {};\nedge b -> c label {};\nedge c -> a label {};\nedge b -> a label {};\nedge c -> b label {};\nedge a -> c label {};",
    )
    .unwrap();
    for q0 in 0..3 {
        for qf in 0..3 {
            let Skeletons::Complete(list) = skeletons(&full, q0, qf, 10_000).unwrap() else {
                panic!()
            };
            assert!(!list.is_empty());
            for s in list {
                assert!(s.edges.len() <= 9);
                assert_eq!(s.states[0], q0);
                assert_eq!(*s.states.last().unwrap(), qf);
            }
        }
    }
}

#[test]
fn reachability_examples() {
    let a = Bca::parse(COUNTER).unwrap();
    let from = config(&a, "q0", "{}");
    let to = config(&a, "qf", "{a: [3]}");
    let out = reachable(&a, &from, &to).unwrap();
    let Reachability::Reachable(run) = out.verdict else {
        panic!("expected a run")
    };
    assert_eq!(a.replay(&from, &run).unwrap(), to);

    let neg = config(&a, "qf", "{a: [-1]}");
    assert_eq!(
        reachable(&a, &from, &neg).unwrap().verdict,
        Reachability::Unreachable
    );
    let back = config(&a, "q0", "{}");
    assert_eq!(
        reachable(&a, &config(&a, "qf", "{}"), &back)
            .unwrap()
            .verdict,
        Reachability::Unreachable
    );
    let same = reachable(&a, &from, &from).unwrap();
    assert_eq!(same.verdict, Reachability::Reachable(Run::default()));
}

#[test]
fn loops_must_touch_the_skeleton() {
    // The +1 loop sits on a state that is never visited on the way to qf.
    let a =
        Bca::parse("state q0 qf s;\nedge q0 -> qf label {};\nedge s -> s label {a: [1]};").unwrap();
    let from = config(&a, "q0", "{}");
    let to = config(&a, "qf", "{a: [1]}");
    assert_eq!(
        reachable(&a, &from, &to).unwrap().verdict,
        Reachability::Unreachable
    );
}

#[test]
fn oracle_examples() {
    let a = Bca::parse(COUNTER).unwrap();
    let from = config(&a, "q0", "{}");
    let to = config(&a, "qf", "{a: [3]}");
    let bounds = OracleBounds::default();
    let OracleVerdict::Reachable(run) = bfs_oracle(&a, &from, &to, &bounds).unwrap() else {
        panic!()
    };
    assert_eq!(run.steps.len(), 4);
    assert_eq!(a.replay(&from, &run).unwrap(), to);
    assert_eq!(
        bfs_oracle(&a, &from, &from, &bounds).unwrap(),
        OracleVerdict::Reachable(Run::default())
    );
    let neg = config(&a, "qf", "{a: [-1]}");
    for value_bound in [1, 3, 5] {
        let b = OracleBounds {
            value_bound,
            ..bounds
        };
        assert_eq!(
            bfs_oracle(&a, &from, &neg, &b).unwrap(),
            OracleVerdict::NoUpToBound
        );
    }
    let tight = OracleBounds {
        state_cap: 3,
        ..bounds
    };
    assert_eq!(
        bfs_oracle(&a, &from, &neg, &tight),
        Err(BcaError::StateCapExceeded(3))
    );

    let stuck = Bca::parse("state p q;\nedge q -> p label {a: [1]};").unwrap();
    let from = config(&stuck, "p", "{}");
    let to = config(&stuck, "q", "{}");
    assert_eq!(
        bfs_oracle(&stuck, &from, &to, &bounds).unwrap(),
        OracleVerdict::Unreachable
    );
}

#[test]
fn agrees_with_the_oracle_on_small_automata() {
    let shape = BcaShape::default();
    let bounds = OracleBounds::default();
    for seed in 0..40 {
        let (a, from, to) = random_bca(seed, &shape);
        let decided = reachable(&a, &from, &to).unwrap().verdict;
        match bfs_oracle(&a, &from, &to, &bounds).unwrap() {
            OracleVerdict::Reachable(_) => assert!(decided.is_reachable(), "seed {seed}"),
            OracleVerdict::Unreachable => {
                assert_eq!(decided, Reachability::Unreachable, "seed {seed}")
            }
            OracleVerdict::NoUpToBound => {}
        }
    }
}

#[test]
fn parallel_fan_out_is_deterministic() {
    let shape = BcaShape::default();
    let opts = ReachOptions {
        parallel: true,
        ..ReachOptions::default()
    };
    for seed in 0..10 {
        let (a, from, to) = random_bca(seed, &shape);
        assert_eq!(
            reachable(&a, &from, &to).unwrap().verdict,
            reachable_with(&a, &from, &to, &opts).unwrap().verdict
        );
    }
}
