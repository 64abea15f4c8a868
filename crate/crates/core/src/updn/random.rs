//! Seeded generators for nets, markings and firing sequences.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{guard_holds, Marking, Transition, Updn};
use crate::vector::{fresh_values, DataValue, DataVector, FiniteInjection, Tuple};

/// Modes enumerated per transition and step beyond this count are ignored.
const MAX_MODES: usize = 4096;

/// Shape of generated nets and markings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetShape {
    /// Places, drawn uniformly from `1..=max_places`.
    pub max_places: usize,
    /// Transitions, drawn uniformly from `1..=max_transitions`.
    pub max_transitions: usize,
    /// Size of each flow multiset, drawn uniformly from `0..=max_flow`.
    pub max_flow: usize,
    /// Variables are the ids `0..variables`.
    pub variables: u64,
    /// Marking data values are the ids `0..data_range`.
    pub data_range: u64,
    /// Token count per place and data value, uniform in `0..=max_tokens`.
    pub max_tokens: u64,
}

impl Default for NetShape {
    fn default() -> Self {
        NetShape {
            max_places: 3,
            max_transitions: 3,
            max_flow: 2,
            variables: 3,
            data_range: 3,
            max_tokens: 2,
        }
    }
}

type Arcs = Vec<(usize, DataValue, u64)>;

fn random_arcs(rng: &mut ChaCha8Rng, places: usize, shape: &NetShape) -> Arcs {
    let mut arcs = Vec::new();
    for p in 0..places {
        for _ in 0..rng.gen_range(0..=shape.max_flow) {
            arcs.push((
                p,
                DataValue::new(rng.gen_range(0..shape.variables.max(1))),
                1,
            ));
        }
    }
    arcs
}

/// A deterministic random net with places `p0, p1, …` and transitions
/// `t0, t1, …`.
pub fn random_net(seed: u64, shape: &NetShape) -> Updn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let places = rng.gen_range(1..=shape.max_places.max(1));
    let mut net =
        Updn::new((0..places).map(|p| format!("p{p}")).collect()).expect("places are distinct");
    for t in 0..rng.gen_range(1..=shape.max_transitions.max(1)) {
        let input = random_arcs(&mut rng, places, shape);
        let output = random_arcs(&mut rng, places, shape);
        net.add_transition(&format!("t{t}"), &input, &output)
            .expect("arcs in range");
    }
    net
}

/// A random net in which every transition `tᵢ` has a reverse `rᵢ` with input
/// and output swapped, so the displacements form a reversible set.
pub fn random_reversible_net(seed: u64, shape: &NetShape) -> Updn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let places = rng.gen_range(1..=shape.max_places.max(1));
    let mut net =
        Updn::new((0..places).map(|p| format!("p{p}")).collect()).expect("places are distinct");
    for t in 0..rng.gen_range(1..=shape.max_transitions.max(1)) {
        let input = random_arcs(&mut rng, places, shape);
        let output = random_arcs(&mut rng, places, shape);
        net.add_transition(&format!("t{t}"), &input, &output)
            .expect("arcs in range");
        net.add_transition(&format!("r{t}"), &output, &input)
            .expect("arcs in range");
    }
    net
}

/// A deterministic random marking of `net`.
pub fn random_marking(seed: u64, net: &Updn, shape: &NetShape) -> Marking {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = net.num_places();
    let mut entries = Vec::new();
    for p in 0..n {
        for a in 0..shape.data_range {
            let k = rng.gen_range(0..=shape.max_tokens);
            let mut e = vec![BigInt::from(0); n];
            e[p] = BigInt::from(k);
            entries.push((DataValue::new(a), Tuple::new(e)));
        }
    }
    Marking::new(DataVector::from_entries(n, entries).expect("dimension is positive"))
        .expect("counts are nonnegative")
}

/// Bindings of the input variables of `tr` that satisfy its guard in `m`,
/// in lexicographic order of images.
fn input_modes(tr: &Transition, m: &Marking) -> Vec<Vec<(DataValue, DataValue)>> {
    let vars: Vec<DataValue> = tr.input_variables().into_iter().collect();
    let candidates: Vec<DataValue> = m.vector().support().collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    extend_modes(tr, m, &vars, &candidates, &mut current, &mut out);
    out
}

fn extend_modes(
    tr: &Transition,
    m: &Marking,
    vars: &[DataValue],
    candidates: &[DataValue],
    current: &mut Vec<(DataValue, DataValue)>,
    out: &mut Vec<Vec<(DataValue, DataValue)>>,
) {
    if out.len() >= MAX_MODES {
        return;
    }
    let Some(&x) = vars.get(current.len()) else {
        out.push(current.clone());
        return;
    };
    for &alpha in candidates {
        if current.iter().any(|(_, b)| *b == alpha) {
            continue;
        }
        let fits = tr.input.iter().enumerate().all(|(p, flow)| {
            flow.get(&x)
                .map_or(true, |k| m.count(p, alpha) >= BigInt::from(*k))
        });
        if fits {
            current.push((x, alpha));
            extend_modes(tr, m, vars, candidates, current, out);
            current.pop();
        }
    }
}

/// One step of a generated firing sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub transition: usize,
    pub mode: FiniteInjection,
    /// The marking after the step.
    pub marking: Marking,
}

/// Every marking visited by [`random_firings`], starting with `start`.
pub fn random_walk(net: &Updn, start: &Marking, steps: usize, seed: u64) -> Vec<Marking> {
    let mut out = vec![start.clone()];
    out.extend(
        random_firings(net, start, steps, seed)
            .into_iter()
            .map(|f| f.marking),
    );
    out
}

/// A deterministic random firing sequence of at most `steps` steps from
/// `start`. Each step picks uniformly among enabled (transition, input binding) pairs;
/// output-only variables are then bound to distinct values drawn from the
/// marking's support and fresh values. Stops early when nothing is enabled.
pub fn random_firings(net: &Updn, start: &Marking, steps: usize, seed: u64) -> Vec<Firing> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fired = Vec::new();
    let mut m = start.clone();
    for _ in 0..steps {
        let mut options = Vec::new();
        for (t, tr) in net.transitions.iter().enumerate() {
            for binding in input_modes(tr, &m) {
                options.push((t, binding));
            }
        }
        let Some((t, binding)) = options.choose(&mut rng).cloned() else {
            break;
        };
        let tr = &net.transitions[t];
        let mut pairs = binding;
        let out_only: Vec<DataValue> = tr
            .variables()
            .difference(&tr.input_variables())
            .copied()
            .collect();
        let support: BTreeSet<DataValue> = m.vector().support_set();
        let mut pool: Vec<DataValue> = support.iter().copied().collect();
        pool.extend(fresh_values(&support, out_only.len()));
        for x in out_only {
            let free: Vec<DataValue> = pool
                .iter()
                .copied()
                .filter(|a| pairs.iter().all(|(_, b)| b != a))
                .collect();
            let alpha = *free
                .choose(&mut rng)
                .expect("pool has a fresh value per variable");
            pairs.push((x, alpha));
        }
        let mode = FiniteInjection::new(pairs).expect("bindings are distinct");
        debug_assert!(guard_holds(tr, &m, &mode));
        m = net.fire(&m, t, &mode).expect("binding satisfies the guard");
        fired.push(Firing {
            transition: t,
            mode,
            marking: m.clone(),
        });
    }
    fired
}
