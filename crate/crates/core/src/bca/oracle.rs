//! Breadth-first ground truth for reachability, and seeded automata.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Bca, BcaError, Configuration, Run};
use crate::vector::{fresh_values, DataValue, DataVector, FiniteInjection, Tuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBounds {
    /// Configurations with an entry of absolute value above this are cut.
    pub value_bound: u64,
    /// Values outside the endpoint supports that may be in use at once.
    pub fresh_bound: usize,
    /// Exploring more distinct configurations is an error.
    pub state_cap: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            value_bound: 5,
            fresh_bound: 3,
            state_cap: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// A shortest run.
    Reachable(Run),
    /// The search was exhaustive: no successor was ever cut by a bound.
    Unreachable,
    /// Not found, but some successors were cut.
    NoUpToBound,
}

/// Renaming-invariant key: values outside `known` only matter up to renaming,
/// so they are recorded as a sorted list of their tuples.
type Key = (usize, Vec<(DataValue, Tuple)>, Vec<Tuple>);

fn key(c: &Configuration, known: &BTreeSet<DataValue>) -> Key {
    let mut fixed = Vec::new();
    let mut floating = Vec::new();
    for (a, t) in c.vector.iter() {
        if known.contains(&a) {
            fixed.push((a, t.clone()));
        } else {
            floating.push(t.clone());
        }
    }
    floating.sort();
    (c.state, fixed, floating)
}

/// Breadth-first search over configurations whose data values are those of
/// the two endpoints plus a pool of `fresh_bound` others. Pool values not in
/// the current support are interchangeable, so an injection may only use the
/// smallest ones, in ascending order.
pub fn bfs_oracle(
    a: &Bca,
    from: &Configuration,
    to: &Configuration,
    bounds: &OracleBounds,
) -> Result<OracleVerdict, BcaError> {
    a.check_config(from)?;
    a.check_config(to)?;
    let mut known = from.vector.support_set();
    known.extend(to.vector.support());
    let pool = fresh_values(&known, bounds.fresh_bound);
    let limit = BigInt::from(bounds.value_bound);

    let mut nodes: Vec<(Configuration, Option<(usize, usize, FiniteInjection)>)> =
        vec![(from.clone(), None)];
    let mut seen: HashMap<Key, usize> = HashMap::new();
    seen.insert(key(from, &known), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut cut = false;
    let target = key(to, &known);

    while let Some(i) = queue.pop_front() {
        let cur = nodes[i].0.clone();
        if key(&cur, &known) == target {
            return Ok(OracleVerdict::Reachable(path_to(&nodes, i)));
        }
        for (e, edge) in a.edges.iter().enumerate() {
            if edge.from != cur.state {
                continue;
            }
            let (thetas, exhausted) = canonical_injections(&edge.label, &cur.vector, &known, &pool);
            cut |= exhausted;
            for theta in thetas {
                let next = a.step(&cur, e, &theta)?;
                if next
                    .vector
                    .iter()
                    .any(|(_, t)| t.entries().iter().any(|x| x.abs() > limit))
                {
                    cut = true;
                    continue;
                }
                let k = key(&next, &known);
                if seen.contains_key(&k) {
                    continue;
                }
                if nodes.len() >= bounds.state_cap {
                    return Err(BcaError::StateCapExceeded(bounds.state_cap));
                }
                seen.insert(k, nodes.len());
                queue.push_back(nodes.len());
                nodes.push((next, Some((i, e, theta))));
            }
        }
    }
    Ok(if cut {
        OracleVerdict::NoUpToBound
    } else {
        OracleVerdict::Unreachable
    })
}

fn path_to(
    nodes: &[(Configuration, Option<(usize, usize, FiniteInjection)>)],
    mut i: usize,
) -> Run {
    let mut steps = Vec::new();
    while let Some((parent, e, theta)) = &nodes[i].1 {
        steps.push((*e, theta.clone()));
        i = *parent;
    }
    steps.reverse();
    Run { steps }
}

/// Injections of the label's support into the endpoint values, the pool
/// values in use, and the smallest idle pool values. The flag is set when
/// the pool had fewer idle values than the label has support values.
fn canonical_injections(
    label: &DataVector,
    current: &DataVector,
    known: &BTreeSet<DataValue>,
    pool: &[DataValue],
) -> (Vec<FiniteInjection>, bool) {
    let domain: Vec<DataValue> = label.support().collect();
    let busy: Vec<DataValue> = known
        .iter()
        .copied()
        .chain(pool.iter().copied().filter(|p| current.get(*p).is_some()))
        .collect();
    let idle: Vec<DataValue> = pool
        .iter()
        .copied()
        .filter(|p| current.get(*p).is_none())
        .collect();
    let exhausted = idle.len() < domain.len();
    let mut out = Vec::new();
    let mut images = Vec::new();
    assign(&domain, &busy, &idle, 0, &mut images, &mut out);
    (out, exhausted)
}

fn assign(
    domain: &[DataValue],
    busy: &[DataValue],
    idle: &[DataValue],
    idle_used: usize,
    images: &mut Vec<DataValue>,
    out: &mut Vec<FiniteInjection>,
) {
    if images.len() == domain.len() {
        let pairs = domain.iter().copied().zip(images.iter().copied());
        out.push(FiniteInjection::new(pairs).expect("images are distinct"));
        return;
    }
    for &b in busy {
        if !images.contains(&b) {
            images.push(b);
            assign(domain, busy, idle, idle_used, images, out);
            images.pop();
        }
    }
    if let Some(&b) = idle.get(idle_used) {
        images.push(b);
        assign(domain, busy, idle, idle_used + 1, images, out);
        images.pop();
    }
}

/// Shape of generated automata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BcaShape {
    /// States, drawn uniformly from `1..=max_states`.
    pub max_states: usize,
    /// Counter dimension, drawn uniformly from `1..=max_dim`.
    pub max_dim: usize,
    /// Edges, drawn uniformly from `1..=max_edges`.
    pub max_edges: usize,
    /// Label entries are uniform in `[-entry_bound, entry_bound]`.
    pub entry_bound: i64,
    /// Label supports have size uniform in `0..=max_support`.
    pub max_support: usize,
    /// Label and endpoint values are the ids `0..data_range`.
    pub data_range: u64,
}

impl Default for BcaShape {
    fn default() -> Self {
        BcaShape {
            max_states: 3,
            max_dim: 2,
            max_edges: 4,
            entry_bound: 1,
            max_support: 2,
            data_range: 3,
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, shape: &BcaShape) -> DataVector {
    let size = rng.gen_range(0..=shape.max_support.min(shape.data_range as usize));
    let mut support = BTreeSet::new();
    while support.len() < size {
        support.insert(DataValue::new(rng.gen_range(0..shape.data_range)));
    }
    let entries = support.into_iter().map(|a| {
        let xs: Vec<i64> = (0..dim)
            .map(|_| rng.gen_range(-shape.entry_bound..=shape.entry_bound))
            .collect();
        (a, Tuple::from_i64s(&xs))
    });
    DataVector::from_entries(dim, entries).expect("dimension is positive")
}

/// A deterministic random automaton with states `q0, q1, …`, and two
/// configurations on it: the source at a random state with a random vector;
/// the target, for odd seeds, reached from the source by up to four random
/// steps, and otherwise independent.
pub fn random_bca(seed: u64, shape: &BcaShape) -> (Bca, Configuration, Configuration) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = rng.gen_range(1..=shape.max_states.max(1));
    let dim = rng.gen_range(1..=shape.max_dim.max(1));
    let mut bca =
        Bca::new(dim, (0..states).map(|q| format!("q{q}")).collect()).expect("states are distinct");
    for _ in 0..rng.gen_range(1..=shape.max_edges.max(1)) {
        let from = rng.gen_range(0..states);
        let to = rng.gen_range(0..states);
        let label = random_vector(&mut rng, dim, shape);
        bca.add_edge(from, to, label).expect("endpoints in range");
    }
    let from = Configuration {
        state: rng.gen_range(0..states),
        vector: random_vector(&mut rng, dim, shape),
    };
    let to = if seed % 2 == 1 {
        let mut cur = from.clone();
        for _ in 0..rng.gen_range(0..=4) {
            let out: Vec<usize> = (0..bca.edges.len())
                .filter(|e| bca.edges[*e].from == cur.state)
                .collect();
            if out.is_empty() {
                break;
            }
            let e = out[rng.gen_range(0..out.len())];
            let label = &bca.edges[e].label;
            let mut images = Vec::new();
            while images.len() < label.support_len() {
                let b = DataValue::new(rng.gen_range(0..shape.data_range + 2));
                if !images.contains(&b) {
                    images.push(b);
                }
            }
            let theta =
                FiniteInjection::new(label.support().zip(images)).expect("images are distinct");
            cur = bca
                .step(&cur, e, &theta)
                .expect("edge leaves the current state");
        }
        cur
    } else {
        Configuration {
            state: rng.gen_range(0..states),
            vector: random_vector(&mut rng, dim, shape),
        }
    };
    (bca, from, to)
}
