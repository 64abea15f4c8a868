use std::fs;
use std::io::Read as _;

use anyhow::{anyhow, bail, Context, Result};
use datavec::bca::{self, Bca, Configuration, ReachOptions, Reachability};
use datavec::expressibility::{
    build_ilp, first_mismatch, is_permutation_sum, synthesize_reversible_witness,
    ExpressibilityInstance,
};
use datavec::histogram::{decompose, Histogram};
use datavec::json::{
    base_set_from_json, histogram_from_json, injection_to_json, instance_from_json,
    instance_to_json, vector_to_json, witness_from_json, witness_to_json,
};
use datavec::oracle::{
    oracle_decide, random_instance, random_planted_instance, random_reversible_instance,
    InstanceShape, OracleBudget, OracleResult,
};
use datavec::reversibility::{
    is_reversible_set, reversal_witness, ReversibilityError, ReversibleSet,
};
use datavec::updn::{effects_certificate, state_equation, state_equation_fast, Updn};
use serde_json::{json, Value};

use crate::report::{Decision, InputDigest, RunReport};

/// Reads a file, or standard input for `-`, feeding the bytes to the digest.
fn read_file(path: &str, digest: &mut InputDigest) -> Result<String> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))?
    };
    digest.feed(text.as_bytes());
    Ok(text)
}

/// An inline argument, or the contents of a file when written `@path`.
fn read_inline(arg: &str, digest: &mut InputDigest) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => read_file(path, digest),
        None => {
            digest.feed(arg.as_bytes());
            Ok(arg.to_string())
        }
    }
}

fn read_json(path: &str, digest: &mut InputDigest) -> Result<Value> {
    let text = read_file(path, digest)?;
    serde_json::from_str(&text).with_context(|| format!("{path} is not valid JSON"))
}

fn read_instance(path: &str, digest: &mut InputDigest) -> Result<ExpressibilityInstance> {
    let v = read_json(path, digest)?;
    instance_from_json(&v).with_context(|| format!("{path} is not an instance"))
}

pub struct ExpressibleArgs<'a> {
    pub instance: &'a str,
    pub fast: bool,
    pub witness: bool,
    pub oracle_depth: Option<usize>,
}

pub fn expressible(args: ExpressibleArgs) -> Result<RunReport> {
    let mut digest = InputDigest::default();
    let inst = read_instance(args.instance, &mut digest)?;
    let mut report = RunReport::new("expressible", digest.finish(), Decision::No);
    if args.fast {
        let cert = match ReversibleSet::certify(inst.base().to_vec()) {
            Ok(cert) => cert,
            Err(ReversibilityError::NotReversible(_)) => {
                let culprits = is_reversible_set(inst.base())?.culprits();
                bail!(
                    "--fast needs a reversible base set, but base vectors {culprits:?} are not reversible; \
                     run without --fast for the general procedure"
                );
            }
            Err(e) => return Err(e.into()),
        };
        let yes = datavec::expressibility::fast_is_permutation_sum(&inst, &cert)?;
        report.decision = Decision::from_bool(yes);
        report.detail("route", json!("fast"));
        if yes && args.witness {
            report.witness = Some(witness_to_json(&synthesize_reversible_witness(
                &inst, &cert,
            )?));
        }
    } else {
        let out = is_permutation_sum(&inst)?;
        report.decision = Decision::from_bool(out.is_yes());
        report.stats = out.stats;
        report.detail("route", json!("general"));
        report.detail("fresh_columns", json!(out.fresh_columns));
        if let (Some(w), true) = (&out.witness, args.witness) {
            report.witness = Some(witness_to_json(w));
        }
    }
    if let Some(depth) = args.oracle_depth {
        let oracle = oracle_decide(&inst, &OracleBudget::for_instance(&inst, depth))?;
        report.detail(
            "oracle",
            json!(if oracle.is_yes() {
                "YES"
            } else {
                "NO_UP_TO_BUDGET"
            }),
        );
        if oracle.is_yes() && report.decision == Decision::No {
            bail!(
                "cross-check failed: the oracle found a permutation sum of depth at most {depth}"
            );
        }
    }
    Ok(report)
}

pub fn reversible(set: &str, witness: bool) -> Result<RunReport> {
    let mut digest = InputDigest::default();
    let v = read_json(set, &mut digest)?;
    let (_, base) = base_set_from_json(&v).with_context(|| format!("{set} is not a base set"))?;
    let verdict = is_reversible_set(&base)?;
    let mut report = RunReport::new(
        "reversible",
        digest.finish(),
        Decision::from_bool(verdict.is_reversible()),
    );
    report.detail("members", json!(verdict.per_vector));
    report.detail("culprits", json!(verdict.culprits()));
    if witness {
        let mut out = Vec::new();
        for (i, v) in base.iter().enumerate() {
            if verdict.per_vector[i] {
                let w = reversal_witness(v, &base)?;
                out.push(json!({"member": i, "x": vector_to_json(&v.neg()), "witness": witness_to_json(&w)}));
            }
        }
        report.witness = Some(Value::Array(out));
    }
    Ok(report)
}

pub fn hist_decompose(path: &str) -> Result<RunReport> {
    let mut digest = InputDigest::default();
    let v = read_json(path, &mut digest)?;
    let (rows, entries) =
        histogram_from_json(&v).with_context(|| format!("{path} is not a histogram"))?;
    let h = Histogram::validate(rows, entries).context("invalid histogram")?;
    let parts = decompose(&h)?;
    let mut report = RunReport::new("hist decompose", digest.finish(), Decision::Yes);
    report.detail("degree", json!(h.degree()));
    report.detail(
        "parts",
        Value::Array(
            parts
                .iter()
                .map(|p| injection_to_json(&p.to_injection()))
                .collect(),
        ),
    );
    Ok(report)
}

pub fn verify(instance: &str, witness: &str) -> Result<RunReport> {
    let mut digest = InputDigest::default();
    let inst = read_instance(instance, &mut digest)?;
    let wv = read_json(witness, &mut digest)?;
    let w = witness_from_json(&wv).with_context(|| format!("{witness} is not a witness"))?;
    let mismatch = first_mismatch(&inst, &w)?;
    let mut report = RunReport::new(
        "verify",
        digest.finish(),
        Decision::from_bool(mismatch.is_none()),
    );
    report.detail("terms", json!(w.len()));
    if let Some(a) = mismatch {
        let found = w.evaluate(inst.base(), inst.dim())?.value(a);
        let expected = inst.target().value(a);
        report.detail(
            "first_mismatch",
            json!({
                "value": a.to_string(),
                "expected": expected.entries().iter().map(datavec::json::bigint_to_json).collect::<Vec<_>>(),
                "found": found.entries().iter().map(datavec::json::bigint_to_json).collect::<Vec<_>>(),
            }),
        );
    }
    Ok(report)
}

pub fn updn_check(net: &str, from: &str, to: &str, fast: bool, witness: bool) -> Result<RunReport> {
    let mut digest = InputDigest::default();
    let text = read_file(net, &mut digest)?;
    let net = Updn::parse(&text).with_context(|| format!("reading net {net}"))?;
    let from = net
        .parse_marking(&read_inline(from, &mut digest)?)
        .context("source marking")?;
    let to = net
        .parse_marking(&read_inline(to, &mut digest)?)
        .context("target marking")?;
    let mut report = RunReport::new("updn check", digest.finish(), Decision::No);
    if fast {
        let Some(cert) = effects_certificate(&net) else {
            bail!("--fast needs transition displacements that form a reversible set, and these do not");
        };
        report.decision = Decision::from_bool(state_equation_fast(&net, &from, &to, &cert)?);
        report.detail("route", json!("fast"));
    } else {
        let out = state_equation(&net, &from, &to)?;
        report.decision = Decision::from_bool(out.holds());
        report.stats = out.stats;
        report.detail("route", json!("general"));
        if let (Some(terms), true) = (&out.witness, witness) {
            let terms: Vec<Value> = terms
                .iter()
                .map(|t| {
                    json!({
                        "transition": net.transitions()[t.transition].name(),
                        "mode": injection_to_json(&t.mode),
                    })
                })
                .collect();
            report.witness = Some(Value::Array(terms));
        }
    }
    Ok(report)
}

pub struct ReachArgs<'a> {
    pub automaton: &'a str,
    pub from_state: &'a str,
    pub from_vec: &'a str,
    pub to_state: &'a str,
    pub to_vec: &'a str,
    pub skeleton_cap: usize,
    pub parallel: bool,
    pub witness: bool,
}

fn configuration(
    a: &Bca,
    state: &str,
    vector: &str,
    digest: &mut InputDigest,
) -> Result<Configuration> {
    digest.feed(state.as_bytes());
    let state = a
        .state_index(state)
        .ok_or_else(|| anyhow!("unknown state `{state}`"))?;
    let vector = a.parse_vector(&read_inline(vector, digest)?)?;
    Ok(Configuration { state, vector })
}

pub fn bca_reach(args: ReachArgs) -> Result<RunReport> {
    let mut digest = InputDigest::default();
    let text = read_file(args.automaton, &mut digest)?;
    let a = Bca::parse(&text).with_context(|| format!("reading automaton {}", args.automaton))?;
    let from = configuration(&a, args.from_state, args.from_vec, &mut digest)?;
    let to = configuration(&a, args.to_state, args.to_vec, &mut digest)?;
    let opts = ReachOptions {
        skeleton_cap: args.skeleton_cap,
        parallel: args.parallel,
    };
    let out = bca::reachable_with(&a, &from, &to, &opts)?;
    let decision = match &out.verdict {
        Reachability::Reachable(_) => Decision::Yes,
        Reachability::Unreachable => Decision::No,
        Reachability::InconclusiveCapped => Decision::InconclusiveCapped,
    };
    let mut report = RunReport::new("bca reach", digest.finish(), decision);
    report.stats = out.stats;
    report.detail("skeletons_tried", json!(out.skeletons_tried));
    if let (Reachability::Reachable(run), true) = (&out.verdict, args.witness) {
        let steps: Vec<Value> = run
            .steps
            .iter()
            .map(|(e, theta)| {
                let edge = &a.edges()[*e];
                json!({
                    "edge": e,
                    "from": a.states()[edge.from],
                    "to": a.states()[edge.to],
                    "map": injection_to_json(theta),
                })
            })
            .collect();
        report.witness = Some(Value::Array(steps));
    }
    Ok(report)
}

pub fn oracle(instance: &str, depth: usize, node_cap: Option<u64>) -> Result<RunReport> {
    let mut digest = InputDigest::default();
    let inst = read_instance(instance, &mut digest)?;
    let mut budget = OracleBudget::for_instance(&inst, depth);
    if let Some(cap) = node_cap {
        budget.node_cap = cap;
    }
    let result = oracle_decide(&inst, &budget)?;
    let decision = if result.is_yes() {
        Decision::Yes
    } else {
        Decision::NoUpToBudget
    };
    let mut report = RunReport::new("oracle", digest.finish(), decision);
    report.detail("depth", json!(depth));
    report.detail("pool_size", json!(budget.pool.len()));
    if let OracleResult::Yes(w) = result {
        report.witness = Some(witness_to_json(&w));
    }
    Ok(report)
}

/// A seeded random instance as JSON; planted instances are YES instances.
pub fn generate(
    seed: u64,
    shape: &InstanceShape,
    planted: Option<usize>,
    reversible: bool,
) -> Value {
    let inst = match (reversible, planted) {
        (true, terms) => random_reversible_instance(seed, shape, terms.unwrap_or(3)),
        (false, Some(terms)) => random_planted_instance(seed, shape, terms),
        (false, None) => random_instance(seed, shape),
    };
    instance_to_json(&inst)
}

/// The reduction system of an instance as plain text: a legend of unknowns,
/// then one row per line with rationals as `p/q`.
pub fn dump_ilp(instance: &str) -> Result<String> {
    let mut digest = InputDigest::default();
    let inst = read_instance(instance, &mut digest)?;
    let (ilp, legend) = build_ilp(&inst);
    let mut out = String::new();
    for line in legend.to_text().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&ilp.system.to_matrix_text());
    Ok(out)
}
