//! Automaton and vector text formats.
//!
//! ```text
//! dim 1;
//! state q0 qf;
//! edge q0 -> q0 label {a: [1]};
//! edge q0 -> qf label {};
//! ```
//!
//! `dim` is optional; without it the dimension is the length of the first
//! label tuple, or 1 when every label is empty.

use std::fmt::Write as _;

use num_bigint::BigInt;

use super::{Bca, BcaError};
use crate::text::{Cursor, ParseError};
use crate::vector::{DataValue, DataVector, Interner, Tuple};

type RawVector = Vec<(DataValue, Vec<BigInt>, usize)>;

/// `{name: [ints], …}`, with the line of each entry.
fn raw_vector(c: &mut Cursor) -> Result<RawVector, ParseError> {
    let interner = Interner::global();
    c.expect_punct('{')?;
    let mut out: RawVector = Vec::new();
    while !c.eat_punct('}') {
        let (name, line) = c.expect_word("a data value")?;
        let alpha = interner.intern(&name);
        if out.iter().any(|(a, _, _)| *a == alpha) {
            return Err(ParseError::new(
                line,
                format!("data value `{name}` listed twice"),
            ));
        }
        c.expect_punct(':')?;
        c.expect_punct('[')?;
        let mut entries = Vec::new();
        while !c.eat_punct(']') {
            let (w, wl) = c.expect_word("an integer")?;
            let x: BigInt = w
                .parse()
                .map_err(|_| ParseError::new(wl, format!("`{w}` is not an integer")))?;
            entries.push(x);
            if !c.peek_punct(']') {
                c.expect_punct(',')?;
            }
        }
        out.push((alpha, entries, line));
        if !c.peek_punct('}') {
            c.expect_punct(',')?;
        }
    }
    Ok(out)
}

fn build_vector(raw: RawVector, dim: usize) -> Result<DataVector, ParseError> {
    let mut entries = Vec::with_capacity(raw.len());
    for (alpha, xs, line) in raw {
        if xs.len() != dim {
            return Err(ParseError::new(
                line,
                format!("tuple has {} entries, expected {dim}", xs.len()),
            ));
        }
        entries.push((alpha, Tuple::new(xs)));
    }
    Ok(DataVector::from_entries(dim, entries).expect("dimension is positive"))
}

/// Parses a vector `{a: [1, -2], b: [0, 3]}` of dimension `dim`.
pub fn parse_vector(text: &str, dim: usize) -> Result<DataVector, ParseError> {
    let mut c = Cursor::new(text);
    let raw = raw_vector(&mut c)?;
    if !c.at_end() {
        return Err(c.error("unexpected text after the vector"));
    }
    build_vector(raw, dim)
}

/// The vector in the format read by [`parse_vector`].
pub fn format_vector(v: &DataVector) -> String {
    let interner = Interner::global();
    let parts: Vec<String> = v
        .iter()
        .map(|(a, t)| {
            let xs: Vec<String> = t.entries().iter().map(ToString::to_string).collect();
            format!("{}: [{}]", interner.display(a), xs.join(", "))
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

impl Bca {
    pub fn parse(text: &str) -> Result<Bca, BcaError> {
        let mut c = Cursor::new(text);
        let mut dim: Option<usize> = None;
        let mut states: Vec<String> = Vec::new();
        let mut edges: Vec<(usize, usize, RawVector, usize)> = Vec::new();
        while !c.at_end() {
            let (kw, line) = c.expect_word("`dim`, `state` or `edge`")?;
            match kw.as_str() {
                "dim" => {
                    if dim.is_some() {
                        return Err(ParseError::new(line, "dimension declared twice").into());
                    }
                    let (w, wl) = c.expect_word("a dimension")?;
                    let k: usize = w.parse().ok().filter(|k| *k > 0).ok_or_else(|| {
                        ParseError::new(wl, format!("`{w}` is not a positive dimension"))
                    })?;
                    c.expect_punct(';')?;
                    dim = Some(k);
                }
                "state" => {
                    for (s, sl) in c.words_until(';')? {
                        if states.contains(&s) {
                            return Err(
                                ParseError::new(sl, format!("duplicate state `{s}`")).into()
                            );
                        }
                        states.push(s);
                    }
                }
                "edge" => {
                    let endpoint = |c: &mut Cursor| -> Result<usize, ParseError> {
                        let (s, sl) = c.expect_word("a state name")?;
                        states
                            .iter()
                            .position(|x| *x == s)
                            .ok_or_else(|| ParseError::new(sl, format!("unknown state `{s}`")))
                    };
                    let from = endpoint(&mut c)?;
                    c.expect_arrow()?;
                    let to = endpoint(&mut c)?;
                    c.expect_keyword("label")?;
                    let label = raw_vector(&mut c)?;
                    c.expect_punct(';')?;
                    edges.push((from, to, label, line));
                }
                _ => {
                    return Err(ParseError::new(
                        line,
                        format!("expected `dim`, `state` or `edge`, found `{kw}`"),
                    )
                    .into());
                }
            }
        }
        if states.is_empty() {
            return Err(c.error("an automaton needs at least one state").into());
        }
        let k = match dim {
            Some(k) => k,
            None => edges
                .iter()
                .find_map(|(_, _, l, _)| l.first().map(|(_, xs, _)| xs.len()))
                .filter(|k| *k > 0)
                .unwrap_or(1),
        };
        let mut bca = Bca::new(k, states)?;
        for (from, to, raw, _) in edges {
            let label = build_vector(raw, k)?;
            bca.add_edge(from, to, label)?;
        }
        Ok(bca)
    }

    /// The automaton in its text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("dim {};\nstate {};\n", self.dim, self.states.join(" "));
        for e in &self.edges {
            let _ = writeln!(
                out,
                "edge {} -> {} label {};",
                self.states[e.from],
                self.states[e.to],
                format_vector(&e.label)
            );
        }
        out
    }

    /// Parses a vector of this automaton's dimension.
    pub fn parse_vector(&self, text: &str) -> Result<DataVector, BcaError> {
        Ok(parse_vector(text, self.dim)?)
    }
}
