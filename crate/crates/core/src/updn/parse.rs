//! Net and marking text formats.
//!
//! ```text
//! places p q;
//! trans t { in p: x x; out q: y; }
//! ```
//!
//! A flow clause lists a multiset of variables; repetition is multiplicity.
//! Markings read `p: {a:2, b:1}; q: {}` with omitted places empty.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Marking, Updn, UpdnError};
use crate::text::{Cursor, ParseError};
use crate::vector::{DataValue, DataVector, Interner, Tuple};

impl Updn {
    /// Parses the net format. Places must be declared before use.
    pub fn parse(text: &str) -> Result<Updn, UpdnError> {
        let interner = Interner::global();
        let mut c = Cursor::new(text);
        let mut places: Vec<String> = Vec::new();
        let mut net: Option<Updn> = None;
        while !c.at_end() {
            let (kw, line) = c.expect_word("`places` or `trans`")?;
            match kw.as_str() {
                "places" => {
                    if net.is_some() {
                        return Err(ParseError::new(
                            line,
                            "places must be declared before transitions",
                        )
                        .into());
                    }
                    for (p, pl) in c.words_until(';')? {
                        if places.contains(&p) {
                            return Err(
                                ParseError::new(pl, format!("duplicate place `{p}`")).into()
                            );
                        }
                        places.push(p);
                    }
                }
                "trans" => {
                    if net.is_none() {
                        net = Some(
                            Updn::new(places.clone())
                                .map_err(|e| ParseError::new(line, e.to_string()))?,
                        );
                    }
                    let n = net.as_mut().expect("just built");
                    let (name, nl) = c.expect_word("a transition name")?;
                    if n.transition_index(&name).is_some() {
                        return Err(
                            ParseError::new(nl, format!("duplicate transition `{name}`")).into(),
                        );
                    }
                    c.expect_punct('{')?;
                    let mut input = Vec::new();
                    let mut output = Vec::new();
                    while !c.eat_punct('}') {
                        let (dir, dl) = c.expect_word("`in`, `out` or `}`")?;
                        let arcs = match dir.as_str() {
                            "in" => &mut input,
                            "out" => &mut output,
                            _ => {
                                return Err(ParseError::new(
                                    dl,
                                    format!("expected `in` or `out`, found `{dir}`"),
                                )
                                .into())
                            }
                        };
                        let (place, pl) = c.expect_word("a place name")?;
                        let p = n.place_index(&place).ok_or_else(|| {
                            ParseError::new(pl, format!("unknown place `{place}`"))
                        })?;
                        c.expect_punct(':')?;
                        for (var, _) in c.words_until(';')? {
                            arcs.push((p, interner.intern(&var), 1));
                        }
                    }
                    n.add_transition(&name, &input, &output)?;
                }
                _ => {
                    return Err(ParseError::new(
                        line,
                        format!("expected `places` or `trans`, found `{kw}`"),
                    )
                    .into());
                }
            }
        }
        match net {
            Some(n) => Ok(n),
            None if places.is_empty() => {
                Err(ParseError::new(c.line(), "a net needs at least one place").into())
            }
            None => Updn::new(places),
        }
    }

    /// The net in its text format.
    pub fn to_text(&self) -> String {
        let interner = Interner::global();
        let mut out = format!("places {};\n", self.places.join(" "));
        for t in &self.transitions {
            let _ = write!(out, "trans {} {{", t.name);
            for (dir, flows) in [("in", &t.input), ("out", &t.output)] {
                for (p, flow) in flows.iter().enumerate() {
                    if flow.is_empty() {
                        continue;
                    }
                    let _ = write!(out, " {dir} {}:", self.places[p]);
                    for (x, k) in flow {
                        for _ in 0..*k {
                            let _ = write!(out, " {}", interner.display(*x));
                        }
                    }
                    out.push(';');
                }
            }
            out.push_str(" }\n");
        }
        out
    }

    /// Parses `p: {a:2, b:1}; q: {}` against this net's places.
    pub fn parse_marking(&self, text: &str) -> Result<Marking, UpdnError> {
        let interner = Interner::global();
        let n = self.num_places();
        let mut c = Cursor::new(text);
        let mut seen = BTreeSet::new();
        let mut entries: Vec<(DataValue, Tuple)> = Vec::new();
        while !c.at_end() {
            let (place, pl) = c.expect_word("a place name")?;
            let p = self
                .place_index(&place)
                .ok_or_else(|| ParseError::new(pl, format!("unknown place `{place}`")))?;
            if !seen.insert(p) {
                return Err(ParseError::new(pl, format!("place `{place}` listed twice")).into());
            }
            c.expect_punct(':')?;
            c.expect_punct('{')?;
            while !c.eat_punct('}') {
                let (datum, _) = c.expect_word("a data value")?;
                c.expect_punct(':')?;
                let (count, cl) = c.expect_word("a token count")?;
                let k: u64 = count
                    .parse()
                    .map_err(|_| ParseError::new(cl, format!("`{count}` is not a token count")))?;
                let mut e = vec![BigInt::zero(); n];
                e[p] = BigInt::from(k);
                entries.push((interner.intern(&datum), Tuple::new(e)));
                if !c.peek_punct('}') {
                    c.expect_punct(',')?;
                }
            }
            if !c.at_end() {
                c.expect_punct(';')?;
            }
        }
        Marking::new(DataVector::from_entries(n, entries)?)
    }

    /// A marking in the format read by [`Updn::parse_marking`].
    pub fn format_marking(&self, m: &Marking) -> String {
        let interner = Interner::global();
        let parts: Vec<String> = self
            .places
            .iter()
            .enumerate()
            .map(|(p, name)| {
                let tokens: Vec<String> = m
                    .vector()
                    .iter()
                    .filter(|(_, t)| !t.entries()[p].is_zero())
                    .map(|(a, t)| format!("{}:{}", interner.display(a), t.entries()[p]))
                    .collect();
                format!("{name}: {{{}}}", tokens.join(", "))
            })
            .collect();
        parts.join("; ")
    }
}
