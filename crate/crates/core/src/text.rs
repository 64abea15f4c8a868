//! Tokenizer and cursor shared by the line-oriented model formats.
//!
//! Punctuation is `{ } [ ] ; : ,` and the arrow `->`; every other run of
//! non-whitespace characters is a word. `#` followed by anything but a digit
//! starts a comment that runs to the end of the line (`#12` is the spelling
//! of a raw data value id).

use thiserror::Error;

/// A syntax or reference error at a 1-based line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    Punct(char),
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Arrow => "`->`".to_string(),
        }
    }
}

const PUNCT: &[char] = &['{', '}', '[', ']', ';', ':', ','];

fn lex(text: &str) -> Vec<(Tok, usize)> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '#' && !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                break;
            } else if PUNCT.contains(&c) {
                out.push((Tok::Punct(c), line_no));
                i += 1;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push((Tok::Arrow, line_no));
                i += 2;
            } else {
                let start = i;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && !PUNCT.contains(&chars[i])
                    && !(chars[i] == '-' && chars.get(i + 1) == Some(&'>'))
                {
                    i += 1;
                }
                out.push((Tok::Word(chars[start..i].iter().collect()), line_no));
            }
        }
    }
    out
}

pub(crate) struct Cursor {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    last_line: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Self {
        let last_line = text.lines().count().max(1);
        Cursor {
            toks: lex(text),
            pos: 0,
            last_line,
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// Line of the next token, or of the end of input.
    pub(crate) fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |t| t.1)
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    pub(crate) fn peek_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    /// Consumes `c` if it is next.
    pub(crate) fn eat_punct(&mut self, c: char) -> bool {
        let hit = self.peek_punct(c);
        if hit {
            self.pos += 1;
        }
        hit
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line(), message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub(crate) fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    pub(crate) fn expect_arrow(&mut self) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected("`->`"))
        }
    }

    /// The next word and its line.
    pub(crate) fn expect_word(&mut self, wanted: &str) -> Result<(String, usize), ParseError> {
        match self.toks.get(self.pos) {
            Some((Tok::Word(w), line)) => {
                let out = (w.clone(), *line);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    pub(crate) fn expect_keyword(&mut self, keyword: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) if w == keyword => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{keyword}`"))),
        }
    }

    /// Words up to (and consuming) the terminator `end`.
    pub(crate) fn words_until(&mut self, end: char) -> Result<Vec<(String, usize)>, ParseError> {
        let mut out = Vec::new();
        while !self.eat_punct(end) {
            out.push(self.expect_word(&format!("a name or `{end}`"))?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_arrows_comments_and_raw_ids() {
        let toks = lex("edge q0->q1 label {#3: [-1]}; # trailing\n# whole line\nx");
        let words: Vec<Tok> = toks.iter().map(|t| t.0.clone()).collect();
        assert_eq!(
            words,
            vec![
                Tok::Word("edge".into()),
                Tok::Word("q0".into()),
                Tok::Arrow,
                Tok::Word("q1".into()),
                Tok::Word("label".into()),
                Tok::Punct('{'),
                Tok::Word("#3".into()),
                Tok::Punct(':'),
                Tok::Punct('['),
                Tok::Word("-1".into()),
                Tok::Punct(']'),
                Tok::Punct('}'),
                Tok::Punct(';'),
                Tok::Word("x".into()),
            ]
        );
        assert_eq!(toks.last().unwrap().1, 3);
    }

    #[test]
    fn errors_name_the_line() {
        let mut c = Cursor::new("a\n\nb");
        c.expect_word("x").unwrap();
        let err = c.expect_punct(';').unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.to_string(), "line 3: expected `;`, found `b`");
    }
}
