//! Arithmetic expression evaluator for numeric command-line parameters.
//!
//! Radius-like quantities are often exact radicals (`sqrt(2033)/57`), so
//! flags accept a tiny expression grammar instead of forcing callers to
//! paste rounded decimals:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | atom
//! atom  := number | 'pi' | 'sqrt' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Numbers are decimal literals with optional fraction and exponent.
//! Evaluation follows IEEE semantics (`1/0` is infinite, `sqrt(-1)` is
//! NaN); callers validate the finished value against their own domain.
//! Parsing never panics and recursion depth is capped, so the entry
//! point is safe on arbitrary input.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("unexpected character {ch:?} at byte {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unknown name {name:?} at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("invalid number at byte {pos}")]
    InvalidNumber { pos: usize },
    #[error("expression nests deeper than {0} levels")]
    TooDeep(usize),
}

const MAX_DEPTH: usize = 64;

/// Parse and evaluate an expression, consuming the entire input.
pub fn parse_expression(input: &str) -> Result<f64, ExprError> {
    let mut p = Parser { bytes: input.as_bytes(), pos: 0 };
    let value = p.expr(0)?;
    p.skip_ws();
    match p.peek() {
        None => Ok(value),
        Some(ch) => Err(ExprError::UnexpectedChar { pos: p.pos, ch }),
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        // the grammar is pure ASCII, so a multibyte head is just an
        // unexpected character; report its leading char
        std::str::from_utf8(&self.bytes[self.pos.min(self.bytes.len())..])
            .ok()
            .and_then(|s| s.chars().next())
            .or_else(|| self.bytes.get(self.pos).map(|&b| b as char))
    }

    fn skip_ws(&mut self) {
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, want: u8) -> bool {
        if self.bytes.get(self.pos) == Some(&want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self, depth: usize) -> Result<f64, ExprError> {
        if depth > MAX_DEPTH {
            return Err(ExprError::TooDeep(MAX_DEPTH));
        }
        let mut value = self.term(depth)?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                value += self.term(depth)?;
            } else if self.eat(b'-') {
                value -= self.term(depth)?;
            } else {
                return Ok(value);
            }
        }
    }

    fn term(&mut self, depth: usize) -> Result<f64, ExprError> {
        let mut value = self.unary(depth)?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                value *= self.unary(depth)?;
            } else if self.eat(b'/') {
                value /= self.unary(depth)?;
            } else {
                return Ok(value);
            }
        }
    }

    fn unary(&mut self, depth: usize) -> Result<f64, ExprError> {
        if depth > MAX_DEPTH {
            return Err(ExprError::TooDeep(MAX_DEPTH));
        }
        self.skip_ws();
        if self.eat(b'-') {
            return Ok(-self.unary(depth + 1)?);
        }
        self.atom(depth)
    }

    fn atom(&mut self, depth: usize) -> Result<f64, ExprError> {
        self.skip_ws();
        match self.bytes.get(self.pos) {
            None => Err(ExprError::UnexpectedEnd),
            Some(b'(') => {
                self.pos += 1;
                let value = self.expr(depth + 1)?;
                self.skip_ws();
                if self.eat(b')') {
                    Ok(value)
                } else {
                    match self.peek() {
                        None => Err(ExprError::UnexpectedEnd),
                        Some(ch) => Err(ExprError::UnexpectedChar { pos: self.pos, ch }),
                    }
                }
            }
            Some(b) if b.is_ascii_digit() => self.number(),
            Some(b) if b.is_ascii_alphabetic() => self.identifier(depth),
            Some(_) => Err(ExprError::UnexpectedChar {
                pos: self.pos,
                ch: self.peek().unwrap_or('\u{fffd}'),
            }),
        }
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.bytes.get(self.pos) == Some(&b'.')
            && self.bytes.get(self.pos + 1).is_some_and(|b| b.is_ascii_digit())
        {
            self.pos += 1;
            while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            // consume the exponent only if it is well formed, so "2e"
            // leaves the 'e' as a trailing error instead of eating it
            let mut probe = self.pos + 1;
            if matches!(self.bytes.get(probe), Some(b'+' | b'-')) {
                probe += 1;
            }
            if self.bytes.get(probe).is_some_and(|b| b.is_ascii_digit()) {
                self.pos = probe;
                while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| ExprError::InvalidNumber { pos: start })?;
        text.parse::<f64>().map_err(|_| ExprError::InvalidNumber { pos: start })
    }

    fn identifier(&mut self, depth: usize) -> Result<f64, ExprError> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii alphanumeric span");
        match name {
            "pi" => Ok(std::f64::consts::PI),
            "sqrt" => {
                self.skip_ws();
                if !self.eat(b'(') {
                    return match self.peek() {
                        None => Err(ExprError::UnexpectedEnd),
                        Some(ch) => Err(ExprError::UnexpectedChar { pos: self.pos, ch }),
                    };
                }
                let value = self.expr(depth + 1)?;
                self.skip_ws();
                if self.eat(b')') {
                    Ok(value.sqrt())
                } else {
                    match self.peek() {
                        None => Err(ExprError::UnexpectedEnd),
                        Some(ch) => Err(ExprError::UnexpectedChar { pos: self.pos, ch }),
                    }
                }
            }
            _ => Err(ExprError::UnknownIdentifier { pos: start, name: name.to_string() }),
        }
    }
}
