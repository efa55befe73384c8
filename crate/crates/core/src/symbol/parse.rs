//! Text grammar for operators.
//!
//! ```text
//! expr    := term (('+'|'-') term)*
//! term    := unary ('*' unary)*
//! unary   := ('-'|'+')* pow
//! pow     := primary ('^' uint)?
//! primary := number | 'i' | 'd' uint | '(' expr ')'
//! number  := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//! ```
//!
//! Variables are d0 (time) through dn; `i` is the imaginary unit; whitespace
//! is free between tokens. Exponents are nonnegative integer literals.

use super::OperatorSymbol;
use crate::error::ParseError;
use num_complex::Complex64;

const MAX_EXPONENT: u32 = 512;

/// Parses the text form of an operator in 1 + n variables.
pub fn parse_operator(text: &str, n: usize) -> Result<OperatorSymbol, ParseError> {
    let mut p = Parser { bytes: text.as_bytes(), pos: 0, n };
    p.skip_ws();
    if p.at_end() {
        return Err(p.err("empty operator expression"));
    }
    let sym = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err(format!("unexpected character '{}'", p.current_char())));
    }
    Ok(sym)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { position: self.pos, message: message.into() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn current_char(&self) -> char {
        self.peek().map(char::from).unwrap_or('?')
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<OperatorSymbol, ParseError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.add(&rhs).expect("parser builds same-dimension symbols");
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc
                        .add(&rhs.scale(Complex64::new(-1.0, 0.0)))
                        .expect("parser builds same-dimension symbols");
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<OperatorSymbol, ParseError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
                let rhs = self.unary()?;
                acc = acc.mul(&rhs).expect("parser builds same-dimension symbols");
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<OperatorSymbol, ParseError> {
        self.skip_ws();
        let mut negate = false;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            if c == b'-' {
                negate = !negate;
            }
            self.pos += 1;
            self.skip_ws();
        }
        let sym = self.pow()?;
        Ok(if negate { sym.scale(Complex64::new(-1.0, 0.0)) } else { sym })
    }

    fn pow(&mut self) -> Result<OperatorSymbol, ParseError> {
        let base = self.primary()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let e = self.uint()?;
            if e > MAX_EXPONENT {
                self.pos = start;
                return Err(self.err(format!("exponent {} exceeds the cap {}", e, MAX_EXPONENT)));
            }
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<OperatorSymbol, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err("expected a number, 'i', a variable d<k>, or '('")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(inner)
                } else {
                    Err(self.err("expected ')'"))
                }
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(OperatorSymbol::constant(self.n, Complex64::new(0.0, 1.0)))
            }
            Some(b'd') => {
                self.pos += 1;
                let start = self.pos;
                let idx = self.uint()? as usize;
                if idx > self.n {
                    self.pos = start;
                    return Err(self.err(format!(
                        "variable d{} out of range: operator has variables d0 ..= d{}",
                        idx, self.n
                    )));
                }
                Ok(OperatorSymbol::variable(self.n, idx).expect("index checked"))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => Err(self.err(format!(
                "unexpected character '{}': expected a number, 'i', a variable d<k>, or '('",
                self.current_char()
            ))),
        }
    }

    fn uint(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an integer"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are ascii")
            .parse::<u32>()
            .map_err(|_| ParseError { position: start, message: "integer literal too large".into() })
    }

    fn number(&mut self) -> Result<OperatorSymbol, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // not an exponent suffix after all
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii");
        let value: f64 = text.parse().map_err(|_| ParseError {
            position: start,
            message: format!("malformed number '{}'", text),
        })?;
        Ok(OperatorSymbol::constant(self.n, Complex64::new(value, 0.0)))
    }
}
