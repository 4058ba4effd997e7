//! Reader for the rendered form of polynomials and fractions.
//!
//! Grammar:
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ['^' INT]
//! atom   := INT | SYMBOL | '(' expr ')'
//! frac   := expr ['/' factor]
//! ```
//! The divisor of a fraction must be a power of `b^2 - a^2`.

use num_bigint::BigInt;

use super::{AlgebraError, Fraction, Polynomial, Symbol, VariableSet};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn err(col: usize, reason: impl Into<String>) -> AlgebraError {
    AlgebraError::Parse {
        col,
        reason: reason.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, AlgebraError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((col, Tok::Int(s.parse().expect("digits"))));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*^()/".contains(c) {
            out.push((col, Tok::Op(c)));
            i += 1;
        } else {
            return Err(err(col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
    vars: VariableSet,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(c, _)| *c)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, AlgebraError> {
        let negate = self.eat('-');
        let mut acc = self.term()?;
        if negate {
            acc = -acc;
        }
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, AlgebraError> {
        let base = self.atom()?;
        if self.eat('^') {
            let col = self.col();
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| err(col, "exponent too large"))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(err(col, "expected an exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, AlgebraError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.vars, n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let s = Symbol::from_name(&name)
                    .ok_or_else(|| err(col, format!("unknown symbol `{name}`")))?;
                Polynomial::var(self.vars, s).map_err(|e| err(col, e.to_string()))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(err(self.col(), "expected `)`"));
                }
                Ok(inner)
            }
            Some(t) => Err(err(col, format!("unexpected token {t:?}"))),
            None => Err(err(col, "unexpected end of input")),
        }
    }

    fn finish(&self) -> Result<(), AlgebraError> {
        if self.pos < self.toks.len() {
            return Err(err(self.col(), "trailing input"));
        }
        Ok(())
    }
}

fn parser(vars: VariableSet, text: &str) -> Result<Parser, AlgebraError> {
    Ok(Parser {
        toks: tokenize(text)?,
        pos: 0,
        end_col: text.chars().count() + 1,
        vars,
    })
}

pub(super) fn parse_polynomial(vars: VariableSet, text: &str) -> Result<Polynomial, AlgebraError> {
    let mut p = parser(vars, text)?;
    let out = p.expr()?;
    p.finish()?;
    Ok(out)
}

pub(super) fn parse_fraction(vars: VariableSet, text: &str) -> Result<Fraction, AlgebraError> {
    let mut p = parser(vars, text)?;
    let num = p.expr()?;
    if !p.eat('/') {
        p.finish()?;
        return Ok(Fraction::from_poly(num));
    }
    let col = p.col();
    if !vars.contains(Symbol::A) || !vars.contains(Symbol::B) {
        return Err(err(col, "denominator needs a and b in the variable set"));
    }
    let mut den = p.factor()?;
    p.finish()?;
    let mut k = 0;
    while !den.is_one() {
        den = den
            .divide_by_delta()
            .map_err(|_| err(col, "denominator must be a power of b^2 - a^2"))?;
        k += 1;
    }
    Ok(Fraction::new(num, k))
}
