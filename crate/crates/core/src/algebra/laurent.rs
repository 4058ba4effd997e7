use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{AlgebraError, Ring};

/// Which pair of Laurent variables a [`LaurentPoly`] is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LaurentVars {
    /// `alpha = b + a`, `beta = b - a`.
    AlphaBeta,
    /// `lambda = alpha / beta`. Only the first exponent is used.
    Lambda,
}

impl LaurentVars {
    fn names(self) -> [&'static str; 2] {
        match self {
            LaurentVars::AlphaBeta => ["alpha", "beta"],
            LaurentVars::Lambda => ["lambda", "_"],
        }
    }
}

/// Integer exponents for the two Laurent variables plus 0/1 exponents for `r`, `s`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LaurentMonomial {
    pub e: [i32; 2],
    pub inv: [u8; 2],
}

impl LaurentMonomial {
    fn mul(&self, o: &LaurentMonomial) -> LaurentMonomial {
        LaurentMonomial {
            e: [self.e[0] + o.e[0], self.e[1] + o.e[1]],
            inv: [(self.inv[0] + o.inv[0]) % 2, (self.inv[1] + o.inv[1]) % 2],
        }
    }

    pub fn degree(&self) -> i64 {
        self.e[0] as i64 + self.e[1] as i64
    }
}

/// Laurent polynomial with rational coefficients, in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    kind: LaurentVars,
    terms: BTreeMap<LaurentMonomial, BigRational>,
}

impl LaurentPoly {
    pub fn zero(kind: LaurentVars) -> LaurentPoly {
        LaurentPoly {
            kind,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(kind: LaurentVars, c: BigRational) -> LaurentPoly {
        let mut p = LaurentPoly::zero(kind);
        p.add_term(LaurentMonomial::default(), c);
        p
    }

    /// Variable `i` (0 = alpha or lambda, 1 = beta).
    pub fn var(kind: LaurentVars, i: usize) -> LaurentPoly {
        let mut m = LaurentMonomial::default();
        m.e[i] = 1;
        let mut p = LaurentPoly::zero(kind);
        p.add_term(m, BigRational::one());
        p
    }

    /// `r` (i = 0) or `s` (i = 1).
    pub fn involutive(kind: LaurentVars, i: usize) -> LaurentPoly {
        let mut m = LaurentMonomial::default();
        m.inv[i] = 1;
        let mut p = LaurentPoly::zero(kind);
        p.add_term(m, BigRational::one());
        p
    }

    pub fn from_terms(
        kind: LaurentVars,
        terms: impl IntoIterator<Item = (LaurentMonomial, BigRational)>,
    ) -> LaurentPoly {
        let mut p = LaurentPoly::zero(kind);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn kind(&self) -> LaurentVars {
        self.kind
    }

    pub fn terms(&self) -> &BTreeMap<LaurentMonomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: LaurentMonomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, k: &BigRational) -> LaurentPoly {
        LaurentPoly::from_terms(self.kind, self.terms.iter().map(|(m, c)| (*m, c * k)))
    }

    /// Multiplies by `alpha^d0 * beta^d1`.
    pub fn shift(&self, d: [i32; 2]) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.kind,
            self.terms.iter().map(|(m, c)| {
                (
                    LaurentMonomial {
                        e: [m.e[0] + d[0], m.e[1] + d[1]],
                        inv: m.inv,
                    },
                    c.clone(),
                )
            }),
        )
    }

    /// The common total degree of all terms, if there is one.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut degs = self.terms.keys().map(LaurentMonomial::degree);
        let first = degs.next().unwrap_or(0);
        degs.all(|d| d == first).then_some(first)
    }

    /// Sets `beta = 1`, giving a polynomial in `lambda = alpha / beta`.
    pub fn dehomogenize(&self) -> Result<LaurentPoly, AlgebraError> {
        if self.kind != LaurentVars::AlphaBeta {
            return Ok(self.clone());
        }
        match self.homogeneous_degree() {
            Some(0) => {}
            d => {
                let found = d.or_else(|| self.terms.keys().map(LaurentMonomial::degree).find(|x| *x != 0));
                return Err(AlgebraError::NotHomogeneous(found));
            }
        }
        Ok(LaurentPoly::from_terms(
            LaurentVars::Lambda,
            self.terms.iter().map(|(m, c)| {
                (
                    LaurentMonomial {
                        e: [m.e[0], 0],
                        inv: m.inv,
                    },
                    c.clone(),
                )
            }),
        ))
    }

    /// Fixes `r` (i = 0) or `s` (i = 1) to +1 or -1.
    pub fn specialize_sign(&self, i: usize, sign: i8) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.kind,
            self.terms.iter().map(|(m, c)| {
                let mut m2 = *m;
                let flip = sign < 0 && m.inv[i] == 1;
                m2.inv[i] = 0;
                (m2, if flip { -c } else { c.clone() })
            }),
        )
    }

    fn render_monomial(&self, m: &LaurentMonomial) -> String {
        let names = self.kind.names();
        let mut parts = Vec::new();
        for i in 0..2 {
            match m.e[i] {
                0 => {}
                1 => parts.push(names[i].to_string()),
                e => parts.push(format!("{}^{}", names[i], e)),
            }
        }
        if m.inv[0] == 1 {
            parts.push("r".into());
        }
        if m.inv[1] == 1 {
            parts.push("s".into());
        }
        parts.join("*")
    }
}

impl Ring for LaurentPoly {
    fn constant_like(&self, c: BigInt) -> Self {
        LaurentPoly::constant(self.kind, BigRational::from_integer(c))
    }
    fn ring_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(self + other)
    }
    fn ring_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(self * other)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.kind);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly::from_terms(self.kind, self.terms.iter().map(|(m, c)| (*m, -c)))
    }
}

impl fmt::Display for LaurentPoly {
    /// Descending term order, e.g. `1/2*alpha*r - 1/2*beta`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mono = self.render_monomial(m);
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}
