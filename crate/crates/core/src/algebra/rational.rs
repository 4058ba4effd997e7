use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use super::{AlgebraError, Fraction, Polynomial, Ring, Symbol, VariableSet};

/// Unreduced quotient of two polynomials.
///
/// Only used where general denominators show up before specialization.
/// Nothing is cancelled automatically; [`RationalFunction::to_fraction`]
/// brings a value back into delta-power form.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    pub num: Polynomial,
    pub den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<RationalFunction, AlgebraError> {
        if num.vars() != den.vars() {
            return Err(AlgebraError::VariableMismatch(num.vars(), den.vars()));
        }
        if den.is_zero() {
            return Err(AlgebraError::ZeroDivisor);
        }
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(p: Polynomial) -> RationalFunction {
        let den = Polynomial::one(p.vars());
        RationalFunction { num: p, den }
    }

    pub fn vars(&self) -> VariableSet {
        self.num.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.den == other.den {
            return Ok(RationalFunction {
                num: self.num.checked_add(&other.num)?,
                den: self.den.clone(),
            });
        }
        let num = self
            .num
            .checked_mul(&other.den)?
            .checked_add(&other.num.checked_mul(&self.den)?)?;
        Ok(RationalFunction {
            num,
            den: self.den.checked_mul(&other.den)?,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(&RationalFunction {
            num: -&other.num,
            den: other.den.clone(),
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(RationalFunction {
            num: self.num.checked_mul(&other.num)?,
            den: self.den.checked_mul(&other.den)?,
        })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, AlgebraError> {
        if other.num.is_zero() {
            return Err(AlgebraError::ZeroDivisor);
        }
        Ok(RationalFunction {
            num: self.num.checked_mul(&other.den)?,
            den: self.den.checked_mul(&other.num)?,
        })
    }

    /// Equality by cross-multiplication.
    pub fn cross_eq(&self, other: &Self) -> bool {
        match (
            self.num.checked_mul(&other.den),
            other.num.checked_mul(&self.den),
        ) {
            (Ok(l), Ok(r)) => l == r,
            _ => false,
        }
    }

    /// Substitutes values for symbols; the values share `self`'s variables.
    pub fn substitute(
        &self,
        assignment: &BTreeMap<Symbol, RationalFunction>,
    ) -> Result<RationalFunction, AlgebraError> {
        let vars = self.vars();
        for (s, v) in assignment {
            if !vars.contains(*s) {
                return Err(AlgebraError::SymbolNotInSet(*s, vars));
            }
            if v.vars() != vars {
                return Err(AlgebraError::VariableMismatch(vars, v.vars()));
            }
            if s.is_involutive() {
                let unit = v.num.as_constant().zip(v.den.as_constant()).is_some_and(|(n, d)| {
                    n == d || n == -d
                });
                if !unit {
                    return Err(AlgebraError::NonUnitInvolutive(*s));
                }
            }
        }
        let proto = RationalFunction::from_poly(Polynomial::zero(vars));
        let value = |s: Symbol| match assignment.get(&s) {
            Some(v) => v.clone(),
            None => RationalFunction::from_poly(Polynomial::sym(vars, s)),
        };
        let n = self.num.evaluate(&proto, &value)?;
        let d = self.den.evaluate(&proto, &value)?;
        n.checked_div(&d)
    }

    /// Rewrites the value as `q / delta^k`, or `NotRepresentable`.
    pub fn to_fraction(&self) -> Result<Fraction, AlgebraError> {
        let vars = self.vars();
        if self.num.is_zero() {
            return Ok(Fraction::zero(vars));
        }
        let mut den = self.den.clone();
        let mut k = 0;
        while let Ok(q) = den.divide_by_delta() {
            den = q;
            k += 1;
        }
        // a leftover factor such as b + a still divides num * delta^j
        let delta = Polynomial::delta(vars);
        let mut num = self.num.clone();
        for extra in 0..=den.total_degree() {
            match num.exact_div(&den) {
                Ok(q) => return Ok(Fraction::new(q, k + extra)),
                Err(AlgebraError::NotDivisible) => {}
                Err(e) => return Err(e),
            }
            num = &num * &delta;
        }
        Err(AlgebraError::NotRepresentable)
    }
}

impl From<Fraction> for RationalFunction {
    fn from(f: Fraction) -> Self {
        let vars = f.vars();
        RationalFunction {
            num: f.numerator().clone(),
            den: Polynomial::delta(vars).pow(f.delta_power()),
        }
    }
}

impl Ring for RationalFunction {
    fn constant_like(&self, c: BigInt) -> Self {
        RationalFunction::from_poly(Polynomial::constant(self.vars(), c))
    }
    fn ring_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(other)
    }
    fn ring_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_mul(other)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
