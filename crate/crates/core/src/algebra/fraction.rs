use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::One;

use super::laurent::{LaurentPoly, LaurentVars};
use super::{AlgebraError, Polynomial, RationalFunction, Ring, Symbol, VariableSet};

/// `numerator / (b^2 - a^2)^delta_power`, kept with the smallest possible power.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: Polynomial,
    delta_power: u32,
}

impl Fraction {
    /// Builds a fraction and cancels every factor of delta it can.
    pub fn new(num: Polynomial, delta_power: u32) -> Fraction {
        let mut f = Fraction { num, delta_power };
        f.reduce();
        f
    }

    pub fn from_poly(num: Polynomial) -> Fraction {
        Fraction {
            num,
            delta_power: 0,
        }
    }

    pub fn zero(vars: VariableSet) -> Fraction {
        Fraction::from_poly(Polynomial::zero(vars))
    }

    pub fn one(vars: VariableSet) -> Fraction {
        Fraction::from_poly(Polynomial::one(vars))
    }

    pub fn constant(vars: VariableSet, c: impl Into<BigInt>) -> Fraction {
        Fraction::from_poly(Polynomial::constant(vars, c))
    }

    pub fn sym(vars: VariableSet, s: Symbol) -> Fraction {
        Fraction::from_poly(Polynomial::sym(vars, s))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn delta_power(&self) -> u32 {
        self.delta_power
    }

    pub fn vars(&self) -> VariableSet {
        self.num.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.delta_power == 0 && self.num.is_one()
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.delta_power = 0;
            return;
        }
        while self.delta_power > 0 {
            match self.num.divide_by_delta() {
                Ok(q) => {
                    self.num = q;
                    self.delta_power -= 1;
                }
                Err(_) => break,
            }
        }
    }

    /// Numerator after raising the denominator to `delta^k`, `k >= delta_power`.
    pub fn numerator_over(&self, k: u32) -> Polynomial {
        assert!(k >= self.delta_power);
        let d = Polynomial::delta(self.vars());
        &self.num * &d.pow(k - self.delta_power)
    }

    pub fn checked_add(&self, other: &Fraction) -> Result<Fraction, AlgebraError> {
        if self.vars() != other.vars() {
            return Err(AlgebraError::VariableMismatch(self.vars(), other.vars()));
        }
        let k = self.delta_power.max(other.delta_power);
        let num = &self.numerator_over(k) + &other.numerator_over(k);
        Ok(Fraction::new(num, k))
    }

    pub fn checked_sub(&self, other: &Fraction) -> Result<Fraction, AlgebraError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Fraction) -> Result<Fraction, AlgebraError> {
        let num = self.num.checked_mul(&other.num)?;
        Ok(Fraction::new(num, self.delta_power + other.delta_power))
    }

    pub fn pow(&self, e: u32) -> Fraction {
        Fraction::new(self.num.pow(e), self.delta_power * e)
    }

    /// Equality by cross-multiplication, independent of canonical form.
    pub fn cross_eq(&self, other: &Fraction) -> bool {
        let k = self.delta_power.max(other.delta_power);
        self.vars() == other.vars() && self.numerator_over(k) == other.numerator_over(k)
    }

    /// Moves into another variable set.
    pub fn with_vars(&self, vars: VariableSet) -> Result<Fraction, AlgebraError> {
        if self.delta_power > 0 {
            for s in [Symbol::A, Symbol::B] {
                if !vars.contains(s) {
                    return Err(AlgebraError::SymbolNotInSet(s, vars));
                }
            }
        }
        Ok(Fraction {
            num: self.num.with_vars(vars)?,
            delta_power: self.delta_power,
        })
    }

    /// Substitutes values for symbols. Involutive symbols only take +1 or -1.
    ///
    /// Values must live in the same variable set as `self`. If `a` or `b`
    /// is assigned, the result is reduced back into delta-power form and
    /// `NotRepresentable` is returned when that is impossible.
    pub fn substitute(
        &self,
        assignment: &BTreeMap<Symbol, Fraction>,
    ) -> Result<Fraction, AlgebraError> {
        let vars = self.vars();
        for (s, v) in assignment {
            if !vars.contains(*s) {
                return Err(AlgebraError::SymbolNotInSet(*s, vars));
            }
            if v.vars() != vars {
                return Err(AlgebraError::VariableMismatch(vars, v.vars()));
            }
            if s.is_involutive() {
                let ok = v.delta_power == 0
                    && v.num.as_constant().is_some_and(|c| c == BigInt::one() || c == -BigInt::one());
                if !ok {
                    return Err(AlgebraError::NonUnitInvolutive(*s));
                }
            }
        }
        let touches_delta =
            assignment.contains_key(&Symbol::A) || assignment.contains_key(&Symbol::B);
        if !touches_delta {
            let num = self.num.evaluate(&Fraction::zero(vars), &|s| match assignment.get(&s) {
                Some(v) => v.clone(),
                None => Fraction::sym(vars, s),
            })?;
            return num.checked_mul(&Fraction::new(Polynomial::one(vars), self.delta_power));
        }
        let rf = RationalFunction::from(self.clone());
        let lifted: BTreeMap<Symbol, RationalFunction> = assignment
            .iter()
            .map(|(s, v)| (*s, RationalFunction::from(v.clone())))
            .collect();
        rf.substitute(&lifted)?.to_fraction()
    }

    /// Applies `a = (alpha - beta)/2`, `b = (alpha + beta)/2`, so the
    /// denominator `delta^k` becomes `(alpha*beta)^k`.
    pub fn to_alpha_beta(&self) -> Result<LaurentPoly, AlgebraError> {
        for s in self.num.support().symbols() {
            if !matches!(s, Symbol::A | Symbol::B | Symbol::R | Symbol::S) {
                return Err(AlgebraError::UnsupportedSymbol(s));
            }
        }
        let kind = LaurentVars::AlphaBeta;
        let half = num_rational::BigRational::new(BigInt::one(), BigInt::from(2));
        let alpha = LaurentPoly::var(kind, 0);
        let beta = LaurentPoly::var(kind, 1);
        let a = (&alpha - &beta).scale(&half);
        let b = (&alpha + &beta).scale(&half);
        let k = self.delta_power as i32;
        let total = self.num.evaluate(&LaurentPoly::zero(kind), &|s| match s {
            Symbol::A => a.clone(),
            Symbol::B => b.clone(),
            Symbol::R => LaurentPoly::involutive(kind, 0),
            Symbol::S => LaurentPoly::involutive(kind, 1),
            _ => unreachable!("checked above"),
        })?;
        Ok(total.shift([-k, -k]))
    }

    pub fn parse(vars: VariableSet, text: &str) -> Result<Fraction, AlgebraError> {
        super::parse::parse_fraction(vars, text)
    }
}

/// `a*r - nu*b` over the given variables; `nu` is taken as `nu_sign` when
/// the variable set lacks `nu`.
pub fn omega(vars: VariableSet, nu_sign: i8) -> Fraction {
    let ar = &Polynomial::sym(vars, Symbol::A) * &Polynomial::sym(vars, Symbol::R);
    let b = Polynomial::sym(vars, Symbol::B);
    let nub = nu_times(vars, nu_sign, &b);
    Fraction::from_poly(&ar - &nub)
}

/// `(-r*a - nu*b)/delta`, the reciprocal of [`omega`].
pub fn omega_inverse(vars: VariableSet, nu_sign: i8) -> Fraction {
    let ar = &Polynomial::sym(vars, Symbol::A) * &Polynomial::sym(vars, Symbol::R);
    let b = Polynomial::sym(vars, Symbol::B);
    let nub = nu_times(vars, nu_sign, &b);
    Fraction::new(&(-&ar) - &nub, 1)
}

fn nu_times(vars: VariableSet, nu_sign: i8, p: &Polynomial) -> Polynomial {
    if vars.contains(Symbol::Nu) {
        p * &Polynomial::sym(vars, Symbol::Nu)
    } else if nu_sign < 0 {
        -p
    } else {
        p.clone()
    }
}

impl Ring for Fraction {
    fn constant_like(&self, c: BigInt) -> Self {
        Fraction::constant(self.vars(), c)
    }
    fn ring_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(other)
    }
    fn ring_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_mul(other)
    }
}

impl Add for &Fraction {
    type Output = Fraction;
    fn add(self, rhs: &Fraction) -> Fraction {
        self.checked_add(rhs).expect("fraction variable sets must match")
    }
}

impl Sub for &Fraction {
    type Output = Fraction;
    fn sub(self, rhs: &Fraction) -> Fraction {
        self.checked_sub(rhs).expect("fraction variable sets must match")
    }
}

impl Mul for &Fraction {
    type Output = Fraction;
    fn mul(self, rhs: &Fraction) -> Fraction {
        self.checked_mul(rhs).expect("fraction variable sets must match")
    }
}

impl Neg for &Fraction {
    type Output = Fraction;
    fn neg(self) -> Fraction {
        Fraction {
            num: -&self.num,
            delta_power: self.delta_power,
        }
    }
}

impl From<Polynomial> for Fraction {
    fn from(p: Polynomial) -> Self {
        Fraction::from_poly(p)
    }
}

impl fmt::Display for Fraction {
    /// `num` when there is no denominator, else `num/(b^2 - a^2)^k`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.delta_power == 0 {
            return write!(f, "{}", self.num);
        }
        if self.num.len() == 1 {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "({})", self.num)?;
        }
        match self.delta_power {
            1 => write!(f, "/(b^2 - a^2)"),
            k => write!(f, "/(b^2 - a^2)^{k}"),
        }
    }
}
