use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{AlgebraError, Symbol, VariableSet, NSYM};

/// Exponent vector in the fixed symbol order. Involutive entries are 0 or 1.
///
/// The derived `Ord` is lexicographic with `a` most significant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial([u32; NSYM]);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial([0; NSYM])
    }

    pub fn var(s: Symbol) -> Monomial {
        Monomial::one().with_exp(s, 1)
    }

    pub fn exp(&self, s: Symbol) -> u32 {
        self.0[s.index()]
    }

    /// Sets an exponent, reducing involutive symbols mod 2.
    pub fn with_exp(mut self, s: Symbol, e: u32) -> Monomial {
        self.0[s.index()] = if s.is_involutive() { e % 2 } else { e };
        self
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = [0u32; NSYM];
        for (i, s) in Symbol::ALL.iter().enumerate() {
            let e = self.0[i] + other.0[i];
            out[i] = if s.is_involutive() { e % 2 } else { e };
        }
        Monomial(out)
    }

    /// `self / other` when every exponent of `other` is at most that of `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = [0u32; NSYM];
        for i in 0..NSYM {
            out[i] = self.0[i].checked_sub(other.0[i])?;
        }
        Some(Monomial(out))
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Symbols that occur with nonzero exponent.
    pub fn support(&self) -> VariableSet {
        VariableSet::new(
            &Symbol::ALL
                .into_iter()
                .filter(|s| self.exp(*s) > 0)
                .collect::<Vec<_>>(),
        )
    }

    fn render(&self) -> String {
        let mut parts = Vec::new();
        for s in Symbol::ALL {
            match self.exp(s) {
                0 => {}
                1 => parts.push(s.name().to_string()),
                e => parts.push(format!("{}^{}", s.name(), e)),
            }
        }
        parts.join("*")
    }
}

/// Integer polynomial over a [`VariableSet`], in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    vars: VariableSet,
    terms: BTreeMap<Monomial, BigInt>,
}

/// The operations substitution needs from a target value type.
pub trait Ring: Clone + Sized {
    /// An integer constant living alongside `self`.
    fn constant_like(&self, c: BigInt) -> Self;
    fn ring_add(&self, other: &Self) -> Result<Self, AlgebraError>;
    fn ring_mul(&self, other: &Self) -> Result<Self, AlgebraError>;
}

impl Polynomial {
    pub fn zero(vars: VariableSet) -> Polynomial {
        Polynomial {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: VariableSet) -> Polynomial {
        Polynomial::constant(vars, 1)
    }

    pub fn constant(vars: VariableSet, c: impl Into<BigInt>) -> Polynomial {
        Polynomial::monomial(vars, Monomial::one(), c.into())
    }

    pub fn var(vars: VariableSet, s: Symbol) -> Result<Polynomial, AlgebraError> {
        if !vars.contains(s) {
            return Err(AlgebraError::SymbolNotInSet(s, vars));
        }
        Ok(Polynomial::monomial(vars, Monomial::var(s), BigInt::one()))
    }

    /// Panicking shorthand for [`Polynomial::var`].
    pub fn sym(vars: VariableSet, s: Symbol) -> Polynomial {
        Polynomial::var(vars, s).expect("symbol in variable set")
    }

    pub fn monomial(vars: VariableSet, m: Monomial, c: BigInt) -> Polynomial {
        debug_assert!(m.support().is_subset(vars));
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { vars, terms }
    }

    pub fn from_terms(
        vars: VariableSet,
        terms: impl IntoIterator<Item = (Monomial, BigInt)>,
    ) -> Result<Polynomial, AlgebraError> {
        let mut p = Polynomial::zero(vars);
        for (m, c) in terms {
            if let Some(s) = m.support().symbols().find(|s| !vars.contains(*s)) {
                return Err(AlgebraError::SymbolNotInSet(s, vars));
            }
            // re-reduce in case the caller built an unreduced exponent
            let mut red = Monomial::one();
            for s in Symbol::ALL {
                red = red.with_exp(s, m.exp(s));
            }
            p.add_term(red, c);
        }
        Ok(p)
    }

    /// `b^2 - a^2`.
    pub fn delta(vars: VariableSet) -> Polynomial {
        let mut p = Polynomial::zero(vars);
        p.add_term(Monomial::one().with_exp(Symbol::B, 2), BigInt::one());
        p.add_term(Monomial::one().with_exp(Symbol::A, 2), -BigInt::one());
        p
    }

    pub fn vars(&self) -> VariableSet {
        self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigInt> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    /// The constant value if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Symbols actually occurring in some term.
    pub fn support(&self) -> VariableSet {
        self.terms
            .keys()
            .fold(VariableSet::empty(), |acc, m| acc.union(m.support()))
    }

    pub fn leading(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|m| m.exp(s)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Moves the polynomial into a different variable set. Fails if a
    /// symbol that occurs is missing from the target.
    pub fn with_vars(&self, vars: VariableSet) -> Result<Polynomial, AlgebraError> {
        if let Some(s) = self.support().symbols().find(|s| !vars.contains(*s)) {
            return Err(AlgebraError::SymbolNotInSet(s, vars));
        }
        Ok(Polynomial {
            vars,
            terms: self.terms.clone(),
        })
    }

    fn check_vars(&self, other: &Polynomial) -> Result<(), AlgebraError> {
        if self.vars != other.vars {
            return Err(AlgebraError::VariableMismatch(self.vars, other.vars));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_vars(other)?;
        let mut out = Polynomial::zero(self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &BigInt) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero(self.vars);
        }
        Polynomial {
            vars: self.vars,
            terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        let mut out = Polynomial::zero(self.vars);
        for (m2, c) in &self.terms {
            out.add_term(m.mul(m2), c.clone());
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Polynomial::one(self.vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Fixes an involutive symbol to +1 or -1.
    pub fn specialize_sign(&self, s: Symbol, sign: i8) -> Polynomial {
        let mut out = Polynomial::zero(self.vars);
        for (m, c) in &self.terms {
            let flip = sign < 0 && m.exp(s) % 2 == 1;
            let c = if flip { -c } else { c.clone() };
            out.add_term(m.with_exp(s, 0), c);
        }
        out
    }

    /// Divides by `b^2 - a^2`, viewing the polynomial as one in `b`.
    pub fn divide_by_delta(&self) -> Result<Polynomial, AlgebraError> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        // coefficients of b^k, as polynomials in the other symbols
        let mut by_b: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.exp(Symbol::B);
            by_b.entry(k)
                .or_insert_with(|| Polynomial::zero(self.vars))
                .add_term(m.with_exp(Symbol::B, 0), c.clone());
        }
        let top = *by_b.keys().next_back().unwrap();
        if top < 2 {
            return Err(AlgebraError::NotDivisible);
        }
        let a2 = Monomial::one().with_exp(Symbol::A, 2);
        let mut quotient = Polynomial::zero(self.vars);
        for k in (2..=top).rev() {
            let Some(ck) = by_b.remove(&k) else { continue };
            if ck.is_zero() {
                continue;
            }
            let shifted = ck.mul_monomial(&a2);
            let lower = by_b
                .entry(k - 2)
                .or_insert_with(|| Polynomial::zero(self.vars));
            for (m, c) in &shifted.terms {
                lower.add_term(*m, c.clone());
            }
            let bk = Monomial::one().with_exp(Symbol::B, k - 2);
            for (m, c) in &ck.terms {
                quotient.add_term(m.mul(&bk), c.clone());
            }
        }
        if by_b.values().any(|p| !p.is_zero()) {
            return Err(AlgebraError::NotDivisible);
        }
        Ok(quotient)
    }

    /// Exact division `self / d`, or `NotDivisible`.
    ///
    /// Involutive symbols are handled by splitting over their `+1`/`-1`
    /// specializations and recombining with the idempotents `(1 +- v)/2`.
    pub fn exact_div(&self, d: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_vars(d)?;
        if d.is_zero() {
            return Err(AlgebraError::ZeroDivisor);
        }
        let inv: Vec<Symbol> = self
            .support()
            .union(d.support())
            .symbols()
            .filter(|s| s.is_involutive())
            .collect();
        if inv.is_empty() {
            return ordinary_div(self, d);
        }
        let mut combined = Polynomial::zero(self.vars);
        for mask in 0..(1u32 << inv.len()) {
            let mut p = self.clone();
            let mut q = d.clone();
            let mut idem = Polynomial::one(self.vars);
            for (i, s) in inv.iter().enumerate() {
                let sign: i8 = if mask & (1 << i) == 0 { 1 } else { -1 };
                p = p.specialize_sign(*s, sign);
                q = q.specialize_sign(*s, sign);
                let mut factor = Polynomial::one(self.vars);
                factor.add_term(Monomial::var(*s), BigInt::from(sign));
                idem = &idem * &factor;
            }
            if q.is_zero() {
                return Err(AlgebraError::NotDivisible);
            }
            let part = ordinary_div(&p, &q)?;
            combined = &combined + &(&part * &idem);
        }
        let denom = BigInt::one() << inv.len();
        let mut quotient = Polynomial::zero(self.vars);
        for (m, c) in &combined.terms {
            let (qc, rem) = c.div_rem(&denom);
            if !rem.is_zero() {
                return Err(AlgebraError::NotDivisible);
            }
            quotient.add_term(*m, qc);
        }
        if &quotient * d != *self {
            return Err(AlgebraError::NotDivisible);
        }
        Ok(quotient)
    }

    /// Evaluates the polynomial with every symbol replaced by a ring value.
    /// `proto` only supplies the ambient variables for constants.
    pub fn evaluate<T: Ring>(
        &self,
        proto: &T,
        value: &dyn Fn(Symbol) -> T,
    ) -> Result<T, AlgebraError> {
        let mut powers: BTreeMap<(Symbol, u32), T> = BTreeMap::new();
        let mut total = proto.constant_like(BigInt::zero());
        for (m, c) in &self.terms {
            let mut term = proto.constant_like(c.clone());
            for s in Symbol::ALL {
                let e = m.exp(s);
                if e == 0 {
                    continue;
                }
                if !powers.contains_key(&(s, e)) {
                    let base = value(s);
                    let mut acc = base.clone();
                    for _ in 1..e {
                        acc = acc.ring_mul(&base)?;
                    }
                    powers.insert((s, e), acc);
                }
                term = term.ring_mul(&powers[&(s, e)])?;
            }
            total = total.ring_add(&term)?;
        }
        Ok(total)
    }

    /// Replaces the assigned symbols by polynomials over the same variable set.
    pub fn substitute(
        &self,
        assignment: &BTreeMap<Symbol, Polynomial>,
    ) -> Result<Polynomial, AlgebraError> {
        for (s, v) in assignment {
            check_assignment(self.vars, *s, v)?;
        }
        let vars = self.vars;
        self.evaluate(&Polynomial::zero(vars), &|s| match assignment.get(&s) {
            Some(v) => v.with_vars(vars).expect("checked"),
            None => Polynomial::sym(vars, s),
        })
    }

    /// Canonical representative of the class of `self` under multiplication
    /// by units and monomials: monomial content and integer content are
    /// removed, then among the sign and involutive-unit multiples the one
    /// with the fewest involutive factors is chosen, ties going to the
    /// largest term list.
    pub fn normalize_associate(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let mut content = [u32::MAX; NSYM];
        for m in self.terms.keys() {
            for s in Symbol::ALL {
                if !s.is_involutive() {
                    content[s.index()] = content[s.index()].min(m.exp(s));
                }
            }
        }
        let mut cm = Monomial::one();
        for s in Symbol::ALL {
            if !s.is_involutive() {
                cm = cm.with_exp(s, content[s.index()]);
            }
        }
        let g = self
            .terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c));
        let mut base = Polynomial::zero(self.vars);
        for (m, c) in &self.terms {
            base.add_term(m.div(&cm).expect("content divides"), c / &g);
        }
        let inv: Vec<Symbol> = self.vars.involutive();
        let mut best: Option<Polynomial> = None;
        for mask in 0..(1u32 << inv.len()) {
            let mut unit = Monomial::one();
            for (i, s) in inv.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    unit = unit.with_exp(*s, 1);
                }
            }
            let cand = base.mul_monomial(&unit);
            for c in [cand.clone(), -&cand] {
                if !c.leading().is_some_and(|(_, lc)| lc.is_positive()) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(b) => {
                        let (ci, bi) = (c.involutive_weight(), b.involutive_weight());
                        ci < bi || (ci == bi && c.term_key() > b.term_key())
                    }
                };
                if better {
                    best = Some(c);
                }
            }
        }
        best.expect("nonzero polynomial has a candidate")
    }

    fn involutive_weight(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| {
                Symbol::ALL
                    .iter()
                    .filter(|s| s.is_involutive())
                    .map(|s| m.exp(*s))
                    .sum::<u32>()
            })
            .sum()
    }

    fn term_key(&self) -> Vec<(Monomial, BigInt)> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| (*m, c.clone()))
            .collect()
    }

    /// Parses the text format produced by `Display`.
    pub fn parse(vars: VariableSet, text: &str) -> Result<Polynomial, AlgebraError> {
        super::parse::parse_polynomial(vars, text)
    }
}

fn check_assignment(vars: VariableSet, s: Symbol, v: &Polynomial) -> Result<(), AlgebraError> {
    if !vars.contains(s) {
        return Err(AlgebraError::SymbolNotInSet(s, vars));
    }
    if let Some(bad) = v.support().symbols().find(|x| !vars.contains(*x)) {
        return Err(AlgebraError::SymbolNotInSet(bad, vars));
    }
    if s.is_involutive() {
        let ok = v
            .as_constant()
            .is_some_and(|c| c == BigInt::one() || c == -BigInt::one());
        if !ok {
            return Err(AlgebraError::NonUnitInvolutive(s));
        }
    }
    Ok(())
}

/// Leading-term division in the lexicographic order. Neither argument may
/// contain involutive symbols.
fn ordinary_div(p: &Polynomial, d: &Polynomial) -> Result<Polynomial, AlgebraError> {
    let (dm, dc) = d.leading().map(|(m, c)| (*m, c.clone())).ok_or(AlgebraError::ZeroDivisor)?;
    let mut rem = p.clone();
    let mut quotient = Polynomial::zero(p.vars);
    while let Some((m, c)) = rem.leading().map(|(m, c)| (*m, c.clone())) {
        let qm = m.div(&dm).ok_or(AlgebraError::NotDivisible)?;
        let (qc, r) = c.div_rem(&dc);
        if !r.is_zero() {
            return Err(AlgebraError::NotDivisible);
        }
        for (m2, c2) in &d.terms {
            rem.add_term(qm.mul(m2), -(&qc * c2));
        }
        quotient.add_term(qm, qc);
    }
    Ok(quotient)
}

impl Ring for Polynomial {
    fn constant_like(&self, c: BigInt) -> Self {
        Polynomial::constant(self.vars, c)
    }
    fn ring_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(other)
    }
    fn ring_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.checked_mul(other)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs).expect("polynomial variable sets must match")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.checked_sub(rhs).expect("polynomial variable sets must match")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs).expect("polynomial variable sets must match")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            vars: self.vars,
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Display for Polynomial {
    /// Terms in descending order, e.g. `4*a^2 - 4*a*b*r`.
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
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&m.render())?;
            } else {
                write!(f, "{}*{}", mag, m.render())?;
            }
        }
        Ok(())
    }
}
