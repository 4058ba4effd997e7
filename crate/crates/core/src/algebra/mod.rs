//! Exact multivariate arithmetic over the coefficient symbols.
//!
//! Polynomials have integer coefficients. The symbols `r`, `nu` and `s`
//! square to one. Fractions carry a power of `delta = b^2 - a^2` as their only
//! denominator.

mod fraction;
mod laurent;
mod parse;
mod poly;
mod rational;

pub use fraction::{omega, omega_inverse, Fraction};
pub use laurent::{LaurentMonomial, LaurentPoly, LaurentVars};
pub use poly::{Monomial, Polynomial, Ring};
pub use rational::RationalFunction;

use thiserror::Error;

/// The ten symbols, in the fixed order used for the monomial order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    A,
    B,
    C,
    X,
    Y,
    Z,
    T,
    R,
    Nu,
    S,
}

pub const NSYM: usize = 10;

impl Symbol {
    pub const ALL: [Symbol; NSYM] = [
        Symbol::A,
        Symbol::B,
        Symbol::C,
        Symbol::X,
        Symbol::Y,
        Symbol::Z,
        Symbol::T,
        Symbol::R,
        Symbol::Nu,
        Symbol::S,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Symbol::A => "a",
            Symbol::B => "b",
            Symbol::C => "c",
            Symbol::X => "x",
            Symbol::Y => "y",
            Symbol::Z => "z",
            Symbol::T => "t",
            Symbol::R => "r",
            Symbol::Nu => "nu",
            Symbol::S => "s",
        }
    }

    pub fn from_name(name: &str) -> Option<Symbol> {
        Symbol::ALL.into_iter().find(|s| s.name() == name)
    }

    /// `r`, `nu` and `s` square to one.
    pub fn is_involutive(self) -> bool {
        matches!(self, Symbol::R | Symbol::Nu | Symbol::S)
    }
}

impl std::fmt::Display for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A subset of the symbols. Every polynomial lives over one of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableSet(u16);

impl VariableSet {
    /// a, b, c, x, y, z, t, r, s: the free skein coefficients.
    pub const GENERIC: VariableSet = VariableSet(0b10_1111_1111);
    /// a, b, r, nu, s: the solved family with symbolic nu.
    pub const SOLVED: VariableSet = VariableSet(0b11_1000_0011);
    /// a, b, r, s: the solved family with nu fixed.
    pub const SOLVED_FIXED_NU: VariableSet = VariableSet(0b10_1000_0011);
    /// Every symbol.
    pub const ALL: VariableSet = VariableSet(0b11_1111_1111);

    pub fn new(symbols: &[Symbol]) -> VariableSet {
        VariableSet(symbols.iter().fold(0, |m, s| m | (1 << s.index())))
    }

    pub fn empty() -> VariableSet {
        VariableSet(0)
    }

    pub fn contains(self, s: Symbol) -> bool {
        self.0 & (1 << s.index()) != 0
    }

    pub fn is_subset(self, other: VariableSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: VariableSet) -> VariableSet {
        VariableSet(self.0 | other.0)
    }

    pub fn with(self, s: Symbol) -> VariableSet {
        VariableSet(self.0 | (1 << s.index()))
    }

    pub fn without(self, s: Symbol) -> VariableSet {
        VariableSet(self.0 & !(1 << s.index()))
    }

    pub fn symbols(self) -> impl Iterator<Item = Symbol> {
        Symbol::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    pub fn ordinary(self) -> Vec<Symbol> {
        self.symbols().filter(|s| !s.is_involutive()).collect()
    }

    pub fn involutive(self) -> Vec<Symbol> {
        self.symbols().filter(|s| s.is_involutive()).collect()
    }
}

impl std::fmt::Display for VariableSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = self.symbols().map(Symbol::name).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("variable sets differ: {0} vs {1}")]
    VariableMismatch(VariableSet, VariableSet),
    #[error("symbol `{0}` is not in the variable set {1}")]
    SymbolNotInSet(Symbol, VariableSet),
    #[error("involutive symbol `{0}` can only be assigned +1 or -1")]
    NonUnitInvolutive(Symbol),
    #[error("not divisible")]
    NotDivisible,
    #[error("division by zero")]
    ZeroDivisor,
    #[error("value is not a polynomial over a power of b^2 - a^2")]
    NotRepresentable,
    #[error("symbol `{0}` cannot be carried through the alpha/beta change of variables")]
    UnsupportedSymbol(Symbol),
    #[error("not homogeneous of degree 0 (found degree {0:?})")]
    NotHomogeneous(Option<i64>),
    #[error("parse error at column {col}: {reason}")]
    Parse { col: usize, reason: String },
}
