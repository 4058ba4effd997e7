//! State sums: the bracket `[L]` and the normalized invariant `Y(L)`.
//!
//! Each classical crossing is smoothed three ways. With slots numbered
//! over_in = 0, over_out = 1, under_in = 2, under_out = 3:
//!
//! * `V` joins 0-1 and 2-3 and counts as a virtual crossing,
//! * `I` joins 0-3 and 2-1,
//! * `C` joins 0-2 and 1-3.
//!
//! A state contributes `coeff * t^loops * r^(virtual parity) * s^(wens mod 2)`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{
    omega, omega_inverse, AlgebraError, Fraction, LaurentPoly, Polynomial, Symbol, VariableSet,
};
use crate::diagram::{Diagram, DiagramError, EdgeId, Sign, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NuChoice {
    Plus,
    Minus,
    Symbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Free coefficients `a, b, c, x, y, z, t`.
    Generic,
    /// The solved family, with `nu` fixed or symbolic.
    Welded(NuChoice),
    /// The solved family at `nu = 1`.
    Extended,
}

/// The nine skein coefficients: `(V, I, C)` weights for positive and
/// negative crossings, the loop value `t`, and `r`, `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientSystem {
    pub mode: Mode,
    pub pos: [Fraction; 3],
    pub neg: [Fraction; 3],
    pub t: Fraction,
    pub r: Fraction,
    pub s: Fraction,
}

impl CoefficientSystem {
    pub fn generic() -> CoefficientSystem {
        let v = VariableSet::GENERIC;
        let f = |s| Fraction::sym(v, s);
        CoefficientSystem {
            mode: Mode::Generic,
            pos: [f(Symbol::A), f(Symbol::B), f(Symbol::C)],
            neg: [f(Symbol::X), f(Symbol::Y), f(Symbol::Z)],
            t: f(Symbol::T),
            r: f(Symbol::R),
            s: f(Symbol::S),
        }
    }

    /// `(a, b, nu b)`, `(-a, b, nu b)/delta`, `t = -2 nu`.
    pub fn welded(nu: NuChoice) -> CoefficientSystem {
        let mut cs = solved(nu);
        cs.mode = Mode::Welded(nu);
        cs
    }

    pub fn extended() -> CoefficientSystem {
        let mut cs = solved(NuChoice::Plus);
        cs.mode = Mode::Extended;
        cs
    }

    pub fn vars(&self) -> VariableSet {
        self.t.vars()
    }

    /// `Some(+1 | -1)` when nu is fixed, `None` for symbolic nu or generic mode.
    pub fn nu_sign(&self) -> Option<i8> {
        match self.mode {
            Mode::Generic | Mode::Welded(NuChoice::Symbolic) => None,
            Mode::Welded(NuChoice::Minus) => Some(-1),
            Mode::Welded(NuChoice::Plus) | Mode::Extended => Some(1),
        }
    }

    pub fn is_solved(&self) -> bool {
        self.mode != Mode::Generic
    }

    /// `a r - nu b`.
    pub fn omega(&self) -> Result<Fraction, SkeinError> {
        if !self.is_solved() {
            return Err(SkeinError::NotSolved);
        }
        Ok(omega(self.vars(), self.nu_sign().unwrap_or(1)))
    }

    /// `(-r a - nu b) / delta`.
    pub fn omega_inverse(&self) -> Result<Fraction, SkeinError> {
        if !self.is_solved() {
            return Err(SkeinError::NotSolved);
        }
        Ok(omega_inverse(self.vars(), self.nu_sign().unwrap_or(1)))
    }

    /// The triple for a crossing of the given sign.
    pub fn triple(&self, sign: Sign) -> &[Fraction; 3] {
        match sign {
            Sign::Pos => &self.pos,
            Sign::Neg => &self.neg,
        }
    }
}

fn solved(nu: NuChoice) -> CoefficientSystem {
    let vars = match nu {
        NuChoice::Symbolic => VariableSet::SOLVED,
        _ => VariableSet::SOLVED_FIXED_NU,
    };
    let p = |s| Polynomial::sym(vars, s);
    let nu_p = match nu {
        NuChoice::Symbolic => p(Symbol::Nu),
        NuChoice::Plus => Polynomial::one(vars),
        NuChoice::Minus => Polynomial::constant(vars, -1),
    };
    let a = p(Symbol::A);
    let b = p(Symbol::B);
    let nub = &nu_p * &b;
    CoefficientSystem {
        mode: Mode::Welded(nu),
        pos: [
            Fraction::from_poly(a.clone()),
            Fraction::from_poly(b.clone()),
            Fraction::from_poly(nub.clone()),
        ],
        neg: [
            Fraction::new(-&a, 1),
            Fraction::new(b, 1),
            Fraction::new(nub, 1),
        ],
        t: Fraction::from_poly(nu_p.scale(&BigInt::from(-2))),
        r: Fraction::from_poly(p(Symbol::R)),
        s: Fraction::from_poly(p(Symbol::S)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Smoothing {
    V,
    I,
    C,
}

impl Smoothing {
    pub const ALL: [Smoothing; 3] = [Smoothing::V, Smoothing::I, Smoothing::C];

    /// Slot pairs joined by this smoothing.
    pub fn links(self) -> [(usize, usize); 2] {
        match self {
            Smoothing::V => [(0, 1), (2, 3)],
            Smoothing::I => [(0, 3), (2, 1)],
            Smoothing::C => [(0, 2), (1, 3)],
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One smoothing per classical crossing, in vertex order.
pub type State = Vec<Smoothing>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkeinError {
    #[error("diagrams with wens require nu = 1: the wen relations only hold in the extended family")]
    WensWithNegativeNu,
    #[error("the normalized invariant needs a solved coefficient family")]
    NotSolved,
    #[error("state has {got} smoothings for {want} classical crossings")]
    StateLength { got: usize, want: usize },
    #[error("nu must be fixed to +1 or -1 for this operation")]
    SymbolicNu,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("thread pool: {0}")]
    Threads(String),
}

/// Evaluation knobs. None of them change the result.
#[derive(Clone, Copy, Debug, Default)]
pub struct EvalOptions {
    /// 0 uses the global pool, 1 is fully sequential.
    pub threads: usize,
    /// Evaluate wens even when nu = -1. Only meaningful for specializations
    /// that do not rely on the wen relations.
    pub allow_wens_with_negative_nu: bool,
}

/// Diagram flattened to edge indices.
#[derive(Clone, Debug)]
struct Compiled {
    n_edges: usize,
    fixed: Vec<(u32, u32)>,
    crossings: Vec<(Sign, [u32; 4])>,
    virtuals: usize,
    wens: usize,
    free_loops: u32,
}

fn compile(d: &Diagram) -> Compiled {
    let mut index: HashMap<&EdgeId, u32> = HashMap::new();
    for v in &d.vertices {
        for e in v.slots() {
            let n = index.len() as u32;
            index.entry(e).or_insert(n);
        }
    }
    let mut c = Compiled {
        n_edges: index.len(),
        fixed: Vec::new(),
        crossings: Vec::new(),
        virtuals: 0,
        wens: 0,
        free_loops: d.free_loops,
    };
    for v in &d.vertices {
        let ids: Vec<u32> = v.slots().into_iter().map(|e| index[e]).collect();
        match v {
            Vertex::Classical { sign, .. } => {
                c.crossings.push((*sign, [ids[0], ids[1], ids[2], ids[3]]));
            }
            Vertex::Virtual { .. } => {
                c.virtuals += 1;
                c.fixed.push((ids[0], ids[1]));
                c.fixed.push((ids[2], ids[3]));
            }
            Vertex::Wen { .. } => {
                c.wens += 1;
                c.fixed.push((ids[0], ids[1]));
            }
        }
    }
    c
}

/// Union-find without path compression, so unions can be undone.
#[derive(Clone, Debug)]
struct RollbackDsu {
    parent: Vec<u32>,
    rank: Vec<u8>,
    history: Vec<Option<(u32, u32, bool)>>,
    merges: usize,
}

impl RollbackDsu {
    fn new(n: usize) -> RollbackDsu {
        RollbackDsu {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            history: Vec::new(),
            merges: 0,
        }
    }

    fn find(&self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            self.history.push(None);
            return;
        }
        if self.rank[ra as usize] < self.rank[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        let bump = self.rank[ra as usize] == self.rank[rb as usize];
        self.parent[rb as usize] = ra;
        if bump {
            self.rank[ra as usize] += 1;
        }
        self.merges += 1;
        self.history.push(Some((rb, ra, bump)));
    }

    fn mark(&self) -> usize {
        self.history.len()
    }

    fn rollback(&mut self, mark: usize) {
        while self.history.len() > mark {
            if let Some((child, root, bump)) = self.history.pop().unwrap() {
                self.parent[child as usize] = child;
                if bump {
                    self.rank[root as usize] -= 1;
                }
                self.merges -= 1;
            }
        }
    }
}

/// Per-state summary: V and I counts for positive and negative crossings,
/// and the number of closed loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    pub pos_v: u16,
    pub pos_i: u16,
    pub neg_v: u16,
    pub neg_i: u16,
    pub loops: u32,
}

/// How many states fall on each [`StateKey`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateHistogram {
    pub counts: BTreeMap<StateKey, u64>,
    pub n_pos: u16,
    pub n_neg: u16,
    pub virtuals: usize,
    pub wens: usize,
}

impl StateHistogram {
    /// Number of states visited.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

fn dfs(
    c: &Compiled,
    i: usize,
    dsu: &mut RollbackDsu,
    key: StateKey,
    hist: &mut HashMap<StateKey, u64>,
) {
    if i == c.crossings.len() {
        let loops = (c.n_edges - dsu.merges) as u32 + c.free_loops;
        *hist.entry(StateKey { loops, ..key }).or_default() += 1;
        return;
    }
    let (sign, slots) = c.crossings[i];
    for sm in Smoothing::ALL {
        let mark = dsu.mark();
        for (x, y) in sm.links() {
            dsu.union(slots[x], slots[y]);
        }
        let mut k = key;
        match (sign, sm) {
            (Sign::Pos, Smoothing::V) => k.pos_v += 1,
            (Sign::Pos, Smoothing::I) => k.pos_i += 1,
            (Sign::Neg, Smoothing::V) => k.neg_v += 1,
            (Sign::Neg, Smoothing::I) => k.neg_i += 1,
            _ => {}
        }
        dfs(c, i + 1, dsu, k, hist);
        dsu.rollback(mark);
    }
}

fn base_dsu(c: &Compiled) -> RollbackDsu {
    let mut dsu = RollbackDsu::new(c.n_edges);
    for &(x, y) in &c.fixed {
        dsu.union(x, y);
    }
    dsu
}

const ZERO_KEY: StateKey = StateKey {
    pos_v: 0,
    pos_i: 0,
    neg_v: 0,
    neg_i: 0,
    loops: 0,
};

/// Enumerates all `3^n` states depth first and tallies them by [`StateKey`].
pub fn state_histogram(d: &Diagram, threads: usize) -> Result<StateHistogram, SkeinError> {
    let c = compile(d);
    let n = c.crossings.len();
    let (n_pos, n_neg) = d.crossing_counts();
    let mut out = StateHistogram {
        counts: BTreeMap::new(),
        n_pos: n_pos as u16,
        n_neg: n_neg as u16,
        virtuals: c.virtuals,
        wens: c.wens,
    };
    if threads == 1 || n < 6 {
        let mut dsu = base_dsu(&c);
        let mut hist = HashMap::new();
        dfs(&c, 0, &mut dsu, ZERO_KEY, &mut hist);
        out.counts = hist.into_iter().collect();
        return Ok(out);
    }
    let depth = n.min(5);
    let prefixes = 3usize.pow(depth as u32);
    let run = || {
        (0..prefixes)
            .into_par_iter()
            .map(|p| {
                let mut dsu = base_dsu(&c);
                let mut key = ZERO_KEY;
                let mut code = p;
                for i in 0..depth {
                    let sm = Smoothing::ALL[code % 3];
                    code /= 3;
                    let (sign, slots) = c.crossings[i];
                    for (x, y) in sm.links() {
                        dsu.union(slots[x], slots[y]);
                    }
                    match (sign, sm) {
                        (Sign::Pos, Smoothing::V) => key.pos_v += 1,
                        (Sign::Pos, Smoothing::I) => key.pos_i += 1,
                        (Sign::Neg, Smoothing::V) => key.neg_v += 1,
                        (Sign::Neg, Smoothing::I) => key.neg_i += 1,
                        _ => {}
                    }
                }
                let mut hist = HashMap::new();
                dfs(&c, depth, &mut dsu, key, &mut hist);
                hist
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            })
    };
    let hist = if threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| SkeinError::Threads(e.to_string()))?
            .install(run)
    };
    out.counts = hist.into_iter().collect();
    Ok(out)
}

/// Numerator and delta power without cancelling anything.
#[derive(Clone)]
struct Raw(Polynomial, u32);

impl Raw {
    fn of(f: &Fraction) -> Raw {
        Raw(f.numerator().clone(), f.delta_power())
    }

    fn mul(&self, o: &Raw) -> Raw {
        Raw(&self.0 * &o.0, self.1 + o.1)
    }
}

fn raw_powers(base: &Fraction, max: usize) -> Vec<Raw> {
    let b = Raw::of(base);
    let mut out = vec![Raw(Polynomial::one(base.vars()), 0)];
    for i in 1..=max {
        out.push(out[i - 1].mul(&b));
    }
    out
}

fn sum_raw(parts: BTreeMap<u32, Polynomial>, vars: VariableSet) -> Fraction {
    let Some(&top) = parts.keys().next_back() else {
        return Fraction::zero(vars);
    };
    let delta = Polynomial::delta(vars);
    let mut num = Polynomial::zero(vars);
    for (k, p) in parts {
        num = &num + &(&p * &delta.pow(top - k));
    }
    Fraction::new(num, top)
}

/// Sums a histogram against a coefficient system.
pub fn assemble(h: &StateHistogram, cs: &CoefficientSystem) -> Fraction {
    let vars = cs.vars();
    let np = h.n_pos as usize;
    let nn = h.n_neg as usize;
    let max_loops = h.counts.keys().map(|k| k.loops).max().unwrap_or(0) as usize;
    let pp: Vec<Vec<Raw>> = cs.pos.iter().map(|f| raw_powers(f, np)).collect();
    let nq: Vec<Vec<Raw>> = cs.neg.iter().map(|f| raw_powers(f, nn)).collect();
    let tp = raw_powers(&cs.t, max_loops);
    let r = Raw::of(&cs.r);
    let s_factor = if h.wens % 2 == 1 {
        Raw::of(&cs.s)
    } else {
        Raw(Polynomial::one(vars), 0)
    };

    // group loops under each crossing pattern
    let mut grouped: BTreeMap<(u16, u16, u16, u16), BTreeMap<u32, Polynomial>> = BTreeMap::new();
    for (k, &count) in &h.counts {
        let lp = &tp[k.loops as usize];
        let inner = grouped.entry((k.pos_v, k.pos_i, k.neg_v, k.neg_i)).or_default();
        let slot = inner.entry(lp.1).or_insert_with(|| Polynomial::zero(vars));
        *slot = &*slot + &lp.0.scale(&BigInt::from(count));
    }
    let mut parts: BTreeMap<u32, Polynomial> = BTreeMap::new();
    for ((pv, pi, nv, ni), loops) in grouped {
        let (pv, pi, nv, ni) = (pv as usize, pi as usize, nv as usize, ni as usize);
        let pc = np - pv - pi;
        let nc = nn - nv - ni;
        let mut prod = pp[0][pv]
            .mul(&pp[1][pi])
            .mul(&pp[2][pc])
            .mul(&nq[0][nv])
            .mul(&nq[1][ni])
            .mul(&nq[2][nc])
            .mul(&s_factor);
        if (h.virtuals + pv + nv) % 2 == 1 {
            prod = prod.mul(&r);
        }
        for (tk, lsum) in loops {
            let term = &prod.0 * &lsum;
            let slot = parts
                .entry(prod.1 + tk)
                .or_insert_with(|| Polynomial::zero(vars));
            *slot = &*slot + &term;
        }
    }
    sum_raw(parts, vars)
}

fn check_wens(d: &Diagram, cs: &CoefficientSystem, opts: &EvalOptions) -> Result<(), SkeinError> {
    if cs.mode == Mode::Welded(NuChoice::Minus)
        && d.wen_count() > 0
        && !opts.allow_wens_with_negative_nu
    {
        return Err(SkeinError::WensWithNegativeNu);
    }
    Ok(())
}

/// Value of a single state, recomputing the loop count from scratch.
pub fn state_value(
    d: &Diagram,
    state: &[Smoothing],
    cs: &CoefficientSystem,
) -> Result<Fraction, SkeinError> {
    let c = compile(d);
    if state.len() != c.crossings.len() {
        return Err(SkeinError::StateLength {
            got: state.len(),
            want: c.crossings.len(),
        });
    }
    let mut parent: Vec<usize> = (0..c.n_edges).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    let mut links: Vec<(u32, u32)> = c.fixed.clone();
    let mut value = Fraction::one(cs.vars());
    let mut virt = c.virtuals;
    for ((sign, slots), sm) in c.crossings.iter().zip(state) {
        for (x, y) in sm.links() {
            links.push((slots[x], slots[y]));
        }
        if *sm == Smoothing::V {
            virt += 1;
        }
        value = &value * &cs.triple(*sign)[sm.index()];
    }
    let mut comps = c.n_edges;
    for (x, y) in links {
        let (rx, ry) = (find(&mut parent, x as usize), find(&mut parent, y as usize));
        if rx != ry {
            parent[rx] = ry;
            comps -= 1;
        }
    }
    let loops = comps as u32 + c.free_loops;
    value = &value * &cs.t.pow(loops);
    if virt % 2 == 1 {
        value = &value * &cs.r;
    }
    if c.wens % 2 == 1 {
        value = &value * &cs.s;
    }
    Ok(value)
}

/// Every state of a diagram, in lexicographic order of smoothings.
pub fn all_states(n: usize) -> impl Iterator<Item = State> {
    let total = 3usize.pow(n as u32);
    (0..total).map(move |mut code| {
        let mut s = vec![Smoothing::V; n];
        for slot in s.iter_mut().rev() {
            *slot = Smoothing::ALL[code % 3];
            code /= 3;
        }
        s
    })
}

/// `[L]`: the sum of all state values.
pub fn bracket(d: &Diagram, cs: &CoefficientSystem) -> Result<Fraction, SkeinError> {
    bracket_with(d, cs, &EvalOptions::default())
}

pub fn bracket_with(
    d: &Diagram,
    cs: &CoefficientSystem,
    opts: &EvalOptions,
) -> Result<Fraction, SkeinError> {
    d.validate()?;
    check_wens(d, cs, opts)?;
    let h = state_histogram(d, opts.threads)?;
    Ok(assemble(&h, cs))
}

/// `Y(L) = r^v(L) * omega^(-w(L)) * [L]`.
pub fn y_invariant(d: &Diagram, cs: &CoefficientSystem) -> Result<Fraction, SkeinError> {
    y_invariant_with(d, cs, &EvalOptions::default())
}

pub fn y_invariant_with(
    d: &Diagram,
    cs: &CoefficientSystem,
    opts: &EvalOptions,
) -> Result<Fraction, SkeinError> {
    if !cs.is_solved() {
        return Err(SkeinError::NotSolved);
    }
    let br = bracket_with(d, cs, opts)?;
    normalize(&br, d.writhe(), d.virtual_writhe().parity, cs)
}

/// Applies the writhe and virtual-writhe corrections to a bracket value.
pub fn normalize(
    bracket: &Fraction,
    writhe: i64,
    virtual_parity: u8,
    cs: &CoefficientSystem,
) -> Result<Fraction, SkeinError> {
    let w = writhe.unsigned_abs() as u32;
    let corr = if writhe >= 0 {
        cs.omega_inverse()?.pow(w)
    } else {
        cs.omega()?.pow(w)
    };
    let mut y = bracket * &corr;
    if virtual_parity == 1 {
        y = &y * &cs.r;
    }
    Ok(y)
}

/// Fixes `r` and/or `s` to +1 or -1 in a value.
pub fn specialize_rs(f: &Fraction, r: Option<i8>, s: Option<i8>) -> Result<Fraction, SkeinError> {
    let vars = f.vars();
    let mut assign = BTreeMap::new();
    if let Some(r) = r {
        assign.insert(Symbol::R, Fraction::constant(vars, r));
    }
    if let Some(s) = s {
        assign.insert(Symbol::S, Fraction::constant(vars, s));
    }
    Ok(f.substitute(&assign)?)
}

/// `Y` rewritten in `alpha, beta` and dehomogenized to a polynomial in `lambda`.
pub fn y_lambda(
    d: &Diagram,
    cs: &CoefficientSystem,
    r: Option<i8>,
    s: Option<i8>,
) -> Result<LaurentPoly, SkeinError> {
    if cs.nu_sign().is_none() {
        return Err(SkeinError::SymbolicNu);
    }
    let y = specialize_rs(&y_invariant(d, cs)?, r, s)?;
    Ok(y.to_alpha_beta()?.dehomogenize()?)
}
