//! Coefficient constraints from tangle brackets.
//!
//! A tangle's bracket is grouped by the pairing of its endpoints that each
//! state induces. Closing both sides of a move in every possible way gives
//! one polynomial equation per closure; a coefficient family is compatible
//! with the move when all of them vanish.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{AlgebraError, Fraction, Polynomial, Symbol, VariableSet};
use crate::diagram::{Diagram, DiagramError, EdgeId, EndDir, Endpoint, Sign, Tangle, Vertex};
use crate::moves::{slide_sides, MoveKind, Side};
use crate::skein::{all_states, CoefficientSystem, SkeinError, Smoothing};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Skein(#[from] SkeinError),
    #[error("pairing {0} is not a perfect matching of the endpoints")]
    NotPerfect(String),
    #[error("tangles have different endpoint labels")]
    LabelMismatch,
}

/// A perfect matching of endpoint labels. Each pair is sorted and the list
/// of pairs is sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pairing(Vec<(String, String)>);

impl Pairing {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Pairing {
        let mut v: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        v.sort();
        Pairing(v)
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.0
    }

    /// Reads `12:35:46` (single-character labels) or `a-b:c-d`.
    pub fn parse(text: &str) -> Option<Pairing> {
        let mut pairs = Vec::new();
        for part in text.split(':') {
            if let Some((a, b)) = part.split_once('-') {
                pairs.push((a.to_string(), b.to_string()));
            } else {
                let c: Vec<char> = part.chars().collect();
                if c.len() != 2 {
                    return None;
                }
                pairs.push((c[0].to_string(), c[1].to_string()));
            }
        }
        Some(Pairing::new(pairs))
    }

    fn partner(&self) -> HashMap<&str, &str> {
        let mut m = HashMap::new();
        for (a, b) in &self.0 {
            m.insert(a.as_str(), b.as_str());
            m.insert(b.as_str(), a.as_str());
        }
        m
    }

    fn labels(&self) -> BTreeSet<&str> {
        self.0
            .iter()
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect()
    }

    /// Number of pairs of chords that cross when the labels sit on a circle
    /// in the given order.
    pub fn chord_crossings(&self, order: &[&str]) -> usize {
        let pos: HashMap<&str, usize> = order.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let chords: Vec<(usize, usize)> = self
            .0
            .iter()
            .map(|(a, b)| {
                let (x, y) = (pos[a.as_str()], pos[b.as_str()]);
                (x.min(y), x.max(y))
            })
            .collect();
        let mut n = 0;
        for i in 0..chords.len() {
            for j in i + 1..chords.len() {
                let (a, b) = chords[i];
                let (c, d) = chords[j];
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    n += 1;
                }
            }
        }
        n
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let short = self.0.iter().all(|(a, b)| a.len() == 1 && b.len() == 1);
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(a, b)| {
                if short {
                    format!("{a}{b}")
                } else {
                    format!("{a}-{b}")
                }
            })
            .collect();
        f.write_str(&parts.join(":"))
    }
}

/// Every perfect matching of `labels`, `(2k-1)!!` of them.
pub fn closures(labels: &[&str]) -> Vec<Pairing> {
    fn rec(rest: &[&str], acc: &mut Vec<(String, String)>, out: &mut Vec<Pairing>) {
        if rest.is_empty() {
            out.push(Pairing::new(acc.clone()));
            return;
        }
        let first = rest[0];
        for i in 1..rest.len() {
            let mut others: Vec<&str> = rest[1..].to_vec();
            let partner = others.remove(i - 1);
            acc.push((first.to_string(), partner.to_string()));
            rec(&others, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(labels, &mut Vec::new(), &mut out);
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BracketKey {
    pub pairing: Pairing,
    pub loops: u32,
    /// Virtual crossings in the state, mod 2.
    pub parity: u8,
}

/// A tangle's bracket grouped by the boundary data of each state. Wen
/// factors are already folded into the coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TangleBracket {
    pub labels: Vec<String>,
    pub terms: BTreeMap<BracketKey, Fraction>,
    vars: VariableSet,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = x;
        while self.0[x] != r {
            let n = self.0[x];
            self.0[x] = r;
            x = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

pub fn tangle_bracket(t: &Tangle, cs: &CoefficientSystem) -> Result<TangleBracket, VerifyError> {
    t.validate()?;
    let d = &t.diagram;
    let mut index: HashMap<&EdgeId, usize> = HashMap::new();
    for e in d
        .vertices
        .iter()
        .flat_map(|v| v.slots())
        .chain(t.boundary.iter().map(|e| &e.edge))
    {
        let n = index.len();
        index.entry(e).or_insert(n);
    }
    let classical: Vec<usize> = (0..d.vertices.len())
        .filter(|&i| matches!(d.vertices[i], Vertex::Classical { .. }))
        .collect();
    let virtuals = d.virtual_writhe().count;
    let vars = cs.vars();
    let wen_factor = if d.wen_count() % 2 == 1 {
        cs.s.clone()
    } else {
        Fraction::one(vars)
    };
    let mut terms: BTreeMap<BracketKey, Fraction> = BTreeMap::new();
    for state in all_states(classical.len()) {
        let mut dsu = Dsu((0..index.len()).collect());
        let mut coeff = wen_factor.clone();
        let mut vcount = virtuals;
        let mut smoothing_of = HashMap::new();
        for (vi, s) in classical.iter().zip(&state) {
            smoothing_of.insert(*vi, *s);
        }
        for (vi, v) in d.vertices.iter().enumerate() {
            let slots = v.slots();
            let links: Vec<(usize, usize)> = match v {
                Vertex::Classical { sign, .. } => {
                    let s = smoothing_of[&vi];
                    coeff = &coeff * &cs.triple(*sign)[s as usize];
                    if s == Smoothing::V {
                        vcount += 1;
                    }
                    s.links().to_vec()
                }
                Vertex::Virtual { .. } => vec![(0, 1), (2, 3)],
                Vertex::Wen { .. } => vec![(0, 1)],
            };
            for (x, y) in links {
                dsu.union(index[slots[x]], index[slots[y]]);
            }
        }
        let mut ends: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for ep in &t.boundary {
            ends.entry(dsu.find(index[&ep.edge]))
                .or_default()
                .push(ep.label.clone());
        }
        let roots: BTreeSet<usize> = (0..index.len()).map(|i| dsu.find(i)).collect();
        let loops = roots.iter().filter(|r| !ends.contains_key(r)).count() as u32 + d.free_loops;
        let pairs = ends.into_values().map(|mut v| {
            debug_assert_eq!(v.len(), 2);
            let b = v.pop().expect("two ends");
            let a = v.pop().expect("two ends");
            (a, b)
        });
        let key = BracketKey {
            pairing: Pairing::new(pairs),
            loops,
            parity: (vcount % 2) as u8,
        };
        let slot = terms.entry(key).or_insert_with(|| Fraction::zero(vars));
        *slot = &*slot + &coeff;
    }
    terms.retain(|_, v| !v.is_zero());
    Ok(TangleBracket {
        labels: t.boundary.iter().map(|e| e.label.clone()).collect(),
        terms,
        vars,
    })
}

fn cycles(a: &Pairing, b: &Pairing) -> u32 {
    let pa = a.partner();
    let pb = b.partner();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut n = 0;
    for start in a.labels() {
        if seen.contains(start) {
            continue;
        }
        n += 1;
        let mut cur = start;
        loop {
            seen.insert(cur);
            let mid = pa[cur];
            seen.insert(mid);
            cur = pb[mid];
            if cur == start {
                break;
            }
        }
    }
    n
}

impl TangleBracket {
    pub fn vars(&self) -> VariableSet {
        self.vars
    }

    /// Value of the link obtained by joining endpoints as in `pairing`. The
    /// closing arcs' own virtual crossings are common to both sides of a
    /// move and are left out.
    pub fn close(&self, pairing: &Pairing, cs: &CoefficientSystem) -> Result<Fraction, VerifyError> {
        let want: BTreeSet<&str> = self.labels.iter().map(|s| s.as_str()).collect();
        let flat: Vec<&str> = pairing
            .pairs()
            .iter()
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect();
        if flat.len() != want.len() || pairing.labels() != want {
            return Err(VerifyError::NotPerfect(pairing.to_string()));
        }
        let mut total = Fraction::zero(self.vars);
        for (k, c) in &self.terms {
            let loops = k.loops + cycles(&k.pairing, pairing);
            let mut term = c * &cs.t.pow(loops);
            if k.parity == 1 {
                term = &term * &cs.r;
            }
            total = &total + &term;
        }
        Ok(total)
    }

    /// Coefficients on the basis tangles: for each pairing, the tangle
    /// joining those endpoints with the fewest virtual crossings when the
    /// labels sit on a circle in `order`.
    pub fn basis_coefficients(
        &self,
        order: &[&str],
        cs: &CoefficientSystem,
    ) -> BTreeMap<Pairing, Fraction> {
        let mut out: BTreeMap<Pairing, Fraction> = BTreeMap::new();
        for (k, c) in &self.terms {
            let mut term = c * &cs.t.pow(k.loops);
            if (k.parity as usize + k.pairing.chord_crossings(order)) % 2 == 1 {
                term = &term * &cs.r;
            }
            let slot = out
                .entry(k.pairing.clone())
                .or_insert_with(|| Fraction::zero(self.vars));
            *slot = &*slot + &term;
        }
        out
    }
}

/// A nonzero equation `lhs - rhs = 0`, denominators cleared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    /// Closures (or basis pairings) that produced this equation.
    pub sources: Vec<Pairing>,
    /// The first form found.
    pub raw: Polynomial,
    /// Representative up to units and monomial factors.
    pub normalized: Polynomial,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    /// Number of equations examined.
    pub closures: usize,
    pub equations: Vec<Constraint>,
}

impl ConstraintSet {
    fn from_residues(residues: Vec<(Pairing, Fraction)>) -> ConstraintSet {
        let closures = residues.len();
        let mut equations: Vec<Constraint> = Vec::new();
        for (p, f) in residues {
            if f.is_zero() {
                continue;
            }
            let raw = f.numerator().clone();
            let normalized = raw.normalize_associate();
            match equations.iter_mut().find(|c| c.normalized == normalized) {
                Some(c) => c.sources.push(p),
                None => equations.push(Constraint {
                    sources: vec![p],
                    raw,
                    normalized,
                }),
            }
        }
        ConstraintSet {
            closures,
            equations,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    /// Normalized equations, in order of first appearance.
    pub fn normalized(&self) -> Vec<Polynomial> {
        self.equations.iter().map(|c| c.normalized.clone()).collect()
    }

    /// Substitutes into every raw equation and rebuilds the set.
    pub fn substitute(
        &self,
        assign: &BTreeMap<Symbol, Polynomial>,
    ) -> Result<ConstraintSet, VerifyError> {
        let mut residues = Vec::new();
        for c in &self.equations {
            let v = c.raw.substitute(assign)?;
            for p in &c.sources {
                residues.push((p.clone(), Fraction::from_poly(v.clone())));
            }
        }
        let mut out = ConstraintSet::from_residues(residues);
        out.closures = self.closures;
        Ok(out)
    }
}

fn check_labels(lhs: &Tangle, rhs: &Tangle) -> Result<Vec<String>, VerifyError> {
    let l: BTreeSet<&str> = lhs.labels().into_iter().collect();
    let r: BTreeSet<&str> = rhs.labels().into_iter().collect();
    if l != r {
        return Err(VerifyError::LabelMismatch);
    }
    Ok(lhs.boundary.iter().map(|e| e.label.clone()).collect())
}

/// One equation per closure: `close(lhs) - close(rhs)`.
pub fn move_constraints(
    lhs: &Tangle,
    rhs: &Tangle,
    cs: &CoefficientSystem,
) -> Result<ConstraintSet, VerifyError> {
    move_constraints_scaled(lhs, rhs, &Fraction::one(cs.vars()), cs)
}

/// One equation per closure: `close(lhs) - factor * close(rhs)`.
pub fn move_constraints_scaled(
    lhs: &Tangle,
    rhs: &Tangle,
    factor: &Fraction,
    cs: &CoefficientSystem,
) -> Result<ConstraintSet, VerifyError> {
    let labels = check_labels(lhs, rhs)?;
    let lb = tangle_bracket(lhs, cs)?;
    let rb = tangle_bracket(rhs, cs)?;
    let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    let residues: Result<Vec<(Pairing, Fraction)>, VerifyError> = closures(&refs)
        .into_par_iter()
        .map(|p| {
            let l = lb.close(&p, cs)?;
            let r = rb.close(&p, cs)?;
            Ok((p, &l - &(factor * &r)))
        })
        .collect();
    Ok(ConstraintSet::from_residues(residues?))
}

/// One equation per basis pairing: the difference of basis coefficients.
pub fn basis_system(
    lhs: &Tangle,
    rhs: &Tangle,
    order: &[&str],
    cs: &CoefficientSystem,
) -> Result<ConstraintSet, VerifyError> {
    let labels = check_labels(lhs, rhs)?;
    let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    let lb = tangle_bracket(lhs, cs)?.basis_coefficients(order, cs);
    let rb = tangle_bracket(rhs, cs)?.basis_coefficients(order, cs);
    let zero = Fraction::zero(cs.vars());
    let residues = closures(&refs)
        .into_iter()
        .map(|p| {
            let l = lb.get(&p).unwrap_or(&zero);
            let r = rb.get(&p).unwrap_or(&zero);
            (p, l - r)
        })
        .collect();
    Ok(ConstraintSet::from_residues(residues))
}

/// Both sides of a move as tangles with numeric endpoint labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveTangles {
    pub name: &'static str,
    /// Sign of the pattern's first classical crossing, when it has one.
    pub sign: Option<Sign>,
    pub lhs: Tangle,
    pub rhs: Tangle,
    /// Labels in cyclic order around the tangle.
    pub order: Vec<String>,
}

fn side_tangle(side: &Side, sign: Sign, names: &[&'static str]) -> Tangle {
    let verts: Vec<Vertex> = side
        .vertices
        .iter()
        .map(|t| t.build(sign, &mut |n| EdgeId::new(n)))
        .collect();
    let (ins, _) = side.boundary();
    let through: HashMap<&str, &str> = side.passes.iter().map(|(i, o)| (*o, *i)).collect();
    let boundary = names
        .iter()
        .enumerate()
        .map(|(k, n)| Endpoint {
            label: (k + 1).to_string(),
            dir: if ins.contains(n) {
                EndDir::In
            } else {
                EndDir::Out
            },
            edge: EdgeId::new(*through.get(n).unwrap_or(n)),
        })
        .collect();
    Tangle::new(Diagram::new(verts, 0), boundary)
}

impl MoveTangles {
    fn build(
        name: &'static str,
        sign: Option<Sign>,
        lhs: &Side,
        rhs: &Side,
        names: &[&'static str],
    ) -> MoveTangles {
        let s = sign.unwrap_or(Sign::Pos);
        MoveTangles {
            name,
            sign,
            lhs: side_tangle(lhs, s, names),
            rhs: side_tangle(rhs, s, names),
            order: (1..=names.len()).map(|k| k.to_string()).collect(),
        }
    }

    pub fn order_refs(&self) -> Vec<&str> {
        self.order.iter().map(|s| s.as_str()).collect()
    }

    /// `r^(v_L - v_R) * omega^(w_L - w_R)`: what `[lhs]` must equal as a
    /// multiple of `[rhs]` for the normalized invariant to agree.
    pub fn normalization(&self, cs: &CoefficientSystem) -> Result<Fraction, VerifyError> {
        let l = &self.lhs.diagram;
        let r = &self.rhs.diagram;
        let dw = l.writhe() - r.writhe();
        let dv = l.virtual_writhe().count + r.virtual_writhe().count;
        let mut f = Fraction::one(cs.vars());
        if dw != 0 {
            let base = if dw > 0 { cs.omega()? } else { cs.omega_inverse()? };
            f = base.pow(dw.unsigned_abs() as u32);
        }
        if dv % 2 == 1 {
            f = &f * &cs.r;
        }
        Ok(f)
    }

    pub fn changes_writhe(&self) -> bool {
        self.lhs.diagram.writhe() != self.rhs.diagram.writhe()
    }
}

/// Boundary names of each slide move in cyclic order.
fn slide_order(kind: MoveKind) -> &'static [&'static str] {
    match kind {
        MoveKind::R3 | MoveKind::V3 => &["T0", "M0", "B0", "B2", "M2", "T2"],
        MoveKind::M => &["X0", "Y0", "Z0", "Z2", "Y2", "X2"],
        MoveKind::F1 => &["P0", "Q0", "O0", "P2", "Q2", "O2"],
        MoveKind::T2 => &["A0", "B0", "B2", "A2"],
        MoveKind::T3 => &["O0", "U0", "U2", "O2"],
        MoveKind::T4 => &["P0", "Q0", "Q2", "P2"],
        _ => &[],
    }
}

/// A built-in move by name: `R1a`, `R1b`, `V1`, `T1`, `R2`, `V2`, `R3`, `V3`,
/// `M`, `M'`, `F1`, `T2`, `T3`, `T4`. `sign` is ignored for moves without
/// classical crossings and for the kinks, whose sign is fixed.
pub fn builtin_move(name: &str, sign: Sign) -> Option<MoveTangles> {
    const KINK: &[&str] = &["IN", "OUT"];
    const PAIR: &[&str] = &["A0", "B0", "B2", "A2"];
    let insertion = |kind: MoveKind, name: &'static str, sign: Option<Sign>| {
        let rule = kind.rules().remove(0);
        MoveTangles::build(name, sign.or(rule.sign), &rule.rhs, &rule.lhs, KINK)
    };
    let slide = |kind: MoveKind, which: usize, name: &'static str, sign: Option<Sign>| {
        let (l, r) = slide_sides(kind).remove(which);
        MoveTangles::build(name, sign, &l, &r, slide_order(kind))
    };
    Some(match name {
        "R1a" => insertion(MoveKind::R1aIns, "R1a", None),
        "R1b" => insertion(MoveKind::R1bIns, "R1b", None),
        "V1" => insertion(MoveKind::V1Ins, "V1", None),
        "T1" => insertion(MoveKind::T1Ins, "T1", None),
        "R2" | "V2" => {
            let kind = if name == "R2" {
                MoveKind::R2Del
            } else {
                MoveKind::V2Del
            };
            let rule = kind.rules().remove(0);
            let (n, s) = if name == "R2" {
                ("R2", Some(sign))
            } else {
                ("V2", None)
            };
            MoveTangles::build(n, s, &rule.lhs, &rule.rhs, PAIR)
        }
        "R3" => slide(MoveKind::R3, 0, "R3", Some(sign)),
        "V3" => slide(MoveKind::V3, 0, "V3", None),
        "M" => slide(MoveKind::M, 0, "M", Some(sign)),
        "M'" => slide(MoveKind::M, 1, "M'", Some(sign)),
        "F1" => slide(MoveKind::F1, 0, "F1", Some(sign)),
        "T2" => slide(MoveKind::T2, 0, "T2", None),
        "T3" => slide(MoveKind::T3, 0, "T3", Some(sign)),
        "T4" => slide(MoveKind::T4, 0, "T4", Some(sign)),
        _ => return None,
    })
}

/// Every built-in move, with both crossing signs where that matters.
pub fn builtin_moves() -> Vec<MoveTangles> {
    let mut out = Vec::new();
    for name in [
        "R1a", "R1b", "V1", "T1", "R2", "V2", "R3", "V3", "M", "M'", "F1", "T2", "T3", "T4",
    ] {
        let pos = builtin_move(name, Sign::Pos).expect("known move");
        let signed = pos.sign.is_some() && !matches!(name, "R1a" | "R1b");
        out.push(pos);
        if signed {
            out.push(builtin_move(name, Sign::Neg).expect("known move"));
        }
    }
    out
}

/// Coefficient of the straight strand in the expansion of a kink.
pub fn kink_coefficient(sign: Sign, cs: &CoefficientSystem) -> Result<Fraction, VerifyError> {
    let name = if sign == Sign::Pos { "R1a" } else { "R1b" };
    let m = builtin_move(name, sign).expect("known move");
    let tb = tangle_bracket(&m.lhs, cs)?;
    let basis = tb.basis_coefficients(&m.order_refs(), cs);
    let strand = Pairing::new([("1".to_string(), "2".to_string())]);
    Ok(basis
        .get(&strand)
        .cloned()
        .unwrap_or_else(|| Fraction::zero(cs.vars())))
}

/// `(delta + omega^2) r a + (omega^2 - delta) b` for `nu = nu_sign`.
pub fn t4_identity(nu_sign: i8) -> Polynomial {
    let v = VariableSet::SOLVED_FIXED_NU;
    let p = |s| Polynomial::sym(v, s);
    let nu = Polynomial::constant(v, nu_sign);
    let omega = &(&p(Symbol::A) * &p(Symbol::R)) - &(&nu * &p(Symbol::B));
    let w2 = &omega * &omega;
    let delta = Polynomial::delta(v);
    &(&(&(&delta + &w2) * &p(Symbol::R)) * &p(Symbol::A)) + &(&(&w2 - &delta) * &p(Symbol::B))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoveReport {
    pub name: &'static str,
    pub sign: Option<Sign>,
    pub constraints: ConstraintSet,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KinkReport {
    pub positive: Fraction,
    pub negative: Fraction,
    /// Whether the coefficients equal `omega` and its inverse (solved
    /// families only).
    pub matches_omega: Option<bool>,
    /// Whether their product is 1.
    pub reciprocal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub family: String,
    pub kinks: KinkReport,
    pub moves: Vec<MoveReport>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.moves.iter().all(|m| m.pass) && self.kinks.matches_omega != Some(false)
    }

    pub fn get(&self, name: &str, sign: Option<Sign>) -> Option<&MoveReport> {
        self.moves
            .iter()
            .find(|m| m.name == name && (sign.is_none() || m.sign == sign))
    }
}

fn family_name(cs: &CoefficientSystem) -> String {
    use crate::skein::{Mode, NuChoice};
    match cs.mode {
        Mode::Generic => "generic".into(),
        Mode::Extended => "extended (nu = 1)".into(),
        Mode::Welded(NuChoice::Plus) => "welded (nu = 1)".into(),
        Mode::Welded(NuChoice::Minus) => "welded (nu = -1)".into(),
        Mode::Welded(NuChoice::Symbolic) => "welded (nu symbolic)".into(),
    }
}

/// Closes every built-in move with the family's coefficients.
///
/// For a solved family each move is checked at the level of the normalized
/// invariant. In generic mode no normalization exists, so moves that change
/// the writhe are skipped and F1 and R3 are closed with positive crossings
/// only. R2 is reported through its basis coefficients.
pub fn verify_solution(cs: &CoefficientSystem) -> Result<VerifyReport, VerifyError> {
    let positive = kink_coefficient(Sign::Pos, cs)?;
    let negative = kink_coefficient(Sign::Neg, cs)?;
    let reciprocal = (&positive * &negative).is_one();
    let matches_omega = if cs.is_solved() {
        Some(positive == cs.omega()? && negative == cs.omega_inverse()?)
    } else {
        None
    };
    let mut moves = Vec::new();
    for m in builtin_moves() {
        let constraints = if cs.is_solved() {
            move_constraints_scaled(&m.lhs, &m.rhs, &m.normalization(cs)?, cs)?
        } else {
            if m.changes_writhe() {
                continue;
            }
            let has_neg = m
                .lhs
                .diagram
                .vertices
                .iter()
                .chain(&m.rhs.diagram.vertices)
                .any(|v| matches!(v, Vertex::Classical { sign: Sign::Neg, .. }));
            if has_neg && matches!(m.name, "F1" | "R3") {
                continue;
            }
            if m.name == "R2" {
                basis_system(&m.lhs, &m.rhs, &m.order_refs(), cs)?
            } else {
                move_constraints_scaled(&m.lhs, &m.rhs, &m.normalization(cs)?, cs)?
            }
        };
        moves.push(MoveReport {
            name: m.name,
            sign: m.sign,
            pass: constraints.is_empty(),
            constraints,
        });
    }
    Ok(VerifyReport {
        family: family_name(cs),
        kinks: KinkReport {
            positive,
            negative,
            matches_omega,
            reciprocal,
        },
        moves,
    })
}

/// Substitutions naming the branches of solutions to the F1 equations.
pub fn f1_branches() -> Vec<(&'static str, BTreeMap<Symbol, Polynomial>)> {
    let v = VariableSet::GENERIC;
    let b = Polynomial::sym(v, Symbol::B);
    vec![
        (
            "c = b, t = -2",
            BTreeMap::from([
                (Symbol::C, b.clone()),
                (Symbol::T, Polynomial::constant(v, -2)),
            ]),
        ),
        (
            "c = -b, t = 2",
            BTreeMap::from([
                (Symbol::C, -&b),
                (Symbol::T, Polynomial::constant(v, 2)),
            ]),
        ),
        ("t = 1", BTreeMap::from([(Symbol::T, Polynomial::one(v))])),
    ]
}
