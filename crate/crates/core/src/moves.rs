//! Local rewrites of diagrams and a seeded scrambler.
//!
//! Every move is a [`Rule`]: a left pattern and a right pattern over named
//! edges. Names starting with an uppercase letter are boundary edges, shared
//! by both sides; lowercase names are internal to one side. A side may also
//! contain bare strands (`passes`), an input name glued straight to an
//! output name.
//!
//! A rule whose left side has no vertices is an insertion and is anchored on
//! strands (edges or free loops). Any other rule is anchored on a match of
//! its left side in the diagram.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::Fraction;
use crate::diagram::{Diagram, EdgeId, Incidence, Sign, Vertex};
use crate::skein::{y_invariant_with, CoefficientSystem, EvalOptions, SkeinError};

/// A move together with the direction it is applied in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    R1aIns,
    R1aDel,
    R1bIns,
    R1bDel,
    R2Ins,
    R2Del,
    R3,
    V1Ins,
    V1Del,
    V2Ins,
    V2Del,
    V3,
    M,
    F1,
    T1Ins,
    T1Del,
    T2,
    T3,
    T4,
    /// Flips the sign of one classical crossing. Not an equivalence; only
    /// used as a negative control.
    CrossingChange,
}

impl MoveKind {
    /// All equivalence moves.
    pub const EQUIVALENCES: [MoveKind; 19] = [
        MoveKind::R1aIns,
        MoveKind::R1aDel,
        MoveKind::R1bIns,
        MoveKind::R1bDel,
        MoveKind::R2Ins,
        MoveKind::R2Del,
        MoveKind::R3,
        MoveKind::V1Ins,
        MoveKind::V1Del,
        MoveKind::V2Ins,
        MoveKind::V2Del,
        MoveKind::V3,
        MoveKind::M,
        MoveKind::F1,
        MoveKind::T1Ins,
        MoveKind::T1Del,
        MoveKind::T2,
        MoveKind::T3,
        MoveKind::T4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::R1aIns => "r1a+",
            MoveKind::R1aDel => "r1a-",
            MoveKind::R1bIns => "r1b+",
            MoveKind::R1bDel => "r1b-",
            MoveKind::R2Ins => "r2+",
            MoveKind::R2Del => "r2-",
            MoveKind::R3 => "r3",
            MoveKind::V1Ins => "v1+",
            MoveKind::V1Del => "v1-",
            MoveKind::V2Ins => "v2+",
            MoveKind::V2Del => "v2-",
            MoveKind::V3 => "v3",
            MoveKind::M => "m",
            MoveKind::F1 => "f1",
            MoveKind::T1Ins => "t1+",
            MoveKind::T1Del => "t1-",
            MoveKind::T2 => "t2",
            MoveKind::T3 => "t3",
            MoveKind::T4 => "t4",
            MoveKind::CrossingChange => "xchange",
        }
    }

    pub fn is_insertion(self) -> bool {
        matches!(
            self,
            MoveKind::R1aIns
                | MoveKind::R1bIns
                | MoveKind::R2Ins
                | MoveKind::V1Ins
                | MoveKind::V2Ins
                | MoveKind::T1Ins
        )
    }

    pub fn is_removal(self) -> bool {
        matches!(
            self,
            MoveKind::R1aDel
                | MoveKind::R1bDel
                | MoveKind::R2Del
                | MoveKind::V1Del
                | MoveKind::V2Del
                | MoveKind::T1Del
        )
    }

    /// Whether the move involves wens.
    pub fn uses_wens(self) -> bool {
        matches!(
            self,
            MoveKind::T1Ins | MoveKind::T1Del | MoveKind::T2 | MoveKind::T3 | MoveKind::T4
        )
    }

    pub fn rules(self) -> Vec<Rule> {
        rules_for(self)
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("unknown move `{0}`")]
    UnknownMove(String),
    #[error("site no longer matches the diagram")]
    StaleSite,
}

impl FromStr for MoveKind {
    type Err = MoveError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MoveKind::EQUIVALENCES
            .iter()
            .chain(std::iter::once(&MoveKind::CrossingChange))
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| MoveError::UnknownMove(s.to_string()))
    }
}

/// Sign of a pattern crossing relative to the rule's sign variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TSign {
    S,
    NegS,
}

impl TSign {
    fn resolve(self, s: Sign) -> Sign {
        match self {
            TSign::S => s,
            TSign::NegS => s.flip(),
        }
    }
}

/// A pattern vertex over edge names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TVertex {
    X(TSign, [&'static str; 4]),
    V([&'static str; 4]),
    W([&'static str; 2]),
}

impl TVertex {
    pub fn names(&self) -> Vec<&'static str> {
        match self {
            TVertex::X(_, n) | TVertex::V(n) => n.to_vec(),
            TVertex::W(n) => n.to_vec(),
        }
    }

    /// Instantiates the vertex with concrete edges.
    pub fn build(&self, sign: Sign, edge: &mut impl FnMut(&'static str) -> EdgeId) -> Vertex {
        match self {
            TVertex::X(ts, n) => Vertex::Classical {
                sign: ts.resolve(sign),
                over_in: edge(n[0]),
                over_out: edge(n[1]),
                under_in: edge(n[2]),
                under_out: edge(n[3]),
            },
            TVertex::V(n) => Vertex::Virtual {
                a_in: edge(n[0]),
                a_out: edge(n[1]),
                b_in: edge(n[2]),
                b_out: edge(n[3]),
            },
            TVertex::W(n) => Vertex::Wen {
                w_in: edge(n[0]),
                w_out: edge(n[1]),
            },
        }
    }
}

/// One side of a rule.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Side {
    pub vertices: Vec<TVertex>,
    /// Bare strands `(input name, output name)`.
    pub passes: Vec<(&'static str, &'static str)>,
}

impl Side {
    fn of(vertices: Vec<TVertex>) -> Side {
        Side {
            vertices,
            passes: Vec::new(),
        }
    }

    fn strands(passes: &[(&'static str, &'static str)]) -> Side {
        Side {
            vertices: Vec::new(),
            passes: passes.to_vec(),
        }
    }

    /// Boundary names used as inputs and as outputs.
    pub fn boundary(&self) -> (BTreeSet<&'static str>, BTreeSet<&'static str>) {
        let mut ins = BTreeSet::new();
        let mut outs = BTreeSet::new();
        for v in &self.vertices {
            for (i, n) in v.names().into_iter().enumerate() {
                if is_boundary(n) {
                    if i % 2 == 0 {
                        ins.insert(n);
                    } else {
                        outs.insert(n);
                    }
                }
            }
        }
        for (i, o) in &self.passes {
            ins.insert(*i);
            outs.insert(*o);
        }
        (ins, outs)
    }
}

pub fn is_boundary(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase())
}

/// `lhs` is replaced by `rhs`. `sign` fixes the sign variable; otherwise it
/// is read off the match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Side,
    pub rhs: Side,
    pub sign: Option<Sign>,
}

impl Rule {
    fn reversed(&self) -> Rule {
        Rule {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            sign: self.sign,
        }
    }

    pub fn is_insertion(&self) -> bool {
        self.lhs.vertices.is_empty()
    }
}

use TSign::{NegS, S};
use TVertex::{V, W, X};

fn kink_plain() -> Side {
    Side::strands(&[("IN", "OUT")])
}

fn r2_sides(virtual_pair: bool) -> (Side, Side) {
    let pair = if virtual_pair {
        vec![V(["A0", "a1", "B0", "b1"]), V(["a1", "A2", "b1", "B2"])]
    } else {
        vec![X(S, ["A0", "a1", "B0", "b1"]), X(NegS, ["a1", "A2", "b1", "B2"])]
    };
    (
        Side::strands(&[("A0", "A2"), ("B0", "B2")]),
        Side::of(pair),
    )
}

/// Left and right sides of the slide moves, in the forward direction.
pub fn slide_sides(kind: MoveKind) -> Vec<(Side, Side)> {
    match kind {
        MoveKind::R3 => vec![(
            Side::of(vec![
                X(S, ["T0", "t1", "M0", "m1"]),
                X(S, ["t1", "T2", "B0", "b1"]),
                X(S, ["m1", "M2", "b1", "B2"]),
            ]),
            Side::of(vec![
                X(S, ["M0", "m1", "B0", "b1"]),
                X(S, ["T0", "t1", "b1", "B2"]),
                X(S, ["t1", "T2", "m1", "M2"]),
            ]),
        )],
        MoveKind::V3 => vec![(
            Side::of(vec![
                V(["T0", "t1", "M0", "m1"]),
                V(["t1", "T2", "B0", "b1"]),
                V(["m1", "M2", "b1", "B2"]),
            ]),
            Side::of(vec![
                V(["M0", "m1", "B0", "b1"]),
                V(["T0", "t1", "b1", "B2"]),
                V(["t1", "T2", "m1", "M2"]),
            ]),
        )],
        MoveKind::M => vec![
            (
                Side::of(vec![
                    X(S, ["X0", "x1", "Y0", "y1"]),
                    V(["x1", "X2", "Z0", "z1"]),
                    V(["y1", "Y2", "z1", "Z2"]),
                ]),
                Side::of(vec![
                    V(["Y0", "y1", "Z0", "z1"]),
                    V(["X0", "x1", "z1", "Z2"]),
                    X(S, ["x1", "X2", "y1", "Y2"]),
                ]),
            ),
            (
                Side::of(vec![
                    X(S, ["X0", "x1", "Y0", "y1"]),
                    V(["y1", "Y2", "Z0", "z1"]),
                    V(["x1", "X2", "z1", "Z2"]),
                ]),
                Side::of(vec![
                    V(["X0", "x1", "Z0", "z1"]),
                    V(["Y0", "y1", "z1", "Z2"]),
                    X(S, ["x1", "X2", "y1", "Y2"]),
                ]),
            ),
        ],
        MoveKind::F1 => vec![(
            Side::of(vec![
                V(["P0", "p1", "Q0", "q1"]),
                X(S, ["O0", "o1", "q1", "Q2"]),
                X(S, ["o1", "O2", "p1", "P2"]),
            ]),
            Side::of(vec![
                X(S, ["O0", "o1", "P0", "p1"]),
                X(S, ["o1", "O2", "Q0", "q1"]),
                V(["p1", "P2", "q1", "Q2"]),
            ]),
        )],
        MoveKind::T2 => vec![(
            Side::of(vec![W(["A0", "a1"]), V(["a1", "A2", "B0", "B2"])]),
            Side::of(vec![V(["A0", "a1", "B0", "B2"]), W(["a1", "A2"])]),
        )],
        MoveKind::T3 => vec![(
            Side::of(vec![W(["U0", "u1"]), X(S, ["O0", "O2", "u1", "U2"])]),
            Side::of(vec![X(S, ["O0", "O2", "U0", "u1"]), W(["u1", "U2"])]),
        )],
        MoveKind::T4 => vec![(
            Side::of(vec![
                W(["P0", "p1"]),
                W(["Q0", "q1"]),
                X(S, ["p1", "P2", "q1", "Q2"]),
            ]),
            Side::of(vec![
                X(NegS, ["Q0", "q2", "P0", "p2"]),
                W(["p2", "P2"]),
                W(["q2", "Q2"]),
            ]),
        )],
        _ => Vec::new(),
    }
}

fn rules_for(kind: MoveKind) -> Vec<Rule> {
    let ins = |rhs: Vec<TVertex>, sign: Option<Sign>| Rule {
        lhs: kink_plain(),
        rhs: Side::of(rhs),
        sign,
    };
    let both_signs = |lhs: &Side, rhs: &Side| {
        [Sign::Pos, Sign::Neg]
            .into_iter()
            .map(|s| Rule {
                lhs: lhs.clone(),
                rhs: rhs.clone(),
                sign: Some(s),
            })
            .collect::<Vec<_>>()
    };
    match kind {
        MoveKind::R1aIns => vec![ins(vec![X(S, ["IN", "k", "k", "OUT"])], Some(Sign::Pos))],
        MoveKind::R1bIns => vec![ins(vec![X(S, ["IN", "k", "k", "OUT"])], Some(Sign::Neg))],
        MoveKind::R1aDel | MoveKind::R1bDel => {
            let sign = if kind == MoveKind::R1aDel {
                Sign::Pos
            } else {
                Sign::Neg
            };
            [
                X(S, ["IN", "k", "k", "OUT"]),
                X(S, ["k", "OUT", "IN", "k"]),
            ]
            .into_iter()
            .map(|v| Rule {
                lhs: Side::of(vec![v]),
                rhs: kink_plain(),
                sign: Some(sign),
            })
            .collect()
        }
        MoveKind::V1Ins => vec![ins(vec![V(["IN", "k", "k", "OUT"])], None)],
        MoveKind::V1Del => vec![ins(vec![V(["IN", "k", "k", "OUT"])], None).reversed()],
        MoveKind::T1Ins => vec![ins(vec![W(["IN", "k"]), W(["k", "OUT"])], None)],
        MoveKind::T1Del => vec![ins(vec![W(["IN", "k"]), W(["k", "OUT"])], None).reversed()],
        MoveKind::R2Ins => {
            let (l, r) = r2_sides(false);
            both_signs(&l, &r)
        }
        MoveKind::V2Ins => {
            let (l, r) = r2_sides(true);
            vec![Rule {
                lhs: l,
                rhs: r,
                sign: None,
            }]
        }
        MoveKind::R2Del | MoveKind::V2Del => {
            let (l, r) = r2_sides(kind == MoveKind::V2Del);
            vec![Rule {
                lhs: r,
                rhs: l,
                sign: None,
            }]
        }
        MoveKind::CrossingChange => vec![Rule {
            lhs: Side::of(vec![X(S, ["A0", "A2", "B0", "B2"])]),
            rhs: Side::of(vec![X(NegS, ["A0", "A2", "B0", "B2"])]),
            sign: None,
        }],
        _ => slide_sides(kind)
            .into_iter()
            .flat_map(|(l, r)| {
                let fwd = Rule {
                    lhs: l,
                    rhs: r,
                    sign: None,
                };
                let back = fwd.reversed();
                [fwd, back]
            })
            .collect(),
    }
}

/// Where an insertion strand goes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrandSite {
    Edge(EdgeId),
    FreeLoop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Anchor {
    Strands(Vec<StrandSite>),
    Match {
        vertices: Vec<usize>,
        edges: BTreeMap<&'static str, EdgeId>,
        sign: Sign,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveSite {
    pub kind: MoveKind,
    pub rule: usize,
    pub anchor: Anchor,
}

impl fmt::Display for MoveSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        match &self.anchor {
            Anchor::Strands(s) => {
                let parts: Vec<String> = s
                    .iter()
                    .map(|x| match x {
                        StrandSite::Edge(e) => format!("edge {e}"),
                        StrandSite::FreeLoop => "loop".into(),
                    })
                    .collect();
                write!(f, " on {}", parts.join(", "))?;
                if let Some(sign) = rules_for(self.kind)[self.rule].sign {
                    write!(f, " sign {}", if sign == Sign::Pos { "+" } else { "-" })?;
                }
                Ok(())
            }
            Anchor::Match { vertices, .. } => {
                let v: Vec<String> = vertices.iter().map(|i| i.to_string()).collect();
                write!(f, " at vertices {} (rule {})", v.join(","), self.rule)
            }
        }
    }
}

fn vertex_fits(
    t: &TVertex,
    v: &Vertex,
    edges: &mut BTreeMap<&'static str, EdgeId>,
    sign: &mut Option<Sign>,
) -> bool {
    let slots: Vec<&EdgeId> = match (t, v) {
        (TVertex::X(ts, _), Vertex::Classical { sign: vs, .. }) => {
            let s = match ts {
                TSign::S => *vs,
                TSign::NegS => vs.flip(),
            };
            match sign {
                Some(x) if *x != s => return false,
                _ => *sign = Some(s),
            }
            v.slots()
        }
        (TVertex::V(_), Vertex::Virtual { .. }) | (TVertex::W(_), Vertex::Wen { .. }) => v.slots(),
        _ => return false,
    };
    for (n, e) in t.names().into_iter().zip(slots) {
        match edges.get(n) {
            Some(b) if b != e => return false,
            Some(_) => {}
            None => {
                edges.insert(n, e.clone());
            }
        }
    }
    true
}

/// Both readings of a virtual crossing (strands are unordered).
fn orientations(v: &Vertex) -> Vec<Vertex> {
    match v {
        Vertex::Virtual {
            a_in,
            a_out,
            b_in,
            b_out,
        } => vec![
            v.clone(),
            Vertex::Virtual {
                a_in: b_in.clone(),
                a_out: b_out.clone(),
                b_in: a_in.clone(),
                b_out: a_out.clone(),
            },
        ],
        _ => vec![v.clone()],
    }
}

struct MatchState {
    vertices: Vec<usize>,
    edges: BTreeMap<&'static str, EdgeId>,
    sign: Option<Sign>,
}

/// Matched vertex indices, pattern edge bindings and crossing sign.
type RawMatch = (Vec<usize>, BTreeMap<&'static str, EdgeId>, Option<Sign>);

fn extend_matches(
    d: &Diagram,
    inc: &Incidence,
    pattern: &[TVertex],
    j: usize,
    st: &mut MatchState,
    out: &mut Vec<RawMatch>,
) {
    if j == pattern.len() {
        out.push((st.vertices.clone(), st.edges.clone(), st.sign));
        return;
    }
    let t = &pattern[j];
    // a vertex sharing an already bound internal edge pins the candidate
    let mut candidates: Vec<usize> = Vec::new();
    let mut pinned = false;
    for (i, n) in t.names().into_iter().enumerate() {
        if is_boundary(n) {
            continue;
        }
        if let Some(e) = st.edges.get(n) {
            let map = if i % 2 == 0 { &inc.target } else { &inc.source };
            if let Some((vi, _)) = map.get(e) {
                candidates.push(*vi);
            }
            pinned = true;
            break;
        }
    }
    if !pinned {
        candidates = (0..d.vertices.len()).collect();
    }
    for vi in candidates {
        if st.vertices.contains(&vi) {
            continue;
        }
        for v in orientations(&d.vertices[vi]) {
            let mut edges = st.edges.clone();
            let mut sign = st.sign;
            if vertex_fits(t, &v, &mut edges, &mut sign) {
                let saved = (std::mem::replace(&mut st.edges, edges), st.sign);
                st.sign = sign;
                st.vertices.push(vi);
                extend_matches(d, inc, pattern, j + 1, st, out);
                st.vertices.pop();
                st.edges = saved.0;
                st.sign = saved.1;
            }
        }
    }
}

/// Matches of a pattern: matched vertex indices, the edge binding, and the
/// sign variable.
pub fn find_matches(
    d: &Diagram,
    pattern: &[TVertex],
    sign: Option<Sign>,
) -> Vec<(Vec<usize>, BTreeMap<&'static str, EdgeId>, Sign)> {
    let inc = d.incidence();
    let mut st = MatchState {
        vertices: Vec::new(),
        edges: BTreeMap::new(),
        sign,
    };
    let mut raw = Vec::new();
    extend_matches(d, &inc, pattern, 0, &mut st, &mut raw);
    let mut seen = HashSet::new();
    raw.into_iter()
        .filter(|(v, e, _)| seen.insert((v.clone(), e.clone())))
        .map(|(v, e, s)| (v, e, s.unwrap_or(Sign::Pos)))
        .collect()
}

fn strand_sites(d: &Diagram, n: usize) -> Vec<Vec<StrandSite>> {
    let mut singles: Vec<StrandSite> = d.edges().into_iter().map(StrandSite::Edge).collect();
    if d.free_loops > 0 {
        singles.push(StrandSite::FreeLoop);
    }
    match n {
        1 => singles.into_iter().map(|s| vec![s]).collect(),
        2 => {
            let mut out = Vec::new();
            for x in &singles {
                for y in &singles {
                    let ok = match (x, y) {
                        (StrandSite::FreeLoop, StrandSite::FreeLoop) => d.free_loops >= 2,
                        _ => x != y,
                    };
                    if ok {
                        out.push(vec![x.clone(), y.clone()]);
                    }
                }
            }
            out
        }
        _ => unreachable!("rules have at most two strands"),
    }
}

/// Every place a move applies. Rewrites that would leave a strand feeding
/// back into itself are left out.
pub fn enumerate_sites(d: &Diagram, kind: MoveKind) -> Vec<MoveSite> {
    let mut out = Vec::new();
    let mut results: Vec<Diagram> = Vec::new();
    for (ri, rule) in rules_for(kind).iter().enumerate() {
        if rule.is_insertion() {
            for strands in strand_sites(d, rule.lhs.passes.len()) {
                out.push(MoveSite {
                    kind,
                    rule: ri,
                    anchor: Anchor::Strands(strands),
                });
            }
            continue;
        }
        for (vertices, edges, sign) in find_matches(d, &rule.lhs.vertices, rule.sign) {
            let site = MoveSite {
                kind,
                rule: ri,
                anchor: Anchor::Match {
                    vertices,
                    edges,
                    sign,
                },
            };
            if let Ok(r) = apply_move(d, &site) {
                // symmetric patterns can match one place twice
                if r.violations().is_empty() && !results.contains(&r) {
                    results.push(r);
                    out.push(site);
                }
            }
        }
    }
    out
}

/// Hands out edge names not used in a diagram.
struct FreshEdges {
    next: u64,
    taken: HashSet<EdgeId>,
}

impl FreshEdges {
    fn new(d: &Diagram) -> FreshEdges {
        let taken: HashSet<EdgeId> = d.edges().into_iter().collect();
        let next = taken
            .iter()
            .filter_map(|e| e.0.parse::<u64>().ok())
            .max()
            .map_or(1, |m| m + 1);
        FreshEdges { next, taken }
    }

    fn take(&mut self) -> EdgeId {
        loop {
            let e = EdgeId(self.next.to_string());
            self.next += 1;
            if self.taken.insert(e.clone()) {
                return e;
            }
        }
    }
}

/// Applies a move, returning a new diagram.
pub fn apply_move(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    let rules = rules_for(site.kind);
    let rule = rules.get(site.rule).ok_or(MoveError::StaleSite)?;
    let mut fresh = FreshEdges::new(d);
    let mut out = d.clone();
    let mut binding: BTreeMap<&'static str, EdgeId> = BTreeMap::new();
    let sign;
    match &site.anchor {
        Anchor::Strands(strands) => {
            if !rule.is_insertion() || strands.len() != rule.lhs.passes.len() {
                return Err(MoveError::StaleSite);
            }
            sign = rule.sign.unwrap_or(Sign::Pos);
            let edges = d.edges();
            let loops_needed = strands.iter().filter(|s| **s == StrandSite::FreeLoop).count();
            if loops_needed > d.free_loops as usize {
                return Err(MoveError::StaleSite);
            }
            for ((i, o), s) in rule.lhs.passes.iter().zip(strands) {
                match s {
                    StrandSite::Edge(e) => {
                        if !edges.contains(e) {
                            return Err(MoveError::StaleSite);
                        }
                        // split e: the source side keeps its name
                        let f = fresh.take();
                        let inc = out.incidence();
                        let (vi, si) = inc.target[e];
                        out.vertices[vi] = replace_slot(&out.vertices[vi], si, &f);
                        binding.insert(i, e.clone());
                        binding.insert(o, f);
                    }
                    StrandSite::FreeLoop => {
                        out.free_loops -= 1;
                        let g = fresh.take();
                        binding.insert(i, g.clone());
                        binding.insert(o, g);
                    }
                }
            }
        }
        Anchor::Match {
            vertices,
            edges,
            sign: s,
        } => {
            if rule.is_insertion() || vertices.len() != rule.lhs.vertices.len() {
                return Err(MoveError::StaleSite);
            }
            let mut check_edges = edges.clone();
            let mut check_sign = Some(*s);
            for (t, vi) in rule.lhs.vertices.iter().zip(vertices) {
                let v = d.vertices.get(*vi).ok_or(MoveError::StaleSite)?;
                let fits = orientations(v).iter().any(|o| {
                    let mut e = check_edges.clone();
                    let mut sg = check_sign;
                    let ok = vertex_fits(t, o, &mut e, &mut sg);
                    if ok && e == check_edges {
                        check_sign = sg;
                    }
                    ok && e == check_edges
                });
                if !fits {
                    return Err(MoveError::StaleSite);
                }
            }
            if let Some(fixed) = rule.sign {
                if fixed != *s {
                    return Err(MoveError::StaleSite);
                }
            }
            check_edges.retain(|k, _| is_boundary(k));
            binding = check_edges;
            sign = *s;
            let mut idx = vertices.clone();
            idx.sort_unstable();
            for vi in idx.into_iter().rev() {
                out.vertices.remove(vi);
            }
        }
    }
    // right side: boundary names keep their edges, internal names are fresh
    let mut internal: HashMap<&'static str, EdgeId> = HashMap::new();
    for t in &rule.rhs.vertices {
        let v = t.build(sign, &mut |n| {
            if is_boundary(n) {
                binding[n].clone()
            } else {
                internal.entry(n).or_insert_with(|| fresh.take()).clone()
            }
        });
        out.vertices.push(v);
    }
    merge_passes(&mut out, &rule.rhs.passes, &binding);
    Ok(out)
}

fn replace_slot(v: &Vertex, slot: usize, e: &EdgeId) -> Vertex {
    let mut i = 0;
    v.map_edges(&mut |old| {
        let r = if i == slot { e.clone() } else { old.clone() };
        i += 1;
        r
    })
}

/// Glues each bare strand's output edge onto its input edge. Strands that
/// close up on themselves become free loops.
fn merge_passes(
    d: &mut Diagram,
    passes: &[(&'static str, &'static str)],
    binding: &BTreeMap<&'static str, EdgeId>,
) {
    if passes.is_empty() {
        return;
    }
    let mut rename: HashMap<EdgeId, EdgeId> = HashMap::new();
    for (i, o) in passes {
        let (ei, eo) = (&binding[i], &binding[o]);
        if ei != eo {
            rename.insert(eo.clone(), ei.clone());
        }
    }
    let resolve = |e: &EdgeId| -> EdgeId {
        let mut cur = e.clone();
        let mut seen = HashSet::new();
        while let Some(n) = rename.get(&cur) {
            if !seen.insert(cur.clone()) {
                // a cycle of bare strands: pick a stable representative
                return seen.into_iter().min().unwrap();
            }
            cur = n.clone();
        }
        cur
    };
    *d = d.map_edges(|e| resolve(e));
    let used = d.edges();
    let roots: BTreeSet<EdgeId> = passes.iter().map(|(i, _)| resolve(&binding[i])).collect();
    for r in roots {
        if !used.contains(&r) {
            d.free_loops += 1;
        }
    }
}

/// One applied move, for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveRecord {
    pub kind: MoveKind,
    pub site: String,
}

impl fmt::Display for MoveRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.site)
    }
}

/// Applies `n_moves` random moves from `kinds`. Below `size_cap` vertices
/// insertions are chosen 60% of the time; above it removals 80% of the time.
pub fn scramble_with<R: Rng + ?Sized>(
    d: &Diagram,
    rng: &mut R,
    n_moves: usize,
    size_cap: usize,
    kinds: &[MoveKind],
) -> (Diagram, Vec<MoveRecord>) {
    let mut cur = d.clone();
    let mut log = Vec::new();
    for _ in 0..n_moves {
        let mut by_kind: Vec<(MoveKind, Vec<MoveSite>)> = kinds
            .iter()
            .map(|k| (*k, enumerate_sites(&cur, *k)))
            .filter(|(_, s)| !s.is_empty())
            .collect();
        if by_kind.is_empty() {
            break;
        }
        let big = cur.vertices.len() >= size_cap;
        let roll: f64 = rng.random();
        let want = |k: MoveKind| -> bool {
            if big {
                if roll < 0.8 {
                    k.is_removal()
                } else {
                    !k.is_removal() && !k.is_insertion()
                }
            } else if roll < 0.6 {
                k.is_insertion()
            } else {
                !k.is_insertion()
            }
        };
        let preferred: Vec<usize> = (0..by_kind.len()).filter(|&i| want(by_kind[i].0)).collect();
        let pool: Vec<usize> = if !preferred.is_empty() {
            preferred
        } else if big {
            // stay bounded: fall back to anything that does not grow the diagram
            let shrink: Vec<usize> = (0..by_kind.len())
                .filter(|&i| !by_kind[i].0.is_insertion())
                .collect();
            if shrink.is_empty() {
                (0..by_kind.len()).collect()
            } else {
                shrink
            }
        } else {
            (0..by_kind.len()).collect()
        };
        let ki = pool[rng.random_range(0..pool.len())];
        let (kind, sites) = &mut by_kind[ki];
        let site = sites.swap_remove(rng.random_range(0..sites.len()));
        let next = apply_move(&cur, &site).expect("enumerated sites apply");
        log.push(MoveRecord {
            kind: *kind,
            site: site.to_string(),
        });
        cur = next;
    }
    (cur, log)
}

/// Seeded scramble over all equivalence moves.
pub fn scramble(d: &Diagram, seed: u64, n_moves: usize, size_cap: usize) -> Diagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    scramble_with(d, &mut rng, n_moves, size_cap, &MoveKind::EQUIVALENCES).0
}

/// Settings for [`check_invariance`].
#[derive(Clone, Debug)]
pub struct InvarianceConfig {
    pub seed: u64,
    pub trials: usize,
    /// Moves per trial.
    pub moves: usize,
    pub size_cap: usize,
    pub kinds: Vec<MoveKind>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InvarianceOutcome {
    Pass {
        trials: usize,
    },
    Fail {
        trial: usize,
        expected: Fraction,
        found: Fraction,
        /// Moves of the failing trial up to and including the first one
        /// that changed the value.
        moves: Vec<MoveRecord>,
        diagram: Diagram,
    },
}

impl InvarianceOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, InvarianceOutcome::Pass { .. })
    }
}

/// Scrambles `d` in `trials` independent seeded runs and compares the
/// invariant after each run with the original.
pub fn check_invariance(
    d: &Diagram,
    cs: &CoefficientSystem,
    opts: &EvalOptions,
    cfg: &InvarianceConfig,
) -> Result<InvarianceOutcome, SkeinError> {
    let expected = y_invariant_with(d, cs, opts)?;
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.trials).map(|_| master.random()).collect();
    let inner = EvalOptions {
        threads: 1,
        ..*opts
    };
    let results: Vec<Result<bool, SkeinError>> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (out, _) = scramble_with(d, &mut rng, cfg.moves, cfg.size_cap, &cfg.kinds);
            Ok(y_invariant_with(&out, cs, &inner)? == expected)
        })
        .collect();
    for (trial, r) in results.into_iter().enumerate() {
        if r? {
            continue;
        }
        // replay one move at a time to find the first change
        let mut rng = ChaCha8Rng::seed_from_u64(seeds[trial]);
        let mut cur = d.clone();
        let mut log = Vec::new();
        for _ in 0..cfg.moves {
            let (next, step) = scramble_with(&cur, &mut rng, 1, cfg.size_cap, &cfg.kinds);
            log.extend(step);
            cur = next;
            let found = y_invariant_with(&cur, cs, opts)?;
            if found != expected {
                return Ok(InvarianceOutcome::Fail {
                    trial,
                    expected,
                    found,
                    moves: log,
                    diagram: cur,
                });
            }
        }
        unreachable!("a failing trial changes the value at some move");
    }
    Ok(InvarianceOutcome::Pass { trials: cfg.trials })
}
