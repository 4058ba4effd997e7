//! Abstract diagrams: classical crossings, virtual crossings, wens and free
//! loops, glued along directed edges.
//!
//! Text format, one vertex per line, `#` starts a comment:
//!
//! ```text
//! X+ over_in over_out under_in under_out
//! X- over_in over_out under_in under_out
//! V  a_in a_out b_in b_out
//! W  in out
//! loop
//! end LABEL in|out EDGE      # tangles only
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

/// Opaque edge name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub String);

impl EdgeId {
    pub fn new(s: impl Into<String>) -> EdgeId {
        EdgeId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EdgeId {
    fn from(s: &str) -> Self {
        EdgeId(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Vertex {
    Classical {
        sign: Sign,
        over_in: EdgeId,
        over_out: EdgeId,
        under_in: EdgeId,
        under_out: EdgeId,
    },
    Virtual {
        a_in: EdgeId,
        a_out: EdgeId,
        b_in: EdgeId,
        b_out: EdgeId,
    },
    Wen {
        w_in: EdgeId,
        w_out: EdgeId,
    },
}

impl Vertex {
    pub fn classical(sign: Sign, oi: &str, oo: &str, ui: &str, uo: &str) -> Vertex {
        Vertex::Classical {
            sign,
            over_in: oi.into(),
            over_out: oo.into(),
            under_in: ui.into(),
            under_out: uo.into(),
        }
    }

    pub fn virtual_x(ai: &str, ao: &str, bi: &str, bo: &str) -> Vertex {
        Vertex::Virtual {
            a_in: ai.into(),
            a_out: ao.into(),
            b_in: bi.into(),
            b_out: bo.into(),
        }
    }

    pub fn wen(wi: &str, wo: &str) -> Vertex {
        Vertex::Wen {
            w_in: wi.into(),
            w_out: wo.into(),
        }
    }

    /// Slots in file order. Even slots are inputs, odd slots outputs.
    pub fn slots(&self) -> Vec<&EdgeId> {
        match self {
            Vertex::Classical {
                over_in,
                over_out,
                under_in,
                under_out,
                ..
            } => vec![over_in, over_out, under_in, under_out],
            Vertex::Virtual {
                a_in,
                a_out,
                b_in,
                b_out,
            } => vec![a_in, a_out, b_in, b_out],
            Vertex::Wen { w_in, w_out } => vec![w_in, w_out],
        }
    }

    /// `(in, out)` pairs of the strands passing straight through.
    pub fn strands(&self) -> Vec<(&EdgeId, &EdgeId)> {
        let s = self.slots();
        s.chunks(2).map(|c| (c[0], c[1])).collect()
    }

    pub fn map_edges(&self, f: &mut impl FnMut(&EdgeId) -> EdgeId) -> Vertex {
        match self {
            Vertex::Classical {
                sign,
                over_in,
                over_out,
                under_in,
                under_out,
            } => Vertex::Classical {
                sign: *sign,
                over_in: f(over_in),
                over_out: f(over_out),
                under_in: f(under_in),
                under_out: f(under_out),
            },
            Vertex::Virtual {
                a_in,
                a_out,
                b_in,
                b_out,
            } => Vertex::Virtual {
                a_in: f(a_in),
                a_out: f(a_out),
                b_in: f(b_in),
                b_out: f(b_out),
            },
            Vertex::Wen { w_in, w_out } => Vertex::Wen {
                w_in: f(w_in),
                w_out: f(w_out),
            },
        }
    }

    fn keyword(&self) -> &'static str {
        match self {
            Vertex::Classical { sign: Sign::Pos, .. } => "X+",
            Vertex::Classical { sign: Sign::Neg, .. } => "X-",
            Vertex::Virtual { .. } => "V",
            Vertex::Wen { .. } => "W",
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())?;
        for e in self.slots() {
            write!(f, " {e}")?;
        }
        Ok(())
    }
}

/// A rule broken by a diagram or tangle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Violation {
    DuplicateSource(EdgeId),
    DuplicateTarget(EdgeId),
    MissingSource(EdgeId),
    MissingTarget(EdgeId),
    /// A strand of vertex `vertex` leaves on the edge it arrived on.
    DegenerateStrand { vertex: usize, edge: EdgeId },
    DuplicateEndpointLabel(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateSource(e) => write!(f, "edge `{e}` leaves more than one slot"),
            Violation::DuplicateTarget(e) => write!(f, "edge `{e}` enters more than one slot"),
            Violation::MissingSource(e) => write!(f, "edge `{e}` has no source"),
            Violation::MissingTarget(e) => write!(f, "edge `{e}` has no target"),
            Violation::DegenerateStrand { vertex, edge } => {
                write!(f, "vertex {vertex} has a strand entering and leaving on `{edge}`")
            }
            Violation::DuplicateEndpointLabel(l) => write!(f, "endpoint label `{l}` used twice"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("line {line}, column {col}: {reason}")]
    Parse {
        line: usize,
        col: usize,
        reason: String,
    },
    #[error("invalid diagram: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// A closed diagram.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Diagram {
    pub vertices: Vec<Vertex>,
    pub free_loops: u32,
}

/// Virtual crossing count with its parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VirtualWrithe {
    pub count: usize,
    pub parity: u8,
}

/// Where an edge attaches: vertex index and slot index.
pub type SlotRef = (usize, usize);

/// Source and target slot of every edge.
#[derive(Clone, Debug, Default)]
pub struct Incidence {
    pub source: HashMap<EdgeId, SlotRef>,
    pub target: HashMap<EdgeId, SlotRef>,
}

impl Incidence {
    pub fn of(vertices: &[Vertex]) -> Incidence {
        let mut inc = Incidence::default();
        for (vi, v) in vertices.iter().enumerate() {
            for (si, e) in v.slots().into_iter().enumerate() {
                let map = if si % 2 == 0 {
                    &mut inc.target
                } else {
                    &mut inc.source
                };
                map.entry(e.clone()).or_insert((vi, si));
            }
        }
        inc
    }
}

fn slot_violations(vertices: &[Vertex], extra_sources: &[&EdgeId], extra_targets: &[&EdgeId]) -> Vec<Violation> {
    let mut sources: BTreeMap<&EdgeId, usize> = BTreeMap::new();
    let mut targets: BTreeMap<&EdgeId, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for (vi, v) in vertices.iter().enumerate() {
        for (i, o) in v.strands() {
            *targets.entry(i).or_default() += 1;
            *sources.entry(o).or_default() += 1;
            if i == o {
                out.push(Violation::DegenerateStrand {
                    vertex: vi,
                    edge: i.clone(),
                });
            }
        }
    }
    for e in extra_sources {
        *sources.entry(e).or_default() += 1;
    }
    for e in extra_targets {
        *targets.entry(e).or_default() += 1;
    }
    let edges: BTreeSet<&EdgeId> = sources.keys().chain(targets.keys()).copied().collect();
    for e in edges {
        match sources.get(e).copied().unwrap_or(0) {
            0 => out.push(Violation::MissingSource(e.clone())),
            1 => {}
            _ => out.push(Violation::DuplicateSource(e.clone())),
        }
        match targets.get(e).copied().unwrap_or(0) {
            0 => out.push(Violation::MissingTarget(e.clone())),
            1 => {}
            _ => out.push(Violation::DuplicateTarget(e.clone())),
        }
    }
    out.sort();
    out
}

impl Diagram {
    pub fn new(vertices: Vec<Vertex>, free_loops: u32) -> Diagram {
        Diagram {
            vertices,
            free_loops,
        }
    }

    /// `n` crossing-free circles.
    pub fn unlink(n: u32) -> Diagram {
        Diagram::new(Vec::new(), n)
    }

    /// Every violation of the slot rules; empty when valid.
    pub fn violations(&self) -> Vec<Violation> {
        slot_violations(&self.vertices, &[], &[])
    }

    pub fn validate(&self) -> Result<(), DiagramError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(DiagramError::Invalid(v))
        }
    }

    pub fn edges(&self) -> BTreeSet<EdgeId> {
        self.vertices
            .iter()
            .flat_map(|v| v.slots().into_iter().cloned())
            .collect()
    }

    pub fn incidence(&self) -> Incidence {
        Incidence::of(&self.vertices)
    }

    pub fn classical_count(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| matches!(v, Vertex::Classical { .. }))
            .count()
    }

    pub fn wen_count(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| matches!(v, Vertex::Wen { .. }))
            .count()
    }

    /// Positive minus negative classical crossings.
    pub fn writhe(&self) -> i64 {
        self.vertices
            .iter()
            .map(|v| match v {
                Vertex::Classical { sign, .. } => sign.value(),
                _ => 0,
            })
            .sum()
    }

    pub fn crossing_counts(&self) -> (usize, usize) {
        let mut pos = 0;
        let mut neg = 0;
        for v in &self.vertices {
            match v {
                Vertex::Classical { sign: Sign::Pos, .. } => pos += 1,
                Vertex::Classical { sign: Sign::Neg, .. } => neg += 1,
                _ => {}
            }
        }
        (pos, neg)
    }

    pub fn virtual_writhe(&self) -> VirtualWrithe {
        let count = self
            .vertices
            .iter()
            .filter(|v| matches!(v, Vertex::Virtual { .. }))
            .count();
        VirtualWrithe {
            count,
            parity: (count % 2) as u8,
        }
    }

    /// Link components: strands traced straight through every vertex, plus free loops.
    pub fn components(&self) -> usize {
        let mut next: HashMap<&EdgeId, &EdgeId> = HashMap::new();
        for v in &self.vertices {
            for (i, o) in v.strands() {
                next.insert(i, o);
            }
        }
        let mut seen: BTreeSet<&EdgeId> = BTreeSet::new();
        let mut count = self.free_loops as usize;
        let mut starts: Vec<&EdgeId> = next.keys().copied().collect();
        starts.sort();
        for start in starts {
            if seen.contains(start) {
                continue;
            }
            count += 1;
            let mut e = start;
            while seen.insert(e) {
                match next.get(e) {
                    Some(n) => e = n,
                    None => break,
                }
            }
        }
        count
    }

    pub fn map_edges(&self, mut f: impl FnMut(&EdgeId) -> EdgeId) -> Diagram {
        Diagram {
            vertices: self.vertices.iter().map(|v| v.map_edges(&mut f)).collect(),
            free_loops: self.free_loops,
        }
    }

    /// Renames edges to `1, 2, ...` in order of first appearance.
    pub fn renumbered(&self) -> Diagram {
        let mut names: HashMap<EdgeId, EdgeId> = HashMap::new();
        self.map_edges(|e| {
            let n = names.len() + 1;
            names
                .entry(e.clone())
                .or_insert_with(|| EdgeId(n.to_string()))
                .clone()
        })
    }

    /// Both diagrams side by side; edges of `other` are renamed apart.
    pub fn disjoint_union(&self, other: &Diagram) -> Diagram {
        let taken = self.edges();
        let mut renamed: HashMap<EdgeId, EdgeId> = HashMap::new();
        let mut used = taken.clone();
        let other = other.map_edges(|e| {
            renamed
                .entry(e.clone())
                .or_insert_with(|| {
                    let mut name = e.0.clone();
                    while used.contains(&EdgeId(name.clone())) {
                        name.push('\'');
                    }
                    used.insert(EdgeId(name.clone()));
                    EdgeId(name)
                })
                .clone()
        });
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices);
        Diagram::new(vertices, self.free_loops + other.free_loops)
    }

    /// A random closed diagram: vertex outputs are glued to vertex inputs
    /// by a uniform random permutation, resampled until no strand feeds
    /// back into itself. Signs of classical crossings are uniform.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        classical: usize,
        virtuals: usize,
        wens: usize,
    ) -> Diagram {
        let n_edges = 2 * classical + 2 * virtuals + wens;
        let signs: Vec<Sign> = (0..classical)
            .map(|_| if rng.random_bool(0.5) { Sign::Pos } else { Sign::Neg })
            .collect();
        if n_edges == 0 {
            return Diagram::default();
        }
        assert!(n_edges > 1, "a lone wen cannot be closed without a degenerate strand");
        loop {
            let mut perm: Vec<usize> = (0..n_edges).collect();
            perm.shuffle(rng);
            // output slot k carries edge k; input slot k receives edge perm[k]
            let name = |k: usize| EdgeId((k + 1).to_string());
            let mut vertices = Vec::new();
            let mut k = 0;
            for sign in &signs {
                vertices.push(Vertex::Classical {
                    sign: *sign,
                    over_in: name(perm[k]),
                    over_out: name(k),
                    under_in: name(perm[k + 1]),
                    under_out: name(k + 1),
                });
                k += 2;
            }
            for _ in 0..virtuals {
                vertices.push(Vertex::Virtual {
                    a_in: name(perm[k]),
                    a_out: name(k),
                    b_in: name(perm[k + 1]),
                    b_out: name(k + 1),
                });
                k += 2;
            }
            for _ in 0..wens {
                vertices.push(Vertex::Wen {
                    w_in: name(perm[k]),
                    w_out: name(k),
                });
                k += 1;
            }
            let d = Diagram::new(vertices, 0);
            if d.violations().is_empty() {
                return d;
            }
        }
    }

    pub fn parse(text: &str) -> Result<Diagram, DiagramError> {
        let parsed = parse_lines(text)?;
        if let Some((line, col, _)) = parsed.ends.first() {
            return Err(DiagramError::Parse {
                line: *line,
                col: *col,
                reason: "`end` lines are only allowed in tangle files".into(),
            });
        }
        check_parsed(&parsed, &[], &[])?;
        Ok(Diagram::new(
            parsed.vertices.into_iter().map(|(_, v)| v).collect(),
            parsed.loops,
        ))
    }

    /// Canonical text: vertices in order, then `loop` lines.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        for _ in 0..self.free_loops {
            out.push_str("loop\n");
        }
        out
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndDir {
    /// The edge enters the tangle here.
    In,
    /// The edge leaves the tangle here.
    Out,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub label: String,
    pub dir: EndDir,
    pub edge: EdgeId,
}

/// A diagram with open ends. `boundary` is listed in cyclic order around
/// the tangle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tangle {
    pub diagram: Diagram,
    pub boundary: Vec<Endpoint>,
}

impl Tangle {
    pub fn new(diagram: Diagram, boundary: Vec<Endpoint>) -> Tangle {
        Tangle { diagram, boundary }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let srcs: Vec<&EdgeId> = self
            .boundary
            .iter()
            .filter(|e| e.dir == EndDir::In)
            .map(|e| &e.edge)
            .collect();
        let tgts: Vec<&EdgeId> = self
            .boundary
            .iter()
            .filter(|e| e.dir == EndDir::Out)
            .map(|e| &e.edge)
            .collect();
        let mut v = slot_violations(&self.diagram.vertices, &srcs, &tgts);
        let mut labels = BTreeSet::new();
        for e in &self.boundary {
            if !labels.insert(&e.label) {
                v.push(Violation::DuplicateEndpointLabel(e.label.clone()));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<(), DiagramError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(DiagramError::Invalid(v))
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.boundary.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn parse(text: &str) -> Result<Tangle, DiagramError> {
        let parsed = parse_lines(text)?;
        let boundary: Vec<Endpoint> = parsed.ends.iter().map(|(_, _, e)| e.clone()).collect();
        let srcs: Vec<&EdgeId> = boundary
            .iter()
            .filter(|e| e.dir == EndDir::In)
            .map(|e| &e.edge)
            .collect();
        let tgts: Vec<&EdgeId> = boundary
            .iter()
            .filter(|e| e.dir == EndDir::Out)
            .map(|e| &e.edge)
            .collect();
        check_parsed(&parsed, &srcs, &tgts)?;
        let t = Tangle::new(
            Diagram::new(
                parsed.vertices.into_iter().map(|(_, v)| v).collect(),
                parsed.loops,
            ),
            boundary,
        );
        t.validate()?;
        Ok(t)
    }

    pub fn serialize(&self) -> String {
        let mut out = self.diagram.serialize();
        for e in &self.boundary {
            let dir = match e.dir {
                EndDir::In => "in",
                EndDir::Out => "out",
            };
            out.push_str(&format!("end {} {} {}\n", e.label, dir, e.edge));
        }
        out
    }
}

struct Parsed {
    /// (line, vertex), with per-slot columns kept separately
    vertices: Vec<(usize, Vertex)>,
    slot_cols: Vec<Vec<usize>>,
    loops: u32,
    ends: Vec<(usize, usize, Endpoint)>,
}

fn parse_lines(text: &str) -> Result<Parsed, DiagramError> {
    let mut parsed = Parsed {
        vertices: Vec::new(),
        slot_cols: Vec::new(),
        loops: 0,
        ends: Vec::new(),
    };
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks: Vec<(usize, &str)> = Vec::new();
        let mut start = None;
        for (i, ch) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    toks.push((s + 1, &content[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        let Some(&(kcol, kw)) = toks.first() else { continue };
        let args = &toks[1..];
        let perr = |col: usize, reason: String| DiagramError::Parse { line, col, reason };
        let arity = |n: usize| -> Result<(), DiagramError> {
            if args.len() != n {
                let col = args.get(n).map_or(kcol, |a| a.0);
                return Err(perr(
                    col,
                    format!("`{kw}` takes {n} arguments, found {}", args.len()),
                ));
            }
            Ok(())
        };
        let e = |i: usize| EdgeId(args[i].1.to_string());
        let vertex = match kw {
            "X+" | "X-" => {
                arity(4)?;
                let sign = if kw == "X+" { Sign::Pos } else { Sign::Neg };
                Vertex::Classical {
                    sign,
                    over_in: e(0),
                    over_out: e(1),
                    under_in: e(2),
                    under_out: e(3),
                }
            }
            "V" => {
                arity(4)?;
                Vertex::Virtual {
                    a_in: e(0),
                    a_out: e(1),
                    b_in: e(2),
                    b_out: e(3),
                }
            }
            "W" => {
                arity(2)?;
                Vertex::Wen {
                    w_in: e(0),
                    w_out: e(1),
                }
            }
            "loop" => {
                arity(0)?;
                parsed.loops += 1;
                continue;
            }
            "end" => {
                arity(3)?;
                let dir = match args[1].1 {
                    "in" => EndDir::In,
                    "out" => EndDir::Out,
                    other => {
                        return Err(perr(args[1].0, format!("expected `in` or `out`, found `{other}`")))
                    }
                };
                parsed.ends.push((
                    line,
                    kcol,
                    Endpoint {
                        label: args[0].1.to_string(),
                        dir,
                        edge: e(2),
                    },
                ));
                continue;
            }
            other => return Err(perr(kcol, format!("unknown keyword `{other}`"))),
        };
        parsed.slot_cols.push(args.iter().map(|a| a.0).collect());
        parsed.vertices.push((line, vertex));
    }
    Ok(parsed)
}

/// Runs the slot checks and reports the first problem with its position.
fn check_parsed(parsed: &Parsed, srcs: &[&EdgeId], tgts: &[&EdgeId]) -> Result<(), DiagramError> {
    let vertices: Vec<Vertex> = parsed.vertices.iter().map(|(_, v)| v.clone()).collect();
    let violations = slot_violations(&vertices, srcs, tgts);
    if violations.is_empty() {
        return Ok(());
    }
    // locate each violation at the last slot that mentions the edge
    let locate = |edge: &EdgeId, want_input: Option<bool>| -> (usize, usize) {
        let mut found = (0, 0);
        for (vi, (line, v)) in parsed.vertices.iter().enumerate() {
            for (si, e) in v.slots().into_iter().enumerate() {
                let is_input = si % 2 == 0;
                if e == edge && want_input.is_none_or(|w| w == is_input) {
                    found = (*line, parsed.slot_cols[vi][si]);
                }
            }
        }
        found
    };
    let first = &violations[0];
    let (line, col) = match first {
        Violation::DuplicateSource(e) => locate(e, Some(false)),
        Violation::DuplicateTarget(e) => locate(e, Some(true)),
        Violation::MissingSource(e) | Violation::MissingTarget(e) => locate(e, None),
        Violation::DegenerateStrand { vertex, .. } => {
            let line = parsed.vertices[*vertex].0;
            (line, parsed.slot_cols[*vertex][0])
        }
        Violation::DuplicateEndpointLabel(_) => (0, 0),
    };
    let reason = if violations.len() == 1 {
        first.to_string()
    } else {
        format!("{first} (and {} more)", violations.len() - 1)
    };
    Err(DiagramError::Parse { line, col, reason })
}
