use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use welded_core::algebra::{Fraction, Polynomial, VariableSet};
use welded_core::diagram::{Diagram, EdgeId, EndDir, Endpoint, Sign, Tangle};
use welded_core::skein::{bracket, CoefficientSystem, NuChoice};
use welded_core::verifier::{
    basis_system, builtin_move, closures, f1_branches, kink_coefficient, move_constraints,
    move_constraints_scaled, t4_identity, tangle_bracket, verify_solution, BracketKey, Pairing,
    VerifyError,
};

fn gpoly(s: &str) -> Polynomial {
    Polynomial::parse(VariableSet::GENERIC, s).unwrap()
}

fn pairing(s: &str) -> Pairing {
    Pairing::parse(s).unwrap()
}

fn sorted(mut v: Vec<Polynomial>) -> Vec<String> {
    let mut out: Vec<String> = v.drain(..).map(|p| p.to_string()).collect();
    out.sort();
    out
}

#[test]
fn closure_counts_are_double_factorials() {
    let labels = ["1", "2", "3", "4", "5", "6", "7", "8"];
    for (k, want) in [(1, 1), (2, 3), (3, 15), (4, 105)] {
        let c = closures(&labels[..2 * k]);
        assert_eq!(c.len(), want);
        let mut d = c.clone();
        d.dedup();
        assert_eq!(d.len(), want);
        for p in &c {
            assert_eq!(p.pairs().len(), k);
        }
    }
}

#[test]
fn pairing_text() {
    let p = pairing("35:12:64");
    assert_eq!(p.to_string(), "12:35:46");
    assert_eq!(pairing("x1-y1:a1-b1").to_string(), "a1-b1:x1-y1");
    assert!(Pairing::parse("123").is_none());
    assert_eq!(pairing("13:24").chord_crossings(&["1", "2", "3", "4"]), 1);
    assert_eq!(pairing("12:34").chord_crossings(&["1", "2", "3", "4"]), 0);
}

#[test]
fn bare_strand() {
    let t = Tangle::parse("end 1 in 7\nend 2 out 7\n").unwrap();
    let cs = CoefficientSystem::generic();
    let tb = tangle_bracket(&t, &cs).unwrap();
    assert_eq!(tb.terms.len(), 1);
    let (k, v) = tb.terms.iter().next().unwrap();
    assert_eq!(
        k,
        &BracketKey {
            pairing: pairing("12"),
            loops: 0,
            parity: 0
        }
    );
    assert!(v.is_one());
    assert_eq!(tb.close(&pairing("12"), &cs).unwrap(), cs.t);
    assert!(matches!(
        tb.close(&pairing("13"), &cs),
        Err(VerifyError::NotPerfect(_))
    ));
}

#[test]
fn single_crossing_expansion() {
    let t = Tangle::parse(
        "X+ o1 o2 u1 u2\nend 1 in o1\nend 2 in u1\nend 3 out u2\nend 4 out o2\n",
    )
    .unwrap();
    let cs = CoefficientSystem::generic();
    let tb = tangle_bracket(&t, &cs).unwrap();
    let g = VariableSet::GENERIC;
    let want = [
        // strands pass straight through, drawn as a virtual crossing
        ("14:23", 1, "a"),
        ("13:24", 0, "b"),
        ("12:34", 0, "c"),
    ];
    assert_eq!(tb.terms.len(), 3);
    for (p, parity, c) in want {
        let key = BracketKey {
            pairing: pairing(p),
            loops: 0,
            parity,
        };
        assert_eq!(tb.terms[&key], Fraction::parse(g, c).unwrap(), "{p}");
    }
}

/// Cuts a closed diagram at two edges; reconnecting the cuts must give the
/// diagram's own bracket.
fn cut(d: &Diagram, edges: &[EdgeId]) -> (Tangle, Pairing) {
    let mut verts = d.vertices.clone();
    let inc = d.incidence();
    let mut boundary = Vec::new();
    let mut pairs = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        let fresh = EdgeId::new(format!("cut{i}"));
        let (vi, si) = inc.target[e];
        let mut k = 0;
        verts[vi] = verts[vi].map_edges(&mut |x| {
            let r = if k == si { fresh.clone() } else { x.clone() };
            k += 1;
            r
        });
        let (li, lo) = (format!("{}", 2 * i + 1), format!("{}", 2 * i + 2));
        boundary.push(Endpoint {
            label: li.clone(),
            dir: EndDir::In,
            edge: fresh,
        });
        boundary.push(Endpoint {
            label: lo.clone(),
            dir: EndDir::Out,
            edge: e.clone(),
        });
        pairs.push((li, lo));
    }
    (
        Tangle::new(Diagram::new(verts, d.free_loops), boundary),
        Pairing::new(pairs),
    )
}

#[test]
fn reclosing_a_cut_diagram_gives_its_bracket() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for cs in [
        CoefficientSystem::generic(),
        CoefficientSystem::welded(NuChoice::Symbolic),
    ] {
        for n in 1..5 {
            let d = Diagram::random(&mut rng, n, 1, 1);
            let edges: Vec<EdgeId> = d.edges().into_iter().take(2).collect();
            let (t, p) = cut(&d, &edges);
            t.validate().unwrap();
            let tb = tangle_bracket(&t, &cs).unwrap();
            assert_eq!(tb.close(&p, &cs).unwrap(), bracket(&d, &cs).unwrap(), "{d}");
        }
    }
}

#[test]
fn r2_system() {
    let cs = CoefficientSystem::generic();
    for sign in [Sign::Pos, Sign::Neg] {
        let m = builtin_move("R2", sign).unwrap();
        let sys = basis_system(&m.lhs, &m.rhs, &m.order_refs(), &cs).unwrap();
        assert_eq!(sys.closures, 3);
        let want = ["a*y + b*x", "a*x + b*y - 1", "a*z*r + c*x*r + b*z + c*y + c*z*t"]
            .map(|s| gpoly(s).normalize_associate());
        assert_eq!(sorted(sys.normalized()), sorted(want.to_vec()));
        // closing instead of reading off basis coefficients gives the same
        // solution set: every closure equation is a combination of these
        let closed = move_constraints(&m.lhs, &m.rhs, &cs).unwrap();
        assert_eq!(closed.closures, 3);
        assert_eq!(closed.len(), 3);
    }
}

fn displayed_f1() -> Vec<Polynomial> {
    [
        ("b^2 + b*c + b*c*t + c^2", "b^2*t + b*c*t^2 + b*c + c^2*t"),
        ("b^2 + 2*b*c*t + c^2*t^2", "b^2*t + 2*b*c + c^2"),
        ("b^2*t^2 + 2*b*c*t + c^2", "b^2 + 2*b*c + c^2*t"),
    ]
    .into_iter()
    .map(|(l, r)| (&gpoly(l) - &gpoly(r)).normalize_associate())
    .collect()
}

#[test]
fn f1_trio() {
    let cs = CoefficientSystem::generic();
    let m = builtin_move("F1", Sign::Pos).unwrap();
    let set = move_constraints(&m.lhs, &m.rhs, &cs).unwrap();
    assert_eq!(set.closures, 15);
    assert_eq!(set.len(), 3);
    assert_eq!(sorted(set.normalized()), sorted(displayed_f1()));
    // the closure 12:35:46 yields the first displayed equation
    let p = pairing("12:35:46");
    let l = tangle_bracket(&m.lhs, &cs).unwrap().close(&p, &cs).unwrap();
    let r = tangle_bracket(&m.rhs, &cs).unwrap().close(&p, &cs).unwrap();
    let diff = (&l - &r).numerator().normalize_associate();
    assert_eq!(diff, displayed_f1()[0]);
    for (name, b) in f1_branches() {
        assert!(set.substitute(&b).unwrap().is_empty(), "{name}");
    }
    // not every value of t works
    let mut other = f1_branches().remove(0).1;
    other.insert(welded_core::algebra::Symbol::T, Polynomial::constant(VariableSet::GENERIC, 3));
    assert!(!set.substitute(&other).unwrap().is_empty());
}

#[test]
fn r3_follows_from_r2_and_f1() {
    let g = CoefficientSystem::generic();
    let m = builtin_move("R3", Sign::Pos).unwrap();
    let raw = move_constraints(&m.lhs, &m.rhs, &g).unwrap();
    assert!(!raw.is_empty());
    for (name, b) in f1_branches() {
        assert!(raw.substitute(&b).unwrap().is_empty(), "{name}");
    }
    let cs = CoefficientSystem::welded(NuChoice::Symbolic);
    for sign in [Sign::Pos, Sign::Neg] {
        let m = builtin_move("R3", sign).unwrap();
        assert!(move_constraints(&m.lhs, &m.rhs, &cs).unwrap().is_empty());
    }
}

#[test]
fn mixed_move_needs_nothing() {
    let g = CoefficientSystem::generic();
    for name in ["M", "M'"] {
        for sign in [Sign::Pos, Sign::Neg] {
            let m = builtin_move(name, sign).unwrap();
            let set = move_constraints(&m.lhs, &m.rhs, &g).unwrap();
            assert_eq!(set.closures, 15);
            assert!(set.is_empty(), "{name}");
        }
    }
    for name in ["V2", "V3", "T2"] {
        let m = builtin_move(name, Sign::Pos).unwrap();
        assert!(move_constraints(&m.lhs, &m.rhs, &g).unwrap().is_empty(), "{name}");
    }
}

#[test]
fn kink_coefficients() {
    for nu in [NuChoice::Plus, NuChoice::Minus, NuChoice::Symbolic] {
        let cs = CoefficientSystem::welded(nu);
        let v = cs.vars();
        let nu_txt = match nu {
            NuChoice::Plus => "1",
            NuChoice::Minus => "(-1)",
            NuChoice::Symbolic => "nu",
        };
        let p = kink_coefficient(Sign::Pos, &cs).unwrap();
        let n = kink_coefficient(Sign::Neg, &cs).unwrap();
        assert_eq!(p, Fraction::parse(v, &format!("a*r - {nu_txt}*b")).unwrap());
        assert_eq!(
            n,
            Fraction::parse(v, &format!("(-r*a - {nu_txt}*b)/(b^2 - a^2)")).unwrap()
        );
        assert!((&p * &n).is_one());
    }
    let g = CoefficientSystem::generic();
    assert_eq!(kink_coefficient(Sign::Pos, &g).unwrap().to_string(), "a*r + b*t + c");
    assert_eq!(kink_coefficient(Sign::Neg, &g).unwrap().to_string(), "x*r + y*t + z");
}

#[test]
fn t4_identity_by_nu() {
    assert!(t4_identity(1).is_zero());
    let r = t4_identity(-1);
    // 4ab(a + rb) by hand
    let v = VariableSet::SOLVED_FIXED_NU;
    assert_eq!(r, Polynomial::parse(v, "4*a^2*b + 4*a*b^2*r").unwrap());
}

#[test]
fn solved_families() {
    for cs in [
        CoefficientSystem::welded(NuChoice::Plus),
        CoefficientSystem::extended(),
    ] {
        let rep = verify_solution(&cs).unwrap();
        assert!(rep.all_pass(), "{}", rep.family);
        assert_eq!(rep.kinks.matches_omega, Some(true));
        assert!(rep.kinks.reciprocal);
    }
    let rep = verify_solution(&CoefficientSystem::welded(NuChoice::Minus)).unwrap();
    for m in &rep.moves {
        assert_eq!(m.pass, m.name != "T4", "{} {:?}", m.name, m.sign);
    }
    let t4 = rep.get("T4", Some(Sign::Pos)).unwrap();
    assert_eq!(t4.constraints.closures, 3);
    assert_eq!(t4.constraints.len(), 1);
    assert_eq!(
        t4.constraints.equations[0].normalized,
        t4_identity(-1).normalize_associate()
    );
}

#[test]
fn generic_report() {
    let rep = verify_solution(&CoefficientSystem::generic()).unwrap();
    assert!(rep.get("R1a", None).is_none());
    assert!(rep.get("T4", None).is_none());
    assert_eq!(rep.get("F1", Some(Sign::Pos)).unwrap().constraints.len(), 3);
    assert!(rep.get("F1", Some(Sign::Neg)).is_none());
    assert_eq!(rep.get("R2", Some(Sign::Pos)).unwrap().constraints.len(), 3);
    for name in ["V1", "T1", "V2", "V3", "M", "M'", "T2", "T3"] {
        assert!(rep.get(name, None).unwrap().pass, "{name}");
    }
    assert_eq!(rep.kinks.matches_omega, None);
}

#[test]
fn crossing_change_is_not_free() {
    // flipping a crossing inside a tangle is caught by some closure
    let cs = CoefficientSystem::welded(NuChoice::Symbolic);
    let l = Tangle::parse("X+ o1 o2 u1 u2\nend 1 in o1\nend 2 in u1\nend 3 out u2\nend 4 out o2\n")
        .unwrap();
    let r = Tangle::parse("X- o1 o2 u1 u2\nend 1 in o1\nend 2 in u1\nend 3 out u2\nend 4 out o2\n")
        .unwrap();
    let omega2 = cs.omega().unwrap().pow(2);
    assert!(!move_constraints_scaled(&l, &r, &omega2, &cs).unwrap().is_empty());
}

#[test]
fn label_mismatch() {
    let a = Tangle::parse("end 1 in 7\nend 2 out 7\n").unwrap();
    let b = Tangle::parse("end 1 in 7\nend 3 out 7\n").unwrap();
    let cs = CoefficientSystem::generic();
    assert_eq!(move_constraints(&a, &b, &cs), Err(VerifyError::LabelMismatch));
}
