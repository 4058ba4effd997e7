use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use welded_core::diagram::{Diagram, EdgeId, Sign};
use welded_core::moves::{
    apply_move, enumerate_sites, is_boundary, scramble, scramble_with, Anchor, MoveError, MoveKind,
    Side,
};
use welded_core::skein::{y_invariant, y_invariant_with, CoefficientSystem, EvalOptions, NuChoice};

const TREFOIL: &str = "X+ 1 2 4 5\nX+ 3 4 6 1\nX+ 5 6 2 3\n";

fn d(text: &str) -> Diagram {
    Diagram::parse(text).unwrap()
}

/// Instantiates a pattern and glues its outputs to its inputs by a random
/// bijection, keeping only valid results.
fn closed_fixtures(side: &Side, sign: Sign, seed: u64, want: usize) -> Vec<Diagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ins, outs) = side.boundary();
    let ins: Vec<&str> = ins.into_iter().collect();
    let outs: Vec<&str> = outs.into_iter().collect();
    let mut found = Vec::new();
    for _ in 0..200 {
        let mut perm = ins.clone();
        perm.shuffle(&mut rng);
        let glue: HashMap<&str, &str> = outs.iter().copied().zip(perm).collect();
        let verts = side
            .vertices
            .iter()
            .map(|t| {
                t.build(sign, &mut |n| {
                    let n = glue.get(n).copied().unwrap_or(n);
                    EdgeId::new(n)
                })
            })
            .collect();
        let dg = Diagram::new(verts, 0).renumbered();
        if dg.violations().is_empty() && !found.contains(&dg) {
            found.push(dg);
        }
        if found.len() == want {
            break;
        }
    }
    found
}

#[test]
fn rule_sides_share_boundary() {
    for kind in MoveKind::EQUIVALENCES.iter().chain([&MoveKind::CrossingChange]) {
        for rule in kind.rules() {
            assert_eq!(rule.lhs.boundary(), rule.rhs.boundary(), "{kind}");
            for side in [&rule.lhs, &rule.rhs] {
                let mut count: HashMap<&str, usize> = HashMap::new();
                for v in &side.vertices {
                    for n in v.names() {
                        *count.entry(n).or_default() += 1;
                    }
                }
                for (n, c) in count {
                    assert_eq!(c, if is_boundary(n) { 1 } else { 2 }, "{kind} {n}");
                }
            }
        }
    }
}

#[test]
fn parse_move_names() {
    for k in MoveKind::EQUIVALENCES {
        assert_eq!(k.name().parse::<MoveKind>().unwrap(), k);
    }
    assert!(matches!("r9".parse::<MoveKind>(), Err(MoveError::UnknownMove(_))));
}

#[test]
fn kink_round_trip() {
    let t = d(TREFOIL);
    let sites = enumerate_sites(&t, MoveKind::R1aIns);
    assert_eq!(sites.len(), 6);
    for s in sites {
        let k = apply_move(&t, &s).unwrap();
        assert!(k.violations().is_empty());
        assert_eq!(k.classical_count(), 4);
        assert_eq!(k.writhe(), 4);
        let back = enumerate_sites(&k, MoveKind::R1aDel);
        assert_eq!(back.len(), 1);
        let r = apply_move(&k, &back[0]).unwrap();
        assert_eq!(r.renumbered(), t.renumbered());
    }
}

#[test]
fn insertion_on_free_loop() {
    let u = Diagram::unlink(2);
    let sites = enumerate_sites(&u, MoveKind::R2Ins);
    // loop/loop with both signs
    assert_eq!(sites.len(), 2);
    let h = apply_move(&u, &sites[0]).unwrap();
    assert_eq!(h.free_loops, 0);
    assert_eq!(h.components(), 2);
    let back = enumerate_sites(&h, MoveKind::R2Del);
    assert!(!back.is_empty());
    for s in back {
        let r = apply_move(&h, &s).unwrap();
        assert_eq!(r, Diagram::unlink(2));
    }
}

#[test]
fn removal_that_closes_a_loop() {
    let k = d("X- 1 2 2 1\n");
    let sites = enumerate_sites(&k, MoveKind::R1bDel);
    assert_eq!(sites.len(), 1);
    assert_eq!(apply_move(&k, &sites[0]).unwrap(), Diagram::unlink(1));
    assert!(enumerate_sites(&k, MoveKind::R1aDel).is_empty());
}

#[test]
fn degenerate_removals_are_skipped() {
    // removing the kink would glue the wen's strand onto itself
    let dg = d("X+ 1 2 2 3\nW 3 1\n");
    assert!(enumerate_sites(&dg, MoveKind::R1aDel).is_empty());
    let dg = d("V 1 2 2 3\nW 3 1\n");
    assert!(enumerate_sites(&dg, MoveKind::V1Del).is_empty());
    let dg = d("V 1 2 2 3\nW 3 4\nW 4 1\n");
    let s = enumerate_sites(&dg, MoveKind::V1Del);
    assert_eq!(s.len(), 1);
    let r = apply_move(&dg, &s[0]).unwrap();
    assert!(r.violations().is_empty());
    assert_eq!(r.wen_count(), 2);
}

#[test]
fn writhe_changes() {
    let expect = |k: MoveKind, s: Sign| -> i64 {
        match k {
            MoveKind::R1aIns | MoveKind::R1bDel => 1,
            MoveKind::R1aDel | MoveKind::R1bIns => -1,
            MoveKind::CrossingChange => -2 * s.value(),
            _ => 0,
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let kinds: Vec<MoveKind> = MoveKind::EQUIVALENCES
        .iter()
        .copied()
        .chain([MoveKind::CrossingChange])
        .collect();
    let mut seen = HashMap::new();
    for round in 0..30 {
        let base = Diagram::random(&mut rng, 3, 2, 2);
        let (dg, _) = scramble_with(&base, &mut rng, round % 7, 8, &MoveKind::EQUIVALENCES);
        for &k in &kinds {
            for site in enumerate_sites(&dg, k) {
                let r = apply_move(&dg, &site).unwrap();
                let sign = match &site.anchor {
                    Anchor::Match { sign, .. } => *sign,
                    Anchor::Strands(_) => Sign::Pos,
                };
                let want = if k == MoveKind::T4 {
                    // the backward rule carries the flipped crossing on its left
                    if site.rule % 2 == 0 { -2 * sign.value() } else { 2 * sign.value() }
                } else {
                    expect(k, sign)
                };
                assert_eq!(r.writhe() - dg.writhe(), want, "{site}");
                assert!(r.violations().is_empty(), "{site}");
                *seen.entry(k).or_insert(0) += 1;
            }
        }
    }
    for k in [MoveKind::R1aIns, MoveKind::R2Del, MoveKind::T2, MoveKind::T3] {
        assert!(seen.get(&k).copied().unwrap_or(0) > 0, "{k}");
    }
}

#[test]
fn stale_sites_are_rejected() {
    let t = d(TREFOIL);
    let k = apply_move(&t, &enumerate_sites(&t, MoveKind::R1aIns)[0]).unwrap();
    let site = enumerate_sites(&k, MoveKind::R1aDel).remove(0);
    assert_eq!(apply_move(&t, &site), Err(MoveError::StaleSite));
}

fn check_invariance(kind: MoveKind, cs: &CoefficientSystem, opts: &EvalOptions, sign: Sign) {
    let mut tested = 0;
    for rule in kind.rules() {
        if rule.is_insertion() {
            continue;
        }
        for (i, dg) in closed_fixtures(&rule.lhs, rule.sign.unwrap_or(sign), 17, 4).into_iter().enumerate() {
            let y0 = y_invariant_with(&dg, cs, opts).unwrap();
            let sites = enumerate_sites(&dg, kind);
            assert!(!sites.is_empty(), "{kind} fixture {i}\n{dg}");
            for s in sites {
                let r = apply_move(&dg, &s).unwrap();
                let y1 = y_invariant_with(&r, cs, opts).unwrap();
                assert_eq!(y0, y1, "{s}\n{dg}\n->\n{r}");
                tested += 1;
            }
        }
    }
    if kind.is_insertion() {
        let dg = d(TREFOIL);
        let y0 = y_invariant_with(&dg, cs, opts).unwrap();
        for s in enumerate_sites(&dg, kind) {
            let r = apply_move(&dg, &s).unwrap();
            assert_eq!(y0, y_invariant_with(&r, cs, opts).unwrap(), "{s}");
            tested += 1;
        }
    }
    assert!(tested > 0, "{kind}");
}

#[test]
fn classical_and_virtual_moves_preserve_y() {
    let cs = CoefficientSystem::welded(NuChoice::Symbolic);
    let opts = EvalOptions::default();
    for kind in MoveKind::EQUIVALENCES {
        if kind.uses_wens() {
            continue;
        }
        for sign in [Sign::Pos, Sign::Neg] {
            check_invariance(kind, &cs, &opts, sign);
        }
    }
}

#[test]
fn wen_moves_preserve_y() {
    let opts = EvalOptions {
        allow_wens_with_negative_nu: true,
        ..Default::default()
    };
    let minus = CoefficientSystem::welded(NuChoice::Minus);
    for kind in [MoveKind::T1Ins, MoveKind::T1Del, MoveKind::T2, MoveKind::T3] {
        for sign in [Sign::Pos, Sign::Neg] {
            check_invariance(kind, &minus, &opts, sign);
        }
    }
    let ext = CoefficientSystem::extended();
    for sign in [Sign::Pos, Sign::Neg] {
        check_invariance(MoveKind::T4, &ext, &EvalOptions::default(), sign);
    }
}

#[test]
fn twist_move_breaks_negative_nu() {
    let opts = EvalOptions {
        allow_wens_with_negative_nu: true,
        ..Default::default()
    };
    let cs = CoefficientSystem::welded(NuChoice::Minus);
    let dg = d("W 1 2\nW 3 4\nX+ 2 1 4 3\n");
    let y0 = y_invariant_with(&dg, &cs, &opts).unwrap();
    let s = enumerate_sites(&dg, MoveKind::T4).remove(0);
    let y1 = y_invariant_with(&apply_move(&dg, &s).unwrap(), &cs, &opts).unwrap();
    assert_ne!(y0, y1);
}

#[test]
fn crossing_change_is_detected() {
    let cs = CoefficientSystem::welded(NuChoice::Symbolic);
    // one change turns the Hopf link into the unlink
    let h = d("X+ 1 2 3 4\nX+ 4 3 2 1\n");
    let y0 = y_invariant(&h, &cs).unwrap();
    let s = enumerate_sites(&h, MoveKind::CrossingChange).remove(0);
    let y1 = y_invariant(&apply_move(&h, &s).unwrap(), &cs).unwrap();
    assert_eq!(y1.to_string(), "4");
    assert_ne!(y0, y1);
}

#[test]
fn scramble_is_deterministic_and_bounded() {
    let t = d(TREFOIL);
    let a = scramble(&t, 42, 40, 10);
    let b = scramble(&t, 42, 40, 10);
    assert_eq!(a, b);
    assert!(a.violations().is_empty());
    let c = scramble(&t, 43, 40, 10);
    assert_ne!(a, c);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (_, log) = scramble_with(&t, &mut rng, 200, 10, &MoveKind::EQUIVALENCES);
    assert_eq!(log.len(), 200);
    let big = scramble(&t, 9, 200, 10);
    assert!(big.vertices.len() <= 18, "{}", big.vertices.len());
}

#[test]
fn scramble_preserves_components() {
    let dg = d("X+ 1 2 3 4\nX+ 4 3 2 1\nW 5 6\nW 6 5\n");
    for seed in 0..5 {
        let s = scramble(&dg, seed, 30, 10);
        assert_eq!(s.components(), 3);
    }
}
