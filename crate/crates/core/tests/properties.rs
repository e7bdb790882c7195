use proptest::prelude::*;
use rp3kh::complex::{assemble, homology_by_height, Direction};
use rp3kh::cube::build_cube;
use rp3kh::diagram::braid::{marked_closure, Closure};
use rp3kh::diagram::{crossingless, disjoint_union, link_class, mirror, Diagram, LinkClass};
use rp3kh::invariants::{e2_page, kh, kh1, verify};
use rp3kh::rules::{builtin_table, Theory};

fn closure_kind() -> impl Strategy<Value = Closure> {
    prop_oneof![Just(Closure::Standard), Just(Closure::Projective)]
}

fn letter(n: usize) -> impl Strategy<Value = i32> {
    (1..n as i32, any::<bool>()).prop_map(|(g, s)| if s { g } else { -g })
}

/// Strands, word, closure and the closing strand carrying the mark.
fn braid(
    max_strands: usize,
    max_len: usize,
) -> impl Strategy<Value = (usize, Vec<i32>, Closure, usize)> {
    (2..=max_strands).prop_flat_map(move |n| {
        (
            Just(n),
            prop::collection::vec(letter(n), 0..=max_len),
            closure_kind(),
            0..n,
        )
    })
}

fn is_class_one(d: &Diagram) -> bool {
    link_class(d) == LinkClass::One
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verify_passes_on_closures((n, w, kind, k) in braid(4, 6)) {
        let d = marked_closure(n, &w, kind, k);
        let r = verify(&d, "closure");
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).collect();
        prop_assert!(failed.is_empty(), "{:?}", failed);
    }

    #[test]
    fn mirror_negates_gradings((n, w, kind, k) in braid(4, 6)) {
        let d = marked_closure(n, &w, kind, k);
        let m = mirror(&d);
        prop_assert_eq!(kh(&m, false).unwrap().negated(), kh(&d, false).unwrap());
        if is_class_one(&d) {
            prop_assert_eq!(kh1(&m, false).unwrap().negated(), kh1(&d, false).unwrap());
            prop_assert_eq!(kh1(&m, true).unwrap().negated(), kh1(&d, true).unwrap());
        } else {
            prop_assert_eq!(kh(&m, true).unwrap().negated(), kh(&d, true).unwrap());
        }
    }

    #[test]
    fn relabeling_arcs_changes_nothing((n, w, kind, k) in braid(4, 6), offset in 1u32..50) {
        let d = marked_closure(n, &w, kind, k);
        let top = d.max_arc_id() + offset;
        let e = d.relabel(|a| top - a + 1);
        prop_assert_eq!(kh(&d, false).unwrap(), kh(&e, false).unwrap());
        prop_assert_eq!(kh(&d, true).unwrap(), kh(&e, true).unwrap());
        prop_assert_eq!(e2_page(&d, false).unwrap(), e2_page(&e, false).unwrap());
        if is_class_one(&d) {
            prop_assert_eq!(kh1(&d, true).unwrap(), kh1(&e, true).unwrap());
        }
    }

    #[test]
    fn unknot_summand_doubles((n, w, kind, k) in braid(3, 5)) {
        let d = marked_closure(n, &w, kind, k);
        let u = disjoint_union(&d, &crossingless(&[0])).unwrap();
        prop_assert_eq!(kh(&u, false).unwrap(), kh(&d, false).unwrap().scaled(2));
        prop_assert_eq!(kh(&u, true).unwrap(), kh(&d, true).unwrap().scaled(2));
        prop_assert_eq!(e2_page(&u, false).unwrap(), e2_page(&d, false).unwrap().scaled(2));
        if kind == Closure::Standard {
            let p = disjoint_union(&d, &crossingless(&[1])).unwrap();
            prop_assert_eq!(kh(&p, false).unwrap(), kh(&d, false).unwrap().scaled(2));
            prop_assert_eq!(kh1(&p, false).unwrap(), kh(&d, false).unwrap().scaled(2));
            prop_assert_eq!(e2_page(&p, false).unwrap().total, 2 * e2_page(&d, false).unwrap().total);
        }
    }

    #[test]
    fn forward_and_reversed_totals_agree((n, w, kind, k) in braid(4, 6), reduced in any::<bool>()) {
        let d = marked_closure(n, &w, kind, k);
        let cube = build_cube(&d).unwrap();
        let theories: &[Theory] = if is_class_one(&d) {
            &[Theory::KhClass1, Theory::Kh1Class1, Theory::Inst1]
        } else {
            &[Theory::Kh0, Theory::Inst0]
        };
        for &t in theories {
            // Reduced KH-CLASS1 depends on the mark and is not self-dual.
            if reduced && t == Theory::KhClass1 {
                continue;
            }
            let table = builtin_table(t);
            let total = |dir| -> usize {
                let c = assemble(&cube, &table, reduced, dir).unwrap();
                homology_by_height(&c).unwrap().iter().sum()
            };
            prop_assert_eq!(total(Direction::Forward), total(Direction::Reversed), "{}", t);
        }
    }

    #[test]
    fn second_reidemeister_move((n, w, kind, k) in braid(4, 5), pos in any::<prop::sample::Index>(), g in 1i32..4) {
        let g = (g - 1) % (n as i32 - 1) + 1;
        let mut w2 = w.clone();
        let at = pos.index(w.len() + 1);
        w2.splice(at..at, [g, -g]);
        let (a, b) = (marked_closure(n, &w, kind, k), marked_closure(n, &w2, kind, k));
        prop_assert_eq!(kh(&a, false).unwrap(), kh(&b, false).unwrap());
        prop_assert_eq!(kh(&a, true).unwrap(), kh(&b, true).unwrap());
        if is_class_one(&a) {
            prop_assert_eq!(kh1(&a, false).unwrap(), kh1(&b, false).unwrap());
            prop_assert_eq!(kh1(&a, true).unwrap(), kh1(&b, true).unwrap());
        }
    }

    #[test]
    fn third_reidemeister_move((w, kind, k) in (prop::collection::vec(letter(3), 0..=3), closure_kind(), 0..3usize), pos in any::<prop::sample::Index>(), s in prop_oneof![Just(1), Just(-1)]) {
        let at = pos.index(w.len() + 1);
        let (mut w1, mut w2) = (w.clone(), w.clone());
        w1.splice(at..at, [s, 2 * s, s]);
        w2.splice(at..at, [2 * s, s, 2 * s]);
        let (a, b) = (marked_closure(3, &w1, kind, k), marked_closure(3, &w2, kind, k));
        prop_assert_eq!(kh(&a, false).unwrap(), kh(&b, false).unwrap());
        prop_assert_eq!(kh(&a, true).unwrap(), kh(&b, true).unwrap());
        if is_class_one(&a) {
            prop_assert_eq!(kh1(&a, false).unwrap(), kh1(&b, false).unwrap());
            prop_assert_eq!(kh1(&a, true).unwrap(), kh1(&b, true).unwrap());
        }
    }

    #[test]
    fn kh_bounds_kh1((w, k) in (prop::collection::vec(letter(3), 0..=6), 0..3usize)) {
        let d = marked_closure(3, &w, Closure::Projective, k);
        for reduced in [false, true] {
            prop_assert!(kh(&d, reduced).unwrap().total >= kh1(&d, reduced).unwrap().total);
        }
    }

    #[test]
    fn verify_is_deterministic((n, w, kind, k) in braid(4, 5)) {
        let d = marked_closure(n, &w, kind, k);
        let a = serde_json::to_string(&verify(&d, "x")).unwrap();
        let b = serde_json::to_string(&verify(&d, "x")).unwrap();
        prop_assert_eq!(a, b);
    }
}
