mod common;

use proptest::prelude::*;
use rp3kh::complex::homology_by_height;
use rp3kh::diagram::braid::{marked_closure, Closure};
use rp3kh::diagram::{parse_rpd, Diagram};
use rp3kh::invariants::{kh, kh_complex, marked};

fn library(d: &Diagram, reduced: bool) -> Vec<usize> {
    homology_by_height(&kh_complex(d, reduced).unwrap()).unwrap()
}

fn corpus(name: &str) -> Diagram {
    let path = format!("{}/../../corpus/{name}.rpd", env!("CARGO_MANIFEST_DIR"));
    parse_rpd(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn oracle_knows_the_trefoils() {
    let right = marked(&corpus("trefoil"));
    assert_eq!(common::kh_by_height(&right, false), vec![2, 0, 2, 2]);
    assert_eq!(common::kh_by_height(&right, true), vec![1, 0, 1, 1]);
    let left = marked(&corpus("trefoil_left"));
    assert_eq!(common::kh_by_height(&left, false), vec![2, 2, 0, 2]);
}

#[test]
fn right_trefoil_profile() {
    let d = corpus("trefoil");
    let p = kh(&d, false).unwrap();
    assert_eq!(
        p.ranks.into_iter().collect::<Vec<_>>(),
        vec![(0, 2), (2, 2), (3, 2)]
    );
    assert_eq!(kh(&d, true).unwrap().total, 3);
}

#[test]
fn local_corpus_matches_oracle() {
    for name in [
        "unknot",
        "unlink2",
        "hopf",
        "trefoil",
        "trefoil_left",
        "figure_eight",
    ] {
        let d = marked(&corpus(name));
        for reduced in [false, true] {
            assert_eq!(
                library(&d, reduced),
                common::kh_by_height(&d, reduced),
                "{name} reduced={reduced}"
            );
        }
    }
}

#[test]
fn figure_eight_totals() {
    let d = marked(&corpus("figure_eight"));
    assert_eq!(common::kh_by_height(&d, false).iter().sum::<usize>(), 10);
    assert_eq!(common::kh_by_height(&d, true).iter().sum::<usize>(), 5);
}

fn braid(max_strands: usize, max_len: usize) -> impl Strategy<Value = (usize, Vec<i32>, usize)> {
    (2..=max_strands).prop_flat_map(move |n| {
        let letter = (1..n as i32, any::<bool>()).prop_map(|(g, s)| if s { g } else { -g });
        (Just(n), prop::collection::vec(letter, 0..=max_len), 0..n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standard_closures_match_oracle((n, w, k) in braid(4, 7)) {
        let d = marked_closure(n, &w, Closure::Standard, k);
        prop_assert_eq!(library(&d, false), common::kh_by_height(&d, false));
        prop_assert_eq!(library(&d, true), common::kh_by_height(&d, true));
    }
}
