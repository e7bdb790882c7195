//! Diagrams from braid words.
//!
//! Strands run left to right through a horizontal band across the disk. The
//! standard closure returns each strand around the outside of the band, which
//! gives a local link. The projective closure sends the strand leaving at
//! position `k` through the cross-cap to re-enter at position `n-1-k`, which is
//! what antipodal identification of the disk boundary does to the band ends.
//! Every projective closure arc carries weight 1.

use std::collections::BTreeMap;

use super::{ArcId, Crossing, Diagram, Direction, FreeLoop, Mark, UnionFind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    Standard,
    Projective,
}

/// Closes the braid `word` on `strands` strands. Letter `i > 0` is the
/// positive generator σᵢ (strands `i-1`, `i` in 0-based positions counted
/// from the top), `-i` its inverse.
///
/// # Panics
/// Panics if a letter is 0 or names a generator outside `1..strands`.
pub fn closure(strands: usize, word: &[i32], kind: Closure) -> Diagram {
    build(strands, word, kind).0
}

/// As [`closure`], with the marked point on the closing strand that leaves
/// the band at position `k`.
///
/// # Panics
/// Panics if `k >= strands`, or as [`closure`].
pub fn marked_closure(strands: usize, word: &[i32], kind: Closure, k: usize) -> Diagram {
    let (mut d, marks) = build(strands, word, kind);
    d.marked = Some(marks[k]);
    d
}

fn build(strands: usize, word: &[i32], kind: Closure) -> (Diagram, Vec<Mark>) {
    for &g in word {
        let i = g.unsigned_abs() as usize;
        assert!(
            i >= 1 && i < strands,
            "generator {g} out of range for {strands} strands"
        );
    }
    // Segment ids: 0..strands are the segments entering from the left; every
    // crossing creates two outgoing segments.
    let mut next = strands;
    let mut at: Vec<usize> = (0..strands).collect();
    // (segment at each leg) per crossing
    let mut legs: Vec<[usize; 4]> = Vec::with_capacity(word.len());
    for &g in word {
        let i = g.unsigned_abs() as usize - 1;
        let (upper_in, lower_in) = (at[i], at[i + 1]);
        let (upper_out, lower_out) = (next, next + 1);
        next += 2;
        at[i] = upper_out;
        at[i + 1] = lower_out;
        if g > 0 {
            // Strand from the upper left passes over; the under-strand enters
            // at the lower left. Counterclockwise from there: SE, NE, NW.
            legs.push([lower_in, lower_out, upper_out, upper_in]);
        } else {
            // The under-strand enters at the upper left; then SW, SE, NE.
            legs.push([upper_in, lower_in, lower_out, upper_out]);
        }
    }

    let mut uf = UnionFind::new(next);
    let mut parity = vec![0u8; strands];
    for (k, &seg) in at.iter().enumerate() {
        let target = match kind {
            Closure::Standard => k,
            Closure::Projective => strands - 1 - k,
        };
        uf.union(seg, target);
        if kind == Closure::Projective {
            parity[k] = 1;
        }
    }
    // Weight of each merged arc: number of projective closure arcs in it.
    let mut weight: BTreeMap<usize, u8> = BTreeMap::new();
    for (k, &seg) in at.iter().enumerate() {
        let root = uf.find(seg);
        *weight.entry(root).or_default() ^= parity[k];
    }

    let mut ids: BTreeMap<usize, ArcId> = BTreeMap::new();
    let mut crossings = Vec::with_capacity(legs.len());
    for l in &legs {
        let mut out = [0; 4];
        for (p, &seg) in l.iter().enumerate() {
            let root = uf.find(seg);
            let fresh = ids.len() as ArcId + 1;
            out[p] = *ids.entry(root).or_insert(fresh);
        }
        crossings.push(Crossing { legs: out });
    }
    let arcs = ids
        .iter()
        .map(|(root, &id)| (id, weight.get(root).copied().unwrap_or(0)))
        .collect();
    // Strand groups that never meet a crossing become free loops.
    let mut loops = BTreeMap::new();
    for seg in 0..strands {
        let root = uf.find(seg);
        if !ids.contains_key(&root) {
            loops.insert(root, weight.get(&root).copied().unwrap_or(0));
        }
    }
    let loop_index: BTreeMap<usize, usize> =
        loops.keys().enumerate().map(|(i, &r)| (r, i)).collect();
    let marks = at
        .iter()
        .map(|&seg| {
            let root = uf.find(seg);
            match ids.get(&root) {
                Some(&a) => Mark::Arc(a),
                None => Mark::Loop(loop_index[&root]),
            }
        })
        .collect();
    let mut d = Diagram {
        crossings,
        arcs,
        loops: loops
            .into_values()
            .map(|weight| FreeLoop { weight })
            .collect(),
        ..Diagram::default()
    };
    orient_along_braid(&mut d, word);
    (d, marks)
}

/// Adds `O` lines for arcs the under-strands leave unforced, following the
/// braid direction.
fn orient_along_braid(d: &mut Diagram, word: &[i32]) {
    let Ok(state) = d.orientation_state() else {
        return;
    };
    let incoming = |(k, p): (usize, usize)| {
        if word[k] > 0 {
            p == 0 || p == 3
        } else {
            p <= 1
        }
    };
    let ends = d.endpoints();
    for (a, dir) in state {
        if dir.is_none() {
            let forward = incoming(ends[&a][1]);
            d.orientation.insert(
                a,
                if forward {
                    Direction::Forward
                } else {
                    Direction::Backward
                },
            );
        }
    }
}
