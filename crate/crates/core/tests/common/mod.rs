//! Brute-force Khovanov homology over F₂ for local diagrams.
//!
//! Written against the planar rules only: circles come from a fresh
//! union-find over arc labels, maps from the Frobenius algebra F₂[X]/X²,
//! ranks from row reduction on `Vec<bool>` rows. Only crossings, free loops
//! and the marked arc are read from the diagram.

#![allow(dead_code)]

use rp3kh::diagram::{Diagram, Mark};

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    p[x] = r;
    r
}

/// Circles of a state: arc label -> circle number, and the circle count.
fn circles(d: &Diagram, state: usize) -> (Vec<usize>, usize) {
    let max = d.crossings.iter().flat_map(|x| x.legs).max().unwrap_or(0) as usize;
    let mut p: Vec<usize> = (0..=max).collect();
    for (i, x) in d.crossings.iter().enumerate() {
        let [a, b, c, e] = x.legs.map(|l| l as usize);
        let pairs = if state >> i & 1 == 0 {
            [(a, b), (c, e)]
        } else {
            [(a, e), (b, c)]
        };
        for (u, v) in pairs {
            let (ru, rv) = (find(&mut p, u), find(&mut p, v));
            p[ru] = rv;
        }
    }
    let used: Vec<usize> = {
        let mut u: Vec<usize> = d
            .crossings
            .iter()
            .flat_map(|x| x.legs)
            .map(|l| l as usize)
            .collect();
        u.sort_unstable();
        u.dedup();
        u
    };
    let mut roots: Vec<usize> = used.iter().map(|&a| find(&mut p, a)).collect();
    roots.sort_unstable();
    roots.dedup();
    let mut label = vec![usize::MAX; max + 1];
    for &a in &used {
        let r = find(&mut p, a);
        label[a] = roots.binary_search(&r).unwrap();
    }
    // Free loops come after the crossing circles.
    (label, roots.len() + d.loops.len())
}

fn rank(mut rows: Vec<Vec<bool>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c]) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i][c] {
                let pivot = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        r += 1;
    }
    r
}

/// Khovanov homology ranks by raw height (number of 1-smoothings). With
/// `reduced`, the circle through the marked arc is restricted to label 1.
pub fn kh_by_height(d: &Diagram, reduced: bool) -> Vec<usize> {
    let n = d.crossings.len();
    let marked_circle = |label: &[usize], count: usize| match d.marked {
        Some(Mark::Arc(a)) => Some(label[a as usize]),
        Some(Mark::Loop(k)) => Some(count - d.loops.len() + k),
        None => None,
    };
    // Generators per state: label bitmasks, bit set means X.
    let mut basis: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n + 1];
    let mut info = Vec::with_capacity(1 << n);
    for s in 0..(1usize << n) {
        let (label, count) = circles(d, s);
        let m = if reduced {
            marked_circle(&label, count)
        } else {
            None
        };
        for bits in 0..(1u64 << count) {
            if m.is_some_and(|m| bits >> m & 1 == 1) {
                continue;
            }
            basis[s.count_ones() as usize].push((s, bits));
        }
        info.push((label, count, m));
    }
    let index = |h: usize, s: usize, bits: u64| basis[h].binary_search(&(s, bits)).ok();
    let mut ranks = vec![0usize; n + 1];
    for h in 0..n {
        let mut rows = vec![vec![false; basis[h + 1].len()]; basis[h].len()];
        for (j, &(s, bits)) in basis[h].iter().enumerate() {
            let (ls, cs, _) = &info[s];
            for i in (0..n).filter(|i| s >> i & 1 == 0) {
                let t = s | 1 << i;
                let (lt, ct, mt) = &info[t];
                let x = &d.crossings[i];
                // Circles touched by the saddle in s and in t.
                let mut src: Vec<usize> = x.legs.iter().map(|&l| ls[l as usize]).collect();
                src.sort_unstable();
                src.dedup();
                let mut dst: Vec<usize> = x.legs.iter().map(|&l| lt[l as usize]).collect();
                dst.sort_unstable();
                dst.dedup();
                // Untouched circles keep their label, matched through any arc.
                let mut base = 0u64;
                let loops_s = cs - d.loops.len();
                let loops_t = ct - d.loops.len();
                for k in 0..d.loops.len() {
                    if bits >> (loops_s + k) & 1 == 1 {
                        base |= 1 << (loops_t + k);
                    }
                }
                for (a, &c) in ls.iter().enumerate() {
                    if c != usize::MAX && !src.contains(&c) && bits >> c & 1 == 1 {
                        base |= 1 << lt[a];
                    }
                }
                let xs: Vec<bool> = src.iter().map(|&c| bits >> c & 1 == 1).collect();
                let images: Vec<u64> = match (src.len(), dst.len()) {
                    (2, 1) => match (xs[0], xs[1]) {
                        (false, false) => vec![base],
                        (true, true) => vec![],
                        _ => vec![base | 1 << dst[0]],
                    },
                    (1, 2) => {
                        let (p, q) = (1u64 << dst[0], 1u64 << dst[1]);
                        if xs[0] {
                            vec![base | p | q]
                        } else {
                            vec![base | p, base | q]
                        }
                    }
                    _ => panic!("local diagrams have no 1-to-1 saddles"),
                };
                for img in images {
                    if mt.is_some_and(|m| img >> m & 1 == 1) {
                        continue;
                    }
                    let k = index(h + 1, t, img).expect("image in basis");
                    rows[j][k] ^= true;
                }
            }
        }
        ranks[h] = rank(rows);
    }
    (0..=n)
        .map(|h| basis[h].len() - ranks[h] - if h > 0 { ranks[h - 1] } else { 0 })
        .collect()
}
