//! Combinatorial link diagrams on RP².
//!
//! The projective plane is modelled as a disk with antipodal boundary points
//! identified. A diagram is a list of crossings whose legs name arcs, a Z/2
//! weight per arc (the parity of its intersections with the cross-cap line),
//! and any number of crossingless free loops. Each crossing stores its legs
//! counterclockwise starting from the incoming under-strand.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub mod braid;
mod parse;

pub use parse::{parse_rpd, ParseError};

pub type ArcId = u32;

/// A strand piece of the diagram: either an arc between crossings or a whole
/// free loop. Arcs sort before loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Segment {
    Arc(ArcId),
    Loop(u32),
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Arc(a) => write!(f, "{a}"),
            Segment::Loop(k) => write!(f, "L{k}"),
        }
    }
}

/// Legs `[a, b, c, d]` counterclockwise, `a` the incoming under-strand.
/// The under-strand is `a`-`c`, the over-strand `b`-`d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub legs: [ArcId; 4],
}

impl Crossing {
    pub fn new(a: ArcId, b: ArcId, c: ArcId, d: ArcId) -> Self {
        Self { legs: [a, b, c, d] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FreeLoop {
    pub weight: u8,
}

/// Direction of an arc relative to its stored direction, which runs from the
/// arc's first endpoint to its second (endpoints ordered by crossing index,
/// then leg position).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn from_bool(forward: bool) -> Self {
        if forward {
            Direction::Forward
        } else {
            Direction::Backward
        }
    }

    fn is_forward(self) -> bool {
        self == Direction::Forward
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mark {
    Arc(ArcId),
    Loop(usize),
}

impl Mark {
    pub fn segment(self) -> Segment {
        match self {
            Mark::Arc(a) => Segment::Arc(a),
            Mark::Loop(k) => Segment::Loop(k as u32),
        }
    }
}

/// Homology class of a link in H₁(RP³) = Z/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LinkClass {
    Zero,
    One,
}

impl LinkClass {
    pub fn from_parity(p: u32) -> Self {
        if p.is_multiple_of(2) {
            LinkClass::Zero
        } else {
            LinkClass::One
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            LinkClass::Zero => 0,
            LinkClass::One => 1,
        }
    }

    /// Number of essential circles every resolution must contain.
    pub fn essential_count(self) -> usize {
        self.as_u8() as usize
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "class {}", self.as_u8())
    }
}

/// A link diagram on RP². Fields are public so that callers (and tests) can
/// build arbitrary, possibly invalid, data and run [`validate`] on it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diagram {
    pub crossings: Vec<Crossing>,
    /// Weight of every arc referenced by a crossing.
    pub arcs: BTreeMap<ArcId, u8>,
    pub loops: Vec<FreeLoop>,
    /// Explicit orientation declarations. Under-strand legs orient their arcs
    /// implicitly, so this only needs to cover over-strand-only components.
    pub orientation: BTreeMap<ArcId, Direction>,
    pub marked: Option<Mark>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("orientation is missing for arc {0}")]
    MissingOrientation(ArcId),
    #[error("diagram is invalid: {0}")]
    Invalid(Violation),
    #[error("both diagrams have class 1; their union would contain two essential circles")]
    BothClassOne,
}

/// A broken diagram invariant. Violations are data: [`validate`] collects all
/// of them instead of stopping at the first.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    #[error("arc id 0 is not a positive label")]
    ZeroArcId,
    #[error("arc {arc} appears {count} times in crossing legs (expected 2)")]
    DanglingArc { arc: ArcId, count: usize },
    #[error("arc {arc} is used by a crossing but not declared")]
    UndeclaredArc { arc: ArcId },
    #[error("weight {weight} of {segment} is not in Z/2")]
    BadWeight { segment: Segment, weight: u8 },
    #[error("orientation of arc {arc} conflicts with the crossing data")]
    InconsistentOrientation { arc: ArcId },
    #[error("orientation declared for unknown arc {arc}")]
    OrientationOfUnknownArc { arc: ArcId },
    #[error("marked point {mark} is not on the diagram")]
    MarkUndeclared { mark: String },
    #[error("resolution {vertex} has {count} essential circles but the diagram has class {class}")]
    EssentialCircleCount {
        vertex: String,
        count: usize,
        class: u8,
    },
    #[error("edge {from} -> {to} is a 1-to-1 bifurcation in a class 1 diagram")]
    OneToOneInClassOne { from: String, to: String },
}

/// Endpoint of an arc: (crossing index, leg position).
pub type Endpoint = (usize, usize);

impl Diagram {
    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn weight(&self, arc: ArcId) -> u8 {
        self.arcs.get(&arc).copied().unwrap_or(0)
    }

    pub fn max_arc_id(&self) -> ArcId {
        self.arcs.keys().next_back().copied().unwrap_or(0)
    }

    /// Both endpoints of each arc, sorted. Arcs with the wrong number of
    /// occurrences are included as they are.
    pub fn endpoints(&self) -> BTreeMap<ArcId, Vec<Endpoint>> {
        let mut ends: BTreeMap<ArcId, Vec<Endpoint>> = BTreeMap::new();
        for (k, x) in self.crossings.iter().enumerate() {
            for (p, &a) in x.legs.iter().enumerate() {
                ends.entry(a).or_default().push((k, p));
            }
        }
        ends
    }

    /// All segments: arcs in id order, then loops.
    pub fn segments(&self) -> Vec<Segment> {
        self.arcs
            .keys()
            .map(|&a| Segment::Arc(a))
            .chain((0..self.loops.len() as u32).map(Segment::Loop))
            .collect()
    }

    pub fn with_mark(&self, mark: Option<Mark>) -> Diagram {
        let mut d = self.clone();
        d.marked = mark;
        d
    }

    /// The marked point if present, otherwise the smallest arc, otherwise the
    /// first free loop. `None` only for the empty diagram.
    pub fn default_mark(&self) -> Option<Mark> {
        self.marked.or_else(|| {
            self.arcs
                .keys()
                .next()
                .map(|&a| Mark::Arc(a))
                .or(if self.loops.is_empty() {
                    None
                } else {
                    Some(Mark::Loop(0))
                })
        })
    }

    /// Renames arcs through `f`, which must be injective on the arc ids.
    pub fn relabel(&self, f: impl Fn(ArcId) -> ArcId) -> Diagram {
        Diagram {
            crossings: self
                .crossings
                .iter()
                .map(|x| Crossing {
                    legs: x.legs.map(&f),
                })
                .collect(),
            arcs: self.arcs.iter().map(|(&a, &w)| (f(a), w)).collect(),
            loops: self.loops.clone(),
            orientation: self.orientation.iter().map(|(&a, &o)| (f(a), o)).collect(),
            marked: self.marked.map(|m| match m {
                Mark::Arc(a) => Mark::Arc(f(a)),
                other => other,
            }),
        }
    }

    /// Components of the link, as sets of segments. Strands continue straight
    /// through each crossing (leg 0 to leg 2, leg 1 to leg 3).
    pub fn components(&self) -> Vec<Vec<Segment>> {
        let ids: Vec<ArcId> = self.arcs.keys().copied().collect();
        let index: BTreeMap<ArcId, usize> = ids.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut uf = UnionFind::new(ids.len());
        for x in &self.crossings {
            for (p, q) in [(0, 2), (1, 3)] {
                if let (Some(&i), Some(&j)) = (index.get(&x.legs[p]), index.get(&x.legs[q])) {
                    uf.union(i, j);
                }
            }
        }
        let mut comps: BTreeMap<usize, Vec<Segment>> = BTreeMap::new();
        for (i, &a) in ids.iter().enumerate() {
            comps.entry(uf.find(i)).or_default().push(Segment::Arc(a));
        }
        let mut out: Vec<Vec<Segment>> = comps.into_values().collect();
        out.extend((0..self.loops.len() as u32).map(|k| vec![Segment::Loop(k)]));
        out
    }

    pub fn segment_weight(&self, s: Segment) -> u8 {
        match s {
            Segment::Arc(a) => self.weight(a),
            Segment::Loop(k) => self.loops.get(k as usize).map_or(0, |l| l.weight),
        }
    }

    /// Stored-direction solution of the orientation constraints: `Some(dir)`
    /// for every arc whose direction is forced by an under-strand leg or an
    /// explicit declaration, `None` for components that only pass over.
    pub fn orientation_state(&self) -> Result<BTreeMap<ArcId, Option<Direction>>, Vec<Violation>> {
        solve_orientation(self, false)
    }

    /// As [`Diagram::orientation_state`], but components without any forcing
    /// data are oriented along the stored direction of their smallest arc.
    pub fn orientation_with_defaults(&self) -> Result<BTreeMap<ArcId, Direction>, Vec<Violation>> {
        solve_orientation(self, true).map(|m| {
            m.into_iter()
                .map(|(a, d)| (a, d.expect("defaults orient every arc")))
                .collect()
        })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for x in &self.crossings {
            let [a, b, c, d] = x.legs;
            out.push_str(&format!("X {a} {b} {c} {d}\n"));
        }
        for (&a, &w) in &self.arcs {
            if w != 0 {
                out.push_str(&format!("W {a} {w}\n"));
            }
        }
        for l in &self.loops {
            out.push_str(&format!("L w={}\n", l.weight));
        }
        for (&a, &o) in &self.orientation {
            let s = if o.is_forward() { '+' } else { '-' };
            out.push_str(&format!("O {a} {s}\n"));
        }
        match self.marked {
            Some(Mark::Arc(a)) => out.push_str(&format!("M {a}\n")),
            Some(Mark::Loop(k)) => out.push_str(&format!("M L{k}\n")),
            None => {}
        }
        out
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mark::Arc(a) => write!(f, "arc {a}"),
            Mark::Loop(k) => write!(f, "loop {k}"),
        }
    }
}

/// Whether the arc's head sits at endpoint `e`, given its direction.
fn head_at(ends: &[Endpoint], forward: bool, e: Endpoint) -> bool {
    forward ^ (e == ends[0])
}

fn solve_orientation(
    d: &Diagram,
    with_defaults: bool,
) -> Result<BTreeMap<ArcId, Option<Direction>>, Vec<Violation>> {
    let ends = d.endpoints();
    let mut violations = Vec::new();
    for &a in d.orientation.keys() {
        if !ends.contains_key(&a) {
            violations.push(Violation::OrientationOfUnknownArc { arc: a });
        }
    }
    if ends.values().any(|e| e.len() != 2) {
        // Structural problems are reported elsewhere; orientation is undefined.
        return Err(violations);
    }

    // Variables are "arc is Forward"; constraints are fixed values and
    // parity relations between the two over-strand arcs of a crossing.
    let mut fixed: Vec<(ArcId, bool)> = Vec::new();
    let mut links: BTreeMap<ArcId, Vec<(ArcId, bool)>> = BTreeMap::new();
    let is_first = |a: ArcId, e: Endpoint| ends[&a][0] == e;
    for (k, x) in d.crossings.iter().enumerate() {
        let [a, b, c, dd] = x.legs;
        // Leg 0: head at (k,0). Leg 2: tail at (k,2).
        fixed.push((a, !is_first(a, (k, 0))));
        fixed.push((c, is_first(c, (k, 2))));
        // Exactly one of the over legs is a head.
        let parity = true ^ is_first(b, (k, 1)) ^ is_first(dd, (k, 3));
        links.entry(b).or_default().push((dd, parity));
        links.entry(dd).or_default().push((b, parity));
    }
    for (&a, &o) in &d.orientation {
        if ends.contains_key(&a) {
            fixed.push((a, o.is_forward()));
        }
    }

    let mut value: BTreeMap<ArcId, Option<bool>> = ends.keys().map(|&a| (a, None)).collect();
    let mut bad: BTreeSet<ArcId> = BTreeSet::new();
    let mut queue = VecDeque::new();
    let mut assign = |a: ArcId,
                      v: bool,
                      value: &mut BTreeMap<ArcId, Option<bool>>,
                      queue: &mut VecDeque<ArcId>| {
        match value[&a] {
            None => {
                value.insert(a, Some(v));
                queue.push_back(a);
            }
            Some(old) if old != v => {
                bad.insert(a);
            }
            _ => {}
        }
    };
    for &(a, v) in &fixed {
        assign(a, v, &mut value, &mut queue);
    }
    let mut seeds = ends.keys().copied();
    loop {
        while let Some(a) = queue.pop_front() {
            let v = value[&a].unwrap();
            for &(b, p) in links.get(&a).map(|l| l.as_slice()).unwrap_or(&[]) {
                assign(b, v ^ p, &mut value, &mut queue);
            }
        }
        if !with_defaults {
            break;
        }
        match seeds.find(|a| value[a].is_none()) {
            Some(a) => assign(a, true, &mut value, &mut queue),
            None => break,
        }
    }
    violations.extend(
        bad.into_iter()
            .map(|arc| Violation::InconsistentOrientation { arc }),
    );
    if !violations.is_empty() {
        return Err(violations);
    }
    Ok(value
        .into_iter()
        .map(|(a, v)| (a, v.map(Direction::from_bool)))
        .collect())
}

/// All structural violations, followed by essential-circle violations found
/// in the resolution cube (checked only when the structure is sound and the
/// crossing count is within the cube cap).
pub fn validate(d: &Diagram) -> Vec<Violation> {
    let mut out = structural_violations(d);
    if out.is_empty() && d.crossing_count() <= crate::cube::max_crossings() {
        out.extend(crate::cube::essential_violations(d));
    }
    out
}

pub(crate) fn structural_violations(d: &Diagram) -> Vec<Violation> {
    let mut out = Vec::new();
    let ends = d.endpoints();
    if ends.contains_key(&0) || d.arcs.contains_key(&0) {
        out.push(Violation::ZeroArcId);
    }
    for (&a, e) in &ends {
        if !d.arcs.contains_key(&a) {
            out.push(Violation::UndeclaredArc { arc: a });
        }
        if e.len() != 2 {
            out.push(Violation::DanglingArc {
                arc: a,
                count: e.len(),
            });
        }
    }
    for (&a, &w) in &d.arcs {
        if !ends.contains_key(&a) {
            out.push(Violation::DanglingArc { arc: a, count: 0 });
        }
        if w > 1 {
            out.push(Violation::BadWeight {
                segment: Segment::Arc(a),
                weight: w,
            });
        }
    }
    for (k, l) in d.loops.iter().enumerate() {
        if l.weight > 1 {
            out.push(Violation::BadWeight {
                segment: Segment::Loop(k as u32),
                weight: l.weight,
            });
        }
    }
    match d.marked {
        Some(Mark::Arc(a)) if !d.arcs.contains_key(&a) => out.push(Violation::MarkUndeclared {
            mark: format!("arc {a}"),
        }),
        Some(Mark::Loop(k)) if k >= d.loops.len() => out.push(Violation::MarkUndeclared {
            mark: format!("loop {k}"),
        }),
        _ => {}
    }
    if let Err(v) = d.orientation_state() {
        out.extend(v);
    }
    out
}

/// Mod-2 total weight of the diagram.
pub fn link_class(d: &Diagram) -> LinkClass {
    let arcs: u32 = d.arcs.values().map(|&w| w as u32).sum();
    let loops: u32 = d.loops.iter().map(|l| l.weight as u32).sum();
    LinkClass::from_parity(arcs + loops)
}

/// Swaps over and under strand at every crossing, re-rooting the legs so the
/// new incoming under-strand comes first. Orientation information that the
/// new leg layout no longer forces is kept as explicit declarations.
pub fn mirror(d: &Diagram) -> Diagram {
    let orient = d
        .orientation_with_defaults()
        .unwrap_or_else(|_| d.arcs.keys().map(|&a| (a, Direction::Forward)).collect());
    let ends = d.endpoints();
    let known = d.orientation_state().unwrap_or_default();

    // Physical direction of each arc: the endpoint where its head sits.
    let head_of = |a: ArcId| -> Option<Endpoint> {
        let e = ends.get(&a)?;
        if e.len() != 2 {
            return None;
        }
        Some(if orient[&a].is_forward() { e[1] } else { e[0] })
    };

    let mut rotation = Vec::with_capacity(d.crossings.len());
    let crossings = d
        .crossings
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let [a, b, c, dd] = x.legs;
            // Over-strand enters at leg 3 (d) or leg 1 (b).
            let enters_at_d = head_of(dd) == Some((k, 3));
            if enters_at_d {
                rotation.push(3);
                Crossing::new(dd, a, b, c)
            } else {
                rotation.push(1);
                Crossing::new(b, c, dd, a)
            }
        })
        .collect();
    let mut m = Diagram {
        crossings,
        arcs: d.arcs.clone(),
        loops: d.loops.clone(),
        orientation: BTreeMap::new(),
        marked: d.marked,
    };

    // Where an old endpoint lands after re-rooting.
    let moved = |(k, p): Endpoint| -> Endpoint {
        let r = rotation[k];
        (k, (p + 4 - r) % 4)
    };
    let new_ends = m.endpoints();
    let new_direction = |a: ArcId| -> Option<Direction> {
        let head = moved(head_of(a)?);
        let e = new_ends.get(&a)?;
        Some(Direction::from_bool(head == e[1]))
    };

    // Carry over explicit declarations, then pin any component that used to
    // be oriented but is no longer forced by under-strand legs.
    for &a in d.orientation.keys() {
        if let Some(dir) = new_direction(a) {
            m.orientation.insert(a, dir);
        }
    }
    while let Ok(state) = m.orientation_state() {
        let missing = state
            .iter()
            .find(|(a, v)| v.is_none() && known.get(a).copied().flatten().is_some());
        match missing {
            Some((&a, _)) => {
                if let Some(dir) = new_direction(a) {
                    m.orientation.insert(a, dir);
                } else {
                    break;
                }
            }
            None => break,
        }
    }
    m
}

/// Counts of positive and negative crossings under the right-hand rule.
pub fn crossing_signs(d: &Diagram) -> Result<(usize, usize), DiagramError> {
    let state = d
        .orientation_state()
        .map_err(|v| DiagramError::Invalid(v[0].clone()))?;
    let ends = d.endpoints();
    let mut plus = 0;
    let mut minus = 0;
    for (k, x) in d.crossings.iter().enumerate() {
        let over_in = x.legs[3];
        let dir = state
            .get(&over_in)
            .copied()
            .flatten()
            .ok_or(DiagramError::MissingOrientation(over_in))?;
        if head_at(&ends[&over_in], dir.is_forward(), (k, 3)) {
            plus += 1;
        } else {
            minus += 1;
        }
    }
    Ok((plus, minus))
}

/// Relabeled concatenation; arcs of `d2` are shifted past the arcs of `d1`.
pub fn disjoint_union(d1: &Diagram, d2: &Diagram) -> Result<Diagram, DiagramError> {
    if link_class(d1) == LinkClass::One && link_class(d2) == LinkClass::One {
        return Err(DiagramError::BothClassOne);
    }
    let shift = d1.max_arc_id();
    let d2 = d2.relabel(|a| a + shift);
    let mut out = d1.clone();
    out.crossings.extend(d2.crossings.iter().copied());
    out.arcs.extend(d2.arcs.iter().map(|(&a, &w)| (a, w)));
    let loop_shift = out.loops.len();
    out.loops.extend(d2.loops.iter().copied());
    out.orientation
        .extend(d2.orientation.iter().map(|(&a, &o)| (a, o)));
    if out.marked.is_none() {
        out.marked = d2.marked.map(|m| match m {
            Mark::Loop(k) => Mark::Loop(k + loop_shift),
            other => other,
        });
    }
    Ok(out)
}

/// Crossingless diagram with the given loop weights.
pub fn crossingless(weights: &[u8]) -> Diagram {
    Diagram {
        loops: weights.iter().map(|&weight| FreeLoop { weight }).collect(),
        ..Diagram::default()
    }
}

/// Minimal union-find with path halving.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so representatives are deterministic.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(text: &str) -> Diagram {
        parse_rpd(text).unwrap()
    }

    const TREFOIL_LEFT: &str = "X 1 4 2 5\nX 3 6 4 1\nX 5 2 6 3\n";

    #[test]
    fn classes() {
        assert_eq!(link_class(&d("L w=1")), LinkClass::One);
        assert_eq!(link_class(&d(TREFOIL_LEFT)), LinkClass::Zero);
        assert_eq!(link_class(&d("X 1 2 1 2\nW 1 1\nW 2 1")), LinkClass::Zero);
    }

    #[test]
    fn unknot_is_valid_and_dangling_arc_is_reported() {
        assert!(validate(&d("L w=0")).is_empty());
        let mut bad = d("X 1 2 1 2");
        bad.crossings[0].legs[3] = 3;
        bad.arcs.insert(3, 0);
        let v = validate(&bad);
        assert!(v.contains(&Violation::DanglingArc { arc: 2, count: 1 }));
        assert!(v.contains(&Violation::DanglingArc { arc: 3, count: 1 }));
    }

    #[test]
    fn two_essential_circles_are_rejected() {
        let v = validate(&d("X 1 1 2 2\nW 1 1\nW 2 1"));
        assert!(matches!(
            v[0],
            Violation::EssentialCircleCount {
                count: 2,
                class: 0,
                ..
            }
        ));
        let v = validate(&d("L w=1\nL w=1"));
        assert!(matches!(
            v[0],
            Violation::EssentialCircleCount { count: 2, .. }
        ));
    }

    #[test]
    fn trefoil_signs_and_mirror() {
        let left = d(TREFOIL_LEFT);
        assert_eq!(crossing_signs(&left).unwrap(), (0, 3));
        let right = mirror(&left);
        assert_eq!(crossing_signs(&right).unwrap(), (3, 0));
        assert_eq!(right.serialize(), "X 4 2 5 1\nX 6 4 1 3\nX 2 6 3 5\n");
        assert_eq!(crossing_signs(&mirror(&right)).unwrap(), (0, 3));
    }

    #[test]
    fn signs_need_orientation_of_over_only_components() {
        let lines = d("X 1 2 1 2\nW 1 1\nW 2 1");
        assert_eq!(
            crossing_signs(&lines),
            Err(DiagramError::MissingOrientation(2))
        );
        let oriented = d("X 1 2 1 2\nW 1 1\nW 2 1\nO 2 +");
        let (p, m) = crossing_signs(&oriented).unwrap();
        assert_eq!(p + m, 1);
        assert_eq!(crossing_signs(&crossingless(&[0, 1])).unwrap(), (0, 0));
    }

    #[test]
    fn reversing_every_component_keeps_signs() {
        // Reversal of all components re-roots each crossing by two legs.
        let left = d(TREFOIL_LEFT);
        let mut rev = left.clone();
        for x in &mut rev.crossings {
            let [a, b, c, dd] = x.legs;
            x.legs = [c, dd, a, b];
        }
        assert_eq!(
            crossing_signs(&rev).unwrap(),
            crossing_signs(&left).unwrap()
        );
    }

    #[test]
    fn inconsistent_orientation_is_a_violation() {
        // Arc 1 is forced by its under-strand legs; declaring it both ways
        // relative to that forcing must conflict for one of the two choices.
        let a = d("X 1 1 2 2\nW 1 1\nO 1 +");
        let b = d("X 1 1 2 2\nW 1 1\nO 1 -");
        let bad = [a, b]
            .iter()
            .filter(|x| {
                validate(x)
                    .iter()
                    .any(|v| matches!(v, Violation::InconsistentOrientation { .. }))
            })
            .count();
        assert_eq!(bad, 1);
    }

    #[test]
    fn union_rules() {
        let u = disjoint_union(&d("L w=0"), &d("L w=0")).unwrap();
        assert_eq!(u.loops.len(), 2);
        let t = disjoint_union(&d(TREFOIL_LEFT), &d("L w=1")).unwrap();
        assert_eq!(t.crossing_count(), 3);
        assert_eq!(link_class(&t), LinkClass::One);
        assert_eq!(
            disjoint_union(&d("L w=1"), &d("L w=1")),
            Err(DiagramError::BothClassOne)
        );
    }

    #[test]
    fn components_of_two_lines() {
        let lines = d("X 1 2 1 2\nW 1 1\nW 2 1");
        assert_eq!(lines.components().len(), 2);
        let kink = d("X 1 1 2 2\nW 1 1");
        assert_eq!(kink.components().len(), 1);
    }
}
