//! The cube of resolutions.
//!
//! Vertex `v` picks a smoothing at every crossing. For legs `(a, b, c, d)` the
//! 0-smoothing joins `a`-`b` and `c`-`d`, the 1-smoothing joins `a`-`d` and
//! `b`-`c`. Circles are traced with a union-find over arcs and identified by
//! their smallest segment, so an untouched circle keeps its id along an edge.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::diagram::{
    link_class, structural_violations, Diagram, LinkClass, Segment, UnionFind, Violation,
};

/// Default crossing cap; `RP3KH_MAX_N` overrides it.
pub const DEFAULT_MAX_CROSSINGS: usize = 24;

/// Hard limit from the vertex representation.
const VERTEX_BITS: usize = 31;

pub fn max_crossings() -> usize {
    std::env::var("RP3KH_MAX_N")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .unwrap_or(DEFAULT_MAX_CROSSINGS)
        .min(VERTEX_BITS)
}

/// A cube vertex; bit `i` is the smoothing chosen at crossing `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub u32);

impl Vertex {
    pub fn height(self) -> u32 {
        self.0.count_ones()
    }

    pub fn bit(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    /// Crossing 0 first.
    pub fn bitstring(self, n: usize) -> String {
        (0..n)
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect()
    }

    pub fn parse(bits: &str) -> Option<Vertex> {
        if bits.len() > VERTEX_BITS {
            return None;
        }
        let mut v = 0u32;
        for (i, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v |= 1 << i,
                _ => return None,
            }
        }
        Some(Vertex(v))
    }

    pub fn complement(self, n: usize) -> Vertex {
        let mask = if n == 0 { 0 } else { u32::MAX >> (32 - n) };
        Vertex(!self.0 & mask)
    }

    /// Sort key giving lexicographic order of bitstrings.
    pub fn lex_key(self, n: usize) -> u32 {
        if n == 0 {
            0
        } else {
            self.0.reverse_bits() >> (32 - n)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Circle {
    pub id: Segment,
    pub essential: bool,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub vertex: Vertex,
    pub circles: Vec<Circle>,
    /// Circle index of each segment, segments in [`Diagram::segments`] order.
    pub(crate) segment_circle: Vec<u32>,
}

impl Resolution {
    pub fn essential_count(&self) -> usize {
        self.circles.iter().filter(|c| c.essential).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EdgeKind {
    /// Circles `from` at the source become circle `into` at the target.
    Merge {
        from: [usize; 2],
        into: usize,
    },
    Split {
        from: usize,
        into: [usize; 2],
    },
    OneToOne {
        from: usize,
        into: usize,
    },
}

impl EdgeKind {
    pub fn name(&self) -> &'static str {
        match self {
            EdgeKind::Merge { .. } => "merge",
            EdgeKind::Split { .. } => "split",
            EdgeKind::OneToOne { .. } => "one-to-one",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeEdge {
    pub from: Vertex,
    pub to: Vertex,
    pub crossing: usize,
    pub kind: EdgeKind,
    pub essential_involved: bool,
    /// Circles not touched by the saddle: (index at `from`, index at `to`).
    pub correspondence: Vec<(u32, u32)>,
}

#[derive(Clone, Debug)]
pub struct ResolutionCube {
    pub crossings: usize,
    pub class: LinkClass,
    /// Indexed by vertex bits.
    pub resolutions: Vec<Resolution>,
    /// Sorted by source vertex (lexicographic bitstring), then crossing.
    pub edges: Vec<CubeEdge>,
    /// Segment carrying the diagram's marked point.
    pub marked: Option<Segment>,
    pub(crate) segments: Vec<Segment>,
}

impl ResolutionCube {
    pub fn resolution(&self, v: Vertex) -> &Resolution {
        &self.resolutions[v.0 as usize]
    }

    /// Index of the circle holding segment `s` at vertex `v`.
    pub fn circle_of(&self, v: Vertex, s: Segment) -> Option<usize> {
        let i = self.segments.binary_search(&s).ok()?;
        Some(self.resolution(v).segment_circle[i] as usize)
    }

    /// Vertices of the given height in lexicographic bitstring order.
    pub fn vertices_at_height(&self, h: u32) -> Vec<Vertex> {
        let n = self.crossings;
        let mut vs: Vec<Vertex> = (0..1u32 << n)
            .map(Vertex)
            .filter(|v| v.height() == h)
            .collect();
        vs.sort_by_key(|v| v.lex_key(n));
        vs
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CubeError {
    #[error("{n} crossings exceed the cap of {cap} (set RP3KH_MAX_N to raise it)")]
    TooManyCrossings { n: usize, cap: usize },
    #[error("diagram rejected: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// Precomputed index form of a diagram for repeated tracing.
struct Tracer {
    segments: Vec<Segment>,
    weights: Vec<u8>,
    arc_count: usize,
    legs: Vec<[usize; 4]>,
}

impl Tracer {
    fn new(d: &Diagram) -> Self {
        let segments = d.segments();
        let arc_count = d.arcs.len();
        let index: BTreeMap<u32, usize> = d.arcs.keys().enumerate().map(|(i, &a)| (a, i)).collect();
        Tracer {
            weights: segments.iter().map(|&s| d.segment_weight(s)).collect(),
            legs: d
                .crossings
                .iter()
                .map(|x| x.legs.map(|a| index[&a]))
                .collect(),
            segments,
            arc_count,
        }
    }

    fn resolve(&self, v: Vertex) -> Resolution {
        let mut uf = UnionFind::new(self.arc_count);
        for (k, &[a, b, c, d]) in self.legs.iter().enumerate() {
            if v.bit(k) {
                uf.union(a, d);
                uf.union(b, c);
            } else {
                uf.union(a, b);
                uf.union(c, d);
            }
        }
        // Roots are the smallest arc index of their class, and arcs are
        // visited in id order, so circles come out sorted by smallest segment.
        let mut root_circle: BTreeMap<usize, u32> = BTreeMap::new();
        let mut circles: Vec<Circle> = Vec::new();
        let mut segment_circle = Vec::with_capacity(self.segments.len());
        for i in 0..self.arc_count {
            let r = uf.find(i);
            let ci = *root_circle.entry(r).or_insert_with(|| {
                circles.push(Circle {
                    id: self.segments[i],
                    essential: false,
                    segments: Vec::new(),
                });
                circles.len() as u32 - 1
            });
            let c = &mut circles[ci as usize];
            c.segments.push(self.segments[i]);
            c.essential ^= self.weights[i] == 1;
            segment_circle.push(ci);
        }
        for i in self.arc_count..self.segments.len() {
            circles.push(Circle {
                id: self.segments[i],
                essential: self.weights[i] == 1,
                segments: vec![self.segments[i]],
            });
            segment_circle.push(circles.len() as u32 - 1);
        }
        Resolution {
            vertex: v,
            circles,
            segment_circle,
        }
    }
}

pub fn resolve(d: &Diagram, v: Vertex) -> Resolution {
    Tracer::new(d).resolve(v)
}

fn touched(tracer: &Tracer, r: &Resolution, k: usize) -> Vec<usize> {
    let mut cs: Vec<usize> = tracer.legs[k]
        .iter()
        .map(|&a| r.segment_circle[a] as usize)
        .collect();
    cs.sort_unstable();
    cs.dedup();
    cs
}

fn classify(tracer: &Tracer, ru: &Resolution, rv: &Resolution, k: usize) -> CubeEdge {
    let cu = touched(tracer, ru, k);
    let cv = touched(tracer, rv, k);
    let kind = match (cu.as_slice(), cv.as_slice()) {
        (&[a, b], &[c]) => EdgeKind::Merge {
            from: [a, b],
            into: c,
        },
        (&[a], &[b, c]) => EdgeKind::Split {
            from: a,
            into: [b, c],
        },
        (&[a], &[b]) => EdgeKind::OneToOne { from: a, into: b },
        _ => unreachable!("a saddle touches one or two circles on each side"),
    };
    let essential_involved = cu.iter().any(|&c| ru.circles[c].essential);
    let correspondence = ru
        .circles
        .iter()
        .enumerate()
        .filter(|(i, _)| !cu.contains(i))
        .map(|(i, c)| {
            let s = tracer.segments.binary_search(&c.segments[0]).unwrap();
            (i as u32, rv.segment_circle[s])
        })
        .collect();
    CubeEdge {
        from: ru.vertex,
        to: rv.vertex,
        crossing: k,
        kind,
        essential_involved,
        correspondence,
    }
}

fn all_resolutions(tracer: &Tracer, n: usize) -> Vec<Resolution> {
    (0..1u32 << n)
        .into_par_iter()
        .map(|v| tracer.resolve(Vertex(v)))
        .collect()
}

fn edges_of(tracer: &Tracer, n: usize, res: &[Resolution]) -> Vec<CubeEdge> {
    let mut sources: Vec<Vertex> = (0..1u32 << n).map(Vertex).collect();
    sources.sort_by_key(|v| v.lex_key(n));
    sources
        .par_iter()
        .flat_map_iter(|&u| {
            (0..n).filter(move |&k| !u.bit(k)).map(move |k| {
                let v = Vertex(u.0 | 1 << k);
                classify(tracer, &res[u.0 as usize], &res[v.0 as usize], k)
            })
        })
        .collect()
}

fn census_violations(
    class: LinkClass,
    n: usize,
    res: &[Resolution],
    edges: &[CubeEdge],
) -> Vec<Violation> {
    const LIMIT: usize = 8;
    let want = class.essential_count();
    let mut out: Vec<Violation> = res
        .iter()
        .filter(|r| r.essential_count() != want)
        .take(LIMIT)
        .map(|r| Violation::EssentialCircleCount {
            vertex: r.vertex.bitstring(n),
            count: r.essential_count(),
            class: class.as_u8(),
        })
        .collect();
    if class == LinkClass::One {
        out.extend(
            edges
                .iter()
                .filter(|e| matches!(e.kind, EdgeKind::OneToOne { .. }))
                .take(LIMIT)
                .map(|e| Violation::OneToOneInClassOne {
                    from: e.from.bitstring(n),
                    to: e.to.bitstring(n),
                }),
        );
    }
    out
}

/// Essential-circle violations of a structurally sound diagram.
pub(crate) fn essential_violations(d: &Diagram) -> Vec<Violation> {
    let tracer = Tracer::new(d);
    let n = d.crossing_count();
    let res = all_resolutions(&tracer, n);
    let class = link_class(d);
    let mut out = census_violations(class, n, &res, &[]);
    if out.is_empty() && class == LinkClass::One {
        out = census_violations(class, n, &res, &edges_of(&tracer, n, &res));
    }
    out
}

pub fn build_cube(d: &Diagram) -> Result<ResolutionCube, CubeError> {
    build_cube_with_cap(d, max_crossings())
}

pub fn build_cube_with_cap(d: &Diagram, cap: usize) -> Result<ResolutionCube, CubeError> {
    let n = d.crossing_count();
    if n > cap.min(VERTEX_BITS) {
        return Err(CubeError::TooManyCrossings { n, cap });
    }
    let structural = structural_violations(d);
    if !structural.is_empty() {
        return Err(CubeError::Invalid(structural));
    }
    let tracer = Tracer::new(d);
    let resolutions = all_resolutions(&tracer, n);
    let edges = edges_of(&tracer, n, &resolutions);
    let class = link_class(d);
    let violations = census_violations(class, n, &resolutions, &edges);
    if !violations.is_empty() {
        return Err(CubeError::Invalid(violations));
    }
    Ok(ResolutionCube {
        crossings: n,
        class,
        resolutions,
        edges,
        marked: d.marked.map(|m| m.segment()),
        segments: tracer.segments,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EdgeCensus {
    pub merge: usize,
    pub split: usize,
    pub one_to_one: usize,
    pub merge_essential: usize,
    pub split_essential: usize,
    pub one_to_one_essential: usize,
}

impl EdgeCensus {
    pub fn total(&self) -> usize {
        self.merge + self.split + self.one_to_one
    }
}

impl fmt::Display for EdgeCensus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "merge {} ({} essential), split {} ({} essential), one-to-one {}",
            self.merge, self.merge_essential, self.split, self.split_essential, self.one_to_one
        )
    }
}

pub fn edge_kind_census(c: &ResolutionCube) -> EdgeCensus {
    let mut out = EdgeCensus::default();
    for e in &c.edges {
        let (count, ess) = match e.kind {
            EdgeKind::Merge { .. } => (&mut out.merge, &mut out.merge_essential),
            EdgeKind::Split { .. } => (&mut out.split, &mut out.split_essential),
            EdgeKind::OneToOne { .. } => (&mut out.one_to_one, &mut out.one_to_one_essential),
        };
        *count += 1;
        if e.essential_involved {
            *ess += 1;
        }
    }
    out
}

pub fn resolution_json(c: &ResolutionCube, v: Vertex) -> Value {
    let r = c.resolution(v);
    json!({
        "vertex": v.bitstring(c.crossings),
        "circles": r.circles.iter().map(|ci| json!({
            "id": ci.id.to_string(),
            "essential": ci.essential,
            "segments": ci.segments.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

/// Census plus the full edge list.
pub fn cube_json(c: &ResolutionCube) -> Value {
    let n = c.crossings;
    json!({
        "crossings": n,
        "class": c.class.as_u8(),
        "census": edge_kind_census(c),
        "edges": c.edges.iter().map(|e| {
            let from = c.resolution(e.from);
            let to = c.resolution(e.to);
            let ids = |r: &Resolution, cs: &[usize]| cs.iter().map(|&i| r.circles[i].id.to_string()).collect::<Vec<_>>();
            let (src, dst) = match e.kind {
                EdgeKind::Merge { from: f, into } => (ids(from, &f), ids(to, &[into])),
                EdgeKind::Split { from: f, into } => (ids(from, &[f]), ids(to, &into)),
                EdgeKind::OneToOne { from: f, into } => (ids(from, &[f]), ids(to, &[into])),
            };
            json!({
                "from": e.from.bitstring(n),
                "to": e.to.bitstring(n),
                "crossing": e.crossing,
                "kind": e.kind.name(),
                "essential": e.essential_involved,
                "source_circles": src,
                "target_circles": dst,
            })
        }).collect::<Vec<_>>(),
    })
}
