//! Graded chain complexes over F₂ built from a cube and a rule table.
//!
//! The chain group at a vertex is the tensor product of one module per
//! circle, with the spectator factor (if the table has one) in front. Bases
//! are ordered by vertex bitstring, then lexicographically by label with the
//! first factor most significant. Differential `h` always connects heights
//! `h` and `h + 1`: forward complexes map `C_h → C_{h+1}`, reversed ones
//! `C_{h+1} → C_h` with the inverse bifurcation at every edge.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cube::{EdgeKind, ResolutionCube, Vertex};
use crate::diagram::{LinkClass, UnionFind};
use crate::linalg::{rank_f2, rank_reference, SparseMatrix};
use crate::rules::{CircleKind, CircleModule, RuleTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reversed,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("reduced complex requested but the diagram has no marked point")]
    MissingMark,
    #[error("rule table {theory} has no module for essential circles")]
    TypeMismatch { theory: String },
    #[error("d∘d is nonzero out of height {height} ({entries} entries)")]
    DSquared { height: usize, entries: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Factor {
    /// Circle index at the vertex; `None` for the spectator.
    circle: Option<usize>,
    kind: Option<CircleKind>,
    alphabet: Vec<u8>,
    /// Module generator to alphabet position (`u8::MAX` if killed).
    position: Vec<u8>,
}

impl Factor {
    fn new(
        circle: Option<usize>,
        kind: Option<CircleKind>,
        module: &CircleModule,
        reduced: bool,
    ) -> Self {
        let alphabet = module.alphabet(reduced);
        let mut position = vec![u8::MAX; module.rank()];
        for (p, &g) in alphabet.iter().enumerate() {
            position[g as usize] = p as u8;
        }
        Self {
            circle,
            kind,
            alphabet,
            position,
        }
    }
}

/// The generators of one vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexBlock {
    pub vertex: Vertex,
    /// First index of the block within its height.
    pub offset: usize,
    pub dim: usize,
    factors: Vec<Factor>,
    /// Factor of each circle index.
    circle_factor: Vec<usize>,
    strides: Vec<usize>,
}

impl VertexBlock {
    fn new(vertex: Vertex, offset: usize, factors: Vec<Factor>) -> Self {
        let mut strides = vec![0; factors.len()];
        let mut s = 1;
        for (i, f) in factors.iter().enumerate().rev() {
            strides[i] = s;
            s *= f.alphabet.len();
        }
        let mut circle_factor = vec![0; factors.iter().filter(|f| f.circle.is_some()).count()];
        for (i, f) in factors.iter().enumerate() {
            if let Some(c) = f.circle {
                circle_factor[c] = i;
            }
        }
        Self {
            vertex,
            offset,
            dim: s,
            factors,
            circle_factor,
            strides,
        }
    }

    /// Module generators of local generator `idx`, one per factor.
    fn decode_into(&self, mut idx: usize, out: &mut Vec<u8>) {
        out.clear();
        for (f, &s) in self.factors.iter().zip(&self.strides) {
            out.push(f.alphabet[idx / s]);
            idx %= s;
        }
    }

    /// Local index of a labeling, or `None` if a factor lands on a killed generator.
    fn encode(&self, labels: &[u8]) -> Option<usize> {
        let mut idx = 0;
        for ((f, &s), &g) in self.factors.iter().zip(&self.strides).zip(labels) {
            let p = f.position[g as usize];
            if p == u8::MAX {
                return None;
            }
            idx += p as usize * s;
        }
        Some(idx)
    }
}

/// Homology ranks per homological grading (zero entries omitted).
/// `normalized` is false when the grading shift from the crossing signs was
/// unavailable and taken to be zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RankProfile {
    pub ranks: BTreeMap<i32, usize>,
    pub total: usize,
    pub normalized: bool,
}

impl RankProfile {
    /// Profile from ranks per cube height; height `h` goes to grading `key(h)`.
    pub fn from_heights(by_height: &[usize], key: impl Fn(i32) -> i32, normalized: bool) -> Self {
        let mut ranks: BTreeMap<i32, usize> = BTreeMap::new();
        for (h, &r) in by_height.iter().enumerate() {
            if r > 0 {
                *ranks.entry(key(h as i32)).or_default() += r;
            }
        }
        let total = ranks.values().sum();
        Self {
            ranks,
            total,
            normalized,
        }
    }

    pub fn shifted(&self, by: i32) -> Self {
        Self {
            ranks: self.ranks.iter().map(|(&i, &r)| (i + by, r)).collect(),
            ..self.clone()
        }
    }

    /// Grading `i` becomes `-i`.
    pub fn negated(&self) -> Self {
        Self {
            ranks: self.ranks.iter().map(|(&i, &r)| (-i, r)).collect(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, factor: usize) -> Self {
        Self {
            ranks: self.ranks.iter().map(|(&i, &r)| (i, r * factor)).collect(),
            total: self.total * factor,
            normalized: self.normalized,
        }
    }

    pub fn get(&self, i: i32) -> usize {
        self.ranks.get(&i).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct GradedComplex {
    pub theory: String,
    pub direction: Direction,
    pub reduced: bool,
    pub crossings: usize,
    pub class: LinkClass,
    /// Vertex blocks per height, in lexicographic bitstring order.
    pub blocks: Vec<Vec<VertexBlock>>,
    pub dims: Vec<usize>,
    /// Differential `h` connects heights `h` and `h + 1` (see module docs).
    pub differentials: Vec<SparseMatrix>,
    /// Block position of each vertex within its height.
    block_of: Vec<u32>,
    table: RuleTable,
}

/// Exponent of the sign `(-1)^δ` an integral lift would attach to the edge
/// changing crossing `i` at target vertex `v`: the number of 1s at positions
/// `≥ i`. Over F₂ the sign is 1.
pub fn sign_exponent(v: Vertex, i: usize) -> u32 {
    (v.0 >> i).count_ones()
}

/// A bifurcation seen from the source of a differential.
#[derive(Clone, Debug)]
struct Move {
    target: Vertex,
    kind: EdgeKind,
    /// (circle at source, circle at target) for untouched circles.
    correspondence: Vec<(u32, u32)>,
}

fn inverse(kind: EdgeKind) -> EdgeKind {
    match kind {
        EdgeKind::Merge { from, into } => EdgeKind::Split {
            from: into,
            into: from,
        },
        EdgeKind::Split { from, into } => EdgeKind::Merge {
            from: into,
            into: from,
        },
        EdgeKind::OneToOne { from, into } => EdgeKind::OneToOne {
            from: into,
            into: from,
        },
    }
}

fn moves_by_source(cube: &ResolutionCube, direction: Direction) -> Vec<Vec<Move>> {
    let mut out: Vec<Vec<Move>> = vec![Vec::new(); cube.resolutions.len()];
    for e in &cube.edges {
        // Integral lifts would weight this edge by (-1)^δ; over F₂ it is dropped.
        let _ = sign_exponent(e.to, e.crossing);
        match direction {
            Direction::Forward => out[e.from.0 as usize].push(Move {
                target: e.to,
                kind: e.kind,
                correspondence: e.correspondence.clone(),
            }),
            Direction::Reversed => out[e.to.0 as usize].push(Move {
                target: e.from,
                kind: inverse(e.kind),
                correspondence: e.correspondence.iter().map(|&(a, b)| (b, a)).collect(),
            }),
        }
    }
    out
}

fn vertex_factors(
    cube: &ResolutionCube,
    table: &RuleTable,
    v: Vertex,
    marked: Option<usize>,
) -> Result<Vec<Factor>, ComplexError> {
    let mut factors = Vec::new();
    if let Some(s) = &table.spectator {
        factors.push(Factor::new(None, None, s, false));
    }
    for (i, c) in cube.resolution(v).circles.iter().enumerate() {
        let kind = if c.essential {
            CircleKind::Essential
        } else {
            CircleKind::Trivial
        };
        let module = table
            .module(kind)
            .ok_or_else(|| ComplexError::TypeMismatch {
                theory: table.theory.clone(),
            })?;
        factors.push(Factor::new(Some(i), Some(kind), module, marked == Some(i)));
    }
    Ok(factors)
}

/// Builds the complex of `cube` under `table`.
pub fn assemble(
    cube: &ResolutionCube,
    table: &RuleTable,
    reduced: bool,
    direction: Direction,
) -> Result<GradedComplex, ComplexError> {
    let n = cube.crossings;
    let mark = if reduced {
        Some(cube.marked.ok_or(ComplexError::MissingMark)?)
    } else {
        None
    };
    let mut blocks: Vec<Vec<VertexBlock>> = Vec::with_capacity(n + 1);
    let mut block_of = vec![0u32; cube.resolutions.len()];
    let mut dims = Vec::with_capacity(n + 1);
    for h in 0..=n as u32 {
        let vertices = cube.vertices_at_height(h);
        let factor_lists: Vec<Vec<Factor>> = vertices
            .par_iter()
            .map(|&v| {
                let marked = mark.map(|s| {
                    cube.circle_of(v, s)
                        .expect("marked segment belongs to the diagram")
                });
                vertex_factors(cube, table, v, marked)
            })
            .collect::<Result<_, _>>()?;
        let mut offset = 0;
        let mut row = Vec::with_capacity(vertices.len());
        for (pos, (v, factors)) in vertices.into_iter().zip(factor_lists).enumerate() {
            let b = VertexBlock::new(v, offset, factors);
            offset += b.dim;
            block_of[v.0 as usize] = pos as u32;
            row.push(b);
        }
        dims.push(offset);
        blocks.push(row);
    }

    let moves = moves_by_source(cube, direction);
    let differentials: Vec<SparseMatrix> = (0..n)
        .into_par_iter()
        .map(|h| {
            let (src_h, tgt_h) = match direction {
                Direction::Forward => (h, h + 1),
                Direction::Reversed => (h + 1, h),
            };
            let columns: Vec<Vec<u32>> = blocks[src_h]
                .par_iter()
                .flat_map_iter(|b| {
                    let targets: Vec<(&Move, &VertexBlock)> = moves[b.vertex.0 as usize]
                        .iter()
                        .map(|m| (m, &blocks[tgt_h][block_of[m.target.0 as usize] as usize]))
                        .collect();
                    block_columns(table, b, &targets)
                })
                .collect();
            SparseMatrix::from_columns(dims[tgt_h], columns)
        })
        .collect();

    Ok(GradedComplex {
        theory: table.theory.clone(),
        direction,
        reduced,
        crossings: n,
        class: cube.class,
        blocks,
        dims,
        differentials,
        block_of,
        table: table.clone(),
    })
}

/// Columns of the differential for every generator of `src`.
fn block_columns(
    table: &RuleTable,
    src: &VertexBlock,
    targets: &[(&Move, &VertexBlock)],
) -> Vec<Vec<u32>> {
    let mut labels = Vec::new();
    let mut out_labels: Vec<u8> = Vec::new();
    let kind_of = |c: usize| {
        src.factors[src.circle_factor[c]]
            .kind
            .expect("circle factor")
    };
    (0..src.dim)
        .map(|idx| {
            src.decode_into(idx, &mut labels);
            let mut col = Vec::new();
            for (mv, tgt) in targets {
                out_labels.clear();
                out_labels.resize(tgt.factors.len(), 0);
                if table.spectator.is_some() {
                    out_labels[0] = labels[0];
                }
                for &(a, b) in &mv.correspondence {
                    out_labels[tgt.circle_factor[b as usize]] =
                        labels[src.circle_factor[a as usize]];
                }
                let label = |c: usize| labels[src.circle_factor[c]];
                let mut emit = |out: &[u8]| {
                    if let Some(i) = tgt.encode(out) {
                        col.push((tgt.offset + i) as u32);
                    }
                };
                match mv.kind {
                    EdgeKind::OneToOne { .. } => {}
                    EdgeKind::Merge { from: [a, b], into } => {
                        let (_, image) = table
                            .merge_image([kind_of(a), kind_of(b)], label(a), label(b))
                            .expect("merge of two essential circles");
                        let slot = tgt.circle_factor[into];
                        for g in image {
                            out_labels[slot] = g;
                            emit(&out_labels);
                        }
                    }
                    EdgeKind::Split { from, into: [b, c] } => {
                        let (kinds, pairs) = table
                            .split_image(kind_of(from), label(from))
                            .expect("split rule");
                        // Rule outputs are (trivial, essential) or (trivial, trivial).
                        let c_is_essential =
                            tgt.factors[tgt.circle_factor[c]].kind == Some(CircleKind::Essential);
                        let (first, second) =
                            if kinds[1] == CircleKind::Essential && !c_is_essential {
                                (c, b)
                            } else {
                                (b, c)
                            };
                        let (s1, s2) = (tgt.circle_factor[first], tgt.circle_factor[second]);
                        for (x, y) in pairs {
                            out_labels[s1] = x;
                            out_labels[s2] = y;
                            emit(&out_labels);
                        }
                    }
                }
            }
            col
        })
        .collect()
}

/// A decoded generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorInfo {
    pub vertex: String,
    pub labels: Vec<String>,
    /// Quantum degree before normalization: label degrees plus height.
    pub q: i32,
    pub k: i32,
}

impl GradedComplex {
    pub fn dim(&self, h: usize) -> usize {
        self.dims[h]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn table(&self) -> &RuleTable {
        &self.table
    }

    /// Source and target heights of differential `h`.
    pub fn differential_heights(&self, h: usize) -> (usize, usize) {
        match self.direction {
            Direction::Forward => (h, h + 1),
            Direction::Reversed => (h + 1, h),
        }
    }

    pub fn block(&self, v: Vertex) -> &VertexBlock {
        &self.blocks[v.height() as usize][self.block_of[v.0 as usize] as usize]
    }

    fn block_at(&self, h: usize, idx: usize) -> &VertexBlock {
        let row = &self.blocks[h];
        let p = row.partition_point(|b| b.offset <= idx) - 1;
        &row[p]
    }

    /// Vertex and module labels (spectator first, then circles) of generator
    /// `idx` at height `h`.
    pub fn decode(&self, h: usize, idx: usize) -> (Vertex, Vec<u8>) {
        let b = self.block_at(h, idx);
        let mut labels = Vec::new();
        b.decode_into(idx - b.offset, &mut labels);
        (b.vertex, labels)
    }

    /// Index within its height of the generator with the given labels.
    pub fn index_of(&self, v: Vertex, labels: &[u8]) -> Option<usize> {
        let b = self.block(v);
        if labels.len() != b.factors.len() {
            return None;
        }
        if labels
            .iter()
            .zip(&b.factors)
            .any(|(&g, f)| g as usize >= f.position.len())
        {
            return None;
        }
        b.encode(labels).map(|i| b.offset + i)
    }

    /// Kinds of the factors at vertex `v` (`None` for the spectator).
    pub fn factor_kinds(&self, v: Vertex) -> Vec<Option<CircleKind>> {
        self.block(v).factors.iter().map(|f| f.kind).collect()
    }

    pub fn generator(&self, h: usize, idx: usize) -> GeneratorInfo {
        let (v, labels) = self.decode(h, idx);
        let b = self.block(v);
        let (mut q, mut k) = (h as i32, 0);
        let mut names = Vec::with_capacity(labels.len());
        for (f, &g) in b.factors.iter().zip(&labels) {
            let module = match f.kind {
                None => self.table.spectator.as_ref(),
                Some(kind) => self.table.module(kind),
            }
            .expect("module");
            let spec = &module.generators[g as usize];
            q += spec.deg;
            k += spec.k;
            names.push(spec.name.clone());
        }
        GeneratorInfo {
            vertex: v.bitstring(self.crossings),
            labels: names,
            q,
            k,
        }
    }

    /// Checks that consecutive differentials compose to zero.
    pub fn check_d_squared(&self) -> Result<(), ComplexError> {
        let n = self.differentials.len();
        let bad: Option<(usize, usize)> = (0..n.saturating_sub(1))
            .into_par_iter()
            .map(|h| {
                let (first, second) = match self.direction {
                    Direction::Forward => (&self.differentials[h], &self.differentials[h + 1]),
                    Direction::Reversed => (&self.differentials[h + 1], &self.differentials[h]),
                };
                let composite = first.then(second);
                let src = self
                    .differential_heights(if self.direction == Direction::Forward {
                        h
                    } else {
                        h + 1
                    })
                    .0;
                (src, composite.nnz())
            })
            .filter(|&(_, nnz)| nnz > 0)
            .min();
        match bad {
            Some((height, entries)) => Err(ComplexError::DSquared { height, entries }),
            None => Ok(()),
        }
    }

    /// Ranks of the differentials, splitting each matrix into the connected
    /// components of its row/column graph and running them in parallel.
    pub fn differential_ranks(&self) -> Vec<usize> {
        self.differentials.iter().map(component_rank).collect()
    }

    /// Homology ranks per height.
    fn heights_from_ranks(&self, ranks: &[usize]) -> Vec<usize> {
        (0..self.dims.len())
            .map(|h| {
                let out = if h < ranks.len() { ranks[h] } else { 0 };
                let inc = if h > 0 { ranks[h - 1] } else { 0 };
                self.dims[h] - out - inc
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let gradings: Vec<Value> = (0..self.dims.len())
            .map(|h| {
                let basis: Vec<Value> = (0..self.dims[h])
                    .map(|i| {
                        let g = self.generator(h, i);
                        json!({"vertex": g.vertex, "labels": g.labels, "q": g.q, "k": g.k})
                    })
                    .collect();
                json!({"height": h, "dim": self.dims[h], "basis": basis})
            })
            .collect();
        let differentials: Vec<Value> = self
            .differentials
            .iter()
            .enumerate()
            .map(|(h, m)| {
                let (from, to) = self.differential_heights(h);
                let entries: Vec<[u32; 2]> =
                    m.triplets().into_iter().map(|(r, c, _)| [r, c]).collect();
                json!({"from": from, "to": to, "rows": m.rows, "cols": m.cols, "entries": entries})
            })
            .collect();
        json!({
            "theory": self.theory,
            "direction": self.direction,
            "reduced": self.reduced,
            "crossings": self.crossings,
            "gradings": gradings,
            "differentials": differentials,
        })
    }
}

fn component_rank(m: &SparseMatrix) -> usize {
    if m.nnz() == 0 {
        return 0;
    }
    // Nodes: columns 0..cols, rows cols..cols+rows.
    let mut uf = UnionFind::new(m.cols + m.rows);
    for (j, col) in m.columns.iter().enumerate() {
        for &i in col {
            uf.union(j, m.cols + i as usize);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, col) in m.columns.iter().enumerate() {
        if !col.is_empty() {
            groups.entry(uf.find(j)).or_default().push(j);
        }
    }
    let groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups
        .par_iter()
        .map(|cols| {
            if cols.len() == 1 {
                return 1;
            }
            let mut local: BTreeMap<u32, u32> = BTreeMap::new();
            for &j in cols {
                for &i in &m.columns[j] {
                    let next = local.len() as u32;
                    local.entry(i).or_insert(next);
                }
            }
            let sub: Vec<Vec<u32>> = cols
                .iter()
                .map(|&j| m.columns[j].iter().map(|i| local[i]).collect())
                .collect();
            rank_f2(&SparseMatrix::from_columns(local.len(), sub))
        })
        .sum()
}

/// Homology ranks keyed by cube height, after verifying d∘d = 0.
pub fn homology_ranks(c: &GradedComplex) -> Result<RankProfile, ComplexError> {
    Ok(RankProfile::from_heights(
        &homology_by_height(c)?,
        |h| h,
        false,
    ))
}

/// Homology ranks per height, after verifying d∘d = 0.
pub fn homology_by_height(c: &GradedComplex) -> Result<Vec<usize>, ComplexError> {
    c.check_d_squared()?;
    Ok(c.heights_from_ranks(&c.differential_ranks()))
}

/// The same computation with dense reference elimination on whole matrices.
pub fn homology_by_height_reference(c: &GradedComplex) -> Result<Vec<usize>, ComplexError> {
    c.check_d_squared()?;
    let ranks: Vec<usize> = c.differentials.iter().map(rank_reference).collect();
    Ok(c.heights_from_ranks(&ranks))
}
