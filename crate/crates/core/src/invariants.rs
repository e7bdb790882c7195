//! The named invariants and the structural cross-checks between them.
//!
//! Kh and Khr use KH0 for class-0 links and KH-CLASS1 for class-1 links;
//! Kh₁ uses KH1-CLASS1. The E₁ page is the reversed complex under INST0 or
//! INST1 and E₂ is its homology. Reduced invariants use the diagram's marked
//! point, or the smallest arc (the first loop if there are no arcs) when none
//! is declared.
//!
//! Homological gradings are `h − n₋` for the forward theories and `n₋ − h`
//! for E₂, so E₂ lines up with Kh of the mirror. Without orientation data
//! `n₋` is taken as 0 and the profile is marked unnormalized.

use serde::Serialize;
use thiserror::Error;

use crate::complex::{
    assemble, homology_by_height, ComplexError, Direction, GradedComplex, RankProfile,
};
use crate::cube::{build_cube, edge_kind_census, CubeError, ResolutionCube, Vertex};
use crate::diagram::{crossing_signs, link_class, mirror, Diagram, LinkClass};
use crate::rules::{block_decompose, builtin_table, CircleKind, RuleTable, Theory};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("Kh1 is computed for class-1 links only; use Kh for class 0")]
    ClassZero,
}

/// Diagram with a marked point, falling back to the default one.
pub fn marked(d: &Diagram) -> Diagram {
    if d.marked.is_some() {
        d.clone()
    } else {
        d.with_mark(d.default_mark())
    }
}

fn negative_crossings(d: &Diagram) -> Option<i32> {
    crossing_signs(d).ok().map(|(_, m)| m as i32)
}

fn forward_profile(d: &Diagram, by_height: &[usize]) -> RankProfile {
    let shift = negative_crossings(d);
    let m = shift.unwrap_or(0);
    RankProfile::from_heights(by_height, |h| h - m, shift.is_some())
}

fn reversed_profile(d: &Diagram, by_height: &[usize]) -> RankProfile {
    let shift = negative_crossings(d);
    let m = shift.unwrap_or(0);
    RankProfile::from_heights(by_height, |h| m - h, shift.is_some())
}

fn kh_table(class: LinkClass) -> RuleTable {
    match class {
        LinkClass::Zero => builtin_table(Theory::Kh0),
        LinkClass::One => builtin_table(Theory::KhClass1),
    }
}

fn inst_table(class: LinkClass) -> RuleTable {
    match class {
        LinkClass::Zero => builtin_table(Theory::Inst0),
        LinkClass::One => builtin_table(Theory::Inst1),
    }
}

fn prepared(d: &Diagram, reduced: bool) -> Result<ResolutionCube, InvariantError> {
    let d = if reduced { marked(d) } else { d.clone() };
    Ok(build_cube(&d)?)
}

/// The complex whose homology is Kh (Khr when `reduced`).
pub fn kh_complex(d: &Diagram, reduced: bool) -> Result<GradedComplex, InvariantError> {
    let cube = prepared(d, reduced)?;
    Ok(assemble(
        &cube,
        &kh_table(cube.class),
        reduced,
        Direction::Forward,
    )?)
}

/// The complex whose homology is Kh₁ of a class-1 link.
pub fn kh1_complex(d: &Diagram, reduced: bool) -> Result<GradedComplex, InvariantError> {
    if link_class(d) == LinkClass::Zero {
        return Err(InvariantError::ClassZero);
    }
    let cube = prepared(d, reduced)?;
    Ok(assemble(
        &cube,
        &builtin_table(Theory::Kh1Class1),
        reduced,
        Direction::Forward,
    )?)
}

/// Kh (or Khr when `reduced`) by homological grading.
pub fn kh(d: &Diagram, reduced: bool) -> Result<RankProfile, InvariantError> {
    forward_homology(d, &kh_complex(d, reduced)?)
}

/// Kh₁ of a class-1 link.
pub fn kh1(d: &Diagram, reduced: bool) -> Result<RankProfile, InvariantError> {
    forward_homology(d, &kh1_complex(d, reduced)?)
}

/// Homology of a forward complex of `d`, graded by `h − n₋`.
pub fn forward_homology(d: &Diagram, c: &GradedComplex) -> Result<RankProfile, InvariantError> {
    Ok(forward_profile(d, &homology_by_height(c)?))
}

/// Homology of a reversed complex of `d`, graded by `n₋ − h`.
pub fn reversed_homology(d: &Diagram, c: &GradedComplex) -> Result<RankProfile, InvariantError> {
    Ok(reversed_profile(d, &homology_by_height(c)?))
}

/// The E₁ page as a reversed complex.
pub fn instanton_e1(d: &Diagram, reduced: bool) -> Result<GradedComplex, InvariantError> {
    let cube = prepared(d, reduced)?;
    Ok(assemble(
        &cube,
        &inst_table(cube.class),
        reduced,
        Direction::Reversed,
    )?)
}

/// Homology of the E₁ page.
pub fn e2_page(d: &Diagram, reduced: bool) -> Result<RankProfile, InvariantError> {
    reversed_homology(d, &instanton_e1(d, reduced)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Profiles {
    pub kh: Option<RankProfile>,
    pub khr: Option<RankProfile>,
    pub kh1: Option<RankProfile>,
    pub e2: Option<RankProfile>,
    pub e2_reduced: Option<RankProfile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub diagram: String,
    pub class: u8,
    pub crossings: usize,
    /// Where the marked point for reduced invariants sits.
    pub mark: Option<String>,
    pub profiles: Profiles,
    pub checks: Vec<Check>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

type Built = Result<(GradedComplex, Vec<usize>), String>;

/// Complexes built on one cube with their homology ranks per height.
struct Side {
    complexes: Vec<(String, Built)>,
}

impl Side {
    fn build(cube: ResolutionCube, jobs: &[(&str, RuleTable, bool, Direction)]) -> Side {
        use rayon::prelude::*;
        let complexes = jobs
            .par_iter()
            .map(|(name, table, reduced, dir)| {
                let result = assemble(&cube, table, *reduced, *dir)
                    .and_then(|c| homology_by_height(&c).map(|h| (c, h)))
                    .map_err(|e| e.to_string());
                (name.to_string(), result)
            })
            .collect();
        Side { complexes }
    }

    fn get(&self, name: &str) -> Option<(&GradedComplex, &[usize])> {
        self.complexes
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, r)| r.as_ref().ok().map(|(c, h)| (c, h.as_slice())))
    }
}

fn total(h: &[usize]) -> usize {
    h.iter().sum()
}

/// Compares E₂ with twice the mirror's homology, height `h` against `N − h`.
fn doubled_check(name: &str, e2: Option<&[usize]>, other: Option<&[usize]>, label: &str) -> Check {
    let (Some(e2), Some(k)) = (e2, other) else {
        return Check {
            name: name.into(),
            pass: false,
            detail: "missing computation".into(),
        };
    };
    let n = e2.len();
    let gradingwise = k.len() == n && (0..n).all(|h| e2[h] == 2 * k[n - 1 - h]);
    let pass = total(e2) == 2 * total(k) && gradingwise;
    Check {
        name: name.into(),
        pass,
        detail: format!(
            "e2 total {} vs 2 x {label}(mirror) total {}; by height {:?} vs reversed {:?}",
            total(e2),
            2 * total(k),
            e2,
            k.iter().rev().map(|r| 2 * r).collect::<Vec<_>>()
        ),
    }
}

/// Matrix-level comparison of the E₁ complex with copies of a mirror complex.
/// `split` sends E₁ labels to a block number and the mirror labels.
pub fn blocks_match(
    e1: &GradedComplex,
    mirror_complex: &GradedComplex,
    blocks: usize,
    split: impl Fn(Vertex, &[u8]) -> (usize, Vec<u8>),
) -> Result<(), String> {
    let n = e1.crossings;
    if mirror_complex.crossings != n
        || e1.direction != Direction::Reversed
        || mirror_complex.direction != Direction::Forward
    {
        return Err("complexes are not a reversed/forward pair on the same cube size".into());
    }
    let map = |h: usize, i: usize| -> Result<(usize, usize), String> {
        let (v, labels) = e1.decode(h, i);
        let (b, l) = split(v, &labels);
        let w = v.complement(n);
        mirror_complex
            .index_of(w, &l)
            .map(|j| (b, j))
            .ok_or_else(|| format!("generator {i} at height {h} has no counterpart"))
    };
    for h in 0..=n {
        let mut counts = vec![0usize; blocks];
        for i in 0..e1.dims[h] {
            counts[map(h, i)?.0] += 1;
        }
        let want = mirror_complex.dims[n - h];
        if counts.iter().any(|&c| c != want) {
            return Err(format!(
                "height {h}: block sizes {counts:?}, mirror dimension {want}"
            ));
        }
    }
    for (k, d) in e1.differentials.iter().enumerate() {
        // d: C_{k+1} → C_k; the mirror differential n−k−1 maps C_{n−k−1} → C_{n−k}.
        let md = &mirror_complex.differentials[n - k - 1];
        for (j, col) in d.columns.iter().enumerate() {
            let (b, mj) = map(k + 1, j)?;
            let mut rows = Vec::with_capacity(col.len());
            for &i in col {
                let (bi, mi) = map(k, i as usize)?;
                if bi != b {
                    return Err(format!(
                        "differential out of height {} mixes blocks {b} and {bi}",
                        k + 1
                    ));
                }
                rows.push(mi as u32);
            }
            rows.sort_unstable();
            if rows != md.columns[mj] {
                return Err(format!(
                    "column {j} out of height {} differs from the mirror",
                    k + 1
                ));
            }
        }
    }
    Ok(())
}

/// Block assignment of the essential module of a W-carrying table.
fn essential_blocks(t: &RuleTable) -> Result<Vec<(usize, u8)>, String> {
    let (a, b) = block_decompose(t).map_err(|e| e.to_string())?;
    let w = t.essential.as_ref().ok_or("no essential module")?;
    let mut out = vec![(usize::MAX, 0u8); w.rank()];
    for (block, table) in [a, b].iter().enumerate() {
        for (pos, g) in table
            .essential
            .as_ref()
            .expect("block module")
            .generators
            .iter()
            .enumerate()
        {
            let idx = w.index_of(&g.name).ok_or("block generator not in W")?;
            out[idx as usize] = (block, pos as u8);
        }
    }
    Ok(out)
}

/// Runs every invariant and cross-check on `d`.
pub fn verify(d: &Diagram, name: &str) -> InvariantReport {
    let d = marked(d);
    let class = link_class(&d);
    let mut report = InvariantReport {
        diagram: name.to_string(),
        class: class.as_u8(),
        crossings: d.crossing_count(),
        mark: d.marked.map(|m| m.to_string()),
        profiles: Profiles::default(),
        checks: Vec::new(),
    };
    let m = mirror(&d);
    let (cube, mcube) = rayon::join(|| build_cube(&d), || build_cube(&m));
    let (cube, mcube) = match (cube, mcube) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            report.checks.push(Check {
                name: "essential-circle-census".into(),
                pass: false,
                detail: e.to_string(),
            });
            return report;
        }
    };
    let census = edge_kind_census(&cube);
    let census_ok = (0..cube.resolutions.len())
        .all(|v| cube.resolution(Vertex(v as u32)).essential_count() == class.essential_count())
        && (class == LinkClass::Zero || census.one_to_one == 0);
    report.checks.push(Check {
        name: "essential-circle-census".into(),
        pass: census_ok,
        detail: format!(
            "{} essential circle(s) at every vertex; edges: {census}",
            class.essential_count()
        ),
    });

    let (kt, it) = (kh_table(class), inst_table(class));
    let kh1t = builtin_table(Theory::Kh1Class1);
    let mut jobs: Vec<(&str, RuleTable, bool, Direction)> = vec![
        ("kh", kt.clone(), false, Direction::Forward),
        ("khr", kt.clone(), true, Direction::Forward),
        ("e2", it.clone(), false, Direction::Reversed),
        ("e2r", it.clone(), true, Direction::Reversed),
    ];
    let mirror_jobs: Vec<(&str, RuleTable, bool, Direction)> = match class {
        LinkClass::Zero => vec![
            ("kh", kt.clone(), false, Direction::Forward),
            ("khr", kt, true, Direction::Forward),
        ],
        LinkClass::One => {
            jobs.push(("kh1", kh1t.clone(), false, Direction::Forward));
            jobs.push(("kh1r", kh1t.clone(), true, Direction::Forward));
            vec![
                ("kh1", kh1t.clone(), false, Direction::Forward),
                ("kh1r", kh1t, true, Direction::Forward),
            ]
        }
    };
    let (side, mside) = rayon::join(
        || Side::build(cube, &jobs),
        || Side::build(mcube, &mirror_jobs),
    );

    let mut failures = Vec::new();
    for (label, s) in [("", &side), ("mirror ", &mside)] {
        for (n, r) in &s.complexes {
            if let Err(e) = r {
                failures.push(format!("{label}{n}: {e}"));
            }
        }
    }
    let built = side.complexes.len() + mside.complexes.len();
    report.checks.push(Check {
        name: "d-squared-zero".into(),
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{built} complexes")
        } else {
            failures.join("; ")
        },
    });

    let h = |s: &Side, n: &str| s.get(n).map(|(_, h)| h.to_vec());
    let (kh_h, khr_h, e2_h, e2r_h) = (
        h(&side, "kh"),
        h(&side, "khr"),
        h(&side, "e2"),
        h(&side, "e2r"),
    );
    report.profiles.kh = kh_h.as_ref().map(|x| forward_profile(&d, x));
    report.profiles.khr = khr_h.as_ref().map(|x| forward_profile(&d, x));
    report.profiles.e2 = e2_h.as_ref().map(|x| reversed_profile(&d, x));
    report.profiles.e2_reduced = e2r_h.as_ref().map(|x| reversed_profile(&d, x));
    if class == LinkClass::One {
        report.profiles.kh1 = h(&side, "kh1").map(|x| forward_profile(&d, &x));
    }

    match class {
        LinkClass::Zero => {
            report.checks.push(doubled_check(
                "e2-twice-kh-mirror",
                e2_h.as_deref(),
                h(&mside, "kh").as_deref(),
                "kh",
            ));
            report.checks.push(doubled_check(
                "e2-reduced-twice-khr-mirror",
                e2r_h.as_deref(),
                h(&mside, "khr").as_deref(),
                "khr",
            ));
            for (check, e, k) in [
                ("e1-copies-of-kh-mirror", "e2", "kh"),
                ("e1-reduced-copies-of-khr-mirror", "e2r", "khr"),
            ] {
                let result = match (side.get(e), mside.get(k)) {
                    (Some((ec, _)), Some((kc, _))) => {
                        blocks_match(ec, kc, 2, |_, l| (l[0] as usize, l[1..].to_vec()))
                            .map(|_| "two copies".to_string())
                    }
                    _ => Err("missing computation".into()),
                };
                report.checks.push(to_check(check, result));
            }
        }
        LinkClass::One => {
            report.checks.push(doubled_check(
                "e2-twice-kh1-mirror",
                e2_h.as_deref(),
                h(&mside, "kh1").as_deref(),
                "kh1",
            ));
            report.checks.push(doubled_check(
                "e2-reduced-twice-kh1r-mirror",
                e2r_h.as_deref(),
                h(&mside, "kh1r").as_deref(),
                "kh1r",
            ));
            let blocks = essential_blocks(&it);
            for (check, e, k) in [
                ("e1-blocks-match-kh1-mirror", "e2", "kh1"),
                ("e1-reduced-blocks-match-kh1r-mirror", "e2r", "kh1r"),
            ] {
                let result = match (&blocks, side.get(e), mside.get(k)) {
                    (Err(msg), _, _) => Err(msg.clone()),
                    (Ok(bl), Some((ec, _)), Some((kc, _))) => {
                        blocks_match(ec, kc, 2, |v, labels| essential_split(ec, bl, v, labels))
                            .map(|_| "two blocks".to_string())
                    }
                    _ => Err("missing computation".into()),
                };
                report.checks.push(to_check(check, result));
            }
        }
    }

    let bound = |name: &str, k: &Option<Vec<usize>>, e: &Option<Vec<usize>>| match (k, e) {
        (Some(k), Some(e)) => Check {
            name: name.into(),
            pass: 2 * total(k) >= total(e),
            detail: format!("2 x {} >= {}", total(k), total(e)),
        },
        _ => Check {
            name: name.into(),
            pass: false,
            detail: "missing computation".into(),
        },
    };
    report
        .checks
        .push(bound("twice-kh-bounds-e2", &kh_h, &e2_h));
    report
        .checks
        .push(bound("twice-khr-bounds-e2-reduced", &khr_h, &e2r_h));
    if class == LinkClass::One {
        for (name, a, b) in [
            ("kh-bounds-kh1", "kh", "kh1"),
            ("khr-bounds-kh1r", "khr", "kh1r"),
        ] {
            let check = match (h(&side, a), h(&side, b)) {
                (Some(x), Some(y)) => Check {
                    name: name.into(),
                    pass: total(&x) >= total(&y),
                    detail: format!("{} >= {}", total(&x), total(&y)),
                },
                _ => Check {
                    name: name.into(),
                    pass: false,
                    detail: "missing computation".into(),
                },
            };
            report.checks.push(check);
        }
    }
    report
}

/// Block and KH1 labels of an INST1 labeling: the essential circle's label
/// picks the block and is renamed to its position inside it.
fn essential_split(
    e1: &GradedComplex,
    blocks: &[(usize, u8)],
    v: Vertex,
    labels: &[u8],
) -> (usize, Vec<u8>) {
    let mut out = labels.to_vec();
    let mut block = 0;
    for (slot, kind) in e1.factor_kinds(v).into_iter().enumerate() {
        if kind == Some(CircleKind::Essential) {
            let (b, pos) = blocks[labels[slot] as usize];
            block = b;
            out[slot] = pos;
        }
    }
    (block, out)
}

fn to_check(name: &str, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check {
            name: name.into(),
            pass: true,
            detail,
        },
        Err(detail) => Check {
            name: name.into(),
            pass: false,
            detail,
        },
    }
}
