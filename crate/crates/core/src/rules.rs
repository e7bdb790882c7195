//! Local algebra: circle modules and the merge/split rules of each theory.
//!
//! A table assigns a module to trivial circles, optionally one to the
//! essential circle, and optionally a spectator factor carried along by the
//! identity. Mixed maps are stored with the trivial factor first:
//! `T⊗E → E` for merges and `E → T⊗E` for splits. One-to-one bifurcations
//! always carry the zero map. The first generator of the trivial module is
//! the unit.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

mod parse;

pub use parse::parse_rules;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleKind {
    Trivial,
    Essential,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorSpec {
    pub name: String,
    /// Quantum degree contribution.
    pub deg: i32,
    /// Third-grading contribution.
    pub k: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircleModule {
    pub name: String,
    pub generators: Vec<GeneratorSpec>,
    /// Generators that vanish in the reduced quotient, ascending.
    pub killed: Vec<u8>,
}

impl CircleModule {
    pub fn new(name: &str, gens: &[(&str, i32, i32)], killed: &[u8]) -> Self {
        Self {
            name: name.to_string(),
            generators: gens
                .iter()
                .map(|&(n, deg, k)| GeneratorSpec {
                    name: n.to_string(),
                    deg,
                    k,
                })
                .collect(),
            killed: killed.to_vec(),
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn index_of(&self, name: &str) -> Option<u8> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as u8)
    }

    pub fn is_killed(&self, g: u8) -> bool {
        self.killed.contains(&g)
    }

    /// Generators surviving in the module (`reduced = false`) or its quotient.
    pub fn alphabet(&self, reduced: bool) -> Vec<u8> {
        (0..self.rank() as u8)
            .filter(|&g| !(reduced && self.is_killed(g)))
            .collect()
    }

    pub fn name_of(&self, g: u8) -> &str {
        &self.generators[g as usize].name
    }
}

/// A linear map between tensor products of modules, given on basis tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMap {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    images: Vec<Vec<Vec<u8>>>,
}

impl LocalMap {
    pub fn zero(source: &[usize], target: &[usize]) -> Self {
        let n = source.iter().product();
        Self {
            source: source.to_vec(),
            target: target.to_vec(),
            images: vec![Vec::new(); n],
        }
    }

    pub fn from_fn(source: &[usize], target: &[usize], f: impl Fn(&[u8]) -> Vec<Vec<u8>>) -> Self {
        let mut m = Self::zero(source, target);
        for input in m.inputs() {
            let terms = f(&input);
            m.set(&input, terms);
        }
        m
    }

    fn flat(&self, input: &[u8]) -> usize {
        input
            .iter()
            .zip(&self.source)
            .fold(0, |acc, (&g, &d)| acc * d + g as usize)
    }

    pub fn image(&self, input: &[u8]) -> &[Vec<u8>] {
        &self.images[self.flat(input)]
    }

    pub(crate) fn set(&mut self, input: &[u8], terms: Vec<Vec<u8>>) {
        let mut acc = BTreeSet::new();
        for t in terms {
            debug_assert_eq!(t.len(), self.target.len());
            if !acc.remove(&t) {
                acc.insert(t);
            }
        }
        let i = self.flat(input);
        self.images[i] = acc.into_iter().collect();
    }

    /// All basis tuples of the source, first factor most significant.
    pub fn inputs(&self) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new()];
        for &d in &self.source {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..d as u8).map(move |g| {
                        let mut q = p.clone();
                        q.push(g);
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(Vec::is_empty)
    }
}

/// Output circle kinds and label pairs of a split image.
pub type SplitImage = ([CircleKind; 2], Vec<(u8, u8)>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTable {
    pub theory: String,
    pub trivial: CircleModule,
    pub essential: Option<CircleModule>,
    pub spectator: Option<CircleModule>,
    /// `T⊗T → T`
    pub merge: LocalMap,
    /// `T → T⊗T`
    pub split: LocalMap,
    /// `T⊗E → E`
    pub merge_essential: Option<LocalMap>,
    /// `E → T⊗E`
    pub split_essential: Option<LocalMap>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
    #[error("square fails ({identity}, circles {kinds}) on {input}: {left} != {right}")]
    Square {
        identity: &'static str,
        kinds: String,
        input: String,
        left: String,
        right: String,
    },
    #[error("unit lint: merging 1 with {generator} gives {image}")]
    Unit { generator: String, image: String },
    #[error("reduced quotient is not preserved: {map} sends {input} to {image}")]
    Quotient {
        map: &'static str,
        input: String,
        image: String,
    },
    #[error("table does not split into two rank-2 blocks: {0}")]
    NotBlockDiagonal(String),
    #[error("{0}")]
    Shape(String),
}

/// The builtin theories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theory {
    Kh0,
    KhClass1,
    Kh1Class1,
    Inst0,
    Inst1,
}

impl Theory {
    pub const ALL: [Theory; 5] = [
        Theory::Kh0,
        Theory::KhClass1,
        Theory::Kh1Class1,
        Theory::Inst0,
        Theory::Inst1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theory::Kh0 => "KH0",
            Theory::KhClass1 => "KH-CLASS1",
            Theory::Kh1Class1 => "KH1-CLASS1",
            Theory::Inst0 => "INST0",
            Theory::Inst1 => "INST1",
        }
    }

    pub fn from_name(s: &str) -> Option<Theory> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn v_module() -> CircleModule {
    CircleModule::new("V", &[("1", 1, 0), ("X", -1, 0)], &[1])
}

fn vbar_module() -> CircleModule {
    CircleModule::new("Vbar", &[("1b", 1, 1), ("Xb", -1, -1)], &[1])
}

fn w_module() -> CircleModule {
    CircleModule::new(
        "W",
        &[("wp", 1, 1), ("wm", -1, -1), ("wp'", 1, 1), ("wm'", -1, -1)],
        &[1, 3],
    )
}

fn v0_module() -> CircleModule {
    CircleModule::new("V0", &[("zp", 0, 0), ("zm", 0, 0)], &[])
}

fn kh0_merge() -> LocalMap {
    // 1·1 = 1, 1·X = X·1 = X, X·X = 0
    LocalMap::from_fn(&[2, 2], &[2], |g| match (g[0], g[1]) {
        (0, b) => vec![vec![b]],
        (a, 0) => vec![vec![a]],
        _ => vec![],
    })
}

fn kh0_split() -> LocalMap {
    // 1 ↦ 1⊗X + X⊗1, X ↦ X⊗X
    LocalMap::from_fn(&[2], &[2, 2], |g| match g[0] {
        0 => vec![vec![0, 1], vec![1, 0]],
        _ => vec![vec![1, 1]],
    })
}

fn table(
    theory: &str,
    essential: Option<(CircleModule, LocalMap, LocalMap)>,
    spectator: Option<CircleModule>,
) -> RuleTable {
    let (essential, merge_essential, split_essential) = match essential {
        Some((m, a, b)) => (Some(m), Some(a), Some(b)),
        None => (None, None, None),
    };
    RuleTable {
        theory: theory.to_string(),
        trivial: v_module(),
        essential,
        spectator,
        merge: kh0_merge(),
        split: kh0_split(),
        merge_essential,
        split_essential,
    }
}

/// The builtin table of a theory.
pub fn builtin_table(theory: Theory) -> RuleTable {
    match theory {
        Theory::Kh0 => table("KH0", None, None),
        Theory::KhClass1 => {
            // 1⊗y ↦ y, X⊗y ↦ 0; y ↦ X⊗y
            let merge = LocalMap::from_fn(&[2, 2], &[2], |g| {
                if g[0] == 0 {
                    vec![vec![g[1]]]
                } else {
                    vec![]
                }
            });
            let split = LocalMap::from_fn(&[2], &[2, 2], |g| vec![vec![1, g[0]]]);
            table("KH-CLASS1", Some((vbar_module(), merge, split)), None)
        }
        Theory::Kh1Class1 => {
            // 1⊗y ↦ y, X⊗1b ↦ Xb, X⊗Xb ↦ 0; 1b ↦ X⊗1b + 1⊗Xb, Xb ↦ X⊗Xb
            let merge = LocalMap::from_fn(&[2, 2], &[2], |g| match (g[0], g[1]) {
                (0, y) => vec![vec![y]],
                (1, 0) => vec![vec![1]],
                _ => vec![],
            });
            let split = LocalMap::from_fn(&[2], &[2, 2], |g| match g[0] {
                0 => vec![vec![1, 0], vec![0, 1]],
                _ => vec![vec![1, 1]],
            });
            table("KH1-CLASS1", Some((vbar_module(), merge, split)), None)
        }
        Theory::Inst0 => table("INST0", None, Some(v0_module())),
        Theory::Inst1 => {
            // W = <wp, wm> ⊕ <wp', wm'> (w±, w±′); each pair behaves like <1b, Xb> in KH1-CLASS1.
            let merge = LocalMap::from_fn(&[2, 4], &[4], |g| match (g[0], g[1]) {
                (0, w) => vec![vec![w]],
                (1, 0) => vec![vec![1]],
                (1, 2) => vec![vec![3]],
                _ => vec![],
            });
            let split = LocalMap::from_fn(&[4], &[2, 4], |g| match g[0] {
                0 => vec![vec![1, 0], vec![0, 1]],
                1 => vec![vec![1, 1]],
                2 => vec![vec![1, 2], vec![0, 3]],
                _ => vec![vec![1, 3]],
            });
            table("INST1", Some((w_module(), merge, split)), None)
        }
    }
}

/// Parses a theory name (`KH0`, `KH1-CLASS1`, ..., optionally with a
/// `-REDUCED` suffix) into the theory and the reduced flag.
pub fn parse_theory_name(name: &str) -> Result<(Theory, bool), RuleError> {
    let upper = name.trim().to_ascii_uppercase();
    let (base, reduced) = match upper.strip_suffix("-REDUCED") {
        Some(b) => (b, true),
        None => (upper.as_str(), false),
    };
    Theory::from_name(base)
        .map(|t| (t, reduced))
        .ok_or_else(|| RuleError::UnknownTheory(name.to_string()))
}

/// The builtin table named `name`. The reduced flag of a `-REDUCED` name is
/// returned alongside; the table itself already carries its quotient data.
pub fn builtin(name: &str) -> Result<(RuleTable, bool), RuleError> {
    let (t, reduced) = parse_theory_name(name)?;
    Ok((builtin_table(t), reduced))
}

/// Reads, parses and validates a rule file.
pub fn load_rule_file(path: impl AsRef<Path>) -> Result<RuleTable, RuleError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| RuleError::Io(format!("{}: {e}", path.as_ref().display())))?;
    let t = parse_rules(&text)?;
    check_table(&t)?;
    Ok(t)
}

impl RuleTable {
    pub fn module(&self, kind: CircleKind) -> Option<&CircleModule> {
        match kind {
            CircleKind::Trivial => Some(&self.trivial),
            CircleKind::Essential => self.essential.as_ref(),
        }
    }

    /// Merge of two circles; `None` if the table has no rule for the shape.
    pub fn merge_image(
        &self,
        kinds: [CircleKind; 2],
        a: u8,
        b: u8,
    ) -> Option<(CircleKind, Vec<u8>)> {
        use CircleKind::*;
        let one = |terms: &[Vec<u8>]| terms.iter().map(|t| t[0]).collect::<Vec<u8>>();
        match kinds {
            [Trivial, Trivial] => Some((Trivial, one(self.merge.image(&[a, b])))),
            [Trivial, Essential] => Some((
                Essential,
                one(self.merge_essential.as_ref()?.image(&[a, b])),
            )),
            [Essential, Trivial] => Some((
                Essential,
                one(self.merge_essential.as_ref()?.image(&[b, a])),
            )),
            [Essential, Essential] => None,
        }
    }

    /// Split of one circle into `(first, second)` with the given output kinds.
    /// For an essential source the trivial output comes first.
    pub fn split_image(&self, kind: CircleKind, a: u8) -> Option<SplitImage> {
        use CircleKind::*;
        let pairs = |terms: &[Vec<u8>]| terms.iter().map(|t| (t[0], t[1])).collect::<Vec<_>>();
        match kind {
            Trivial => Some(([Trivial, Trivial], pairs(self.split.image(&[a])))),
            Essential => Some((
                [Trivial, Essential],
                pairs(self.split_essential.as_ref()?.image(&[a])),
            )),
        }
    }

    fn gen_name(&self, kind: CircleKind, g: u8) -> &str {
        self.module(kind).map_or("?", |m| m.name_of(g))
    }
}

/// A formal sum of basis tuples with per-factor circle kinds.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Elem {
    kinds: Vec<CircleKind>,
    terms: BTreeSet<Vec<u8>>,
}

impl Elem {
    fn basis(kinds: &[CircleKind], labels: &[u8]) -> Self {
        Self {
            kinds: kinds.to_vec(),
            terms: BTreeSet::from([labels.to_vec()]),
        }
    }

    fn toggle(terms: &mut BTreeSet<Vec<u8>>, t: Vec<u8>) {
        if !terms.remove(&t) {
            terms.insert(t);
        }
    }

    fn merge(&self, t: &RuleTable, i: usize, j: usize) -> Elem {
        let kinds2 = [self.kinds[i], self.kinds[j]];
        let mut out = BTreeSet::new();
        let mut out_kind = CircleKind::Trivial;
        for term in &self.terms {
            let (k, labels) = t
                .merge_image(kinds2, term[i], term[j])
                .expect("merge shape");
            out_kind = k;
            for g in labels {
                let mut nt = term.clone();
                nt[i] = g;
                nt.remove(j);
                Self::toggle(&mut out, nt);
            }
        }
        if self.terms.is_empty() {
            out_kind = t
                .merge_image(kinds2, 0, 0)
                .map_or(CircleKind::Trivial, |x| x.0);
        }
        let mut kinds = self.kinds.clone();
        kinds[i] = out_kind;
        kinds.remove(j);
        Elem { kinds, terms: out }
    }

    fn split(&self, t: &RuleTable, i: usize) -> Elem {
        let (out_kinds, _) = t.split_image(self.kinds[i], 0).expect("split shape");
        let mut out = BTreeSet::new();
        for term in &self.terms {
            let (_, pairs) = t.split_image(self.kinds[i], term[i]).expect("split shape");
            for (a, b) in pairs {
                let mut nt = term.clone();
                nt[i] = a;
                nt.insert(i + 1, b);
                Self::toggle(&mut out, nt);
            }
        }
        let mut kinds = self.kinds.clone();
        kinds[i] = out_kinds[0];
        kinds.insert(i + 1, out_kinds[1]);
        Elem { kinds, terms: out }
    }

    /// Reorders factors so trivial circles come first (stable).
    fn canonical(&self) -> Elem {
        let mut order: Vec<usize> = (0..self.kinds.len()).collect();
        order.sort_by_key(|&p| self.kinds[p]);
        Elem {
            kinds: order.iter().map(|&p| self.kinds[p]).collect(),
            terms: self
                .terms
                .iter()
                .map(|t| order.iter().map(|&p| t[p]).collect())
                .collect(),
        }
    }

    fn render(&self, t: &RuleTable) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|term| {
                term.iter()
                    .zip(&self.kinds)
                    .map(|(&g, &k)| t.gen_name(k, g).to_string())
                    .collect::<Vec<_>>()
                    .join("*")
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn kinds_str(kinds: &[CircleKind]) -> String {
    kinds
        .iter()
        .map(|k| match k {
            CircleKind::Trivial => "T",
            CircleKind::Essential => "E",
        })
        .collect()
}

/// All basis tuples for the given factor kinds.
fn basis_tuples(t: &RuleTable, kinds: &[CircleKind]) -> Vec<Vec<u8>> {
    let dims: Vec<usize> = kinds
        .iter()
        .map(|&k| t.module(k).map_or(0, CircleModule::rank))
        .collect();
    LocalMap::zero(&dims, &[]).inputs()
}

fn compare(
    t: &RuleTable,
    identity: &'static str,
    input: &Elem,
    left: &Elem,
    right: &Elem,
) -> Result<(), RuleError> {
    let (l, r) = (left.canonical(), right.canonical());
    if l.terms == r.terms {
        return Ok(());
    }
    Err(RuleError::Square {
        identity,
        kinds: kinds_str(&input.kinds),
        input: input.render(t),
        left: l.render(t),
        right: r.render(t),
    })
}

/// Shape checks: mixed maps exist exactly when an essential module does.
fn check_shapes(t: &RuleTable) -> Result<(), RuleError> {
    let has = t.essential.is_some();
    if t.merge_essential.is_some() != has || t.split_essential.is_some() != has {
        return Err(RuleError::Shape(
            "essential maps and essential module must be declared together".into(),
        ));
    }
    let (tr, er) = (
        t.trivial.rank(),
        t.essential.as_ref().map_or(0, CircleModule::rank),
    );
    let ok = t.merge.source == [tr, tr]
        && t.merge.target == [tr]
        && t.split.source == [tr]
        && t.split.target == [tr, tr]
        && t.merge_essential
            .as_ref()
            .is_none_or(|m| m.source == [tr, er] && m.target == [er])
        && t.split_essential
            .as_ref()
            .is_none_or(|m| m.source == [er] && m.target == [tr, er]);
    if ok {
        Ok(())
    } else {
        Err(RuleError::Shape(
            "map dimensions do not match the modules".into(),
        ))
    }
}

/// The load-time local ∂² = 0 check, the unit lint and the quotient check.
pub fn check_table(t: &RuleTable) -> Result<(), RuleError> {
    use CircleKind::*;
    check_shapes(t)?;
    let mut kind_sets: Vec<Vec<CircleKind>> = vec![vec![Trivial, Trivial, Trivial]];
    if t.essential.is_some() {
        kind_sets.extend([
            vec![Essential, Trivial, Trivial],
            vec![Trivial, Essential, Trivial],
            vec![Trivial, Trivial, Essential],
        ]);
    }

    // Symmetry of the trivial maps: factors are labelled by circles, not order.
    for g in basis_tuples(t, &[Trivial, Trivial]) {
        let x = Elem::basis(&[Trivial, Trivial], &g);
        let swapped = Elem::basis(&[Trivial, Trivial], &[g[1], g[0]]);
        compare(
            t,
            "commutativity",
            &x,
            &x.merge(t, 0, 1),
            &swapped.merge(t, 0, 1),
        )?;
    }
    for g in basis_tuples(t, &[Trivial]) {
        let x = Elem::basis(&[Trivial], &g);
        let s = x.split(t, 0);
        let swapped = Elem {
            kinds: s.kinds.clone(),
            terms: s.terms.iter().map(|p| vec![p[1], p[0]]).collect(),
        };
        compare(t, "cocommutativity", &x, &s, &swapped)?;
    }

    // Associativity on three circles.
    for kinds in &kind_sets {
        for g in basis_tuples(t, kinds) {
            let x = Elem::basis(kinds, &g);
            compare(
                t,
                "associativity",
                &x,
                &x.merge(t, 0, 1).merge(t, 0, 1),
                &x.merge(t, 1, 2).merge(t, 0, 1),
            )?;
        }
    }

    // Coassociativity from one circle.
    let mut sources = vec![Trivial];
    if t.essential.is_some() {
        sources.push(Essential);
    }
    for &k in &sources {
        for g in basis_tuples(t, &[k]) {
            let x = Elem::basis(&[k], &g);
            let s = x.split(t, 0);
            compare(t, "coassociativity", &x, &s.split(t, 0), &s.split(t, 1))?;
        }
    }

    // Frobenius: merge-then-split against both split-then-merge paths.
    let mut pairs = vec![vec![Trivial, Trivial]];
    if t.essential.is_some() {
        pairs.extend([vec![Trivial, Essential], vec![Essential, Trivial]]);
    }
    for kinds in &pairs {
        for g in basis_tuples(t, kinds) {
            let x = Elem::basis(kinds, &g);
            let direct = x.merge(t, 0, 1).split(t, 0);
            compare(t, "frobenius", &x, &direct, &x.split(t, 1).merge(t, 0, 1))?;
            compare(t, "frobenius", &x, &direct, &x.split(t, 0).merge(t, 1, 2))?;
        }
    }

    // A split followed by a merge of the same pair closes a square whose
    // other side runs through two one-to-one edges (zero).
    for g in basis_tuples(t, &[Trivial]) {
        let x = Elem::basis(&[Trivial], &g);
        let zero = Elem {
            kinds: vec![Trivial],
            terms: BTreeSet::new(),
        };
        compare(
            t,
            "one-to-one square",
            &x,
            &x.split(t, 0).merge(t, 0, 1),
            &zero,
        )?;
    }

    unit_lint(t)?;
    quotient_check(t)
}

/// Merging with the unit of the trivial module acts as the identity.
pub fn unit_lint(t: &RuleTable) -> Result<(), RuleError> {
    for &k in &[CircleKind::Trivial, CircleKind::Essential] {
        let Some(m) = t.module(k) else { continue };
        for g in 0..m.rank() as u8 {
            let (_, image) = t
                .merge_image([CircleKind::Trivial, k], 0, g)
                .expect("merge shape");
            if image != [g] {
                let e = Elem {
                    kinds: vec![k],
                    terms: image.iter().map(|&x| vec![x]).collect::<BTreeSet<_>>(),
                };
                return Err(RuleError::Unit {
                    generator: m.name_of(g).to_string(),
                    image: e.render(t),
                });
            }
        }
    }
    Ok(())
}

/// Every map sends the killed part of the marked factor into the killed part
/// of whichever output factor carries the mark.
fn quotient_check(t: &RuleTable) -> Result<(), RuleError> {
    use CircleKind::*;
    let killed = |k: CircleKind, g: u8| t.module(k).is_some_and(|m| m.is_killed(g));
    let mut shapes: Vec<[CircleKind; 2]> = vec![[Trivial, Trivial]];
    if t.essential.is_some() {
        shapes.push([Trivial, Essential]);
    }
    for kinds in shapes {
        for g in basis_tuples(t, &kinds) {
            let (out_kind, image) = t.merge_image(kinds, g[0], g[1]).expect("merge shape");
            for p in 0..2 {
                if killed(kinds[p], g[p]) && image.iter().any(|&o| !killed(out_kind, o)) {
                    let x = Elem::basis(&kinds, &g);
                    let y = Elem {
                        kinds: vec![out_kind],
                        terms: image.iter().map(|&o| vec![o]).collect(),
                    };
                    return Err(RuleError::Quotient {
                        map: "merge",
                        input: x.render(t),
                        image: y.render(t),
                    });
                }
            }
        }
    }
    let mut sources = vec![Trivial];
    if t.essential.is_some() {
        sources.push(Essential);
    }
    for k in sources {
        let m = t.module(k).expect("module");
        for g in 0..m.rank() as u8 {
            if !killed(k, g) {
                continue;
            }
            let (kinds, pairs) = t.split_image(k, g).expect("split shape");
            for q in 0..2 {
                let bad = pairs
                    .iter()
                    .any(|&(a, b)| !killed(kinds[q], if q == 0 { a } else { b }));
                if bad {
                    let x = Elem::basis(&[k], &[g]);
                    let y = Elem {
                        kinds: kinds.to_vec(),
                        terms: pairs.iter().map(|&(a, b)| vec![a, b]).collect(),
                    };
                    return Err(RuleError::Quotient {
                        map: "split",
                        input: x.render(t),
                        image: y.render(t),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Splits a table whose essential module decomposes into two rank-2 blocks
/// preserved by every mixed map. Block order follows the smallest generator.
pub fn block_decompose(t: &RuleTable) -> Result<(RuleTable, RuleTable), RuleError> {
    let (Some(e), Some(me), Some(se)) = (&t.essential, &t.merge_essential, &t.split_essential)
    else {
        return Err(RuleError::NotBlockDiagonal("no essential module".into()));
    };
    let n = e.rank();
    let mut uf = crate::diagram::UnionFind::new(n);
    for input in me.inputs() {
        for out in me.image(&input) {
            uf.union(input[1] as usize, out[0] as usize);
        }
    }
    for input in se.inputs() {
        for out in se.image(&input) {
            uf.union(input[0] as usize, out[1] as usize);
        }
    }
    let mut blocks: Vec<Vec<u8>> = Vec::new();
    for g in 0..n {
        let root = uf.find(g);
        match blocks.iter_mut().find(|b| uf.find(b[0] as usize) == root) {
            Some(b) => b.push(g as u8),
            None => blocks.push(vec![g as u8]),
        }
    }
    if blocks.len() != 2 || blocks.iter().any(|b| b.len() != 2) {
        let shown: Vec<String> = blocks
            .iter()
            .map(|b| {
                format!(
                    "{{{}}}",
                    b.iter()
                        .map(|&g| e.name_of(g))
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            })
            .collect();
        return Err(RuleError::NotBlockDiagonal(format!(
            "blocks {}",
            shown.join(" ")
        )));
    }
    let restrict = |block: &[u8]| -> RuleTable {
        let pos = |g: u8| block.iter().position(|&b| b == g).map(|p| p as u8);
        let module = CircleModule {
            name: format!(
                "{}[{}]",
                e.name,
                block
                    .iter()
                    .map(|&g| e.name_of(g))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            generators: block
                .iter()
                .map(|&g| e.generators[g as usize].clone())
                .collect(),
            killed: block
                .iter()
                .enumerate()
                .filter(|(_, &g)| e.is_killed(g))
                .map(|(i, _)| i as u8)
                .collect(),
        };
        let tr = t.trivial.rank();
        let merge = LocalMap::from_fn(&[tr, 2], &[2], |g| {
            me.image(&[g[0], block[g[1] as usize]])
                .iter()
                .map(|o| vec![pos(o[0]).expect("block")])
                .collect()
        });
        let split = LocalMap::from_fn(&[2], &[tr, 2], |g| {
            se.image(&[block[g[0] as usize]])
                .iter()
                .map(|o| vec![o[0], pos(o[1]).expect("block")])
                .collect()
        });
        RuleTable {
            theory: format!("{}{}", t.theory, module.name.trim_start_matches(&e.name)),
            trivial: t.trivial.clone(),
            essential: Some(module),
            spectator: t.spectator.clone(),
            merge: t.merge.clone(),
            split: t.split.clone(),
            merge_essential: Some(merge),
            split_essential: Some(split),
        }
    };
    Ok((restrict(&blocks[0]), restrict(&blocks[1])))
}

/// Serializes a table in the rule-file grammar.
pub fn render_rules(t: &RuleTable) -> String {
    let mut out = format!("theory {}\n", t.theory);
    let module_line = |role: &str, m: &CircleModule| {
        let gens: Vec<String> = m
            .generators
            .iter()
            .map(|g| {
                let mut s = g.name.clone();
                if g.deg != 0 {
                    s += &format!(" deg={}", g.deg);
                }
                if g.k != 0 {
                    s += &format!(" k={}", g.k);
                }
                s
            })
            .collect();
        let mut line = format!("{role} {}: {}\n", m.name, gens.join(", "));
        if !m.killed.is_empty() {
            let names: Vec<&str> = m.killed.iter().map(|&g| m.name_of(g)).collect();
            line += &format!("kill {}: {}\n", m.name, names.join(", "));
        }
        line
    };
    out += &module_line("trivial", &t.trivial);
    if let Some(e) = &t.essential {
        out += &module_line("essential", e);
    }
    if let Some(s) = &t.spectator {
        out += &module_line("spectator", s);
    }
    let render_map = |head: &str, map: &LocalMap, ins: &[&CircleModule], outs: &[&CircleModule]| {
        let mut s = String::new();
        for input in map.inputs() {
            let lhs: Vec<&str> = input.iter().zip(ins).map(|(&g, m)| m.name_of(g)).collect();
            let image = map.image(&input);
            let rhs = if image.is_empty() {
                "0".to_string()
            } else {
                image
                    .iter()
                    .map(|o| {
                        o.iter()
                            .zip(outs)
                            .map(|(&g, m)| m.name_of(g))
                            .collect::<Vec<_>>()
                            .join("*")
                    })
                    .collect::<Vec<_>>()
                    .join(" + ")
            };
            s += &format!("{head}: {} -> {rhs}\n", lhs.join("*"));
        }
        s
    };
    let v = &t.trivial;
    out += &render_map(
        &format!("merge {0}x{0}->{0}", v.name),
        &t.merge,
        &[v, v],
        &[v],
    );
    out += &render_map(
        &format!("split {0}->{0}x{0}", v.name),
        &t.split,
        &[v],
        &[v, v],
    );
    if let (Some(e), Some(me), Some(se)) = (&t.essential, &t.merge_essential, &t.split_essential) {
        out += &render_map(
            &format!("merge {}x{}->{}", v.name, e.name, e.name),
            me,
            &[v, e],
            &[e],
        );
        out += &render_map(
            &format!("split {}->{}x{}", e.name, v.name, e.name),
            se,
            &[e],
            &[v, e],
        );
    }
    out += "onetoone: zero\n";
    out
}
