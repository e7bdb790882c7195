//! Reader for rule files.
//!
//! ```text
//! theory KH0
//! trivial V: 1 deg=1, X deg=-1
//! kill V: X
//! essential Vbar: 1b deg=1 k=1, Xb deg=-1 k=-1
//! spectator V0: zp, zm
//! merge VxV->V: X*X -> 0
//! split V->VxV: 1 -> 1*X + X*1
//! merge VxVbar->Vbar: X*1b -> Xb
//! split Vbar->VxVbar: 1b -> X*1b + 1*Xb
//! onetoone: zero
//! ```
//! Entries not listed map to zero. Mixed maps may list the essential factor on
//! either side of `x`. `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};

use super::{CircleKind, CircleModule, GeneratorSpec, LocalMap, RuleError, RuleTable};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Trivial,
    Essential,
    Spectator,
}

struct Builder {
    theory: Option<String>,
    modules: BTreeMap<String, (Role, CircleModule)>,
    trivial: Option<String>,
    essential: Option<String>,
    spectator: Option<String>,
    /// (map name, input tuple) pairs already defined.
    defined: BTreeSet<(&'static str, Vec<u8>)>,
    maps: BTreeMap<&'static str, LocalMap>,
}

fn err(line: usize, message: impl Into<String>) -> RuleError {
    RuleError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_generator(line: usize, item: &str) -> Result<GeneratorSpec, RuleError> {
    let mut parts = item.split_whitespace();
    let name = parts.next().ok_or_else(|| err(line, "empty generator"))?;
    let mut g = GeneratorSpec {
        name: name.to_string(),
        deg: 0,
        k: 0,
    };
    for p in parts {
        let (key, value) = p
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, found `{p}`")))?;
        let v: i32 = value
            .parse()
            .map_err(|_| err(line, format!("bad integer `{value}`")))?;
        match key {
            "deg" => g.deg = v,
            "k" => g.k = v,
            _ => return Err(err(line, format!("unknown grading `{key}`"))),
        }
    }
    Ok(g)
}

impl Builder {
    fn module(&self, line: usize, name: &str) -> Result<&(Role, CircleModule), RuleError> {
        self.modules
            .get(name)
            .ok_or_else(|| err(line, format!("undeclared module `{name}`")))
    }

    fn declare(&mut self, line: usize, role: Role, rest: &str) -> Result<(), RuleError> {
        let (name, gens) = rest
            .split_once(':')
            .ok_or_else(|| err(line, "expected `<name>: <generators>`"))?;
        let name = name.trim();
        if name.is_empty() || name.contains(char::is_whitespace) || name.contains('x') {
            return Err(err(
                line,
                format!("bad module name `{name}` (no spaces, no `x`)"),
            ));
        }
        if self.modules.contains_key(name) {
            return Err(err(line, format!("module `{name}` declared twice")));
        }
        let generators = gens
            .split(',')
            .map(|item| parse_generator(line, item))
            .collect::<Result<Vec<_>, _>>()?;
        let mut seen = BTreeSet::new();
        for g in &generators {
            if g.name.contains(['*', '+', ',', ':']) || g.name == "0" {
                return Err(err(line, format!("bad generator name `{}`", g.name)));
            }
            if !seen.insert(g.name.as_str()) {
                return Err(err(line, format!("generator `{}` repeated", g.name)));
            }
        }
        if generators.len() > 64 {
            return Err(err(line, "too many generators"));
        }
        let slot = match role {
            Role::Trivial => &mut self.trivial,
            Role::Essential => &mut self.essential,
            Role::Spectator => &mut self.spectator,
        };
        if slot.is_some() {
            return Err(err(line, "module role declared twice"));
        }
        *slot = Some(name.to_string());
        let m = CircleModule {
            name: name.to_string(),
            generators,
            killed: Vec::new(),
        };
        self.modules.insert(name.to_string(), (role, m));
        Ok(())
    }

    fn kill(&mut self, line: usize, rest: &str) -> Result<(), RuleError> {
        let (name, gens) = rest
            .split_once(':')
            .ok_or_else(|| err(line, "expected `kill <module>: <generators>`"))?;
        let (role, m) = self.module(line, name.trim())?;
        if *role == Role::Spectator {
            return Err(err(line, "the spectator factor has no quotient"));
        }
        let mut killed: Vec<u8> = m.killed.clone();
        for g in gens.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let i = m
                .index_of(g)
                .ok_or_else(|| err(line, format!("unknown generator `{g}` of `{}`", m.name)))?;
            killed.push(i);
        }
        killed.sort_unstable();
        killed.dedup();
        self.modules
            .get_mut(name.trim())
            .expect("declared")
            .1
            .killed = killed;
        Ok(())
    }

    fn kind(&self, line: usize, name: &str) -> Result<(CircleKind, &CircleModule), RuleError> {
        let (role, m) = self.module(line, name)?;
        match role {
            Role::Trivial => Ok((CircleKind::Trivial, m)),
            Role::Essential => Ok((CircleKind::Essential, m)),
            Role::Spectator => Err(err(line, "the spectator factor takes no part in rules")),
        }
    }

    /// Splits `AxB` into two declared module names.
    fn pair(&self, line: usize, s: &str) -> Result<(String, String), RuleError> {
        let found: Vec<(String, String)> = s
            .match_indices('x')
            .map(|(i, _)| (s[..i].to_string(), s[i + 1..].to_string()))
            .filter(|(a, b)| self.modules.contains_key(a) && self.modules.contains_key(b))
            .collect();
        match found.as_slice() {
            [p] => Ok(p.clone()),
            _ => Err(err(line, format!("cannot read `{s}` as <module>x<module>"))),
        }
    }

    fn tuple(
        &self,
        line: usize,
        text: &str,
        modules: &[&CircleModule],
    ) -> Result<Vec<u8>, RuleError> {
        let names: Vec<&str> = text.split('*').map(str::trim).collect();
        if names.len() != modules.len() {
            return Err(err(
                line,
                format!("`{text}` should have {} factor(s)", modules.len()),
            ));
        }
        names
            .iter()
            .zip(modules)
            .map(|(n, m)| {
                m.index_of(n)
                    .ok_or_else(|| err(line, format!("unknown generator `{n}` of `{}`", m.name)))
            })
            .collect()
    }

    fn rule(&mut self, line: usize, is_merge: bool, rest: &str) -> Result<(), RuleError> {
        let (head, body) = rest
            .split_once(':')
            .ok_or_else(|| err(line, "expected `<shape>: <rule>`"))?;
        let head: String = head.chars().filter(|c| !c.is_whitespace()).collect();
        let (lhs, rhs) = head
            .split_once("->")
            .ok_or_else(|| err(line, "shape needs `->`"))?;
        let (ins, outs) = if is_merge {
            let (a, b) = self.pair(line, lhs)?;
            (vec![a, b], vec![rhs.to_string()])
        } else {
            let (a, b) = self.pair(line, rhs)?;
            (vec![lhs.to_string()], vec![a, b])
        };
        let ins: Vec<(CircleKind, CircleModule)> = ins
            .iter()
            .map(|n| self.kind(line, n).map(|(k, m)| (k, m.clone())))
            .collect::<Result<_, _>>()?;
        let outs: Vec<(CircleKind, CircleModule)> = outs
            .iter()
            .map(|n| self.kind(line, n).map(|(k, m)| (k, m.clone())))
            .collect::<Result<_, _>>()?;
        use CircleKind::*;
        let kinds = |v: &[(CircleKind, CircleModule)]| v.iter().map(|x| x.0).collect::<Vec<_>>();
        // (map name, permutation of inputs, permutation of outputs) into stored order
        let (map_name, in_perm, out_perm): (&'static str, Vec<usize>, Vec<usize>) =
            match (is_merge, kinds(&ins).as_slice(), kinds(&outs).as_slice()) {
                (true, [Trivial, Trivial], [Trivial]) => ("merge", vec![0, 1], vec![0]),
                (true, [Trivial, Essential], [Essential]) => {
                    ("merge_essential", vec![0, 1], vec![0])
                }
                (true, [Essential, Trivial], [Essential]) => {
                    ("merge_essential", vec![1, 0], vec![0])
                }
                (false, [Trivial], [Trivial, Trivial]) => ("split", vec![0], vec![0, 1]),
                (false, [Essential], [Trivial, Essential]) => {
                    ("split_essential", vec![0], vec![0, 1])
                }
                (false, [Essential], [Essential, Trivial]) => {
                    ("split_essential", vec![0], vec![1, 0])
                }
                _ => {
                    return Err(err(
                        line,
                        format!("shape `{head}` does not preserve the essential count"),
                    ))
                }
            };
        let (src, tgt) = body
            .split_once("->")
            .ok_or_else(|| err(line, "rule needs `->`"))?;
        let in_mods: Vec<&CircleModule> = ins.iter().map(|x| &x.1).collect();
        let out_mods: Vec<&CircleModule> = outs.iter().map(|x| &x.1).collect();
        let input = self.tuple(line, src, &in_mods)?;
        let input: Vec<u8> = in_perm.iter().map(|&p| input[p]).collect();
        let tgt = tgt.trim();
        let mut terms = Vec::new();
        if tgt != "0" {
            for term in tgt.split('+') {
                let t = self.tuple(line, term, &out_mods)?;
                terms.push(out_perm.iter().map(|&p| t[p]).collect::<Vec<u8>>());
            }
        }
        if !self.defined.insert((map_name, input.clone())) {
            return Err(err(line, format!("`{}` defined twice", src.trim())));
        }
        let source: Vec<usize> = in_perm.iter().map(|&p| in_mods[p].rank()).collect();
        let target: Vec<usize> = out_perm.iter().map(|&p| out_mods[p].rank()).collect();
        let map = self
            .maps
            .entry(map_name)
            .or_insert_with(|| LocalMap::zero(&source, &target));
        map.set(&input, terms);
        Ok(())
    }
}

/// Parses a rule file. Validation is separate (see `check_table`).
pub fn parse_rules(text: &str) -> Result<RuleTable, RuleError> {
    let mut b = Builder {
        theory: None,
        modules: BTreeMap::new(),
        trivial: None,
        essential: None,
        spectator: None,
        defined: BTreeSet::new(),
        maps: BTreeMap::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (keyword, rest) = match body.find(|c: char| c.is_whitespace() || c == ':') {
            Some(p) => (&body[..p], body[p..].trim_start()),
            None => (body, ""),
        };
        match keyword {
            "theory" => {
                if rest.is_empty() || b.theory.is_some() {
                    return Err(err(line, "expected a single `theory <name>`"));
                }
                b.theory = Some(rest.to_string());
            }
            "trivial" => b.declare(line, Role::Trivial, rest)?,
            "essential" => b.declare(line, Role::Essential, rest)?,
            "spectator" => b.declare(line, Role::Spectator, rest)?,
            "kill" => b.kill(line, rest)?,
            "merge" => b.rule(line, true, rest)?,
            "split" => b.rule(line, false, rest)?,
            "onetoone" => {
                let value = rest.strip_prefix(':').map(str::trim);
                if value != Some("zero") {
                    return Err(err(line, "only `onetoone: zero` is supported"));
                }
            }
            other => return Err(err(line, format!("unknown keyword `{other}`"))),
        }
    }
    let last = text.lines().count().max(1);
    let module = |name: &Option<String>| name.as_ref().map(|n| b.modules[n].1.clone());
    let trivial = module(&b.trivial).ok_or_else(|| err(last, "no trivial module declared"))?;
    let essential = module(&b.essential);
    let spectator = module(&b.spectator);
    let (tr, er) = (
        trivial.rank(),
        essential.as_ref().map_or(0, CircleModule::rank),
    );
    let mut take = |name: &'static str, s: &[usize], t: &[usize]| {
        b.maps.remove(name).unwrap_or_else(|| LocalMap::zero(s, t))
    };
    let merge = take("merge", &[tr, tr], &[tr]);
    let split = take("split", &[tr], &[tr, tr]);
    let (merge_essential, split_essential) = if essential.is_some() {
        (
            Some(take("merge_essential", &[tr, er], &[er])),
            Some(take("split_essential", &[er], &[tr, er])),
        )
    } else {
        (None, None)
    };
    Ok(RuleTable {
        theory: b.theory.unwrap_or_else(|| "CUSTOM".to_string()),
        trivial,
        essential,
        spectator,
        merge,
        split,
        merge_essential,
        split_essential,
    })
}
