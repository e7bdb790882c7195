//! Batch verification of a directory of diagrams against `manifest.toml`.
//!
//! ```toml
//! [trefoil]
//! expect.kh = { value = 6, source = "computed" }
//! observed.e2 = { value = 12, source = "computed" }
//! ```
//! Entries are keyed by file stem. `expect` values must match; `observed`
//! values are reported only. Keys are `class`, `crossings`, the profile totals
//! `kh`, `khr`, `kh1`, `e2`, `e2_reduced`, or a check name (1 = pass).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use rp3kh::invariants::{verify, InvariantReport};

use crate::{load_for_verify, print_json, report_text, stem, Failure, Format};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Published,
    Trivial,
    Computed,
}

impl Source {
    fn name(self) -> &'static str {
        match self {
            Source::Published => "published",
            Source::Trivial => "trivial",
            Source::Computed => "computed",
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub value: u64,
    pub source: Source,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntrySpec {
    #[serde(default)]
    expect: BTreeMap<String, Expected>,
    #[serde(default)]
    observed: BTreeMap<String, Expected>,
}

#[derive(Serialize)]
struct Comparison {
    key: String,
    expected: u64,
    actual: Option<u64>,
    source: Source,
    pass: bool,
}

#[derive(Serialize)]
struct EntryResult {
    name: String,
    pass: bool,
    report: InvariantReport,
    expectations: Vec<Comparison>,
    observations: Vec<Comparison>,
}

const KEYS: [&str; 7] = ["class", "crossings", "kh", "khr", "kh1", "e2", "e2_reduced"];

fn actual(r: &InvariantReport, key: &str) -> Option<u64> {
    let total = |p: &Option<rp3kh::complex::RankProfile>| p.as_ref().map(|p| p.total as u64);
    match key {
        "class" => Some(r.class as u64),
        "crossings" => Some(r.crossings as u64),
        "kh" => total(&r.profiles.kh),
        "khr" => total(&r.profiles.khr),
        "kh1" => total(&r.profiles.kh1),
        "e2" => total(&r.profiles.e2),
        "e2_reduced" => total(&r.profiles.e2_reduced),
        _ => r.check(key).map(|c| c.pass as u64),
    }
}

fn compare(r: &InvariantReport, specs: &BTreeMap<String, Expected>) -> Vec<Comparison> {
    specs
        .iter()
        .map(|(key, e)| {
            let actual = actual(r, key);
            Comparison {
                key: key.clone(),
                expected: e.value,
                actual,
                source: e.source,
                pass: actual == Some(e.value),
            }
        })
        .collect()
}

fn read_manifest(dir: &Path) -> anyhow::Result<BTreeMap<String, EntrySpec>> {
    let path = dir.join("manifest.toml");
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn diagram_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for e in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "rpd") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn check_keys(name: &str, spec: &EntrySpec) -> anyhow::Result<()> {
    for key in spec.expect.keys().chain(spec.observed.keys()) {
        let known = KEYS.contains(&key.as_str()) || key.contains('-');
        if !known {
            bail!("manifest entry {name}: unknown key {key}");
        }
    }
    Ok(())
}

pub fn run(dir: &Path, format: Format) -> Result<(), Failure> {
    let manifest = read_manifest(dir)?;
    let files = diagram_files(dir)?;
    let names: Vec<String> = files.iter().map(|f| stem(f)).collect();
    for (name, spec) in &manifest {
        if !names.contains(name) {
            return Err(anyhow!("manifest entry {name} has no {name}.rpd").into());
        }
        check_keys(name, spec)?;
    }
    let diagrams = files
        .iter()
        .map(|f| load_for_verify(f))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let results: Vec<EntryResult> = diagrams
        .par_iter()
        .zip(names.par_iter())
        .map(|(d, name)| {
            let report = verify(d, name);
            let spec = manifest.get(name).cloned().unwrap_or_default();
            let expectations = compare(&report, &spec.expect);
            let observations = compare(&report, &spec.observed);
            let pass = report.passed() && expectations.iter().all(|c| c.pass);
            EntryResult {
                name: name.clone(),
                pass,
                report,
                expectations,
                observations,
            }
        })
        .collect();
    let pass = results.iter().all(|r| r.pass);
    match format {
        Format::Json => print_json(&json!({ "entries": results, "pass": pass })),
        Format::Csv => write_csv(&results)?,
        Format::Text => print!("{}", text(&results, pass)),
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn text(results: &[EntryResult], pass: bool) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&report_text(&r.report));
        for (kind, list) in [("expect", &r.expectations), ("observed", &r.observations)] {
            for c in list {
                let status = match (kind, c.pass) {
                    ("observed", _) => "note",
                    (_, true) => "pass",
                    _ => "FAIL",
                };
                let actual = c.actual.map_or("none".to_string(), |a| a.to_string());
                out.push_str(&format!(
                    "{status} {kind} {} = {} [{}], actual {actual}\n",
                    c.key,
                    c.expected,
                    c.source.name()
                ));
            }
        }
        out.push_str(&format!(
            "entry {} {}\n\n",
            r.name,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    out.push_str(&format!(
        "corpus {} entries {}\n",
        results.len(),
        if pass { "pass" } else { "FAIL" }
    ));
    out
}

fn write_csv(results: &[EntryResult]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record([
        "name",
        "class",
        "crossings",
        "kh",
        "khr",
        "kh1",
        "e2",
        "e2_reduced",
        "checks_passed",
        "checks_total",
        "expectations_passed",
        "expectations_total",
        "pass",
    ])?;
    for r in results {
        let cell = |key: &str| actual(&r.report, key).map_or(String::new(), |v| v.to_string());
        let checks = r.report.checks.iter().filter(|c| c.pass).count();
        let expect = r.expectations.iter().filter(|c| c.pass).count();
        let mut row = vec![r.name.clone()];
        row.extend(KEYS.iter().map(|k| cell(k)));
        row.extend([
            checks.to_string(),
            r.report.checks.len().to_string(),
            expect.to_string(),
            r.expectations.len().to_string(),
            r.pass.to_string(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
