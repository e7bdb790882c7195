//! `rp3kh`: Khovanov and instanton E₂ computations for diagrams on RP².

mod corpus;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rp3kh::complex::{GradedComplex, RankProfile};
use rp3kh::cube::{build_cube, cube_json, resolution_json, Vertex};
use rp3kh::diagram::{crossing_signs, link_class, parse_rpd, validate, Diagram, Violation};
use rp3kh::invariants::{
    forward_homology, instanton_e1, kh1_complex, kh_complex, marked, reversed_homology, verify,
    InvariantReport,
};
use rp3kh::rules::{load_rule_file, render_rules, RuleError};

#[derive(Parser)]
#[command(
    name = "rp3kh",
    version,
    about = "Khovanov homology and instanton E2 pages for links in RP3"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the assembled complex (bases and matrix triplets) as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    dump_complex: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Link class, crossing count and components.
    Classify { file: PathBuf },
    /// Resolution cube census and edges, or one resolution.
    Cube {
        file: PathBuf,
        /// Vertex bitstring, crossing 0 first.
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Khovanov homology ranks by homological grading.
    Kh {
        file: PathBuf,
        #[arg(long)]
        reduced: bool,
        #[arg(long, value_enum, default_value = "kh")]
        variant: Variant,
    },
    /// Instanton E1 chain ranks, or E2 ranks with --e2.
    Instanton {
        file: PathBuf,
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        e2: bool,
    },
    /// All invariants and structural checks.
    Verify { file: PathBuf },
    /// Verify every .rpd file in a directory against its manifest.
    Corpus {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Rule table files.
    Rules {
        #[command(subcommand)]
        command: RulesCommand,
    },
}

#[derive(Subcommand)]
enum RulesCommand {
    /// Load a rule file and run the algebraic checks.
    Check(RuleFile),
}

#[derive(Args)]
struct RuleFile {
    file: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Kh,
    Kh1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Failure classes mapped to exit codes 2 and 1.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Check,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Classify { file } => classify(cli, file),
        Command::Cube { file, vertex } => cube(file, vertex.as_deref()),
        Command::Kh {
            file,
            reduced,
            variant,
        } => kh(cli, file, *reduced, *variant),
        Command::Instanton { file, reduced, e2 } => instanton(cli, file, *reduced, *e2),
        Command::Verify { file } => {
            let d = load_for_verify(file)?;
            let report = verify(&d, &stem(file));
            if cli.json {
                print_json(&serde_json::to_value(&report).expect("report serializes"));
            } else {
                print!("{}", report_text(&report));
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::Corpus { dir, format } => {
            let format = if cli.json { Format::Json } else { *format };
            corpus::run(dir, format)
        }
        Command::Rules {
            command: RulesCommand::Check(RuleFile { file }),
        } => rules_check(cli, file),
    }
}

pub fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read_diagram(path: &Path) -> anyhow::Result<Diagram> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_rpd(&text).with_context(|| format!("parsing {}", path.display()))
}

fn violation_error(path: &Path, v: &[Violation]) -> anyhow::Error {
    let lines: Vec<String> = v.iter().map(|v| format!("  {v}")).collect();
    anyhow!(
        "{} is not a valid diagram:\n{}",
        path.display(),
        lines.join("\n")
    )
}

/// Parses and validates a diagram; any violation is an input error.
pub fn load(path: &Path) -> anyhow::Result<Diagram> {
    let d = read_diagram(path)?;
    let v = validate(&d);
    if v.is_empty() {
        Ok(d)
    } else {
        Err(violation_error(path, &v))
    }
}

fn is_census_violation(v: &Violation) -> bool {
    matches!(
        v,
        Violation::EssentialCircleCount { .. } | Violation::OneToOneInClassOne { .. }
    )
}

/// As [`load`], but essential-circle violations are left for the census check.
pub fn load_for_verify(path: &Path) -> anyhow::Result<Diagram> {
    let d = read_diagram(path)?;
    let v: Vec<Violation> = validate(&d)
        .into_iter()
        .filter(|v| !is_census_violation(v))
        .collect();
    if v.is_empty() {
        Ok(d)
    } else {
        Err(violation_error(path, &v))
    }
}

pub fn print_json(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("JSON values serialize")
    );
}

pub fn profile_text(p: &RankProfile) -> String {
    let ranks: Vec<String> = p.ranks.iter().map(|(i, r)| format!("{i}:{r}")).collect();
    format!(
        "total {} ranks {} normalized {}",
        p.total,
        ranks.join(" "),
        p.normalized
    )
}

pub fn report_text(r: &InvariantReport) -> String {
    let mut out = format!(
        "diagram {}\nclass {}\ncrossings {}\n",
        r.diagram, r.class, r.crossings
    );
    if let Some(m) = &r.mark {
        out.push_str(&format!("mark {m}\n"));
    }
    let p = &r.profiles;
    for (name, prof) in [
        ("kh", &p.kh),
        ("khr", &p.khr),
        ("kh1", &p.kh1),
        ("e2", &p.e2),
        ("e2_reduced", &p.e2_reduced),
    ] {
        if let Some(prof) = prof {
            out.push_str(&format!("{name} {}\n", profile_text(prof)));
        }
    }
    for c in &r.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        out.push_str(&format!("{status} {}: {}\n", c.name, c.detail));
    }
    out
}

fn classify(cli: &Cli, file: &Path) -> Result<(), Failure> {
    let d = load(file)?;
    let class = link_class(&d).as_u8();
    let signs = crossing_signs(&d).ok();
    let v = json!({
        "diagram": stem(file),
        "class": class,
        "crossings": d.crossing_count(),
        "components": d.components().len(),
        "positive": signs.map(|s| s.0),
        "negative": signs.map(|s| s.1),
    });
    if cli.json {
        print_json(&v);
    } else {
        println!("class {class}");
        println!("crossings {}", d.crossing_count());
        println!("components {}", d.components().len());
        match signs {
            Some((p, n)) => println!("signs +{p} -{n}"),
            None => println!("signs unoriented"),
        }
    }
    Ok(())
}

fn cube(file: &Path, vertex: Option<&str>) -> Result<(), Failure> {
    let d = load(file)?;
    let c = build_cube(&d).map_err(|e| anyhow!(e))?;
    let v = match vertex {
        Some(bits) => {
            let v = Vertex::parse(bits)
                .filter(|_| bits.len() == c.crossings)
                .ok_or_else(|| anyhow!("vertex must be a bitstring of length {}", c.crossings))?;
            resolution_json(&c, v)
        }
        None => cube_json(&c),
    };
    print_json(&v);
    Ok(())
}

fn dump(cli: &Cli, c: &GradedComplex) -> Result<(), Failure> {
    if let Some(path) = &cli.dump_complex {
        let text = serde_json::to_string_pretty(&c.to_json()).expect("JSON values serialize");
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn emit_profile(
    cli: &Cli,
    file: &Path,
    invariant: &str,
    d: &Diagram,
    c: &GradedComplex,
    p: &RankProfile,
) {
    let mark = if c.reduced {
        marked(d).marked.map(|m| m.to_string())
    } else {
        None
    };
    if cli.json {
        print_json(&json!({
            "diagram": stem(file),
            "invariant": invariant,
            "theory": c.theory,
            "class": link_class(d).as_u8(),
            "mark": mark,
            "profile": p,
        }));
    } else {
        println!("{invariant} {} ({})", stem(file), c.theory);
        if let Some(m) = mark {
            println!("mark {m}");
        }
        println!("{}", profile_text(p));
    }
}

fn kh(cli: &Cli, file: &Path, reduced: bool, variant: Variant) -> Result<(), Failure> {
    let d = load(file)?;
    let (name, c) = match variant {
        Variant::Kh => (if reduced { "khr" } else { "kh" }, kh_complex(&d, reduced)),
        Variant::Kh1 => (
            if reduced { "kh1r" } else { "kh1" },
            kh1_complex(&d, reduced),
        ),
    };
    let c = c.map_err(|e| anyhow!(e))?;
    dump(cli, &c)?;
    let p = forward_homology(&d, &c).map_err(|e| anyhow!(e))?;
    emit_profile(cli, file, name, &d, &c, &p);
    Ok(())
}

fn instanton(cli: &Cli, file: &Path, reduced: bool, e2: bool) -> Result<(), Failure> {
    let d = load(file)?;
    let c = instanton_e1(&d, reduced).map_err(|e| anyhow!(e))?;
    dump(cli, &c)?;
    if e2 {
        let p = reversed_homology(&d, &c).map_err(|e| anyhow!(e))?;
        emit_profile(
            cli,
            file,
            if reduced { "e2_reduced" } else { "e2" },
            &d,
            &c,
            &p,
        );
        return Ok(());
    }
    let dims: Vec<usize> = (0..c.dims.len()).map(|h| c.dim(h)).collect();
    if cli.json {
        print_json(&json!({
            "diagram": stem(file),
            "invariant": if reduced { "e1_reduced" } else { "e1" },
            "theory": c.theory,
            "chain_rank": c.total_dim(),
            "dims": dims,
        }));
    } else {
        println!("e1 {} ({})", stem(file), c.theory);
        println!("chain_rank {}", c.total_dim());
        let dims: Vec<String> = dims
            .iter()
            .enumerate()
            .map(|(h, r)| format!("{h}:{r}"))
            .collect();
        println!("dims {}", dims.join(" "));
    }
    Ok(())
}

fn rules_check(cli: &Cli, file: &Path) -> Result<(), Failure> {
    match load_rule_file(file) {
        Ok(t) => {
            if cli.json {
                print_json(
                    &json!({ "file": file.display().to_string(), "theory": t.theory, "ok": true }),
                );
            } else {
                println!("ok {} ({})", file.display(), t.theory);
                print!("{}", render_rules(&t));
            }
            Ok(())
        }
        Err(e @ (RuleError::Io(_) | RuleError::Parse { .. } | RuleError::UnknownTheory(_))) => {
            Err(Failure::Input(anyhow!(e)))
        }
        Err(e) => {
            if cli.json {
                print_json(
                    &json!({ "file": file.display().to_string(), "ok": false, "error": e.to_string() }),
                );
            } else {
                println!("FAIL {}: {e}", file.display());
            }
            Err(Failure::Check)
        }
    }
}
