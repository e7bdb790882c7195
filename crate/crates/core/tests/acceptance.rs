//! Acceptance suite: one pass/fail line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rp3kh::complex::{assemble, homology_by_height, Direction};
use rp3kh::cube::{build_cube, edge_kind_census, Vertex};
use rp3kh::diagram::braid::{closure, marked_closure, Closure};
use rp3kh::diagram::{
    crossingless, disjoint_union, link_class, mirror, parse_rpd, Diagram, LinkClass,
};
use rp3kh::invariants::{
    blocks_match, e2_page, instanton_e1, kh, kh1, kh1_complex, kh_complex, marked, verify,
};
use rp3kh::linalg::{rank_f2, rank_reference, SparseMatrix};
use rp3kh::rules::{builtin_table, CircleKind, Theory};

const ANCHOR_LIMIT: Duration = Duration::from_millis(1);
const VERIFY_LIMIT: Duration = Duration::from_secs(60);
const MEMORY_LIMIT_KIB: u64 = 4 * 1024 * 1024;
/// Allowed growth of assembly time per N·2^N between 10 and 14 crossings.
const SCALING_SLACK: f64 = 4.0;
const MATRICES_PER_SIZE: usize = 1000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus() -> Vec<(String, Diagram)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "rpd"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let d = parse_rpd(&std::fs::read_to_string(&p).unwrap()).unwrap();
            (name, d)
        })
        .collect()
}

fn entry(name: &str) -> Diagram {
    corpus().into_iter().find(|(n, _)| n == name).unwrap().1
}

fn median_time(mut f: impl FnMut()) -> Duration {
    let mut t: Vec<Duration> = (0..5)
        .map(|_| {
            let s = Instant::now();
            f();
            s.elapsed()
        })
        .collect();
    t.sort();
    t[2]
}

fn unknot_anchors() -> Outcome {
    let u1 = parse_rpd("L w=0\nM L0").unwrap();
    let up = parse_rpd("L w=1\nM L0").unwrap();
    let mut details = Vec::new();
    for (name, d) in [("U1", &u1), ("U'", &up)] {
        let khr = kh(d, true).map_err(|e| e.to_string())?.total;
        let k = kh(d, false).map_err(|e| e.to_string())?.total;
        ensure(khr == 1 && k == 2, || format!("{name}: khr {khr}, kh {k}"))?;
        let t = median_time(|| {
            kh(d, true).unwrap();
        });
        ensure(t < ANCHOR_LIMIT, || {
            format!("{name}: {t:?} exceeds {ANCHOR_LIMIT:?}")
        })?;
        details.push(format!("{name} khr 1 kh 2 in {t:?}"));
    }
    Ok(details.join(", "))
}

fn crossingless_scaling() -> Outcome {
    for n in 0..=6 {
        let un = crossingless(&vec![0; n]);
        let got = instanton_e1(&un, false)
            .map_err(|e| e.to_string())?
            .total_dim();
        ensure(got == 1 << (n + 1), || format!("U{n}: chain rank {got}"))?;
        let with = disjoint_union(&un, &crossingless(&[1])).unwrap();
        let got = instanton_e1(&with, false)
            .map_err(|e| e.to_string())?
            .total_dim();
        ensure(got == 1 << (n + 2), || {
            format!("U{n} + U': chain rank {got}")
        })?;
    }
    Ok("2^(n+1) and 2^(n+2) for n = 0..6".into())
}

fn class_zero_theorem() -> Outcome {
    let mut names = Vec::new();
    for (name, d) in corpus() {
        if link_class(&d) != LinkClass::Zero || d.crossing_count() > 8 {
            continue;
        }
        let d = marked(&d);
        let m = mirror(&d);
        for reduced in [false, true] {
            let e2 = e2_page(&d, reduced).map_err(|e| e.to_string())?;
            let km = kh(&m, reduced).map_err(|e| e.to_string())?.scaled(2);
            ensure(e2 == km, || {
                format!(
                    "{name} reduced={reduced}: e2 {:?} vs 2 x kh(mirror) {:?}",
                    e2.ranks, km.ranks
                )
            })?;
        }
        names.push(name);
    }
    ensure(names.len() >= 5, || {
        format!("only {} class-0 diagrams", names.len())
    })?;
    Ok(format!("{} diagrams: {}", names.len(), names.join(" ")))
}

fn class_one_blocks() -> Outcome {
    let mut names = Vec::new();
    for (name, d) in corpus() {
        if link_class(&d) != LinkClass::One {
            continue;
        }
        let d = marked(&d);
        let m = mirror(&d);
        for reduced in [false, true] {
            let e1 = instanton_e1(&d, reduced).map_err(|e| e.to_string())?;
            let mk = kh1_complex(&m, reduced).map_err(|e| e.to_string())?;
            // W generators wp, wm, wp', wm' form blocks (wp, wm) and (wp', wm').
            let split = |v: Vertex, labels: &[u8]| {
                let kinds = e1.factor_kinds(v);
                let mut block = 0;
                let mut out = labels.to_vec();
                for (l, k) in out.iter_mut().zip(kinds) {
                    if k == Some(CircleKind::Essential) {
                        block = (*l / 2) as usize;
                        *l %= 2;
                    }
                }
                (block, out)
            };
            blocks_match(&e1, &mk, 2, split)
                .map_err(|e| format!("{name} reduced={reduced}: {e}"))?;
            let e2 = e2_page(&d, reduced).map_err(|e| e.to_string())?;
            let k1 = kh1(&m, reduced).map_err(|e| e.to_string())?.scaled(2);
            ensure(e2 == k1, || {
                format!(
                    "{name} reduced={reduced}: e2 {:?} vs 2 x kh1(mirror) {:?}",
                    e2.ranks, k1.ranks
                )
            })?;
        }
        names.push(name);
    }
    ensure(names.len() >= 4, || {
        format!("only {} class-1 diagrams", names.len())
    })?;
    let kink = e2_page(&entry("uprime_kink"), false)
        .map_err(|e| e.to_string())?
        .total;
    ensure(kink == 4, || format!("kink e2 total {kink}"))?;
    Ok(format!(
        "{} diagrams: {}; kink e2 4",
        names.len(),
        names.join(" ")
    ))
}

fn rank_inequalities() -> Outcome {
    let mut count = 0;
    for (name, d) in corpus() {
        let r = verify(&d, &name);
        let p = &r.profiles;
        let total = |x: &Option<rp3kh::complex::RankProfile>| {
            x.as_ref()
                .map(|p| p.total)
                .ok_or(format!("{name}: missing profile"))
        };
        let (k, kr, e, er) = (
            total(&p.kh)?,
            total(&p.khr)?,
            total(&p.e2)?,
            total(&p.e2_reduced)?,
        );
        ensure(2 * k >= e, || format!("{name}: 2 x {k} < {e}"))?;
        ensure(2 * kr >= er, || {
            format!("{name}: 2 x {kr} < {er} (reduced)")
        })?;
        if r.class == 1 {
            let k1 = total(&p.kh1)?;
            ensure(k >= k1, || format!("{name}: kh {k} < kh1 {k1}"))?;
        }
        count += 1;
    }
    Ok(format!("{count} corpus diagrams"))
}

fn one_to_one_edges() -> Outcome {
    let d = entry("one_crossing");
    let cube = build_cube(&d).map_err(|e| e.to_string())?;
    let census = edge_kind_census(&cube);
    ensure(census.one_to_one == 1, || format!("census {census}"))?;
    let c = kh_complex(&d, false).map_err(|e| e.to_string())?;
    ensure(c.differentials.iter().all(|m| m.is_zero()), || {
        "KH0 differential is nonzero".into()
    })?;
    let e1 = instanton_e1(&d, false).map_err(|e| e.to_string())?;
    ensure(e1.differentials.iter().all(|m| m.is_zero()), || {
        "E1 differential is nonzero".into()
    })?;
    let total = kh(&d, false).map_err(|e| e.to_string())?.total;
    ensure(total == 4, || format!("kh total {total}"))?;
    Ok("1 one-to-one edge, zero differential, kh 4".into())
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> SparseMatrix {
    let dense: Vec<Vec<bool>> = match rng.gen_range(0..3) {
        0 => {
            let p = [0.01, 0.05, 0.2, 0.5][rng.gen_range(0..4)];
            (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_bool(p)).collect())
                .collect()
        }
        1 => {
            // Product of thin factors: rank at most r.
            let r = rng.gen_range(0..=rows.min(cols));
            let a: Vec<Vec<bool>> = (0..rows)
                .map(|_| (0..r).map(|_| rng.gen_bool(0.3)).collect())
                .collect();
            let b: Vec<Vec<bool>> = (0..r)
                .map(|_| (0..cols).map(|_| rng.gen_bool(0.3)).collect())
                .collect();
            (0..rows)
                .map(|i| {
                    (0..cols)
                        .map(|j| (0..r).fold(false, |acc, k| acc ^ (a[i][k] & b[k][j])))
                        .collect()
                })
                .collect()
        }
        _ => {
            // Sparse with repeated rows, like merge/split blocks.
            let base: Vec<Vec<bool>> = (0..rows.div_ceil(4))
                .map(|_| (0..cols).map(|_| rng.gen_bool(0.03)).collect())
                .collect();
            (0..rows)
                .map(|_| base[rng.gen_range(0..base.len())].clone())
                .collect()
        }
    };
    SparseMatrix::from_dense(&dense)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    for n in [16, 64, 256] {
        for i in 0..MATRICES_PER_SIZE {
            let cols = if i % 2 == 0 { n } else { rng.gen_range(1..=n) };
            let m = random_matrix(&mut rng, n, cols);
            let (fast, slow) = (rank_f2(&m), rank_reference(&m));
            ensure(fast == slow, || {
                format!("size {n} matrix {i}: rank_f2 {fast}, reference {slow}")
            })?;
        }
    }
    let mut complexes = 0;
    for (name, d) in corpus() {
        let d = marked(&d);
        let cube = build_cube(&d).map_err(|e| e.to_string())?;
        let theories: &[Theory] = match link_class(&d) {
            LinkClass::Zero => &[Theory::Kh0, Theory::Inst0],
            LinkClass::One => &[Theory::KhClass1, Theory::Kh1Class1, Theory::Inst1],
        };
        for &t in theories {
            for reduced in [false, true] {
                for dir in [Direction::Forward, Direction::Reversed] {
                    let c = assemble(&cube, &builtin_table(t), reduced, dir)
                        .map_err(|e| format!("{name} {t}: {e}"))?;
                    c.check_d_squared()
                        .map_err(|e| format!("{name} {t} reduced={reduced} {dir:?}: {e}"))?;
                    complexes += 1;
                }
            }
        }
    }
    Ok(format!(
        "{} matrices per size agree; d^2 = 0 on {complexes} complexes",
        MATRICES_PER_SIZE
    ))
}

fn invariance_pairs() -> Outcome {
    let p = |t: &str| parse_rpd(t).unwrap();
    let std = |n, w: &[i32]| marked_closure(n, w, Closure::Standard, 0);
    let proj = |n, w: &[i32], k| marked_closure(n, w, Closure::Projective, k);
    let pairs: Vec<(&str, Diagram, Diagram)> = vec![
        (
            "R1 positive kink on the unknot",
            p("L w=0\nM L0"),
            std(2, &[1]),
        ),
        (
            "R1 negative kink on the unknot",
            p("L w=0\nM L0"),
            std(2, &[-1]),
        ),
        (
            "R1 kink on the trefoil",
            std(2, &[1, 1, 1]),
            std(3, &[1, 1, 1, 2]),
        ),
        (
            "R2 on the two-component unlink",
            std(2, &[]),
            std(2, &[1, -1]),
        ),
        (
            "R3 on three strands",
            std(3, &[1, 2, 1]),
            std(3, &[2, 1, 2]),
        ),
        (
            "R2 on two projective lines",
            proj(2, &[1], 0),
            proj(2, &[1, -1, 1], 0),
        ),
        (
            "R2 on a class-1 projective closure",
            proj(3, &[1, -2], 1),
            proj(3, &[1, 2, -2, -2], 1),
        ),
        (
            "R3 on a class-1 projective closure",
            proj(3, &[1, 2, 1, -2], 0),
            proj(3, &[2, 1, 2, -2], 0),
        ),
        (
            "R1 kink on the projective unknot",
            p("L w=1\nM L0"),
            p("X 1 1 2 2\nW 1 1\nM 1"),
        ),
    ];
    for (name, a, b) in &pairs {
        ensure(link_class(a) == link_class(b), || {
            format!("{name}: classes differ")
        })?;
        for reduced in [false, true] {
            let (x, y) = (
                kh(a, reduced).map_err(|e| e.to_string())?,
                kh(b, reduced).map_err(|e| e.to_string())?,
            );
            ensure(x == y, || {
                format!(
                    "{name} reduced={reduced}: kh {:?} vs {:?}",
                    x.ranks, y.ranks
                )
            })?;
            if link_class(a) == LinkClass::One {
                let (x, y) = (
                    kh1(a, reduced).map_err(|e| e.to_string())?,
                    kh1(b, reduced).map_err(|e| e.to_string())?,
                );
                ensure(x == y, || {
                    format!(
                        "{name} reduced={reduced}: kh1 {:?} vs {:?}",
                        x.ranks, y.ranks
                    )
                })?;
            }
        }
    }
    Ok(format!("{} pairs", pairs.len()))
}

fn local_trefoil() -> Outcome {
    let d = marked(&entry("trefoil"));
    let p = kh(&d, false).map_err(|e| e.to_string())?;
    let ranks: Vec<(i32, usize)> = p.ranks.iter().map(|(&i, &r)| (i, r)).collect();
    ensure(p.total == 6 && ranks == [(0, 2), (2, 2), (3, 2)], || {
        format!("kh {ranks:?}")
    })?;
    let khr = kh(&d, true).map_err(|e| e.to_string())?.total;
    ensure(khr == 3, || format!("khr {khr}"))?;
    for reduced in [false, true] {
        let lib = homology_by_height(&kh_complex(&d, reduced).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let oracle = common::kh_by_height(&d, reduced);
        ensure(lib == oracle, || {
            format!("reduced={reduced}: library {lib:?}, oracle {oracle:?}")
        })?;
    }
    Ok("kh {0:2, 2:2, 3:2}, khr 3, oracle agrees".into())
}

fn peak_rss_kib() -> Option<u64> {
    let s = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = s.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn assembly_time(n: usize) -> f64 {
    let d = closure(3, &[1, -2].repeat(n / 2), Closure::Standard);
    let t = median_time(|| {
        let cube = build_cube(&d).unwrap();
        assemble(
            &cube,
            &builtin_table(Theory::Kh0),
            false,
            Direction::Forward,
        )
        .unwrap();
    });
    t.as_secs_f64() / (n as f64 * (1u64 << n) as f64)
}

fn performance() -> Outcome {
    let d = entry("alt14");
    ensure(d.crossing_count() == 14, || {
        "alt14 is not a 14-crossing diagram".into()
    })?;
    let start = Instant::now();
    let r = verify(&d, "alt14");
    let took = start.elapsed();
    ensure(r.passed(), || "verify reported failures".into())?;
    ensure(took < VERIFY_LIMIT, || format!("verify took {took:?}"))?;
    let rss = peak_rss_kib().ok_or("peak memory unavailable")?;
    ensure(rss < MEMORY_LIMIT_KIB, || format!("peak memory {rss} KiB"))?;
    let (small, large) = (assembly_time(10), assembly_time(14));
    let growth = large / small;
    ensure(growth <= SCALING_SLACK, || {
        format!("assembly time per N*2^N grew {growth:.2}x from N=10 to N=14")
    })?;
    Ok(format!(
        "verify in {took:.2?}, peak {} MiB, per-N*2^N growth {growth:.2}x",
        rss / 1024
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("unknot anchors", unknot_anchors),
        ("crossingless scaling", crossingless_scaling),
        (
            "class-0 E2 equals two copies of Kh of the mirror",
            class_zero_theorem,
        ),
        (
            "class-1 E1 splits into two copies of the mirror Kh1 complex",
            class_one_blocks,
        ),
        ("rank inequalities", rank_inequalities),
        ("1-to-1 bifurcations", one_to_one_edges),
        ("oracle equivalence and d^2 = 0", oracle_equivalence),
        ("invariance smoke suite", invariance_pairs),
        ("local trefoil regression", local_trefoil),
        ("14-crossing performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{took:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail} [{took:.2?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
