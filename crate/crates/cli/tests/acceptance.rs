//! End-to-end acceptance suite. Each criterion runs in order, prints one
//! `[PASS]`/`[FAIL]` line with its runtime, and the test fails at the end
//! if any criterion failed or exceeded its time budget.
//!
//! Run with `cargo test -p pepin-cli --test acceptance`.

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use pepin::store::{DenseRows, SampleRows, SparseRows};
use pepin::{
    compute_thresh, count, exact_brute, exact_incexc, generate_random, parse_dnf, parse_dnf_with, poisson_pow2,
    Backend, CellValue, CounterConfig, CounterState, Cube, DnfFormula, Literal, ParseOptions, RandomSource,
    SampleStore,
};
use pepin_cli::{count_formula, verify_formula, CountOptions};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, u64, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn below(rng: &mut RandomSource, bound: u64) -> u64 {
    rng.next_uniform_bits(32) % bound
}

/// Random formula with mixed widths; repeated variables inside a cube
/// produce duplicates and, sometimes, contradictions.
fn random_mixed(rng: &mut RandomSource, max_n: u64, max_m: u64, max_width: u64) -> DnfFormula {
    let n = 1 + below(rng, max_n) as u32;
    let m = below(rng, max_m + 1);
    let cubes = (0..m)
        .map(|_| {
            let w = 1 + below(rng, max_width.min(u64::from(n)));
            (0..w)
                .map(|_| Literal::new(1 + below(rng, u64::from(n)) as u32, rng.next_bit()))
                .collect()
        })
        .collect();
    DnfFormula::new(n, cubes)
}

const SMALL: &[u8] = b"p dnf 4 3\n1 2 0\n-1 3 0\n2 -3 0\n";

fn c1_degenerate() -> Outcome {
    let cfg = CounterConfig::with_seed(1);
    let empty = parse_dnf(b"p dnf 5 0\n").unwrap();
    check(count(&empty, &cfg).unwrap().count == BigUint::ZERO, || "empty formula not 0".into())?;
    let contradictory = parse_dnf(b"p dnf 3 2\n1 -1 0\n2 3 -2 0\n").unwrap();
    check(contradictory.num_cubes() == 0 && contradictory.dropped_contradictions() == 2, || {
        "contradictions not dropped".into()
    })?;
    check(count(&contradictory, &cfg).unwrap().count == BigUint::ZERO, || {
        "all-contradictory formula not 0".into()
    })?;
    for n in [1u32, 64, 1000] {
        let text = format!("p dnf {n} 1\n0\n");
        let f = parse_dnf_with(text.as_bytes(), ParseOptions { allow_tautology: true }).unwrap();
        let got = count(&f, &cfg).unwrap().count;
        check(got == BigUint::from(1u32) << n, || format!("tautology at n={n} gave {got}"))?;
    }
    Ok("empty=0, contradictory=0, 2^n for n in {1,64,1000}".into())
}

fn c2_oracles() -> Outcome {
    let mut rng = RandomSource::new(2);
    let mut nonzero = 0;
    for i in 0..500 {
        let f = random_mixed(&mut rng, 16, 12, 6);
        let (a, b) = (exact_brute(&f).unwrap(), exact_incexc(&f).unwrap());
        check(a == b, || format!("formula {i}: brute {a} != incexc {b}"))?;
        nonzero += usize::from(a != BigUint::ZERO);
    }
    Ok(format!("500 formulas agree ({nonzero} with nonzero count)"))
}

fn c3_pac() -> Outcome {
    let mut rng = RandomSource::new(3);
    let opts = CountOptions::default();
    let mut worst = 1.0f64;
    let mut errors = Vec::new();
    for i in 0..20u64 {
        let n = 10 + below(&mut rng, 11) as u32;
        let width = 2 + below(&mut rng, 5) as usize;
        let m = 1 + below(&mut rng, 200) as usize;
        let f = generate_random(n, m, width, 1000 + i).unwrap();
        let s = verify_formula(Path::new("pac"), &f, 200, 1, &opts).map_err(|e| e.to_string())?;
        check(s.fraction_within >= 0.95, || {
            format!("formula {i} (n={n}, m={m}, w={width}): fraction {}", s.fraction_within)
        })?;
        worst = worst.min(s.fraction_within);
        errors.push(s.mean_relative_error);
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    check(mean <= 0.2, || format!("suite mean relative error {mean:.4}"))?;
    Ok(format!("min fraction within {worst:.3}, mean relative error {mean:.4}"))
}

fn c4_unbiased() -> Outcome {
    let f = parse_dnf(SMALL).unwrap();
    let exact = exact_brute(&f).unwrap();
    check(exact == BigUint::from(10u32), || format!("oracle gave {exact}"))?;
    let runs = 2000u64;
    let mean = (1..=runs)
        .map(|seed| count(&f, &CounterConfig::with_seed(seed)).unwrap().count.to_f64().unwrap())
        .sum::<f64>()
        / runs as f64;
    check((9.3..=10.7).contains(&mean), || format!("mean {mean:.4}"))?;
    Ok(format!("mean {mean:.4}"))
}

/// Half the L1 distance between an empirical histogram (last bin = tail)
/// and Poisson(lambda).
fn poisson_tv(hist: &[u64], lambda: f64) -> f64 {
    let total = hist.iter().sum::<u64>() as f64;
    let last = hist.len() - 1;
    let mut pmf = (-lambda).exp();
    let mut mass = 0.0;
    let mut l1 = 0.0;
    for (j, &h) in hist[..last].iter().enumerate() {
        l1 += (h as f64 / total - pmf).abs();
        mass += pmf;
        pmf *= lambda / (j + 1) as f64;
    }
    l1 += (hist[last] as f64 / total - (1.0 - mass).max(0.0)).abs();
    l1 / 2.0
}

fn c5_poisson() -> Outcome {
    let mut detail = Vec::new();
    let mut rng = RandomSource::new(5);
    for e in [-2i64, 0, 2, 4] {
        let mut hist = vec![0u64; 65];
        for _ in 0..1_000_000 {
            hist[(poisson_pow2(e, &mut rng) as usize).min(64)] += 1;
        }
        let tv = poisson_tv(&hist, 2f64.powi(e as i32));
        check(tv <= 0.005, || format!("e={e}: TV {tv:.5}"))?;
        detail.push(format!("TV(e={e})={tv:.4}"));
    }

    // Poisson(4) + Poisson(4) against Poisson(8): two-sample chi-square
    let draws = 100_000;
    let (mut sum, mut direct) = (vec![0u64; 40], vec![0u64; 40]);
    for _ in 0..draws {
        let s = poisson_pow2(2, &mut rng) + poisson_pow2(2, &mut rng);
        sum[(s as usize).min(39)] += 1;
        direct[(poisson_pow2(3, &mut rng) as usize).min(39)] += 1;
    }
    // pool sparse cells so every expected count is at least 5
    let (mut cells, mut acc) = (Vec::new(), (0u64, 0u64));
    for (a, b) in sum.iter().zip(&direct) {
        acc = (acc.0 + a, acc.1 + b);
        if acc.0 + acc.1 >= 10 {
            cells.push(acc);
            acc = (0, 0);
        }
    }
    if let Some(last) = cells.last_mut() {
        *last = (last.0 + acc.0, last.1 + acc.1);
    }
    let total = 2.0 * draws as f64;
    let stat: f64 = cells
        .iter()
        .map(|&(a, b)| {
            let expected = (a + b) as f64 * draws as f64 / total;
            (a as f64 - expected).powi(2) / expected + (b as f64 - expected).powi(2) / expected
        })
        .sum();
    let p = ChiSquared::new((cells.len() - 1) as f64).unwrap().sf(stat);
    check(p >= 0.001, || format!("additivity chi-square p={p:.5}"))?;
    detail.push(format!("additivity p={p:.3}"));

    // one width-3 cube over 10 variables at k=5: |X| ~ Poisson(2^7 / 2^5)
    let cube = Cube::new(vec![Literal::new(2, true), Literal::new(5, false), Literal::new(9, true)]).unwrap();
    let runs = 100_000u64;
    let mut hist = vec![0u64; 33];
    for seed in 0..runs {
        let mut state = CounterState::<DenseRows>::new(10, 79, seed).unwrap().with_initial_k(5);
        state.process_cube(&cube).map_err(|e| e.to_string())?;
        check(state.k() == 5, || format!("seed {seed}: k moved to {}", state.k()))?;
        hist[state.size().min(32)] += 1;
    }
    let tv = poisson_tv(&hist, 4.0);
    check(tv <= 0.02, || format!("pinned-k |X| TV {tv:.4}"))?;
    detail.push(format!("pinned-k TV={tv:.4}"));
    Ok(detail.join(", "))
}

fn c6_backends() -> Outcome {
    let mut rng = RandomSource::new(6);
    let mut sizes = 0u64;
    for i in 0..100u64 {
        let n = 4 + below(&mut rng, 2000) as u32;
        let width = 1 + below(&mut rng, u64::from(n.min(8))) as usize;
        let m = 1 + below(&mut rng, 300) as usize;
        let f = generate_random(n, m, width, i).unwrap();
        let seed = rng.next_uniform_bits(64);
        let report = |backend| {
            let opts = CountOptions { seed, backend, ..CountOptions::default() };
            count_formula(Path::new("pair.dnf"), &f, &opts).unwrap()
        };
        let (dense, sparse) = (report(Backend::Dense), report(Backend::Sparse));
        check(dense.canonical_json() == sparse.canonical_json(), || {
            format!("pair {i}: {} vs {}", dense.canonical_json(), sparse.canonical_json())
        })?;
        sizes += dense.final_size;
    }
    Ok(format!("100 identical report pairs (mean final size {:.1})", sizes as f64 / 100.0))
}

fn c7_thresh() -> Outcome {
    let a = compute_thresh(0.8, 0.36, 300).unwrap();
    let b = compute_thresh(0.8, 0.36, 100_000).unwrap();
    check((a, b) == (79, 86), || format!("got {a} and {b}"))?;
    Ok("79 and 86".into())
}

fn c8_performance() -> Outcome {
    let dir = TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_pepin");
    let mut detail = Vec::new();
    for (size, limit) in [(10_000u32, 10u64), (100_000, 120)] {
        let path = dir.path().join(format!("perf{size}.dnf"));
        let gen = Command::new(bin)
            .args(["gen", "--vars", &size.to_string(), "--cubes", &size.to_string(), "--width", "3"])
            .args(["--seed", "8", "-o"])
            .arg(&path)
            .output()
            .unwrap();
        check(gen.status.success(), || "gen failed".into())?;

        let start = Instant::now();
        let out = Command::new(bin)
            .args(["count", "--seed", "1", "--json", "--mem-stats", "--backend", "dense"])
            .arg(&path)
            .output()
            .unwrap();
        let elapsed = start.elapsed();
        check(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
        check(elapsed < Duration::from_secs(limit), || format!("n={size} took {elapsed:.2?}"))?;

        let stats: serde_json::Value = serde_json::from_slice(&out.stderr).map_err(|e| e.to_string())?;
        let payload = stats["payload_bytes"].as_u64().unwrap();
        let delta = stats["peak_rss_delta_bytes"]
            .as_u64()
            .ok_or_else(|| "peak RSS unavailable on this platform".to_string())?;
        check(delta < 3 * payload, || format!("n={size}: peak RSS delta {delta} vs payload {payload}"))?;
        detail.push(format!("n={size}: {elapsed:.2?}, rss +{delta} B / payload {payload} B"));
    }
    Ok(detail.join("; "))
}

/// Drives a store with random operations and checks it against a shadow
/// copy of every occupied row.
fn store_fuzz<R: SampleRows>(ops: usize, seed: u64) -> Result<(), String> {
    const N: usize = 24;
    const CAP: usize = 64;
    let mut store = SampleStore::<R>::new(CAP, N).unwrap();
    let mut shadow: Vec<Option<Vec<CellValue>>> = vec![None; CAP];
    let mut freed: Vec<usize> = Vec::new();
    let mut drive = RandomSource::new(seed);
    let mut rng = RandomSource::new(seed ^ 0x5eed);

    let random_cube = |drive: &mut RandomSource| loop {
        let w = 1 + below(drive, 5);
        let lits = (0..w).map(|_| Literal::new(1 + below(drive, N as u64) as u32, drive.next_bit())).collect();
        if let Some(c) = Cube::new(lits) {
            return c;
        }
    };
    let row_matches = |store: &SampleStore<R>, slot: usize, row: &[CellValue]| -> Result<(), String> {
        for (v, &want) in row.iter().enumerate() {
            check(store.cell(slot, v) == want, || format!("slot {slot} var {v}: write-once violated"))?;
        }
        Ok(())
    };
    // materialises MARK cells of the cube in the shadow; fixed cells must persist
    let absorb = |store: &SampleStore<R>, slot: usize, row: &mut Vec<CellValue>, cube: &Cube| -> Result<bool, String> {
        let mut agrees = true;
        for lit in cube.literals() {
            let v = lit.index();
            let now = store.cell(slot, v);
            check(!now.is_mark(), || format!("slot {slot} var {v} still MARK after check"))?;
            check(row[v].is_mark() || row[v] == now, || format!("slot {slot} var {v} rewritten"))?;
            row[v] = now;
            agrees &= (now == CellValue::True) == lit.is_positive();
        }
        Ok(agrees)
    };

    for op in 0..ops {
        let occupied: Vec<usize> = (0..CAP).filter(|&s| shadow[s].is_some()).collect();
        let pick = below(&mut drive, 1000);
        match pick {
            0..=399 => {
                let cube = random_cube(&mut drive);
                match store.append_lazy(&cube) {
                    Ok(slot) => {
                        check(shadow[slot].is_none(), || format!("op {op}: slot {slot} handed out twice"))?;
                        if let Some(&last) = freed.last() {
                            check(slot == last, || format!("op {op}: expected reuse of slot {last}, got {slot}"))?;
                            freed.pop();
                        }
                        let mut row = vec![CellValue::Mark; N];
                        for lit in cube.literals() {
                            row[lit.index()] = CellValue::from_bool(lit.is_positive());
                        }
                        row_matches(&store, slot, &row)?;
                        shadow[slot] = Some(row);
                    }
                    Err(_) => check(occupied.len() == CAP, || format!("op {op}: append failed while not full"))?,
                }
            }
            400..=699 if !occupied.is_empty() => {
                let slot = occupied[below(&mut drive, occupied.len() as u64) as usize];
                let cube = random_cube(&mut drive);
                let got = store.check_materialize(slot, &cube, &mut rng);
                let row = shadow[slot].as_mut().unwrap();
                let want = absorb(&store, slot, row, &cube)?;
                check(got == want, || format!("op {op}: check result disagrees with cells"))?;
                row_matches(&store, slot, row)?;
            }
            700..=989 if !occupied.is_empty() => {
                let slot = occupied[below(&mut drive, occupied.len() as u64) as usize];
                store.remove(slot);
                shadow[slot] = None;
                freed.push(slot);
            }
            990..=994 => {
                store.thin_half(&mut rng);
                for &slot in &occupied {
                    if !store.is_occupied(slot) {
                        shadow[slot] = None;
                        freed.push(slot);
                    }
                }
            }
            995..=999 => {
                let cube = random_cube(&mut drive);
                let removed = store.scan_remove_satisfying(&cube, &mut rng);
                let mut seen = 0;
                for &slot in &occupied {
                    if store.is_occupied(slot) {
                        let row = shadow[slot].as_mut().unwrap();
                        let agrees = absorb(&store, slot, row, &cube)?;
                        check(!agrees, || format!("op {op}: satisfying sample {slot} survived the scan"))?;
                    } else {
                        seen += 1;
                        shadow[slot] = None;
                        freed.push(slot);
                    }
                }
                check(seen == removed, || format!("op {op}: scan reported {removed}, removed {seen}"))?;
            }
            _ => {}
        }

        let live = shadow.iter().filter(|r| r.is_some()).count();
        check(store.len() == live && store.free_slots() == CAP - live, || {
            format!("op {op}: len {} free {} but {live} live", store.len(), store.free_slots())
        })?;
        if op % 4096 == 0 {
            for (slot, row) in shadow.iter().enumerate() {
                check(store.is_occupied(slot) == row.is_some(), || format!("op {op}: occupancy of {slot}"))?;
                if let Some(row) = row {
                    row_matches(&store, slot, row)?;
                }
            }
        }
    }
    Ok(())
}

fn c9_store() -> Outcome {
    store_fuzz::<DenseRows>(1_000_000, 9)?;
    store_fuzz::<SparseRows>(1_000_000, 9)?;
    Ok("10^6 operations per backend".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("C1", "degenerate formulas are exact", 1, c1_degenerate),
        ("C2", "exact oracles agree", 60, c2_oracles),
        ("C3", "PAC guarantee", 600, c3_pac),
        ("C4", "unbiased on a 4-variable formula", 120, c4_unbiased),
        ("C5", "Poisson sampling law", 300, c5_poisson),
        ("C6", "dense and sparse reports identical", 120, c6_backends),
        ("C7", "Thresh values", 1, c7_thresh),
        ("C8", "performance and memory", 130, c8_performance),
        ("C9", "store invariants under fuzzing", 60, c9_store),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()))
            .and_then(|detail| {
                let elapsed = start.elapsed();
                if elapsed > Duration::from_secs(limit) {
                    Err(format!("{detail}; over the {limit} s budget"))
                } else {
                    Ok(detail)
                }
            });
        let elapsed = start.elapsed();
        // written to the raw handle so the lines show even under output capture
        let line = match outcome {
            Ok(detail) => format!("[PASS] {id} {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                failed.push(id);
                format!("[FAIL] {id} {name} ({elapsed:.2?}): {why}")
            }
        };
        writeln!(std::io::stdout().lock(), "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
