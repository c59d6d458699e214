//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criteria that exercise the command line run the built binary.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::Value;

use nonloc::checks;
use nonloc::epr2;
use nonloc::polytope::{self, Caps};
use nonloc::scenario::boxes;
use nonloc::{quantum, stabilizer, Execution, Rational, Scalar, Scenario};

const SEED: u64 = 20_240_601;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, Box<dyn Fn() -> Check>);

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel).to_string_lossy().into_owned()
}

fn run_cli(args: &[&str]) -> Result<(Option<i32>, Value), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nonloc"))
        .args(args)
        .env_remove("NONLOC_CACHE_DIR")
        .output()
        .map_err(|e| format!("cannot run nonloc: {e}"))?;
    let doc = serde_json::from_slice(&out.stdout)
        .map_err(|e| format!("{args:?}: unreadable output ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok((out.status.code(), doc))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn mermin_exact_zero() -> Check {
    let (code, doc) = run_cli(&["--mode", "rational", "local-fraction", &fixture("behaviors/mermin_box.json")])?;
    ensure(code == Some(0), || format!("exit status {code:?}"))?;
    ensure(doc["mode"] == "rational", || format!("mode {}", doc["mode"]))?;
    ensure(doc["values"]["p_L"] == "0", || format!("p_L = {}", doc["values"]["p_L"]))?;
    ensure(doc["dual"]["verified"] == true, || "dual certificate not verified".into())?;
    ensure(doc["dual"]["value"] == "0", || format!("dual value {}", doc["dual"]["value"]))?;
    // independent re-check of the certificate in-process
    let (p, r) = epr2::local_fraction(&boxes::mermin_box::<Rational>(), Caps::default()).map_err(|e| e.to_string())?;
    ensure(r.model_weight.is_zero() && p.check_dual_certificate(&r), || "library re-check failed".into())?;
    Ok("p_L = 0, dual verified".into())
}

fn pr_and_deterministic() -> Check {
    let mut parts = Vec::new();
    for (file, want) in [("behaviors/pr_box.json", "0"), ("behaviors/deterministic_box.json", "1")] {
        let t = Instant::now();
        let (code, doc) = run_cli(&["--mode", "rational", "local-fraction", &fixture(file)])?;
        let took = t.elapsed();
        ensure(code == Some(0), || format!("{file}: exit status {code:?}"))?;
        ensure(doc["values"]["p_L"] == want, || format!("{file}: p_L = {}", doc["values"]["p_L"]))?;
        ensure(doc["dual"]["verified"] == true, || format!("{file}: dual not verified"))?;
        ensure(took < Duration::from_secs(1), || format!("{file}: {took:?} >= 1 s"))?;
        parts.push(format!("{want} ({:.2}s)", took.as_secs_f64()));
    }
    Ok(format!("PR p_L = {}, deterministic p_L = {}", parts[0], parts[1]))
}

fn tsirelson() -> Check {
    let b = quantum::tsirelson_box();
    let (p, r) = epr2::local_fraction(&b, Caps::default()).map_err(|e| e.to_string())?;
    let expected = 2.0 - 2f64.sqrt();
    ensure((r.model_weight - expected).abs() < 1e-6, || format!("p_L = {} vs {expected}", r.model_weight))?;
    ensure(p.check_dual_certificate(&r), || "dual certificate does not verify".into())?;
    // CHSH: local part scores ≤ 2, any no-signaling part ≤ 4
    let s = (b.correlator(&[0, 0]) + b.correlator(&[0, 1]) + b.correlator(&[1, 0]) - b.correlator(&[1, 1])).abs();
    let bound = (4.0 - s) / 2.0;
    ensure(r.model_weight <= bound + 1e-9, || format!("p_L {} exceeds CHSH bound {bound}", r.model_weight))?;
    ensure((r.model_weight - bound).abs() < 1e-6, || format!("p_L {} misses CHSH bound {bound}", r.model_weight))?;
    let (code, doc) = run_cli(&["local-fraction", &fixture("behaviors/tsirelson_box.json")])?;
    ensure(code == Some(0), || format!("cli exit status {code:?}"))?;
    let cli = doc["values"]["p_L"].as_f64().unwrap_or(f64::NAN);
    ensure((cli - expected).abs() < 1e-6, || format!("cli p_L = {cli}"))?;
    Ok(format!("p_L = {:.9}, |diff| = {:.1e}, CHSH bound {bound:.9}", r.model_weight, (r.model_weight - expected).abs()))
}

fn ns_vertices() -> Check {
    let sc = Scenario::uniform(2, 2, 2).map_err(|e| e.to_string())?;
    let ns = polytope::ns_polytope_vertices(&sc, Caps::default()).map_err(|e| e.to_string())?;
    ensure(ns.len() == 24, || format!("{} vertices", ns.len()))?;
    let deterministic = ns.vertices.iter().filter(|v| v.table().iter().all(|p| p.is_zero() || *p == Rational::one())).count();
    ensure(deterministic == 16, || format!("{deterministic} deterministic vertices"))?;
    let failing = ns.vertices.iter().filter(|v| !polytope::is_ns_vertex(v)).count();
    ensure(failing == 0, || format!("{failing} vertices fail the rank test"))?;
    ensure(ns.contains(&boxes::pr_box()), || "PR box missing".into())?;
    Ok("24 vertices, 16 deterministic, all extremal".into())
}

fn graph_states() -> Check {
    let mut parts = Vec::new();
    for m in 3..=6usize {
        let k = m.to_string();
        let (code, doc) = run_cli(&["certify-graph", "--m", &k])?;
        ensure(code == Some(0), || format!("K{m}: exit status {code:?}"))?;
        ensure(doc["verdict"] == "PASS", || format!("K{m}: verdict {}", doc["verdict"]))?;
        let pairs = doc["pairs"].as_array().ok_or("missing pairs")?;
        ensure(pairs.len() == m * (m - 1) / 2, || format!("K{m}: {} pairs", pairs.len()))?;
        for c in pairs {
            let leaves = c["leaves"].as_array().ok_or("missing leaves")?;
            ensure(c["verdict"] == "PASS", || format!("K{m}: pair {} {}", c["pair"], c["verdict"]))?;
            ensure(c["numerics"] == "exact", || format!("K{m}: numerics {}", c["numerics"]))?;
            ensure(leaves.len() == 1 << (m - 2), || format!("K{m}: pair {} has {} leaves", c["pair"], leaves.len()))?;
            ensure(leaves.iter().all(|l| l["maximally_entangled"] == true), || format!("K{m}: leaf not maximally entangled"))?;
        }
        let cover = &doc["theorem2"];
        ensure(cover["verdict"] == "PASS", || format!("K{m}: covering {}", cover["verdict"]))?;
        ensure(cover["claim"] == "p_NS = 1", || format!("K{m}: claim {}", cover["claim"]))?;
        let covered = cover["covering"].as_array().map_or(0, Vec::len);
        ensure(covered == (1 << (m - 1)) - 1, || format!("K{m}: {covered} bipartitions covered"))?;
        parts.push(format!("K{m}"));
    }
    Ok(format!("{} PASS with p_NS = 1 coverings", parts.join(", ")))
}

fn smolin() -> Check {
    let (ensemble, layout) = stabilizer::smolin_five_copies();
    ensure(ensemble.num_qubits() == 20 && ensemble.branches().len() == 1024, || "ensemble shape".into())?;
    ensure(layout.qubits.iter().all(|q| q.len() == 4), || "layout shape".into())?;
    let (code, doc) = run_cli(&["certify-smolin"])?;
    ensure(code == Some(0), || format!("exit status {code:?}"))?;
    ensure(doc["verdict"] == "PASS", || format!("verdict {}", doc["verdict"]))?;
    let pairs = doc["pairs"].as_array().ok_or("missing pairs")?;
    ensure(pairs.len() == 10, || format!("{} pairs", pairs.len()))?;
    for c in pairs {
        ensure(c["verdict"] == "PASS", || format!("pair {} {}", c["pair"], c["verdict"]))?;
        ensure(c["total_weight"] == "1", || format!("pair {} weight {}", c["pair"], c["total_weight"]))?;
    }
    let cover = &doc["theorem2"];
    let covered = cover["covering"].as_array().map_or(0, Vec::len);
    ensure(cover["verdict"] == "PASS" && covered == 15, || format!("covering {} over {covered}", cover["verdict"]))?;
    ensure(doc["negative_control"]["verdict"] == "FAIL", || "single-copy control did not FAIL".into())?;
    Ok("10/10 pairs PASS, 15 bipartitions covered, single-copy control FAIL".into())
}

fn suite(r: nonloc::Result<checks::SuiteReport>, min_cases: usize) -> Check {
    let r = r.map_err(|e| e.to_string())?;
    ensure(r.cases >= min_cases, || format!("only {} cases", r.cases))?;
    ensure(r.failures.is_empty(), || format!("{} of {} cases fail; first: {}", r.failures.len(), r.cases, r.failures[0]))?;
    Ok(format!("{}: {} cases", r.name, r.cases))
}

fn chained() -> Check {
    let rows = nonloc::certify::chained_sweep(&[2, 3, 4, 5], Caps::default(), Execution::default()).map_err(|e| e.to_string())?;
    let values: Vec<f64> = rows.iter().map(|r| r.p_l).collect();
    ensure(values.windows(2).all(|w| w[1] < w[0]), || format!("not strictly decreasing: {values:?}"))?;
    ensure((values[0] - (2.0 - 2f64.sqrt())).abs() < 1e-6, || format!("p_L(2) = {}", values[0]))?;
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    Ok(format!("p_L(2..5) = {}", shown.join(" > ")))
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("1 Mermin box p_L = 0 exactly", Duration::from_secs(5), Box::new(mermin_exact_zero)),
        ("2 PR box 0 / deterministic box 1", Duration::from_secs(2), Box::new(pr_and_deterministic)),
        ("3 Tsirelson box 2 - sqrt 2", Duration::from_secs(5), Box::new(tsirelson)),
        ("4 two-party NS vertices", Duration::from_secs(10), Box::new(ns_vertices)),
        ("5 complete graph states K3..K6", Duration::from_secs(30), Box::new(graph_states)),
        ("6 five-copy Smolin", Duration::from_secs(60), Box::new(smolin)),
        (
            "7 stabilizer/dense oracle",
            Duration::from_secs(60),
            Box::new(|| suite(checks::oracle_equivalence_suite(120, SEED, Execution::default()), 100)),
        ),
        ("8 chained sweep", Duration::from_secs(60), Box::new(chained)),
        (
            "9 cut-bound consistency",
            Duration::from_secs(120),
            Box::new(|| suite(checks::theorem2_consistency_suite(60, SEED, Execution::default()), 50)),
        ),
        (
            "10 conditioning",
            Duration::from_secs(60),
            Box::new(|| suite(checks::conditioning_suite(240, SEED, Execution::default()), 200)),
        ),
    ];
    let mut failed = 0;
    for (name, limit, check) in &criteria {
        let t = Instant::now();
        let outcome = check();
        let took = t.elapsed();
        let outcome = match outcome {
            Ok(detail) if took >= *limit => Err(format!("{detail}; took {:.2}s, limit {}s", took.as_secs_f64(), limit.as_secs())),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail}; {:.2}s)", took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({why}; {:.2}s)", took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
