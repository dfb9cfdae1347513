//! Acceptance run: one PASS/FAIL line per criterion at fixed tolerances.
//!
//! Criteria listed in `EXPECTED_FAILURES` are known to miss their
//! tolerance on this discretisation; they still print FAIL, but only an
//! unexpected failure makes the run exit non-zero.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use mclab::derivative::{derivative_field, DerivativeField};
use mclab::grid::Domain;
use mclab::harness::{
    beta_range_invariant, default_corpus, evaluate_suite, generate_corpus, invariant_suite,
    pointwise_refinement, relative_drift, scaling_study, summarize, CaseSummary, EvalSettings,
    InequalityCase, TestMatrix,
};
use mclab::polyfit::fit_points;
use mclab::seminorms::zeta::lattice_zeta;
use mclab::seminorms::{gagliardo_energy, gagliardo_parts, riesz_potential, sobolev_energy};

use common::{fubini_form, gaussian};

const EXPECTED_FAILURES: &[usize] = &[3, 4];

const SUITE_DRIFT: f64 = 0.10;
const FRACTIONAL_DRIFT: f64 = 0.15;
const FLATNESS: f64 = 1.15;
const POINTWISE_DRIFT: f64 = 0.15;
const RIESZ: f64 = 0.10;
const SOBOLEV: f64 = 0.02;
const EXPONENT: f64 = 0.07;
const RUNTIME_SECS: f64 = 600.0;

const COARSE: [(usize, usize); 2] = [(1, 256), (2, 128)];
const SCALING: [(usize, usize); 2] = [(1, 512), (2, 256)];

struct Outcome {
    passed: bool,
    detail: String,
}

fn domain(dim: usize, n: usize) -> Domain {
    Domain::new(dim, 4.0, n, 0.5).unwrap()
}

fn cases(dim: usize) -> Vec<InequalityCase> {
    TestMatrix::default().expand().for_dim(dim)
}

/// Invariants and the coarse suite summaries, which criterion 3 reuses.
fn invariants(coarse: &mut BTreeMap<usize, Vec<CaseSummary>>) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for (dim, n) in COARSE {
        let (corpus, _) = generate_corpus(&default_corpus(), &domain(dim, n), 0).unwrap();
        let cases = cases(dim);
        let settings = EvalSettings::default();
        let reports = evaluate_suite(&cases, &corpus, settings).unwrap();
        for r in invariant_suite(&corpus, &cases, settings, &reports, 0).unwrap() {
            checked += r.checked;
            if !r.passed {
                failures.push(format!(
                    "{}@{} N={dim}: {}",
                    r.invariant, r.function, r.detail
                ));
            }
        }
        coarse.insert(dim, summarize(&reports));
    }
    let secs = start.elapsed().as_secs_f64();
    let mut detail = format!(
        "{checked} comparisons at n=256 (1-D) / 128 (2-D) in {secs:.0} s on {} thread(s)",
        rayon::current_num_threads()
    );
    if let Some(f) = failures.first() {
        detail += &format!("; {} failures, first: {f}", failures.len());
    }
    if secs > RUNTIME_SECS {
        detail += &format!("; runtime over {RUNTIME_SECS} s");
    }
    Outcome {
        passed: failures.is_empty() && secs <= RUNTIME_SECS,
        detail,
    }
}

fn oracles() -> Outcome {
    let mut errors = Vec::new();
    for n in [256, 512] {
        let d = domain(2, n);
        let du = derivative_field(&gaussian(d, 0.6), 1).unwrap();
        let x = d.nearest([0.3, -0.2]);
        let direct = riesz_potential(&du, x, 1.0).unwrap();
        errors.push((direct - fubini_form(&du, x, 1.0)).abs() / direct);
    }
    let riesz_ok = errors[0] <= RIESZ && errors[1] <= RIESZ && errors[1] < errors[0];

    // two nonzero cells: the pair term and the exterior lattice sum
    let mut two_cell = 0.0f64;
    for (dim, n) in [(1usize, 32usize), (2, 16)] {
        let d = Domain::new(dim, 1.0, n, 0.5).unwrap();
        let h = d.spacing();
        let (i, j, cells) = if dim == 1 {
            (3, 10, 7.0)
        } else {
            (d.flat_index([2, 3]), d.flat_index([5, 7]), 5.0)
        };
        let (a, b) = (1.25, -0.5);
        let mut v = vec![0.0; d.len()];
        v[i] = a;
        v[j] = b;
        let f = DerivativeField::from_components(d, 0, vec![[0, 0]], vec![v]).unwrap();
        let (sigma, p) = (0.4, 1.7);
        let s = dim as f64 + sigma * p;
        let hn = h.powi(dim as i32);
        let dist = cells * h;
        let g = gagliardo_parts(&f, sigma, p).unwrap();
        let pairs = 2.0 * hn * hn * (a - b).abs().powf(p) / dist.powf(s);
        let ext = 2.0
            * hn
            * hn
            * (a.abs().powf(p) + b.abs().powf(p))
            * (lattice_zeta(dim, s) * h.powf(-s) - dist.powf(-s));
        two_cell = two_cell
            .max((g.active_pairs - pairs).abs() / pairs)
            .max((g.exterior - ext).abs() / ext);
    }

    // every 3-point ordering: the L¹ constant is the median
    let pts = [[-0.5, 0.0], [0.0, 0.0], [0.5, 0.0]];
    let mut median_ok = true;
    for data in [
        [0.0, 0.0, 1.0],
        [3.0, -1.0, 2.0],
        [5.0, 7.0, 6.0],
        [-2.0, 4.0, 4.0],
    ] {
        let mut sorted = data;
        sorted.sort_by(f64::total_cmp);
        let fit = fit_points(1, &pts, &data, 0, 1.0).unwrap();
        let residual = data.iter().map(|v| (v - sorted[1]).abs()).sum::<f64>() / 3.0;
        median_ok &= fit.coefficients == [sorted[1]] && fit.residual == residual;
    }
    Outcome {
        passed: riesz_ok && two_cell <= 1e-12 && median_ok,
        detail: format!(
            "riesz vs radial binning {:.2}% (n=256) -> {:.2}% (n=512); two-cell rel. error {two_cell:.1e}; 3-point median exact: {median_ok}",
            100.0 * errors[0],
            100.0 * errors[1]
        ),
    }
}

fn suite_refinement(coarse: &BTreeMap<usize, Vec<CaseSummary>>) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (dim, n) in COARSE {
        let (corpus, _) = generate_corpus(&default_corpus(), &domain(dim, 2 * n), 0).unwrap();
        let fine =
            summarize(&evaluate_suite(&cases(dim), &corpus, EvalSettings::default()).unwrap());
        let mut worst = [(0.0f64, String::new()), (0.0, String::new())];
        let mut over = 0;
        let mut infinite = 0;
        for (a, b) in coarse[&dim].iter().zip(&fine) {
            assert_eq!(a.label, b.label);
            if !(a.max_ratio.is_finite() && b.max_ratio.is_finite()) {
                infinite += 1;
                continue;
            }
            let fractional = a.name.is_fractional();
            let drift = relative_drift(a.max_ratio, b.max_ratio);
            let slot = &mut worst[fractional as usize];
            if drift > slot.0 {
                *slot = (drift, a.label.clone());
            }
            if drift
                > if fractional {
                    FRACTIONAL_DRIFT
                } else {
                    SUITE_DRIFT
                }
            {
                over += 1;
            }
        }
        passed &= over == 0 && infinite == 0;
        parts.push(format!(
            "N={dim} n={n}->{}: {} cases, {infinite} non-finite, {over} over tolerance, worst {:.1}% ({}), fractional worst {:.1}% ({})",
            2 * n,
            fine.len(),
            100.0 * worst[0].0,
            worst[0].1,
            100.0 * worst[1].0,
            worst[1].1
        ));
    }
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

fn flatness() -> Outcome {
    let spec = default_corpus()
        .into_iter()
        .find(|s| s.id == "gauss_w050")
        .unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for (dim, n) in SCALING {
        let d = domain(dim, n);
        let mut worst = (0.0f64, String::new());
        let mut over = 0;
        let mut count = 0;
        for c in cases(dim) {
            if !(c.name.is_dilation_invariant() && c.rho.is_infinite()) {
                continue;
            }
            let row =
                scaling_study(&c, &spec, &d, 0, &[0.5, 1.0, 2.0], EvalSettings::default()).unwrap();
            count += 1;
            if row.flatness > FLATNESS {
                over += 1;
            }
            if row.flatness > worst.0 {
                worst = (row.flatness, row.label);
            }
        }
        passed &= over == 0;
        parts.push(format!(
            "N={dim} n={n}: {count} cases, {over} over {FLATNESS}, worst {:.3} ({})",
            worst.0, worst.1
        ));
    }
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

fn pointwise() -> Outcome {
    let matrix = TestMatrix::default();
    let mut passed = true;
    let mut parts = Vec::new();
    for (dim, n) in COARSE {
        let rows = pointwise_refinement(
            &default_corpus(),
            &domain(dim, n),
            &matrix.orders,
            &cases(dim),
            0,
            50,
            EvalSettings::default(),
        )
        .unwrap();
        let finite = rows
            .iter()
            .all(|r| r.coarse.is_finite() && r.fine.is_finite());
        let worst = rows
            .iter()
            .max_by(|a, b| a.drift.total_cmp(&b.drift))
            .unwrap();
        passed &= finite && worst.drift <= POINTWISE_DRIFT;
        parts.push(format!(
            "N={dim} n={n}->{}: {} sweeps, finite: {finite}, worst drift {:.1}% ({:?} {})",
            2 * n,
            rows.len(),
            100.0 * worst.drift,
            worst.lemma,
            worst.key
        ));
    }
    let beta = beta_range_invariant(&matrix.expand().cases);
    passed &= beta.passed;
    parts.push(format!(
        "beta range on {} cases: {}",
        beta.checked, beta.passed
    ));
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

fn gaussian_oracles() -> Outcome {
    let w: f64 = 0.5;
    let u = gaussian(domain(1, 256), w);
    let exact = w * PI.sqrt() + PI.sqrt() / (2.0 * w);
    let e1 = (sobolev_energy(&u, 1, 0, 2.0, 1.0).unwrap() - exact).abs() / exact;
    let rho: f64 = 0.5;
    let exact = rho.powi(4) * 3.0 * PI.sqrt() / (4.0 * w.powi(3)) + w * PI.sqrt();
    let e2 = (sobolev_energy(&u, 2, 0, 2.0, rho).unwrap() - exact).abs() / exact;

    let (sigma, p) = (0.25, 2.0);
    let expected = 1.0 - sigma * p;
    let d = domain(1, 512);
    let energy = |w| {
        let f = derivative_field(&gaussian(d, w), 0).unwrap();
        gagliardo_energy(&f, sigma, p).unwrap()
    };
    let exponent = (energy(1.0) / energy(0.5)).log2();
    let e3 = (exponent - expected).abs() / expected;
    Outcome {
        passed: e1 <= SOBOLEV && e2 <= SOBOLEV && e3 <= EXPONENT,
        detail: format!(
            "sobolev energy errors {:.3}% (k=1), {:.3}% (k=2); Gagliardo exponent {exponent:.4} vs {expected} ({:.2}%)",
            100.0 * e1,
            100.0 * e2,
            100.0 * e3
        ),
    }
}

fn cli() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let config = r#"{
      "grid": {"N": 1, "n": 96, "L": 4, "m": 0.5},
      "matrix": {"N": [1], "orders": [[1, 0], [2, 1]], "p": [2], "q": [4],
                 "lambda": ["-l", 0, 7.5], "sigma": [0.5], "rho": [1, "INF"],
                 "cases": ["theorem1", "theorem2", "morrey_hom"], "extra": []}
    }"#;
    let run = |name: &str, text: &str, args: &[&str]| -> i32 {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        Command::new(env!("CARGO_BIN_EXE_mclab"))
            .arg("--config")
            .arg(&path)
            .args(args)
            .output()
            .unwrap()
            .status
            .code()
            .unwrap_or(-1)
    };
    let out = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    let (a, b) = (out("a"), out("b"));
    let mut checks = Vec::new();
    checks.push(("check", run("c.json", config, &["--out", &a, "check"]) == 0));
    checks.push((
        "check with 2 threads",
        run(
            "c.json",
            config,
            &["--out", &b, "--parallelism", "2", "check"],
        ) == 0,
    ));
    let same =
        |f: &str| fs::read(Path::new(&a).join(f)).ok() == fs::read(Path::new(&b).join(f)).ok();
    checks.push((
        "identical outputs",
        ["reports.jsonl", "summary.csv", "invariants.jsonl"]
            .iter()
            .all(|f| same(f)),
    ));
    let skipped = fs::read_to_string(Path::new(&a).join("skipped.json")).unwrap_or_default();
    checks.push((
        "out-of-range lambda skipped",
        skipped.contains("lambda=7.5"),
    ));
    checks.push((
        "corpus",
        run("c.json", config, &["--out", &a, "corpus"]) == 0,
    ));
    let dump = Path::new(&a).join("corpus/gauss_w050.grid");
    let text = fs::read_to_string(&dump).unwrap_or_default();
    fs::write(&dump, text.replacen("\n0\n", "\n0.0.0\n", 1)).unwrap();
    let with_dump = config.replacen(
        "\"grid\"",
        "\"corpus\": [{\"id\": \"g\", \"family\": \"grid_dump\", \"path\": \"a/corpus/gauss_w050.grid\"}], \"grid\"",
        1,
    );
    checks.push((
        "corrupted dump exits 2",
        run("d.json", &with_dump, &["--out", &b, "check"]) == 2,
    ));
    let margin = config.replace("\"m\": 0.5", "\"m\": 0.05");
    checks.push((
        "invalid margin exits 2",
        run("m.json", &margin, &["--out", &b, "check"]) == 2,
    ));
    let unknown = config.replacen('{', "{\"extra_key\": 0,", 1);
    checks.push((
        "unknown key exits 2",
        run("u.json", &unknown, &["--out", &b, "check"]) == 2,
    ));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Outcome {
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} end-to-end checks passed", checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut coarse = BTreeMap::new();
    let mut results = Vec::new();
    let mut record = |id: usize, name: &str, o: Outcome| {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let note = if !o.passed && EXPECTED_FAILURES.contains(&id) {
            " [known failure]"
        } else {
            ""
        };
        println!("criterion {id} ({name}): {status}{note}: {}", o.detail);
        results.push((id, o.passed));
    };
    record(1, "exact invariants", invariants(&mut coarse));
    record(2, "oracle equivalence", oracles());
    record(3, "ratio suite refinement", suite_refinement(&coarse));
    record(4, "dilation flatness", flatness());
    record(5, "pointwise sweeps", pointwise());
    record(6, "gaussian oracles", gaussian_oracles());
    record(7, "cli contract", cli());
    let unexpected: Vec<usize> = results
        .iter()
        .filter(|(id, ok)| !ok && !EXPECTED_FAILURES.contains(id))
        .map(|r| r.0)
        .collect();
    println!(
        "acceptance: {}/{} passed in {:.0} s",
        results.iter().filter(|r| r.1).count(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
