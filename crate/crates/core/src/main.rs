use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mclab::config::RunConfig;
use mclab::derivative::derivative_field;
use mclab::grid::{integral_pow, write_dump, Domain};
use mclab::harness::{
    evaluate_suite, generate_corpus, invariant_suite, pointwise_refinement, pointwise_study,
    refinement_study, scaling_study, summarize, summarize_pointwise, CorpusEntry, InequalityCase,
    Skipped,
};
use mclab::seminorms::{
    bmo_table, campanato_table, gagliardo_energy, morrey_table, sobolev_energy, CenterGrid,
    RadiusGrid, SeminormRecord, SeminormValue,
};
use mclab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mclab",
    version,
    about = "Morrey-Campanato functionals and interpolation checks on grids"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Grid points per axis (overrides `grid.n`).
    #[arg(long, global = true)]
    resolution: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the corpus, write grid dumps and a manifest.
    Corpus,
    /// Seminorm table for one corpus function.
    Norms {
        #[arg(long)]
        function: String,
    },
    /// Ratio reports for the whole matrix, plus invariant checks.
    Check,
    /// Dilation, refinement or pointwise studies.
    Study {
        #[arg(value_enum)]
        kind: StudyKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyKind {
    Scaling,
    Refinement,
    Pointwise,
    PointwiseRefinement,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply_overrides(cli.seed, cli.parallelism, cli.resolution, cli.out)?;
    if let Some(threads) = cfg.parallelism {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    fs::create_dir_all(&cfg.output_dir)?;
    match cli.command {
        Command::Corpus => corpus(&cfg),
        Command::Norms { function } => norms(&cfg, &function),
        Command::Check => check(&cfg),
        Command::Study { kind } => study(&cfg, kind),
    }
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn cases_for(cfg: &RunConfig) -> (Vec<InequalityCase>, Vec<Skipped>) {
    let e = cfg.matrix.expand();
    (e.for_dim(cfg.grid.dim), e.skipped)
}

fn sampled(cfg: &RunConfig) -> Result<(Domain, Vec<CorpusEntry>)> {
    let domain = cfg.domain()?;
    let (entries, _) = generate_corpus(&cfg.corpus, &domain, cfg.seed)?;
    Ok((domain, entries))
}

fn corpus(cfg: &RunConfig) -> Result<ExitCode> {
    let domain = cfg.domain()?;
    let (entries, mut manifest) = generate_corpus(&cfg.corpus, &domain, cfg.seed)?;
    let dir = out_path(cfg, "corpus");
    fs::create_dir_all(&dir)?;
    for (e, m) in entries.iter().zip(manifest.functions.iter_mut()) {
        let file = format!("{}.grid", e.spec.id);
        let mut w = BufWriter::new(File::create(dir.join(&file))?);
        write_dump(&e.function, &mut w)?;
        w.flush()?;
        m.file = Some(format!("corpus/{file}"));
    }
    write_json(&out_path(cfg, "manifest.json"), &manifest)?;
    eprintln!("wrote {} functions to {}", entries.len(), dir.display());
    Ok(ExitCode::SUCCESS)
}

fn norms(cfg: &RunConfig, id: &str) -> Result<ExitCode> {
    let domain = cfg.domain()?;
    let spec = cfg
        .corpus
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::Config(format!("no corpus function '{id}'")))?;
    let u = spec.sample(&domain, cfg.seed)?;
    let ns = &cfg.norms;
    let stride = cfg.center_stride;
    let centers = CenterGrid::new(stride)?;
    let mut rows: Vec<SeminormRecord> = Vec::new();
    for &rho in &ns.rho {
        let radii = RadiusGrid::new(&domain, rho, cfg.radius_count)?;
        for &q in &ns.q {
            let t = morrey_table(&u, q, &radii, &centers)?;
            for &lambda in &ns.lambda {
                let p = json!({ "q": q, "lambda": lambda, "rho": rho });
                rows.push(t.sup(lambda).record("morrey", p, &domain, stride));
            }
        }
        for &q in ns.q.iter().filter(|q| **q == 1.0 || **q == 2.0) {
            for &k in ns.k.iter().filter(|k| **k > 0) {
                let t = campanato_table(&u, q, k, &radii, &centers)?;
                for &lambda in &ns.lambda {
                    let p = json!({ "q": q, "k": k, "lambda": lambda, "rho": rho });
                    rows.push(t.sup(lambda).record("campanato", p, &domain, stride));
                }
            }
        }
        let t = bmo_table(&u, &radii, &centers)?;
        rows.push(
            t.sup(0.0)
                .record("bmo", json!({ "rho": rho }), &domain, stride),
        );
    }
    for &k in &ns.k {
        let dk = derivative_field(&u, k)?;
        for &p in &ns.p {
            let v = integral_pow(dk.magnitudes(), p, &domain).powf(1.0 / p);
            rows.push(SeminormValue::plain(v).record(
                "lp",
                json!({ "k": k, "p": p }),
                &domain,
                stride,
            ));
            for &sigma in &ns.sigma {
                let v = gagliardo_energy(&dk, sigma, p)?;
                let params = json!({ "k": k, "sigma": sigma, "p": p });
                rows.push(SeminormValue::plain(v).record("gagliardo", params, &domain, stride));
            }
            if k > 0 {
                for &rho in ns.rho.iter().filter(|r| !r.is_infinite()) {
                    let v = sobolev_energy(&u, k, 0, p, rho.value())?;
                    let params = json!({ "k": k, "l": 0, "p": p, "rho": rho });
                    rows.push(SeminormValue::plain(v).record(
                        "sobolev_energy",
                        params,
                        &domain,
                        stride,
                    ));
                }
            }
        }
    }
    let stem = format!("norms_{id}_n{}", domain.points_per_axis());
    write_jsonl(&out_path(cfg, &format!("{stem}.jsonl")), &rows)?;
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.functional.clone(),
                r.params.to_string(),
                num(r.value),
                r.grid.n.to_string(),
                r.argmax_radius.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(
        &out_path(cfg, &format!("{stem}.csv")),
        &["functional", "params", "value", "n", "argmax_radius"],
        table,
    )?;
    eprintln!("wrote {} rows for {id}", rows.len());
    Ok(ExitCode::SUCCESS)
}

fn check(cfg: &RunConfig) -> Result<ExitCode> {
    let (_, corpus) = sampled(cfg)?;
    let (cases, skipped) = cases_for(cfg);
    let settings = cfg.settings();
    let reports = evaluate_suite(&cases, &corpus, settings)?;
    write_jsonl(&out_path(cfg, "reports.jsonl"), &reports)?;
    let summary = summarize(&reports)
        .into_iter()
        .map(|s| {
            vec![
                s.label,
                s.name.as_str().to_string(),
                s.n.to_string(),
                s.functions.to_string(),
                num(s.max_ratio),
                s.argmax_function.unwrap_or_default(),
                s.violations.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out_path(cfg, "summary.csv"),
        &[
            "case",
            "name",
            "n",
            "functions",
            "max_ratio",
            "argmax_function",
            "violations",
        ],
        summary,
    )?;
    write_json(&out_path(cfg, "skipped.json"), &skipped)?;

    let invariants = invariant_suite(&corpus, &cases, settings, &reports, cfg.seed)?;
    write_jsonl(&out_path(cfg, "invariants.jsonl"), &invariants)?;
    let failed: Vec<_> = invariants.iter().filter(|r| !r.passed).collect();
    for r in &failed {
        eprintln!(
            "invariant {} failed on {} (n={}): worst {:e} > {:e}: {}",
            r.invariant, r.function, r.n, r.worst, r.tolerance, r.detail
        );
    }
    eprintln!(
        "{} reports, {} cases, {} skipped, {}/{} invariants passed",
        reports.len(),
        cases.len(),
        skipped.len(),
        invariants.len() - failed.len(),
        invariants.len()
    );
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn study(cfg: &RunConfig, kind: StudyKind) -> Result<ExitCode> {
    let (cases, _) = cases_for(cfg);
    let settings = cfg.settings();
    let domain = cfg.domain()?;
    match kind {
        StudyKind::Scaling => {
            let spec = match &cfg.study.function {
                Some(id) => cfg.corpus.iter().find(|s| &s.id == id),
                None => cfg.corpus.iter().find(|s| s.family.supports_dilation()),
            }
            .ok_or_else(|| Error::Config("no dilatable corpus function".into()))?;
            let mut rows = Vec::new();
            let mut skipped = Vec::new();
            for c in &cases {
                if !c.name.is_dilation_invariant() || !c.rho.is_infinite() {
                    continue;
                }
                match scaling_study(c, spec, &domain, cfg.seed, &cfg.study.scales, settings) {
                    Ok(r) => {
                        for (s, ratio) in r.scales.iter().zip(&r.ratios) {
                            rows.push(vec![
                                r.label.clone(),
                                r.function.clone(),
                                num(*s),
                                num(*ratio),
                                num(r.flatness),
                            ]);
                        }
                    }
                    Err(e @ (Error::Infeasible { .. } | Error::MarginViolation(_))) => {
                        skipped.push(Skipped {
                            case: format!("{}@{}", c.label(), spec.id),
                            reason: e.to_string(),
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
            write_csv(
                &out_path(cfg, "scaling.csv"),
                &["case", "function", "s", "ratio", "flatness"],
                rows,
            )?;
            write_json(&out_path(cfg, "scaling_skipped.json"), &skipped)?;
            eprintln!("scaling: {} skipped", skipped.len());
        }
        StudyKind::Refinement => {
            let rows = refinement_study(&cases, &cfg.corpus, &domain, cfg.seed, settings)?
                .into_iter()
                .map(|r| {
                    vec![
                        r.label,
                        r.name.as_str().to_string(),
                        r.coarse_n.to_string(),
                        r.fine_n.to_string(),
                        num(r.coarse),
                        num(r.fine),
                        num(r.drift),
                    ]
                })
                .collect();
            write_csv(
                &out_path(cfg, "refinement.csv"),
                &[
                    "case", "name", "coarse_n", "fine_n", "coarse", "fine", "drift",
                ],
                rows,
            )?;
        }
        StudyKind::Pointwise => {
            let (_, corpus) = sampled(cfg)?;
            let reports = pointwise_study(
                &corpus,
                &cfg.matrix.orders,
                &cases,
                cfg.seed,
                cfg.study.points,
                settings,
                None,
            )?;
            write_jsonl(&out_path(cfg, "pointwise.jsonl"), &reports)?;
            let rows = summarize_pointwise(&reports)
                .into_iter()
                .map(|s| {
                    vec![
                        format!("{:?}", s.lemma),
                        s.key,
                        s.n.to_string(),
                        s.evaluations.to_string(),
                        num(s.max_ratio),
                        s.argmax_function.unwrap_or_default(),
                        s.argmax_radius.map(num).unwrap_or_default(),
                        s.violations.to_string(),
                    ]
                })
                .collect();
            write_csv(
                &out_path(cfg, "pointwise_summary.csv"),
                &[
                    "lemma",
                    "key",
                    "n",
                    "evaluations",
                    "max_ratio",
                    "argmax_function",
                    "argmax_radius",
                    "violations",
                ],
                rows,
            )?;
        }
        StudyKind::PointwiseRefinement => {
            let rows = pointwise_refinement(
                &cfg.corpus,
                &domain,
                &cfg.matrix.orders,
                &cases,
                cfg.seed,
                cfg.study.points,
                settings,
            )?
            .into_iter()
            .map(|r| {
                vec![
                    format!("{:?}", r.lemma),
                    r.key,
                    r.coarse_n.to_string(),
                    r.fine_n.to_string(),
                    num(r.coarse),
                    num(r.fine),
                    num(r.drift),
                ]
            })
            .collect();
            write_csv(
                &out_path(cfg, "pointwise_refinement.csv"),
                &[
                    "lemma", "key", "coarse_n", "fine_n", "coarse", "fine", "drift",
                ],
                rows,
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
