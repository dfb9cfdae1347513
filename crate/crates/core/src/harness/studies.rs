//! Suite runs over a corpus, dilation and refinement studies, pointwise sweeps.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::case::{CaseName, InequalityCase};
use super::corpus::{generate_corpus, CorpusEntry, CorpusSpec};
use super::evaluate::{EvalSettings, Evaluator, RatioReport};
use crate::derivative::derivative_field;
use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction};
use crate::pointwise::{
    sample_points, LemmaFields, LemmaSweep, LocalInterpolation, PointwiseLemma, PointwiseReport,
};
use crate::seminorms::{maximal_function, Cutoff, RadiusGrid};

/// Evaluates every case on every function of matching dimension. Reports are
/// ordered case-major, then by corpus order.
pub fn evaluate_suite(
    cases: &[InequalityCase],
    corpus: &[CorpusEntry],
    settings: EvalSettings,
) -> Result<Vec<RatioReport>> {
    let per_function: Vec<Vec<Option<RatioReport>>> = corpus
        .par_iter()
        .map(|e| {
            let dim = e.function.domain().dim();
            let mut ev = Evaluator::new(&e.function, &e.spec.id, settings)?;
            cases
                .iter()
                .map(|c| {
                    if c.dim == dim {
                        ev.evaluate(c).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for ci in 0..cases.len() {
        for reports in &per_function {
            if let Some(r) = &reports[ci] {
                out.push(r.clone());
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseSummary {
    pub label: String,
    pub name: CaseName,
    pub n: usize,
    pub functions: usize,
    pub max_ratio: f64,
    pub argmax_function: Option<String>,
    pub violations: usize,
}

/// Per-case maximum ratio, in first-appearance order.
pub fn summarize(reports: &[RatioReport]) -> Vec<CaseSummary> {
    let mut order: Vec<String> = Vec::new();
    let mut by: BTreeMap<String, CaseSummary> = BTreeMap::new();
    for r in reports {
        let s = by.entry(r.label.clone()).or_insert_with(|| {
            order.push(r.label.clone());
            CaseSummary {
                label: r.label.clone(),
                name: r.case.name,
                n: r.n,
                functions: 0,
                max_ratio: 0.0,
                argmax_function: None,
                violations: 0,
            }
        });
        s.functions += 1;
        if r.violation {
            s.violations += 1;
        }
        if r.ratio > s.max_ratio || s.argmax_function.is_none() && r.ratio >= s.max_ratio {
            s.max_ratio = r.ratio;
            s.argmax_function = Some(r.function.clone());
        }
    }
    order.into_iter().map(|l| by.remove(&l).unwrap()).collect()
}

/// `|fine - coarse| / coarse`, 0 when both vanish.
pub fn relative_drift(coarse: f64, fine: f64) -> f64 {
    if coarse == fine {
        0.0
    } else if coarse == 0.0 {
        f64::INFINITY
    } else {
        (fine - coarse).abs() / coarse
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementRow {
    pub label: String,
    pub name: CaseName,
    pub coarse_n: usize,
    pub fine_n: usize,
    pub coarse: f64,
    pub fine: f64,
    pub drift: f64,
}

/// Max corpus ratio per case at `n` and `2n`.
pub fn refinement_study(
    cases: &[InequalityCase],
    specs: &[CorpusSpec],
    domain: &Domain,
    seed: u64,
    settings: EvalSettings,
) -> Result<Vec<RefinementRow>> {
    let fine_domain = domain.with_resolution(2 * domain.points_per_axis())?;
    let (coarse, _) = generate_corpus(specs, domain, seed)?;
    let (fine, _) = generate_corpus(specs, &fine_domain, seed)?;
    let a = summarize(&evaluate_suite(cases, &coarse, settings)?);
    let b = summarize(&evaluate_suite(cases, &fine, settings)?);
    Ok(a.into_iter()
        .zip(b)
        .map(|(a, b)| RefinementRow {
            drift: relative_drift(a.max_ratio, b.max_ratio),
            label: a.label,
            name: a.name,
            coarse_n: a.n,
            fine_n: b.n,
            coarse: a.max_ratio,
            fine: b.max_ratio,
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub label: String,
    pub function: String,
    pub scales: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `max / min` of the ratios over the scales.
    pub flatness: f64,
}

pub fn flatness(ratios: &[f64]) -> f64 {
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Ratios of `case` on `u(·/s)` for every `s`. Fails if a dilate leaves the
/// support box.
pub fn scaling_study(
    case: &InequalityCase,
    spec: &CorpusSpec,
    domain: &Domain,
    seed: u64,
    scales: &[f64],
    settings: EvalSettings,
) -> Result<ScalingRow> {
    if !spec.family.supports_dilation() && scales.iter().any(|&s| s != 1.0) {
        return Err(Error::Infeasible {
            case: format!("{}@{}", case.label(), spec.id),
            reason: format!("{} cannot be dilated", spec.family.name()),
        });
    }
    let functions = scales
        .iter()
        .map(|&s| spec.dilate(s).sample(domain, seed))
        .collect::<Result<Vec<_>>>()?;
    let ratios = functions
        .par_iter()
        .map(|u| Ok(Evaluator::new(u, &spec.id, settings)?.evaluate(case)?.ratio))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScalingRow {
        label: case.label(),
        function: spec.id.clone(),
        scales: scales.to_vec(),
        flatness: flatness(&ratios),
        ratios,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PointwiseSummary {
    pub lemma: PointwiseLemma,
    pub key: String,
    pub n: usize,
    pub evaluations: usize,
    pub max_ratio: f64,
    pub argmax_function: Option<String>,
    pub argmax_x: Option<Vec<f64>>,
    pub argmax_radius: Option<f64>,
    pub violations: usize,
}

/// Pointwise records tagged with the function they came from.
#[derive(Debug, Clone, Serialize)]
pub struct TaggedPointwise {
    pub function: String,
    pub n: usize,
    #[serde(flatten)]
    pub report: PointwiseReport,
}

fn pointwise_key(r: &PointwiseReport) -> String {
    match r.lemma {
        PointwiseLemma::InterpolationLocal => {
            serde_json::from_value::<InequalityCase>(r.params.clone())
                .map(|c| c.label())
                .unwrap_or_default()
        }
        _ => format!("k={},l={}", r.params["k"], r.params["l"]),
    }
}

/// Lemma and fractional-lemma ratios at `points` seeded locations for every
/// `(k, ℓ)` and every radius in `radii` (default: the infinite-cutoff ladder
/// of each grid), plus the local interpolation bound for the given theorem
/// cases (finite `ρ` only).
pub fn pointwise_study(
    corpus: &[CorpusEntry],
    orders: &[(usize, usize)],
    theorem_cases: &[InequalityCase],
    seed: u64,
    points: usize,
    settings: EvalSettings,
    radii: Option<&[f64]>,
) -> Result<Vec<TaggedPointwise>> {
    let per_function: Vec<Vec<TaggedPointwise>> = corpus
        .par_iter()
        .map(|e| pointwise_for_function(e, orders, theorem_cases, seed, points, settings, radii))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_function.into_iter().flatten().collect())
}

fn pointwise_for_function(
    e: &CorpusEntry,
    orders: &[(usize, usize)],
    theorem_cases: &[InequalityCase],
    seed: u64,
    points: usize,
    settings: EvalSettings,
    radii: Option<&[f64]>,
) -> Result<Vec<TaggedPointwise>> {
    let u = &e.function;
    let domain = *u.domain();
    let n = domain.points_per_axis();
    let xs = sample_points(&domain, seed, points);
    let ladder = RadiusGrid::new(&domain, Cutoff::Infinite, settings.radius_count)?;
    let sweep = radii.unwrap_or(ladder.radii());
    let tag = |report| TaggedPointwise {
        function: e.spec.id.clone(),
        n,
        report,
    };
    let mut out = Vec::new();
    for &(k, l) in orders {
        let fields = LemmaFields::new(u, k, l)?;
        let sweep = LemmaSweep::new(&fields, sweep)?;
        let reports = xs
            .par_iter()
            .map(|&x| sweep.evaluate(&fields, x))
            .collect::<Result<Vec<_>>>()?;
        let (a, b): (Vec<_>, Vec<_>) = reports.into_iter().flatten().unzip();
        out.extend(a.into_iter().map(tag));
        out.extend(b.into_iter().map(tag));
    }
    let cases: Vec<&InequalityCase> = theorem_cases
        .iter()
        .filter(|c| {
            c.dim == domain.dim()
                && !c.rho.is_infinite()
                && matches!(c.name, CaseName::Theorem1 | CaseName::Theorem2)
        })
        .collect();
    if !cases.is_empty() {
        let mut ev = Evaluator::new(u, &e.spec.id, settings)?;
        let mut maximal: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        // D_{σ,p}(D^k u) at the sample points, keyed by (k, σ, p) bits
        let mut fractional: BTreeMap<(usize, u64, u64), Vec<f64>> = BTreeMap::new();
        for c in cases {
            let top = if c.name == CaseName::Theorem1 {
                if !maximal.contains_key(&c.k) {
                    let dk = derivative_field(u, c.k)?;
                    maximal.insert(c.k, maximal_function(&domain, dk.magnitudes(), &ladder)?);
                }
                Some(maximal[&c.k].clone())
            } else {
                None
            };
            let camp = ev.campanato(c.lambda, c.l, c.rho)?;
            let li = LocalInterpolation::from_parts(u, c, camp, top)?;
            let tops = if c.name == CaseName::Theorem2 {
                let key = (c.k, c.sigma.unwrap_or(0.5).to_bits(), c.p.to_bits());
                if !fractional.contains_key(&key) {
                    let v = xs
                        .par_iter()
                        .map(|&x| li.top_at(x))
                        .collect::<Result<Vec<_>>>()?;
                    fractional.insert(key, v);
                }
                fractional[&key].clone()
            } else {
                xs.iter()
                    .map(|&x| li.top_at(x))
                    .collect::<Result<Vec<_>>>()?
            };
            let reports = xs
                .par_iter()
                .zip(&tops)
                .map(|(&x, &t)| li.ratio_with_top(x, t))
                .collect::<Result<Vec<_>>>()?;
            out.extend(reports.into_iter().map(tag));
        }
    }
    Ok(out)
}

/// Max ratio per `(lemma, key)`, keys in first-appearance order.
pub fn summarize_pointwise(reports: &[TaggedPointwise]) -> Vec<PointwiseSummary> {
    let mut order = Vec::new();
    let mut by: BTreeMap<(String, String), PointwiseSummary> = BTreeMap::new();
    for t in reports {
        let r = &t.report;
        let lemma = serde_json::to_string(&r.lemma).unwrap_or_default();
        let key = (lemma, pointwise_key(r));
        let s = by.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            PointwiseSummary {
                lemma: r.lemma,
                key: key.1.clone(),
                n: t.n,
                evaluations: 0,
                max_ratio: 0.0,
                argmax_function: None,
                argmax_x: None,
                argmax_radius: None,
                violations: 0,
            }
        });
        s.evaluations += 1;
        if r.violation {
            s.violations += 1;
        }
        if r.ratio > s.max_ratio {
            s.max_ratio = r.ratio;
            s.argmax_function = Some(t.function.clone());
            s.argmax_x = Some(r.x.clone());
            s.argmax_radius = r.radius;
        }
    }
    order.into_iter().map(|k| by.remove(&k).unwrap()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PointwiseDrift {
    pub lemma: PointwiseLemma,
    pub key: String,
    pub coarse_n: usize,
    pub fine_n: usize,
    pub coarse: f64,
    pub fine: f64,
    pub drift: f64,
}

/// Pointwise maxima at `n` and `2n` on the same physical sample points and
/// the same radii (the coarse ladder), so only the quadrature changes.
pub fn pointwise_refinement(
    specs: &[CorpusSpec],
    domain: &Domain,
    orders: &[(usize, usize)],
    theorem_cases: &[InequalityCase],
    seed: u64,
    points: usize,
    settings: EvalSettings,
) -> Result<Vec<PointwiseDrift>> {
    let fine_domain = domain.with_resolution(2 * domain.points_per_axis())?;
    let ladder = RadiusGrid::new(domain, Cutoff::Infinite, settings.radius_count)?;
    let run = |d: &Domain| -> Result<Vec<PointwiseSummary>> {
        let (corpus, _) = generate_corpus(specs, d, seed)?;
        Ok(summarize_pointwise(&pointwise_study(
            &corpus,
            orders,
            theorem_cases,
            seed,
            points,
            settings,
            Some(ladder.radii()),
        )?))
    };
    let a = run(domain)?;
    let b = run(&fine_domain)?;
    Ok(a.into_iter()
        .zip(b)
        .map(|(a, b)| PointwiseDrift {
            lemma: a.lemma,
            drift: relative_drift(a.max_ratio, b.max_ratio),
            key: a.key,
            coarse_n: a.n,
            fine_n: b.n,
            coarse: a.max_ratio,
            fine: b.max_ratio,
        })
        .collect())
}

/// Samples of the same function family at two resolutions, for callers that
/// need the grids themselves.
pub fn sample_pair(
    spec: &CorpusSpec,
    domain: &Domain,
    seed: u64,
) -> Result<(GridFunction, GridFunction)> {
    let fine = domain.with_resolution(2 * domain.points_per_axis())?;
    Ok((spec.sample(domain, seed)?, spec.sample(&fine, seed)?))
}
