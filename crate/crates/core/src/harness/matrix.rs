//! Parameter matrix expanded into concrete inequality cases.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::case::{homogeneous_endpoint, CaseName, InequalityCase, MatrixPoint};
use crate::error::Error;
use crate::seminorms::Cutoff;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaChoice {
    Value(f64),
    Named(LambdaName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaName {
    #[serde(rename = "-l")]
    MinusL,
    #[serde(rename = "endpoint")]
    Endpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestMatrix {
    #[serde(rename = "N")]
    pub dims: Vec<usize>,
    /// `(k, ℓ)` pairs.
    pub orders: Vec<(usize, usize)>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub lambda: Vec<LambdaChoice>,
    pub sigma: Vec<f64>,
    pub rho: Vec<Cutoff>,
    pub cases: Vec<CaseName>,
    /// Fully specified extra cases, validated as given.
    pub extra: Vec<InequalityCase>,
}

impl Default for TestMatrix {
    fn default() -> Self {
        Self {
            dims: vec![1, 2],
            orders: vec![(1, 0), (2, 0), (2, 1)],
            p: vec![1.5, 2.0],
            q: vec![3.0, 4.0],
            lambda: vec![
                LambdaChoice::Named(LambdaName::MinusL),
                LambdaChoice::Value(0.0),
                LambdaChoice::Named(LambdaName::Endpoint),
            ],
            sigma: vec![0.5],
            rho: vec![Cutoff::Finite(0.5), Cutoff::Finite(1.0), Cutoff::Infinite],
            cases: CaseName::ALL.to_vec(),
            extra: vec![InequalityCase {
                // the only fractional critical exponent reachable at N <= 2
                name: CaseName::FracCritical,
                dim: 2,
                k: 1,
                l: 0,
                p: 1.2,
                q: 12.0,
                lambda: 2.0 / 1.2 - 1.5,
                sigma: Some(0.5),
                rho: Cutoff::Infinite,
            }],
        }
    }
}

/// A matrix combination that was not run, with the violated hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Skipped {
    pub case: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Expansion {
    pub cases: Vec<InequalityCase>,
    pub skipped: Vec<Skipped>,
}

impl Expansion {
    pub fn for_dim(&self, dim: usize) -> Vec<InequalityCase> {
        self.cases
            .iter()
            .filter(|c| c.dim == dim)
            .cloned()
            .collect()
    }
}

impl TestMatrix {
    pub fn points(&self) -> Vec<(MatrixPoint, bool)> {
        let mut out = Vec::new();
        for &dim in &self.dims {
            for &(k, l) in &self.orders {
                for &p in &self.p {
                    for &q in &self.q {
                        for &sigma in &self.sigma {
                            for &rho in &self.rho {
                                for &choice in &self.lambda {
                                    for fractional in [false, true] {
                                        let s = k as f64 + if fractional { sigma } else { 0.0 };
                                        let lambda = match choice {
                                            LambdaChoice::Value(v) => v,
                                            LambdaChoice::Named(LambdaName::MinusL) => {
                                                0.0 - l as f64
                                            }
                                            LambdaChoice::Named(LambdaName::Endpoint) => {
                                                homogeneous_endpoint(s, l, p, q)
                                            }
                                        };
                                        let m = MatrixPoint {
                                            dim,
                                            k,
                                            l,
                                            p,
                                            q,
                                            lambda,
                                            sigma,
                                            rho,
                                        };
                                        out.push((m, fractional));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Every named inequality instantiated at every matrix point, deduplicated
    /// by label. Fractional inequalities take the `k + σ` endpoint.
    pub fn expand(&self) -> Expansion {
        let mut seen = BTreeSet::new();
        let mut skipped = BTreeSet::new();
        let mut cases = Vec::new();
        let mut push = |c: InequalityCase, cases: &mut Vec<InequalityCase>| {
            if seen.insert(c.label()) {
                cases.push(c);
            }
        };
        for (m, fractional) in self.points() {
            for &name in &self.cases {
                if name.is_fractional() != fractional {
                    continue;
                }
                match InequalityCase::from_matrix(name, &m) {
                    Ok(c) => push(c, &mut cases),
                    Err(Error::Infeasible { case, reason }) => {
                        skipped.insert(Skipped { case, reason });
                    }
                    Err(e) => {
                        skipped.insert(Skipped {
                            case: format!("{name}@{m:?}"),
                            reason: e.to_string(),
                        });
                    }
                }
            }
        }
        for c in &self.extra {
            match c.validate() {
                Ok(()) => push(c.clone(), &mut cases),
                Err(e) => {
                    skipped.insert(Skipped {
                        case: c.label(),
                        reason: e.to_string(),
                    });
                }
            }
        }
        let ran: BTreeSet<String> = cases.iter().map(|c| c.label()).collect();
        let skipped = skipped
            .into_iter()
            .filter(|s| !ran.contains(&s.case))
            .collect();
        Expansion { cases, skipped }
    }
}
