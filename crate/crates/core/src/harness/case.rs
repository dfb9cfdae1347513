//! Inequality cases: named parameter tuples with their admissible ranges.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seminorms::Cutoff;

/// Slack for comparisons against interval endpoints computed in floating
/// point (`λ` at the homogeneous endpoint, critical exponents).
const ENDPOINT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    Theorem1,
    Theorem2,
    Sobolev,
    SobolevCritical,
    Lions,
    LionsDilation,
    MorreyCritical,
    Particular,
    LocalizedSobolev,
    GnSubscale,
    LionsHigher,
    LinfInterp,
    BmoGnLocal,
    MorreyHom,
    BmoGnHom,
    FracHom,
    FracCritical,
    FracBmo,
}

impl CaseName {
    pub const ALL: [CaseName; 18] = [
        CaseName::Theorem1,
        CaseName::Theorem2,
        CaseName::Sobolev,
        CaseName::SobolevCritical,
        CaseName::Lions,
        CaseName::LionsDilation,
        CaseName::MorreyCritical,
        CaseName::Particular,
        CaseName::LocalizedSobolev,
        CaseName::GnSubscale,
        CaseName::LionsHigher,
        CaseName::LinfInterp,
        CaseName::BmoGnLocal,
        CaseName::MorreyHom,
        CaseName::BmoGnHom,
        CaseName::FracHom,
        CaseName::FracCritical,
        CaseName::FracBmo,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CaseName::Theorem1 => "theorem1",
            CaseName::Theorem2 => "theorem2",
            CaseName::Sobolev => "sobolev",
            CaseName::SobolevCritical => "sobolev_critical",
            CaseName::Lions => "lions",
            CaseName::LionsDilation => "lions_dilation",
            CaseName::MorreyCritical => "morrey_critical",
            CaseName::Particular => "particular",
            CaseName::LocalizedSobolev => "localized_sobolev",
            CaseName::GnSubscale => "gn_subscale",
            CaseName::LionsHigher => "lions_higher",
            CaseName::LinfInterp => "linf_interp",
            CaseName::BmoGnLocal => "bmo_gn_local",
            CaseName::MorreyHom => "morrey_hom",
            CaseName::BmoGnHom => "bmo_gn_hom",
            CaseName::FracHom => "frac_hom",
            CaseName::FracCritical => "frac_critical",
            CaseName::FracBmo => "frac_bmo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Uses the Gagliardo energy of `D^k u` instead of `∫ |D^k u|^p`.
    pub fn is_fractional(&self) -> bool {
        matches!(
            self,
            CaseName::Theorem2 | CaseName::FracHom | CaseName::FracCritical | CaseName::FracBmo
        )
    }

    /// Invariant under `u ↦ u(·/s)`: every term scales by the same power.
    pub fn is_dilation_invariant(&self) -> bool {
        matches!(
            self,
            CaseName::SobolevCritical
                | CaseName::LionsDilation
                | CaseName::MorreyCritical
                | CaseName::MorreyHom
                | CaseName::BmoGnHom
                | CaseName::FracHom
                | CaseName::FracCritical
                | CaseName::FracBmo
        )
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One instance of an inequality: `N, k, ℓ, p, q, λ, σ, ρ`.
///
/// Parameters a named inequality does not use are normalised (`λ = 0`,
/// `ρ = INF`, no `σ`) so that equal instances compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityCase {
    pub name: CaseName,
    #[serde(rename = "N")]
    pub dim: usize,
    pub k: usize,
    pub l: usize,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub rho: Cutoff,
}

/// A raw matrix point before a named inequality fixes its own parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixPoint {
    pub dim: usize,
    pub k: usize,
    pub l: usize,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub rho: Cutoff,
}

impl InequalityCase {
    /// Order of the top derivative including the fractional part.
    pub fn smoothness(&self) -> f64 {
        self.k as f64 + self.sigma.unwrap_or(0.0)
    }

    /// `(s p - ℓ q) / (q - p)` with `s = k` or `k + σ`.
    pub fn endpoint(&self) -> f64 {
        homogeneous_endpoint(self.smoothness(), self.l, self.p, self.q)
    }

    /// Short identifier, stable across runs.
    pub fn label(&self) -> String {
        let mut s = format!(
            "{}[N={},k={},l={},p={},q={},lambda={}",
            self.name,
            self.dim,
            self.k,
            self.l,
            fmt_num(self.p),
            fmt_num(self.q),
            fmt_num(self.lambda)
        );
        if let Some(sigma) = self.sigma {
            s.push_str(&format!(",sigma={}", fmt_num(sigma)));
        }
        s.push_str(&format!(",rho={}]", self.rho));
        s
    }

    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::Infeasible {
            case: self.label(),
            reason: reason.into(),
        }
    }

    /// Checks the hypotheses of the named inequality.
    pub fn validate(&self) -> Result<()> {
        let (n, k, l, p, q, lambda) = (
            self.dim as f64,
            self.k as f64,
            self.l as f64,
            self.p,
            self.q,
            self.lambda,
        );
        if !(self.dim == 1 || self.dim == 2) {
            return Err(self.fail("N must be 1 or 2"));
        }
        if self.k == 0 || self.l >= self.k {
            return Err(self.fail("need 0 <= l < k"));
        }
        if self.k > crate::derivative::MAX_ORDER {
            return Err(self.fail(format!(
                "k = {} exceeds the supported derivative order",
                self.k
            )));
        }
        if !(p >= 1.0 && p.is_finite() && q.is_finite() && p < q) {
            return Err(self.fail("need 1 <= p < q < inf"));
        }
        let fractional = self.name.is_fractional();
        match (fractional, self.sigma) {
            (true, None) => return Err(self.fail("sigma is required")),
            (true, Some(s)) if !(s > 0.0 && s < 1.0) => return Err(self.fail("need 0 < sigma < 1")),
            (false, Some(_)) => return Err(self.fail("sigma is not used by this inequality")),
            _ => {}
        }
        if !fractional
            && p <= 1.0
            && !matches!(
                self.name,
                CaseName::Sobolev | CaseName::Lions | CaseName::LionsHigher
            )
        {
            return Err(self.fail("p = 1 is outside the hypotheses (p > 1 required)"));
        }
        let s = self.smoothness();
        let endpoint = self.endpoint();
        let finite_rho = |c: &Self| -> Result<()> {
            if c.rho.is_infinite() {
                Err(c.fail("needs a finite rho"))
            } else {
                Ok(())
            }
        };
        let infinite_rho = |c: &Self| -> Result<()> {
            if c.rho.is_infinite() {
                Ok(())
            } else {
                Err(c.fail("is scale invariant; rho must be INF"))
            }
        };
        let lambda_range = |c: &Self| -> Result<()> {
            if lambda < -l - ENDPOINT_SLACK
                || lambda > endpoint + ENDPOINT_SLACK * (1.0 + endpoint.abs())
            {
                Err(c.fail(format!(
                    "lambda = {lambda} outside [-l, (sp - lq)/(q - p)] = [{}, {endpoint}]",
                    -l
                )))
            } else {
                Ok(())
            }
        };
        let homogeneous = |c: &Self| -> Result<()> {
            infinite_rho(c)?;
            if !close(lambda, endpoint) {
                return Err(c.fail(format!("lambda must be the endpoint {endpoint}")));
            }
            if lambda > n + ENDPOINT_SLACK {
                return Err(c.fail(format!(
                    "lambda = {lambda} > N: the homogeneous seminorm is infinite for compactly supported u"
                )));
            }
            Ok(())
        };
        let k1l0 = |c: &Self| -> Result<()> {
            if c.k == 1 && c.l == 0 {
                Ok(())
            } else {
                Err(c.fail("needs k = 1, l = 0"))
            }
        };
        match self.name {
            CaseName::Theorem1 | CaseName::Theorem2 => {
                finite_rho(self)?;
                lambda_range(self)?;
            }
            CaseName::Sobolev => {
                k1l0(self)?;
                if !(1.0 / q > 1.0 / p - 1.0 / n) {
                    return Err(self.fail("needs 1/q > 1/p - 1/N"));
                }
            }
            CaseName::SobolevCritical => {
                k1l0(self)?;
                infinite_rho(self)?;
                if !(p < n) {
                    return Err(self.fail("needs 1 < p < N"));
                }
                if !close(q, n * p / (n - p)) {
                    return Err(self.fail("needs q = Np/(N - p)"));
                }
            }
            CaseName::Lions => {
                k1l0(self)?;
                if !(1.0 / q > 1.0 / p - 1.0 / n) {
                    return Err(self.fail("needs 1/q > 1/p - 1/N"));
                }
                if self.rho != Cutoff::Finite(1.0) || !close(lambda, n / q) {
                    return Err(self.fail("uses rho = 1 and lambda = N/q"));
                }
            }
            CaseName::LionsDilation => {
                k1l0(self)?;
                infinite_rho(self)?;
                if !(p < n) {
                    return Err(self.fail("needs 1 < p < N"));
                }
                if !close(q, n * p / (n - p)) || !close(lambda, (n - p) / p) {
                    return Err(self.fail("needs q = Np/(N - p), lambda = (N - p)/p"));
                }
            }
            CaseName::MorreyCritical => {
                if self.l != 0 {
                    return Err(self.fail("only l = 0 is stated consistently"));
                }
                infinite_rho(self)?;
                if !(k * p < n) {
                    return Err(self.fail("needs kp < N"));
                }
                if !close(q, n * p / (n - k * p)) || !close(lambda, n / p - k) {
                    return Err(self.fail("needs q = Np/(N - kp), lambda = N/p - k"));
                }
            }
            CaseName::Particular => {
                k1l0(self)?;
                finite_rho(self)?;
                if !(lambda >= 0.0 && lambda < p / (q - p)) {
                    return Err(self.fail(format!(
                        "lambda = {lambda} outside [0, p/(q - p)) = [0, {})",
                        p / (q - p)
                    )));
                }
            }
            CaseName::LocalizedSobolev | CaseName::GnSubscale => {
                finite_rho(self)?;
                if !(l * q < k * p) {
                    return Err(self.fail("needs lq < kp"));
                }
                if !(lambda > 0.0) {
                    return Err(self.fail("needs lambda > 0 (t = N/lambda)"));
                }
                let t = n / lambda;
                let bound = (n * (q - p) / (k * p - l * q)).max(1.0);
                if t < bound * (1.0 - ENDPOINT_SLACK) {
                    return Err(self.fail(format!(
                        "t = N/lambda = {t} below max(N(q - p)/(kp - lq), 1) = {bound}"
                    )));
                }
            }
            CaseName::LionsHigher => {
                if self.l != 0 {
                    return Err(self.fail("needs l = 0"));
                }
                finite_rho(self)?;
                if !(1.0 / q >= 1.0 / p - k / n - ENDPOINT_SLACK) {
                    return Err(self.fail("needs 1/p - k/N <= 1/q"));
                }
                if !close(lambda, n / q) {
                    return Err(self.fail("uses lambda = N/q"));
                }
            }
            CaseName::LinfInterp | CaseName::BmoGnLocal => {
                finite_rho(self)?;
                if self.name == CaseName::BmoGnLocal && self.l == 0 {
                    return Err(self.fail("needs 1 <= l <= k - 1"));
                }
                if l * q > k * p * (1.0 + ENDPOINT_SLACK) {
                    return Err(self.fail("needs lq <= kp"));
                }
                if lambda != 0.0 {
                    return Err(self.fail("uses lambda = 0"));
                }
            }
            CaseName::MorreyHom | CaseName::FracHom => homogeneous(self)?,
            CaseName::BmoGnHom | CaseName::FracBmo => {
                infinite_rho(self)?;
                if self.l == 0 {
                    return Err(self.fail("needs l >= 1"));
                }
                if !close(q, s * p / l) {
                    return Err(self.fail("needs q = sp/l"));
                }
                if lambda != 0.0 {
                    return Err(self.fail("uses lambda = 0"));
                }
            }
            CaseName::FracCritical => {
                if self.l != 0 {
                    return Err(self.fail("only l = 0 is stated consistently"));
                }
                infinite_rho(self)?;
                if !(s * p < n) {
                    return Err(self.fail("needs p(k + sigma) < N"));
                }
                if !close(q, n * p / (n - s * p)) || !close(lambda, n / p - s) {
                    return Err(self.fail("needs q = Np/(N - sp), lambda = N/p - s"));
                }
            }
        }
        Ok(())
    }

    /// Builds the instance of `name` determined by a matrix point, fixing the
    /// parameters the inequality prescribes, and validates it.
    pub fn from_matrix(name: CaseName, m: &MatrixPoint) -> Result<Self> {
        let n = m.dim as f64;
        let k = m.k as f64;
        let mut c = InequalityCase {
            name,
            dim: m.dim,
            k: m.k,
            l: m.l,
            p: m.p,
            q: m.q,
            lambda: m.lambda,
            sigma: name.is_fractional().then_some(m.sigma),
            rho: m.rho,
        };
        let s = c.smoothness();
        let p = m.p;
        match name {
            CaseName::Theorem1 | CaseName::Theorem2 => {}
            CaseName::Sobolev => {
                c.lambda = 0.0;
                c.rho = Cutoff::Infinite;
            }
            CaseName::SobolevCritical | CaseName::LionsDilation => {
                if p < n {
                    c.q = n * p / (n - p);
                }
                c.lambda = if name == CaseName::LionsDilation {
                    (n - p) / p
                } else {
                    0.0
                };
                c.rho = Cutoff::Infinite;
            }
            CaseName::Lions => {
                c.lambda = n / c.q;
                c.rho = Cutoff::Finite(1.0);
            }
            CaseName::MorreyCritical => {
                if k * p < n {
                    c.q = n * p / (n - k * p);
                }
                c.lambda = n / p - k;
                c.rho = Cutoff::Infinite;
            }
            CaseName::Particular | CaseName::LocalizedSobolev | CaseName::GnSubscale => {}
            CaseName::LionsHigher => c.lambda = n / c.q,
            CaseName::LinfInterp | CaseName::BmoGnLocal => c.lambda = 0.0,
            CaseName::MorreyHom | CaseName::FracHom => {
                c.lambda = c.endpoint();
                c.rho = Cutoff::Infinite;
            }
            CaseName::BmoGnHom | CaseName::FracBmo => {
                if m.l > 0 {
                    c.q = s * p / m.l as f64;
                }
                c.lambda = 0.0;
                c.rho = Cutoff::Infinite;
            }
            CaseName::FracCritical => {
                if s * p < n {
                    c.q = n * p / (n - s * p);
                }
                c.lambda = n / p - s;
                c.rho = Cutoff::Infinite;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

pub fn homogeneous_endpoint(s: f64, l: usize, p: f64, q: f64) -> f64 {
    (s * p - l as f64 * q) / (q - p)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ENDPOINT_SLACK * (1.0 + a.abs().max(b.abs()))
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    format!("{r}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(
        dim: usize,
        k: usize,
        l: usize,
        p: f64,
        q: f64,
        lambda: f64,
        rho: Cutoff,
    ) -> MatrixPoint {
        MatrixPoint {
            dim,
            k,
            l,
            p,
            q,
            lambda,
            sigma: 0.5,
            rho,
        }
    }

    #[test]
    fn theorem_ranges() {
        let m = point(1, 1, 0, 2.0, 4.0, 0.0, Cutoff::Finite(1.0));
        assert!(InequalityCase::from_matrix(CaseName::Theorem1, &m).is_ok());
        // endpoint (kp - lq)/(q - p) = 1
        let m = point(1, 1, 0, 2.0, 4.0, 1.0, Cutoff::Finite(1.0));
        assert!(InequalityCase::from_matrix(CaseName::Theorem1, &m).is_ok());
        let m = point(1, 1, 0, 2.0, 4.0, 1.5, Cutoff::Finite(1.0));
        let err = InequalityCase::from_matrix(CaseName::Theorem1, &m).unwrap_err();
        assert!(err.to_string().contains("outside"));
    }

    #[test]
    fn p_equal_one_only_for_fractional() {
        let m = point(1, 1, 0, 1.0, 3.0, 0.0, Cutoff::Finite(1.0));
        assert!(InequalityCase::from_matrix(CaseName::Theorem1, &m).is_err());
        assert!(InequalityCase::from_matrix(CaseName::Theorem2, &m).is_ok());
    }

    #[test]
    fn derived_parameters() {
        let m = point(2, 1, 0, 1.5, 3.0, 0.0, Cutoff::Infinite);
        let c = InequalityCase::from_matrix(CaseName::LionsDilation, &m).unwrap();
        assert!((c.q - 6.0).abs() < 1e-12 && (c.lambda - 1.0 / 3.0).abs() < 1e-12);
        let c = InequalityCase::from_matrix(CaseName::MorreyHom, &m).unwrap();
        assert!((c.lambda - 1.0).abs() < 1e-12);
        let m = point(1, 1, 0, 1.5, 3.0, 0.0, Cutoff::Infinite);
        assert!(InequalityCase::from_matrix(CaseName::LionsDilation, &m).is_err());
        let m = point(2, 2, 1, 2.0, 3.0, 0.0, Cutoff::Infinite);
        let c = InequalityCase::from_matrix(CaseName::BmoGnHom, &m).unwrap();
        assert_eq!(c.q, 4.0);
        let c = InequalityCase::from_matrix(CaseName::FracBmo, &m).unwrap();
        assert_eq!(c.q, 5.0);
    }

    #[test]
    fn fractional_critical_needs_small_p() {
        let m = point(2, 1, 0, 1.5, 3.0, 0.0, Cutoff::Infinite);
        assert!(InequalityCase::from_matrix(CaseName::FracCritical, &m).is_err());
        let m = point(2, 1, 0, 1.2, 3.0, 0.0, Cutoff::Infinite);
        let c = InequalityCase::from_matrix(CaseName::FracCritical, &m).unwrap();
        assert!((c.q - 12.0).abs() < 1e-9);
    }

    #[test]
    fn homogeneous_lambda_above_n_rejected() {
        // N = 1, k = 2, l = 0, p = 2, q = 3: endpoint 4 > N
        let m = point(1, 2, 0, 2.0, 3.0, 0.0, Cutoff::Infinite);
        let err = InequalityCase::from_matrix(CaseName::MorreyHom, &m).unwrap_err();
        assert!(err.to_string().contains("infinite"));
    }

    #[test]
    fn serde_roundtrip() {
        let m = point(2, 2, 1, 1.5, 3.0, 0.0, Cutoff::Finite(0.5));
        let c = InequalityCase::from_matrix(CaseName::Theorem2, &m).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: InequalityCase = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<InequalityCase>(&s.replace("\"k\"", "\"kk\"")).is_err());
    }
}
