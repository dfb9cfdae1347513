//! Left- and right-hand sides of every catalog inequality for one function.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::case::{CaseName, InequalityCase};
use crate::ball::{unit_ball_volume, DiskStencil, RowPrefix};
use crate::derivative::{derivative_field, DerivativeField};
use crate::error::{Error, Result};
use crate::grid::{abs_pow, integral_pow, GridFunction};
use crate::seminorms::{
    bmo_table, campanato_table, gagliardo_energy, morrey_table, BallTable, CenterGrid, Cutoff,
    RadiusGrid,
};

/// Discretisation of the sup-type functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSettings {
    pub radius_count: usize,
    pub center_stride: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            radius_count: 16,
            center_stride: 1,
        }
    }
}

/// One `(case, function)` evaluation. Ratios are lower bounds for the
/// constant of the inequality, not estimates of a sharp constant.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub case: InequalityCase,
    pub label: String,
    pub function: String,
    pub n: usize,
    pub lhs: f64,
    pub rhs_factors: BTreeMap<String, f64>,
    pub rhs: f64,
    /// 0 when `lhs = 0`; infinite (null in JSON) when only `rhs` vanishes.
    pub ratio: f64,
    pub violation: bool,
}

pub fn ratio_of(lhs: f64, rhs: f64) -> (f64, bool) {
    if lhs == 0.0 {
        (0.0, false)
    } else if rhs == 0.0 || !rhs.is_finite() || !lhs.is_finite() {
        (f64::INFINITY, true)
    } else {
        let r = lhs / rhs;
        (r, !r.is_finite())
    }
}

fn rho_key(rho: Cutoff) -> String {
    rho.to_string()
}

/// Memoising evaluator for one grid function.
pub struct Evaluator<'a> {
    u: &'a GridFunction,
    id: String,
    settings: EvalSettings,
    centers: CenterGrid,
    derivatives: HashMap<usize, DerivativeField>,
    campanato: HashMap<(usize, String), BallTable>,
    bmo: HashMap<String, BallTable>,
    morrey: HashMap<(u64, String), BallTable>,
    gagliardo: HashMap<(usize, u64, u64), f64>,
    ball_means: HashMap<(u64, u64), f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(u: &'a GridFunction, id: &str, settings: EvalSettings) -> Result<Self> {
        Ok(Self {
            u,
            id: id.to_string(),
            settings,
            centers: CenterGrid::new(settings.center_stride)?,
            derivatives: HashMap::new(),
            campanato: HashMap::new(),
            bmo: HashMap::new(),
            morrey: HashMap::new(),
            gagliardo: HashMap::new(),
            ball_means: HashMap::new(),
        })
    }

    pub fn function(&self) -> &GridFunction {
        self.u
    }

    fn radii(&self, rho: Cutoff) -> Result<RadiusGrid> {
        RadiusGrid::new(self.u.domain(), rho, self.settings.radius_count)
    }

    fn derivative(&mut self, order: usize) -> Result<&DerivativeField> {
        if !self.derivatives.contains_key(&order) {
            let f = derivative_field(self.u, order)?;
            self.derivatives.insert(order, f);
        }
        Ok(&self.derivatives[&order])
    }

    /// `∫ |D^ℓ u|^q`.
    pub fn lq(&mut self, order: usize, q: f64) -> Result<f64> {
        let domain = *self.u.domain();
        let f = self.derivative(order)?;
        Ok(integral_pow(f.magnitudes(), q, &domain))
    }

    /// `[u]_{1, λ, ℓ, ρ}`: sup of `r^λ` times the mean residual of the best
    /// `P_{ℓ-1}` fit (Morrey for `ℓ = 0`).
    pub fn campanato(&mut self, lambda: f64, l: usize, rho: Cutoff) -> Result<f64> {
        let key = (l, rho_key(rho));
        if !self.campanato.contains_key(&key) {
            let t = campanato_table(self.u, 1.0, l, &self.radii(rho)?, &self.centers)?;
            self.campanato.insert(key.clone(), t);
        }
        Ok(self.campanato[&key].sup(lambda).value)
    }

    pub fn bmo(&mut self, rho: Cutoff) -> Result<f64> {
        let key = rho_key(rho);
        if !self.bmo.contains_key(&key) {
            let t = bmo_table(self.u, &self.radii(rho)?, &self.centers)?;
            self.bmo.insert(key.clone(), t);
        }
        Ok(self.bmo[&key].sup(0.0).value)
    }

    /// `sup r^λ (avg_{B_r(x)} |u|^q)^{1/q}`.
    pub fn morrey(&mut self, q: f64, lambda: f64, rho: Cutoff) -> Result<f64> {
        if q == 1.0 {
            return self.campanato(lambda, 0, rho);
        }
        let key = (q.to_bits(), rho_key(rho));
        if !self.morrey.contains_key(&key) {
            let t = morrey_table(self.u, q, &self.radii(rho)?, &self.centers)?;
            self.morrey.insert(key.clone(), t);
        }
        Ok(self.morrey[&key].sup(lambda).value)
    }

    /// `h^{2N} Σ |D^k u(x) - D^k u(y)|^p / |x - y|^{N + σp}`.
    pub fn gagliardo(&mut self, k: usize, sigma: f64, p: f64) -> Result<f64> {
        let key = (k, sigma.to_bits(), p.to_bits());
        if let Some(v) = self.gagliardo.get(&key) {
            return Ok(*v);
        }
        let v = gagliardo_energy(self.derivative(k)?, sigma, p)?;
        self.gagliardo.insert(key, v);
        Ok(v)
    }

    /// `sup_x avg_{B_ρ(x)} |u|^t` over the centre grid, at the single radius `ρ`.
    pub fn sup_ball_mean(&mut self, t: f64, rho: f64) -> Result<f64> {
        let key = (t.to_bits(), rho.to_bits());
        if let Some(v) = self.ball_means.get(&key) {
            return Ok(*v);
        }
        let domain = self.u.domain();
        let field: Vec<f64> = self.u.values().iter().map(|v| abs_pow(*v, t)).collect();
        let prefix = RowPrefix::new(domain, &field);
        let st = DiskStencil::new(domain, rho)?;
        let v = self
            .centers
            .centers(domain)
            .into_iter()
            .map(|c| prefix.disk_sum(domain.grid_index(c), &st) / st.count() as f64)
            .fold(0.0, f64::max);
        self.ball_means.insert(key, v);
        Ok(v)
    }

    /// `sup_x ∫_{B_ρ(x)} |u|^t`.
    pub fn sup_ball_integral(&mut self, t: f64, rho: f64) -> Result<f64> {
        let measure = DiskStencil::new(self.u.domain(), rho)?.measure();
        Ok(measure * self.sup_ball_mean(t, rho)?)
    }

    /// `ρ^{kp} ∫|D^k u|^p + ρ^{ℓp} ∫|D^ℓ u|^p`.
    fn energy(&mut self, k: usize, l: usize, p: f64, rho: f64) -> Result<f64> {
        Ok(rho.powf(k as f64 * p) * self.lq(k, p)? + rho.powf(l as f64 * p) * self.lq(l, p)?)
    }

    pub fn evaluate(&mut self, case: &InequalityCase) -> Result<RatioReport> {
        if case.dim != self.u.domain().dim() {
            return Err(Error::Config(format!(
                "case {} is for N = {}, function '{}' lives in N = {}",
                case.label(),
                case.dim,
                self.id,
                self.u.domain().dim()
            )));
        }
        case.validate()?;
        let (k, l, p, q, lambda) = (case.k, case.l, case.p, case.q, case.lambda);
        let n = case.dim as f64;
        let sigma = case.sigma.unwrap_or(0.0);
        let s = case.smoothness();
        let rho = case.rho;
        let r = if rho.is_infinite() { 1.0 } else { rho.value() };
        let mut f = BTreeMap::new();
        let lhs;
        let rhs;
        match case.name {
            CaseName::Theorem1 | CaseName::Theorem2 | CaseName::Particular => {
                lhs = r.powf(l as f64 * q) * self.lq(l, q)?;
                let camp = r.powf(-lambda) * self.campanato(lambda, l, rho)?;
                let top = if case.name == CaseName::Theorem2 {
                    let g = self.gagliardo(k, sigma, p)?;
                    f.insert("gagliardo".into(), g);
                    r.powf(s * p) * g
                } else {
                    let t = self.lq(k, p)?;
                    f.insert("top_lp".into(), t);
                    r.powf(k as f64 * p) * t
                };
                let low = r.powf(l as f64 * p) * self.lq(l, p)?;
                f.insert("campanato".into(), camp);
                f.insert("low_lp".into(), low);
                rhs = camp.powf(q - p) * (top + low);
            }
            CaseName::Sobolev => {
                lhs = self.lq(0, q)?.powf(p / q);
                let (a, b) = (self.lq(1, p)?, self.lq(0, p)?);
                f.insert("top_lp".into(), a);
                f.insert("low_lp".into(), b);
                rhs = a + b;
            }
            CaseName::SobolevCritical => {
                lhs = self.lq(0, q)?.powf(p / q);
                rhs = self.lq(1, p)?;
                f.insert("top_lp".into(), rhs);
            }
            CaseName::Lions => {
                lhs = self.lq(0, q)?;
                let m = self.sup_ball_integral(q, 1.0)?;
                let e = self.energy(1, 0, p, 1.0)?;
                f.insert("ball_integral".into(), m);
                f.insert("energy".into(), e);
                rhs = m.powf(1.0 - p / q) * e;
            }
            CaseName::LionsDilation => {
                lhs = self.lq(0, q)?;
                let m = self.morrey(p, lambda, Cutoff::Infinite)?;
                let scaled = unit_ball_volume(case.dim) * m.powf(p);
                let t = self.lq(1, p)?;
                f.insert("morrey".into(), m);
                f.insert("top_lp".into(), t);
                rhs = scaled.powf(p / (n - p)) * t;
            }
            CaseName::MorreyCritical | CaseName::MorreyHom => {
                lhs = self.lq(l, q)?;
                let m = self.campanato(lambda, l, Cutoff::Infinite)?;
                let t = self.lq(k, p)?;
                f.insert("campanato".into(), m);
                f.insert("top_lp".into(), t);
                rhs = m.powf(q - p) * t;
            }
            CaseName::LocalizedSobolev => {
                lhs = r.powf(l as f64 * q) * self.lq(l, q)?;
                let t = n / lambda;
                let m = self.sup_ball_mean(t, r)?;
                let e = self.energy(k, l, p, r)?;
                f.insert("ball_mean".into(), m);
                f.insert("energy".into(), e);
                rhs = m.powf((q - p) / t) * e;
            }
            CaseName::GnSubscale => {
                lhs = r.powf(l as f64 * q) * self.lq(l, q)?;
                let t = n / lambda;
                let m = r.powf(-n) * self.lq(0, t)?;
                let e = self.energy(k, l, p, r)?;
                f.insert("scaled_lt".into(), m);
                f.insert("energy".into(), e);
                rhs = m.powf((q - p) / t) * e;
            }
            CaseName::LionsHigher => {
                lhs = self.lq(0, q)?;
                let m = self.sup_ball_mean(q, r)?;
                let e = self.energy(k, 0, p, r)?;
                f.insert("ball_mean".into(), m);
                f.insert("energy".into(), e);
                rhs = m.powf(1.0 - p / q) * e;
            }
            CaseName::LinfInterp | CaseName::BmoGnLocal => {
                lhs = r.powf(l as f64 * q) * self.lq(l, q)?;
                let m = if case.name == CaseName::LinfInterp {
                    let v = self.u.max_abs();
                    f.insert("sup".into(), v);
                    v
                } else {
                    let v = self.bmo(rho)?;
                    f.insert("bmo".into(), v);
                    v
                };
                let e = self.energy(k, l, p, r)?;
                f.insert("energy".into(), e);
                rhs = m.powf(q - p) * e;
            }
            CaseName::BmoGnHom | CaseName::FracBmo => {
                lhs = self.lq(l, q)?;
                let b = self.bmo(Cutoff::Infinite)?;
                let t = if case.name == CaseName::FracBmo {
                    let g = self.gagliardo(k, sigma, p)?;
                    f.insert("gagliardo".into(), g);
                    g
                } else {
                    let t = self.lq(k, p)?;
                    f.insert("top_lp".into(), t);
                    t
                };
                f.insert("bmo".into(), b);
                rhs = b.powf(q - p) * t;
            }
            CaseName::FracHom | CaseName::FracCritical => {
                lhs = self.lq(l, q)?;
                let m = self.campanato(lambda, l, Cutoff::Infinite)?;
                let g = self.gagliardo(k, sigma, p)?;
                f.insert("campanato".into(), m);
                f.insert("gagliardo".into(), g);
                rhs = m.powf(q - p) * g;
            }
        }
        let (ratio, violation) = ratio_of(lhs, rhs);
        Ok(RatioReport {
            case: case.clone(),
            label: case.label(),
            function: self.id.clone(),
            n: self.u.domain().points_per_axis(),
            lhs,
            rhs_factors: f,
            rhs,
            ratio,
            violation,
        })
    }
}

/// Theorem 1: `ρ^{ℓq} ∫|D^ℓ u|^q <= C (ρ^{-λ}[u]_{1,λ,ℓ,ρ})^{q-p}
/// (ρ^{kp}∫|D^k u|^p + ρ^{ℓp}∫|D^ℓ u|^p)`; at `ρ = INF` (endpoint `λ`
/// only) the homogeneous form.
pub fn evaluate_theorem1(
    u: &GridFunction,
    id: &str,
    case: &InequalityCase,
    settings: EvalSettings,
) -> Result<RatioReport> {
    let mut c = case.clone();
    if c.rho.is_infinite() {
        c.name = CaseName::MorreyHom;
    } else {
        c.name = CaseName::Theorem1;
    }
    Evaluator::new(u, id, settings)?.evaluate(&c)
}

/// Theorem 2, the fractional counterpart; `ρ = INF` maps to the homogeneous form.
pub fn evaluate_theorem2(
    u: &GridFunction,
    id: &str,
    case: &InequalityCase,
    settings: EvalSettings,
) -> Result<RatioReport> {
    let mut c = case.clone();
    if c.rho.is_infinite() {
        c.name = CaseName::FracHom;
    } else {
        c.name = CaseName::Theorem2;
    }
    Evaluator::new(u, id, settings)?.evaluate(&c)
}

pub fn evaluate_named(
    u: &GridFunction,
    id: &str,
    case: &InequalityCase,
    settings: EvalSettings,
) -> Result<RatioReport> {
    Evaluator::new(u, id, settings)?.evaluate(case)
}
