//! Pointwise checks at individual grid points: the Riesz/average bound on
//! `R^ℓ |D^ℓ u(x)|`, its fractional counterpart, and the maximal-function
//! interpolation bound.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ball::{ball_average, ball_members, DiskStencil};
use crate::derivative::{derivative_field, DerivativeField};
use crate::error::{invalid, Error, Result};
use crate::grid::{Domain, GridFunction};
use crate::harness::{CaseName, InequalityCase};
use crate::seminorms::{
    campanato_seminorm, gagliardo_pointwise, maximal_function, riesz_potential, CenterGrid, Cutoff,
    RadiusGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointwiseLemma {
    Lemma,
    FractionalLemma,
    InterpolationLocal,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointwiseReport {
    pub lemma: PointwiseLemma,
    pub params: serde_json::Value,
    pub x: Vec<f64>,
    pub x_index: usize,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub lhs: f64,
    pub rhs_terms: BTreeMap<String, f64>,
    pub rhs: f64,
    /// `lhs / rhs`; 0 when `lhs = 0`, infinite (serialised as null) when
    /// only the right side vanishes.
    pub ratio: f64,
    pub beta: Option<f64>,
    pub violation: bool,
}

impl PointwiseReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        lemma: PointwiseLemma,
        params: serde_json::Value,
        domain: &Domain,
        x: usize,
        radius: Option<f64>,
        lhs: f64,
        rhs_terms: BTreeMap<String, f64>,
        rhs: f64,
        beta: Option<f64>,
    ) -> Self {
        let (ratio, violation) = if lhs == 0.0 {
            (0.0, false)
        } else if rhs == 0.0 {
            (f64::INFINITY, true)
        } else {
            (lhs / rhs, false)
        };
        Self {
            lemma,
            params,
            x: domain.point(x)[..domain.dim()].to_vec(),
            x_index: x,
            radius,
            lhs,
            rhs_terms,
            rhs,
            ratio,
            beta,
            violation,
        }
    }
}

/// `u`, `D^k u` and `D^ℓ u`, computed once per function.
#[derive(Debug, Clone)]
pub struct LemmaFields {
    u: GridFunction,
    dk: DerivativeField,
    dl: DerivativeField,
}

impl LemmaFields {
    pub fn new(u: &GridFunction, k: usize, l: usize) -> Result<Self> {
        if l >= k {
            return Err(invalid("l", format!("need l < k, got l = {l}, k = {k}")));
        }
        Ok(Self {
            u: u.clone(),
            dk: derivative_field(u, k)?,
            dl: derivative_field(u, l)?,
        })
    }

    pub fn k(&self) -> usize {
        self.dk.order()
    }

    pub fn l(&self) -> usize {
        self.dl.order()
    }

    pub fn domain(&self) -> &Domain {
        self.u.domain()
    }

    fn check_point(&self, x: usize) -> Result<()> {
        if x >= self.domain().len() {
            return Err(invalid("x", format!("grid point {x} out of range")));
        }
        Ok(())
    }

    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "k": self.k(), "l": self.l() })
    }
}

/// `R^ℓ |D^ℓ u(x)|` against `∫_{B_R(x)} |D^k u(y)| / |x - y|^{N-k} dy +
/// avg_{B_R(x)} |u|`.
pub fn lemma_ratio(fields: &LemmaFields, x: usize, radius: f64) -> Result<PointwiseReport> {
    fields.check_point(x)?;
    let domain = fields.domain();
    let lhs = radius.powi(fields.l() as i32) * fields.dl.magnitudes()[x];
    let riesz = riesz_potential(&fields.dk, x, radius)?;
    let average = ball_average(fields.u.values(), &ball_members(domain, x, radius)?, 1.0);
    let terms = BTreeMap::from([
        ("riesz".to_string(), riesz),
        ("average".to_string(), average),
    ]);
    Ok(PointwiseReport::new(
        PointwiseLemma::Lemma,
        fields.params(),
        domain,
        x,
        Some(radius),
        lhs,
        terms,
        riesz + average,
        None,
    ))
}

/// `|D^ℓ u(x)|` against `∫_{B_R(x)} |D^k u(y) - D^k u(x)| / |x - y|^{N-k} dy
/// + avg_{B_R(x)} |u|`. Lattice points outside the box carry the zero tensor.
pub fn fractional_lemma_ratio(
    fields: &LemmaFields,
    x: usize,
    radius: f64,
) -> Result<PointwiseReport> {
    fields.check_point(x)?;
    let domain = fields.domain();
    let lhs = fields.dl.magnitudes()[x];
    let difference = difference_potential(&fields.dk, x, radius)?;
    let average = ball_average(fields.u.values(), &ball_members(domain, x, radius)?, 1.0);
    let terms = BTreeMap::from([
        ("difference".to_string(), difference),
        ("average".to_string(), average),
    ]);
    Ok(PointwiseReport::new(
        PointwiseLemma::FractionalLemma,
        fields.params(),
        domain,
        x,
        Some(radius),
        lhs,
        terms,
        difference + average,
        None,
    ))
}

fn difference_potential(field: &DerivativeField, x: usize, radius: f64) -> Result<f64> {
    let domain = field.domain();
    let st = DiskStencil::new(domain, radius)?;
    let h = domain.spacing();
    let expo = domain.dim() as f64 - field.order() as f64;
    let at_x = field.magnitudes()[x];
    let mut acc = 0.0;
    for o in st.offsets() {
        if o == [0, 0] {
            continue;
        }
        let d = match domain.shifted(x, o) {
            Some(y) => field.tensor_distance(x, y),
            None => at_x,
        };
        if d != 0.0 {
            let dist = h * ((o[0] * o[0] + o[1] * o[1]) as f64).sqrt();
            acc += d * dist.powf(-expo);
        }
    }
    Ok(domain.cell_volume() * acc)
}

/// Both lemmas at one point for a whole list of radii, in a single pass over
/// the box. Out-of-box lattice points enter only through precomputed kernel
/// sums over each full disk.
#[derive(Debug, Clone)]
pub struct LemmaSweep {
    radii: Vec<f64>,
    /// Slots in ascending radius order.
    order: Vec<usize>,
    /// `(R/h)^2` thresholds in ascending order.
    thresholds: Vec<f64>,
    counts: Vec<usize>,
    /// `Σ_{o ≠ 0, |o| ≤ R/h} |o h|^{k-N}` per ascending slot.
    kernel_totals: Vec<f64>,
}

impl LemmaSweep {
    pub fn new(fields: &LemmaFields, radii: &[f64]) -> Result<Self> {
        let domain = fields.domain();
        let h = domain.spacing();
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
        let stencils = order
            .iter()
            .map(|&j| DiskStencil::new(domain, radii[j]))
            .collect::<Result<Vec<_>>>()?;
        let thresholds: Vec<f64> = order
            .iter()
            .map(|&j| (radii[j] / h).powi(2) * (1.0 + 1e-12))
            .collect();
        let expo = domain.dim() as f64 - fields.k() as f64;
        let mut kernel = vec![0.0; order.len()];
        if let Some(largest) = stencils.last() {
            for o in largest.offsets() {
                let d2 = (o[0] * o[0] + o[1] * o[1]) as f64;
                if d2 == 0.0 {
                    continue;
                }
                let slot = thresholds.partition_point(|&t| t < d2);
                kernel[slot] += (h * d2.sqrt()).powf(-expo);
            }
        }
        let mut acc = 0.0;
        for v in kernel.iter_mut() {
            acc += *v;
            *v = acc;
        }
        Ok(Self {
            radii: radii.to_vec(),
            order,
            thresholds,
            counts: stencils.iter().map(DiskStencil::count).collect(),
            kernel_totals: kernel,
        })
    }

    /// `(lemma, fractional lemma)` reports for every radius, in input order.
    pub fn evaluate(
        &self,
        fields: &LemmaFields,
        x: usize,
    ) -> Result<Vec<(PointwiseReport, PointwiseReport)>> {
        fields.check_point(x)?;
        let domain = fields.domain();
        let h = domain.spacing();
        let expo = domain.dim() as f64 - fields.k() as f64;
        let slots = self.order.len();
        let Some(&t_max) = self.thresholds.last() else {
            return Ok(Vec::new());
        };
        // per slot: riesz, difference, in-box kernel, Σ|u|
        let mut bins = vec![[0.0f64; 4]; slots];
        let xi = domain.grid_index(x);
        let mags = fields.dk.magnitudes();
        let values = fields.u.values();
        for y in 0..domain.len() {
            let yi = domain.grid_index(y);
            let a = yi[0] as f64 - xi[0] as f64;
            let b = yi[1] as f64 - xi[1] as f64;
            let d2 = a * a + b * b;
            if d2 > t_max {
                continue;
            }
            let slot = self.thresholds.partition_point(|&t| t < d2);
            let bin = &mut bins[slot];
            bin[3] += values[y].abs();
            if y == x {
                continue;
            }
            let w = (h * d2.sqrt()).powf(-expo);
            bin[0] += mags[y] * w;
            bin[1] += fields.dk.tensor_distance(x, y) * w;
            bin[2] += w;
        }
        let at_x = mags[x];
        let vol = domain.cell_volume();
        let lhs_l = fields.dl.magnitudes()[x];
        let mut cum = [0.0f64; 4];
        let mut by_slot = Vec::with_capacity(slots);
        for (i, bin) in bins.iter().enumerate() {
            for c in 0..4 {
                cum[c] += bin[c];
            }
            let radius = self.radii[self.order[i]];
            let riesz = vol * cum[0];
            let difference = vol * (cum[1] + at_x * (self.kernel_totals[i] - cum[2]));
            let average = cum[3] / self.counts[i] as f64;
            let lemma = PointwiseReport::new(
                PointwiseLemma::Lemma,
                fields.params(),
                domain,
                x,
                Some(radius),
                radius.powi(fields.l() as i32) * lhs_l,
                BTreeMap::from([
                    ("riesz".to_string(), riesz),
                    ("average".to_string(), average),
                ]),
                riesz + average,
                None,
            );
            let fractional = PointwiseReport::new(
                PointwiseLemma::FractionalLemma,
                fields.params(),
                domain,
                x,
                Some(radius),
                lhs_l,
                BTreeMap::from([
                    ("difference".to_string(), difference),
                    ("average".to_string(), average),
                ]),
                difference + average,
                None,
            );
            by_slot.push((lemma, fractional));
        }
        let mut out = vec![None; slots];
        for (i, r) in by_slot.into_iter().enumerate() {
            out[self.order[i]] = Some(r);
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    }
}

/// Split of the interpolation exponent for a theorem case:
/// `β = p(s + λ)/q - λ - ℓ`, `a = (λ + ℓ + β)/(λ + s)`, `b = (s - ℓ - β)/(λ + s)`
/// with `s = k` or `k + σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaSplit {
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

pub fn beta_split(case: &InequalityCase) -> Result<BetaSplit> {
    if !matches!(case.name, CaseName::Theorem1 | CaseName::Theorem2) {
        return Err(invalid(
            "case",
            format!("{} is not a theorem case", case.name),
        ));
    }
    case.validate()?;
    let s = case.smoothness();
    let (l, lambda) = (case.l as f64, case.lambda);
    let beta = case.p * (s + lambda) / case.q - lambda - l;
    if beta < -lambda - l {
        return Err(Error::Infeasible {
            case: case.label(),
            reason: format!("beta = {beta} below -lambda - l = {}", -lambda - l),
        });
    }
    if beta > s - l {
        return Err(Error::Infeasible {
            case: case.label(),
            reason: format!("beta = {beta} above s - l = {}", s - l),
        });
    }
    Ok(BetaSplit {
        beta,
        a: (lambda + l + beta) / (lambda + s),
        b: (s - l - beta) / (lambda + s),
    })
}

/// Precomputed pieces of `interpolation_local_ratio` for one function and case.
pub struct LocalInterpolation {
    case: InequalityCase,
    split: BetaSplit,
    rho: f64,
    dl: DerivativeField,
    top: TopTerm,
    campanato: f64,
}

enum TopTerm {
    Maximal(Vec<f64>),
    Fractional(DerivativeField),
}

impl LocalInterpolation {
    pub fn new(
        u: &GridFunction,
        case: &InequalityCase,
        radius_count: usize,
        centers: &CenterGrid,
    ) -> Result<Self> {
        let split = beta_split(case)?;
        let rho = match case.rho {
            Cutoff::Finite(r) => r,
            Cutoff::Infinite => unreachable!("theorem cases have a finite rho"),
        };
        let domain = u.domain();
        let dk = derivative_field(u, case.k)?;
        let top = match case.name {
            CaseName::Theorem2 => TopTerm::Fractional(dk),
            _ => {
                let ladder = RadiusGrid::new(domain, Cutoff::Infinite, radius_count)?;
                TopTerm::Maximal(maximal_function(domain, dk.magnitudes(), &ladder)?)
            }
        };
        let local = RadiusGrid::new(domain, case.rho, radius_count)?;
        let campanato = campanato_seminorm(u, 1.0, case.lambda, case.l, &local, centers)?.value;
        Ok(Self {
            case: case.clone(),
            split,
            rho,
            dl: derivative_field(u, case.l)?,
            top,
            campanato,
        })
    }

    /// Builds from a precomputed Campanato value and, for Theorem 1 cases,
    /// the maximal function of `|D^k u|` over the grid.
    pub fn from_parts(
        u: &GridFunction,
        case: &InequalityCase,
        campanato: f64,
        maximal: Option<Vec<f64>>,
    ) -> Result<Self> {
        let split = beta_split(case)?;
        let top = match (case.name, maximal) {
            (CaseName::Theorem2, _) => TopTerm::Fractional(derivative_field(u, case.k)?),
            (_, Some(m)) if m.len() == u.domain().len() => TopTerm::Maximal(m),
            _ => {
                return Err(invalid(
                    "maximal",
                    "a full-grid maximal function is required",
                ))
            }
        };
        Ok(Self {
            case: case.clone(),
            split,
            rho: case.rho.value(),
            dl: derivative_field(u, case.l)?,
            top,
            campanato,
        })
    }

    pub fn split(&self) -> BetaSplit {
        self.split
    }

    /// `ρ^ℓ |D^ℓ u(x)|` against
    /// `(ρ^s T(x) + ρ^ℓ |D^ℓ u(x)|)^a (ρ^{-λ} [u]_{1,λ,ℓ,ρ})^b` where `T` is
    /// `M(|D^k u|)` or `D_{σ,p}(D^k u)`.
    pub fn ratio(&self, x: usize) -> Result<PointwiseReport> {
        let top = self.top_at(x)?;
        self.ratio_with_top(x, top)
    }

    /// `T(x)`: the maximal function or `D_{σ,p}(D^k u)(x)`.
    pub fn top_at(&self, x: usize) -> Result<f64> {
        let domain = self.dl.domain();
        if x >= domain.len() {
            return Err(invalid("x", format!("grid point {x} out of range")));
        }
        match &self.top {
            TopTerm::Maximal(m) => Ok(m[x]),
            TopTerm::Fractional(dk) => {
                gagliardo_pointwise(dk, self.case.sigma.unwrap_or(0.5), self.case.p, x)
            }
        }
    }

    /// As [`Self::ratio`] with `T(x)` supplied, for callers sharing it
    /// between cases.
    pub fn ratio_with_top(&self, x: usize, top: f64) -> Result<PointwiseReport> {
        let domain = *self.dl.domain();
        if x >= domain.len() {
            return Err(invalid("x", format!("grid point {x} out of range")));
        }
        let c = &self.case;
        let s = c.smoothness();
        let rho = self.rho;
        let top_name = match self.top {
            TopTerm::Maximal(_) => "maximal",
            TopTerm::Fractional(_) => "gagliardo",
        };
        let lhs = rho.powi(c.l as i32) * self.dl.magnitudes()[x];
        let first = rho.powf(s) * top + lhs;
        let second = rho.powf(-c.lambda) * self.campanato;
        let rhs = first.powf(self.split.a) * second.powf(self.split.b);
        let terms = BTreeMap::from([
            (top_name.to_string(), rho.powf(s) * top),
            ("local".to_string(), lhs),
            ("campanato".to_string(), second),
        ]);
        let params = serde_json::to_value(c).map_err(Error::Json)?;
        Ok(PointwiseReport::new(
            PointwiseLemma::InterpolationLocal,
            params,
            &domain,
            x,
            None,
            lhs,
            terms,
            rhs,
            Some(self.split.beta),
        ))
    }
}

pub fn interpolation_local_ratio(
    u: &GridFunction,
    case: &InequalityCase,
    x: usize,
    radius_count: usize,
    centers: &CenterGrid,
) -> Result<PointwiseReport> {
    LocalInterpolation::new(u, case, radius_count, centers)?.ratio(x)
}

/// `count` grid points drawn uniformly from the support box `|x|_∞ <= L - m`
/// and snapped to the nearest grid point. The physical draws depend only on
/// the seed, so the same locations are probed at every resolution.
pub fn sample_points(domain: &Domain, seed: u64, count: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = domain.half_width() - domain.support_margin();
    (0..count)
        .map(|_| {
            let a = rng.gen_range(-limit..=limit);
            let b = rng.gen_range(-limit..=limit);
            domain.nearest([a, if domain.dim() == 1 { 0.0 } else { b }])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::MatrixPoint;

    fn plateau(dim: usize, n: usize) -> GridFunction {
        let d = Domain::new(dim, 4.0, n, 0.5).unwrap();
        GridFunction::from_fn(d, |x| {
            let r = (x[0] * x[0] + if dim == 2 { x[1] * x[1] } else { 0.0 }).sqrt();
            if r < 1.0 {
                2.0
            } else if r < 2.0 {
                2.0 * (2.0 - r).powi(4) * (1.0 + 4.0 * (r - 1.0))
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn plateau_ratio_is_one() {
        for dim in [1, 2] {
            let u = plateau(dim, 64);
            let d = *u.domain();
            let f = LemmaFields::new(&u, 1, 0).unwrap();
            let x = d.nearest([0.0, 0.0]);
            let r = lemma_ratio(&f, x, 0.3).unwrap();
            assert!((r.ratio - 1.0).abs() < 1e-12, "{r:?}");
            assert_eq!(r.rhs_terms["riesz"], 0.0);
        }
    }

    #[test]
    fn zero_near_x_gives_zero_ratio() {
        let u = plateau(1, 128);
        let d = *u.domain();
        let f = LemmaFields::new(&u, 2, 1).unwrap();
        let x = d.nearest([3.0, 0.0]);
        for r in [0.25, 0.5] {
            assert_eq!(lemma_ratio(&f, x, r).unwrap().ratio, 0.0);
            assert_eq!(fractional_lemma_ratio(&f, x, r).unwrap().ratio, 0.0);
        }
    }

    #[test]
    fn sweep_matches_single_radius() {
        for (dim, n) in [(1, 128), (2, 64)] {
            let u = plateau(dim, n);
            let d = *u.domain();
            let ladder = RadiusGrid::new(&d, Cutoff::Infinite, 6).unwrap();
            let mut radii = ladder.radii().to_vec();
            radii.reverse();
            for (k, l) in [(1, 0), (2, 1)] {
                let f = LemmaFields::new(&u, k, l).unwrap();
                let sweep = LemmaSweep::new(&f, &radii).unwrap();
                for x in sample_points(&d, 5, 6) {
                    let got = sweep.evaluate(&f, x).unwrap();
                    for (&r, (a, b)) in radii.iter().zip(&got) {
                        let ea = lemma_ratio(&f, x, r).unwrap();
                        let eb = fractional_lemma_ratio(&f, x, r).unwrap();
                        for (p, q) in [
                            (a.rhs, ea.rhs),
                            (b.rhs, eb.rhs),
                            (a.lhs, ea.lhs),
                            (b.lhs, eb.lhs),
                        ] {
                            assert!((p - q).abs() <= 1e-10 * q.abs().max(1e-300), "{p} {q}");
                        }
                        assert_eq!(a.radius, Some(r));
                    }
                }
            }
        }
    }

    #[test]
    fn riesz_term_monotone_in_radius() {
        let u = plateau(2, 64);
        let d = *u.domain();
        let f = LemmaFields::new(&u, 2, 0).unwrap();
        let ladder = RadiusGrid::new(&d, Cutoff::Infinite, 8).unwrap();
        for x in sample_points(&d, 3, 10) {
            let mut last = 0.0;
            for &r in ladder.radii() {
                let t = lemma_ratio(&f, x, r).unwrap().rhs_terms["riesz"];
                assert!(t >= last);
                last = t;
            }
        }
    }

    #[test]
    fn local_polynomial_kills_difference_term() {
        // u = 1 + x on the plateau-free region around 0: D^2 u = 0 there.
        let d = Domain::new(1, 4.0, 128, 0.5).unwrap();
        let u = GridFunction::from_fn(d, |x| {
            let t = x[0].abs();
            let cut = if t < 1.5 {
                1.0
            } else if t < 3.0 {
                (3.0 - t).powi(3) / 3.375
            } else {
                0.0
            };
            (1.0 + x[0]) * cut
        })
        .unwrap();
        let f = LemmaFields::new(&u, 2, 1).unwrap();
        let x = d.nearest([0.1, 0.0]);
        let r = fractional_lemma_ratio(&f, x, 0.5).unwrap();
        assert!(r.rhs_terms["difference"] < 1e-9);
        let avg = r.rhs_terms["average"];
        assert!((r.ratio - 1.0 / avg).abs() < 1e-6 * r.ratio);
    }

    #[test]
    fn endpoint_forces_zero_beta() {
        for (k, l, p, q) in [(1, 0, 1.5, 3.0), (2, 1, 2.0, 3.0), (2, 0, 1.5, 4.0)] {
            for name in [CaseName::Theorem1, CaseName::Theorem2] {
                let s = k as f64 + if name == CaseName::Theorem2 { 0.5 } else { 0.0 };
                let lambda = (s * p - l as f64 * q) / (q - p);
                let m = MatrixPoint {
                    dim: 2,
                    k,
                    l,
                    p,
                    q,
                    lambda,
                    sigma: 0.5,
                    rho: Cutoff::Finite(1.0),
                };
                let c = InequalityCase::from_matrix(name, &m).unwrap();
                let b = beta_split(&c).unwrap();
                assert!(b.beta.abs() < 1e-12);
                assert!((b.a - (lambda + l as f64) / (lambda + s)).abs() < 1e-12);
                assert!((b.b - (s - l as f64) / (lambda + s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plateau_bound_from_campanato() {
        // M(|Du|) only adds to the rhs; on a plateau the campanato factor
        // alone dominates |u(x)| up to the effective-radius correction.
        let u = plateau(2, 64);
        let d = *u.domain();
        let m = MatrixPoint {
            dim: 2,
            k: 1,
            l: 0,
            p: 2.0,
            q: 4.0,
            lambda: 0.5,
            sigma: 0.5,
            rho: Cutoff::Finite(0.5),
        };
        let c = InequalityCase::from_matrix(CaseName::Theorem1, &m).unwrap();
        let li = LocalInterpolation::new(&u, &c, 8, &CenterGrid::every_point()).unwrap();
        let x = d.nearest([0.1, -0.2]);
        let r = li.ratio(x).unwrap();
        assert!(r.ratio <= 1.1, "{r:?}");
        assert!(r.rhs_terms["campanato"] >= 2.0 / 1.1);
    }

    #[test]
    fn sampling_is_seeded_and_resolution_independent() {
        let d = Domain::new(2, 4.0, 64, 0.5).unwrap();
        let a = sample_points(&d, 9, 50);
        assert_eq!(a, sample_points(&d, 9, 50));
        assert_ne!(a, sample_points(&d, 10, 50));
        let fine = d.with_resolution(128).unwrap();
        for (i, j) in a.iter().zip(sample_points(&fine, 9, 50)) {
            let (p, q) = (d.point(*i), fine.point(j));
            assert!((p[0] - q[0]).abs() <= d.spacing() && (p[1] - q[1]).abs() <= d.spacing());
        }
    }
}
