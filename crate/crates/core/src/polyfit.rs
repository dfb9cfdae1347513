//! Best polynomial approximation on a ball in the discrete `L^q` sense,
//! `q ∈ {1, 2}`. This is the inner infimum of the Campanato seminorm.
//!
//! Coordinates are centred at the ball centre and scaled by the radius.
//! `q = 2` solves the normal equations; `q = 1` uses iteratively reweighted
//! least squares and reports the smallest `L^1` error among all iterates and
//! the lower-degree optimum, so the result is an upper bound on the true
//! infimum that is monotone in the degree.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::ball::Ball;
use crate::error::{invalid, Result};
use crate::grid::Domain;

pub const MAX_DEGREE: i32 = 3;
pub const IRLS_MAX_ITER: usize = 200;
pub const IRLS_REL_TOL: f64 = 1e-8;
pub const IRLS_SMOOTHING: f64 = 1e-9;

/// Monomials of total degree at most `degree` in graded order.
/// `degree = -1` is the zero space.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyBasis {
    dim: usize,
    degree: i32,
    exponents: Vec<[u32; 2]>,
}

impl PolyBasis {
    pub fn new(dim: usize, degree: i32) -> Result<Self> {
        if !(-1..=MAX_DEGREE).contains(&degree) {
            return Err(invalid(
                "degree",
                format!("{degree} not in -1..={MAX_DEGREE}"),
            ));
        }
        let mut exponents = Vec::new();
        for total in 0..=degree.max(-1) {
            let total = total as u32;
            if dim == 1 {
                exponents.push([total, 0]);
            } else {
                for a in (0..=total).rev() {
                    exponents.push([a, total - a]);
                }
            }
        }
        Ok(Self {
            dim,
            degree,
            exponents,
        })
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[[u32; 2]] {
        &self.exponents
    }

    fn row(&self, p: [f64; 2], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.exponents) {
            *o = p[0].powi(e[0] as i32)
                * if self.dim == 2 {
                    p[1].powi(e[1] as i32)
                } else {
                    1.0
                };
        }
    }

    pub fn eval(&self, coefficients: &[f64], p: [f64; 2]) -> f64 {
        let mut row = vec![0.0; self.len()];
        self.row(p, &mut row);
        row.iter().zip(coefficients).map(|(a, c)| a * c).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub degree: i32,
    pub coefficients: Vec<f64>,
    /// `((1/#B) Σ |u - P|^q)^{1/q}`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rank_deficient: bool,
}

/// Best fit of `u` on `ball` by polynomials of degree at most `degree`.
pub fn best_polynomial(
    domain: &Domain,
    values: &[f64],
    ball: &Ball,
    degree: i32,
    q: f64,
) -> Result<FitResult> {
    let h = domain.spacing();
    let scale = ball.radius();
    let points: Vec<[f64; 2]> = ball
        .points()
        .iter()
        .map(|(o, _)| [o[0] as f64 * h / scale, o[1] as f64 * h / scale])
        .map(|p| if domain.dim() == 1 { [p[0], 0.0] } else { p })
        .collect();
    let data = ball.gather(values);
    fit_points(domain.dim(), &points, &data, degree, q)
}

/// Fit on explicit (already centred and scaled) coordinates.
pub fn fit_points(
    dim: usize,
    points: &[[f64; 2]],
    data: &[f64],
    degree: i32,
    q: f64,
) -> Result<FitResult> {
    if q != 1.0 && q != 2.0 {
        return Err(invalid("q", format!("{q} not in {{1, 2}}")));
    }
    let basis = PolyBasis::new(dim, degree)?;
    if points.len() != data.len() || points.is_empty() {
        return Err(invalid("points", "empty or mismatched sample"));
    }
    if degree >= 0 && points.len() < basis.len() {
        return Err(invalid(
            "ball",
            format!(
                "{} points cannot determine {} coefficients",
                points.len(),
                basis.len()
            ),
        ));
    }
    let m = points.len() as f64;
    if basis.is_empty() {
        let residual = lq_mean(data.iter().copied(), q, m);
        return Ok(FitResult {
            degree,
            coefficients: Vec::new(),
            residual,
            iterations: 0,
            converged: true,
            rank_deficient: false,
        });
    }
    let design = design_matrix(&basis, points);
    if q == 2.0 {
        let (c, rank_deficient) = weighted_lsq(&design, data, None);
        let residual = residual_with(&design, data, &c, 2.0);
        return Ok(FitResult {
            degree,
            coefficients: c.iter().copied().collect(),
            residual,
            iterations: 1,
            converged: true,
            rank_deficient,
        });
    }
    if degree == 0 {
        let med = lower_median(data);
        return Ok(FitResult {
            degree,
            coefficients: vec![med],
            residual: lq_mean(data.iter().map(|v| v - med), 1.0, m),
            iterations: 0,
            converged: true,
            rank_deficient: false,
        });
    }
    irls_l1(dim, points, data, &basis, &design)
}

fn irls_l1(
    dim: usize,
    points: &[[f64; 2]],
    data: &[f64],
    basis: &PolyBasis,
    design: &DMatrix<f64>,
) -> Result<FitResult> {
    let b = basis.len();
    let pad = |c: &[f64]| {
        let mut v = c.to_vec();
        v.resize(b, 0.0);
        DVector::from_vec(v)
    };
    let lower = fit_points(dim, points, data, basis.degree() - 1, 1.0)?;
    let mut best_c = pad(&lower.coefficients);
    let mut best = lower.residual;

    let data_scale = data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if data_scale == 0.0 {
        return Ok(FitResult {
            degree: basis.degree(),
            coefficients: vec![0.0; b],
            residual: 0.0,
            iterations: 0,
            converged: true,
            rank_deficient: false,
        });
    }
    let eps = IRLS_SMOOTHING * data_scale;

    let (mut c, mut rank_deficient) = weighted_lsq(design, data, None);
    let mut current = residual_with(design, data, &c, 1.0);
    if current < best {
        best = current;
        best_c = c.clone();
    }
    let mut converged = false;
    let mut iterations = 0;
    let mut weights = vec![0.0; data.len()];
    for it in 1..=IRLS_MAX_ITER {
        iterations = it;
        let fitted = design * &c;
        for ((w, y), f) in weights.iter_mut().zip(data).zip(fitted.iter()) {
            *w = 1.0 / (y - f).abs().max(eps);
        }
        let (next, deficient) = weighted_lsq(design, data, Some(&weights));
        rank_deficient |= deficient;
        let next_res = residual_with(design, data, &next, 1.0);
        if next_res < best {
            best = next_res;
            best_c = next.clone();
        }
        let change = (current - next_res).abs();
        c = next;
        current = next_res;
        if change <= IRLS_REL_TOL * current.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    if let Some((vc, vres)) = polish_vertex(design, data, &best_c) {
        if vres < best {
            best = vres;
            best_c = vc;
        }
    }
    Ok(FitResult {
        degree: basis.degree(),
        coefficients: best_c.iter().copied().collect(),
        residual: best,
        iterations,
        converged,
        rank_deficient,
    })
}

/// Exact finish for the `L^1` fit. An optimum is attained at a vertex where
/// `b` residuals vanish; starting from the vertex nearest to `c`, moves along
/// descending edges with an exact (weighted-median) line search until no edge
/// descends.
fn polish_vertex(
    design: &DMatrix<f64>,
    data: &[f64],
    c: &DVector<f64>,
) -> Option<(DVector<f64>, f64)> {
    const MAX_PIVOTS: usize = 500;
    let b = design.ncols();
    let m = data.len();
    let fitted = design * c;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        (data[i] - fitted[i])
            .abs()
            .total_cmp(&(data[j] - fitted[j]).abs())
            .then(i.cmp(&j))
    });
    let mut active = independent_rows(design, &order, b)?;
    let mut coef = interpolate(design, data, &active)?;
    let mut residual: Vec<f64> = (design * &coef)
        .iter()
        .zip(data)
        .map(|(f, y)| y - f)
        .collect();
    let scale = data
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);

    for _ in 0..MAX_PIVOTS {
        let sub = DMatrix::from_fn(b, b, |r, k| design[(active[r], k)]);
        let inv = sub.try_inverse()?;
        let mut best_move: Option<(f64, usize, f64, DVector<f64>)> = None;
        for j in 0..b {
            let dir = inv.column(j).into_owned();
            let g = design * &dir;
            let mut slope_pos = 1.0;
            let mut slope_neg = 1.0;
            for i in 0..m {
                if active.contains(&i) {
                    continue;
                }
                let gi = g[i];
                if residual[i] == 0.0 {
                    slope_pos += gi.abs();
                    slope_neg += gi.abs();
                } else {
                    let sg = residual[i].signum();
                    slope_pos -= gi * sg;
                    slope_neg += gi * sg;
                }
            }
            for (sign, slope) in [(1.0, slope_pos), (-1.0, slope_neg)] {
                if slope < -1e-12 && best_move.as_ref().is_none_or(|b| slope < b.0) {
                    best_move = Some((slope, j, sign, g.clone() * sign));
                }
            }
        }
        let Some((slope, j, sign, g)) = best_move else {
            break;
        };
        // f(τ) = Σ |r_i - τ g_i| along the edge; walk the breakpoints.
        let mut breaks: Vec<(f64, usize)> = (0..m)
            .filter(|i| !active.contains(i) && g[*i] != 0.0)
            .filter_map(|i| {
                let tau = residual[i] / g[i];
                (tau > 0.0).then_some((tau, i))
            })
            .collect();
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut s = slope;
        let mut entering = None;
        for (tau, i) in breaks {
            s += 2.0 * g[i].abs();
            if s >= 0.0 {
                entering = Some((tau, i));
                break;
            }
        }
        let Some((_, i)) = entering else { break };
        let _ = sign;
        let mut next = active.clone();
        next[j] = i;
        let Some(next_coef) = interpolate(design, data, &next) else {
            break;
        };
        let next_residual: Vec<f64> = (design * &next_coef)
            .iter()
            .zip(data)
            .map(|(f, y)| y - f)
            .collect();
        let old: f64 = residual.iter().map(|r| r.abs()).sum();
        let new: f64 = next_residual.iter().map(|r| r.abs()).sum();
        if new >= old - 1e-15 * scale {
            break;
        }
        active = next;
        coef = next_coef;
        residual = next_residual;
    }
    let res = residual.iter().map(|r| r.abs()).sum::<f64>() / m as f64;
    Some((coef, res))
}

/// First `b` rows in `order` that are linearly independent.
fn independent_rows(design: &DMatrix<f64>, order: &[usize], b: usize) -> Option<Vec<usize>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(b);
    let mut rows = Vec::with_capacity(b);
    for &i in order {
        let mut v = design.row(i).transpose();
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        for q in &basis {
            let proj = q.dot(&v);
            v -= q * proj;
        }
        let norm = v.norm();
        if norm > 1e-10 * norm0 {
            basis.push(v / norm);
            rows.push(i);
            if rows.len() == b {
                return Some(rows);
            }
        }
    }
    None
}

fn interpolate(design: &DMatrix<f64>, data: &[f64], rows: &[usize]) -> Option<DVector<f64>> {
    let b = design.ncols();
    let sub = DMatrix::from_fn(b, b, |r, k| design[(rows[r], k)]);
    let rhs = DVector::from_fn(b, |r, _| data[rows[r]]);
    let sol = sub.lu().solve(&rhs)?;
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}

fn design_matrix(basis: &PolyBasis, points: &[[f64; 2]]) -> DMatrix<f64> {
    let b = basis.len();
    let mut a = DMatrix::zeros(points.len(), b);
    let mut row = vec![0.0; b];
    for (i, p) in points.iter().enumerate() {
        basis.row(*p, &mut row);
        for j in 0..b {
            a[(i, j)] = row[j];
        }
    }
    a
}

/// Solves the (weighted) normal equations. Falls back to the minimum-norm
/// SVD solution when the Gram matrix is singular; the flag reports that.
fn weighted_lsq(a: &DMatrix<f64>, y: &[f64], w: Option<&[f64]>) -> (DVector<f64>, bool) {
    let b = a.ncols();
    let mut gram = DMatrix::<f64>::zeros(b, b);
    let mut rhs = DVector::<f64>::zeros(b);
    for i in 0..a.nrows() {
        let wi = w.map_or(1.0, |w| w[i]);
        for j in 0..b {
            let aij = a[(i, j)] * wi;
            rhs[j] += aij * y[i];
            for k in j..b {
                gram[(j, k)] += aij * a[(i, k)];
            }
        }
    }
    for j in 0..b {
        for k in 0..j {
            gram[(j, k)] = gram[(k, j)];
        }
    }
    let max_diag = (0..b).fold(0.0f64, |m, j| m.max(gram[(j, j)]));
    if let Some(chol) = gram.clone().cholesky() {
        let l = chol.l();
        let min_pivot = (0..b).fold(f64::INFINITY, |m, j| m.min(l[(j, j)] * l[(j, j)]));
        if min_pivot > 1e-12 * max_diag {
            return (chol.solve(&rhs), false);
        }
    }
    let svd = gram.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12 * max_diag.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(b));
    (sol, true)
}

fn residual_with(a: &DMatrix<f64>, y: &[f64], c: &DVector<f64>, q: f64) -> f64 {
    let fitted = a * c;
    lq_mean(
        y.iter().zip(fitted.iter()).map(|(y, f)| y - f),
        q,
        y.len() as f64,
    )
}

fn lq_mean(r: impl Iterator<Item = f64>, q: f64, m: f64) -> f64 {
    if q == 1.0 {
        r.map(f64::abs).sum::<f64>() / m
    } else {
        (r.map(|v| v * v).sum::<f64>() / m).sqrt()
    }
}

/// Lower median; an `L^1`-optimal constant.
pub fn lower_median(data: &[f64]) -> f64 {
    let mut v = data.to_vec();
    let k = (v.len() - 1) / 2;
    let (_, m, _) = v.select_nth_unstable_by(k, f64::total_cmp);
    *m
}

/// Outcome of comparing best-fit residuals at two degrees on one ball.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityCheck {
    pub center: usize,
    pub radius: f64,
    pub low_degree: i32,
    pub high_degree: i32,
    pub low_residual: f64,
    pub high_residual: f64,
    pub holds: bool,
}

/// Checks `residual(d2) <= residual(d1) + 1e-7 · scale` for `d1 <= d2`.
pub fn residual_monotonicity_check(
    domain: &Domain,
    values: &[f64],
    ball: &Ball,
    d1: i32,
    d2: i32,
    q: f64,
) -> Result<MonotonicityCheck> {
    if d1 > d2 {
        return Err(invalid(
            "degree",
            format!("expected d1 <= d2, got {d1} > {d2}"),
        ));
    }
    let low = best_polynomial(domain, values, ball, d1, q)?;
    let high = best_polynomial(domain, values, ball, d2, q)?;
    let scale = ball
        .gather(values)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(MonotonicityCheck {
        center: ball.center(),
        radius: ball.radius(),
        low_degree: d1,
        high_degree: d2,
        low_residual: low.residual,
        high_residual: high.residual,
        holds: high.residual <= low.residual + 1e-7 * scale.max(f64::MIN_POSITIVE),
    })
}
