use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{BallTable, CenterGrid, RadiusGrid, SeminormValue};
use crate::ball::{ball_from_stencil, ball_members, Ball, DiskStencil, RowPrefix};
use crate::error::{invalid, Result};
use crate::grid::{abs_pow, Domain, GridFunction};
use crate::polyfit::{best_polynomial, lower_median, PolyBasis};

/// `((1/#B) Σ_B |u|^q)^{1/q}` for every centre and radius.
pub fn morrey_table(
    u: &GridFunction,
    q: f64,
    radii: &RadiusGrid,
    centers: &CenterGrid,
) -> Result<BallTable> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(invalid("q", format!("{q} must be finite and at least 1")));
    }
    let domain = u.domain();
    let field: Vec<f64> = u.values().iter().map(|v| abs_pow(*v, q)).collect();
    let prefix = RowPrefix::new(domain, &field);
    let stencils = stencils(domain, radii)?;
    let center_list = centers.centers(domain);
    let values: Vec<f64> = center_list
        .par_iter()
        .flat_map_iter(|&c| {
            let idx = domain.grid_index(c);
            let prefix = &prefix;
            stencils.iter().map(move |st| {
                let mean = prefix.disk_sum(idx, st) / st.count() as f64;
                if q == 1.0 {
                    mean
                } else {
                    mean.max(0.0).powf(1.0 / q)
                }
            })
        })
        .collect();
    Ok(table(center_list, radii, &stencils, values, 0))
}

/// `sup_{x, r} r^λ ((1/#B_r(x)) Σ |u|^q)^{1/q}` with `r^λ` taken at the
/// effective radius of the discrete ball.
pub fn morrey_norm(
    u: &GridFunction,
    q: f64,
    lambda: f64,
    radii: &RadiusGrid,
    centers: &CenterGrid,
) -> Result<SeminormValue> {
    Ok(morrey_table(u, q, radii, centers)?.sup(lambda))
}

/// Best-fit residuals by polynomials of degree `k - 1` for every ball.
///
/// `k = 0` is the Morrey table. `q = 1, k = 1` uses the exact median on a
/// sliding window; other cases fit ball by ball.
pub fn campanato_table(
    u: &GridFunction,
    q: f64,
    k: usize,
    radii: &RadiusGrid,
    centers: &CenterGrid,
) -> Result<BallTable> {
    if q != 1.0 && q != 2.0 {
        return Err(invalid("q", format!("{q} not in {{1, 2}}")));
    }
    if k == 0 {
        return morrey_table(u, q, radii, centers);
    }
    PolyBasis::new(u.domain().dim(), k as i32 - 1)?;
    if q == 1.0 && k == 1 {
        return sliding_table(u, radii, centers, WindowStat::MedianResidual);
    }
    fitted_table(u, q, k as i32 - 1, radii, centers)
}

pub fn campanato_seminorm(
    u: &GridFunction,
    q: f64,
    lambda: f64,
    k: usize,
    radii: &RadiusGrid,
    centers: &CenterGrid,
) -> Result<SeminormValue> {
    Ok(campanato_table(u, q, k, radii, centers)?.sup(lambda))
}

/// Double averages `(1/#B)^2 Σ_{y,z ∈ B} |u(y) - u(z)|`.
pub fn bmo_table(u: &GridFunction, radii: &RadiusGrid, centers: &CenterGrid) -> Result<BallTable> {
    sliding_table(u, radii, centers, WindowStat::MeanOscillation)
}

pub fn bmo_seminorm(
    u: &GridFunction,
    radii: &RadiusGrid,
    centers: &CenterGrid,
) -> Result<SeminormValue> {
    Ok(bmo_table(u, radii, centers)?.sup(0.0))
}

fn stencils(domain: &Domain, radii: &RadiusGrid) -> Result<Vec<DiskStencil>> {
    radii
        .radii()
        .iter()
        .map(|&r| DiskStencil::new(domain, r))
        .collect()
}

fn table(
    centers: Vec<usize>,
    radii: &RadiusGrid,
    stencils: &[DiskStencil],
    values: Vec<f64>,
    skipped: usize,
) -> BallTable {
    BallTable::new(
        centers,
        radii.radii().to_vec(),
        stencils.iter().map(DiskStencil::effective_radius).collect(),
        values,
        skipped,
    )
}

// ---------------------------------------------------------------------------
// Sliding windows over value ranks.

#[derive(Clone, Copy)]
enum WindowStat {
    MedianResidual,
    MeanOscillation,
}

const NO_RANK: u32 = u32::MAX;

/// Ranks of the distinct nonzero values; zeros are counted, not stored.
struct RankIndex {
    ranks: Vec<u32>,
    sorted: Vec<f64>,
    negatives: usize,
}

impl RankIndex {
    fn new(values: &[f64]) -> Self {
        let mut sorted: Vec<f64> = values.iter().copied().filter(|v| *v != 0.0).collect();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let ranks = values
            .iter()
            .map(|v| {
                if *v == 0.0 {
                    NO_RANK
                } else {
                    sorted.partition_point(|s| s < v) as u32
                }
            })
            .collect();
        let negatives = sorted.partition_point(|s| *s < 0.0);
        Self {
            ranks,
            sorted,
            negatives,
        }
    }
}

/// Counts and sums by rank, with order statistics.
struct Fenwick {
    cnt: Vec<i64>,
    sum: Vec<f64>,
    top: usize,
}

impl Fenwick {
    fn new(size: usize) -> Self {
        let top = if size == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - size.leading_zeros())
        };
        Self {
            cnt: vec![0; size + 1],
            sum: vec![0.0; size + 1],
            top,
        }
    }

    fn add(&mut self, rank: usize, dc: i64, dv: f64) {
        let mut i = rank + 1;
        while i < self.cnt.len() {
            self.cnt[i] += dc;
            self.sum[i] += dv;
            i += i & i.wrapping_neg();
        }
    }

    /// Count and sum over ranks `< end`.
    fn prefix(&self, end: usize) -> (i64, f64) {
        let (mut c, mut s) = (0, 0.0);
        let mut i = end;
        while i > 0 {
            c += self.cnt[i];
            s += self.sum[i];
            i &= i - 1;
        }
        (c, s)
    }

    /// Rank of the `k`-th smallest stored element (0-based).
    fn kth(&self, k: i64) -> usize {
        let mut pos = 0;
        let mut rem = k + 1;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.cnt.len() && self.cnt[next] < rem {
                pos = next;
                rem -= self.cnt[next];
            }
            step >>= 1;
        }
        pos
    }
}

struct Window<'a> {
    index: &'a RankIndex,
    tree: Fenwick,
    count: i64,
    total: f64,
    total_abs: f64,
    /// `Σ |a - b|` over unordered pairs of stored values.
    pairs: f64,
    track_pairs: bool,
}

impl<'a> Window<'a> {
    fn new(index: &'a RankIndex, track_pairs: bool) -> Self {
        Self {
            index,
            tree: Fenwick::new(index.sorted.len()),
            count: 0,
            total: 0.0,
            total_abs: 0.0,
            pairs: 0.0,
            track_pairs,
        }
    }

    fn distance_sum(&self, rank: usize) -> f64 {
        let v = self.index.sorted[rank];
        let (c_le, s_le) = self.tree.prefix(rank + 1);
        v * c_le as f64 - s_le + (self.total - s_le) - v * (self.count - c_le) as f64
    }

    fn insert(&mut self, rank: u32) {
        let r = rank as usize;
        let v = self.index.sorted[r];
        if self.track_pairs {
            self.pairs += self.distance_sum(r);
        }
        self.tree.add(r, 1, v);
        self.count += 1;
        self.total += v;
        self.total_abs += v.abs();
    }

    fn remove(&mut self, rank: u32) {
        let r = rank as usize;
        let v = self.index.sorted[r];
        self.tree.add(r, -1, -v);
        self.count -= 1;
        self.total -= v;
        self.total_abs -= v.abs();
        if self.track_pairs {
            self.pairs -= self.distance_sum(r);
        }
    }

    /// `(1/m) Σ |a - med|` over the window plus `zeros` zero values, where
    /// `med` is the lower median.
    fn median_residual(&self, zeros: i64) -> f64 {
        let m = self.count + zeros;
        let k = (m - 1) / 2;
        let neg = self.tree.prefix(self.index.negatives).0;
        let (med, boundary) = if k < neg {
            let r = self.tree.kth(k);
            (self.index.sorted[r], r + 1)
        } else if k < neg + zeros {
            (0.0, self.index.negatives)
        } else {
            let r = self.tree.kth(k - zeros);
            (self.index.sorted[r], r + 1)
        };
        let (c_le, s_le) = self.tree.prefix(boundary);
        let s = med * c_le as f64 - s_le + (self.total - s_le) - med * (self.count - c_le) as f64
            + zeros as f64 * med.abs();
        s.max(0.0) / m as f64
    }

    fn mean_oscillation(&self, zeros: i64) -> f64 {
        let m = (self.count + zeros) as f64;
        (2.0 * self.pairs.max(0.0) + 2.0 * zeros as f64 * self.total_abs) / (m * m)
    }
}

fn sliding_table(
    u: &GridFunction,
    radii: &RadiusGrid,
    centers: &CenterGrid,
    stat: WindowStat,
) -> Result<BallTable> {
    let domain = *u.domain();
    let index = RankIndex::new(u.values());
    let stencils = stencils(&domain, radii)?;
    let n = domain.points_per_axis();
    let stride = centers.stride();
    let center_rows: Vec<usize> = match domain.dim() {
        1 => vec![0],
        _ => (0..n).step_by(stride).collect(),
    };
    let jobs: Vec<(usize, usize)> = (0..stencils.len())
        .flat_map(|j| center_rows.iter().map(move |&row| (j, row)))
        .collect();
    let rows: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(j, row)| sweep_row(&domain, &index, &stencils[j], row, stride, stat))
        .collect();
    // rows are ordered radius-major; transpose to centre-major.
    let per_row = n.div_ceil(stride);
    let nr = stencils.len();
    let center_list = centers.centers(&domain);
    let mut values = vec![0.0; center_list.len() * nr];
    for (job, row_vals) in jobs.iter().zip(&rows) {
        let (j, row) = *job;
        let row_slot = row / stride;
        for (col_slot, v) in row_vals.iter().enumerate() {
            let c = row_slot * per_row + col_slot;
            values[c * nr + j] = *v;
        }
    }
    Ok(table(center_list, radii, &stencils, values, 0))
}

/// Slides the ball along one row of centres, reporting at every `stride`-th
/// column.
fn sweep_row(
    domain: &Domain,
    index: &RankIndex,
    stencil: &DiskStencil,
    row: usize,
    stride: usize,
    stat: WindowStat,
) -> Vec<f64> {
    let n = domain.points_per_axis() as isize;
    let dim = domain.dim();
    let flat = |a: isize, col: isize| -> usize {
        if dim == 1 {
            col as usize
        } else {
            (a * n + col) as usize
        }
    };
    // stencil rows that fall inside the box for this centre row
    let live: Vec<(isize, isize)> = stencil
        .rows()
        .iter()
        .filter_map(|&(dy, w)| {
            let a = if dim == 1 { 0 } else { row as isize + dy };
            (0..n).contains(&a).then_some((a, w))
        })
        .collect();
    let mut win = Window::new(index, matches!(stat, WindowStat::MeanOscillation));
    for &(a, w) in &live {
        for col in 0..=w.min(n - 1) {
            let r = index.ranks[flat(a, col)];
            if r != NO_RANK {
                win.insert(r);
            }
        }
    }
    let full = stencil.count() as i64;
    let mut out = Vec::with_capacity((n as usize).div_ceil(stride));
    for c in 0..n {
        if c > 0 {
            for &(a, w) in &live {
                let leaving = c - 1 - w;
                if leaving >= 0 {
                    let r = index.ranks[flat(a, leaving)];
                    if r != NO_RANK {
                        win.remove(r);
                    }
                }
                let entering = c + w;
                if entering < n {
                    let r = index.ranks[flat(a, entering)];
                    if r != NO_RANK {
                        win.insert(r);
                    }
                }
            }
        }
        if c as usize % stride == 0 {
            let zeros = full - win.count;
            out.push(if win.count == 0 {
                0.0
            } else {
                match stat {
                    WindowStat::MedianResidual => win.median_residual(zeros),
                    WindowStat::MeanOscillation => win.mean_oscillation(zeros),
                }
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Ball-by-ball fits.

fn fitted_table(
    u: &GridFunction,
    q: f64,
    degree: i32,
    radii: &RadiusGrid,
    centers: &CenterGrid,
) -> Result<BallTable> {
    let domain = *u.domain();
    let basis = PolyBasis::new(domain.dim(), degree)?;
    let stencils = stencils(&domain, radii)?;
    let grams: Vec<DMatrix<f64>> = stencils
        .iter()
        .map(|st| stencil_gram(&domain, &basis, st))
        .collect();
    let center_list = centers.centers(&domain);
    let per_center: Vec<(Vec<f64>, usize)> = center_list
        .par_iter()
        .map(|&c| {
            let mut skipped = 0;
            let vals = stencils
                .iter()
                .zip(&grams)
                .map(|(st, gram)| {
                    fit_ball(
                        u,
                        q,
                        degree,
                        &basis,
                        &ball_from_stencil(&domain, c, st),
                        gram,
                    )
                    .unwrap_or_else(|_| {
                        skipped += 1;
                        0.0
                    })
                })
                .collect();
            (vals, skipped)
        })
        .collect();
    let skipped = per_center.iter().map(|(_, s)| s).sum();
    let values = per_center.into_iter().flat_map(|(v, _)| v).collect();
    Ok(table(center_list, radii, &stencils, values, skipped))
}

fn stencil_gram(domain: &Domain, basis: &PolyBasis, st: &DiskStencil) -> DMatrix<f64> {
    let b = basis.len();
    let mut g = DMatrix::zeros(b, b);
    for o in st.offsets() {
        let phi = monomials(basis, scaled(domain, o, st.radius()));
        g += &phi * phi.transpose();
    }
    g
}

fn fit_ball(
    u: &GridFunction,
    q: f64,
    degree: i32,
    basis: &PolyBasis,
    ball: &Ball,
    gram: &DMatrix<f64>,
) -> Result<f64> {
    let domain = u.domain();
    let data = ball.gather(u.values());
    if data.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    if q == 1.0 && zero_is_optimal(domain, basis, ball, &data, gram) {
        return Ok(data.iter().map(|v| v.abs()).sum::<f64>() / data.len() as f64);
    }
    Ok(best_polynomial(domain, u.values(), ball, degree, q)?.residual)
}

/// The entry of [`campanato_table`] for the single ball `B_r(center)`.
/// Fitted degrees take the same path as the table; degree 0 and the `q = 1`
/// median are summed directly.
pub fn campanato_ball(
    u: &GridFunction,
    q: f64,
    k: usize,
    center: usize,
    radius: f64,
) -> Result<f64> {
    if q != 1.0 && q != 2.0 {
        return Err(invalid("q", format!("{q} not in {{1, 2}}")));
    }
    let domain = *u.domain();
    let ball = ball_members(&domain, center, radius)?;
    if k == 0 || (q == 1.0 && k == 1) {
        let data = ball.gather(u.values());
        let m = data.len() as f64;
        return Ok(match (k, q == 1.0) {
            (0, true) => data.iter().map(|v| v.abs()).sum::<f64>() / m,
            (0, false) => (data.iter().map(|v| v * v).sum::<f64>() / m).sqrt(),
            _ => {
                let med = lower_median(&data);
                data.iter().map(|v| (v - med).abs()).sum::<f64>() / m
            }
        });
    }
    let basis = PolyBasis::new(domain.dim(), k as i32 - 1)?;
    let st = DiskStencil::new(&domain, radius)?;
    fit_ball(
        u,
        q,
        k as i32 - 1,
        &basis,
        &ball,
        &stencil_gram(&domain, &basis, &st),
    )
}

fn scaled(domain: &Domain, o: [isize; 2], radius: f64) -> [f64; 2] {
    let h = domain.spacing();
    if domain.dim() == 1 {
        [o[0] as f64 * h / radius, 0.0]
    } else {
        [o[0] as f64 * h / radius, o[1] as f64 * h / radius]
    }
}

fn monomials(basis: &PolyBasis, p: [f64; 2]) -> DVector<f64> {
    DVector::from_iterator(
        basis.len(),
        basis
            .exponents()
            .iter()
            .map(|e| p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32)),
    )
}

/// Certificate that the zero polynomial is an `L^1`-best fit: weights
/// `w = φ·c` on the zero samples with `|w| <= 1` that balance the signs of
/// the nonzero samples. Scaled coordinates lie in the unit ball, so
/// `Σ|c| <= 1` bounds `|w|`.
fn zero_is_optimal(
    domain: &Domain,
    basis: &PolyBasis,
    ball: &Ball,
    data: &[f64],
    gram: &DMatrix<f64>,
) -> bool {
    let b = basis.len();
    let mut g_nz = DMatrix::zeros(b, b);
    let mut rhs = DVector::zeros(b);
    for ((o, _), v) in ball.points().iter().zip(data) {
        if *v != 0.0 {
            let phi = monomials(basis, scaled(domain, *o, ball.radius()));
            g_nz += &phi * phi.transpose();
            rhs += &phi * v.signum();
        }
    }
    let g_zero = gram - g_nz;
    let Some(chol) = g_zero.cholesky() else {
        return false;
    };
    let c = chol.solve(&rhs);
    c.iter().map(|v| v.abs()).sum::<f64>() * (1.0 + 1e-9) < 1.0
}
