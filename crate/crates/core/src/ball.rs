//! Discrete Euclidean balls on the grid.
//!
//! A ball `B_r(x)` is the set of lattice points `y` with `|y - x| <= r`.
//! Points outside the box are kept as virtual members carrying the value 0,
//! so averages use the full lattice count and are translation invariant.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{abs_pow, Domain, GridIndex, Offset};

const MEMBERSHIP_SLACK: f64 = 1e-12;

/// The lattice offsets within distance `r`, stored row by row.
#[derive(Debug, Clone)]
pub struct DiskStencil {
    radius: f64,
    dim: usize,
    /// `(row offset, half width)`; for `N = 1` a single row `(0, m)`.
    rows: Vec<(isize, isize)>,
    count: usize,
    cell_volume: f64,
}

impl DiskStencil {
    pub fn new(domain: &Domain, radius: f64) -> Result<Self> {
        let h = domain.spacing();
        let floor = 2.0 * h;
        if !(radius >= floor * (1.0 - MEMBERSHIP_SLACK)) {
            return Err(Error::RadiusTooSmall { radius, floor });
        }
        let t = radius / h;
        let t2 = t * t * (1.0 + MEMBERSHIP_SLACK);
        let max_off = largest_int_with_square_le(t2);
        let rows: Vec<(isize, isize)> = match domain.dim() {
            1 => vec![(0, max_off)],
            _ => (-max_off..=max_off)
                .map(|dy| (dy, largest_int_with_square_le(t2 - (dy * dy) as f64)))
                .collect(),
        };
        let count = rows.iter().map(|(_, w)| (2 * w + 1) as usize).sum();
        Ok(Self {
            radius,
            dim: domain.dim(),
            rows,
            count,
            cell_volume: domain.cell_volume(),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of lattice points in the ball (independent of the centre).
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rows(&self) -> &[(isize, isize)] {
        &self.rows
    }

    /// Measure of the discrete ball, `count · h^N`.
    pub fn measure(&self) -> f64 {
        self.count as f64 * self.cell_volume
    }

    /// Radius of the continuous ball with the same measure as the discrete
    /// one. Scale weights `r^λ` use this radius so that discrete Hölder and
    /// inclusion arguments hold exactly.
    pub fn effective_radius(&self) -> f64 {
        let omega = unit_ball_volume(self.dim);
        (self.measure() / omega).powf(1.0 / self.dim as f64)
    }

    /// All offsets in lexicographic order.
    pub fn offsets(&self) -> impl Iterator<Item = Offset> + '_ {
        let dim = self.dim;
        self.rows.iter().flat_map(move |&(dy, w)| {
            (-w..=w).map(move |dx| if dim == 1 { [dx, 0] } else { [dy, dx] })
        })
    }
}

pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        _ => unreachable!("dimension is validated by Domain"),
    }
}

fn largest_int_with_square_le(t2: f64) -> isize {
    if t2 < 0.0 {
        return -1;
    }
    let mut m = t2.sqrt().floor() as isize;
    while ((m + 1) * (m + 1)) as f64 <= t2 {
        m += 1;
    }
    while m > 0 && (m * m) as f64 > t2 {
        m -= 1;
    }
    m
}

/// A ball at a specific centre.
#[derive(Debug, Clone)]
pub struct Ball {
    center: usize,
    center_index: GridIndex,
    radius: f64,
    /// Every lattice offset in the ball with its flat index when inside the box.
    points: Vec<(Offset, Option<usize>)>,
    effective_radius: f64,
}

impl Ball {
    pub fn center(&self) -> usize {
        self.center
    }

    pub fn center_index(&self) -> GridIndex {
        self.center_index
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn effective_radius(&self) -> f64 {
        self.effective_radius
    }

    /// In-box members in deterministic (lexicographic offset) order.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().filter_map(|(_, i)| *i)
    }

    pub fn member_count(&self) -> usize {
        self.points.iter().filter(|(_, i)| i.is_some()).count()
    }

    /// Lattice count including points outside the box.
    pub fn full_count(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[(Offset, Option<usize>)] {
        &self.points
    }

    /// Values on every lattice point of the ball, 0 outside the box.
    pub fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.points
            .iter()
            .map(|(_, i)| i.map_or(0.0, |i| values[i]))
            .collect()
    }
}

pub fn ball_members(domain: &Domain, center: usize, radius: f64) -> Result<Ball> {
    let stencil = DiskStencil::new(domain, radius)?;
    Ok(ball_from_stencil(domain, center, &stencil))
}

pub fn ball_from_stencil(domain: &Domain, center: usize, stencil: &DiskStencil) -> Ball {
    let points = stencil
        .offsets()
        .map(|o| (o, domain.shifted(center, o)))
        .collect();
    Ball {
        center,
        center_index: domain.grid_index(center),
        radius: stencil.radius(),
        points,
        effective_radius: stencil.effective_radius(),
    }
}

/// `((1/#B) Σ_{y ∈ B} |u(y)|^q)^{1/q}` with the zero extension counted in `#B`.
pub fn ball_average(values: &[f64], ball: &Ball, q: f64) -> f64 {
    let s: f64 = ball.members().map(|i| abs_pow(values[i], q)).sum();
    let mean = s / ball.full_count() as f64;
    if q == 1.0 {
        mean
    } else {
        mean.powf(1.0 / q)
    }
}

/// Per-row prefix sums of a nonnegative field for O(rows) disk sums.
#[derive(Debug, Clone)]
pub struct RowPrefix {
    n: usize,
    dim: usize,
    /// Row-major with `n + 1` entries per row.
    prefix: Vec<f64>,
}

impl RowPrefix {
    pub fn new(domain: &Domain, field: &[f64]) -> Self {
        let n = domain.points_per_axis();
        let rows = if domain.dim() == 1 { 1 } else { n };
        let mut prefix = vec![0.0; rows * (n + 1)];
        for r in 0..rows {
            let base = r * (n + 1);
            for c in 0..n {
                prefix[base + c + 1] = prefix[base + c] + field[r * n + c];
            }
        }
        Self {
            n,
            dim: domain.dim(),
            prefix,
        }
    }

    /// Sum of the field over the in-box part of the ball at `center`.
    pub fn disk_sum(&self, center: GridIndex, stencil: &DiskStencil) -> f64 {
        let n = self.n as isize;
        let (row0, col0) = if self.dim == 1 {
            (0isize, center[0] as isize)
        } else {
            (center[0] as isize, center[1] as isize)
        };
        let mut acc = 0.0;
        for &(dy, w) in stencil.rows() {
            let row = row0 + dy;
            if row < 0 || row >= n {
                continue;
            }
            let lo = (col0 - w).max(0);
            let hi = (col0 + w + 1).min(n);
            if lo >= hi {
                continue;
            }
            let base = row as usize * (self.n + 1);
            acc += self.prefix[base + hi as usize] - self.prefix[base + lo as usize];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1() -> Domain {
        Domain::new(1, 4.0, 64, 0.5).unwrap()
    }
    fn d2() -> Domain {
        Domain::new(2, 4.0, 32, 1.0).unwrap()
    }

    #[test]
    fn radius_floor_enforced() {
        let d = d1();
        assert!(ball_members(&d, 30, 1.9 * d.spacing()).is_err());
        assert!(ball_members(&d, 30, 2.0 * d.spacing()).is_ok());
    }

    #[test]
    fn interior_counts() {
        let d = d1();
        let b = ball_members(&d, 30, 2.0 * d.spacing()).unwrap();
        assert_eq!(b.member_count(), 5);
        assert!(b.members().any(|i| i == 30));

        let d = d2();
        let c = d.flat_index([16, 16]);
        let b = ball_members(&d, c, 2.0 * d.spacing()).unwrap();
        // brute-force offsets with dx^2 + dy^2 <= 4
        let brute = (-2i32..=2)
            .flat_map(|a| (-2i32..=2).map(move |b| (a, b)))
            .filter(|(a, b)| a * a + b * b <= 4)
            .count();
        assert_eq!(brute, 13);
        assert_eq!(b.member_count(), 13);
    }

    #[test]
    fn corner_balls_are_clipped() {
        let d = d2();
        let b = ball_members(&d, 0, 2.0 * d.spacing()).unwrap();
        assert!(b.member_count() < 13);
        assert_eq!(b.full_count(), 13);
    }

    #[test]
    fn ball_average_examples() {
        let d = d1();
        let c = vec![-2.5; d.len()];
        let b = ball_members(&d, 20, 3.3 * d.spacing()).unwrap();
        for q in [1.0, 2.0, 3.0] {
            assert!((ball_average(&c, &b, q) - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn nested_radii_nest_members() {
        let d = d2();
        let c = d.flat_index([10, 12]);
        let h = d.spacing();
        let mut prev: Vec<usize> = Vec::new();
        for k in 0..12 {
            let r = 2.0 * h * 1.2f64.powi(k);
            let b = ball_members(&d, c, r).unwrap();
            let m: Vec<usize> = b.members().collect();
            assert!(prev.iter().all(|i| m.contains(i)));
            prev = m;
        }
    }

    #[test]
    fn prefix_disk_sum_matches_members() {
        let d = d2();
        let f: Vec<f64> = (0..d.len()).map(|i| ((i * 37) % 11) as f64).collect();
        let pre = RowPrefix::new(&d, &f);
        for (c, r) in [(0usize, 2.5), (500, 4.0), (1023, 7.3), (333, 30.0)] {
            let st = DiskStencil::new(&d, r * d.spacing()).unwrap();
            let b = ball_from_stencil(&d, c, &st);
            let direct: f64 = b.members().map(|i| f[i]).sum();
            assert!((pre.disk_sum(d.grid_index(c), &st) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn effective_radius_tracks_radius() {
        let d = Domain::new(2, 4.0, 256, 0.5).unwrap();
        let st = DiskStencil::new(&d, 1.0).unwrap();
        assert!((st.effective_radius() - 1.0).abs() < 0.02);
    }
}
