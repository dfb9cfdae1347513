//! Cell-centred uniform grids on the box `[-L, L]^N`, `N ∈ {1, 2}`.
//!
//! Functions are sampled at cell centres `x_i = -L + (i + 1/2) h` and are
//! extended by zero outside the box. Storage is row-major: for `N = 2` the
//! flat index of `[i0, i1]` is `i0 * n + i1`.

mod dump;

pub use dump::{read_dump, write_dump};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduce::ordered_sum;

/// Multi-index of a grid point. The second slot is unused (zero) for `N = 1`.
pub type GridIndex = [usize; 2];

/// Integer offset between grid points.
pub type Offset = [isize; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
    support_margin: f64,
}

impl Domain {
    pub fn new(
        dim: usize,
        half_width: f64,
        points_per_axis: usize,
        support_margin: f64,
    ) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidDomain(format!(
                "dimension {dim} not in {{1, 2}}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "half width {half_width} must be positive"
            )));
        }
        if points_per_axis < 16 || points_per_axis % 2 != 0 {
            return Err(Error::InvalidDomain(format!(
                "points per axis {points_per_axis} must be even and at least 16"
            )));
        }
        let h = 2.0 * half_width / points_per_axis as f64;
        if !(support_margin.is_finite() && support_margin < half_width) {
            return Err(Error::InvalidDomain(format!(
                "support margin {support_margin} must be below the half width {half_width}"
            )));
        }
        if support_margin < 4.0 * h {
            return Err(Error::InvalidDomain(format!(
                "support margin {support_margin} is below four grid spacings ({})",
                4.0 * h
            )));
        }
        Ok(Self {
            dim,
            half_width,
            points_per_axis,
            support_margin,
        })
    }

    /// Same box and margin at another resolution.
    pub fn with_resolution(&self, points_per_axis: usize) -> Result<Self> {
        Self::new(
            self.dim,
            self.half_width,
            points_per_axis,
            self.support_margin,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn support_margin(&self) -> f64 {
        self.support_margin
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// `h^N`, the weight of one cell in discrete integrals.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Euclidean diameter of the box.
    pub fn diameter(&self) -> f64 {
        2.0 * self.half_width * (self.dim as f64).sqrt()
    }

    /// Number of grid points, `n^N`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn grid_index(&self, flat: usize) -> GridIndex {
        let n = self.points_per_axis;
        match self.dim {
            1 => [flat, 0],
            _ => [flat / n, flat % n],
        }
    }

    pub fn flat_index(&self, idx: GridIndex) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] * self.points_per_axis + idx[1],
        }
    }

    /// Physical coordinates of a grid point; the second slot is 0 for `N = 1`.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let idx = self.grid_index(flat);
        match self.dim {
            1 => [self.coord(idx[0]), 0.0],
            _ => [self.coord(idx[0]), self.coord(idx[1])],
        }
    }

    /// Flat index of `idx + offset`, or `None` outside the box.
    pub fn shifted(&self, flat: usize, offset: Offset) -> Option<usize> {
        let idx = self.grid_index(flat);
        let n = self.points_per_axis as isize;
        let a = idx[0] as isize + offset[0];
        if a < 0 || a >= n {
            return None;
        }
        if self.dim == 1 {
            return Some(a as usize);
        }
        let b = idx[1] as isize + offset[1];
        if b < 0 || b >= n {
            return None;
        }
        Some((a * n + b) as usize)
    }

    /// Grid point closest to a physical location (clamped to the box).
    pub fn nearest(&self, point: [f64; 2]) -> usize {
        let h = self.spacing();
        let n = self.points_per_axis;
        let axis = |x: f64| -> usize {
            let i = ((x + self.half_width) / h - 0.5).round();
            i.clamp(0.0, (n - 1) as f64) as usize
        };
        match self.dim {
            1 => axis(point[0]),
            _ => axis(point[0]) * n + axis(point[1]),
        }
    }

    /// True when the point lies in the band `|x|_∞ > L - m` where sampled
    /// functions must vanish.
    pub fn in_margin_band(&self, flat: usize) -> bool {
        let x = self.point(flat);
        let limit = self.half_width - self.support_margin;
        x[..self.dim].iter().any(|c| c.abs() > limit)
    }
}

/// A sampled function together with its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidValues(format!(
                "expected {} values, got {}",
                domain.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValues(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn zeros(domain: Domain) -> Self {
        Self {
            domain,
            values: vec![0.0; domain.len()],
        }
    }

    /// Samples `f` at every cell centre. The margin is not checked.
    pub fn from_fn(domain: Domain, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..domain.len()).map(|i| f(domain.point(i))).collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Fails if any nonzero value sits in the margin band.
    pub fn check_margin(&self) -> Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            if *v != 0.0 && self.domain.in_margin_band(i) {
                let x = self.domain.point(i);
                return Err(Error::MarginViolation(format!(
                    "value {v} at {:?} lies within the margin band (|x|_inf > {})",
                    &x[..self.domain.dim()],
                    self.domain.half_width - self.domain.support_margin
                )));
            }
        }
        Ok(())
    }

    /// Translates the samples by an integer number of cells. The result must
    /// still satisfy the margin invariant.
    pub fn shift(&self, offset: Offset) -> Result<Self> {
        let mut out = vec![0.0; self.values.len()];
        for (i, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            match self.domain.shifted(i, offset) {
                Some(j) => out[j] = v,
                None => {
                    return Err(Error::MarginViolation(format!(
                        "shift {:?} moves support outside the box",
                        &offset[..self.domain.dim()]
                    )))
                }
            }
        }
        let shifted = Self::new(self.domain, out)?;
        shifted.check_margin()?;
        Ok(shifted)
    }
}

/// Discrete `L^p` norm `(h^N Σ |f_i|^p)^{1/p}`.
pub fn lp_norm(field: &[f64], p: f64, domain: &Domain) -> f64 {
    debug_assert!(p >= 1.0 && p.is_finite());
    let s = ordered_sum(field.len(), |i| abs_pow(field[i], p));
    (domain.cell_volume() * s).powf(1.0 / p)
}

/// Discrete integral `h^N Σ |f_i|^p`.
pub fn integral_pow(field: &[f64], p: f64, domain: &Domain) -> f64 {
    domain.cell_volume() * ordered_sum(field.len(), |i| abs_pow(field[i], p))
}

#[inline]
pub(crate) fn abs_pow(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else if a == 0.0 {
        0.0
    } else {
        a.powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom1() -> Domain {
        Domain::new(1, 4.0, 64, 0.5).unwrap()
    }

    #[test]
    fn domain_validation() {
        assert!(Domain::new(3, 1.0, 64, 0.2).is_err());
        assert!(Domain::new(1, 1.0, 15, 0.5).is_err());
        assert!(Domain::new(1, 1.0, 17, 0.5).is_err());
        // m < 4h with h = 2/16
        assert!(Domain::new(1, 1.0, 16, 0.3).is_err());
        assert!(Domain::new(1, 1.0, 16, 1.0).is_err());
        let d = Domain::new(2, 1.0, 16, 0.5).unwrap();
        assert_eq!(d.len(), 256);
        assert!((d.spacing() * 16.0 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn index_roundtrip_and_points() {
        let d = Domain::new(2, 4.0, 32, 1.0).unwrap();
        for flat in [0, 1, 31, 32, 500, 1023] {
            assert_eq!(d.flat_index(d.grid_index(flat)), flat);
            assert_eq!(d.nearest(d.point(flat)), flat);
        }
        assert_eq!(d.point(0), [-4.0 + 0.125, -4.0 + 0.125]);
        assert_eq!(d.shifted(0, [-1, 0]), None);
        assert_eq!(d.shifted(0, [1, 2]), Some(34));
    }

    #[test]
    fn lp_norm_closed_forms() {
        let d = dom1();
        let c = vec![3.0; d.len()];
        for p in [1.0, 2.0, 3.5] {
            let expect = 3.0 * (8.0f64).powf(1.0 / p);
            assert!((lp_norm(&c, p, &d) - expect).abs() < 1e-12 * expect);
        }
        assert_eq!(lp_norm(&vec![0.0; d.len()], 2.0, &d), 0.0);
        let mut one = vec![0.0; d.len()];
        one[10] = 2.5;
        let h = d.spacing();
        assert!((lp_norm(&one, 3.0, &d) - 2.5 * h.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn margin_and_shift() {
        let d = dom1();
        let mut v = vec![0.0; d.len()];
        v[32] = 1.0;
        let u = GridFunction::new(d, v.clone()).unwrap();
        u.check_margin().unwrap();
        let s = u.shift([3, 0]).unwrap();
        assert_eq!(s.values()[35], 1.0);
        assert!(u.shift([29, 0]).is_err());
        v[0] = 1.0;
        assert!(GridFunction::new(d, v).unwrap().check_margin().is_err());
        assert!(GridFunction::new(d, vec![f64::NAN; d.len()]).is_err());
    }
}
