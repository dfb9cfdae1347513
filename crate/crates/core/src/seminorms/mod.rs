//! Morrey, Campanato, BMO, maximal, Riesz, Sobolev and Gagliardo functionals.
//!
//! Sup-type functionals are taken over a discrete set of centres
//! ([`CenterGrid`]) and radii ([`RadiusGrid`]). Ball values are first
//! tabulated ([`BallTable`]) so that several scale exponents can be read off
//! one pass over the balls.

mod energy;
mod gagliardo;
mod maximal;
mod morrey;
mod riesz;
pub mod zeta;

pub use energy::sobolev_energy;
pub use gagliardo::{
    gagliardo_energy, gagliardo_parts, gagliardo_pointwise, lattice_kernel_sum, GagliardoParts,
};
pub use maximal::{localized_maximal, maximal_function};
pub use morrey::{
    bmo_seminorm, bmo_table, campanato_ball, campanato_seminorm, campanato_table, morrey_norm,
    morrey_table,
};
pub use riesz::riesz_potential;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::grid::Domain;
use crate::reduce::Argmax;

/// Radius cutoff `ρ`. `Infinite` lets radii grow to the box diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Finite(f64),
    Infinite,
}

impl Cutoff {
    pub fn new(rho: f64) -> Result<Self> {
        if rho == f64::INFINITY {
            Ok(Self::Infinite)
        } else if rho.is_finite() && rho > 0.0 {
            Ok(Self::Finite(rho))
        } else {
            Err(invalid("rho", format!("{rho} must be positive")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// `ρ` as a float, `+∞` for the infinite cutoff.
    pub fn value(&self) -> f64 {
        match self {
            Self::Finite(r) => *r,
            Self::Infinite => f64::INFINITY,
        }
    }

    /// `ρ^a`; only meaningful for a finite cutoff.
    pub fn pow(&self, a: f64) -> f64 {
        if a == 0.0 {
            1.0
        } else {
            self.value().powf(a)
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(r) => write!(f, "{r}"),
            Self::Infinite => f.write_str("INF"),
        }
    }
}

impl Serialize for Cutoff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(r) => s.serialize_f64(*r),
            Self::Infinite => s.serialize_str("INF"),
        }
    }
}

impl<'de> Deserialize<'de> for Cutoff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(r) => Cutoff::new(r).map_err(serde::de::Error::custom),
            Repr::Str(s) if s.eq_ignore_ascii_case("inf") => Ok(Cutoff::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "cutoff must be a positive number or \"INF\", got {s:?}"
            ))),
        }
    }
}

/// Geometric radii `r_min = 2h <= r <= r_max = min(ρ, diameter)`.
///
/// The ratio between neighbours is `2^{1/m}` with `m` a power of two, so
/// ladders at different resolutions nest and a dilation by 2 maps the ladder
/// into itself. A finite cutoff inside the box is anchored at `ρ` (and
/// included); otherwise the ladder is anchored at `2h`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusGrid {
    cutoff: Cutoff,
    radii: Vec<f64>,
    steps_per_octave: usize,
}

pub const MIN_RADIUS_COUNT: usize = 8;

impl RadiusGrid {
    pub fn new(domain: &Domain, cutoff: Cutoff, count: usize) -> Result<Self> {
        let r_min = 2.0 * domain.spacing();
        let diameter = domain.diameter();
        let (anchor_top, r_max) = match cutoff {
            Cutoff::Finite(rho) if rho < r_min * (1.0 - 1e-12) => {
                return Err(Error::EmptyRadiusGrid { rho, floor: r_min })
            }
            Cutoff::Finite(rho) if rho <= diameter => (true, rho.max(r_min)),
            _ => (false, diameter),
        };
        let count = count.max(MIN_RADIUS_COUNT);
        let octaves = (r_max / r_min).log2();
        let mut m = 2usize;
        while ((m as f64) * octaves + 1e-9).floor() as usize + 1 < count && m < 1 << 12 {
            m *= 2;
        }
        let steps = ((m as f64) * octaves + 1e-9).floor() as usize;
        let ratio = 2f64.powf(1.0 / m as f64);
        let radii: Vec<f64> = if anchor_top {
            let mut v: Vec<f64> = (0..=steps)
                .map(|j| (r_max / ratio.powi(j as i32)).max(r_min))
                .collect();
            v.reverse();
            v
        } else {
            (0..=steps).map(|j| r_min * ratio.powi(j as i32)).collect()
        };
        Ok(Self {
            cutoff,
            radii,
            steps_per_octave: m,
        })
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    /// Strictly increasing radii.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.radii[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().expect("radius grid is nonempty")
    }

    pub fn steps_per_octave(&self) -> usize {
        self.steps_per_octave
    }
}

/// Ball centres: grid points whose indices are all multiples of `stride`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterGrid {
    stride: usize,
}

impl CenterGrid {
    pub fn new(stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(invalid("stride", "must be at least 1"));
        }
        Ok(Self { stride })
    }

    pub fn every_point() -> Self {
        Self { stride: 1 }
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn contains(&self, domain: &Domain, flat: usize) -> bool {
        let idx = domain.grid_index(flat);
        idx[0] % self.stride == 0 && idx[1] % self.stride == 0
    }

    pub fn centers(&self, domain: &Domain) -> Vec<usize> {
        (0..domain.len())
            .filter(|&i| self.contains(domain, i))
            .collect()
    }
}

/// Per-ball values over a centre × radius grid, before the scale weight.
#[derive(Debug, Clone)]
pub struct BallTable {
    centers: Vec<usize>,
    radii: Vec<f64>,
    effective: Vec<f64>,
    /// `values[c * radii.len() + j]`.
    values: Vec<f64>,
    skipped: usize,
}

impl BallTable {
    pub(crate) fn new(
        centers: Vec<usize>,
        radii: Vec<f64>,
        effective: Vec<f64>,
        values: Vec<f64>,
        skipped: usize,
    ) -> Self {
        debug_assert_eq!(values.len(), centers.len() * radii.len());
        Self {
            centers,
            radii,
            effective,
            values,
            skipped,
        }
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn effective_radii(&self) -> &[f64] {
        &self.effective
    }

    pub fn value(&self, center_slot: usize, radius_slot: usize) -> f64 {
        self.values[center_slot * self.radii.len() + radius_slot]
    }

    /// `(centre, radius)` pairs that could not be evaluated.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// `max r_eff^λ · value` over the whole table.
    pub fn sup(&self, lambda: f64) -> SeminormValue {
        let weights: Vec<f64> = self
            .effective
            .iter()
            .map(|r| if lambda == 0.0 { 1.0 } else { r.powf(lambda) })
            .collect();
        let nr = self.radii.len();
        let mut best: Option<Argmax<(usize, usize)>> = None;
        for (c, &center) in self.centers.iter().enumerate() {
            for (j, w) in weights.iter().enumerate() {
                let v = w * self.values[c * nr + j];
                best = Argmax::better(
                    best,
                    Some(Argmax {
                        value: v,
                        key: (center, j),
                    }),
                );
            }
        }
        match best {
            Some(b) => SeminormValue {
                value: b.value,
                argmax_center: Some(b.key.0),
                argmax_radius: Some(self.radii[b.key.1]),
                skipped: self.skipped,
            },
            None => SeminormValue {
                value: 0.0,
                argmax_center: None,
                argmax_radius: None,
                skipped: self.skipped,
            },
        }
    }
}

/// A sup-type functional value with the ball that attains it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeminormValue {
    pub value: f64,
    pub argmax_center: Option<usize>,
    pub argmax_radius: Option<f64>,
    pub skipped: usize,
}

impl SeminormValue {
    pub fn plain(value: f64) -> Self {
        Self {
            value,
            argmax_center: None,
            argmax_radius: None,
            skipped: 0,
        }
    }

    pub fn record(
        &self,
        functional: &str,
        params: serde_json::Value,
        domain: &Domain,
        stride: usize,
    ) -> SeminormRecord {
        SeminormRecord {
            functional: functional.to_string(),
            params,
            value: self.value,
            argmax_center: self
                .argmax_center
                .map(|c| domain.point(c)[..domain.dim()].to_vec()),
            argmax_radius: self.argmax_radius,
            grid: GridTag {
                dim: domain.dim(),
                n: domain.points_per_axis(),
                half_width: domain.half_width(),
            },
            stride,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridTag {
    #[serde(rename = "N")]
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

/// JSON form of one evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct SeminormRecord {
    pub functional: String,
    pub params: serde_json::Value,
    pub value: f64,
    pub argmax_center: Option<Vec<f64>>,
    pub argmax_radius: Option<f64>,
    pub grid: GridTag,
    pub stride: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_serde() {
        let c: Cutoff = serde_json::from_str("\"INF\"").unwrap();
        assert_eq!(c, Cutoff::Infinite);
        let c: Cutoff = serde_json::from_str("0.5").unwrap();
        assert_eq!(c, Cutoff::Finite(0.5));
        assert!(serde_json::from_str::<Cutoff>("-1").is_err());
        assert!(serde_json::from_str::<Cutoff>("\"big\"").is_err());
        assert_eq!(serde_json::to_string(&Cutoff::Infinite).unwrap(), "\"INF\"");
    }

    #[test]
    fn radius_grid_shape() {
        let d = Domain::new(2, 4.0, 128, 0.5).unwrap();
        for cutoff in [Cutoff::Finite(0.5), Cutoff::Finite(1.0), Cutoff::Infinite] {
            let g = RadiusGrid::new(&d, cutoff, 8).unwrap();
            let r = g.radii();
            assert!(r.len() >= 8);
            assert!((r[0] - 2.0 * d.spacing()).abs() < 0.5 * r[0] || !cutoff.is_infinite());
            assert!(r[0] >= 2.0 * d.spacing() * (1.0 - 1e-12));
            for w in r.windows(2) {
                assert!(w[1] > w[0]);
                assert!(w[1] / w[0] <= 2f64.sqrt() * (1.0 + 1e-12));
            }
        }
        let g = RadiusGrid::new(&d, Cutoff::Finite(1.0), 8).unwrap();
        assert!((g.r_max() - 1.0).abs() < 1e-15);
        let g = RadiusGrid::new(&d, Cutoff::Infinite, 8).unwrap();
        assert!(g.r_max() <= d.diameter() * (1.0 + 1e-9));
        assert!(g.r_max() * 2f64.sqrt() > d.diameter());
        assert!(matches!(
            RadiusGrid::new(&d, Cutoff::Finite(0.01), 8),
            Err(Error::EmptyRadiusGrid { .. })
        ));
    }

    #[test]
    fn radius_grids_nest_under_refinement() {
        for cutoff in [Cutoff::Finite(1.0), Cutoff::Infinite] {
            let coarse = Domain::new(1, 4.0, 256, 0.5).unwrap();
            let fine = coarse.with_resolution(512).unwrap();
            let a = RadiusGrid::new(&coarse, cutoff, 8).unwrap();
            let b = RadiusGrid::new(&fine, cutoff, 8).unwrap();
            for r in a.radii() {
                assert!(b.radii().iter().any(|s| (s - r).abs() < 1e-12 * r), "{r}");
            }
        }
    }

    #[test]
    fn center_grid_stride() {
        let d = Domain::new(2, 4.0, 32, 1.0).unwrap();
        assert_eq!(CenterGrid::every_point().centers(&d).len(), 1024);
        assert_eq!(CenterGrid::new(4).unwrap().centers(&d).len(), 64);
        assert!(CenterGrid::new(0).is_err());
    }
}
