use rayon::prelude::*;
use serde::Serialize;

use super::zeta::lattice_zeta;
use crate::derivative::DerivativeField;
use crate::error::{invalid, Result};

/// The Gagliardo double sum split by where the pairs live.
///
/// With `K(x, y) = |x - y|^{-(N + σp)}` and `F` the order-`k` tensor,
/// extended by zero to the whole lattice `h Z^N`:
/// - `active_pairs`: `h^{2N} Σ K |F(x) - F(y)|^p` over ordered pairs of
///   distinct points where `F` does not vanish;
/// - `exterior`: the pairs with exactly one such point, summed in closed form
///   through the lattice zeta function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GagliardoParts {
    pub active_pairs: f64,
    pub exterior: f64,
}

impl GagliardoParts {
    pub fn total(&self) -> f64 {
        self.active_pairs + self.exterior
    }
}

/// `h^{2N} Σ_{x ≠ y} |F(x) - F(y)|^p / |x - y|^{N + σp}` over the zero
/// extension of `F` to the lattice.
pub fn gagliardo_energy(field: &DerivativeField, sigma: f64, p: f64) -> Result<f64> {
    Ok(gagliardo_parts(field, sigma, p)?.total())
}

pub fn gagliardo_parts(field: &DerivativeField, sigma: f64, p: f64) -> Result<GagliardoParts> {
    let kern = Kernel::new(field, sigma, p)?;
    let active = active_set(field);
    // each unordered pair is visited once, from its smaller index
    let per_point: Vec<(f64, f64)> = (0..active.len())
        .into_par_iter()
        .map(|i| {
            let x = active[i];
            let (below, _) = kern.row(field, &active[..i], x, false);
            let (above, pairs) = kern.row(field, &active[i + 1..], x, true);
            let ext = 2.0 * norm_pow(field, x, p) * (kern.zeta - below - above);
            (2.0 * pairs, ext)
        })
        .collect();
    let (mut pairs, mut ext) = (0.0, 0.0);
    for (a, b) in per_point {
        pairs += a;
        ext += b;
    }
    let domain = field.domain();
    let scale = domain.cell_volume().powi(2) * domain.spacing().powf(-kern.s);
    Ok(GagliardoParts {
        active_pairs: scale * pairs,
        exterior: scale * ext,
    })
}

/// `D_{σ,p} F(x) = (h^N Σ_{y ≠ x} |F(x) - F(y)|^p / |x - y|^{N + σp})^{1/p}`.
pub fn gagliardo_pointwise(field: &DerivativeField, sigma: f64, p: f64, x: usize) -> Result<f64> {
    let kern = Kernel::new(field, sigma, p)?;
    let domain = field.domain();
    if x >= domain.len() {
        return Err(invalid("x", format!("grid point {x} out of range")));
    }
    let active = active_set(field);
    let (near, pairs) = kern.row(field, &active, x, true);
    let sum = pairs + norm_pow(field, x, p) * (kern.zeta - near);
    let value = domain.cell_volume() * domain.spacing().powf(-kern.s) * sum;
    Ok(value.max(0.0).powf(1.0 / p))
}

/// `Σ_{o ∈ Z^N, o ≠ 0} |o|^{-s}`.
pub fn lattice_kernel_sum(dim: usize, s: f64) -> f64 {
    lattice_zeta(dim, s)
}

fn active_set(field: &DerivativeField) -> Vec<usize> {
    (0..field.domain().len())
        .filter(|&i| !field.is_zero_at(i))
        .collect()
}

/// Dimensionless kernel `|o|^{-s}` tabulated over all in-box offsets.
struct Kernel {
    s: f64,
    p: f64,
    zeta: f64,
    n: usize,
    dim: usize,
    width: usize,
    table: Vec<f64>,
}

impl Kernel {
    fn new(field: &DerivativeField, sigma: f64, p: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(invalid("sigma", format!("{sigma} not in (0, 1)")));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(invalid("p", format!("{p} must be finite and at least 1")));
        }
        let domain = field.domain();
        let dim = domain.dim();
        let n = domain.points_per_axis();
        let s = dim as f64 + sigma * p;
        let width = 2 * n - 1;
        let off = n as isize - 1;
        let table = match dim {
            1 => (0..width)
                .map(|a| {
                    let o = (a as isize - off).unsigned_abs() as f64;
                    if o == 0.0 {
                        0.0
                    } else {
                        o.powf(-s)
                    }
                })
                .collect(),
            _ => (0..width * width)
                .map(|i| {
                    let a = (i / width) as isize - off;
                    let b = (i % width) as isize - off;
                    let q = (a * a + b * b) as f64;
                    if q == 0.0 {
                        0.0
                    } else {
                        q.powf(-0.5 * s)
                    }
                })
                .collect(),
        };
        Ok(Self {
            s,
            p,
            zeta: lattice_zeta(dim, s),
            n,
            dim,
            width,
            table,
        })
    }

    #[inline]
    fn weight(&self, x: usize, y: usize) -> f64 {
        let off = self.n - 1;
        if self.dim == 1 {
            self.table[y + off - x]
        } else {
            let (x0, x1) = (x / self.n, x % self.n);
            let (y0, y1) = (y / self.n, y % self.n);
            self.table[(y0 + off - x0) * self.width + (y1 + off - x1)]
        }
    }

    /// `(Σ_{y ≠ x} |o|^{-s}, Σ_{y ≠ x} |o|^{-s} |F(x) - F(y)|^p)` over `ys`;
    /// the second sum only when `with_pairs`.
    fn row(&self, field: &DerivativeField, ys: &[usize], x: usize, with_pairs: bool) -> (f64, f64) {
        let (mut near, mut pairs) = (0.0, 0.0);
        for &y in ys {
            if y == x {
                continue;
            }
            let w = self.weight(x, y);
            near += w;
            if with_pairs {
                pairs += w * dist_pow(field, x, y, self.p);
            }
        }
        (near, pairs)
    }
}

#[inline]
fn pow_from_square(sq: f64, p: f64) -> f64 {
    if p == 2.0 {
        sq
    } else if p == 1.0 {
        sq.sqrt()
    } else if p == 1.5 {
        let r = sq.sqrt();
        r * r.sqrt()
    } else if sq == 0.0 {
        0.0
    } else {
        sq.powf(0.5 * p)
    }
}

#[inline]
fn dist_pow(field: &DerivativeField, x: usize, y: usize, p: f64) -> f64 {
    let mut acc = 0.0;
    for (w, c) in field.weights().iter().zip(field.components()) {
        let d = c[x] - c[y];
        acc += w * d * d;
    }
    pow_from_square(acc, p)
}

#[inline]
fn norm_pow(field: &DerivativeField, x: usize, p: f64) -> f64 {
    let mut acc = 0.0;
    for (w, c) in field.weights().iter().zip(field.components()) {
        acc += w * c[x] * c[x];
    }
    pow_from_square(acc, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivative::derivative_field;
    use crate::grid::{Domain, GridFunction};

    fn scalar(domain: Domain, values: Vec<f64>) -> DerivativeField {
        DerivativeField::from_components(domain, 0, vec![[0, 0]], vec![values]).unwrap()
    }

    #[test]
    fn constant_tensor_has_no_active_pairs() {
        let d = Domain::new(2, 1.0, 16, 0.5).unwrap();
        let u = GridFunction::from_fn(d, |x| 3.0 + x[0] - 2.0 * x[1]).unwrap();
        let f = derivative_field(&u, 1).unwrap();
        // interior gradient is constant; differences come only from the edge
        let g = gagliardo_parts(&f, 0.5, 2.0).unwrap();
        assert!(g.active_pairs >= 0.0 && g.exterior > 0.0);
        let z = GridFunction::zeros(d);
        let f = derivative_field(&z, 1).unwrap();
        assert_eq!(gagliardo_energy(&f, 0.5, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn two_cells_closed_form() {
        for (dim, n) in [(1usize, 32usize), (2, 16)] {
            let d = Domain::new(dim, 1.0, n, 0.5).unwrap();
            let h = d.spacing();
            let (i, j, cells) = if dim == 1 {
                (3, 10, 7.0)
            } else {
                (d.flat_index([2, 3]), d.flat_index([5, 7]), 5.0)
            };
            let (a, b) = (1.25, -0.5);
            let mut v = vec![0.0; d.len()];
            v[i] = a;
            v[j] = b;
            let f = scalar(d, v);
            let (sigma, p) = (0.4, 1.7);
            let s = dim as f64 + sigma * p;
            let dist = cells * h;
            let g = gagliardo_parts(&f, sigma, p).unwrap();
            let hn = h.powi(dim as i32);
            let expect = 2.0 * hn * hn * (a - b).abs().powf(p) / dist.powf(s);
            assert!((g.active_pairs - expect).abs() <= 1e-12 * expect);
            let z = lattice_zeta(dim, s);
            let k = dist.powf(-s);
            let ext = 2.0 * hn * hn * (a.abs().powf(p) + b.abs().powf(p)) * (z * h.powf(-s) - k);
            assert!((g.exterior - ext).abs() <= 1e-12 * ext);
        }
    }

    #[test]
    fn pointwise_matches_energy_sum() {
        // Σ_x h^N D(x)^p over the box plus the off-box rows equals the energy.
        let d = Domain::new(1, 4.0, 64, 1.0).unwrap();
        let u = GridFunction::from_fn(d, |x| (1.0 - x[0] * x[0]).max(0.0).powi(2)).unwrap();
        let f = derivative_field(&u, 0).unwrap();
        let (sigma, p) = (0.5, 2.0);
        let e = gagliardo_energy(&f, sigma, p).unwrap();
        let inbox: f64 = (0..d.len())
            .map(|x| d.cell_volume() * gagliardo_pointwise(&f, sigma, p, x).unwrap().powf(p))
            .sum();
        assert!(inbox < e && inbox > 0.9 * e, "{inbox} {e}");
    }
}
