//! Finite-difference derivative tensors `D^ℓ u` and their magnitudes.

use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction};

pub const MAX_ORDER: usize = 4;

/// All partial derivatives `∂^α u` with `|α| = ℓ`, plus the pointwise tensor
/// magnitude `|D^ℓ u| = sqrt(Σ_α (ℓ!/α!) (∂^α u)^2)`.
#[derive(Debug, Clone)]
pub struct DerivativeField {
    domain: Domain,
    order: usize,
    multi_indices: Vec<[usize; 2]>,
    weights: Vec<f64>,
    components: Vec<Vec<f64>>,
    magnitudes: Vec<f64>,
}

impl DerivativeField {
    /// Builds a field from explicit component arrays. Used for synthetic
    /// fields; `multi_indices` must all have total degree `order`.
    pub fn from_components(
        domain: Domain,
        order: usize,
        multi_indices: Vec<[usize; 2]>,
        components: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if multi_indices.len() != components.len()
            || components.iter().any(|c| c.len() != domain.len())
            || multi_indices.iter().any(|a| a[0] + a[1] != order)
        {
            return Err(Error::InvalidValues(
                "inconsistent derivative components".into(),
            ));
        }
        let weights: Vec<f64> = multi_indices
            .iter()
            .map(|a| multinomial(order, *a))
            .collect();
        let magnitudes = if order == 0 {
            components[0].iter().map(|v| v.abs()).collect()
        } else {
            (0..domain.len())
                .map(|i| {
                    weights
                        .iter()
                        .zip(&components)
                        .map(|(w, c)| w * c[i] * c[i])
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        };
        Ok(Self {
            domain,
            order,
            multi_indices,
            weights,
            components,
            magnitudes,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn multi_indices(&self) -> &[[usize; 2]] {
        &self.multi_indices
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weighted ℓ² distance between the tensors at two grid points.
    #[inline]
    pub fn tensor_distance(&self, i: usize, j: usize) -> f64 {
        if self.order == 0 {
            return (self.components[0][i] - self.components[0][j]).abs();
        }
        let mut acc = 0.0;
        for (w, c) in self.weights.iter().zip(&self.components) {
            let d = c[i] - c[j];
            acc += w * d * d;
        }
        acc.sqrt()
    }

    /// True where every component vanishes.
    pub fn is_zero_at(&self, i: usize) -> bool {
        self.components.iter().all(|c| c[i] == 0.0)
    }
}

/// `D^ℓ u` by repeated second-order central differences with zero extension.
pub fn derivative_field(u: &GridFunction, order: usize) -> Result<DerivativeField> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            max: MAX_ORDER,
        });
    }
    let domain = *u.domain();
    let multi_indices: Vec<[usize; 2]> = match domain.dim() {
        1 => vec![[order, 0]],
        _ => (0..=order).rev().map(|a| [a, order - a]).collect(),
    };
    let components = multi_indices
        .iter()
        .map(|alpha| {
            let mut f = u.values().to_vec();
            for _ in 0..alpha[1] {
                f = central_difference(&domain, &f, 1);
            }
            for _ in 0..alpha[0] {
                f = central_difference(&domain, &f, 0);
            }
            f
        })
        .collect();
    DerivativeField::from_components(domain, order, multi_indices, components)
}

/// `(f(x + h e_axis) - f(x - h e_axis)) / 2h`, zero outside the box.
pub fn central_difference(domain: &Domain, f: &[f64], axis: usize) -> Vec<f64> {
    let n = domain.points_per_axis();
    let inv = 1.0 / (2.0 * domain.spacing());
    let stride = if domain.dim() == 1 || axis == 1 { 1 } else { n };
    let mut out = vec![0.0; f.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let pos = if stride == 1 { i % n } else { i / n };
        let fwd = if pos + 1 < n { f[i + stride] } else { 0.0 };
        let bwd = if pos > 0 { f[i - stride] } else { 0.0 };
        *o = (fwd - bwd) * inv;
    }
    out
}

fn multinomial(order: usize, alpha: [usize; 2]) -> f64 {
    factorial(order) / (factorial(alpha[0]) * factorial(alpha[1]))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plateau_1d(n: usize) -> (Domain, impl Fn(f64) -> f64) {
        let d = Domain::new(1, 4.0, n, 0.5).unwrap();
        (d, |x: f64| x)
    }

    #[test]
    fn order_zero_is_abs_values() {
        let d = Domain::new(2, 2.0, 32, 0.5).unwrap();
        let u = GridFunction::from_fn(d, |x| x[0] - 0.3 * x[1]).unwrap();
        let f = derivative_field(&u, 0).unwrap();
        for (m, v) in f.magnitudes().iter().zip(u.values()) {
            assert_eq!(*m, v.abs());
        }
    }

    #[test]
    fn unsupported_order_rejected() {
        let d = Domain::new(1, 2.0, 32, 0.5).unwrap();
        let u = GridFunction::zeros(d);
        assert!(matches!(
            derivative_field(&u, 5),
            Err(Error::UnsupportedOrder { order: 5, .. })
        ));
    }

    #[test]
    fn linear_data_has_unit_slope() {
        let (d, f) = plateau_1d(64);
        let u = GridFunction::from_fn(d, |x| f(x[0])).unwrap();
        let df = derivative_field(&u, 1).unwrap();
        for i in 2..62 {
            assert!((df.magnitudes()[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stencil_exact_on_polynomials() {
        let d = Domain::new(1, 4.0, 64, 0.5).unwrap();
        for order in 1..=4usize {
            let u = GridFunction::from_fn(d, |x| x[0].powi(order as i32)).unwrap();
            let df = derivative_field(&u, order).unwrap();
            let exact = factorial(order);
            for i in 2 * order..64 - 2 * order {
                let rel = (df.components()[0][i] - exact).abs() / exact;
                assert!(
                    rel < 1e-10,
                    "order {order} at {i}: {}",
                    df.components()[0][i]
                );
            }
        }
    }

    #[test]
    fn mixed_partials_in_2d() {
        let d = Domain::new(2, 2.0, 32, 0.5).unwrap();
        // u = x^2 y: ∂xx = 2y, ∂xy = 2x, ∂yy = 0.
        let u = GridFunction::from_fn(d, |x| x[0] * x[0] * x[1]).unwrap();
        let df = derivative_field(&u, 2).unwrap();
        assert_eq!(df.multi_indices(), &[[2, 0], [1, 1], [0, 2]]);
        assert_eq!(df.weights(), &[1.0, 2.0, 1.0]);
        let i = d.flat_index([16, 10]);
        let [x, y] = d.point(i);
        let c = df.components();
        assert!((c[0][i] - 2.0 * y).abs() < 1e-10);
        assert!((c[1][i] - 2.0 * x).abs() < 1e-10);
        assert!(c[2][i].abs() < 1e-10);
        let mag = (4.0 * y * y + 2.0 * 4.0 * x * x).sqrt();
        assert!((df.magnitudes()[i] - mag).abs() < 1e-10);
    }

    #[test]
    fn second_derivative_converges_at_second_order() {
        // sin(x) * cutoff, evaluated far from the cutoff.
        let err_at = |n: usize| {
            let d = Domain::new(1, 8.0, n, 1.0).unwrap();
            let u = GridFunction::from_fn(d, |x| x[0].sin()).unwrap();
            let df = derivative_field(&u, 2).unwrap();
            let i = d.nearest([0.7, 0.0]);
            let x0 = d.point(i)[0];
            (df.components()[0][i] + x0.sin()).abs()
        };
        let e1 = err_at(128);
        let e2 = err_at(256);
        let rate = (e1 / e2).log2();
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }
}
