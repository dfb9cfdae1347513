//! Helpers shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use mclab::derivative::DerivativeField;
use mclab::grid::{Domain, GridFunction};

pub fn gaussian(domain: Domain, w: f64) -> GridFunction {
    GridFunction::from_fn(domain, |x| {
        (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * w * w)).exp()
    })
    .unwrap()
}

/// `(N - k) ∫_0^R r^{-N} m(r) r^{k-1} dr + R^{k-N} m(R)`, with
/// `m(r) = ∫_{B_r(x) \ {x}} |D^k u|` taken from shells of width `h / 4` and
/// the `r` integral done by the trapezoid rule on the shell edges.
pub fn fubini_form(field: &DerivativeField, x: usize, radius: f64) -> f64 {
    let domain = field.domain();
    let (dim, k) = (domain.dim() as f64, field.order() as f64);
    let dr = domain.spacing() / 4.0;
    let bins = (radius / dr).ceil() as usize;
    let mut shells = vec![0.0; bins + 1];
    let px = domain.point(x);
    for (y, m) in field.magnitudes().iter().enumerate() {
        let py = domain.point(y);
        let d = ((px[0] - py[0]).powi(2) + (px[1] - py[1]).powi(2)).sqrt();
        if y != x && d <= radius {
            shells[(d / dr).ceil() as usize] += m * domain.cell_volume();
        }
    }
    let mut mass = 0.0;
    let mut integral = 0.0;
    let mut prev = 0.0;
    for (j, s) in shells.iter().enumerate() {
        mass += s;
        let r = (j as f64 * dr).min(radius);
        let g = if r > 0.0 {
            r.powf(k - 1.0 - dim) * mass
        } else {
            0.0
        };
        if j > 0 {
            integral += 0.5 * (g + prev) * dr;
        }
        prev = g;
    }
    (dim - k) * integral + radius.powf(k - dim) * mass
}
