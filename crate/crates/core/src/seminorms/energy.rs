use crate::derivative::derivative_field;
use crate::error::{invalid, Result};
use crate::grid::{integral_pow, GridFunction};

/// `h^N Σ (ρ^{kp} |D^k u|^p + ρ^{ℓp} |D^ℓ u|^p)`.
pub fn sobolev_energy(u: &GridFunction, k: usize, l: usize, p: f64, rho: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} must be finite and at least 1")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid("rho", format!("{rho} must be finite and positive")));
    }
    let d = u.domain();
    let dk = derivative_field(u, k)?;
    let dl = derivative_field(u, l)?;
    let pk = p * k as f64;
    let pl = p * l as f64;
    Ok(rho.powf(pk) * integral_pow(dk.magnitudes(), p, d)
        + rho.powf(pl) * integral_pow(dl.magnitudes(), p, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    #[test]
    fn zero_and_rho_scaling() {
        let d = Domain::new(1, 4.0, 128, 0.5).unwrap();
        assert_eq!(
            sobolev_energy(&GridFunction::zeros(d), 1, 0, 2.0, 1.0).unwrap(),
            0.0
        );
        let u = GridFunction::from_fn(d, |x| {
            (-x[0] * x[0]).exp() * (x[0].abs() < 3.0) as u8 as f64
        })
        .unwrap();
        for (k, l) in [(1, 0), (2, 0), (2, 1)] {
            let p = 1.5;
            let e1 = sobolev_energy(&u, k, l, p, 0.7).unwrap();
            let e2 = sobolev_energy(&u, k, l, p, 1.4).unwrap();
            assert!(e2 <= 2f64.powf(k as f64 * p) * e1 * (1.0 + 1e-12));
        }
    }
}
