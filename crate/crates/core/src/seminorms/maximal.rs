use rayon::prelude::*;

use super::{Cutoff, RadiusGrid};
use crate::ball::{DiskStencil, RowPrefix};
use crate::error::{invalid, Result};
use crate::grid::Domain;

/// `M f(x) = max_r (1/#B_r(x)) Σ_{B_r(x)} |f|` at every grid point, over the
/// radii of `radii` (normally the infinite-cutoff ladder).
pub fn maximal_function(domain: &Domain, f: &[f64], radii: &RadiusGrid) -> Result<Vec<f64>> {
    check_len(domain, f)?;
    let abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let prefix = RowPrefix::new(domain, &abs);
    let stencils = radii
        .radii()
        .iter()
        .map(|&r| DiskStencil::new(domain, r))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..domain.len())
        .into_par_iter()
        .map(|i| ball_max(domain, &prefix, &stencils, i))
        .collect())
}

/// `M_ρ f(x)`: the same maximum restricted to radii up to `ρ`.
pub fn localized_maximal(
    domain: &Domain,
    f: &[f64],
    rho: Cutoff,
    radius_count: usize,
    x: usize,
) -> Result<f64> {
    check_len(domain, f)?;
    if x >= domain.len() {
        return Err(invalid("x", format!("grid point {x} out of range")));
    }
    let radii = RadiusGrid::new(domain, rho, radius_count)?;
    let abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let prefix = RowPrefix::new(domain, &abs);
    let stencils = radii
        .radii()
        .iter()
        .map(|&r| DiskStencil::new(domain, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(ball_max(domain, &prefix, &stencils, x))
}

fn ball_max(domain: &Domain, prefix: &RowPrefix, stencils: &[DiskStencil], i: usize) -> f64 {
    let idx = domain.grid_index(i);
    stencils
        .iter()
        .map(|st| prefix.disk_sum(idx, st) / st.count() as f64)
        .fold(0.0, f64::max)
}

fn check_len(domain: &Domain, f: &[f64]) -> Result<()> {
    if f.len() != domain.len() {
        return Err(invalid(
            "f",
            format!("expected {} values, got {}", domain.len(), f.len()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::{ball_average, ball_members};

    #[test]
    fn constant_and_domination() {
        let d = Domain::new(2, 2.0, 32, 0.5).unwrap();
        let rg = RadiusGrid::new(&d, Cutoff::Infinite, 8).unwrap();
        let c = vec![0.8; d.len()];
        let m = maximal_function(&d, &c, &rg).unwrap();
        // only points whose smallest ball stays inside the box see the constant
        for (i, v) in m.iter().enumerate() {
            let [a, b] = d.grid_index(i);
            if (2..30).contains(&a) && (2..30).contains(&b) {
                assert!((v - 0.8).abs() < 1e-12);
            }
            assert!(*v <= 0.8 + 1e-12);
        }

        let f: Vec<f64> = (0..d.len())
            .map(|i| ((i * 7919) % 13) as f64 - 6.0)
            .collect();
        let m = maximal_function(&d, &f, &rg).unwrap();
        for (i, mi) in m.iter().enumerate() {
            let b = ball_members(&d, i, 2.0 * d.spacing()).unwrap();
            assert!(*mi >= ball_average(&f, &b, 1.0) - 1e-12);
        }
    }

    #[test]
    fn single_spike_brute_force() {
        let d = Domain::new(1, 2.0, 64, 0.5).unwrap();
        let rg = RadiusGrid::new(&d, Cutoff::Infinite, 8).unwrap();
        let mut f = vec![0.0; d.len()];
        f[30] = 3.0;
        let m = maximal_function(&d, &f, &rg).unwrap();
        for x in (0..64).step_by(3) {
            let brute = rg
                .radii()
                .iter()
                .map(|&r| {
                    let b = ball_members(&d, x, r).unwrap();
                    if b.members().any(|y| y == 30) {
                        3.0 / b.full_count() as f64
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max);
            assert!((m[x] - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn localized_is_monotone_in_rho() {
        let d = Domain::new(1, 2.0, 64, 0.5).unwrap();
        let f: Vec<f64> = (0..64)
            .map(|i| if (20..28).contains(&i) { 1.0 } else { 0.0 })
            .collect();
        let rg = RadiusGrid::new(&d, Cutoff::Infinite, 8).unwrap();
        let full = maximal_function(&d, &f, &rg).unwrap();
        for x in [5, 24, 40] {
            let a = localized_maximal(&d, &f, Cutoff::Finite(0.25), 8, x).unwrap();
            let b = localized_maximal(&d, &f, Cutoff::Finite(1.0), 8, x).unwrap();
            let c = localized_maximal(&d, &f, Cutoff::Infinite, 8, x).unwrap();
            assert!(a <= b && b <= c);
            assert_eq!(c, full[x]);
        }
    }
}
