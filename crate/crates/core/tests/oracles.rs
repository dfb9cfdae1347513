use std::f64::consts::PI;

mod common;

use common::{fubini_form, gaussian};
use mclab::derivative::derivative_field;
use mclab::grid::Domain;
use mclab::seminorms::{gagliardo_energy, riesz_potential, sobolev_energy};

#[test]
fn riesz_matches_fubini_radial_form() {
    let mut errors = Vec::new();
    for n in [256, 512] {
        let domain = Domain::new(2, 4.0, n, 0.5).unwrap();
        let u = gaussian(domain, 0.6);
        let du = derivative_field(&u, 1).unwrap();
        let x = domain.nearest([0.3, -0.2]);
        let direct = riesz_potential(&du, x, 1.0).unwrap();
        let binned = fubini_form(&du, x, 1.0);
        let err = (direct - binned).abs() / direct;
        assert!(err < 0.10, "n={n}: riesz {direct} vs fubini {binned}");
        errors.push(err);
    }
    assert!(errors[1] < errors[0], "no convergence: {errors:?}");
}

#[test]
fn riesz_in_one_dimension_is_the_ball_integral() {
    let domain = Domain::new(1, 4.0, 256, 0.5).unwrap();
    let du = derivative_field(&gaussian(domain, 0.5), 1).unwrap();
    let x = domain.nearest([0.2, 0.0]);
    let a = riesz_potential(&du, x, 0.75).unwrap();
    let b = fubini_form(&du, x, 0.75);
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn gaussian_sobolev_energy() {
    // ∫ u² = w√π and ∫ u'² = √π / (2w) for u = exp(-x² / 2w²)
    let w: f64 = 0.5;
    let exact = w * PI.sqrt() + PI.sqrt() / (2.0 * w);
    let domain = Domain::new(1, 4.0, 256, 0.5).unwrap();
    let e = sobolev_energy(&gaussian(domain, w), 1, 0, 2.0, 1.0).unwrap();
    assert!((e - exact).abs() < 0.02 * exact, "{e} vs {exact}");

    // ρ^{2p} ∫ u''² + ∫ u², with ∫ u''² = 3√π / (4w³)
    let rho: f64 = 0.5;
    let exact = rho.powi(4) * 3.0 * PI.sqrt() / (4.0 * w.powi(3)) + w * PI.sqrt();
    let e = sobolev_energy(&gaussian(domain, w), 2, 0, 2.0, rho).unwrap();
    assert!((e - exact).abs() < 0.02 * exact, "{e} vs {exact}");
}

#[test]
fn gagliardo_dilation_exponent() {
    let (sigma, p) = (0.25, 2.0);
    let expected = 1.0 - sigma * p;
    let mut errors = Vec::new();
    for n in [256, 512] {
        let domain = Domain::new(1, 4.0, n, 0.5).unwrap();
        let energy = |w| {
            let f = derivative_field(&gaussian(domain, w), 0).unwrap();
            gagliardo_energy(&f, sigma, p).unwrap()
        };
        let exponent = (energy(1.0) / energy(0.5)).log2();
        errors.push((exponent - expected).abs() / expected);
    }
    assert!(errors[1] < 0.07, "exponent error {errors:?}");
    assert!(errors[1] < errors[0], "no convergence: {errors:?}");
}
