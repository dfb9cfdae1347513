//! Zeta functions for the lattice sums `Σ_{o ≠ 0} |o|^{-s}` over `Z^N`.

/// `B_{2j} / (2j)!` for `j = 1..=8`.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// Hurwitz zeta `ζ(s, a) = Σ_{k >= 0} (k + a)^{-s}` for `s > 1`, `a > 0`,
/// by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1 and a > 0");
    const M: usize = 32;
    let mut sum = 0.0;
    for k in 0..M {
        sum += (k as f64 + a).powf(-s);
    }
    let x = M as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2)
    let mut rising = s;
    let mut xpow = x.powf(-s - 1.0);
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            rising *= (s + m - 1.0) * (s + m);
            xpow /= x * x;
        }
        sum += c * rising * xpow;
    }
    sum
}

pub fn riemann_zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Dirichlet beta `Σ_{k >= 0} (-1)^k (2k + 1)^{-s}`.
pub fn dirichlet_beta(s: f64) -> f64 {
    4f64.powf(-s) * (hurwitz_zeta(s, 0.25) - hurwitz_zeta(s, 0.75))
}

/// `Σ_{o ∈ Z^N, o ≠ 0} |o|^{-s}` for `s > N`.
pub fn lattice_zeta(dim: usize, s: f64) -> f64 {
    match dim {
        1 => 2.0 * riemann_zeta(s),
        2 => {
            let t = 0.5 * s;
            4.0 * riemann_zeta(t) * dirichlet_beta(t)
        }
        _ => panic!("lattice_zeta supports N in {{1, 2}}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn known_values() {
        assert!((riemann_zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(3.0) - 1.2020569031595942).abs() < 1e-14);
        assert!((riemann_zeta(1.5) - 2.612375348685488).abs() < 1e-13);
        assert!((dirichlet_beta(2.0) - 0.915965594177219).abs() < 1e-14);
        assert!((riemann_zeta(1.05) - 20.580844302036).abs() < 1e-9);
    }

    #[test]
    fn square_lattice_sum() {
        // direct sum over |o| <= R plus the continuum tail 2π R^{2-s}/(s-2)
        let s = 3.0;
        let r = 400i64;
        let mut direct = 0.0;
        for a in -r..=r {
            for b in -r..=r {
                let q = a * a + b * b;
                if q > 0 && q <= r * r {
                    direct += (q as f64).powf(-s / 2.0);
                }
            }
        }
        let tail = 2.0 * PI * (r as f64).powf(2.0 - s) / (s - 2.0);
        let z = lattice_zeta(2, s);
        assert!(
            ((direct + tail) - z).abs() < 1e-4 * z,
            "{} vs {z}",
            direct + tail
        );
    }
}
