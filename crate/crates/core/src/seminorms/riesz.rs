use crate::ball::DiskStencil;
use crate::derivative::DerivativeField;
use crate::error::{invalid, Result};

/// `h^N Σ_{y ∈ B_R(x), y ≠ x} |D^k u(y)| / |x - y|^{N-k}`.
///
/// The diagonal cell is left out; for `k >= 1` its share of the integral
/// vanishes as `h → 0`.
pub fn riesz_potential(field: &DerivativeField, x: usize, radius: f64) -> Result<f64> {
    let k = field.order();
    if k == 0 {
        return Err(invalid(
            "k",
            "the Riesz term needs a derivative of order at least 1",
        ));
    }
    let domain = field.domain();
    if x >= domain.len() {
        return Err(invalid("x", format!("grid point {x} out of range")));
    }
    let st = DiskStencil::new(domain, radius)?;
    let h = domain.spacing();
    let expo = domain.dim() as f64 - k as f64;
    let mags = field.magnitudes();
    let mut acc = 0.0;
    for o in st.offsets() {
        if o == [0, 0] {
            continue;
        }
        if let Some(y) = domain.shifted(x, o) {
            let m = mags[y];
            if m != 0.0 {
                let dist = h * ((o[0] * o[0] + o[1] * o[1]) as f64).sqrt();
                acc += m / dist.powf(expo);
            }
        }
    }
    Ok(domain.cell_volume() * acc)
}
