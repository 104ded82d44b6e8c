//! Subzonal-pressure hourglass control for `Q^m-Q^{m-1}` pairs.
//!
//! The high-order density `ρ̃` comes from pointwise mass conservation at the
//! `(m+1)²` Gauss–Legendre points. Its deviation from the interpolated
//! low-order density, times the interpolated sound speed squared, is a
//! pressure enrichment `δp` whose `(m+1)²`-rule force opposes hourglass modes.

use crate::basis::InterpMatrix;
use crate::hydro::PointForces;
use crate::linalg::Vec2;
use crate::mesh::ElementGeometry;

/// `δρ = ρ̃ - M_interp ρ_h`.
pub fn density_variation(rho_high: &[f64], rho_low: &[f64], interp: &InterpMatrix) -> Vec<f64> {
    interp
        .apply(rho_low)
        .iter()
        .zip(rho_high)
        .map(|(r, rt)| rt - r)
        .collect()
}

/// `c̃_s = M_interp c_s`, clamped at zero.
pub fn interpolated_sound_speed(cs_low: &[f64], interp: &InterpMatrix) -> Vec<f64> {
    interp.apply(cs_low).into_iter().map(|c| c.max(0.0)).collect()
}

/// `δp = c̃_s² δρ`.
pub fn pressure_variation(cs_high: &[f64], drho: &[f64]) -> Vec<f64> {
    cs_high.iter().zip(drho).map(|(c, d)| c * c * d).collect()
}

/// Adds `scale · ω_q δp_q (∇N_j det J)(ξ_q)` to `out`.
pub fn hourglass_force(
    geo: &ElementGeometry,
    weights: &[f64],
    dp: &[f64],
    scale: f64,
    out: &mut PointForces,
) {
    for q in 0..geo.len() {
        let s = scale * weights[q] * dp[q];
        if s == 0.0 {
            continue;
        }
        for (j, b) in geo.scaled_grad(q).iter().enumerate() {
            let slot = out.at_mut(q, j);
            slot[0] += s * b[0];
            slot[1] += s * b[1];
        }
    }
}

/// Per-point kinetic work `Σ_j u_j · fh_j(ξ_q)` of the anti-hourglass forces.
pub fn hourglass_energy(fh: &PointForces, us: &[Vec2]) -> Vec<f64> {
    fh.point_work(us)
}
