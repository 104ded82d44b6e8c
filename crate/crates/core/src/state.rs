//! Field storage and the ideal-gas closure.

use crate::basis::BasisSet;
use crate::error::{Result, SghError};
use crate::linalg::Vec2;
use crate::mesh::{ElementGeometry, JacobianSnapshot, Mesh};

/// `p = (γ - 1) ρ e`.
pub fn eos_pressure(rho: f64, e: f64, gamma: f64) -> Result<f64> {
    if !(rho > 0.0) || !(e >= 0.0) || !(gamma > 1.0) {
        return Err(SghError::NonPhysical(format!(
            "eos inputs rho={rho}, e={e}, gamma={gamma}"
        )));
    }
    Ok((gamma - 1.0) * rho * e)
}

/// `c_s = sqrt(γ p / ρ)`.
pub fn sound_speed(rho: f64, p: f64, gamma: f64) -> Result<f64> {
    if !(rho > 0.0) || !(p >= 0.0) {
        return Err(SghError::NonPhysical(format!(
            "sound speed inputs rho={rho}, p={p}"
        )));
    }
    Ok((gamma * p / rho).sqrt())
}

/// Pointwise strong mass conservation, `ρ = (ρ₀ det J⁰) / det J`.
pub fn strong_density(rho_det0: &[f64], det: &[f64]) -> Vec<f64> {
    rho_det0.iter().zip(det).map(|(m, d)| m / d).collect()
}

#[derive(Debug, Clone)]
pub struct KinematicField {
    pub position: Vec<Vec2>,
    pub velocity: Vec<Vec2>,
    pub nodal_mass: Vec<f64>,
}

impl KinematicField {
    pub fn kinetic_energy(&self) -> f64 {
        self.velocity
            .iter()
            .zip(&self.nodal_mass)
            .map(|(v, m)| 0.5 * m * (v[0] * v[0] + v[1] * v[1]))
            .sum()
    }

    pub fn momentum(&self) -> Vec2 {
        self.velocity
            .iter()
            .zip(&self.nodal_mass)
            .fold([0.0, 0.0], |acc, (v, m)| [acc[0] + m * v[0], acc[1] + m * v[1]])
    }
}

/// Thermodynamic fields at the `m²` Gauss–Legendre points of every element
/// (element-major), plus the high-order density at the `(m+1)²` points.
#[derive(Debug, Clone)]
pub struct ElementThermo {
    pub n_low: usize,
    pub n_high: usize,
    pub rho: Vec<f64>,
    pub p: Vec<f64>,
    pub e: Vec<f64>,
    pub cs: Vec<f64>,
    pub rho_high: Vec<f64>,
    /// EOS exponent per element.
    pub gamma: Vec<f64>,
}

impl ElementThermo {
    pub fn new(n_elems: usize, n_low: usize, n_high: usize, e: Vec<f64>, gamma: Vec<f64>) -> Self {
        assert_eq!(e.len(), n_elems * n_low);
        assert_eq!(gamma.len(), n_elems);
        Self {
            n_low,
            n_high,
            rho: vec![0.0; n_elems * n_low],
            p: vec![0.0; n_elems * n_low],
            e,
            cs: vec![0.0; n_elems * n_low],
            rho_high: vec![0.0; n_elems * n_high],
            gamma,
        }
    }

    pub fn n_elems(&self) -> usize {
        self.gamma.len()
    }

    pub fn low(&self, field: &[f64], elem: usize) -> std::ops::Range<usize> {
        debug_assert_eq!(field.len(), self.n_elems() * self.n_low);
        elem * self.n_low..(elem + 1) * self.n_low
    }

    pub fn high_range(&self, elem: usize) -> std::ops::Range<usize> {
        elem * self.n_high..(elem + 1) * self.n_high
    }

    /// Recomputes `ρ`, `ρ̃`, `p` and `c_s` from the current positions and
    /// internal energy. `floor_factor` scales each element's initial
    /// determinant into the singularity threshold.
    pub fn update_density_strong(
        &mut self,
        mesh: &Mesh,
        basis: &BasisSet,
        snap: &JacobianSnapshot,
        coords: &[Vec2],
        floor_factor: f64,
    ) -> Result<()> {
        let (nl, nh) = (self.n_low, self.n_high);
        for e in 0..mesh.n_elems() {
            let xs = mesh.gather(e, coords);
            let floor = floor_factor * snap.det_scale[e];
            let lo = ElementGeometry::new(&basis.low, &xs);
            let hi = ElementGeometry::new(&basis.high, &xs);
            check_det(e, 0, &lo.det, floor)?;
            check_det(e, nl, &hi.det, floor)?;
            for q in 0..nl {
                let i = e * nl + q;
                self.rho[i] = snap.rho_det0_low[i] / lo.det[q];
            }
            for q in 0..nh {
                let i = e * nh + q;
                self.rho_high[i] = snap.rho_det0_high[i] / hi.det[q];
            }
            let g = self.gamma[e];
            for q in 0..nl {
                let i = e * nl + q;
                let p = (g - 1.0) * self.rho[i] * self.e[i].max(0.0);
                self.p[i] = p;
                self.cs[i] = (g * p / self.rho[i]).sqrt();
            }
        }
        Ok(())
    }

    /// `Σ ω_q ρ e det J` on the `m²` rule, using the conserved point masses.
    pub fn internal_energy(&self, snap: &JacobianSnapshot, basis: &BasisSet) -> f64 {
        let nl = self.n_low;
        self.e
            .iter()
            .enumerate()
            .map(|(i, e)| basis.low.weight(i % nl) * snap.rho_det0_low[i] * e)
            .sum()
    }
}

pub(crate) fn check_det(elem: usize, offset: usize, det: &[f64], floor: f64) -> Result<()> {
    for (q, &d) in det.iter().enumerate() {
        if !(d > floor) {
            return Err(SghError::SingularJacobian {
                elem,
                point: offset + q,
                det: d,
                floor,
            });
        }
    }
    Ok(())
}

/// Total mass `Σ_e Σ_q ω_q ρ(ξ_q) det J(ξ_q)` on the `m²` rule.
pub fn total_mass(
    mesh: &Mesh,
    basis: &BasisSet,
    thermo: &ElementThermo,
    coords: &[Vec2],
) -> f64 {
    let nl = basis.low.len();
    let mut mass = 0.0;
    for e in 0..mesh.n_elems() {
        let xs = mesh.gather(e, coords);
        let g = ElementGeometry::new(&basis.low, &xs);
        for q in 0..nl {
            mass += basis.low.weight(q) * thermo.rho[e * nl + q] * g.det[q];
        }
    }
    mass
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eos_values() {
        assert!((eos_pressure(1.0, 2.5, 1.4).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(eos_pressure(1.0, 0.0, 1.4).unwrap(), 0.0);
        assert!((eos_pressure(1.5, 2.5, 1.4).unwrap() - 1.5).abs() < 1e-15);
        assert!(eos_pressure(-1.0, 1.0, 1.4).is_err());
        assert!(eos_pressure(1.0, -1.0, 1.4).is_err());
        assert!(eos_pressure(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sound_speed_values() {
        assert!((sound_speed(1.0, 1.0, 1.4).unwrap() - 1.4f64.sqrt()).abs() < 1e-15);
        assert_eq!(sound_speed(1.0, 0.0, 1.4).unwrap(), 0.0);
        let g = 5.0 / 3.0;
        assert!((sound_speed(16.0, 5.33, g).unwrap() - (g * 5.33 / 16.0).sqrt()).abs() < 1e-15);
        assert!(sound_speed(1.0, -1.0, 1.4).is_err());
    }

    #[test]
    fn eos_is_deterministic() {
        let a = eos_pressure(0.37, 1.91, 1.6).unwrap();
        let b = eos_pressure(0.37, 1.91, 1.6).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
