//! Tensor artificial viscosity evaluated at the `(m+1)²` Gauss–Legendre
//! points, built on the scaled gradients `∇N_i det J`.

use crate::error::{Result, SghError};
use crate::hydro::PointForces;
use crate::linalg::{self, Mat2, Vec2};
use crate::mesh::ElementGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViscosityForm {
    /// `σ = ∇u`, component-wise Laplacian-like form.
    Classic,
    /// `σ = ε(u)`, the symmetrized gradient.
    Symmetric,
}

impl std::str::FromStr for ViscosityForm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "classic" => Ok(Self::Classic),
            "symmetric" => Ok(Self::Symmetric),
            other => Err(format!("unknown viscosity form '{other}' (classic|symmetric)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGradient {
    /// `Σ_i u_i ∇N_i det J`.
    pub scaled_u: Vec2,
    /// `Σ_i v_i ∇N_i det J`.
    pub scaled_v: Vec2,
    /// Physical gradient `[[∂u/∂r, ∂u/∂z], [∂v/∂r, ∂v/∂z]]`.
    pub grad: Mat2,
}

/// Velocity gradients at every point of `geo`.
pub fn velocity_gradient(geo: &ElementGeometry, us: &[Vec2]) -> Vec<VelocityGradient> {
    (0..geo.len())
        .map(|q| {
            let mut gu = [0.0; 2];
            let mut gv = [0.0; 2];
            for (u, b) in us.iter().zip(geo.scaled_grad(q)) {
                gu[0] += u[0] * b[0];
                gu[1] += u[0] * b[1];
                gv[0] += u[1] * b[0];
                gv[1] += u[1] * b[1];
            }
            let inv = 1.0 / geo.det[q];
            VelocityGradient {
                scaled_u: gu,
                scaled_v: gv,
                grad: [[gu[0] * inv, gu[1] * inv], [gv[0] * inv, gv[1] * inv]],
            }
        })
        .collect()
}

pub fn symmetric_part(g: &Mat2) -> Mat2 {
    let off = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], off], [off, g[1][1]]]
}

/// Minimum eigenvalue and unit eigenvector of a symmetric 2×2 matrix.
/// An isotropic matrix returns the eigenvector `(1, 0)`.
pub fn min_eig_2x2(eps: &Mat2) -> (f64, Vec2) {
    let (a, b, d) = (eps[0][0], 0.5 * (eps[0][1] + eps[1][0]), eps[1][1]);
    let half_gap = 0.5 * ((a - d) * (a - d) + 4.0 * b * b).sqrt();
    let lambda = 0.5 * (a + d) - half_gap;
    // two equivalent eigenvector candidates; keep the better conditioned one
    let c1 = [b, lambda - a];
    let c2 = [lambda - d, b];
    let (n1, n2) = (linalg::norm(c1), linalg::norm(c2));
    let scale = a.abs().max(d.abs()).max(b.abs());
    let (v, n) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    if n <= 1e-14 * scale || n == 0.0 {
        return (lambda, [1.0, 0.0]);
    }
    let mut e = [v[0] / n, v[1] / n];
    if e[0] < 0.0 || (e[0] == 0.0 && e[1] < 0.0) {
        e = [-e[0], -e[1]];
    }
    (lambda, e)
}

/// `|div u| / ‖∇u‖_F`, capped at 1; a vanishing gradient returns 1.
pub fn vorticity_factor(g: &Mat2) -> f64 {
    let denom = linalg::frobenius_sq(g).sqrt();
    if denom < 1e-300 {
        return 1.0;
    }
    ((g[0][0] + g[1][1]).abs() / denom).min(1.0)
}

/// `l_c = l⁰ |(J⁰)⁻¹ J e| / |e|` with `l⁰ = sqrt(ω det J⁰)`, evaluated via
/// `M = adj(J⁰) J`.
pub fn characteristic_length(j0: &Mat2, j: &Mat2, e: Vec2, weight: f64) -> Result<f64> {
    let d0 = linalg::det(j0);
    if !(d0 > 0.0) {
        return Err(SghError::NonPhysical(format!(
            "initial Jacobian determinant {d0:e} is not positive"
        )));
    }
    let m = linalg::mat_mul(&linalg::adjugate(j0), j);
    let me = linalg::mat_vec(&m, e);
    let l0 = (weight * d0).sqrt();
    Ok(l0 * linalg::norm(me) / (d0 * linalg::norm(e)))
}

/// `μ = ρ (c₁ c_vor c_s l_c + c₂ l_c² |λ_m|)` under compression, zero otherwise.
pub fn viscosity_mu(rho: f64, cs: f64, lc: f64, lambda: f64, cvor: f64, c1: f64, c2: f64) -> f64 {
    if lambda >= 0.0 {
        return 0.0;
    }
    rho * (c1 * cvor * cs * lc + c2 * lc * lc * lambda.abs())
}

/// Adds `-ω_q μ_q σ_q (∇N_j det J)(ξ_q)` for every point and DOF to `out`.
/// `weights` are the rule weights matching `geo`.
pub fn viscous_force(
    geo: &ElementGeometry,
    weights: &[f64],
    grads: &[VelocityGradient],
    mu: &[f64],
    form: ViscosityForm,
    out: &mut PointForces,
) {
    for q in 0..geo.len() {
        if mu[q] == 0.0 {
            continue;
        }
        let sigma = match form {
            ViscosityForm::Classic => grads[q].grad,
            ViscosityForm::Symmetric => symmetric_part(&grads[q].grad),
        };
        let s = weights[q] * mu[q];
        for (j, b) in geo.scaled_grad(q).iter().enumerate() {
            let f = linalg::mat_vec(&sigma, *b);
            let slot = out.at_mut(q, j);
            slot[0] -= s * f[0];
            slot[1] -= s * f[1];
        }
    }
}

/// Per-point kinetic work `Σ_j u_j · fv_j(ξ_q)` of the viscous forces.
pub fn viscous_energy(fv: &PointForces, us: &[Vec2]) -> Vec<f64> {
    fv.point_work(us)
}

/// Smallest singular value of `J`, computed as `|det J| / σ_max`.
pub fn min_singular_value(j: &Mat2) -> f64 {
    let f = linalg::frobenius_sq(j);
    let a = j[0][0] * j[0][0] + j[1][0] * j[1][0] - j[0][1] * j[0][1] - j[1][1] * j[1][1];
    let b = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let smax2 = 0.5 * f + 0.5 * (a * a + 4.0 * b * b).sqrt();
    if smax2 <= 0.0 {
        return 0.0;
    }
    linalg::det(j).abs() / smax2.sqrt()
}

/// Local stable step `(c_s / l_τ + μ / (ρ l_τ²))⁻¹` before the CFL factor.
pub fn local_dt(cs: f64, mu: f64, rho: f64, l_tau: f64) -> f64 {
    1.0 / (cs / l_tau + mu / (rho * l_tau * l_tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig_examples() {
        let (l, e) = min_eig_2x2(&[[-1.0, 0.0], [0.0, 2.0]]);
        assert_eq!(l, -1.0);
        assert_eq!(e, [1.0, 0.0]);
        let (l, e) = min_eig_2x2(&[[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(l, 0.0);
        assert_eq!(e, [1.0, 0.0]);
        let (l, e) = min_eig_2x2(&[[3.0, 0.0], [0.0, 3.0]]);
        assert_eq!(l, 3.0);
        assert_eq!(e, [1.0, 0.0]);
        let (l, e) = min_eig_2x2(&[[2.0, 0.0], [0.0, -1.0]]);
        assert_eq!(l, -1.0);
        assert!((e[0]).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vorticity_examples() {
        // u = r, v = z
        assert_eq!(vorticity_factor(&[[1.0, 0.0], [0.0, 1.0]]), 1.0);
        // u = -z, v = r
        assert_eq!(vorticity_factor(&[[0.0, -1.0], [1.0, 0.0]]), 0.0);
        assert_eq!(vorticity_factor(&[[0.0; 2]; 2]), 1.0);
    }

    #[test]
    fn mu_examples() {
        assert_eq!(viscosity_mu(1.0, 1.0, 0.1, 0.5, 1.0, 0.5, 2.0), 0.0);
        let mu = viscosity_mu(1.0, 1.0, 0.1, -1.0, 1.0, 0.5, 2.0);
        assert!((mu - 0.07).abs() < 1e-15);
        assert_eq!(viscosity_mu(1.0, 1.0, 0.1, -1.0, 1.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn characteristic_length_identity_and_scaling() {
        let j0 = [[0.3, 0.05], [-0.02, 0.4]];
        let w = 0.7;
        let l0 = (w * linalg::det(&j0)).sqrt();
        for e in [[1.0, 0.0], [0.6, 0.8], [-0.28, 0.96]] {
            let l = characteristic_length(&j0, &j0, e, w).unwrap();
            assert!((l - l0).abs() < 1e-15);
            let js = [[0.5 * j0[0][0], 0.5 * j0[0][1]], [0.5 * j0[1][0], 0.5 * j0[1][1]]];
            let l = characteristic_length(&j0, &js, e, w).unwrap();
            assert!((l - 0.5 * l0).abs() < 1e-15);
        }
        assert!(characteristic_length(&[[0.0; 2]; 2], &j0, [1.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn singular_value_examples() {
        assert!((min_singular_value(&[[0.2, 0.0], [0.0, 0.7]]) - 0.2).abs() < 1e-15);
        assert!((local_dt(1.0, 0.0, 1.0, 0.1) * 0.5 - 0.05).abs() < 1e-15);
    }

    #[test]
    fn form_parsing() {
        assert_eq!("classic".parse::<ViscosityForm>().unwrap(), ViscosityForm::Classic);
        assert!("tensor".parse::<ViscosityForm>().is_err());
    }
}
