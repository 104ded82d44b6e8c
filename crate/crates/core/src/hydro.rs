//! Base staggered Lagrangian step: lumped mass, pressure corner forces on the
//! `m²` rule, hourglass and viscous forces on the `(m+1)²` rule, the
//! compatible internal-energy update and the two-stage midpoint integrator.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{BasisSet, InterpMatrix, RuleTable};
use crate::error::{Result, SghError};
use crate::hourglass;
use crate::linalg::{self, Vec2};
use crate::mesh::{interpolate, ElementGeometry, JacobianSnapshot, Mesh};
use crate::state::{check_det, ElementThermo, KinematicField};
use crate::viscosity::{self, ViscosityForm};

/// Per-point, per-DOF force vectors of one element on one rule, including
/// the quadrature weight. Index `q * n_kin + j`.
#[derive(Debug, Clone)]
pub struct PointForces {
    pub n_points: usize,
    pub n_kin: usize,
    data: Vec<Vec2>,
}

impl PointForces {
    pub fn new(n_points: usize, n_kin: usize) -> Self {
        Self {
            n_points,
            n_kin,
            data: vec![[0.0; 2]; n_points * n_kin],
        }
    }

    pub fn at(&self, q: usize, j: usize) -> Vec2 {
        self.data[q * self.n_kin + j]
    }

    pub fn at_mut(&mut self, q: usize, j: usize) -> &mut Vec2 {
        &mut self.data[q * self.n_kin + j]
    }

    pub fn point(&self, q: usize) -> &[Vec2] {
        &self.data[q * self.n_kin..(q + 1) * self.n_kin]
    }

    /// Sum over points: the force on each kinematic DOF.
    pub fn nodal(&self) -> Vec<Vec2> {
        let mut out = vec![[0.0; 2]; self.n_kin];
        for q in 0..self.n_points {
            for (o, f) in out.iter_mut().zip(self.point(q)) {
                o[0] += f[0];
                o[1] += f[1];
            }
        }
        out
    }

    /// `Σ_j u_j · f_j(ξ_q)` for every point.
    pub fn point_work(&self, us: &[Vec2]) -> Vec<f64> {
        (0..self.n_points)
            .map(|q| self.point(q).iter().zip(us).map(|(f, u)| linalg::dot(*f, *u)).sum())
            .collect()
    }
}

/// Lumped nodal masses from the `(m+1)²` Gauss–Lobatto rule, whose points
/// coincide with the kinematic DOFs.
pub fn lump_mass(
    mesh: &Mesh,
    basis: &BasisSet,
    rho0: impl Fn(usize, Vec2) -> f64,
) -> Result<Vec<f64>> {
    let mut mass = vec![0.0; mesh.n_dofs()];
    let table = &basis.lobatto;
    for e in 0..mesh.n_elems() {
        let xs = mesh.gather(e, &mesh.coords);
        let geo = ElementGeometry::new(table, &xs);
        for (q, &dof) in mesh.elem_dofs(e).iter().enumerate() {
            let m = table.weight(q) * rho0(e, xs[q]) * geo.det[q];
            if !(m > 0.0) {
                return Err(SghError::NonPhysical(format!(
                    "non-positive lumped mass {m:e} in element {e}, node {q}"
                )));
            }
            mass[dof] += m;
        }
    }
    Ok(mass)
}

/// `f_j = Σ_q ω_q p(ξ_q) (∇N_j det J)(ξ_q)` on the rule of `geo`, per point.
pub fn pressure_force(geo: &ElementGeometry, weights: &[f64], p: &[f64]) -> PointForces {
    let mut out = PointForces::new(geo.len(), geo.n_kin);
    for q in 0..geo.len() {
        let s = weights[q] * p[q];
        for (j, b) in geo.scaled_grad(q).iter().enumerate() {
            *out.at_mut(q, j) = [s * b[0], s * b[1]];
        }
    }
    out
}

/// Internal-energy rates at the thermodynamic DOFs that balance the kinetic
/// work of `forces`: `m_l de_l/dt = -Σ_q W_q φ_l(ξ_q)` with the diagonal
/// thermodynamic mass `m_l = ω_l ρ_l det J_l`.
///
/// `phi` holds `φ_l(ξ_q)` row-major (`points × thermo DOFs`).
pub fn energy_rhs(forces: &PointForces, us: &[Vec2], phi: &[f64], point_mass: &[f64]) -> Vec<f64> {
    let nt = point_mass.len();
    let work = forces.point_work(us);
    let mut rhs = vec![0.0; nt];
    for (q, w) in work.iter().enumerate() {
        for (l, r) in rhs.iter_mut().enumerate() {
            *r += w * phi[q * nt + l];
        }
    }
    rhs.iter().zip(point_mass).map(|(r, m)| -r / m).collect()
}

/// Boundary condition on one kinematic DOF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeBc {
    Free,
    /// Zero velocity along the unit normal.
    Slip(Vec2),
    /// Prescribed velocity.
    Fixed(Vec2),
}

impl NodeBc {
    pub fn apply(&self, v: Vec2) -> Vec2 {
        match *self {
            NodeBc::Free => v,
            NodeBc::Slip(n) => linalg::sub(v, linalg::scale(n, linalg::dot(v, n))),
            NodeBc::Fixed(u) => u,
        }
    }

    fn apply_accel(&self, a: Vec2) -> Vec2 {
        match *self {
            NodeBc::Fixed(_) => [0.0, 0.0],
            _ => self.apply(a),
        }
    }
}

/// Which degree `m-1` basis distributes the `(m+1)²`-rule work into the
/// thermodynamic DOFs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyBasis {
    /// The thermodynamic shape functions themselves.
    Thermo,
    /// The tensor basis on equispaced nodes through the element corners
    /// (bilinear corner functions for `Q²-Q¹`).
    Closed,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub hourglass: bool,
    pub hg_scale: f64,
    pub viscosity: bool,
    pub form: ViscosityForm,
    pub c1: f64,
    pub c2: f64,
    pub cfl: f64,
    pub energy_basis: EnergyBasis,
    /// Replace pointwise `μ` by its element average.
    pub mu_element_average: bool,
    /// Singularity floor as a fraction of each element's mean initial `det J`.
    pub det_floor: f64,
    /// Abort when `|δρ|` exceeds this multiple of the element mean density.
    pub drho_limit: f64,
    pub max_energy_clamps: usize,
    pub dt_growth: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            hourglass: true,
            hg_scale: 1.0,
            viscosity: true,
            form: ViscosityForm::Symmetric,
            c1: 0.5,
            c2: 2.0,
            cfl: 0.3,
            energy_basis: EnergyBasis::Thermo,
            mu_element_average: false,
            det_floor: 1e-12,
            drho_limit: 10.0,
            max_energy_clamps: 1_000_000,
            dt_growth: 1.02,
        }
    }
}

pub type EnergySource = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;

#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub kin: KinematicField,
    pub thermo: ElementThermo,
    pub energy_clamps: usize,
}

/// Everything an element contributes at one stage.
#[derive(Debug, Clone)]
pub struct ElementRates {
    pub force: Vec<Vec2>,
    pub de: Vec<f64>,
    /// Largest `c_s / l_τ + μ / (ρ l_τ²)` over the element's points.
    pub inv_dt: f64,
    pub min_det: f64,
    pub max_drho: f64,
    pub max_mu: f64,
    /// `Σ_l m_l s(x_l)` of the external energy source.
    pub source_power: f64,
}

#[derive(Debug, Clone)]
pub struct Rates {
    pub accel: Vec<Vec2>,
    pub de: Vec<f64>,
    /// `CFL`-free stable step, `min (c_s/l_τ + μ/(ρ l_τ²))⁻¹` with
    /// `l_τ = σ_min(J) / m`.
    pub dt_bound: f64,
    pub min_det: f64,
    pub max_drho: f64,
    pub max_mu: f64,
    pub source_power: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub dt: f64,
    pub source_work: f64,
}

pub struct Solver {
    pub mesh: Mesh,
    pub basis: BasisSet,
    pub snap: JacobianSnapshot,
    pub bcs: Vec<NodeBc>,
    pub opts: SolverOptions,
    pub source: Option<EnergySource>,
    phi_high: Vec<f64>,
    closed: InterpMatrix,
}

impl Solver {
    pub fn new(
        mesh: Mesh,
        basis: BasisSet,
        snap: JacobianSnapshot,
        bcs: Vec<NodeBc>,
        opts: SolverOptions,
        source: Option<EnergySource>,
    ) -> Result<Self> {
        if bcs.len() != mesh.n_dofs() {
            return Err(SghError::InvalidInput(format!(
                "{} boundary conditions for {} DOFs",
                bcs.len(),
                mesh.n_dofs()
            )));
        }
        if basis.order != mesh.order {
            return Err(SghError::InvalidInput("basis and mesh order differ".into()));
        }
        let closed = basis.closed_thermo_at_high();
        let phi_high = high_phi(&basis.high);
        Ok(Self {
            mesh,
            basis,
            snap,
            bcs,
            opts,
            source,
            phi_high,
            closed,
        })
    }

    /// Re-derives densities and the EOS after a position update.
    pub fn refresh(&self, state: &mut State) -> Result<()> {
        state.thermo.update_density_strong(
            &self.mesh,
            &self.basis,
            &self.snap,
            &state.kin.position,
            self.opts.det_floor,
        )
    }

    /// Element-local forces, energy rates and time-step bound.
    pub fn element_rates(&self, e: usize, state: &State) -> Result<ElementRates> {
        let basis = &self.basis;
        let th = &state.thermo;
        let (nl, nh, nk) = (basis.low.len(), basis.high.len(), basis.n_kin());
        let xs = self.mesh.gather(e, &state.kin.position);
        let us = self.mesh.gather(e, &state.kin.velocity);
        let floor = self.opts.det_floor * self.snap.det_scale[e];

        let lo = ElementGeometry::new(&basis.low, &xs);
        let hi = ElementGeometry::new(&basis.high, &xs);
        check_det(e, 0, &lo.det, floor)?;
        check_det(e, nl, &hi.det, floor)?;

        let low = e * nl..(e + 1) * nl;
        let high = e * nh..(e + 1) * nh;
        let rho_low = &th.rho[low.clone()];
        let rho_high = &th.rho_high[high.clone()];
        let point_mass: Vec<f64> = (0..nl)
            .map(|l| basis.low.weight(l) * self.snap.rho_det0_low[e * nl + l])
            .collect();

        // pressure on the m² rule; the rule is collocated with the thermo DOFs
        let fp = pressure_force(&lo, &basis.low.rule.weights, &th.p[low.clone()]);
        let mut force = fp.nodal();
        let mut de: Vec<f64> = fp
            .point_work(&us)
            .iter()
            .zip(&point_mass)
            .map(|(w, m)| -w / m)
            .collect();

        let cs_high = hourglass::interpolated_sound_speed(&th.cs[low.clone()], &basis.interp);
        let mut combined = PointForces::new(nh, nk);
        let mut max_drho: f64 = 0.0;
        if self.opts.hourglass {
            let drho = hourglass::density_variation(rho_high, rho_low, &basis.interp);
            let volume: f64 = (0..nl).map(|q| basis.low.weight(q) * lo.det[q]).sum();
            let mass: f64 = point_mass.iter().sum();
            let limit = self.opts.drho_limit * mass / volume;
            for (q, d) in drho.iter().enumerate() {
                max_drho = max_drho.max(d.abs());
                if d.abs() > limit {
                    return Err(SghError::DensityBlowup {
                        elem: e,
                        point: q,
                        drho: d.abs(),
                        limit,
                    });
                }
            }
            let dp = hourglass::pressure_variation(&cs_high, &drho);
            hourglass::hourglass_force(
                &hi,
                &basis.high.rule.weights,
                &dp,
                self.opts.hg_scale,
                &mut combined,
            );
        }

        let mut mu = vec![0.0; nh];
        if self.opts.viscosity {
            let grads = viscosity::velocity_gradient(&hi, &us);
            for q in 0..nh {
                let eps = viscosity::symmetric_part(&grads[q].grad);
                let (lambda, evec) = viscosity::min_eig_2x2(&eps);
                if lambda >= 0.0 {
                    continue;
                }
                let cvor = viscosity::vorticity_factor(&grads[q].grad);
                let lc = viscosity::characteristic_length(
                    &self.snap.jac0_high[e * nh + q],
                    &hi.jac[q],
                    evec,
                    basis.high.weight(q),
                )?;
                mu[q] = viscosity::viscosity_mu(
                    rho_high[q],
                    cs_high[q],
                    lc,
                    lambda,
                    cvor,
                    self.opts.c1,
                    self.opts.c2,
                );
            }
            if self.opts.mu_element_average {
                let avg = mu.iter().sum::<f64>() / nh as f64;
                mu.iter_mut().for_each(|m| *m = avg);
            }
            viscosity::viscous_force(
                &hi,
                &basis.high.rule.weights,
                &grads,
                &mu,
                self.opts.form,
                &mut combined,
            );
        }

        if self.opts.hourglass || self.opts.viscosity {
            let phi = match self.opts.energy_basis {
                EnergyBasis::Thermo => &self.phi_high,
                EnergyBasis::Closed => &self.closed.data,
            };
            let de_c = energy_rhs(&combined, &us, phi, &point_mass);
            for (d, c) in de.iter_mut().zip(de_c) {
                *d += c;
            }
            for (f, c) in force.iter_mut().zip(combined.nodal()) {
                f[0] += c[0];
                f[1] += c[1];
            }
        }

        let mut source_power = 0.0;
        if let Some(src) = &self.source {
            for l in 0..nl {
                let x = interpolate(basis.low.shape(l), &xs);
                let s = src(x);
                de[l] += s;
                source_power += point_mass[l] * s;
            }
        }

        let mut inv_dt: f64 = 0.0;
        let order = basis.order as f64;
        for q in 0..nh {
            // node spacing inside the element shrinks like 1/m
            let l_tau = viscosity::min_singular_value(&hi.jac[q]) / order;
            if !(l_tau > 0.0) {
                return Err(SghError::SingularJacobian {
                    elem: e,
                    point: nl + q,
                    det: hi.det[q],
                    floor,
                });
            }
            inv_dt = inv_dt.max(1.0 / viscosity::local_dt(cs_high[q], mu[q], rho_high[q], l_tau));
        }

        let min_det = lo
            .det
            .iter()
            .chain(&hi.det)
            .fold(f64::INFINITY, |a, &b| a.min(b));
        let max_mu = mu.iter().fold(0.0f64, |a, &b| a.max(b));
        Ok(ElementRates {
            force,
            de,
            inv_dt,
            min_det,
            max_drho,
            max_mu,
            source_power,
        })
    }

    /// Assembles all element contributions in element order.
    pub fn rates(&self, state: &State) -> Result<Rates> {
        let per_elem: Vec<Result<ElementRates>> = (0..self.mesh.n_elems())
            .into_par_iter()
            .map(|e| self.element_rates(e, state))
            .collect();
        let n = self.mesh.n_dofs();
        let nl = self.basis.low.len();
        let mut force = vec![[0.0; 2]; n];
        let mut de = vec![0.0; self.mesh.n_elems() * nl];
        let mut out = Rates {
            accel: Vec::new(),
            de: Vec::new(),
            dt_bound: f64::INFINITY,
            min_det: f64::INFINITY,
            max_drho: 0.0,
            max_mu: 0.0,
            source_power: 0.0,
        };
        let mut inv_dt: f64 = 0.0;
        for (e, r) in per_elem.into_iter().enumerate() {
            let r = r?;
            for (&dof, f) in self.mesh.elem_dofs(e).iter().zip(&r.force) {
                force[dof][0] += f[0];
                force[dof][1] += f[1];
            }
            de[e * nl..(e + 1) * nl].copy_from_slice(&r.de);
            inv_dt = inv_dt.max(r.inv_dt);
            out.min_det = out.min_det.min(r.min_det);
            out.max_drho = out.max_drho.max(r.max_drho);
            out.max_mu = out.max_mu.max(r.max_mu);
            out.source_power += r.source_power;
        }
        out.accel = force
            .iter()
            .zip(&state.kin.nodal_mass)
            .zip(&self.bcs)
            .map(|((f, m), bc)| bc.apply_accel([f[0] / m, f[1] / m]))
            .collect();
        out.de = de;
        out.dt_bound = if inv_dt > 0.0 { 1.0 / inv_dt } else { f64::INFINITY };
        Ok(out)
    }

    /// Next step size: `CFL · dt_bound`, limited in growth and clipped to `t_stop`.
    pub fn compute_dt(&self, rates: &Rates, dt_prev: Option<f64>, t: f64, t_stop: f64) -> f64 {
        let mut dt = self.opts.cfl * rates.dt_bound;
        if let Some(prev) = dt_prev {
            dt = dt.min(self.opts.dt_growth * prev);
        }
        let remaining = t_stop - t;
        if dt >= remaining {
            dt = remaining;
        } else if dt > 0.5 * remaining {
            // avoid a sliver step at the end
            dt = 0.5 * remaining;
        }
        dt
    }

    fn clamp_energy(&self, state: &mut State) -> Result<()> {
        for e in state.thermo.e.iter_mut() {
            if *e < 0.0 {
                *e = 0.0;
                state.energy_clamps += 1;
            }
        }
        if state.energy_clamps > self.opts.max_energy_clamps {
            return Err(SghError::EnergyFloor {
                count: state.energy_clamps,
                limit: self.opts.max_energy_clamps,
            });
        }
        Ok(())
    }

    /// Two-stage midpoint update. `rates0` must be the rates of `state`.
    pub fn step(&self, state: &mut State, dt: f64, rates0: &Rates) -> Result<StepInfo> {
        if !(dt > 0.0) {
            return Err(SghError::InvalidInput(format!("time step {dt} must be positive")));
        }
        let half = 0.5 * dt;
        let mut mid = state.clone();
        for i in 0..mid.kin.position.len() {
            let v0 = state.kin.velocity[i];
            let a = rates0.accel[i];
            mid.kin.position[i] = [
                state.kin.position[i][0] + half * v0[0],
                state.kin.position[i][1] + half * v0[1],
            ];
            mid.kin.velocity[i] = self.bcs[i].apply([v0[0] + half * a[0], v0[1] + half * a[1]]);
        }
        for (e, d) in mid.thermo.e.iter_mut().zip(&rates0.de) {
            *e += half * d;
        }
        mid.t = state.t + half;
        self.clamp_energy(&mut mid)?;
        self.refresh(&mut mid)?;

        let rates1 = self.rates(&mid)?;
        for i in 0..state.kin.position.len() {
            let v_mid = mid.kin.velocity[i];
            let v0 = state.kin.velocity[i];
            let a = rates1.accel[i];
            state.kin.position[i][0] += dt * v_mid[0];
            state.kin.position[i][1] += dt * v_mid[1];
            state.kin.velocity[i] = self.bcs[i].apply([v0[0] + dt * a[0], v0[1] + dt * a[1]]);
        }
        for (e, d) in state.thermo.e.iter_mut().zip(&rates1.de) {
            *e += dt * d;
        }
        state.t += dt;
        state.energy_clamps = mid.energy_clamps;
        self.clamp_energy(state)?;
        self.refresh(state)?;
        Ok(StepInfo {
            dt,
            source_work: dt * rates1.source_power,
        })
    }

    pub fn internal_energy(&self, state: &State) -> f64 {
        state.thermo.internal_energy(&self.snap, &self.basis)
    }

    pub fn total_energy(&self, state: &State) -> f64 {
        state.kin.kinetic_energy() + self.internal_energy(state)
    }
}

fn high_phi(table: &RuleTable) -> Vec<f64> {
    (0..table.len()).flat_map(|q| table.phi(q).to_vec()).collect()
}
