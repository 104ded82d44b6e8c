//! Time loop, audit records and post-processing metrics.

use std::time::Instant;

use crate::error::{Result, SghError};
use crate::hydro::{Rates, Solver, SolverOptions, State};
use crate::linalg::{self, Vec2};
use crate::mesh::{interpolate, ElementGeometry};
use crate::problems::{ProblemKind, ProblemSpec, Reference};
use crate::state::total_mass;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub kinetic: f64,
    pub internal: f64,
    pub total: f64,
    /// Total energy minus the work done by external sources.
    pub balance: f64,
    pub mass: f64,
    pub max_drho: f64,
    pub min_det: f64,
    pub distortion: f64,
    pub wall_seconds: f64,
}

/// A problem instance being advanced in time.
pub struct Simulation {
    pub kind: ProblemKind,
    pub solver: Solver,
    pub state: State,
    pub t_final: f64,
    pub reference: Reference,
    pub center: Option<Vec2>,
    /// Radial window (initial distance from `center`, or `r`) over which the
    /// hourglass distortion indicator is taken.
    pub distortion_window: (f64, f64),
    pub steps: usize,
    pub source_work: f64,
    dt_prev: Option<f64>,
    rates: Option<Rates>,
}

impl Simulation {
    pub fn new(spec: &ProblemSpec, opts: SolverOptions) -> Result<Self> {
        let (solver, state) = spec.initialize(opts)?;
        let distortion_window = match spec.kind {
            ProblemKind::Sedov => (0.1, 0.7),
            _ => (0.0, f64::INFINITY),
        };
        Ok(Self {
            kind: spec.kind,
            solver,
            state,
            t_final: spec.t_final,
            reference: spec.reference.clone(),
            center: spec.center,
            distortion_window,
            steps: 0,
            source_work: 0.0,
            dt_prev: None,
            rates: None,
        })
    }

    fn current_rates(&mut self) -> Result<&Rates> {
        if self.rates.is_none() {
            self.rates = Some(self.solver.rates(&self.state)?);
        }
        Ok(self.rates.as_ref().expect("just set"))
    }

    /// Takes one step toward `t_stop` and returns its audit record.
    pub fn advance(&mut self, t_stop: f64) -> Result<AuditRecord> {
        let start = Instant::now();
        let dt_prev = self.dt_prev;
        let t = self.state.t;
        let rates = self.current_rates()?.clone();
        let dt = self.solver.compute_dt(&rates, dt_prev, t, t_stop);
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SghError::NonPhysical(format!(
                "time step collapsed to {dt:e} at t = {t}"
            )));
        }
        let info = self.solver.step(&mut self.state, dt, &rates)?;
        self.rates = None;
        self.dt_prev = Some(dt);
        self.steps += 1;
        self.source_work += info.source_work;
        let rates = self.current_rates()?.clone();
        let mut rec = self.audit(&rates, dt);
        rec.wall_seconds = start.elapsed().as_secs_f64();
        Ok(rec)
    }

    /// Audit record of the current state with the given step diagnostics.
    pub fn audit(&self, rates: &Rates, dt: f64) -> AuditRecord {
        let kinetic = self.state.kin.kinetic_energy();
        let internal = self.solver.internal_energy(&self.state);
        AuditRecord {
            step: self.steps,
            t: self.state.t,
            dt,
            kinetic,
            internal,
            total: kinetic + internal,
            balance: kinetic + internal - self.source_work,
            mass: self.mass(),
            max_drho: rates.max_drho,
            min_det: rates.min_det,
            distortion: self.distortion(),
            wall_seconds: 0.0,
        }
    }

    /// Record of the current state; computes rates if needed.
    pub fn snapshot_record(&mut self) -> Result<AuditRecord> {
        let rates = self.current_rates()?.clone();
        Ok(self.audit(&rates, 0.0))
    }

    pub fn mass(&self) -> f64 {
        total_mass(
            &self.solver.mesh,
            &self.solver.basis,
            &self.state.thermo,
            &self.state.kin.position,
        )
    }

    pub fn distortion(&self) -> f64 {
        let (lo, hi) = self.distortion_window;
        let center = self.center;
        hourglass_distortion(
            &self.solver.mesh,
            &self.state.kin.position,
            |x0: Vec2| {
                let r = match center {
                    Some(c) => linalg::norm(linalg::sub(x0, c)),
                    None => x0[0],
                };
                r >= lo && r <= hi
            },
        )
    }

    /// Advances to `t_stop`, calling `on_step` after every step.
    pub fn run_until(
        &mut self,
        t_stop: f64,
        mut on_step: impl FnMut(&Simulation, &AuditRecord) -> Result<()>,
    ) -> Result<()> {
        let eps = 1e-12 * t_stop.abs().max(1.0);
        while self.state.t < t_stop - eps {
            let rec = self.advance(t_stop)?;
            on_step(self, &rec)?;
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<()> {
        self.run_until(self.t_final, |_, _| Ok(()))
    }

    /// Thermodynamic-point scatter `(radius, ρ, p, e, ρ_ref)`.
    pub fn scatter(&self) -> Vec<ScatterPoint> {
        let mesh = &self.solver.mesh;
        let basis = &self.solver.basis;
        let th = &self.state.thermo;
        let nl = basis.low.len();
        let mut out = Vec::with_capacity(mesh.n_elems() * nl);
        for e in 0..mesh.n_elems() {
            let xs = mesh.gather(e, &self.state.kin.position);
            for l in 0..nl {
                let x = interpolate(basis.low.shape(l), &xs);
                let radius = match self.center {
                    Some(c) => linalg::norm(linalg::sub(x, c)),
                    None => x[0],
                };
                let i = e * nl + l;
                out.push(ScatterPoint {
                    x,
                    radius,
                    rho: th.rho[i],
                    p: th.p[i],
                    e: th.e[i],
                    reference: self.reference.density(radius, self.state.t),
                });
            }
        }
        out
    }

    /// `‖ρ - 1‖_{L²}` on the `(m+1)²` rule, with `ρ` the interpolated
    /// thermodynamic density.
    pub fn density_variation_error(&self) -> f64 {
        let mesh = &self.solver.mesh;
        let basis = &self.solver.basis;
        let th = &self.state.thermo;
        let nl = basis.low.len();
        let mut sum = 0.0;
        for e in 0..mesh.n_elems() {
            let xs = mesh.gather(e, &self.state.kin.position);
            let geo = ElementGeometry::new(&basis.high, &xs);
            let rho = basis.interp.apply(&th.rho[e * nl..(e + 1) * nl]);
            for (q, r) in rho.iter().enumerate() {
                sum += basis.high.weight(q) * geo.det[q] * (r - 1.0) * (r - 1.0);
            }
        }
        sum.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub x: Vec2,
    pub radius: f64,
    pub rho: f64,
    pub p: f64,
    pub e: f64,
    pub reference: Option<f64>,
}

/// Mean `ρ` per radial bin of width `width`; empty bins are skipped.
pub fn binned_profile(points: &[ScatterPoint], width: f64) -> Vec<(f64, f64)> {
    let max_r = points.iter().map(|p| p.radius).fold(0.0, f64::max);
    let nbins = (max_r / width).floor() as usize + 1;
    let mut sum = vec![0.0; nbins];
    let mut count = vec![0usize; nbins];
    for p in points {
        let b = ((p.radius / width) as usize).min(nbins - 1);
        sum[b] += p.rho;
        count[b] += 1;
    }
    (0..nbins)
        .filter(|&b| count[b] > 0)
        .map(|b| ((b as f64 + 0.5) * width, sum[b] / count[b] as f64))
        .collect()
}

/// Outermost radius where the binned profile crosses `threshold` from above,
/// linearly interpolated between bin centers.
pub fn front_radius(profile: &[(f64, f64)], threshold: f64) -> Option<f64> {
    for w in profile.windows(2).rev() {
        let ((r0, v0), (r1, v1)) = (w[0], w[1]);
        if v0 >= threshold && v1 < threshold {
            return Some(r0 + (v0 - threshold) / (v0 - v1) * (r1 - r0));
        }
    }
    None
}

/// Median density over scatter points with `lo <= radius <= hi`.
pub fn median_density(points: &[ScatterPoint], lo: f64, hi: f64) -> Option<f64> {
    let mut v: Vec<f64> = points
        .iter()
        .filter(|p| p.radius >= lo && p.radius <= hi)
        .map(|p| p.rho)
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Largest high-frequency component of the kinematic lattice: at interior
/// lattice nodes whose initial position passes `keep`,
/// `|x_ij - ¼ Σ x_nbr| - |x⁰_ij - ¼ Σ x⁰_nbr|` is taken relative to the
/// initial mean neighbor distance. A smooth (or affine) motion of a
/// smooth lattice gives values near zero.
pub fn hourglass_distortion(
    mesh: &crate::mesh::Mesh,
    coords: &[Vec2],
    keep: impl Fn(Vec2) -> bool,
) -> f64 {
    let (lx, ly) = mesh.lattice_dims();
    let x0 = &mesh.coords;
    let mut worst: f64 = 0.0;
    for j in 1..ly.saturating_sub(1) {
        for i in 1..lx.saturating_sub(1) {
            let c = mesh.lattice_id(i, j);
            if !keep(x0[c]) {
                continue;
            }
            let nb = [
                mesh.lattice_id(i - 1, j),
                mesh.lattice_id(i + 1, j),
                mesh.lattice_id(i, j - 1),
                mesh.lattice_id(i, j + 1),
            ];
            let dev = |x: &[Vec2]| {
                let mut avg = [0.0; 2];
                for &n in &nb {
                    avg[0] += 0.25 * x[n][0];
                    avg[1] += 0.25 * x[n][1];
                }
                linalg::sub(x[c], avg)
            };
            let h = nb
                .iter()
                .map(|&n| linalg::norm(linalg::sub(x0[n], x0[c])))
                .sum::<f64>()
                / 4.0;
            let d = linalg::norm(linalg::sub(dev(coords), dev(x0)));
            worst = worst.max(d / h);
        }
    }
    worst
}

/// One row of a mesh-refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub kinematic_dofs: usize,
    pub thermo_dofs: usize,
    pub error: f64,
    pub order: Option<f64>,
}

/// Runs the Taylor–Green vortex on each `n × n` mesh to `t_final` and
/// reports the density-variation error and observed orders.
pub fn taylor_green_convergence(
    m: usize,
    cells: &[usize],
    t_final: f64,
    opts: &SolverOptions,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cells.len());
    for &n in cells {
        let spec = crate::problems::taylor_green(m, n)?;
        let mut sim = Simulation::new(&spec, opts.clone())?;
        sim.run_until(t_final, |_, _| Ok(()))?;
        let error = sim.density_variation_error();
        let h = 1.0 / n as f64;
        let order = rows.last().and_then(|prev| {
            (prev.error > 0.0 && error > 0.0)
                .then(|| (prev.error / error).ln() / (prev.h / h).ln())
        });
        rows.push(ConvergenceRow {
            h,
            kinematic_dofs: spec.mesh.n_dofs(),
            thermo_dofs: spec.mesh.n_thermo_dofs(),
            error,
            order,
        });
    }
    Ok(rows)
}
