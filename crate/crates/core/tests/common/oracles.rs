//! Independent reference computations shared by several test targets.

use rand::Rng;

use sgh::basis::build_basis;
use sgh::hydro::{pressure_force, EnergyBasis, NodeBc, PointForces, Solver, SolverOptions, State};
use sgh::linalg::Vec2;
use sgh::mesh::ElementGeometry;
use sgh::problems;
use sgh::viscosity::{
    characteristic_length, min_eig_2x2, min_singular_value, velocity_gradient, viscous_force,
    ViscosityForm,
};

use super::*;

/// `det J` of the bilinear map at reference point `(s, t)`.
pub fn bilinear_det(x: &[Vec2; 4], s: f64, t: f64) -> f64 {
    let mut dxi = [0.0; 2];
    let mut deta = [0.0; 2];
    for c in 0..2 {
        dxi[c] = 0.25 * ((1.0 - t) * (x[1][c] - x[0][c]) + (1.0 + t) * (x[3][c] - x[2][c]));
        deta[c] = 0.25 * ((1.0 - s) * (x[2][c] - x[0][c]) + (1.0 + s) * (x[3][c] - x[1][c]));
    }
    dxi[0] * deta[1] - deta[0] * dxi[1]
}

/// Gradient of the quad area with respect to each corner (shoelace).
pub fn area_gradient(x: &[Vec2; 4]) -> [Vec2; 4] {
    // counter-clockwise walk 0 → 1 → 3 → 2
    let ring = [0usize, 1, 3, 2];
    let mut g = [[0.0; 2]; 4];
    for k in 0..4 {
        let prev = x[ring[(k + 3) % 4]];
        let next = x[ring[(k + 1) % 4]];
        g[ring[k]] = [0.5 * (next[1] - prev[1]), 0.5 * (prev[0] - next[0])];
    }
    g
}

pub fn area(x: &[Vec2; 4]) -> f64 {
    let ring = [0usize, 1, 3, 2];
    0.5 * (0..4)
        .map(|k| {
            let (a, b) = (x[ring[k]], x[ring[(k + 1) % 4]]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

/// Subzonal-pressure corner forces of a Q1 zone: `p ∂A/∂x_j + Σ_q δp_q ∂V_q/∂x_j`
/// with subzonal volumes `V_q = det J(ξ_q)` at the 2×2 Gauss points.
pub fn subzonal_oracle(x: &[Vec2; 4], x0: &[Vec2; 4], rho0: f64, e: f64, gamma: f64) -> [Vec2; 4] {
    let g = 1.0 / 3f64.sqrt();
    let pts = [(-g, -g), (g, -g), (-g, g), (g, g)];
    let a = area(x);
    let rho_bar = rho0 * area(x0) / a;
    let p = (gamma - 1.0) * rho_bar * e;
    let cs2 = gamma * p / rho_bar;
    let ga = area_gradient(x);
    let mut f = ga.map(|v| [p * v[0], p * v[1]]);
    for &(s, t) in &pts {
        let rho_q = rho0 * bilinear_det(x0, s, t) / bilinear_det(x, s, t);
        let dp = cs2 * (rho_q - rho_bar);
        for j in 0..4 {
            for c in 0..2 {
                // det J is affine in any single coordinate
                let mut xp = *x;
                let mut xm = *x;
                xp[j][c] += 0.5;
                xm[j][c] -= 0.5;
                let dv = bilinear_det(&xp, s, t) - bilinear_det(&xm, s, t);
                f[j][c] += dp * dv;
            }
        }
    }
    f
}

/// Node-1 `R` force of the classic Q1 tensor viscosity with per-point `μ` on
/// the corner rule, written out term by term. `d(a, b)` is `x_a - x_b`.
pub fn explicit_node1_r(x: &[Vec2; 4], u: [f64; 4], mu: [f64; 4], det: [f64; 4]) -> f64 {
    let r = |a: usize, b: usize| x[a - 1][0] - x[b - 1][0];
    let z = |a: usize, b: usize| x[a - 1][1] - x[b - 1][1];
    let dot = |a: (usize, usize), b: (usize, usize)| r(a.0, a.1) * r(b.0, b.1) + z(a.0, a.1) * z(b.0, b.1);
    let (u1, u2, u3, u4) = (u[0], u[1], u[2], u[3]);
    mu[0] / det[0]
        * (u1 * dot((3, 2), (3, 2)) + u2 * dot((1, 3), (3, 2)) + u3 * dot((2, 1), (3, 2)))
        + mu[1] / det[1]
            * (u1 * dot((4, 2), (4, 2)) - u2 * dot((4, 1), (4, 2)) + u4 * dot((2, 1), (4, 2)))
        + mu[2] / det[2]
            * (u1 * dot((3, 4), (3, 4)) + u3 * dot((4, 1), (3, 4)) + u4 * dot((1, 3), (3, 4)))
}

/// `(d KE/dt, d IE/dt)` of one rate evaluation.
pub fn energy_rates(solver: &Solver, state: &State) -> (f64, f64, f64) {
    let r = solver.rates(state).unwrap();
    let kin = &state.kin;
    let dke: Vec<f64> = kin
        .velocity
        .iter()
        .zip(&r.accel)
        .zip(&kin.nodal_mass)
        .map(|((u, a), m)| m * (u[0] * a[0] + u[1] * a[1]))
        .collect();
    let nl = solver.basis.low.len();
    let die: Vec<f64> = r
        .de
        .iter()
        .enumerate()
        .map(|(i, d)| solver.basis.low.weight(i % nl) * solver.snap.rho_det0_low[i] * d)
        .collect();
    let scale = dke.iter().chain(&die).map(|v| v.abs()).sum::<f64>();
    (dke.iter().sum(), die.iter().sum(), scale)
}

pub fn random_state(m: usize, seed: u64, basis: EnergyBasis) -> (Solver, State) {
    let mut r = rng(seed);
    let mesh = jittered_mesh(m, 3, 3, 0.3, &mut r);
    let spec = free_spec(mesh, 1.0, |_| [0.0, 0.0]);
    let opts = SolverOptions {
        energy_basis: basis,
        ..SolverOptions::default()
    };
    let (solver, mut state) = spec.initialize(opts).unwrap();
    for (x, u) in state.kin.position.iter_mut().zip(state.kin.velocity.iter_mut()) {
        x[0] += r.gen_range(-0.02..0.02) / m as f64;
        x[1] += r.gen_range(-0.02..0.02) / m as f64;
        *u = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
    }
    solver.refresh(&mut state).unwrap();
    (solver, state)
}

/// Energy drift of the Taylor–Green vortex at a fixed step size.
pub fn taylor_green_drift(steps: usize, t_end: f64) -> f64 {
    let spec = problems::taylor_green(2, 4).unwrap();
    let opts = SolverOptions {
        viscosity: false,
        ..SolverOptions::default()
    };
    let (solver, mut state) = spec.initialize(opts).unwrap();
    let e0 = solver.total_energy(&state);
    let dt = t_end / steps as f64;
    let mut work = 0.0;
    for _ in 0..steps {
        let r = solver.rates(&state).unwrap();
        work += solver.step(&mut state, dt, &r).unwrap().source_work;
    }
    solver.total_energy(&state) - work - e0
}


fn max_norm(fs: &[Vec2]) -> f64 {
    fs.iter().map(|f| f[0].abs().max(f[1].abs())).fold(0.0, f64::max)
}

/// Largest relative gap between the `m²`- and `(m+1)²`-rule pressure forces
/// over `trials` random straight-sided `Q^m` elements.
pub fn quadrature_equality_gap(m: usize, trials: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let basis = build_basis(m).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mesh = single_element(m, random_quad(&mut rng, 0.25));
        let lo = ElementGeometry::new(&basis.low, &mesh.coords);
        let hi = ElementGeometry::new(&basis.high, &mesh.coords);
        let p: Vec<f64> = (0..basis.low.len()).map(|_| rng.gen_range(0.1..3.0)).collect();
        let f_low = pressure_force(&lo, &basis.low.rule.weights, &p).nodal();
        let f_high = pressure_force(&hi, &basis.high.rule.weights, &basis.interp.apply(&p)).nodal();
        let scale = max_norm(&f_low);
        for (a, b) in f_low.iter().zip(&f_high) {
            for c in 0..2 {
                worst = worst.max(rel_diff(a[c], b[c], scale));
            }
        }
    }
    worst
}

/// Largest relative gap between the assembled Q1 pressure-plus-hourglass
/// forces and [`subzonal_oracle`] on jittered 2×2 patches.
pub fn q1_hourglass_gap(trials: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mesh = jittered_mesh(1, 2, 2, 0.3, &mut rng);
        let spec = free_spec(mesh, 2.0, |_| [0.0, 0.0]);
        let opts = SolverOptions {
            viscosity: false,
            ..SolverOptions::default()
        };
        let (solver, mut state) = spec.initialize(opts).unwrap();
        for x in state.kin.position.iter_mut() {
            x[0] += rng.gen_range(-0.05..0.05);
            x[1] += rng.gen_range(-0.05..0.05);
        }
        solver.refresh(&mut state).unwrap();

        let mut oracle = vec![[0.0; 2]; solver.mesh.n_dofs()];
        let mut assembled = vec![[0.0; 2]; solver.mesh.n_dofs()];
        for e in 0..solver.mesh.n_elems() {
            let dofs = solver.mesh.elem_dofs(e);
            let x: [Vec2; 4] = std::array::from_fn(|k| state.kin.position[dofs[k]]);
            let x0: [Vec2; 4] = std::array::from_fn(|k| solver.mesh.coords[dofs[k]]);
            let f = subzonal_oracle(&x, &x0, 1.0, 2.0, 1.4);
            let r = solver.element_rates(e, &state).unwrap();
            for k in 0..4 {
                for c in 0..2 {
                    oracle[dofs[k]][c] += f[k][c];
                    assembled[dofs[k]][c] += r.force[k][c];
                }
            }
        }
        let scale = max_norm(&oracle);
        for (a, b) in assembled.iter().zip(&oracle) {
            for c in 0..2 {
                worst = worst.max(rel_diff(a[c], b[c], scale));
            }
        }
    }
    worst
}

/// Largest relative gap between the classic-form Q1 viscous force on node 1
/// and [`explicit_node1_r`] on random quads.
pub fn q1_viscous_gap(trials: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let basis = build_basis(1).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let x = random_quad(&mut rng, 0.2);
        let mesh = single_element(1, x);
        let geo = ElementGeometry::new(&basis.lobatto, &mesh.coords);
        let us: Vec<Vec2> = (0..4)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let mu: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..2.0));
        let grads = velocity_gradient(&geo, &us);
        let mut f = PointForces::new(4, 4);
        viscous_force(&geo, &basis.lobatto.rule.weights, &grads, &mu, ViscosityForm::Classic, &mut f);
        let got = -f.nodal()[0][0];
        // closed form lives on the unit reference square: det J is 4x ours and
        // the corner weight 1/4 sits outside the bracket
        let det = geo.det.iter().map(|d| 4.0 * d).collect::<Vec<_>>();
        let u = [us[0][0], us[1][0], us[2][0], us[3][0]];
        let want = 0.25 * explicit_node1_r(&x, u, mu, [det[0], det[1], det[2], det[3]]);
        worst = worst.max(rel_diff(got, want, want.abs().max(1.0)));
    }
    worst
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest change of `ρ, ρ̃, e, p` and of the velocity after 100 steps of a
/// uniform stream through a jittered `Q^m` mesh.
pub fn free_stream_gap(m: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mesh = jittered_mesh(m, 4, 4, 0.3, &mut r);
    let stream = [0.7, -0.4];
    let mut spec = free_spec(mesh, 2.5, move |_| stream);
    spec.bcs = spec
        .mesh
        .boundary
        .iter()
        .map(|&tag| if tag != 0 { NodeBc::Fixed(stream) } else { NodeBc::Free })
        .collect();
    let (solver, mut state) = spec.initialize(SolverOptions::default()).unwrap();
    let th0 = state.thermo.clone();
    let mut prev = None;
    for _ in 0..100 {
        let rates = solver.rates(&state).unwrap();
        let dt = solver.compute_dt(&rates, prev, state.t, 1e9);
        solver.step(&mut state, dt, &rates).unwrap();
        prev = Some(dt);
    }
    assert!(state.t > 0.1);
    let th = &state.thermo;
    let du = state
        .kin
        .velocity
        .iter()
        .map(|u| (u[0] - stream[0]).abs().max((u[1] - stream[1]).abs()))
        .fold(0.0, f64::max);
    [
        max_abs_diff(&th.rho, &th0.rho),
        max_abs_diff(&th.rho_high, &th0.rho_high),
        max_abs_diff(&th.e, &th0.e),
        max_abs_diff(&th.p, &th0.p),
        du,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn with_options(solver: &Solver, opts: SolverOptions) -> Solver {
    Solver::new(
        solver.mesh.clone(),
        solver.basis.clone(),
        solver.snap.clone(),
        solver.bcs.clone(),
        opts,
        None,
    )
    .unwrap()
}

/// Jittered mesh rotated rigidly by `theta`, spinning at rate `omega`.
pub fn rotated_state(m: usize, seed: u64, omega: f64, theta: f64) -> (Solver, State) {
    let mut r = rng(seed);
    let mesh = jittered_mesh(m, 3, 3, 0.3, &mut r);
    let spec = free_spec(mesh, 1.0, move |x| [-omega * x[1], omega * x[0]]);
    let (solver, mut state) = spec.initialize(SolverOptions::default()).unwrap();
    let (c, s) = (theta.cos(), theta.sin());
    for (x, u) in state.kin.position.iter_mut().zip(state.kin.velocity.iter_mut()) {
        *x = [c * x[0] - s * x[1], s * x[0] + c * x[1]];
        *u = [-omega * x[1], omega * x[0]];
    }
    solver.refresh(&mut state).unwrap();
    (solver, state)
}

/// Largest of `μ`, `δρ` and the viscous and hourglass energy-rate
/// contributions under rigid rotation.
pub fn rotation_gap(m: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let omega = r.gen_range(-3.0..3.0);
    let theta = r.gen_range(0.0..std::f64::consts::TAU);
    let (solver, state) = rotated_state(m, seed, omega, theta);
    let variant = |hourglass, viscosity| {
        with_options(
            &solver,
            SolverOptions {
                hourglass,
                viscosity,
                ..SolverOptions::default()
            },
        )
        .rates(&state)
        .unwrap()
    };
    let bare = variant(false, false);
    let visc = variant(false, true);
    let hg = variant(true, false);
    [
        visc.max_mu,
        hg.max_drho,
        max_abs_diff(&visc.de, &bare.de),
        max_abs_diff(&hg.de, &bare.de),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn na(m: &sgh::linalg::Mat2) -> nalgebra::Matrix2<f64> {
    nalgebra::Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn random_mat(r: &mut impl Rng, amp: f64) -> sgh::linalg::Mat2 {
    [
        [r.gen_range(-amp..amp), r.gen_range(-amp..amp)],
        [r.gen_range(-amp..amp), r.gen_range(-amp..amp)],
    ]
}

/// `(eigenvalue gap, eigenvector residual)` of `min_eig_2x2` against a dense
/// symmetric eigensolver, both relative to the spectral radius.
pub fn eigen_gaps(trials: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let (mut gap, mut residual): (f64, f64) = (0.0, 0.0);
    for _ in 0..trials {
        let a = random_mat(&mut r, 5.0);
        let s = [[a[0][0], a[0][1]], [a[0][1], a[1][1]]];
        let (lambda, e) = min_eig_2x2(&s);
        let eig = na(&s).symmetric_eigen();
        let scale = eig.eigenvalues.amax().max(1.0);
        gap = gap.max((lambda - eig.eigenvalues.min()).abs() / scale);
        let se = [s[0][0] * e[0] + s[0][1] * e[1], s[1][0] * e[0] + s[1][1] * e[1]];
        for c in 0..2 {
            residual = residual.max((se[c] - lambda * e[c]).abs() / scale);
        }
        residual = residual.max(((e[0] * e[0] + e[1] * e[1]).sqrt() - 1.0).abs());
    }
    (gap, residual)
}

/// Relative gap of `min_singular_value` against a dense SVD.
pub fn singular_value_gap(trials: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut gap: f64 = 0.0;
    for _ in 0..trials {
        let j = random_mat(&mut r, 3.0);
        let sv = na(&j).singular_values();
        gap = gap.max((min_singular_value(&j) - sv.min()).abs() / sv.max().max(1e-300));
    }
    gap
}

/// Relative gap of `characteristic_length` against an explicit inverse.
pub fn characteristic_length_gap(trials: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut gap: f64 = 0.0;
    for _ in 0..trials {
        let mut j0 = random_mat(&mut r, 1.0);
        j0[0][0] += 2.0;
        j0[1][1] += 2.0;
        let j = random_mat(&mut r, 2.0);
        let e: Vec2 = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let w = r.gen_range(0.1..1.0);
        let got = characteristic_length(&j0, &j, e, w).unwrap();
        let inv = na(&j0).try_inverse().unwrap();
        let v = inv * na(&j) * nalgebra::Vector2::new(e[0], e[1]);
        let l0 = (w * na(&j0).determinant()).sqrt();
        let want = l0 * v.norm() / (e[0] * e[0] + e[1] * e[1]).sqrt();
        gap = gap.max((got - want).abs() / want.max(1.0));
    }
    gap
}
