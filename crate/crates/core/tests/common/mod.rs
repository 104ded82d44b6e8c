#![allow(dead_code)]

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sgh::hydro::NodeBc;
use sgh::linalg::Vec2;
use sgh::mesh::Mesh;
use sgh::problems::{InitialEnergy, ProblemKind, ProblemSpec, Reference, Region};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Unit square with every corner jittered by up to `amp`, ordered
/// `(-1,-1), (1,-1), (-1,1), (1,1)` in reference space.
pub fn random_quad(rng: &mut StdRng, amp: f64) -> [Vec2; 4] {
    let base = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let scale = rng.gen_range(0.5..2.0);
    let shift = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    base.map(|c| {
        [
            shift[0] + scale * (c[0] + rng.gen_range(-amp..amp)),
            shift[1] + scale * (c[1] + rng.gen_range(-amp..amp)),
        ]
    })
}

pub fn single_element(m: usize, corners: [Vec2; 4]) -> Mesh {
    Mesh::from_corners(1, 1, m, |i, j| corners[i + 2 * j]).unwrap()
}

/// Lattice `nx × ny` over the unit square with interior corners jittered.
pub fn jittered_mesh(m: usize, nx: usize, ny: usize, amp: f64, rng: &mut StdRng) -> Mesh {
    let mut jitter = vec![[0.0; 2]; (nx + 1) * (ny + 1)];
    for j in 1..ny {
        for i in 1..nx {
            jitter[i + j * (nx + 1)] = [rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)];
        }
    }
    Mesh::from_corners(nx, ny, m, |i, j| {
        let d = jitter[i + j * (nx + 1)];
        [i as f64 / nx as f64 + d[0] / nx as f64, j as f64 / ny as f64 + d[1] / ny as f64]
    })
    .unwrap()
}

/// One ideal-gas region, no boundary conditions and the given velocity.
pub fn free_spec(
    mesh: Mesh,
    energy: f64,
    velocity: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
) -> ProblemSpec {
    let ne = mesh.n_elems();
    let nd = mesh.n_dofs();
    ProblemSpec {
        kind: ProblemKind::Noh,
        mesh,
        regions: vec![Region {
            gamma: 1.4,
            rho: 1.0,
            energy: InitialEnergy::Energy(energy),
        }],
        elem_region: vec![0; ne],
        velocity: Arc::new(velocity),
        bcs: vec![NodeBc::Free; nd],
        source: None,
        deposits: Vec::new(),
        t_final: 1.0,
        reference: Reference::None,
        center: None,
    }
}

pub fn rel_diff(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1e-300)
}
pub mod oracles;
