//! Benchmark initial/boundary conditions and reference solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::basis::{build_basis, gauss_legendre_1d};
use crate::error::{Result, SghError};
use crate::hydro::{lump_mass, EnergySource, NodeBc, Solver, SolverOptions, State};
use crate::linalg::{self, Vec2};
use crate::mesh::{
    build_cartesian_mesh, build_dm_mesh, interpolate, DmGeometry, JacobianSnapshot, Mesh, RMAX,
    RMIN, ZMAX, ZMIN,
};
use crate::state::{ElementThermo, KinematicField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    TaylorGreen,
    Noh,
    DukowiczMeltz,
    TriplePoint,
    Sedov,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TaylorGreen => "taylor-green",
            Self::Noh => "noh",
            Self::DukowiczMeltz => "dukowicz-meltz",
            Self::TriplePoint => "triple-point",
            Self::Sedov => "sedov",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "taylor-green" | "taylor_green" | "tg" => Ok(Self::TaylorGreen),
            "noh" => Ok(Self::Noh),
            "dukowicz-meltz" | "dukowicz_meltz" | "dm" => Ok(Self::DukowiczMeltz),
            "triple-point" | "triple_point" | "triple" => Ok(Self::TriplePoint),
            "sedov" => Ok(Self::Sedov),
            other => Err(format!(
                "unknown problem '{other}' (taylor-green|noh|dukowicz-meltz|triple-point|sedov)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SedovSource {
    /// Quarter plane, energy in the element touching the origin.
    Origin,
    /// Full plane, energy split over the four elements around the center.
    CenterElements,
}

impl std::str::FromStr for SedovSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "origin" => Ok(Self::Origin),
            "center" | "center-elements" | "center_elements" => Ok(Self::CenterElements),
            other => Err(format!("unknown sedov source '{other}' (origin|center)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialEnergy {
    Energy(f64),
    Pressure(f64),
    /// `p = ρ/4 (cos 2πr + cos 2πz) + 1`.
    TaylorGreen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub gamma: f64,
    pub rho: f64,
    pub energy: InitialEnergy,
}

impl Region {
    pub fn specific_energy(&self, x: Vec2) -> f64 {
        match self.energy {
            InitialEnergy::Energy(e) => e,
            InitialEnergy::Pressure(p) => p / ((self.gamma - 1.0) * self.rho),
            InitialEnergy::TaylorGreen => {
                taylor_green_pressure(x, self.rho) / ((self.gamma - 1.0) * self.rho)
            }
        }
    }

    pub fn pressure(&self, x: Vec2) -> f64 {
        (self.gamma - 1.0) * self.rho * self.specific_energy(x)
    }
}

#[derive(Debug, Clone)]
pub enum Reference {
    None,
    /// Steady vortex: `ρ ≡ 1`.
    TaylorGreen,
    Noh,
    Sedov(SedovSolution),
}

impl Reference {
    /// Reference density at radius (or `r` coordinate) and time.
    pub fn density(&self, radius: f64, t: f64) -> Option<f64> {
        match self {
            Reference::None => None,
            Reference::TaylorGreen => Some(1.0),
            Reference::Noh => Some(noh_density(radius, t)),
            Reference::Sedov(s) => Some(s.state(radius, t).0),
        }
    }
}

/// Energy added to the initial internal energy of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deposit {
    pub elem: usize,
    /// Thermodynamic point receiving the energy; `None` spreads it over the
    /// element in proportion to mass.
    pub point: Option<usize>,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepositSplit {
    /// Uniform specific energy over the source elements.
    Element,
    /// All energy in the thermodynamic point nearest the source.
    Point,
}

impl std::str::FromStr for DepositSplit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "element" => Ok(Self::Element),
            "point" => Ok(Self::Point),
            other => Err(format!("unknown deposit split '{other}' (element|point)")),
        }
    }
}

pub type VelocityField = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;

pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub mesh: Mesh,
    pub regions: Vec<Region>,
    pub elem_region: Vec<usize>,
    pub velocity: VelocityField,
    pub bcs: Vec<NodeBc>,
    pub source: Option<EnergySource>,
    pub deposits: Vec<Deposit>,
    pub t_final: f64,
    pub reference: Reference,
    /// Point the scatter radius is measured from; `None` scatters against `r`.
    pub center: Option<Vec2>,
}

impl ProblemSpec {
    pub fn region_of(&self, elem: usize) -> &Region {
        &self.regions[self.elem_region[elem]]
    }

    /// Builds the solver and the `t = 0` state.
    pub fn initialize(&self, opts: SolverOptions) -> Result<(Solver, State)> {
        let mesh = self.mesh.clone();
        let basis = build_basis(mesh.order)?;
        let rho0 = |e: usize, _x: Vec2| self.region_of(e).rho;
        let snap = JacobianSnapshot::new(&mesh, &basis, rho0)?;
        let nodal_mass = lump_mass(&mesh, &basis, rho0)?;

        let nl = basis.low.len();
        let mut e0 = Vec::with_capacity(mesh.n_elems() * nl);
        for el in 0..mesh.n_elems() {
            let xs = mesh.gather(el, &mesh.coords);
            let region = self.region_of(el);
            for l in 0..nl {
                let x = interpolate(basis.low.shape(l), &xs);
                e0.push(region.specific_energy(x));
            }
        }
        for d in &self.deposits {
            let el = d.elem;
            let point_mass = |l: usize| basis.low.weight(l) * snap.rho_det0_low[el * nl + l];
            match d.point {
                Some(l) => e0[el * nl + l] += d.energy / point_mass(l),
                None => {
                    let mass: f64 = (0..nl).map(point_mass).sum();
                    for l in 0..nl {
                        e0[el * nl + l] += d.energy / mass;
                    }
                }
            }
        }
        let gamma = (0..mesh.n_elems()).map(|e| self.region_of(e).gamma).collect();
        let thermo = ElementThermo::new(mesh.n_elems(), nl, basis.high.len(), e0, gamma);
        let velocity = mesh
            .coords
            .iter()
            .zip(&self.bcs)
            .map(|(&x, bc)| bc.apply((self.velocity)(x)))
            .collect();
        let kin = KinematicField {
            position: mesh.coords.clone(),
            velocity,
            nodal_mass,
        };
        let solver = Solver::new(
            mesh,
            basis,
            snap,
            self.bcs.clone(),
            opts,
            self.source.clone(),
        )?;
        let mut state = State {
            t: 0.0,
            kin,
            thermo,
            energy_clamps: 0,
        };
        solver.refresh(&mut state)?;
        Ok((solver, state))
    }
}

/// Slip walls on every tagged side; nodes on two sides are fixed.
pub fn wall_bcs(mesh: &Mesh) -> Vec<NodeBc> {
    mesh.boundary
        .iter()
        .map(|&tag| {
            let on_r = tag & (RMIN | RMAX) != 0;
            let on_z = tag & (ZMIN | ZMAX) != 0;
            match (on_r, on_z) {
                (true, true) => NodeBc::Fixed([0.0, 0.0]),
                (true, false) => NodeBc::Slip([1.0, 0.0]),
                (false, true) => NodeBc::Slip([0.0, 1.0]),
                (false, false) => NodeBc::Free,
            }
        })
        .collect()
}

pub fn taylor_green_velocity(x: Vec2) -> Vec2 {
    let (r, z) = (PI * x[0], PI * x[1]);
    [r.sin() * z.cos(), -r.cos() * z.sin()]
}

pub fn taylor_green_pressure(x: Vec2, rho: f64) -> f64 {
    0.25 * rho * ((2.0 * PI * x[0]).cos() + (2.0 * PI * x[1]).cos()) + 1.0
}

/// Specific internal-energy source that keeps the vortex steady for `γ = 5/3`.
pub fn taylor_green_source(x: Vec2) -> f64 {
    let (r, z) = (PI * x[0], PI * x[1]);
    3.0 * PI / 8.0 * ((3.0 * r).cos() * z.cos() - r.cos() * (3.0 * z).cos())
}

pub fn taylor_green(m: usize, n: usize) -> Result<ProblemSpec> {
    let mesh = build_cartesian_mesh(n, n, [0.0, 0.0], [1.0, 1.0], m)?;
    let bcs = wall_bcs(&mesh);
    let ne = mesh.n_elems();
    Ok(ProblemSpec {
        kind: ProblemKind::TaylorGreen,
        mesh,
        regions: vec![Region {
            gamma: 5.0 / 3.0,
            rho: 1.0,
            energy: InitialEnergy::TaylorGreen,
        }],
        elem_region: vec![0; ne],
        velocity: Arc::new(taylor_green_velocity),
        bcs,
        source: Some(Arc::new(taylor_green_source)),
        deposits: Vec::new(),
        t_final: 0.75,
        reference: Reference::TaylorGreen,
        center: None,
    })
}

pub const NOH_E0: f64 = 1e-10;

/// Cylindrical Noh density for `γ = 5/3` and unit inflow speed.
pub fn noh_density(radius: f64, t: f64) -> f64 {
    if radius < t / 3.0 {
        16.0
    } else {
        1.0 + t / radius.max(1e-300)
    }
}

pub fn noh(m: usize, n: usize) -> Result<ProblemSpec> {
    let mesh = build_cartesian_mesh(n, n, [0.0, 0.0], [1.0, 1.0], m)?;
    let inflow = |x: Vec2| {
        let r = linalg::norm(x);
        if r == 0.0 {
            [0.0, 0.0]
        } else {
            [-x[0] / r, -x[1] / r]
        }
    };
    let bcs = mesh
        .boundary
        .iter()
        .zip(&mesh.coords)
        .map(|(&tag, &x)| {
            if tag & (RMAX | ZMAX) != 0 {
                NodeBc::Fixed(inflow(x))
            } else if tag & RMIN != 0 && tag & ZMIN != 0 {
                NodeBc::Fixed([0.0, 0.0])
            } else if tag & RMIN != 0 {
                NodeBc::Slip([1.0, 0.0])
            } else if tag & ZMIN != 0 {
                NodeBc::Slip([0.0, 1.0])
            } else {
                NodeBc::Free
            }
        })
        .collect();
    let ne = mesh.n_elems();
    Ok(ProblemSpec {
        kind: ProblemKind::Noh,
        mesh,
        regions: vec![Region {
            gamma: 5.0 / 3.0,
            rho: 1.0,
            energy: InitialEnergy::Energy(NOH_E0),
        }],
        elem_region: vec![0; ne],
        velocity: Arc::new(inflow),
        bcs,
        source: None,
        deposits: Vec::new(),
        t_final: 0.6,
        reference: Reference::Noh,
        center: Some([0.0, 0.0]),
    })
}

pub const PISTON_SPEED: f64 = 1.48;

pub fn dukowicz_meltz(m: usize, geo: &DmGeometry) -> Result<ProblemSpec> {
    let mesh = build_dm_mesh(m, geo)?;
    let right_normal = geo.right_normal();
    let piston = [PISTON_SPEED, 0.0];
    let bcs = mesh
        .boundary
        .iter()
        .map(|&tag| {
            let on_z = tag & (ZMIN | ZMAX) != 0;
            if tag & RMIN != 0 {
                NodeBc::Fixed(piston)
            } else if tag & RMAX != 0 {
                if on_z {
                    NodeBc::Fixed([0.0, 0.0])
                } else {
                    NodeBc::Slip(right_normal)
                }
            } else if on_z {
                NodeBc::Slip([0.0, 1.0])
            } else {
                NodeBc::Free
            }
        })
        .collect();
    let elem_region = (0..mesh.n_elems())
        .map(|e| usize::from(e % mesh.nx >= geo.left_cells))
        .collect();
    Ok(ProblemSpec {
        kind: ProblemKind::DukowiczMeltz,
        velocity: Arc::new(|_| [0.0, 0.0]),
        mesh,
        regions: vec![
            Region {
                gamma: 1.4,
                rho: 1.0,
                energy: InitialEnergy::Energy(2.5),
            },
            Region {
                gamma: 1.4,
                rho: 1.5,
                energy: InitialEnergy::Energy(2.5),
            },
        ],
        elem_region,
        bcs,
        source: None,
        deposits: Vec::new(),
        t_final: 1.3,
        reference: Reference::None,
        center: None,
    })
}

/// Triple point on `[0,7] x [0,3]`; `nx` must be a multiple of 7 and `ny`
/// even so the interfaces at `r = 1` and `z = 1.5` fall on mesh lines.
pub fn triple_point(m: usize, nx: usize, ny: usize) -> Result<ProblemSpec> {
    if nx % 7 != 0 || ny % 2 != 0 {
        return Err(SghError::InvalidInput(format!(
            "triple point needs nx % 7 == 0 and even ny, got {nx}x{ny}"
        )));
    }
    let mesh = build_cartesian_mesh(nx, ny, [0.0, 0.0], [7.0, 3.0], m)?;
    let bcs = wall_bcs(&mesh);
    let elem_region = (0..mesh.n_elems())
        .map(|e| {
            let (ex, ey) = (e % nx, e / nx);
            if ex < nx / 7 {
                0
            } else if ey < ny / 2 {
                1
            } else {
                2
            }
        })
        .collect();
    Ok(ProblemSpec {
        kind: ProblemKind::TriplePoint,
        mesh,
        regions: vec![
            Region {
                gamma: 1.5,
                rho: 1.0,
                energy: InitialEnergy::Pressure(1.0),
            },
            Region {
                gamma: 1.4,
                rho: 1.0,
                energy: InitialEnergy::Pressure(0.1),
            },
            Region {
                gamma: 1.6,
                rho: 0.125,
                energy: InitialEnergy::Pressure(0.1),
            },
        ],
        elem_region,
        velocity: Arc::new(|_| [0.0, 0.0]),
        bcs,
        source: None,
        deposits: Vec::new(),
        t_final: 2.5,
        reference: Reference::None,
        center: None,
    })
}

pub const SEDOV_GAMMA: f64 = 1.4;
pub const SEDOV_EXTENT: f64 = 1.2;

/// Sedov blast in planar (cylindrical-symmetry) geometry with the energy
/// scaled so that the shock reaches radius 1 at `t = 1`. `n` elements span
/// `[0, 1.2]`; the center variant doubles the domain to `[-1.2, 1.2]²`.
pub fn sedov(
    m: usize,
    n: usize,
    source: SedovSource,
    split: DepositSplit,
    e_floor: f64,
) -> Result<ProblemSpec> {
    let solution = SedovSolution::with_radius(2, SEDOV_GAMMA, 1.0, 1.0, 1.0);
    let full_energy = solution.energy;
    let (mesh, elems) = match source {
        SedovSource::Origin => {
            let mesh = build_cartesian_mesh(n, n, [0.0, 0.0], [SEDOV_EXTENT; 2], m)?;
            (mesh, vec![0])
        }
        SedovSource::CenterElements => {
            let mesh = build_cartesian_mesh(
                2 * n,
                2 * n,
                [-SEDOV_EXTENT; 2],
                [SEDOV_EXTENT; 2],
                m,
            )?;
            let c = n;
            let ids = vec![
                mesh.elem_at(c - 1, c - 1),
                mesh.elem_at(c, c - 1),
                mesh.elem_at(c - 1, c),
                mesh.elem_at(c, c),
            ];
            (mesh, ids)
        }
    };
    let basis = build_basis(m)?;
    let deposits = elems
        .iter()
        .map(|&elem| {
            let point = match split {
                DepositSplit::Element => None,
                DepositSplit::Point => {
                    let xs = mesh.gather(elem, &mesh.coords);
                    (0..basis.low.len()).min_by(|&a, &b| {
                        let da = linalg::norm(interpolate(basis.low.shape(a), &xs));
                        let db = linalg::norm(interpolate(basis.low.shape(b), &xs));
                        da.total_cmp(&db)
                    })
                }
            };
            Deposit {
                elem,
                point,
                energy: full_energy / elems.len() as f64 * if elems.len() == 1 { 0.25 } else { 1.0 },
            }
        })
        .collect();
    let bcs = wall_bcs(&mesh);
    let ne = mesh.n_elems();
    Ok(ProblemSpec {
        kind: ProblemKind::Sedov,
        mesh,
        regions: vec![Region {
            gamma: SEDOV_GAMMA,
            rho: 1.0,
            energy: InitialEnergy::Energy(e_floor),
        }],
        elem_region: vec![0; ne],
        velocity: Arc::new(|_| [0.0, 0.0]),
        bcs,
        source: None,
        deposits,
        t_final: 1.0,
        reference: Reference::Sedov(solution),
        center: Some([0.0, 0.0]),
    })
}

/// Self-similar point-blast solution into a cold uniform gas, in the
/// classical parametric form (velocity-like variable `V` between the
/// center value and the shock value).
#[derive(Debug, Clone)]
pub struct SedovSolution {
    pub geometry: u32,
    pub gamma: f64,
    pub rho0: f64,
    pub energy: f64,
    /// Dimensionless energy constant `α` in `E = α ρ₀ R^{j+2} / t²`.
    pub alpha: f64,
    k: SedovConstants,
}

#[derive(Debug, Clone, Copy)]
struct SedovConstants {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    a0: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    a4: f64,
    a5: f64,
    v0: f64,
    v2: f64,
}

impl SedovConstants {
    fn new(j: f64, g: f64) -> Self {
        let j2 = j + 2.0;
        let a2 = -(g - 1.0) / (2.0 * (g - 1.0) + j);
        let a1 = j2 * g / (2.0 + j * (g - 1.0)) * (2.0 * j * (2.0 - g) / (g * j2 * j2) - a2);
        Self {
            a: 0.25 * j2 * (g + 1.0),
            b: (g + 1.0) / (g - 1.0),
            c: 0.5 * j2 * g,
            d: j2 * (g + 1.0) / (j2 * (g + 1.0) - 2.0 * (2.0 + j * (g - 1.0))),
            e: 0.5 * (2.0 + j * (g - 1.0)),
            a0: 2.0 / j2,
            a1,
            a2,
            a3: j / (2.0 * (g - 1.0) + j),
            a4: a1 * j * j2 / (j * (2.0 - g)),
            a5: -2.0 / (2.0 - g),
            v0: 2.0 / (j2 * g),
            v2: 4.0 / (j2 * (g + 1.0)),
        }
    }

    /// Exponent `k` in `V = V₀ + (V₂ - V₀) uᵏ`, chosen so that `λ ∝ u` near
    /// the center, where `λ(V)` is otherwise too steep to resolve.
    fn stretch(&self) -> f64 {
        -1.0 / self.a2
    }

    /// `(r/R, u/u₂, ρ/ρ₂, p/p₂, dλ/du)` at stretched parameter `u ∈ [0, 1]`.
    /// `x₂` is formed from `u` directly because `c V₀ = 1`.
    fn profile(&self, u: f64, j: f64, g: f64) -> [f64; 5] {
        let k = self.stretch();
        let span = self.v2 - self.v0;
        let s = u.powf(k);
        let v = self.v0 + span * s;
        let x1 = self.a * v;
        let x2 = self.b * self.c * span * s;
        let x3 = self.d * (1.0 - self.e * v);
        let x4 = self.b * (1.0 - self.c * v / g);
        let lam = x1.powf(-self.a0) * x2.powf(-self.a2) * x3.powf(-self.a1);
        let f = x1 * lam;
        let rho = x2.powf(self.a3) * x3.powf(self.a4) * x4.powf(self.a5);
        let p = x1.powf(self.a0 * j) * x3.powf(self.a4 - 2.0 * self.a1) * x4.powf(1.0 + self.a5);
        // dλ/du = λ d(ln λ)/dV dV/du, with the x₂ term combined with dV/du
        let dlam = if u == 0.0 {
            0.0
        } else {
            let dv_du = span * k * s / u;
            lam * ((-self.a0 / v + self.a1 * self.d * self.e / x3) * dv_du - self.a2 * k / u)
        };
        [lam, f, rho, p, dlam]
    }
}

impl SedovSolution {
    /// Energy chosen so that the shock sits at `radius` at time `t`.
    pub fn with_radius(geometry: u32, gamma: f64, rho0: f64, radius: f64, t: f64) -> Self {
        let j = geometry as f64;
        let k = SedovConstants::new(j, gamma);
        let alpha = Self::alpha(&k, j, gamma);
        let energy = alpha * rho0 * radius.powf(j + 2.0) / (t * t);
        Self {
            geometry,
            gamma,
            rho0,
            energy,
            alpha,
            k,
        }
    }

    fn shell_measure(j: f64) -> f64 {
        match j as u32 {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        }
    }

    /// `α = δ² c_j ∫₀¹ (½ ρ̂ û² + p̂/(γ-1)) ξ^{j-1} dξ`, `δ = 2/(j+2)`,
    /// integrated in the stretched parameter with a composite Gauss rule.
    fn alpha(k: &SedovConstants, j: f64, g: f64) -> f64 {
        let (x, w) = gauss_legendre_1d(16).expect("fixed rule");
        let rho_s = (g + 1.0) / (g - 1.0);
        let u_s = 2.0 / (g + 1.0);
        let p_s = 2.0 / (g + 1.0);
        let panels = 32;
        let mut total = 0.0;
        for i in 0..panels {
            let lo = i as f64 / panels as f64;
            let half = 0.5 / panels as f64;
            let mid = lo + half;
            for (xi, wi) in x.iter().zip(&w) {
                let [lam, f, rho, p, dlam] = k.profile(mid + half * xi, j, g);
                let energy = 0.5 * rho_s * rho * (u_s * f) * (u_s * f) + p_s * p / (g - 1.0);
                total += half * wi * energy * lam.powf(j - 1.0) * dlam;
            }
        }
        let delta = 2.0 / (j + 2.0);
        delta * delta * Self::shell_measure(j) * total
    }

    pub fn shock_radius(&self, t: f64) -> f64 {
        let j = self.geometry as f64;
        (self.energy * t * t / (self.alpha * self.rho0)).powf(1.0 / (j + 2.0))
    }

    /// `(ρ, u, p)` at `radius` and time `t`.
    pub fn state(&self, radius: f64, t: f64) -> (f64, f64, f64) {
        let j = self.geometry as f64;
        let g = self.gamma;
        let r2 = self.shock_radius(t);
        if radius >= r2 || t <= 0.0 {
            return (self.rho0, 0.0, 0.0);
        }
        let shock_speed = 2.0 / (j + 2.0) * r2 / t;
        let xi = radius / r2;
        // invert λ(u) = ξ by bisection; λ increases monotonically with u
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.k.profile(mid, j, g)[0] < xi {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let [_, f, rho, p, _] = self.k.profile(0.5 * (lo + hi), j, g);
        let rho2 = self.rho0 * (g + 1.0) / (g - 1.0);
        let u2 = 2.0 * shock_speed / (g + 1.0);
        let p2 = 2.0 * self.rho0 * shock_speed * shock_speed / (g + 1.0);
        (rho2 * rho, u2 * f, p2 * p)
    }
}
