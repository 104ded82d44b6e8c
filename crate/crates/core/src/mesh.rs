//! Logically structured curvilinear quadrilateral meshes of `Q^m` elements.

use crate::basis::{BasisSet, RuleTable};
use crate::error::{Result, SghError};
use crate::linalg::{self, Mat2, Vec2};

pub const RMIN: u8 = 1;
pub const RMAX: u8 = 2;
pub const ZMIN: u8 = 4;
pub const ZMAX: u8 = 8;

#[derive(Debug, Clone)]
pub struct Mesh {
    pub order: usize,
    /// Elements along the first logical axis.
    pub nx: usize,
    /// Elements along the second logical axis.
    pub ny: usize,
    elem_dofs: Vec<usize>,
    /// Initial kinematic DOF positions `(r, z)`.
    pub coords: Vec<Vec2>,
    /// Per-DOF bit set of `RMIN | RMAX | ZMIN | ZMAX`.
    pub boundary: Vec<u8>,
}

impl Mesh {
    /// Builds a mesh from the corner lattice `corner(i, j)`, `0 <= i <= nx`,
    /// `0 <= j <= ny`. High-order nodes are placed by bilinear interpolation
    /// of each element's corners at the Gauss–Lobatto reference positions.
    pub fn from_corners(
        nx: usize,
        ny: usize,
        m: usize,
        corner: impl Fn(usize, usize) -> Vec2,
    ) -> Result<Self> {
        if nx < 1 || ny < 1 {
            return Err(SghError::InvalidInput(format!(
                "mesh needs at least one element per direction, got {nx}x{ny}"
            )));
        }
        if m < 1 {
            return Err(SghError::InvalidOrder {
                got: m,
                expected: "order m >= 1",
            });
        }
        let (gll, _) = crate::basis::gauss_lobatto_1d(m + 1)?;
        let (lx, ly) = (nx * m + 1, ny * m + 1);
        let nk = (m + 1) * (m + 1);
        let mut coords = vec![[f64::NAN; 2]; lx * ly];
        let mut placed = vec![false; lx * ly];
        let mut boundary = vec![0u8; lx * ly];
        let mut elem_dofs = Vec::with_capacity(nx * ny * nk);

        for ey in 0..ny {
            for ex in 0..nx {
                let c = [
                    corner(ex, ey),
                    corner(ex + 1, ey),
                    corner(ex, ey + 1),
                    corner(ex + 1, ey + 1),
                ];
                for b in 0..=m {
                    for a in 0..=m {
                        let (gi, gj) = (ex * m + a, ey * m + b);
                        let id = gj * lx + gi;
                        elem_dofs.push(id);
                        if placed[id] {
                            continue;
                        }
                        let (s, t) = (gll[a], gll[b]);
                        let w = [
                            (1.0 - s) * (1.0 - t) / 4.0,
                            (1.0 + s) * (1.0 - t) / 4.0,
                            (1.0 - s) * (1.0 + t) / 4.0,
                            (1.0 + s) * (1.0 + t) / 4.0,
                        ];
                        let mut p = [0.0; 2];
                        for (wk, ck) in w.iter().zip(&c) {
                            p[0] += wk * ck[0];
                            p[1] += wk * ck[1];
                        }
                        coords[id] = p;
                        placed[id] = true;
                        let mut tag = 0;
                        if gi == 0 {
                            tag |= RMIN;
                        }
                        if gi == lx - 1 {
                            tag |= RMAX;
                        }
                        if gj == 0 {
                            tag |= ZMIN;
                        }
                        if gj == ly - 1 {
                            tag |= ZMAX;
                        }
                        boundary[id] = tag;
                    }
                }
            }
        }
        Ok(Self {
            order: m,
            nx,
            ny,
            elem_dofs,
            coords,
            boundary,
        })
    }

    pub fn n_elems(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_dofs(&self) -> usize {
        self.coords.len()
    }

    pub fn dofs_per_elem(&self) -> usize {
        (self.order + 1) * (self.order + 1)
    }

    /// Number of thermodynamic DOFs (`m²` per element).
    pub fn n_thermo_dofs(&self) -> usize {
        self.n_elems() * self.order * self.order
    }

    pub fn elem_dofs(&self, e: usize) -> &[usize] {
        let nk = self.dofs_per_elem();
        &self.elem_dofs[e * nk..(e + 1) * nk]
    }

    /// Element id of logical element `(ex, ey)`.
    pub fn elem_at(&self, ex: usize, ey: usize) -> usize {
        ey * self.nx + ex
    }

    /// Dimensions of the global kinematic node lattice.
    pub fn lattice_dims(&self) -> (usize, usize) {
        (self.nx * self.order + 1, self.ny * self.order + 1)
    }

    pub fn lattice_id(&self, i: usize, j: usize) -> usize {
        j * (self.nx * self.order + 1) + i
    }

    pub fn gather(&self, e: usize, field: &[Vec2]) -> Vec<Vec2> {
        self.elem_dofs(e).iter().map(|&i| field[i]).collect()
    }
}

pub fn build_cartesian_mesh(
    nx: usize,
    ny: usize,
    lower: Vec2,
    upper: Vec2,
    m: usize,
) -> Result<Mesh> {
    let (w, h) = (upper[0] - lower[0], upper[1] - lower[1]);
    if !(w > 0.0 && h > 0.0) {
        return Err(SghError::InvalidInput(format!(
            "degenerate domain [{}, {}] x [{}, {}]",
            lower[0], upper[0], lower[1], upper[1]
        )));
    }
    Mesh::from_corners(nx, ny, m, |i, j| {
        [
            lower[0] + w * i as f64 / nx as f64,
            lower[1] + h * j as f64 / ny as f64,
        ]
    })
}

/// Geometry of the two-region piston mesh: a right-angled trapezoid with a
/// vertical left wall followed by a parallelogram, separated by a line
/// inclined at 60° to the horizontal.
#[derive(Debug, Clone, Copy)]
pub struct DmGeometry {
    pub height: f64,
    /// Bottom width of the trapezoid (interface foot at `r = left_width`).
    pub left_width: f64,
    /// Horizontal width of the parallelogram.
    pub right_width: f64,
    pub left_cells: usize,
    pub right_cells: usize,
    pub rows: usize,
    /// Ratio between consecutive trapezoid cell widths along each row.
    pub grading: f64,
}

impl Default for DmGeometry {
    fn default() -> Self {
        Self {
            height: 1.5,
            left_width: 1.8,
            right_width: 2.0,
            left_cells: 18,
            right_cells: 20,
            rows: 15,
            grading: 1.0,
        }
    }
}

impl DmGeometry {
    pub fn interface_slope(&self) -> f64 {
        60f64.to_radians().tan()
    }

    /// `r` coordinate of the interface at height `z`.
    pub fn interface_r(&self, z: f64) -> f64 {
        self.left_width + z / self.interface_slope()
    }

    /// Unit outward normal of the slanted right boundary.
    pub fn right_normal(&self) -> Vec2 {
        let a = 60f64.to_radians();
        [a.sin(), -a.cos()]
    }
}

pub fn build_dm_mesh(m: usize, geo: &DmGeometry) -> Result<Mesh> {
    if !(geo.grading > 0.0) {
        return Err(SghError::InvalidInput("dm grading must be positive".into()));
    }
    let nl = geo.left_cells;
    let nx = nl + geo.right_cells;
    // fractional positions of the trapezoid columns, geometric progression
    let mut frac = vec![0.0; nl + 1];
    let mut acc = 0.0;
    let mut width = 1.0;
    for f in frac.iter_mut().skip(1) {
        acc += width;
        width *= geo.grading;
        *f = acc;
    }
    for f in &mut frac {
        *f /= acc;
    }
    let geo = *geo;
    Mesh::from_corners(nx, geo.rows, m, move |i, j| {
        let z = geo.height * j as f64 / geo.rows as f64;
        let ri = geo.interface_r(z);
        let r = if i <= nl {
            ri * frac[i]
        } else {
            ri + geo.right_width * (i - nl) as f64 / geo.right_cells as f64
        };
        [r, z]
    })
}

/// `J = Σ_i x_i ⊗ ∇̂N_i(ξ)` and its determinant.
pub fn jacobian_at(basis: &BasisSet, xs: &[Vec2], xi: Vec2) -> (Mat2, f64) {
    let grads = basis.kin_gradients(xi);
    let j = jacobian_from(xs, &grads);
    let d = linalg::det(&j);
    (j, d)
}

fn jacobian_from(xs: &[Vec2], grads: &[Vec2]) -> Mat2 {
    let mut j = [[0.0; 2]; 2];
    for (x, g) in xs.iter().zip(grads) {
        j[0][0] += x[0] * g[0];
        j[0][1] += x[0] * g[1];
        j[1][0] += x[1] * g[0];
        j[1][1] += x[1] * g[1];
    }
    j
}

/// Per-point geometry of one element on one rule: Jacobians, determinants
/// and the scaled physical gradients `B_i = ∇N_i det J = cof(J) ∇̂N_i`.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub n_kin: usize,
    pub jac: Vec<Mat2>,
    pub det: Vec<f64>,
    b: Vec<Vec2>,
}

impl ElementGeometry {
    pub fn new(table: &RuleTable, xs: &[Vec2]) -> Self {
        let nq = table.len();
        let nk = xs.len();
        let mut jac = Vec::with_capacity(nq);
        let mut det = Vec::with_capacity(nq);
        let mut b = Vec::with_capacity(nq * nk);
        for q in 0..nq {
            let g = table.grad(q);
            let j = jacobian_from(xs, g);
            let cof = linalg::cofactor(&j);
            det.push(linalg::det(&j));
            jac.push(j);
            b.extend(g.iter().map(|&gi| linalg::mat_vec(&cof, gi)));
        }
        Self {
            n_kin: nk,
            jac,
            det,
            b,
        }
    }

    pub fn len(&self) -> usize {
        self.det.len()
    }

    pub fn is_empty(&self) -> bool {
        self.det.is_empty()
    }

    /// `∇N_i(ξ_q) det J(ξ_q)` for all `i`.
    pub fn scaled_grad(&self, q: usize) -> &[Vec2] {
        &self.b[q * self.n_kin..(q + 1) * self.n_kin]
    }
}

/// Initial Jacobians and masses per quadrature point, taken at `t = 0`.
#[derive(Debug, Clone)]
pub struct JacobianSnapshot {
    /// `J⁰` at the `(m+1)²` points, element-major.
    pub jac0_high: Vec<Mat2>,
    pub det0_low: Vec<f64>,
    pub det0_high: Vec<f64>,
    /// `ρ₀ det J⁰` at the `m²` points.
    pub rho_det0_low: Vec<f64>,
    /// `ρ₀ det J⁰` at the `(m+1)²` points.
    pub rho_det0_high: Vec<f64>,
    /// Per-element reference scale for the determinant floor (mean `det J⁰`).
    pub det_scale: Vec<f64>,
}

impl JacobianSnapshot {
    /// `rho0(elem, x)` gives the initial density at physical point `x`.
    pub fn new(
        mesh: &Mesh,
        basis: &BasisSet,
        rho0: impl Fn(usize, Vec2) -> f64,
    ) -> Result<Self> {
        let (nl, nh) = (basis.low.len(), basis.high.len());
        let ne = mesh.n_elems();
        let mut s = Self {
            jac0_high: Vec::with_capacity(ne * nh),
            det0_low: Vec::with_capacity(ne * nl),
            det0_high: Vec::with_capacity(ne * nh),
            rho_det0_low: Vec::with_capacity(ne * nl),
            rho_det0_high: Vec::with_capacity(ne * nh),
            det_scale: Vec::with_capacity(ne),
        };
        for e in 0..ne {
            let xs = mesh.gather(e, &mesh.coords);
            for (table, is_high) in [(&basis.low, false), (&basis.high, true)] {
                let g = ElementGeometry::new(table, &xs);
                for q in 0..table.len() {
                    let d = g.det[q];
                    if !(d > 0.0) {
                        return Err(SghError::SingularJacobian {
                            elem: e,
                            point: q,
                            det: d,
                            floor: 0.0,
                        });
                    }
                    let x = interpolate(table.shape(q), &xs);
                    let rd = rho0(e, x) * d;
                    if is_high {
                        s.jac0_high.push(g.jac[q]);
                        s.det0_high.push(d);
                        s.rho_det0_high.push(rd);
                    } else {
                        s.det0_low.push(d);
                        s.rho_det0_low.push(rd);
                    }
                }
            }
            let lo = &s.det0_low[e * nl..];
            s.det_scale.push(lo.iter().sum::<f64>() / nl as f64);
        }
        Ok(s)
    }
}

/// `Σ_i N_i x_i`.
pub fn interpolate(shape: &[f64], xs: &[Vec2]) -> Vec2 {
    let mut p = [0.0; 2];
    for (n, x) in shape.iter().zip(xs) {
        p[0] += n * x[0];
        p[1] += n * x[1];
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianFailure {
    pub elem: usize,
    /// Point index; `m²`-rule points first, then `(m+1)²`-rule points.
    pub point: usize,
    pub det: f64,
}

/// Returns every `(element, point)` with `det J <= floor` on either the
/// `m²` or the `(m+1)²` Gauss–Legendre rule.
pub fn guard_jacobians(
    mesh: &Mesh,
    basis: &BasisSet,
    coords: &[Vec2],
    floor: f64,
) -> std::result::Result<(), Vec<JacobianFailure>> {
    let mut failures = Vec::new();
    for e in 0..mesh.n_elems() {
        let xs = mesh.gather(e, coords);
        let mut offset = 0;
        for table in [&basis.low, &basis.high] {
            let g = ElementGeometry::new(table, &xs);
            for (q, &d) in g.det.iter().enumerate() {
                if d <= floor {
                    failures.push(JacobianFailure {
                        elem: e,
                        point: offset + q,
                        det: d,
                    });
                }
            }
            offset += table.len();
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;

    #[test]
    fn cartesian_dof_counts() {
        assert_eq!(build_cartesian_mesh(32, 32, [0.0, 0.0], [1.0, 1.0], 3).unwrap().n_dofs(), 9409);
        let m2 = build_cartesian_mesh(64, 64, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        assert_eq!(m2.n_dofs(), 16641);
        assert_eq!(m2.n_thermo_dofs(), 16384);
        let m1 = build_cartesian_mesh(1, 1, [0.0, 0.0], [1.0, 1.0], 1).unwrap();
        assert_eq!(m1.coords, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        assert_eq!(m1.boundary, vec![RMIN | ZMIN, RMAX | ZMIN, RMIN | ZMAX, RMAX | ZMAX]);
    }

    #[test]
    fn degenerate_domain_rejected() {
        assert!(build_cartesian_mesh(2, 2, [0.0, 0.0], [0.0, 1.0], 1).is_err());
        assert!(build_cartesian_mesh(0, 2, [0.0, 0.0], [1.0, 1.0], 1).is_err());
    }

    #[test]
    fn shared_face_dofs_are_shared() {
        let mesh = build_cartesian_mesh(3, 2, [0.0, 0.0], [3.0, 2.0], 2).unwrap();
        let mut count = vec![0usize; mesh.n_dofs()];
        for e in 0..mesh.n_elems() {
            for &d in mesh.elem_dofs(e) {
                count[d] += 1;
            }
        }
        // interior vertex shared by 4, interior edge node by 2
        let (lx, _) = mesh.lattice_dims();
        assert_eq!(count[2 * lx + 2], 4);
        assert_eq!(count[1 * lx + 2], 2);
        assert_eq!(count[0], 1);
    }

    #[test]
    fn unit_square_q1_jacobian() {
        let basis = build_basis(1).unwrap();
        let mesh = build_cartesian_mesh(1, 1, [0.0, 0.0], [1.0, 1.0], 1).unwrap();
        for xi in [[0.0, 0.0], [0.3, -0.7], [1.0, 1.0]] {
            let (j, d) = jacobian_at(&basis, &mesh.coords, xi);
            assert!((j[0][0] - 0.5).abs() < 1e-15 && j[0][1].abs() < 1e-15);
            assert!((j[1][1] - 0.5).abs() < 1e-15 && j[1][0].abs() < 1e-15);
            assert!((d - 0.25).abs() < 1e-15);
        }
        let scaled: Vec<Vec2> = mesh.coords.iter().map(|x| [3.0 * x[0], 3.0 * x[1]]).collect();
        let (_, d) = jacobian_at(&basis, &scaled, [0.2, 0.1]);
        assert!((d - 9.0 * 0.25).abs() < 1e-14);
    }

    #[test]
    fn dm_mesh_layout() {
        let geo = DmGeometry::default();
        let mesh = build_dm_mesh(2, &geo).unwrap();
        assert_eq!(mesh.n_elems(), 570);
        let basis = build_basis(2).unwrap();
        assert!(guard_jacobians(&mesh, &basis, &mesh.coords, 0.0).is_ok());
        // interface column: lattice i = 18 * m
        let m = mesh.order;
        let (_, ly) = mesh.lattice_dims();
        let bottom = mesh.coords[mesh.lattice_id(18 * m, 0)];
        let top = mesh.coords[mesh.lattice_id(18 * m, ly - 1)];
        let slope = (top[1] - bottom[1]) / (top[0] - bottom[0]);
        assert!((slope - 60f64.to_radians().tan()).abs() < 1e-12);
        let rb = mesh.coords[mesh.lattice_id(38 * m, 0)];
        let rt = mesh.coords[mesh.lattice_id(38 * m, ly - 1)];
        assert!(((rt[1] - rb[1]) / (rt[0] - rb[0]) - slope).abs() < 1e-12);
    }

    #[test]
    fn bow_tie_fails_guard() {
        let basis = build_basis(1).unwrap();
        let mesh = build_cartesian_mesh(1, 1, [0.0, 0.0], [1.0, 1.0], 1).unwrap();
        let mut xs = mesh.coords.clone();
        // push node 4 past the diagonal through nodes 2 and 3
        xs[3] = [-0.5, -0.5];
        let fails = guard_jacobians(&mesh, &basis, &xs, 1e-12).unwrap_err();
        assert!(!fails.is_empty());
        assert!(guard_jacobians(&mesh, &basis, &mesh.coords, 1e-12).is_ok());
        // closed threshold
        let d = 0.25;
        assert!(guard_jacobians(&mesh, &basis, &mesh.coords, d).is_err());
    }
}
