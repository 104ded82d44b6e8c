//! Legacy ASCII VTK snapshots and CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::driver::{AuditRecord, ConvergenceRow, ScatterPoint, Simulation};
use crate::error::{Result, SghError};

const VTK_QUAD: u8 = 9;

/// Contents of an unstructured-grid VTK file with quad cells.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<[usize; 4]>,
    pub cell_scalars: Vec<(String, Vec<f64>)>,
    pub point_vectors: Vec<(String, Vec<[f64; 3]>)>,
}

impl VtkData {
    /// Each element split into `m × m` quads over its kinematic nodes, with
    /// thermodynamic fields sampled at the sub-cell centers.
    pub fn from_simulation(sim: &Simulation) -> Self {
        let mesh = &sim.solver.mesh;
        let basis = &sim.solver.basis;
        let th = &sim.state.thermo;
        let m = mesh.order;
        let nl = basis.low.len();
        let n1 = m + 1;
        let points = sim
            .state
            .kin
            .position
            .iter()
            .map(|x| [x[0], x[1], 0.0])
            .collect();
        let mut cells = Vec::with_capacity(mesh.n_elems() * m * m);
        let mut rho = Vec::with_capacity(cells.capacity());
        let mut p = Vec::with_capacity(cells.capacity());
        let mut e = Vec::with_capacity(cells.capacity());
        let nodes = basis.kin_nodes.clone();
        for el in 0..mesh.n_elems() {
            let dofs = mesh.elem_dofs(el);
            let range = el * nl..(el + 1) * nl;
            for b in 0..m {
                for a in 0..m {
                    let id = |i: usize, j: usize| dofs[i + n1 * j];
                    cells.push([id(a, b), id(a + 1, b), id(a + 1, b + 1), id(a, b + 1)]);
                    let lo = nodes[a + n1 * b];
                    let hi = nodes[a + 1 + n1 * (b + 1)];
                    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
                    let phi = basis.thermo_values(center);
                    let eval = |f: &[f64]| phi.iter().zip(f).map(|(w, v)| w * v).sum::<f64>();
                    rho.push(eval(&th.rho[range.clone()]));
                    p.push(eval(&th.p[range.clone()]));
                    e.push(eval(&th.e[range.clone()]));
                }
            }
        }
        let velocity = sim
            .state
            .kin
            .velocity
            .iter()
            .map(|v| [v[0], v[1], 0.0])
            .collect();
        Self {
            points,
            cells,
            cell_scalars: vec![
                ("density".into(), rho),
                ("pressure".into(), p),
                ("internal_energy".into(), e),
            ],
            point_vectors: vec![("velocity".into(), velocity)],
        }
    }

    pub fn to_vtk_string(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# vtk DataFile Version 3.0");
        let _ = writeln!(s, "{}", title.replace('\n', " "));
        let _ = writeln!(s, "ASCII");
        let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
        let _ = writeln!(s, "POINTS {} double", self.points.len());
        for p in &self.points {
            let _ = writeln!(s, "{:e} {:e} {:e}", p[0], p[1], p[2]);
        }
        let _ = writeln!(s, "CELLS {} {}", self.cells.len(), 5 * self.cells.len());
        for c in &self.cells {
            let _ = writeln!(s, "4 {} {} {} {}", c[0], c[1], c[2], c[3]);
        }
        let _ = writeln!(s, "CELL_TYPES {}", self.cells.len());
        for _ in &self.cells {
            let _ = writeln!(s, "{VTK_QUAD}");
        }
        if !self.cell_scalars.is_empty() {
            let _ = writeln!(s, "CELL_DATA {}", self.cells.len());
            for (name, vals) in &self.cell_scalars {
                let _ = writeln!(s, "SCALARS {name} double 1");
                let _ = writeln!(s, "LOOKUP_TABLE default");
                for v in vals {
                    let _ = writeln!(s, "{v:e}");
                }
            }
        }
        if !self.point_vectors.is_empty() {
            let _ = writeln!(s, "POINT_DATA {}", self.points.len());
            for (name, vals) in &self.point_vectors {
                let _ = writeln!(s, "VECTORS {name} double");
                for v in vals {
                    let _ = writeln!(s, "{:e} {:e} {:e}", v[0], v[1], v[2]);
                }
            }
        }
        s
    }

    pub fn write(&self, path: &Path, title: &str) -> Result<()> {
        fs::write(path, self.to_vtk_string(title))?;
        Ok(())
    }

    /// Parses the subset of the legacy format written by [`to_vtk_string`].
    ///
    /// [`to_vtk_string`]: VtkData::to_vtk_string
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: &str| SghError::InvalidInput(format!("vtk: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        if !header.starts_with("# vtk DataFile Version") {
            return Err(bad("missing version header"));
        }
        lines.next().ok_or_else(|| bad("missing title"))?;
        if lines.next().map(str::trim) != Some("ASCII") {
            return Err(bad("only ASCII is supported"));
        }
        if lines.next().map(str::trim) != Some("DATASET UNSTRUCTURED_GRID") {
            return Err(bad("expected DATASET UNSTRUCTURED_GRID"));
        }
        let mut tokens = lines.flat_map(str::split_whitespace);
        let mut next = || tokens.next().ok_or_else(|| bad("unexpected end of file"));
        fn num<T: std::str::FromStr>(tok: &str) -> Result<T> {
            tok.parse()
                .map_err(|_| SghError::InvalidInput(format!("vtk: bad number '{tok}'")))
        }

        let mut out = VtkData {
            points: Vec::new(),
            cells: Vec::new(),
            cell_scalars: Vec::new(),
            point_vectors: Vec::new(),
        };
        let mut section = String::new();
        loop {
            let key = match next() {
                Ok(k) => k,
                Err(_) => break,
            };
            match key {
                "POINTS" => {
                    let n: usize = num(next()?)?;
                    next()?;
                    for _ in 0..n {
                        out.points.push([num(next()?)?, num(next()?)?, num(next()?)?]);
                    }
                }
                "CELLS" => {
                    let n: usize = num(next()?)?;
                    let size: usize = num(next()?)?;
                    if size != 5 * n {
                        return Err(bad("only quad cells are supported"));
                    }
                    for _ in 0..n {
                        if num::<usize>(next()?)? != 4 {
                            return Err(bad("cell is not a quad"));
                        }
                        let c = [
                            num(next()?)?,
                            num(next()?)?,
                            num(next()?)?,
                            num(next()?)?,
                        ];
                        if c.iter().any(|&i| i >= out.points.len()) {
                            return Err(bad("cell references a missing point"));
                        }
                        out.cells.push(c);
                    }
                }
                "CELL_TYPES" => {
                    let n: usize = num(next()?)?;
                    for _ in 0..n {
                        if num::<u8>(next()?)? != VTK_QUAD {
                            return Err(bad("unexpected cell type"));
                        }
                    }
                }
                "CELL_DATA" | "POINT_DATA" => {
                    section = key.to_string();
                    let n: usize = num(next()?)?;
                    let expect = if key == "CELL_DATA" {
                        out.cells.len()
                    } else {
                        out.points.len()
                    };
                    if n != expect {
                        return Err(bad("data count mismatch"));
                    }
                }
                "SCALARS" => {
                    if section != "CELL_DATA" {
                        return Err(bad("point scalars are not supported"));
                    }
                    let name = next()?.to_string();
                    next()?;
                    let comps: usize = num(next()?)?;
                    if comps != 1 || next()? != "LOOKUP_TABLE" {
                        return Err(bad("malformed SCALARS block"));
                    }
                    next()?;
                    let vals = (0..out.cells.len())
                        .map(|_| num(next()?))
                        .collect::<Result<Vec<f64>>>()?;
                    out.cell_scalars.push((name, vals));
                }
                "VECTORS" => {
                    if section != "POINT_DATA" {
                        return Err(bad("cell vectors are not supported"));
                    }
                    let name = next()?.to_string();
                    next()?;
                    let vals = (0..out.points.len())
                        .map(|_| Ok([num(next()?)?, num(next()?)?, num(next()?)?]))
                        .collect::<Result<Vec<[f64; 3]>>>()?;
                    out.point_vectors.push((name, vals));
                }
                other => return Err(bad(&format!("unexpected keyword '{other}'"))),
            }
        }
        Ok(out)
    }
}

pub const AUDIT_HEADER: &str = "step,t,dt,kinetic,internal,total,balance,mass,max_drho,min_det,distortion";

pub fn audit_row(r: &AuditRecord) -> String {
    format!(
        "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
        r.step,
        r.t,
        r.dt,
        r.kinetic,
        r.internal,
        r.total,
        r.balance,
        r.mass,
        r.max_drho,
        r.min_det,
        r.distortion
    )
}

pub fn scatter_csv(points: &[ScatterPoint]) -> String {
    let mut s = String::from("r,z,radius,density,pressure,internal_energy,reference_density\n");
    for p in points {
        let reference = p.reference.map(|v| format!("{v:e}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e},{}",
            p.x[0], p.x[1], p.radius, p.rho, p.p, p.e, reference
        );
    }
    s
}

/// Reference density sampled on `n` radii in `[0, r_max]`.
pub fn reference_csv(sim: &Simulation, r_max: f64, n: usize) -> Option<String> {
    sim.reference.density(0.5 * r_max, sim.state.t)?;
    let mut s = String::from("radius,reference_density\n");
    for i in 0..n {
        let r = r_max * (i as f64 + 0.5) / n as f64;
        let rho = sim.reference.density(r, sim.state.t)?;
        let _ = writeln!(s, "{r:e},{rho:e}");
    }
    Some(s)
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("h,kinematic_dofs,thermo_dofs,l2_error,order\n");
    for r in rows {
        let order = r.order.map(|o| format!("{o:.4}")).unwrap_or_else(|| "—".into());
        let _ = writeln!(
            s,
            "{},{},{},{:.4e},{}",
            r.h, r.kinematic_dofs, r.thermo_dofs, r.error, order
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rejects_garbage() {
        assert!(VtkData::parse("").is_err());
        assert!(VtkData::parse("hello\n").is_err());
        let bad = "# vtk DataFile Version 3.0\nt\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 1 double\n0 0\n";
        assert!(VtkData::parse(bad).is_err());
    }

    #[test]
    fn single_quad_round_trip() {
        let d = VtkData {
            points: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            cells: vec![[0, 1, 2, 3]],
            cell_scalars: vec![("density".into(), vec![1.25])],
            point_vectors: vec![("velocity".into(), vec![[0.1, -0.2, 0.0]; 4])],
        };
        let back = VtkData::parse(&d.to_vtk_string("quad")).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn convergence_table_marks_missing_order() {
        let rows = [ConvergenceRow {
            h: 0.5,
            kinematic_dofs: 25,
            thermo_dofs: 16,
            error: 0.0,
            order: None,
        }];
        assert!(convergence_table(&rows).contains(",—"));
    }
}
