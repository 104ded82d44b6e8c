//! Run configuration from flat `key = value` files and command-line flags.

use std::path::PathBuf;

use crate::error::{Result, SghError};
use crate::hydro::{EnergyBasis, SolverOptions};
use crate::mesh::DmGeometry;
use crate::problems::{self, DepositSplit, ProblemKind, ProblemSpec, SedovSource};
use crate::viscosity::ViscosityForm;

pub const KEYS: &[&str] = &[
    "problem",
    "order",
    "nx",
    "ny",
    "cfl",
    "c1",
    "c2",
    "hourglass",
    "hourglass_scale",
    "viscosity",
    "viscosity_form",
    "mu_average",
    "energy_basis",
    "t_final",
    "output_dir",
    "vtk_every",
    "sedov_source",
    "sedov_deposit",
    "e_floor",
    "max_energy_clamps",
    "bowtie",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub order: usize,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub cfl: f64,
    pub c1: f64,
    pub c2: f64,
    pub hourglass: bool,
    pub hourglass_scale: f64,
    pub viscosity: bool,
    pub viscosity_form: ViscosityForm,
    pub mu_average: bool,
    pub energy_basis: EnergyBasis,
    pub t_final: Option<f64>,
    pub output_dir: PathBuf,
    /// Steps between VTK snapshots; 0 writes only the first and last.
    pub vtk_every: usize,
    pub sedov_source: SedovSource,
    pub sedov_deposit: DepositSplit,
    pub e_floor: f64,
    pub max_energy_clamps: usize,
    /// Folds one element into a bow-tie before the run (diagnostic hook).
    pub bowtie: bool,
}

impl RunConfig {
    pub fn new(problem: ProblemKind) -> Self {
        let d = SolverOptions::default();
        Self {
            problem,
            order: 2,
            nx: None,
            ny: None,
            cfl: d.cfl,
            c1: d.c1,
            c2: d.c2,
            hourglass: d.hourglass,
            hourglass_scale: d.hg_scale,
            viscosity: d.viscosity,
            viscosity_form: d.form,
            mu_average: d.mu_element_average,
            energy_basis: d.energy_basis,
            t_final: None,
            output_dir: PathBuf::from("output"),
            vtk_every: 0,
            sedov_source: SedovSource::Origin,
            sedov_deposit: DepositSplit::Element,
            e_floor: 1e-3,
            max_energy_clamps: d.max_energy_clamps,
            bowtie: false,
        }
    }

    /// Builds a config from ordered `(key, value)` pairs; later pairs win.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let pairs: Vec<(&str, &str)> = pairs.into_iter().collect();
        for (k, _) in &pairs {
            if !KEYS.contains(k) {
                return Err(SghError::Config(format!(
                    "unknown key '{k}' (known keys: {})",
                    KEYS.join(", ")
                )));
            }
        }
        let problem = pairs
            .iter()
            .rev()
            .find(|(k, _)| *k == "problem")
            .ok_or_else(|| {
                SghError::Config("missing required key 'problem'; required keys: problem".into())
            })?
            .1
            .parse::<ProblemKind>()
            .map_err(SghError::Config)?;
        let mut cfg = Self::new(problem);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "problem" => self.problem = value.parse().map_err(SghError::Config)?,
            "order" => self.order = parse(key, value)?,
            "nx" => self.nx = Some(parse(key, value)?),
            "ny" => self.ny = Some(parse(key, value)?),
            "cfl" => self.cfl = parse(key, value)?,
            "c1" => self.c1 = parse(key, value)?,
            "c2" => self.c2 = parse(key, value)?,
            "hourglass" => self.hourglass = parse_bool(key, value)?,
            "hourglass_scale" => self.hourglass_scale = parse(key, value)?,
            "viscosity" => self.viscosity = parse_bool(key, value)?,
            "viscosity_form" => self.viscosity_form = value.parse().map_err(SghError::Config)?,
            "mu_average" => self.mu_average = parse_bool(key, value)?,
            "energy_basis" => {
                self.energy_basis = match value {
                    "thermo" => EnergyBasis::Thermo,
                    "closed" => EnergyBasis::Closed,
                    other => {
                        return Err(SghError::Config(format!(
                            "energy_basis must be thermo|closed, got '{other}'"
                        )))
                    }
                }
            }
            "t_final" => self.t_final = Some(parse(key, value)?),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "vtk_every" => self.vtk_every = parse(key, value)?,
            "sedov_source" => self.sedov_source = value.parse().map_err(SghError::Config)?,
            "sedov_deposit" => self.sedov_deposit = value.parse().map_err(SghError::Config)?,
            "e_floor" => self.e_floor = parse(key, value)?,
            "max_energy_clamps" => self.max_energy_clamps = parse(key, value)?,
            "bowtie" => self.bowtie = parse_bool(key, value)?,
            other => return Err(SghError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.order) {
            return Err(SghError::Config(format!(
                "order {} is not supported (1..=3)",
                self.order
            )));
        }
        for (name, v) in [("nx", self.nx), ("ny", self.ny)] {
            if v == Some(0) {
                return Err(SghError::Config(format!("{name} must be positive")));
            }
        }
        let positive = [
            ("cfl", self.cfl),
            ("hourglass_scale", self.hourglass_scale),
            ("t_final", self.t_final.unwrap_or(1.0)),
            ("e_floor", self.e_floor),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SghError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(SghError::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            hourglass: self.hourglass,
            hg_scale: self.hourglass_scale,
            viscosity: self.viscosity,
            form: self.viscosity_form,
            c1: self.c1,
            c2: self.c2,
            cfl: self.cfl,
            energy_basis: self.energy_basis,
            mu_element_average: self.mu_average,
            max_energy_clamps: self.max_energy_clamps,
            ..SolverOptions::default()
        }
    }

    /// Problem setup at the configured resolution (problem defaults otherwise).
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let m = self.order;
        let mut spec = match self.problem {
            ProblemKind::TaylorGreen => {
                let n = self.nx.or(self.ny).unwrap_or(8);
                problems::taylor_green(m, n)?
            }
            ProblemKind::Noh => problems::noh(m, self.nx.or(self.ny).unwrap_or(20))?,
            ProblemKind::DukowiczMeltz => {
                if self.nx.is_some() || self.ny.is_some() {
                    return Err(SghError::Config(
                        "dukowicz-meltz uses a fixed 38x15 mesh; nx/ny are not accepted".into(),
                    ));
                }
                problems::dukowicz_meltz(m, &DmGeometry::default())?
            }
            ProblemKind::TriplePoint => problems::triple_point(
                m,
                self.nx.unwrap_or(56),
                self.ny.unwrap_or(24),
            )?,
            ProblemKind::Sedov => problems::sedov(
                m,
                self.nx.or(self.ny).unwrap_or(24),
                self.sedov_source,
                self.sedov_deposit,
                self.e_floor,
            )?,
        };
        if let Some(t) = self.t_final {
            spec.t_final = t;
        }
        if self.bowtie {
            fold_first_element(&mut spec)?;
        }
        Ok(spec)
    }
}

/// Drags the far corner of element 0 across its diagonal.
fn fold_first_element(spec: &mut ProblemSpec) -> Result<()> {
    let mesh = &mut spec.mesh;
    if mesh.nx < 2 || mesh.ny < 2 {
        return Err(SghError::Config("bowtie needs at least 2x2 elements".into()));
    }
    let m = mesh.order;
    let far = mesh.lattice_id(m, m);
    let origin = mesh.coords[mesh.lattice_id(0, 0)];
    let c = mesh.coords[far];
    mesh.coords[far] = [origin[0] - 0.5 * (c[0] - origin[0]), origin[1] - 0.5 * (c[1] - origin[1])];
    Ok(())
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| SghError::Config(format!("malformed value '{value}' for key '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(SghError::Config(format!(
            "malformed value '{value}' for key '{key}' (on|off)"
        ))),
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            SghError::Config(format!("line {}: expected key = value, got '{raw}'", n + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
