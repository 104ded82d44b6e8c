//! `run` and `converge` commands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::driver::{taylor_green_convergence, AuditRecord, ConvergenceRow, Simulation};
use crate::error::{Result, SghError};
use crate::hydro::SolverOptions;
use crate::output::{audit_row, convergence_table, reference_csv, scatter_csv, VtkData, AUDIT_HEADER};

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub t: f64,
    pub last: AuditRecord,
    pub files: Vec<PathBuf>,
}

/// Runs one problem, writing `audit.csv`, `timing.csv`, VTK snapshots,
/// `scatter.csv` and (when known) `reference.csv` into the output directory.
/// On an abort the current state is still dumped as `abort.vtk` and
/// `abort_scatter.csv` before the error is returned.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let spec = cfg.problem_spec()?;
    let mut sim = Simulation::new(&spec, cfg.solver_options())?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let name = spec.kind.name();

    let audit_path = dir.join("audit.csv");
    let timing_path = dir.join("timing.csv");
    let mut audit = BufWriter::new(File::create(&audit_path)?);
    let mut timing = BufWriter::new(File::create(&timing_path)?);
    writeln!(audit, "{AUDIT_HEADER}")?;
    writeln!(timing, "step,wall_seconds")?;
    let first = sim.snapshot_record()?;
    writeln!(audit, "{}", audit_row(&first))?;
    files.push(audit_path);
    files.push(timing_path);

    let vtk_path = |step: usize| dir.join(format!("{name}_{step:06}.vtk"));
    let path0 = vtk_path(0);
    VtkData::from_simulation(&sim).write(&path0, &format!("{name} t=0"))?;
    files.push(path0);

    let every = cfg.vtk_every;
    let mut last = first;
    let result = sim.run_until(sim.t_final, |s, rec| {
        writeln!(audit, "{}", audit_row(rec))?;
        writeln!(timing, "{},{:e}", rec.step, rec.wall_seconds)?;
        if every > 0 && rec.step % every == 0 {
            let p = vtk_path(rec.step);
            VtkData::from_simulation(s).write(&p, &format!("{name} t={}", rec.t))?;
        }
        last = *rec;
        Ok(())
    });
    audit.flush()?;
    timing.flush()?;

    if let Err(err) = result {
        let _ = VtkData::from_simulation(&sim).write(
            &dir.join("abort.vtk"),
            &format!("{name} aborted at t={}", sim.state.t),
        );
        let _ = fs::write(dir.join("abort_scatter.csv"), scatter_csv(&sim.scatter()));
        return Err(err);
    }

    let final_path = vtk_path(sim.steps);
    if !final_path.exists() {
        VtkData::from_simulation(&sim).write(&final_path, &format!("{name} t={}", sim.state.t))?;
    }
    files.push(final_path);
    let scatter = sim.scatter();
    let scatter_path = dir.join("scatter.csv");
    fs::write(&scatter_path, scatter_csv(&scatter))?;
    files.push(scatter_path);
    let r_max = scatter.iter().map(|p| p.radius).fold(0.0, f64::max);
    if let Some(text) = reference_csv(&sim, r_max, 400) {
        let p = dir.join("reference.csv");
        fs::write(&p, text)?;
        files.push(p);
    }
    Ok(RunSummary {
        steps: sim.steps,
        t: sim.state.t,
        last,
        files,
    })
}

/// Parses `1/8`, `0.125` or `8` (a cell count) into cells per side.
pub fn parse_h(token: &str) -> Result<usize> {
    let bad = || SghError::Config(format!("cannot read mesh size '{token}'"));
    let t = token.trim();
    let h = if let Some((a, b)) = t.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        a / b
    } else {
        let v: f64 = t.parse().map_err(|_| bad())?;
        if v >= 1.0 {
            return usize::try_from(v as i64).ok().filter(|&n| n > 0).ok_or_else(bad);
        }
        v
    };
    if !(h > 0.0 && h <= 1.0) {
        return Err(bad());
    }
    let n = (1.0 / h).round();
    if ((1.0 / h) - n).abs() > 1e-9 {
        return Err(SghError::Config(format!(
            "mesh size '{token}' does not divide the unit square"
        )));
    }
    Ok(n as usize)
}

/// Refinement study on the Taylor–Green vortex; writes `convergence.csv`.
pub fn converge(
    m: usize,
    cells: &[usize],
    t_final: f64,
    opts: &SolverOptions,
    out_dir: &Path,
) -> Result<Vec<ConvergenceRow>> {
    let rows = taylor_green_convergence(m, cells, t_final, opts)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("convergence.csv"), convergence_table(&rows))?;
    Ok(rows)
}
