use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sgh::app;
use sgh::config::{parse_config_text, RunConfig};
use sgh::hydro::SolverOptions;
use sgh::problems::ProblemKind;
use sgh::viscosity::ViscosityForm;

/// High-order staggered Lagrangian hydrodynamics.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark problem to its final time.
    Run(RunArgs),
    /// Mesh-refinement study of the density variation.
    Converge(ConvergeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    no_hourglass: bool,
    #[arg(long)]
    no_viscosity: bool,
    /// classic | symmetric
    #[arg(long)]
    form: Option<String>,
    /// thermo | closed
    #[arg(long)]
    energy_basis: Option<String>,
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    vtk_every: Option<usize>,
    /// origin | center
    #[arg(long)]
    sedov_source: Option<String>,
    /// element | point
    #[arg(long)]
    sedov_deposit: Option<String>,
    #[arg(long)]
    e_floor: Option<f64>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value = "taylor-green")]
    problem: String,
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Comma-separated mesh sizes, e.g. `1/2,1/4,1/8`.
    #[arg(long, value_delimiter = ',', default_value = "1/2,1/4,1/8,1/16")]
    h_list: Vec<String>,
    #[arg(long, default_value_t = 0.75)]
    tfinal: f64,
    #[arg(long)]
    cfl: Option<f64>,
    /// Turn the artificial viscosity on (off by default for this smooth flow).
    #[arg(long)]
    viscosity: bool,
    #[arg(long)]
    no_hourglass: bool,
    #[arg(long, default_value = "output")]
    out: PathBuf,
}

fn run_config(args: &RunArgs) -> sgh::Result<RunConfig> {
    let mut pairs: Vec<(String, String)> = match &args.config {
        Some(path) => parse_config_text(&std::fs::read_to_string(path)?)?,
        None => Vec::new(),
    };
    let mut flag = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            pairs.push((k.to_string(), v));
        }
    };
    flag("problem", args.problem.clone());
    flag("order", args.order.map(|v| v.to_string()));
    flag("nx", args.nx.map(|v| v.to_string()));
    flag("ny", args.ny.map(|v| v.to_string()));
    flag("cfl", args.cfl.map(|v| v.to_string()));
    flag("c1", args.c1.map(|v| v.to_string()));
    flag("c2", args.c2.map(|v| v.to_string()));
    flag("hourglass", args.no_hourglass.then(|| "off".into()));
    flag("viscosity", args.no_viscosity.then(|| "off".into()));
    flag("viscosity_form", args.form.clone());
    flag("energy_basis", args.energy_basis.clone());
    flag("t_final", args.tfinal.map(|v| v.to_string()));
    flag("output_dir", args.out.as_ref().map(|p| p.display().to_string()));
    flag("vtk_every", args.vtk_every.map(|v| v.to_string()));
    flag("sedov_source", args.sedov_source.clone());
    flag("sedov_deposit", args.sedov_deposit.clone());
    flag("e_floor", args.e_floor.map(|v| v.to_string()));
    RunConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
}

fn configure_threads() -> sgh::Result<()> {
    if let Ok(v) = std::env::var("SGH_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| sgh::SghError::Config(format!("SGH_THREADS must be an integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| sgh::SghError::Config(e.to_string()))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> sgh::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Run(args) => {
            let cfg = run_config(&args)?;
            let summary = app::run(&cfg)?;
            let r = summary.last;
            println!(
                "{}: {} steps to t = {:.6}, total energy {:.10e}, mass {:.15e}",
                cfg.problem.name(),
                summary.steps,
                summary.t,
                r.total,
                r.mass
            );
            println!("output in {}", cfg.output_dir.display());
        }
        Command::Converge(args) => {
            let kind: ProblemKind = args.problem.parse().map_err(sgh::SghError::Config)?;
            if kind != ProblemKind::TaylorGreen {
                return Err(sgh::SghError::Config(format!(
                    "convergence needs a manufactured reference; '{}' has none",
                    kind.name()
                )));
            }
            if !(1..=3).contains(&args.order) {
                return Err(sgh::SghError::Config(format!(
                    "order {} is not supported (1..=3)",
                    args.order
                )));
            }
            let cells = args
                .h_list
                .iter()
                .map(|h| app::parse_h(h))
                .collect::<sgh::Result<Vec<_>>>()?;
            let opts = SolverOptions {
                viscosity: args.viscosity,
                hourglass: !args.no_hourglass,
                form: ViscosityForm::Symmetric,
                cfl: args.cfl.unwrap_or(SolverOptions::default().cfl),
                ..SolverOptions::default()
            };
            let rows = app::converge(args.order, &cells, args.tfinal, &opts, &args.out)?;
            println!("{:>10} {:>18} {:>12} {:>8}", "h", "DOFs (kin, thermo)", "L2 error", "order");
            for r in rows {
                let order = r.order.map(|o| format!("{o:.4}")).unwrap_or_else(|| "—".into());
                println!(
                    "{:>10} {:>18} {:>12.4e} {:>8}",
                    format!("1/{}", (1.0 / r.h).round()),
                    format!("({}, {})", r.kinematic_dofs, r.thermo_dofs),
                    r.error,
                    order
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
