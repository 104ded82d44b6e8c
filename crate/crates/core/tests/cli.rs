use std::process::Command;

use sgh::config::{parse_config_text, RunConfig};
use sgh::driver::Simulation;
use sgh::hydro::SolverOptions;
use sgh::output::{VtkData, AUDIT_HEADER};
use sgh::problems;

fn sgh() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sgh"))
}

#[test]
fn bow_tie_exits_with_jacobian_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "problem = noh\norder = 2\nnx = 4\nbowtie = on\n").unwrap();
    let out = sgh()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr).to_lowercase();
    assert!(err.contains("jacobian"), "{err}");
    assert!(err.contains("element 0"), "{err}");
}

#[test]
fn rejects_unsupported_order_and_unknown_keys() {
    let out = sgh().args(["run", "--problem", "noh", "--order", "4"]).output().unwrap();
    assert!(!out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "problem = noh\nresolution = 3\n").unwrap();
    let out = sgh().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolution"));
    let empty = dir.path().join("empty.cfg");
    std::fs::write(&empty, "# nothing\n").unwrap();
    let out = sgh().args(["run", "--config"]).arg(&empty).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("problem"));
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("noh");
    let out = sgh()
        .args(["run", "--problem", "noh", "--order", "2", "--nx", "4", "--ny", "4"])
        .args(["--tfinal", "0.05", "--vtk-every", "5", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let audit = std::fs::read_to_string(out_dir.join("audit.csv")).unwrap();
    let mut lines = audit.lines();
    assert_eq!(lines.next(), Some(AUDIT_HEADER));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let mass0 = rows[0][7];
    assert!(rows.iter().all(|r| (r[7] - mass0).abs() <= 1e-12 * mass0));
    assert!((rows.last().unwrap()[1] - 0.05).abs() < 1e-14);
    assert!(out_dir.join("scatter.csv").exists());
    assert!(out_dir.join("reference.csv").exists());
    let vtks: Vec<_> = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "vtk"))
        .collect();
    assert!(vtks.len() >= 2);
    for v in vtks {
        VtkData::parse(&std::fs::read_to_string(v.path()).unwrap()).unwrap();
    }
}

#[test]
fn converge_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = sgh()
        .args(["converge", "--problem", "taylor-green", "--order", "2", "--h-list", "1/2,1/4"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    let out = sgh().args(["converge", "--problem", "noh"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn vtk_round_trip_of_a_running_problem() {
    let spec = problems::sedov(2, 4, problems::SedovSource::Origin, problems::DepositSplit::Element, 1e-3)
        .unwrap();
    let mut sim = Simulation::new(&spec, SolverOptions::default()).unwrap();
    for _ in 0..10 {
        sim.advance(spec.t_final).unwrap();
    }
    let data = VtkData::from_simulation(&sim);
    assert_eq!(data.cells.len(), 4 * 4 * 2 * 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.vtk");
    data.write(&path, "sedov").unwrap();
    let back = VtkData::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, data);
}

#[test]
fn config_file_matches_flags() {
    let text = "problem = noh\norder = 2\nnx = 20\nny = 20\n";
    let pairs = parse_config_text(text).unwrap();
    let from_file = RunConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
    let from_flags =
        RunConfig::from_pairs([("problem", "noh"), ("order", "2"), ("nx", "20"), ("ny", "20")]).unwrap();
    assert_eq!(from_file, from_flags);
    let spec = from_file.problem_spec().unwrap();
    assert_eq!((spec.mesh.nx, spec.mesh.ny, spec.mesh.order), (20, 20, 2));
}
