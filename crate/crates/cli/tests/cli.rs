use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use aanewton_cli::output::{parse_vtk, read_history_residuals, summary_value};
use aanewton_core::estimate_order;

fn aanewton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aanewton")).args(args).output().expect("spawn aanewton")
}

fn write_manifest(dir: &Path, body: &str) -> String {
    let path = dir.join("run.ini");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn zero_data_converges_on_the_first_iterate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_manifest(
        tmp.path(),
        &format!("[problem]\nre = 10\nmesh_n = 4\nlid_speed = 0\n\n[output]\nout_dir = {}\n", out.display()),
    );
    let res = aanewton(&["run", &cfg]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let r = read_history_residuals(&read(out.join("history.csv"))).unwrap();
    assert_eq!(r, vec![0.0]);
    let s = read(out.join("summary.txt"));
    assert_eq!(summary_value(&s, "status"), Some("Converged"));
    assert_eq!(summary_value(&s, "median_order"), Some("NA"));
}

#[test]
fn iteration_cap_gives_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("capped");
    let res = aanewton(&[
        "run", "--re", "100", "--mesh-n", "4", "--max-iters", "2", "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
    assert_eq!(read_history_residuals(&read(out.join("history.csv"))).unwrap().len(), 2);
}

#[test]
fn unknown_manifest_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_manifest(tmp.path(), "[solver]\nmethod = newton\nrelaxation = 0.5\n");
    let res = aanewton(&["run", &cfg]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("relaxation"), "{err}");
}

#[test]
fn invalid_flag_values_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let res = aanewton(&["run", "--method", "aan", "--depth", "0", "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let res = aanewton(&["run", "--tol=-1", "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let res = aanewton(&["run", "--no-such-flag"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn summary_order_matches_history() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("aan");
    let res = aanewton(&[
        "run", "--re", "200", "--mesh-n", "8", "--method", "aan", "--depth", "2", "--tol", "1e-12",
        "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let history = read(out.join("history.csv"));
    assert!(history.starts_with("iter,residual_h1,theta,gamma_1,gamma_2,wall_ms\n"));
    let residuals = read_history_residuals(&history).unwrap();
    let recomputed = estimate_order(&residuals).unwrap();
    let s = read(out.join("summary.txt"));
    let reported: f64 = summary_value(&s, "median_order").unwrap().parse().unwrap();
    assert!((reported - recomputed).abs() <= 1e-12, "{reported} vs {recomputed}");
    assert_eq!(summary_value(&s, "iters").unwrap().parse::<usize>().unwrap(), residuals.len());
}

#[test]
fn sweep_table_lists_every_member() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let res = aanewton(&["sweep", "--re", "100", "--mesh-n", "6", "--depths", "1,3", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let table = read(out.join("order_table.csv"));
    let labels: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["newton", "aan_m1", "aan_m3"]);
    assert_eq!(String::from_utf8_lossy(&res.stdout), table);
    for l in &labels {
        assert!(out.join(l).join("history.csv").is_file());
    }
}

#[test]
fn newton_only_sweep_matches_a_single_run() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep_dir = tmp.path().join("sweep");
    let run_dir = tmp.path().join("run");
    let common = ["--re", "100", "--mesh-n", "6"];
    let cfg = write_manifest(tmp.path(), "[sweep]\ndepths =\n\n[output]\ntiming = false\n");
    let mut a = vec!["sweep", cfg.as_str()];
    a.extend(common);
    a.extend(["--out-dir", sweep_dir.to_str().unwrap()]);
    assert_eq!(aanewton(&a).status.code(), Some(0));
    let mut b = vec!["run", cfg.as_str()];
    b.extend(common);
    b.extend(["--out-dir", run_dir.to_str().unwrap()]);
    assert_eq!(aanewton(&b).status.code(), Some(0));
    assert_eq!(read(sweep_dir.join("newton/history.csv")), read(run_dir.join("history.csv")));
    assert_eq!(read(sweep_dir.join("order_table.csv")).lines().count(), 2);
}

#[test]
fn vtk_output_carries_the_lid_velocity() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("vtk");
    let res = aanewton(&["run", "--re", "10", "--mesh-n", "4", "--vtk", "--dump-mesh", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let vtk = parse_vtk(&read(out.join("solution.vtk"))).unwrap();
    // Crossed cells add one center vertex per square.
    assert_eq!(vtk.points.len(), 25 + 16);
    assert_eq!(vtk.cells.len(), 64);
    for (p, v) in vtk.points.iter().zip(&vtk.velocity) {
        // The top corners belong to the lid.
        if p[1] == 1.0 {
            assert!((v[0] - 1.0).abs() < 1e-8 && v[1].abs() < 1e-8, "{p:?} {v:?}");
        } else if p[1] == 0.0 || p[0] == 0.0 || p[0] == 1.0 {
            assert!(v[0].abs() < 1e-8 && v[1].abs() < 1e-8, "{p:?} {v:?}");
        }
    }
    let mesh = read(out.join("mesh.txt"));
    assert!(!mesh.is_empty());
}

#[test]
fn mms_subcommand_writes_rates() {
    let tmp = tempfile::tempdir().unwrap();
    let res = aanewton(&["mms", "--sizes", "4,8", "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let csv = read(tmp.path().join("mms.csv"));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "n,h,err_u_H1,rate_u,err_p_L2,rate_p");
    assert_eq!(rows.len(), 3);
    let rate: f64 = rows[2].split(',').nth(3).unwrap().parse().unwrap();
    assert!(rate > 1.5, "{rate}");
}
