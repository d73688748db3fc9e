//! File formats: iteration history CSV, run summary, order table, legacy VTK.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use aanewton_core::{IterationLog, Mesh, MixedDofMap, State, SweepRow};

use crate::error::CliError;

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// `iter,residual_h1,theta,gamma_1..gamma_m,wall_ms`; reals carry 17 significant digits.
pub fn history_csv(log: &IterationLog, depth: usize, timing: bool) -> String {
    let mut s = String::from("iter,residual_h1,theta");
    for i in 1..=depth {
        let _ = write!(s, ",gamma_{i}");
    }
    s.push_str(",wall_ms\n");
    for r in &log.records {
        let _ = write!(s, "{},{:.16e},{:.16e}", r.iter, r.residual, r.theta);
        for i in 0..depth {
            match r.gamma.get(i) {
                Some(g) => {
                    let _ = write!(s, ",{g:.16e}");
                }
                None => s.push(','),
            }
        }
        let ms = if timing { r.wall_ms } else { 0.0 };
        let _ = writeln!(s, ",{ms:.3}");
    }
    s
}

/// Residual column of a history CSV.
pub fn read_history_residuals(csv: &str) -> Result<Vec<f64>, CliError> {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or("");
    let col = header
        .split(',')
        .position(|c| c == "residual_h1")
        .ok_or_else(|| CliError::config("history", "missing residual_h1 column"))?;
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let cell = l.split(',').nth(col).unwrap_or("");
            cell.parse::<f64>().map_err(|e| CliError::config("history", format!("bad residual '{cell}': {e}")))
        })
        .collect()
}

fn fmt_order(order: Option<f64>) -> String {
    order.map(|p| format!("{p:.16e}")).unwrap_or_else(|| "NA".into())
}

/// `key=value` lines describing one run.
pub fn summary(log: &IterationLog, label: &str) -> String {
    let warm: Vec<String> = log.warm_start.iter().map(|r| format!("{r:.16e}")).collect();
    let mut s = String::new();
    let _ = writeln!(s, "method={label}");
    let _ = writeln!(s, "status={}", log.status);
    let _ = writeln!(s, "iters={}", log.iterations());
    let _ = writeln!(s, "median_order={}", fmt_order(log.estimate_order().ok()));
    let _ = writeln!(s, "final_residual={}", log.final_residual().map(|r| format!("{r:.16e}")).unwrap_or_else(|| "NA".into()));
    let _ = writeln!(s, "warm_start_solves={}", log.picard_solves);
    let _ = writeln!(s, "warm_start_residuals={}", warm.join(";"));
    if let Some(f) = &log.failure {
        let _ = writeln!(s, "failure={f}");
    }
    s
}

/// Value of `key` in a summary.
pub fn summary_value<'a>(summary: &'a str, key: &str) -> Option<&'a str> {
    summary.lines().find_map(|l| l.split_once('=').filter(|(k, _)| *k == key).map(|(_, v)| v))
}

/// `method,status,iters,median_order`; diverged runs read `Fail`.
pub fn order_table(rows: &[SweepRow]) -> String {
    let mut s = String::from("method,status,iters,median_order\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.label, r.status_label(), r.log.iterations(), fmt_order(r.median_order));
    }
    s
}

/// Legacy ASCII VTK unstructured grid with vertex velocity and pressure.
pub fn vtk_string(mesh: &Mesh, dofmap: &MixedDofMap, state: &State) -> String {
    let ns = dofmap.n_velocity_scalar;
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\naanewton solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {nv} double");
    for p in &mesh.vertices {
        let _ = writeln!(s, "{:.8e} {:.8e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {nv}");
    s.push_str("VECTORS velocity double\n");
    for v in 0..nv {
        let _ = writeln!(s, "{:.8e} {:.8e} 0", state.velocity[v], state.velocity[ns + v]);
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for v in 0..nv {
        let _ = writeln!(s, "{:.8e}", state.pressure[v]);
    }
    s
}

pub fn export_vtk(path: &Path, mesh: &Mesh, dofmap: &MixedDofMap, state: &State) -> Result<(), CliError> {
    write_file(path, &vtk_string(mesh, dofmap, state))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub points: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub velocity: Vec<[f64; 2]>,
    pub pressure: Vec<f64>,
}

/// Parse files written by [`vtk_string`].
pub fn parse_vtk(text: &str) -> Result<VtkData, CliError> {
    let bad = |m: &str| CliError::config("vtk", m.to_string());
    let lines: Vec<&str> = text.lines().collect();
    let find = |prefix: &str| lines.iter().position(|l| l.starts_with(prefix)).ok_or_else(|| bad(prefix));
    let count = |i: usize| -> Result<usize, CliError> {
        lines[i].split_whitespace().nth(1).and_then(|c| c.parse().ok()).ok_or_else(|| bad("count"))
    };
    let floats = |l: &str| -> Result<Vec<f64>, CliError> {
        l.split_whitespace().map(|t| t.parse::<f64>().map_err(|_| bad("number"))).collect()
    };

    let ip = find("POINTS")?;
    let nv = count(ip)?;
    let points = (0..nv).map(|k| floats(lines[ip + 1 + k]).map(|v| [v[0], v[1]])).collect::<Result<_, _>>()?;
    let ic = find("CELLS")?;
    let nt = count(ic)?;
    let cells = (0..nt)
        .map(|k| {
            let v: Vec<usize> = lines[ic + 1 + k].split_whitespace().skip(1).filter_map(|t| t.parse().ok()).collect();
            (v.len() == 3).then(|| [v[0], v[1], v[2]]).ok_or_else(|| bad("cell"))
        })
        .collect::<Result<_, _>>()?;
    let iv = find("VECTORS")?;
    let velocity = (0..nv).map(|k| floats(lines[iv + 1 + k]).map(|v| [v[0], v[1]])).collect::<Result<_, _>>()?;
    let is = find("LOOKUP_TABLE")?;
    let pressure = (0..nv).map(|k| floats(lines[is + 1 + k]).map(|v| v[0])).collect::<Result<_, _>>()?;
    Ok(VtkData { points, cells, velocity, pressure })
}
