//! Subcommand bodies. Each returns the process exit code on success.

use std::fs;
use std::path::{Path, PathBuf};

use aanewton_core::verify::{mms_convergence_study, ManufacturedCase};
use aanewton_core::{run, run_sweep, sweep_configs, Method, Pattern, RunStatus};

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{export_vtk, history_csv, order_table, summary, write_file};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_MAX_ITERS: i32 = 3;

pub fn exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::Converged => EXIT_OK,
        RunStatus::Diverged => EXIT_DIVERGED,
        RunStatus::MaxIters => EXIT_MAX_ITERS,
    }
}

/// Create `dir` and prove it writable before any solve starts.
pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let probe = dir.join(".write_probe");
    fs::write(&probe, b"").map_err(|e| CliError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| CliError::io(&probe, e))
}

fn label(m: &RunManifest) -> String {
    match m.solver.method {
        Method::Anderson => format!("aan_m{}", m.solver.depth),
        other => other.to_string(),
    }
}

/// One solver run; writes `history.csv`, `summary.txt`, and optionally `solution.vtk` / `mesh.txt`.
pub fn cmd_run(manifest: &RunManifest, dump_mesh: bool) -> Result<i32, CliError> {
    manifest.validate()?;
    prepare_dir(&manifest.out_dir)?;
    let setup = manifest.solver.cavity_setup()?;
    if dump_mesh {
        let path = manifest.out_dir.join("mesh.txt");
        let mut buf = Vec::new();
        setup.mesh.write_node_element(&mut buf).map_err(|e| CliError::io(&path, e))?;
        fs::write(&path, buf).map_err(|e| CliError::io(&path, e))?;
    }
    let (state, log) = run(&setup, &manifest.solver)?;
    let depth = if manifest.solver.method == Method::Anderson { manifest.solver.depth } else { 0 };
    write_file(&manifest.out_dir.join("history.csv"), &history_csv(&log, depth, manifest.timing))?;
    write_file(&manifest.out_dir.join("summary.txt"), &summary(&log, &label(manifest)))?;
    if manifest.vtk {
        export_vtk(&manifest.out_dir.join("solution.vtk"), &setup.mesh, &setup.dofmap, &state)?;
    }
    Ok(exit_code(log.status))
}

/// Newton plus Anderson at each listed depth; per-member histories and `order_table.csv`.
pub fn cmd_sweep(manifest: &RunManifest) -> Result<i32, CliError> {
    manifest.validate()?;
    let members = sweep_configs(&manifest.solver, &manifest.depths);
    let dirs: Vec<PathBuf> = members.iter().map(|(l, _)| manifest.out_dir.join(l)).collect();
    prepare_dir(&manifest.out_dir)?;
    for d in &dirs {
        prepare_dir(d)?;
    }
    let setup = manifest.solver.cavity_setup()?;
    let rows = run_sweep(&setup, &members)?;
    for (row, dir) in rows.iter().zip(&dirs) {
        write_file(&dir.join("history.csv"), &history_csv(&row.log, row.config.depth, manifest.timing))?;
        write_file(&dir.join("summary.txt"), &summary(&row.log, &row.label))?;
    }
    let table = order_table(&rows);
    write_file(&manifest.out_dir.join("order_table.csv"), &table)?;
    print!("{table}");
    Ok(EXIT_OK)
}

/// Manufactured-solution study; writes `mms.csv`.
pub fn cmd_mms(sizes: &[usize], nu: f64, pattern: Pattern, out_dir: &Path) -> Result<i32, CliError> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(CliError::config("sizes", "need at least one positive mesh size"));
    }
    if !(nu > 0.0) {
        return Err(CliError::config("nu", "must be positive"));
    }
    prepare_dir(out_dir)?;
    let study = mms_convergence_study(ManufacturedCase::StreamFunction, sizes, nu, pattern)?;
    let csv = study.to_csv();
    write_file(&out_dir.join("mms.csv"), &csv)?;
    print!("{csv}");
    Ok(EXIT_OK)
}
