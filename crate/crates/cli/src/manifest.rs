//! Run manifests: sectioned `key = value` text.
//!
//! ```text
//! schema_version = 1
//! seed = 0
//!
//! [problem]
//! re = 1000
//! mesh_n = 32
//! pattern = crossed
//! lid_speed = 1
//!
//! [solver]
//! method = aan
//! depth = 1
//! tol = 1e-12
//! max_iters = 100
//! warm_start = 3
//!
//! [output]
//! out_dir = out
//! vtk = true
//!
//! [sweep]
//! depths = 1, 2, 5, 10
//! ```

use std::fmt;
use std::path::PathBuf;

use aanewton_core::{InitialGuess, Method, SolverConfig};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub schema_version: u32,
    pub seed: u64,
    pub solver: SolverConfig,
    pub out_dir: PathBuf,
    pub vtk: bool,
    /// When false the `wall_ms` column is written as zero so histories compare bitwise.
    pub timing: bool,
    pub depths: Vec<usize>,
}

impl Default for RunManifest {
    fn default() -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            solver: SolverConfig::default(),
            out_dir: PathBuf::from("out"),
            vtk: false,
            timing: true,
            depths: vec![1, 2, 5, 10],
        }
    }
}

fn parse_value<T: std::str::FromStr>(field: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| CliError::config(field, format!("cannot parse '{value}': {e}")))
}

fn parse_bool(field: &str, value: &str) -> Result<bool, CliError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::config(field, format!("expected a boolean, got '{value}'"))),
    }
}

fn parse_depths(field: &str, value: &str) -> Result<Vec<usize>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value::<usize>(field, s))
        .collect()
}

impl RunManifest {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut m = RunManifest::default();
        let mut section = String::new();
        let mut saw_re = false;
        let mut saw_nu = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                if !matches!(section.as_str(), "problem" | "solver" | "output" | "sweep") {
                    return Err(CliError::config(&section, format!("unknown section on line {}", lineno + 1)));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(line, format!("expected 'key = value' on line {}", lineno + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            let field = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            let f = field.as_str();
            match f {
                "schema_version" => {
                    m.schema_version = parse_value(f, value)?;
                    if m.schema_version != SCHEMA_VERSION {
                        return Err(CliError::config(f, format!("unsupported version {}", m.schema_version)));
                    }
                }
                "seed" => m.seed = parse_value(f, value)?,
                "problem.re" => {
                    let re: f64 = parse_value(f, value)?;
                    m.solver.nu = 1.0 / re;
                    saw_re = true;
                }
                "problem.nu" => {
                    m.solver.nu = parse_value(f, value)?;
                    saw_nu = true;
                }
                "problem.mesh_n" => m.solver.mesh_n = parse_value(f, value)?,
                "problem.pattern" => m.solver.pattern = parse_value(f, value)?,
                "problem.lid_speed" => m.solver.lid_speed = parse_value(f, value)?,
                "solver.method" => m.solver.method = parse_value(f, value)?,
                "solver.depth" => m.solver.depth = parse_value(f, value)?,
                "solver.tol" => m.solver.tol = parse_value(f, value)?,
                "solver.max_iters" => m.solver.max_iters = parse_value(f, value)?,
                "solver.warm_start" => m.solver.initial = warm_start(parse_value(f, value)?),
                "solver.blowup" => m.solver.blowup = parse_value(f, value)?,
                "solver.force_passthrough" => m.solver.force_passthrough = parse_bool(f, value)?,
                "output.out_dir" => m.out_dir = PathBuf::from(value),
                "output.vtk" => m.vtk = parse_bool(f, value)?,
                "output.timing" => m.timing = parse_bool(f, value)?,
                "sweep.depths" => m.depths = parse_depths(f, value)?,
                _ => return Err(CliError::config(f, "unknown key")),
            }
        }
        if saw_re && saw_nu {
            return Err(CliError::config("problem.nu", "give either re or nu, not both"));
        }
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.solver;
        if !(s.nu > 0.0 && s.nu.is_finite()) {
            return Err(CliError::config("problem.nu", format!("must be positive, got {}", s.nu)));
        }
        if s.mesh_n == 0 {
            return Err(CliError::config("problem.mesh_n", "must be at least 1"));
        }
        if !s.lid_speed.is_finite() {
            return Err(CliError::config("problem.lid_speed", "must be finite"));
        }
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(CliError::config("solver.tol", format!("must be positive, got {}", s.tol)));
        }
        if s.max_iters == 0 {
            return Err(CliError::config("solver.max_iters", "must be at least 1"));
        }
        if s.method == Method::Anderson && s.depth == 0 {
            return Err(CliError::config("solver.depth", "must be at least 1 for method aan"));
        }
        if !(s.blowup > 1.0) {
            return Err(CliError::config("solver.blowup", format!("must exceed 1, got {}", s.blowup)));
        }
        if self.depths.contains(&0) {
            return Err(CliError::config("sweep.depths", "depths must be at least 1"));
        }
        Ok(())
    }
}

pub fn warm_start(count: usize) -> InitialGuess {
    if count == 0 {
        InitialGuess::Zero
    } else {
        InitialGuess::PicardWarmStart(count)
    }
}

impl fmt::Display for RunManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.solver;
        let warm = match s.initial {
            InitialGuess::Zero => 0,
            InitialGuess::PicardWarmStart(c) => c,
        };
        let depths: Vec<String> = self.depths.iter().map(usize::to_string).collect();
        writeln!(f, "schema_version = {}", self.schema_version)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "\n[problem]")?;
        writeln!(f, "nu = {:e}", s.nu)?;
        writeln!(f, "mesh_n = {}", s.mesh_n)?;
        writeln!(f, "pattern = {}", s.pattern)?;
        writeln!(f, "lid_speed = {:e}", s.lid_speed)?;
        writeln!(f, "\n[solver]")?;
        writeln!(f, "method = {}", s.method)?;
        writeln!(f, "depth = {}", s.depth)?;
        writeln!(f, "tol = {:e}", s.tol)?;
        writeln!(f, "max_iters = {}", s.max_iters)?;
        writeln!(f, "warm_start = {warm}")?;
        writeln!(f, "blowup = {:e}", s.blowup)?;
        writeln!(f, "force_passthrough = {}", s.force_passthrough)?;
        writeln!(f, "\n[output]")?;
        writeln!(f, "out_dir = {}", self.out_dir.display())?;
        writeln!(f, "vtk = {}", self.vtk)?;
        writeln!(f, "timing = {}", self.timing)?;
        writeln!(f, "\n[sweep]")?;
        writeln!(f, "depths = {}", depths.join(", "))
    }
}
