use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aanewton_cli::manifest::warm_start;
use aanewton_cli::{cmd_mms, cmd_run, cmd_sweep, CliError, RunManifest, EXIT_CONFIG};
use aanewton_core::{Method, Pattern};

#[derive(Parser)]
#[command(name = "aanewton", version, about = "Newton and Anderson-accelerated Newton for steady Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the lid-driven cavity once.
    Run {
        #[command(flatten)]
        opts: RunOpts,
        /// Also write the mesh as `mesh.txt` in node/element form.
        #[arg(long)]
        dump_mesh: bool,
    },
    /// Newton plus Anderson at each configured depth, with an order table.
    Sweep {
        #[command(flatten)]
        opts: RunOpts,
        /// Comma-separated depths, overriding `[sweep] depths`.
        #[arg(long, value_delimiter = ',')]
        depths: Option<Vec<usize>>,
    },
    /// Manufactured-solution convergence study.
    Mms {
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value = "diagonal")]
        pattern: Pattern,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Manifest file; flags override its values.
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "nu")]
    re: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    mesh_n: Option<usize>,
    #[arg(long)]
    pattern: Option<Pattern>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Number of Picard warm-start solves; 0 starts from the boundary data.
    #[arg(long)]
    warm_start: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write `solution.vtk`.
    #[arg(long)]
    vtk: bool,
}

impl RunOpts {
    fn manifest(&self) -> Result<RunManifest, CliError> {
        let mut m = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                RunManifest::parse(&text)?
            }
            None => RunManifest::default(),
        };
        let s = &mut m.solver;
        if let Some(re) = self.re {
            s.nu = 1.0 / re;
        }
        if let Some(nu) = self.nu {
            s.nu = nu;
        }
        if let Some(n) = self.mesh_n {
            s.mesh_n = n;
        }
        if let Some(p) = self.pattern {
            s.pattern = p;
        }
        if let Some(method) = self.method {
            s.method = method;
        }
        if let Some(d) = self.depth {
            s.depth = d;
        }
        if let Some(t) = self.tol {
            s.tol = t;
        }
        if let Some(k) = self.max_iters {
            s.max_iters = k;
        }
        if let Some(w) = self.warm_start {
            s.initial = warm_start(w);
        }
        if let Some(dir) = &self.out_dir {
            m.out_dir = dir.clone();
        }
        m.vtk |= self.vtk;
        m.validate()?;
        Ok(m)
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { opts, dump_mesh } => cmd_run(&opts.manifest()?, dump_mesh),
        Command::Sweep { opts, depths } => {
            let mut m = opts.manifest()?;
            if let Some(d) = depths {
                m.depths = d;
                m.validate()?;
            }
            cmd_sweep(&m)
        }
        Command::Mms { sizes, nu, pattern, out_dir } => cmd_mms(&sizes, nu, pattern, &out_dir),
    }
}

fn main() -> ExitCode {
    // Usage errors share the configuration exit code; clap's own code 2 would read as divergence.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG as u8) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("aanewton: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
