//! Nonlinear iteration loop, stopping rules, and convergence-order estimation.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::anderson::AndersonHistory;
use crate::error::{Error, Result};
use crate::mesh::Pattern;
use crate::nse::{newton_operator, picard_operator, residual, ProblemSetup, State};

/// Default divergence threshold relative to the first residual.
pub const DEFAULT_BLOWUP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Newton,
    Picard,
    Anderson,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Newton => "newton",
            Method::Picard => "picard",
            Method::Anderson => "aan",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "newton" => Ok(Method::Newton),
            "picard" => Ok(Method::Picard),
            "aan" | "anderson" => Ok(Method::Anderson),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    /// Boundary data with a zero interior.
    Zero,
    /// That many Picard solves starting from [`InitialGuess::Zero`].
    PicardWarmStart(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub depth: usize,
    pub nu: f64,
    pub mesh_n: usize,
    pub pattern: Pattern,
    /// Tangential lid velocity of the cavity.
    pub lid_speed: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub initial: InitialGuess,
    pub blowup: f64,
    /// Anderson mixing returns the unmixed output at every step.
    pub force_passthrough: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Newton,
            depth: 0,
            nu: 1e-2,
            mesh_n: 16,
            pattern: Pattern::Crossed,
            lid_speed: 1.0,
            tol: 1e-12,
            max_iters: 100,
            initial: InitialGuess::Zero,
            blowup: DEFAULT_BLOWUP,
            force_passthrough: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if self.method == Method::Anderson && self.depth == 0 {
            return bad("depth must be at least 1 for aan".into());
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if self.mesh_n == 0 {
            return bad("mesh_n must be at least 1".into());
        }
        if !(self.blowup > 1.0) {
            return bad(format!("blowup must exceed 1, got {}", self.blowup));
        }
        if !self.lid_speed.is_finite() {
            return bad(format!("lid_speed must be finite, got {}", self.lid_speed));
        }
        Ok(())
    }

    pub fn reynolds(&self) -> f64 {
        1.0 / self.nu
    }

    /// Lid-driven cavity described by this configuration.
    pub fn cavity_setup(&self) -> Result<ProblemSetup> {
        ProblemSetup::cavity_with_lid(self.mesh_n, self.pattern, self.nu, self.lid_speed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIters,
    Diverged,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "Converged",
            RunStatus::MaxIters => "MaxIters",
            RunStatus::Diverged => "Diverged",
        })
    }
}

impl FromStr for RunStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Converged" => Ok(RunStatus::Converged),
            "MaxIters" => Ok(RunStatus::MaxIters),
            "Diverged" => Ok(RunStatus::Diverged),
            other => Err(Error::InvalidArgument(format!("unknown status '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `‖∇y_k‖`.
    pub residual: f64,
    /// Anderson gain; 1 for unaccelerated steps.
    pub theta: f64,
    pub gamma: Vec<f64>,
    /// `‖∇(y_k − y_{k−1})‖` for Anderson steps with a non-empty window.
    pub difference_norm: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub records: Vec<IterationRecord>,
    /// Residuals of the Picard warm start, kept apart from the main iteration.
    pub warm_start: Vec<f64>,
    pub picard_solves: usize,
    pub status: RunStatus,
    /// Reason for a Diverged status.
    pub failure: Option<String>,
}

impl IterationLog {
    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual).collect()
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.records.last().map(|r| r.residual)
    }

    pub fn estimate_order(&self) -> Result<f64> {
        estimate_order(&self.residuals())
    }
}

/// Run the configured iteration from the configured initial guess.
///
/// Failures inside the loop end the run with [`RunStatus::Diverged`]; only an
/// invalid configuration is an error.
pub fn run(setup: &ProblemSetup, config: &SolverConfig) -> Result<(State, IterationLog)> {
    config.validate()?;
    let mut log = IterationLog {
        records: Vec::new(),
        warm_start: Vec::new(),
        picard_solves: 0,
        status: RunStatus::MaxIters,
        failure: None,
    };

    let mut u = setup.initial_state();
    if let InitialGuess::PicardWarmStart(count) = config.initial {
        for _ in 0..count {
            log.picard_solves += 1;
            match picard_operator(setup, &u) {
                Ok(next) => {
                    log.warm_start.push(residual(setup, &u, &next).1);
                    u = next;
                }
                Err(e) => {
                    log.status = RunStatus::Diverged;
                    log.failure = Some(format!("warm start: {e}"));
                    return Ok((u, log));
                }
            }
        }
    }

    let mut history = match config.method {
        Method::Anderson => Some(AndersonHistory::new(config.depth).with_forced_passthrough(config.force_passthrough)),
        _ => None,
    };
    let mut first: Option<f64> = None;

    for k in 1..=config.max_iters {
        let start = Instant::now();
        let step = match config.method {
            Method::Picard => picard_operator(setup, &u),
            _ => newton_operator(setup, &u),
        };
        let output = match step {
            Ok(s) => s,
            Err(e) => {
                log.status = RunStatus::Diverged;
                log.failure = Some(format!("{}: {e}", Error::Divergence { iterate: k }));
                return Ok((u, log));
            }
        };
        let (y, r) = residual(setup, &u, &output);
        if !r.is_finite() {
            log.status = RunStatus::Diverged;
            log.failure = Some(format!("{}: non-finite residual", Error::Divergence { iterate: k }));
            return Ok((u, log));
        }
        let r1 = *first.get_or_insert(r);

        let (next, theta, gamma, difference_norm) = match history.as_mut() {
            Some(h) => {
                let mixed = h.push(&setup.laplacian, output.clone(), y).and_then(|_| h.mix());
                match mixed {
                    Ok(m) => (m.state, m.theta, m.gamma, m.difference_norm),
                    Err(e) => {
                        log.status = RunStatus::Diverged;
                        log.failure = Some(format!("{}: {e}", Error::Divergence { iterate: k }));
                        return Ok((u, log));
                    }
                }
            }
            None => (output.clone(), 1.0, Vec::new(), None),
        };
        log.records.push(IterationRecord {
            iter: k,
            residual: r,
            theta,
            gamma,
            difference_norm,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });

        if r <= config.tol {
            log.status = RunStatus::Converged;
            return Ok((output, log));
        }
        if r > config.blowup * r1 {
            log.status = RunStatus::Diverged;
            log.failure = Some(format!("{}: residual {r:e} exceeds {} x {r1:e}", Error::Divergence { iterate: k }, config.blowup));
            return Ok((next, log));
        }
        u = next;
    }
    Ok((u, log))
}

/// Median of `ln(r_{k+1}/r_k) / ln(r_k/r_{k−1})` over strictly decreasing triples.
///
/// Triples touching a residual at or below `100 ε r_1` are skipped.
pub fn estimate_order(residuals: &[f64]) -> Result<f64> {
    let Some(&r1) = residuals.first() else {
        return Err(Error::InsufficientData("empty residual history".into()));
    };
    let floor = 100.0 * f64::EPSILON * r1;
    let mut orders: Vec<f64> = residuals
        .windows(3)
        .filter(|w| w.iter().all(|&r| r.is_finite() && r > floor) && w[0] > w[1] && w[1] > w[2])
        .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
        .filter(|p| p.is_finite())
        .collect();
    if orders.len() < 2 {
        return Err(Error::InsufficientData(format!("{} usable order estimates, need 2", orders.len())));
    }
    orders.sort_by(f64::total_cmp);
    let n = orders.len();
    Ok(if n % 2 == 1 { orders[n / 2] } else { 0.5 * (orders[n / 2 - 1] + orders[n / 2]) })
}

/// One member of a method/depth sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub label: String,
    pub config: SolverConfig,
    pub log: IterationLog,
    pub state: State,
    pub median_order: Option<f64>,
}

impl SweepRow {
    /// `Converged`, `MaxIters`, or `Fail` for a diverged run.
    pub fn status_label(&self) -> &'static str {
        match self.log.status {
            RunStatus::Converged => "Converged",
            RunStatus::MaxIters => "MaxIters",
            RunStatus::Diverged => "Fail",
        }
    }
}

/// Newton plus Anderson at each depth, sharing one setup.
pub fn sweep_configs(base: &SolverConfig, depths: &[usize]) -> Vec<(String, SolverConfig)> {
    let mut out = vec![("newton".to_string(), SolverConfig { method: Method::Newton, depth: 0, ..base.clone() })];
    for &m in depths {
        out.push((format!("aan_m{m}"), SolverConfig { method: Method::Anderson, depth: m, ..base.clone() }));
    }
    out
}

/// Run every member concurrently; rows keep the input order.
pub fn run_sweep(setup: &ProblemSetup, members: &[(String, SolverConfig)]) -> Result<Vec<SweepRow>> {
    for (_, c) in members {
        c.validate()?;
    }
    let results: Vec<Result<(State, IterationLog)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = members.iter().map(|(_, c)| scope.spawn(move || run(setup, c))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep member panicked")).collect()
    });
    members
        .iter()
        .zip(results)
        .map(|((label, config), res)| {
            let (state, log) = res?;
            let median_order = log.estimate_order().ok();
            Ok(SweepRow { label: label.clone(), config: config.clone(), log, state, median_order })
        })
        .collect()
}
