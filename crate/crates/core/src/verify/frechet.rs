use crate::error::Result;
use crate::nse::{frechet_operator, newton_operator, ProblemSetup, State};

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetReport {
    /// `(ε, ‖∇(G(u+εh) − G(u) − G′(u;εh))‖)`.
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of log remainder against log ε; `None` if any remainder vanishes.
    pub slope: Option<f64>,
}

impl FrechetReport {
    pub fn max_remainder(&self) -> f64 {
        self.rows.iter().fold(0.0f64, |m, &(_, r)| m.max(r))
    }
}

/// Finite-difference check of the derivative of the Newton map at `u` along `h`.
pub fn frechet_harness(setup: &ProblemSetup, u: &State, h: &[f64], epsilons: &[f64]) -> Result<FrechetReport> {
    let g = newton_operator(setup, u)?;
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let step: Vec<f64> = h.iter().map(|v| eps * v).collect();
        let shifted = State {
            velocity: u.velocity.iter().zip(&step).map(|(a, b)| a + b).collect(),
            pressure: u.pressure.clone(),
        };
        let g_shifted = newton_operator(setup, &shifted)?;
        let d = frechet_operator(setup, u, Some(&g), &step)?;
        let rem: Vec<f64> = g_shifted
            .velocity
            .iter()
            .zip(&g.velocity)
            .zip(&d)
            .map(|((a, b), c)| a - b - c)
            .collect();
        rows.push((eps, setup.h1_seminorm(&rem)));
    }
    Ok(FrechetReport { slope: log_log_slope(&rows), rows })
}

fn log_log_slope(rows: &[(f64, f64)]) -> Option<f64> {
    if rows.len() < 2 || rows.iter().any(|&(e, r)| !(e > 0.0 && r > 0.0)) {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(e, r)| (e.ln(), r.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
