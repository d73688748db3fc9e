//! Depth-m Anderson mixing of Newton outputs in the H1 seminorm.
//!
//! Each step stores `(ũ_k, y_k)`; the mix returns
//! `u_k = (1 − Σγ_i) ũ_k + Σ γ_i ũ_{k−i}` with `γ` minimizing
//! `‖∇((1 − Σγ_i) y_k + Σ γ_i y_{k−i})‖` over a window of `min(k − 1, m)`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_anderson_ls, CsrMatrix, DenseLsProblem};
use crate::nse::State;

/// Tolerance of the optional direct re-evaluation of the gain.
pub const GAIN_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
struct Entry {
    output: State,
    y: Vec<f64>,
    ay: Vec<f64>,
    /// `(y_j, y_self)_A` for every older entry `j` still buffered, oldest first, then self.
    inner: VecDeque<f64>,
}

#[derive(Debug, Clone)]
pub struct AndersonHistory {
    depth: usize,
    entries: VecDeque<Entry>,
    force_passthrough: bool,
    check_gain: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixResult {
    pub state: State,
    /// `γ_1..γ_{m_k}`, `γ_i` multiplying `ũ_{k−i}`.
    pub gamma: Vec<f64>,
    pub theta: f64,
    pub degenerate: bool,
    /// `‖∇y_k‖`.
    pub residual_norm: f64,
    /// `‖∇(y_k − y_{k−1})‖` when the window is non-empty.
    pub difference_norm: Option<f64>,
}

impl AndersonHistory {
    pub fn new(depth: usize) -> Self {
        AndersonHistory { depth, entries: VecDeque::with_capacity(depth + 1), force_passthrough: false, check_gain: false }
    }

    /// Every mix returns `ũ_k` unchanged, as plain Newton would.
    pub fn with_forced_passthrough(mut self, on: bool) -> Self {
        self.force_passthrough = on;
        self
    }

    /// Re-evaluate the mixed residual directly and fail if it disagrees with the reported gain.
    pub fn with_gain_check(mut self, on: bool) -> Self {
        self.check_gain = on;
        self
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Window size the next [`mix`](Self::mix) uses.
    pub fn window(&self) -> usize {
        self.entries.len().saturating_sub(1).min(self.depth)
    }

    /// Buffered outputs, oldest first.
    pub fn outputs(&self) -> impl Iterator<Item = &State> {
        self.entries.iter().map(|e| &e.output)
    }

    /// Buffered residuals, oldest first.
    pub fn residuals(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.iter().map(|e| e.y.as_slice())
    }

    /// Cached `(y_i, y_j)_A`, buffer positions oldest first.
    pub fn cached_inner(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.entries[hi].inner[lo]
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Append `(ũ_k, y_k)`; `gram` is the H1-seminorm Gram matrix.
    pub fn push(&mut self, gram: &CsrMatrix, output: State, y: Vec<f64>) -> Result<()> {
        if y.len() != gram.nrows() {
            return Err(Error::DimensionMismatch { what: "anderson residual", expected: gram.nrows(), got: y.len() });
        }
        if output.velocity.len() != y.len() {
            return Err(Error::DimensionMismatch { what: "anderson output", expected: y.len(), got: output.velocity.len() });
        }
        if let Some(first) = self.entries.front() {
            if output.pressure.len() != first.output.pressure.len() {
                return Err(Error::DimensionMismatch {
                    what: "anderson output pressure",
                    expected: first.output.pressure.len(),
                    got: output.pressure.len(),
                });
            }
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("anderson residual"));
        }
        if self.entries.len() == self.depth + 1 {
            self.entries.pop_front();
            for e in &mut self.entries {
                e.inner.pop_front();
            }
        }
        let ay = gram.mul_vec(&y);
        let mut inner: VecDeque<f64> = self.entries.iter().map(|e| dot(&ay, &e.y)).collect();
        inner.push_back(dot(&ay, &y));
        self.entries.push_back(Entry { output, y, ay, inner });
        Ok(())
    }

    /// Mix the newest entry with up to `m` predecessors.
    pub fn mix(&self) -> Result<MixResult> {
        let Some(newest) = self.entries.back() else {
            return Err(Error::InvalidArgument("mix on an empty history".into()));
        };
        let k = self.entries.len() - 1;
        let mk = self.window();
        let y_sq = newest.inner[k];
        let residual_norm = y_sq.max(0.0).sqrt();

        // c(a, b) over buffer positions; D'_i = y_{k−i+1} − y_{k−i}.
        let c = |a: usize, b: usize| self.cached_inner(a, b);
        let diff = |i: usize, j: usize| {
            let (a, b) = (k + 1 - i, k - i);
            let (p, q) = (k + 1 - j, k - j);
            c(a, p) - c(a, q) - c(b, p) + c(b, q)
        };
        let difference_norm = (mk >= 1).then(|| diff(1, 1).max(0.0).sqrt());

        let passthrough = |degenerate| MixResult {
            state: newest.output.clone(),
            gamma: vec![0.0; mk],
            theta: 1.0,
            degenerate,
            residual_norm,
            difference_norm,
        };
        if mk == 0 {
            return Ok(passthrough(false));
        }
        if self.force_passthrough || y_sq <= 0.0 {
            return Ok(passthrough(true));
        }

        let gram = DMatrix::from_fn(mk, mk, |i, j| diff(i + 1, j + 1));
        let rhs = DVector::from_fn(mk, |i, _| c(k, k - i) - c(k, k - i - 1));
        let problem = DenseLsProblem::new(gram, rhs);
        let solution = solve_anderson_ls(&problem);
        if solution.degenerate {
            return Ok(passthrough(true));
        }
        let eta = &solution.coefficients;
        let gamma: Vec<f64> = (0..mk).map(|i| eta[i] - eta.get(i + 1).copied().unwrap_or(0.0)).collect();
        let minimized = problem.objective(y_sq, eta).max(0.0);
        let theta = (minimized / y_sq).sqrt().min(1.0);

        let mut terms = vec![(1.0 - gamma.iter().sum::<f64>(), &newest.output)];
        for (i, g) in gamma.iter().enumerate() {
            terms.push((*g, &self.entries[k - i - 1].output));
        }
        let state = State::combination(&terms);

        if self.check_gain {
            let direct = self.mixed_residual_norm(&gamma);
            let reported = theta * residual_norm;
            if (direct - reported).abs() > GAIN_CHECK_TOL * residual_norm.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidArgument(format!(
                    "anderson gain mismatch: reported {reported:e}, recomputed {direct:e}"
                )));
            }
        }

        Ok(MixResult { state, gamma, theta, degenerate: false, residual_norm, difference_norm })
    }

    /// `‖∇((1 − Σγ) y_k + Σ γ_i y_{k−i})‖` evaluated from stored vectors.
    pub fn mixed_residual_norm(&self, gamma: &[f64]) -> f64 {
        let k = self.entries.len() - 1;
        let w0 = 1.0 - gamma.iter().sum::<f64>();
        let mut y: Vec<f64> = self.entries[k].y.iter().map(|v| w0 * v).collect();
        let mut ay: Vec<f64> = self.entries[k].ay.iter().map(|v| w0 * v).collect();
        for (i, g) in gamma.iter().enumerate() {
            let e = &self.entries[k - i - 1];
            y.iter_mut().zip(&e.y).for_each(|(a, b)| *a += g * b);
            ay.iter_mut().zip(&e.ay).for_each(|(a, b)| *a += g * b);
        }
        dot(&y, &ay).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(v: &[f64]) -> State {
        State { velocity: v.to_vec(), pressure: vec![v.iter().sum()] }
    }

    fn id(n: usize) -> CsrMatrix {
        CsrMatrix::identity(n)
    }

    fn spd(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.5));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn single_push_passes_through() {
        let mut h = AndersonHistory::new(3);
        h.push(&id(2), state(&[1.0, 2.0]), vec![1.0, 0.0]).unwrap();
        assert_eq!(h.window(), 0);
        let r = h.mix().unwrap();
        assert_eq!(r.state, state(&[1.0, 2.0]));
        assert!(r.gamma.is_empty());
        assert_eq!(r.theta, 1.0);
    }

    #[test]
    fn ring_keeps_newest_entries() {
        let mut h = AndersonHistory::new(2);
        for k in 1..=5 {
            h.push(&id(1), state(&[k as f64]), vec![k as f64]).unwrap();
        }
        let kept: Vec<f64> = h.outputs().map(|s| s.velocity[0]).collect();
        assert_eq!(kept, vec![3.0, 4.0, 5.0]);
        assert_eq!(h.window(), 2);
    }

    #[test]
    fn orthogonal_unit_residuals() {
        let mut h = AndersonHistory::new(1);
        h.push(&id(2), state(&[0.0, 0.0]), vec![0.0, 1.0]).unwrap();
        h.push(&id(2), state(&[1.0, 0.0]), vec![1.0, 0.0]).unwrap();
        let r = h.mix().unwrap();
        assert!((r.gamma[0] - 0.5).abs() < 1e-15);
        assert!((r.theta - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.state.velocity, vec![0.5, 0.0]);
    }

    #[test]
    fn repeated_residual_is_degenerate() {
        let mut h = AndersonHistory::new(1);
        h.push(&id(2), state(&[0.0, 0.0]), vec![0.3, 0.4]).unwrap();
        h.push(&id(2), state(&[1.0, 5.0]), vec![0.3, 0.4]).unwrap();
        let r = h.mix().unwrap();
        assert!(r.degenerate);
        assert_eq!(r.gamma, vec![0.0]);
        assert_eq!(r.theta, 1.0);
        assert_eq!(r.state, state(&[1.0, 5.0]));
    }

    #[test]
    fn collinear_window_collapses_to_depth_one() {
        let a = spd(3);
        let ys = [vec![0.2, -0.1, 0.4], vec![0.2, -0.1, 0.4], vec![0.05, 0.3, -0.2]];
        let outs = [state(&[1.0, 0.0, 0.0]), state(&[0.0, 1.0, 0.0]), state(&[0.0, 0.0, 1.0])];
        let mut h2 = AndersonHistory::new(2);
        let mut h1 = AndersonHistory::new(1);
        for (o, y) in outs.iter().zip(&ys) {
            h2.push(&a, o.clone(), y.clone()).unwrap();
            h1.push(&a, o.clone(), y.clone()).unwrap();
        }
        let r2 = h2.mix().unwrap();
        let r1 = h1.mix().unwrap();
        assert_eq!(r2.gamma[1], 0.0);
        assert_eq!(r2.gamma[0], r1.gamma[0]);
        assert_eq!(r2.state, r1.state);
        assert_eq!(r2.theta, r1.theta);
    }

    #[test]
    fn forced_passthrough_returns_output() {
        let mut h = AndersonHistory::new(2).with_forced_passthrough(true);
        h.push(&id(2), state(&[0.0, 0.0]), vec![0.0, 1.0]).unwrap();
        h.push(&id(2), state(&[1.0, 0.5]), vec![1.0, 0.0]).unwrap();
        let r = h.mix().unwrap();
        assert!(r.degenerate);
        assert_eq!(r.state, state(&[1.0, 0.5]));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut h = AndersonHistory::new(1);
        assert!(h.push(&id(3), state(&[1.0, 2.0]), vec![1.0, 0.0]).is_err());
        assert!(h.push(&id(2), state(&[1.0, 2.0, 3.0]), vec![1.0, 0.0]).is_err());
        assert!(AndersonHistory::new(1).mix().is_err());
    }

    fn vectors(n: usize, count: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, n), count)
    }

    proptest! {
        #[test]
        fn cache_matches_recomputation(ys in vectors(6, 7), depth in 0usize..4) {
            let a = spd(6);
            let mut h = AndersonHistory::new(depth);
            for y in ys {
                h.push(&a, state(&y), y).unwrap();
                let stored: Vec<&[f64]> = h.residuals().collect();
                for i in 0..stored.len() {
                    for j in 0..stored.len() {
                        let fresh = a.inner(stored[i], stored[j]);
                        let cached = h.cached_inner(i, j);
                        prop_assert!((fresh - cached).abs() <= 1e-12 * fresh.abs().max(1e-300) + 1e-15);
                    }
                }
            }
        }

        #[test]
        fn gain_is_bounded_and_matches_direct_norm(ys in vectors(5, 4), depth in 1usize..4) {
            let a = spd(5);
            let mut h = AndersonHistory::new(depth).with_gain_check(true);
            for (k, y) in ys.into_iter().enumerate() {
                h.push(&a, state(&[k as f64; 5]), y).unwrap();
                let r = h.mix().unwrap();
                prop_assert!(r.theta <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn depth_one_identity(y0 in proptest::collection::vec(-1.0f64..1.0, 4), y1 in proptest::collection::vec(-1.0f64..1.0, 4)) {
            let a = spd(4);
            let mut h = AndersonHistory::new(1);
            h.push(&a, state(&[0.0; 4]), y0).unwrap();
            h.push(&a, state(&[1.0; 4]), y1).unwrap();
            let r = h.mix().unwrap();
            if !r.degenerate {
                let d = r.difference_norm.unwrap();
                let rhs = (1.0 - r.theta * r.theta).max(0.0).sqrt() * r.residual_norm / d;
                prop_assert!((r.gamma[0].abs() - rhs).abs() <= 1e-10 * r.gamma[0].abs().max(1.0));
            }
        }

        #[test]
        fn larger_window_never_worse(ys in vectors(5, 4)) {
            let a = spd(5);
            let mut best = f64::INFINITY;
            for depth in 0..=3usize {
                let mut h = AndersonHistory::new(depth);
                for (k, y) in ys.iter().enumerate() {
                    h.push(&a, state(&[k as f64; 5]), y.clone()).unwrap();
                }
                let r = h.mix().unwrap();
                let value = r.theta * r.residual_norm;
                prop_assert!(value <= best * (1.0 + 1e-9) + 1e-12);
                best = value;
            }
        }
    }
}
