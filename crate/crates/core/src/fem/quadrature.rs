//! Quadrature rules on the reference triangle `(0,0), (1,0), (0,1)`.

use std::f64::consts::PI;

/// Points in barycentric coordinates; weights sum to the reference area 1/2.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    /// Seven-point rule exact for polynomials of total degree 5.
    pub fn degree5() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w0 = 9.0 / 40.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;

        let mut points = vec![[1.0 / 3.0; 3]];
        let mut weights = vec![w0];
        for (a, w) in [(a1, w1), (a2, w2)] {
            let b = 1.0 - 2.0 * a;
            points.extend([[b, a, a], [a, b, a], [a, a, b]]);
            weights.extend([w; 3]);
        }
        for w in &mut weights {
            *w *= 0.5;
        }
        QuadratureRule { points, weights, degree: 5 }
    }

    /// Collapsed (Duffy) Gauss-Legendre product rule exact to at least `degree`.
    pub fn collapsed(degree: usize) -> Self {
        // x = u, y = (1-u) v, dx dy = (1-u) du dv; monomials become degree <= d+1 in u.
        let n = (degree + 2).div_ceil(2).max(1);
        let (nodes, w) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (u, wu) in nodes.iter().zip(&w) {
            for (v, wv) in nodes.iter().zip(&w) {
                let x = *u;
                let y = (1.0 - u) * v;
                points.push([1.0 - x - y, x, y]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        QuadratureRule { points, weights, degree: 2 * n - 2 }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference coordinates `(xi, eta)` of point `q`.
    pub fn reference_point(&self, q: usize) -> [f64; 2] {
        [self.points[q][1], self.points[q][2]]
    }
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Exact integral of x^a y^b over the reference triangle.
    fn monomial_integral(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn check_exactness(rule: &QuadratureRule) {
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 0.5).abs() < 1e-15);
        for a in 0..=rule.degree as u32 {
            for b in 0..=(rule.degree as u32 - a) {
                let approx: f64 = (0..rule.len())
                    .map(|q| {
                        let [x, y] = rule.reference_point(q);
                        rule.weights[q] * x.powi(a as i32) * y.powi(b as i32)
                    })
                    .sum();
                let exact = monomial_integral(a, b);
                assert!(
                    ((approx - exact) / exact).abs() < 1e-13,
                    "x^{a} y^{b}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn seven_point_rule_is_degree_five_exact() {
        let rule = QuadratureRule::degree5();
        assert_eq!(rule.len(), 7);
        check_exactness(&rule);
    }

    #[test]
    fn seven_point_rule_is_not_degree_six_exact() {
        let rule = QuadratureRule::degree5();
        let approx: f64 = (0..rule.len())
            .map(|q| rule.weights[q] * rule.reference_point(q)[0].powi(6))
            .sum();
        assert!((approx - monomial_integral(6, 0)).abs() > 1e-8);
    }

    #[test]
    fn collapsed_rules_meet_their_degree() {
        for d in [1, 4, 7, 10] {
            let rule = QuadratureRule::collapsed(d);
            assert!(rule.degree >= d);
            check_exactness(&rule);
        }
    }

    #[test]
    fn gauss_legendre_weights_sum_to_one() {
        for n in 1..8 {
            let (x, w) = gauss_legendre_unit(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(x.iter().all(|&t| t > 0.0 && t < 1.0));
        }
    }
}
