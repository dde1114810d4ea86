//! Gauss-Legendre rules and the quadrature settings used by the overlap
//! integral.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Tricomi initial guesses; nodes are
    /// returned in ascending order.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be at least 1");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
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
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let xs = self.nodes.iter().map(|&t| mid + half * t).collect();
        let ws = self.weights.iter().map(|&w| half * w).collect();
        (xs, ws)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Where the overlap integrand's coordinates are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Cavity corner; coordinates run over `[0, L_i]`.
    Corner,
    /// Cavity center; coordinates run over `[-L_i/2, L_i/2]`.
    Center,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Corner => "corner",
            Origin::Center => "center",
        }
    }
}

/// Adaptive tensor-product Gauss-Legendre settings. The order per axis starts
/// at `order` and doubles until two successive estimates agree to
/// `rtol·|A| + atol`, at most `max_refinements` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub order: usize,
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    pub max_refinements: usize,
    #[serde(default = "default_origin")]
    pub origin: Origin,
}

fn default_atol() -> f64 {
    1e-12
}

fn default_origin() -> Origin {
    Origin::Corner
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { order: 16, rtol: 1e-6, atol: default_atol(), max_refinements: 3, origin: Origin::Corner }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_three_point_rule() {
        let r = GaussLegendre::new(3);
        let s = (0.6f64).sqrt();
        assert!((r.nodes()[0] + s).abs() < 1e-15);
        assert_eq!(r.nodes()[1], 0.0);
        assert!((r.nodes()[2] - s).abs() < 1e-15);
        assert!((r.weights()[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((r.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in [1usize, 2, 5, 16, 33, 64] {
            let r = GaussLegendre::new(n);
            for deg in 0..(2 * n).min(40) {
                let s: f64 = r.nodes().iter().zip(r.weights()).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "n={n} deg={deg} {s} {exact}");
            }
        }
    }

    #[test]
    fn interval_mapping() {
        let r = GaussLegendre::new(8);
        let (xs, ws) = r.on_interval(1.0, 3.0);
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.exp()).sum();
        assert!((s - (3f64.exp() - 1f64.exp())).abs() < 1e-12);
    }

    #[test]
    fn settings_round_trip_through_toml() {
        let settings = QuadratureSpec { order: 32, ..Default::default() };
        let text = toml::to_string(&settings).unwrap();
        let back: QuadratureSpec = toml::from_str(&text).unwrap();
        assert_eq!(settings, back);
        assert!(toml::from_str::<QuadratureSpec>("order = 8\nrtol = 1e-6\nmax_refinements = 2\nbogus = 1").is_err());
    }
}
