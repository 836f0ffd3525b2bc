//! Gauss–Legendre quadrature.
//!
//! An `m`-point rule integrates polynomials of degree `2m - 1` exactly. Rules
//! are computed once per size (Newton iteration on the three-term Legendre
//! recurrence) and shared through a process-wide cache.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `points`-point rule on `[-1, 1]`.
    pub fn new(points: usize) -> Self {
        assert!(points > 0, "quadrature rule needs at least one node");
        let m = points;
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let half = m.div_ceil(2);
        for i in 0..half {
            // Tricomi-style starting guess for the i-th largest root.
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[m - 1 - i] = x;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Smallest rule that is exact for polynomials of degree `degree`.
    pub fn exact_for_degree(degree: usize) -> Self {
        Self::new(points_for_degree(degree))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes on `[-1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(node, weight)` pairs mapped onto `[0, 1]`. Every node is strictly interior.
    pub fn unit_interval(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Number of nodes needed for exact integration of a degree-`degree` polynomial.
pub fn points_for_degree(degree: usize) -> usize {
    degree / 2 + 1
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let (pm, pm1) = if m == 1 { (x, 1.0) } else { (p1, p0) };
    let d = m as f64 * (x * pm - pm1) / (x * x - 1.0);
    (pm, d)
}

fn cache() -> &'static RwLock<HashMap<usize, Arc<GaussLegendre>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared `points`-point rule.
pub fn cached(points: usize) -> Arc<GaussLegendre> {
    if let Some(rule) = cache().read().expect("quadrature cache poisoned").get(&points) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(GaussLegendre::new(points));
    let mut guard = cache().write().expect("quadrature cache poisoned");
    Arc::clone(guard.entry(points).or_insert(rule))
}
