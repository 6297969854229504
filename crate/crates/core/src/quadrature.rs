//! Gauss-Legendre nodes and the tagged cells they induce on [-1, 1].
//!
//! The cumulative weights split [-1, 1] into cells of length `w_i`, and each node lies
//! inside its own cell, so a Gauss rule is itself a tagged division.

use std::sync::OnceLock;

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `k + 1` cell boundaries from -1 to 1.
    pub cuts: Vec<f64>,
}

pub const MAX_ORDER: usize = 32;

fn legendre(k: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build(k: usize) -> GaussRule {
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..k.div_ceil(2) {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(k, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(k, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[k - 1 - i] = -x;
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    let mut cuts = Vec::with_capacity(k + 1);
    cuts.push(-1.0);
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        cuts.push(if i + 1 == k { 1.0 } else { acc - 1.0 });
    }
    // symmetric by construction; repair rounding drift
    for i in 0..k / 2 {
        let c = 0.5 * (cuts[k - i] - cuts[i]);
        cuts[i] = -c;
        cuts[k - i] = c;
    }
    if k % 2 == 0 {
        cuts[k / 2] = 0.0;
    }
    GaussRule { nodes, weights, cuts }
}

/// Cached rule of order `k` (1 to 32).
pub fn gauss_rule(k: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    assert!((1..=MAX_ORDER).contains(&k), "Gauss order {k} out of range");
    &RULES.get_or_init(|| (1..=MAX_ORDER).map(build).collect())[k - 1]
}
