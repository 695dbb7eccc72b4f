//! Gauss–Legendre rules and composite panels.

use crate::prelude::*;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let pi = core::f64::consts::PI;
    for i in 0..(n + 1) / 2 {
        let mut x = (pi * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule with `per_panel` nodes on each interval `[edges[i], edges[i+1]]`.
pub fn composite(edges: &[f64], per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(per_panel);
    let mut nodes = Vec::with_capacity(per_panel * edges.len());
    let mut weights = Vec::with_capacity(per_panel * edges.len());
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(0.5 * (a + b) + 0.5 * (b - a) * xi);
            weights.push(0.5 * (b - a) * wi);
        }
    }
    (nodes, weights)
}

/// Panel edges: `graded` geometric panels on `[lo, knee]` followed by
/// `uniform` equal panels on `[knee, hi]`.
pub fn graded_edges(lo: f64, knee: f64, hi: f64, graded: usize, uniform: usize) -> Vec<f64> {
    let mut edges = Vec::with_capacity(graded + uniform + 1);
    let ratio = (knee / lo).ln();
    for i in 0..=graded {
        edges.push(lo * (ratio * i as f64 / graded as f64).exp());
    }
    *edges.last_mut().expect("at least one edge") = knee;
    for i in 1..=uniform {
        edges.push(knee + (hi - knee) * i as f64 / uniform as f64);
    }
    edges
}
