//! Structural diagnostics for sparsity graphs: shortest paths, clustering,
//! and the spectral gap of the normalized adjacency.
//!
//! Masks are directed in general; diagnostics symmetrize them first (edge if
//! either direction is present) and drop self-loops, since the quantities
//! measured here are about undirected connectivity.

use crate::error::{Error, Result};
use crate::pattern::BlockMask;
use crate::rng::Rng64;
use serde::Serialize;
use std::collections::VecDeque;

/// Diagnostic summary of a sparsity graph.
///
/// `diameter` is `None` when the graph is disconnected (serialized as JSON
/// null); `second_eigenvalue_modulus` is likewise `None` when disconnected,
/// since deflating against the top eigenvector is meaningless there.
/// `clustering_coefficient` is the mean local coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct GraphReport {
    pub n_nodes: usize,
    pub avg_shortest_path: f64,
    pub diameter: Option<u64>,
    pub clustering_coefficient: f64,
    pub second_eigenvalue_modulus: Option<f64>,
    pub connected: bool,
}

pub const POWER_ITER_CAP: usize = 10_000;
pub const POWER_ITER_TOL: f64 = 1e-10;

/// Symmetrized, self-loop-free neighbor lists.
fn undirected_adjacency(mask: &BlockMask) -> Vec<Vec<usize>> {
    let n = mask.n_blocks();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for &j in mask.row(i) {
            if i == j {
                continue;
            }
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    adj
}

fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[source] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Exact all-pairs BFS statistics on the symmetrized mask.
///
/// Returns (average shortest path over connected ordered pairs, diameter,
/// connected). Self-distances are excluded from the average; a disconnected
/// graph reports `diameter = None`.
pub fn path_stats(mask: &BlockMask) -> (f64, Option<u64>, bool) {
    let adj = undirected_adjacency(mask);
    let n = adj.len();
    let mut sum = 0u128;
    let mut pairs = 0u128;
    let mut max = 0u64;
    let mut connected = true;
    for s in 0..n {
        let dist = bfs_distances(&adj, s);
        for (t, &d) in dist.iter().enumerate() {
            if t == s {
                continue;
            }
            if d == usize::MAX {
                connected = false;
            } else {
                sum += d as u128;
                pairs += 1;
                max = max.max(d as u64);
            }
        }
    }
    let avg = if pairs == 0 { 0.0 } else { sum as f64 / pairs as f64 };
    let diameter = if connected && n > 0 { Some(max) } else { None };
    (avg, diameter, connected && n > 0)
}

/// Mean local clustering coefficient: per node, the fraction of neighbor
/// pairs that are themselves adjacent; nodes of degree < 2 contribute 0.
pub fn clustering_coefficient(mask: &BlockMask) -> f64 {
    let adj = undirected_adjacency(mask);
    let n = adj.len();
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for v in 0..n {
        let nb = &adj[v];
        let deg = nb.len();
        if deg < 2 {
            continue;
        }
        let mut triangles = 0usize;
        for a in 0..deg {
            for b in (a + 1)..deg {
                if adj[nb[a]].binary_search(&nb[b]).is_ok() {
                    triangles += 1;
                }
            }
        }
        total += triangles as f64 / (deg * (deg - 1) / 2) as f64;
    }
    total / n as f64
}

/// |λ₂| of the degree-normalized adjacency D^(-1/2) A D^(-1/2), by power
/// iteration with deflation against the known top eigenvector D^(1/2)·1.
///
/// Errors on disconnected input (λ₂ = 1 there, deflation is meaningless) and
/// when the iteration cap is reached before `tol`.
pub fn spectral_gap(mask: &BlockMask, iters: usize, tol: f64) -> Result<f64> {
    let adj = undirected_adjacency(mask);
    let n = adj.len();
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "spectral gap needs at least 2 nodes, got {n}"
        )));
    }
    let (_, _, connected) = path_stats(mask);
    if !connected {
        return Err(Error::Disconnected);
    }
    let deg: Vec<f64> = adj.iter().map(|r| r.len() as f64).collect();
    let inv_sqrt_deg: Vec<f64> = deg.iter().map(|&d| 1.0 / d.sqrt()).collect();

    // Top eigenvector of the normalized adjacency, normalized to unit length.
    let mut phi: Vec<f64> = deg.iter().map(|&d| d.sqrt()).collect();
    let phi_norm = norm(&phi);
    phi.iter_mut().for_each(|x| *x /= phi_norm);

    // B v with B = D^(-1/2) A D^(-1/2).
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for &j in &adj[i] {
                acc += inv_sqrt_deg[j] * v[j];
            }
            out[i] = inv_sqrt_deg[i] * acc;
        }
        out
    };

    // Fixed-seed start vector, deflated against phi.
    let mut rng = Rng64::new(0x5EED_5EED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
    orthogonalize(&mut v, &phi);
    let vnorm = norm(&v);
    if vnorm == 0.0 {
        return Err(Error::InvalidConfig("start vector vanished under deflation".into()));
    }
    v.iter_mut().for_each(|x| *x /= vnorm);

    let mut estimate = f64::INFINITY;
    for _ in 0..iters {
        let mut bv = apply(&v);
        orthogonalize(&mut bv, &phi);
        let next = norm(&bv);
        if next == 0.0 {
            // Everything orthogonal to phi is in the kernel.
            return Ok(0.0);
        }
        bv.iter_mut().for_each(|x| *x /= next);
        v = bv;
        if (next - estimate).abs() < tol {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NoConvergence { iters })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [f64], unit: &[f64]) {
    let proj: f64 = v.iter().zip(unit).map(|(a, b)| a * b).sum();
    for (x, &u) in v.iter_mut().zip(unit) {
        *x -= proj * u;
    }
}

/// Run all diagnostics and assemble the report.
pub fn analyze(mask: &BlockMask) -> GraphReport {
    let (avg, diameter, connected) = path_stats(mask);
    let lambda2 = if connected && mask.n_blocks() >= 2 {
        spectral_gap(mask, POWER_ITER_CAP, POWER_ITER_TOL).ok()
    } else {
        None
    };
    GraphReport {
        n_nodes: mask.n_blocks(),
        avg_shortest_path: avg,
        diameter,
        clustering_coefficient: clustering_coefficient(mask),
        second_eigenvalue_modulus: lambda2,
        connected,
    }
}
