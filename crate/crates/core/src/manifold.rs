//! Weighted graphs standing in for Riemannian manifolds.
//!
//! A vertex `v` carries a volume `mu(v)` and an edge `uv` a conductance `w(uv)`.
//! The generator
//!
//! ```text
//! (Δf)(v) = mu(v)^{-1} Σ_{u~v} w(uv) (f(u) - f(v))
//! ```
//!
//! annihilates constants and is self-adjoint for `<f, g> = Σ mu f g`.

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// An undirected edge with its conductance and optional product-factor label.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub w: f64,
    pub tag: Option<String>,
}

impl Edge {
    pub fn new(a: usize, b: usize, w: f64) -> Self {
        Edge { a, b, w, tag: None }
    }

    pub fn tagged(a: usize, b: usize, w: f64, tag: &str) -> Self {
        Edge {
            a,
            b,
            w,
            tag: Some(tag.to_string()),
        }
    }

    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightedGraphManifold {
    mu: Vec<f64>,
    edges: Vec<Edge>,
    dim_hint: usize,
    offsets: Vec<usize>,
    // (neighbor, edge index), grouped by vertex through `offsets`
    adjacency: Vec<(usize, usize)>,
}

impl PartialEq for WeightedGraphManifold {
    fn eq(&self, other: &Self) -> bool {
        self.mu == other.mu && self.edges == other.edges && self.dim_hint == other.dim_hint
    }
}

impl WeightedGraphManifold {
    /// Validates and indexes a weighted graph. The graph must be connected,
    /// with positive volumes and conductances, no self-loops and no parallel edges.
    pub fn new(mu: Vec<f64>, edges: Vec<Edge>, dim_hint: usize) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return invalid("graph has no vertices");
        }
        if let Some(v) = mu.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
            return invalid(format!("vertex {v} has non-positive volume {}", mu[v]));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if e.a >= n || e.b >= n {
                return invalid(format!("edge {i} ({}, {}) references a missing vertex", e.a, e.b));
            }
            if e.a == e.b {
                return invalid(format!("edge {i} is a self-loop at vertex {}", e.a));
            }
            if !(e.w.is_finite() && e.w > 0.0) {
                return invalid(format!("edge {i} has non-positive conductance {}", e.w));
            }
            if !seen.insert((e.a.min(e.b), e.a.max(e.b))) {
                return invalid(format!("duplicate edge ({}, {})", e.a, e.b));
            }
        }
        if !is_connected(n, &edges) {
            return invalid("graph is disconnected");
        }
        let (offsets, adjacency) = build_adjacency(n, &edges);
        Ok(WeightedGraphManifold {
            mu,
            edges,
            dim_hint,
            offsets,
            adjacency,
        })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn dim_hint(&self) -> usize {
        self.dim_hint
    }

    pub fn volume(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// Neighbors of `v` as `(neighbor, edge index)` pairs.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Total conductance incident to `v`.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.neighbors(v).iter().map(|&(_, e)| self.edges[e].w).sum()
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.edges.iter().any(|e| e.tag.as_deref() == Some(tag))
    }

    /// Applies the generator Δ (non-positive operator).
    pub fn apply_generator(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.len(), "field length does not match host");
        (0..self.len())
            .map(|v| {
                let s: f64 = self
                    .neighbors(v)
                    .iter()
                    .map(|&(u, e)| self.edges[e].w * (f[u] - f[v]))
                    .sum();
                s / self.mu[v]
            })
            .collect()
    }

    /// `<f, g>_mu`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.mu
            .iter()
            .zip(f.iter().zip(g))
            .map(|(m, (a, b))| m * a * b)
            .sum()
    }

    /// `Σ mu f / Σ mu`.
    pub fn mean(&self, f: &[f64]) -> f64 {
        let s: f64 = self.mu.iter().zip(f).map(|(m, x)| m * x).sum();
        s / self.volume()
    }

    /// Breadth-first graph distance from a vertex set; `usize::MAX` when unreachable.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(v) = queue.pop_front() {
            for &(u, _) in self.neighbors(v) {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

pub(crate) fn build_adjacency(n: usize, edges: &[Edge]) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut degree = vec![0usize; n];
    for e in edges {
        degree[e.a] += 1;
        degree[e.b] += 1;
    }
    let mut offsets = vec![0usize; n + 1];
    for v in 0..n {
        offsets[v + 1] = offsets[v] + degree[v];
    }
    let mut fill = offsets.clone();
    let mut adjacency = vec![(0, 0); offsets[n]];
    for (i, e) in edges.iter().enumerate() {
        adjacency[fill[e.a]] = (e.b, i);
        fill[e.a] += 1;
        adjacency[fill[e.b]] = (e.a, i);
        fill[e.b] += 1;
    }
    (offsets, adjacency)
}

pub(crate) fn is_connected(n: usize, edges: &[Edge]) -> bool {
    if n == 0 {
        return false;
    }
    let (offsets, adjacency) = build_adjacency(n, edges);
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &(u, _) in &adjacency[offsets[v]..offsets[v + 1]] {
            if !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == n
}

/// Discretized circle: `n` vertices at spacing `h = circumference / n`,
/// volumes `h` and conductances `1/h`.
pub fn build_cycle(n: usize, circumference: f64) -> Result<WeightedGraphManifold> {
    if n < 3 {
        return invalid(format!("cycle needs at least 3 vertices, got {n}"));
    }
    if !(circumference.is_finite() && circumference > 0.0) {
        return invalid(format!("circumference must be positive, got {circumference}"));
    }
    let h = circumference / n as f64;
    let edges = (0..n).map(|i| Edge::new(i, (i + 1) % n, 1.0 / h)).collect();
    WeightedGraphManifold::new(vec![h; n], edges, 1)
}

/// Discretized interval with reflecting ends: volumes `h`, conductances `1/h`.
pub fn build_path(n: usize, spacing: f64) -> Result<WeightedGraphManifold> {
    if n < 2 {
        return invalid(format!("path needs at least 2 vertices, got {n}"));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return invalid(format!("spacing must be positive, got {spacing}"));
    }
    let edges = (0..n - 1).map(|i| Edge::new(i, i + 1, 1.0 / spacing)).collect();
    WeightedGraphManifold::new(vec![spacing; n], edges, 1)
}

/// The flat torus 𝕋^d as a d-fold product of cycles with side length `side`.
pub fn build_torus(d: usize, n: usize, side: f64) -> Result<WeightedGraphManifold> {
    if d == 0 {
        return invalid("torus dimension must be at least 1");
    }
    let cycle = build_cycle(n, side)?;
    let mut torus = cycle.clone();
    for _ in 1..d {
        torus = product_tagged(&torus, &cycle, None, None);
    }
    Ok(torus)
}

/// Product graph with factor tags `"A"` and `"B"`.
pub fn product(a: &WeightedGraphManifold, b: &WeightedGraphManifold) -> WeightedGraphManifold {
    product_tagged(a, b, Some("A"), Some("B"))
}

/// Product graph `A × B`; vertex `(i, j)` has index `j * |A| + i`.
///
/// Volumes multiply and an `A`-edge at level `j` gets conductance
/// `w_A · mu_B(j)`, so that `Δ_{A×B} = Δ_A ⊗ I + I ⊗ Δ_B`. A `None` tag keeps
/// the factor's own edge labels.
pub fn product_tagged(
    a: &WeightedGraphManifold,
    b: &WeightedGraphManifold,
    tag_a: Option<&str>,
    tag_b: Option<&str>,
) -> WeightedGraphManifold {
    let na = a.len();
    let idx = |i: usize, j: usize| j * na + i;
    let mut mu = Vec::with_capacity(na * b.len());
    for mb in b.mu() {
        for ma in a.mu() {
            mu.push(ma * mb);
        }
    }
    let retag = |own: &Option<String>, forced: Option<&str>| match forced {
        Some(t) => Some(t.to_string()),
        None => own.clone(),
    };
    let mut edges = Vec::with_capacity(a.edges().len() * b.len() + b.edges().len() * na);
    for (j, mb) in b.mu().iter().enumerate() {
        for e in a.edges() {
            edges.push(Edge {
                a: idx(e.a, j),
                b: idx(e.b, j),
                w: e.w * mb,
                tag: retag(&e.tag, tag_a),
            });
        }
    }
    for (i, ma) in a.mu().iter().enumerate() {
        for e in b.edges() {
            edges.push(Edge {
                a: idx(i, e.a),
                b: idx(i, e.b),
                w: e.w * ma,
                tag: retag(&e.tag, tag_b),
            });
        }
    }
    let (offsets, adjacency) = build_adjacency(mu.len(), &edges);
    // products of connected graphs are connected and inherit positivity
    WeightedGraphManifold {
        mu,
        edges,
        dim_hint: a.dim_hint() + b.dim_hint(),
        offsets,
        adjacency,
    }
}

/// A connected graph with random volumes and conductances in `[0.5, 2]`:
/// a Hamiltonian path plus each remaining pair joined with probability `chord_prob`.
pub fn build_random(n: usize, chord_prob: f64, seed: u64) -> Result<WeightedGraphManifold> {
    if n < 2 {
        return invalid(format!("random graph needs at least 2 vertices, got {n}"));
    }
    if !(0.0..=1.0).contains(&chord_prob) {
        return invalid(format!("chord probability {chord_prob} outside [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let mut edges: Vec<Edge> = (0..n - 1)
        .map(|i| Edge::new(i, i + 1, rng.gen_range(0.5..2.0)))
        .collect();
    for i in 0..n {
        for j in i + 2..n {
            if rng.gen::<f64>() < chord_prob {
                edges.push(Edge::new(i, j, rng.gen_range(0.5..2.0)));
            }
        }
    }
    WeightedGraphManifold::new(mu, edges, 1)
}
