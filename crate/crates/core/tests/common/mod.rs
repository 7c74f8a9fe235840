//! Shared test oracles: brute-force graph metrics, matching utilities
//! for recovery scoring, and reference samplers. Everything here is
//! independent of the library's computation paths it is used to check.

#![allow(dead_code)]

use mtopics::graph::InteractionGraph;
use mtopics::rng::{seeded, ChainRng};
use rand::Rng;

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Greedy minimum-TV matching of estimated rows to truth rows; returns
/// the mean TV over matched pairs.
pub fn greedy_matched_tv(estimated: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    let n = estimated.len().min(truth.len());
    let mut est_used = vec![false; estimated.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut total = 0.0;
    for _ in 0..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, e) in estimated.iter().enumerate() {
            if est_used[i] {
                continue;
            }
            for (j, t) in truth.iter().enumerate() {
                if truth_used[j] {
                    continue;
                }
                let tv = total_variation(e, t);
                if best.is_none_or(|(_, _, b)| tv < b) {
                    best = Some((i, j, tv));
                }
            }
        }
        let (i, j, tv) = best.expect("rows remain");
        est_used[i] = true;
        truth_used[j] = true;
        total += tv;
    }
    total / n as f64
}

/// Match estimated rows to truth rows greedily by TV and return the
/// column permutation `perm[estimated] = truth` it induces.
pub fn greedy_tv_permutation(estimated: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<usize> {
    let n = estimated.len();
    assert_eq!(n, truth.len());
    let mut perm = vec![usize::MAX; n];
    let mut est_used = vec![false; n];
    let mut truth_used = vec![false; n];
    for _ in 0..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if est_used[i] {
                continue;
            }
            for j in 0..n {
                if truth_used[j] {
                    continue;
                }
                let tv = total_variation(&estimated[i], &truth[j]);
                if best.is_none_or(|(_, _, b)| tv < b) {
                    best = Some((i, j, tv));
                }
            }
        }
        let (i, j, _) = best.expect("rows remain");
        est_used[i] = true;
        truth_used[j] = true;
        perm[i] = j;
    }
    perm
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out
}

/// Best label-permutation agreement between predicted and planted labels.
pub fn best_permutation_accuracy(predicted: &[u32], truth: &[u32], labels: usize) -> f64 {
    assert!(labels <= 8, "label permutation search is factorial");
    let mut best = 0usize;
    for perm in permutations(labels) {
        let hits = predicted
            .iter()
            .zip(truth)
            .filter(|(&p, &t)| perm[p as usize] == t as usize)
            .count();
        best = best.max(hits);
    }
    best as f64 / predicted.len() as f64
}

/// Inverse-CDF sampler for the discrete power law P(k) ∝ k^(−alpha),
/// k ≥ 1. The CDF table extends on demand, so no tail mass is clipped.
pub struct ZetaSampler {
    alpha: f64,
    z: f64,
    cdf: Vec<f64>,
}

impl ZetaSampler {
    pub fn new(alpha: f64) -> Self {
        // Direct sum plus an integral bound on the remainder.
        let cutoff = 1_000_000u64;
        let mut z = 0.0f64;
        for k in 1..=cutoff {
            z += (k as f64).powf(-alpha);
        }
        z += (cutoff as f64 + 0.5).powf(1.0 - alpha) / (alpha - 1.0);
        let mut s = ZetaSampler {
            alpha,
            z,
            cdf: Vec::new(),
        };
        s.extend_to(100_000);
        s
    }

    fn extend_to(&mut self, k: usize) {
        let mut acc = self.cdf.last().copied().unwrap_or(0.0);
        for i in self.cdf.len()..k {
            acc += ((i + 1) as f64).powf(-self.alpha) / self.z;
            self.cdf.push(acc);
        }
    }

    pub fn sample(&mut self, rng: &mut ChainRng) -> u64 {
        let u = rng.random::<f64>();
        loop {
            let idx = self.cdf.partition_point(|&c| c < u);
            if idx < self.cdf.len() {
                return idx as u64 + 1;
            }
            let grow = self.cdf.len() * 2;
            self.extend_to(grow);
        }
    }
}

fn graph_from_pairs(n: usize, pairs: &[(u32, u32)]) -> InteractionGraph {
    let ids = (0..n).map(|i| format!("n{i}")).collect();
    let weighted: Vec<(u32, u32, u32)> = pairs.iter().map(|&(s, t)| (s, t, 1)).collect();
    InteractionGraph::from_edges(ids, &weighted).unwrap()
}

/// Random connected graph: a random attachment tree plus extra edges.
pub fn random_connected_graph(n: usize, extra_edges: usize, seed: u64) -> InteractionGraph {
    let mut rng = seeded(seed);
    let mut pairs = Vec::new();
    for v in 1..n as u32 {
        let parent = rng.random_range(0..v);
        pairs.push((parent, v));
    }
    for _ in 0..extra_edges {
        let s = rng.random_range(0..n as u32);
        let t = rng.random_range(0..n as u32);
        if s != t {
            pairs.push((s, t));
        }
    }
    graph_from_pairs(n, &pairs)
}

/// Preferential-attachment graph: each new node links to `m` targets
/// chosen proportionally to degree (with repetition collapsed).
pub fn preferential_attachment(n: usize, m: usize, seed: u64) -> InteractionGraph {
    assert!(n > m && m >= 1);
    let mut rng = seeded(seed);
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    // Repeated-endpoint list: sampling an index uniformly is sampling
    // proportionally to degree.
    let mut endpoints: Vec<u32> = Vec::new();
    for v in 0..=m as u32 {
        for u in 0..v {
            pairs.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    for v in (m + 1) as u32..n as u32 {
        let mut targets = Vec::new();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if t != v && !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            pairs.push((v, t));
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    graph_from_pairs(n, &pairs)
}

/// All-pairs shortest-path distances by Floyd–Warshall (independent of
/// the library's BFS).
pub fn floyd_warshall(graph: &InteractionGraph) -> Vec<Vec<u64>> {
    let n = graph.node_count();
    const INF: u64 = u64::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    for (v, row) in dist.iter_mut().enumerate() {
        row[v] = 0;
    }
    for ((s, t), _) in graph.undirected_edges() {
        dist[s as usize][t as usize] = 1;
        dist[t as usize][s as usize] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let through = dist[i][k].saturating_add(dist[k][j]);
                if through < dist[i][j] {
                    dist[i][j] = through;
                }
            }
        }
    }
    dist
}

/// Shortest-path counts ways[s][v] for all sources, by DP over nodes in
/// increasing distance from s.
fn path_counts(graph: &InteractionGraph, dist: &[Vec<u64>]) -> Vec<Vec<f64>> {
    let n = graph.node_count();
    let adj = graph.undirected_adjacency();
    let mut ways = vec![vec![0.0f64; n]; n];
    for s in 0..n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| dist[s][v]);
        ways[s][s] = 1.0;
        for &v in &order {
            if v == s || dist[s][v] == 0 {
                continue;
            }
            let mut count = 0.0;
            for &u in &adj[v] {
                if dist[s][u as usize] + 1 == dist[s][v] {
                    count += ways[s][u as usize];
                }
            }
            ways[s][v] = count;
        }
    }
    ways
}

/// Definitional betweenness: for every unordered pair (s, t) sum the
/// fraction of shortest s–t paths through v, normalized by (n−1)(n−2)/2.
pub fn betweenness_oracle(graph: &InteractionGraph) -> Vec<f64> {
    let n = graph.node_count();
    if n <= 2 {
        return vec![0.0; n];
    }
    let dist = floyd_warshall(graph);
    let ways = path_counts(graph, &dist);
    let mut betweenness = vec![0.0f64; n];
    for s in 0..n {
        for t in s + 1..n {
            let sigma = ways[s][t];
            if sigma == 0.0 {
                continue;
            }
            for (v, b) in betweenness.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                if dist[s][v] + dist[v][t] == dist[s][t] {
                    *b += ways[s][v] * ways[v][t] / sigma;
                }
            }
        }
    }
    let norm = (n - 1) as f64 * (n - 2) as f64 / 2.0;
    for b in &mut betweenness {
        *b /= norm;
    }
    betweenness
}

/// Triple-loop clustering coefficient per node.
pub fn clustering_oracle(graph: &InteractionGraph) -> Vec<f64> {
    let n = graph.node_count();
    let mut adj = vec![vec![false; n]; n];
    for ((s, t), _) in graph.undirected_edges() {
        adj[s as usize][t as usize] = true;
        adj[t as usize][s as usize] = true;
    }
    (0..n)
        .map(|v| {
            let neighbors: Vec<usize> = (0..n).filter(|&u| adj[v][u]).collect();
            let d = neighbors.len();
            if d < 2 {
                return 0.0;
            }
            let mut closed = 0usize;
            for i in 0..d {
                for j in i + 1..d {
                    if adj[neighbors[i]][neighbors[j]] {
                        closed += 1;
                    }
                }
            }
            closed as f64 / (d * (d - 1) / 2) as f64
        })
        .collect()
}

/// Triple-loop transitivity: 3 × triangles / connected triples.
pub fn transitivity_oracle(graph: &InteractionGraph) -> f64 {
    let n = graph.node_count();
    let mut adj = vec![vec![false; n]; n];
    for ((s, t), _) in graph.undirected_edges() {
        adj[s as usize][t as usize] = true;
        adj[t as usize][s as usize] = true;
    }
    let mut triangles = 0u64;
    let mut triples = 0u64;
    for v in 0..n {
        for i in 0..n {
            for j in i + 1..n {
                if i == v || j == v {
                    continue;
                }
                if adj[v][i] && adj[v][j] {
                    triples += 1;
                    if adj[i][j] {
                        triangles += 1;
                    }
                }
            }
        }
    }
    if triples == 0 {
        0.0
    } else {
        triangles as f64 / triples as f64
    }
}
