//! Node- and graph-level metrics of a connected undirected mention
//! graph: degree, clustering, eccentricity, average neighbor degree,
//! betweenness (Brandes), closeness, density, radius/diameter, and
//! transitivity. Metrics are computed on the unweighted undirected
//! view; edge weights are export-only.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::parallel;

/// One row of the node-level report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMetrics {
    pub user_id: String,
    pub degree: usize,
    pub clustering_coefficient: f64,
    pub eccentricity: usize,
    pub average_neighbor_degree: f64,
    pub betweenness_centrality: f64,
    pub closeness_centrality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphMetrics {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub radius: usize,
    pub diameter: usize,
    pub transitivity: f64,
}

fn require_connected(adj: &[Vec<u32>]) -> Result<()> {
    let n = adj.len();
    if n == 0 {
        return Err(Error::Disconnected("graph has no nodes".into()));
    }
    let dist = bfs_distances(adj, 0);
    if dist.iter().any(|&d| d == u32::MAX) {
        return Err(Error::Disconnected(
            "metrics require a connected graph; extract the LCC first".into(),
        ));
    }
    Ok(())
}

pub(crate) fn bfs_distances(adj: &[Vec<u32>], source: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if dist[u as usize] == u32::MAX {
                dist[u as usize] = dist[v] + 1;
                queue.push_back(u as usize);
            }
        }
    }
    dist
}

/// Triangles through each node, via sorted-adjacency intersection.
fn triangles_per_node(adj: &[Vec<u32>]) -> Vec<u64> {
    parallel::map_range(adj.len(), |v| {
        let mut tri = 0u64;
        for &u in &adj[v] {
            // Count common neighbors once per (u, w) pair with u < w by
            // intersecting sorted lists.
            let (mut i, mut j) = (0usize, 0usize);
            let a = &adj[v];
            let b = &adj[u as usize];
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        tri += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        // Each triangle at v was counted once per incident edge pair
        // direction, i.e. twice.
        tri / 2
    })
}

/// Brandes dependency accumulation from one source. Returns the per-node
/// contribution (zero at the source itself).
fn brandes_from_source(adj: &[Vec<u32>], source: usize) -> Vec<f64> {
    let n = adj.len();
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![i64::MAX; n];
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut order: Vec<u32> = Vec::with_capacity(n);
    sigma[source] = 1.0;
    dist[source] = 0;
    let mut queue = VecDeque::from([source as u32]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &u in &adj[v as usize] {
            let (ui, vi) = (u as usize, v as usize);
            if dist[ui] == i64::MAX {
                dist[ui] = dist[vi] + 1;
                queue.push_back(u);
            }
            if dist[ui] == dist[vi] + 1 {
                sigma[ui] += sigma[vi];
                preds[ui].push(v);
            }
        }
    }
    let mut delta = vec![0.0f64; n];
    for &w in order.iter().rev() {
        let wi = w as usize;
        let coeff = (1.0 + delta[wi]) / sigma[wi];
        for &v in &preds[wi] {
            delta[v as usize] += sigma[v as usize] * coeff;
        }
    }
    delta[source] = 0.0;
    delta
}

/// Betweenness for every node, normalized to [0, 1] by (n−1)(n−2)/2
/// unordered pairs. Sources are processed in fixed chunks and summed in
/// index order, so the floating-point result is thread-count independent.
pub(crate) fn betweenness(adj: &[Vec<u32>]) -> Vec<f64> {
    let n = adj.len();
    if n <= 2 {
        return vec![0.0; n];
    }
    let mut acc = vec![0.0f64; n];
    const CHUNK: usize = 256;
    let mut start = 0usize;
    while start < n {
        let end = (start + CHUNK).min(n);
        let partials: Vec<Vec<f64>> =
            parallel::map_range(end - start, |j| brandes_from_source(adj, start + j));
        for partial in partials {
            for (a, p) in acc.iter_mut().zip(partial) {
                *a += p;
            }
        }
        start = end;
    }
    // Each unordered pair was accumulated from both endpoints; the spec
    // normalization divides by (n−1)(n−2)/2.
    let scale = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
    for a in &mut acc {
        *a *= scale;
    }
    acc
}

/// Per-node metrics of a connected undirected graph.
pub fn node_metrics(graph: &InteractionGraph) -> Result<Vec<NodeMetrics>> {
    let adj = graph.undirected_adjacency();
    require_connected(&adj)?;
    let n = adj.len();
    let triangles = triangles_per_node(&adj);
    let betweenness = betweenness(&adj);
    let distances: Vec<Vec<u32>> = parallel::map_range(n, |v| bfs_distances(&adj, v));

    let mut rows = Vec::with_capacity(n);
    for v in 0..n {
        let degree = adj[v].len();
        let clustering = if degree < 2 {
            0.0
        } else {
            triangles[v] as f64 / (degree as f64 * (degree - 1) as f64 / 2.0)
        };
        let average_neighbor_degree = if degree == 0 {
            0.0
        } else {
            adj[v].iter().map(|&u| adj[u as usize].len() as f64).sum::<f64>() / degree as f64
        };
        let eccentricity = distances[v].iter().copied().max().unwrap_or(0) as usize;
        let dist_sum: u64 = distances[v].iter().map(|&d| d as u64).sum();
        let closeness = if dist_sum == 0 {
            0.0
        } else {
            (n - 1) as f64 / dist_sum as f64
        };
        rows.push(NodeMetrics {
            user_id: graph.user_id(v as u32).to_string(),
            degree,
            clustering_coefficient: clustering,
            eccentricity,
            average_neighbor_degree,
            betweenness_centrality: betweenness[v],
            closeness_centrality: closeness,
        });
    }
    Ok(rows)
}

/// Graph-level metrics of a connected undirected graph with ≥ 2 nodes.
pub fn graph_metrics(graph: &InteractionGraph) -> Result<GraphMetrics> {
    let adj = graph.undirected_adjacency();
    require_connected(&adj)?;
    let n = adj.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "density is undefined for graphs with fewer than 2 nodes".into(),
        ));
    }
    let edges = adj.iter().map(Vec::len).sum::<usize>() / 2;
    let density = 2.0 * edges as f64 / (n as f64 * (n - 1) as f64);
    let eccentricities: Vec<u32> = parallel::map_range(n, |v| {
        bfs_distances(&adj, v).into_iter().max().unwrap_or(0)
    });
    let radius = *eccentricities.iter().min().expect("n >= 2") as usize;
    let diameter = *eccentricities.iter().max().expect("n >= 2") as usize;
    let triangles = triangles_per_node(&adj);
    let closed_triples: u64 = triangles.iter().sum();
    let triples: u64 = adj
        .iter()
        .map(|row| {
            let d = row.len() as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    let transitivity = if triples == 0 {
        0.0
    } else {
        closed_triples as f64 / triples as f64
    };
    Ok(GraphMetrics {
        nodes: n,
        edges,
        density,
        radius,
        diameter,
        transitivity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> InteractionGraph {
        let ids = (0..n).map(|i| format!("n{i}")).collect();
        let weighted: Vec<(u32, u32, u32)> = edges.iter().map(|&(s, t)| (s, t, 1)).collect();
        InteractionGraph::from_edges(ids, &weighted).unwrap()
    }

    #[test]
    fn five_node_star() {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let rows = node_metrics(&g).unwrap();
        let center = &rows[0];
        assert_eq!(center.degree, 4);
        assert_eq!(center.betweenness_centrality, 1.0);
        assert_eq!(center.closeness_centrality, 1.0);
        assert_eq!(center.clustering_coefficient, 0.0);
        assert_eq!(center.eccentricity, 1);
        assert!((center.average_neighbor_degree - 1.0).abs() < 1e-15);
        for leaf in &rows[1..] {
            assert_eq!(leaf.degree, 1);
            assert_eq!(leaf.betweenness_centrality, 0.0);
            assert!((leaf.closeness_centrality - 4.0 / 7.0).abs() < 1e-12);
            assert_eq!(leaf.eccentricity, 2);
            assert!((leaf.average_neighbor_degree - 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_is_fully_clustered() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        for row in node_metrics(&g).unwrap() {
            assert_eq!(row.clustering_coefficient, 1.0);
            assert_eq!(row.betweenness_centrality, 0.0);
            assert_eq!(row.closeness_centrality, 1.0);
            assert_eq!(row.eccentricity, 1);
        }
        let gm = graph_metrics(&g).unwrap();
        assert_eq!(gm.transitivity, 1.0);
        assert_eq!(gm.density, 1.0);
        assert_eq!((gm.radius, gm.diameter), (1, 1));
    }

    #[test]
    fn three_node_path_middle_betweenness() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let rows = node_metrics(&g).unwrap();
        assert_eq!(rows[1].betweenness_centrality, 1.0);
        assert_eq!(rows[0].betweenness_centrality, 0.0);
        assert_eq!(rows[2].betweenness_centrality, 0.0);
    }

    #[test]
    fn four_node_path_graph_metrics() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let gm = graph_metrics(&g).unwrap();
        assert_eq!(gm.nodes, 4);
        assert_eq!(gm.edges, 3);
        assert!((gm.density - 0.5).abs() < 1e-15);
        assert_eq!(gm.transitivity, 0.0);
        assert_eq!((gm.radius, gm.diameter), (2, 3));
    }

    #[test]
    fn complete_graph_k4() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let gm = graph_metrics(&g).unwrap();
        assert_eq!(gm.density, 1.0);
        assert_eq!(gm.transitivity, 1.0);
        assert_eq!((gm.radius, gm.diameter), (1, 1));
    }

    #[test]
    fn disconnected_graph_rejected() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert!(matches!(node_metrics(&g), Err(Error::Disconnected(_))));
        assert!(matches!(graph_metrics(&g), Err(Error::Disconnected(_))));
    }

    #[test]
    fn density_undefined_below_two_nodes() {
        let g = graph(1, &[]);
        assert!(node_metrics(&g).is_ok());
        assert!(matches!(
            graph_metrics(&g),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn handshake_lemma() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]);
        let adj = g.undirected_adjacency();
        let degree_sum: usize = adj.iter().map(Vec::len).sum();
        assert_eq!(degree_sum, 2 * g.undirected_edge_count());
    }

    #[test]
    fn hub_dominates_star_like_graph() {
        // A star with a couple of peripheral edges: the max-degree node
        // also attains max betweenness and max closeness.
        let g = graph(7, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (1, 2)]);
        let rows = node_metrics(&g).unwrap();
        let max_deg = rows.iter().max_by_key(|r| r.degree).unwrap();
        let max_btw = rows
            .iter()
            .max_by(|a, b| {
                a.betweenness_centrality
                    .partial_cmp(&b.betweenness_centrality)
                    .unwrap()
            })
            .unwrap();
        let max_clo = rows
            .iter()
            .max_by(|a, b| {
                a.closeness_centrality
                    .partial_cmp(&b.closeness_centrality)
                    .unwrap()
            })
            .unwrap();
        assert_eq!(max_deg.user_id, "n0");
        assert_eq!(max_btw.user_id, "n0");
        assert_eq!(max_clo.user_id, "n0");
    }
}
