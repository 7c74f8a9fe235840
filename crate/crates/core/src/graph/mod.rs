//! The mention graph: construction from interaction records, degree
//! distributions, and component extraction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::InteractionRecord;
use crate::error::{Error, Result};

pub mod metrics;
pub mod powerlaw;

pub use metrics::{graph_metrics, node_metrics, GraphMetrics, NodeMetrics};
pub use powerlaw::{fit_power_law, PowerLawFit};

/// Edge orientation for the directed view. The default points from the
/// post's author to each mentioned user; the reverse matches the
/// "influence flows from the mentioned account" reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MentionDirection {
    #[default]
    MentionerToMentioned,
    MentionedToMentioner,
}

impl MentionDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            MentionDirection::MentionerToMentioned => "mentioner-to-mentioned",
            MentionDirection::MentionedToMentioner => "mentioned-to-mentioner",
        }
    }
}

impl std::str::FromStr for MentionDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mentioner-to-mentioned" => Ok(MentionDirection::MentionerToMentioned),
            "mentioned-to-mentioner" => Ok(MentionDirection::MentionedToMentioner),
            other => Err(Error::InvalidArgument(format!(
                "unknown direction {other:?}"
            ))),
        }
    }
}

/// Weighted mention graph. The directed multiset records one edge event
/// per (author, mention) pair per record; the undirected view sums the
/// multiplicities of both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    user_ids: Vec<String>,
    index: HashMap<String, u32>,
    directed: BTreeMap<(u32, u32), u32>,
}

pub fn build_graph(records: &[InteractionRecord], direction: MentionDirection) -> InteractionGraph {
    let mut user_ids = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    let intern = |id: &str, ids: &mut Vec<String>, index: &mut HashMap<String, u32>| {
        if let Some(&i) = index.get(id) {
            return i;
        }
        let i = ids.len() as u32;
        ids.push(id.to_string());
        index.insert(id.to_string(), i);
        i
    };
    let mut directed: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for rec in records {
        let author = intern(&rec.author_id, &mut user_ids, &mut index);
        for m in &rec.mentions {
            if *m == rec.author_id {
                continue;
            }
            let mentioned = intern(m, &mut user_ids, &mut index);
            let edge = match direction {
                MentionDirection::MentionerToMentioned => (author, mentioned),
                MentionDirection::MentionedToMentioner => (mentioned, author),
            };
            *directed.entry(edge).or_insert(0) += 1;
        }
    }
    InteractionGraph {
        user_ids,
        index,
        directed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMode {
    In,
    Out,
    Total,
}

impl std::str::FromStr for DegreeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in" => Ok(DegreeMode::In),
            "out" => Ok(DegreeMode::Out),
            "total" => Ok(DegreeMode::Total),
            other => Err(Error::InvalidArgument(format!(
                "unknown degree mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeDistribution {
    /// degree → node count.
    pub histogram: BTreeMap<usize, usize>,
    /// (degree, fraction of nodes with degree ≥ this), non-increasing.
    pub ccdf: Vec<(usize, f64)>,
}

impl InteractionGraph {
    pub fn node_count(&self) -> usize {
        self.user_ids.len()
    }

    pub fn user_id(&self, index: u32) -> &str {
        &self.user_ids[index as usize]
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn user_index(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    /// Directed edges with multiplicity, ordered by (source, target).
    pub fn directed_edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.directed.iter().map(|(&(s, t), &w)| (s, t, w))
    }

    pub fn directed_edge_count(&self) -> usize {
        self.directed.len()
    }

    /// Distinct unordered pairs with summed multiplicities.
    pub fn undirected_edges(&self) -> BTreeMap<(u32, u32), u32> {
        let mut edges = BTreeMap::new();
        for (&(s, t), &w) in &self.directed {
            let key = if s <= t { (s, t) } else { (t, s) };
            *edges.entry(key).or_insert(0) += w;
        }
        edges
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.undirected_edges().len()
    }

    /// Sorted distinct-neighbor adjacency of the undirected view.
    pub fn undirected_adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for (s, t) in self.undirected_edges().keys() {
            adj[*s as usize].push(*t);
            adj[*t as usize].push(*s);
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        adj
    }

    pub fn degrees(&self, mode: DegreeMode) -> Vec<usize> {
        let n = self.node_count();
        let mut degrees = vec![0usize; n];
        match mode {
            DegreeMode::In => {
                for (_, t, _) in self.directed_edges() {
                    degrees[t as usize] += 1;
                }
            }
            DegreeMode::Out => {
                for (s, _, _) in self.directed_edges() {
                    degrees[s as usize] += 1;
                }
            }
            DegreeMode::Total => {
                for (i, row) in self.undirected_adjacency().iter().enumerate() {
                    degrees[i] = row.len();
                }
            }
        }
        degrees
    }

    pub fn degree_distribution(&self, mode: DegreeMode) -> DegreeDistribution {
        let degrees = self.degrees(mode);
        let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
        for d in &degrees {
            *histogram.entry(*d).or_insert(0) += 1;
        }
        let n = degrees.len() as f64;
        let mut remaining = degrees.len();
        let mut ccdf = Vec::with_capacity(histogram.len());
        for (&d, &count) in &histogram {
            ccdf.push((d, remaining as f64 / n));
            remaining -= count;
        }
        DegreeDistribution { histogram, ccdf }
    }

    /// Node-induced subgraph of the largest undirected component. Ties go
    /// to the component containing the smallest node index. Node order is
    /// preserved, indices are remapped densely.
    pub fn largest_connected_component(&self) -> InteractionGraph {
        let n = self.node_count();
        if n == 0 {
            return self.clone();
        }
        let adj = self.undirected_adjacency();
        let mut component = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for start in 0..n {
            if component[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut queue = std::collections::VecDeque::from([start]);
            component[start] = id;
            let mut size = 0usize;
            while let Some(v) = queue.pop_front() {
                size += 1;
                for &u in &adj[v] {
                    if component[u as usize] == usize::MAX {
                        component[u as usize] = id;
                        queue.push_back(u as usize);
                    }
                }
            }
            sizes.push(size);
        }
        // Components are discovered in order of their smallest member, so a
        // strict comparison keeps the earliest of equally-sized ones.
        let mut best = 0usize;
        for (id, &size) in sizes.iter().enumerate() {
            if size > sizes[best] {
                best = id;
            }
        }
        let keep: Vec<u32> = (0..n as u32)
            .filter(|&v| component[v as usize] == best)
            .collect();
        self.induced_subgraph(&keep)
    }

    fn induced_subgraph(&self, keep: &[u32]) -> InteractionGraph {
        let mut remap: HashMap<u32, u32> = HashMap::with_capacity(keep.len());
        let mut user_ids = Vec::with_capacity(keep.len());
        let mut index = HashMap::with_capacity(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            remap.insert(old, new as u32);
            let id = self.user_ids[old as usize].clone();
            index.insert(id.clone(), new as u32);
            user_ids.push(id);
        }
        let mut directed = BTreeMap::new();
        for (&(s, t), &w) in &self.directed {
            if let (Some(&ns), Some(&nt)) = (remap.get(&s), remap.get(&t)) {
                directed.insert((ns, nt), w);
            }
        }
        InteractionGraph {
            user_ids,
            index,
            directed,
        }
    }

    /// Build directly from an edge list, for tests and tooling.
    pub fn from_edges(node_ids: Vec<String>, edges: &[(u32, u32, u32)]) -> Result<Self> {
        let n = node_ids.len() as u32;
        let mut index = HashMap::with_capacity(node_ids.len());
        for (i, id) in node_ids.iter().enumerate() {
            if index.insert(id.clone(), i as u32).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate node id {id:?}")));
            }
        }
        let mut directed = BTreeMap::new();
        for &(s, t, w) in edges {
            if s >= n || t >= n {
                return Err(Error::InvalidArgument("edge endpoint out of range".into()));
            }
            if s == t {
                continue;
            }
            *directed.entry((s, t)).or_insert(0) += w;
        }
        Ok(InteractionGraph {
            user_ids: node_ids,
            index,
            directed,
        })
    }
}
