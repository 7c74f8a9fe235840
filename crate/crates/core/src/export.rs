//! File formats for every report: CSV with pinned headers, edge lists,
//! and GraphML. All output is UTF-8, comma-separated, LF-terminated.

use std::io::Write;

use crate::error::{Error, Result};
use crate::evaluation::{CommunitySweepRow, SweepRow};
use crate::graph::{DegreeDistribution, InteractionGraph, NodeMetrics};
use crate::models::cipm::{AssignmentMode, CommunityMembership, TopicInterest};
use crate::models::ModelEstimate;

fn csv_writer<W: Write>(writer: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer)
}

fn flush(mut w: csv::Writer<impl Write>) -> Result<()> {
    w.flush()
        .map_err(|e| Error::io("<csv output>", e))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Snapshot(format!("csv write failed: {e}"))
}

/// topic,rank,word,probability — all topics, top `n` words each.
pub fn write_topics_csv(writer: impl Write, estimate: &ModelEstimate, n: usize) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(["topic", "rank", "word", "probability"])
        .map_err(csv_err)?;
    for topic in 0..estimate.topic_count() {
        for (rank, (word, p)) in crate::models::top_words(estimate, topic, n)?
            .into_iter()
            .enumerate()
        {
            w.write_record([
                topic.to_string(),
                (rank + 1).to_string(),
                word,
                p.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    flush(w)
}

/// topic,rank,user_id,probability — per-topic contributor rankings.
pub fn write_users_csv(
    writer: impl Write,
    rankings: &[(usize, Vec<(String, f64)>)],
) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(["topic", "rank", "user_id", "probability"])
        .map_err(csv_err)?;
    for (topic, rows) in rankings {
        for (rank, (user, p)) in rows.iter().enumerate() {
            w.write_record([
                topic.to_string(),
                (rank + 1).to_string(),
                user.clone(),
                p.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    flush(w)
}

/// user_id,community,mu_probability,assignment_mode.
pub fn write_communities_csv(
    writer: impl Write,
    memberships: &[CommunityMembership],
    mode: AssignmentMode,
    user_ids: &[String],
) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(["user_id", "community", "mu_probability", "assignment_mode"])
        .map_err(csv_err)?;
    for m in memberships {
        w.write_record([
            user_ids[m.user as usize].clone(),
            m.community.to_string(),
            m.probability.to_string(),
            mode.as_str().to_string(),
        ])
        .map_err(csv_err)?;
    }
    flush(w)
}

/// user_id,topic,theta — the per-community interest report.
pub fn write_interest_report_csv(writer: impl Write, rows: &[TopicInterest]) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(["user_id", "topic", "theta"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.user_id.clone(), r.topic.to_string(), r.theta.to_string()])
            .map_err(csv_err)?;
    }
    flush(w)
}

/// value,perplexity,sweeps,seconds.
pub fn write_sweep_csv(writer: impl Write, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(["value", "perplexity", "sweeps", "seconds"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.value.to_string(),
            r.perplexity.to_string(),
            r.sweeps.to_string(),
            format!("{:.3}", r.seconds),
        ])
        .map_err(csv_err)?;
    }
    flush(w)
}

/// value,assigned_users,sweeps,seconds.
pub fn write_community_sweep_csv(
    writer: impl Write,
    rows: &[CommunitySweepRow],
) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(["value", "assigned_users", "sweeps", "seconds"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.value.to_string(),
            r.assigned_users.to_string(),
            r.sweeps.to_string(),
            format!("{:.3}", r.seconds),
        ])
        .map_err(csv_err)?;
    }
    flush(w)
}

/// The seven node-metric columns, in report order.
pub const NODE_METRICS_COLUMNS: [&str; 7] = [
    "user_id",
    "degree",
    "clustering_coefficient",
    "eccentricity",
    "average_neighbor_degree",
    "betweenness_centrality",
    "closeness_centrality",
];

pub fn write_node_metrics_csv(writer: impl Write, rows: &[NodeMetrics]) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(NODE_METRICS_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.user_id.clone(),
            r.degree.to_string(),
            r.clustering_coefficient.to_string(),
            r.eccentricity.to_string(),
            r.average_neighbor_degree.to_string(),
            r.betweenness_centrality.to_string(),
            r.closeness_centrality.to_string(),
        ])
        .map_err(csv_err)?;
    }
    flush(w)
}

/// src_id,dst_id,weight — the directed edge multiset.
pub fn write_edge_list_csv(writer: impl Write, graph: &InteractionGraph) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(["src_id", "dst_id", "weight"]).map_err(csv_err)?;
    for (s, t, weight) in graph.directed_edges() {
        w.write_record([
            graph.user_id(s).to_string(),
            graph.user_id(t).to_string(),
            weight.to_string(),
        ])
        .map_err(csv_err)?;
    }
    flush(w)
}

/// degree,count,ccdf.
pub fn write_degree_distribution_csv(
    writer: impl Write,
    dist: &DegreeDistribution,
) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(["degree", "count", "ccdf"]).map_err(csv_err)?;
    for ((degree, count), (d2, ccdf)) in dist.histogram.iter().zip(&dist.ccdf) {
        debug_assert_eq!(degree, d2);
        w.write_record([degree.to_string(), count.to_string(), ccdf.to_string()])
            .map_err(csv_err)?;
    }
    flush(w)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// Minimal GraphML: node ids plus weighted directed edges.
pub fn write_graphml(mut writer: impl Write, graph: &InteractionGraph) -> Result<()> {
    let io = |e| Error::io("<graphml output>", e);
    writeln!(writer, r#"<?xml version="1.0" encoding="UTF-8"?>"#).map_err(io)?;
    writeln!(
        writer,
        r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#
    )
    .map_err(io)?;
    writeln!(
        writer,
        r#"  <key id="weight" for="edge" attr.name="weight" attr.type="int"/>"#
    )
    .map_err(io)?;
    writeln!(writer, r#"  <graph id="mentions" edgedefault="directed">"#).map_err(io)?;
    for id in graph.user_ids() {
        writeln!(writer, r#"    <node id="{}"/>"#, xml_escape(id)).map_err(io)?;
    }
    for (s, t, w) in graph.directed_edges() {
        writeln!(
            writer,
            r#"    <edge source="{}" target="{}"><data key="weight">{w}</data></edge>"#,
            xml_escape(graph.user_id(s)),
            xml_escape(graph.user_id(t)),
        )
        .map_err(io)?;
    }
    writeln!(writer, "  </graph>").map_err(io)?;
    writeln!(writer, "</graphml>").map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DegreeMode;

    fn sample_graph() -> InteractionGraph {
        InteractionGraph::from_edges(
            vec!["alice".into(), "b<b>".into(), "c".into()],
            &[(0, 1, 2), (1, 2, 1)],
        )
        .unwrap()
    }

    #[test]
    fn node_metrics_header_is_pinned() {
        let g = sample_graph();
        let rows = crate::graph::node_metrics(&g).unwrap();
        let mut buf = Vec::new();
        write_node_metrics_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "user_id,degree,clustering_coefficient,eccentricity,average_neighbor_degree,betweenness_centrality,closeness_centrality"
        );
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn sweep_csv_header_is_pinned() {
        let mut buf = Vec::new();
        write_sweep_csv(
            &mut buf,
            &[SweepRow {
                value: 10,
                perplexity: 42.5,
                sweeps: 100,
                seconds: 1.25,
            }],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "value,perplexity,sweeps,seconds");
        assert_eq!(text.lines().nth(1).unwrap(), "10,42.5,100,1.250");
    }

    #[test]
    fn edge_list_and_degree_csv() {
        let g = sample_graph();
        let mut buf = Vec::new();
        write_edge_list_csv(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("src_id,dst_id,weight\n"));
        assert!(text.contains("alice,b<b>,2"));
        let mut buf = Vec::new();
        write_degree_distribution_csv(&mut buf, &g.degree_distribution(DegreeMode::Total))
            .unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("degree,count,ccdf\n"));
    }

    #[test]
    fn graphml_escapes_ids() {
        let g = sample_graph();
        let mut buf = Vec::new();
        write_graphml(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(r#"<node id="b&lt;b&gt;"/>"#));
        assert!(text.contains(r#"<data key="weight">2</data>"#));
    }
}
