//! JSON and Graphviz DOT output for meta-graphs, event trees and event sets.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeKind, MetaGraph, Vertex};
use crate::scalar::Weight;
use crate::select::EventSet;
use crate::tree::EventTree;

/// Weight at or above which an edge is drawn dashed.
pub const DASHED_FROM: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "W: Weight")]
pub struct EdgeRecord<W> {
    pub src: u64,
    pub dst: u64,
    pub kind: EdgeKind,
    pub weight: W,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "W: Weight", deny_unknown_fields)]
pub struct GraphFile<W> {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<EdgeRecord<W>>,
}

impl<W: Weight> GraphFile<W> {
    pub fn of(g: &MetaGraph<W>) -> Self {
        GraphFile {
            vertices: g.vertices().to_vec(),
            edges: g
                .edge_ids()
                .map(|(src, dst, kind, weight)| EdgeRecord {
                    src,
                    dst,
                    kind,
                    weight,
                })
                .collect(),
        }
    }

    pub fn into_graph(self) -> Result<MetaGraph<W>> {
        MetaGraph::from_parts(
            self.vertices,
            self.edges
                .into_iter()
                .map(|e| (e.src, e.dst, e.kind, e.weight)),
        )
    }
}

pub fn write_graph_json<W: Weight, Wr: Write>(g: &MetaGraph<W>, mut out: Wr) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &GraphFile::of(g))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_graph_json<W: Weight, R: Read>(input: R) -> Result<MetaGraph<W>> {
    let file: GraphFile<W> = serde_json::from_reader(input)?;
    file.into_graph()
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot_vertex(out: &mut String, v: &Vertex) {
    let _ = writeln!(
        out,
        "  \"{}\" [label=\"{}|{}|{}\"];",
        v.id,
        v.id,
        dot_escape(&v.sender),
        v.timestamp
    );
}

fn dot_edge(out: &mut String, src: u64, dst: u64, kind: Option<EdgeKind>, weight: f64) {
    let _ = write!(out, "  \"{src}\" -> \"{dst}\" [");
    if let Some(k) = kind {
        let _ = write!(out, "kind=\"{}\", ", k.as_str());
    }
    let _ = write!(out, "weight=\"{weight:.6}\"");
    if weight >= DASHED_FROM {
        out.push_str(", style=dashed");
    }
    out.push_str("];\n");
}

pub fn graph_dot<W: Weight>(g: &MetaGraph<W>, name: &str) -> String {
    let mut out = format!("digraph \"{}\" {{\n  node [shape=box];\n", dot_escape(name));
    for v in g.vertices() {
        dot_vertex(&mut out, v);
    }
    for (s, d, k, w) in g.edge_ids() {
        dot_edge(&mut out, s, d, Some(k), w.as_f64());
    }
    out.push_str("}\n");
    out
}

/// Vertices missing from `g` are labelled with their id only.
pub fn tree_dot<W: Weight>(t: &EventTree<W>, g: &MetaGraph<W>, name: &str) -> String {
    let mut out = format!("digraph \"{}\" {{\n  node [shape=box];\n", dot_escape(name));
    for &id in t.nodes() {
        match g.position(id) {
            Some(p) => dot_vertex(&mut out, g.vertex(p)),
            None => {
                let _ = writeln!(out, "  \"{id}\";");
            }
        }
    }
    for e in t.edges() {
        let kind = g.edge_between(e.src, e.dst).map(|x| x.kind);
        dot_edge(&mut out, e.src, e.dst, kind, e.weight.as_f64());
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: u64,
    pub timestamp: i64,
    pub sender: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "W: Weight")]
pub struct EventRecord<W> {
    pub root: u64,
    pub size: usize,
    pub cost: W,
    pub time_span: i64,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord<W>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub top_terms: Vec<String>,
}

impl<W: Weight> EventRecord<W> {
    pub fn of(t: &EventTree<W>, g: &MetaGraph<W>) -> Result<Self> {
        let nodes = t
            .nodes()
            .iter()
            .map(|&id| {
                let p = g.position(id).ok_or(Error::NotFound(id))?;
                let v = g.vertex(p);
                Ok(NodeRecord {
                    id,
                    timestamp: v.timestamp,
                    sender: v.sender.clone(),
                })
            })
            .collect::<Result<_>>()?;
        let edges = t
            .edges()
            .iter()
            .map(|e| {
                let ge = g.edge_between(e.src, e.dst).ok_or(Error::NotFound(e.dst))?;
                Ok(EdgeRecord {
                    src: e.src,
                    dst: e.dst,
                    kind: ge.kind,
                    weight: e.weight,
                })
            })
            .collect::<Result<_>>()?;
        Ok(EventRecord {
            root: t.root(),
            size: t.size(),
            cost: t.cost(),
            time_span: t.time_span(g),
            nodes,
            edges,
            top_terms: Vec::new(),
        })
    }
}

/// Detection output with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "W: Weight, P: Serialize",
    deserialize = "W: Weight, P: Deserialize<'de>"
))]
pub struct EventSetFile<W, P> {
    pub params: P,
    pub coverage: usize,
    pub shortfall: bool,
    pub events: Vec<EventRecord<W>>,
}

impl<W: Weight, P> EventSetFile<W, P> {
    pub fn of(set: &EventSet<W>, g: &MetaGraph<W>, params: P) -> Result<Self> {
        Ok(EventSetFile {
            params,
            coverage: set.coverage(),
            shortfall: set.shortfall,
            events: set
                .trees
                .iter()
                .map(|t| EventRecord::of(t, g))
                .collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn v(id: u64, s: &str, r: &str, t: i64) -> Vertex {
        Vertex {
            id,
            sender: s.into(),
            recipients: BTreeSet::from([r.to_string()]),
            timestamp: t,
            text: None,
        }
    }

    fn sample() -> MetaGraph<f64> {
        MetaGraph::from_parts(
            vec![v(1, "a", "b", 0), v(2, "b", "c", 5), v(3, "a", "\"q\"", 9)],
            [
                (1, 2, EdgeKind::Relay, 0.1 + 0.2),
                (1, 3, EdgeKind::Broadcast, 0.8),
            ],
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let g = sample();
        let mut buf = Vec::new();
        write_graph_json(&g, &mut buf).unwrap();
        let back: MetaGraph<f64> = read_graph_json(buf.as_slice()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.edge_between(1, 2).unwrap().weight, 0.1 + 0.2);
    }

    #[test]
    fn dot_conventions() {
        let dot = graph_dot(&sample(), "g");
        assert!(dot.contains("label=\"1|a|0\""));
        assert!(dot.contains("\"1\" -> \"2\" [kind=\"relay\", weight=\"0.300000\"];"));
        assert!(
            dot.contains("\"1\" -> \"3\" [kind=\"broadcast\", weight=\"0.800000\", style=dashed];")
        );
    }

    #[test]
    fn rejects_unknown_edge_endpoint() {
        let json = r#"{"vertices":[{"id":1,"sender":"a","recipients":["b"],"timestamp":0}],
            "edges":[{"src":1,"dst":9,"kind":"relay","weight":0.5}]}"#;
        assert!(read_graph_json::<f64, _>(json.as_bytes()).is_err());
    }
}
