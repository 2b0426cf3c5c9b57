//! The interaction meta-graph: a weighted DAG whose vertices are interactions
//! and whose edges are possible information flows between them.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::content::dissimilarity;
use crate::error::{Error, Result};
use crate::interaction::{validate_topic_dims, Interaction};
use crate::scalar::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Broadcast,
    Relay,
    Reply,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Broadcast => "broadcast",
            EdgeKind::Relay => "relay",
            EdgeKind::Reply => "reply",
        }
    }
}

/// Flow rule between an earlier message `(sender_i -> recipients_i)` and a
/// later one. Reply takes precedence over relay, relay over broadcast.
pub fn classify(
    sender_i: &str,
    recipients_i: &BTreeSet<String>,
    sender_j: &str,
    recipients_j: &BTreeSet<String>,
) -> Option<EdgeKind> {
    let forwarded = recipients_i.contains(sender_j);
    let answered = recipients_j.contains(sender_i);
    if forwarded && answered {
        Some(EdgeKind::Reply)
    } else if forwarded {
        Some(EdgeKind::Relay)
    } else if sender_i == sender_j {
        Some(EdgeKind::Broadcast)
    } else {
        None
    }
}

/// Edge rule for interaction `i` preceding interaction `j`.
pub fn classify_pair<W>(i: &Interaction<W>, j: &Interaction<W>) -> Option<EdgeKind> {
    classify(&i.sender, &i.recipients, &j.sender, &j.recipients)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: u64,
    pub sender: String,
    pub recipients: BTreeSet<String>,
    pub timestamp: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl Vertex {
    pub fn order_key(&self) -> (i64, u64) {
        (self.timestamp, self.id)
    }
}

impl<W> From<&Interaction<W>> for Vertex {
    fn from(i: &Interaction<W>) -> Self {
        Vertex {
            id: i.id,
            sender: i.sender.clone(),
            recipients: i.recipients.clone(),
            timestamp: i.timestamp,
            text: i.content.raw_text.clone(),
        }
    }
}

/// Edge between vertex positions `src < dst`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<W> {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
    pub weight: W,
}

/// How to treat two interactions carrying the same timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SameTime {
    /// Simultaneous interactions are never linked.
    #[default]
    Unlinked,
    /// Simultaneous interactions are linked from smaller to larger id.
    ById,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions<W> {
    pub same_time: SameTime,
    /// Drop edges heavier than this.
    pub weight_cap: Option<W>,
}

impl<W> Default for BuildOptions<W> {
    fn default() -> Self {
        BuildOptions {
            same_time: SameTime::default(),
            weight_cap: None,
        }
    }
}

/// Weighted DAG over interactions. Vertices are stored in `(timestamp, id)`
/// order, which is a topological order: every edge goes from a smaller to a
/// larger position.
#[derive(Debug, Clone)]
pub struct MetaGraph<W> {
    vertices: Vec<Vertex>,
    edges: Vec<Edge<W>>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    index: HashMap<u64, usize>,
}

impl<W: Weight> PartialEq for MetaGraph<W> {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl<W: Weight> MetaGraph<W> {
    pub fn empty() -> Self {
        MetaGraph {
            vertices: Vec::new(),
            edges: Vec::new(),
            out_adj: Vec::new(),
            in_adj: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Assembles a graph from vertices and id-addressed edges `(src, dst, kind, weight)`,
    /// checking ids, ordering, weights and duplicates.
    pub fn from_parts(
        mut vertices: Vec<Vertex>,
        edges: impl IntoIterator<Item = (u64, u64, EdgeKind, W)>,
    ) -> Result<Self> {
        vertices.sort_by_key(Vertex::order_key);
        let mut index = HashMap::with_capacity(vertices.len());
        for (pos, v) in vertices.iter().enumerate() {
            if index.insert(v.id, pos).is_some() {
                return Err(Error::validation(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut list = Vec::new();
        for (s, d, kind, weight) in edges {
            let src = *index.get(&s).ok_or(Error::NotFound(s))?;
            let dst = *index.get(&d).ok_or(Error::NotFound(d))?;
            if src >= dst {
                return Err(Error::validation(format!(
                    "edge {s}->{d} does not respect (timestamp, id) order"
                )));
            }
            if !weight.is_finite() || weight < W::zero() {
                return Err(Error::validation(format!(
                    "edge {s}->{d} has invalid weight {weight}"
                )));
            }
            list.push(Edge {
                src,
                dst,
                kind,
                weight,
            });
        }
        list.sort_by_key(|e| (e.src, e.dst));
        if list
            .windows(2)
            .any(|w| (w[0].src, w[0].dst) == (w[1].src, w[1].dst))
        {
            return Err(Error::validation("parallel edges between one ordered pair"));
        }
        Ok(Self::assemble(vertices, list, index))
    }

    fn assemble(vertices: Vec<Vertex>, edges: Vec<Edge<W>>, index: HashMap<u64, usize>) -> Self {
        let mut out_adj = vec![Vec::new(); vertices.len()];
        let mut in_adj = vec![Vec::new(); vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            out_adj[e.src].push(k);
            in_adj[e.dst].push(k);
        }
        MetaGraph {
            vertices,
            edges,
            out_adj,
            in_adj,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, pos: usize) -> &Vertex {
        &self.vertices[pos]
    }

    pub fn edges(&self) -> &[Edge<W>] {
        &self.edges
    }

    pub fn position(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.index.contains_key(&id)
    }

    pub fn out_edges(&self, pos: usize) -> impl Iterator<Item = &Edge<W>> + '_ {
        self.out_adj[pos].iter().map(move |&k| &self.edges[k])
    }

    pub fn in_edges(&self, pos: usize) -> impl Iterator<Item = &Edge<W>> + '_ {
        self.in_adj[pos].iter().map(move |&k| &self.edges[k])
    }

    pub fn out_degree(&self, pos: usize) -> usize {
        self.out_adj[pos].len()
    }

    pub fn in_degree(&self, pos: usize) -> usize {
        self.in_adj[pos].len()
    }

    /// Edge between two vertex ids, if any.
    pub fn edge_between(&self, src: u64, dst: u64) -> Option<&Edge<W>> {
        let (s, d) = (self.position(src)?, self.position(dst)?);
        self.out_edges(s).find(|e| e.dst == d)
    }

    /// Edges as `(src id, dst id, kind, weight)`.
    pub fn edge_ids(&self) -> impl Iterator<Item = (u64, u64, EdgeKind, W)> + '_ {
        self.edges.iter().map(|e| {
            (
                self.vertices[e.src].id,
                self.vertices[e.dst].id,
                e.kind,
                e.weight,
            )
        })
    }

    /// Earliest and latest timestamp, if non-empty.
    pub fn time_range(&self) -> Option<(i64, i64)> {
        Some((
            self.vertices.first()?.timestamp,
            self.vertices.last()?.timestamp,
        ))
    }

    /// Subgraph induced by the vertex positions where `keep` is true.
    pub fn induced(&self, keep: &[bool]) -> Self {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut index = HashMap::new();
        for (pos, v) in self.vertices.iter().enumerate() {
            if keep[pos] {
                remap[pos] = vertices.len();
                index.insert(v.id, vertices.len());
                vertices.push(v.clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| keep[e.src] && keep[e.dst])
            .map(|e| Edge {
                src: remap[e.src],
                dst: remap[e.dst],
                ..*e
            })
            .collect();
        Self::assemble(vertices, edges, index)
    }

    /// Restriction to interactions with `start <= timestamp <= end`.
    pub fn time_induced(&self, start: i64, end: i64) -> Result<Self> {
        if start > end {
            return Err(Error::validation(format!(
                "time window start {start} is after end {end}"
            )));
        }
        let keep: Vec<bool> = self
            .vertices
            .iter()
            .map(|v| (start..=end).contains(&v.timestamp))
            .collect();
        Ok(self.induced(&keep))
    }

    /// Removes vertices with neither in- nor out-edges.
    pub fn strip_singletons(&self) -> Self {
        let keep: Vec<bool> = (0..self.len())
            .map(|p| self.in_degree(p) + self.out_degree(p) > 0)
            .collect();
        self.induced(&keep)
    }

    /// Kahn's algorithm; true when every vertex can be ordered.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg: Vec<usize> = (0..self.len()).map(|p| self.in_degree(p)).collect();
        let mut stack: Vec<usize> = (0..self.len()).filter(|&p| indeg[p] == 0).collect();
        let mut seen = 0;
        while let Some(p) = stack.pop() {
            seen += 1;
            for e in self.out_edges(p) {
                indeg[e.dst] -= 1;
                if indeg[e.dst] == 0 {
                    stack.push(e.dst);
                }
            }
        }
        seen == self.len()
    }
}

/// Builds the meta-graph with content dissimilarity as edge weight.
pub fn build<W: Weight>(msgs: &[Interaction<W>], opts: &BuildOptions<W>) -> Result<MetaGraph<W>> {
    validate_topic_dims(msgs, None)?;
    build_with(msgs, opts, |a, b| {
        dissimilarity(&a.content, &b.content).expect("topic dimensions validated")
    })
}

/// Builds the meta-graph with a caller-supplied weight function.
pub fn build_with<W, F>(
    msgs: &[Interaction<W>],
    opts: &BuildOptions<W>,
    weight: F,
) -> Result<MetaGraph<W>>
where
    W: Weight,
    F: Fn(&Interaction<W>, &Interaction<W>) -> W + Sync,
{
    let mut order: Vec<&Interaction<W>> = msgs.iter().collect();
    order.sort_by_key(|m| m.order_key());
    let mut index = HashMap::with_capacity(order.len());
    for (pos, m) in order.iter().enumerate() {
        if index.insert(m.id, pos).is_some() {
            return Err(Error::validation(format!(
                "duplicate interaction id {}",
                m.id
            )));
        }
    }

    // Every rule needs sender_i == sender_j or sender_j ∈ recipients_i.
    let mut by_sender: HashMap<&str, Vec<usize>> = HashMap::new();
    let mut by_recipient: HashMap<&str, Vec<usize>> = HashMap::new();
    for (pos, m) in order.iter().enumerate() {
        by_sender.entry(m.sender.as_str()).or_default().push(pos);
        for r in &m.recipients {
            by_recipient.entry(r.as_str()).or_default().push(pos);
        }
    }

    let per_dst: Vec<Vec<Edge<W>>> = (0..order.len())
        .into_par_iter()
        .map(|j| {
            let mj = order[j];
            let mut cands: Vec<usize> = by_sender
                .get(mj.sender.as_str())
                .into_iter()
                .chain(by_recipient.get(mj.sender.as_str()))
                .flat_map(|v| v.iter().copied().take_while(|&i| i < j))
                .collect();
            cands.sort_unstable();
            cands.dedup();
            let mut out = Vec::new();
            for i in cands {
                let mi = order[i];
                if opts.same_time == SameTime::Unlinked && mi.timestamp == mj.timestamp {
                    continue;
                }
                let Some(kind) = classify_pair(mi, mj) else {
                    continue;
                };
                let w = weight(mi, mj);
                if let Some(cap) = opts.weight_cap {
                    if w > cap {
                        continue;
                    }
                }
                out.push(Edge {
                    src: i,
                    dst: j,
                    kind,
                    weight: w,
                });
            }
            out
        })
        .collect();

    let mut edges: Vec<Edge<W>> = per_dst.into_iter().flatten().collect();
    if let Some(e) = edges
        .iter()
        .find(|e| !e.weight.is_finite() || e.weight < W::zero())
    {
        return Err(Error::validation(format!(
            "edge {}->{} has invalid weight {}",
            order[e.src].id, order[e.dst].id, e.weight
        )));
    }
    edges.sort_by_key(|e| (e.src, e.dst));
    let vertices = order.iter().map(|m| Vertex::from(*m)).collect();
    Ok(MetaGraph::assemble(vertices, edges, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::ContentVector;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn msg(id: u64, s: &str, to: &[&str], t: i64) -> Interaction<f64> {
        Interaction {
            id,
            sender: s.into(),
            recipients: set(to),
            timestamp: t,
            content: ContentVector::from_topic(vec![1.0, 0.0]),
        }
    }

    #[test]
    fn classify_rules() {
        assert_eq!(
            classify("CEO", &set(&["PM"]), "PM", &set(&["TM1", "TM2"])),
            Some(EdgeKind::Relay)
        );
        assert_eq!(
            classify("PM", &set(&["TM1", "TM2"]), "PM", &set(&["CEO"])),
            Some(EdgeKind::Broadcast)
        );
        assert_eq!(
            classify("PM", &set(&["TM1", "TM2"]), "TM2", &set(&["PM"])),
            Some(EdgeKind::Reply)
        );
        assert_eq!(classify("a", &set(&["b"]), "c", &set(&["d"])), None);
    }

    #[test]
    fn self_addressed_mail_prefers_reply() {
        assert_eq!(
            classify("a", &set(&["a"]), "a", &set(&["a"])),
            Some(EdgeKind::Reply)
        );
    }

    #[test]
    fn single_and_unrelated() {
        let opts = BuildOptions::default();
        let g = build(&[msg(0, "a", &["b"], 0)], &opts).unwrap();
        assert_eq!((g.len(), g.edge_count()), (1, 0));
        let g = build(&[msg(0, "a", &["b"], 0), msg(1, "c", &["d"], 5)], &opts).unwrap();
        assert_eq!((g.len(), g.edge_count()), (2, 0));
    }

    #[test]
    fn simultaneous_policy() {
        let v = [msg(0, "a", &["b"], 7), msg(1, "a", &["c"], 7)];
        let g = build(&v, &BuildOptions::default()).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = build(
            &v,
            &BuildOptions {
                same_time: SameTime::ById,
                weight_cap: None,
            },
        )
        .unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].kind, EdgeKind::Broadcast);
    }

    #[test]
    fn weight_cap_prunes() {
        let mut b = msg(1, "a", &["c"], 8);
        b.content = ContentVector::from_topic(vec![0.0, 1.0]);
        let v = [msg(0, "a", &["b"], 7), b];
        let opts = BuildOptions {
            same_time: SameTime::Unlinked,
            weight_cap: Some(0.5),
        };
        assert_eq!(build(&v, &opts).unwrap().edge_count(), 0);
    }

    #[test]
    fn time_window_validation_and_empty() {
        let g = build(
            &[msg(0, "a", &["b"], 0), msg(1, "a", &["b"], 10)],
            &BuildOptions::default(),
        )
        .unwrap();
        assert!(g.time_induced(5, 1).is_err());
        assert!(g.time_induced(2, 3).unwrap().is_empty());
        assert_eq!(g.time_induced(0, 10).unwrap(), g);
    }

    #[test]
    fn strip_singletons_cases() {
        let g = build(
            &[msg(0, "a", &["b"], 0), msg(1, "c", &["d"], 1)],
            &BuildOptions::default(),
        )
        .unwrap();
        assert!(g.strip_singletons().is_empty());
        assert!(MetaGraph::<f64>::empty().strip_singletons().is_empty());
    }

    #[test]
    fn from_parts_rejects_bad_input() {
        let v = vec![
            Vertex::from(&msg(0, "a", &["b"], 0)),
            Vertex::from(&msg(1, "a", &["b"], 1)),
        ];
        assert!(
            MetaGraph::<f64>::from_parts(v.clone(), [(1, 0, EdgeKind::Broadcast, 0.0)]).is_err()
        );
        assert!(
            MetaGraph::<f64>::from_parts(v.clone(), [(0, 1, EdgeKind::Broadcast, -1.0)]).is_err()
        );
        assert!(
            MetaGraph::<f64>::from_parts(v.clone(), [(0, 9, EdgeKind::Broadcast, 0.0)]).is_err()
        );
        assert!(MetaGraph::<f64>::from_parts(
            v,
            [
                (0, 1, EdgeKind::Broadcast, 0.0),
                (0, 1, EdgeKind::Relay, 0.0)
            ]
        )
        .is_err());
    }
}
