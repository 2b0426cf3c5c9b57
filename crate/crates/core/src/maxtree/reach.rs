use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::MetaGraph;
use crate::scalar::Weight;
use crate::tree::{EventTree, TreeEdge};

/// Sub-DAG reachable from a root, optionally bounded by a latest timestamp.
///
/// Local index 0 is the root; local order follows graph position, so it is
/// topological.
pub(crate) struct Reach<'g, W> {
    pub graph: &'g MetaGraph<W>,
    /// Graph positions of the local vertices, ascending.
    pub nodes: Vec<usize>,
    /// Out-edges `(local dst, weight)`, sorted by dst.
    pub out: Vec<Vec<(usize, W)>>,
    /// In-edges `(local src, weight)`, sorted by src.
    pub inn: Vec<Vec<(usize, W)>>,
}

impl<'g, W: Weight> Reach<'g, W> {
    pub fn new(graph: &'g MetaGraph<W>, root: u64, horizon: Option<i64>) -> Result<Self> {
        let start = graph.position(root).ok_or(Error::NotFound(root))?;
        let admits = |p: usize| horizon.is_none_or(|h| graph.vertex(p).timestamp <= h);
        let mut seen = vec![false; graph.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut nodes = Vec::new();
        while let Some(p) = stack.pop() {
            nodes.push(p);
            for e in graph.out_edges(p) {
                if !seen[e.dst] && admits(e.dst) {
                    seen[e.dst] = true;
                    stack.push(e.dst);
                }
            }
        }
        nodes.sort_unstable();
        debug_assert_eq!(nodes[0], start);
        let local: HashMap<usize, usize> = nodes.iter().enumerate().map(|(l, &p)| (p, l)).collect();
        let mut out = vec![Vec::new(); nodes.len()];
        let mut inn = vec![Vec::new(); nodes.len()];
        for (l, &p) in nodes.iter().enumerate() {
            for e in graph.out_edges(p) {
                if let Some(&d) = local.get(&e.dst) {
                    out[l].push((d, e.weight));
                    inn[d].push((l, e.weight));
                }
            }
        }
        for v in out.iter_mut().chain(inn.iter_mut()) {
            v.sort_by_key(|&(x, _)| x);
        }
        Ok(Reach {
            graph,
            nodes,
            out,
            inn,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn id(&self, local: usize) -> u64 {
        self.graph.vertex(self.nodes[local]).id
    }

    pub fn root_id(&self) -> u64 {
        self.id(0)
    }

    /// Weight of the edge `src -> dst` between local vertices.
    pub fn weight(&self, src: usize, dst: usize) -> W {
        let row = &self.out[src];
        let k = row
            .binary_search_by_key(&dst, |&(d, _)| d)
            .expect("edge exists");
        row[k].1
    }

    /// Converts `(parent, child)` local pairs to an event tree.
    pub fn tree(&self, links: impl IntoIterator<Item = (usize, usize)>) -> EventTree<W> {
        EventTree::from_edges(
            self.root_id(),
            links.into_iter().map(|(p, c)| TreeEdge {
                src: self.id(p),
                dst: self.id(c),
                weight: self.weight(p, c),
            }),
        )
    }

    /// Tree formed by following `parent` links from every marked vertex back to the root.
    pub fn tree_from_parents(&self, parent: &[Option<usize>], members: &[bool]) -> EventTree<W> {
        self.tree(
            (1..self.len())
                .filter(|&v| members[v])
                .map(|v| (parent[v].expect("member has a parent"), v)),
        )
    }
}
