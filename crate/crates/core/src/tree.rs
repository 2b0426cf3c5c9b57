//! Event trees: rooted directed subtrees of a meta-graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MetaGraph;
use crate::scalar::{cmp_weight, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "W: Weight")]
pub struct TreeEdge<W> {
    pub src: u64,
    pub dst: u64,
    pub weight: W,
}

/// A rooted tree of interaction ids. Edges are kept sorted by `(src, dst)` and
/// the cost is always summed in that order, so equal trees have bit-identical costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "W: Weight")]
pub struct EventTree<W> {
    root: u64,
    nodes: BTreeSet<u64>,
    edges: Vec<TreeEdge<W>>,
    cost: W,
}

impl<W: Weight> EventTree<W> {
    pub fn singleton(root: u64) -> Self {
        EventTree {
            root,
            nodes: BTreeSet::from([root]),
            edges: Vec::new(),
            cost: W::zero(),
        }
    }

    /// Assembles a tree from its edges. Structure is not checked here; see [`EventTree::validate`].
    pub fn from_edges(root: u64, edges: impl IntoIterator<Item = TreeEdge<W>>) -> Self {
        let mut edges: Vec<TreeEdge<W>> = edges.into_iter().collect();
        edges.sort_by_key(|e| (e.src, e.dst));
        let mut nodes = BTreeSet::from([root]);
        for e in &edges {
            nodes.insert(e.src);
            nodes.insert(e.dst);
        }
        let cost = edges.iter().fold(W::zero(), |acc, e| acc + e.weight);
        EventTree {
            root,
            nodes,
            edges,
            cost,
        }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn nodes(&self) -> &BTreeSet<u64> {
        &self.nodes
    }

    pub fn edges(&self) -> &[TreeEdge<W>] {
        &self.edges
    }

    pub fn cost(&self) -> W {
        self.cost
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.nodes.contains(&id)
    }

    fn children(&self) -> BTreeMap<u64, Vec<u64>> {
        let mut ch: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for e in &self.edges {
            ch.entry(e.src).or_default().push(e.dst);
        }
        ch
    }

    /// Latest minus earliest member timestamp.
    pub fn time_span(&self, g: &MetaGraph<W>) -> i64 {
        let ts = self
            .nodes
            .iter()
            .filter_map(|&id| g.position(id).map(|p| g.vertex(p).timestamp));
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for t in ts {
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if lo > hi {
            0
        } else {
            hi - lo
        }
    }

    /// Removes every node in `covered` together with everything beneath it.
    /// Returns `None` when the root itself is covered.
    pub fn prune(&self, covered: &BTreeSet<u64>) -> Option<Self> {
        if covered.contains(&self.root) {
            return None;
        }
        let children = self.children();
        let mut keep = Vec::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            for &c in children.get(&v).into_iter().flatten() {
                if !covered.contains(&c) {
                    stack.push(c);
                }
            }
            keep.push(v);
        }
        let keep: BTreeSet<u64> = keep.into_iter().collect();
        Some(Self::from_edges(
            self.root,
            self.edges
                .iter()
                .filter(|e| keep.contains(&e.src) && keep.contains(&e.dst))
                .copied(),
        ))
    }

    /// Drops leaves, heaviest in-edge first, until the cost is within `budget`.
    pub fn trim_to_budget(&mut self, budget: W) {
        while self.cost > budget && !self.edges.is_empty() {
            let parents: BTreeSet<u64> = self.edges.iter().map(|e| e.src).collect();
            let victim = self
                .edges
                .iter()
                .filter(|e| !parents.contains(&e.dst))
                .max_by(|a, b| cmp_weight(a.weight, b.weight).then(a.dst.cmp(&b.dst)))
                .map(|e| e.dst)
                .expect("a non-empty tree has a leaf");
            let edges: Vec<TreeEdge<W>> = self
                .edges
                .iter()
                .filter(|e| e.dst != victim)
                .copied()
                .collect();
            *self = Self::from_edges(self.root, edges);
        }
    }

    /// Checks the tree invariants against `g`: rooted tree shape, every edge
    /// present in `g` with the same weight, and cost within `budget` when given.
    pub fn validate(&self, g: &MetaGraph<W>, budget: Option<W>) -> Result<()> {
        if !g.contains(self.root) {
            return Err(Error::NotFound(self.root));
        }
        let mut indeg: BTreeMap<u64, usize> = BTreeMap::new();
        for e in &self.edges {
            let ge = g.edge_between(e.src, e.dst).ok_or_else(|| {
                Error::validation(format!("tree edge {}->{} not in graph", e.src, e.dst))
            })?;
            if ge.weight != e.weight {
                return Err(Error::validation(format!(
                    "tree edge {}->{} weight differs from graph",
                    e.src, e.dst
                )));
            }
            *indeg.entry(e.dst).or_default() += 1;
        }
        if indeg.contains_key(&self.root) {
            return Err(Error::validation("root has an in-edge"));
        }
        for &n in &self.nodes {
            if n != self.root && indeg.get(&n) != Some(&1) {
                return Err(Error::validation(format!(
                    "node {n} does not have exactly one parent"
                )));
            }
        }
        let children = self.children();
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(children.get(&v).into_iter().flatten().copied());
            }
        }
        if seen != self.nodes {
            return Err(Error::validation(
                "not every node is reachable from the root",
            ));
        }
        let recomputed = self.edges.iter().fold(W::zero(), |acc, e| acc + e.weight);
        if recomputed != self.cost {
            return Err(Error::validation("cost does not match edge weights"));
        }
        if let Some(b) = budget {
            if self.cost > b {
                return Err(Error::validation(format!(
                    "cost {} exceeds budget {b}",
                    self.cost
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(src: u64, dst: u64, weight: f64) -> TreeEdge<f64> {
        TreeEdge { src, dst, weight }
    }

    #[test]
    fn prune_removes_subtrees() {
        let t = EventTree::from_edges(1, [e(1, 2, 0.0), e(2, 3, 0.0), e(1, 4, 1.0)]);
        let p = t.prune(&BTreeSet::from([2])).unwrap();
        assert_eq!(p.nodes(), &BTreeSet::from([1, 4]));
        assert_eq!(p.cost(), 1.0);
        assert!(t.prune(&BTreeSet::from([1])).is_none());
    }

    #[test]
    fn trim_drops_heaviest_leaf() {
        let mut t = EventTree::from_edges(1, [e(1, 2, 0.5), e(2, 3, 0.25), e(1, 4, 0.75)]);
        t.trim_to_budget(0.8);
        assert_eq!(t.nodes(), &BTreeSet::from([1, 2, 3]));
        assert_eq!(t.cost(), 0.75);
    }
}
