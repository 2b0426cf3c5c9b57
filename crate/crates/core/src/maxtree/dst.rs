//! Level-1 directed Steiner tree over the shortest-path closure, and the
//! quota binary search that turns it into a budgeted solver.

use std::collections::BTreeSet;

use super::dp::shortest_paths;
use super::reach::Reach;
use crate::scalar::{cmp_weight, Weight};
use crate::tree::EventTree;

/// Shortest-path structure from the root with terminals ranked by distance.
pub(crate) struct Closure<'r, 'g, W> {
    reach: &'r Reach<'g, W>,
    pred: Vec<Option<usize>>,
    /// Reachable terminals sorted by (distance, topological position).
    ranked: Vec<usize>,
}

impl<'r, 'g, W: Weight> Closure<'r, 'g, W> {
    pub fn new(reach: &'r Reach<'g, W>, terminals: Option<&BTreeSet<u64>>) -> Self {
        let (dist, pred) = shortest_paths(reach);
        let mut ranked: Vec<usize> = (0..reach.len())
            .filter(|&v| v == 0 || terminals.is_none_or(|x| x.contains(&reach.id(v))))
            .collect();
        ranked.sort_by(|&a, &b| cmp_weight(dist[a], dist[b]).then(a.cmp(&b)));
        Closure {
            reach,
            pred,
            ranked,
        }
    }

    /// Number of terminals reachable from the root (the root included).
    pub fn reachable_terminals(&self) -> usize {
        self.ranked.len()
    }

    /// Union of shortest paths to the `quota` nearest terminals, plus a flag
    /// set when fewer than `quota` terminals are reachable.
    pub fn tree(&self, quota: usize) -> (EventTree<W>, bool) {
        let take = quota.min(self.ranked.len());
        let mut member = vec![false; self.reach.len()];
        member[0] = true;
        for &t in &self.ranked[..take] {
            let mut v = t;
            while !member[v] {
                member[v] = true;
                v = self.pred[v].expect("reachable vertex has a predecessor");
            }
        }
        (
            self.reach.tree_from_parents(&self.pred, &member),
            quota > self.ranked.len(),
        )
    }
}

/// Largest quota whose level-1 tree fits the budget, found by binary search
/// under the invariant `lo` feasible, `hi` infeasible.
pub(crate) fn binary_search<W: Weight>(reach: &Reach<'_, W>, budget: W) -> EventTree<W> {
    let closure = Closure::new(reach, None);
    let feasible = |q: usize| {
        let (t, _) = closure.tree(q);
        (t.cost() <= budget).then_some(t)
    };
    let n = closure.reachable_terminals();
    if let Some(t) = feasible(n) {
        return t;
    }
    let (mut lo, mut hi) = (1usize, n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Boundary re-check: the upper end was never confirmed feasible.
    feasible(hi)
        .or_else(|| feasible(lo))
        .unwrap_or_else(|| EventTree::singleton(reach.root_id()))
}
