//! Exhaustive search for the optimal budgeted tree on small instances.

use super::reach::Reach;
use crate::error::{Error, Result};
use crate::scalar::{cmp_weight, Weight};
use crate::tree::EventTree;

pub const BRUTE_FORCE_LIMIT: usize = 20;

struct Search<'a, 'g, W> {
    reach: &'a Reach<'g, W>,
    budget: W,
    slack: W,
    member: Vec<bool>,
    parent: Vec<usize>,
    best: Option<(EventTree<W>, Vec<u64>)>,
}

impl<W: Weight> Search<'_, '_, W> {
    fn better(&self, cand: &EventTree<W>, ids: &[u64]) -> bool {
        match &self.best {
            None => true,
            Some((b, bids)) => cand
                .size()
                .cmp(&b.size())
                .then_with(|| cmp_weight(b.cost(), cand.cost()))
                .then_with(|| bids.as_slice().cmp(ids))
                .is_gt(),
        }
    }

    fn leaf(&mut self) {
        let size = self.member.iter().filter(|&&m| m).count();
        if self.best.as_ref().is_some_and(|(b, _)| b.size() > size) {
            return;
        }
        let t = self.reach.tree(
            (1..self.reach.len())
                .filter(|&v| self.member[v])
                .map(|v| (self.parent[v], v)),
        );
        if t.cost() > self.budget {
            return;
        }
        let ids: Vec<u64> = t.nodes().iter().copied().collect();
        if self.better(&t, &ids) {
            self.best = Some((t, ids));
        }
    }

    // Vertices are decided in topological order, so all in-neighbours of `v`
    // are already decided and its cheapest in-set parent is known.
    fn visit(&mut self, v: usize, size: usize, cost: W) {
        let n = self.reach.len();
        if let Some((b, _)) = &self.best {
            if size + (n - v) < b.size() {
                return;
            }
        }
        if v == n {
            self.leaf();
            return;
        }
        let cheapest = self.reach.inn[v]
            .iter()
            .filter(|&&(p, _)| self.member[p])
            .min_by(|a, b| cmp_weight(a.1, b.1).then(self.reach.id(a.0).cmp(&self.reach.id(b.0))))
            .copied();
        if let Some((p, w)) = cheapest {
            if cost + w <= self.budget + self.slack {
                self.member[v] = true;
                self.parent[v] = p;
                self.visit(v + 1, size + 1, cost + w);
                self.member[v] = false;
            }
        }
        self.visit(v + 1, size, cost);
    }
}

/// Optimal tree: maximum size, then minimum cost, then lexicographically
/// smallest id set. Refuses when more than [`BRUTE_FORCE_LIMIT`] vertices are reachable.
pub(crate) fn brute_force<W: Weight>(reach: &Reach<'_, W>, budget: W) -> Result<EventTree<W>> {
    if reach.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::GuardExceeded {
            reachable: reach.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut member = vec![false; reach.len()];
    member[0] = true;
    let mut s = Search {
        reach,
        budget,
        // Pruning tolerates summation-order rounding; leaves re-check exactly.
        slack: budget.abs() * W::from_f64_lossy(1e-9) + W::from_f64_lossy(1e-12),
        member,
        parent: vec![0; reach.len()],
        best: None,
    };
    s.visit(1, 1, W::zero());
    Ok(s.best
        .map(|(t, _)| t)
        .unwrap_or_else(|| EventTree::singleton(reach.root_id())))
}
