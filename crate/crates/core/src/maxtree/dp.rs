//! Knapsack-style dynamic programs over trees and DAGs with discretized weights.

use super::reach::Reach;
use crate::error::{Error, Result};
use crate::scalar::Weight;
use crate::tree::EventTree;

const NONE: u32 = u32::MAX;

/// Scales by `10^decimals` and rounds half up.
pub fn discretize<W: Weight>(w: W, decimals: u32) -> u64 {
    let scaled = w.as_f64() * 10f64.powi(decimals as i32);
    if !scaled.is_finite() {
        return u64::MAX;
    }
    (scaled + 0.5).floor().max(0.0) as u64
}

/// Indices where a non-decreasing table strictly increases (plus index 0).
fn breakpoints(table: &[u32]) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    let mut last = 0;
    for (b, &v) in table.iter().enumerate() {
        if b == 0 || v > last {
            out.push((b, v));
            last = v;
        }
    }
    out
}

/// Smallest budget achieving the table's maximum.
fn cheapest_best(table: &[u32]) -> usize {
    let best = *table.last().unwrap();
    table.iter().position(|&v| v == best).unwrap()
}

/// Exact tree knapsack. `children[v]` lists `(child, integer weight)` with
/// `child > v`; vertex 0 is the root. Returns `(parent, child)` links of a
/// maximum-size subtree whose integer cost is at most `budget`, preferring the
/// smallest such cost.
pub(crate) fn tree_knapsack(children: &[Vec<(usize, u64)>], budget: u64) -> Vec<(usize, usize)> {
    let n = children.len();
    let total: u64 = children
        .iter()
        .flatten()
        .map(|&(_, w)| w)
        .fold(0u64, u64::saturating_add);
    let cap = budget.min(total) as usize;
    let mut table: Vec<Vec<u32>> = vec![Vec::new(); n];
    // choice[v][k][b]: budget given to the k-th child at table budget b.
    let mut choice: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n];
    for v in (0..n).rev() {
        let mut cur = vec![1u32; cap + 1];
        let mut picks = Vec::with_capacity(children[v].len());
        for &(c, w) in &children[v] {
            let bps = breakpoints(&table[c]);
            let mut next = cur.clone();
            let mut pick = vec![NONE; cap + 1];
            if (w as usize) <= cap {
                let w = w as usize;
                for b in w..=cap {
                    for &(j, sz) in &bps {
                        if w + j > b {
                            break;
                        }
                        let cand = cur[b - w - j] + sz;
                        if cand > next[b] {
                            next[b] = cand;
                            pick[b] = j as u32;
                        }
                    }
                }
            }
            cur = next;
            picks.push(pick);
        }
        table[v] = cur;
        choice[v] = picks;
        // Each child has exactly one parent, so its table is now dead.
        for &(c, _) in &children[v] {
            table[c] = Vec::new();
        }
    }

    let mut links = Vec::new();
    let mut stack = vec![(0usize, cheapest_best(&table[0]))];
    while let Some((v, mut b)) = stack.pop() {
        for (k, &(c, w)) in children[v].iter().enumerate().rev() {
            let j = choice[v][k][b];
            if j != NONE {
                links.push((v, c));
                stack.push((c, j as usize));
                b -= w as usize + j as usize;
            }
        }
    }
    links
}

/// Maximum subtree of an out-tree rooted at the reach root, optimal for the
/// discretized weights.
pub(crate) fn tree_exact<W: Weight>(
    reach: &Reach<'_, W>,
    budget: W,
    decimals: u32,
) -> Result<EventTree<W>> {
    for v in 1..reach.len() {
        if reach.inn[v].len() != 1 {
            return Err(Error::validation(format!(
                "input is not an out-tree: vertex {} has {} parents",
                reach.id(v),
                reach.inn[v].len()
            )));
        }
    }
    let children: Vec<Vec<(usize, u64)>> = reach
        .out
        .iter()
        .map(|row| {
            row.iter()
                .map(|&(c, w)| (c, discretize(w, decimals)))
                .collect()
        })
        .collect();
    let links = tree_knapsack(&children, discretize(budget, decimals));
    let mut t = reach.tree(links);
    t.trim_to_budget(budget);
    Ok(t)
}

/// Candidate subtree at one DP cell: size, member bitset, and the
/// `(child, child budget)` pairs it was assembled from.
#[derive(Clone)]
struct Cell {
    size: u32,
    members: Vec<u64>,
    picks: Vec<(usize, u32)>,
}

fn disjoint(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & y == 0)
}

fn union(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

/// Tree DP generalized to DAGs: a child's subtree is merged only when it
/// shares no vertex with the subtrees already attached. Valid but not
/// necessarily optimal.
pub(crate) fn dag_heuristic<W: Weight>(
    reach: &Reach<'_, W>,
    budget: W,
    decimals: u32,
) -> EventTree<W> {
    let n = reach.len();
    let words = n.div_ceil(64);
    let out: Vec<Vec<(usize, u64)>> = reach
        .out
        .iter()
        .map(|row| {
            row.iter()
                .map(|&(c, w)| (c, discretize(w, decimals)))
                .collect()
        })
        .collect();
    // No tree can cost more than every vertex paying its heaviest in-edge.
    let total: u64 = (1..n)
        .map(|v| {
            reach.inn[v]
                .iter()
                .map(|&(_, w)| discretize(w, decimals))
                .max()
                .unwrap_or(0)
        })
        .fold(0u64, u64::saturating_add);
    let cap = discretize(budget, decimals).min(total) as usize;

    let mut table: Vec<Vec<Cell>> = vec![Vec::new(); n];
    for v in (0..n).rev() {
        let mut own = vec![0u64; words];
        own[v / 64] |= 1 << (v % 64);
        let mut cur = vec![
            Cell {
                size: 1,
                members: own,
                picks: Vec::new(),
            };
            cap + 1
        ];

        // Children in increasing density (cost per vertex) of their best subtree.
        let mut kids: Vec<(usize, u64, f64)> = out[v]
            .iter()
            .map(|&(c, w)| {
                let t = &table[c];
                let b = t.iter().position(|x| x.size == t[cap].size).unwrap();
                (c, w, (w + b as u64) as f64 / t[cap].size as f64)
            })
            .collect();
        kids.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap().then(a.0.cmp(&b.0)));

        for (c, w, _) in kids {
            let w = w as usize;
            if w > cap {
                continue;
            }
            let sizes: Vec<u32> = table[c].iter().map(|x| x.size).collect();
            let bps = breakpoints(&sizes);
            let mut next = cur.clone();
            for b in w..=cap {
                for &(j, sz) in &bps {
                    if w + j > b {
                        break;
                    }
                    let base = &cur[b - w - j];
                    if base.size + sz <= next[b].size {
                        continue;
                    }
                    let child = &table[c][j];
                    if !disjoint(&base.members, &child.members) {
                        continue;
                    }
                    let mut picks = base.picks.clone();
                    picks.push((c, j as u32));
                    next[b] = Cell {
                        size: base.size + sz,
                        members: union(&base.members, &child.members),
                        picks,
                    };
                }
            }
            cur = next;
        }
        table[v] = cur;
    }

    let sizes: Vec<u32> = table[0].iter().map(|x| x.size).collect();
    let mut links = Vec::new();
    let mut stack = vec![(0usize, cheapest_best(&sizes))];
    while let Some((v, b)) = stack.pop() {
        for &(c, j) in &table[v][b].picks {
            links.push((v, c));
            stack.push((c, j as usize));
        }
    }
    let mut t = reach.tree(links);
    t.trim_to_budget(budget);
    t
}

/// Shortest-path distances and predecessors from the reach root. Equal
/// distances keep the predecessor with the smaller vertex id.
pub(crate) fn shortest_paths<W: Weight>(reach: &Reach<'_, W>) -> (Vec<W>, Vec<Option<usize>>) {
    use ordered_float::OrderedFloat;
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = reach.len();
    let mut dist = vec![W::infinity(); n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    dist[0] = W::zero();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrderedFloat(0.0f64), 0usize)));
    while let Some(Reverse((_, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        let d = dist[u];
        done[u] = true;
        for &(v, w) in &reach.out[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some(u);
                heap.push(Reverse((OrderedFloat(nd.as_f64()), v)));
            } else if nd == dist[v] && pred[v].is_some_and(|p| reach.id(u) < reach.id(p)) {
                pred[v] = Some(u);
            }
        }
    }
    (dist, pred)
}

/// Shortest-path predecessor tree from the root, then the exact tree DP on it.
pub(crate) fn dp_dij<W: Weight>(reach: &Reach<'_, W>, budget: W, decimals: u32) -> EventTree<W> {
    let (_, pred) = shortest_paths(reach);
    let mut children: Vec<Vec<(usize, u64)>> = vec![Vec::new(); reach.len()];
    for (v, p) in pred.iter().enumerate().skip(1) {
        let p = p.expect("every reach vertex is reachable");
        children[p].push((v, discretize(reach.weight(p, v), decimals)));
    }
    let links = tree_knapsack(&children, discretize(budget, decimals));
    let mut t = reach.tree(links);
    t.trim_to_budget(budget);
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discretize_rounds_half_up() {
        assert_eq!(discretize(0.3f64, 1), 3);
        assert_eq!(discretize(0.25f64, 1), 3);
        assert_eq!(discretize(0.24f64, 1), 2);
        assert_eq!(discretize(1.0f32, 2), 100);
        assert_eq!(discretize(f64::INFINITY, 2), u64::MAX);
    }

    #[test]
    fn star_knapsack() {
        // root 0 with children weighted 3, 5, 9 and budget 8
        let children = vec![vec![(1, 3), (2, 5), (3, 9)], vec![], vec![], vec![]];
        let mut links = tree_knapsack(&children, 8);
        links.sort();
        assert_eq!(links, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn path_knapsack() {
        let children = vec![vec![(1, 1)], vec![(2, 1)], vec![]];
        assert_eq!(tree_knapsack(&children, 1), vec![(0, 1)]);
        assert!(tree_knapsack(&children, 0).is_empty());
    }
}
