//! Root ranking by event-size upper bound and greedy selection of k
//! vertex-disjoint event trees.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MetaGraph;
use crate::maxtree::reach::Reach;
use crate::maxtree::{solve, SolveParams};
use crate::scalar::{cmp_weight, Weight};
use crate::tree::{EventTree, TreeEdge};

/// Cheapest edge entering `u`; ties go to the smaller source id.
pub fn min_in_edge<W: Weight>(g: &MetaGraph<W>, u: u64) -> Result<Option<TreeEdge<W>>> {
    let p = g.position(u).ok_or(Error::NotFound(u))?;
    Ok(g.in_edges(p)
        .min_by(|a, b| {
            cmp_weight(a.weight, b.weight).then(g.vertex(a.src).id.cmp(&g.vertex(b.src).id))
        })
        .map(|e| TreeEdge {
            src: g.vertex(e.src).id,
            dst: u,
            weight: e.weight,
        }))
}

fn greedy_count<W: Weight>(mut count: usize, mut cost: W, budget: W, sorted: &[W]) -> usize {
    let slack = budget.abs() * W::from_f64_lossy(1e-9) + W::from_f64_lossy(1e-12);
    for &m in sorted {
        if cost + m > budget + slack {
            break;
        }
        cost = cost + m;
        count += 1;
    }
    count
}

/// Upper bound on the size of any tree rooted at `root` within budget and window.
///
/// Works on the sub-DAG `D` reachable from the root inside
/// `[t_root, t_root + window]`. Every non-root vertex of a tree pays at least
/// its cheapest in-edge within `D`, and some child of the root pays at least
/// the root's lightest out-edge. Two forests are grown greedily over vertices
/// sorted by cheapest in-edge: one seeded with the root's lightest child edge,
/// one with the root alone. Both counts bound the optimum; the smaller is returned.
pub fn size_upper_bound<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    budget: W,
    window: i64,
) -> Result<usize> {
    let t = g.position(root).ok_or(Error::NotFound(root))?;
    let reach = Reach::new(g, root, Some(g.vertex(t).timestamp.saturating_add(window)))?;
    Ok(upper_bound_on(&reach, budget))
}

fn upper_bound_on<W: Weight>(reach: &Reach<'_, W>, budget: W) -> usize {
    let n = reach.len();
    if n == 1 {
        return 1;
    }
    let mut min_in: Vec<W> = (1..n)
        .map(|v| {
            reach.inn[v]
                .iter()
                .map(|&(_, w)| w)
                .min_by(|a, b| cmp_weight(*a, *b))
                .expect("reachable vertex has an in-edge")
        })
        .collect();
    min_in.sort_by(|a, b| cmp_weight(*a, *b));

    let lightest_child = reach.out[0]
        .iter()
        .map(|&(_, w)| w)
        .min_by(|a, b| cmp_weight(*a, *b))
        .expect("root of a non-trivial reach has an out-edge");
    let seeded = if lightest_child > budget {
        1
    } else {
        greedy_count(2, lightest_child, budget, &min_in).min(n)
    };
    let plain = greedy_count(1, W::zero(), budget, &min_in);
    seeded.min(plain)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RootRanking {
    /// `(root id, upper bound)`, non-increasing in the bound, ties by id.
    pub entries: Vec<(u64, usize)>,
}

impl RootRanking {
    pub fn roots(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|&(r, _)| r)
    }
}

/// Ranks every vertex by [`size_upper_bound`] and keeps the top `limit`.
pub fn rank_roots<W: Weight>(
    g: &MetaGraph<W>,
    budget: W,
    window: i64,
    limit: usize,
) -> Result<RootRanking> {
    if limit < 1 {
        return Err(Error::validation("limit must be at least 1"));
    }
    let mut entries: Vec<(u64, usize)> = g
        .vertices()
        .par_iter()
        .map(|v| size_upper_bound(g, v.id, budget, window).map(|u| (v.id, u)))
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    entries.truncate(limit);
    Ok(RootRanking { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    UpperBound,
    Random,
}

impl std::str::FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upperbound" | "upper_bound" => Ok(Sampling::UpperBound),
            "random" => Ok(Sampling::Random),
            _ => Err(Error::validation(format!(
                "unknown sampling '{s}' (valid: upperbound, random)"
            ))),
        }
    }
}

impl std::fmt::Display for Sampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampling::UpperBound => "upperbound",
            Sampling::Random => "random",
        })
    }
}

/// Order in which candidate roots are tried.
#[derive(Debug, Clone)]
pub enum RootOrder {
    Ranked(RootRanking),
    Random { seed: u64 },
}

impl RootOrder {
    pub fn for_sampling<W: Weight>(
        g: &MetaGraph<W>,
        params: &SolveParams<W>,
        sampling: Sampling,
        seed: u64,
    ) -> Result<Self> {
        Ok(match sampling {
            Sampling::UpperBound => RootOrder::Ranked(rank_roots(
                g,
                params.budget,
                params.window.unwrap_or(i64::MAX),
                g.len().max(1),
            )?),
            Sampling::Random => RootOrder::Random { seed },
        })
    }

    fn roots<W: Weight>(&self, g: &MetaGraph<W>) -> Vec<u64> {
        match self {
            RootOrder::Ranked(r) => r.roots().collect(),
            RootOrder::Random { seed } => {
                let mut ids: Vec<u64> = g.vertices().iter().map(|v| v.id).collect();
                ids.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
                ids
            }
        }
    }
}

/// Solves trees for roots in `order` until `limit` roots have been tried.
/// Roots already inside an earlier candidate are skipped without counting;
/// single-vertex trees are discarded.
pub fn candidate_pool<W: Weight>(
    g: &MetaGraph<W>,
    params: &SolveParams<W>,
    order: &RootOrder,
    limit: usize,
) -> Result<Vec<EventTree<W>>> {
    params.validate()?;
    let roots = order.roots(g);
    let chunk = rayon::current_num_threads().max(1) * 2;
    let mut covered: BTreeSet<u64> = BTreeSet::new();
    let mut pool = Vec::new();
    let mut tried = 0;
    let mut next = 0;
    while tried < limit && next < roots.len() {
        let batch: Vec<u64> = roots[next..]
            .iter()
            .copied()
            .filter(|r| !covered.contains(r))
            .take(chunk.min(limit - tried))
            .collect();
        if batch.is_empty() {
            break;
        }
        let solved: Vec<EventTree<W>> = batch
            .par_iter()
            .map(|&r| solve(g, r, params))
            .collect::<Result<_>>()?;
        let last = *batch.last().unwrap();
        for t in solved {
            if tried == limit {
                break;
            }
            // A tree accepted earlier in this batch may cover later roots.
            if covered.contains(&t.root()) {
                continue;
            }
            tried += 1;
            if t.size() >= 2 {
                covered.extend(t.nodes().iter().copied());
                pool.push(t);
            }
        }
        next += roots[next..].iter().position(|&r| r == last).unwrap() + 1;
    }
    Ok(pool)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "W: Weight")]
pub struct EventSet<W> {
    pub trees: Vec<EventTree<W>>,
    pub covered: BTreeSet<u64>,
    /// Fewer than k usable candidates existed.
    pub shortfall: bool,
}

impl<W: Weight> EventSet<W> {
    pub fn coverage(&self) -> usize {
        self.covered.len()
    }
}

/// Greedy maximum coverage with vertex-disjointness: after each pick, every
/// remaining candidate loses the covered vertices and their subtrees, and
/// candidates left with fewer than two vertices are dropped. Ties go to the
/// smaller root id.
pub fn select_k<W: Weight>(candidates: &[EventTree<W>], k: usize) -> EventSet<W> {
    let mut live: Vec<EventTree<W>> = candidates
        .iter()
        .filter(|t| t.size() >= 2)
        .cloned()
        .collect();
    let mut covered = BTreeSet::new();
    let mut trees = Vec::new();
    while trees.len() < k {
        let best = live
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.size().cmp(&b.size()).then(b.root().cmp(&a.root())))
            .map(|(i, _)| i);
        let Some(i) = best else { break };
        let chosen = live.swap_remove(i);
        covered.extend(chosen.nodes().iter().copied());
        trees.push(chosen);
        live = live
            .iter()
            .filter_map(|t| t.prune(&covered))
            .filter(|t| t.size() >= 2)
            .collect();
    }
    EventSet {
        shortfall: trees.len() < k,
        trees,
        covered,
    }
}

/// k-MaxTrees: candidate trees for sampled roots, then greedy disjoint coverage.
pub fn top_k_events<W: Weight>(
    g: &MetaGraph<W>,
    params: &SolveParams<W>,
    k: usize,
    order: &RootOrder,
    limit: usize,
) -> Result<EventSet<W>> {
    if k < 1 {
        return Err(Error::validation("k must be at least 1"));
    }
    let pool = candidate_pool(g, params, order, limit)?;
    Ok(select_k(&pool, k))
}

/// Coverage of `select_k` on each prefix of the candidate pool.
pub fn coverage_curve<W: Weight>(candidates: &[EventTree<W>], k: usize) -> Vec<usize> {
    (1..=candidates.len())
        .map(|m| select_k(&candidates[..m], k).coverage())
        .collect()
}

/// Plain greedy maximum k-coverage over sets; returns chosen indices.
/// Ties go to the smaller index; stops early when no set adds anything.
pub fn greedy_max_coverage(sets: &[BTreeSet<u64>], k: usize) -> Vec<usize> {
    let mut covered: BTreeSet<u64> = BTreeSet::new();
    let mut chosen = Vec::new();
    for _ in 0..k {
        let best = sets
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, s)| (s.difference(&covered).count(), i))
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        match best {
            Some((gain, i)) if gain > 0 => {
                covered.extend(sets[i].iter().copied());
                chosen.push(i);
            }
            _ => break,
        }
    }
    chosen
}
