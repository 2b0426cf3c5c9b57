//! Budgeted maximum-tree solvers.
//!
//! Every solver works on the sub-DAG reachable from the root and returns an
//! [`EventTree`] whose cost does not exceed the budget. `tmaxtree` adds the
//! time window by cutting the graph at `t_root + window`.

mod brute;
mod dp;
mod dst;
mod greedy;
pub(crate) mod reach;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use brute::BRUTE_FORCE_LIMIT;
pub use dp::discretize;

use crate::error::{Error, Result};
use crate::graph::MetaGraph;
use crate::scalar::Weight;
use crate::tree::EventTree;
use reach::Reach;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Greedy,
    Random,
    Dp,
    DpDij,
    BinarySearch,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Greedy,
        Algorithm::Random,
        Algorithm::Dp,
        Algorithm::DpDij,
        Algorithm::BinarySearch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Random => "random",
            Algorithm::Dp => "dp",
            Algorithm::DpDij => "dp_dij",
            Algorithm::BinarySearch => "binary_search",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::validation(format!(
                    "unknown algorithm '{s}' (valid: {})",
                    valid.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "W: Weight")]
pub struct SolveParams<W> {
    pub budget: W,
    /// Time budget in seconds.
    pub window: Option<i64>,
    pub algorithm: Algorithm,
    pub dp_decimals: u32,
    pub rng_seed: u64,
}

impl<W: Weight> SolveParams<W> {
    pub fn new(budget: W, algorithm: Algorithm) -> Self {
        SolveParams {
            budget,
            window: None,
            algorithm,
            dp_decimals: 2,
            rng_seed: 0,
        }
    }

    pub fn with_window(mut self, window: i64) -> Self {
        self.window = Some(window);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget.is_nan() || self.budget < W::zero() {
            return Err(Error::validation("budget must be non-negative"));
        }
        if self.dp_decimals > 6 {
            return Err(Error::validation("dp_decimals must be at most 6"));
        }
        if self.window.is_some_and(|w| w < 0) {
            return Err(Error::validation("window must be non-negative"));
        }
        Ok(())
    }
}

fn horizon<W: Weight>(g: &MetaGraph<W>, root: u64, window: i64) -> Result<i64> {
    let p = g.position(root).ok_or(Error::NotFound(root))?;
    Ok(g.vertex(p).timestamp.saturating_add(window))
}

fn dispatch<W: Weight>(reach: &Reach<'_, W>, p: &SolveParams<W>) -> EventTree<W> {
    match p.algorithm {
        Algorithm::Greedy => greedy::greedy(reach, p.budget),
        Algorithm::Random => greedy::random(reach, p.budget, p.rng_seed),
        Algorithm::Dp => dp::dag_heuristic(reach, p.budget, p.dp_decimals),
        Algorithm::DpDij => dp::dp_dij(reach, p.budget, p.dp_decimals),
        Algorithm::BinarySearch => dst::binary_search(reach, p.budget),
    }
}

/// MaxTree: the chosen algorithm on the whole graph, ignoring `p.window`.
pub fn maxtree<W: Weight>(g: &MetaGraph<W>, root: u64, p: &SolveParams<W>) -> Result<EventTree<W>> {
    p.validate()?;
    let reach = Reach::new(g, root, None)?;
    Ok(dispatch(&reach, p))
}

/// TMaxTree: MaxTree on the graph restricted to `[t_root, t_root + window]`.
pub fn tmaxtree<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    p: &SolveParams<W>,
) -> Result<EventTree<W>> {
    p.validate()?;
    let window = p
        .window
        .ok_or_else(|| Error::validation("tmaxtree needs a time window"))?;
    let reach = Reach::new(g, root, Some(horizon(g, root, window)?))?;
    Ok(dispatch(&reach, p))
}

/// Solves with the window when one is set, otherwise without.
pub fn solve<W: Weight>(g: &MetaGraph<W>, root: u64, p: &SolveParams<W>) -> Result<EventTree<W>> {
    if p.window.is_some() {
        tmaxtree(g, root, p)
    } else {
        maxtree(g, root, p)
    }
}

fn check_budget<W: Weight>(budget: W) -> Result<()> {
    if budget.is_nan() || budget < W::zero() {
        return Err(Error::validation("budget must be non-negative"));
    }
    Ok(())
}

pub fn greedy_grow<W: Weight>(g: &MetaGraph<W>, root: u64, budget: W) -> Result<EventTree<W>> {
    check_budget(budget)?;
    Ok(greedy::greedy(&Reach::new(g, root, None)?, budget))
}

pub fn random_grow<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    budget: W,
    seed: u64,
) -> Result<EventTree<W>> {
    check_budget(budget)?;
    Ok(greedy::random(&Reach::new(g, root, None)?, budget, seed))
}

/// Optimal (for the discretized weights) when the part of `g` reachable from
/// `root` is an out-tree; errors otherwise.
pub fn dp_tree_exact<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    budget: W,
    decimals: u32,
) -> Result<EventTree<W>> {
    check_budget(budget)?;
    dp::tree_exact(&Reach::new(g, root, None)?, budget, decimals)
}

pub fn dp_dag_heuristic<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    budget: W,
    decimals: u32,
) -> Result<EventTree<W>> {
    check_budget(budget)?;
    Ok(dp::dag_heuristic(
        &Reach::new(g, root, None)?,
        budget,
        decimals,
    ))
}

pub fn dp_dij<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    budget: W,
    decimals: u32,
) -> Result<EventTree<W>> {
    check_budget(budget)?;
    Ok(dp::dp_dij(&Reach::new(g, root, None)?, budget, decimals))
}

/// Level-1 directed Steiner tree: union of shortest paths to the `quota`
/// nearest terminals (all vertices when `terminals` is `None`). The flag is
/// set when fewer than `quota` terminals are reachable.
pub fn dst_level1<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    terminals: Option<&BTreeSet<u64>>,
    quota: usize,
) -> Result<(EventTree<W>, bool)> {
    if quota < 1 {
        return Err(Error::validation("quota must be at least 1"));
    }
    let reach = Reach::new(g, root, None)?;
    Ok(dst::Closure::new(&reach, terminals).tree(quota))
}

pub fn binary_search_dst<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    budget: W,
) -> Result<EventTree<W>> {
    check_budget(budget)?;
    Ok(dst::binary_search(&Reach::new(g, root, None)?, budget))
}

/// Exact optimum by exhaustive search; see [`BRUTE_FORCE_LIMIT`].
pub fn brute_force_opt<W: Weight>(g: &MetaGraph<W>, root: u64, budget: W) -> Result<EventTree<W>> {
    check_budget(budget)?;
    brute::brute_force(&Reach::new(g, root, None)?, budget)
}

/// [`brute_force_opt`] within `[t_root, t_root + window]`.
pub fn brute_force_windowed<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    budget: W,
    window: i64,
) -> Result<EventTree<W>> {
    check_budget(budget)?;
    brute::brute_force(
        &Reach::new(g, root, Some(horizon(g, root, window)?))?,
        budget,
    )
}

/// Number of vertices reachable from `root`, itself included.
pub fn reachable_count<W: Weight>(
    g: &MetaGraph<W>,
    root: u64,
    window: Option<i64>,
) -> Result<usize> {
    let h = match window {
        Some(w) => Some(horizon(g, root, w)?),
        None => None,
    };
    Ok(Reach::new(g, root, h)?.len())
}
