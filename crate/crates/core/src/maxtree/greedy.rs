use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::reach::Reach;
use crate::scalar::Weight;
use crate::tree::EventTree;

/// Grows from the root by always taking the lightest cutset edge that fits
/// the budget. Ties go to the smaller destination id, then source id.
pub(crate) fn greedy<W: Weight>(reach: &Reach<'_, W>, budget: W) -> EventTree<W> {
    let n = reach.len();
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut heap = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<_>, v: usize| {
        for &(d, w) in &reach.out[v] {
            heap.push(Reverse((
                OrderedFloat(w.as_f64()),
                reach.id(d),
                reach.id(v),
                d,
                v,
            )));
        }
    };
    push(&mut heap, 0);
    let mut cost = W::zero();
    let mut links = Vec::new();
    while let Some(Reverse((_, _, _, d, s))) = heap.pop() {
        if in_tree[d] {
            continue;
        }
        let w = reach.weight(s, d);
        // Heap order means no remaining edge is lighter.
        if cost + w > budget {
            break;
        }
        cost = cost + w;
        in_tree[d] = true;
        links.push((s, d));
        push(&mut heap, d);
    }
    let mut t = reach.tree(links);
    t.trim_to_budget(budget);
    t
}

/// Like [`greedy`] but picks uniformly among the cutset edges that fit.
pub(crate) fn random<W: Weight>(reach: &Reach<'_, W>, budget: W, seed: u64) -> EventTree<W> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = reach.len();
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut cutset: Vec<(usize, usize, W)> = reach.out[0].iter().map(|&(d, w)| (0, d, w)).collect();
    let mut cost = W::zero();
    let mut links = Vec::new();
    loop {
        cutset.retain(|&(_, d, _)| !in_tree[d]);
        let feasible: Vec<usize> = (0..cutset.len())
            .filter(|&k| cost + cutset[k].2 <= budget)
            .collect();
        if feasible.is_empty() {
            break;
        }
        let (s, d, w) = cutset[feasible[rng.random_range(0..feasible.len())]];
        cost = cost + w;
        in_tree[d] = true;
        links.push((s, d));
        cutset.extend(reach.out[d].iter().map(|&(x, wx)| (d, x, wx)));
    }
    let mut t = reach.tree(links);
    t.trim_to_budget(budget);
    t
}
