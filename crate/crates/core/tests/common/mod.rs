#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use eventree::{EdgeKind, MetaGraph, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn vertex(id: u64, t: i64) -> Vertex {
    Vertex {
        id,
        sender: format!("s{id}"),
        recipients: BTreeSet::from([format!("s{}", id + 1)]),
        timestamp: t,
        text: None,
    }
}

const KINDS: [EdgeKind; 3] = [EdgeKind::Broadcast, EdgeKind::Relay, EdgeKind::Reply];

/// A random instance: vertex `i` has timestamp `10 * i`, vertex 0 reaches
/// everything through the extra backbone edges when `connected`.
#[derive(Debug)]
pub struct Instance {
    pub graph: MetaGraph<f64>,
    pub budget: f64,
    pub window: i64,
    pub tree_shaped: bool,
}

fn weight(rng: &mut ChaCha8Rng, dyadic: bool) -> f64 {
    if dyadic {
        rng.random_range(0..=8) as f64 * 0.25
    } else {
        (rng.random::<f64>() * 100.0).round() / 100.0
    }
}

/// Random DAG on up to `max_n` vertices with edge density drawn per instance.
pub fn random_dag(rng: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let n = rng.random_range(2..=max_n);
    let p: f64 = rng.random_range(0.15..0.6);
    let vertices: Vec<Vertex> = (0..n as u64).map(|i| vertex(i, 10 * i as i64)).collect();
    let mut edges = Vec::new();
    let mut total = 0.0;
    for j in 1..n as u64 {
        for i in 0..j {
            if rng.random::<f64>() < p {
                let w = weight(rng, false);
                total += w;
                edges.push((i, j, KINDS[rng.random_range(0..3)], w));
            }
        }
    }
    let budget = (rng.random::<f64>() * total * 0.6 * 100.0).round() / 100.0;
    let window = if rng.random_bool(0.5) {
        i64::MAX
    } else {
        rng.random_range(0..=10 * n as i64)
    };
    Instance {
        graph: MetaGraph::from_parts(vertices, edges).unwrap(),
        budget,
        window,
        tree_shaped: false,
    }
}

/// Random recursive tree rooted at 0 with weights in multiples of 1/4.
pub fn random_tree(rng: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let n = rng.random_range(1..=max_n);
    let vertices: Vec<Vertex> = (0..n as u64).map(|i| vertex(i, 10 * i as i64)).collect();
    let edges: Vec<_> = (1..n as u64)
        .map(|j| {
            (
                rng.random_range(0..j),
                j,
                KINDS[rng.random_range(0..3)],
                weight(rng, true),
            )
        })
        .collect();
    let total: f64 = edges.iter().map(|e| e.3).sum();
    let budget = rng.random_range(0..=(total * 4.0) as u32) as f64 * 0.25;
    Instance {
        graph: MetaGraph::from_parts(vertices, edges).unwrap(),
        budget,
        window: i64::MAX,
        tree_shaped: true,
    }
}

/// The 200 instances shared by the solver and upper-bound checks; every
/// fourth one is a tree with exactly representable weights.
pub fn oracle_instances(seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..200)
        .map(|i| {
            if i % 4 == 3 {
                random_tree(&mut rng, 15)
            } else {
                random_dag(&mut rng, 15)
            }
        })
        .collect()
}
