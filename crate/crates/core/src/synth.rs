//! Synthetic interaction networks with planted event trees, scoring, and
//! parameter sweeps.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::time::Instant;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::content::{cosine_distance, dissimilarity, ContentVector};
use crate::error::{Error, Result};
use crate::graph::{build, BuildOptions, EdgeKind, MetaGraph};
use crate::interaction::Interaction;
use crate::maxtree::{tmaxtree, Algorithm, SolveParams};
use crate::scalar::Weight;
use crate::tree::{EventTree, TreeEdge};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_events: usize,
    pub event_size: usize,
    /// Noise interactions per planted interaction.
    pub noise_level: f64,
    pub n_participants: usize,
    pub topic_dim: usize,
    /// Seconds covered by the whole dataset.
    pub time_span: i64,
    /// Seconds within which one event unfolds.
    pub event_window: i64,
    /// Planted links cost between half of this and all of it; noise stays at
    /// least three times this away from every event interaction.
    pub edge_bound: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_events: 1,
            event_size: 20,
            noise_level: 0.0,
            n_participants: 50,
            topic_dim: 10,
            time_span: 7 * 86_400,
            event_window: 86_400,
            edge_bound: 0.1,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.event_size < 1 {
            return Err(Error::validation("event_size must be at least 1"));
        }
        if self.noise_level.is_nan() || self.noise_level < 0.0 {
            return Err(Error::validation("noise_level must be non-negative"));
        }
        if self.n_participants < 3 {
            return Err(Error::validation("n_participants must be at least 3"));
        }
        if self.topic_dim < 2 {
            return Err(Error::validation("topic_dim must be at least 2"));
        }
        if self.event_window < 1 || self.time_span < self.event_window {
            return Err(Error::validation("need 1 <= event_window <= time_span"));
        }
        if !(self.edge_bound > 0.0 && self.edge_bound <= 1.0 / 3.0) {
            return Err(Error::validation("edge_bound must lie in (0, 1/3]"));
        }
        Ok(())
    }
}

/// One planted event before ids are assigned: interactions in local index
/// order and `(parent, child)` tree links between them.
#[derive(Debug, Clone)]
pub struct PlantedEvent<W> {
    pub interactions: Vec<Interaction<W>>,
    pub links: Vec<(usize, usize)>,
    pub kinds: Vec<EdgeKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEvent {
    pub root: u64,
    pub ids: BTreeSet<u64>,
    pub edges: Vec<(u64, u64)>,
    /// Cost of the planted tree.
    pub budget: f64,
    /// Time budget in seconds covering the planted tree.
    pub window: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub events: Vec<TruthEvent>,
}

impl GroundTruth {
    pub fn all_ids(&self) -> BTreeSet<u64> {
        self.events
            .iter()
            .flat_map(|e| e.ids.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset<W> {
    pub interactions: Vec<Interaction<W>>,
    pub truth: GroundTruth,
}

fn participant(i: usize) -> String {
    format!("p{i}")
}

fn pick_recipients(
    rng: &mut ChaCha8Rng,
    n: usize,
    exclude: &[usize],
    include: Option<usize>,
) -> BTreeSet<String> {
    let pool: Vec<usize> = (0..n)
        .filter(|p| !exclude.contains(p) && Some(*p) != include)
        .collect();
    let k = rng.random_range(1..=3usize).min(pool.len());
    let mut out: BTreeSet<String> = pool
        .choose_multiple(rng, k)
        .map(|&p| participant(p))
        .collect();
    if let Some(p) = include {
        out.insert(participant(p));
    }
    if out.is_empty() {
        out.insert(participant(pool[0]));
    }
    out
}

fn sparse_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let gamma = Gamma::new(0.3, 1.0).expect("valid shape");
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn cos_dist(a: &[f64], b: &[f64]) -> f64 {
    cosine_distance(a, b).expect("equal dimensions")
}

/// A unit vector at cosine distance in `[lo, hi]` from `from`, with
/// non-negative components.
fn step(rng: &mut ChaCha8Rng, from: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    for _ in 0..1000 {
        let dir: Vec<f64> = (0..from.len())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let norm = dir
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let s = rng.random::<f64>();
        let v: Vec<f64> = from
            .iter()
            .zip(&dir)
            .map(|(c, d)| (c + s * d / norm).max(0.0))
            .collect();
        if v.iter().all(|&x| x == 0.0) {
            continue;
        }
        let d = cos_dist(&v, from);
        if (lo..=hi).contains(&d) {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
    from.to_vec()
}

struct Rooms<'a> {
    params: &'a SynthParams,
    rng: ChaCha8Rng,
}

impl Rooms<'_> {
    fn event(&mut self, size: usize, start: i64, root_topic: &[f64]) -> PlantedEvent<f64> {
        let p = self.params;
        let rng = &mut self.rng;
        let n = p.n_participants;
        let gap_max = (p.event_window / size as i64).max(1);

        let root_sender = rng.random_range(0..n);
        let mut senders = vec![root_sender];
        let mut recips = vec![pick_recipients(rng, n, &[root_sender], None)];
        let mut times = vec![start];
        let mut links = Vec::new();
        let mut kinds = Vec::new();
        for child in 1..size {
            let parent = rng.random_range(0..child);
            let kind =
                [EdgeKind::Broadcast, EdgeKind::Relay, EdgeKind::Reply][rng.random_range(0..3)];
            let ps = senders[parent];
            let (s, r) = match kind {
                EdgeKind::Broadcast => (ps, pick_recipients(rng, n, &[ps], None)),
                EdgeKind::Relay | EdgeKind::Reply => {
                    let options: Vec<usize> = recips[parent]
                        .iter()
                        .map(|x| x[1..].parse().unwrap())
                        .collect();
                    let s = *options.choose(rng).unwrap();
                    if kind == EdgeKind::Relay {
                        (s, pick_recipients(rng, n, &[s, ps], None))
                    } else {
                        (s, pick_recipients(rng, n, &[s], Some(ps)))
                    }
                }
            };
            senders.push(s);
            recips.push(r);
            times.push(times[parent] + rng.random_range(1..=gap_max));
            links.push((parent, child));
            kinds.push(kind);
        }
        // Topics drift along the tree: every planted link costs between half
        // and all of edge_bound.
        let mut topics: Vec<Vec<f64>> = vec![root_topic.to_vec()];
        for &(parent, _) in &links {
            let v = step(rng, &topics[parent], p.edge_bound / 2.0, p.edge_bound);
            topics.push(v);
        }
        let interactions = (0..size)
            .map(|i| Interaction {
                id: i as u64,
                sender: participant(senders[i]),
                recipients: recips[i].clone(),
                timestamp: times[i],
                content: ContentVector::from_topic(topics[i].clone()),
            })
            .collect();
        PlantedEvent {
            interactions,
            links,
            kinds,
        }
    }

    fn noise(&mut self, count: usize, events: &[Vec<f64>], first_id: u64) -> Vec<Interaction<f64>> {
        let p = self.params;
        let floor = 3.0 * p.edge_bound;
        (0..count)
            .map(|k| {
                let rng = &mut self.rng;
                let mut best: Option<(f64, Vec<f64>)> = None;
                for _ in 0..200 {
                    // Blend a random topic into an event topic so noise
                    // ranges from near-topic chatter to unrelated traffic.
                    let mut v = sparse_direction(rng, p.topic_dim);
                    if let Some(e) = events.choose(rng) {
                        let lambda: f64 = rng.random();
                        v = e
                            .iter()
                            .zip(&v)
                            .map(|(a, b)| (1.0 - lambda) * a + lambda * b)
                            .collect();
                    }
                    let d = events
                        .iter()
                        .map(|e| cos_dist(&v, e))
                        .fold(f64::INFINITY, f64::min);
                    if best.as_ref().is_none_or(|(bd, _)| d > *bd) {
                        best = Some((d, v));
                    }
                    if d >= floor {
                        break;
                    }
                }
                let s = rng.random_range(0..p.n_participants);
                Interaction {
                    id: first_id + k as u64,
                    sender: participant(s),
                    recipients: pick_recipients(rng, p.n_participants, &[s], None),
                    timestamp: rng.random_range(0..=p.time_span),
                    content: ContentVector::from_topic(best.unwrap().1),
                }
            })
            .collect()
    }
}

/// Random recursive tree of `size` interactions whose links all satisfy a
/// meta-graph edge rule and whose topics drift by at most `edge_bound` per link.
pub fn gen_event_tree<W: Weight>(size: usize, seed: u64) -> Result<PlantedEvent<W>> {
    let params = SynthParams {
        event_size: size,
        seed,
        ..Default::default()
    };
    params.validate()?;
    let mut rooms = Rooms {
        params: &params,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let topic = sparse_direction(&mut rooms.rng, params.topic_dim);
    Ok(convert_event(rooms.event(size, 0, &topic)))
}

/// `ceil(noise_level * planted)`, robust to representation error in the product.
pub fn noise_count(noise_level: f64, planted: usize) -> usize {
    let x = noise_level * planted as f64;
    (x - 1e-9).ceil().max(0.0) as usize
}

fn convert<W: Weight>(i: Interaction<f64>) -> Interaction<W> {
    Interaction {
        id: i.id,
        sender: i.sender,
        recipients: i.recipients,
        timestamp: i.timestamp,
        content: ContentVector {
            topic: i
                .content
                .topic
                .map(|t| t.into_iter().map(W::from_f64_lossy).collect()),
            tfidf: None,
            hashtags: i.content.hashtags,
            raw_text: i.content.raw_text,
        },
    }
}

fn convert_event<W: Weight>(e: PlantedEvent<f64>) -> PlantedEvent<W> {
    PlantedEvent {
        interactions: e.interactions.into_iter().map(convert).collect(),
        links: e.links,
        kinds: e.kinds,
    }
}

fn event_topics(events: &[PlantedEvent<f64>]) -> Vec<Vec<f64>> {
    events
        .iter()
        .flat_map(|e| {
            e.interactions
                .iter()
                .filter_map(|i| i.content.topic.clone())
        })
        .collect()
}

/// An interaction tagged with its planted origin, if any.
type Tagged = (Option<(usize, usize)>, Interaction<f64>);

/// (event, local index) -> renumbered id.
type IdMap = BTreeMap<(usize, usize), u64>;

/// Shuffles events and noise together and renumbers ids `0..n` in shuffled
/// order. Returns the union and a map from (event, local index) to new id.
fn mix(
    events: &[PlantedEvent<f64>],
    noise: Vec<Interaction<f64>>,
    rng: &mut ChaCha8Rng,
) -> (Vec<Interaction<f64>>, IdMap) {
    let mut all: Vec<Tagged> = Vec::new();
    for (e, ev) in events.iter().enumerate() {
        for (l, i) in ev.interactions.iter().enumerate() {
            all.push((Some((e, l)), i.clone()));
        }
    }
    all.extend(noise.into_iter().map(|i| (None, i)));
    all.shuffle(rng);
    let mut ids = BTreeMap::new();
    let mut out = Vec::with_capacity(all.len());
    for (new_id, (key, mut i)) in all.into_iter().enumerate() {
        i.id = new_id as u64;
        if let Some(key) = key {
            ids.insert(key, new_id as u64);
        }
        out.push(i);
    }
    (out, ids)
}

/// Adds `ceil(noise_level * planted)` noise interactions with random
/// participants, timestamps across `params.time_span`, and topics at least
/// `3 * edge_bound` from every event interaction. Returns the shuffled union
/// with ids renumbered from 0.
pub fn inject_noise(
    events: &[PlantedEvent<f64>],
    params: &SynthParams,
    seed: u64,
) -> Result<Vec<Interaction<f64>>> {
    params.validate()?;
    let mut rooms = Rooms {
        params,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let planted: usize = events.iter().map(|e| e.interactions.len()).sum();
    let noise = rooms.noise(
        noise_count(params.noise_level, planted),
        &event_topics(events),
        0,
    );
    Ok(mix(events, noise, &mut rooms.rng).0)
}

/// Plants `n_events` events, injects noise, shuffles, and assigns ids
/// `0..n` in shuffled order.
pub fn generate<W: Weight>(params: &SynthParams) -> Result<SynthDataset<W>> {
    params.validate()?;
    let mut rooms = Rooms {
        params,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
    };
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    let mut events = Vec::new();
    for _ in 0..params.n_events {
        let mut c = sparse_direction(&mut rooms.rng, params.topic_dim);
        for _ in 0..200 {
            if seeds
                .iter()
                .all(|o| cos_dist(o, &c) >= 4.0 * params.edge_bound)
            {
                break;
            }
            c = sparse_direction(&mut rooms.rng, params.topic_dim);
        }
        let start = rooms
            .rng
            .random_range(0..=params.time_span - params.event_window);
        events.push(rooms.event(params.event_size, start, &c));
        seeds.push(c);
    }
    let planted: usize = events.iter().map(|e| e.interactions.len()).sum();
    let noise = rooms.noise(
        noise_count(params.noise_level, planted),
        &event_topics(&events),
        0,
    );
    let (mixed, ids) = mix(&events, noise, &mut rooms.rng);
    let mut interactions: Vec<Interaction<W>> = mixed.into_iter().map(convert).collect();
    interactions.sort_by_key(Interaction::order_key);

    let truth = GroundTruth {
        events: events
            .iter()
            .enumerate()
            .map(|(e, ev)| {
                let t0 = ev.interactions[0].timestamp;
                let t1 = ev.interactions.iter().map(|i| i.timestamp).max().unwrap();
                TruthEvent {
                    root: ids[&(e, 0)],
                    ids: (0..ev.interactions.len()).map(|l| ids[&(e, l)]).collect(),
                    edges: ev
                        .links
                        .iter()
                        .map(|&(p, c)| (ids[&(e, p)], ids[&(e, c)]))
                        .collect(),
                    budget: EventTree::from_edges(
                        ids[&(e, 0)],
                        ev.links.iter().map(|&(p, c)| TreeEdge {
                            src: ids[&(e, p)],
                            dst: ids[&(e, c)],
                            weight: dissimilarity(
                                &ev.interactions[p].content,
                                &ev.interactions[c].content,
                            )
                            .expect("equal dimensions"),
                        }),
                    )
                    .cost(),
                    window: t1 - t0,
                }
            })
            .collect(),
    };
    Ok(SynthDataset {
        interactions,
        truth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision and recall of `found` against `truth` over interaction ids.
/// An empty `found` has precision 1; an empty `truth` has recall 1.
pub fn score(found: &BTreeSet<u64>, truth: &BTreeSet<u64>) -> Score {
    let hit = found.intersection(truth).count() as f64;
    let precision = if found.is_empty() {
        1.0
    } else {
        hit / found.len() as f64
    };
    let recall = if truth.is_empty() {
        1.0
    } else {
        hit / truth.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Score {
        precision,
        recall,
        f1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Total size of the detected trees.
    pub objective: usize,
    pub runtime_s: f64,
}

/// Runs `algorithm` from every planted root with its ground-truth budget and
/// window and scores the union of the detected trees.
pub fn evaluate<W: Weight>(
    g: &MetaGraph<W>,
    truth: &GroundTruth,
    algorithm: Algorithm,
    dp_decimals: u32,
    seed: u64,
) -> Result<EvalReport> {
    let mut found = BTreeSet::new();
    let mut objective = 0;
    let started = Instant::now();
    for ev in &truth.events {
        let params = SolveParams {
            budget: W::from_f64_lossy(ev.budget),
            window: Some(ev.window),
            algorithm,
            dp_decimals,
            rng_seed: seed,
        };
        let t = tmaxtree(g, ev.root, &params)?;
        objective += t.size();
        found.extend(t.nodes().iter().copied());
    }
    let runtime_s = started.elapsed().as_secs_f64();
    let s = score(&found, &truth.all_ids());
    Ok(EvalReport {
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
        objective,
        runtime_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Noise,
    Size,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise" => Ok(Axis::Noise),
            "size" => Ok(Axis::Size),
            _ => Err(Error::validation(format!(
                "unknown axis '{s}' (valid: noise, size)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub repetitions: usize,
    pub seed: u64,
    /// Values for everything the axis does not vary.
    pub base: SynthParams,
    pub dp_decimals: u32,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::validation("sweep grid is empty"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::validation("sweep needs at least one algorithm"));
        }
        if self.repetitions < 1 {
            return Err(Error::validation("repetitions must be at least 1"));
        }
        if self.axis == Axis::Size && self.grid.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
            return Err(Error::validation(
                "size grid values must be positive integers",
            ));
        }
        self.base.validate()
    }

    fn params_at(&self, value: f64, rep: usize) -> SynthParams {
        let mut p = self.base.clone();
        match self.axis {
            Axis::Noise => p.noise_level = value,
            Axis::Size => p.event_size = value as usize,
        }
        p.seed = self.seed.wrapping_add(rep as u64);
        p
    }
}

/// Mean metrics of one algorithm at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub algorithm: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub objective: f64,
    pub runtime_s: f64,
    pub repetitions: usize,
}

/// For every grid point and repetition: generate, detect from the planted
/// roots with ground-truth parameters, score. Rows come out grid-major in
/// algorithm order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &value in &spec.grid {
        let per_rep: Vec<Vec<EvalReport>> = (0..spec.repetitions)
            .into_par_iter()
            .map(|rep| {
                let params = spec.params_at(value, rep);
                let data = generate::<f64>(&params)?;
                let g = build(&data.interactions, &BuildOptions::default())?;
                spec.algorithms
                    .iter()
                    .map(|&a| evaluate(&g, &data.truth, a, spec.dp_decimals, params.seed))
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (k, &alg) in spec.algorithms.iter().enumerate() {
            let n = spec.repetitions as f64;
            let mean =
                |f: &dyn Fn(&EvalReport) -> f64| per_rep.iter().map(|r| f(&r[k])).sum::<f64>() / n;
            rows.push(SweepRow {
                axis_value: value,
                algorithm: alg.name().to_string(),
                precision: mean(&|r| r.precision),
                recall: mean(&|r| r.recall),
                f1: mean(&|r| r.f1),
                objective: mean(&|r| r.objective as f64),
                runtime_s: mean(&|r| r.runtime_s),
                repetitions: spec.repetitions,
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<Wr: Write>(writer: Wr, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
