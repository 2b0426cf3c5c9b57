//! Event detection in interaction networks.
//!
//! Interactions (messages with a sender, recipients, a timestamp and content)
//! are linked into a time-ordered meta-graph whose edges carry content
//! dissimilarity. Events are budget-limited rooted trees in that graph; the
//! crate finds large ones, picks a covering top-k, and ships a synthetic
//! benchmark for evaluating the solvers.
//!
//! All numeric code is generic over [`Weight`] (`f32` or `f64`); the aliases
//! below fix `f64`, which the CLI uses.

pub mod config;
pub mod content;
pub mod error;
pub mod export;
pub mod graph;
pub mod interaction;
pub mod maxtree;
pub mod scalar;
pub mod select;
pub mod synth;
pub mod text;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{build, classify_pair, BuildOptions, EdgeKind, MetaGraph, SameTime, Vertex};
pub use interaction::{ingest, merge_similar, Interaction, MergePolicy};
pub use maxtree::{Algorithm, SolveParams};
pub use scalar::Weight;
pub use select::{EventSet, RootOrder, Sampling};
pub use tree::{EventTree, TreeEdge};

pub type MetaGraphF64 = MetaGraph<f64>;
pub type MetaGraphF32 = MetaGraph<f32>;
pub type EventTreeF64 = EventTree<f64>;
pub type EventTreeF32 = EventTree<f32>;
pub type InteractionF64 = Interaction<f64>;
pub type InteractionF32 = Interaction<f32>;
pub type EventSetF64 = EventSet<f64>;
