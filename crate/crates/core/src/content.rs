//! Content vectors attached to interactions and the ensemble dissimilarity
//! used as meta-graph edge weight.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Weight;

/// Sparse non-negative vector over a vocabulary, entries sorted by term index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "W: Weight")]
pub struct SparseVector<W> {
    entries: Vec<(u32, W)>,
}

impl<W: Weight> SparseVector<W> {
    /// Builds a vector from `(term, value)` pairs. Duplicate terms are summed
    /// and zero entries dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, W)>) -> Self {
        let mut entries: Vec<(u32, W)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(t, _)| t);
        let mut merged: Vec<(u32, W)> = Vec::with_capacity(entries.len());
        for (t, v) in entries {
            match merged.last_mut() {
                Some((lt, lv)) if *lt == t => *lv = *lv + v,
                _ => merged.push((t, v)),
            }
        }
        merged.retain(|&(_, v)| v != W::zero());
        SparseVector { entries: merged }
    }

    pub fn entries(&self) -> &[(u32, W)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> W {
        self.entries.iter().map(|&(_, v)| v * v).sum::<W>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> W {
        let (mut i, mut j) = (0, 0);
        let mut acc = W::zero();
        while i < self.entries.len() && j < other.entries.len() {
            let (ti, vi) = self.entries[i];
            let (tj, vj) = other.entries[j];
            match ti.cmp(&tj) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc = acc + vi * vj;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// Textual content of one interaction in up to three representations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContentVector<W> {
    pub topic: Option<Vec<W>>,
    pub tfidf: Option<SparseVector<W>>,
    pub hashtags: BTreeSet<String>,
    pub raw_text: Option<String>,
}

impl<W: Weight> ContentVector<W> {
    pub fn from_topic(topic: Vec<W>) -> Self {
        ContentVector {
            topic: Some(topic),
            ..Default::default()
        }
    }

    /// True when at least one of topic, tf-idf or hashtags is present.
    pub fn has_signal(&self) -> bool {
        self.topic.is_some() || self.tfidf.is_some() || !self.hashtags.is_empty()
    }
}

fn clamp_distance<W: Weight>(cos: W) -> W {
    let sim = cos.max(W::zero()).min(W::one());
    W::one() - sim
}

/// Cosine distance `1 - cos(a, b)`, clamped to `[0, 1]`; 1 when either norm is zero.
pub fn cosine_distance<W: Weight>(a: &[W], b: &[W]) -> Result<W> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "topic dimensions differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut dot = W::zero();
    let mut na = W::zero();
    let mut nb = W::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot = dot + x * y;
        na = na + x * x;
        nb = nb + y * y;
    }
    if na == W::zero() || nb == W::zero() {
        return Ok(W::one());
    }
    Ok(clamp_distance(dot / (na.sqrt() * nb.sqrt())))
}

pub fn sparse_cosine_distance<W: Weight>(a: &SparseVector<W>, b: &SparseVector<W>) -> W {
    let (na, nb) = (a.norm(), b.norm());
    if na == W::zero() || nb == W::zero() {
        return W::one();
    }
    clamp_distance(a.dot(b) / (na * nb))
}

/// Jaccard distance `1 - |A ∩ B| / |A ∪ B|`; 0 for two empty sets.
pub fn jaccard_distance<W: Weight>(a: &BTreeSet<String>, b: &BTreeSet<String>) -> W {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return W::zero();
    }
    W::one() - W::from_usize(inter).unwrap() / W::from_usize(union).unwrap()
}

/// Sum of topic cosine, tf-idf cosine and hashtag Jaccard distances over the
/// components present on both sides. Each term lies in `[0, 1]`.
pub fn dissimilarity<W: Weight>(a: &ContentVector<W>, b: &ContentVector<W>) -> Result<W> {
    let mut total = W::zero();
    if let (Some(ta), Some(tb)) = (&a.topic, &b.topic) {
        total = total + cosine_distance(ta, tb)?;
    }
    if let (Some(va), Some(vb)) = (&a.tfidf, &b.tfidf) {
        total = total + sparse_cosine_distance(va, vb);
    }
    if !a.hashtags.is_empty() && !b.hashtags.is_empty() {
        total = total + jaccard_distance::<W>(&a.hashtags, &b.hashtags);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_full_vectors_have_zero_distance() {
        let c = ContentVector {
            topic: Some(vec![0.2, 0.5, 0.3]),
            tfidf: Some(SparseVector::from_pairs([(0, 1.5), (4, 0.5)])),
            hashtags: tags(&["a", "b"]),
            raw_text: None,
        };
        let d: f64 = dissimilarity(&c, &c).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn orthogonal_topics() {
        let a = ContentVector::from_topic(vec![1.0, 0.0]);
        let b = ContentVector::from_topic(vec![0.0, 1.0]);
        assert_eq!(dissimilarity(&a, &b).unwrap(), 1.0f64);
    }

    #[test]
    fn hashtag_jaccard() {
        let a = ContentVector::<f64> {
            hashtags: tags(&["x", "y"]),
            ..Default::default()
        };
        let b = ContentVector::<f64> {
            hashtags: tags(&["y", "z"]),
            ..Default::default()
        };
        let d = dissimilarity(&a, &b).unwrap();
        assert!((d - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_norm_is_maximally_dissimilar() {
        assert_eq!(cosine_distance(&[0.0f64, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        let empty = SparseVector::<f32>::default();
        let x = SparseVector::from_pairs([(1, 1.0f32)]);
        assert_eq!(sparse_cosine_distance(&empty, &x), 1.0);
    }

    #[test]
    fn mismatched_topic_dims_rejected() {
        let a = ContentVector::from_topic(vec![1.0f64, 0.0]);
        let b = ContentVector::from_topic(vec![1.0f64, 0.0, 0.0]);
        assert!(matches!(dissimilarity(&a, &b), Err(Error::Validation(_))));
    }

    #[test]
    fn absent_components_contribute_nothing() {
        let a = ContentVector::from_topic(vec![1.0f64, 0.0]);
        let b = ContentVector::<f64> {
            hashtags: tags(&["x"]),
            ..Default::default()
        };
        assert_eq!(dissimilarity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn sparse_duplicates_summed() {
        let v = SparseVector::from_pairs([(3, 1.0f64), (1, 2.0), (3, 1.0), (2, 0.0)]);
        assert_eq!(v.entries(), &[(1, 2.0), (3, 2.0)]);
    }
}
