//! Tokenization and tf-idf weighting for raw message text.

use std::collections::{BTreeMap, HashMap};

use crate::content::SparseVector;
use crate::scalar::Weight;

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Levenshtein distance over chars divided by the longer length; 0 when both are empty.
pub fn edit_distance_ratio(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    strsim::levenshtein(a, b) as f64 / longest as f64
}

/// Smoothed tf-idf model fitted on a corpus: `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
#[derive(Debug, Clone, Default)]
pub struct TfIdf {
    vocabulary: BTreeMap<String, u32>,
    terms: Vec<String>,
    idf: Vec<f64>,
}

impl TfIdf {
    /// Fits on `docs`. When `vocabulary` is given, only those terms are indexed.
    pub fn fit<'a>(docs: impl IntoIterator<Item = &'a str>, vocabulary: Option<&[String]>) -> Self {
        let tokenized: Vec<Vec<String>> = docs.into_iter().map(tokenize).collect();
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in &tokenized {
            let mut seen: Vec<&String> = doc.iter().collect();
            seen.sort();
            seen.dedup();
            for t in seen {
                *df.entry(t.clone()).or_default() += 1;
            }
        }
        let terms: Vec<String> = match vocabulary {
            Some(v) => {
                let mut v: Vec<String> = v.iter().map(|t| t.to_lowercase()).collect();
                v.sort();
                v.dedup();
                v
            }
            None => df.keys().cloned().collect(),
        };
        let n = tokenized.len() as f64;
        let idf = terms
            .iter()
            .map(|t| {
                let d = df.get(t).copied().unwrap_or(0) as f64;
                ((1.0 + n) / (1.0 + d)).ln() + 1.0
            })
            .collect();
        let vocabulary = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        TfIdf {
            vocabulary,
            terms,
            idf,
        }
    }

    pub fn vocabulary_len(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, index: u32) -> Option<&str> {
        self.terms.get(index as usize).map(String::as_str)
    }

    pub fn transform<W: Weight>(&self, text: &str) -> SparseVector<W> {
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for tok in tokenize(text) {
            if let Some(&idx) = self.vocabulary.get(&tok) {
                *counts.entry(idx).or_default() += 1;
            }
        }
        SparseVector::from_pairs(
            counts
                .into_iter()
                .map(|(i, c)| (i, W::from_f64_lossy(c as f64 * self.idf[i as usize]))),
        )
    }

    /// Highest-weighted terms of a summed set of vectors, ties broken alphabetically.
    pub fn top_terms<'a, W: Weight>(
        &'a self,
        vectors: impl IntoIterator<Item = &'a SparseVector<W>>,
        n: usize,
    ) -> Vec<&'a str> {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for v in vectors {
            for &(t, w) in v.entries() {
                *acc.entry(t).or_default() += w.as_f64();
            }
        }
        let mut ranked: Vec<(u32, f64)> = acc.into_iter().collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| self.terms[a.0 as usize].cmp(&self.terms[b.0 as usize]))
        });
        ranked
            .into_iter()
            .take(n)
            .map(|(t, _)| self.terms[t as usize].as_str())
            .collect()
    }
}
