//! Interactions, JSON-lines ingestion and near-duplicate merging.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::content::ContentVector;
use crate::error::{Error, Result};
use crate::scalar::Weight;
use crate::text::{edit_distance_ratio, TfIdf};

/// One time-stamped message from a sender to a non-empty recipient set.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction<W> {
    pub id: u64,
    pub sender: String,
    pub recipients: BTreeSet<String>,
    /// Seconds since the epoch.
    pub timestamp: i64,
    pub content: ContentVector<W>,
}

impl<W> Interaction<W> {
    /// Sort key that totally orders interactions in time.
    pub fn order_key(&self) -> (i64, u64) {
        (self.timestamp, self.id)
    }
}

/// On-disk form of one interaction log line.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "W: Weight", deny_unknown_fields)]
pub struct Record<W> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    pub sender: String,
    pub recipients: Vec<String>,
    pub timestamp: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<Vec<W>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hashtags: Vec<String>,
}

impl<W: Weight> From<&Interaction<W>> for Record<W> {
    fn from(i: &Interaction<W>) -> Self {
        Record {
            id: Some(i.id),
            sender: i.sender.clone(),
            recipients: i.recipients.iter().cloned().collect(),
            timestamp: i.timestamp,
            text: i.content.raw_text.clone(),
            topic: i.content.topic.clone(),
            hashtags: i.content.hashtags.iter().cloned().collect(),
        }
    }
}

/// Dataset-level sidecar declaring the topic length and an optional vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary: Option<Vec<String>>,
}

/// Parses a JSON-lines interaction log. Blank lines are skipped; records
/// without an id receive their 0-based record position. The result is sorted
/// by `(timestamp, id)`.
pub fn ingest<W: Weight, R: BufRead>(reader: R) -> Result<Vec<Interaction<W>>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut position = 0u64;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record<W> = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        if rec.recipients.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                msg: "recipients must be non-empty".into(),
            });
        }
        if let Some(t) = &rec.topic {
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "topic vector contains a non-finite value".into(),
                });
            }
        }
        let id = rec.id.unwrap_or(position);
        position += 1;
        if !seen.insert(id) {
            return Err(Error::validation(format!(
                "duplicate interaction id {id} (line {lineno})"
            )));
        }
        out.push(Interaction {
            id,
            sender: rec.sender,
            recipients: rec.recipients.into_iter().collect(),
            timestamp: rec.timestamp,
            content: ContentVector {
                topic: rec.topic,
                tfidf: None,
                hashtags: rec.hashtags.into_iter().collect(),
                raw_text: rec.text,
            },
        });
    }
    out.sort_by_key(Interaction::order_key);
    Ok(out)
}

/// Writes interactions as JSON lines with explicit ids.
pub fn write_jsonl<W: Weight, Wr: Write>(mut writer: Wr, msgs: &[Interaction<W>]) -> Result<()> {
    for m in msgs {
        serde_json::to_writer(&mut writer, &Record::from(m))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Checks that all topic vectors share one length, matching `expected` when given.
pub fn validate_topic_dims<W>(msgs: &[Interaction<W>], expected: Option<usize>) -> Result<()> {
    let mut dim = expected;
    for m in msgs {
        if let Some(t) = &m.content.topic {
            match dim {
                None => dim = Some(t.len()),
                Some(d) if d != t.len() => {
                    return Err(Error::validation(format!(
                        "interaction {} has topic length {}, expected {d}",
                        m.id,
                        t.len()
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Fits tf-idf on the raw texts present and attaches a vector to every
/// interaction that has text.
pub fn attach_tfidf<W: Weight>(
    msgs: &mut [Interaction<W>],
    vocabulary: Option<&[String]>,
) -> TfIdf {
    let model = TfIdf::fit(
        msgs.iter().filter_map(|m| m.content.raw_text.as_deref()),
        vocabulary,
    );
    for m in msgs.iter_mut() {
        if let Some(text) = &m.content.raw_text {
            m.content.tfidf = Some(model.transform(text));
        }
    }
    model
}

/// Thresholds under which two messages of one sender count as duplicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergePolicy {
    pub edit_ratio_max: f64,
    /// Seconds.
    pub max_time_gap: i64,
}

impl Default for MergePolicy {
    fn default() -> Self {
        MergePolicy {
            edit_ratio_max: 0.10,
            max_time_gap: 86_400,
        }
    }
}

impl MergePolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.edit_ratio_max) {
            return Err(Error::validation("edit_ratio_max must lie in [0, 1]"));
        }
        if self.max_time_gap < 0 {
            return Err(Error::validation("max_time_gap must be non-negative"));
        }
        Ok(())
    }
}

/// Merges near-duplicate messages of the same sender.
///
/// Per sender, messages are scanned in time order and absorbed into the
/// earliest open group whose first message is within `max_time_gap` and has
/// an edit-distance ratio strictly below `edit_ratio_max`. Messages without
/// text never merge. A merged interaction keeps the earliest message's id,
/// text, content and timestamp, with the union of all recipients.
pub fn merge_similar<W: Weight>(
    msgs: &[Interaction<W>],
    policy: &MergePolicy,
) -> Vec<Interaction<W>> {
    let mut order: Vec<usize> = (0..msgs.len()).collect();
    order.sort_by_key(|&i| msgs[i].order_key());

    let mut by_sender: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &i in &order {
        by_sender
            .entry(msgs[i].sender.as_str())
            .or_default()
            .push(i);
    }

    let mut out = Vec::with_capacity(msgs.len());
    for (_, idxs) in by_sender {
        // (representative index, merged interaction)
        let mut groups: Vec<(usize, Interaction<W>)> = Vec::new();
        for i in idxs {
            let m = &msgs[i];
            let target = groups.iter_mut().find(|(rep, _)| {
                let r = &msgs[*rep];
                match (&r.content.raw_text, &m.content.raw_text) {
                    (Some(a), Some(b)) => {
                        m.timestamp - r.timestamp <= policy.max_time_gap
                            && edit_distance_ratio(a, b) < policy.edit_ratio_max
                    }
                    _ => false,
                }
            });
            match target {
                Some((_, merged)) => merged.recipients.extend(m.recipients.iter().cloned()),
                None => groups.push((i, m.clone())),
            }
        }
        out.extend(groups.into_iter().map(|(_, g)| g));
    }
    out.sort_by_key(Interaction::order_key);
    out
}
