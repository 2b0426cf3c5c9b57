//! Flat `key = value` configuration files for detection runs and sweeps.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::MergePolicy;
use crate::maxtree::{Algorithm, SolveParams};
use crate::scalar::Weight;
use crate::select::Sampling;
use crate::synth::{Axis, SweepSpec, SynthParams};

/// Parses `3600`, `3600s`, `90m`, `12h`, `1d`, `4w` into seconds.
pub fn parse_duration(s: &str) -> Result<i64> {
    let s = s.trim();
    let bad = || Error::validation(format!("invalid duration '{s}' (examples: 3600s, 1d, 4w)"));
    let (digits, unit) = match s.find(|c: char| !c.is_ascii_digit()) {
        Some(i) => s.split_at(i),
        None => (s, ""),
    };
    let n: i64 = digits.parse().map_err(|_| bad())?;
    let scale = match unit {
        "" | "s" => 1,
        "m" => 60,
        "h" => 3_600,
        "d" => 86_400,
        "w" => 604_800,
        _ => return Err(bad()),
    };
    n.checked_mul(scale).ok_or_else(bad)
}

/// Reads `key = value` lines. `#` starts a comment; blank lines are skipped.
/// Repeated keys are an error.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: n + 1,
                msg: format!("expected key = value, got '{line}'"),
            });
        };
        let key = k.trim().to_string();
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Parse {
                line: n + 1,
                msg: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::validation(format!("invalid value '{v}' for {key}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub budget: f64,
    /// Seconds.
    pub window: i64,
    pub top_k: usize,
    pub algorithm: Algorithm,
    pub sampling: Sampling,
    pub root_limit: usize,
    pub dp_decimals: u32,
    pub seed: u64,
    pub merge: MergePolicy,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            budget: 1.0,
            window: 86_400,
            top_k: 10,
            algorithm: Algorithm::Greedy,
            sampling: Sampling::UpperBound,
            root_limit: 100,
            dp_decimals: 2,
            seed: 0,
            merge: MergePolicy::default(),
        }
    }
}

impl DetectionConfig {
    pub const KEYS: &'static [&'static str] = &[
        "budget",
        "window",
        "top_k",
        "algorithm",
        "sampling",
        "root_limit",
        "dp_decimals",
        "seed",
        "merge_edit_ratio",
        "merge_max_gap",
    ];

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = DetectionConfig::default();
        for (k, v) in parse_pairs(text)? {
            c.set(&k, &v)?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Sets one field from its textual form. Keys may use `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "budget" => self.budget = parse_num(key, value)?,
            "window" => self.window = parse_duration(value)?,
            "top_k" | "k" => self.top_k = parse_num(key, value)?,
            "algorithm" => self.algorithm = value.parse()?,
            "sampling" => self.sampling = value.parse()?,
            "root_limit" => self.root_limit = parse_num(key, value)?,
            "dp_decimals" => self.dp_decimals = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "merge_edit_ratio" => self.merge.edit_ratio_max = parse_num(key, value)?,
            "merge_max_gap" => self.merge.max_time_gap = parse_duration(value)?,
            _ => {
                return Err(Error::validation(format!(
                    "unknown config key '{key}' (valid: {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_k < 1 {
            return Err(Error::validation("top_k must be at least 1"));
        }
        if self.root_limit < 1 {
            return Err(Error::validation("root_limit must be at least 1"));
        }
        self.merge.validate()?;
        self.solve_params::<f64>().validate()
    }

    pub fn solve_params<W: Weight>(&self) -> SolveParams<W> {
        SolveParams {
            budget: W::from_f64_lossy(self.budget),
            window: Some(self.window),
            algorithm: self.algorithm,
            dp_decimals: self.dp_decimals,
            rng_seed: self.seed,
        }
    }
}

/// Grid values: a comma list (`0, 5, 10`) or an inclusive range with step
/// (`10..100:10`).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((range, step)) = s.split_once(':') {
        if let Some((a, b)) = range.split_once("..") {
            let a: f64 = parse_num("grid", a.trim())?;
            let b: f64 = parse_num("grid", b.trim())?;
            let step: f64 = parse_num("grid", step.trim())?;
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(Error::validation(format!("invalid grid range '{s}'")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            return Ok((0..=n).map(|i| a + i as f64 * step).collect());
        }
    }
    s.split(',').map(|v| parse_num("grid", v.trim())).collect()
}

/// Sweep files take `axis`, `grid`, `algorithms`, `repetitions`, `seed`,
/// `dp_decimals`, plus any [`SynthParams`] field as the fixed base.
pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let mut spec = SweepSpec {
        axis: Axis::Noise,
        grid: Vec::new(),
        algorithms: vec![Algorithm::Greedy, Algorithm::Random],
        repetitions: 10,
        seed: 0,
        base: SynthParams::default(),
        dp_decimals: 2,
    };
    let mut has_grid = false;
    for (k, v) in parse_pairs(text)? {
        let base = &mut spec.base;
        match k.as_str() {
            "axis" => spec.axis = v.parse()?,
            "grid" => {
                spec.grid = parse_grid(&v)?;
                has_grid = true;
            }
            "algorithms" => {
                spec.algorithms = v
                    .split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "repetitions" => spec.repetitions = parse_num(&k, &v)?,
            "seed" => spec.seed = parse_num(&k, &v)?,
            "dp_decimals" => spec.dp_decimals = parse_num(&k, &v)?,
            "n_events" => base.n_events = parse_num(&k, &v)?,
            "event_size" => base.event_size = parse_num(&k, &v)?,
            "noise_level" => base.noise_level = parse_num(&k, &v)?,
            "n_participants" => base.n_participants = parse_num(&k, &v)?,
            "topic_dim" => base.topic_dim = parse_num(&k, &v)?,
            "time_span" => base.time_span = parse_duration(&v)?,
            "event_window" => base.event_window = parse_duration(&v)?,
            "edge_bound" => base.edge_bound = parse_num(&k, &v)?,
            _ => return Err(Error::validation(format!("unknown sweep key '{k}'"))),
        }
    }
    if !has_grid {
        return Err(Error::validation("sweep spec needs a grid"));
    }
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations() {
        assert_eq!(parse_duration("1d").unwrap(), 86_400);
        assert_eq!(parse_duration("4w").unwrap(), 2_419_200);
        assert_eq!(parse_duration("3600s").unwrap(), 3_600);
        assert_eq!(parse_duration("3600").unwrap(), 3_600);
        assert_eq!(parse_duration("2h").unwrap(), 7_200);
        for bad in ["", "d", "1y", "-1d", "1.5d", "99999999999999999999w"] {
            assert!(parse_duration(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_file() {
        let c = DetectionConfig::parse(
            "# toy\nbudget = 0\nwindow = 1w\ntop_k = 2\nalgorithm = binary_search\nsampling = random\n",
        )
        .unwrap();
        assert_eq!(c.budget, 0.0);
        assert_eq!(c.window, 604_800);
        assert_eq!(c.top_k, 2);
        assert_eq!(c.algorithm, Algorithm::BinarySearch);
        assert_eq!(c.sampling, Sampling::Random);
        assert_eq!(c.root_limit, 100);
    }

    #[test]
    fn config_errors() {
        assert!(DetectionConfig::parse("top_k = 0").is_err());
        assert!(DetectionConfig::parse("budget = -1").is_err());
        assert!(DetectionConfig::parse("colour = red").is_err());
        assert!(DetectionConfig::parse("budget 3").is_err());
        assert!(DetectionConfig::parse("seed = 1\nseed = 2").is_err());
        let e = DetectionConfig::parse("algorithm = magic")
            .unwrap_err()
            .to_string();
        assert!(e.contains("greedy") && e.contains("binary_search"), "{e}");
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0, 5,10").unwrap(), vec![0.0, 5.0, 10.0]);
        assert_eq!(parse_grid("10..100:10").unwrap().len(), 10);
        assert_eq!(parse_grid("0..1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("").unwrap().is_empty());
    }

    #[test]
    fn sweep_file() {
        let s = parse_sweep(
            "axis = noise\ngrid = 0,10,20\nalgorithms = greedy, random\nrepetitions = 2\n",
        )
        .unwrap();
        assert_eq!(s.grid.len(), 3);
        assert_eq!(s.algorithms.len(), 2);
        assert!(parse_sweep("axis = noise\ngrid =\n").is_err());
        assert!(parse_sweep("grid = 0\nalgorithms = fast").is_err());
    }
}
