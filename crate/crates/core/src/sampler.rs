//! Stratified sampling over (year, Jaccard bin, length bin).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const YEAR_MIN: u16 = 2003;
pub const YEAR_MAX: u16 = 2018;
pub const JACCARD_EDGES: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
pub const JACCARD_BINS: u8 = 5;
pub const LENGTH_BINS: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StratumLabel {
    pub year: u16,
    /// 0-based, 0..5.
    pub jaccard_bin: u8,
    /// 0-based, 0..5.
    pub length_bin: u8,
}

impl StratumLabel {
    fn key(&self) -> u64 {
        self.year as u64 * 100 + self.jaccard_bin as u64 * 10 + self.length_bin as u64
    }
}

impl fmt::Display for StratumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.year, self.jaccard_bin, self.length_bin)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid stratum label {0:?}")]
pub struct InvalidStratum(pub String);

impl FromStr for StratumLabel {
    type Err = InvalidStratum;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidStratum(s.to_string());
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [y, j, l] = parts.as_slice() else {
            return Err(bad());
        };
        let label = StratumLabel {
            year: y.parse().map_err(|_| bad())?,
            jaccard_bin: j.parse().map_err(|_| bad())?,
            length_bin: l.parse().map_err(|_| bad())?,
        };
        if label.jaccard_bin >= JACCARD_BINS || label.length_bin >= LENGTH_BINS {
            return Err(bad());
        }
        Ok(label)
    }
}

impl Serialize for StratumLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StratumLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error("{id}: year {year} outside {YEAR_MIN}..={YEAR_MAX}")]
    OutOfRangeYear { id: String, year: u16 },
    #[error("{id}: length {length} outside binned range")]
    LengthOutlier { id: String, length: usize },
    #[error("{id}: jaccard {value} outside [0, 1]")]
    JaccardOutOfRange { id: String, value: f64 },
}

pub fn jaccard_bin(j: f64) -> Option<u8> {
    if !(0.0..=1.0).contains(&j) {
        return None;
    }
    Some(JACCARD_EDGES.iter().filter(|e| **e <= j).count() as u8)
}

/// Length bin edges: `LENGTH_BINS + 1` ascending values. Lengths above the
/// last edge are outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBins {
    pub edges: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("length bin edges must be six ascending values, got {0:?}")]
pub struct InvalidEdges(pub Vec<f64>);

impl LengthBins {
    /// Evenly spaced bins from the minimum up to the nearest-rank 95th
    /// percentile.
    pub fn from_lengths(lengths: &[usize]) -> Option<Self> {
        if lengths.is_empty() {
            return None;
        }
        let mut sorted = lengths.to_vec();
        sorted.sort_unstable();
        let rank = ((0.95 * sorted.len() as f64).ceil() as usize).max(1);
        Some(Self::even(sorted[0] as f64, sorted[rank - 1] as f64))
    }

    pub fn even(min: f64, max: f64) -> Self {
        let n = LENGTH_BINS as usize;
        let w = (max - min) / n as f64;
        let mut edges: Vec<f64> = (0..n).map(|i| min + w * i as f64).collect();
        edges.push(max);
        LengthBins { edges }
    }

    pub fn from_edges(edges: &[f64]) -> Result<Self, InvalidEdges> {
        let ok = edges.len() == LENGTH_BINS as usize + 1
            && edges.iter().all(|e| e.is_finite())
            && edges.windows(2).all(|w| w[0] <= w[1]);
        if ok {
            Ok(LengthBins { edges: edges.to_vec() })
        } else {
            Err(InvalidEdges(edges.to_vec()))
        }
    }

    pub fn min(&self) -> f64 {
        self.edges[0]
    }

    pub fn max(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn bin(&self, length: usize) -> Option<u8> {
        let x = length as f64;
        if x < self.min() || x > self.max() {
            return None;
        }
        let inner = &self.edges[1..self.edges.len() - 1];
        Some(inner.iter().filter(|e| **e <= x).count() as u8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratumInput {
    pub id: String,
    pub year: u16,
    pub jaccard: f64,
    pub html_length: usize,
}

pub fn assign_stratum(input: &StratumInput, bins: &LengthBins) -> Result<StratumLabel, SamplerError> {
    if !(YEAR_MIN..=YEAR_MAX).contains(&input.year) {
        return Err(SamplerError::OutOfRangeYear {
            id: input.id.clone(),
            year: input.year,
        });
    }
    let jaccard_bin = jaccard_bin(input.jaccard).ok_or_else(|| SamplerError::JaccardOutOfRange {
        id: input.id.clone(),
        value: input.jaccard,
    })?;
    let length_bin = bins.bin(input.html_length).ok_or_else(|| SamplerError::LengthOutlier {
        id: input.id.clone(),
        length: input.html_length,
    })?;
    Ok(StratumLabel {
        year: input.year,
        jaccard_bin,
        length_bin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub target_per_stratum: usize,
    pub cap_per_stratum: usize,
    pub seed: u64,
    pub top_up: bool,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            target_per_stratum: 50,
            cap_per_stratum: 50,
            seed: 0,
            top_up: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledItem {
    pub id: String,
    pub stratum: StratumLabel,
    /// 1 for the initial draw, 2 for top-up.
    pub round: u8,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleOutcome {
    pub items: Vec<SampledItem>,
    pub skipped: Vec<SamplerError>,
    pub population: BTreeMap<StratumLabel, usize>,
    /// Per-stratum gap between the target and the first-round draw.
    pub shortfall: BTreeMap<StratumLabel, usize>,
}

impl SampleOutcome {
    pub fn per_stratum(&self) -> BTreeMap<StratumLabel, usize> {
        let mut out = BTreeMap::new();
        for item in &self.items {
            *out.entry(item.stratum).or_insert(0) += 1;
        }
        out
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn stratify(
    inputs: &[StratumInput],
    bins: &LengthBins,
) -> (BTreeMap<StratumLabel, Vec<String>>, Vec<SamplerError>) {
    let mut strata: BTreeMap<StratumLabel, Vec<String>> = BTreeMap::new();
    let mut skipped = Vec::new();
    for input in inputs {
        match assign_stratum(input, bins) {
            Ok(label) => strata.entry(label).or_default().push(input.id.clone()),
            Err(e) => skipped.push(e),
        }
    }
    (strata, skipped)
}

/// Draws up to `target_per_stratum` from every stratum; with top-up on,
/// the total shortfall is then redistributed round-robin over strata with
/// spare members, never past `cap_per_stratum`.
pub fn draw_sample(inputs: &[StratumInput], bins: &LengthBins, plan: &SamplePlan) -> SampleOutcome {
    let (strata, skipped) = stratify(inputs, bins);
    let population = strata.iter().map(|(k, v)| (*k, v.len())).collect();

    let mut shuffled: BTreeMap<StratumLabel, Vec<String>> = BTreeMap::new();
    for (label, ids) in &strata {
        let mut ids = ids.clone();
        ids.sort();
        ids.dedup();
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(plan.seed ^ splitmix(label.key())));
        ids.shuffle(&mut rng);
        shuffled.insert(*label, ids);
    }

    let mut taken: BTreeMap<StratumLabel, usize> = BTreeMap::new();
    let mut items = Vec::new();
    let mut shortfalls = BTreeMap::new();
    for (label, ids) in &shuffled {
        let n = ids.len().min(plan.target_per_stratum).min(plan.cap_per_stratum);
        let gap = plan.target_per_stratum.saturating_sub(n);
        if gap > 0 {
            shortfalls.insert(*label, gap);
        }
        for id in &ids[..n] {
            items.push(SampledItem {
                id: id.clone(),
                stratum: *label,
                round: 1,
            });
        }
        taken.insert(*label, n);
    }

    let mut shortfall: usize = shortfalls.values().sum();
    if plan.top_up {
        while shortfall > 0 {
            let mut progressed = false;
            for (label, ids) in &shuffled {
                if shortfall == 0 {
                    break;
                }
                let t = taken.get_mut(label).expect("every stratum is tracked");
                if *t < ids.len() && *t < plan.cap_per_stratum {
                    items.push(SampledItem {
                        id: ids[*t].clone(),
                        stratum: *label,
                        round: 2,
                    });
                    *t += 1;
                    shortfall -= 1;
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
    }

    SampleOutcome {
        items,
        skipped,
        population,
        shortfall: shortfalls,
    }
}
