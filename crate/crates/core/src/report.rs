//! Aggregation of classification records into result tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::{ConcealmentRecord, LabelSource, SubType, Trick};
use crate::filters::{FilterVerdict, PipelineCounts};
use crate::labels::LabelRecord;
use crate::sampler::{jaccard_bin, JACCARD_BINS, LENGTH_BINS, YEAR_MAX, YEAR_MIN};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("record {id} has no {key}")]
    MissingJoinKey { id: String, key: &'static str },
    #[error("record {id}: {reason}")]
    OutOfRange { id: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRow {
    pub year: u16,
    pub with_concealment: usize,
    pub no_concealment: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JaccardRow {
    /// 1-based.
    pub jaccard_bin: u8,
    pub with_concealment: usize,
    pub no_concealment: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthRow {
    /// 1-based.
    pub part_length_bin: u8,
    pub with_concealment: usize,
    pub no_concealment: usize,
}

/// Exclusive regions: an email counts only in the region matching its
/// exact sub-type set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VennRegions {
    pub add_paragraph: usize,
    pub disrupt_word: usize,
    pub insert_word: usize,
    pub add_paragraph_disrupt_word: usize,
    pub add_paragraph_insert_word: usize,
    pub disrupt_word_insert_word: usize,
    pub all_three: usize,
}

impl VennRegions {
    pub const NAMES: [&'static str; 7] = [
        "AddParagraph",
        "DisruptWord",
        "InsertWord",
        "AddParagraph+DisruptWord",
        "AddParagraph+InsertWord",
        "DisruptWord+InsertWord",
        "AddParagraph+DisruptWord+InsertWord",
    ];

    fn slot(&mut self, subtypes: &BTreeSet<SubType>) -> Option<&mut usize> {
        let ap = subtypes.contains(&SubType::AddParagraph);
        let dw = subtypes.contains(&SubType::DisruptWord);
        let iw = subtypes.contains(&SubType::InsertWord);
        Some(match (ap, dw, iw) {
            (true, false, false) => &mut self.add_paragraph,
            (false, true, false) => &mut self.disrupt_word,
            (false, false, true) => &mut self.insert_word,
            (true, true, false) => &mut self.add_paragraph_disrupt_word,
            (true, false, true) => &mut self.add_paragraph_insert_word,
            (false, true, true) => &mut self.disrupt_word_insert_word,
            (true, true, true) => &mut self.all_three,
            (false, false, false) => return None,
        })
    }

    pub fn values(&self) -> [usize; 7] {
        [
            self.add_paragraph,
            self.disrupt_word,
            self.insert_word,
            self.add_paragraph_disrupt_word,
            self.add_paragraph_insert_word,
            self.disrupt_word_insert_word,
            self.all_three,
        ]
    }

    pub fn from_values(v: [usize; 7]) -> Self {
        VennRegions {
            add_paragraph: v[0],
            disrupt_word: v[1],
            insert_word: v[2],
            add_paragraph_disrupt_word: v[3],
            add_paragraph_insert_word: v[4],
            disrupt_word_insert_word: v[5],
            all_three: v[6],
        }
    }

    pub fn sum(&self) -> usize {
        self.values().iter().sum()
    }

    /// Emails using a sub-type, alone or combined.
    pub fn total_for(&self, s: SubType) -> usize {
        let v = self.values();
        match s {
            SubType::AddParagraph => v[0] + v[3] + v[4] + v[6],
            SubType::DisruptWord => v[1] + v[3] + v[5] + v[6],
            SubType::InsertWord => v[2] + v[4] + v[5] + v[6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrickCombination {
    pub tricks: BTreeSet<Trick>,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub trick: Option<Trick>,
    pub add_paragraph: usize,
    pub disrupt_word: usize,
    pub insert_word: usize,
}

impl HeatmapRow {
    pub fn get(&self, s: SubType) -> usize {
        match s {
            SubType::AddParagraph => self.add_paragraph,
            SubType::DisruptWord => self.disrupt_word,
            SubType::InsertWord => self.insert_word,
        }
    }

    fn slot(&mut self, s: SubType) -> &mut usize {
        match s {
            SubType::AddParagraph => &mut self.add_paragraph,
            SubType::DisruptWord => &mut self.disrupt_word,
            SubType::InsertWord => &mut self.insert_word,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodsRow {
    pub year: u16,
    pub words_count: usize,
    pub bulk_count: usize,
    pub insert_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TechniquesRow {
    pub year: u16,
    pub size_count: usize,
    pub colour_count: usize,
    pub position_count: usize,
    pub table_count: usize,
    pub other_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanJaccard {
    pub with_concealment: f64,
    pub no_concealment: f64,
}

/// Scalar part of a bundle, written as counts.json.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub pipeline: PipelineCounts,
    pub analysed: usize,
    pub with_concealment: usize,
    pub no_concealment: usize,
    pub percent_with_concealment: f64,
    pub percent_no_concealment: f64,
    /// Concealed emails carrying no sub-type (possible only via human labels).
    pub without_subtype: usize,
    pub human_labeled: usize,
    pub mean_jaccard: MeanJaccard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub counts: Counts,
    pub by_year: Vec<YearRow>,
    pub by_jaccard: Vec<JaccardRow>,
    pub by_length: Vec<LengthRow>,
    pub subtype_venn: VennRegions,
    /// Every non-empty trick subset, most frequent first.
    pub trick_combinations: Vec<TrickCombination>,
    /// One row per trick.
    pub heatmap: Vec<HeatmapRow>,
    pub methods_by_year: Vec<MethodsRow>,
    pub techniques_by_year: Vec<TechniquesRow>,
}

pub fn percent_1dp(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        (part as f64 * 1000.0 / whole as f64).round() / 10.0
    }
}

fn all_trick_subsets() -> Vec<BTreeSet<Trick>> {
    let mut subsets: Vec<BTreeSet<Trick>> = (1u32..(1 << Trick::ALL.len()))
        .map(|mask| {
            Trick::ALL
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, t)| *t)
                .collect()
        })
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subsets
}

fn years() -> impl Iterator<Item = u16> {
    YEAR_MIN..=YEAR_MAX
}

impl ReportBundle {
    pub fn empty() -> ReportBundle {
        ReportBundle {
            counts: Counts::default(),
            by_year: years().map(|year| YearRow { year, ..Default::default() }).collect(),
            by_jaccard: (1..=JACCARD_BINS)
                .map(|b| JaccardRow {
                    jaccard_bin: b,
                    ..Default::default()
                })
                .collect(),
            by_length: (1..=LENGTH_BINS)
                .map(|b| LengthRow {
                    part_length_bin: b,
                    ..Default::default()
                })
                .collect(),
            subtype_venn: VennRegions::default(),
            trick_combinations: all_trick_subsets()
                .into_iter()
                .map(|tricks| TrickCombination { tricks, count: 0 })
                .collect(),
            heatmap: Trick::ALL
                .iter()
                .map(|t| HeatmapRow {
                    trick: Some(*t),
                    ..Default::default()
                })
                .collect(),
            methods_by_year: years().map(|year| MethodsRow { year, ..Default::default() }).collect(),
            techniques_by_year: years().map(|year| TechniquesRow { year, ..Default::default() }).collect(),
        }
    }

    pub fn trick_total(&self, t: Trick) -> usize {
        self.trick_combinations
            .iter()
            .filter(|c| c.tricks.contains(&t))
            .map(|c| c.count)
            .sum()
    }
}

/// Replaces automatic verdicts with the latest human label where one
/// exists.
pub fn apply_labels(records: &[ConcealmentRecord], labels: &[LabelRecord]) -> Vec<ConcealmentRecord> {
    let by_id: BTreeMap<&str, &LabelRecord> = labels.iter().map(|l| (l.id.as_str(), l)).collect();
    records
        .iter()
        .map(|r| match by_id.get(r.id.as_str()) {
            Some(l) => ConcealmentRecord {
                has_concealment: l.has_concealment,
                subtypes: l.subtypes.clone(),
                tricks: l.tricks.clone(),
                label_source: LabelSource::Human,
                ..r.clone()
            },
            None => r.clone(),
        })
        .collect()
}

pub fn aggregate(records: &[ConcealmentRecord], verdicts: &[FilterVerdict]) -> Result<ReportBundle, ReportError> {
    let mut b = ReportBundle::empty();
    b.counts.pipeline = PipelineCounts::from_verdicts(verdicts);

    let mut combos: BTreeMap<BTreeSet<Trick>, usize> = BTreeMap::new();
    let (mut sum_with, mut sum_without) = (0.0, 0.0);

    for r in records {
        let date = r.date.ok_or_else(|| ReportError::MissingJoinKey {
            id: r.id.clone(),
            key: "date",
        })?;
        let jaccard = r.jaccard.ok_or_else(|| ReportError::MissingJoinKey {
            id: r.id.clone(),
            key: "jaccard",
        })?;
        if !(YEAR_MIN..=YEAR_MAX).contains(&date.year) {
            return Err(ReportError::OutOfRange {
                id: r.id.clone(),
                reason: format!("year {}", date.year),
            });
        }
        let jbin = jaccard_bin(jaccard).ok_or_else(|| ReportError::OutOfRange {
            id: r.id.clone(),
            reason: format!("jaccard {jaccard}"),
        })?;
        let yi = (date.year - YEAR_MIN) as usize;
        let c = r.has_concealment;

        b.counts.analysed += 1;
        if r.label_source == LabelSource::Human {
            b.counts.human_labeled += 1;
        }
        let bump = |with: &mut usize, without: &mut usize| {
            if c {
                *with += 1
            } else {
                *without += 1
            }
        };
        let row = &mut b.by_year[yi];
        bump(&mut row.with_concealment, &mut row.no_concealment);
        let row = &mut b.by_jaccard[jbin as usize];
        bump(&mut row.with_concealment, &mut row.no_concealment);
        if let Some(stratum) = r.stratum {
            let row = &mut b.by_length[stratum.length_bin as usize];
            bump(&mut row.with_concealment, &mut row.no_concealment);
        }

        if !c {
            b.counts.no_concealment += 1;
            sum_without += jaccard;
            continue;
        }
        b.counts.with_concealment += 1;
        sum_with += jaccard;

        match b.subtype_venn.slot(&r.subtypes) {
            Some(slot) => *slot += 1,
            None => b.counts.without_subtype += 1,
        }
        if !r.tricks.is_empty() {
            *combos.entry(r.tricks.clone()).or_insert(0) += 1;
        }
        for row in b.heatmap.iter_mut() {
            let t = row.trick.expect("heatmap rows name a trick");
            if r.tricks.contains(&t) {
                for s in &r.subtypes {
                    *row.slot(*s) += 1;
                }
            }
        }
        let m = &mut b.methods_by_year[yi];
        m.words_count += r.subtypes.contains(&SubType::DisruptWord) as usize;
        m.bulk_count += r.subtypes.contains(&SubType::AddParagraph) as usize;
        m.insert_count += r.subtypes.contains(&SubType::InsertWord) as usize;
        let t = &mut b.techniques_by_year[yi];
        t.size_count += r.tricks.contains(&Trick::FontSize) as usize;
        t.colour_count += r.tricks.contains(&Trick::FontColour) as usize;
        t.position_count += r.tricks.contains(&Trick::TextPosition) as usize;
        t.table_count += r.tricks.contains(&Trick::TableManipulation) as usize;
        t.other_count += r.tricks.contains(&Trick::Other) as usize;
    }

    for combo in b.trick_combinations.iter_mut() {
        combo.count = combos.get(&combo.tricks).copied().unwrap_or(0);
    }
    sort_combinations(&mut b.trick_combinations);

    let n = &mut b.counts;
    n.percent_with_concealment = percent_1dp(n.with_concealment, n.analysed);
    n.percent_no_concealment = percent_1dp(n.no_concealment, n.analysed);
    n.mean_jaccard = MeanJaccard {
        with_concealment: if n.with_concealment > 0 {
            sum_with / n.with_concealment as f64
        } else {
            0.0
        },
        no_concealment: if n.no_concealment > 0 {
            sum_without / n.no_concealment as f64
        } else {
            0.0
        },
    };
    Ok(b)
}

fn sort_combinations(c: &mut [TrickCombination]) {
    c.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(a.tricks.len().cmp(&b.tricks.len()))
            .then_with(|| a.tricks.cmp(&b.tricks))
    });
}

pub const REPORT_FILES: [&str; 9] = [
    "counts.json",
    "concealment_by_year.csv",
    "concealment_by_jaccard.csv",
    "concealment_by_length.csv",
    "subtype_venn.csv",
    "trick_combinations.csv",
    "heatmap.csv",
    "concealment_methods_by_year.csv",
    "css_techniques_by_year.csv",
];

#[derive(Debug, Serialize, Deserialize)]
struct VennCsvRow {
    region: String,
    count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ComboCsvRow {
    tricks: String,
    count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
struct HeatmapCsvRow {
    #[serde(rename = "trick")]
    trick: String,
    add_paragraph: usize,
    disrupt_word: usize,
    insert_word: usize,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, headers: &[&str]) -> Result<(), ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(headers).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ReportError> {
    let mut r = csv::Reader::from_path(path).map_err(|source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|source| ReportError::Csv {
            path: path.to_path_buf(),
            source,
        })
}

fn join_tricks(tricks: &BTreeSet<Trick>) -> String {
    tricks.iter().map(|t| t.as_str()).collect::<Vec<_>>().join("+")
}

/// Writes counts.json and one CSV per table; returns the paths written.
pub fn emit_reports(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let p = |name: &str| dir.join(name);

    let counts_path = p("counts.json");
    let json = serde_json::to_vec_pretty(&bundle.counts).map_err(|source| ReportError::Json {
        path: counts_path.clone(),
        source,
    })?;
    std::fs::write(&counts_path, json).map_err(|source| ReportError::Io {
        path: counts_path.clone(),
        source,
    })?;

    let bins = ["with_concealment", "no_concealment"];
    write_csv(&p("concealment_by_year.csv"), &bundle.by_year, &["year", bins[0], bins[1]])?;
    write_csv(&p("concealment_by_jaccard.csv"), &bundle.by_jaccard, &["jaccard_bin", bins[0], bins[1]])?;
    write_csv(&p("concealment_by_length.csv"), &bundle.by_length, &["part_length_bin", bins[0], bins[1]])?;
    write_csv(
        &p("subtype_venn.csv"),
        VennRegions::NAMES
            .iter()
            .zip(bundle.subtype_venn.values())
            .map(|(n, c)| VennCsvRow {
                region: n.to_string(),
                count: c,
            }),
        &["region", "count"],
    )?;
    write_csv(
        &p("trick_combinations.csv"),
        bundle.trick_combinations.iter().map(|c| ComboCsvRow {
            tricks: join_tricks(&c.tricks),
            count: c.count,
        }),
        &["tricks", "count"],
    )?;
    write_csv(
        &p("heatmap.csv"),
        bundle.heatmap.iter().map(|r| HeatmapCsvRow {
            trick: r.trick.map(|t| t.to_string()).unwrap_or_default(),
            add_paragraph: r.add_paragraph,
            disrupt_word: r.disrupt_word,
            insert_word: r.insert_word,
        }),
        &["trick", "AddParagraph", "DisruptWord", "InsertWord"],
    )?;
    write_csv(
        &p("concealment_methods_by_year.csv"),
        &bundle.methods_by_year,
        &["year", "words_count", "bulk_count", "insert_count"],
    )?;
    write_csv(
        &p("css_techniques_by_year.csv"),
        &bundle.techniques_by_year,
        &["year", "size_count", "colour_count", "position_count", "table_count", "other_count"],
    )?;
    Ok(REPORT_FILES.iter().map(|n| p(n)).collect())
}

/// Reads back a directory written by [`emit_reports`].
pub fn load_reports(dir: &Path) -> Result<ReportBundle, ReportError> {
    let p = |name: &str| dir.join(name);
    let malformed = |name: &str, reason: String| ReportError::Malformed { path: p(name), reason };

    let counts_path = p("counts.json");
    let bytes = std::fs::read(&counts_path).map_err(|source| ReportError::Io {
        path: counts_path.clone(),
        source,
    })?;
    let counts: Counts = serde_json::from_slice(&bytes).map_err(|source| ReportError::Json {
        path: counts_path.clone(),
        source,
    })?;

    let venn_rows: Vec<VennCsvRow> = read_csv(&p("subtype_venn.csv"))?;
    let mut venn = [0usize; 7];
    for row in venn_rows {
        let i = VennRegions::NAMES
            .iter()
            .position(|n| *n == row.region)
            .ok_or_else(|| malformed("subtype_venn.csv", format!("unknown region {:?}", row.region)))?;
        venn[i] = row.count;
    }

    let combos: Vec<ComboCsvRow> = read_csv(&p("trick_combinations.csv"))?;
    let trick_combinations = combos
        .into_iter()
        .map(|c| {
            let tricks = c
                .tricks
                .split('+')
                .map(str::parse)
                .collect::<Result<BTreeSet<Trick>, _>>()
                .map_err(|e| malformed("trick_combinations.csv", e.to_string()))?;
            Ok(TrickCombination { tricks, count: c.count })
        })
        .collect::<Result<Vec<_>, ReportError>>()?;

    let heat: Vec<HeatmapCsvRow> = read_csv(&p("heatmap.csv"))?;
    let heatmap = heat
        .into_iter()
        .map(|r| {
            let trick = r.trick.parse().map_err(|e: crate::classify::InvalidEnum| malformed("heatmap.csv", e.to_string()))?;
            Ok(HeatmapRow {
                trick: Some(trick),
                add_paragraph: r.add_paragraph,
                disrupt_word: r.disrupt_word,
                insert_word: r.insert_word,
            })
        })
        .collect::<Result<Vec<_>, ReportError>>()?;

    Ok(ReportBundle {
        counts,
        by_year: read_csv(&p("concealment_by_year.csv"))?,
        by_jaccard: read_csv(&p("concealment_by_jaccard.csv"))?,
        by_length: read_csv(&p("concealment_by_length.csv"))?,
        subtype_venn: VennRegions::from_values(venn),
        trick_combinations,
        heatmap,
        methods_by_year: read_csv(&p("concealment_methods_by_year.csv"))?,
        techniques_by_year: read_csv(&p("css_techniques_by_year.csv"))?,
    })
}
