//! Review store behind the HTTP service: sampled emails, their four
//! perspectives and analyst labels.

use std::collections::{BTreeMap, BTreeSet};

use chrono::Utc;
use serde::{Deserialize, Serialize};
use similar::{capture_diff_slices, Algorithm, DiffTag};

use crate::artifacts::SampleRecord;
use crate::classify::{classify, ConcealmentRecord, InvalidEnum, LabelSource, SubType, Trick};
use crate::filters::FilterVerdict;
use crate::labels::{LabelInput, LabelLog, LabelLogError, LabelRecord};
use crate::report::{aggregate, apply_labels, ReportBundle, ReportError};
use crate::sampler::StratumLabel;
use crate::views::{ConcealedSpan, ViewConfig};

pub const DEFAULT_PAGE_SIZE: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum ReviewError {
    #[error("unknown email id {0:?}")]
    UnknownId(String),
    #[error(transparent)]
    InvalidEnum(#[from] InvalidEnum),
    #[error(transparent)]
    Storage(#[from] LabelLogError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleQuery {
    pub stratum: Option<StratumLabel>,
    pub labeled: Option<bool>,
    /// 1-based; 0 is treated as 1.
    pub page: Option<usize>,
    pub page_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutoSummary {
    pub has_concealment: bool,
    pub subtypes: BTreeSet<SubType>,
    pub tricks: BTreeSet<Trick>,
}

impl From<&ConcealmentRecord> for AutoSummary {
    fn from(r: &ConcealmentRecord) -> Self {
        AutoSummary {
            has_concealment: r.has_concealment,
            subtypes: r.subtypes.clone(),
            tricks: r.tricks.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub id: String,
    pub stratum: StratumLabel,
    pub round: u8,
    pub labeled: bool,
    pub auto: AutoSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePage {
    pub items: Vec<SampleSummary>,
    pub page: usize,
    pub page_size: usize,
    pub total: usize,
    pub pages: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffKind {
    Equal,
    /// Present in the mail filter view only.
    Delete,
    /// Present in the recipient view only.
    Insert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSegment {
    pub op: DiffKind,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perspectives {
    pub id: String,
    pub stratum: StratumLabel,
    pub raw_source: String,
    pub normalized_html: String,
    pub mail_filter_tokens: Vec<String>,
    pub recipient_tokens: Vec<String>,
    pub token_diff: Vec<DiffSegment>,
    pub spans: Vec<ConcealedSpan>,
    pub auto_labels: AutoSummary,
    pub human_label: Option<LabelRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelHistory {
    pub latest: Option<LabelRecord>,
    pub history: Vec<LabelRecord>,
}

/// Aligns the mail filter tokens to the recipient tokens.
pub fn token_diff(mail_filter: &[String], recipient: &[String]) -> Vec<DiffSegment> {
    let mut out: Vec<DiffSegment> = Vec::new();
    let mut push = |op: DiffKind, tokens: &[String]| {
        if tokens.is_empty() {
            return;
        }
        match out.last_mut() {
            Some(last) if last.op == op => last.tokens.extend_from_slice(tokens),
            _ => out.push(DiffSegment {
                op,
                tokens: tokens.to_vec(),
            }),
        }
    };
    for op in capture_diff_slices(Algorithm::Myers, mail_filter, recipient) {
        let (tag, old, new) = op.as_tag_tuple();
        match tag {
            DiffTag::Equal => push(DiffKind::Equal, &mail_filter[old]),
            DiffTag::Delete => push(DiffKind::Delete, &mail_filter[old]),
            DiffTag::Insert => push(DiffKind::Insert, &recipient[new]),
            DiffTag::Replace => {
                push(DiffKind::Delete, &mail_filter[old]);
                push(DiffKind::Insert, &recipient[new]);
            }
        }
    }
    out
}

pub struct ReviewStore {
    sample: BTreeMap<String, SampleRecord>,
    records: BTreeMap<String, ConcealmentRecord>,
    verdicts: Vec<FilterVerdict>,
    labels: LabelLog,
}

impl ReviewStore {
    /// Sampled emails without an automatic record get one computed from
    /// their stored views.
    pub fn new(
        sample: Vec<SampleRecord>,
        records: Vec<ConcealmentRecord>,
        verdicts: Vec<FilterVerdict>,
        labels: LabelLog,
    ) -> ReviewStore {
        let mut records: BTreeMap<String, ConcealmentRecord> =
            records.into_iter().map(|r| (r.id.clone(), r)).collect();
        let p_tok = ViewConfig::default().paragraph_tokens;
        let sample: BTreeMap<String, SampleRecord> = sample.into_iter().map(|s| (s.view.id.clone(), s)).collect();
        for (id, s) in &sample {
            records.entry(id.clone()).or_insert_with(|| {
                let mut r = classify(id, &s.view.views, p_tok);
                r.date = s.view.date;
                r.stratum = Some(s.stratum);
                r.html_length = Some(s.view.html_length);
                r
            });
        }
        ReviewStore {
            sample,
            records,
            verdicts,
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    fn sampled(&self, id: &str) -> Result<&SampleRecord, ReviewError> {
        self.sample.get(id).ok_or_else(|| ReviewError::UnknownId(id.to_string()))
    }

    pub fn list_sample(&self, q: &SampleQuery) -> SamplePage {
        let page_size = q.page_size.filter(|n| *n > 0).unwrap_or(DEFAULT_PAGE_SIZE);
        let page = q.page.unwrap_or(1).max(1);
        let matching: Vec<&SampleRecord> = self
            .sample
            .values()
            .filter(|s| q.stratum.is_none_or(|st| s.stratum == st))
            .filter(|s| q.labeled.is_none_or(|l| self.labels.is_labeled(&s.view.id) == l))
            .collect();
        let total = matching.len();
        let items = matching
            .into_iter()
            .skip((page - 1) * page_size)
            .take(page_size)
            .map(|s| SampleSummary {
                id: s.view.id.clone(),
                stratum: s.stratum,
                round: s.round,
                labeled: self.labels.is_labeled(&s.view.id),
                auto: AutoSummary::from(&self.records[&s.view.id]),
            })
            .collect();
        SamplePage {
            items,
            page,
            page_size,
            total,
            pages: total.div_ceil(page_size),
        }
    }

    pub fn perspectives(&self, id: &str) -> Result<Perspectives, ReviewError> {
        let s = self.sampled(id)?;
        let v = &s.view;
        let auto = &self.records[id];
        Ok(Perspectives {
            id: id.to_string(),
            stratum: s.stratum,
            raw_source: v.raw_source.clone(),
            normalized_html: v.normalized_html.clone(),
            mail_filter_tokens: v.views.mail_filter.tokens.clone(),
            recipient_tokens: v.views.recipient.tokens.clone(),
            token_diff: token_diff(&v.views.mail_filter.tokens, &v.views.recipient.tokens),
            spans: v.views.concealed_spans.clone(),
            auto_labels: AutoSummary::from(auto),
            human_label: self.labels.latest(id).cloned(),
        })
    }

    pub fn post_label(&mut self, id: &str, input: LabelInput) -> Result<LabelRecord, ReviewError> {
        self.sampled(id)?;
        let record = input.into_record(id, Utc::now())?;
        Ok(self.labels.append(record)?.clone())
    }

    pub fn labels(&self, id: &str) -> Result<LabelHistory, ReviewError> {
        self.sampled(id)?;
        Ok(LabelHistory {
            latest: self.labels.latest(id).cloned(),
            history: self.labels.history(id).to_vec(),
        })
    }

    /// Report over the sample with human labels applied.
    pub fn stats(&self) -> Result<ReportBundle, ReviewError> {
        let records: Vec<ConcealmentRecord> = self
            .sample
            .keys()
            .map(|id| self.records[id].clone())
            .collect();
        let latest: Vec<LabelRecord> = self.labels.latest_all().cloned().collect();
        let merged = apply_labels(&records, &latest);
        Ok(aggregate(&merged, &self.verdicts)?)
    }

    pub fn label_source(&self, id: &str) -> Option<LabelSource> {
        self.sample.get(id)?;
        Some(if self.labels.is_labeled(id) {
            LabelSource::Human
        } else {
            LabelSource::Auto
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn diff_marks_filter_only_tokens() {
        let d = token_diff(&toks("get pil ls now"), &toks("get pills now"));
        assert_eq!(d[0].op, DiffKind::Equal);
        assert!(d.iter().any(|s| s.op == DiffKind::Delete && s.tokens == toks("pil ls")));
        assert!(d.iter().any(|s| s.op == DiffKind::Insert && s.tokens == toks("pills")));
    }

    #[test]
    fn identical_views_diff_all_equal() {
        let d = token_diff(&toks("a b c"), &toks("a b c"));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].op, DiffKind::Equal);
        assert!(token_diff(&[], &[]).is_empty());
    }
}
