//! Concealment detection, sub-type rules and CSS trick attribution.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::YearMonth;
use crate::sampler::StratumLabel;
use crate::views::{Boundary, ConcealedSpan, ViewPair};
use crate::visibility::ConcealReason;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubType {
    AddParagraph,
    DisruptWord,
    InsertWord,
}

impl SubType {
    pub const ALL: [SubType; 3] = [SubType::AddParagraph, SubType::DisruptWord, SubType::InsertWord];

    pub fn as_str(self) -> &'static str {
        match self {
            SubType::AddParagraph => "AddParagraph",
            SubType::DisruptWord => "DisruptWord",
            SubType::InsertWord => "InsertWord",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Trick {
    FontColour,
    FontSize,
    TextPosition,
    TableManipulation,
    Other,
}

impl Trick {
    pub const ALL: [Trick; 5] = [
        Trick::FontColour,
        Trick::FontSize,
        Trick::TextPosition,
        Trick::TableManipulation,
        Trick::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Trick::FontColour => "FontColour",
            Trick::FontSize => "FontSize",
            Trick::TextPosition => "TextPosition",
            Trick::TableManipulation => "TableManipulation",
            Trick::Other => "Other",
        }
    }
}

impl From<ConcealReason> for Trick {
    fn from(r: ConcealReason) -> Trick {
        match r {
            ConcealReason::FontColour => Trick::FontColour,
            ConcealReason::FontSize => Trick::FontSize,
            ConcealReason::TextPosition => Trick::TextPosition,
            ConcealReason::TableManipulation => Trick::TableManipulation,
            ConcealReason::Other => Trick::Other,
        }
    }
}

impl fmt::Display for SubType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Trick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {kind} value {value:?}")]
pub struct InvalidEnum {
    pub kind: &'static str,
    pub value: String,
}

impl FromStr for SubType {
    type Err = InvalidEnum;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SubType::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| InvalidEnum {
                kind: "subtype",
                value: s.to_string(),
            })
    }
}

impl FromStr for Trick {
    type Err = InvalidEnum;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Trick::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| InvalidEnum {
                kind: "trick",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Auto,
    Human,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcealmentRecord {
    pub id: String,
    pub has_concealment: bool,
    pub subtypes: BTreeSet<SubType>,
    pub tricks: BTreeSet<Trick>,
    pub spans: Vec<ConcealedSpan>,
    pub label_source: LabelSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<YearMonth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jaccard: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stratum: Option<StratumLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html_length: Option<usize>,
}

/// Concealment is present when some hidden span carries a token
/// character. Returns the spans that back the decision (all of them, or
/// none).
pub fn detect_concealment(views: &ViewPair) -> (bool, Vec<ConcealedSpan>) {
    let found = views.concealed_spans.iter().any(ConcealedSpan::has_token_char);
    if found {
        (true, views.concealed_spans.clone())
    } else {
        (false, Vec::new())
    }
}

pub fn classify_subtypes(spans: &[ConcealedSpan], paragraph_tokens: usize) -> BTreeSet<SubType> {
    let mut out = BTreeSet::new();
    for span in spans {
        match span.boundary {
            Boundary::BlockRun => {
                out.insert(SubType::AddParagraph);
            }
            Boundary::SplitsVisibleWord => {
                out.insert(SubType::DisruptWord);
            }
            Boundary::WholeWordBetweenVisible => {
                if span.run_length_tokens < paragraph_tokens && span.has_token_char() {
                    out.insert(SubType::InsertWord);
                }
            }
        }
    }
    out
}

pub fn attribute_tricks(spans: &[ConcealedSpan]) -> BTreeSet<Trick> {
    let mut out = BTreeSet::new();
    for span in spans {
        if span.reasons.is_empty() {
            out.insert(Trick::Other);
        }
        out.extend(span.reasons.iter().copied().map(Trick::from));
    }
    out
}

/// Automatic record for one email's views.
pub fn classify(id: &str, views: &ViewPair, paragraph_tokens: usize) -> ConcealmentRecord {
    let (has_concealment, spans) = detect_concealment(views);
    let subtypes = classify_subtypes(&spans, paragraph_tokens);
    let tricks = attribute_tricks(&spans);
    ConcealmentRecord {
        id: id.to_string(),
        has_concealment,
        subtypes,
        tricks,
        spans,
        label_source: LabelSource::Auto,
        date: None,
        jaccard: Some(views.jaccard),
        stratum: None,
        html_length: None,
    }
}
