//! Records exchanged between pipeline stages and the review service.

use serde::{Deserialize, Serialize};

use crate::filters::ProcessedEmail;
use crate::ingest::{RawEmail, YearMonth};
use crate::sampler::StratumLabel;
use crate::views::ViewPair;

/// One email's views plus what the reviewer needs to see its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<YearMonth>,
    pub html_length: usize,
    pub raw_source: String,
    pub normalized_html: String,
    pub views: ViewPair,
}

impl ViewRecord {
    /// Builds a record for an email that reached view extraction.
    pub fn from_processed(raw: &RawEmail, processed: &ProcessedEmail) -> Option<ViewRecord> {
        let doc = processed.document.as_ref()?;
        Some(ViewRecord {
            id: raw.id.clone(),
            date: raw.received_date,
            html_length: doc.html_length,
            raw_source: String::from_utf8_lossy(&raw.bytes).into_owned(),
            normalized_html: processed.normalized_html.clone()?,
            views: processed.views.clone()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    #[serde(flatten)]
    pub view: ViewRecord,
    pub stratum: StratumLabel,
    pub round: u8,
}
