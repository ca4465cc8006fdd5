//! Content concealment analysis for HTML email.
//!
//! The pipeline reads a corpus of RFC 5322 messages, filters it down to
//! emails whose rendering can be judged statically, then compares two word
//! lists per email: what a text-based mail filter reads (every text node in
//! source order) and what the recipient sees (text nodes that survive an
//! analytic CSS visibility model). Differences are classified into
//! concealment sub-types and CSS trick categories.
//!
//! Module map:
//!
//! - [`ingest`]: corpus walking, RFC 5322/MIME parsing, transfer and charset decoding
//! - [`filters`]: the eligibility pipeline and its stage accounting
//! - [`lang`]: pluggable language identification with a built-in heuristic
//! - [`dom`], [`css`], [`style`], [`color`], [`visibility`]: the style model
//! - [`views`]: mail-filter and recipient token views with concealed spans
//! - [`metrics`]: Jaccard distance and tolerant overlap coefficient
//! - [`sampler`]: stratified sampling over year, Jaccard and HTML length
//! - [`classify`]: concealment detection, sub-types and tricks
//! - [`report`]: aggregation into plot-ready tables
//! - [`labels`], [`review`]: analyst label log and review-service logic
//! - [`artifacts`], [`jsonl`]: records passed between stages

pub mod artifacts;
pub mod classify;
pub mod color;
pub mod css;
pub mod dom;
pub mod filters;
pub mod ingest;
pub mod jsonl;
pub mod labels;
pub mod lang;
pub mod metrics;
pub mod report;
pub mod review;
pub mod sampler;
pub mod style;
pub mod views;
pub mod visibility;

pub use classify::{ConcealmentRecord, SubType, Trick};
pub use filters::{FilterVerdict, PipelineCounts, Stage};
pub use ingest::{EmailDocument, RawEmail, YearMonth};
pub use views::{ConcealedSpan, TokenList, ViewPair};
pub use visibility::{ConcealReason, VisibilityJudgment, VisibilityThresholds};
